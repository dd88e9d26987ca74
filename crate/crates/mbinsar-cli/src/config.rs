//! The JSON experiment configuration every subcommand reads.
//!
//! One file describes the whole experiment: radar geometry, truth scene,
//! baseline configuration (fixed or as design grids), coherence, error
//! injection, trial count and the root seed. Unknown keys are rejected so a
//! typo in a sweep definition fails loudly instead of silently running the
//! defaults.

use mbinsar::design;
use mbinsar::geometry::{BaselineConfiguration, BaselineMode, RadarGeometry, SPEED_OF_LIGHT};
use mbinsar::io::read_height_field;
use mbinsar::scene::{blocks_scene, canopy_scene, ramp_scene, Block, HeightField};
use mbinsar::simulate::OrbitErrorParams;
use mbinsar::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Version tag a configuration file must carry.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Radar geometry in the units a configuration file uses; converted to a
/// validated [`RadarGeometry`] before any computation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySpec {
    pub frequency_ghz: f64,
    pub slant_range_m: f64,
    pub incidence_deg: f64,
    pub range_spacing_m: f64,
    pub azimuth_spacing_m: f64,
    pub azimuth_time_step_s: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        let nominal = RadarGeometry::x_band_tandem();
        GeometrySpec {
            frequency_ghz: SPEED_OF_LIGHT / nominal.wavelength / 1e9,
            slant_range_m: nominal.slant_range,
            incidence_deg: nominal.incidence.to_degrees(),
            range_spacing_m: nominal.range_spacing,
            azimuth_spacing_m: nominal.azimuth_spacing,
            azimuth_time_step_s: nominal.azimuth_time_step,
        }
    }
}

impl GeometrySpec {
    pub fn radar(&self) -> Result<RadarGeometry> {
        if !(self.frequency_ghz > 0.0) {
            return Err(Error::InvalidParameter {
                name: "frequency_ghz",
                message: "must be positive".into(),
            });
        }
        let geom = RadarGeometry {
            wavelength: SPEED_OF_LIGHT / (self.frequency_ghz * 1e9),
            slant_range: self.slant_range_m,
            incidence: self.incidence_deg.to_radians(),
            range_spacing: self.range_spacing_m,
            azimuth_spacing: self.azimuth_spacing_m,
            azimuth_time_step: self.azimuth_time_step_s,
        };
        geom.validate()?;
        Ok(geom)
    }
}

/// A rectangular target in scene coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    pub height_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatSpec {
    pub rows: usize,
    pub cols: usize,
    pub height_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSpec {
    pub rows: usize,
    pub cols: usize,
    pub max_height_m: f64,
    #[serde(default)]
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanopySpec {
    pub rows: usize,
    pub cols: usize,
    pub mean_height_m: f64,
    pub jitter_std_m: f64,
    pub density: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemSpec {
    pub path: PathBuf,
}

/// Truth terrain: one of the built-in generators or a DEM file in the
/// height-field CSV format.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneSpec {
    Flat(FlatSpec),
    Ramp(RampSpec),
    Canopy(CanopySpec),
    Dem(DemSpec),
}

impl SceneSpec {
    /// Builds the truth field; generator randomness derives from the root
    /// seed so the scene is part of the reproducible experiment.
    pub fn synthesize(&self, seed: u64) -> Result<HeightField> {
        match self {
            SceneSpec::Flat(s) => HeightField::flat(s.rows, s.cols, s.height_m),
            SceneSpec::Ramp(s) => {
                let base = ramp_scene(s.rows, s.cols, s.max_height_m)?;
                let blocks: Vec<Block> = s
                    .blocks
                    .iter()
                    .map(|b| Block {
                        row0: b.row0,
                        col0: b.col0,
                        rows: b.rows,
                        cols: b.cols,
                        height: b.height_m,
                    })
                    .collect();
                blocks_scene(&base, &blocks)
            }
            SceneSpec::Canopy(s) => {
                canopy_scene(s.rows, s.cols, s.mean_height_m, s.jitter_std_m, s.density, seed)
            }
            SceneSpec::Dem(s) => {
                let (field, _) = read_height_field(&s.path)?;
                Ok(field)
            }
        }
    }
}

/// Inclusive sweep range.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start_m: f64,
    pub stop_m: f64,
    pub step_m: f64,
}

impl GridSpec {
    fn values(&self, name: &'static str) -> Result<Vec<f64>> {
        if !(self.start_m > 0.0 && self.step_m > 0.0 && self.stop_m >= self.start_m) {
            return Err(Error::InvalidParameter {
                name,
                message: "needs start > 0, step > 0 and stop >= start".into(),
            });
        }
        Ok(design::grid(self.start_m, self.stop_m, self.step_m))
    }
}

/// Baseline layout: the mode plus either fixed (L1, L2) separations for
/// simulation and estimation, or candidate grids for the design sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationSpec {
    pub mode: BaselineMode,
    pub antenna_baseline_m: Option<f64>,
    pub satellite_baseline_m: Option<f64>,
    pub antenna_grid_m: Option<GridSpec>,
    pub satellite_grid_m: Option<GridSpec>,
}

impl ConfigurationSpec {
    /// The fixed configuration, required by simulate, unwrap and estimate.
    pub fn fixed(&self) -> Result<BaselineConfiguration> {
        match (self.antenna_baseline_m, self.satellite_baseline_m) {
            (Some(l1), Some(l2)) => {
                let cfg = BaselineConfiguration::new(self.mode, l1, l2);
                cfg.validate()?;
                Ok(cfg)
            }
            _ => Err(Error::InvalidParameter {
                name: "configuration",
                message: "antenna_baseline_m and satellite_baseline_m are required".into(),
            }),
        }
    }

    /// Antenna candidates for the design sweep. Defaults to 0.5..16 m in
    /// 0.5 m steps, a desk-scale version of the published sweep range.
    pub fn antenna_grid(&self) -> Result<Vec<f64>> {
        match self.antenna_grid_m {
            Some(spec) => spec.values("antenna_grid_m"),
            None => Ok(design::grid(0.5, 16.0, 0.5)),
        }
    }

    /// Satellite candidates for the design sweep, 10..400 m in 2 m steps
    /// by default.
    pub fn satellite_grid(&self) -> Result<Vec<f64>> {
        match self.satellite_grid_m {
            Some(spec) => spec.values("satellite_grid_m"),
            None => Ok(design::grid(10.0, 400.0, 2.0)),
        }
    }
}

/// Design-search thresholds; the defaults mirror the published criterion
/// (98% success rate, 1 m relative precision, 100 m height span).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSpec {
    pub significance_alpha: f64,
    pub expected_height_precision_m: f64,
    pub max_height_difference_m: f64,
    /// Monte Carlo refinement of the k best feasible cells; 0 disables it.
    pub refine_top_k: usize,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            significance_alpha: 0.02,
            expected_height_precision_m: 1.0,
            max_height_difference_m: 100.0,
            refine_top_k: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtmosphereSpec {
    /// Root mean square of the delay screen (rad).
    pub rms_rad: f64,
    /// Power-law spectral exponent, must exceed 2.
    pub exponent: f64,
    /// Outer scale of the turbulence in grid cells.
    pub outer_scale_cells: f64,
}

/// Error sources injected by simulate; both default to off.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorsSpec {
    pub orbit: Option<OrbitErrorParams>,
    pub atmosphere: Option<AtmosphereSpec>,
}

fn default_coherence() -> f64 {
    0.99
}

fn default_trials() -> usize {
    500
}

/// Root of the configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub geometry: GeometrySpec,
    pub scene: Option<SceneSpec>,
    pub configuration: ConfigurationSpec,
    #[serde(default)]
    pub design: DesignSpec,
    #[serde(default = "default_coherence")]
    pub coherence: f64,
    #[serde(default)]
    pub errors: ErrorsSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Format {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!(
                    "schema_version {} is not the supported {}",
                    config.schema_version, CONFIG_SCHEMA_VERSION
                ),
            });
        }
        Ok(config)
    }
}

/// Configuration after the command line overrides are applied.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub geom: RadarGeometry,
    pub out: PathBuf,
    pub seed: u64,
    pub trials: usize,
}

impl Resolved {
    pub fn new(
        config: ExperimentConfig,
        out: Option<PathBuf>,
        seed: Option<u64>,
        trials: Option<usize>,
    ) -> Result<Resolved> {
        let geom = config.geometry.radar()?;
        let out = out
            .or_else(|| config.output_dir.clone())
            .ok_or(Error::InvalidParameter {
                name: "output_dir",
                message: "set output_dir in the config or pass --out".into(),
            })?;
        let seed = seed.unwrap_or(config.seed);
        let trials = trials.unwrap_or(config.trials);
        if trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                message: "must be at least 1".into(),
            });
        }
        Ok(Resolved { config, geom, out, seed, trials })
    }
}
