//! Synthetic multi-baseline interferogram stacks.
//!
//! Each stack member is the wrapped sum of the topographic phase, an orbit
//! error screen (dual-satellite members only, doubled for mono-static
//! pairs), an atmospheric delay screen (mono-static members only), and
//! coherence-driven Gaussian phase noise. The dual-antenna interferogram is
//! clean of both screens because both of its images share one platform and
//! one atmospheric path.

use crate::geometry::{
    coherence_to_phase_std, equivalent_baselines, phase_std_within_validity, wrap,
    BaselineConfiguration, BaselineMode, RadarGeometry,
};
use crate::scene::{max_height_difference, HeightField};
use crate::stats;
use crate::{Error, Result};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How an interferogram's two images were acquired. Decides which error
/// sources contaminate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterferogramKind {
    /// Both images from one satellite's two antennas.
    DualAntenna,
    /// One transmitter, receivers on both satellites.
    DualSatelliteBistatic,
    /// Each satellite images independently.
    DualSatelliteMonostatic,
}

impl InterferogramKind {
    pub fn is_dual_satellite(&self) -> bool {
        !matches!(self, InterferogramKind::DualAntenna)
    }

    /// Multiplier on the orbit error screen: 0 for dual-antenna, 1 for
    /// bi-static, 2 for mono-static (both the transmit and receive paths of
    /// the slave move with the baseline error).
    pub fn orbit_factor(&self) -> f64 {
        match self {
            InterferogramKind::DualAntenna => 0.0,
            InterferogramKind::DualSatelliteBistatic => 1.0,
            InterferogramKind::DualSatelliteMonostatic => 2.0,
        }
    }

    /// Mono-static members also carry the differential atmospheric delay.
    pub fn carries_atmosphere(&self) -> bool {
        matches!(self, InterferogramKind::DualSatelliteMonostatic)
    }
}

impl std::fmt::Display for InterferogramKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            InterferogramKind::DualAntenna => "DualAntenna",
            InterferogramKind::DualSatelliteBistatic => "DualSatelliteBistatic",
            InterferogramKind::DualSatelliteMonostatic => "DualSatelliteMonostatic",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for InterferogramKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DualAntenna" => Ok(InterferogramKind::DualAntenna),
            "DualSatelliteBistatic" => Ok(InterferogramKind::DualSatelliteBistatic),
            "DualSatelliteMonostatic" => Ok(InterferogramKind::DualSatelliteMonostatic),
            other => Err(Error::invalid("kind", format!("unknown interferogram kind {other:?}"))),
        }
    }
}

/// Acquisition kinds of the three interferograms of each layout, in the
/// same order as [`equivalent_baselines`].
pub fn member_kinds(mode: BaselineMode) -> [InterferogramKind; 3] {
    use InterferogramKind::*;
    match mode {
        BaselineMode::Config1 => [DualAntenna, DualSatelliteBistatic, DualSatelliteBistatic],
        BaselineMode::Config2 => [
            DualSatelliteBistatic,
            DualSatelliteBistatic,
            DualSatelliteBistatic,
        ],
        BaselineMode::Config3 => [
            DualSatelliteBistatic,
            DualSatelliteBistatic,
            DualSatelliteBistatic,
        ],
        BaselineMode::Config4 => [DualAntenna, DualSatelliteMonostatic, DualSatelliteMonostatic],
    }
}

/// One flattened interferogram of the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    /// Wrapped phase in (-pi, pi].
    pub wrapped_phase: Array2<f64>,
    /// Perpendicular baseline (m).
    pub b_perp: f64,
    /// Coherence magnitude in (0, 1].
    pub coherence: f64,
    pub kind: InterferogramKind,
    /// Centered acquisition time of each row (s).
    pub azimuth_time: Vec<f64>,
}

/// A co-registered multi-baseline stack over one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferogramStack {
    /// Members sorted ascending by perpendicular baseline.
    pub interferograms: Vec<Interferogram>,
    pub geometry: RadarGeometry,
    /// Valid-scatterer mask inherited from the scene.
    pub mask: Array2<bool>,
    /// Phase reference, always masked-in.
    pub reference_pixel: (usize, usize),
}

impl InterferogramStack {
    pub fn rows(&self) -> usize {
        self.mask.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mask.ncols()
    }

    /// Perpendicular baselines of the members, ascending.
    pub fn baselines(&self) -> Vec<f64> {
        self.interferograms.iter().map(|i| i.b_perp).collect()
    }

    /// Overrides the default centre reference with a chosen masked-in
    /// pixel. Anchoring the phase datum at a known-height scatterer removes
    /// the reference height from every derived product.
    pub fn with_reference_pixel(mut self, pixel: (usize, usize)) -> Result<Self> {
        self.reference_pixel = pixel;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interferograms.is_empty() {
            return Err(Error::invalid("interferograms", "stack must not be empty"));
        }
        let dim = self.mask.dim();
        for (i, ifg) in self.interferograms.iter().enumerate() {
            if ifg.wrapped_phase.dim() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "member {i} grid {:?} vs mask {:?}",
                    ifg.wrapped_phase.dim(),
                    dim
                )));
            }
            if !(ifg.coherence > 0.0 && ifg.coherence <= 1.0) {
                return Err(Error::invalid("coherence", format!("member {i} outside (0, 1]")));
            }
            if ifg.azimuth_time.len() != dim.0 {
                return Err(Error::ShapeMismatch(format!(
                    "member {i} azimuth_time length {} vs {} rows",
                    ifg.azimuth_time.len(),
                    dim.0
                )));
            }
            if i > 0 && ifg.b_perp <= self.interferograms[i - 1].b_perp {
                return Err(Error::invalid("interferograms", "members must ascend by b_perp"));
            }
        }
        let (r, c) = self.reference_pixel;
        if r >= dim.0 || c >= dim.1 || !self.mask[(r, c)] {
            return Err(Error::invalid("reference_pixel", "must be in bounds and masked-in"));
        }
        Ok(())
    }
}

/// Residual baseline error and its along-track drift rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitErrorParams {
    /// Cross-track baseline error (m).
    pub delta_bc: f64,
    /// Cross-track error drift (m/s).
    pub delta_bc_rate: f64,
    /// Normal baseline error (m).
    pub delta_bn: f64,
    /// Normal error drift (m/s).
    pub delta_bn_rate: f64,
}

impl OrbitErrorParams {
    pub fn zero() -> Self {
        OrbitErrorParams {
            delta_bc: 0.0,
            delta_bc_rate: 0.0,
            delta_bn: 0.0,
            delta_bn_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta_bc, self.delta_bc_rate, self.delta_bn, self.delta_bn_rate];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("orbit", "parameters must be finite"));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.delta_bc, self.delta_bc_rate, self.delta_bn, self.delta_bn_rate]
    }
}

/// Differential atmospheric delay expressed as phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphericScreen {
    pub delay_phase: Array2<f64>,
    /// Spectral decay exponent of the generating power law.
    pub spatial_exponent: f64,
    /// Root-mean-square of the screen (rad).
    pub rms: f64,
}

/// Master position and nominal baseline in the track/cross/normal frame,
/// with the target at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    /// Master satellite position relative to the target (m).
    pub master_position: [f64; 3],
    /// Nominal baseline vector (B_t, B_c, B_n) to the slave (m).
    pub baseline_vector: [f64; 3],
    /// Unit line of sight from master to target.
    pub target_unit_los: [f64; 3],
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Sensitivity of the slave range to the cross and normal baseline
/// components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangePartials {
    pub d_bc: f64,
    pub d_bn: f64,
}

/// Finite-difference step for [`range_partials`] (m).
pub const RANGE_PARTIAL_STEP: f64 = 1e-3;

/// Central finite differences of the slave range with respect to the cross
/// and normal baseline components. The track component is neglected since
/// the interferometric phase is insensitive to along-track shifts.
///
/// The difference quotient is evaluated through the algebraic identity
/// (r+ - r-)/(2h) = 2 (p . e) / (r+ + r-), which is the same number without
/// the catastrophic cancellation of subtracting two hundred-kilometre
/// ranges.
pub fn range_partials(state: &SatelliteState) -> Result<RangePartials> {
    let p = add3(state.master_position, state.baseline_vector);
    if norm3(state.master_position) == 0.0 {
        return Err(Error::invalid("state", "master position must be non-zero"));
    }
    let h = RANGE_PARTIAL_STEP;
    let mut partial = [0.0_f64; 2];
    for (slot, axis) in [(0usize, 1usize), (1, 2)] {
        let mut plus = p;
        plus[axis] += h;
        let mut minus = p;
        minus[axis] -= h;
        let r_plus = norm3(plus);
        let r_minus = norm3(minus);
        if r_plus <= h || r_minus <= h {
            return Err(Error::invalid("state", "target degenerately close to the sensor"));
        }
        partial[slot] = 2.0 * p[axis] / (r_plus + r_minus);
    }
    Ok(RangePartials { d_bc: partial[0], d_bn: partial[1] })
}

/// Evaluates the first-order orbit error phase per pixel:
/// phi = factor * (4 pi / lambda) * [dr/dBc (dBc + dBc_rate t) + dr/dBn (dBn + dBn_rate t)].
pub fn orbit_phase_screen(
    geom: &RadarGeometry,
    states: &Array2<SatelliteState>,
    params: &OrbitErrorParams,
    monostatic_factor: u8,
) -> Result<Array2<f64>> {
    params.validate()?;
    if !matches!(monostatic_factor, 1 | 2) {
        return Err(Error::invalid("monostatic_factor", "must be 1 or 2"));
    }
    let (rows, _) = states.dim();
    let scale = monostatic_factor as f64 * 4.0 * PI / geom.wavelength;
    let mut screen = Array2::zeros(states.dim());
    for ((r, c), state) in states.indexed_iter() {
        let t = geom.azimuth_time_at(r, rows);
        let partials = range_partials(state)?;
        screen[(r, c)] = scale
            * (partials.d_bc * (params.delta_bc + params.delta_bc_rate * t)
                + partials.d_bn * (params.delta_bn + params.delta_bn_rate * t));
    }
    Ok(screen)
}

/// Per-pixel satellite states for the nominal side-looking geometry: the
/// platform height is fixed by the reference incidence, so the line of
/// sight steepens toward near range and flattens toward far range. That
/// range dependence is what makes the cross and normal error components
/// separable in the joint estimate.
pub fn nominal_states(geom: &RadarGeometry, rows: usize, cols: usize) -> Array2<SatelliteState> {
    let platform_height = geom.slant_range * geom.incidence.cos();
    Array2::from_shape_fn((rows, cols), |(_, c)| {
        let range = geom.slant_range_at(c);
        let cos_t = (platform_height / range).min(1.0);
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let los = [0.0, sin_t, -cos_t];
        SatelliteState {
            master_position: [0.0, -range * sin_t, range * cos_t],
            baseline_vector: [0.0, 0.0, 0.0],
            target_unit_los: los,
        }
    })
}

/// Zero-mean Gaussian phase noise draws, deterministic per seed.
pub fn sample_phase_noise(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma", "must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
    let mut rng = stats::rng(seed, "phase-noise", &[]);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Isotropic random screen with a k^(-exponent) power spectrum, generated
/// by superposing cosine modes whose radial wavenumbers are drawn from the
/// matching density. Mean removed, scaled to `rms`, deterministic per seed.
pub fn turbulence_screen(
    rows: usize,
    cols: usize,
    rms: f64,
    exponent: f64,
    outer_scale: f64,
    seed: u64,
) -> Result<AtmosphericScreen> {
    if !(rms >= 0.0) {
        return Err(Error::invalid("rms", "must be non-negative"));
    }
    if !(exponent > 2.0) {
        return Err(Error::invalid("exponent", "spectral exponent must exceed 2"));
    }
    if !(outer_scale > 2.0) {
        return Err(Error::invalid("outer_scale", "must exceed 2 cells"));
    }
    let mut screen = Array2::zeros((rows, cols));
    if rms > 0.0 {
        const MODES: usize = 200;
        let mut rng = stats::rng(seed, "turbulence", &[]);
        // Radial density p(k) ~ k^(1-exponent) between the outer scale and
        // the cell Nyquist, sampled by inverting its CDF.
        let w = exponent - 2.0;
        let k_min: f64 = 2.0 * PI / outer_scale;
        let k_max: f64 = PI;
        let a = k_min.powf(-w);
        let b = k_max.powf(-w);
        for _ in 0..MODES {
            let u: f64 = rng.gen();
            let k = (a - u * (a - b)).powf(-1.0 / w);
            let dir: f64 = rng.gen::<f64>() * 2.0 * PI;
            let phase: f64 = rng.gen::<f64>() * 2.0 * PI;
            let (kx, ky) = (k * dir.cos(), k * dir.sin());
            for r in 0..rows {
                for c in 0..cols {
                    screen[(r, c)] += (kx * c as f64 + ky * r as f64 + phase).cos();
                }
            }
        }
        let mean = screen.mean().unwrap_or(0.0);
        screen.mapv_inplace(|v| v - mean);
        let var = screen.iter().map(|&v| v * v).sum::<f64>() / (rows * cols) as f64;
        if var > 0.0 {
            let gain = rms / var.sqrt();
            screen.mapv_inplace(|v| v * gain);
        }
    }
    Ok(AtmosphericScreen {
        delay_phase: screen,
        spatial_exponent: exponent,
        rms,
    })
}

/// Picks the masked-in pixel nearest the grid centre.
pub fn default_reference_pixel(mask: &Array2<bool>) -> Result<(usize, usize)> {
    let (rows, cols) = mask.dim();
    let centre = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    mask.indexed_iter()
        .filter(|&(_, &m)| m)
        .min_by(|(a, _), (b, _)| {
            let da = (a.0 as f64 - centre.0).powi(2) + (a.1 as f64 - centre.1).powi(2);
            let db = (b.0 as f64 - centre.0).powi(2) + (b.1 as f64 - centre.1).powi(2);
            da.partial_cmp(&db)
                .unwrap()
                .then_with(|| a.cmp(b))
        })
        .map(|(idx, _)| idx)
        .ok_or_else(|| Error::invalid("mask", "no masked-in pixels"))
}

/// Synthesizes the three-interferogram stack of a baseline configuration
/// over a scene. Returns the stack and any advisory warnings (coherence
/// outside the noise model's validity, or a shortest baseline whose
/// ambiguity height the scene relief threatens).
pub fn simulate_stack(
    scene: &HeightField,
    geom: &RadarGeometry,
    cfg: &BaselineConfiguration,
    gamma: f64,
    orbit: Option<&OrbitErrorParams>,
    atmos: Option<&AtmosphericScreen>,
    seed: u64,
) -> Result<(InterferogramStack, Vec<String>)> {
    geom.validate()?;
    let sigma = coherence_to_phase_std(gamma)?;
    let baselines = equivalent_baselines(cfg)?;
    let kinds = member_kinds(cfg.mode);
    let (rows, cols) = scene.heights.dim();
    if let Some(screen) = atmos {
        if screen.delay_phase.dim() != (rows, cols) {
            return Err(Error::ShapeMismatch(format!(
                "atmospheric screen {:?} vs scene {:?}",
                screen.delay_phase.dim(),
                (rows, cols)
            )));
        }
    }

    let mut warnings = Vec::new();
    if !phase_std_within_validity(gamma) {
        warnings.push(format!(
            "coherence {gamma} below the {} validity floor of the Gaussian noise model",
            crate::geometry::COHERENCE_VALIDITY_FLOOR
        ));
    }
    let chain = crate::geometry::effective_baselines(&baselines, DEFAULT_MAX_COMBINATION)?;
    let delta_h = max_height_difference(scene)?;
    let h_amb = geom.height_ambiguity(chain.b1())?;
    if delta_h >= h_amb {
        warnings.push(format!(
            "PC assumption at risk: scene height span {delta_h:.1} m reaches the \
             {h_amb:.1} m ambiguity of the {:.1} m shortest effective baseline",
            chain.b1()
        ));
    }

    let reference_pixel = default_reference_pixel(&scene.mask)?;
    let needs_orbit = orbit.is_some() && kinds.iter().any(|k| k.is_dual_satellite());
    let states = if needs_orbit {
        Some(nominal_states(geom, rows, cols))
    } else {
        None
    };

    let azimuth_time: Vec<f64> = (0..rows).map(|r| geom.azimuth_time_at(r, rows)).collect();
    let mut interferograms = Vec::with_capacity(3);
    for (member, (&b_perp, kind)) in baselines.iter().zip(kinds).enumerate() {
        let mut phase = Array2::zeros((rows, cols));
        for r in 0..rows {
            for c in 0..cols {
                phase[(r, c)] = geom.height_to_phase_at(c, b_perp, scene.heights[(r, c)]);
            }
        }
        if let (Some(params), Some(states)) = (orbit, states.as_ref()) {
            if kind.orbit_factor() > 0.0 {
                let screen = orbit_phase_screen(geom, states, params, kind.orbit_factor() as u8)?;
                phase += &screen;
            }
        }
        if let Some(screen) = atmos {
            if kind.carries_atmosphere() {
                phase += &screen.delay_phase;
            }
        }
        if sigma > 0.0 {
            let normal =
                Normal::new(0.0, sigma).map_err(|e| Error::invalid("gamma", e.to_string()))?;
            let mut rng = stats::rng(seed, "stack-noise", &[member as u64]);
            phase.mapv_inplace(|v| v + normal.sample(&mut rng));
        }
        phase.mapv_inplace(wrap);
        interferograms.push(Interferogram {
            wrapped_phase: phase,
            b_perp,
            coherence: gamma,
            kind,
            azimuth_time: azimuth_time.clone(),
        });
    }

    let stack = InterferogramStack {
        interferograms,
        geometry: *geom,
        mask: scene.mask.clone(),
        reference_pixel,
    };
    stack.validate()?;
    Ok((stack, warnings))
}

/// Largest integer coefficient tried when searching combined baselines.
pub const DEFAULT_MAX_COMBINATION: u32 = 5;
