//! Plain-text export and import of the toolkit's products.
//!
//! Grids travel as headered CSV: a line of column names, a line of header
//! values, then one data row per grid row. NaN marks masked-out cells, so
//! a grid file carries its own mask. Scalar metadata rides in JSON with an
//! explicit schema version. All floats are written with Rust's shortest
//! round-trip formatting, so export followed by import reproduces every
//! value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::design::DesignReport;
use crate::estimate::EstimateResult;
use crate::geometry::{BaselineMode, RadarGeometry};
use crate::metrics::{AccuracyReport, HistogramBin};
use crate::scene::HeightField;
use crate::simulate::{Interferogram, InterferogramKind, InterferogramStack, OrbitErrorParams};
use crate::unwrap::UnwrappedField;
use crate::{Error, Result};

/// Version stamped into every JSON document this module writes.
pub const SCHEMA_VERSION: u32 = 1;

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| format_err(path, format!("cannot parse {name} from {raw:?}")))
}

/// Reads the two header lines of a grid CSV and checks the column names.
fn read_header(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    path: &Path,
    expected: &[&str],
) -> Result<Vec<String>> {
    let names = lines
        .next()
        .ok_or_else(|| format_err(path, "missing header line"))??;
    let got: Vec<&str> = names.split(',').map(str::trim).collect();
    if got != expected {
        return Err(format_err(
            path,
            format!("header {got:?} does not match expected {expected:?}"),
        ));
    }
    let values = lines
        .next()
        .ok_or_else(|| format_err(path, "missing header value line"))??;
    let fields: Vec<String> = values.split(',').map(|s| s.trim().to_string()).collect();
    if fields.len() != expected.len() {
        return Err(format_err(
            path,
            format!("expected {} header values, found {}", expected.len(), fields.len()),
        ));
    }
    Ok(fields)
}

fn write_grid(
    out: &mut impl std::io::Write,
    grid: &Array2<f64>,
    mask: &Array2<bool>,
) -> std::io::Result<()> {
    for (r, row) in grid.outer_iter().enumerate() {
        let mut line = String::new();
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            if mask[(r, c)] {
                line.push_str(&format!("{v}"));
            } else {
                line.push_str("NaN");
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn read_grid(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    path: &Path,
    rows: usize,
    cols: usize,
) -> Result<(Array2<f64>, Array2<bool>)> {
    let mut grid = Array2::zeros((rows, cols));
    let mut mask = Array2::from_elem((rows, cols), false);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| format_err(path, format!("grid ends at row {r} of {rows}")))??;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(format_err(
                path,
                format!("row {r} has {} values, expected {cols}", fields.len()),
            ));
        }
        for (c, raw) in fields.iter().enumerate() {
            let v: f64 = parse_field(path, "grid cell", raw)?;
            if v.is_nan() {
                continue;
            }
            grid[(r, c)] = v;
            mask[(r, c)] = true;
        }
    }
    Ok((grid, mask))
}

/// Writes a height field as `rows,cols,cell_azimuth,cell_range` plus the
/// row-major grid, NaN where the mask is unset.
pub fn write_height_field(
    path: impl AsRef<Path>,
    field: &HeightField,
    cell_size: (f64, f64),
) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    let (rows, cols) = field.heights.dim();
    writeln!(out, "rows,cols,cell_azimuth,cell_range")?;
    writeln!(out, "{rows},{cols},{},{}", cell_size.0, cell_size.1)?;
    write_grid(&mut out, &field.heights, &field.mask)?;
    Ok(())
}

/// Reads a height field written by [`write_height_field`], returning the
/// field and the (azimuth, range) cell size from the header.
pub fn read_height_field(path: impl AsRef<Path>) -> Result<(HeightField, (f64, f64))> {
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = read_header(
        &mut lines,
        path,
        &["rows", "cols", "cell_azimuth", "cell_range"],
    )?;
    let rows: usize = parse_field(path, "rows", &header[0])?;
    let cols: usize = parse_field(path, "cols", &header[1])?;
    let cell = (
        parse_field(path, "cell_azimuth", &header[2])?,
        parse_field(path, "cell_range", &header[3])?,
    );
    let (heights, mask) = read_grid(&mut lines, path, rows, cols)?;
    Ok((HeightField::new(heights, mask)?, cell))
}

/// Writes one interferogram as `rows,cols,b_perp,coherence,kind` plus the
/// wrapped-phase grid. The mask comes from the owning stack; azimuth times
/// are not stored because the stack manifest's geometry reproduces them.
pub fn write_interferogram(
    path: impl AsRef<Path>,
    igram: &Interferogram,
    mask: &Array2<bool>,
) -> Result<()> {
    let path = path.as_ref();
    if igram.wrapped_phase.dim() != mask.dim() {
        return Err(Error::ShapeMismatch(format!(
            "interferogram {:?} vs mask {:?}",
            igram.wrapped_phase.dim(),
            mask.dim()
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    let (rows, cols) = igram.wrapped_phase.dim();
    writeln!(out, "rows,cols,b_perp,coherence,kind")?;
    writeln!(
        out,
        "{rows},{cols},{},{},{}",
        igram.b_perp, igram.coherence, igram.kind
    )?;
    write_grid(&mut out, &igram.wrapped_phase, mask)?;
    Ok(())
}

/// Reads an interferogram written by [`write_interferogram`]. Azimuth times
/// are rebuilt from the geometry; the mask recovered from NaN cells is
/// returned alongside.
pub fn read_interferogram(
    path: impl AsRef<Path>,
    geom: &RadarGeometry,
) -> Result<(Interferogram, Array2<bool>)> {
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = read_header(&mut lines, path, &["rows", "cols", "b_perp", "coherence", "kind"])?;
    let rows: usize = parse_field(path, "rows", &header[0])?;
    let cols: usize = parse_field(path, "cols", &header[1])?;
    let b_perp: f64 = parse_field(path, "b_perp", &header[2])?;
    let coherence: f64 = parse_field(path, "coherence", &header[3])?;
    let kind: InterferogramKind = header[4]
        .parse()
        .map_err(|_| format_err(path, format!("unknown interferogram kind {:?}", header[4])))?;
    let (wrapped_phase, mask) = read_grid(&mut lines, path, rows, cols)?;
    let azimuth_time = (0..rows).map(|r| geom.azimuth_time_at(r, rows)).collect();
    Ok((
        Interferogram {
            wrapped_phase,
            b_perp,
            coherence,
            kind,
            azimuth_time,
        },
        mask,
    ))
}

/// Sidecar JSON describing an exported stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackManifest {
    pub schema_version: u32,
    pub geometry: RadarGeometry,
    /// Seed the stack was synthesized with, kept for reproducibility.
    pub seed: u64,
    pub reference_pixel: (usize, usize),
    /// Member CSV file names, relative to the manifest's directory and in
    /// ascending baseline order.
    pub members: Vec<String>,
}

/// Writes every member of a stack plus `stack.json` into `dir`, returning
/// the manifest path.
pub fn write_stack(dir: impl AsRef<Path>, stack: &InterferogramStack, seed: u64) -> Result<PathBuf> {
    let dir = dir.as_ref();
    stack.validate()?;
    std::fs::create_dir_all(dir)?;
    let mut members = Vec::new();
    for (i, igram) in stack.interferograms.iter().enumerate() {
        let name = format!("interferogram_{i:02}.csv");
        write_interferogram(dir.join(&name), igram, &stack.mask)?;
        members.push(name);
    }
    let manifest = StackManifest {
        schema_version: SCHEMA_VERSION,
        geometry: stack.geometry,
        seed,
        reference_pixel: stack.reference_pixel,
        members,
    };
    let manifest_path = dir.join("stack.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&manifest_path)?), &manifest)?;
    Ok(manifest_path)
}

/// Reads a stack back from its manifest. Member masks must agree with one
/// another; the shared mask becomes the stack mask.
pub fn read_stack(manifest_path: impl AsRef<Path>) -> Result<(InterferogramStack, u64)> {
    let manifest_path = manifest_path.as_ref();
    let manifest: StackManifest =
        serde_json::from_reader(BufReader::new(File::open(manifest_path)?))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(format_err(
            manifest_path,
            format!(
                "schema version {} is not the supported {SCHEMA_VERSION}",
                manifest.schema_version
            ),
        ));
    }
    if manifest.members.is_empty() {
        return Err(format_err(manifest_path, "manifest lists no members"));
    }
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut interferograms = Vec::new();
    let mut mask: Option<Array2<bool>> = None;
    for name in &manifest.members {
        let member_path = dir.join(name);
        let (igram, member_mask) = read_interferogram(&member_path, &manifest.geometry)?;
        match &mask {
            None => mask = Some(member_mask),
            Some(existing) => {
                if *existing != member_mask {
                    return Err(format_err(
                        &member_path,
                        "member mask disagrees with the preceding members",
                    ));
                }
            }
        }
        interferograms.push(igram);
    }
    let stack = InterferogramStack {
        interferograms,
        geometry: manifest.geometry,
        mask: mask.expect("at least one member"),
        reference_pixel: manifest.reference_pixel,
    };
    stack.validate()?;
    Ok((stack, manifest.seed))
}

/// Writes an unwrapped field as
/// `rows,cols,reference_row,reference_col,residue_count` plus the phase
/// grid, NaN where the mask is unset.
pub fn write_unwrapped_field(path: impl AsRef<Path>, field: &UnwrappedField) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    let (rows, cols) = field.phase.dim();
    writeln!(out, "rows,cols,reference_row,reference_col,residue_count")?;
    writeln!(
        out,
        "{rows},{cols},{},{},{}",
        field.reference_pixel.0, field.reference_pixel.1, field.residue_count
    )?;
    write_grid(&mut out, &field.phase, &field.mask)?;
    Ok(())
}

pub fn read_unwrapped_field(path: impl AsRef<Path>) -> Result<UnwrappedField> {
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = read_header(
        &mut lines,
        path,
        &["rows", "cols", "reference_row", "reference_col", "residue_count"],
    )?;
    let rows: usize = parse_field(path, "rows", &header[0])?;
    let cols: usize = parse_field(path, "cols", &header[1])?;
    let reference_pixel = (
        parse_field(path, "reference_row", &header[2])?,
        parse_field(path, "reference_col", &header[3])?,
    );
    let residue_count: usize = parse_field(path, "residue_count", &header[4])?;
    let (phase, mask) = read_grid(&mut lines, path, rows, cols)?;
    if reference_pixel.0 >= rows || reference_pixel.1 >= cols || !mask[reference_pixel] {
        return Err(format_err(path, "reference pixel is outside the mask"));
    }
    Ok(UnwrappedField {
        phase,
        mask,
        reference_pixel,
        residue_count,
    })
}

/// JSON summary of one chain unwrap run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnwrapSummary {
    pub schema_version: u32,
    /// Residues found by the spatial unwrap of the shortest baseline.
    pub residue_count: usize,
    /// Per-link fractions of masked-in pixels whose bootstrap residual
    /// exceeded pi, in chain order.
    pub link_failure_fractions: Vec<f64>,
}

pub fn write_unwrap_summary(path: impl AsRef<Path>, summary: &UnwrapSummary) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path.as_ref())?), summary)?;
    Ok(())
}

pub fn read_unwrap_summary(path: impl AsRef<Path>) -> Result<UnwrapSummary> {
    let summary: UnwrapSummary =
        serde_json::from_reader(BufReader::new(File::open(path.as_ref())?))?;
    Ok(summary)
}

/// Writes one CSV row per evaluated design cell, suitable for heatmap
/// plotting. `sr_empirical` is left empty for cells without Monte Carlo
/// refinement.
pub fn write_design_csv(path: impl AsRef<Path>, report: &DesignReport) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(
        out,
        "l1,l2,mode,sr_analytic,sr_empirical,sigma_h,h_amb,feasible,binding_link"
    )?;
    for p in &report.points {
        let empirical = p.sr_empirical.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.l1, p.l2, p.mode, p.sr_analytic, empirical, p.sigma_h, p.h_amb, p.feasible,
            p.binding_link
        )?;
    }
    Ok(())
}

/// The selected optimum (or the reason none exists) as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignOptimum {
    pub schema_version: u32,
    pub mode: BaselineMode,
    pub optimum: Option<crate::design::DesignPoint>,
    pub reason: Option<String>,
}

pub fn write_design_optimum(path: impl AsRef<Path>, report: &DesignReport) -> Result<()> {
    let doc = DesignOptimum {
        schema_version: SCHEMA_VERSION,
        mode: report.mode,
        optimum: report.optimum.clone(),
        reason: report.reason.clone(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(path.as_ref())?), &doc)?;
    Ok(())
}

/// Scalar outcome of a joint estimation, written next to the heights CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateStats {
    pub schema_version: u32,
    pub orbit: OrbitErrorParams,
    /// Root mean square of the unweighted phase residuals (rad).
    pub residual_rms: f64,
    pub condition_indicator: f64,
}

/// Writes the estimated heights in the scene CSV format plus a JSON file
/// with the orbit parameters and residual statistics.
pub fn write_estimate(
    heights_path: impl AsRef<Path>,
    stats_path: impl AsRef<Path>,
    result: &EstimateResult,
    geom: &RadarGeometry,
) -> Result<()> {
    write_height_field(
        heights_path,
        &result.heights,
        (geom.azimuth_spacing, geom.range_spacing),
    )?;
    let stats = EstimateStats {
        schema_version: SCHEMA_VERSION,
        orbit: result.orbit,
        residual_rms: result.residual_rms,
        condition_indicator: result.condition_indicator,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(stats_path.as_ref())?), &stats)?;
    Ok(())
}

pub fn read_estimate_stats(path: impl AsRef<Path>) -> Result<EstimateStats> {
    let stats: EstimateStats =
        serde_json::from_reader(BufReader::new(File::open(path.as_ref())?))?;
    Ok(stats)
}

pub fn write_accuracy_json(path: impl AsRef<Path>, report: &AccuracyReport) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path.as_ref())?), report)?;
    Ok(())
}

/// Histogram rows as `bin_left,bin_right,count`.
pub fn write_histogram_csv(path: impl AsRef<Path>, bins: &[HistogramBin]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(out, "bin_left,bin_right,count")?;
    for bin in bins {
        writeln!(out, "{},{},{}", bin.left, bin.right, bin.count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BaselineConfiguration, BaselineMode};
    use crate::metrics;
    use crate::scene;
    use crate::simulate::simulate_stack;
    use tempfile::tempdir;

    fn small_scene() -> HeightField {
        let mut field = scene::ramp_scene(12, 16, 40.0).unwrap();
        field.mask[(3, 4)] = false;
        field.mask[(9, 11)] = false;
        field.heights[(3, 4)] = 0.0;
        field.heights[(9, 11)] = 0.0;
        field
    }

    #[test]
    fn height_field_round_trips_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("dem.csv");
        let field = small_scene();
        write_height_field(&path, &field, (0.93, 2.0)).unwrap();
        let (back, cell) = read_height_field(&path).unwrap();
        assert_eq!(cell, (0.93, 2.0));
        assert_eq!(back.mask, field.mask);
        for ((r, c), &m) in field.mask.indexed_iter() {
            if m {
                assert_eq!(back.heights[(r, c)], field.heights[(r, c)]);
            }
        }
    }

    #[test]
    fn stack_round_trips_exactly() {
        let dir = tempdir().unwrap();
        let geom = RadarGeometry::x_band_tandem();
        let cfg = BaselineConfiguration::new(BaselineMode::Config2, 15.0, 150.0);
        let scene = small_scene();
        let (stack, _) = simulate_stack(&scene, &geom, &cfg, 0.99, None, None, 42).unwrap();
        let manifest_path = write_stack(dir.path(), &stack, 42).unwrap();
        let (back, seed) = read_stack(&manifest_path).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(back.geometry, stack.geometry);
        assert_eq!(back.mask, stack.mask);
        assert_eq!(back.reference_pixel, stack.reference_pixel);
        assert_eq!(back.interferograms.len(), stack.interferograms.len());
        for (a, b) in back.interferograms.iter().zip(&stack.interferograms) {
            assert_eq!(a.b_perp, b.b_perp);
            assert_eq!(a.coherence, b.coherence);
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.azimuth_time, b.azimuth_time);
            for ((r, c), &m) in stack.mask.indexed_iter() {
                if m {
                    assert_eq!(a.wrapped_phase[(r, c)], b.wrapped_phase[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn corrupted_inputs_are_rejected_with_the_path() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("broken.csv");
        std::fs::write(&path, "rows,cols,cell_azimuth\n2,2,1\n0,0\n0,0\n").unwrap();
        let err = read_height_field(&path).unwrap_err();
        assert!(err.to_string().contains("broken.csv"), "{err}");

        std::fs::write(
            &path,
            "rows,cols,cell_azimuth,cell_range\n2,3,1,1\n0,0\n0,0\n",
        )
        .unwrap();
        let err = read_height_field(&path).unwrap_err();
        assert!(err.to_string().contains("expected 3"), "{err}");

        let manifest = dir.path().join("stack.json");
        std::fs::write(
            &manifest,
            serde_json::to_string(&StackManifest {
                schema_version: 99,
                geometry: RadarGeometry::x_band_tandem(),
                seed: 0,
                reference_pixel: (0, 0),
                members: vec!["x.csv".into()],
            })
            .unwrap(),
        )
        .unwrap();
        let err = read_stack(&manifest).unwrap_err();
        assert!(err.to_string().contains("schema version"), "{err}");
    }

    #[test]
    fn unwrapped_field_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("unwrapped.csv");
        let mut mask = Array2::from_elem((6, 6), true);
        mask[(5, 5)] = false;
        let field = UnwrappedField {
            phase: Array2::from_shape_fn((6, 6), |(r, c)| 0.1 * r as f64 - 0.7 * c as f64),
            mask,
            reference_pixel: (2, 3),
            residue_count: 4,
        };
        write_unwrapped_field(&path, &field).unwrap();
        let back = read_unwrapped_field(&path).unwrap();
        assert_eq!(back.reference_pixel, (2, 3));
        assert_eq!(back.residue_count, 4);
        assert_eq!(back.mask, field.mask);
        for ((r, c), &m) in field.mask.indexed_iter() {
            if m {
                assert_eq!(back.phase[(r, c)], field.phase[(r, c)]);
            }
        }

        let summary = UnwrapSummary {
            schema_version: SCHEMA_VERSION,
            residue_count: 4,
            link_failure_fractions: vec![0.0, 0.01, 0.002],
        };
        let spath = dir.path().join("summary.json");
        write_unwrap_summary(&spath, &summary).unwrap();
        assert_eq!(read_unwrap_summary(&spath).unwrap(), summary);
    }

    #[test]
    fn design_report_files_have_expected_shape() {
        use crate::design::DesignPoint;
        let dir = tempdir().unwrap();
        let report = DesignReport {
            mode: BaselineMode::Config2,
            points: vec![
                DesignPoint {
                    l1: 15.0,
                    l2: 150.0,
                    mode: BaselineMode::Config2,
                    sr_analytic: 0.999,
                    sr_empirical: None,
                    sigma_h: 0.5,
                    h_amb: 632.9,
                    feasible: true,
                    binding_link: 0,
                },
                DesignPoint {
                    l1: 15.0,
                    l2: 152.0,
                    mode: BaselineMode::Config2,
                    sr_analytic: 0.998,
                    sr_empirical: Some(0.997),
                    sigma_h: 0.49,
                    h_amb: 632.9,
                    feasible: true,
                    binding_link: 1,
                },
            ],
            optimum: None,
            reason: Some("demo".into()),
        };
        let csv_path = dir.path().join("design.csv");
        write_design_csv(&csv_path, &report).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("l1,l2,mode"));
        assert!(lines[1].contains(",,"), "empty sr_empirical field: {}", lines[1]);
        assert!(lines[2].contains("0.997"));

        let json_path = dir.path().join("optimum.json");
        write_design_optimum(&json_path, &report).unwrap();
        let doc: DesignOptimum =
            serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(doc.mode, BaselineMode::Config2);
        assert!(doc.optimum.is_none());
        assert_eq!(doc.reason.as_deref(), Some("demo"));
    }

    #[test]
    fn estimate_and_accuracy_exports_round_trip() {
        let dir = tempdir().unwrap();
        let geom = RadarGeometry::x_band_tandem();
        let heights = HeightField::new(
            Array2::from_shape_fn((4, 4), |(r, _)| r as f64),
            Array2::from_elem((4, 4), true),
        )
        .unwrap();
        let result = EstimateResult {
            heights: heights.clone(),
            orbit: OrbitErrorParams {
                delta_bc: 0.3,
                delta_bc_rate: 0.02,
                delta_bn: 0.1,
                delta_bn_rate: 0.02,
            },
            delays: None,
            residual_rms: 0.01,
            posterior_height_std: Array2::from_elem((4, 4), 0.2),
            condition_indicator: 3.5,
        };
        let hpath = dir.path().join("heights.csv");
        let spath = dir.path().join("estimate.json");
        write_estimate(&hpath, &spath, &result, &geom).unwrap();
        let (back, _) = read_height_field(&hpath).unwrap();
        assert_eq!(back.heights, heights.heights);
        let stats = read_estimate_stats(&spath).unwrap();
        assert_eq!(stats.orbit, result.orbit);
        assert_eq!(stats.residual_rms, 0.01);

        let report = metrics::compare(&heights, &heights, false).unwrap();
        let apath = dir.path().join("accuracy.json");
        write_accuracy_json(&apath, &report).unwrap();
        let parsed: AccuracyReport =
            serde_json::from_str(&std::fs::read_to_string(&apath).unwrap()).unwrap();
        assert_eq!(parsed.rmse, 0.0);
        let hist_path = dir.path().join("hist.csv");
        write_histogram_csv(&hist_path, &report.histogram).unwrap();
        let text = std::fs::read_to_string(&hist_path).unwrap();
        assert!(text.starts_with("bin_left,bin_right,count"));
        assert_eq!(text.lines().count(), 1 + report.histogram.len());
    }
}
