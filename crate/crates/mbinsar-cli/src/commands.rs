//! The five subcommands, each a thin orchestration of library calls plus
//! file plumbing. Every artifact lands in the resolved output directory
//! under a fixed name, so later stages find earlier outputs without extra
//! flags and re-running a command overwrites its products identically.

use crate::config::Resolved;
use mbinsar::design::{
    configuration_chain, monte_carlo_success_rate, optimize, DesignReport, DesignSettings,
};
use mbinsar::estimate::{build_joint_model, estimate_heights_only, solve_joint, ModelKind};
use mbinsar::geometry::BaselineConfiguration;
use mbinsar::io::{
    read_height_field, read_stack, read_unwrapped_field, write_accuracy_json, write_design_csv,
    write_design_optimum, write_estimate, write_height_field, write_histogram_csv, write_stack,
    write_unwrap_summary, write_unwrapped_field, UnwrapSummary, SCHEMA_VERSION,
};
use mbinsar::metrics::compare;
use mbinsar::scene::{max_height_difference, HeightField};
use mbinsar::simulate::turbulence_screen;
use mbinsar::stats::derive_seed;
use mbinsar::unwrap::asymptotic_unwrap;
use mbinsar::{Error, Result};
use std::path::PathBuf;

/// Which estimator the estimate subcommand runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EstimateMode {
    /// Joint heights and orbit parameters (bi-static model).
    Joint,
    /// Joint heights, orbit parameters and per-pixel delays (mono-static).
    Mono,
    /// Heights from the longest baseline alone, no error compensation.
    Heights,
}

fn ensure_out(res: &Resolved) -> Result<()> {
    std::fs::create_dir_all(&res.out)?;
    Ok(())
}

/// Turns a missing input file into an error that names the path, since the
/// bare OS message has no way to say which stage's artifact is absent.
fn require_file(path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Format {
            path: path.display().to_string(),
            message: "file not found; run the producing command first or pass its path".into(),
        })
    }
}

pub fn simulate(res: &Resolved) -> Result<()> {
    ensure_out(res)?;
    let spec = res.config.scene.as_ref().ok_or(Error::InvalidParameter {
        name: "scene",
        message: "simulate needs a scene section".into(),
    })?;
    let scene = spec.synthesize(res.seed)?;
    let cfg = res.config.configuration.fixed()?;
    let atmos = match &res.config.errors.atmosphere {
        Some(a) => Some(turbulence_screen(
            scene.rows(),
            scene.cols(),
            a.rms_rad,
            a.exponent,
            a.outer_scale_cells,
            res.seed,
        )?),
        None => None,
    };
    let (stack, warnings) = mbinsar::simulate::simulate_stack(
        &scene,
        &res.geom,
        &cfg,
        res.config.coherence,
        res.config.errors.orbit.as_ref(),
        atmos.as_ref(),
        res.seed,
    )?;
    for w in &warnings {
        println!("warning: {w}");
    }

    let spacing = (res.geom.azimuth_spacing, res.geom.range_spacing);
    write_height_field(res.out.join("truth_heights.csv"), &scene, spacing)?;
    let manifest = write_stack(res.out.join("stack"), &stack, res.seed)?;

    let chain = configuration_chain(&cfg)?;
    let h_amb = res.geom.height_ambiguity(chain.b1())?;
    let span = max_height_difference(&scene)?;
    let verdict = if span < h_amb {
        "inside one ambiguity"
    } else {
        "EXCEEDS one ambiguity, expect unwrapping failures"
    };
    println!(
        "scene height span {span:.2} m vs ambiguity height {h_amb:.2} m at B1 = {:.2} m: {verdict}",
        chain.b1()
    );
    println!("stack manifest {}", manifest.display());
    Ok(())
}

pub fn unwrap(res: &Resolved, manifest: Option<PathBuf>) -> Result<()> {
    ensure_out(res)?;
    let manifest =
        require_file(manifest.unwrap_or_else(|| res.out.join("stack").join("stack.json")))?;
    let (stack, _) = read_stack(&manifest)?;
    let chain = configuration_chain(&res.config.configuration.fixed()?)?;
    let result = asymptotic_unwrap(&stack, &chain)?;

    for (k, field) in result.fields.iter().enumerate() {
        write_unwrapped_field(res.out.join(format!("unwrapped_{k:02}.csv")), field)?;
    }
    let summary = UnwrapSummary {
        schema_version: SCHEMA_VERSION,
        residue_count: result.fields.iter().map(|f| f.residue_count).sum(),
        link_failure_fractions: result.link_failures.clone(),
    };
    write_unwrap_summary(res.out.join("unwrap_summary.json"), &summary)?;

    println!("residues {}", summary.residue_count);
    for (i, f) in summary.link_failure_fractions.iter().enumerate() {
        println!("link {i} failure fraction {f:.6}");
    }
    Ok(())
}

pub fn design(res: &Resolved) -> Result<()> {
    ensure_out(res)?;
    let settings = DesignSettings {
        significance_alpha: res.config.design.significance_alpha,
        coherence: res.config.coherence,
        expected_height_precision: res.config.design.expected_height_precision_m,
        max_height_difference: res.config.design.max_height_difference_m,
        antenna_grid: res.config.configuration.antenna_grid()?,
        satellite_grid: res.config.configuration.satellite_grid()?,
        trials: res.trials,
        seed: res.seed,
    };
    let mode = res.config.configuration.mode;
    let mut report = optimize(&res.geom, &settings, mode)?;
    if res.config.design.refine_top_k > 0 {
        refine(res, &mut report)?;
    }

    write_design_csv(res.out.join("design_grid.csv"), &report)?;
    write_design_optimum(res.out.join("design_optimum.json"), &report)?;

    match &report.optimum {
        Some(p) => println!(
            "optimum L1 {} m, L2 {} m: SR {:.4}, sigma_h {:.3} m, h_amb {:.1} m",
            p.l1, p.l2, p.sr_analytic, p.sigma_h, p.h_amb
        ),
        None => println!(
            "no feasible cell: {}",
            report.reason.as_deref().unwrap_or("no reason recorded")
        ),
    }
    if let Some(l2) = report.max_feasible_satellite_baseline() {
        println!("max feasible satellite baseline {l2} m");
    }
    if let Some(l1) = report.min_feasible_antenna_baseline() {
        println!("min feasible antenna baseline {l1} m");
    }
    if let Some(s) = report.best_sigma_h() {
        println!("best feasible sigma_h {s:.3} m");
    }
    Ok(())
}

/// Adds a Monte Carlo success rate to the k feasible cells that rank best
/// under the selection order, each cell on its own derived seed. Refining
/// the winners is what makes the empirical column worth reading; the cells
/// with the highest analytic rate are the uninteresting safe ones.
fn refine(res: &Resolved, report: &mut DesignReport) -> Result<()> {
    let mut ranked: Vec<usize> = (0..report.points.len())
        .filter(|&i| report.points[i].feasible)
        .collect();
    ranked.sort_by(|&a, &b| {
        let (pa, pb) = (&report.points[a], &report.points[b]);
        pb.h_amb
            .total_cmp(&pa.h_amb)
            .then(pa.sigma_h.total_cmp(&pb.sigma_h))
            .then(pb.sr_analytic.total_cmp(&pa.sr_analytic))
            .then(pa.l1.total_cmp(&pb.l1))
            .then(pa.l2.total_cmp(&pb.l2))
    });
    for &idx in ranked.iter().take(res.config.design.refine_top_k) {
        let point = &report.points[idx];
        let cfg = BaselineConfiguration::new(report.mode, point.l1, point.l2);
        let bytes = derive_seed(res.seed, "design-refine", &[idx as u64]);
        let seed = u64::from_le_bytes(bytes[..8].try_into().expect("eight bytes"));
        let (sr, _) = monte_carlo_success_rate(&res.geom, &cfg, res.config.coherence, res.trials, seed)?;
        report.points[idx].sr_empirical = Some(sr);
    }
    if let Some(opt) = &mut report.optimum {
        if let Some(p) = report
            .points
            .iter()
            .find(|p| p.l1 == opt.l1 && p.l2 == opt.l2)
        {
            opt.sr_empirical = p.sr_empirical;
        }
    }
    Ok(())
}

pub fn estimate(
    res: &Resolved,
    manifest: Option<PathBuf>,
    truth: Option<PathBuf>,
    mode: EstimateMode,
) -> Result<()> {
    ensure_out(res)?;
    let manifest =
        require_file(manifest.unwrap_or_else(|| res.out.join("stack").join("stack.json")))?;
    let (stack, _) = read_stack(&manifest)?;
    let mut fields = Vec::with_capacity(stack.interferograms.len());
    for k in 0..stack.interferograms.len() {
        let path = require_file(res.out.join(format!("unwrapped_{k:02}.csv")))?;
        fields.push(read_unwrapped_field(path)?);
    }

    let result = match mode {
        EstimateMode::Heights => estimate_heights_only(&stack, &fields)?,
        EstimateMode::Joint => {
            solve_joint(&build_joint_model(&stack, &fields, None, ModelKind::Bistatic)?)?
        }
        EstimateMode::Mono => {
            solve_joint(&build_joint_model(&stack, &fields, None, ModelKind::Monostatic)?)?
        }
    };

    write_estimate(
        res.out.join("estimate_heights.csv"),
        res.out.join("estimate_stats.json"),
        &result,
        &res.geom,
    )?;
    if let Some(delays) = &result.delays {
        let field = HeightField::new(delays.clone(), result.heights.mask.clone())?;
        write_height_field(
            res.out.join("estimate_delays.csv"),
            &field,
            (res.geom.azimuth_spacing, res.geom.range_spacing),
        )?;
        println!("delay screen written to estimate_delays.csv");
    }
    let orbit = result.orbit.as_array();
    println!(
        "orbit estimate dBc {:.4} m, dBc rate {:.4} m/s, dBn {:.4} m, dBn rate {:.4} m/s",
        orbit[0], orbit[1], orbit[2], orbit[3]
    );
    println!("phase residual rms {:.4} rad", result.residual_rms);

    if let Some(truth_path) = truth {
        let truth_path = require_file(truth_path)?;
        let (mut truth_field, _) = read_height_field(&truth_path)?;
        // Estimated heights are relative to the stack's reference pixel, so
        // the truth is shifted to that datum before scoring. Whatever mean
        // error remains is genuine bias, not bookkeeping.
        let (r, c) = stack.reference_pixel;
        if truth_field.heights.dim() == result.heights.heights.dim() {
            if !truth_field.mask[(r, c)] {
                return Err(Error::InvalidParameter {
                    name: "truth",
                    message: format!("masked out at the stack reference pixel ({r}, {c})"),
                });
            }
            let datum = truth_field.heights[(r, c)];
            truth_field.heights.mapv_inplace(|h| h - datum);
            println!("truth shifted by {datum:.3} m to the reference pixel ({r}, {c}) datum");
        }
        let accuracy = compare(&result.heights, &truth_field, false)?;
        write_accuracy_json(res.out.join("estimate_accuracy.json"), &accuracy)?;
        println!(
            "vs truth: rmse {:.4} m, mean error {:.4} m, std {:.4} m, coverage {:.3}",
            accuracy.rmse, accuracy.mean_error, accuracy.std, accuracy.coverage
        );
        if mode != EstimateMode::Heights {
            let plain = estimate_heights_only(&stack, &fields)?;
            let uncorrected = compare(&plain.heights, &truth_field, false)?;
            if accuracy.std > 0.0 {
                println!(
                    "height std corrected {:.4} m vs uncorrected {:.4} m, ratio {:.2}",
                    accuracy.std,
                    uncorrected.std,
                    uncorrected.std / accuracy.std
                );
            }
        }
    }
    Ok(())
}

pub fn report(res: &Resolved, estimate: Option<PathBuf>, truth: Option<PathBuf>) -> Result<()> {
    ensure_out(res)?;
    let estimate_path =
        require_file(estimate.unwrap_or_else(|| res.out.join("estimate_heights.csv")))?;
    let truth_path = require_file(truth.unwrap_or_else(|| res.out.join("truth_heights.csv")))?;
    let (estimated, _) = read_height_field(&estimate_path)?;
    let (truth_field, _) = read_height_field(&truth_path)?;
    let accuracy = compare(&estimated, &truth_field, false)?;

    write_accuracy_json(res.out.join("accuracy.json"), &accuracy)?;
    write_histogram_csv(res.out.join("error_histogram.csv"), &accuracy.histogram)?;
    println!(
        "rmse {:.4} m, mean error {:.4} m, std {:.4} m, coverage {:.3}",
        accuracy.rmse, accuracy.mean_error, accuracy.std, accuracy.coverage
    );
    println!("mean error includes any datum difference between the files; std does not");
    Ok(())
}
