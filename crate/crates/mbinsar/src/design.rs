//! Baseline design: successful-unwrapping criterion, success rates, and
//! grid search over antenna and satellite separations.
//!
//! A bootstrap link from baseline B_{i-1} to B_i scales the lower phase
//! noise by the baseline ratio, so the chained standard deviation is
//! sqrt((B_i/B_{i-1})^2 sigma_{i-1}^2 + sigma_i^2). Unwrapping succeeds
//! when the rounding error stays below half a cycle, which for Gaussian
//! noise means the chained deviation must stay below pi/u_alpha. The design
//! search walks the (L1, L2) grid, keeps the points satisfying that
//! criterion together with the precision and ambiguity constraints, and
//! ranks the survivors.

use crate::geometry::{
    coherence_to_phase_std, effective_baselines, equivalent_baselines, wrap,
    BaselineConfiguration, BaselineMode, BaselineSet, RadarGeometry,
};
use crate::simulate::DEFAULT_MAX_COMBINATION;
use crate::stats;
use crate::{Error, Result};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Inputs of the design search.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSettings {
    /// Two-sided ambiguity failure probability alpha; the expected success
    /// rate is 1 - alpha.
    pub significance_alpha: f64,
    /// Coherence shared by all interferograms.
    pub coherence: f64,
    /// Required relative height precision sigma_h0 (m).
    pub expected_height_precision: f64,
    /// Largest height difference the shortest baseline must keep inside
    /// one ambiguity (m).
    pub max_height_difference: f64,
    /// Antenna baseline candidates L1 (m), ascending.
    pub antenna_grid: Vec<f64>,
    /// Satellite baseline candidates L2 (m), ascending.
    pub satellite_grid: Vec<f64>,
    /// Monte Carlo trials for empirical refinement.
    pub trials: usize,
    pub seed: u64,
}

impl DesignSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.significance_alpha > 0.0 && self.significance_alpha < 1.0) {
            return Err(Error::invalid("significance_alpha", "must lie in (0, 1)"));
        }
        if !(self.coherence > 0.0 && self.coherence <= 1.0) {
            return Err(Error::invalid("coherence", "must lie in (0, 1]"));
        }
        if !(self.expected_height_precision > 0.0) {
            return Err(Error::invalid("expected_height_precision", "must be positive"));
        }
        if !(self.max_height_difference > 0.0) {
            return Err(Error::invalid("max_height_difference", "must be positive"));
        }
        for (name, grid) in [
            ("antenna_grid", &self.antenna_grid),
            ("satellite_grid", &self.satellite_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::invalid(name, "must not be empty"));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::invalid(name, "must be positive and ascending"));
            }
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

/// Inclusive numeric grid with a fixed step, handy for building settings.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop >= start, "grid needs step > 0 and stop >= start");
    let n = ((stop - start) / step).round() as usize;
    (0..=n)
        .map(|i| start + i as f64 * step)
        .filter(|&v| v <= stop + 1e-9 * step)
        .collect()
}

/// One evaluated (L1, L2) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub l1: f64,
    pub l2: f64,
    pub mode: BaselineMode,
    pub sr_analytic: f64,
    /// Filled only when Monte Carlo refinement ran for this cell.
    pub sr_empirical: Option<f64>,
    /// Predicted relative height precision from the longest baseline (m).
    pub sigma_h: f64,
    /// Ambiguity height of the shortest effective baseline (m).
    pub h_amb: f64,
    pub feasible: bool,
    /// Index of the chain link with the largest chained variance.
    pub binding_link: usize,
}

/// Full grid plus the selected optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignReport {
    pub mode: BaselineMode,
    pub points: Vec<DesignPoint>,
    pub optimum: Option<DesignPoint>,
    /// Present when no feasible point exists.
    pub reason: Option<String>,
}

impl DesignReport {
    /// Largest feasible satellite baseline over the whole grid, the
    /// headline quantity of the coherence sweeps.
    pub fn max_feasible_satellite_baseline(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.feasible)
            .map(|p| p.l2)
            .reduce(f64::max)
    }

    /// Smallest feasible antenna baseline over the whole grid.
    pub fn min_feasible_antenna_baseline(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.feasible)
            .map(|p| p.l1)
            .reduce(f64::min)
    }

    /// Best predicted height precision among feasible points (m).
    pub fn best_sigma_h(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.feasible)
            .map(|p| p.sigma_h)
            .reduce(f64::min)
    }
}

/// Chained phase variances per link, combination inflation included.
fn link_variances(set: &BaselineSet, sigma_per_physical: &[f64]) -> Result<Vec<f64>> {
    if set.chain.len() < 2 {
        return Err(Error::invalid("effective", "chain needs at least two members"));
    }
    if sigma_per_physical.len() != set.physical.len() {
        return Err(Error::invalid(
            "sigma_per_physical",
            format!(
                "{} values for {} physical baselines",
                sigma_per_physical.len(),
                set.physical.len()
            ),
        ));
    }
    if sigma_per_physical.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::invalid("sigma_per_physical", "must be non-negative"));
    }
    let variances: Vec<f64> = sigma_per_physical.iter().map(|s| s * s).collect();
    Ok(set
        .chain
        .windows(2)
        .map(|pair| {
            let ratio = pair[1].length / pair[0].length;
            ratio * ratio * pair[0].phase_variance(&variances)
                + pair[1].phase_variance(&variances)
        })
        .collect())
}

/// Evaluates the successful-unwrapping criterion: every link's chained
/// variance must stay strictly below (pi/u_alpha)^2. Returns the verdict
/// and the index of the binding (largest-variance) link.
pub fn su_check(
    set: &BaselineSet,
    sigma_per_physical: &[f64],
    alpha: f64,
) -> Result<(bool, usize)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    let variances = link_variances(set, sigma_per_physical)?;
    let threshold = PI / stats::two_sided_quantile(alpha);
    let binding = binding_index(&variances);
    Ok((variances[binding] < threshold * threshold, binding))
}

fn binding_index(variances: &[f64]) -> usize {
    variances
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Analytic per-pixel success rate 2 Phi(z) - 1 with z = pi over the
/// binding link's chained standard deviation.
pub fn analytic_success_rate(set: &BaselineSet, sigma_per_physical: &[f64]) -> Result<f64> {
    let variances = link_variances(set, sigma_per_physical)?;
    let worst = variances[binding_index(&variances)];
    if worst == 0.0 {
        return Ok(1.0);
    }
    let z = PI / worst.sqrt();
    Ok(2.0 * stats::normal_cdf(z) - 1.0)
}

/// Relative height precision of the longest baseline:
/// sigma_h = lambda R sin(theta) / (4 pi B4) * sigma_L.
pub fn predicted_height_precision(geom: &RadarGeometry, b4: f64, sigma_l: f64) -> Result<f64> {
    if !(b4 > 0.0) {
        return Err(Error::invalid("b4", "must be positive"));
    }
    if !(sigma_l >= 0.0) {
        return Err(Error::invalid("sigma_l", "must be non-negative"));
    }
    Ok(geom.wavelength * geom.slant_range * geom.sin_incidence() / (4.0 * PI * b4) * sigma_l)
}

/// Monte Carlo summary of single-point chain trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McChainStats {
    pub trials: usize,
    pub successes: usize,
    pub sr_empirical: f64,
    /// Sample std of the recovered height per chain member, over
    /// successful trials (m). The last entry belongs to the longest
    /// baseline and doubles as the empirical sigma_h.
    pub member_height_std: Vec<f64>,
}

impl McChainStats {
    pub fn sigma_h(&self) -> f64 {
        *self.member_height_std.last().unwrap_or(&0.0)
    }
}

/// Runs single-point bootstrap trials over an arbitrary effective chain.
///
/// The truth height is zero, so each physical interferogram observes pure
/// noise; combined members observe the matching linear combination of the
/// same draws, which keeps the pseudo baseline's correlation with its
/// parents physical. A trial succeeds when every link's rounded ambiguity
/// reproduces the true unwrapped phase; failed links feed their wrong
/// phase onward, as the real chain would. Trials use per-trial derived
/// seeds so the result is independent of scheduling.
pub fn monte_carlo_chain_stats(
    geom: &RadarGeometry,
    set: &BaselineSet,
    sigma_per_physical: &[f64],
    trials: usize,
    seed: u64,
) -> Result<McChainStats> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if set.chain.len() < 2 {
        return Err(Error::invalid("effective", "chain needs at least two members"));
    }
    if sigma_per_physical.len() != set.physical.len()
        || sigma_per_physical.iter().any(|&s| !(s >= 0.0))
    {
        return Err(Error::invalid(
            "sigma_per_physical",
            "one non-negative value per physical baseline required",
        ));
    }

    let members = set.chain.len();
    let per_trial: Vec<(bool, Vec<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stats::rng(seed, "design-mc", &[trial]);
            let noise: Vec<f64> = sigma_per_physical
                .iter()
                .map(|&s| {
                    if s == 0.0 {
                        0.0
                    } else {
                        let normal = Normal::new(0.0, s).expect("validated sigma");
                        normal.sample(&mut rng)
                    }
                })
                .collect();
            let truth: Vec<f64> = set
                .chain
                .iter()
                .map(|m| m.combination.iter().map(|&(i, c)| c as f64 * noise[i]).sum())
                .collect();
            let wrapped: Vec<f64> = truth.iter().map(|&v| wrap(v)).collect();

            let mut success = true;
            let mut estimates = Vec::with_capacity(members);
            estimates.push(wrapped[0]);
            if (wrapped[0] - truth[0]).abs() > PI {
                success = false;
            }
            for i in 1..members {
                let ratio = set.chain[i].length / set.chain[i - 1].length;
                let prediction = ratio * estimates[i - 1];
                let cycles = ((prediction - wrapped[i]) / (2.0 * PI)).round();
                let estimate = wrapped[i] + 2.0 * PI * cycles;
                if (estimate - truth[i]).abs() > PI {
                    success = false;
                }
                estimates.push(estimate);
            }
            (success, estimates)
        })
        .collect();

    let successes = per_trial.iter().filter(|(ok, _)| *ok).count();
    let mut member_height_std = vec![0.0; members];
    if successes >= 2 {
        for m in 0..members {
            let heights: Vec<f64> = per_trial
                .iter()
                .filter(|(ok, _)| *ok)
                .map(|(_, est)| {
                    geom.phase_to_height(set.chain[m].length, est[m])
                        .expect("positive chain length")
                })
                .collect();
            let mean = heights.iter().sum::<f64>() / heights.len() as f64;
            let var = heights.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>()
                / (heights.len() as f64 - 1.0);
            member_height_std[m] = var.sqrt();
        }
    }

    Ok(McChainStats {
        trials,
        successes,
        sr_empirical: successes as f64 / trials as f64,
        member_height_std,
    })
}

/// Empirical success rate and height precision for a baseline
/// configuration at one coherence.
pub fn monte_carlo_success_rate(
    geom: &RadarGeometry,
    cfg: &BaselineConfiguration,
    gamma: f64,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let sigma = coherence_to_phase_std(gamma)?;
    let set = configuration_chain(cfg)?;
    let stats = monte_carlo_chain_stats(geom, &set, &vec![sigma; 3], trials, seed)?;
    Ok((stats.sr_empirical, stats.sigma_h()))
}

/// Effective chain of a configuration, combination search included.
pub fn configuration_chain(cfg: &BaselineConfiguration) -> Result<BaselineSet> {
    let mut baselines = equivalent_baselines(cfg)?.to_vec();
    baselines.sort_by(f64::total_cmp);
    effective_baselines(&baselines, DEFAULT_MAX_COMBINATION)
}

fn evaluate_point(
    geom: &RadarGeometry,
    settings: &DesignSettings,
    mode: BaselineMode,
    l1: f64,
    l2: f64,
    sigma: f64,
) -> DesignPoint {
    let cfg = BaselineConfiguration::new(mode, l1, l2);
    let set = match configuration_chain(&cfg) {
        Ok(set) => set,
        // Degenerate cells (coincident equivalent baselines) cannot form
        // the three-interferogram chain; they are never feasible.
        Err(_) => {
            return DesignPoint {
                l1,
                l2,
                mode,
                sr_analytic: 0.0,
                sr_empirical: None,
                sigma_h: f64::INFINITY,
                h_amb: 0.0,
                feasible: false,
                binding_link: 0,
            }
        }
    };
    let sigmas = vec![sigma; set.physical.len()];
    let sr_analytic = analytic_success_rate(&set, &sigmas).expect("validated chain");
    let (su_pass, binding_link) =
        su_check(&set, &sigmas, settings.significance_alpha).expect("validated chain");
    let sigma_h = predicted_height_precision(geom, set.longest(), sigma).expect("positive b4");
    let h_amb = geom.height_ambiguity(set.b1()).expect("positive b1");
    let feasible = su_pass
        && sigma_h < settings.expected_height_precision
        && h_amb > settings.max_height_difference;
    DesignPoint {
        l1,
        l2,
        mode,
        sr_analytic,
        sr_empirical: None,
        sigma_h,
        h_amb,
        feasible,
        binding_link,
    }
}

/// Order-free lexicographic preference among feasible points: larger
/// ambiguity height, then smaller sigma_h, then larger analytic success
/// rate, then the smaller (L1, L2) pair to make ties deterministic.
fn better(a: &DesignPoint, b: &DesignPoint) -> bool {
    if a.h_amb != b.h_amb {
        return a.h_amb > b.h_amb;
    }
    if a.sigma_h != b.sigma_h {
        return a.sigma_h < b.sigma_h;
    }
    if a.sr_analytic != b.sr_analytic {
        return a.sr_analytic > b.sr_analytic;
    }
    (a.l1, a.l2) < (b.l1, b.l2)
}

/// Evaluates the whole (L1, L2) grid for one configuration and selects the
/// lexicographic optimum among feasible cells.
pub fn optimize(
    geom: &RadarGeometry,
    settings: &DesignSettings,
    mode: BaselineMode,
) -> Result<DesignReport> {
    settings.validate()?;
    geom.validate()?;
    let sigma = coherence_to_phase_std(settings.coherence)?;
    let cells: Vec<(f64, f64)> = settings
        .antenna_grid
        .iter()
        .flat_map(|&l1| settings.satellite_grid.iter().map(move |&l2| (l1, l2)))
        .collect();
    let points: Vec<DesignPoint> = cells
        .into_par_iter()
        .map(|(l1, l2)| evaluate_point(geom, settings, mode, l1, l2, sigma))
        .collect();

    let optimum = points
        .iter()
        .filter(|p| p.feasible)
        .fold(None::<&DesignPoint>, |acc, p| match acc {
            Some(best) if !better(p, best) => Some(best),
            _ => Some(p),
        })
        .cloned();
    let reason = if optimum.is_none() {
        Some(format!(
            "no feasible cell: success rate above {:.3}, sigma_h below {} m and \
             ambiguity height above {} m were never met together",
            1.0 - settings.significance_alpha,
            settings.expected_height_precision,
            settings.max_height_difference
        ))
    } else {
        None
    };
    Ok(DesignReport { mode, points, optimum, reason })
}

/// One coherence step of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencePoint {
    pub gamma: f64,
    pub mode: BaselineMode,
    pub max_satellite_baseline: Option<f64>,
    pub min_antenna_baseline: Option<f64>,
    pub best_sigma_h: Option<f64>,
}

/// Re-runs the design search per coherence and extracts the headline
/// curves per mode.
pub fn coherence_sweep(
    geom: &RadarGeometry,
    settings: &DesignSettings,
    modes: &[BaselineMode],
    gammas: &[f64],
) -> Result<Vec<CoherencePoint>> {
    if gammas.is_empty() {
        return Err(Error::invalid("gammas", "must not be empty"));
    }
    let mut points = Vec::with_capacity(gammas.len() * modes.len());
    for &gamma in gammas {
        let at_gamma = DesignSettings { coherence: gamma, ..settings.clone() };
        for &mode in modes {
            let report = optimize(geom, &at_gamma, mode)?;
            points.push(CoherencePoint {
                gamma,
                mode,
                max_satellite_baseline: report.max_feasible_satellite_baseline(),
                min_antenna_baseline: report.min_feasible_antenna_baseline(),
                best_sigma_h: report.best_sigma_h(),
            });
        }
    }
    Ok(points)
}

/// Two-interferogram chain of the simplified three-channel system: the
/// bi-static mid baseline L2/2 and the longest baseline L2 + L1. The
/// combination search recovers L1 as the pseudo shortest baseline from
/// (L2 + L1) - 2 (L2/2), at a variance factor of 5.
pub fn simplified_chain(l1: f64, l2: f64) -> Result<BaselineSet> {
    let cfg = BaselineConfiguration::new(BaselineMode::Config2, l1, l2);
    cfg.validate()?;
    effective_baselines(&[l2 / 2.0, l2 + l1], DEFAULT_MAX_COMBINATION)
}

fn evaluate_simplified_point(
    geom: &RadarGeometry,
    settings: &DesignSettings,
    l1: f64,
    l2: f64,
    sigma: f64,
) -> Result<bool> {
    let set = match simplified_chain(l1, l2) {
        Ok(set) => set,
        Err(_) => return Ok(false),
    };
    let sigmas = vec![sigma; set.physical.len()];
    let (su_pass, _) = su_check(&set, &sigmas, settings.significance_alpha)?;
    let sigma_h = predicted_height_precision(geom, set.longest(), sigma)?;
    let h_amb = geom.height_ambiguity(set.b1())?;
    Ok(su_pass
        && sigma_h < settings.expected_height_precision
        && h_amb > settings.max_height_difference)
}

/// Paired full-versus-simplified curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedComparisonPoint {
    pub gamma: f64,
    pub full_max_satellite: Option<f64>,
    pub simplified_max_satellite: Option<f64>,
    /// full / simplified, when both exist.
    pub ratio: Option<f64>,
}

/// Compares the full second configuration against the simplified
/// three-channel system over a coherence grid.
pub fn simplified_system_sweep(
    geom: &RadarGeometry,
    settings: &DesignSettings,
    gammas: &[f64],
) -> Result<Vec<SimplifiedComparisonPoint>> {
    settings.validate()?;
    if gammas.is_empty() {
        return Err(Error::invalid("gammas", "must not be empty"));
    }
    let mut out = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let at_gamma = DesignSettings { coherence: gamma, ..settings.clone() };
        let sigma = coherence_to_phase_std(gamma)?;
        let full = optimize(geom, &at_gamma, BaselineMode::Config2)?
            .max_feasible_satellite_baseline();
        let mut simplified: Option<f64> = None;
        for &l1 in &at_gamma.antenna_grid {
            for &l2 in &at_gamma.satellite_grid {
                if evaluate_simplified_point(geom, &at_gamma, l1, l2, sigma)? {
                    simplified = Some(simplified.map_or(l2, |v: f64| v.max(l2)));
                }
            }
        }
        let ratio = match (full, simplified) {
            (Some(f), Some(s)) if s > 0.0 => Some(f / s),
            _ => None,
        };
        out.push(SimplifiedComparisonPoint {
            gamma,
            full_max_satellite: full,
            simplified_max_satellite: simplified,
            ratio,
        });
    }
    Ok(out)
}
