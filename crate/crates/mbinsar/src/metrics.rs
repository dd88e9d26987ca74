//! Accuracy statistics of estimated height fields against ground truth,
//! plus the two-sample F-test used to compare error variances.

use crate::scene::HeightField;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Number of histogram bins used by [`compare`].
pub const HISTOGRAM_BINS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Error statistics over the mask intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mean_error: f64,
    pub rmse: f64,
    /// Population standard deviation, so rmse^2 = mean_error^2 + std^2
    /// holds as an identity.
    pub std: f64,
    /// Fraction of truth cells that the estimate covers.
    pub coverage: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Compares an estimated height field against the truth over the mask
/// intersection. `remove_offset` subtracts the mean difference first,
/// which is the right mode when the two fields use different datums;
/// with it off the raw differences are scored, so a constant bias shows
/// up in the mean error.
pub fn compare(
    estimate: &HeightField,
    truth: &HeightField,
    remove_offset: bool,
) -> Result<AccuracyReport> {
    if estimate.heights.dim() != truth.heights.dim() {
        return Err(Error::ShapeMismatch(format!(
            "estimate {:?} vs truth {:?}",
            estimate.heights.dim(),
            truth.heights.dim()
        )));
    }
    let mut diffs = Vec::new();
    let mut truth_cells = 0usize;
    for ((r, c), &t_in) in truth.mask.indexed_iter() {
        if !t_in {
            continue;
        }
        truth_cells += 1;
        if estimate.mask[(r, c)] {
            diffs.push(estimate.heights[(r, c)] - truth.heights[(r, c)]);
        }
    }
    if diffs.is_empty() {
        return Err(Error::Computation(
            "the estimate and truth masks share no cells".into(),
        ));
    }
    let n = diffs.len() as f64;
    if remove_offset {
        let offset = diffs.iter().sum::<f64>() / n;
        for d in &mut diffs {
            *d -= offset;
        }
    }
    let mean_error = diffs.iter().sum::<f64>() / n;
    let mean_square = diffs.iter().map(|d| d * d).sum::<f64>() / n;
    let rmse = mean_square.sqrt();
    let std = (mean_square - mean_error * mean_error).max(0.0).sqrt();
    Ok(AccuracyReport {
        mean_error,
        rmse,
        std,
        coverage: diffs.len() as f64 / truth_cells as f64,
        histogram: histogram(&diffs),
    })
}

fn histogram(values: &[f64]) -> Vec<HistogramBin> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![HistogramBin { left: lo, right: hi, count: values.len() }];
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            left: lo + i as f64 * width,
            right: lo + (i + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &v in values {
        let i = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        bins[i].count += 1;
    }
    bins
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTestResult {
    pub f0: f64,
    pub critical_value: Option<f64>,
    /// Present when a critical value was supplied.
    pub reject: Option<bool>,
}

/// Two-sample F statistic f0 = var1 / var2. Critical values come from
/// tables or external tools; when one is supplied the null hypothesis of
/// equal variances is rejected for f0 above it.
pub fn f_test(var1: f64, var2: f64, critical: Option<f64>) -> Result<FTestResult> {
    if !(var1 > 0.0) || !(var2 > 0.0) {
        return Err(Error::invalid("variance", "both variances must be positive"));
    }
    let f0 = var1 / var2;
    Ok(FTestResult {
        f0,
        critical_value: critical,
        reject: critical.map(|c| f0 > c),
    })
}
