//! Ground-truth height fields: terrain ramps, built-up block targets, and a
//! statistical canopy proxy for masked, irregular scatterer layouts.
//!
//! Row index runs along azimuth, column index along ground range; cell sizes
//! come from [`crate::geometry::RadarGeometry`] when a field is imaged.

use crate::stats;
use crate::{Error, Result};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A height grid with a validity mask marking usable scatterers.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub heights: Array2<f64>,
    pub mask: Array2<bool>,
}

impl HeightField {
    /// Builds a field and checks the grid is at least 2x2 with finite
    /// heights wherever the mask is set.
    pub fn new(heights: Array2<f64>, mask: Array2<bool>) -> Result<Self> {
        if heights.nrows() < 2 || heights.ncols() < 2 {
            return Err(Error::invalid("heights", "grid must be at least 2x2"));
        }
        if heights.dim() != mask.dim() {
            return Err(Error::ShapeMismatch(format!(
                "heights {:?} vs mask {:?}",
                heights.dim(),
                mask.dim()
            )));
        }
        for ((r, c), &m) in mask.indexed_iter() {
            if m && !heights[(r, c)].is_finite() {
                return Err(Error::invalid(
                    "heights",
                    format!("non-finite masked-in height at ({r}, {c})"),
                ));
            }
        }
        Ok(HeightField { heights, mask })
    }

    /// Fully masked-in field at a constant height.
    pub fn flat(rows: usize, cols: usize, height: f64) -> Result<Self> {
        HeightField::new(
            Array2::from_elem((rows, cols), height),
            Array2::from_elem((rows, cols), true),
        )
    }

    pub fn rows(&self) -> usize {
        self.heights.nrows()
    }

    pub fn cols(&self) -> usize {
        self.heights.ncols()
    }

    pub fn masked_in_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Linear gradient from 0 at the near-range column to `max_height` at the
/// far-range column, constant along azimuth, fully masked in.
pub fn ramp_scene(rows: usize, cols: usize, max_height: f64) -> Result<HeightField> {
    if !(max_height >= 0.0) {
        return Err(Error::invalid("max_height", "must be non-negative"));
    }
    if rows < 2 || cols < 2 {
        return Err(Error::invalid("rows/cols", "grid must be at least 2x2"));
    }
    let heights = Array2::from_shape_fn((rows, cols), |(_, c)| {
        max_height * c as f64 / (cols as f64 - 1.0)
    });
    HeightField::new(heights, Array2::from_elem((rows, cols), true))
}

/// A rectangular target raised on top of a base field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    /// Height added on top of the base terrain (m).
    pub height: f64,
}

/// Raises each block's footprint by its height; overlapping blocks stack
/// additively and the base field is untouched elsewhere.
pub fn blocks_scene(base: &HeightField, blocks: &[Block]) -> Result<HeightField> {
    let (rows, cols) = base.heights.dim();
    let mut heights = base.heights.clone();
    for (i, b) in blocks.iter().enumerate() {
        let row_end = b.row0.checked_add(b.rows).filter(|&e| e <= rows);
        let col_end = b.col0.checked_add(b.cols).filter(|&e| e <= cols);
        let (Some(row_end), Some(col_end)) = (row_end, col_end) else {
            return Err(Error::invalid(
                "blocks",
                format!("block {i} exceeds the {rows}x{cols} grid"),
            ));
        };
        for r in b.row0..row_end {
            for c in b.col0..col_end {
                heights[(r, c)] += b.height;
            }
        }
    }
    HeightField::new(heights, base.mask.clone())
}

/// Statistical canopy proxy: each cell is a scatterer with probability
/// `density`, and scatterer heights follow a truncated-at-zero normal
/// around `mean_height`. Deterministic for a fixed seed.
pub fn canopy_scene(
    rows: usize,
    cols: usize,
    mean_height: f64,
    jitter_std: f64,
    density: f64,
    seed: u64,
) -> Result<HeightField> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid("density", "must lie in (0, 1]"));
    }
    if !(jitter_std >= 0.0) {
        return Err(Error::invalid("jitter_std", "must be non-negative"));
    }
    if rows < 2 || cols < 2 {
        return Err(Error::invalid("rows/cols", "grid must be at least 2x2"));
    }
    let mut rng = stats::rng(seed, "canopy", &[]);
    let normal = Normal::new(mean_height, jitter_std)
        .map_err(|e| Error::invalid("jitter_std", e.to_string()))?;
    let mut heights = Array2::zeros((rows, cols));
    let mut mask = Array2::from_elem((rows, cols), false);
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen::<f64>() < density {
                mask[(r, c)] = true;
                heights[(r, c)] = loop {
                    let h = normal.sample(&mut rng);
                    if h >= 0.0 {
                        break h;
                    }
                };
            }
        }
    }
    HeightField::new(heights, mask)
}

/// Height span max - min over masked-in cells, the quantity the shortest
/// baseline's ambiguity height must dominate for reliable unwrapping.
pub fn max_height_difference(field: &HeightField) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for ((r, c), &m) in field.mask.indexed_iter() {
        if m {
            let h = field.heights[(r, c)];
            min = min.min(h);
            max = max.max(h);
        }
    }
    if min > max {
        return Err(Error::invalid("field", "mask has no valid cells"));
    }
    Ok(max - min)
}
