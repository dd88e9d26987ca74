//! Spatial phase unwrapping and the asymptotic multi-baseline bootstrap.
//!
//! The chain starts from the shortest effective baseline, whose relief stays
//! inside one fringe so plain spatial integration recovers it. Each longer
//! baseline is then unwrapped by scaling the previous unwrapped phase up by
//! the baseline ratio, rounding the integer ambiguity per pixel, and
//! spatially unwrapping only the small residual. A wrong rounding needs the
//! residual to leave (-pi, pi], which is exactly the event the design
//! module's success-rate criterion bounds.

use crate::geometry::{wrap, RadarGeometry};
use crate::scene::HeightField;
use crate::simulate::{Interferogram, InterferogramStack};
use crate::geometry::BaselineSet;
use crate::{Error, Result};
use ndarray::Array2;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// An unwrapped phase field, zero at its reference pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedField {
    pub phase: Array2<f64>,
    /// Cells that were actually unwrapped; inherited from the input mask.
    pub mask: Array2<bool>,
    pub reference_pixel: (usize, usize),
    /// Number of 2x2 loops of the input whose wrapped-gradient circulation
    /// was nonzero. Zero means the integration result is path independent.
    pub residue_count: usize,
}

/// Integer fringe counts assigned by the bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityField {
    pub ambiguities: Array2<i32>,
}

const NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

fn neighbors(
    (r, c): (usize, usize),
    (rows, cols): (usize, usize),
) -> impl Iterator<Item = (usize, usize)> {
    NEIGHBORS.iter().filter_map(move |&(dr, dc)| {
        let nr = r as i64 + dr;
        let nc = c as i64 + dc;
        if nr >= 0 && nr < rows as i64 && nc >= 0 && nc < cols as i64 {
            Some((nr as usize, nc as usize))
        } else {
            None
        }
    })
}

/// Heap entry for the quality-guided growth; smaller wrapped gradients are
/// integrated first, ties broken by pixel index for determinism.
#[derive(PartialEq)]
struct Edge {
    weight: f64,
    target: (usize, usize),
    source: (usize, usize),
}

impl Eq for Edge {}

impl Ord for Edge {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then_with(|| other.target.cmp(&self.target))
            .then_with(|| other.source.cmp(&self.source))
    }
}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Counts 2x2 loops whose circulation of wrapped gradients is nonzero.
fn count_residues(wrapped: &Array2<f64>, mask: &Array2<bool>) -> usize {
    let (rows, cols) = wrapped.dim();
    let mut count = 0;
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            if mask[(r, c)] && mask[(r, c + 1)] && mask[(r + 1, c)] && mask[(r + 1, c + 1)] {
                let circ = wrap(wrapped[(r, c + 1)] - wrapped[(r, c)])
                    + wrap(wrapped[(r + 1, c + 1)] - wrapped[(r, c + 1)])
                    + wrap(wrapped[(r + 1, c)] - wrapped[(r + 1, c + 1)])
                    + wrap(wrapped[(r, c)] - wrapped[(r + 1, c)]);
                if circ.abs() > PI {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Masked-in cells reachable from the reference pixel through 4-adjacency.
/// Useful for trimming a mask whose far components spatial unwrapping would
/// otherwise reject.
pub fn reference_component(
    mask: &Array2<bool>,
    reference_pixel: (usize, usize),
) -> Result<Array2<bool>> {
    let dim = mask.dim();
    let (r, c) = reference_pixel;
    if r >= dim.0 || c >= dim.1 || !mask[(r, c)] {
        return Err(Error::invalid("reference_pixel", "must be in bounds and masked-in"));
    }
    let mut component = Array2::from_elem(dim, false);
    let mut queue = std::collections::VecDeque::new();
    component[(r, c)] = true;
    queue.push_back((r, c));
    while let Some(p) = queue.pop_front() {
        for n in neighbors(p, dim) {
            if mask[n] && !component[n] {
                component[n] = true;
                queue.push_back(n);
            }
        }
    }
    Ok(component)
}

/// Quality-guided flood-fill unwrapping: gradients are assumed below pi in
/// magnitude between 4-neighbors, the smoothest edges are integrated first,
/// and the result is referenced to zero at the reference pixel.
///
/// Every masked-in cell must be reachable from the reference pixel;
/// disconnected cells are an error (trim them with
/// [`reference_component`] first if partial coverage is intended).
pub fn spatial_unwrap(
    wrapped: &Array2<f64>,
    mask: &Array2<bool>,
    reference_pixel: (usize, usize),
) -> Result<UnwrappedField> {
    let dim = wrapped.dim();
    if mask.dim() != dim {
        return Err(Error::ShapeMismatch(format!(
            "wrapped {:?} vs mask {:?}",
            dim,
            mask.dim()
        )));
    }
    let (rr, rc) = reference_pixel;
    if rr >= dim.0 || rc >= dim.1 || !mask[(rr, rc)] {
        return Err(Error::invalid("reference_pixel", "must be in bounds and masked-in"));
    }

    let mut phase = Array2::zeros(dim);
    let mut visited = Array2::from_elem(dim, false);
    let mut heap = BinaryHeap::new();
    visited[reference_pixel] = true;
    let push_edges = |heap: &mut BinaryHeap<Edge>, visited: &Array2<bool>, from: (usize, usize)| {
        for n in neighbors(from, dim) {
            if mask[n] && !visited[n] {
                heap.push(Edge {
                    weight: wrap(wrapped[n] - wrapped[from]).abs(),
                    target: n,
                    source: from,
                });
            }
        }
    };
    push_edges(&mut heap, &visited, reference_pixel);
    while let Some(edge) = heap.pop() {
        if visited[edge.target] {
            continue;
        }
        visited[edge.target] = true;
        phase[edge.target] =
            phase[edge.source] + wrap(wrapped[edge.target] - wrapped[edge.source]);
        push_edges(&mut heap, &visited, edge.target);
    }

    let unreachable: Vec<(usize, usize)> = mask
        .indexed_iter()
        .filter(|&(idx, &m)| m && !visited[idx])
        .map(|(idx, _)| idx)
        .collect();
    if !unreachable.is_empty() {
        let sample: Vec<String> = unreachable
            .iter()
            .take(8)
            .map(|(r, c)| format!("({r}, {c})"))
            .collect();
        return Err(Error::invalid(
            "mask",
            format!(
                "{} masked-in cells unreachable from the reference pixel, e.g. {}",
                unreachable.len(),
                sample.join(", ")
            ),
        ));
    }

    Ok(UnwrappedField {
        phase,
        mask: mask.clone(),
        reference_pixel,
        residue_count: count_residues(wrapped, mask),
    })
}

/// Scales the lower unwrapped phase up to the higher baseline, resolves the
/// integer ambiguity of the higher wrapped phase, and returns both the
/// ambiguity grid and the final unwrapped field.
///
/// The higher phase is referenced by subtracting its own value at the
/// reference pixel inside the wrap, the residual between it and the scaled
/// prediction is spatially unwrapped with the same reference, and the
/// ambiguity integers make the final phase equal to prediction plus
/// unwrapped residual. The returned field's `residue_count` is that of the
/// residual unwrapping.
pub fn bootstrap_ambiguity(
    lower: &UnwrappedField,
    b_lower: f64,
    higher: &Interferogram,
    reference_pixel: (usize, usize),
) -> Result<(AmbiguityField, UnwrappedField)> {
    if b_lower == 0.0 || !b_lower.is_finite() {
        return Err(Error::invalid("b_lower", "zero lower baseline"));
    }
    if reference_pixel != lower.reference_pixel {
        return Err(Error::invalid(
            "reference_pixel",
            "must match the lower field's reference pixel",
        ));
    }
    let dim = lower.phase.dim();
    if higher.wrapped_phase.dim() != dim {
        return Err(Error::ShapeMismatch(format!(
            "higher {:?} vs lower {:?}",
            higher.wrapped_phase.dim(),
            dim
        )));
    }

    let ratio = higher.b_perp / b_lower;
    let ref_raw = higher.wrapped_phase[reference_pixel];
    let referenced = higher.wrapped_phase.mapv(|v| wrap(v - ref_raw));
    let prediction = lower.phase.mapv(|v| ratio * v);
    let mut residual = Array2::zeros(dim);
    for (idx, r) in residual.indexed_iter_mut() {
        *r = wrap(referenced[idx] - prediction[idx]);
    }
    let residual_unwrapped = spatial_unwrap(&residual, &lower.mask, reference_pixel)?;

    let mut ambiguities = Array2::zeros(dim);
    let mut phase = Array2::zeros(dim);
    for ((idx, n), m) in ambiguities.indexed_iter_mut().zip(lower.mask.iter()) {
        if *m {
            let cycles =
                (prediction[idx] + residual_unwrapped.phase[idx] - referenced[idx]) / (2.0 * PI);
            *n = cycles.round() as i32;
            phase[idx] = referenced[idx] + 2.0 * PI * *n as f64;
        }
    }

    Ok((
        AmbiguityField { ambiguities },
        UnwrappedField {
            phase,
            mask: lower.mask.clone(),
            reference_pixel,
            residue_count: residual_unwrapped.residue_count,
        },
    ))
}

/// Output of the full chain: one unwrapped field per physical stack member
/// plus the fraction of masked-in pixels that failed each bootstrap link.
#[derive(Debug, Clone)]
pub struct ChainUnwrapResult {
    /// Unwrapped fields in stack order (ascending baseline).
    pub fields: Vec<UnwrappedField>,
    /// Per-link failure fraction: pixels whose unwrapped residual magnitude
    /// exceeded pi, meaning the rounded ambiguity is unreliable there.
    pub link_failures: Vec<f64>,
}

/// Wrapped linear combination of physical members, with metadata borrowed
/// from the first member involved.
fn combined_interferogram(
    stack: &InterferogramStack,
    combination: &[(usize, i32)],
    length: f64,
) -> Interferogram {
    let dim = stack.interferograms[0].wrapped_phase.dim();
    let mut phase = Array2::zeros(dim);
    for &(idx, coeff) in combination {
        phase.scaled_add(coeff as f64, &stack.interferograms[idx].wrapped_phase);
    }
    phase.mapv_inplace(wrap);
    let donor = &stack.interferograms[combination[0].0];
    Interferogram {
        wrapped_phase: phase,
        b_perp: length,
        coherence: donor.coherence,
        kind: donor.kind,
        azimuth_time: donor.azimuth_time.clone(),
    }
}

/// Runs the asymptotic chain over a stack: spatially unwraps the shortest
/// effective baseline (a wrapped difference of members when the chain says
/// so), then bootstraps member by member up to the longest baseline.
pub fn asymptotic_unwrap(
    stack: &InterferogramStack,
    set: &BaselineSet,
) -> Result<ChainUnwrapResult> {
    stack.validate()?;
    let stack_baselines = stack.baselines();
    if set.physical.len() != stack_baselines.len()
        || set
            .physical
            .iter()
            .zip(&stack_baselines)
            .any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
    {
        return Err(Error::invalid(
            "baseline_set",
            format!(
                "physical baselines {:?} do not match stack baselines {:?}",
                set.physical, stack_baselines
            ),
        ));
    }

    let reference = stack.reference_pixel;
    let masked_total = stack.mask.iter().filter(|&&m| m).count() as f64;
    let mut fields: Vec<Option<UnwrappedField>> = vec![None; stack_baselines.len()];
    let mut link_failures = Vec::with_capacity(set.link_count());

    let first = &set.chain[0];
    let mut current = if first.is_physical() {
        let member = first.combination[0].0;
        let unwrapped = spatial_unwrap(
            &stack.interferograms[member].wrapped_phase,
            &stack.mask,
            reference,
        )?;
        fields[member] = Some(unwrapped.clone());
        unwrapped
    } else {
        let pseudo = combined_interferogram(stack, &first.combination, first.length);
        spatial_unwrap(&pseudo.wrapped_phase, &stack.mask, reference)?
    };
    let mut current_length = first.length;

    for member in &set.chain[1..] {
        let (higher, physical_index) = if member.is_physical() {
            let idx = member.combination[0].0;
            (stack.interferograms[idx].clone(), Some(idx))
        } else {
            (combined_interferogram(stack, &member.combination, member.length), None)
        };
        let (_, unwrapped) = bootstrap_ambiguity(&current, current_length, &higher, reference)?;
        let mut failures = 0usize;
        let ratio = member.length / current_length;
        for (idx, &m) in stack.mask.indexed_iter() {
            if m {
                let residual = unwrapped.phase[idx] - ratio * current.phase[idx];
                if residual.abs() > PI {
                    failures += 1;
                }
            }
        }
        link_failures.push(failures as f64 / masked_total);
        if let Some(idx) = physical_index {
            fields[idx] = Some(unwrapped.clone());
        }
        current = unwrapped;
        current_length = member.length;
    }

    let fields: Vec<UnwrappedField> = fields
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            f.ok_or_else(|| {
                Error::Computation(format!("chain never visited physical member {i}"))
            })
        })
        .collect::<Result<_>>()?;

    Ok(ChainUnwrapResult { fields, link_failures })
}

/// Converts an unwrapped field to heights relative to the reference pixel.
pub fn initial_height(
    unwrapped: &UnwrappedField,
    geom: &RadarGeometry,
    b_perp: f64,
) -> Result<HeightField> {
    let dim = unwrapped.phase.dim();
    let mut heights = Array2::zeros(dim);
    for ((r, c), h) in heights.indexed_iter_mut() {
        if unwrapped.mask[(r, c)] {
            *h = geom.phase_to_height_at(c, b_perp, unwrapped.phase[(r, c)])?;
        }
    }
    HeightField::new(heights, unwrapped.mask.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        effective_baselines, BaselineConfiguration, BaselineMode,
    };
    use crate::scene::{blocks_scene, ramp_scene, Block};
    use crate::simulate::{simulate_stack, InterferogramKind};

    fn full_mask(rows: usize, cols: usize) -> Array2<bool> {
        Array2::from_elem((rows, cols), true)
    }

    #[test]
    fn unwrap_constant_field() {
        let wrapped = Array2::from_elem((8, 8), 1.3);
        let out = spatial_unwrap(&wrapped, &full_mask(8, 8), (4, 4)).unwrap();
        assert!(out.phase.iter().all(|&v| v == 0.0));
        assert_eq!(out.residue_count, 0);
    }

    #[test]
    fn unwrap_recovers_smooth_field() {
        let truth = Array2::from_shape_fn((24, 24), |(r, c)| {
            0.9 * r as f64 + 0.7 * c as f64 + 2.0 * ((r as f64) / 5.0).sin()
        });
        let wrapped = truth.mapv(wrap);
        let reference = (3, 17);
        let out = spatial_unwrap(&wrapped, &full_mask(24, 24), reference).unwrap();
        assert_eq!(out.phase[reference], 0.0);
        for (idx, &v) in out.phase.indexed_iter() {
            assert!((v - (truth[idx] - truth[reference])).abs() < 1e-9);
        }
        assert_eq!(out.residue_count, 0);
    }

    #[test]
    fn unwrap_six_pi_ramp() {
        let cols = 25;
        let step = 6.0 * PI / (cols as f64 - 1.0);
        let truth = Array2::from_shape_fn((4, cols), |(_, c)| c as f64 * step);
        let out = spatial_unwrap(&truth.mapv(wrap), &full_mask(4, cols), (0, 0)).unwrap();
        let span = out.phase[(0, cols - 1)] - out.phase[(0, 0)];
        assert!((span - 6.0 * PI).abs() < 1e-9, "span {span}");
    }

    #[test]
    fn unwrap_counts_residues_around_a_singularity() {
        let wrapped = Array2::from_shape_fn((16, 16), |(r, c)| {
            (r as f64 - 7.5).atan2(c as f64 - 7.5)
        });
        let out = spatial_unwrap(&wrapped, &full_mask(16, 16), (0, 0)).unwrap();
        assert!(out.residue_count >= 1, "spiral has a residue");
    }

    #[test]
    fn unwrap_congruent_with_input_mod_two_pi() {
        let truth = Array2::from_shape_fn((12, 12), |(r, c)| {
            1.1 * r as f64 - 0.8 * c as f64 + 0.3 * (c as f64).cos()
        });
        let wrapped = truth.mapv(wrap);
        let reference = (6, 6);
        let out = spatial_unwrap(&wrapped, &full_mask(12, 12), reference).unwrap();
        for (idx, &v) in out.phase.indexed_iter() {
            let referenced_input = wrap(wrapped[idx] - wrapped[reference]);
            let k = (v - referenced_input) / (2.0 * PI);
            assert!((k - k.round()).abs() < 1e-9, "not a 2 pi multiple at {idx:?}");
        }
    }

    #[test]
    fn unwrap_rejects_disconnected_mask() {
        let mut mask = full_mask(10, 10);
        for r in 0..10 {
            mask[(r, 5)] = false;
        }
        let wrapped = Array2::zeros((10, 10));
        let err = spatial_unwrap(&wrapped, &mask, (4, 2)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unreachable"), "{msg}");
        assert!(msg.contains("40"), "should count the far half: {msg}");

        let trimmed = reference_component(&mask, (4, 2)).unwrap();
        assert_eq!(trimmed.iter().filter(|&&m| m).count(), 50);
        assert!(spatial_unwrap(&wrapped, &trimmed, (4, 2)).is_ok());
    }

    #[test]
    fn bootstrap_consistent_pair_is_exact() {
        let geom = RadarGeometry::x_band_tandem();
        let scene = ramp_scene(20, 20, 90.0).unwrap();
        let reference = (10, 10);
        let (b_low, b_high) = (15.0, 165.0);
        let mut low_truth = Array2::zeros((20, 20));
        let mut high_raw = Array2::zeros((20, 20));
        for ((r, c), v) in low_truth.indexed_iter_mut() {
            *v = geom.height_to_phase_at(c, b_low, scene.heights[(r, c)]);
            high_raw[(r, c)] = geom.height_to_phase_at(c, b_high, scene.heights[(r, c)]) + 0.4;
        }
        let ref_low = low_truth[reference];
        low_truth.mapv_inplace(|v| v - ref_low);
        let lower = spatial_unwrap(&low_truth.mapv(wrap), &scene.mask, reference).unwrap();
        let higher = Interferogram {
            wrapped_phase: high_raw.mapv(wrap),
            b_perp: b_high,
            coherence: 1.0,
            kind: InterferogramKind::DualSatelliteBistatic,
            azimuth_time: vec![0.0; 20],
        };
        let (ambiguities, unwrapped) =
            bootstrap_ambiguity(&lower, b_low, &higher, reference).unwrap();
        let ref_high = high_raw[reference];
        for (idx, &v) in unwrapped.phase.indexed_iter() {
            assert!((v - (high_raw[idx] - ref_high)).abs() < 1e-9, "at {idx:?}");
        }
        // Ambiguities reproduce the gap between referenced wrapped and final.
        for (idx, &n) in ambiguities.ambiguities.indexed_iter() {
            let w = wrap(higher.wrapped_phase[idx] - higher.wrapped_phase[reference]);
            assert!((unwrapped.phase[idx] - w - 2.0 * PI * n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn bootstrap_zero_fields_zero_ambiguities() {
        let lower = UnwrappedField {
            phase: Array2::zeros((6, 6)),
            mask: full_mask(6, 6),
            reference_pixel: (3, 3),
            residue_count: 0,
        };
        let higher = Interferogram {
            wrapped_phase: Array2::zeros((6, 6)),
            b_perp: 165.0,
            coherence: 1.0,
            kind: InterferogramKind::DualSatelliteBistatic,
            azimuth_time: vec![0.0; 6],
        };
        let (amb, out) = bootstrap_ambiguity(&lower, 15.0, &higher, (3, 3)).unwrap();
        assert!(amb.ambiguities.iter().all(|&n| n == 0));
        assert!(out.phase.iter().all(|&v| v == 0.0));
        assert!(bootstrap_ambiguity(&lower, 0.0, &higher, (3, 3)).is_err());
    }

    #[test]
    fn chain_recovers_ramp_with_blocks_exactly() {
        let geom = RadarGeometry::x_band_tandem();
        let base = ramp_scene(48, 48, 100.0).unwrap();
        let scene = blocks_scene(
            &base,
            &[
                Block { row0: 6, col0: 6, rows: 8, cols: 8, height: 30.0 },
                Block { row0: 30, col0: 22, rows: 10, cols: 6, height: 30.0 },
            ],
        )
        .unwrap();
        let cfg = BaselineConfiguration::new(BaselineMode::Config2, 15.0, 300.0);
        let (stack, _) = simulate_stack(&scene, &geom, &cfg, 1.0, None, None, 5).unwrap();
        // Anchor the datum at a zero-height pixel so recovered heights are
        // absolute, not shifted by a reference height.
        let stack = stack.with_reference_pixel((24, 0)).unwrap();
        let set = effective_baselines(&stack.baselines(), 5).unwrap();
        assert_eq!(set.effective(), vec![15.0, 150.0, 165.0, 315.0]);

        let result = asymptotic_unwrap(&stack, &set).unwrap();
        assert_eq!(result.fields.len(), 3);
        assert!(result.link_failures.iter().all(|&f| f == 0.0), "{:?}", result.link_failures);

        let reference = stack.reference_pixel;
        assert_eq!(scene.heights[reference], 0.0);
        for (member, field) in result.fields.iter().enumerate() {
            let heights = initial_height(field, &geom, stack.baselines()[member]).unwrap();
            for (idx, &h) in heights.heights.indexed_iter() {
                assert!(
                    (h - scene.heights[idx]).abs() < 1e-9,
                    "member {member} at {idx:?}: {h} vs {}",
                    scene.heights[idx]
                );
            }
        }

        // Unwrapping only ever adds whole fringes to the referenced input.
        for (member, field) in result.fields.iter().enumerate() {
            let raw = &stack.interferograms[member].wrapped_phase;
            let ref_raw = raw[reference];
            for (idx, &v) in field.phase.indexed_iter() {
                let k = (v - wrap(raw[idx] - ref_raw)) / (2.0 * PI);
                assert!((k - k.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn chain_validates_baseline_set() {
        let geom = RadarGeometry::x_band_tandem();
        let scene = ramp_scene(12, 12, 50.0).unwrap();
        let cfg = BaselineConfiguration::new(BaselineMode::Config2, 15.0, 300.0);
        let (stack, _) = simulate_stack(&scene, &geom, &cfg, 1.0, None, None, 2).unwrap();
        let wrong = effective_baselines(&[10.0, 20.0, 40.0], 5).unwrap();
        assert!(asymptotic_unwrap(&stack, &wrong).is_err());
    }

    #[test]
    fn link_failures_reported_for_corrupted_pixels() {
        let geom = RadarGeometry::x_band_tandem();
        let scene = ramp_scene(24, 24, 80.0).unwrap();
        let cfg = BaselineConfiguration::new(BaselineMode::Config2, 15.0, 300.0);
        let (mut stack, _) = simulate_stack(&scene, &geom, &cfg, 1.0, None, None, 4).unwrap();
        // A smooth bump on the longest member, 4.5 rad at the core: the
        // residual climbs past pi over several cells, so the core pixels
        // violate the per-pixel success condition while the chain still
        // proceeds.
        for r in 0..24usize {
            for c in 0..24usize {
                let d2 = (r as f64 - 5.0).powi(2) + (c as f64 - 17.0).powi(2);
                let bump = 4.5 * (-d2 / 18.0).exp();
                let v = stack.interferograms[2].wrapped_phase[(r, c)];
                stack.interferograms[2].wrapped_phase[(r, c)] = wrap(v + bump);
            }
        }
        let set = effective_baselines(&stack.baselines(), 5).unwrap();
        let result = asymptotic_unwrap(&stack, &set).unwrap();
        let last = *result.link_failures.last().unwrap();
        assert!(last > 0.0, "corruption must surface as link failures");
        assert!(last < 0.1, "only the bump core exceeds pi: {last}");
    }

    #[test]
    fn initial_height_composes_with_phase_to_height() {
        let geom = RadarGeometry::x_band_tandem();
        let zeros = UnwrappedField {
            phase: Array2::zeros((6, 6)),
            mask: full_mask(6, 6),
            reference_pixel: (3, 3),
            residue_count: 0,
        };
        let flat = initial_height(&zeros, &geom, 150.0).unwrap();
        assert!(flat.heights.iter().all(|&h| h == 0.0));

        let field = UnwrappedField {
            phase: Array2::from_shape_fn((6, 6), |(r, c)| 0.1 * (r * 6 + c) as f64),
            mask: full_mask(6, 6),
            reference_pixel: (0, 0),
            residue_count: 0,
        };
        let heights = initial_height(&field, &geom, 150.0).unwrap();
        for ((r, c), &h) in heights.heights.indexed_iter() {
            let expect = geom
                .phase_to_height_at(c, 150.0, field.phase[(r, c)])
                .unwrap();
            assert_eq!(h, expect);
        }
    }
}
