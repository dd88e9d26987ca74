//! Joint least-squares estimation of per-pixel heights, orbit error
//! parameters, and per-pixel atmospheric delays from unwrapped stacks.
//!
//! The observation model per masked pixel p and interferogram k is
//!
//!   phi_kp = a_kp h_p + f_k g_p . beta + d_k D_p
//!
//! with a_kp the height-to-phase factor at the pixel's slant range, g_p
//! the four reference-differenced orbit regressors [dr/dBc, dr/dBc t,
//! dr/dBn, dr/dBn t] scaled by 4 pi / lambda, f_k the interferogram's
//! orbit sensitivity factor, and D_p the one-way atmospheric delay phase
//! carried only by dual-satellite mono-static rows. Heights and delays are
//! block-diagonal, so the solve eliminates the local unknowns per pixel by
//! small Householder reflections and reduces the system to a four-column
//! least-squares problem for beta, never forming any m by m matrix.
//!
//! The orbit block is optional. When every orbit-sensitive row also
//! carries a free per-pixel delay, the delays span the orbit columns and
//! beta drops out of the model entirely; the solver detects that and
//! refuses rather than returning noise. Estimating delays therefore means
//! building without the orbit block (or with at least one delay-free
//! dual-satellite interferogram in the stack).

use crate::geometry::coherence_to_phase_std;
use crate::scene::HeightField;
use crate::simulate::{
    range_partials, InterferogramStack, OrbitErrorParams, SatelliteState,
};
use crate::unwrap::UnwrappedField;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix4};
use ndarray::Array2;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Which unknowns the model carries besides heights and orbit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Heights and orbit parameters only.
    Bistatic,
    /// Adds one atmospheric delay unknown per pixel, observed by the
    /// dual-satellite mono-static interferograms. The reference pixel's
    /// delay is fixed to zero as the datum.
    Monostatic,
}

/// Human names of the four orbit columns, used in rank-deficiency errors.
pub const ORBIT_PARAMETER_NAMES: [&str; 4] = [
    "cross-track baseline offset",
    "cross-track baseline rate",
    "normal baseline offset",
    "normal baseline rate",
];

/// Assembled sparse observation model. Rows are stored per pixel; the
/// height and delay blocks are diagonal by construction and only the four
/// orbit columns couple pixels.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub kind: ModelKind,
    mask: Array2<bool>,
    reference_pixel: (usize, usize),
    /// Masked-in pixels in row-major order, reference included.
    pixels: Vec<(usize, usize)>,
    members: usize,
    /// Row-major per (pixel, member): reference-differenced unwrapped phase.
    obs: Vec<f64>,
    height_coeff: Vec<f64>,
    orbit_coeff: Vec<[f64; 4]>,
    delay_coeff: Vec<f64>,
    /// Square-root observation weight per member, normalized to max 1.
    member_weight: Vec<f64>,
    has_orbit: bool,
    constant_azimuth_time: bool,
}

impl JointModel {
    pub fn observation_count(&self) -> usize {
        self.pixels.len() * self.members
    }

    /// Heights per pixel, the orbit parameters when the block is present,
    /// and in the mono-static variant one delay per pixel except the
    /// reference datum.
    pub fn unknown_count(&self) -> usize {
        let delays = match self.kind {
            ModelKind::Bistatic => 0,
            ModelKind::Monostatic => self.pixels.len() - 1,
        };
        self.pixels.len() + if self.has_orbit { 4 } else { 0 } + delays
    }

    fn local_count(&self, pixel: (usize, usize)) -> usize {
        match self.kind {
            ModelKind::Bistatic => 1,
            ModelKind::Monostatic if pixel == self.reference_pixel => 1,
            ModelKind::Monostatic => 2,
        }
    }
}

fn check_fields_consistent(
    stack: &InterferogramStack,
    unwrapped: &[UnwrappedField],
) -> Result<()> {
    stack.validate()?;
    if unwrapped.len() != stack.interferograms.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} unwrapped fields for {} interferograms",
            unwrapped.len(),
            stack.interferograms.len()
        )));
    }
    for (k, field) in unwrapped.iter().enumerate() {
        if field.mask != stack.mask {
            return Err(Error::invalid(
                "unwrapped",
                format!("field {k} was unwrapped under a different mask"),
            ));
        }
        if field.reference_pixel != stack.reference_pixel {
            return Err(Error::invalid(
                "unwrapped",
                format!("field {k} uses a different reference pixel"),
            ));
        }
    }
    Ok(())
}

/// Assembles the joint model from an unwrapped stack and the per-pixel
/// satellite states the orbit regressors are evaluated at. `states: None`
/// omits the orbit block, the variant used when estimating per-pixel
/// delays on a stack whose dual-satellite members are all mono-static.
pub fn build_joint_model(
    stack: &InterferogramStack,
    unwrapped: &[UnwrappedField],
    states: Option<&Array2<SatelliteState>>,
    kind: ModelKind,
) -> Result<JointModel> {
    check_fields_consistent(stack, unwrapped)?;
    let (rows, cols) = stack.mask.dim();
    if let Some(states) = states {
        if states.dim() != (rows, cols) {
            return Err(Error::ShapeMismatch(format!(
                "states {:?} for a {} x {} scene",
                states.dim(),
                rows,
                cols
            )));
        }
    }
    if kind == ModelKind::Monostatic
        && !stack.interferograms.iter().any(|i| i.kind.carries_atmosphere())
    {
        return Err(Error::invalid(
            "kind",
            "mono-static model without any dual-satellite mono-static interferogram",
        ));
    }

    let geom = stack.geometry;
    let reference = stack.reference_pixel;
    let members = stack.interferograms.len();
    let pixels: Vec<(usize, usize)> = stack
        .mask
        .indexed_iter()
        .filter(|(_, &m)| m)
        .map(|(p, _)| p)
        .collect();

    let scale = 4.0 * PI / geom.wavelength;
    let orbit_regressors = |pixel: (usize, usize)| -> Result<[f64; 4]> {
        let Some(states) = states else {
            return Ok([0.0; 4]);
        };
        let partials = range_partials(&states[pixel])?;
        let t = geom.azimuth_time_at(pixel.0, rows);
        Ok([
            scale * partials.d_bc,
            scale * partials.d_bc * t,
            scale * partials.d_bn,
            scale * partials.d_bn * t,
        ])
    };
    let g_ref = orbit_regressors(reference)?;

    let sigmas: Vec<f64> = stack
        .interferograms
        .iter()
        .map(|i| coherence_to_phase_std(i.coherence))
        .collect::<Result<_>>()?;
    // Ratio weights stay finite at perfect coherence and reduce to the
    // unweighted model when every interferogram shares one sigma.
    let floor = 1e-6;
    let smallest = sigmas.iter().cloned().fold(f64::INFINITY, f64::min).max(floor);
    let member_weight: Vec<f64> = sigmas.iter().map(|&s| smallest / s.max(floor)).collect();

    let n = pixels.len();
    let mut obs = vec![0.0; n * members];
    let mut height_coeff = vec![0.0; n * members];
    let mut orbit_coeff = vec![[0.0; 4]; n * members];
    let mut delay_coeff = vec![0.0; n * members];
    for (pi, &pixel) in pixels.iter().enumerate() {
        let g = orbit_regressors(pixel)?;
        let dg = [g[0] - g_ref[0], g[1] - g_ref[1], g[2] - g_ref[2], g[3] - g_ref[3]];
        for (k, member) in stack.interferograms.iter().enumerate() {
            let row = pi * members + k;
            obs[row] = unwrapped[k].phase[pixel] - unwrapped[k].phase[reference];
            height_coeff[row] = geom.height_to_phase_at(pixel.1, member.b_perp, 1.0);
            let f = member.kind.orbit_factor();
            orbit_coeff[row] = [f * dg[0], f * dg[1], f * dg[2], f * dg[3]];
            delay_coeff[row] = if kind == ModelKind::Monostatic
                && member.kind.carries_atmosphere()
                && pixel != reference
            {
                1.0
            } else {
                0.0
            };
        }
    }

    let constant_azimuth_time = rows < 2;
    Ok(JointModel {
        kind,
        mask: stack.mask.clone(),
        reference_pixel: reference,
        pixels,
        members,
        obs,
        height_coeff,
        orbit_coeff,
        delay_coeff,
        member_weight,
        has_orbit: states.is_some(),
        constant_azimuth_time,
    })
}

/// Solution of the joint model.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// Estimated heights relative to the reference pixel (m); exactly zero
    /// there, NaN outside the mask.
    pub heights: HeightField,
    pub orbit: OrbitErrorParams,
    /// Mono-static only: estimated one-way delay phase per pixel (rad),
    /// zero at the reference pixel.
    pub delays: Option<Array2<f64>>,
    /// Root mean square of the unweighted phase residuals (rad).
    pub residual_rms: f64,
    /// Posterior standard deviation of each height (m), NaN outside the
    /// mask.
    pub posterior_height_std: Array2<f64>,
    /// Ratio of the extreme singular values of the reduced orbit system.
    pub condition_indicator: f64,
}

/// Per-pixel elimination output: the upper-triangular local factor, the
/// transformed orbit block and observations, plus the excess rows feeding
/// the global orbit problem.
struct PixelElimination {
    l: usize,
    r: [[f64; 2]; 2],
    g: [[f64; 4]; 2],
    y: [f64; 2],
    excess: Vec<[f64; 5]>,
}

/// Householder elimination of the first `l` columns of a small row block
/// laid out as [local | orbit(4) | obs]. Width is l + 5.
fn eliminate_local(
    block: &mut [[f64; 7]],
    l: usize,
    pixel: (usize, usize),
) -> Result<PixelElimination> {
    let k = block.len();
    let width = l + 5;
    let scale = block
        .iter()
        .flat_map(|row| row[..width].iter())
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    for j in 0..l {
        let norm = (j..k).map(|i| block[i][j] * block[i][j]).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale.max(1.0) {
            let unknown = if j == 0 { "height" } else { "atmospheric delay" };
            return Err(Error::RankDeficient(format!(
                "{unknown} unobservable at pixel ({}, {})",
                pixel.0, pixel.1
            )));
        }
        let alpha = -block[j][j].signum() * norm;
        let mut v = [0.0_f64; 7];
        let mut vnorm2 = 0.0;
        for i in j..k {
            v[i] = block[i][j];
            if i == j {
                v[i] -= alpha;
            }
            vnorm2 += v[i] * v[i];
        }
        if vnorm2 > 0.0 {
            for c in j..width {
                let dot = (j..k).map(|i| v[i] * block[i][c]).sum::<f64>();
                let f = 2.0 * dot / vnorm2;
                for i in j..k {
                    block[i][c] -= f * v[i];
                }
            }
        }
        block[j][j] = alpha;
        for i in (j + 1)..k {
            block[i][j] = 0.0;
        }
    }
    let mut r = [[0.0; 2]; 2];
    let mut g = [[0.0; 4]; 2];
    let mut y = [0.0; 2];
    for j in 0..l {
        for jj in j..l {
            r[j][jj] = block[j][jj];
        }
        for c in 0..4 {
            g[j][c] = block[j][l + c];
        }
        y[j] = block[j][l + 4];
    }
    let excess = (l..k)
        .map(|i| {
            [block[i][l], block[i][l + 1], block[i][l + 2], block[i][l + 3], block[i][l + 4]]
        })
        .collect();
    Ok(PixelElimination { l, r, g, y, excess })
}

/// Stacks the excess rows of every pixel into the reduced four-column
/// problem for the orbit parameters and solves it, returning beta, its
/// covariance factor, and the condition indicator.
fn solve_orbit(
    model: &JointModel,
    eliminations: &[PixelElimination],
) -> Result<(nalgebra::Vector4<f64>, Matrix4<f64>, f64)> {
    // Scale of the orbit columns before elimination; the reduced system
    // must retain a comparable share or the local columns span the orbit
    // block and beta is in the null space.
    let mut original_scale = 0.0_f64;
    for (row, coeffs) in model.orbit_coeff.iter().enumerate() {
        let w = model.member_weight[row % model.members];
        for &v in coeffs {
            original_scale = original_scale.max((w * v).abs());
        }
    }
    if original_scale == 0.0 {
        return Err(Error::RankDeficient(
            "all orbit coefficient columns are zero".into(),
        ));
    }

    let excess_rows: usize = eliminations.iter().map(|e| e.excess.len()).sum();
    if excess_rows < 4 {
        return Err(Error::RankDeficient(
            "fewer than four excess observations: orbit parameters unobservable".into(),
        ));
    }
    let mut s = DMatrix::zeros(excess_rows, 4);
    let mut z = DVector::zeros(excess_rows);
    let mut at = 0;
    for e in eliminations {
        for row in &e.excess {
            for c in 0..4 {
                s[(at, c)] = row[c];
            }
            z[at] = row[4];
            at += 1;
        }
    }
    let survived = (0..4).map(|c| s.column(c).norm()).fold(0.0_f64, f64::max);
    if survived <= 1e-9 * original_scale {
        let hint = if model.kind == ModelKind::Monostatic {
            ": per-pixel delay columns absorb every orbit-sensitive row; \
             estimate the orbit without delay columns, or the delays without \
             the orbit block"
        } else {
            ": local columns span the orbit block"
        };
        return Err(Error::RankDeficient(format!(
            "orbit parameters unobservable{hint}"
        )));
    }

    let qr = s.clone().qr();
    let r4 = qr.r();
    let diag_scale = (0..4).map(|i| r4[(i, i)].abs()).fold(0.0_f64, f64::max);
    for i in 0..4 {
        let tiny = r4[(i, i)].abs() <= 1e-10 * diag_scale.max(1e-300)
            || r4[(i, i)].abs() <= 1e-11 * original_scale;
        if tiny {
            let mut message =
                format!("orbit parameter '{}' unobservable", ORBIT_PARAMETER_NAMES[i]);
            if i % 2 == 1 && model.constant_azimuth_time {
                message.push_str(": constant azimuth time");
            }
            return Err(Error::RankDeficient(message));
        }
    }
    let qtz = qr.q().transpose() * &z;
    let r4_square = Matrix4::from_fn(|i, j| r4[(i, j)]);
    let beta = r4_square
        .solve_upper_triangular(&nalgebra::Vector4::from_fn(|i, _| qtz[i]))
        .ok_or_else(|| Error::Computation("orbit back substitution failed".into()))?;
    let r4_inv = r4_square
        .solve_upper_triangular(&Matrix4::identity())
        .ok_or_else(|| Error::Computation("orbit factor inversion failed".into()))?;
    // Covariance of beta up to the residual variance factor.
    let c_beta = r4_inv * r4_inv.transpose();
    let svd = r4_square.svd(false, false);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    Ok((beta, c_beta, condition))
}

fn eliminate_pixel(model: &JointModel, pi: usize) -> Result<PixelElimination> {
    let pixel = model.pixels[pi];
    let l = model.local_count(pixel);
    let mut block = vec![[0.0_f64; 7]; model.members];
    for k in 0..model.members {
        let row = pi * model.members + k;
        let w = model.member_weight[k];
        let mut cols = [0.0_f64; 7];
        cols[0] = w * model.height_coeff[row];
        if l == 2 {
            cols[1] = w * model.delay_coeff[row];
        }
        for c in 0..4 {
            cols[l + c] = w * model.orbit_coeff[row][c];
        }
        cols[l + 4] = w * model.obs[row];
        block[k] = cols;
    }
    eliminate_local(&mut block, l, pixel)
}

/// Solves the joint model by per-pixel orthogonal elimination followed by
/// a global four-parameter least-squares solve for the orbit error.
pub fn solve_joint(model: &JointModel) -> Result<EstimateResult> {
    let n = model.pixels.len();
    if n == 0 {
        return Err(Error::invalid("model", "no masked pixels"));
    }
    let eliminations: Vec<PixelElimination> = (0..n)
        .into_par_iter()
        .map(|pi| eliminate_pixel(model, pi))
        .collect::<Result<_>>()?;

    let (beta, c_beta, condition_indicator) = if model.has_orbit {
        solve_orbit(model, &eliminations)?
    } else {
        (nalgebra::Vector4::zeros(), Matrix4::zeros(), 1.0)
    };

    // Back-substitute the per-pixel unknowns and accumulate residuals.
    let (rows, cols) = model.mask.dim();
    let mut heights = Array2::from_elem((rows, cols), f64::NAN);
    let mut delays = match model.kind {
        ModelKind::Bistatic => None,
        ModelKind::Monostatic => Some(Array2::from_elem((rows, cols), f64::NAN)),
    };
    let mut posterior_factor = Array2::from_elem((rows, cols), f64::NAN);
    let mut rss_weighted = 0.0;
    let mut rss_raw = 0.0;
    for (pi, e) in eliminations.iter().enumerate() {
        let pixel = model.pixels[pi];
        let l = e.l;
        let mut x = [0.0_f64; 2];
        for j in (0..l).rev() {
            let mut v = e.y[j];
            for c in 0..4 {
                v -= e.g[j][c] * beta[c];
            }
            for jj in (j + 1)..l {
                v -= e.r[j][jj] * x[jj];
            }
            x[j] = v / e.r[j][j];
        }
        heights[pixel] = x[0];
        if let Some(d) = delays.as_mut() {
            d[pixel] = if l == 2 { x[1] } else { 0.0 };
        }

        // M = R^-1, T = M G; height variance factor is row 0 of
        // M M^T + T C T^T, exact because the transformed observations are
        // independent of the excess rows that determine beta.
        let mut m = [[0.0_f64; 2]; 2];
        m[0][0] = 1.0 / e.r[0][0];
        if l == 2 {
            m[1][1] = 1.0 / e.r[1][1];
            m[0][1] = -e.r[0][1] / (e.r[0][0] * e.r[1][1]);
        }
        let mut t0 = [0.0_f64; 4];
        for c in 0..4 {
            for j in 0..l {
                t0[c] += m[0][j] * e.g[j][c];
            }
        }
        let mut var0 = (0..l).map(|j| m[0][j] * m[0][j]).sum::<f64>();
        for a in 0..4 {
            for b in 0..4 {
                var0 += t0[a] * c_beta[(a, b)] * t0[b];
            }
        }
        posterior_factor[pixel] = var0;

        for k in 0..model.members {
            let row = pi * model.members + k;
            let mut residual = model.obs[row] - model.height_coeff[row] * x[0];
            for c in 0..4 {
                residual -= model.orbit_coeff[row][c] * beta[c];
            }
            if l == 2 {
                residual -= model.delay_coeff[row] * x[1];
            }
            rss_raw += residual * residual;
            let wr = model.member_weight[k] * residual;
            rss_weighted += wr * wr;
        }
    }

    let observations = model.observation_count();
    let locals: usize = eliminations.iter().map(|e| e.l).sum();
    let globals = if model.has_orbit { 4 } else { 0 };
    let dof = observations as isize - (locals + globals) as isize;
    let sigma2 = if dof > 0 { (rss_weighted / dof as f64).max(0.0) } else { 0.0 };
    let posterior_height_std = posterior_factor.mapv(|f| {
        if f.is_nan() {
            f64::NAN
        } else {
            (sigma2 * f).sqrt()
        }
    });
    let residual_rms = (rss_raw / observations as f64).sqrt();

    let heights = HeightField::new(heights, model.mask.clone())?;
    Ok(EstimateResult {
        heights,
        orbit: OrbitErrorParams {
            delta_bc: beta[0],
            delta_bc_rate: beta[1],
            delta_bn: beta[2],
            delta_bn_rate: beta[3],
        },
        delays,
        residual_rms,
        posterior_height_std,
        condition_indicator,
    })
}

/// Heights straight from the longest baseline's unwrapped phase, with no
/// orbit or atmosphere compensation. This is the reference point that the
/// joint estimate is judged against.
pub fn estimate_heights_only(
    stack: &InterferogramStack,
    unwrapped: &[UnwrappedField],
) -> Result<EstimateResult> {
    check_fields_consistent(stack, unwrapped)?;
    let longest = stack.interferograms.len() - 1;
    let member = &stack.interferograms[longest];
    let field = &unwrapped[longest];
    let reference = stack.reference_pixel;
    let sigma = coherence_to_phase_std(member.coherence)?;

    let (rows, cols) = stack.mask.dim();
    let mut heights = Array2::from_elem((rows, cols), f64::NAN);
    let mut posterior = Array2::from_elem((rows, cols), f64::NAN);
    for ((r, c), &inside) in stack.mask.indexed_iter() {
        if !inside {
            continue;
        }
        let phase = field.phase[(r, c)] - field.phase[reference];
        heights[(r, c)] = stack.geometry.phase_to_height_at(c, member.b_perp, phase)?;
        posterior[(r, c)] = stack
            .geometry
            .phase_to_height_at(c, member.b_perp, sigma)?
            .abs();
    }
    let heights = HeightField::new(heights, stack.mask.clone())?;
    Ok(EstimateResult {
        heights,
        orbit: OrbitErrorParams::zero(),
        delays: None,
        residual_rms: 0.0,
        posterior_height_std: posterior,
        condition_indicator: 1.0,
    })
}
