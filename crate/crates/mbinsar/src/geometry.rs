//! Imaging geometry, phase/height conversion, and baseline bookkeeping.
//!
//! A perpendicular baseline B maps height h to interferometric phase
//! phi = (4 pi / lambda) (B / (R sin theta)) h, so a long baseline sees fine
//! height detail but wraps quickly, and a short baseline wraps slowly but is
//! noisy. Everything in this module is about navigating that trade: the
//! wrap operator, the conversion formulas, the equivalent baselines of the
//! four tandem acquisition layouts, and the effective baseline chain built
//! by integer combinations of the physical baselines.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wraps a phase onto the principal interval (-pi, pi].
///
/// The boundary convention is fixed: odd multiples of pi map to +pi, so
/// golden files do not flip sign between platforms.
pub fn wrap(phase: f64) -> f64 {
    let r = phase.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Side-looking radar geometry shared by every stage of the pipeline.
///
/// Grid convention: row index runs along azimuth, column index along range.
/// The slant range grows linearly with the column; the incidence angle is
/// held constant across the grid (flat-earth phase is assumed removed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarGeometry {
    /// Radar wavelength (m).
    pub wavelength: f64,
    /// Slant range to the near edge of the scene (m).
    pub slant_range: f64,
    /// Incidence angle (rad).
    pub incidence: f64,
    /// Slant-range cell size along columns (m).
    pub range_spacing: f64,
    /// Along-track cell size along rows (m).
    pub azimuth_spacing: f64,
    /// Time between consecutive azimuth rows (s).
    pub azimuth_time_step: f64,
}

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

impl RadarGeometry {
    /// A representative X-band tandem geometry: 9.6 GHz, 608015 m near
    /// range, 30 degree incidence, 0.93 m x 2.00 m resolution cells.
    pub fn x_band_tandem() -> Self {
        RadarGeometry {
            wavelength: SPEED_OF_LIGHT / 9.6e9,
            slant_range: 608_015.0,
            incidence: 30.0_f64.to_radians(),
            range_spacing: 0.93,
            azimuth_spacing: 2.00,
            // Along-track sampling assuming a 7.6 km/s platform velocity.
            azimuth_time_step: 2.00 / 7600.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if !(self.slant_range > 0.0) {
            return Err(Error::invalid("slant_range", "must be positive"));
        }
        if !(self.incidence > 0.0 && self.incidence < PI / 2.0) {
            return Err(Error::invalid("incidence", "must lie in (0, pi/2)"));
        }
        if !(self.range_spacing > 0.0) ||
            !(self.azimuth_spacing > 0.0) ||
            !(self.azimuth_time_step > 0.0)
        {
            return Err(Error::invalid("spacing", "all spacings must be positive"));
        }
        Ok(())
    }

    pub fn sin_incidence(&self) -> f64 {
        self.incidence.sin()
    }

    /// Slant range of a grid column (m).
    pub fn slant_range_at(&self, col: usize) -> f64 {
        self.slant_range + col as f64 * self.range_spacing
    }

    /// Centered azimuth time of a grid row (s). Row (rows-1)/2 maps to 0 so
    /// that rate terms are decorrelated from offsets.
    pub fn azimuth_time_at(&self, row: usize, rows: usize) -> f64 {
        (row as f64 - (rows as f64 - 1.0) / 2.0) * self.azimuth_time_step
    }

    /// Converts interferometric phase to height at the reference range:
    /// h = (lambda / 4 pi) (R sin theta / B) phi.
    pub fn phase_to_height(&self, b_perp: f64, phase: f64) -> Result<f64> {
        self.phase_to_height_at(0, b_perp, phase)
    }

    /// Per-column variant of [`Self::phase_to_height`].
    pub fn phase_to_height_at(&self, col: usize, b_perp: f64, phase: f64) -> Result<f64> {
        if b_perp == 0.0 || !b_perp.is_finite() {
            return Err(Error::invalid("b_perp", "degenerate baseline"));
        }
        let r_sin = self.slant_range_at(col) * self.sin_incidence();
        Ok(self.wavelength / (4.0 * PI) * r_sin / b_perp * phase)
    }

    /// Converts height to interferometric phase at the reference range:
    /// phi = (4 pi / lambda) (B / (R sin theta)) h.
    pub fn height_to_phase(&self, b_perp: f64, height: f64) -> f64 {
        self.height_to_phase_at(0, b_perp, height)
    }

    /// Per-column variant of [`Self::height_to_phase`].
    pub fn height_to_phase_at(&self, col: usize, b_perp: f64, height: f64) -> f64 {
        let r_sin = self.slant_range_at(col) * self.sin_incidence();
        4.0 * PI / self.wavelength * b_perp / r_sin * height
    }

    /// Height change producing one full 2 pi cycle on baseline `b1`:
    /// h_amb = lambda R sin theta / (2 B1).
    pub fn height_ambiguity(&self, b1: f64) -> Result<f64> {
        if !(b1 > 0.0) {
            return Err(Error::invalid("b1", "baseline must be positive"));
        }
        Ok(self.wavelength * self.slant_range * self.sin_incidence() / (2.0 * b1))
    }
}

/// Coherence below which the point-scatterer phase variance approximation
/// loses validity; callers should emit a warning rather than refuse.
pub const COHERENCE_VALIDITY_FLOOR: f64 = 0.9;

/// Phase standard deviation from coherence:
/// sigma_phi = sqrt((1 - gamma^2) / (2 gamma^2)).
///
/// The approximation holds for point scatterers with gamma above
/// [`COHERENCE_VALIDITY_FLOOR`]; see [`phase_std_within_validity`].
pub fn coherence_to_phase_std(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("coherence outside (0, 1]: {gamma}")));
    }
    Ok(((1.0 - gamma * gamma) / (2.0 * gamma * gamma)).sqrt())
}

/// True when [`coherence_to_phase_std`] is inside its validity region.
pub fn phase_std_within_validity(gamma: f64) -> bool {
    gamma >= COHERENCE_VALIDITY_FLOOR
}

/// The four tandem acquisition layouts. Configurations 1 to 3 operate
/// bi-statically (one satellite illuminates, both receive); configuration 4
/// is mono-static (each satellite images on its own).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMode {
    Config1,
    Config2,
    Config3,
    Config4,
}

impl BaselineMode {
    pub const ALL: [BaselineMode; 4] = [
        BaselineMode::Config1,
        BaselineMode::Config2,
        BaselineMode::Config3,
        BaselineMode::Config4,
    ];

    /// True for the mono-static layout (configuration 4).
    pub fn is_monostatic(&self) -> bool {
        matches!(self, BaselineMode::Config4)
    }
}

impl std::fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BaselineMode::Config1 => "Config1",
            BaselineMode::Config2 => "Config2",
            BaselineMode::Config3 => "Config3",
            BaselineMode::Config4 => "Config4",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Config1" => Ok(BaselineMode::Config1),
            "Config2" => Ok(BaselineMode::Config2),
            "Config3" => Ok(BaselineMode::Config3),
            "Config4" => Ok(BaselineMode::Config4),
            other => Err(Error::invalid("mode", format!("unknown baseline mode {other:?}"))),
        }
    }
}

/// Physical antenna and satellite separations plus the acquisition layout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfiguration {
    /// Boom separation L1 between the two antennas of one satellite (m).
    pub antenna_baseline: f64,
    /// Separation L2 between the satellites (m).
    pub satellite_baseline: f64,
    pub mode: BaselineMode,
}

impl BaselineConfiguration {
    pub fn new(mode: BaselineMode, antenna_baseline: f64, satellite_baseline: f64) -> Self {
        BaselineConfiguration {
            antenna_baseline,
            satellite_baseline,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.antenna_baseline > 0.0) {
            return Err(Error::invalid("antenna_baseline", "must be positive"));
        }
        if !(self.satellite_baseline > 0.0) {
            return Err(Error::invalid("satellite_baseline", "must be positive"));
        }
        Ok(())
    }
}

/// Perpendicular baselines of the three interferograms produced by a
/// configuration, ascending for L1 < L2.
pub fn equivalent_baselines(cfg: &BaselineConfiguration) -> Result<[f64; 3]> {
    cfg.validate()?;
    let l1 = cfg.antenna_baseline;
    let l2 = cfg.satellite_baseline;
    Ok(match cfg.mode {
        BaselineMode::Config1 => [l1 / 2.0, l2 / 2.0, l2 + l1],
        BaselineMode::Config2 => [l2 / 2.0, l2 / 2.0 + l1, l2 + l1],
        BaselineMode::Config3 => [l1 + l2 / 2.0, l2 + l1 / 2.0, l2 + l1],
        BaselineMode::Config4 => [l1 / 2.0, l2 + l1 / 2.0, l2 + l1],
    })
}

/// One element of the effective baseline chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMember {
    /// Perpendicular baseline length (m), always positive.
    pub length: f64,
    /// Integer combination of physical baselines reproducing `length`:
    /// sum of coeff * physical[index] over the pairs equals +length.
    /// Physical members carry the single pair (own index, +1).
    pub combination: Vec<(usize, i32)>,
    /// Sum of squared combination coefficients. The phase variance of the
    /// member is this factor times the per-interferogram variance, which is
    /// what the chained unwrapping checks must use for pseudo baselines.
    pub variance_factor: f64,
}

impl ChainMember {
    fn physical(index: usize, length: f64) -> Self {
        ChainMember {
            length,
            combination: vec![(index, 1)],
            variance_factor: 1.0,
        }
    }

    /// True when the member is a direct physical interferogram rather than
    /// a linear combination.
    pub fn is_physical(&self) -> bool {
        self.combination.len() == 1 && self.combination[0].1 == 1
    }

    /// Phase variance of this member given per-physical-interferogram
    /// variances (rad^2).
    pub fn phase_variance(&self, var_per_physical: &[f64]) -> f64 {
        self.combination
            .iter()
            .map(|&(idx, c)| (c as f64) * (c as f64) * var_per_physical[idx])
            .sum()
    }
}

/// The ascending effective baseline chain B1..B4 together with the physical
/// baselines it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSet {
    /// Physical perpendicular baselines, strictly ascending (m).
    pub physical: Vec<f64>,
    /// Effective chain, ascending; the first member may be a combination.
    pub chain: Vec<ChainMember>,
}

impl BaselineSet {
    /// Shortest effective baseline (m).
    pub fn b1(&self) -> f64 {
        self.chain[0].length
    }

    /// Longest effective baseline (m); equals the longest physical one.
    pub fn longest(&self) -> f64 {
        self.chain[self.chain.len() - 1].length
    }

    /// Effective baseline lengths in chain order.
    pub fn effective(&self) -> Vec<f64> {
        self.chain.iter().map(|m| m.length).collect()
    }

    /// Number of bootstrap links (chain length minus one).
    pub fn link_count(&self) -> usize {
        self.chain.len().saturating_sub(1)
    }
}

/// Builds the effective baseline chain from physical baselines.
///
/// B1 is the shortest baseline reachable as |P_j - i P_k| with
/// 1 <= i <= max_int (the search the optimal-design criterion minimizes
/// over); when that beats the shortest physical baseline the chain gains a
/// pseudo member in front, otherwise the chain is the physical list itself.
/// Ties prefer the smaller variance factor, then the smaller index pair, so
/// the result is deterministic. `max_int = 0` disables combinations.
pub fn effective_baselines(physical: &[f64], max_int: u32) -> Result<BaselineSet> {
    if physical.is_empty() {
        return Err(Error::invalid("physical", "at least one baseline required"));
    }
    for (i, &b) in physical.iter().enumerate() {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid("physical", format!("baseline {i} must be positive")));
        }
        if i > 0 && b <= physical[i - 1] {
            return Err(Error::invalid("physical", "baselines must be strictly ascending"));
        }
    }

    let mut chain: Vec<ChainMember> = physical
        .iter()
        .enumerate()
        .map(|(i, &b)| ChainMember::physical(i, b))
        .collect();

    if let Some(combo) = best_combination(physical, max_int) {
        if combo.length < physical[0] - LENGTH_EPS {
            chain.insert(0, combo);
        }
    }

    Ok(BaselineSet {
        physical: physical.to_vec(),
        chain,
    })
}

const LENGTH_EPS: f64 = 1e-9;

fn best_combination(physical: &[f64], max_int: u32) -> Option<ChainMember> {
    let mut best: Option<ChainMember> = None;
    for j in 0..physical.len() {
        for k in 0..physical.len() {
            if j == k {
                continue;
            }
            for i in 1..=max_int as i64 {
                let value = physical[j] - i as f64 * physical[k];
                let length = value.abs();
                if length <= LENGTH_EPS {
                    continue;
                }
                let sign = if value >= 0.0 { 1 } else { -1 };
                let mut combination = vec![(j, sign), (k, -sign * i as i32)];
                combination.sort_by_key(|&(idx, _)| idx);
                let candidate = ChainMember {
                    length,
                    combination,
                    variance_factor: 1.0 + (i * i) as f64,
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        if length < b.length - LENGTH_EPS {
                            true
                        } else if length > b.length + LENGTH_EPS {
                            false
                        } else if candidate.variance_factor != b.variance_factor {
                            candidate.variance_factor < b.variance_factor
                        } else {
                            candidate.combination < b.combination
                        }
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
    }
    best
}

/// Safe tandem formation: the satellites trace a helix around a common
/// orbit, so the cross-track and radial separations oscillate with the
/// argument of latitude and the perpendicular baseline varies accordingly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelixFormation {
    /// Cross-track (horizontal) separation amplitude (m).
    pub horizontal_amplitude: f64,
    /// Radial (vertical) separation amplitude (m).
    pub vertical_amplitude: f64,
    /// Phase offset of the radial oscillation (rad); a nonzero offset makes
    /// ascending and descending passes see different baselines.
    pub vertical_phase_offset: f64,
}

/// Perpendicular baseline of the helix at argument of latitude `u`:
/// the cross-track separation A_h cos(u) and radial separation
/// A_v sin(u + offset) projected onto the across-look direction.
pub fn helix_perpendicular_baseline(
    f: &HelixFormation,
    arg_of_latitude: f64,
    geom: &RadarGeometry,
) -> f64 {
    let cross = f.horizontal_amplitude * arg_of_latitude.cos();
    let radial = f.vertical_amplitude * (arg_of_latitude + f.vertical_phase_offset).sin();
    cross * geom.incidence.cos() + radial * geom.sin_incidence()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> RadarGeometry {
        RadarGeometry::x_band_tandem()
    }

    #[test]
    fn wrap_principal_interval() {
        assert_eq!(wrap(0.0), 0.0);
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(-3.5 * PI) - 0.5 * PI).abs() < 1e-12);
        assert!((wrap(PI) - PI).abs() < 1e-12);
        assert!((wrap(-PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn wrap_is_idempotent_and_congruent() {
        let mut x = -25.0;
        while x < 25.0 {
            let w = wrap(x);
            assert!(w > -PI && w <= PI, "wrap({x}) = {w} outside range");
            assert!((wrap(w) - w).abs() < 1e-12);
            let k = (x - w) / (2.0 * PI);
            assert!((k - k.round()).abs() < 1e-9, "wrap({x}) not congruent");
            x += 0.137;
        }
    }

    #[test]
    fn phase_height_reference_values() {
        let g = geom();
        assert_eq!(g.phase_to_height(15.0, 0.0).unwrap(), 0.0);
        let h = g.phase_to_height(15.0, 2.0 * PI).unwrap();
        assert!((h - 316.4554).abs() < 1e-3, "got {h}");
        let phi = g.height_to_phase(300.0, 1.0);
        assert!((phi - 0.397097).abs() < 1e-5, "got {phi}");
    }

    #[test]
    fn phase_height_round_trip() {
        let g = geom();
        let mut b = 1.0;
        while b <= 1000.0 {
            for h in [-250.0, -1.0, 0.3, 87.5] {
                let phi = g.height_to_phase(b, h);
                let back = g.phase_to_height(b, phi).unwrap();
                assert!((back - h).abs() <= 1e-12 * h.abs().max(1.0));
            }
            b *= 3.3;
        }
    }

    #[test]
    fn degenerate_baseline_is_rejected() {
        assert!(geom().phase_to_height(0.0, 1.0).is_err());
        assert!(geom().height_ambiguity(0.0).is_err());
        assert!(geom().height_ambiguity(-3.0).is_err());
    }

    #[test]
    fn height_ambiguity_reference_values() {
        let g = geom();
        let h75 = g.height_ambiguity(7.5).unwrap();
        let h15 = g.height_ambiguity(15.0).unwrap();
        assert!((h75 - 632.9108).abs() < 1e-3, "got {h75}");
        assert!((h15 - 316.4554).abs() < 1e-3, "got {h15}");
        assert!((h75 / h15 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_phase_std_values() {
        assert_eq!(coherence_to_phase_std(1.0).unwrap(), 0.0);
        let s99 = coherence_to_phase_std(0.99).unwrap();
        assert!((s99 - 0.1007573).abs() < 1e-6, "got {s99}");
        let s90 = coherence_to_phase_std(0.9).unwrap();
        assert!((s90 - 0.342468).abs() < 1e-5, "got {s90}");
        assert!(coherence_to_phase_std(0.0).is_err());
        assert!(coherence_to_phase_std(1.2).is_err());
        assert!(coherence_to_phase_std(-0.4).is_err());
        assert!(phase_std_within_validity(0.95));
        assert!(!phase_std_within_validity(0.85));
    }

    #[test]
    fn equivalent_baselines_per_mode() {
        let eq = |mode, l1, l2| {
            equivalent_baselines(&BaselineConfiguration::new(mode, l1, l2)).unwrap()
        };
        assert_eq!(eq(BaselineMode::Config1, 15.0, 200.0), [7.5, 100.0, 215.0]);
        assert_eq!(eq(BaselineMode::Config2, 15.0, 300.0), [150.0, 165.0, 315.0]);
        assert_eq!(eq(BaselineMode::Config3, 15.0, 150.0), [90.0, 157.5, 165.0]);
        assert_eq!(eq(BaselineMode::Config4, 15.0, 100.0), [7.5, 107.5, 115.0]);
    }

    #[test]
    fn equivalent_baselines_ascend() {
        let mut l1 = 0.5;
        while l1 < 20.0 {
            let mut l2 = l1 + 0.5;
            while l2 < 400.0 {
                for mode in BaselineMode::ALL {
                    let b = equivalent_baselines(&BaselineConfiguration::new(mode, l1, l2))
                        .unwrap();
                    assert!(b[0] < b[1] && b[1] < b[2], "{mode} {l1} {l2}: {b:?}");
                }
                l2 *= 1.7;
            }
            l1 += 3.1;
        }
    }

    #[test]
    fn effective_baselines_finds_unit_combination() {
        let set = effective_baselines(&[150.0, 165.0, 315.0], 3).unwrap();
        assert_eq!(set.effective(), vec![15.0, 150.0, 165.0, 315.0]);
        let combo = &set.chain[0];
        assert_eq!(combo.combination, vec![(0, -1), (1, 1)]);
        assert_eq!(combo.variance_factor, 2.0);
        let reproduced: f64 = combo
            .combination
            .iter()
            .map(|&(i, c)| c as f64 * set.physical[i])
            .sum();
        assert_eq!(reproduced, combo.length);
    }

    #[test]
    fn effective_baselines_finds_multiple_combination() {
        // Simplified two-interferogram system: 166 - 2 * 75 = 16.
        let set = effective_baselines(&[75.0, 166.0], 5).unwrap();
        assert_eq!(set.effective(), vec![16.0, 75.0, 166.0]);
        assert_eq!(set.chain[0].combination, vec![(0, -2), (1, 1)]);
        assert_eq!(set.chain[0].variance_factor, 5.0);
    }

    #[test]
    fn effective_baselines_keeps_short_physical() {
        let set = effective_baselines(&[7.5, 100.0, 215.0], 5).unwrap();
        assert_eq!(set.effective(), vec![7.5, 100.0, 215.0]);
        assert!(set.chain[0].is_physical());
    }

    #[test]
    fn effective_baselines_degenerate_cases() {
        let single = effective_baselines(&[42.0], 5).unwrap();
        assert_eq!(single.b1(), 42.0);
        assert_eq!(single.longest(), 42.0);

        let no_combo = effective_baselines(&[150.0, 165.0, 315.0], 0).unwrap();
        assert_eq!(no_combo.effective(), vec![150.0, 165.0, 315.0]);

        assert!(effective_baselines(&[], 5).is_err());
        assert!(effective_baselines(&[10.0, 10.0], 5).is_err());
        assert!(effective_baselines(&[-1.0, 5.0], 5).is_err());
    }

    #[test]
    fn b1_never_exceeds_shortest_physical() {
        let cases: [&[f64]; 4] = [
            &[3.0, 17.0, 40.0],
            &[12.5, 13.0, 99.0],
            &[5.0, 250.0],
            &[75.0, 91.0, 166.0],
        ];
        for physical in cases {
            let set = effective_baselines(physical, 5).unwrap();
            assert!(set.b1() <= physical[0] + 1e-12);
            for member in &set.chain {
                let reproduced: f64 = member
                    .combination
                    .iter()
                    .map(|&(i, c)| c as f64 * set.physical[i])
                    .sum();
                assert!((reproduced - member.length).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn helix_baseline_projection() {
        let g = geom();
        let f = HelixFormation {
            horizontal_amplitude: 350.0,
            vertical_amplitude: 0.0,
            vertical_phase_offset: 0.0,
        };
        let b = helix_perpendicular_baseline(&f, 0.0, &g);
        assert!((b - 350.0 * (30.0_f64.to_radians()).cos()).abs() < 1e-9);

        let f2 = HelixFormation {
            horizontal_amplitude: 350.0,
            vertical_amplitude: 200.0,
            vertical_phase_offset: 0.7,
        };
        for u in [0.0, 1.1, 2.9] {
            let period = helix_perpendicular_baseline(&f2, u + 2.0 * PI, &g);
            assert!((helix_perpendicular_baseline(&f2, u, &g) - period).abs() < 1e-9);
        }
        let asym = (helix_perpendicular_baseline(&f2, 0.4, &g)
            - helix_perpendicular_baseline(&f2, PI - 0.4, &g))
        .abs();
        assert!(asym > 1e-3);
    }
}
