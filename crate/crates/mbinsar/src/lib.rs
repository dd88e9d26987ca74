//! Simulation and design toolkit for tandem dual-antenna spaceborne SAR
//! interferometry.
//!
//! A formation of two X-band satellites, one of them carrying a second
//! receive antenna on a boom, observes the same ground scene through several
//! interferometric baselines at once. Short baselines give interferograms
//! that are easy to unwrap but noisy in height; long baselines are precise
//! but hopelessly wrapped on their own. The trick is to chain them: unwrap
//! the shortest baseline spatially, then use each unwrapped result to predict
//! and resolve the integer ambiguities of the next longer one, pixel by
//! pixel, until the longest baseline is unwrapped and converted to height.
//!
//! The crate covers that chain end to end:
//!
//! * [`geometry`] - phase/height conversion, baseline chains built from the
//!   physical antenna separations, coherence driven phase noise.
//! * [`scene`] - synthetic truth terrain (ramps, blocks, canopy holes).
//! * [`simulate`] - wrapped interferogram stacks over a truth scene, with
//!   optional orbit error and turbulent delay screens, plus Monte Carlo
//!   trials of the ambiguity chain alone.
//! * [`unwrap`] - quality guided spatial unwrapping of a single baseline and
//!   the baseline-to-baseline ambiguity transfer.
//! * [`design`] - the successful-unwrapping criterion, analytic success
//!   rates, and the search for the longest feasible formation baseline.
//! * [`estimate`] - joint least squares for per-pixel height together with
//!   orbit error parameters and path delay screens.
//! * [`metrics`] - height field comparison (RMSE, bias, coverage) and
//!   histogram export.
//! * [`io`] - headered CSV grids and JSON manifests for every artifact the
//!   pipeline exchanges.
//! * [`stats`] - normal CDF/quantile and deterministic seed derivation used
//!   throughout.

pub mod design;
pub mod estimate;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod scene;
pub mod simulate;
pub mod stats;
pub mod unwrap;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
