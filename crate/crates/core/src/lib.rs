//! Absolute brightness of spontaneous parametric down-conversion with focused
//! Gaussian pump and collection modes.
//!
//! The crate is organised as:
//!
//! * [`materials`]: dispersion models, indices, wavenumbers, susceptibilities, poling.
//! * [`beams`]: Gaussian modes and focal parameters.
//! * [`overlap`]: the spatial overlap integral and its reduced parameters.
//! * [`rates`]: pair rates in closed form and by nested quadrature, correction factors.
//! * [`table`]: revised-rate table from correction factors.
//! * [`units`]: dimension tracking for auditing the rate formulas.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used throughout.

pub mod beams;
pub mod error;
pub mod materials;
pub mod overlap;
pub mod per_beam;
pub mod quadrature;
pub mod rates;
pub mod table;
pub mod units;

pub use beams::{BeamTriple, GaussianMode};
pub use error::{Bound, Error, Result};
pub use materials::{DispersionModel, MaterialOptics, PhysicalConstants, SellmeierForm};
pub use overlap::{OverlapParams, PhaseModel};
pub use per_beam::PerBeam;
pub use quadrature::{ErrorBasis, Estimate, GaussKronrod, Tolerance};
pub use rates::{FocusFamily, OracleOptions, PumpSpec, RateMethod, RateResult, SpectralShape};
pub use table::{TableOutcome, TableRow, TableSet};
