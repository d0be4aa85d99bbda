//! Shared fixtures for the benchmarks.

use spdc_core::{BeamTriple, MaterialOptics, PerBeam, PumpSpec, SpectralShape};

pub const LAMBDAS: PerBeam<f64> = PerBeam::new(775e-9, 1550e-9, 1550e-9);

/// Type-II crystal with `k_p = k₁ + k₂`.
pub fn type2() -> MaterialOptics {
    let n = PerBeam::new(1.80, 1.82, 1.78);
    let ng = PerBeam::new(1.90, 1.85, 1.78);
    MaterialOptics::new(n, ng, 2.4e-12, 10e-3).expect("valid crystal")
}

/// Equal focal parameters on all three beams.
pub fn beams(material: &MaterialOptics, xi: f64) -> BeamTriple {
    BeamTriple::from_focal_parameters(material, LAMBDAS, PerBeam::splat(xi)).expect("valid beams")
}

pub fn narrow_pump() -> PumpSpec {
    PumpSpec::new(1e-3, LAMBDAS.pump, SpectralShape::Gaussian, 1e9).expect("valid pump")
}
