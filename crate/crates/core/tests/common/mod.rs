#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spdc_core::{BeamTriple, MaterialOptics, PerBeam, PumpSpec, SpectralShape};

/// Type-II configuration with `k_p = k₁ + k₂` at 775 → 1550 + 1550 nm.
pub fn type2() -> (MaterialOptics, PerBeam<f64>) {
    let n = PerBeam::new(1.80, 1.82, 1.78);
    let ng = PerBeam::new(1.90, 1.85, 1.78);
    (
        MaterialOptics::new(n, ng, 2.4e-12, 10e-3).unwrap(),
        PerBeam::new(775e-9, 1550e-9, 1550e-9),
    )
}

pub fn narrow_pump(lambda: f64, bandwidth: f64) -> PumpSpec {
    PumpSpec::new(1e-3, lambda, SpectralShape::Gaussian, bandwidth).unwrap()
}

/// Random configuration with `Δk L` in ±30 and focal parameters log-uniform in [0.01, 10].
pub fn random_config(rng: &mut ChaCha8Rng) -> (MaterialOptics, BeamTriple, f64) {
    let lp = rng.gen_range(400e-9..800e-9);
    let l1 = rng.gen_range(1.6 * lp..2.4 * lp);
    let l2 = 1.0 / (1.0 / lp - 1.0 / l1);
    let length = rng.gen_range(1e-3..30e-3);
    let (n1, n2) = (rng.gen_range(1.5..2.3), rng.gen_range(1.5..2.3));
    let dk = rng.gen_range(-30.0..30.0) / length;
    let kp = 2.0 * PI * (n1 / l1 + n2 / l2) - dk;
    let np = kp * lp / (2.0 * PI);
    let n = PerBeam::new(np, n1, n2);
    let m = MaterialOptics::new(
        n,
        PerBeam::new(2.0, 1.9, 1.8),
        rng.gen_range(1e-12..2e-11),
        length,
    )
    .unwrap();
    let xi = PerBeam::new(0, 0, 0).map(|_: i32| 10f64.powf(rng.gen_range(-2.0..1.0)));
    let beams = BeamTriple::from_focal_parameters(&m, PerBeam::new(lp, l1, l2), xi).unwrap();
    (m, beams, dk)
}
