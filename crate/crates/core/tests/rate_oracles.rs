use spdc_core::overlap::PhaseModel;
use spdc_core::rates::{
    focus_optimize, jsa_value, pairs_closed_form, pairs_degenerate_numeric, pairs_via_bruteforce,
    FocusFamily, JsaModel,
};
use spdc_core::{
    BeamTriple, MaterialOptics, OracleOptions, PerBeam, PhysicalConstants, PumpSpec, SpectralShape,
};

mod common;
use common::{narrow_pump, type2};

#[test]
fn brute_force_matches_closed_form() {
    let (m, l) = type2();
    let c = PhysicalConstants::default();
    let pump = narrow_pump(l.pump, 1e9);
    for xi in [0.1, 1.0, 5.0] {
        let b = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(xi)).unwrap();
        let cf = pairs_closed_form(&m, &b, &c).unwrap();
        let bf = pairs_via_bruteforce(&m, &b, &pump, &c, &OracleOptions::new(1e-4)).unwrap();
        let rel = bf.pairs_per_pump_photon / cf.pairs_per_pump_photon - 1.0;
        assert!(rel.abs() < 0.01, "xi {xi}: {rel:e}");
        // The deficit is the phase-matching tail outside the window.
        let trunc = bf.truncation_estimate.unwrap();
        assert!(
            (rel + trunc).abs() < 0.1 * trunc,
            "xi {xi}: {rel:e} vs {trunc:e}"
        );
        assert_eq!(bf.xi_agg, cf.xi_agg);
    }
}

#[test]
fn brute_force_is_insensitive_to_narrow_pump_bandwidth() {
    let (m, l) = type2();
    let c = PhysicalConstants::default();
    let b = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
    let opts = OracleOptions::new(1e-4);
    let wide = pairs_via_bruteforce(&m, &b, &narrow_pump(l.pump, 2e9), &c, &opts).unwrap();
    let half = pairs_via_bruteforce(&m, &b, &narrow_pump(l.pump, 1e9), &c, &opts).unwrap();
    assert!((wide.pairs_per_pump_photon / half.pairs_per_pump_photon - 1.0).abs() < 5e-3);
    let flat = PumpSpec::new(1e-3, l.pump, SpectralShape::FlatTop, 2e9).unwrap();
    let flat = pairs_via_bruteforce(&m, &b, &flat, &c, &opts).unwrap();
    assert!((flat.pairs_per_pump_photon / half.pairs_per_pump_photon - 1.0).abs() < 5e-3);
}

#[test]
fn jsa_grid_reproduces_brute_force() {
    let (m, l) = type2();
    let c = PhysicalConstants::default();
    let b = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
    let sigma = 1e9;
    let pump = narrow_pump(l.pump, sigma);
    let width = 100.0;
    let bf = pairs_via_bruteforce(
        &m,
        &b,
        &pump,
        &c,
        &OracleOptions::new(1e-5).with_phase_half_width(width),
    )
    .unwrap();
    let phase = PhaseModel::linear(m.ng, m.length, c.c);
    let model = JsaModel::new(&m, &b, &pump, &c, phase, 1e-8).unwrap();
    let h = width / (phase.difference_coefficient * m.length).abs();
    let grid = model
        .grid_pairs((-6.0 * sigma, 6.0 * sigma, 41), (-h, h, 801))
        .unwrap();
    let rel = grid / bf.pairs_per_pump_photon - 1.0;
    assert!(rel.abs() < 5e-3, "{rel:e}");
}

#[test]
fn jsa_prefactor_structure() {
    let c = PhysicalConstants::default();
    let unit = MaterialOptics::new(PerBeam::splat(1.0), PerBeam::splat(1.0), 1e-12, 1e-2).unwrap();
    let lam = PerBeam::new(500e-9, 1000e-9, 1000e-9);
    let b = BeamTriple::from_focal_parameters(&unit, lam, PerBeam::splat(1.0)).unwrap();
    let pump = PumpSpec::new(1e-3, lam.pump, SpectralShape::FlatTop, 1e10).unwrap();
    let (w1, w2) = (
        c.angular_frequency(lam.signal),
        c.angular_frequency(lam.idler),
    );
    let o = num_complex::Complex64::new(0.3, -0.7);
    let psi = jsa_value(w1, w2, &pump, &unit, &b, |_, _| Ok(o), &c).unwrap();
    let hand = (2.0 * std::f64::consts::PI.powi(2) * c.hbar
        / (c.epsilon0 * lam.pump * lam.signal * lam.idler))
        .sqrt()
        * pump.amplitude(0.0);
    assert!((psi - o * hand).norm() <= 1e-14 * psi.norm());
    let outside = jsa_value(w1 + 1e10, w2, &pump, &unit, &b, |_, _| Ok(o), &c).unwrap();
    assert_eq!(outside.norm(), 0.0);
}

fn degenerate(length: f64) -> MaterialOptics {
    MaterialOptics::new(
        PerBeam::new(2.2, 2.14, 2.14),
        PerBeam::new(2.29, 2.18, 2.18),
        14e-12,
        length,
    )
    .unwrap()
}

#[test]
fn degenerate_rate_falls_with_dispersion() {
    let c = PhysicalConstants::default();
    let lam = PerBeam::new(775e-9, 1550e-9, 1550e-9);
    let m = degenerate(10e-3);
    let b = BeamTriple::from_focal_parameters(&m, lam, PerBeam::splat(0.5)).unwrap();
    let pump = narrow_pump(lam.pump, 1e9);
    let opts = OracleOptions::new(1e-4);
    assert!(pairs_via_bruteforce(&m, &b, &pump, &c, &opts).is_err());
    let rates: Vec<f64> = [1e-25, 2e-25, 4e-25, 8e-25, 16e-25]
        .iter()
        .map(|&k| {
            pairs_degenerate_numeric(&m, &b, &pump, k, &c, &opts)
                .unwrap()
                .pairs_per_pump_photon
        })
        .collect();
    for w in rates.windows(2) {
        assert!(w[1] < w[0], "{rates:?}");
    }
    // Pure quadratic phase: rate ∝ κ₀^(−1/2).
    assert!((rates[0] / rates[2] - 2.0).abs() < 0.02, "{rates:?}");
    // Reversing the sign of κ₀ mirrors φ, which only matters through the focusing asymmetry.
    let thin = BeamTriple::from_focal_parameters(&m, lam, PerBeam::splat(1e-3)).unwrap();
    let pos = pairs_degenerate_numeric(&m, &thin, &pump, 1e-25, &c, &opts)
        .unwrap()
        .pairs_per_pump_photon;
    let neg = pairs_degenerate_numeric(&m, &thin, &pump, -1e-25, &c, &opts)
        .unwrap()
        .pairs_per_pump_photon;
    assert!((neg / pos - 1.0).abs() < 0.01, "{neg} {pos}");
}

#[test]
fn degenerate_rate_scales_as_length_to_three_halves() {
    let c = PhysicalConstants::default();
    let lam = PerBeam::new(775e-9, 1550e-9, 1550e-9);
    let m_long = degenerate(20e-3);
    let waists = BeamTriple::from_focal_parameters(&m_long, lam, PerBeam::splat(0.01))
        .unwrap()
        .waists();
    let pump = narrow_pump(lam.pump, 1e9);
    let opts = OracleOptions::new(1e-4);
    let lengths: Vec<f64> = (0..5).map(|i| 2e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    let pts: Vec<(f64, f64)> = lengths
        .iter()
        .map(|&len| {
            let m = degenerate(len);
            let b = BeamTriple::from_waists(&m, lam, waists).unwrap();
            let r = pairs_degenerate_numeric(&m, &b, &pump, 1e-25, &c, &opts).unwrap();
            (len.ln(), r.pairs_per_pump_photon.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope / 1.5 - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn collection_focus_optimum_matches_dense_scan() {
    let (m, l) = type2();
    let c = PhysicalConstants::default();
    let base = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
    let r = focus_optimize(&m, &base, &c, (0.01, 100.0), FocusFamily::Collection).unwrap();
    assert!(!r.at_boundary && !r.fell_back_to_scan);
    let n = 1000;
    let grid: Vec<f64> = (0..n)
        .map(|i| (0.01f64.ln() + (100f64.ln() - 0.01f64.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let rate = |xi: f64| {
        let b = spdc_core::rates::beams_for_focus(&m, &base, FocusFamily::Collection, xi).unwrap();
        pairs_closed_form(&m, &b, &c).unwrap().pairs_per_pump_photon
    };
    let (i, _) = grid
        .iter()
        .map(|&x| rate(x))
        .enumerate()
        .fold((0, f64::MIN), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let step = grid[1] / grid[0];
    assert!(
        r.xi_opt / grid[i] < step && grid[i] / r.xi_opt < step,
        "{} vs {}",
        r.xi_opt,
        grid[i]
    );
    assert!(r.rate.pairs_per_pump_photon >= rate(grid[i]) * (1.0 - 1e-12));
    // Narrowing the range around the optimum does not move it.
    let again = focus_optimize(
        &m,
        &base,
        &c,
        (0.5 * r.xi_opt, 2.0 * r.xi_opt),
        FocusFamily::Collection,
    )
    .unwrap();
    assert!((again.xi_opt / r.xi_opt - 1.0).abs() < 1e-4);
    // Limits of the objective.
    assert!(rate(1e-4) < 1e-2 * r.rate.pairs_per_pump_photon);
    assert!(rate(1e4) < 1e-2 * r.rate.pairs_per_pump_photon);
}
