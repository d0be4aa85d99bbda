//! Spatial overlap of the pump mode with the two collection modes.
//!
//! The overlap is computed two independent ways: directly along the crystal
//! axis from the scaled beam parameters ([`overlap_direct`]), and from the
//! reduced form in the normalised coordinate `ℓ = 2z/L` with the aggregate
//! focal parameter `ξ`, curvature coefficient `C` and normalisation `D`
//! ([`overlap_simplified`]). Agreement between them checks the whole
//! algebraic reduction.
//!
//! The phase mismatch `Δk = k₁ + k₂ − k_p` is a scalar input; the axial
//! mismatch of the wavevectors is approximated by it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beams::BeamTriple;
use crate::error::{Error, Result};
use crate::materials::{domain_walls, poling_profile, MaterialOptics};
use crate::per_beam::PerBeam;
use crate::quadrature::{uniform_breaks, Estimate, GaussKronrod, Tolerance};

/// Poles closer than this to the segment [-1, 1] are refused.
const POLE_CLEARANCE: f64 = 1e-9;

/// Panels per radian of accumulated phase: one panel per ~1.5 oscillations.
const PHASE_PER_PANEL: f64 = 3.0 * PI;

/// `k₁ξ₁ + k₂ξ₂ + k_pξ_p`
fn weighted_sum(k: PerBeam<f64>, xi: PerBeam<f64>) -> f64 {
    k.signal * xi.signal + k.idler * xi.idler + k.pump * xi.pump
}

/// `k₁ξ₁(ξ₂ − ξ_p) + k₂ξ₂(ξ₁ − ξ_p) + k_pξ_p(ξ₁ + ξ₂)`
fn aggregate_numerator(k: PerBeam<f64>, xi: PerBeam<f64>) -> f64 {
    k.signal * xi.signal * (xi.idler - xi.pump)
        + k.idler * xi.idler * (xi.signal - xi.pump)
        + k.pump * xi.pump * (xi.signal + xi.idler)
}

fn nonzero(v: f64, what: &'static str) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        Err(Error::Degenerate(what))
    } else {
        Ok(v)
    }
}

/// Aggregate focal parameter ξ entering the arctan rate law.
pub fn aggregate_focal_parameter(k: PerBeam<f64>, xi: PerBeam<f64>) -> Result<f64> {
    let den = nonzero(weighted_sum(k, xi), "k₁ξ₁ + k₂ξ₂ + k_pξ_p vanishes")?;
    Ok(aggregate_numerator(k, xi) / den)
}

/// Wavefront-curvature coefficient `C`; exactly zero when `k_p = k₁ + k₂`.
pub fn quadratic_coefficient(k: PerBeam<f64>, xi: PerBeam<f64>) -> Result<f64> {
    let num = nonzero(
        aggregate_numerator(k, xi),
        "aggregate focal parameter numerator vanishes",
    )?;
    let mismatch = k.pump - k.signal - k.idler;
    Ok(mismatch * xi.product() * weighted_sum(k, xi) / (num * num))
}

/// Normalisation coefficient `D` (1/m³).
pub fn normalization_coefficient(k: PerBeam<f64>, xi: PerBeam<f64>, length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!(
            "crystal length must be positive, got {length:e} m"
        )));
    }
    let den = nonzero(weighted_sum(k, xi), "k₁ξ₁ + k₂ξ₂ + k_pξ_p vanishes")?;
    Ok(k.product() * xi.product() / (length * den))
}

/// `A₊B₊`, defined through `ξ / (A₊B₊) = k_p² ξ₁ξ₂ξ_p / (k₁ξ₁ + k₂ξ₂ + k_pξ_p)²`.
pub fn a_plus_b_plus(k: PerBeam<f64>, xi: PerBeam<f64>) -> Result<f64> {
    if xi.iter().any(|&x| x == 0.0) {
        return Err(Error::Degenerate("a focal parameter is zero"));
    }
    nonzero(k.pump, "pump wavenumber is zero")?;
    Ok(weighted_sum(k, xi) * aggregate_numerator(k, xi) / (k.pump * k.pump * xi.product()))
}

/// Reduced overlap parameters for one beam configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapParams {
    pub xi_agg: f64,
    pub c_quad: f64,
    /// 1/m³
    pub d_norm: f64,
    pub a_plus_b_plus: f64,
    /// `φ = Δk L`
    pub phi: f64,
}

impl OverlapParams {
    pub fn new(k: PerBeam<f64>, xi: PerBeam<f64>, length: f64, phi: f64) -> Result<Self> {
        Ok(Self {
            xi_agg: aggregate_focal_parameter(k, xi)?,
            c_quad: quadratic_coefficient(k, xi)?,
            d_norm: normalization_coefficient(k, xi, length)?,
            a_plus_b_plus: a_plus_b_plus(k, xi)?,
            phi,
        })
    }

    pub fn from_beams(beams: &BeamTriple, phi: f64) -> Result<Self> {
        Self::new(
            beams.wavenumbers(),
            beams.focal_parameters(),
            beams.length,
            phi,
        )
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }
}

/// First-order (plus optional group-velocity-dispersion) phase mismatch as a
/// function of the pump and difference frequency offsets.
///
/// `φ = [a_p δω_p + a₋ δω₋ + κ₀ δω₋²/4] L + shift`, with
/// `a_p = (n_g1 + n_g2 − 2 n_gp)/2c` and `a₋ = (n_g1 − n_g2)/2c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseModel {
    pub pump_coefficient: f64,
    pub difference_coefficient: f64,
    /// s²/m
    pub kappa0: f64,
    pub length: f64,
    pub qpm_shift: f64,
}

impl PhaseModel {
    pub fn linear(ng: PerBeam<f64>, length: f64, c: f64) -> Self {
        Self {
            pump_coefficient: (ng.signal + ng.idler - 2.0 * ng.pump) / (2.0 * c),
            difference_coefficient: (ng.signal - ng.idler) / (2.0 * c),
            kappa0: 0.0,
            length,
            qpm_shift: 0.0,
        }
    }

    pub fn with_kappa0(self, kappa0: f64) -> Self {
        Self { kappa0, ..self }
    }

    pub fn with_shift(self, qpm_shift: f64) -> Self {
        Self { qpm_shift, ..self }
    }

    pub fn phi(&self, delta_omega_pump: f64, delta_omega_minus: f64) -> f64 {
        let dm = delta_omega_minus;
        (self.pump_coefficient * delta_omega_pump
            + self.difference_coefficient * dm
            + 0.25 * self.kappa0 * dm * dm)
            * self.length
            + self.qpm_shift
    }

    /// `∂φ/∂δω₋`
    pub fn slope_minus(&self, delta_omega_minus: f64) -> f64 {
        (self.difference_coefficient + 0.5 * self.kappa0 * delta_omega_minus) * self.length
    }
}

/// φ to first order in the frequency offsets from band centre.
pub fn phase_mismatch_phi(
    delta_omega_pump: f64,
    delta_omega_minus: f64,
    ng: PerBeam<f64>,
    length: f64,
    c: f64,
    qpm_shift: f64,
) -> f64 {
    PhaseModel::linear(ng, length, c)
        .with_shift(qpm_shift)
        .phi(delta_omega_pump, delta_omega_minus)
}

/// Roots of `1 + iξℓ − Cξ²ℓ²` in the complex ℓ plane.
fn denominator_roots(xi: f64, c: f64) -> Vec<Complex64> {
    let a = -c * xi * xi;
    let b = Complex64::new(0.0, xi);
    if a == 0.0 {
        if xi == 0.0 {
            return vec![];
        }
        return vec![-Complex64::new(1.0, 0.0) / b];
    }
    let disc = (b * b - 4.0 * a).sqrt();
    // Numerically stable pairing.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    let mut roots = vec![q / a];
    if q.norm() > 0.0 {
        roots.push(Complex64::new(1.0, 0.0) / q);
    }
    roots
}

/// `∫₋₁¹ dℓ e^{−iφℓ/2} / (1 + iℓξ − Cξ²ℓ²)`.
pub fn axial_integral(
    phi: f64,
    xi: f64,
    c_quad: f64,
    quad_tol: f64,
) -> Result<Estimate<Complex64>> {
    if !(quad_tol > 0.0) {
        return Err(Error::Domain(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    if !(phi.is_finite() && xi.is_finite() && c_quad.is_finite()) {
        return Err(Error::Domain("non-finite overlap parameter".into()));
    }
    let mut breaks = uniform_breaks(
        -1.0,
        1.0,
        (phi.abs() / PHASE_PER_PANEL).ceil().max(1.0) as usize,
    );
    for root in denominator_roots(xi, c_quad) {
        if root.re.abs() <= 1.0 + POLE_CLEARANCE && root.im.abs() <= POLE_CLEARANCE {
            return Err(Error::Singularity {
                re: root.re,
                im: root.im,
            });
        }
        if root.re.abs() < 1.0 && root.im.abs() < 0.5 {
            breaks.push(root.re);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let cx = c_quad * xi * xi;
    let f = |l: f64| {
        let num = Complex64::new(0.0, -0.5 * phi * l).exp();
        num / Complex64::new(1.0 - cx * l * l, xi * l)
    };
    GaussKronrod::new(Tolerance::magnitude(quad_tol)).integrate_with_breaks(f, &breaks)
}

fn scale(est: Estimate<Complex64>, factor: Complex64) -> Estimate<Complex64> {
    Estimate {
        value: est.value * factor,
        error: est.error * factor.norm(),
        magnitude: est.magnitude * factor.norm(),
        ..est
    }
}

/// Overlap from the reduced ℓ-form:
/// `𝒪 = −i χ √(2/π) w_p w₁ w₂ D ∫₋₁¹ dℓ e^{−iφℓ/2} / (1 + iℓξ − Cξ²ℓ²)`.
pub fn overlap_simplified(
    params: &OverlapParams,
    chi_eff: f64,
    waists: PerBeam<f64>,
    quad_tol: f64,
) -> Result<Estimate<Complex64>> {
    let integral = axial_integral(params.phi, params.xi_agg, params.c_quad, quad_tol)?;
    let pre = Complex64::new(
        0.0,
        -chi_eff * (2.0 / PI).sqrt() * waists.product() * params.d_norm,
    );
    Ok(scale(integral, pre))
}

/// Overlap by direct quadrature along the crystal axis:
/// `𝒪 = −i χ √(8/π) w_p w₁ w₂ ∫ dz χ̄(z) e^{−iΔk z} / (q̄_p q̄₁* + q̄_p q̄₂* + q̄₁* q̄₂*)`,
/// with χ̄ the poling sign pattern of `material`.
pub fn overlap_direct(
    beams: &BeamTriple,
    material: &MaterialOptics,
    delta_k: f64,
    quad_tol: f64,
) -> Result<Estimate<Complex64>> {
    if !(quad_tol > 0.0) {
        return Err(Error::Domain(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    let length = material.length;
    if ((beams.length - length) / length).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "beam triple was built for L = {:e} m but the crystal is {length:e} m long",
            beams.length
        )));
    }
    let half = 0.5 * length;
    let mut breaks = uniform_breaks(
        -half,
        half,
        (delta_k.abs() * length / PHASE_PER_PANEL).ceil().max(1.0) as usize,
    );
    if let Some(period) = material.poling_period {
        breaks.extend(domain_walls(period, length)?);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }

    let modes = beams.modes;
    let period = material.poling_period;
    let f = |z: f64| {
        // Sample the sign at the panel interior; walls are break points.
        let sign = poling_profile(z, period, length).unwrap_or(0) as f64;
        if sign == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = modes.pump.scaled_beam_parameter(z);
        let s = modes.signal.scaled_beam_parameter(z).conj();
        let i = modes.idler.scaled_beam_parameter(z).conj();
        let den = p * s + p * i + s * i;
        Complex64::new(0.0, -delta_k * z).exp() * sign / den
    };
    let integral =
        GaussKronrod::new(Tolerance::magnitude(quad_tol)).integrate_with_breaks(f, &breaks)?;
    let pre = Complex64::new(
        0.0,
        -material.chi2_eff() * (8.0 / PI).sqrt() * beams.waists().product(),
    );
    Ok(scale(integral, pre))
}
