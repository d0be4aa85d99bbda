//! Photon-pair generation rates.
//!
//! [`pairs_closed_form`] evaluates the arctan rate law. [`pairs_via_bruteforce`]
//! integrates `|ψ(ω₁, ω₂)|²` over the two frequencies with nested adaptive
//! quadrature and no delta-function reduction, and
//! [`pairs_degenerate_numeric`] does the same with a phase mismatch quadratic
//! in the difference frequency. The frequency-dependent prefactor
//! `√(ω_pω₁ω₂)` is frozen at band centre in every route.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beams::BeamTriple;
use crate::error::{Error, Result};
use crate::materials::{MaterialOptics, PhysicalConstants};
use crate::overlap::{
    a_plus_b_plus, aggregate_focal_parameter, overlap_simplified, OverlapParams, PhaseModel,
};
use crate::per_beam::PerBeam;
use crate::quadrature::{uniform_breaks, Estimate, GaussKronrod, Tolerance};

const MILLIWATT: f64 = 1e-3;

/// Normalised pump spectral amplitude `s(δω_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectralShape {
    /// `|s|²` is a normal density with RMS width equal to the bandwidth.
    #[default]
    Gaussian,
    /// `|s|²` is constant over a full width equal to the bandwidth.
    FlatTop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    /// W
    pub power: f64,
    /// m
    pub central_lambda: f64,
    pub shape: SpectralShape,
    /// rad/s
    pub bandwidth: f64,
    pub photons_per_pulse: Option<f64>,
}

impl PumpSpec {
    /// Widths beyond which a Gaussian pump spectrum is treated as zero.
    pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 6.0;

    pub fn new(
        power: f64,
        central_lambda: f64,
        shape: SpectralShape,
        bandwidth: f64,
    ) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!(
                "pump power must be positive, got {power:e} W"
            )));
        }
        if !(central_lambda > 0.0 && central_lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "pump wavelength must be positive, got {central_lambda:e} m"
            )));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Domain(format!(
                "pump bandwidth must be positive and finite, got {bandwidth:e} rad/s"
            )));
        }
        let pump = Self {
            power,
            central_lambda,
            shape,
            bandwidth,
            photons_per_pulse: None,
        };
        let norm = pump.normalization()?;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "pump spectrum integrates to {norm}, not 1"
            )));
        }
        Ok(pump)
    }

    pub fn with_photons_per_pulse(mut self, photons: f64) -> Result<Self> {
        if !(photons > 0.0 && photons.is_finite()) {
            return Err(Error::Domain(format!(
                "photons per pulse must be positive, got {photons:e}"
            )));
        }
        self.photons_per_pulse = Some(photons);
        Ok(self)
    }

    /// `|s(δω)|²`, 1/(rad/s).
    pub fn intensity(&self, delta_omega: f64) -> f64 {
        match self.shape {
            SpectralShape::Gaussian => {
                let s = self.bandwidth;
                (-0.5 * (delta_omega / s).powi(2)).exp() / ((2.0 * PI).sqrt() * s)
            }
            SpectralShape::FlatTop => {
                if delta_omega.abs() <= 0.5 * self.bandwidth {
                    1.0 / self.bandwidth
                } else {
                    0.0
                }
            }
        }
    }

    /// `s(δω)`, real and non-negative.
    pub fn amplitude(&self, delta_omega: f64) -> f64 {
        self.intensity(delta_omega).sqrt()
    }

    /// Interval outside which the spectrum is neglected.
    pub fn support(&self) -> (f64, f64) {
        let h = match self.shape {
            SpectralShape::Gaussian => Self::GAUSSIAN_SUPPORT_SIGMAS * self.bandwidth,
            SpectralShape::FlatTop => 0.5 * self.bandwidth,
        };
        (-h, h)
    }

    /// `∫ |s|² dω` by quadrature over ±10 widths.
    pub fn normalization(&self) -> Result<f64> {
        let h = 10.0 * self.bandwidth;
        let breaks = match self.shape {
            SpectralShape::Gaussian => uniform_breaks(-h, h, 20),
            SpectralShape::FlatTop => vec![-0.5 * self.bandwidth, 0.5 * self.bandwidth],
        };
        let est: Estimate<f64> = GaussKronrod::new(Tolerance::relative(1e-13))
            .integrate_with_breaks(|w| self.intensity(w), &breaks)?;
        Ok(est.value)
    }

    pub fn photon_number(&self) -> f64 {
        self.photons_per_pulse.unwrap_or(1.0)
    }

    /// Pump photons per second, `P/(ħω_p)`.
    pub fn photon_rate(&self, constants: &PhysicalConstants) -> f64 {
        self.power / (constants.hbar * constants.angular_frequency(self.central_lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ClosedForm,
    BruteForce,
    DegenerateNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub pairs_per_pump_photon: f64,
    /// 1/(s·mW)
    pub pairs_per_s_per_mw: f64,
    pub xi_agg: f64,
    pub a_plus_b_plus: f64,
    pub method: RateMethod,
    /// Relative quadrature error estimate.
    pub quadrature_error_estimate: Option<f64>,
    /// Estimated relative weight of the phase-matching tails outside the window.
    pub truncation_estimate: Option<f64>,
}

impl RateResult {
    pub fn pairs_per_second(&self, power: f64) -> f64 {
        self.pairs_per_s_per_mw * power / MILLIWATT
    }
}

/// Convert a pair probability per pump photon to pairs/s per mW of pump.
pub fn per_milliwatt(
    pairs_per_pump_photon: f64,
    pump_lambda: f64,
    constants: &PhysicalConstants,
) -> f64 {
    pairs_per_pump_photon * MILLIWATT / (constants.hbar * constants.angular_frequency(pump_lambda))
}

fn check_length(material: &MaterialOptics, beams: &BeamTriple) -> Result<()> {
    if ((beams.length - material.length) / material.length).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "beam triple was built for L = {:e} m but the crystal is {:e} m long",
            beams.length, material.length
        )));
    }
    Ok(())
}

fn group_index_mismatch(material: &MaterialOptics) -> Result<f64> {
    let d = (material.ng.signal - material.ng.idler).abs();
    if d == 0.0 {
        return Err(Error::DegenerateDispersion(material.ng.signal));
    }
    Ok(d)
}

/// Closed-form pair probability per pump photon,
/// `(64π³ħc/ε₀) n_g1n_g2n_gp/(n_p³n₁n₂|n_g1 − n_g2|) |χ|²/(λ₁²λ₂²) tan⁻¹(ξ)/(A₊B₊)`.
pub fn pairs_closed_form(
    material: &MaterialOptics,
    beams: &BeamTriple,
    constants: &PhysicalConstants,
) -> Result<RateResult> {
    check_length(material, beams)?;
    let dng = group_index_mismatch(material)?;
    let xi = beams.focal_parameters();
    if xi.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("focal parameters must be positive".into()));
    }
    let k = beams.wavenumbers();
    let xi_agg = aggregate_focal_parameter(k, xi)?;
    let ab = a_plus_b_plus(k, xi)?;
    let (n, ng) = (material.n, material.ng);
    let lam = beams.wavelengths();
    let chi = material.chi2_eff();
    let p = 64.0 * PI.powi(3) * constants.hbar * constants.c / constants.epsilon0 * ng.product()
        / (n.pump.powi(3) * n.signal * n.idler * dng)
        * chi
        * chi
        / (lam.signal * lam.signal * lam.idler * lam.idler)
        * xi_agg.atan()
        / ab;
    Ok(RateResult {
        pairs_per_pump_photon: p,
        pairs_per_s_per_mw: per_milliwatt(p, lam.pump, constants),
        xi_agg,
        a_plus_b_plus: ab,
        method: RateMethod::ClosedForm,
        quadrature_error_estimate: None,
        truncation_estimate: None,
    })
}

/// Settings for the nested-quadrature oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Relative tolerance of the outer (pump frequency) integral.
    pub quad_tol: f64,
    /// Half-width of the phase window `|φ| ≤ Φ` covered in the difference frequency.
    pub phase_half_width: f64,
    /// Residual mismatch at band centre.
    pub qpm_shift: f64,
    /// Evaluate inner quadrature nodes on the rayon pool.
    pub parallel: bool,
}

impl OracleOptions {
    pub const DEFAULT_PHASE_HALF_WIDTH: f64 = 400.0;

    pub fn new(quad_tol: f64) -> Self {
        Self {
            quad_tol,
            phase_half_width: Self::DEFAULT_PHASE_HALF_WIDTH,
            qpm_shift: 0.0,
            parallel: false,
        }
    }

    pub fn with_phase_half_width(mut self, width: f64) -> Self {
        self.phase_half_width = width;
        self
    }

    pub fn with_qpm_shift(mut self, shift: f64) -> Self {
        self.qpm_shift = shift;
        self
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must lie in (0, 1), got {}",
                self.quad_tol
            )));
        }
        if !(self.phase_half_width > 0.0 && self.phase_half_width.is_finite()) {
            return Err(Error::Domain(format!(
                "phase window must be positive, got {}",
                self.phase_half_width
            )));
        }
        if !self.qpm_shift.is_finite() {
            return Err(Error::Domain("qpm shift must be finite".into()));
        }
        Ok(())
    }
}

/// Pair probability by integrating `|ψ|²` over both frequencies, with the
/// first-order phase mismatch.
pub fn pairs_via_bruteforce(
    material: &MaterialOptics,
    beams: &BeamTriple,
    pump: &PumpSpec,
    constants: &PhysicalConstants,
    options: &OracleOptions,
) -> Result<RateResult> {
    group_index_mismatch(material)?;
    let model =
        PhaseModel::linear(material.ng, beams.length, constants.c).with_shift(options.qpm_shift);
    nested_pairs(
        material,
        beams,
        pump,
        constants,
        model,
        options,
        RateMethod::BruteForce,
    )
}

/// As [`pairs_via_bruteforce`] with `φ` carrying the term `κ₀δω₋²L/4`, for
/// configurations where the first-order mismatch vanishes.
pub fn pairs_degenerate_numeric(
    material: &MaterialOptics,
    beams: &BeamTriple,
    pump: &PumpSpec,
    gvd_kappa0: f64,
    constants: &PhysicalConstants,
    options: &OracleOptions,
) -> Result<RateResult> {
    if gvd_kappa0 == 0.0 || !gvd_kappa0.is_finite() {
        return Err(Error::Domain(format!(
            "kappa0 must be nonzero and finite, got {gvd_kappa0:e}"
        )));
    }
    let model = PhaseModel::linear(material.ng, beams.length, constants.c)
        .with_kappa0(gvd_kappa0)
        .with_shift(options.qpm_shift);
    nested_pairs(
        material,
        beams,
        pump,
        constants,
        model,
        options,
        RateMethod::DegenerateNumeric,
    )
}

/// Difference-frequency window and break points for the inner integral.
struct PhaseWindow {
    model: PhaseModel,
    lo: f64,
    hi: f64,
}

impl PhaseWindow {
    /// Quadratic and linear coefficients of `φ(δω₋)`.
    fn coefficients(&self) -> (f64, f64) {
        (
            0.25 * self.model.kappa0 * self.model.length,
            self.model.difference_coefficient * self.model.length,
        )
    }

    fn new(model: PhaseModel, half_width: f64) -> Result<Self> {
        let w = Self {
            model,
            lo: 0.0,
            hi: 0.0,
        };
        let (alpha, beta) = w.coefficients();
        let gamma = model.phi(0.0, 0.0);
        let (centre, h) = if alpha == 0.0 {
            if beta == 0.0 {
                return Err(Error::DegenerateDispersion(f64::NAN));
            }
            (-gamma / beta, half_width / beta.abs())
        } else {
            let uv = -beta / (2.0 * alpha);
            let phi_v = model.phi(0.0, uv);
            let extra = (-alpha.signum() * phi_v).max(0.0);
            (uv, ((half_width + extra) / alpha.abs()).sqrt())
        };
        Ok(Self {
            lo: centre - h,
            hi: centre + h,
            ..w
        })
    }

    /// Break points so that no panel spans more than 3π of phase.
    fn breaks(&self, delta_omega_pump: f64) -> Vec<f64> {
        let (alpha, beta) = self.coefficients();
        let phi = |u: f64| self.model.phi(delta_omega_pump, u);
        let step = 3.0 * PI;
        if alpha == 0.0 {
            let n = ((phi(self.hi) - phi(self.lo)).abs() / step).ceil().max(1.0) as usize;
            return uniform_breaks(self.lo, self.hi, n);
        }
        let uv = -beta / (2.0 * alpha);
        let phi_v = phi(uv);
        let mut pieces = vec![(self.lo, self.hi)];
        if uv > self.lo && uv < self.hi {
            pieces = vec![(self.lo, uv), (uv, self.hi)];
        }
        let mut out = vec![self.lo];
        for (a, b) in pieces {
            let side = if 0.5 * (a + b) >= uv { 1.0 } else { -1.0 };
            let (pa, pb) = (phi(a), phi(b));
            let n = ((pb - pa).abs() / step).ceil().max(1.0) as usize;
            for j in 1..n {
                let target = pa + (pb - pa) * j as f64 / n as f64;
                let u = uv + side * ((target - phi_v) / alpha).max(0.0).sqrt();
                out.push(u.clamp(a, b));
            }
            out.push(b);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Asymptotic `∫|I|²dδω₋` outside the window, given `|I|² ≈ K/φ²`.
    fn tail(&self, k_tail: f64, half_width: f64) -> f64 {
        let (alpha, beta) = self.coefficients();
        if alpha == 0.0 {
            2.0 * k_tail / (beta.abs() * half_width)
        } else {
            2.0 * k_tail / (3.0 * alpha.abs().sqrt() * half_width.powf(1.5))
        }
    }
}

fn nested_pairs(
    material: &MaterialOptics,
    beams: &BeamTriple,
    pump: &PumpSpec,
    constants: &PhysicalConstants,
    model: PhaseModel,
    options: &OracleOptions,
    method: RateMethod,
) -> Result<RateResult> {
    options.validate()?;
    check_length(material, beams)?;
    let params = OverlapParams::from_beams(beams, 0.0)?;
    let lam = beams.wavelengths();
    let (n, ng) = (material.n, material.ng);
    let chi = material.chi2_eff();
    let waists = beams.waists();

    let finish = |p: f64, err: Option<f64>, trunc: Option<f64>| RateResult {
        pairs_per_pump_photon: p,
        pairs_per_s_per_mw: per_milliwatt(p, lam.pump, constants),
        xi_agg: params.xi_agg,
        a_plus_b_plus: params.a_plus_b_plus,
        method,
        quadrature_error_estimate: err,
        truncation_estimate: trunc,
    };
    if chi == 0.0 {
        return Ok(finish(0.0, Some(0.0), Some(0.0)));
    }

    let pref2 = 2.0 * PI * PI * constants.hbar * pump.photon_number()
        / (constants.epsilon0 * lam.pump * lam.signal * lam.idler)
        * ng.product()
        / n.product().powi(2);

    let (plo, phi_) = pump.support();
    let margin = (model.pump_coefficient * model.length).abs() * plo.abs().max(phi_.abs());
    let window = PhaseWindow::new(model, options.phase_half_width + margin)?;

    let tol_inner = 0.25 * options.quad_tol;
    let tol_axial = (1e-2 * options.quad_tol).clamp(1e-12, 1e-6);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let worst_inner: Mutex<f64> = Mutex::new(0.0);
    let record = |e: Error| {
        let mut slot = failure.lock().unwrap();
        if slot.is_none() {
            *slot = Some(e);
        }
    };

    let overlap_sq = |phi: f64| -> f64 {
        match overlap_simplified(&params.with_phi(phi), chi, waists, tol_axial) {
            Ok(o) => o.value.norm_sqr(),
            Err(e) => {
                record(e);
                0.0
            }
        }
    };
    let inner_gk = GaussKronrod::new(Tolerance::relative(tol_inner)).parallel(options.parallel);
    let inner = |dwp: f64| -> f64 {
        let weight = pump.intensity(dwp);
        if weight == 0.0 {
            return 0.0;
        }
        let breaks = window.breaks(dwp);
        match inner_gk.integrate_with_breaks(|u| overlap_sq(model.phi(dwp, u)), &breaks) {
            Ok(est) => {
                if est.value > 0.0 {
                    let mut w = worst_inner.lock().unwrap();
                    *w = w.max(est.error / est.value);
                }
                weight * est.value
            }
            Err(e) => {
                record(e);
                0.0
            }
        }
    };

    let outer_breaks = match pump.shape {
        SpectralShape::Gaussian => uniform_breaks(plo, phi_, 4),
        SpectralShape::FlatTop => vec![plo, phi_],
    };
    let outer = GaussKronrod::new(Tolerance::relative(options.quad_tol))
        .integrate_with_breaks(inner, &outer_breaks);
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }
    let outer = outer?;
    let pairs = pref2 * 0.5 * outer.value;

    let rel_err = if outer.value > 0.0 {
        outer.error / outer.value + *worst_inner.lock().unwrap()
    } else {
        0.0
    };

    let den = |l: f64| {
        Complex64::new(
            1.0 - params.c_quad * params.xi_agg.powi(2) * l * l,
            params.xi_agg * l,
        )
    };
    let k_tail = 4.0 * ((1.0 / den(1.0)).norm_sqr() + (1.0 / den(-1.0)).norm_sqr());
    let amp2 = (chi * (2.0 / PI).sqrt() * waists.product() * params.d_norm).powi(2);
    let tail = amp2 * window.tail(k_tail, options.phase_half_width);
    let truncation = if outer.value > 0.0 {
        tail / outer.value
    } else {
        0.0
    };

    Ok(finish(pairs, Some(rel_err), Some(truncation)))
}

/// One point of the joint spectral amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsaSample {
    /// rad/s
    pub omega1: f64,
    /// rad/s
    pub omega2: f64,
    pub psi: Complex64,
}

/// `ψ = √(2π²ħN_p/(ε₀λ_p0λ_10λ_20)) √(n_g1n_g2n_gp/(n_p²n₁²n₂²)) s(ω₁+ω₂) 𝒪(ω₁, ω₂)`.
///
/// The central wavelengths are those of `beams`; `s` is evaluated at the
/// offset of `ω₁ + ω₂` from the pump centre frequency.
pub fn jsa_value(
    omega1: f64,
    omega2: f64,
    pump: &PumpSpec,
    material: &MaterialOptics,
    beams: &BeamTriple,
    overlap: impl Fn(f64, f64) -> Result<Complex64>,
    constants: &PhysicalConstants,
) -> Result<Complex64> {
    let s = pump.amplitude(omega1 + omega2 - constants.angular_frequency(pump.central_lambda));
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lam = beams.wavelengths();
    let pre = (2.0 * PI * PI * constants.hbar * pump.photon_number()
        / (constants.epsilon0 * lam.pump * lam.signal * lam.idler))
        .sqrt()
        * (material.ng.product() / material.n.product().powi(2)).sqrt();
    Ok(overlap(omega1, omega2)? * (pre * s))
}

/// Everything needed to evaluate `ψ(ω₁, ω₂)` for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct JsaModel<'a> {
    pub material: &'a MaterialOptics,
    pub beams: &'a BeamTriple,
    pub pump: &'a PumpSpec,
    pub constants: &'a PhysicalConstants,
    pub phase: PhaseModel,
    pub params: OverlapParams,
    pub quad_tol: f64,
}

impl<'a> JsaModel<'a> {
    pub fn new(
        material: &'a MaterialOptics,
        beams: &'a BeamTriple,
        pump: &'a PumpSpec,
        constants: &'a PhysicalConstants,
        phase: PhaseModel,
        quad_tol: f64,
    ) -> Result<Self> {
        check_length(material, beams)?;
        Ok(Self {
            material,
            beams,
            pump,
            constants,
            phase,
            params: OverlapParams::from_beams(beams, 0.0)?,
            quad_tol,
        })
    }

    /// Band-centre angular frequencies of signal and idler.
    pub fn centre(&self) -> (f64, f64) {
        let lam = self.beams.wavelengths();
        (
            self.constants.angular_frequency(lam.signal),
            self.constants.angular_frequency(lam.idler),
        )
    }

    pub fn overlap(&self, omega1: f64, omega2: f64) -> Result<Complex64> {
        let (c1, c2) = self.centre();
        let (d1, d2) = (omega1 - c1, omega2 - c2);
        let phi = self.phase.phi(d1 + d2, d1 - d2);
        Ok(overlap_simplified(
            &self.params.with_phi(phi),
            self.material.chi2_eff(),
            self.beams.waists(),
            self.quad_tol,
        )?
        .value)
    }

    pub fn value(&self, omega1: f64, omega2: f64) -> Result<Complex64> {
        jsa_value(
            omega1,
            omega2,
            self.pump,
            self.material,
            self.beams,
            |a, b| self.overlap(a, b),
            self.constants,
        )
    }

    /// Samples on a grid of pump and difference offsets `(δω_p, δω₋)`.
    pub fn sample_grid(
        &self,
        pump_offsets: &[f64],
        difference_offsets: &[f64],
    ) -> Result<Vec<JsaSample>> {
        let (c1, c2) = self.centre();
        let mut out = Vec::with_capacity(pump_offsets.len() * difference_offsets.len());
        for &p in pump_offsets {
            for &m in difference_offsets {
                let (w1, w2) = (c1 + 0.5 * (p + m), c2 + 0.5 * (p - m));
                out.push(JsaSample {
                    omega1: w1,
                    omega2: w2,
                    psi: self.value(w1, w2)?,
                });
            }
        }
        Ok(out)
    }

    /// Trapezoid-rule `∫∫|ψ|² dω₁dω₂` over a rectangle in `(δω_p, δω₋)`.
    pub fn grid_pairs(
        &self,
        pump_range: (f64, f64, usize),
        difference_range: (f64, f64, usize),
    ) -> Result<f64> {
        let axis = |(lo, hi, n): (f64, f64, usize)| -> Result<Vec<f64>> {
            if n < 2 || !(hi > lo) {
                return Err(Error::Domain(
                    "grid needs at least two points on a non-empty range".into(),
                ));
            }
            Ok((0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect())
        };
        let (p, m) = (axis(pump_range)?, axis(difference_range)?);
        let weights = |v: &[f64]| -> Vec<f64> {
            let h = v[1] - v[0];
            (0..v.len())
                .map(|i| {
                    if i == 0 || i == v.len() - 1 {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .collect()
        };
        let (wp, wm) = (weights(&p), weights(&m));
        let samples = self.sample_grid(&p, &m)?;
        let mut total = 0.0;
        for (i, row) in samples.chunks(m.len()).enumerate() {
            for (j, s) in row.iter().enumerate() {
                total += wp[i] * wm[j] * s.psi.norm_sqr();
            }
        }
        Ok(0.5 * total)
    }
}

/// Ratio of the rate here to Bennink's, `(1/ε) n_g1n_g2n_gp/(n₁²n₂²n_p²)`.
pub fn bennink_ratio(n: PerBeam<f64>, ng: PerBeam<f64>, epsilon_qpm: f64) -> Result<f64> {
    if !(epsilon_qpm > 0.0) {
        return Err(Error::Domain(format!(
            "efficiency factor must be positive, got {epsilon_qpm}"
        )));
    }
    Ok(ng.product() / (n.product().powi(2) * epsilon_qpm))
}

/// `R_revised/R_SM = n₁n₂n_gp/n_p³`.
pub fn tutorial_correction_factor(n: PerBeam<f64>, ng_pump: f64) -> f64 {
    n.signal * n.idler * ng_pump / n.pump.powi(3)
}

pub fn apply_table_correction(rate_previous: f64, factor: f64) -> Result<f64> {
    if !(factor > 0.0) {
        return Err(Error::Domain(format!(
            "correction factor must be positive, got {factor}"
        )));
    }
    Ok(rate_previous * factor)
}

/// Collimated-limit rates at 1 mW, in 1/(s·mW).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollimatedRates {
    /// Earlier single-mode formula.
    pub sm: f64,
    pub revised: f64,
}

/// Collimated-limit rates for a pump of RMS intensity radius `σ_p`
/// (`w_p = 2σ_p`) through the whole crystal length.
pub fn collimated_limit_rates(
    material: &MaterialOptics,
    pump_lambda: f64,
    sigma_p: f64,
    constants: &PhysicalConstants,
) -> Result<CollimatedRates> {
    if !(sigma_p > 0.0) {
        return Err(Error::Domain(format!(
            "pump width must be positive, got {sigma_p:e} m"
        )));
    }
    let dng = group_index_mismatch(material)?;
    let (n, ng) = (material.n, material.ng);
    let omega = constants.angular_frequency(pump_lambda);
    let common = 1.0 / (16.0 * PI * constants.epsilon0 * constants.c * constants.c)
        * material.d_eff.powi(2)
        * omega
        * omega
        / dng
        * MILLIWATT
        / (sigma_p * sigma_p)
        * material.length;
    Ok(CollimatedRates {
        sm: common * ng.signal * ng.idler / (n.signal.powi(2) * n.idler.powi(2) * n.pump),
        revised: common * ng.product() / (n.signal * n.idler * n.pump.powi(4)),
    })
}

/// Which focal parameters vary during a focus scan or optimisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FocusFamily {
    /// `ξ₁ = ξ₂ = ξ`, pump fixed.
    #[default]
    Collection,
    /// `ξ_p = ξ`, collection modes fixed.
    Pump,
    /// `ξ₁ = ξ₂ = ξ_p = ξ`.
    Joint,
}

impl FocusFamily {
    pub fn apply(self, base: PerBeam<f64>, xi: f64) -> PerBeam<f64> {
        match self {
            Self::Collection => PerBeam::new(base.pump, xi, xi),
            Self::Pump => PerBeam::new(xi, base.signal, base.idler),
            Self::Joint => PerBeam::splat(xi),
        }
    }
}

/// Beams of `base` refocused to `ξ` within `family`.
pub fn beams_for_focus(
    material: &MaterialOptics,
    base: &BeamTriple,
    family: FocusFamily,
    xi: f64,
) -> Result<BeamTriple> {
    BeamTriple::from_focal_parameters(
        material,
        base.wavelengths(),
        family.apply(base.focal_parameters(), xi),
    )
}

#[derive(Debug, Clone, Copy)]
pub struct FocusResult {
    pub xi_opt: f64,
    pub rate: RateResult,
    pub beams: BeamTriple,
    /// The maximum sits at an end of the search range.
    pub at_boundary: bool,
    /// The coarse scan was not unimodal and a dense scan was used.
    pub fell_back_to_scan: bool,
    pub evaluations: usize,
}

const COARSE_POINTS: usize = 33;
const DENSE_POINTS: usize = 1000;
const BRACKET_TOL: f64 = 1e-5;

/// Maximise the closed-form rate over `ξ ∈ [lo, hi]` within `family`.
///
/// A coarse logarithmic scan brackets the maximum, then golden-section search
/// in `ln ξ` narrows it to a relative bracket below 1e−5. If any interior scan
/// point lies below both neighbours, a dense 1000-point scan replaces the
/// coarse one.
pub fn focus_optimize(
    material: &MaterialOptics,
    base: &BeamTriple,
    constants: &PhysicalConstants,
    xi_range: (f64, f64),
    family: FocusFamily,
) -> Result<FocusResult> {
    let (lo, hi) = xi_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "focal parameter range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut evaluations = 0usize;
    let mut objective = |t: f64| -> Result<f64> {
        evaluations += 1;
        Ok(pairs_closed_form(
            material,
            &beams_for_focus(material, base, family, t.exp())?,
            constants,
        )?
        .pairs_per_pump_photon)
    };
    let (tlo, thi) = (lo.ln(), hi.ln());
    let grid = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| tlo + (thi - tlo) * i as f64 / (n - 1) as f64)
            .collect()
    };

    let mut ts = grid(COARSE_POINTS);
    let mut fs = ts
        .iter()
        .map(|&t| objective(t))
        .collect::<Result<Vec<_>>>()?;
    let dip = |fs: &[f64]| fs.windows(3).any(|w| w[1] < w[0] && w[1] < w[2]);
    let fell_back = dip(&fs);
    if fell_back {
        ts = grid(DENSE_POINTS);
        fs = ts
            .iter()
            .map(|&t| objective(t))
            .collect::<Result<Vec<_>>>()?;
    }
    let best = fs
        .iter()
        .enumerate()
        .fold(0, |b, (i, &f)| if f > fs[b] { i } else { b });
    let (mut a, mut b) = (ts[best.saturating_sub(1)], ts[(best + 1).min(ts.len() - 1)]);

    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > BRACKET_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d)?;
        }
    }
    let mut t_opt = 0.5 * (a + b);
    let mut f_opt = objective(t_opt)?;
    for (t, f) in [(ts[best], fs[best]), (c, fc), (d, fd)] {
        if f > f_opt {
            t_opt = t;
            f_opt = f;
        }
    }
    let xi_opt = t_opt.exp();
    let beams = beams_for_focus(material, base, family, xi_opt)?;
    let rate = pairs_closed_form(material, &beams, constants)?;
    let at_boundary = t_opt - tlo < 2.0 * BRACKET_TOL || thi - t_opt < 2.0 * BRACKET_TOL;
    Ok(FocusResult {
        xi_opt,
        rate,
        beams,
        at_boundary,
        fell_back_to_scan: fell_back,
        evaluations: evaluations + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Collinear type-II configuration with `k_p = k₁ + k₂` exactly.
    fn type2() -> (MaterialOptics, PerBeam<f64>) {
        let n = PerBeam::new(1.80, 1.82, 1.78);
        let ng = PerBeam::new(1.90, 1.85, 1.78);
        (
            MaterialOptics::new(n, ng, 2.4e-12, 10e-3).unwrap(),
            PerBeam::new(775e-9, 1550e-9, 1550e-9),
        )
    }

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn pump_spectra_are_normalised() {
        for shape in [SpectralShape::Gaussian, SpectralShape::FlatTop] {
            let p = PumpSpec::new(1e-3, 775e-9, shape, 2e9).unwrap();
            assert!((p.normalization().unwrap() - 1.0).abs() < 1e-9);
            assert!((p.amplitude(0.0).powi(2) / p.intensity(0.0) - 1.0).abs() < 1e-15);
        }
        let flat = PumpSpec::new(1e-3, 775e-9, SpectralShape::FlatTop, 2e9).unwrap();
        assert_eq!(flat.intensity(1.5e9), 0.0);
    }

    #[test]
    fn pump_rejects_bad_input() {
        assert!(PumpSpec::new(0.0, 775e-9, SpectralShape::Gaussian, 1e9).is_err());
        assert!(PumpSpec::new(1e-3, 775e-9, SpectralShape::Gaussian, 0.0).is_err());
        assert!(PumpSpec::new(1e-3, -1.0, SpectralShape::Gaussian, 1e9).is_err());
    }

    #[test]
    fn milliwatt_conversion() {
        let c = consts();
        let lam = 775e-9;
        let v = per_milliwatt(1.0, lam, &c);
        assert!((v * c.hbar * c.angular_frequency(lam) - 1e-3).abs() < 1e-18);
        let (m, l) = type2();
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        let r = pairs_closed_form(&m, &beams, &c).unwrap();
        assert!(
            (r.pairs_per_s_per_mw - r.pairs_per_pump_photon * v).abs()
                <= 1e-15 * r.pairs_per_s_per_mw
        );
        assert!((r.pairs_per_second(5e-3) / r.pairs_per_s_per_mw - 5.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_zero_nonlinearity() {
        let (mut m, l) = type2();
        m.d_eff = 0.0;
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        assert_eq!(
            pairs_closed_form(&m, &beams, &consts())
                .unwrap()
                .pairs_per_pump_photon,
            0.0
        );
    }

    #[test]
    fn closed_form_scales_with_d_eff_squared() {
        let (m, l) = type2();
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(0.7)).unwrap();
        let a = pairs_closed_form(&m, &beams, &consts())
            .unwrap()
            .pairs_per_pump_photon;
        let m3 = MaterialOptics {
            d_eff: 3.0 * m.d_eff,
            ..m
        };
        let b = pairs_closed_form(&m3, &beams, &consts())
            .unwrap()
            .pairs_per_pump_photon;
        assert!((b / a - 9.0).abs() < 1e-13);
    }

    #[test]
    fn closed_form_refuses_equal_group_indices() {
        let (mut m, l) = type2();
        m.ng.idler = m.ng.signal;
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        let err = pairs_closed_form(&m, &beams, &consts()).unwrap_err();
        assert!(matches!(err, Error::DegenerateDispersion(_)));
        assert!(err.to_string().contains("degenerate"));
    }

    #[test]
    fn closed_form_checks_length() {
        let (m, l) = type2();
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0))
            .unwrap()
            .with_length(2e-2)
            .unwrap();
        assert!(pairs_closed_form(&m, &beams, &consts()).is_err());
    }

    #[test]
    fn bennink_ratio_values() {
        assert_eq!(
            bennink_ratio(PerBeam::splat(1.0), PerBeam::splat(1.0), 1.0).unwrap(),
            1.0
        );
        let r = bennink_ratio(PerBeam::splat(2.2), PerBeam::splat(2.2), 1.0).unwrap();
        assert!((r - 2.2f64.powi(-3)).abs() < 1e-15);
        let h = bennink_ratio(PerBeam::splat(2.2), PerBeam::splat(2.2), 0.5).unwrap();
        assert!((h / r - 2.0).abs() < 1e-15);
        assert!(bennink_ratio(PerBeam::splat(2.2), PerBeam::splat(2.2), 0.0).is_err());
    }

    #[test]
    fn table_correction_arithmetic() {
        assert_eq!(tutorial_correction_factor(PerBeam::splat(1.7), 1.7), 1.0);
        assert!((apply_table_correction(53.87, 1.09166).unwrap() / 58.81 - 1.0).abs() < 5e-4);
        assert!((apply_table_correction(23.58, 1.02996).unwrap() / 24.29 - 1.0).abs() < 5e-4);
        assert!(apply_table_correction(1.0, 0.0).is_err());
    }

    #[test]
    fn collimated_scaling() {
        let (m, l) = type2();
        let c = consts();
        let a = collimated_limit_rates(&m, l.pump, 50e-6, &c).unwrap();
        let b = collimated_limit_rates(&m, l.pump, 100e-6, &c).unwrap();
        assert!((a.sm / b.sm - 4.0).abs() < 1e-13);
        let m2 = MaterialOptics {
            length: 2.0 * m.length,
            ..m
        };
        let d = collimated_limit_rates(&m2, l.pump, 50e-6, &c).unwrap();
        assert!((d.revised / a.revised - 2.0).abs() < 1e-13);
        let mut degenerate = m;
        degenerate.ng.idler = degenerate.ng.signal;
        assert!(collimated_limit_rates(&degenerate, l.pump, 50e-6, &c).is_err());
    }

    #[test]
    fn phase_window_breaks_cover_window() {
        let (m, _) = type2();
        let c = consts();
        for kappa in [0.0, 1e-25, -1e-25] {
            let model = PhaseModel::linear(m.ng, m.length, c.c).with_kappa0(kappa);
            let w = PhaseWindow::new(model, 100.0).unwrap();
            let br = w.breaks(0.0);
            assert_eq!(br[0], w.lo);
            assert_eq!(*br.last().unwrap(), w.hi);
            for pair in br.windows(2) {
                assert!(pair[1] >= pair[0]);
                let dphi = (model.phi(0.0, pair[1]) - model.phi(0.0, pair[0])).abs();
                assert!(dphi <= 3.0 * PI * (1.0 + 1e-9) + 1e-9, "{dphi}");
            }
        }
    }

    #[test]
    fn nested_oracle_zero_nonlinearity() {
        let (mut m, l) = type2();
        m.d_eff = 0.0;
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        let pump = PumpSpec::new(1e-3, l.pump, SpectralShape::Gaussian, 1e8).unwrap();
        let opts = OracleOptions::new(1e-3);
        assert_eq!(
            pairs_via_bruteforce(&m, &beams, &pump, &consts(), &opts)
                .unwrap()
                .pairs_per_pump_photon,
            0.0
        );
        assert_eq!(
            pairs_degenerate_numeric(&m, &beams, &pump, 1e-25, &consts(), &opts)
                .unwrap()
                .pairs_per_pump_photon,
            0.0
        );
        assert!(pairs_degenerate_numeric(&m, &beams, &pump, 0.0, &consts(), &opts).is_err());
    }

    #[test]
    fn focus_family_application() {
        let base = PerBeam::new(0.3, 0.4, 0.5);
        assert_eq!(
            FocusFamily::Collection.apply(base, 2.0),
            PerBeam::new(0.3, 2.0, 2.0)
        );
        assert_eq!(
            FocusFamily::Pump.apply(base, 2.0),
            PerBeam::new(2.0, 0.4, 0.5)
        );
        assert_eq!(FocusFamily::Joint.apply(base, 2.0), PerBeam::splat(2.0));
    }

    #[test]
    fn focus_optimize_rejects_bad_range() {
        let (m, l) = type2();
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        for r in [(0.0, 1.0), (2.0, 1.0), (1.0, 1.0), (-1.0, 2.0)] {
            assert!(focus_optimize(&m, &beams, &consts(), r, FocusFamily::Collection).is_err());
        }
    }

    #[test]
    fn joint_family_maximum_is_at_the_upper_end() {
        let (m, l) = type2();
        let beams = BeamTriple::from_focal_parameters(&m, l, PerBeam::splat(1.0)).unwrap();
        let r = focus_optimize(&m, &beams, &consts(), (0.01, 10.0), FocusFamily::Joint).unwrap();
        assert!(r.at_boundary);
        assert!((r.xi_opt / 10.0 - 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn closed_form_signal_idler_symmetry(
            n1 in 1.5f64..2.3, n2 in 1.5f64..2.3, np in 1.5f64..2.3,
            g1 in 1.6f64..2.4, g2 in 1.6f64..2.4, gp in 1.6f64..2.4,
            w1 in 10e-6f64..100e-6, w2 in 10e-6f64..100e-6, wp in 10e-6f64..100e-6,
        ) {
            prop_assume!((g1 - g2).abs() > 1e-3);
            let m = MaterialOptics::new(PerBeam::new(np, n1, n2), PerBeam::new(gp, g1, g2), 3e-12, 5e-3).unwrap();
            let lam = PerBeam::new(532e-9, 900e-9, 1300.5e-9);
            let b = BeamTriple::from_waists(&m, lam, PerBeam::new(wp, w1, w2)).unwrap();
            let a = pairs_closed_form(&m, &b, &consts()).unwrap().pairs_per_pump_photon;
            let s = pairs_closed_form(&m.swap_signal_idler(), &b.swap_signal_idler(), &consts()).unwrap().pairs_per_pump_photon;
            prop_assert!(a >= 0.0);
            prop_assert!((a - s).abs() <= 1e-13 * a);
        }

        #[test]
        fn collimated_ratio_is_tutorial_factor(
            n1 in 1.0f64..3.0, n2 in 1.0f64..3.0, np in 1.0f64..3.0,
            g1 in 1.0f64..3.0, g2 in 1.0f64..3.0, gp in 1.0f64..3.0,
        ) {
            prop_assume!((g1 - g2).abs() > 1e-6);
            let n = PerBeam::new(np, n1, n2);
            let m = MaterialOptics::new(n, PerBeam::new(gp, g1, g2), 1e-12, 1e-2).unwrap();
            let r = collimated_limit_rates(&m, 405e-9, 30e-6, &consts()).unwrap();
            let f = tutorial_correction_factor(n, gp);
            prop_assert!((r.revised / r.sm - f).abs() <= 1e-12 * f);
        }
    }
}
