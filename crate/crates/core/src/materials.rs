//! Material optics: dispersion models, wavenumbers, second-order
//! susceptibilities and the poling sign pattern.
//!
//! Dispersion data is never hard-coded; it is loaded from small JSON files
//! holding Sellmeier coefficients. Wavelengths are in metres everywhere in the
//! public API. Sellmeier coefficients follow the usual published convention of
//! wavelengths in micrometres (so pole positions are in µm²).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Bound, Error, Result};
use crate::per_beam::PerBeam;

/// SI values of the constants that appear in the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permittivity, F/m.
    pub epsilon0: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
}

impl PhysicalConstants {
    /// CODATA 2018.
    pub const CODATA: Self = Self {
        epsilon0: 8.854_187_812_8e-12,
        hbar: 1.054_571_817e-34,
        c: 299_792_458.0,
    };

    /// Angular frequency of light with vacuum wavelength `lambda`.
    pub fn angular_frequency(&self, lambda: f64) -> f64 {
        2.0 * PI * self.c / lambda
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Functional form of a Sellmeier fit (λ in µm).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellmeierForm {
    /// `n = A`.
    Constant,
    /// `n² = A + Σ Bᵢ λ² / (λ² − Cᵢ)`, coefficients `[A, B₁, C₁, B₂, C₂, …]`.
    Sellmeier,
    /// `n² = A + B₁/(λ² − C₁) + B₂/(λ² − C₂)`, coefficients `[A, B₁, C₁, B₂, C₂]`.
    TwoPole,
    /// `n² = A + B/(λ² − C) − D λ²`, coefficients `[A, B, C, D]`.
    Extended,
}

impl SellmeierForm {
    fn check_len(self, len: usize) -> std::result::Result<(), String> {
        let ok = match self {
            SellmeierForm::Constant => len == 1,
            SellmeierForm::Sellmeier => len >= 1 && len % 2 == 1,
            SellmeierForm::TwoPole => len == 5,
            SellmeierForm::Extended => len == 4,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{len} coefficients do not fit the {self:?} form"))
        }
    }
}

/// Refractive-index model for one crystal axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionModel {
    pub name: String,
    pub form: SellmeierForm,
    pub coefficients: Vec<f64>,
    #[serde(rename = "valid_range_m")]
    pub valid_range: (f64, f64),
    pub axis: String,
    /// Free-text provenance of the coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl DispersionModel {
    pub fn new(
        name: impl Into<String>,
        axis: impl Into<String>,
        form: SellmeierForm,
        coefficients: Vec<f64>,
        valid_range: (f64, f64),
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            form,
            coefficients,
            valid_range,
            axis: axis.into(),
            reference: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Dispersionless medium with a fixed index.
    pub fn constant(name: impl Into<String>, n: f64, valid_range: (f64, f64)) -> Result<Self> {
        Self::new(name, "any", SellmeierForm::Constant, vec![n], valid_range)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn invalid(&self, why: impl std::fmt::Display) -> Error {
        Error::InvalidModel(format!("`{}`: {why}", self.name))
    }

    fn validate(&self) -> Result<()> {
        self.form
            .check_len(self.coefficients.len())
            .map_err(|e| self.invalid(e))?;
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(self.invalid("non-finite coefficient"));
        }
        let (lo, hi) = self.valid_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(self.invalid(format!("bad valid range [{lo:e}, {hi:e}] m")));
        }
        let (lo2, hi2) = ((lo * 1e6).powi(2), (hi * 1e6).powi(2));
        for pole in self.poles() {
            if pole >= lo2 && pole <= hi2 {
                return Err(self.invalid(format!("pole at λ² = {pole} µm² inside the valid range")));
            }
        }
        const SAMPLES: usize = 256;
        for i in 0..=SAMPLES {
            let lambda = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            let n2 = self.n_squared(lambda * 1e6).0;
            if !(n2.is_finite() && n2 >= 1.0) {
                return Err(self.invalid(format!("n² = {n2} < 1 at λ = {lambda:e} m")));
            }
        }
        Ok(())
    }

    fn poles(&self) -> Vec<f64> {
        let c = &self.coefficients;
        match self.form {
            SellmeierForm::Constant => vec![],
            SellmeierForm::Sellmeier | SellmeierForm::TwoPole => {
                c[1..].chunks(2).map(|p| p[1]).collect()
            }
            SellmeierForm::Extended => vec![c[2]],
        }
    }

    /// `(n², d(n²)/dλ)` with λ in µm.
    fn n_squared(&self, l: f64) -> (f64, f64) {
        let c = &self.coefficients;
        let l2 = l * l;
        match self.form {
            SellmeierForm::Constant => (c[0] * c[0], 0.0),
            SellmeierForm::Sellmeier => c[1..].chunks(2).fold((c[0], 0.0), |(v, d), p| {
                let den = l2 - p[1];
                (v + p[0] * l2 / den, d - 2.0 * p[0] * p[1] * l / (den * den))
            }),
            SellmeierForm::TwoPole => c[1..].chunks(2).fold((c[0], 0.0), |(v, d), p| {
                let den = l2 - p[1];
                (v + p[0] / den, d - 2.0 * p[0] * l / (den * den))
            }),
            SellmeierForm::Extended => {
                let den = l2 - c[2];
                (
                    c[0] + c[1] / den - c[3] * l2,
                    -2.0 * c[1] * l / (den * den) - 2.0 * c[3] * l,
                )
            }
        }
    }

    fn check_range(&self, lambda: f64, strict: bool) -> Result<()> {
        let (lo, hi) = self.valid_range;
        let below = if strict { lambda <= lo } else { lambda < lo };
        let above = if strict { lambda >= hi } else { lambda > hi };
        if below || above || lambda.is_nan() {
            return Err(Error::OutOfRange {
                model: self.name.clone(),
                lambda,
                min: lo,
                max: hi,
                bound: if above { Bound::Upper } else { Bound::Lower },
            });
        }
        Ok(())
    }

    pub fn refractive_index(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda, false)?;
        if self.form == SellmeierForm::Constant {
            return Ok(self.coefficients[0]);
        }
        Ok(self.n_squared(lambda * 1e6).0.sqrt())
    }

    /// `n_g = n − λ dn/dλ`, from the analytic derivative of the fit.
    pub fn group_index(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda, true)?;
        if self.form == SellmeierForm::Constant {
            return Ok(self.coefficients[0]);
        }
        let l = lambda * 1e6;
        let (n2, dn2) = self.n_squared(l);
        let n = n2.sqrt();
        Ok(n - l * dn2 / (2.0 * n))
    }
}

pub fn refractive_index(model: &DispersionModel, lambda: f64) -> Result<f64> {
    model.refractive_index(lambda)
}

pub fn group_index(model: &DispersionModel, lambda: f64) -> Result<f64> {
    model.group_index(lambda)
}

/// `k = 2πn/λ` in rad/m.
pub fn wavenumber(n: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {lambda:e} m"
        )));
    }
    if !(n >= 1.0) {
        return Err(Error::Domain(format!(
            "refractive index must be >= 1, got {n}"
        )));
    }
    Ok(2.0 * PI * n / lambda)
}

/// Effective inverse second-order susceptibility,
/// `ζ = −χ / (ε₀² n_p² n₁² n₂²)`.
pub fn inverse_chi2(chi2_eff: f64, n: PerBeam<f64>, constants: &PhysicalConstants) -> Result<f64> {
    if n.iter().any(|&v| !(v >= 1.0)) {
        return Err(Error::Domain(format!(
            "refractive indices must be >= 1, got {n:?}"
        )));
    }
    let e0 = constants.epsilon0;
    Ok(-chi2_eff / (e0 * e0 * n.product().powi(2)))
}

fn check_poling(period: Option<f64>, length: f64) -> Result<()> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!(
            "crystal length must be positive, got {length:e} m"
        )));
    }
    if let Some(p) = period {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!(
                "poling period must be positive, got {p:e} m"
            )));
        }
    }
    Ok(())
}

/// Sign of the nonlinearity at `z` (crystal centred on `z = 0`).
///
/// Zero outside the crystal, +1 inside an unpoled crystal. With poling the
/// first domain, starting at `z = −L/2`, is +1 and domains alternate every half
/// period.
pub fn poling_profile(z: f64, poling_period: Option<f64>, length: f64) -> Result<i8> {
    check_poling(poling_period, length)?;
    let half = 0.5 * length;
    if z.abs() > half {
        return Ok(0);
    }
    let Some(period) = poling_period else {
        return Ok(1);
    };
    let domain = ((z + half) / (0.5 * period)).floor() as i64;
    Ok(if domain % 2 == 0 { 1 } else { -1 })
}

/// Positions of the interior domain walls of a poled crystal, ascending.
pub fn domain_walls(poling_period: f64, length: f64) -> Result<Vec<f64>> {
    check_poling(Some(poling_period), length)?;
    let half = 0.5 * length;
    let step = 0.5 * poling_period;
    let count = (length / step).floor() as usize;
    Ok((1..=count)
        .map(|m| -half + m as f64 * step)
        .filter(|&z| z < half)
        .collect())
}

/// Refractive data for one crystal at the pump, signal and idler wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialOptics {
    /// Phase indices.
    pub n: PerBeam<f64>,
    /// Group indices.
    pub ng: PerBeam<f64>,
    /// Effective nonlinear coefficient, m/V.
    pub d_eff: f64,
    pub poling_period: Option<f64>,
    /// Crystal length along the propagation axis, m.
    pub length: f64,
    /// Transverse crystal dimensions, m. Informational only.
    pub transverse: Option<(f64, f64)>,
}

impl MaterialOptics {
    pub fn new(n: PerBeam<f64>, ng: PerBeam<f64>, d_eff: f64, length: f64) -> Result<Self> {
        let m = Self {
            n,
            ng,
            d_eff,
            poling_period: None,
            length,
            transverse: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Evaluate indices from dispersion models at the three wavelengths.
    pub fn from_dispersion(
        models: PerBeam<&DispersionModel>,
        lambdas: PerBeam<f64>,
        d_eff: f64,
        length: f64,
    ) -> Result<Self> {
        let pairs = models.zip(lambdas);
        let n = PerBeam::new(
            pairs.pump.0.refractive_index(pairs.pump.1)?,
            pairs.signal.0.refractive_index(pairs.signal.1)?,
            pairs.idler.0.refractive_index(pairs.idler.1)?,
        );
        let ng = PerBeam::new(
            pairs.pump.0.group_index(pairs.pump.1)?,
            pairs.signal.0.group_index(pairs.signal.1)?,
            pairs.idler.0.group_index(pairs.idler.1)?,
        );
        Self::new(n, ng, d_eff, length)
    }

    pub fn with_poling(mut self, period: Option<f64>) -> Result<Self> {
        self.poling_period = period;
        self.validate()?;
        Ok(self)
    }

    /// `χ_eff = 2 d_eff`.
    pub fn chi2_eff(&self) -> f64 {
        2.0 * self.d_eff
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .n
            .iter()
            .chain(self.ng.iter())
            .any(|&v| !(v >= 1.0 && v.is_finite()))
        {
            return Err(Error::Domain(format!(
                "indices must be finite and >= 1 (n = {:?}, n_g = {:?})",
                self.n, self.ng
            )));
        }
        // Zero is allowed so that a vanishing nonlinearity gives a zero rate.
        if !(self.d_eff >= 0.0 && self.d_eff.is_finite()) {
            return Err(Error::Domain(format!(
                "d_eff must be >= 0, got {:e}",
                self.d_eff
            )));
        }
        check_poling(self.poling_period, self.length)
    }

    /// Same crystal with signal and idler labels exchanged.
    pub fn swap_signal_idler(self) -> Self {
        Self {
            n: self.n.swap_signal_idler(),
            ng: self.ng.swap_signal_idler(),
            ..self
        }
    }
}
