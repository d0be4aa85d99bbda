//! Fundamental Gaussian modes and their focal parameters.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::materials::{wavenumber, MaterialOptics};
use crate::per_beam::PerBeam;

/// A TEM₀₀ mode inside a medium of index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    /// Vacuum wavelength, m.
    pub lambda_vac: f64,
    /// Phase index of the medium at `lambda_vac`.
    pub n: f64,
    /// 1/e² intensity radius at the focus, m.
    pub waist: f64,
    /// Axial position of the focus relative to the crystal centre, m.
    pub focus: f64,
}

impl GaussianMode {
    pub fn new(lambda_vac: f64, n: f64, waist: f64) -> Result<Self> {
        Self::with_focus(lambda_vac, n, waist, 0.0)
    }

    pub fn with_focus(lambda_vac: f64, n: f64, waist: f64, focus: f64) -> Result<Self> {
        if !(lambda_vac > 0.0 && lambda_vac.is_finite()) {
            return Err(Error::Domain(format!(
                "wavelength must be positive, got {lambda_vac:e} m"
            )));
        }
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::Domain(format!(
                "waist must be positive, got {waist:e} m"
            )));
        }
        if !(n >= 1.0 && n.is_finite()) {
            return Err(Error::Domain(format!(
                "refractive index must be >= 1, got {n}"
            )));
        }
        if !focus.is_finite() {
            return Err(Error::Domain("focus position must be finite".into()));
        }
        Ok(Self {
            lambda_vac,
            n,
            waist,
            focus,
        })
    }

    /// Mode whose focal parameter over `length` equals `xi`.
    pub fn from_focal_parameter(lambda_vac: f64, n: f64, xi: f64, length: f64) -> Result<Self> {
        if !(xi > 0.0 && length > 0.0) {
            return Err(Error::Domain(format!(
                "focal parameter and length must be positive (xi = {xi}, L = {length:e})"
            )));
        }
        let k = wavenumber(n, lambda_vac)?;
        Self::new(lambda_vac, n, (length / (k * xi)).sqrt())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.n / self.lambda_vac
    }

    /// `z_R = k w₀²/2`.
    pub fn rayleigh_range(&self) -> f64 {
        0.5 * self.wavenumber() * self.waist * self.waist
    }

    /// `q = (z − z₀) + i z_R`.
    pub fn beam_parameter(&self, z: f64) -> Complex64 {
        Complex64::new(z - self.focus, self.rayleigh_range())
    }

    /// `q̄ = (2i/k) q = −w₀² + (2i/k)(z − z₀)`.
    pub fn scaled_beam_parameter(&self, z: f64) -> Complex64 {
        Complex64::new(
            -self.waist * self.waist,
            2.0 * (z - self.focus) / self.wavenumber(),
        )
    }

    /// 1/e² intensity radius at `z`.
    pub fn radius(&self, z: f64) -> f64 {
        let u = (z - self.focus) / self.rayleigh_range();
        self.waist * (1.0 + u * u).sqrt()
    }

    /// `g(x, y; z) = √(k z_R/π) (1/q) exp(−i k (x² + y²) / 2q)`, normalised so
    /// that `∬ |g|² dx dy = 1` in every transverse plane.
    pub fn mode_function(&self, x: f64, y: f64, z: f64) -> Complex64 {
        let k = self.wavenumber();
        let q = self.beam_parameter(z);
        let amp = (k * self.rayleigh_range() / PI).sqrt();
        let phase = Complex64::new(0.0, -k * (x * x + y * y) * 0.5) / q;
        amp * phase.exp() / q
    }

    /// `ξ = L / (k w₀²)`.
    pub fn focal_parameter(&self, length: f64) -> Result<f64> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!(
                "crystal length must be positive, got {length:e} m"
            )));
        }
        Ok(length / (self.wavenumber() * self.waist * self.waist))
    }
}

pub fn scaled_beam_parameter(mode: &GaussianMode, z: f64) -> Complex64 {
    mode.scaled_beam_parameter(z)
}

pub fn mode_function(mode: &GaussianMode, x: f64, y: f64, z: f64) -> Complex64 {
    mode.mode_function(x, y, z)
}

pub fn focal_parameter(mode: &GaussianMode, length: f64) -> Result<f64> {
    mode.focal_parameter(length)
}

/// Pump, signal and idler modes in a crystal of a given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamTriple {
    pub modes: PerBeam<GaussianMode>,
    pub length: f64,
}

impl BeamTriple {
    pub fn new(
        pump: GaussianMode,
        signal: GaussianMode,
        idler: GaussianMode,
        length: f64,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!(
                "crystal length must be positive, got {length:e} m"
            )));
        }
        Ok(Self {
            modes: PerBeam::new(pump, signal, idler),
            length,
        })
    }

    /// Modes with the given waists, using the crystal's phase indices.
    pub fn from_waists(
        material: &MaterialOptics,
        lambdas: PerBeam<f64>,
        waists: PerBeam<f64>,
    ) -> Result<Self> {
        Self::new(
            GaussianMode::new(lambdas.pump, material.n.pump, waists.pump)?,
            GaussianMode::new(lambdas.signal, material.n.signal, waists.signal)?,
            GaussianMode::new(lambdas.idler, material.n.idler, waists.idler)?,
            material.length,
        )
    }

    /// Modes whose waists realise the requested focal parameters.
    pub fn from_focal_parameters(
        material: &MaterialOptics,
        lambdas: PerBeam<f64>,
        xi: PerBeam<f64>,
    ) -> Result<Self> {
        let l = material.length;
        Self::new(
            GaussianMode::from_focal_parameter(lambdas.pump, material.n.pump, xi.pump, l)?,
            GaussianMode::from_focal_parameter(lambdas.signal, material.n.signal, xi.signal, l)?,
            GaussianMode::from_focal_parameter(lambdas.idler, material.n.idler, xi.idler, l)?,
            l,
        )
    }

    pub fn focal_parameters(&self) -> PerBeam<f64> {
        let l = self.length;
        self.modes.map(|m| l / (m.wavenumber() * m.waist * m.waist))
    }

    pub fn wavenumbers(&self) -> PerBeam<f64> {
        self.modes.map(|m| m.wavenumber())
    }

    pub fn waists(&self) -> PerBeam<f64> {
        self.modes.map(|m| m.waist)
    }

    pub fn wavelengths(&self) -> PerBeam<f64> {
        self.modes.map(|m| m.lambda_vac)
    }

    /// Same beams with a different crystal length (waists unchanged).
    pub fn with_length(self, length: f64) -> Result<Self> {
        Self::new(self.modes.pump, self.modes.signal, self.modes.idler, length)
    }

    pub fn swap_signal_idler(self) -> Self {
        Self {
            modes: self.modes.swap_signal_idler(),
            ..self
        }
    }
}
