//! Minimal SI dimension tracking, used to audit the rate formulas.
//!
//! Exponents are stored in half-units so that square roots of spectral
//! densities stay exact.

use std::fmt;
use std::ops::{Div, Mul};

use crate::beams::BeamTriple;
use crate::error::{Error, Result};
use crate::materials::{MaterialOptics, PhysicalConstants};
use crate::overlap::{a_plus_b_plus, aggregate_focal_parameter};

/// Exponents of metre, kilogram, second and ampere, times two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dimension([i16; 4]);

impl Dimension {
    pub const NONE: Self = Self([0; 4]);
    pub const METRE: Self = Self([2, 0, 0, 0]);
    pub const KILOGRAM: Self = Self([0, 2, 0, 0]);
    pub const SECOND: Self = Self([0, 0, 2, 0]);
    pub const AMPERE: Self = Self([0, 0, 0, 2]);

    pub fn powi(self, n: i16) -> Self {
        Self(self.0.map(|e| e * n))
    }

    pub fn sqrt(self) -> Result<Self> {
        if self.0.iter().any(|e| e % 2 != 0) {
            return Err(Error::Domain(format!(
                "square root of {self} is not representable"
            )));
        }
        Ok(Self(self.0.map(|e| e / 2)))
    }

    pub fn is_dimensionless(self) -> bool {
        self == Self::NONE
    }

    pub fn volt() -> Self {
        Self::KILOGRAM * Self::METRE.powi(2) / Self::SECOND.powi(3) / Self::AMPERE
    }
}

impl Mul for Dimension {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}

impl Div for Dimension {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self([0, 1, 2, 3].map(|i| self.0[i] - o.0[i]))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return write!(f, "1");
        }
        let mut first = true;
        for (sym, &e) in ["m", "kg", "s", "A"].iter().zip(&self.0) {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "·")?;
            }
            first = false;
            if e == 2 {
                write!(f, "{sym}")?;
            } else if e % 2 == 0 {
                write!(f, "{sym}^{}", e / 2)?;
            } else {
                write!(f, "{sym}^({}/2)", e)?;
            }
        }
        Ok(())
    }
}

/// A value with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dim: Dimension) -> Self {
        Self { value, dim }
    }

    pub fn scalar(value: f64) -> Self {
        Self::new(value, Dimension::NONE)
    }

    pub fn powi(self, n: i16) -> Self {
        Self::new(self.value.powi(n as i32), self.dim.powi(n))
    }

    pub fn sqrt(self) -> Result<Self> {
        Ok(Self::new(self.value.sqrt(), self.dim.sqrt()?))
    }

    pub fn atan(self) -> Result<Self> {
        if !self.dim.is_dimensionless() {
            return Err(Error::Domain(format!(
                "arctan of a quantity with dimension {}",
                self.dim
            )));
        }
        Ok(Self::scalar(self.value.atan()))
    }
}

impl Mul for Quantity {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.value * o.value, self.dim * o.dim)
    }
}

impl Div for Quantity {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self::new(self.value / o.value, self.dim / o.dim)
    }
}

impl Mul<f64> for Quantity {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Self::new(self.value * o, self.dim)
    }
}

/// Dimensioned copies of the physical constants.
pub struct DimensionedConstants {
    pub epsilon0: Quantity,
    pub hbar: Quantity,
    pub c: Quantity,
}

impl From<&PhysicalConstants> for DimensionedConstants {
    fn from(k: &PhysicalConstants) -> Self {
        use Dimension as D;
        Self {
            epsilon0: Quantity::new(
                k.epsilon0,
                D::AMPERE.powi(2) * D::SECOND.powi(4) / D::KILOGRAM / D::METRE.powi(3),
            ),
            hbar: Quantity::new(k.hbar, D::KILOGRAM * D::METRE.powi(2) / D::SECOND),
            c: Quantity::new(k.c, D::METRE / D::SECOND),
        }
    }
}

fn length(v: f64) -> Quantity {
    Quantity::new(v, Dimension::METRE)
}

/// The closed-form pair probability evaluated with dimension tracking.
pub fn closed_form_quantity(
    material: &MaterialOptics,
    beams: &BeamTriple,
    constants: &PhysicalConstants,
) -> Result<Quantity> {
    let k = DimensionedConstants::from(constants);
    let (n, ng) = (material.n, material.ng);
    let chi = Quantity::new(material.chi2_eff(), Dimension::METRE / Dimension::volt());
    let lam = beams.wavelengths().map(length);
    let (wn, xi) = (beams.wavenumbers(), beams.focal_parameters());
    let xi_agg = Quantity::scalar(aggregate_focal_parameter(wn, xi)?);
    let ab = Quantity::scalar(a_plus_b_plus(wn, xi)?);
    let index = Quantity::scalar(
        ng.product() / (n.pump.powi(3) * n.signal * n.idler * (ng.signal - ng.idler).abs()),
    );
    Ok(
        k.hbar * k.c / k.epsilon0 * 64.0 * std::f64::consts::PI.powi(3) * index * chi.powi(2)
            / (lam.signal.powi(2) * lam.idler.powi(2))
            * xi_agg.atan()?
            / ab,
    )
}

/// Dimension of `|ψ|² dω₁ dω₂` built from its factors: prefactor, `|s|²`,
/// `|𝒪|²` with `𝒪 ~ χ w³ D`, and the two frequency differentials.
pub fn jsa_probability_dimension(constants: &PhysicalConstants) -> Result<Dimension> {
    use Dimension as D;
    let k = DimensionedConstants::from(constants);
    let lam = length(1.0);
    let prefactor = k.hbar / (k.epsilon0 * lam.powi(3));
    let omega = Quantity::new(1.0, D::SECOND.powi(-1));
    let s = (Quantity::scalar(1.0) / omega).sqrt()?;
    let overlap =
        Quantity::new(1.0, D::METRE / D::volt()) * length(1.0).powi(3) * length(1.0).powi(-3);
    let psi = prefactor.sqrt()? * s * overlap;
    Ok((psi.powi(2) * omega * omega).dim)
}
