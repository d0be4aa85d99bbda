//! Experiment configuration files. All quantities are in SI base units.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use spdc_core::{
    BeamTriple, DispersionModel, FocusFamily, MaterialOptics, PerBeam, PumpSpec, SpectralShape,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub material: MaterialBlock,
    pub beams: BeamsBlock,
    pub pump: PumpBlock,
    #[serde(default)]
    pub run: RunBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    #[serde(default)]
    pub name: Option<String>,
    /// Literal phase and group indices.
    #[serde(default)]
    pub indices: Option<IndexBlock>,
    /// Dispersion model files, relative to the config file.
    #[serde(default)]
    pub dispersion: Option<PerBeam<PathBuf>>,
    /// m/V
    pub d_eff: f64,
    /// m
    pub length: f64,
    /// m
    #[serde(default)]
    pub poling_period: Option<f64>,
    /// m
    #[serde(default)]
    pub transverse: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexBlock {
    pub n: PerBeam<f64>,
    pub ng: PerBeam<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamsBlock {
    /// Vacuum wavelengths, m.
    pub lambda: PerBeam<f64>,
    /// 1/e² intensity radii at the focus, m.
    #[serde(default)]
    pub waist: Option<PerBeam<f64>>,
    #[serde(default)]
    pub xi: Option<PerBeam<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpBlock {
    /// W
    pub power: f64,
    /// rad/s
    pub bandwidth: f64,
    #[serde(default)]
    pub shape: SpectralShape,
    #[serde(default)]
    pub photons_per_pulse: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Oracle quadrature tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub phase_half_width: Option<f64>,
    #[serde(default)]
    pub qpm_shift: Option<f64>,
    /// s²/m
    #[serde(default)]
    pub kappa0: Option<f64>,
    #[serde(default)]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub optimize: Option<OptimizeBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScanVariable {
    Xi,
    Waist,
    #[serde(alias = "Lz")]
    #[value(alias = "Lz")]
    Lz,
    DeltaK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub variable: ScanVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeBlock {
    pub xi_min: f64,
    pub xi_max: f64,
    #[serde(default)]
    pub family: FocusFamily,
}

/// A validated configuration with its dispersion files resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub material: MaterialOptics,
    pub beams: BeamTriple,
    pub pump: PumpSpec,
    /// Models used to re-evaluate indices, when given.
    pub dispersion: Option<PerBeam<DispersionModel>>,
}

fn positive(value: f64, field: &str) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        bail!("{field} must be positive, got {value}");
    }
    Ok(())
}

fn positive_triple(values: PerBeam<f64>, field: &str) -> Result<()> {
    positive(values.pump, &format!("{field}.pump"))?;
    positive(values.signal, &format!("{field}.signal"))?;
    positive(values.idler, &format!("{field}.idler"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("malformed experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.material;
        positive(m.length, "material.length")?;
        if !(m.d_eff >= 0.0 && m.d_eff.is_finite()) {
            bail!("material.d_eff must be >= 0, got {}", m.d_eff);
        }
        if let Some(p) = m.poling_period {
            positive(p, "material.poling_period")?;
        }
        if let Some((a, b)) = m.transverse {
            positive(a, "material.transverse[0]")?;
            positive(b, "material.transverse[1]")?;
        }
        match (&m.indices, &m.dispersion) {
            (Some(_), Some(_)) => bail!("material: give either indices or dispersion, not both"),
            (None, None) => bail!("material: one of indices or dispersion is required"),
            (Some(ix), None) => {
                positive_triple(ix.n, "material.indices.n")?;
                positive_triple(ix.ng, "material.indices.ng")?;
            }
            (None, Some(_)) => {}
        }

        let b = &self.beams;
        positive_triple(b.lambda, "beams.lambda")?;
        let inv = b.lambda.map(|l| 1.0 / l);
        let residual = (inv.pump - inv.signal - inv.idler) / inv.pump;
        if residual.abs() > 1e-6 {
            bail!(
                "beams.lambda violates energy conservation: 1/λ_p − 1/λ₁ − 1/λ₂ is {residual:.3e} of 1/λ_p (limit 1e-6)"
            );
        }
        match (b.waist, b.xi) {
            (Some(_), Some(_)) => bail!("beams: give either waist or xi, not both"),
            (None, None) => bail!("beams: one of waist or xi is required"),
            (Some(w), None) => positive_triple(w, "beams.waist")?,
            (None, Some(x)) => positive_triple(x, "beams.xi")?,
        }

        positive(self.pump.power, "pump.power")?;
        positive(self.pump.bandwidth, "pump.bandwidth")?;
        if let Some(n) = self.pump.photons_per_pulse {
            positive(n, "pump.photons_per_pulse")?;
        }

        let r = &self.run;
        if let Some(t) = r.tol {
            if !(t > 0.0 && t < 1.0) {
                bail!("run.tol must lie in (0, 1), got {t}");
            }
        }
        if let Some(w) = r.phase_half_width {
            positive(w, "run.phase_half_width")?;
        }
        if let Some(k) = r.kappa0 {
            if !(k != 0.0 && k.is_finite()) {
                bail!("run.kappa0 must be nonzero and finite, got {k}");
            }
        }
        if let Some(s) = r.scan {
            if s.points < 2 {
                bail!("run.scan.points must be at least 2, got {}", s.points);
            }
        }
        Ok(())
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let config =
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::build(config, base)
    }

    pub fn build(config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        let dispersion = match &config.material.dispersion {
            Some(paths) => {
                let load = |p: &PathBuf| {
                    let full = base_dir.join(p);
                    DispersionModel::load(&full)
                        .with_context(|| format!("material.dispersion: {}", full.display()))
                };
                Some(PerBeam::new(
                    load(&paths.pump)?,
                    load(&paths.signal)?,
                    load(&paths.idler)?,
                ))
            }
            None => None,
        };
        let material = material_for(&config, dispersion.as_ref(), config.material.length)?;
        let lambda = config.beams.lambda;
        let beams = match (config.beams.waist, config.beams.xi) {
            (Some(w), _) => BeamTriple::from_waists(&material, lambda, w),
            (None, Some(x)) => BeamTriple::from_focal_parameters(&material, lambda, x),
            (None, None) => unreachable!("validated"),
        }
        .context("beams")?;
        let p = config.pump;
        let mut pump = PumpSpec::new(p.power, lambda.pump, p.shape, p.bandwidth).context("pump")?;
        if let Some(n) = p.photons_per_pulse {
            pump = pump
                .with_photons_per_pulse(n)
                .context("pump.photons_per_pulse")?;
        }
        Ok(Self {
            config,
            material,
            beams,
            pump,
            dispersion,
        })
    }

    /// The same crystal cut to `length`.
    pub fn material_with_length(&self, length: f64) -> Result<MaterialOptics> {
        material_for(&self.config, self.dispersion.as_ref(), length)
    }
}

fn material_for(
    config: &ExperimentConfig,
    dispersion: Option<&PerBeam<DispersionModel>>,
    length: f64,
) -> Result<MaterialOptics> {
    let m = &config.material;
    let optics = match (m.indices, dispersion) {
        (Some(ix), _) => MaterialOptics::new(ix.n, ix.ng, m.d_eff, length),
        (None, Some(models)) => {
            MaterialOptics::from_dispersion(models.as_ref(), config.beams.lambda, m.d_eff, length)
        }
        (None, None) => unreachable!("validated"),
    }
    .context("material")?;
    let mut optics = optics
        .with_poling(m.poling_period)
        .context("material.poling_period")?;
    optics.transverse = m.transverse;
    Ok(optics)
}
