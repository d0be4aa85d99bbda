//! The four subcommands. Each returns its human-readable report.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use spdc_core::overlap::{overlap_simplified, quadratic_coefficient};
use spdc_core::rates::{
    beams_for_focus, focus_optimize, pairs_closed_form, pairs_degenerate_numeric,
    pairs_via_bruteforce,
};
use spdc_core::{
    BeamTriple, Error as CoreError, FocusFamily, MaterialOptics, OracleOptions, OverlapParams,
    PhysicalConstants, RateResult, TableSet,
};

use crate::config::{Experiment, ScanVariable, Spacing};

pub const CSV_HEADER: [&str; 5] = [
    "x",
    "pairs_per_s_per_mW",
    "xi_agg",
    "a_plus_b_plus",
    "status",
];
const DEFAULT_ORACLE_TOL: f64 = 1e-4;
const DEFAULT_OVERLAP_TOL: f64 = 1e-10;
pub const DEFAULT_XI_RANGE: (f64, f64) = (1e-2, 1e2);

/// Invalid command-line or range input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// How each rate is computed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Method {
    pub oracle: bool,
    pub degenerate: bool,
    pub kappa0: Option<f64>,
    pub tol: Option<f64>,
    pub parallel: bool,
}

impl Method {
    fn tol(&self, exp: &Experiment) -> f64 {
        self.tol
            .or(exp.config.run.tol)
            .unwrap_or(DEFAULT_ORACLE_TOL)
    }

    fn oracle_options(&self, exp: &Experiment) -> OracleOptions {
        let run = &exp.config.run;
        OracleOptions::new(self.tol(exp))
            .with_phase_half_width(
                run.phase_half_width
                    .unwrap_or(OracleOptions::DEFAULT_PHASE_HALF_WIDTH),
            )
            .with_qpm_shift(run.qpm_shift.unwrap_or(0.0))
            .parallel(self.parallel)
    }

    fn kappa0(&self, exp: &Experiment) -> Result<f64> {
        self.kappa0
            .or(exp.config.run.kappa0)
            .ok_or_else(|| usage("--degenerate needs --kappa0 <s^2/m> or run.kappa0 in the config"))
    }

    fn validate(&self, exp: &Experiment) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(usage(format!("--tol must lie in (0, 1), got {t}")));
            }
        }
        if self.degenerate {
            let k = self.kappa0(exp)?;
            if !(k != 0.0 && k.is_finite()) {
                return Err(usage(format!(
                    "--kappa0 must be nonzero and finite, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// The primary rate: degenerate numeric, brute force or closed form.
    fn primary(
        &self,
        exp: &Experiment,
        m: &MaterialOptics,
        b: &BeamTriple,
        c: &PhysicalConstants,
    ) -> Result<RateResult> {
        let r = if self.degenerate {
            pairs_degenerate_numeric(
                m,
                b,
                &exp.pump,
                self.kappa0(exp)?,
                c,
                &self.oracle_options(exp),
            )
        } else if self.oracle {
            pairs_via_bruteforce(m, b, &exp.pump, c, &self.oracle_options(exp))
        } else {
            pairs_closed_form(m, b, c)
        };
        Ok(r?)
    }
}

fn core_error(e: &anyhow::Error) -> Option<&CoreError> {
    e.chain().find_map(|c| c.downcast_ref::<CoreError>())
}

fn status_of(e: &anyhow::Error) -> &'static str {
    match core_error(e) {
        Some(CoreError::DegenerateDispersion(_)) => "degenerate_dispersion",
        Some(CoreError::Degenerate(_)) => "degenerate",
        Some(CoreError::Singularity { .. }) => "singularity",
        Some(CoreError::NonConvergence { .. }) => "nonconvergence",
        Some(CoreError::OutOfRange { .. }) => "out_of_range",
        _ => "error",
    }
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

fn triple(p: spdc_core::PerBeam<f64>) -> String {
    format!("{:.6e}, {:.6e}, {:.6e}", p.pump, p.signal, p.idler)
}

#[derive(Serialize)]
struct RateReport {
    closed_form: Option<RateResult>,
    oracle: Option<RateResult>,
    degenerate: Option<RateResult>,
    relative_deviation: Option<f64>,
    pairs_per_second: f64,
}

pub fn cmd_rate(exp: &Experiment, method: Method, out: Option<&Path>) -> Result<String> {
    method.validate(exp)?;
    let c = PhysicalConstants::default();
    let (m, b) = (&exp.material, &exp.beams);
    let power = exp.config.pump.power;
    let mut s = String::new();
    writeln!(
        s,
        "configuration   {}",
        exp.config.material.name.as_deref().unwrap_or("(unnamed)")
    )?;
    writeln!(s, "length          {:.6e} m", m.length)?;
    writeln!(s, "xi (p, s, i)    {}", triple(b.focal_parameters()))?;
    writeln!(s, "waist (p, s, i) {} m", triple(b.waists()))?;
    let c_quad = quadratic_coefficient(b.wavenumbers(), b.focal_parameters())?;
    writeln!(s, "C               {c_quad:.6e}")?;

    let mut report = RateReport {
        closed_form: None,
        oracle: None,
        degenerate: None,
        relative_deviation: None,
        pairs_per_second: 0.0,
    };
    if method.degenerate {
        let r = method.primary(exp, m, b, &c)?;
        writeln!(s, "xi_agg          {:.6e}", r.xi_agg)?;
        writeln!(s, "A+B+            {:.6e}", r.a_plus_b_plus)?;
        writeln!(
            s,
            "degenerate      {} pairs/s/mW ({} pairs/s at {power:e} W, kappa0 {:.6e} s^2/m)",
            sci(r.pairs_per_s_per_mw),
            sci(r.pairs_per_second(power)),
            method.kappa0(exp)?
        )?;
        report.pairs_per_second = r.pairs_per_second(power);
        report.degenerate = Some(r);
    } else {
        let cf = pairs_closed_form(m, b, &c).map_err(|e| match e {
            CoreError::DegenerateDispersion(ng) => anyhow!(
                "signal and idler group indices are equal (n_g = {ng}); rerun with --degenerate --kappa0 <s^2/m>"
            ),
            e => e.into(),
        })?;
        writeln!(s, "xi_agg          {:.6e}", cf.xi_agg)?;
        writeln!(s, "A+B+            {:.6e}", cf.a_plus_b_plus)?;
        writeln!(
            s,
            "closed form     {} pairs/s/mW ({} pairs/s at {power:e} W)",
            sci(cf.pairs_per_s_per_mw),
            sci(cf.pairs_per_second(power))
        )?;
        report.pairs_per_second = cf.pairs_per_second(power);
        if method.oracle {
            let bf = pairs_via_bruteforce(m, b, &exp.pump, &c, &method.oracle_options(exp))?;
            let dev = if cf.pairs_per_pump_photon > 0.0 {
                Some(bf.pairs_per_pump_photon / cf.pairs_per_pump_photon - 1.0)
            } else {
                None
            };
            writeln!(
                s,
                "oracle          {} pairs/s/mW",
                sci(bf.pairs_per_s_per_mw)
            )?;
            match dev {
                Some(d) => writeln!(s, "deviation       {d:+.3e}")?,
                None => writeln!(s, "deviation       n/a")?,
            }
            if let (Some(q), Some(t)) = (bf.quadrature_error_estimate, bf.truncation_estimate) {
                writeln!(
                    s,
                    "oracle error    quadrature {q:.2e}, window truncation {t:.2e}"
                )?;
            }
            report.relative_deviation = dev;
            report.oracle = Some(bf);
        }
        report.closed_form = Some(cf);
    }
    if let Some(path) = out {
        write_output(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(s)
}

/// Scan axis and resolution.
#[derive(Debug, Clone, Copy)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub family: FocusFamily,
}

impl ScanSpec {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(usage(format!(
                "scan needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(usage(format!(
                "scan range must satisfy start < stop, got [{}, {}]",
                self.start, self.stop
            )));
        }
        let needs_positive = self.spacing == Spacing::Log || self.variable != ScanVariable::DeltaK;
        if needs_positive && self.start <= 0.0 {
            return Err(usage(format!(
                "scan range must be positive for this variable, got start = {}",
                self.start
            )));
        }
        Ok(())
    }

    fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => {
                        (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp()
                    }
                }
            })
            .collect()
    }
}

fn scan_point(
    exp: &Experiment,
    method: &Method,
    spec: &ScanSpec,
    x: f64,
    c: &PhysicalConstants,
) -> Result<RateResult> {
    let (m, b) = (&exp.material, &exp.beams);
    match spec.variable {
        ScanVariable::Xi => method.primary(exp, m, &beams_for_focus(m, b, spec.family, x)?, c),
        ScanVariable::Waist => {
            let mut w = b.waists();
            w.pump = x;
            method.primary(exp, m, &BeamTriple::from_waists(m, b.wavelengths(), w)?, c)
        }
        ScanVariable::Lz => {
            let cut = exp.material_with_length(x)?;
            method.primary(
                exp,
                &cut,
                &BeamTriple::from_waists(&cut, b.wavelengths(), b.waists())?,
                c,
            )
        }
        ScanVariable::DeltaK => {
            let tol = method.tol.unwrap_or(DEFAULT_OVERLAP_TOL);
            let overlap = |dk: f64| -> Result<f64> {
                let p = OverlapParams::from_beams(b, dk * b.length)?;
                Ok(overlap_simplified(&p, 1.0, b.waists(), tol)?
                    .value
                    .norm_sqr())
            };
            let mut r = method.primary(exp, m, b, c)?;
            let ratio = overlap(x)? / overlap(0.0)?;
            r.pairs_per_pump_photon *= ratio;
            r.pairs_per_s_per_mw *= ratio;
            Ok(r)
        }
    }
}

pub fn cmd_scan(
    exp: &Experiment,
    method: Method,
    spec: ScanSpec,
    out: Option<&Path>,
) -> Result<String> {
    method.validate(exp)?;
    spec.validate()?;
    let c = PhysicalConstants::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for x in spec.values() {
        let record = match scan_point(exp, &method, &spec, x, &c) {
            Ok(r) => [x, r.pairs_per_s_per_mw, r.xi_agg, r.a_plus_b_plus]
                .map(sci)
                .into_iter()
                .chain(["ok".to_string()])
                .collect::<Vec<_>>(),
            Err(e) => vec![
                sci(x),
                sci(f64::NAN),
                sci(f64::NAN),
                sci(f64::NAN),
                status_of(&e).to_string(),
            ],
        };
        w.write_record(&record)?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    match out {
        Some(path) => {
            write_output(path, &csv)?;
            Ok(format!(
                "wrote {} rows to {}\n",
                spec.points,
                path.display()
            ))
        }
        None => Ok(csv),
    }
}

pub fn cmd_table(path: &Path, out: Option<&Path>) -> Result<String> {
    let set = TableSet::load(path)?;
    let rows = set.evaluate()?;
    let mut s = String::new();
    writeln!(
        s,
        "{:<30} {:>9} {:>12} {:>12} {:>12} {:>12} {:>10}  result",
        "crystal", "factor", "previous", "computed", "revised", "experiment", "deviation"
    )?;
    for r in &rows {
        let exp = r
            .rate_experimental
            .map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
        writeln!(
            s,
            "{:<30} {:>9.5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12} {:>+10.3e}  {}",
            r.name,
            r.factor,
            r.rate_previous,
            r.computed,
            r.expected,
            exp,
            r.relative_deviation,
            if r.pass { "PASS" } else { "FAIL" }
        )?;
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    writeln!(
        s,
        "{passed}/{} rows within relative tolerance {}",
        rows.len(),
        set.tolerance
    )?;
    writeln!(
        s,
        "experimental rates are listed for reference and are not checked"
    )?;
    if let Some(path) = out {
        write_output(path, &serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(s)
}

#[derive(Serialize)]
struct OptimizeReport {
    family: FocusFamily,
    xi_opt: f64,
    xi: spdc_core::PerBeam<f64>,
    waist: spdc_core::PerBeam<f64>,
    rate: RateResult,
    pairs_per_second: f64,
    at_boundary: bool,
}

pub fn cmd_optimize(
    exp: &Experiment,
    range: (f64, f64),
    family: FocusFamily,
    out: Option<&Path>,
) -> Result<String> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(usage(format!(
            "xi range must satisfy 0 < xi_min < xi_max, got [{lo}, {hi}]"
        )));
    }
    let c = PhysicalConstants::default();
    let r = focus_optimize(&exp.material, &exp.beams, &c, range, family)?;
    let power = exp.config.pump.power;
    let mut s = String::new();
    writeln!(s, "family          {family:?}")?;
    writeln!(s, "xi_opt          {:.9e}", r.xi_opt)?;
    writeln!(s, "xi (p, s, i)    {}", triple(r.beams.focal_parameters()))?;
    writeln!(s, "waist (p, s, i) {} m", triple(r.beams.waists()))?;
    writeln!(s, "xi_agg          {:.6e}", r.rate.xi_agg)?;
    writeln!(
        s,
        "peak rate       {} pairs/s/mW ({} pairs/s at {power:e} W)",
        sci(r.rate.pairs_per_s_per_mw),
        sci(r.rate.pairs_per_second(power))
    )?;
    if r.at_boundary {
        writeln!(
            s,
            "warning         maximum lies at the edge of [{lo}, {hi}]"
        )?;
    }
    if let Some(path) = out {
        let report = OptimizeReport {
            family,
            xi_opt: r.xi_opt,
            xi: r.beams.focal_parameters(),
            waist: r.beams.waists(),
            rate: r.rate,
            pairs_per_second: r.rate.pairs_per_second(power),
            at_boundary: r.at_boundary,
        };
        write_output(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(s)
}
