//! Empirical order certification: residuals along a geometric N grid,
//! least-squares log–log slopes, and serializable reports.

mod sweep;

pub use sweep::{uniform_sweep, Claim, Sampling, SweepConfig};

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::arith::{format_real, Precision};
use crate::error::{ensure, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Geometric sequence of sample sizes base·ratio^k, k < count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub base: u64,
    pub ratio: u64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(base: u64, ratio: u64, count: usize) -> Result<Self> {
        ensure!(
            count >= 5,
            "a grid needs at least 5 sample sizes, got {count}"
        );
        ensure!(ratio >= 2, "grid ratio must be at least 2, got {ratio}");
        ensure!(base >= 1, "grid base must be positive");
        let mut n = base;
        for _ in 1..count {
            n = n
                .checked_mul(ratio)
                .ok_or_else(|| crate::Error::Domain("grid overflows u64".into()))?;
        }
        Ok(GridSpec { base, ratio, count })
    }

    /// Powers of two 2^lo, …, 2^hi.
    pub fn powers_of_two(lo: u32, hi: u32) -> Result<Self> {
        ensure!(hi >= lo, "empty exponent range");
        Self::new(1u64 << lo, 2, (hi - lo + 1) as usize)
    }

    pub fn values(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count);
        let mut n = self.base;
        for _ in 0..self.count {
            out.push(n);
            n = n.saturating_mul(self.ratio);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_err: f64,
}

/// Least-squares line through (xs, ys) with the standard error of the slope.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> SlopeFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let std_err = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    SlopeFit {
        slope,
        intercept,
        std_err,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// slope ≤ target + tolerance
    UpperBound,
    /// |slope − target| ≤ tolerance
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub slope: f64,
    pub tolerance: f64,
    pub kind: TargetKind,
}

impl Target {
    pub fn upper(slope: f64, tolerance: f64) -> Self {
        Target {
            slope,
            tolerance,
            kind: TargetKind::UpperBound,
        }
    }

    pub fn two_sided(slope: f64, tolerance: f64) -> Self {
        Target {
            slope,
            tolerance,
            kind: TargetKind::TwoSided,
        }
    }

    pub fn accepts(&self, measured: f64) -> bool {
        match self.kind {
            TargetKind::UpperBound => measured <= self.slope + self.tolerance,
            TargetKind::TwoSided => (measured - self.slope).abs() <= self.tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Every residual vanished exactly.
    Exact,
    /// Too few nonzero residuals to fit a slope.
    Degenerate,
}

impl Verdict {
    pub fn is_success(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Exact)
    }
}

/// One residual measurement. `exact` marks residuals computed in exact
/// arithmetic (so a zero is a true zero).
#[derive(Clone, Debug)]
pub struct Sample {
    pub residual: Float,
    pub exact: bool,
}

impl Sample {
    pub fn real(residual: Float) -> Self {
        Sample {
            residual,
            exact: false,
        }
    }

    pub fn exact(residual: Float) -> Self {
        Sample {
            residual,
            exact: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub residual: String,
    pub weighted_residual: String,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCheck {
    pub doubled_bits: u32,
    pub slope: f64,
    pub delta: f64,
    pub within_tolerance: bool,
}

/// Residuals per N with the fitted log–log slope and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub claim: String,
    pub params: BTreeMap<String, String>,
    pub precision_bits: u32,
    pub grid: GridSpec,
    pub sampling: String,
    /// Exponent κ with weighted_residual = residual · N^κ.
    pub weight_exponent: f64,
    /// The slope belongs to the weighted residuals.
    pub fit_weighted: bool,
    pub rows: Vec<ReportRow>,
    pub fit: Option<SlopeFit>,
    pub target: Option<Target>,
    /// Weighted residuals strictly decrease along the grid.
    pub weighted_decreasing: bool,
    /// Raw residuals are monotone non-increasing.
    pub monotone: bool,
    pub exact_hits: Vec<u64>,
    pub precision_check: Option<PrecisionCheck>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Everything `estimate_order` needs besides the residual function.
#[derive(Clone, Debug)]
pub struct OrderSpec {
    pub claim: String,
    pub params: BTreeMap<String, String>,
    pub grid: GridSpec,
    pub sampling: String,
    pub weight_exponent: f64,
    pub target: Option<Target>,
    /// Require strictly decreasing weighted residuals for a pass.
    pub require_decreasing: bool,
    /// Fit the slope of the weighted residuals instead of the raw ones.
    pub fit_weighted: bool,
    /// Re-run at doubled precision and require slope agreement within this.
    pub precision_check: Option<f64>,
}

impl OrderSpec {
    pub fn new(claim: &str, grid: GridSpec) -> Self {
        OrderSpec {
            claim: claim.to_string(),
            params: BTreeMap::new(),
            grid,
            sampling: String::new(),
            weight_exponent: 0.0,
            target: None,
            require_decreasing: false,
            fit_weighted: false,
            precision_check: None,
        }
    }
}

/// Digits used when rendering residuals.
const REPORT_DIGITS: usize = 17;

/// Evaluates `residual_fn` on every grid N (in parallel, results kept in
/// grid order), fits the log–log slope of the nonzero residuals and applies
/// the target.
pub fn estimate_order<F>(
    residual_fn: F,
    spec: &OrderSpec,
    prec: Precision,
) -> Result<ConvergenceReport>
where
    F: Fn(u64, Precision) -> Result<Sample> + Sync,
{
    let start = Instant::now();
    let ns = spec.grid.values();
    let samples = evaluate(&residual_fn, &ns, prec)?;
    let mut report = assemble(spec, &ns, &samples, prec);
    if let (Some(tol), Some(fit)) = (spec.precision_check, report.fit) {
        let doubled = evaluate(&residual_fn, &ns, prec.doubled())?;
        let other = assemble(spec, &ns, &doubled, prec.doubled());
        if let Some(fit2) = other.fit {
            let delta = (fit2.slope - fit.slope).abs();
            let ok = delta <= tol;
            report.precision_check = Some(PrecisionCheck {
                doubled_bits: prec.doubled().bits(),
                slope: fit2.slope,
                delta,
                within_tolerance: ok,
            });
            if !ok && report.verdict == Verdict::Pass {
                report.verdict = Verdict::Fail;
                report
                    .notes
                    .push("slope changed under precision doubling".to_string());
            }
        }
    }
    report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    Ok(report)
}

fn evaluate<F>(residual_fn: &F, ns: &[u64], prec: Precision) -> Result<Vec<Sample>>
where
    F: Fn(u64, Precision) -> Result<Sample> + Sync,
{
    ns.par_iter().map(|&n| residual_fn(n, prec)).collect()
}

fn assemble(
    spec: &OrderSpec,
    ns: &[u64],
    samples: &[Sample],
    prec: Precision,
) -> ConvergenceReport {
    let mut rows = Vec::with_capacity(ns.len());
    let mut exact_hits = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut weighted = Vec::new();
    let mut raw = Vec::new();
    for (&n, sample) in ns.iter().zip(samples) {
        let r = Float::with_val(prec.bits(), sample.residual.abs_ref());
        let nf = Float::with_val(prec.bits(), n);
        let w = nf.pow(Float::with_val(prec.bits(), spec.weight_exponent)) * &r;
        if r.is_zero() {
            exact_hits.push(n);
        } else {
            xs.push((n as f64).ln());
            ys.push(if spec.fit_weighted {
                ln_f64(&w)
            } else {
                ln_f64(&r)
            });
        }
        rows.push(ReportRow {
            n,
            residual: format_real(&r, REPORT_DIGITS),
            weighted_residual: format_real(&w, REPORT_DIGITS),
            exact: sample.exact,
        });
        weighted.push(w);
        raw.push(r);
    }
    let weighted_decreasing = weighted.windows(2).all(|w| w[1] < w[0]);
    let monotone = raw.windows(2).all(|w| w[1] <= w[0]);
    let all_exact_zero = exact_hits.len() == ns.len() && samples.iter().all(|s| s.exact);
    let (fit, verdict) = if all_exact_zero {
        (None, Verdict::Exact)
    } else if xs.len() < 3 {
        (None, Verdict::Degenerate)
    } else {
        let fit = fit_slope(&xs, &ys);
        let mut ok = spec.target.is_none_or(|t| t.accepts(fit.slope));
        if spec.require_decreasing && !weighted_decreasing {
            ok = false;
        }
        (Some(fit), if ok { Verdict::Pass } else { Verdict::Fail })
    };
    let mut notes = Vec::new();
    if !monotone && fit.is_some() {
        notes.push("residual sequence is not monotone".to_string());
    }
    if !exact_hits.is_empty() && verdict != Verdict::Exact {
        notes.push(format!(
            "{} zero residual(s) excluded from the fit",
            exact_hits.len()
        ));
    }
    ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        claim: spec.claim.clone(),
        params: spec.params.clone(),
        precision_bits: prec.bits(),
        grid: spec.grid,
        sampling: spec.sampling.clone(),
        weight_exponent: spec.weight_exponent,
        fit_weighted: spec.fit_weighted,
        rows,
        fit,
        target: spec.target,
        weighted_decreasing,
        monotone,
        exact_hits,
        precision_check: None,
        verdict,
        notes,
        wall_time_ms: None,
    }
}

/// ln|x| as f64, valid far outside the f64 exponent range.
pub fn ln_f64(x: &Float) -> f64 {
    let bits = x.prec().max(64);
    Float::with_val(bits, x.abs_ref()).ln().to_f64()
}

impl ConvergenceReport {
    /// Canonical JSON with sorted keys; wall time is dropped so identical
    /// inputs produce identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_ms = None;
        let value = serde_json::to_value(&copy)?;
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// CSV with columns N, residual, weighted_residual, exact.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn is_success(&self) -> bool {
        self.verdict.is_success()
    }
}
