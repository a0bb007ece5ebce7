use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::{estimate_order, GridSpec, OrderSpec, Sample, Target};
use crate::arith::{binomial, complement, rational_to_real, two_pq, Precision};
use crate::edgeworth::{EdgeworthTable, PetrovSeries};
use crate::error::{ensure, Error, Result};
use crate::expansion::{
    classical_limit, corollary1_eval, corollary1_exact, corollary2_exact, m_v_simplified,
    scaled_rho, sharapudinov_eval, shifted_krawtchouk_direct, snap_to_lattice, weighted_krawtchouk,
    PsiBound, Theorem2,
};
use crate::orthopoly::{
    krawtchouk_hypergeometric, krawtchouk_real, orthogonality_norm, orthogonality_sum,
    KrawtchoukParams,
};
use crate::stirling::{rho_real, xhat_of};
use crate::Form;

use super::{ConvergenceReport, ReportRow, Verdict, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Thm1,
    Thm1Diff,
    Thm2,
    Cor1,
    Cor2,
    Sharapudinov,
    Lemma1,
    MVSimplified,
    Orthogonality,
    ClassicalLimit,
}

impl Claim {
    pub const ALL: [Claim; 10] = [
        Claim::Thm1,
        Claim::Thm1Diff,
        Claim::Thm2,
        Claim::Cor1,
        Claim::Cor2,
        Claim::Sharapudinov,
        Claim::Lemma1,
        Claim::MVSimplified,
        Claim::Orthogonality,
        Claim::ClassicalLimit,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Claim::Thm1 => "thm1",
            Claim::Thm1Diff => "thm1_diff",
            Claim::Thm2 => "thm2",
            Claim::Cor1 => "cor1",
            Claim::Cor2 => "cor2",
            Claim::Sharapudinov => "sharapudinov",
            Claim::Lemma1 => "lemma1",
            Claim::MVSimplified => "m_v_simplified",
            Claim::Orthogonality => "orthogonality",
            Claim::ClassicalLimit => "classical_limit",
        }
    }

    fn default_sampling(self) -> Sampling {
        match self {
            Claim::Thm1 => Sampling::Lattice,
            Claim::Thm1Diff | Claim::Lemma1 | Claim::Thm2 => Sampling::Uniform,
            Claim::Cor1 | Claim::Cor2 | Claim::MVSimplified => Sampling::FixedV(Rational::from(1)),
            Claim::Sharapudinov => Sampling::FixedX(Rational::new()),
            Claim::ClassicalLimit => Sampling::FixedX(Rational::from((7, 10))),
            Claim::Orthogonality => Sampling::Lattice,
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

/// Where along x (or v) residuals are sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    /// The claim's own default.
    Default,
    FixedX(Rational),
    FixedV(Rational),
    /// v = N^alpha.
    VPower(f64),
    /// Dense grid on |x| ≤ A, `points_per_unit` per unit length.
    Uniform,
    /// Every lattice point x̂ ∈ ℤ with |x| ≤ A.
    Lattice,
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampling::Default => write!(f, "default"),
            Sampling::FixedX(x) => write!(f, "fixed x = {x}"),
            Sampling::FixedV(v) => write!(f, "fixed v = {v}"),
            Sampling::VPower(a) => write!(f, "v = N^{a}"),
            Sampling::Uniform => write!(f, "uniform |x| <= A"),
            Sampling::Lattice => write!(f, "lattice |x| <= A"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub p: Rational,
    pub n: u32,
    pub m: u32,
    pub i: u32,
    /// Derivative order for `thm1_diff`.
    pub r: u32,
    /// Half-width A of the x range for uniform and lattice sampling.
    pub a: Rational,
    pub sampling: Sampling,
    pub points_per_unit: u32,
    pub grid: GridSpec,
    /// Sample size for `orthogonality`.
    pub big_n: u64,
    pub prec: Precision,
    pub form: Form,
    pub psi_bound: PsiBound,
    pub target: Option<Target>,
    pub precision_check: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p: Rational::from((1, 2)),
            n: 0,
            m: 0,
            i: 0,
            r: 0,
            a: Rational::from(1),
            sampling: Sampling::Default,
            points_per_unit: 64,
            grid: GridSpec {
                base: 1 << 10,
                ratio: 2,
                count: 8,
            },
            big_n: 20,
            prec: Precision::DEFAULT,
            form: Form::Corrected,
            psi_bound: PsiBound::Matched,
            target: None,
            precision_check: true,
        }
    }
}

/// Runs one claim over the configured grid and returns the fitted report.
pub fn uniform_sweep(claim: Claim, config: &SweepConfig) -> Result<ConvergenceReport> {
    crate::arith::check_probability(&config.p)?;
    ensure!(
        config.points_per_unit >= 1,
        "points_per_unit must be positive"
    );
    ensure!(config.a > 0, "A must be positive");
    if claim == Claim::Orthogonality {
        return orthogonality_report(config);
    }
    let sampling = match &config.sampling {
        Sampling::Default => claim.default_sampling(),
        s => s.clone(),
    };
    let mut spec = OrderSpec::new(claim.tag(), config.grid);
    spec.sampling = sampling.to_string();
    spec.params = params_of(claim, config);
    spec.precision_check = config.precision_check.then_some(0.05);
    let c = config.clone();
    let (m, n) = (c.m, c.n);
    let half = |k: i64| k as f64 / 2.0;
    match claim {
        Claim::Thm1 => {
            spec.weight_exponent = half(i64::from(m));
            spec.require_decreasing = true;
            spec.target = Some(Target::upper(-half(i64::from(m) + 1), 0.25));
            finish(spec, config, move |big_n, prec| {
                thm1_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::Thm1Diff => {
            spec.target = Some(Target::upper(-half(i64::from(m) + 1), 0.25));
            finish(spec, config, move |big_n, prec| {
                thm1_diff_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::Thm2 => {
            spec.target = Some(Target::upper(half(i64::from(n) - i64::from(m) - 2), 0.25));
            finish(spec, config, move |big_n, prec| {
                thm2_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::Cor1 => {
            ensure!(n >= 1, "cor1 needs n >= 1");
            let l = i64::from(n / 2);
            let norm = if n % 2 == 0 { l - 1 } else { l };
            spec.weight_exponent = -(norm as f64);
            spec.fit_weighted = true;
            spec.target = Some(match sampling {
                Sampling::VPower(_) => Target::upper(0.5, 0.2),
                _ => Target::two_sided(-1.0, 0.25),
            });
            finish(spec, config, move |big_n, prec| {
                cor1_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::Cor2 => {
            ensure!(n >= 1, "cor2 needs n >= 1");
            let l = i64::from(n / 2);
            spec.weight_exponent = (l + 1) as f64;
            spec.fit_weighted = true;
            spec.target = Some(Target::two_sided(-1.0, 0.25));
            finish(spec, config, move |big_n, prec| {
                cor2_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::Sharapudinov => {
            spec.target = Some(Target::upper(-0.5, 0.25));
            finish(spec, config, move |big_n, prec| {
                point_residual(&c, &sampling, big_n, prec, |x, prec| {
                    let (l, r) = sharapudinov_eval(c.n, big_n, &c.p, x, prec)?;
                    Ok(l - r)
                })
            })
        }
        Claim::Lemma1 => {
            ensure!(m <= 2, "lemma1 is stated for M in {{0, 1, 2}}");
            spec.weight_exponent = half(i64::from(m));
            spec.require_decreasing = true;
            spec.target = Some(Target::upper(-half(i64::from(m) + 1), 0.25));
            finish(spec, config, move |big_n, prec| {
                lemma1_residual(&c, &sampling, big_n, prec)
            })
        }
        Claim::MVSimplified => {
            spec.weight_exponent = 1.0;
            spec.fit_weighted = true;
            spec.require_decreasing = true;
            spec.target = Some(Target::upper(-0.5, 0.25));
            finish(spec, config, move |big_n, prec| {
                let v = v_of(&sampling, big_n, &c.p, prec)?;
                let s = scaled_rho(&c.p, big_n, &v, prec)?;
                Ok(Sample::real(s - m_v_simplified(&c.p, big_n, &v)?))
            })
        }
        Claim::ClassicalLimit => {
            spec.target = Some(Target::two_sided(-0.5, 0.15));
            finish(spec, config, move |big_n, prec| {
                point_residual(&c, &sampling, big_n, prec, |x, prec| {
                    let (l, h) = classical_limit(c.n, big_n, &c.p, x, prec)?;
                    Ok(l - h)
                })
            })
        }
        Claim::Orthogonality => unreachable!("handled above"),
    }
}

fn finish<F>(mut spec: OrderSpec, config: &SweepConfig, f: F) -> Result<ConvergenceReport>
where
    F: Fn(u64, Precision) -> Result<Sample> + Sync,
{
    if let Some(t) = config.target {
        spec.target = Some(t);
    }
    estimate_order(f, &spec, config.prec)
}

fn params_of(claim: Claim, c: &SweepConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("p".into(), c.p.to_string());
    m.insert("form".into(), format!("{:?}", c.form).to_lowercase());
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    match claim {
        Claim::Thm1 | Claim::Lemma1 => {
            put("M", c.m.to_string());
            put("A", c.a.to_string());
        }
        Claim::Thm1Diff => {
            put("M", c.m.to_string());
            put("r", c.r.to_string());
            put("A", c.a.to_string());
        }
        Claim::Thm2 => {
            put("n", c.n.to_string());
            put("M", c.m.to_string());
            put("A", c.a.to_string());
            put("psi_bound", format!("{:?}", c.psi_bound).to_lowercase());
        }
        Claim::Cor2 => {
            put("n", c.n.to_string());
            put("i", c.i.to_string());
        }
        Claim::Cor1 | Claim::Sharapudinov | Claim::ClassicalLimit => put("n", c.n.to_string()),
        Claim::MVSimplified => {}
        Claim::Orthogonality => put("N", c.big_n.to_string()),
    }
    if matches!(claim, Claim::Thm1Diff | Claim::Lemma1 | Claim::Thm2) {
        put("points_per_unit", c.points_per_unit.to_string());
    }
    m
}

/// Dense sample points −A, −A + 1/k, …, A.
fn uniform_points(c: &SweepConfig) -> Vec<Rational> {
    let k = i64::from(c.points_per_unit);
    let steps = Rational::from(&c.a * k)
        .ceil()
        .numer()
        .to_i64()
        .unwrap_or(0);
    (-steps..=steps).map(|j| Rational::from((j, k))).collect()
}

fn x_points(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Vec<Float>> {
    Ok(match sampling {
        Sampling::FixedX(x) => vec![rational_to_real(x, prec)],
        Sampling::FixedV(_) | Sampling::VPower(_) => {
            let v = v_of(sampling, big_n, &c.p, prec)?;
            let scale = rational_to_real(&(two_pq(&c.p) * Rational::from(big_n)), prec).sqrt();
            vec![v / scale]
        }
        _ => uniform_points(c)
            .iter()
            .map(|x| rational_to_real(x, prec))
            .collect(),
    })
}

fn v_of(sampling: &Sampling, big_n: u64, p: &Rational, prec: Precision) -> Result<Float> {
    Ok(match sampling {
        Sampling::FixedV(v) => rational_to_real(v, prec),
        Sampling::VPower(alpha) => {
            Float::with_val(prec.bits(), big_n).pow(Float::with_val(prec.bits(), *alpha))
        }
        Sampling::FixedX(x) => {
            let scale = rational_to_real(&(two_pq(p) * Rational::from(big_n)), prec).sqrt();
            rational_to_real(x, prec) * scale
        }
        other => {
            return Err(Error::Domain(format!(
                "sampling '{other}' does not define a single v"
            )))
        }
    })
}

fn sup_abs(values: Vec<Float>, bits: u32) -> Float {
    values
        .into_iter()
        .map(|v| v.abs())
        .fold(Float::new(bits), |a, b| if b > a { b } else { a })
}

fn point_residual<G>(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
    g: G,
) -> Result<Sample>
where
    G: Fn(&Float, Precision) -> Result<Float> + Sync,
{
    let xs = x_points(c, sampling, big_n, prec)?;
    let values = xs
        .par_iter()
        .map(|x| g(x, prec))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample::real(sup_abs(values, prec.bits())))
}

/// sup over lattice x̂ with |x| ≤ A of (1 + |x|^{M+2}) |√N ρ(x̂) − φ^M(x)|.
fn thm1_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let bits = prec.bits();
    let table = EdgeworthTable::new(&c.p, c.m)?;
    let series = PetrovSeries::new(&table, c.m, 0, prec)?;
    let root_n = Float::with_val(bits, big_n).sqrt();
    let weight = |x: &Float| Float::with_val(bits, x.abs_ref()).pow(c.m + 2) + 1u32;
    if !matches!(sampling, Sampling::Lattice) {
        return point_residual(c, sampling, big_n, prec, |x, prec| {
            let (xhat, xs) = snap_to_lattice(big_n, &c.p, x, prec)?;
            let rho = rho_real(&Float::with_val(bits, xhat), big_n, &c.p, prec)?;
            Ok((rho * &root_n - series.eval(big_n, &xs)) * weight(&xs))
        });
    }
    let (lo, hi) = lattice_range(c, big_n, prec)?;
    let guarded = prec.guarded(32);
    let gbits = guarded.bits();
    let q = complement(&c.p);
    let ratio = rational_to_real(&Rational::from(&c.p / &q), guarded);
    let mut rho = rho_real(&Float::with_val(gbits, lo), big_n, &c.p, guarded)?;
    let np = Rational::from(big_n) * &c.p;
    let scale = rational_to_real(&(two_pq(&c.p) * Rational::from(big_n)), prec).sqrt();
    let mut sup = Float::new(bits);
    for xhat in lo..=hi {
        let x = rational_to_real(&(Rational::from(xhat) - &np), prec) / &scale;
        let r = Float::with_val(bits, &rho * &root_n) - series.eval(big_n, &x);
        let r = r.abs() * weight(&x);
        if r > sup {
            sup = r;
        }
        // ρ(x̂+1) = ρ(x̂) (N − x̂)/(x̂ + 1) · p/q
        rho *= Float::with_val(gbits, big_n as i64 - xhat) / Float::with_val(gbits, xhat + 1);
        rho *= &ratio;
    }
    Ok(Sample::real(sup))
}

fn lattice_range(c: &SweepConfig, big_n: u64, prec: Precision) -> Result<(i64, i64)> {
    let np = rational_to_real(&(Rational::from(big_n) * &c.p), prec);
    let half = rational_to_real(&(two_pq(&c.p) * Rational::from(big_n)), prec).sqrt()
        * rational_to_real(&c.a, prec);
    let to_i = |f: Float| {
        f.to_integer()
            .and_then(|i| i.to_i64())
            .ok_or_else(|| Error::Domain("lattice range is not representable".into()))
    };
    let lo = to_i(Float::with_val(prec.bits(), &np - &half).ceil())?.max(0);
    let hi = to_i(Float::with_val(prec.bits(), &np + &half).floor())?.min(big_n as i64);
    ensure!(lo <= hi, "no lattice point with |x| <= A at N = {big_n}");
    Ok((lo, hi))
}

/// sup over x of |(d/dx)^r √N ρ(x̂(x)) − φ^M_r(x)|, the derivative from a
/// central difference of the log-Gamma weight at raised precision.
fn thm1_diff_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let table = EdgeworthTable::new(&c.p, c.m)?;
    let series = PetrovSeries::new(&table, c.m, c.r, prec)?;
    let r = c.r;
    let work = Precision::new(prec.bits().max(512) + 48 * r + 64)?;
    let wbits = work.bits();
    let delta = Float::with_val(wbits, Float::i_exp(1, -40));
    let root_n = Float::with_val(wbits, big_n).sqrt();
    point_residual(c, sampling, big_n, prec, |x, prec| {
        let x = Float::with_val(wbits, x);
        let mut acc = Float::new(wbits);
        for j in 0..=r {
            let offset = Float::with_val(wbits, f64::from(r) / 2.0 - f64::from(j)) * &delta;
            let xj = Float::with_val(wbits, &x + &offset);
            let xhat = xhat_of(&xj, big_n, &c.p);
            let f = rho_real(&xhat, big_n, &c.p, work)?;
            let coef = Float::with_val(wbits, binomial(u64::from(r), i64::from(j)));
            if j % 2 == 0 {
                acc += coef * f;
            } else {
                acc -= coef * f;
            }
        }
        let deriv = acc * &root_n / Float::with_val(wbits, delta.clone().pow(r));
        let approx = series.eval(big_n, &Float::with_val(prec.bits(), &x));
        Ok(Float::with_val(prec.bits(), deriv - approx))
    })
}

fn thm2_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let t2 = Theorem2::new(c.n, c.m, &c.p, c.psi_bound, prec)?;
    ensure!(u64::from(c.n) <= big_n, "n exceeds N = {big_n}");
    point_residual(c, sampling, big_n, prec, |x, prec| {
        let (xhat, xs) = snap_to_lattice(big_n, &c.p, x, prec)?;
        let exact = weighted_krawtchouk(c.n, big_n, &c.p, xhat, prec)?;
        Ok(exact - t2.eval(big_n, &xs))
    })
}

fn cor1_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let params = KrawtchoukParams::new(c.p.clone(), big_n, c.n)?;
    match sampling {
        Sampling::FixedV(v) => {
            let xhat = Rational::from(big_n) * &c.p + v;
            let exact = krawtchouk_hypergeometric(&params, &xhat);
            let approx = corollary1_exact(c.n, &c.p, big_n, v, c.form)?;
            Ok(Sample::exact(rational_to_real(&(exact - approx), prec)))
        }
        _ => {
            let v = v_of(sampling, big_n, &c.p, prec)?;
            let xhat = rational_to_real(&(Rational::from(big_n) * &c.p), prec) + &v;
            let exact = krawtchouk_real(&params, &xhat, prec.guarded(32))?;
            let approx = corollary1_eval(c.n, &c.p, big_n, &v, c.form)?;
            Ok(Sample::real(Float::with_val(prec.bits(), exact - approx)))
        }
    }
}

fn cor2_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let v = match sampling {
        Sampling::FixedV(v) => v.clone(),
        other => {
            return Err(Error::Domain(format!(
                "cor2 needs a fixed rational v, got '{other}'"
            )))
        }
    };
    let exact = shifted_krawtchouk_direct(c.n, &c.p, big_n, c.i, &v)?;
    let approx = corollary2_exact(c.n, &c.p, big_n, c.i, &v, c.form)?;
    Ok(Sample::exact(rational_to_real(&(exact - approx), prec)))
}

/// sup over x of |√N ρ(x̂(x)) / φ^M(x) − 1| on the real segment.
fn lemma1_residual(
    c: &SweepConfig,
    sampling: &Sampling,
    big_n: u64,
    prec: Precision,
) -> Result<Sample> {
    let table = EdgeworthTable::new(&c.p, c.m)?;
    let series = PetrovSeries::new(&table, c.m, 0, prec)?;
    let root_n = Float::with_val(prec.bits(), big_n).sqrt();
    point_residual(c, sampling, big_n, prec, |x, prec| {
        let xhat = xhat_of(x, big_n, &c.p);
        let rho = rho_real(&xhat, big_n, &c.p, prec)?;
        let phi = series.eval(big_n, x);
        Ok(Float::with_val(prec.bits(), rho * &root_n / phi) - 1u32)
    })
}

/// max over 0 ≤ i, j ≤ N of |Σ k_i k_j ρ − C(N,j)(pq)^j δ_ij|, exactly.
fn orthogonality_report(c: &SweepConfig) -> Result<ConvergenceReport> {
    let big_n = c.big_n;
    ensure!(big_n >= 1, "N must be positive");
    let pairs: Vec<(u32, u32)> = (0..=big_n as u32)
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .collect();
    let worst = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Rational> {
            let s = orthogonality_sum(big_n, &c.p, i, j)?;
            let expected = if i == j {
                orthogonality_norm(big_n, &c.p, j)
            } else {
                Rational::new()
            };
            Ok((s - expected).abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or_default();
    let residual = rational_to_real(&worst, c.prec);
    let verdict = if worst == 0 {
        Verdict::Exact
    } else {
        Verdict::Fail
    };
    let shown = crate::arith::format_real(&residual, 17);
    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        claim: Claim::Orthogonality.tag().to_string(),
        params: params_of(Claim::Orthogonality, c),
        precision_bits: c.prec.bits(),
        grid: GridSpec {
            base: big_n,
            ratio: 1,
            count: 1,
        },
        sampling: "all pairs 0 <= i, j <= N".to_string(),
        weight_exponent: 0.0,
        fit_weighted: false,
        rows: vec![ReportRow {
            n: big_n,
            residual: shown.clone(),
            weighted_residual: shown,
            exact: true,
        }],
        fit: None,
        target: None,
        weighted_decreasing: true,
        monotone: true,
        exact_hits: if worst == 0 { vec![big_n] } else { vec![] },
        precision_check: None,
        verdict,
        notes: vec![format!("{} pairs checked in exact arithmetic", pairs.len())],
        wall_time_ms: None,
    })
}

use rug::ops::Pow;
