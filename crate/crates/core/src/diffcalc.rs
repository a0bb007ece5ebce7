//! Forward differences, the operator series Δ_h^s = (e^{hD} − 1)^s and the
//! truncated compositions ψ_s^K with the differentiated Petrov expansion.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::arith::{binomial, rational_to_real, two_pq, Precision};
use crate::edgeworth::{EdgeworthTable, PetrovSeries};
use crate::error::{Error, Result};

/// Δ^s f(x0) with step `step`: Σ_j (−1)^{s−j} C(s, j) f(x0 + j·step).
pub fn forward_difference<F>(f: F, s: u32, x0: &Rational, step: &Rational) -> Result<Rational>
where
    F: Fn(&Rational) -> Result<Rational>,
{
    let mut acc = Rational::new();
    for j in 0..=s {
        let c = Rational::from(binomial(u64::from(s), i64::from(j)));
        let point = Rational::from(step * j) + x0;
        let term = c * f(&point)?;
        if (s - j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Δ^s on a tabulated sequence: values at indices start, start + stride, …
pub fn forward_difference_table(
    values: &[Rational],
    s: u32,
    start: usize,
    stride: usize,
) -> Result<Rational> {
    let last = start + s as usize * stride;
    if last >= values.len() {
        return Err(Error::Tabulation(format!(
            "Δ^{s} from index {start} with stride {stride} needs index {last}, table has {}",
            values.len()
        )));
    }
    forward_difference(
        |x| Ok(values[x.numer().to_usize().expect("index fits")].clone()),
        s,
        &Rational::from(start),
        &Rational::from(stride),
    )
}

/// Real-valued Δ_h^s f(x).
pub fn forward_difference_real<F>(f: F, s: u32, x: &Float, h: &Float) -> Float
where
    F: Fn(&Float) -> Float,
{
    let bits = x.prec();
    let mut acc = Float::new(bits);
    for j in 0..=s {
        let c = Float::with_val(bits, binomial(u64::from(s), i64::from(j)));
        let point = Float::with_val(bits, h * j) + x;
        let term = c * f(&point);
        if (s - j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// a_{s,j}: the coefficient of t^{s+j} in (e^t − 1)^s.
pub fn a_coefficient(s: u32, j: u32) -> Rational {
    // (e^t − 1)^s = t^s ((e^t − 1)/t)^s; read off t^j of the second factor.
    let len = j as usize + 1;
    let mut fact = Rational::from(1);
    let base: Vec<Rational> = (0..len)
        .map(|k| {
            fact *= (k + 1) as u32;
            fact.clone().recip()
        })
        .collect();
    let mut power = vec![Rational::new(); len];
    power[0] = Rational::from(1);
    for _ in 0..s {
        let mut next = vec![Rational::new(); len];
        for (a, pa) in power.iter().enumerate() {
            if pa.cmp0().is_eq() {
                continue;
            }
            for (b, bb) in base.iter().enumerate().take(len - a) {
                next[a + b] += Rational::from(pa * bb);
            }
        }
        power = next;
    }
    power[j as usize].clone()
}

/// a_{s,j} = Σ s! Π_{r=1}^{j+1} (1/k_r!)(1/r!)^{k_r} over k_1 … k_{j+1} ≥ 0 with
/// Σ k_r = s and Σ (r − 1) k_r = j (multinomial expansion of (Σ t^r/r!)^s).
pub fn a_coefficient_multinomial(s: u32, j: u32) -> Rational {
    fn rec(r: u32, max_r: u32, s_left: u32, j_left: u32, acc: Rational, total: &mut Rational) {
        if r > max_r {
            if s_left == 0 && j_left == 0 {
                *total += acc;
            }
            return;
        }
        let mut r_fact = Rational::from(1);
        for i in 1..=r {
            r_fact *= i;
        }
        let inv = r_fact.recip();
        let mut term = acc;
        let mut k = 0u32;
        loop {
            let weight = (r - 1) * k;
            if k > s_left || weight > j_left {
                break;
            }
            rec(
                r + 1,
                max_r,
                s_left - k,
                j_left - weight,
                term.clone(),
                total,
            );
            k += 1;
            term *= &inv;
            term /= k;
        }
    }
    let mut s_fact = Rational::from(1);
    for i in 1..=s {
        s_fact *= i;
    }
    let mut total = Rational::new();
    rec(1, j + 1, s, j, s_fact, &mut total);
    total
}

/// Memoized a_{s,j} for s ≤ max_s, j ≤ max_j.
#[derive(Clone, Debug)]
pub struct DiffCoeffTable {
    entries: BTreeMap<(u32, u32), Rational>,
}

impl DiffCoeffTable {
    pub fn new(max_s: u32, max_j: u32) -> Self {
        let mut entries = BTreeMap::new();
        for s in 0..=max_s {
            for j in 0..=max_j {
                entries.insert((s, j), a_coefficient(s, j));
            }
        }
        DiffCoeffTable { entries }
    }

    pub fn get(&self, s: u32, j: u32) -> Rational {
        self.entries
            .get(&(s, j))
            .cloned()
            .unwrap_or_else(|| a_coefficient(s, j))
    }
}

/// Σ_{i=0}^{K} a_{s,i} f^{(s+i)}(x) h^{s+i}, given f^{(s)}, …, f^{(s+K)} at x.
pub fn truncated_delta_h(derivatives: &[Float], s: u32, h: &Float) -> Float {
    let bits = h.prec();
    let mut acc = Float::new(bits);
    let mut h_pow = h.clone().pow(s);
    for (i, d) in derivatives.iter().enumerate() {
        let a = a_coefficient(s, i as u32);
        acc += Float::with_val(bits, d * &h_pow) * a;
        h_pow *= h;
    }
    acc
}

/// Inner summation bound of ψ: the composite over i ≤ K uses ν ≤ K − 1 − i.
/// Taking K = M + 1 gives the ν ≤ M − i bound of the Δ^s ρ expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSpec {
    pub s: u32,
    pub k: u32,
    pub p: Rational,
    pub big_n: u64,
}

/// Numeric ψ_s^K(x) = Σ_{i=0}^{K} a_{s,i} Σ_{ν=0}^{K−1−i} g̃_{ν,s+i}(x) N^{−ν/2} h^{s+i}
/// with h = (2Npq)^{−1/2}. Empty inner sums contribute zero, so ψ_s^0 = 0.
#[derive(Clone, Debug)]
pub struct PsiEvaluator {
    s: u32,
    k: u32,
    w_sq: Rational,
    rows: Vec<(Rational, PetrovSeries)>,
}

impl PsiEvaluator {
    pub fn new(table: &EdgeworthTable, s: u32, k: u32, prec: Precision) -> Result<Self> {
        let mut rows = Vec::new();
        for i in 0..k {
            let max_nu = k - 1 - i;
            let series = PetrovSeries::new(table, max_nu, s + i, prec)?;
            rows.push((a_coefficient(s, i), series));
        }
        Ok(PsiEvaluator {
            s,
            k,
            w_sq: table.w_sq().clone(),
            rows,
        })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// ψ_s^K(x) at sample size N.
    pub fn eval(&self, big_n: u64, x: &Float) -> Float {
        let bits = x.prec();
        let h = rational_to_real(&(Rational::from(big_n) * &self.w_sq), bits_prec(bits))
            .sqrt()
            .recip();
        let mut acc = Float::new(bits);
        let mut h_pow = h.clone().pow(self.s);
        for (a, series) in &self.rows {
            acc += series.bracket(big_n, x) * &h_pow * a;
            h_pow *= &h;
        }
        acc
    }

    /// (1/(√(2π)σ)) e^{−x²} ψ_s^K(x), the approximation of √N Δ_h^s ρ(x̂(x)).
    pub fn scaled(&self, big_n: u64, x: &Float) -> Float {
        match self.rows.first() {
            Some((_, series)) => series.gaussian(x) * self.eval(big_n, x),
            None => Float::new(x.prec()),
        }
    }
}

fn bits_prec(bits: u32) -> Precision {
    Precision::new(bits.max(Precision::MIN_BITS)).expect("at least the minimum")
}

pub fn psi(spec: &PsiSpec, x: &Float, prec: Precision) -> Result<Float> {
    let table = EdgeworthTable::new(&spec.p, spec.k.saturating_sub(1))?;
    Ok(PsiEvaluator::new(&table, spec.s, spec.k, prec)?
        .eval(spec.big_n, &Float::with_val(prec.bits(), x)))
}

/// (1/(√(2π)σ)) e^{−x²} Σ_{i=0}^{M+1} a_{s,i} Σ_{ν=0}^{M−i} g̃_{ν,s+i}(x) N^{−ν/2} h^{s+i},
/// the expansion of √N Δ_h^s ρ(x̂(x)). Identical to the scaled ψ_s^{M+1}.
pub fn delta_s_rho_expansion(
    s: u32,
    m: u32,
    big_n: u64,
    p: &Rational,
    x: &Float,
    prec: Precision,
) -> Result<Float> {
    let table = EdgeworthTable::new(p, m)?;
    let x = Float::with_val(prec.bits(), x);
    Ok(PsiEvaluator::new(&table, s, m + 1, prec)?.scaled(big_n, &x))
}

/// √N Δ^s ρ(x̂) at integer x̂, via log-Gamma weights at working precision.
pub fn sqrt_n_delta_rho(
    s: u32,
    big_n: u64,
    p: &Rational,
    xhat: i64,
    prec: Precision,
) -> Result<Float> {
    let guarded = prec.guarded(64);
    let bits = guarded.bits();
    let values = (0..=i64::from(s))
        .map(|j| crate::stirling::rho_real(&Float::with_val(bits, xhat + j), big_n, p, guarded))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Float::new(bits);
    for (j, v) in values.iter().enumerate() {
        let c = Float::with_val(bits, binomial(u64::from(s), j as i64));
        if (s as usize - j).is_multiple_of(2) {
            acc += c * v;
        } else {
            acc -= c * v;
        }
    }
    Ok(Float::with_val(
        prec.bits(),
        acc * Float::with_val(bits, big_n).sqrt(),
    ))
}

/// h = (2Npq)^{−1/2}.
pub fn step_h(big_n: u64, p: &Rational, prec: Precision) -> Float {
    rational_to_real(&(two_pq(p) * Rational::from(big_n)), prec)
        .sqrt()
        .recip()
}
