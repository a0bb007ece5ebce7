use std::fmt;

use rug::{Float, Rational};

use crate::arith::{
    binomial, complement, falling_factorial, two_pq, AsymptoticSeries, RadicalCoeff, VPoly,
};
use crate::diffcalc::a_coefficient;
use crate::edgeworth::EdgeworthTable;
use crate::error::{ensure, Error, Result};

/// Largest ε-order the engine is willing to build.
const MAX_ORDER: i32 = 48;

/// Error term attached to an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualOrder {
    /// Every nonzero term is present; the expansion equals k_n identically.
    Exact,
    /// The omitted part is O(N^k).
    BigO(i64),
    /// The omitted part is o(N^k).
    LittleO(i64),
}

impl fmt::Display for ResidualOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualOrder::Exact => write!(f, "exact"),
            ResidualOrder::BigO(k) => write!(f, "O(N^{k})"),
            ResidualOrder::LittleO(k) => write!(f, "o(N^{k})"),
        }
    }
}

/// Range of v in which an expansion is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// |v| ≤ A√N, i.e. |x| ≤ A for a fixed A.
    BoundedX,
    /// |v| ≤ ε(N)N^{1/3} with ε(N) → 0.
    SmallV,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::BoundedX => write!(f, "|v| <= A*sqrt(N)"),
            Regime::SmallV => write!(f, "|v| <= eps(N)*N^(1/3), eps(N) -> 0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionTerm {
    pub n_power: i64,
    pub coeff: VPoly,
}

/// k_n(Np + v) = Σ_j c_{j+1}(v) N^{[n/2]−j} + residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionResult {
    pub n: u32,
    pub p: Rational,
    /// Nonzero terms by decreasing power of N.
    pub terms: Vec<ExpansionTerm>,
    pub residual: ResidualOrder,
    pub regime: Regime,
}

impl ExpansionResult {
    pub fn leading_power(&self) -> i64 {
        i64::from(self.n / 2)
    }

    /// c_j(v) (1-based), the coefficient of N^{[n/2]−j+1}.
    pub fn c(&self, j: usize) -> VPoly {
        let power = self.leading_power() + 1 - j as i64;
        self.coeff_of(power)
    }

    pub fn coeff_of(&self, n_power: i64) -> VPoly {
        self.terms
            .iter()
            .find(|t| t.n_power == n_power)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(VPoly::zero)
    }

    pub fn eval(&self, big_n: &Rational, v: &Rational) -> Rational {
        let mut acc = Rational::new();
        for t in &self.terms {
            acc += t.coeff.eval(v) * pow_i(big_n, t.n_power);
        }
        acc
    }

    pub fn eval_real(&self, big_n: u64, v: &Float) -> Float {
        let bits = v.prec();
        let mut acc = Float::new(bits);
        for t in &self.terms {
            let np = Float::with_val(bits, big_n).pow(t.n_power as i32);
            acc += t.coeff.eval_real(v) * np;
        }
        acc
    }
}

fn pow_i(x: &Rational, k: i64) -> Rational {
    let mut acc = Rational::from(1);
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        acc.recip()
    } else {
        acc
    }
}

use rug::ops::Pow;

/// Substitutes x = v·ε/w into a polynomial in x with coefficients in ℚ(w):
/// the x^d coefficient c_d becomes c_d w^{−d} v^d at ε^d.
fn substitute_scaled(g: &RadicalCoeff, truncation: i32) -> AsymptoticSeries {
    let w_sq = g.w_sq();
    let len = g
        .rational_part()
        .coeffs()
        .len()
        .max(g.radical_part().coeffs().len());
    let mut out = AsymptoticSeries::zero(w_sq, Some(truncation));
    for d in 0..len {
        if d as i32 >= truncation {
            break;
        }
        let a = g.rational_part().coeff(d);
        let b = g.radical_part().coeff(d);
        let c = RadicalCoeff::new(VPoly::monomial(a, d), VPoly::monomial(b, d), w_sq.clone())
            .mul(&RadicalCoeff::w_pow(-(d as i32), w_sq));
        out.add_term(d as i32, c);
    }
    out
}

/// ψ·(d/dx)^r ρ as a formal series: Σ_ν g̃_{ν,r}(vε/w) ε^ν, known below
/// ε^truncation.
pub fn derivative_series(p: &Rational, r: u32, truncation: i32) -> Result<AsymptoticSeries> {
    ensure!(truncation >= 1, "truncation order must be positive");
    ensure!(
        truncation <= MAX_ORDER,
        "truncation order {truncation} exceeds {MAX_ORDER}"
    );
    let table = EdgeworthTable::new(p, (truncation - 1) as u32)?;
    derivative_series_with(&table, r, truncation)
}

fn derivative_series_with(
    table: &EdgeworthTable,
    r: u32,
    truncation: i32,
) -> Result<AsymptoticSeries> {
    let mut acc = AsymptoticSeries::zero(table.w_sq(), Some(truncation));
    for nu in 0..truncation {
        let g = table.g_tilde(nu as u32, r)?;
        acc = acc.add(&substitute_scaled(&g, truncation - nu).shift(nu));
    }
    Ok(acc)
}

/// Ψ_s = Σ_i a_{s,i} h^{s+i} Σ_ν g̃_{ν,s+i}(x) N^{−ν/2} with h = ε/w, the
/// formal expansion of √(2π)σ e^{x²} √N Δ^s ρ.
fn psi_series(table: &EdgeworthTable, s: u32, truncation: i32) -> Result<AsymptoticSeries> {
    let w_sq = table.w_sq();
    let mut acc = AsymptoticSeries::zero(w_sq, Some(truncation));
    let s = s as i32;
    let mut i = 0i32;
    while s + i < truncation {
        let a = a_coefficient(s as u32, i as u32);
        let hw = RadicalCoeff::w_pow(-(s + i), w_sq).scale(&a);
        let inner = derivative_series_with(table, (s + i) as u32, truncation - s - i)?;
        acc = acc.add(&inner.shift(s + i).scale(&hw));
        i += 1;
    }
    Ok(acc)
}

/// (x̂ + s)^{(s)̲} with x̂ = pε^{−2} + v, an exact Laurent polynomial.
fn falling_series(p: &Rational, s: u32, w_sq: &Rational) -> AsymptoticSeries {
    let mut acc = AsymptoticSeries::one(w_sq, None);
    for j in 0..s {
        let shift = Rational::from(s - j);
        let factor = AsymptoticSeries::from_terms(
            w_sq,
            [
                (-2, RadicalCoeff::from_rational(p.clone(), w_sq)),
                (
                    0,
                    RadicalCoeff::from_poly(
                        VPoly::from_coeffs(vec![shift, Rational::from(1)]),
                        w_sq,
                    ),
                ),
            ],
            None,
        );
        acc = acc.mul(&factor);
    }
    acc
}

/// The c_j(v) of k_n(Np + v) = Σ_j c_{j+1}(v) N^{[n/2]−j}, for j < `terms`.
///
/// ρ·k_n is expanded from the Leibniz form with every Δ^s ρ replaced by its
/// formal series, ρ by the Petrov series, and the quotient is taken in the
/// ring of truncated Laurent series in ε = N^{−1/2} over ℚ[v, w]/(w² − 2pq).
/// The Gaussian prefactor is common to both and cancels.
pub fn symbolic_expansion(n: u32, terms: u32, p: &Rational) -> Result<ExpansionResult> {
    crate::arith::check_probability(p)?;
    ensure!(terms >= 1, "at least one term must be requested");
    let lead = 2 * (n / 2) as i32;
    let j = -lead + 2 * terms as i32;
    let needed = j + n as i32;
    if needed > MAX_ORDER {
        return Err(Error::Truncation {
            required: i64::from(needed),
            available: i64::from(MAX_ORDER),
        });
    }
    let w_sq = two_pq(p);
    let table = EdgeworthTable::new(p, (needed - 1).max(0) as u32)?;

    let mut numer = AsymptoticSeries::zero(&w_sq, Some(j));
    for k in 0..=n {
        let s = n - k;
        let weight = Rational::from(binomial(u64::from(n), i64::from(k)))
            * falling_factorial(&Rational::from(n), k);
        if weight == 0 {
            continue;
        }
        let psi = psi_series(&table, s, j + 2 * s as i32)?;
        let term = falling_series(p, s, &w_sq)
            .mul(&psi)
            .scale_rational(&weight);
        numer = numer.add(&term);
    }
    let q = complement(p);
    let mut front = Rational::from(1);
    for t in 1..=n {
        front *= -q.clone();
        front /= t;
    }
    let numer = numer.scale_rational(&front);
    let rho = derivative_series_with(&table, 0, j + lead)?;
    let quotient = numer.div(&rho)?;

    ensure!(
        quotient.truncation_order().is_some_and(|t| t >= j),
        "series division lost accuracy: known below ε^{:?}, needed ε^{j}",
        quotient.truncation_order()
    );
    let mut out = Vec::new();
    for (e, c) in quotient.terms() {
        if e >= j {
            continue;
        }
        if e % 2 != 0 {
            return Err(invariant(n, format!("odd power ε^{e} survives")));
        }
        if !c.radical_part().is_zero() {
            return Err(invariant(n, format!("w-odd part survives at ε^{e}")));
        }
        if e < -lead {
            return Err(invariant(n, format!("term ε^{e} below the leading order")));
        }
        if e > 0 {
            return Err(invariant(
                n,
                format!("positive power ε^{e} in a polynomial"),
            ));
        }
        out.push(ExpansionTerm {
            n_power: i64::from(-e / 2),
            coeff: c.rational_part().clone(),
        });
    }
    out.sort_by_key(|t| std::cmp::Reverse(t.n_power));
    let residual = if j > 0 {
        ResidualOrder::Exact
    } else {
        ResidualOrder::BigO(i64::from(-j / 2))
    };
    Ok(ExpansionResult {
        n,
        p: p.clone(),
        terms: out,
        residual,
        regime: Regime::BoundedX,
    })
}

fn invariant(n: u32, what: String) -> Error {
    Error::Domain(format!("expansion of k_{n}: {what}"))
}
