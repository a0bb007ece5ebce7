//! Hermite-type expansions of ρ·k_n and k_n: the numeric Leibniz-form
//! approximation, the formal N-power expansion, and the closed forms for the
//! first terms.

mod corollary;
mod symbolic;

pub use corollary::{
    corollary1_eval, corollary1_exact, corollary1_terms, corollary2_eval, corollary2_exact,
    derivative_closed_form, m_v_simplified, shifted_krawtchouk_direct,
    shifted_krawtchouk_via_relation, CorollaryCoeffs,
};
pub use symbolic::{
    derivative_series, symbolic_expansion, ExpansionResult, ExpansionTerm, Regime, ResidualOrder,
};

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{
    binomial, check_probability, complement, falling_factorial, falling_factorial_real,
    rational_to_real, Precision,
};
use crate::diffcalc::PsiEvaluator;
use crate::edgeworth::EdgeworthTable;
use crate::error::{ensure, Result};
use crate::orthopoly::{
    hermite_real, krawtchouk_hypergeometric, krawtchouk_real, KrawtchoukParams,
};
use crate::stirling::{rho_real, xhat_of};

/// How many difference-operator terms each ψ_{n−k} carries.
///
/// With `Literal`, ψ^M keeps a_{s,i} for i < M; its error is one half-order
/// too large for the stated rate. `Matched` uses ψ^{M+1}, which is the
/// Δ^s ρ expansion to relative order N^{−(M+1)/2} and delivers
/// O(N^{(n−M−2)/2}).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiBound {
    Literal,
    #[default]
    Matched,
}

/// Precomputed approximation of ρ(x̂)k_n(x̂) of order M:
/// (e^{−x²}/(√(2πN)σ)) ((−q)^n/n!) Σ_{k ≤ min(M,n)} C(n,k) n^{k̲} (x̂+n−k)^{(n−k)̲} ψ_{n−k}(x).
#[derive(Clone, Debug)]
pub struct Theorem2 {
    n: u32,
    m: u32,
    p: Rational,
    front: Rational,
    rows: Vec<(u32, Rational, PsiEvaluator)>,
    prec: Precision,
}

impl Theorem2 {
    pub fn new(n: u32, m: u32, p: &Rational, bound: PsiBound, prec: Precision) -> Result<Self> {
        check_probability(p)?;
        let k_terms = match bound {
            PsiBound::Literal => m,
            PsiBound::Matched => m + 1,
        };
        let table = EdgeworthTable::new(p, k_terms.saturating_sub(1))?;
        let mut rows = Vec::new();
        for k in 0..=m.min(n) {
            let weight = Rational::from(binomial(u64::from(n), i64::from(k)))
                * falling_factorial(&Rational::from(n), k);
            rows.push((
                n - k,
                weight,
                PsiEvaluator::new(&table, n - k, k_terms, prec)?,
            ));
        }
        let q = complement(p);
        let mut front = Rational::from(1);
        for t in 1..=n {
            front *= -q.clone();
            front /= t;
        }
        Ok(Theorem2 {
            n,
            m,
            p: p.clone(),
            front,
            rows,
            prec,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn eval(&self, big_n: u64, x: &Float) -> Float {
        let bits = self.prec.bits();
        let x = Float::with_val(bits, x);
        let xhat = xhat_of(&x, big_n, &self.p);
        let root_n = Float::with_val(bits, big_n).sqrt();
        let mut acc = Float::new(bits);
        for (s, weight, psi) in &self.rows {
            let ff = falling_factorial_real(&Float::with_val(bits, &xhat + *s), *s);
            acc += psi.scaled(big_n, &x) * ff * weight;
        }
        acc / root_n * &self.front
    }
}

pub fn theorem2_eval(
    n: u32,
    m: u32,
    big_n: u64,
    p: &Rational,
    x: &Float,
    bound: PsiBound,
    prec: Precision,
) -> Result<Float> {
    Ok(Theorem2::new(n, m, p, bound, prec)?.eval(big_n, x))
}

/// ρ(x̂)k_n(x̂) at an integer x̂: exact k_n, ρ from log-Gamma at working
/// precision.
pub fn weighted_krawtchouk(
    n: u32,
    big_n: u64,
    p: &Rational,
    xhat: i64,
    prec: Precision,
) -> Result<Float> {
    let params = KrawtchoukParams::new(p.clone(), big_n, n)?;
    let k = krawtchouk_hypergeometric(&params, &Rational::from(xhat));
    let guarded = prec.guarded(32);
    let rho = rho_real(&Float::with_val(guarded.bits(), xhat), big_n, p, guarded)?;
    Ok(Float::with_val(
        prec.bits(),
        rho * rational_to_real(&k, guarded),
    ))
}

/// The lattice point x̂ = round(Np + √(2Npq)x) and its exact x coordinate.
pub fn snap_to_lattice(
    big_n: u64,
    p: &Rational,
    x: &Float,
    prec: Precision,
) -> Result<(i64, Float)> {
    let bits = prec.bits();
    let xhat = xhat_of(&Float::with_val(bits, x), big_n, p);
    let rounded = xhat
        .to_integer()
        .and_then(|i| i.to_i64())
        .ok_or_else(|| crate::Error::Domain(format!("x̂ = {xhat} is not representable")))?;
    ensure!(
        rounded >= 0 && rounded as u64 <= big_n,
        "x̂ = {rounded} lies outside [0, {big_n}]"
    );
    let v = Rational::from(rounded) - Rational::from(big_n) * p;
    let scale = rational_to_real(&(crate::arith::two_pq(p) * Rational::from(big_n)), prec).sqrt();
    Ok((rounded, rational_to_real(&v, prec) / scale))
}

/// (2/(Npq))^{n/2} n! k_n(x̂) together with its limit H_n(x).
pub fn classical_limit(
    n: u32,
    big_n: u64,
    p: &Rational,
    x: &Float,
    prec: Precision,
) -> Result<(Float, Float)> {
    let bits = prec.bits();
    let x = Float::with_val(bits, x);
    let params = KrawtchoukParams::new(p.clone(), big_n, n)?;
    let xhat = xhat_of(&x, big_n, p);
    let k = krawtchouk_real(&params, &xhat, prec.guarded(32))?;
    let npq = rational_to_real(&(Rational::from(big_n) * p * complement(p)), prec);
    let scale = Float::with_val(bits, 2u32 / npq).pow(Float::with_val(bits, n) / 2u32);
    let fact = Float::with_val(bits, Integer::from(Integer::factorial(n)));
    let lhs = Float::with_val(bits, k * scale * fact);
    Ok((lhs, hermite_real(n, &x)))
}

/// Both sides of (2Npqπ n!)^{1/2}(Npq)^{−n/2} ρ(x̂) e^{x²/2} k_n(x̂)
/// ≈ e^{−x²/2}(2^n n!)^{−1/2} H_n(x), with x̂ = Np + √(2Npq)x.
pub fn sharapudinov_eval(
    n: u32,
    big_n: u64,
    p: &Rational,
    x: &Float,
    prec: Precision,
) -> Result<(Float, Float)> {
    let guarded = prec.guarded(32);
    let bits = guarded.bits();
    let x = Float::with_val(bits, x);
    let params = KrawtchoukParams::new(p.clone(), big_n, n)?;
    let xhat = xhat_of(&x, big_n, p);
    let k = krawtchouk_real(&params, &xhat, guarded)?;
    let rho = rho_real(&xhat, big_n, p, guarded)?;
    let npq = rational_to_real(&(Rational::from(big_n) * p * complement(p)), guarded);
    let fact = Float::with_val(bits, Integer::from(Integer::factorial(n)));
    let pi = Float::with_val(bits, rug::float::Constant::Pi);
    let half_x2 = Float::with_val(bits, x.square_ref()) / 2u32;
    let half_n = Float::with_val(bits, n) / 2u32;
    let front = (Float::with_val(bits, &npq * 2u32) * pi * &fact).sqrt() / npq.clone().pow(&half_n);
    let lhs = front * rho * Float::with_val(bits, half_x2.exp_ref()) * k;
    let two_n = Float::with_val(bits, Float::i_exp(1, n as i32));
    let rhs = Float::with_val(bits, (-half_x2).exp()) / (two_n * fact).sqrt() * hermite_real(n, &x);
    Ok((
        Float::with_val(prec.bits(), lhs),
        Float::with_val(prec.bits(), rhs),
    ))
}

/// ψ(x)ρ(x̂) = √(2πN)σ e^{x²} ρ(x̂) at x̂ = Np + v, ρ from log-Gamma.
pub fn scaled_rho(p: &Rational, big_n: u64, v: &Float, prec: Precision) -> Result<Float> {
    let guarded = prec.guarded(32);
    let bits = guarded.bits();
    let v = Float::with_val(bits, v);
    let npq = rational_to_real(&(Rational::from(big_n) * p * complement(p)), guarded);
    let xhat = rational_to_real(&(Rational::from(big_n) * p), guarded) + &v;
    let x2 = Float::with_val(bits, v.square_ref()) / (Float::with_val(bits, &npq * 2u32));
    let pi = Float::with_val(bits, rug::float::Constant::Pi);
    let psi = Float::with_val(bits, npq * 2u32 * pi).sqrt() * x2.exp();
    let rho = rho_real(&xhat, big_n, p, guarded)?;
    Ok(Float::with_val(prec.bits(), psi * rho))
}

use rug::ops::Pow;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgeworth::petrov_density;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn degree_zero_is_the_petrov_density() {
        let prec = Precision::DEFAULT;
        let p = rat(3, 10);
        let x = Float::with_val(prec.bits(), 0.4);
        for m in 0..3 {
            let t = theorem2_eval(0, m, 4096, &p, &x, PsiBound::Matched, prec).unwrap();
            let phi = petrov_density(m, 4096, &p, &x, prec).unwrap()
                / Float::with_val(prec.bits(), 4096).sqrt();
            assert!(Float::with_val(prec.bits(), t - phi).abs() < 1e-60);
        }
    }

    #[test]
    fn extra_k_terms_vanish_beyond_n() {
        // The k-sum stops at min(M, n): M ≥ n only adds difference terms.
        let prec = Precision::DEFAULT;
        let p = rat(1, 3);
        let t = Theorem2::new(2, 5, &p, PsiBound::Matched, prec).unwrap();
        assert_eq!(t.rows.len(), 3);
    }

    #[test]
    fn lowest_order_reproduces_hermite_scaling() {
        // M = 0: ρ k_n ≈ Gaussian · (Npq/2)^{n/2} H_n(x)/n!.
        let prec = Precision::DEFAULT;
        let p = rat(3, 10);
        let big_n = 1u64 << 16;
        let x = Float::with_val(prec.bits(), 0.7);
        for n in 0..5u32 {
            let t = theorem2_eval(n, 0, big_n, &p, &x, PsiBound::Literal, prec).unwrap();
            assert!(t.is_zero() || n == 0 || t.is_finite());
            let m = theorem2_eval(n, 0, big_n, &p, &x, PsiBound::Matched, prec).unwrap();
            let phi = petrov_density(0, big_n, &p, &x, prec).unwrap()
                / Float::with_val(prec.bits(), big_n).sqrt();
            let npq = big_n as f64 * 0.21;
            let fact: f64 = (1..=n).map(f64::from).product();
            let expected =
                phi.to_f64() * (npq / 2.0).powf(f64::from(n) / 2.0) * hermite_real(n, &x).to_f64()
                    / fact;
            assert!((m.to_f64() / expected - 1.0).abs() < 0.05, "n={n}");
        }
    }

    #[test]
    fn residual_shrinks_with_order() {
        let prec = Precision::DEFAULT;
        let p = rat(3, 10);
        let big_n = 1u64 << 14;
        let x = Float::with_val(prec.bits(), 0.6);
        let (xhat, xs) = snap_to_lattice(big_n, &p, &x, prec).unwrap();
        let exact = weighted_krawtchouk(3, big_n, &p, xhat, prec).unwrap();
        let mut prev = f64::INFINITY;
        for m in 0..4 {
            let approx = theorem2_eval(3, m, big_n, &p, &xs, PsiBound::Matched, prec).unwrap();
            let err = Float::with_val(prec.bits(), &approx - &exact)
                .abs()
                .to_f64();
            assert!(err < prev, "M={m}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn classical_limit_converges() {
        let prec = Precision::DEFAULT;
        let p = rat(3, 10);
        let x = Float::with_val(prec.bits(), 0.7);
        let (a, h) = classical_limit(3, 1 << 10, &p, &x, prec).unwrap();
        let (b, _) = classical_limit(3, 1 << 16, &p, &x, prec).unwrap();
        let ea = Float::with_val(prec.bits(), &a - &h).abs();
        let eb = Float::with_val(prec.bits(), &b - &h).abs();
        assert!(eb < ea);
    }

    #[test]
    fn sharapudinov_sides_agree_at_degree_zero() {
        let prec = Precision::DEFAULT;
        let p = rat(1, 2);
        let x = Float::with_val(prec.bits(), 0);
        let (l, r) = sharapudinov_eval(0, 1 << 12, &p, &x, prec).unwrap();
        assert!((l.to_f64() - r.to_f64()).abs() < 1e-3);
        let (l, r) = sharapudinov_eval(2, 1 << 12, &p, &x, prec).unwrap();
        assert!((l.to_f64() - r.to_f64()).abs() < 1e-3);
    }

    #[test]
    fn scaled_rho_tracks_two_term_form() {
        let prec = Precision::DEFAULT;
        let p = rat(1, 3);
        let v = Float::with_val(prec.bits(), 1);
        for big_n in [3000u64, 30000] {
            let s = scaled_rho(&p, big_n, &v, prec).unwrap();
            let m = m_v_simplified(&p, big_n, &v).unwrap();
            let err = Float::with_val(prec.bits(), s - m).abs().to_f64();
            assert!(err * big_n as f64 * big_n as f64 > 0.0 && err * (big_n as f64) < 0.01);
        }
    }
}
