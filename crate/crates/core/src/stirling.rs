//! Stirling expansion of ln Γ and the real-axis pieces of the binomial
//! log-weight: F_m, r(τ), D(τ), Φ_m and the remainder S_N^0.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::arith::{bernoulli_number, check_probability, complement, rational_to_real, Precision};
use crate::error::{ensure, Result};
use crate::Form;

/// Correction order m and working precision for the fixed-order expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StirlingContext {
    m: u32,
    prec: Precision,
}

impl StirlingContext {
    pub const MAX_ORDER: u32 = 30;

    pub fn new(m: u32, prec: Precision) -> Result<Self> {
        ensure!(
            m <= Self::MAX_ORDER,
            "Stirling order m = {m} exceeds {}",
            Self::MAX_ORDER
        );
        Ok(StirlingContext { m, prec })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }
}

/// F_m(z) = Σ_{k=1}^{m} B_{2k} / (2k(2k−1) z^{2k−1}).
pub fn f_m(z: &Float, m: u32) -> Result<Float> {
    ensure!(!z.is_zero(), "F_m is undefined at z = 0");
    let bits = z.prec();
    let mut acc = Float::new(bits);
    let inv = Float::with_val(bits, z.recip_ref());
    let inv_sq = Float::with_val(bits, &inv * &inv);
    let mut power = inv;
    for k in 1..=m {
        let b = bernoulli_number(2 * k)?;
        let c = b / Rational::from(2 * u64::from(k) * (2 * u64::from(k) - 1));
        acc += Float::with_val(bits, &power * &c);
        power *= &inv_sq;
    }
    Ok(acc)
}

fn stirling_main(z: &Float) -> Float {
    let bits = z.prec();
    let ln_z = Float::with_val(bits, z.ln_ref());
    let half = Float::with_val(bits, z - 0.5f64);
    let ln_2pi = (Float::with_val(bits, Constant::Pi) * 2u32).ln();
    Float::with_val(bits, &half * &ln_z) - z + ln_2pi / 2u32
}

/// Lifts z to at least `threshold` with ln Γ(z) = ln Γ(z + k) − ln(z(z+1)…(z+k−1)),
/// returning the shifted argument and the logarithm to subtract.
fn shift_up(z: &Float, threshold: f64) -> (Float, Float) {
    let bits = z.prec();
    let mut shifted = z.clone();
    let mut product = Float::with_val(bits, 1);
    while shifted < threshold {
        product *= &shifted;
        shifted += 1u32;
    }
    (shifted, product.ln())
}

/// (z − ½) ln z − z + ½ ln 2π + F_m(z) after shifting z to at least 10.
/// Error O(z^{−2m−1}) at the shifted argument.
pub fn ln_gamma(z: &Float, ctx: &StirlingContext) -> Result<Float> {
    ensure!(*z > 0, "ln Γ needs z > 0, got {z}");
    let z = Float::with_val(ctx.prec.bits(), z);
    let (shifted, correction) = shift_up(&z, 10.0);
    Ok(stirling_main(&shifted) + f_m(&shifted, ctx.m)? - correction)
}

/// ln Γ(z) to about 2^{−bits} absolute accuracy: the argument is shifted
/// until the asymptotic series can reach that accuracy and terms are added
/// until they fall below it.
pub fn ln_gamma_precise(z: &Float, prec: Precision) -> Result<Float> {
    ensure!(*z > 0, "ln Γ needs z > 0, got {z}");
    let bits = prec.bits() + 32;
    let z = Float::with_val(bits, z);
    // The smallest term of the series is about e^{−2πz}.
    let threshold = f64::from(bits) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI) + 8.0;
    let (shifted, correction) = shift_up(&z, threshold);
    let mut acc = stirling_main(&shifted) - correction;
    let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let inv = Float::with_val(bits, shifted.recip_ref());
    let inv_sq = Float::with_val(bits, &inv * &inv);
    let mut power = inv;
    for k in 1u32.. {
        let b = bernoulli_number(2 * k)?;
        let c = b / Rational::from(2 * u64::from(k) * (2 * u64::from(k) - 1));
        let term = Float::with_val(bits, &power * &c);
        let small = Float::with_val(bits, term.abs_ref()) < tol;
        acc += term;
        if small {
            break;
        }
        power *= &inv_sq;
    }
    Ok(Float::with_val(prec.bits(), acc))
}

/// r(τ) = τ ln(τ/p) + (1−τ) ln((1−τ)/q) − (τ−p)²/(2pq).
pub fn r_tau(tau: &Float, p: &Rational) -> Result<Float> {
    check_probability(p)?;
    ensure!(*tau > 0 && *tau < 1, "r(τ) needs 0 < τ < 1, got {tau}");
    let bits = tau.prec();
    let q = complement(p);
    let pf = rational_to_real(p, prec_of(bits));
    let qf = rational_to_real(&q, prec_of(bits));
    let one_minus = Float::with_val(bits, 1 - tau);
    let a = Float::with_val(bits, tau / &pf).ln() * tau;
    let b = Float::with_val(bits, &one_minus / &qf).ln() * &one_minus;
    let d = Float::with_val(bits, tau - &pf);
    let quad = Float::with_val(bits, &d * &d) / Float::with_val(bits, &pf * &qf) / 2u32;
    Ok(a + b - quad)
}

/// D(τ) = ln(1 + (p−τ)(τ−q)/(pq)) = ln(τ(1−τ)/(pq)).
pub fn d_tau(tau: &Float, p: &Rational) -> Result<Float> {
    check_probability(p)?;
    let bits = tau.prec();
    let q = complement(p);
    let pq = rational_to_real(&Rational::from(p * &q), prec_of(bits));
    let pf = rational_to_real(p, prec_of(bits));
    let qf = rational_to_real(&q, prec_of(bits));
    let arg = Float::with_val(bits, &pf - tau) * Float::with_val(bits, tau - &qf) / &pq + 1u32;
    ensure!(
        arg > 0,
        "D(τ) needs a positive logarithm argument at τ = {tau}"
    );
    Ok(arg.ln())
}

fn prec_of(bits: u32) -> Precision {
    Precision::new(bits.max(Precision::MIN_BITS)).expect("at least the minimum")
}

/// x̂ = Np + √(2Npq)·x at the precision of `x`.
pub fn xhat_of(x: &Float, big_n: u64, p: &Rational) -> Float {
    let bits = x.prec();
    let np = rational_to_real(&(Rational::from(big_n) * p), prec_of(bits));
    let scale = rational_to_real(
        &(Rational::from(2 * big_n) * p * complement(p)),
        prec_of(bits),
    )
    .sqrt();
    np + scale * x
}

/// Φ_m(x) = F_m(N) − F_m(x̂) − F_m(N − x̂) − N r(x̂/N) − ½ D(x̂/N).
pub fn phi_m(x: &Float, big_n: u64, p: &Rational, ctx: &StirlingContext) -> Result<Float> {
    let bits = ctx.prec.bits();
    let x = Float::with_val(bits, x);
    let xhat = xhat_of(&x, big_n, p);
    let nf = Float::with_val(bits, big_n);
    ensure!(xhat > 0 && xhat < nf, "Φ_m needs 0 < x̂ < N, got x̂ = {xhat}");
    let tau = Float::with_val(bits, &xhat / &nf);
    let rest = Float::with_val(bits, &nf - &xhat);
    let r = r_tau(&tau, p)?;
    let d = d_tau(&tau, p)?;
    Ok(f_m(&nf, ctx.m)? - f_m(&xhat, ctx.m)? - f_m(&rest, ctx.m)? - r * &nf - d / 2u32)
}

/// −x² − ½ ln(2πNpq) + Φ_m(x), the Stirling reconstruction of ln ρ(x̂).
pub fn ln_rho_stirling(
    x: &Float,
    big_n: u64,
    p: &Rational,
    ctx: &StirlingContext,
) -> Result<Float> {
    let bits = ctx.prec.bits();
    let x = Float::with_val(bits, x);
    Ok(
        phi_m(&x, big_n, p, ctx)?
            - Float::with_val(bits, &x * &x)
            - half_ln_2pi_npq(big_n, p, bits),
    )
}

fn half_ln_2pi_npq(big_n: u64, p: &Rational, bits: u32) -> Float {
    let npq = rational_to_real(&(Rational::from(big_n) * p * complement(p)), prec_of(bits));
    (Float::with_val(bits, Constant::Pi) * 2u32 * npq).ln() / 2u32
}

/// ln ρ(x̂) = ln Γ(N+1) − ln Γ(x̂+1) − ln Γ(N−x̂+1) + x̂ ln p + (N−x̂) ln q for
/// real −1 < x̂ < N + 1.
pub fn ln_rho_real(xhat: &Float, big_n: u64, p: &Rational, prec: Precision) -> Result<Float> {
    check_probability(p)?;
    let guarded = prec.guarded(64);
    let bits = guarded.bits();
    let xhat = Float::with_val(bits, xhat);
    let nf = Float::with_val(bits, big_n);
    let a = Float::with_val(bits, &xhat + 1u32);
    let b = Float::with_val(bits, &nf - &xhat) + 1u32;
    ensure!(a > 0 && b > 0, "ρ(x̂) needs −1 < x̂ < N + 1, got x̂ = {xhat}");
    let ln_p = rational_to_real(p, guarded).ln();
    let ln_q = rational_to_real(&complement(p), guarded).ln();
    let total = ln_gamma_precise(&(nf.clone() + 1u32), guarded)?
        - ln_gamma_precise(&a, guarded)?
        - ln_gamma_precise(&b, guarded)?
        + Float::with_val(bits, &xhat * &ln_p)
        + Float::with_val(bits, &nf - &xhat) * ln_q;
    Ok(Float::with_val(prec.bits(), total))
}

pub fn rho_real(xhat: &Float, big_n: u64, p: &Rational, prec: Precision) -> Result<Float> {
    Ok(ln_rho_real(xhat, big_n, p, prec)?.exp())
}

/// S_N^0(x) = ln ρ(x̂) + x² + ½ ln(2πNpq), with ρ evaluated to full precision.
pub fn s_n0(x: &Float, big_n: u64, p: &Rational, prec: Precision) -> Result<Float> {
    let bits = prec.guarded(64).bits();
    let x = Float::with_val(bits, x);
    let xhat = xhat_of(&x, big_n, p);
    let ln_rho = ln_rho_real(&xhat, big_n, p, prec.guarded(64))?;
    let s = ln_rho + Float::with_val(bits, &x * &x) + half_ln_2pi_npq(big_n, p, bits);
    Ok(Float::with_val(prec.bits(), s))
}

/// Leading behaviour of r(x̂/N) at fixed x: c·x³/N^{3/2} with
/// c = (√2/3)(2p−1)/√(pq). `Form::Printed` carries the opposite sign.
pub fn r_leading(x: &Float, big_n: u64, p: &Rational, form: Form) -> Float {
    let bits = x.prec();
    let c = leading_constant(p, bits) * Float::with_val(bits, 2u32).sqrt() / 3u32;
    let c = match form {
        Form::Corrected => c,
        Form::Printed => -c,
    };
    let nf = Float::with_val(bits, big_n);
    let n32 = Float::with_val(bits, nf.sqrt_ref()) * &nf;
    c * x.clone().pow(3u32) / n32
}

/// Leading behaviour of D(x̂/N) at fixed x: √2(1−2p)/√(pq) · x/√N.
/// `Form::Printed` carries (2p − 1) instead.
pub fn d_leading(x: &Float, big_n: u64, p: &Rational, form: Form) -> Float {
    let bits = x.prec();
    let c = -leading_constant(p, bits) * Float::with_val(bits, 2u32).sqrt();
    let c = match form {
        Form::Corrected => c,
        Form::Printed => -c,
    };
    c * x / Float::with_val(bits, big_n).sqrt()
}

/// (2p − 1)/√(pq).
fn leading_constant(p: &Rational, bits: u32) -> Float {
    let q = complement(p);
    let pq = rational_to_real(&Rational::from(p * &q), prec_of(bits));
    let two_p_minus_one = Rational::from(p * 2u32) - 1u32;
    rational_to_real(&two_p_minus_one, prec_of(bits)) / pq.sqrt()
}

/// sup over x ∈ [−A, A] of |√N ρ(x̂(x)) / φ^M(x) − 1| per grid N, weighted
/// by N^{M/2}. Only the real segment is sampled.
pub fn lemma1_check(
    m: u32,
    a: &Rational,
    p: &Rational,
    grid: crate::verify::GridSpec,
    prec: Precision,
) -> Result<crate::verify::ConvergenceReport> {
    let config = crate::verify::SweepConfig {
        p: p.clone(),
        m,
        a: a.clone(),
        grid,
        prec,
        ..Default::default()
    };
    crate::verify::uniform_sweep(crate::verify::Claim::Lemma1, &config)
}
