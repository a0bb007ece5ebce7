use rug::{Float, Rational};

use super::symbolic::{ExpansionResult, ExpansionTerm, Regime, ResidualOrder};
use crate::arith::{binomial, complement, double_factorial, rational_to_real, Precision, VPoly};
use crate::error::{ensure, Result};
use crate::orthopoly::{krawtchouk_hypergeometric, krawtchouk_nonnormalized, KrawtchoukParams};
use crate::Form;

/// t1, t2 of the two-term closed forms for k_{2l} (i = 0) and the shifted
/// K_{2l}(·, p, N − i), where t2 picks up −9pq(i + 2l − 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorollaryCoeffs {
    pub l: u32,
    pub i: u32,
    pub t1: Rational,
    pub t2: Rational,
}

impl CorollaryCoeffs {
    /// Printed: t2 = (l−1)(1 + 4l + (16l−5)pq). Corrected: the sign in front
    /// of (16l−5)pq is negative, which is what the exact polynomials give.
    pub fn new(l: u32, p: &Rational, form: Form) -> Self {
        let pq = p * complement(p);
        let l_r = Rational::from(l);
        let t1 = (p.clone() - Rational::from((1, 2))) * 6u32 * (l_r.clone() * 4u32 - 1u32);
        let tail = (l_r.clone() * 16u32 - 5u32) * &pq;
        let inner = match form {
            Form::Printed => l_r.clone() * 4u32 + 1u32 + tail,
            Form::Corrected => l_r.clone() * 4u32 + 1u32 - tail,
        };
        let t2 = (l_r - 1u32) * inner;
        CorollaryCoeffs { l, i: 0, t1, t2 }
    }

    pub fn shifted(l: u32, i: u32, p: &Rational, form: Form) -> Self {
        let mut c = Self::new(l, p, form);
        let pq = p * complement(p);
        c.t2 -= pq * 9u32 * Rational::from(i64::from(i) + 2 * i64::from(l) - 1);
        c.i = i;
        c
    }

    /// 9v² + t1 v + t2.
    pub fn quadratic(&self) -> VPoly {
        VPoly::from_coeffs(vec![self.t2.clone(), self.t1.clone(), Rational::from(9)])
    }
}

/// (−1)^l (2l−1)!! / (2l)!.
fn leading_constant(l: u32) -> Rational {
    let df = double_factorial(2 * i64::from(l) - 1).expect("2l − 1 ≥ −1");
    let mut fact = rug::Integer::from(1);
    for t in 1..=2 * l {
        fact *= t;
    }
    let c = Rational::from((df, fact));
    if l % 2 == 1 {
        -c
    } else {
        c
    }
}

fn pow_u(x: &Rational, k: u32) -> Rational {
    let mut acc = Rational::from(1);
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// The two-term (even n) or one-term (odd n) closed form for k_n(Np + v),
/// as polynomials in v per power of N.
pub fn corollary1_terms(n: u32, p: &Rational, form: Form) -> Result<ExpansionResult> {
    crate::arith::check_probability(p)?;
    ensure!(n >= 1, "the closed forms start at n = 1");
    let l = n / 2;
    let pq = p * complement(p);
    let c = leading_constant(l);
    let mut terms = Vec::new();
    let residual = if n.is_multiple_of(2) {
        terms.push(ExpansionTerm {
            n_power: i64::from(l),
            coeff: VPoly::constant(c.clone() * pow_u(&pq, l)),
        });
        let coeffs = CorollaryCoeffs::new(l, p, form);
        let scale = -c * pow_u(&pq, l - 1) * Rational::from(l) / 9u32;
        let second = coeffs.quadratic().scale(&scale);
        if !second.is_zero() {
            terms.push(ExpansionTerm {
                n_power: i64::from(l) - 1,
                coeff: second,
            });
        }
        ResidualOrder::LittleO(i64::from(l) - 1)
    } else {
        // (4l(p − 1/2) + 3v)/3
        let lin = VPoly::from_coeffs(vec![
            Rational::from(4 * l) * (p.clone() - Rational::from((1, 2))) / 3u32,
            Rational::from(1),
        ]);
        terms.push(ExpansionTerm {
            n_power: i64::from(l),
            coeff: lin.scale(&(c * pow_u(&pq, l))),
        });
        ResidualOrder::LittleO(i64::from(l))
    };
    Ok(ExpansionResult {
        n,
        p: p.clone(),
        terms,
        residual,
        regime: Regime::SmallV,
    })
}

/// Closed-form approximation of k_n(Np + v), exact in rationals.
pub fn corollary1_exact(
    n: u32,
    p: &Rational,
    big_n: u64,
    v: &Rational,
    form: Form,
) -> Result<Rational> {
    Ok(corollary1_terms(n, p, form)?.eval(&Rational::from(big_n), v))
}

/// Closed-form approximation of k_n(Np + v) at a real v.
pub fn corollary1_eval(n: u32, p: &Rational, big_n: u64, v: &Float, form: Form) -> Result<Float> {
    Ok(corollary1_terms(n, p, form)?.eval_real(big_n, v))
}

/// Closed form for K_n(Np + v, p, N − i). The even case uses the shifted t2;
/// in the odd case the printed display lacks the overall sign (−1) that the
/// k_n relation produces.
pub fn corollary2_exact(
    n: u32,
    p: &Rational,
    big_n: u64,
    i: u32,
    v: &Rational,
    form: Form,
) -> Result<Rational> {
    crate::arith::check_probability(p)?;
    ensure!(n >= 1, "the closed forms start at n = 1");
    ensure!(
        big_n >= u64::from(i) + u64::from(n),
        "need N − i ≥ n, got N = {big_n}, i = {i}, n = {n}"
    );
    let l = n / 2;
    let q = complement(p);
    let pq = Rational::from(p * &q);
    let u = v.clone() + Rational::from(i) * p;
    let nr = Rational::from(big_n);
    let ratio = pow_u(&(-(q / p.clone())), l);
    let df = Rational::from(double_factorial(2 * i64::from(l) - 1)?);
    if n.is_multiple_of(2) {
        let coeffs = CorollaryCoeffs::shifted(l, i, p, form);
        let quad = coeffs.quadratic().eval(&u);
        let bracket = Rational::from(1) - quad * Rational::from(l) / (pq * 9u32 * &nr);
        Ok(ratio * df / pow_u(&nr, l) * bracket)
    } else {
        let lin = Rational::from(4 * l) * (p.clone() - Rational::from((1, 2))) + u * 3u32;
        let value =
            ratio * df * Rational::from(2 * l + 1) / pow_u(&nr, l + 1) * lin / (p.clone() * 3u32);
        Ok(match form {
            Form::Printed => value,
            Form::Corrected => -value,
        })
    }
}

pub fn corollary2_eval(
    n: u32,
    p: &Rational,
    big_n: u64,
    i: u32,
    v: &Rational,
    form: Form,
    prec: Precision,
) -> Result<Float> {
    Ok(rational_to_real(
        &corollary2_exact(n, p, big_n, i, v, form)?,
        prec,
    ))
}

/// K_n(x, p, N₁) with x = Np + v and N₁ = N − i, computed directly from the
/// hypergeometric sum.
pub fn shifted_krawtchouk_direct(
    n: u32,
    p: &Rational,
    big_n: u64,
    i: u32,
    v: &Rational,
) -> Result<Rational> {
    ensure!(big_n >= u64::from(i), "i exceeds N");
    let params = KrawtchoukParams::new(p.clone(), big_n - u64::from(i), n)?;
    let x = Rational::from(big_n) * p + v;
    Ok(krawtchouk_nonnormalized(&params, &x))
}

/// The same value through k_n: K_n(N₁p + v₁, p, N₁) = k_n(N₁p + v₁, N₁)/((−p)^n C(N₁, n))
/// with v₁ = v + ip.
pub fn shifted_krawtchouk_via_relation(
    n: u32,
    p: &Rational,
    big_n: u64,
    i: u32,
    v: &Rational,
) -> Result<Rational> {
    ensure!(big_n >= u64::from(i), "i exceeds N");
    let n1 = big_n - u64::from(i);
    let params = KrawtchoukParams::new(p.clone(), n1, n)?;
    let v1 = v.clone() + Rational::from(i) * p;
    let xhat = Rational::from(n1) * p + v1;
    let k = krawtchouk_hypergeometric(&params, &xhat);
    let mut norm = Rational::from(binomial(n1, i64::from(n)));
    for _ in 0..n {
        norm *= -p.clone();
    }
    Ok(k / norm)
}

/// Closed forms for ψ(x)·(d/dx)^r ρ(x̂) to o(1/N) with ψ(x) = √(2πN)σ e^{x²}.
///
/// Corrected: r = 2l gives (2l−1)!!(−2)^l (1 − (36lv² + τ1 v + τ2)/(36pqN)),
/// r = 2l+1 gives (−1)^{l+1}(2l+1)!! 2^l √2/√(Npq) (v + (1−2p)(2l+3)/6).
/// Printed: the same two displays attached to the opposite parity of r, with
/// a plus sign in the even-order bracket.
pub fn derivative_closed_form(
    r: u32,
    p: &Rational,
    big_n: u64,
    v: &Float,
    form: Form,
) -> Result<Float> {
    crate::arith::check_probability(p)?;
    let bits = v.prec();
    let pq = p * complement(p);
    let bracket_form = match form {
        Form::Corrected => r.is_multiple_of(2),
        Form::Printed => r % 2 == 1,
    };
    let l = match (form, r % 2) {
        (Form::Printed, 0) => {
            ensure!(r >= 2, "the printed even-order display starts at order 2");
            r / 2
        }
        _ => r / 2,
    };
    let li = i64::from(l);
    let nf = Float::with_val(bits, big_n);
    if bracket_form {
        let tau1 = (Rational::from(1) - p.clone() * 2u32)
            * 6u32
            * Rational::from((2 * li + 3) * (2 * li + 1));
        let tau2 = Rational::from((2 * li + 1) * (2 * li + 3))
            * (Rational::from(1 + li) - Rational::from(1 + 4 * li) * &pq);
        let quad = VPoly::from_coeffs(vec![tau2, tau1, Rational::from(36 * li)]);
        let corr = quad.eval_real(v) / (rational_to_real_bits(&(pq * 36u32), bits) * &nf);
        let lead =
            Float::with_val(bits, double_factorial(2 * li - 1)?) * Float::with_val(bits, -2).pow(l);
        Ok(match form {
            Form::Corrected => lead * (Float::with_val(bits, 1) - corr),
            Form::Printed => lead * (Float::with_val(bits, 1) + corr),
        })
    } else {
        let sign = if (l + 1) % 2 == 0 { 1 } else { -1 };
        let df = Float::with_val(bits, double_factorial(2 * li + 1)?) * sign;
        let scale =
            Float::with_val(bits, 2).sqrt() / (rational_to_real_bits(&pq, bits) * &nf).sqrt();
        let shift = rational_to_real_bits(
            &((Rational::from(1) - p.clone() * 2u32) * Rational::from(2 * li + 3) / 6u32),
            bits,
        );
        Ok(df * Float::with_val(bits, 2).pow(l) * scale * (Float::with_val(bits, v) + shift))
    }
}

fn rational_to_real_bits(r: &Rational, bits: u32) -> Float {
    Float::with_val(bits, r)
}

use rug::ops::Pow;

/// 1 − (1 − pq − 6v(p − q))/(12pqN), the two-term form of ψ(x)ρ(x̂).
pub fn m_v_simplified(p: &Rational, big_n: u64, v: &Float) -> Result<Float> {
    crate::arith::check_probability(p)?;
    let bits = v.prec();
    let q = complement(p);
    let pq = Rational::from(p * &q);
    let num = Float::with_val(bits, Rational::from(1) - &pq)
        - Float::with_val(bits, v * Float::with_val(bits, (p - q.clone()) * 6u32));
    let den = Float::with_val(bits, pq * 12u32) * Float::with_val(bits, big_n);
    Ok(Float::with_val(bits, 1) - num / den)
}
