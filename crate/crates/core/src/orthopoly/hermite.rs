use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::arith::{double_factorial, VPoly};

/// Physicists' Hermite polynomial H_n from H_{n+1} = 2x H_n − 2n H_{n−1}.
pub fn hermite(n: u32) -> VPoly {
    let two_x = VPoly::from_i64(&[0, 2]);
    let mut prev = VPoly::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two_x.clone();
    for k in 1..n {
        let next = &(&two_x * &cur) - &prev.scale(&Rational::from(2 * k));
        prev = cur;
        cur = next;
    }
    cur
}

/// H_n from the explicit even/odd representations
/// H_{2l} = (−1)^l 2^l (2l−1)!! (1 + Σ_j 4^j (−l)^{(j)} x^{2j}/(2j)!),
/// H_{2l+1} = (−1)^l 2^{l+1} (2l+1)!! (x + Σ_j 4^j (−l)^{(j)} x^{2j+1}/(2j+1)!),
/// with (−l)^{(j)} the rising factorial.
pub fn hermite_explicit(n: u32) -> VPoly {
    let l = n / 2;
    let odd = n % 2 == 1;
    let df = if odd {
        double_factorial(2 * i64::from(l) + 1)
    } else {
        double_factorial(2 * i64::from(l) - 1)
    }
    .expect("argument is at least -1");
    let mut lead = Rational::from(df) * Rational::from(Integer::from(1) << (l + u32::from(odd)));
    if l % 2 == 1 {
        lead = -lead;
    }
    let mut coeffs = vec![Rational::new(); n as usize + 1];
    let base = usize::from(odd);
    coeffs[base] = Rational::from(1);
    let mut rising = Rational::from(1);
    let mut four_j = Rational::from(1);
    let mut fact = Rational::from(1);
    for j in 1..=l {
        rising *= i64::from(j) - 1 - i64::from(l);
        four_j *= 4;
        let d = 2 * j + u32::from(odd);
        fact *= (d - 1) * d;
        coeffs[d as usize] = Rational::from(&rising * &four_j) / &fact;
    }
    VPoly::from_coeffs(coeffs).scale(&lead)
}

/// Small-x truncation: (−1)^l 2^l (2l−1)!! (1 − 2l x²) for n = 2l and
/// (−1)^l 2^{l+1} (2l+1)!! x for n = 2l + 1.
pub fn hermite_small_x(n: u32) -> VPoly {
    let full = hermite_explicit(n);
    let keep = if n.is_multiple_of(2) { 3 } else { 2 };
    VPoly::from_coeffs(full.coeffs().iter().take(keep).cloned().collect())
}

pub fn hermite_real(n: u32, x: &Float) -> Float {
    let mut prev = Float::with_val(x.prec(), 1);
    if n == 0 {
        return prev;
    }
    let two_x = Float::with_val(x.prec(), x * 2u32);
    let mut cur = two_x.clone();
    for k in 1..n {
        let next =
            Float::with_val(x.prec(), &two_x * &cur) - Float::with_val(x.prec(), &prev * (2 * k));
        prev = cur;
        cur = next;
    }
    cur
}

/// (He_n(x), D_n(x)) from H_n: He_n(x) = 2^{−n/2} H_n(x/√2) and
/// D_n(x) = 2^{−n/2} e^{−x²/4} H_n(x/√2).
pub fn hermite_conversions(n: u32, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let sqrt2 = Float::with_val(prec, 2).sqrt();
    let arg = Float::with_val(prec, x / &sqrt2);
    let scale = Float::with_val(prec, Float::with_val(prec, 0.5).sqrt().pow(n));
    let he = hermite_real(n, &arg) * scale;
    let gauss = (-Float::with_val(prec, x * x) / 4u32).exp();
    let d = Float::with_val(prec, &he * gauss);
    (he, d)
}
