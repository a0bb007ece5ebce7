use std::sync::{Mutex, OnceLock};

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Binomial coefficient; zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: u64, k: i64) -> Integer {
    if k < 0 || k as u64 > n {
        return Integer::new();
    }
    let k = k as u64;
    let k = k.min(n - k);
    match u32::try_from(k) {
        Ok(k) => Integer::from(n).binomial(k),
        // Only reachable for n ≥ 2^33; fall back to the product form.
        Err(_) => {
            let mut acc = Integer::from(1);
            for i in 0..k {
                acc *= n - i;
                acc /= i + 1;
            }
            acc
        }
    }
}

/// Falling factorial y(y−1)…(y−k+1); the empty product is 1.
pub fn falling_factorial(y: &Rational, k: u32) -> Rational {
    let mut acc = Rational::from(1);
    let mut term = y.clone();
    for _ in 0..k {
        acc *= &term;
        term -= 1u32;
    }
    acc
}

pub fn falling_factorial_real(y: &Float, k: u32) -> Float {
    let mut acc = Float::with_val(y.prec(), 1);
    let mut term = y.clone();
    for _ in 0..k {
        acc *= &term;
        term -= 1u32;
    }
    acc
}

/// k!! with the conventions (−1)!! = 0!! = 1.
pub fn double_factorial(k: i64) -> Result<Integer> {
    ensure!(k >= -1, "double factorial needs k >= -1, got {k}");
    let mut acc = Integer::from(1);
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    Ok(acc)
}

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1), Rational::from((-1, 2))]))
}

/// Bernoulli number B_k for even k (B_2 = 1/6). Odd orders are rejected since
/// only even ones enter the Stirling correction.
pub fn bernoulli_number(k: u32) -> Result<Rational> {
    ensure!(
        k.is_multiple_of(2),
        "only even Bernoulli numbers are supported, got B_{k}"
    );
    let mut table = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    // B_m = -1/(m+1) Σ_{j<m} C(m+1, j) B_j ; odd B_j (j > 1) vanish.
    while table.len() <= k as usize {
        let m = table.len() as u64;
        if m % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        let mut sum = Rational::new();
        for (j, b) in table.iter().enumerate() {
            if b.cmp0().is_eq() {
                continue;
            }
            sum += Rational::from(binomial(m + 1, j as i64)) * b;
        }
        table.push(-sum / Rational::from(m + 1));
    }
    Ok(table[k as usize].clone())
}

/// A nonnegative solution of k_1 + 2k_2 + … + ν k_ν = ν together with
/// s = k_1 + … + k_ν.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightedPartition {
    pub ks: Vec<u32>,
    pub s: u32,
}

impl WeightedPartition {
    pub fn nu(&self) -> u32 {
        self.ks
            .iter()
            .enumerate()
            .map(|(i, k)| (i as u32 + 1) * k)
            .sum()
    }
}

/// All nonnegative solutions of k_1 + 2k_2 + … + ν k_ν = ν, ordered with k_1
/// descending first (then k_2, …). For ν = 0 the single empty tuple.
pub fn weighted_partitions(nu: u32) -> Vec<WeightedPartition> {
    fn fill(m: usize, remaining: u32, ks: &mut Vec<u32>, out: &mut Vec<WeightedPartition>) {
        let nu = ks.len();
        if m == nu {
            if remaining == 0 {
                let s = ks.iter().sum();
                out.push(WeightedPartition { ks: ks.clone(), s });
            }
            return;
        }
        let weight = m as u32 + 1;
        for k in (0..=remaining / weight).rev() {
            ks[m] = k;
            fill(m + 1, remaining - k * weight, ks, out);
        }
        ks[m] = 0;
    }
    let mut out = Vec::new();
    let mut ks = vec![0u32; nu as usize];
    fill(0, nu, &mut ks, &mut out);
    out
}
