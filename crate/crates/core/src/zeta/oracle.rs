//! Euler–Maclaurin continuation of `Σ_{k≥1} k^{-σ}`, independent of the
//! closed forms in the parent module.
//!
//! For `σ ≤ 0` the correction series terminates and the tail is taken from
//! `k = 1`, which makes the continued value exact up to rounding. For `σ > 0`
//! the first terms are summed directly and the asymptotic series is cut
//! once its terms stop shrinking.

const DIRECT_TERMS: u64 = 16;
const MAX_CORRECTIONS: usize = 12;

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`).
pub fn bernoulli(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        // Σ_{k=0}^{m} C(m+1, k) B_k = 0
        let mut acc = 0.0;
        let mut binom = 1.0;
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += binom * bk;
            binom *= (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
    }
    b
}

/// Continued value of `Σ_{k≥1} k^{-σ}`; at the pole `σ = 1` the finite part
/// (Euler–Mascheroni constant) is returned.
pub fn power_sum(sigma: f64) -> f64 {
    let start = if sigma <= 0.0 { 1 } else { DIRECT_TERMS };
    let kf = start as f64;
    let mut total: f64 = (1..start).map(|k| (k as f64).powf(-sigma)).sum();
    total += if sigma == 1.0 {
        -kf.ln()
    } else {
        kf.powf(1.0 - sigma) / (sigma - 1.0)
    };
    total += 0.5 * kf.powf(-sigma);

    let b = bernoulli(2 * MAX_CORRECTIONS);
    let mut rising = sigma; // σ(σ+1)…(σ+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut last = f64::INFINITY;
    for j in 1..=MAX_CORRECTIONS {
        if j > 1 {
            rising *= (sigma + (2 * j - 3) as f64) * (sigma + (2 * j - 2) as f64);
            fact *= ((2 * j - 1) * (2 * j)) as f64;
        }
        let term = b[2 * j] / fact * rising * kf.powf(-sigma - (2 * j) as f64 + 1.0);
        if rising == 0.0 {
            break;
        }
        if sigma > 0.0 && term.abs() >= last {
            break;
        }
        total += term;
        last = term.abs();
    }
    total
}

/// `tr^{Δ+π}((Δ+π)^m)` by continuation of `1 + 2 Σ_{k≥1} k^{2m} k^{-2s}` at `s = 0`.
pub fn weight_power_trace(m: i32) -> f64 {
    1.0 + 2.0 * power_sum(-2.0 * m as f64)
}
