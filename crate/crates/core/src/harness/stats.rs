//! Small statistics helpers.

/// 95% Wilson score half-width for `errors` successes in `n` Bernoulli
/// observations. Zero when `n == 0`.
pub fn wilson_half_width(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959963984540054f64;
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}
