use std::f64::consts::PI;

/// `ln(n!)` by direct summation for small `n`, Stirling series otherwise.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 64 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    // lnΓ(x) Stirling series
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
        - 1.0 / (1680.0 * x.powi(7))
}

/// Exponentially scaled modified Bessel function of the first kind,
/// `I_p(x)·e^{−x}`, for integer order `p` and `x ≥ 0`.
///
/// Ascending series with the term cutoff `1e-16·partial sum`; above
/// `x = 30` and for orders small relative to `x` the Hankel asymptotic
/// expansion is used instead.
pub fn bessel_i_scaled(p: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_i_scaled requires x >= 0");
    if x == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    let pf = p as f64;
    if x > 30.0 && 4.0 * pf * pf < x {
        return asymptotic_scaled(pf, x);
    }
    // log of the first term (x/2)^p / p!, scaled by e^{-x}
    let half = 0.5 * x;
    let ln_t0 = pf * half.ln() - ln_factorial(p as u64) - x;
    if ln_t0 < -745.0 - 10.0 * x.max(1.0).ln() && pf > x {
        // first term already underflows and the series is dominated by it
        return 0.0;
    }
    // Accumulate relative to t0 to stay in range, then rescale.
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut max_term = 1.0f64;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + pf));
        sum += term;
        max_term = max_term.max(term);
        if term < 1e-16 * sum && k > half {
            break;
        }
        if sum > 1e280 {
            // rescale to avoid overflow for large x with large order
            return (ln_t0 + sum.ln() + series_tail_log(q, pf, k, term, sum)).exp();
        }
    }
    (ln_t0 + sum.ln()).exp()
}

// Continues an overflowing series in log space.
fn series_tail_log(q: f64, pf: f64, mut k: f64, term: f64, sum: f64) -> f64 {
    let mut ln_term = term.ln() - sum.ln();
    let mut ln_sum = 0.0f64;
    loop {
        k += 1.0;
        ln_term += (q / (k * (k + pf))).ln();
        ln_sum = log_add(ln_sum, ln_term);
        if ln_term - ln_sum < (1e-16f64).ln() && k > q.sqrt() {
            return ln_sum;
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

fn asymptotic_scaled(p: f64, x: f64) -> f64 {
    let mu = 4.0 * p * p;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Modified Bessel function `I_p(x)` (unscaled; overflows for x ≳ 700).
pub fn bessel_i(p: u32, x: f64) -> f64 {
    bessel_i_scaled(p, x) * x.exp()
}
