#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Adaptive Gauss–Kronrod (7/15) integration settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Quadrature { abs_tol, rel_tol: 0.0, ..Default::default() }
    }

    /// Integrates `f` over `[a, b]` by global adaptive bisection.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let mut intervals = vec![{
            let (v, e) = gk15(&f, a, b);
            (a, b, v, e)
        }];
        loop {
            let total: f64 = intervals.iter().map(|iv| iv.2).sum();
            let err: f64 = intervals.iter().map(|iv| iv.3).sum();
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(total);
            }
            if intervals.len() >= self.max_intervals {
                return Err(Error::numeric(format!(
                    "quadrature on [{a}, {b}] did not converge: error estimate {err:e} after {} subintervals",
                    intervals.len()
                )));
            }
            // split the interval with the largest error
            let (idx, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
            let (lo, hi, _, _) = intervals.swap_remove(idx);
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Err(Error::numeric("quadrature interval underflow"));
            }
            let (v1, e1) = gk15(&f, lo, mid);
            let (v2, e2) = gk15(&f, mid, hi);
            intervals.push((lo, mid, v1, e1));
            intervals.push((mid, hi, v2, e2));
        }
    }
}

/// Integrates with the default tolerances (1e-12 absolute and relative).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    Quadrature::default().integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate(|x| x * x * x, 0.0, 2.0).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v = integrate(|x| x.sin(), 0.0, PI).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        // ∫ 1/(1+ρ²−2ρcosθ) over the circle = 2π/(1−ρ²)
        let rho: f64 = 0.99;
        let v = integrate(|t| 1.0 / (1.0 + rho * rho - 2.0 * rho * t.cos()), 0.0, 2.0 * PI).unwrap();
        assert!((v - 2.0 * PI / (1.0 - rho * rho)).abs() < 1e-9);
    }
}
