//! Numerical building blocks: modified Bessel functions, adaptive quadrature,
//! one-dimensional root finding and minimization, and capped series sums.

mod bessel;
mod quadrature;
mod roots;

pub use bessel::{bessel_i, bessel_i_scaled, ln_factorial};
pub use quadrature::{integrate, Quadrature};
pub use roots::{bisect, golden_section_max};

use crate::error::{Error, Result};

/// Hard cap on the number of terms of any infinite series.
pub const SERIES_CAP: usize = 1_000_000;

/// Terms smaller than this (in absolute value) end a decreasing series.
pub const SERIES_TOL: f64 = 1e-15;

/// Sums `term(k)` for `k = start, start+1, …` until a term is below
/// [`SERIES_TOL`] and smaller than its predecessor.
pub fn sum_series(start: usize, mut term: impl FnMut(usize) -> f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut prev = f64::INFINITY;
    for k in start..start + SERIES_CAP {
        let t = term(k);
        // Kahan step
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if t.abs() < SERIES_TOL && t.abs() <= prev {
            return Ok(sum);
        }
        prev = t.abs();
    }
    Err(Error::numeric(format!("series did not converge within {SERIES_CAP} terms")))
}
