//! SU(2) characters, the Sato-Tate measure, and the change of basis between
//! cosine series and character expansions.
//!
//! On conjugacy classes `diag(e^{i theta}, e^{-i theta})`, `theta` in `[0, pi]`,
//! the irreducible characters are `chi_k(theta) = sum_{j=0}^k e^{(k-2j) i theta}
//! = sin((k+1) theta) / sin(theta)`. Since `chi_k - chi_{k-2} = 2 cos(k theta)`,
//! an even function `c_0 + sum 2 c_k cos(k theta)` equals
//! `sum (c_k - c_{k+2}) chi_k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::kernel::{truncation_tail_bound, EvenWindow, KernelError};

/// Below this `|sin theta|` characters are evaluated from the exponential sum.
const SIN_CUTOFF: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HarmonicsError {
    #[error("need at least three cosine coefficients (M >= 2), got {0}")]
    TooFewCoefficients(usize),
    #[error("interval endpoints must satisfy 0 <= a <= b <= pi, got [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `chi_k(theta)`.
pub fn su2_character(k: u64, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < SIN_CUTOFF {
        return (0..=k).map(|j| ((k as f64 - 2.0 * j as f64) * theta).cos()).sum();
    }
    ((k + 1) as f64 * theta).sin() / s
}

/// `[chi_0(theta), ..., chi_k(theta)]` by `chi_{k+1} = chi_1 chi_k - chi_{k-1}`.
pub fn su2_characters(k: u64, theta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k as usize + 1);
    let two_cos = 2.0 * theta.cos();
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..=k {
        out.push(cur);
        let next = two_cos * cur - prev;
        prev = cur;
        cur = next;
    }
    out
}

/// Coefficients `d_0 .. d_{M-2}` of `chi_0 .. chi_{M-2}`, with a sup-norm
/// bound on what the truncation discards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterExpansion {
    pub big_m: u64,
    pub d: Vec<f64>,
    pub tail: f64,
}

/// `d_k = c_k - c_{k+2}` for `0 <= k <= M - 2`, where `c = [c_0, ..., c_M]`.
/// The tail is left at zero: nothing is known about coefficients past `c_M`.
pub fn fourier_to_character(c: &[f64]) -> Result<CharacterExpansion, HarmonicsError> {
    if c.len() < 3 {
        return Err(HarmonicsError::TooFewCoefficients(c.len()));
    }
    let d = c.windows(3).map(|w| w[0] - w[2]).collect();
    Ok(CharacterExpansion {
        big_m: c.len() as u64 - 1,
        d,
        tail: 0.0,
    })
}

impl CharacterExpansion {
    /// Expansion of an even window with its certified truncation tail.
    pub fn from_window(window: &EvenWindow) -> Result<Self, HarmonicsError> {
        let mut e = fourier_to_character(window.coefficients())?;
        e.tail = truncation_tail_bound(window.params(), e.big_m)?;
        Ok(e)
    }

    /// Inverse change of basis, `c_k = d_k + d_{k+2} + ...`, returning
    /// `c_0 .. c_{M-2}`.
    pub fn to_fourier(&self) -> Vec<f64> {
        let n = self.d.len();
        let mut c = vec![0.0; n];
        for k in (0..n).rev() {
            c[k] = self.d[k] + if k + 2 < n { c[k + 2] } else { 0.0 };
        }
        c
    }

    /// Partial sum `sum_k d_k chi_k(theta)`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        let two_cos = 2.0 * theta.cos();
        if theta.sin().abs() < SIN_CUTOFF {
            return self
                .d
                .iter()
                .enumerate()
                .map(|(k, dk)| dk * su2_character(k as u64, theta))
                .sum();
        }
        let (mut prev, mut cur) = (0.0, 1.0);
        let mut total = 0.0;
        for &dk in &self.d {
            total += dk * cur;
            let next = two_cos * cur - prev;
            prev = cur;
            cur = next;
        }
        total
    }

    /// Main-term coefficient `d_0 = c_0 - c_2`.
    pub fn mean(&self) -> f64 {
        self.d[0]
    }
}

/// `mu_ST([a, b]) = ((b - sin b cos b) - (a - sin a cos a)) / pi`.
pub fn st_measure_interval(a: f64, b: f64) -> Result<f64, HarmonicsError> {
    if !(0.0 <= a && a <= b && b <= PI) {
        return Err(HarmonicsError::BadInterval(a, b));
    }
    let g = |t: f64| t - t.sin() * t.cos();
    Ok((g(b) - g(a)) / PI)
}

/// `mu_ST(chi_k)`: 1 for the trivial character, 0 otherwise.
pub fn st_measure_character(k: u64) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.0
    }
}

/// Panel count for Sato-Tate integrals.
pub const ST_PANELS: usize = 2048;

/// `int_0^pi (2/pi) sin^2(theta) f(theta) d theta` by composite Gauss-Legendre.
pub fn st_integral(f: impl Fn(f64) -> f64) -> f64 {
    crate::quad::composite_gauss_legendre(
        |t| 2.0 / PI * t.sin().powi(2) * f(t),
        0.0,
        PI,
        ST_PANELS,
    )
}
