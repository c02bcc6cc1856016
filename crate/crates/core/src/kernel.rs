//! Smoothed interval indicators with explicit Fourier bounds.
//!
//! `D_{A,B}` is the period-1 indicator of `[A, B]` convolved `r` times with
//! the unit-mass box of width `delta / r`. Its support widens by `delta / 2`
//! on each side and it equals 1 on `[A + delta/2, B - delta/2]`. The complex
//! Fourier coefficients factor as
//!
//! ```text
//! D^(m) = e^{-i pi m (A+B)} sin(pi m (B-A)) / (pi m) * sinc(pi m delta / r)^r
//! ```
//!
//! so for `m >= 1`, with `D(x) = a_0 + sum a_m cos(2 pi m x) + b_m sin(2 pi m x)`,
//! `a_m = 2 Re D^(m)` and `b_m = -2 Im D^(m)`, and both are bounded by
//! `min{2(B-A), 2/(pi m), 2/(pi m) (r / (pi m delta))^r}`.
//!
//! The even window `F_{A,B}(theta) = D(theta / 2pi) + D(-theta / 2pi)` has
//! cosine coefficients `c_0 = 2(B-A)`, `c_m = a_m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Default accuracy target when no truncation index is given.
pub const DEFAULT_EVAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("kernel hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("truncation index must be at least {min}, got {got}")]
    TruncationTooSmall { min: u64, got: u64 },
}

/// `sin(pi t)`, exact zero at integers.
pub fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// `cos(pi t)`, exact zero at half-integers.
pub fn cos_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    sin_pi(0.5 - r.abs())
}

/// Interval endpoints on the period-1 circle with smoothing width and order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub r: u32,
}

impl KernelParams {
    /// Checks `0 < delta < 1/2`, `delta <= B - A <= 1 - delta`, `r >= 1`.
    pub fn new(a: f64, b: f64, delta: f64, r: u32) -> Result<Self, KernelError> {
        if !(a.is_finite() && b.is_finite() && delta.is_finite()) {
            return Err(KernelError::Hypothesis("parameters must be finite".into()));
        }
        if r == 0 {
            return Err(KernelError::Hypothesis("r >= 1".into()));
        }
        if !(delta > 0.0) {
            return Err(KernelError::Hypothesis(format!("0 < delta (delta = {delta})")));
        }
        if !(delta < 0.5) {
            return Err(KernelError::Hypothesis(format!("delta < 1/2 (delta = {delta})")));
        }
        let len = b - a;
        if !(delta <= len) {
            return Err(KernelError::Hypothesis(format!(
                "delta <= B - A (delta = {delta}, B - A = {len})"
            )));
        }
        if !(len <= 1.0 - delta) {
            return Err(KernelError::Hypothesis(format!(
                "B - A <= 1 - delta (B - A = {len}, 1 - delta = {})",
                1.0 - delta
            )));
        }
        Ok(KernelParams { a, b, delta, r })
    }

    /// Window that majorizes the indicator of `[2 pi alpha, 2 pi beta]`.
    pub fn outer(alpha: f64, beta: f64, delta: f64, r: u32) -> Result<Self, KernelError> {
        Self::new(alpha - delta / 2.0, beta + delta / 2.0, delta, r)
    }

    /// Window that minorizes the indicator of `[2 pi alpha, 2 pi beta]`.
    pub fn inner(alpha: f64, beta: f64, delta: f64, r: u32) -> Result<Self, KernelError> {
        Self::new(alpha + delta / 2.0, beta - delta / 2.0, delta, r)
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }
}

/// Right-hand side of the coefficient bound for index `m >= 1`.
pub fn coefficient_bound(params: &KernelParams, m: u64) -> f64 {
    let m = m as f64;
    let base = 2.0 / (PI * m);
    let decay = base * (params.r as f64 / (PI * m * params.delta)).powi(params.r as i32);
    (2.0 * params.len()).min(base).min(decay)
}

/// `(a_m, b_m)`; `(B - A, 0)` for `m = 0`.
pub fn fourier_coefficient(params: &KernelParams, m: u64) -> (f64, f64) {
    if m == 0 {
        return (params.len(), 0.0);
    }
    let mf = m as f64;
    let t = mf * params.delta / params.r as f64;
    let sinc = sin_pi(t) / (PI * t);
    let k = sin_pi(mf * params.len()) / (PI * mf) * sinc.powi(params.r as i32);
    let s = mf * (params.a + params.b);
    (2.0 * cos_pi(s) * k, 2.0 * sin_pi(s) * k)
}

/// Sup-norm bound for the Fourier tail of `D` beyond index `m_eval`:
/// `sum_{m > M} 2/(pi m) (r/(pi m delta))^r <= (2/pi) (r/(pi delta))^r M^{-r} / r`.
pub fn d_tail_bound(params: &KernelParams, m_eval: u64) -> f64 {
    let r = params.r as f64;
    let lead = (2.0 / PI) * (r / (PI * params.delta)).powi(params.r as i32);
    lead * (m_eval as f64).powi(-(params.r as i32)) / r
}

/// Rounding allowance for a Fourier sum of `m` terms with `|coef| <= 1`.
fn rounding_allowance(m: u64) -> f64 {
    16.0 * (m as f64 + 1.0) * f64::EPSILON
}

/// Smallest `M` with [`d_tail_bound`] at most `tol`.
pub fn default_m_eval(params: &KernelParams, tol: f64) -> u64 {
    let r = params.r as f64;
    let lead = (2.0 / PI) * (r / (PI * params.delta)).powi(params.r as i32) / r;
    let mut m = ((lead / tol).powf(1.0 / r).ceil() as u64).max(1);
    while m > 1 && d_tail_bound(params, m - 1) <= tol {
        m -= 1;
    }
    while d_tail_bound(params, m) > tol {
        m += 1;
    }
    m
}

/// `D(x)` from the Fourier sum through `m_eval`, with a certified bound on
/// the distance to the true value.
pub fn evaluate_d(params: &KernelParams, x: f64, m_eval: u64) -> (f64, f64) {
    let u = x - x.floor();
    let mut value = params.len();
    for m in 1..=m_eval {
        let (am, bm) = fourier_coefficient(params, m);
        let t = 2.0 * m as f64 * u;
        value += am * cos_pi(t) + bm * sin_pi(t);
    }
    (value, d_tail_bound(params, m_eval) + rounding_allowance(m_eval))
}

/// The smoothed indicator with cached coefficients up to a fixed index.
#[derive(Clone, Debug)]
pub struct SmoothedIndicator {
    params: KernelParams,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl SmoothedIndicator {
    pub fn new(params: KernelParams, m_eval: u64) -> Self {
        let (a, b) = (0..=m_eval).map(|m| fourier_coefficient(&params, m)).unzip();
        SmoothedIndicator { params, a, b }
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn m_eval(&self) -> u64 {
        self.a.len() as u64 - 1
    }

    /// `(a_m, b_m)`, cached when `m <= m_eval`.
    pub fn coefficient(&self, m: u64) -> (f64, f64) {
        match self.a.get(m as usize) {
            Some(&am) => (am, self.b[m as usize]),
            None => fourier_coefficient(&self.params, m),
        }
    }

    pub fn evaluate(&self, x: f64) -> (f64, f64) {
        let u = x - x.floor();
        let mut value = self.a[0];
        for m in 1..self.a.len() {
            let t = 2.0 * m as f64 * u;
            value += self.a[m] * cos_pi(t) + self.b[m] * sin_pi(t);
        }
        let m = self.m_eval();
        (value, d_tail_bound(&self.params, m) + rounding_allowance(m))
    }
}

/// `c_0 = 2(B - A)`, `c_m = a_m` for `1 <= m <= big_m`.
pub fn even_window_coefficients(params: &KernelParams, big_m: u64) -> Vec<f64> {
    let mut c: Vec<f64> = (0..=big_m).map(|m| fourier_coefficient(params, m).0).collect();
    c[0] = 2.0 * params.len();
    c
}

/// Sup-norm bound on `F_{A,B} - sum_{k <= M-2} (c_k - c_{k+2}) chi_k`.
///
/// The discarded part is `sum_{k >= M-1} 2 c_k cos(k theta) + c_{M-1} chi_{M-3}
/// + c_M chi_{M-2}`. With `beta_k` the coefficient bound and `|chi_k| <= k+1`:
///
/// ```text
/// T(M) = (4/pi) (r/(pi delta))^r [ (M-1)^{-r-1} + (M-1)^{-r} / r ]
///        + h(M-1) + h(M),     h(k) = (2/pi) min{1, (r/(pi k delta))^r}
/// ```
///
/// The first term sums `2 beta_k` over `k >= M-1` by integral comparison,
/// and `h(k) >= k beta_k` covers the two boundary characters. `T` is
/// decreasing in `M`.
pub fn truncation_tail_bound(params: &KernelParams, big_m: u64) -> Result<f64, KernelError> {
    if big_m < 2 {
        return Err(KernelError::TruncationTooSmall { min: 2, got: big_m });
    }
    let r = params.r as i32;
    let rf = params.r as f64;
    let k = (big_m - 1) as f64;
    let lead = (4.0 / PI) * (rf / (PI * params.delta)).powi(r);
    let series = lead * (k.powi(-r - 1) + k.powi(-r) / rf);
    let h = |k: f64| (2.0 / PI) * (rf / (PI * k * params.delta)).powi(r).min(1.0);
    Ok(series + h(k) + h(big_m as f64))
}

/// `F_{A,B}(theta) = D(theta / 2pi) + D(-theta / 2pi)` as a cosine series.
#[derive(Clone, Debug)]
pub struct EvenWindow {
    params: KernelParams,
    c: Vec<f64>,
}

impl EvenWindow {
    pub fn new(params: KernelParams, big_m: u64) -> Self {
        EvenWindow {
            params,
            c: even_window_coefficients(&params, big_m),
        }
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn big_m(&self) -> u64 {
        self.c.len() as u64 - 1
    }

    /// `c_0 + sum_{m=1}^{M} 2 c_m cos(m theta)` and a bound on its distance
    /// to `F_{A,B}(theta)`.
    pub fn evaluate(&self, theta: f64) -> (f64, f64) {
        let t = theta / PI;
        let mut value = self.c[0];
        for (m, &cm) in self.c.iter().enumerate().skip(1) {
            value += 2.0 * cm * cos_pi(m as f64 * t);
        }
        let m = self.big_m();
        (
            value,
            2.0 * (d_tail_bound(&self.params, m) + rounding_allowance(m)) * (1.0 + t.abs()),
        )
    }
}
