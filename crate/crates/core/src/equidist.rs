//! Prime sums over Frobenius angles, the logarithmic integral, balancing
//! parameters, and discrepancy reports for one and two curves.
//!
//! Intervals are given in units of pi: `PiInterval { lo: 0.25, hi: 0.5 }` is
//! `[pi/4, pi/2]`. On the period-1 circle that is `[2 pi alpha, 2 pi beta]`
//! with `alpha = lo / 2`, `beta = hi / 2`.

use std::f64::consts::PI;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::curve::{ConductorMode, CurveQ};
use crate::kernel::{EvenWindow, KernelError, KernelParams};
use crate::quad::adaptive_gauss_kronrod;
use crate::su2::{st_measure_character, st_measure_interval, su2_characters, CharacterExpansion, HarmonicsError};
use crate::table::{TraceRecord, TraceTable};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EquidistError {
    #[error("Li(x) needs x >= 2, got {0}")]
    LiDomain(f64),
    #[error("table covers p <= {cutoff}, need p <= {x}")]
    TableTooShort { cutoff: f64, x: f64 },
    #[error("interval must satisfy 0 <= lo <= hi <= 1 (units of pi), got [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("x below effective range: delta = {delta} >= 1/2 (M = {big_m})")]
    OutOfRegime { delta: f64, big_m: u64 },
    #[error("need at least 3 reports, got {0}")]
    TooFewReports(usize),
    #[error("reports must have strictly increasing x and share curve and interval")]
    InconsistentReports,
    #[error("tables do not list the same primes up to {0}")]
    MismatchedTables(f64),
    #[error("paths disagree: direct {direct}, via characters {via_characters}, allowed {allowed}")]
    PathDisagreement {
        direct: f64,
        via_characters: f64,
        allowed: f64,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Harmonics(#[from] HarmonicsError),
}

/// `Li(x) = int_2^x dt / ln t`.
pub fn li(x: f64) -> Result<f64, EquidistError> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(EquidistError::LiDomain(x));
    }
    Ok(adaptive_gauss_kronrod(|t| 1.0 / t.ln(), 2.0, x, 1e-12))
}

/// A closed sub-interval of `[0, pi]` in units of pi.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PiInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, EquidistError> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(EquidistError::BadInterval(lo, hi));
        }
        Ok(PiInterval { lo, hi })
    }

    pub fn full() -> Self {
        PiInterval { lo: 0.0, hi: 1.0 }
    }

    pub fn radians(&self) -> (f64, f64) {
        (self.lo * PI, self.hi * PI)
    }

    pub fn contains(&self, theta: f64) -> bool {
        let (a, b) = self.radians();
        a <= theta && theta <= b
    }

    pub fn st_measure(&self) -> f64 {
        let (a, b) = self.radians();
        st_measure_interval(a, b.min(PI)).expect("validated interval")
    }

    /// `(alpha, beta)` with the interval equal to `[2 pi alpha, 2 pi beta]`.
    pub fn circle(&self) -> (f64, f64) {
        (self.lo / 2.0, self.hi / 2.0)
    }
}

fn covered<'a>(table: &'a TraceTable, x: f64) -> Result<&'a [TraceRecord], EquidistError> {
    if table.cutoff() < x {
        return Err(EquidistError::TableTooShort {
            cutoff: table.cutoff(),
            x,
        });
    }
    Ok(table.up_to(x))
}

fn good_angles(records: &[TraceRecord]) -> impl Iterator<Item = f64> + '_ {
    records.iter().filter_map(|r| r.theta_p)
}

fn ln_conductor(curve: &CurveQ) -> f64 {
    curve.conductor().to_f64().unwrap_or(f64::INFINITY).ln()
}

/// `sum_{p <= x good} chi_k(theta_p)` against its main term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSum {
    pub k: u64,
    pub x: f64,
    pub sum: f64,
    pub good_count: u64,
    /// `mu(chi_k) Li(x)`.
    pub main_term: f64,
    pub residual: f64,
    /// `d x^{1/2} ln(N (x + d))` with `d = (k + 1) [K:Q]`.
    pub shape: f64,
}

pub fn character_prime_sum(table: &TraceTable, k: u64, x: f64) -> Result<CharacterSum, EquidistError> {
    let records = covered(table, x)?;
    let main_term = st_measure_character(k) * li(x)?;
    let mut sum = 0.0;
    let mut good_count = 0;
    for theta in good_angles(records) {
        sum += su2_characters(k, theta)[k as usize];
        good_count += 1;
    }
    let curve = table.curve();
    let d = (k + 1) as f64 * curve.degree() as f64;
    Ok(CharacterSum {
        k,
        x,
        sum,
        good_count,
        main_term,
        residual: sum - main_term,
        shape: d * x.sqrt() * (ln_conductor(curve) + (x + d).ln()),
    })
}

/// `S_k = sum_{p <= x good} chi_k(theta_p)` for all `0 <= k <= k_max` in one
/// pass.
pub fn character_prime_sums(table: &TraceTable, k_max: u64, x: f64) -> Result<Vec<f64>, EquidistError> {
    let records = covered(table, x)?;
    let mut sums = vec![0.0; k_max as usize + 1];
    for theta in good_angles(records) {
        let two_cos = 2.0 * theta.cos();
        let (mut prev, mut cur) = (0.0, 1.0);
        for s in sums.iter_mut() {
            *s += cur;
            let next = two_cos * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    Ok(sums)
}

/// `sum F_{A,B}(theta_p)` over good `p <= x`, by two routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSum {
    pub x: f64,
    pub good_count: u64,
    /// Cosine series through `M` at each angle.
    pub direct: f64,
    /// Certified distance of `direct` from the exact sum of `F`.
    pub direct_error: f64,
    /// `sum_k d_k S_k`.
    pub via_characters: f64,
    /// `tail * good_count` plus rounding.
    pub allowed: f64,
    /// `(c_0 - c_2) Li(x)`.
    pub main_term: f64,
}

/// Evaluates both routes and fails if they disagree beyond the tail bound of
/// the character expansion.
pub fn window_prime_sum(table: &TraceTable, window: &EvenWindow, x: f64) -> Result<WindowSum, EquidistError> {
    let expansion = CharacterExpansion::from_window(window)?;
    let records = covered(table, x)?;
    let mut direct = 0.0;
    let mut direct_error = 0.0;
    let mut good_count = 0u64;
    for theta in good_angles(records) {
        let (v, e) = window.evaluate(theta);
        direct += v;
        direct_error += e;
        good_count += 1;
    }
    let sums = character_prime_sums(table, expansion.big_m - 2, x)?;
    let via_characters: f64 = expansion.d.iter().zip(&sums).map(|(d, s)| d * s).sum();
    let scale: f64 = window.coefficients().iter().map(|c| c.abs()).sum::<f64>() * 2.0;
    let rounding = 64.0 * f64::EPSILON * scale * (expansion.big_m as f64 + 1.0) * good_count as f64;
    let allowed = expansion.tail * good_count as f64 + rounding;
    if (direct - via_characters).abs() > allowed {
        return Err(EquidistError::PathDisagreement {
            direct,
            via_characters,
            allowed,
        });
    }
    Ok(WindowSum {
        x,
        good_count,
        direct,
        direct_error,
        via_characters,
        allowed,
        main_term: expansion.mean() * li(x)?,
    })
}

/// Indicator count squeezed between the inner and outer window sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: WindowSum,
    pub count: u64,
    pub upper: WindowSum,
}

impl Sandwich {
    /// `lower - err <= count <= upper + err`.
    pub fn holds(&self) -> bool {
        let c = self.count as f64;
        self.lower.direct - self.lower.direct_error <= c && c <= self.upper.direct + self.upper.direct_error
    }
}

/// Inner and outer windows of smoothing width `delta` around `interval`.
pub fn sandwich_windows(
    interval: &PiInterval,
    delta: f64,
    r: u32,
    big_m: u64,
) -> Result<(EvenWindow, EvenWindow), EquidistError> {
    let (alpha, beta) = interval.circle();
    let inner = KernelParams::inner(alpha, beta, delta, r)?;
    let outer = KernelParams::outer(alpha, beta, delta, r)?;
    Ok((EvenWindow::new(inner, big_m), EvenWindow::new(outer, big_m)))
}

pub fn sandwich(
    table: &TraceTable,
    interval: &PiInterval,
    delta: f64,
    r: u32,
    big_m: u64,
    x: f64,
) -> Result<Sandwich, EquidistError> {
    let (inner, outer) = sandwich_windows(interval, delta, r, big_m)?;
    let count = good_angles(covered(table, x)?).filter(|&t| interval.contains(t)).count() as u64;
    Ok(Sandwich {
        lower: window_prime_sum(table, &inner, x)?,
        count,
        upper: window_prime_sum(table, &outer, x)?,
    })
}

/// Smoothing width and truncation index chosen by balancing error terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    pub delta: f64,
    pub big_m: u64,
    /// Smoothing order `r`.
    pub r: u32,
    /// `delta < 1/2`.
    pub in_regime: bool,
}

impl Balance {
    fn new(delta: f64, m: f64, r: u32) -> Self {
        Balance {
            delta,
            big_m: if m.is_finite() { m.ceil().max(0.0) as u64 } else { u64::MAX },
            r,
            in_regime: delta < 0.5,
        }
    }

    fn checked(self) -> Result<Self, EquidistError> {
        if self.in_regime {
            Ok(self)
        } else {
            Err(EquidistError::OutOfRegime {
                delta: self.delta,
                big_m: self.big_m,
            })
        }
    }
}

/// Single curve: `delta = x^{-1/4} d^{1/2} ln x (ln Nx)^{1/2}`, `M = ceil(delta^{-2})`, `r = 1`.
/// Returned regardless of regime.
pub fn single_balance(x: f64, n: f64, degree: u32) -> Balance {
    let d = degree as f64;
    let delta = x.powf(-0.25) * d.sqrt() * x.ln() * (n * x).ln().sqrt();
    Balance::new(delta, delta.powi(-2), 1)
}

/// Two curves: `delta = x^{-1/6} d^{1/3} ln x (ln Nx)^{1/3}`, `M = ceil(delta^{-3})`, `r = 1`.
pub fn joint_balance(x: f64, n: f64, degree: u32) -> Balance {
    let d = degree as f64;
    let delta = x.powf(-1.0 / 6.0) * d.cbrt() * x.ln() * (n * x).ln().cbrt();
    Balance::new(delta, delta.powi(-3), 1)
}

/// Opposite signs: `delta = x^{-1/10} d^{1/5} (ln x)^{1/5} (ln Nx)^{1/5}`,
/// `M = ceil(delta^{-5/2})`, `r = 2`.
pub fn distinguish_balance(x: f64, n: f64, degree: u32) -> Balance {
    let d = degree as f64;
    let delta = x.powf(-0.1) * (d * x.ln() * (n * x).ln()).powf(0.2);
    Balance::new(delta, delta.powf(-2.5), 2)
}

/// [`single_balance`], rejecting `x` below the effective range.
pub fn single_params(x: f64, n: f64, degree: u32) -> Result<Balance, EquidistError> {
    single_balance(x, n, degree).checked()
}

pub fn joint_params(x: f64, n: f64, degree: u32) -> Result<Balance, EquidistError> {
    joint_balance(x, n, degree).checked()
}

pub fn distinguish_params(x: f64, n: f64, degree: u32) -> Result<Balance, EquidistError> {
    distinguish_balance(x, n, degree).checked()
}

/// Observed angle count in an interval against `mu_ST(I) Li(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub curve: String,
    pub x: f64,
    pub interval: PiInterval,
    pub observed: u64,
    pub good_count: u64,
    pub bad_dropped: u64,
    pub main_term: f64,
    /// `|observed - main_term|`.
    pub difference: f64,
    pub signed_difference: f64,
    /// `d^{1/2} x^{3/4} (ln Nx)^{1/2}`.
    pub normalizer: f64,
    pub ratio: f64,
    pub balance: Balance,
    pub conductor: String,
    pub conductor_mode: ConductorMode,
    pub cm: bool,
}

/// Report for one curve. CM curves are reported with `cm = true` and a
/// logged warning, since the asymptotic does not apply to them.
pub fn discrepancy_report(
    table: &TraceTable,
    interval: &PiInterval,
    x: f64,
) -> Result<DiscrepancyReport, EquidistError> {
    let records = covered(table, x)?;
    let curve = table.curve();
    let cm = curve.cm_check();
    if cm {
        log::warn!("{} has complex multiplication; Sato-Tate does not apply", curve.name());
    }
    let mut observed = 0;
    let mut good_count = 0;
    for theta in good_angles(records) {
        good_count += 1;
        if interval.contains(theta) {
            observed += 1;
        }
    }
    let main_term = interval.st_measure() * li(x)?;
    let signed = observed as f64 - main_term;
    let n = curve.conductor().to_f64().unwrap_or(f64::INFINITY);
    let d = curve.degree() as f64;
    let normalizer = d.sqrt() * x.powf(0.75) * (n * x).ln().sqrt();
    Ok(DiscrepancyReport {
        curve: curve.name(),
        x,
        interval: *interval,
        observed,
        good_count,
        bad_dropped: records.len() as u64 - good_count,
        main_term,
        difference: signed.abs(),
        signed_difference: signed,
        normalizer,
        ratio: signed.abs() / normalizer,
        balance: single_balance(x, n, curve.degree()),
        conductor: curve.conductor().to_string(),
        conductor_mode: curve.conductor_mode(),
        cm,
    })
}

/// Joint angle count `sum chi_{I1}(theta_{1,p}) chi_{I2}(theta_{2,p})` over
/// primes good for both curves, against `mu_ST(I1) mu_ST(I2) Li(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDiscrepancyReport {
    pub curves: [String; 2],
    pub x: f64,
    pub intervals: [PiInterval; 2],
    pub observed: u64,
    pub good_count: u64,
    pub bad_dropped: u64,
    pub main_term: f64,
    pub difference: f64,
    pub signed_difference: f64,
    /// `d^{1/3} x^{5/6} (ln Nx)^{1/3}` with `N = N1 N2`.
    pub normalizer: f64,
    pub ratio: f64,
    pub balance: Balance,
    pub conductor: String,
    pub conductor_modes: [ConductorMode; 2],
    pub cm: [bool; 2],
}

/// Records of both tables up to `x`, checked to list the same primes.
pub fn paired_records<'a>(
    t1: &'a TraceTable,
    t2: &'a TraceTable,
    x: f64,
) -> Result<(&'a [TraceRecord], &'a [TraceRecord]), EquidistError> {
    let r1 = covered(t1, x)?;
    let r2 = covered(t2, x)?;
    if r1.len() != r2.len() || r1.iter().zip(r2).any(|(a, b)| a.p != b.p) {
        return Err(EquidistError::MismatchedTables(x));
    }
    Ok((r1, r2))
}

pub fn joint_discrepancy_report(
    t1: &TraceTable,
    t2: &TraceTable,
    i1: &PiInterval,
    i2: &PiInterval,
    x: f64,
) -> Result<JointDiscrepancyReport, EquidistError> {
    let (r1, r2) = paired_records(t1, t2, x)?;
    let (c1, c2) = (t1.curve(), t2.curve());
    let cm = [c1.cm_check(), c2.cm_check()];
    for (c, is_cm) in [(c1, cm[0]), (c2, cm[1])] {
        if is_cm {
            log::warn!("{} has complex multiplication; Sato-Tate does not apply", c.name());
        }
    }
    let mut observed = 0;
    let mut good_count = 0;
    for (a, b) in r1.iter().zip(r2) {
        if let (Some(t1), Some(t2)) = (a.theta_p, b.theta_p) {
            good_count += 1;
            if i1.contains(t1) && i2.contains(t2) {
                observed += 1;
            }
        }
    }
    let main_term = i1.st_measure() * i2.st_measure() * li(x)?;
    let signed = observed as f64 - main_term;
    let conductor = c1.conductor() * c2.conductor();
    let n = conductor.to_f64().unwrap_or(f64::INFINITY);
    let degree = c1.degree().max(c2.degree());
    let normalizer = (degree as f64).cbrt() * x.powf(5.0 / 6.0) * (n * x).ln().cbrt();
    Ok(JointDiscrepancyReport {
        curves: [c1.name(), c2.name()],
        x,
        intervals: [*i1, *i2],
        observed,
        good_count,
        bad_dropped: r1.len() as u64 - good_count,
        main_term,
        difference: signed.abs(),
        signed_difference: signed,
        normalizer,
        ratio: signed.abs() / normalizer,
        balance: joint_balance(x, n, degree),
        conductor: conductor.to_string(),
        conductor_modes: [c1.conductor_mode(), c2.conductor_mode()],
        cm,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}

/// Fitted exponent of `|difference|` in `x`, differences below 1 floored at 1.
pub fn bound_shape_fit(reports: &[DiscrepancyReport]) -> Result<f64, EquidistError> {
    if reports.len() < 3 {
        return Err(EquidistError::TooFewReports(reports.len()));
    }
    let first = &reports[0];
    let consistent = reports.windows(2).all(|w| w[0].x < w[1].x)
        && reports
            .iter()
            .all(|r| r.curve == first.curve && r.interval == first.interval);
    if !consistent {
        return Err(EquidistError::InconsistentReports);
    }
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.x, r.difference.max(1.0))).collect();
    Ok(power_law_slope(&points))
}
