//! Smallest primes at which two curves' traces differ in a prescribed way.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::equidist::{paired_records, EquidistError};
use crate::primes::is_prime;
use crate::table::{TraceRecord, TraceTable};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DistinguishError {
    #[error("ell must be prime, got {0}")]
    BadEll(u64),
    #[error(transparent)]
    Tables(#[from] EquidistError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    OppositeSign,
    UnequalTrace,
    ModEll,
}

/// Outcome of one search. `p_star` is `None` when no prime up to
/// `searched_to` qualifies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishResult {
    pub criterion: Criterion,
    pub ell: Option<u64>,
    pub curves: [String; 2],
    pub found: bool,
    pub p_star: Option<u64>,
    pub a_p: Option<[i64; 2]>,
    pub searched_to: f64,
    /// Bound shape with constant 1.
    pub bound_value: f64,
    /// `p_star <= bound_value`; false when nothing was found.
    pub within_bound: bool,
    /// `p_star / bound_value`.
    pub empirical_constant: Option<f64>,
}

struct Pair<'a> {
    r1: &'a [TraceRecord],
    r2: &'a [TraceRecord],
    x: f64,
    names: [String; 2],
    ln_n: f64,
    degree: f64,
}

fn pair<'a>(t1: &'a TraceTable, t2: &'a TraceTable) -> Result<Pair<'a>, DistinguishError> {
    let x = t1.cutoff().min(t2.cutoff());
    let (r1, r2) = paired_records(t1, t2, x)?;
    let n = (t1.curve().conductor() * t2.curve().conductor())
        .to_f64()
        .unwrap_or(f64::INFINITY);
    for t in [t1, t2] {
        if t.curve().cm_check() {
            log::warn!("{} has complex multiplication", t.curve().name());
        }
    }
    Ok(Pair {
        r1,
        r2,
        x,
        names: [t1.curve().name(), t2.curve().name()],
        ln_n: n.ln(),
        degree: t1.curve().degree().max(t2.curve().degree()) as f64,
    })
}

/// `ln ln 2N`.
fn lnln2n(ln_n: f64) -> f64 {
    (std::f64::consts::LN_2 + ln_n).ln()
}

fn scan(
    pair: Pair<'_>,
    criterion: Criterion,
    ell: Option<u64>,
    bound_value: f64,
    pred: impl Fn(i64, i64) -> bool,
) -> DistinguishResult {
    let hit = pair.r1.iter().zip(pair.r2).find_map(|(a, b)| match (a.a_p, b.a_p) {
        (Some(x), Some(y)) if pred(x, y) => Some((a.p, [x, y])),
        _ => None,
    });
    let p_star = hit.map(|h| h.0);
    DistinguishResult {
        criterion,
        ell,
        curves: pair.names,
        found: hit.is_some(),
        p_star,
        a_p: hit.map(|h| h.1),
        searched_to: pair.x,
        bound_value,
        within_bound: p_star.is_some_and(|p| p as f64 <= bound_value),
        empirical_constant: p_star.map(|p| p as f64 / bound_value),
    }
}

/// Smallest jointly good `p` with `a_p(E1) a_p(E2) < 0`. Bound shape
/// `d^2 (ln N)^2 (ln ln 2N)^2`, `N = N1 N2`.
pub fn find_opposite_sign(t1: &TraceTable, t2: &TraceTable) -> Result<DistinguishResult, DistinguishError> {
    let p = pair(t1, t2)?;
    let bound = (p.degree * p.ln_n * lnln2n(p.ln_n)).powi(2);
    Ok(scan(p, Criterion::OppositeSign, None, bound, |a, b| {
        (a < 0 && b > 0) || (a > 0 && b < 0)
    }))
}

/// Smallest jointly good `p` with `a_p(E1) != a_p(E2)`. Bound shape `(ln N)^2`.
pub fn find_unequal(t1: &TraceTable, t2: &TraceTable) -> Result<DistinguishResult, DistinguishError> {
    let p = pair(t1, t2)?;
    let bound = p.ln_n.powi(2);
    Ok(scan(p, Criterion::UnequalTrace, None, bound, |a, b| a != b))
}

/// Smallest jointly good `p` with `a_p(E1) != a_p(E2) mod ell`. Bound shape
/// `(ln N)^2 (ln ln 2N)^12`.
pub fn find_mod_l(t1: &TraceTable, t2: &TraceTable, ell: u64) -> Result<DistinguishResult, DistinguishError> {
    if !is_prime(ell) {
        return Err(DistinguishError::BadEll(ell));
    }
    let p = pair(t1, t2)?;
    let bound = p.ln_n.powi(2) * lnln2n(p.ln_n).powi(12);
    let ell_i = ell as i128;
    Ok(scan(p, Criterion::ModEll, Some(ell), bound, move |a, b| {
        (a as i128 - b as i128).rem_euclid(ell_i) != 0
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum IsogenyScreen {
    /// All traces agree up to `searched_to`. Not a proof of isogeny.
    PlausiblyIsogenous { searched_to: f64 },
    DistinguishedAt { p: u64 },
}

/// First unequal trace up to `cutoff`.
pub fn isogeny_screen(t1: &TraceTable, t2: &TraceTable, cutoff: f64) -> Result<IsogenyScreen, DistinguishError> {
    let (r1, r2) = paired_records(t1, t2, cutoff)?;
    let hit = r1.iter().zip(r2).find(|(a, b)| match (a.a_p, b.a_p) {
        (Some(x), Some(y)) => x != y,
        _ => false,
    });
    Ok(match hit {
        Some((a, _)) => IsogenyScreen::DistinguishedAt { p: a.p },
        None => IsogenyScreen::PlausiblyIsogenous { searched_to: cutoff },
    })
}
