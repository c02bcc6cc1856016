//! Text forms of curves, intervals and cutoffs.

use num_bigint::{BigInt, BigUint};
use sato_tate::equidist::PiInterval;
use sato_tate::{minimal_model, CurveQ};

use crate::error::{validation, CliError};

/// Parse `[label=]a1,a2,a3,a4,a6` or `[label=]a4,a6` (commas or whitespace)
/// into a minimal model, then apply the conductor override if given.
pub fn parse_curve(text: &str, conductor: Option<&str>) -> Result<CurveQ, CliError> {
    let (label, body) = match text.split_once('=') {
        Some((l, b)) => (Some(l.trim()), b),
        None => (None, text),
    };
    let fields: Vec<&str> = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    let ints = fields
        .iter()
        .map(|f| f.parse::<BigInt>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Validation(format!("malformed curve {text:?}: expected integers")))?;
    let zero = || BigInt::from(0);
    let coeffs: [BigInt; 5] = match ints.len() {
        5 => ints.try_into().expect("five"),
        2 => [zero(), zero(), zero(), ints[0].clone(), ints[1].clone()],
        n => {
            return Err(CliError::Validation(format!(
                "malformed curve {text:?}: expected 5 or 2 integers, got {n}"
            )))
        }
    };
    let mut curve = minimal_model(&coeffs).map_err(|e| CliError::Validation(format!("curve {text:?}: {e}")))?;
    if let Some(l) = label.filter(|l| !l.is_empty()) {
        curve = curve.with_label(l);
    }
    if let Some(n) = conductor {
        let n: BigUint = n
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("malformed conductor {n:?}")))?;
        curve = curve.with_conductor(n).map_err(validation)?;
    }
    Ok(curve)
}

/// `lo:hi` in units of pi.
pub fn parse_interval(text: &str) -> Result<PiInterval, CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("interval {text:?} must look like lo:hi")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("malformed interval endpoint {s:?}")))
    };
    PiInterval::new(num(lo)?, num(hi)?).map_err(validation)
}

/// One or more comma-separated cutoffs, each at least 2.
pub fn parse_cutoffs(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("malformed cutoff {s:?}")))?;
            if !(x >= 2.0 && x.is_finite()) {
                return Err(CliError::Validation(format!("cutoff must satisfy x >= 2, got {x}")));
            }
            Ok(x)
        })
        .collect()
}
