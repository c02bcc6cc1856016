//! Complete tables of Frobenius data for all primes up to a cutoff.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveQ, Reduction};
use crate::primes::primes_in_range;
use crate::trace::{frobenius_angle, trace_of_frobenius, TraceError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TableError {
    #[error("cutoff must be at least 2, got {0}")]
    CutoffTooSmall(f64),
    #[error(
        "cutoff {x} needs about {needed} bytes, over the budget of {budget} bytes; \
         build up to {resume_at} first and extend in further ranges"
    )]
    OverBudget {
        x: f64,
        needed: u64,
        budget: u64,
        resume_at: u64,
    },
    #[error("records are not a complete sorted prime list up to {0}")]
    Incomplete(f64),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Local data at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub p: u64,
    pub reduction: Reduction,
    /// Present iff the reduction is good.
    pub a_p: Option<i64>,
    /// Frobenius angle in `[0, pi]`, present iff the reduction is good.
    pub theta_p: Option<f64>,
}

impl TraceRecord {
    pub fn bad(p: u64) -> Self {
        TraceRecord {
            p,
            reduction: Reduction::Bad,
            a_p: None,
            theta_p: None,
        }
    }

    pub fn good(p: u64, a_p: i64) -> Result<Self, TraceError> {
        Ok(TraceRecord {
            p,
            reduction: Reduction::Good,
            a_p: Some(a_p),
            theta_p: Some(frobenius_angle(a_p, p)?),
        })
    }

    pub fn compute(curve: &CurveQ, p: u64) -> Result<Self, TraceError> {
        match curve.reduction_type(p) {
            Reduction::Bad => Ok(Self::bad(p)),
            Reduction::Good => Self::good(p, trace_of_frobenius(curve, p)?),
        }
    }

    pub fn is_good(&self) -> bool {
        self.reduction == Reduction::Good
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TableConfig {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Upper bound on the in-memory size of the records.
    pub memory_budget: u64,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            threads: None,
            memory_budget: 2 << 30,
        }
    }
}

fn estimated_bytes(x: f64) -> u64 {
    // pi(x) < 1.26 x / ln x for x > 1
    let count = if x < 17.0 { 8.0 } else { 1.26 * x / x.ln() };
    (count * std::mem::size_of::<TraceRecord>() as f64) as u64
}

/// Largest cutoff whose table fits in `budget` bytes, rounded down to a
/// power of ten for a readable hint.
fn resume_point(budget: u64) -> u64 {
    let mut y = 10u64;
    while estimated_bytes((y * 10) as f64) <= budget {
        y *= 10;
    }
    y
}

/// Immutable table of [`TraceRecord`]s for every prime `p <= cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    curve: CurveQ,
    cutoff: f64,
    records: Vec<TraceRecord>,
}

fn compute_range(curve: &CurveQ, lo: u64, hi: u64) -> Result<Vec<TraceRecord>, TraceError> {
    primes_in_range(lo, hi)
        .into_par_iter()
        .map(|p| TraceRecord::compute(curve, p))
        .collect()
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Table of all primes up to `x` for `curve`.
pub fn build_trace_table(curve: &CurveQ, x: f64, config: &TableConfig) -> Result<TraceTable, TableError> {
    if !(x >= 2.0) {
        return Err(TableError::CutoffTooSmall(x));
    }
    check_budget(x, config)?;
    let hi = x.floor() as u64;
    let records = with_threads(config.threads, || compute_range(curve, 2, hi))?;
    Ok(TraceTable {
        curve: curve.clone(),
        cutoff: x,
        records,
    })
}

fn check_budget(x: f64, config: &TableConfig) -> Result<(), TableError> {
    let needed = estimated_bytes(x);
    if needed > config.memory_budget {
        return Err(TableError::OverBudget {
            x,
            needed,
            budget: config.memory_budget,
            resume_at: resume_point(config.memory_budget),
        });
    }
    Ok(())
}

impl TraceTable {
    /// Assemble a table from stored records, recomputing angles. The records
    /// must list every prime up to `cutoff` exactly once, in order.
    pub fn from_records(curve: CurveQ, cutoff: f64, records: Vec<TraceRecord>) -> Result<Self, TableError> {
        let expected = primes_in_range(2, cutoff.floor() as u64);
        if expected.len() != records.len() || expected.iter().zip(&records).any(|(&p, r)| p != r.p) {
            return Err(TableError::Incomplete(cutoff));
        }
        Ok(TraceTable {
            curve,
            cutoff,
            records,
        })
    }

    pub fn curve(&self) -> &CurveQ {
        &self.curve
    }

    pub fn label(&self) -> String {
        self.curve.name()
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Records with `p <= x`.
    pub fn up_to(&self, x: f64) -> &[TraceRecord] {
        let end = self.records.partition_point(|r| (r.p as f64) <= x);
        &self.records[..end]
    }

    pub fn get(&self, p: u64) -> Option<&TraceRecord> {
        self.records
            .binary_search_by_key(&p, |r| r.p)
            .ok()
            .map(|i| &self.records[i])
    }

    /// A copy holding only the primes up to `x`, with cutoff `min(x, cutoff)`.
    pub fn restricted_to(&self, x: f64) -> TraceTable {
        TraceTable {
            curve: self.curve.clone(),
            cutoff: x.min(self.cutoff),
            records: self.up_to(x).to_vec(),
        }
    }

    /// Extend to a larger cutoff, computing only the new primes.
    pub fn extend_to(&mut self, x: f64, config: &TableConfig) -> Result<(), TableError> {
        if x <= self.cutoff {
            return Ok(());
        }
        check_budget(x, config)?;
        let lo = self.cutoff.floor() as u64 + 1;
        let hi = x.floor() as u64;
        let curve = &self.curve;
        let fresh = with_threads(config.threads, || compute_range(curve, lo, hi))?;
        self.records.extend(fresh);
        self.cutoff = x;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e11a1() -> CurveQ {
        CurveQ::from_coeffs([0, -1, 1, -10, -20]).unwrap().with_label("11a1")
    }

    #[test]
    fn small_cutoffs() {
        let cfg = TableConfig::default();
        let t = build_trace_table(&e11a1(), 10.0, &cfg).unwrap();
        let ps: Vec<u64> = t.records().iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![2, 3, 5, 7]);
        assert!(t.records().iter().all(TraceRecord::is_good));

        let t = build_trace_table(&e11a1(), 11.0, &cfg).unwrap();
        let last = t.records().last().unwrap();
        assert_eq!((last.p, last.reduction), (11, Reduction::Bad));
        assert_eq!(last.a_p, None);
        assert_eq!(last.theta_p, None);
    }

    #[test]
    fn rejects_tiny_and_oversized() {
        let cfg = TableConfig {
            threads: None,
            memory_budget: 1 << 20,
        };
        assert_eq!(
            build_trace_table(&e11a1(), 1.5, &cfg),
            Err(TableError::CutoffTooSmall(1.5))
        );
        match build_trace_table(&e11a1(), 1e9, &cfg) {
            Err(TableError::OverBudget { resume_at, .. }) => {
                assert!(estimated_bytes(resume_at as f64) <= cfg.memory_budget);
            }
            other => panic!("expected OverBudget, got {other:?}"),
        }
    }

    #[test]
    fn thread_count_does_not_change_records() {
        let e = e11a1();
        let one = build_trace_table(&e, 70_000.0, &TableConfig { threads: Some(1), ..Default::default() }).unwrap();
        let four = build_trace_table(&e, 70_000.0, &TableConfig { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn extension_matches_direct_build() {
        let e = e11a1();
        let cfg = TableConfig::default();
        let mut t = build_trace_table(&e, 1000.0, &cfg).unwrap();
        t.extend_to(5000.5, &cfg).unwrap();
        assert_eq!(t, build_trace_table(&e, 5000.5, &cfg).unwrap());
        assert_eq!(t.up_to(100.0).len(), 25);
        assert_eq!(t.get(11).unwrap().reduction, Reduction::Bad);
    }

    #[test]
    fn from_records_checks_completeness() {
        let e = e11a1();
        let t = build_trace_table(&e, 50.0, &TableConfig::default()).unwrap();
        let mut recs = t.records().to_vec();
        assert_eq!(TraceTable::from_records(e.clone(), 50.0, recs.clone()).unwrap(), t);
        recs.remove(3);
        assert_eq!(
            TraceTable::from_records(e, 50.0, recs),
            Err(TableError::Incomplete(50.0))
        );
    }
}
