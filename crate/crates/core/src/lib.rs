//! Frobenius-angle statistics of elliptic curves over Q and checks of the
//! effective Sato-Tate error terms.
//!
//! * [`curve`] and [`trace`]: minimal models, reduction, `a_p`, `theta_p`.
//! * [`table`]: complete per-prime tables up to a cutoff.
//! * [`kernel`] and [`su2`]: smoothed interval indicators and their
//!   expansions in SU(2) characters.
//! * [`equidist`]: prime sums, `Li(x)`, balancing parameters and discrepancy
//!   reports for one or two curves.
//! * [`distinguish`]: smallest primes separating two curves.

pub mod curve;
pub mod distinguish;
pub mod equidist;
pub mod kernel;
pub mod modp;
pub mod primes;
pub mod quad;
pub mod su2;
pub mod table;
pub mod trace;

pub use curve::{minimal_model, ConductorMode, CurveError, CurveQ, Reduction};
pub use table::{build_trace_table, TableConfig, TableError, TraceRecord, TraceTable};
pub use trace::{frobenius_angle, trace_of_frobenius, TraceError};
