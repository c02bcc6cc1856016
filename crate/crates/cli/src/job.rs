//! Job specification and execution.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_traits::ToPrimitive;
use sato_tate::distinguish::{find_mod_l, find_opposite_sign, find_unequal, isogeny_screen, IsogenyScreen};
use sato_tate::equidist::{
    discrepancy_report, distinguish_balance, joint_balance, joint_discrepancy_report, single_balance, Balance,
    PiInterval,
};
use sato_tate::kernel::{coefficient_bound, fourier_coefficient, KernelParams};
use sato_tate::{CurveQ, Reduction, TableConfig, TraceTable};
use serde::Serialize;

use crate::cache::{write_atomic, TableCache};
use crate::error::{computation, validation, CliError};
use crate::parse::{parse_curve, parse_cutoffs, parse_interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Traces a_p for every prime up to x.
    Ap,
    /// Frobenius angles at good primes.
    Angles,
    /// Kernel coefficients and their bounds.
    KernelCheck,
    /// Single-curve discrepancy reports.
    Discrepancy,
    /// Two-curve discrepancy reports.
    Joint,
    /// Smallest distinguishing primes.
    Distinguish,
    /// Balancing parameters.
    Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Frobenius-angle statistics for elliptic curves over Q.
///
/// Curves are `[label=]a1,a2,a3,a4,a6` or `[label=]a4,a6`. Intervals are
/// `lo:hi` in units of pi. Several cutoffs may be given as `--x 1e4,1e5`.
#[derive(Clone, Debug, Parser)]
#[command(name = "satotate", version)]
pub struct JobSpec {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub curve2: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub interval: Option<String>,
    #[arg(long)]
    pub interval2: Option<String>,
    /// Auxiliary prime for the mod-ell search.
    #[arg(long, default_value_t = 2)]
    pub ell: u64,
    /// Conductor of the first curve; approximated by rad|disc| if absent.
    #[arg(long)]
    pub conductor: Option<String>,
    #[arg(long)]
    pub conductor2: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file, written atomically; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Smoothing width for kernel-check.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Smoothing order for kernel-check.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Largest coefficient index for kernel-check.
    #[arg(long, default_value_t = 5000)]
    pub m: u64,
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    v.as_deref()
        .ok_or_else(|| CliError::Validation(format!("--{flag} is required for this command")))
}

fn interval_or_full(v: &Option<String>) -> Result<PiInterval, CliError> {
    v.as_deref().map(parse_interval).unwrap_or(Ok(PiInterval::full()))
}

/// Accumulates artifact bytes as CSV rows or JSON lines.
struct Sink {
    format: Format,
    csv: Option<csv::Writer<Vec<u8>>>,
    json: Vec<u8>,
}

impl Sink {
    fn new(format: Format, header: &[&str]) -> Result<Self, CliError> {
        let csv = match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(header).map_err(computation)?;
                Some(w)
            }
            Format::Json => None,
        };
        Ok(Sink {
            format,
            csv,
            json: Vec::new(),
        })
    }

    fn push<T: Serialize>(&mut self, row: Vec<String>, obj: &T) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self
                .csv
                .as_mut()
                .expect("csv writer")
                .write_record(&row)
                .map_err(computation),
            Format::Json => {
                serde_json::to_writer(&mut self.json, obj).map_err(computation)?;
                self.json.push(b'\n');
                Ok(())
            }
        }
    }

    fn finish(self) -> Result<Vec<u8>, CliError> {
        match self.csv {
            Some(w) => w.into_inner().map_err(|e| computation(e.error())),
            None => Ok(self.json),
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

struct Ctx {
    cache: TableCache,
}

impl Ctx {
    fn curve(&self, spec: &JobSpec, second: bool) -> Result<CurveQ, CliError> {
        if second {
            parse_curve(required(&spec.curve2, "curve2")?, spec.conductor2.as_deref())
        } else {
            parse_curve(required(&spec.curve, "curve")?, spec.conductor.as_deref())
        }
    }

    fn table(&self, curve: &CurveQ, x: f64) -> Result<TraceTable, CliError> {
        self.cache.load(curve, x)
    }
}

fn single_cutoff(spec: &JobSpec) -> Result<f64, CliError> {
    let xs = parse_cutoffs(required(&spec.x, "x")?)?;
    match xs.as_slice() {
        [x] => Ok(*x),
        _ => Err(CliError::Validation("this command takes a single --x".into())),
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Serialize)]
struct ApRow {
    p: u64,
    reduction: Reduction,
    a_p: Option<i64>,
}

#[derive(Serialize)]
struct AngleRow {
    p: u64,
    a_p: i64,
    theta: f64,
}

#[derive(Serialize)]
struct KernelRow {
    m: u64,
    a_m: f64,
    b_m: f64,
    bound: f64,
}

#[derive(Serialize)]
struct BoundRow {
    kind: &'static str,
    x: f64,
    conductor: String,
    #[serde(flatten)]
    balance: Balance,
}

fn run_ap(ctx: &Ctx, spec: &JobSpec, angles: bool) -> Result<Vec<u8>, CliError> {
    let curve = ctx.curve(spec, false)?;
    let x = single_cutoff(spec)?;
    let table = ctx.table(&curve, x)?;
    if angles {
        let mut sink = Sink::new(spec.format, &["p", "a_p", "theta"])?;
        for r in table.records() {
            if let (Some(a), Some(t)) = (r.a_p, r.theta_p) {
                let row = AngleRow { p: r.p, a_p: a, theta: t };
                sink.push(vec![r.p.to_string(), a.to_string(), t.to_string()], &row)?;
            }
        }
        sink.finish()
    } else {
        let mut sink = Sink::new(spec.format, &["p", "reduction", "a_p"])?;
        for r in table.records() {
            let red = match r.reduction {
                Reduction::Good => "good",
                Reduction::Bad => "bad",
            };
            let row = ApRow {
                p: r.p,
                reduction: r.reduction,
                a_p: r.a_p,
            };
            sink.push(vec![r.p.to_string(), red.into(), opt(r.a_p)], &row)?;
        }
        sink.finish()
    }
}

fn run_kernel_check(spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    let interval = parse_interval(required(&spec.interval, "interval")?)?;
    let delta = spec
        .delta
        .ok_or_else(|| CliError::Validation("--delta is required for kernel-check".into()))?;
    let (a, b) = interval.circle();
    let params = KernelParams::new(a, b, delta, spec.r).map_err(validation)?;
    let mut sink = Sink::new(spec.format, &["m", "a_m", "b_m", "bound"])?;
    for m in 0..=spec.m {
        let (am, bm) = fourier_coefficient(&params, m);
        let bound = if m == 0 { params.len() } else { coefficient_bound(&params, m) };
        let row = KernelRow { m, a_m: am, b_m: bm, bound };
        sink.push(
            vec![m.to_string(), am.to_string(), bm.to_string(), bound.to_string()],
            &row,
        )?;
    }
    sink.finish()
}

fn summary_row(x: f64, observed: u64, main: f64, diff: f64, ratio: f64) -> Vec<String> {
    vec![
        x.to_string(),
        observed.to_string(),
        main.to_string(),
        diff.to_string(),
        ratio.to_string(),
    ]
}

const SUMMARY: [&str; 5] = ["x", "observed", "main", "diff", "ratio"];

fn run_discrepancy(ctx: &Ctx, spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    let curve = ctx.curve(spec, false)?;
    let xs = parse_cutoffs(required(&spec.x, "x")?)?;
    let interval = interval_or_full(&spec.interval)?;
    let table = ctx.table(&curve, max_of(&xs))?;
    let mut sink = Sink::new(spec.format, &SUMMARY)?;
    for &x in &xs {
        let r = discrepancy_report(&table, &interval, x).map_err(computation)?;
        sink.push(summary_row(x, r.observed, r.main_term, r.difference, r.ratio), &r)?;
    }
    sink.finish()
}

fn run_joint(ctx: &Ctx, spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    let c1 = ctx.curve(spec, false)?;
    let c2 = ctx.curve(spec, true)?;
    let xs = parse_cutoffs(required(&spec.x, "x")?)?;
    let i1 = interval_or_full(&spec.interval)?;
    let i2 = interval_or_full(&spec.interval2)?;
    let top = max_of(&xs);
    let (t1, t2) = (ctx.table(&c1, top)?, ctx.table(&c2, top)?);
    let mut sink = Sink::new(spec.format, &SUMMARY)?;
    for &x in &xs {
        let r = joint_discrepancy_report(&t1, &t2, &i1, &i2, x).map_err(computation)?;
        sink.push(summary_row(x, r.observed, r.main_term, r.difference, r.ratio), &r)?;
    }
    sink.finish()
}

fn run_distinguish(ctx: &Ctx, spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    let c1 = ctx.curve(spec, false)?;
    let c2 = ctx.curve(spec, true)?;
    let x = single_cutoff(spec)?;
    let (t1, t2) = (ctx.table(&c1, x)?, ctx.table(&c2, x)?);
    if let IsogenyScreen::PlausiblyIsogenous { .. } = isogeny_screen(&t1, &t2, x).map_err(computation)? {
        log::warn!("{} and {} have equal traces up to {x}; plausibly isogenous", c1.name(), c2.name());
    }
    let results = [
        find_opposite_sign(&t1, &t2),
        find_unequal(&t1, &t2),
        find_mod_l(&t1, &t2, spec.ell),
    ];
    let mut sink = Sink::new(
        spec.format,
        &[
            "criterion",
            "ell",
            "found",
            "p_star",
            "a_p1",
            "a_p2",
            "searched_to",
            "bound_value",
            "within_bound",
        ],
    )?;
    for res in results {
        let r = res.map_err(|e| match e {
            sato_tate::distinguish::DistinguishError::BadEll(_) => validation(e),
            other => computation(other),
        })?;
        let criterion = serde_json::to_value(r.criterion).map_err(computation)?;
        let row = vec![
            criterion.as_str().unwrap_or_default().to_string(),
            opt(r.ell),
            r.found.to_string(),
            opt(r.p_star),
            opt(r.a_p.map(|a| a[0])),
            opt(r.a_p.map(|a| a[1])),
            r.searched_to.to_string(),
            r.bound_value.to_string(),
            r.within_bound.to_string(),
        ];
        sink.push(row, &r)?;
    }
    sink.finish()
}

fn run_bounds(ctx: &Ctx, spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    let c1 = ctx.curve(spec, false)?;
    let n1 = c1.conductor().clone();
    let n12 = match &spec.curve2 {
        Some(_) => &n1 * ctx.curve(spec, true)?.conductor(),
        None => n1.clone(),
    };
    let xs = parse_cutoffs(required(&spec.x, "x")?)?;
    let f = |n: &num_bigint::BigUint| n.to_f64().unwrap_or(f64::INFINITY);
    let mut sink = Sink::new(spec.format, &["kind", "x", "conductor", "delta", "M", "r", "in_regime"])?;
    for &x in &xs {
        let rows = [
            ("single", &n1, single_balance(x, f(&n1), c1.degree())),
            ("joint", &n12, joint_balance(x, f(&n12), c1.degree())),
            ("distinguish", &n12, distinguish_balance(x, f(&n12), c1.degree())),
        ];
        for (kind, n, balance) in rows {
            let row = BoundRow {
                kind,
                x,
                conductor: n.to_string(),
                balance,
            };
            sink.push(
                vec![
                    kind.into(),
                    x.to_string(),
                    n.to_string(),
                    balance.delta.to_string(),
                    balance.big_m.to_string(),
                    balance.r.to_string(),
                    balance.in_regime.to_string(),
                ],
                &row,
            )?;
        }
    }
    sink.finish()
}

/// Run a job and return its artifact. With `--out` the artifact is also
/// written to that path atomically.
pub fn run_job(spec: &JobSpec) -> Result<Vec<u8>, CliError> {
    if spec.threads == Some(0) {
        return Err(CliError::Validation("--threads must be positive".into()));
    }
    let config = TableConfig {
        threads: spec.threads,
        ..TableConfig::default()
    };
    let ctx = Ctx {
        cache: TableCache::new(spec.cache_dir.clone(), config),
    };
    let bytes = match spec.command {
        Command::Ap => run_ap(&ctx, spec, false),
        Command::Angles => run_ap(&ctx, spec, true),
        Command::KernelCheck => run_kernel_check(spec),
        Command::Discrepancy => run_discrepancy(&ctx, spec),
        Command::Joint => run_joint(&ctx, spec),
        Command::Distinguish => run_distinguish(&ctx, spec),
        Command::Bounds => run_bounds(&ctx, spec),
    }?;
    if let Some(path) = &spec.out {
        write_atomic(path, &bytes)?;
    }
    Ok(bytes)
}
