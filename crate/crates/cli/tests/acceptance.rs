//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sato_tate::distinguish::{find_mod_l, find_opposite_sign, find_unequal};
use sato_tate::equidist::{
    bound_shape_fit, discrepancy_report, distinguish_balance, joint_balance, joint_discrepancy_report, li,
    single_balance, PiInterval,
};
use sato_tate::kernel::{
    coefficient_bound, default_m_eval, evaluate_d, fourier_coefficient, KernelParams, SmoothedIndicator,
    DEFAULT_EVAL_TOLERANCE,
};
use sato_tate::primes::primes_up_to;
use sato_tate::su2::{fourier_to_character, st_integral, st_measure_interval, su2_character};
use sato_tate::trace::{trace_bsgs, trace_exhaustive};
use sato_tate::{build_trace_table, CurveQ, Reduction, TableConfig, TraceTable};
use sato_tate_cli::{run_job, Command, Format, JobSpec};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let el = start.elapsed();
    check(el < limit, format!("took {el:.1?}, limit {limit:?}"))
}

const E11A1: [i64; 5] = [0, -1, 1, -10, -20];
const E37A1: [i64; 5] = [0, 0, 1, -1, 0];

fn table(c: [i64; 5], x: f64) -> TraceTable {
    build_trace_table(&CurveQ::from_coeffs(c).unwrap(), x, &TableConfig::default()).unwrap()
}

fn kernel_bounds() -> Outcome {
    let start = Instant::now();
    let mut sets = 0;
    let mut worst = f64::INFINITY;
    for &(a, b) in &[(0.1, 0.35), (0.0, 0.3), (-0.2, 0.3), (0.05, 0.45)] {
        for &delta in &[0.01, 0.05, 0.2] {
            for r in 1..=3 {
                let Ok(p) = KernelParams::new(a, b, delta, r) else { continue };
                sets += 1;
                for m in 1..=5000 {
                    let (am, bm) = fourier_coefficient(&p, m);
                    let bound = coefficient_bound(&p, m);
                    worst = worst.min(bound - am.abs()).min(bound - bm.abs());
                }
            }
        }
    }
    check(sets >= 12, format!("only {sets} parameter sets"))?;
    check(worst >= -1e-12, format!("slack {worst:e}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{sets} parameter sets, m <= 5000, min slack {worst:.3e}"))
}

fn kernel_regions() -> Outcome {
    let start = Instant::now();
    let params = [
        (KernelParams::new(0.1, 0.35, 0.05, 2).unwrap(), DEFAULT_EVAL_TOLERANCE),
        (KernelParams::new(-0.2, 0.3, 0.2, 3).unwrap(), DEFAULT_EVAL_TOLERANCE),
        (KernelParams::new(0.0, 0.4, 0.2, 1).unwrap(), 1e-5),
    ];
    for (p, tol) in params {
        let d = SmoothedIndicator::new(p, default_m_eval(&p, tol));
        let n = 1000;
        let (pa, pb) = (p.a + p.delta / 2.0, p.b - p.delta / 2.0);
        let (za, zb) = (p.b + p.delta / 2.0, p.a + 1.0 - p.delta / 2.0);
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let (v, e) = d.evaluate(pa + t * (pb - pa));
            check((v - 1.0).abs() <= e, format!("{p:?}: plateau value {v}, bound {e}"))?;
            let (v, e) = d.evaluate(za + t * (zb - za));
            check(v.abs() <= e, format!("{p:?}: zero-region value {v}, bound {e}"))?;
            let (v, e) = d.evaluate(t);
            check(-e <= v && v <= 1.0 + e, format!("{p:?}: range value {v}, bound {e}"))?;
        }
        // periodic trapezoid rule is exact for a truncated series of degree < pts
        let mm = 2000;
        let pts = 2 * mm as usize + 2;
        let mean = (0..pts).map(|i| evaluate_d(&p, i as f64 / pts as f64, mm).0).sum::<f64>() / pts as f64;
        check((mean - p.len()).abs() <= 1e-8, format!("{p:?}: mean {mean}"))?;
    }
    within(start, Duration::from_secs(30))?;
    Ok("plateau, zero region, range and mean for 3 kernels".into())
}

fn harmonics() -> Outcome {
    let start = Instant::now();
    for j in 0..=20u64 {
        for k in j..=20u64 {
            let q = st_integral(|t| su2_character(j, t) * su2_character(k, t));
            let want = if j == k { 1.0 } else { 0.0 };
            check((q - want).abs() <= 1e-9, format!("<chi_{j}, chi_{k}> = {q}"))?;
        }
    }
    for i in 0..=500 {
        let t = PI * i as f64 / 500.0;
        for k in 1..=30 {
            let lhs = su2_character(1, t) * su2_character(k, t);
            let rhs = su2_character(k + 1, t) + su2_character(k - 1, t);
            check((lhs - rhs).abs() <= 1e-10, format!("recurrence k = {k}, theta = {t}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(3..80);
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        c.extend([0.0, 0.0]);
        let back = fourier_to_character(&c).unwrap().to_fourier();
        for (k, v) in back.iter().enumerate() {
            check((v - c[k]).abs() <= 1e-12, "basis-change round trip")?;
        }
    }
    let mu = st_measure_interval(PI / 3.0, 2.0 * PI / 3.0).unwrap();
    check((mu - (1.0 / 3.0 + 3f64.sqrt() / (2.0 * PI))).abs() <= 1e-10, "mu_ST([pi/3, 2pi/3])")?;
    within(start, Duration::from_secs(10))?;
    Ok("orthonormality, recurrence, round trip, mu_ST".into())
}

fn literal_count(a: [i64; 5], p: i64) -> i64 {
    let [a1, a2, a3, a4, a6] = a.map(|v| v as i128);
    let p = p as i128;
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            if (y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)).rem_euclid(p) == 0 {
                n += 1;
            }
        }
    }
    n
}

fn traces() -> Outcome {
    let start = Instant::now();
    let battery = [E11A1, E37A1, [1, 0, 1, 4, -6], [1, 1, 1, -10, -10], [0, 1, 1, -2, 0], [0, 0, 1, -7, 6]];
    let mut compared = 0;
    for a in battery {
        let c = CurveQ::from_coeffs(a).unwrap();
        check(!c.cm_check(), format!("{a:?} has CM"))?;
        for p in primes_up_to(2000) {
            if c.reduction_type(p) == Reduction::Bad {
                continue;
            }
            let (e, b) = (trace_exhaustive(&c, p).unwrap(), trace_bsgs(&c, p).unwrap());
            check(e == b, format!("{a:?} p = {p}: exhaustive {e}, bsgs {b}"))?;
            compared += 1;
            if p <= 50 {
                let n = literal_count(a, p as i64);
                check(p as i64 + 1 - e == n, format!("{a:?} p = {p}: count {n}"))?;
            }
        }
        let t = build_trace_table(&c, 1e5, &TableConfig::default()).unwrap();
        for r in t.records() {
            if let Some(ap) = r.a_p {
                check((ap as i128).pow(2) <= 4 * r.p as i128, format!("Hasse at p = {}", r.p))?;
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} curves, {compared} dual-path comparisons", battery.len()))
}

fn equidistribution() -> Outcome {
    let start = Instant::now();
    let t = table(E11A1, 1e6);
    let i = PiInterval::new(1.0 / 3.0, 2.0 / 3.0).unwrap();
    let reports: Vec<_> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&x| discrepancy_report(&t, &i, x).unwrap())
        .collect();
    let norm: Vec<f64> = reports.iter().map(|r| r.difference / li(r.x).unwrap()).collect();
    for w in norm.windows(2) {
        check(w[1] <= 2.0 * w[0], format!("|diff|/Li not decreasing within 2x: {norm:?}"))?;
    }
    let slope = bound_shape_fit(&reports).unwrap();
    check(slope < 1.0, format!("slope {slope}"))?;
    within(start, Duration::from_secs(900))?;
    Ok(format!("|diff|/Li = {:.3e} {:.3e} {:.3e}, slope {slope:.3}", norm[0], norm[1], norm[2]))
}

fn two_curves() -> Outcome {
    let start = Instant::now();
    let (t1, t2) = (table(E11A1, 1e5), table(E37A1, 1e5));
    let (q1, q2) = (PiInterval::new(0.0, 0.5).unwrap(), PiInterval::new(0.5, 1.0).unwrap());
    let joint = joint_discrepancy_report(&t1, &t2, &q1, &q2, 1e5).unwrap();
    let single = discrepancy_report(&t1, &q1, 1e5).unwrap();
    let lx = li(1e5).unwrap();
    let (jn, sn) = (joint.difference / lx, single.difference / lx);
    check(jn <= sn + 0.05, format!("joint {jn} vs single {sn}"))?;
    let found = find_opposite_sign(&t1, &t2).unwrap();
    let p_star = found.p_star.ok_or("no opposite-sign prime")?;
    // from scratch: literal point counts from p = 2 upward
    let (c1, c2) = (CurveQ::from_coeffs(E11A1).unwrap(), CurveQ::from_coeffs(E37A1).unwrap());
    let mut oracle = None;
    for p in primes_up_to(p_star) {
        if c1.reduction_type(p) == Reduction::Bad || c2.reduction_type(p) == Reduction::Bad {
            continue;
        }
        let a = p as i64 + 1 - literal_count(E11A1, p as i64);
        let b = p as i64 + 1 - literal_count(E37A1, p as i64);
        if a * b < 0 {
            oracle = Some(p);
            break;
        }
    }
    check(oracle == Some(p_star), format!("scan found {oracle:?}, search found {p_star}"))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("joint {jn:.3e} <= single {sn:.3e} + 0.05, p* = {p_star}"))
}

fn predicate_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pick = || loop {
        let a = [
            rng.gen_range(0..=1),
            rng.gen_range(-1..=1),
            rng.gen_range(0..=1),
            rng.gen_range(-50..=50),
            rng.gen_range(-50..=50),
        ];
        if let Ok(c) = CurveQ::from_coeffs(a) {
            if !c.cm_check() {
                return c;
            }
        }
    };
    let mut pairs = 0;
    for _ in 0..12 {
        let (c1, c2) = (pick(), pick());
        let t1 = build_trace_table(&c1, 1e4, &TableConfig::default()).unwrap();
        let t2 = build_trace_table(&c2, 1e4, &TableConfig::default()).unwrap();
        let u = find_unequal(&t1, &t2).unwrap().p_star;
        let m = find_mod_l(&t1, &t2, 2).unwrap().p_star;
        let o = find_opposite_sign(&t1, &t2).unwrap().p_star;
        if let (Some(u), Some(m)) = (u, m) {
            check(u <= m, format!("{c1} / {c2}: unequal {u} > mod-2 {m}"))?;
        }
        if let (Some(u), Some(o)) = (u, o) {
            check(u <= o, format!("{c1} / {c2}: unequal {u} > opposite {o}"))?;
        }
        pairs += 1;
    }
    Ok(format!("{pairs} random non-CM pairs"))
}

fn parameters() -> Outcome {
    // (x, N, degree, delta) evaluated independently at 40 digits
    let single = [
        (1e6, 11.0, 1, 1.7591548330341580931),
        (1e12, 37.0, 1, 0.15444218063881080579),
        (1e30, 407.0, 2, 0.00002676902074033517353),
    ];
    let joint = [
        (1e6, 11.0, 1, 3.496699866130084198),
        (1e12, 37.0, 1, 0.87024778836019227304),
        (1e30, 407.0, 2, 0.00367170096743855974),
    ];
    let dist = [
        (1e6, 11.0, 1, 0.74139258563240889273),
        (1e12, 37.0, 1, 0.24390852678058933444),
        (1e30, 407.0, 2, 0.0063560251208048263956),
    ];
    let mut worst: f64 = 0.0;
    for (f, table) in [
        (single_balance as fn(f64, f64, u32) -> _, single),
        (joint_balance, joint),
        (distinguish_balance, dist),
    ] {
        for (x, n, d, delta) in table {
            let b = f(x, n, d);
            let rel = ((b.delta - delta) / delta).abs();
            worst = worst.max(rel);
            check(rel <= 1e-12, format!("x = {x}: {} vs {delta}", b.delta))?;
        }
    }
    Ok(format!("9 evaluations, max relative error {worst:.1e}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = JobSpec {
        command: Command::Discrepancy,
        curve: Some("11a1=0,-1,1,-10,-20".into()),
        curve2: Some("37a1=0,0,1,-1,0".into()),
        x: Some("10000".into()),
        interval: Some("0.3333333333333333:0.6666666666666666".into()),
        interval2: Some("0:0.5".into()),
        ell: 3,
        conductor: Some("11".into()),
        conductor2: None,
        format: Format::Json,
        out: None,
        threads: None,
        cache_dir: Some(dir.path().to_path_buf()),
        delta: Some(0.05),
        r: 2,
        m: 500,
    };
    let commands = [
        Command::Ap,
        Command::Angles,
        Command::KernelCheck,
        Command::Discrepancy,
        Command::Joint,
        Command::Distinguish,
        Command::Bounds,
    ];
    let mut n = 0;
    for command in commands {
        for format in [Format::Json, Format::Csv] {
            let mut s = base.clone();
            s.command = command;
            s.format = format;
            s.threads = Some(1);
            let first = run_job(&s).map_err(|e| e.to_string())?;
            let cache_before = fs::read(dir.path().join("11a1.csv")).map_err(|e| e.to_string())?;
            s.threads = Some(4);
            let second = run_job(&s).map_err(|e| e.to_string())?;
            let cache_after = fs::read(dir.path().join("11a1.csv")).map_err(|e| e.to_string())?;
            check(first == second, format!("{command:?} {format:?} differs between runs"))?;
            check(cache_before == cache_after, "cache rewritten")?;
            n += 1;
        }
    }
    Ok(format!("{n} jobs byte-identical across runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("kernel coefficient bounds", kernel_bounds),
        ("kernel regions and mean", kernel_regions),
        ("SU(2) harmonics", harmonics),
        ("traces of Frobenius", traces),
        ("single-curve equidistribution", equidistribution),
        ("two curves", two_curves),
        ("predicate ordering", predicate_ordering),
        ("balancing parameters", parameters),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = start.elapsed();
        match result {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg} ({el:.1?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg} ({el:.1?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

