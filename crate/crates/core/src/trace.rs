//! Traces of Frobenius and Frobenius angles.
//!
//! Two independent point counters are provided. [`trace_exhaustive`] sums the
//! quadratic character of the short model over all of `F_p` (or enumerates
//! points of the long model for `p = 2, 3`). [`trace_bsgs`] finds orders of
//! random points by baby-step/giant-step inside the Hasse interval and uses
//! the quadratic twist, whose group order is `2p + 2 - #E`, to pin down
//! `#E(F_p)` when one curve alone leaves several candidates.

use std::collections::HashMap;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{CurveQ, Reduction};
use crate::modp::{self, isqrt};
use crate::primes::{factor_small, is_prime};

/// Primes up to this bound use the exhaustive character sum.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

/// Largest prime for which the exhaustive path builds a residue table.
const RESIDUE_TABLE_LIMIT: u64 = 1 << 24;

const MAX_BSGS_ROUNDS: usize = 96;
/// Rounds after which the group-exponent filter is trusted.
const EXPONENT_FILTER_ROUNDS: usize = 40;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("curve has bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("Hasse bound violated: a_p = {a_p}, p = {p}")]
    HasseViolation { a_p: i64, p: u64 },
    #[error("baby-step/giant-step could not determine #E(F_{0})")]
    Unresolved(u64),
}

/// `arccos(a_p / (2 sqrt p))`, the angle in `[0, pi]` with
/// `1 - a_p T + p T^2 = (1 - sqrt(p) e^{i theta} T)(1 - sqrt(p) e^{-i theta} T)`.
///
/// `p` only needs to be positive here; the boundary `a_p^2 = 4p` is accepted.
pub fn frobenius_angle(a_p: i64, p: u64) -> Result<f64, TraceError> {
    if (a_p as i128) * (a_p as i128) > 4 * p as i128 {
        return Err(TraceError::HasseViolation { a_p, p });
    }
    let c = a_p as f64 / (2.0 * (p as f64).sqrt());
    Ok(c.clamp(-1.0, 1.0).acos())
}

fn check_good(curve: &CurveQ, p: u64) -> Result<(), TraceError> {
    if !is_prime(p) {
        return Err(TraceError::NotPrime(p));
    }
    if curve.reduction_type(p) == Reduction::Bad {
        return Err(TraceError::BadReduction(p));
    }
    Ok(())
}

/// Number of projective points of the long model over `F_p` by literal
/// enumeration of all `(x, y)` pairs. Quadratic in `p`; meant for small `p`.
pub fn count_points_enumeration(curve: &CurveQ, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = curve.coeffs_mod(p);
    let mut count = 1;
    for x in 0..p {
        let rhs = (((x + a2) % p * x % p + a4) % p * x % p + a6) % p;
        for y in 0..p {
            let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
            if lhs == rhs {
                count += 1;
            }
        }
    }
    count
}

/// Short model `y^2 = x^3 + a x + b` over `F_p`, `p >= 5`, isomorphic to the
/// reduction of `curve` (via `a = -27 c4`, `b = -54 c6`).
#[derive(Clone, Copy, Debug)]
struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Point {
    Infinity,
    Affine(u64, u64),
}

impl ShortCurve {
    fn reduce(curve: &CurveQ, p: u64) -> Self {
        let (c4, c6) = curve.c4_c6_mod(p);
        ShortCurve {
            a: modp::sub(0, modp::mul(27, c4, p), p),
            b: modp::sub(0, modp::mul(54, c6, p), p),
            p,
        }
    }

    fn twist(&self, d: u64) -> Self {
        let p = self.p;
        let d2 = modp::mul(d, d, p);
        ShortCurve {
            a: modp::mul(self.a, d2, p),
            b: modp::mul(self.b, modp::mul(d2, d, p), p),
            p,
        }
    }

    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        let x2 = modp::mul(x, x, p);
        modp::add(modp::mul(modp::add(x2, self.a, p), x, p), self.b, p)
    }

    fn add(&self, u: Point, v: Point) -> Point {
        let p = self.p;
        let (x1, y1, x2, y2) = match (u, v) {
            (Point::Infinity, _) => return v,
            (_, Point::Infinity) => return u,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if modp::add(y1, y2, p) == 0 {
                return Point::Infinity;
            }
            let num = modp::add(modp::mul(3, modp::mul(x1, x1, p), p), self.a, p);
            modp::mul(num, modp::inv(modp::add(y1, y1, p), p), p)
        } else {
            modp::mul(modp::sub(y2, y1, p), modp::inv(modp::sub(x2, x1, p), p), p)
        };
        let x3 = modp::sub(modp::sub(modp::mul(lambda, lambda, p), x1, p), x2, p);
        let y3 = modp::sub(modp::mul(lambda, modp::sub(x1, x3, p), p), y1, p);
        Point::Affine(x3, y3)
    }

    fn mul(&self, mut k: u64, pt: Point) -> Point {
        let mut acc = Point::Infinity;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        loop {
            let x = rng.gen_range(0..self.p);
            let f = self.rhs(x);
            if let Some(y) = modp::sqrt(f, self.p) {
                let y = if rng.gen::<bool>() { y } else { modp::sub(0, y, self.p) };
                return Point::Affine(x, y);
            }
        }
    }

    /// Some positive `m` with `m * pt = O`, found by baby-step/giant-step
    /// over `[lo, hi]`, which must contain the group order.
    fn annihilator(&self, pt: Point, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo;
        let s = isqrt(width) + 1;
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(s as usize);
        let mut cur = Point::Infinity;
        for j in 1..=s {
            cur = self.add(cur, pt);
            match cur {
                Point::Infinity => return Some(j),
                Point::Affine(x, y) => {
                    if let Some(&(j0, y0)) = baby.get(&x) {
                        // j P = +-j0 P
                        return Some(if y == y0 { j - j0 } else { j + j0 });
                    }
                    baby.insert(x, (j, y));
                }
            }
        }
        let step = self.mul(s, pt);
        let mut giant = self.mul(lo, pt);
        let mut i = 0u64;
        while i * s <= width + s {
            let base = lo + i * s;
            match giant {
                Point::Infinity => return Some(base),
                Point::Affine(x, y) => {
                    if let Some(&(j, yj)) = baby.get(&x) {
                        if y != yj {
                            return Some(base + j);
                        }
                        // (base - j) P = O; a zero difference says nothing
                        if base != j {
                            return Some(base.abs_diff(j));
                        }
                    }
                }
            }
            giant = self.add(giant, step);
            i += 1;
        }
        None
    }

    fn order(&self, pt: Point, lo: u64, hi: u64) -> Option<u64> {
        let mut m = self.annihilator(pt, lo, hi)?;
        for (q, _) in factor_small(m) {
            while m % q == 0 && self.mul(m / q, pt) == Point::Infinity {
                m /= q;
            }
        }
        Some(m)
    }
}

/// Trace by summing the quadratic character, or by enumeration for `p <= 3`.
pub fn trace_exhaustive(curve: &CurveQ, p: u64) -> Result<i64, TraceError> {
    check_good(curve, p)?;
    if p <= 3 {
        return Ok(p as i64 + 1 - count_points_enumeration(curve, p) as i64);
    }
    let e = ShortCurve::reduce(curve, p);
    let mut sum: i64 = 0;
    if p <= RESIDUE_TABLE_LIMIT {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for y in 1..=(p - 1) / 2 {
            chi[(y * y % p) as usize] = 1;
        }
        for x in 0..p {
            sum += chi[e.rhs(x) as usize] as i64;
        }
    } else {
        for x in 0..p {
            sum += modp::legendre(e.rhs(x), p) as i64;
        }
    }
    Ok(-sum)
}

fn hasse_interval(p: u64) -> (u64, u64) {
    let r = isqrt(4 * p);
    (p + 1 - r, p + 1 + r)
}

/// Seed derived from the curve name and the prime, so tables are
/// reproducible run to run.
pub fn bsgs_seed(name: &str, p: u64) -> u64 {
    // FNV-1a over the name, then mixed with p by splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Trace by baby-step/giant-step on random points of the curve and its
/// quadratic twist. Randomness is seeded from `(curve.name(), p)`.
///
/// For `p <= 3` the short model does not exist and this falls back to
/// enumerating the long model.
pub fn trace_bsgs(curve: &CurveQ, p: u64) -> Result<i64, TraceError> {
    check_good(curve, p)?;
    if p <= 3 {
        return Ok(p as i64 + 1 - count_points_enumeration(curve, p) as i64);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(bsgs_seed(&curve.name(), p));
    let e = ShortCurve::reduce(curve, p);
    let t = e.twist(modp::non_residue(p));
    let (lo, hi) = hasse_interval(p);
    let total = 2 * p + 2;
    let (mut l1, mut l2) = (1u64, 1u64);

    for round in 0..MAX_BSGS_ROUNDS {
        let o1 = e.order(e.random_point(&mut rng), lo, hi).ok_or(TraceError::Unresolved(p))?;
        let o2 = t.order(t.random_point(&mut rng), lo, hi).ok_or(TraceError::Unresolved(p))?;
        l1 = l1.lcm(&o1);
        l2 = l2.lcm(&o2);

        let first = lo.div_ceil(l1) * l1;
        let candidates: Vec<u64> = (first..=hi)
            .step_by(l1 as usize)
            .filter(|&n| (total - n) % l2 == 0)
            .collect();
        if let [n] = candidates[..] {
            return Ok(p as i64 + 1 - n as i64);
        }
        // E(F_p) = Z/n1 x Z/n2 with n1 | n2 and n1 | p - 1. Once l1, l2 are
        // the group exponents with overwhelming probability this rules out
        // the remaining candidates for small p.
        if round + 1 >= EXPONENT_FILTER_ROUNDS {
            let g1 = l1.gcd(&(p - 1));
            let g2 = l2.gcd(&(p - 1));
            let refined: Vec<u64> = candidates
                .iter()
                .copied()
                .filter(|&n| g1 % (n / l1) == 0 && g2 % ((total - n) / l2) == 0)
                .collect();
            if let [n] = refined[..] {
                return Ok(p as i64 + 1 - n as i64);
            }
        }
    }
    Err(TraceError::Unresolved(p))
}

/// `a_p = p + 1 - #E(F_p)` for a prime of good reduction, choosing the
/// exhaustive sum up to [`EXHAUSTIVE_LIMIT`] and baby-step/giant-step above.
pub fn trace_of_frobenius(curve: &CurveQ, p: u64) -> Result<i64, TraceError> {
    let a = if p <= EXHAUSTIVE_LIMIT {
        trace_exhaustive(curve, p)?
    } else {
        trace_bsgs(curve, p)?
    };
    if (a as i128) * (a as i128) > 4 * p as i128 {
        return Err(TraceError::HasseViolation { a_p: a, p });
    }
    Ok(a)
}
