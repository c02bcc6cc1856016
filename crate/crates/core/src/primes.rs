//! Segmented sieve of Eratosthenes.
//!
//! Segments are sieved independently against the base primes up to
//! `sqrt(hi)`, so ranges can be produced in parallel and stitched together
//! in order.

use rayon::prelude::*;

use crate::modp::isqrt;

const SEGMENT: u64 = 1 << 18;

/// All primes `<= n` by a plain sieve. Used for base primes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    // [lo, hi)
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &q in base {
        if q * q >= hi {
            break;
        }
        let mut start = q * q;
        if start < lo {
            start = lo.div_ceil(q) * q;
        }
        let mut j = start;
        while j < hi {
            composite[(j - lo) as usize] = true;
            j += q;
        }
    }
    (0..len)
        .filter(|&i| !composite[i])
        .map(|i| lo + i as u64)
        .filter(|&n| n >= 2)
        .collect()
}

/// Primes in the closed range `[lo, hi]`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = primes_up_to(isqrt(hi) + 1);
    let end = hi + 1;
    let starts: Vec<u64> = (lo..end).step_by(SEGMENT as usize).collect();
    let chunks: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&s| sieve_segment(s, (s + SEGMENT).min(end), &base))
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Deterministic primality test for 64-bit integers (Miller-Rabin with a
/// witness set that is exact below 2^64).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = crate::modp::pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = crate::modp::mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factors of `n` with multiplicity, by trial division. Only used on
/// group orders near `p`, so `n` stays small.
pub fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n % q == 0 {
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranges() {
        assert_eq!(primes_in_range(0, 10), vec![2, 3, 5, 7]);
        assert_eq!(primes_in_range(11, 11), vec![11]);
        assert_eq!(primes_in_range(14, 16), Vec::<u64>::new());
        assert!(primes_in_range(10, 2).is_empty());
    }

    #[test]
    fn segmented_matches_plain_sieve() {
        let n = 1_000_000;
        assert_eq!(primes_in_range(2, n), primes_up_to(n));
        assert_eq!(primes_up_to(n).len(), 78_498);
        let split: Vec<u64> = primes_in_range(2, 300_000)
            .into_iter()
            .chain(primes_in_range(300_001, n))
            .collect();
        assert_eq!(split, primes_up_to(n));
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let sieve = primes_up_to(20_000);
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), sieve.binary_search(&n).is_ok(), "n={n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn factoring() {
        assert_eq!(factor_small(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor_small(97), vec![(97, 1)]);
        assert_eq!(factor_small(1), vec![]);
    }
}
