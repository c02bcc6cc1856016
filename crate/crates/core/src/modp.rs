//! Word-sized arithmetic modulo a prime.
//!
//! Every routine here assumes `p` is an odd prime below 2^63 and that inputs
//! are already reduced into `0..p`. Products go through `u128`.

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse by the extended Euclidean algorithm; `a` must be nonzero mod `p`.
pub fn inv(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "{a} is not invertible mod {p}");
    old_s.rem_euclid(p as i128) as u64
}

/// Reduce a signed integer into `0..p`.
#[inline]
pub fn reduce_i64(a: i64, p: u64) -> u64 {
    (a as i128).rem_euclid(p as i128) as u64
}

/// Legendre symbol (a | p) for an odd prime p, computed by quadratic reciprocity.
pub fn legendre(a: u64, p: u64) -> i32 {
    let mut a = a % p;
    let mut n = p;
    let mut t = 1i32;
    if a == 0 {
        return 0;
    }
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Square root of a quadratic residue (Tonelli-Shanks).
pub fn sqrt(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow(z, q, p);
    let mut t = pow(a, q, p);
    let mut r = pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul(t2, t2, p);
            i += 1;
        }
        let b = pow(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul(b, b, p);
        t = mul(t, c, p);
        r = mul(r, b, p);
    }
    Some(r)
}

/// Smallest quadratic non-residue modulo an odd prime.
pub fn non_residue(p: u64) -> u64 {
    (2..p).find(|&z| legendre(z, p) == -1).expect("odd prime has a non-residue")
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let fits = |x: u64| x.checked_mul(x).is_some_and(|sq| sq <= n);
    let mut x = (n as f64).sqrt() as u64;
    while !fits(x) {
        x -= 1;
    }
    while fits(x + 1) {
        x += 1;
    }
    x
}
