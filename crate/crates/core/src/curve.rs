//! Weierstrass models over Q.
//!
//! A [`CurveQ`] always holds a globally minimal model in reduced form
//! (`a1, a3` in `{0, 1}`, `a2` in `{-1, 0, 1}`), obtained from the invariants
//! `c4, c6` by the Laska-Kraus-Connell procedure. Two isomorphic input models
//! therefore produce identical curves.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// The thirteen rational j-invariants of curves with complex multiplication.
pub const CM_J_INVARIANTS: [i64; 13] = [
    0,
    1728,
    -3375,
    8000,
    -32768,
    54000,
    287496,
    -884736,
    -12288000,
    16581375,
    -884736000,
    -147197952000,
    -262537412640768000,
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular model: discriminant is zero")]
    Singular,
    #[error("minimal model coefficient {0} does not fit in 64 bits")]
    CoefficientOverflow(BigInt),
    #[error("conductor must be at least 1")]
    ZeroConductor,
    #[error("conductor {conductor} has a prime factor not dividing the minimal discriminant {disc}")]
    ConductorSupport { conductor: BigUint, disc: BigInt },
    #[error("internal: reduced model is not integral for c4={c4}, c6={c6}")]
    NonIntegralReduction { c4: BigInt, c6: BigInt },
}

/// How the conductor stored on a curve was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductorMode {
    Supplied,
    /// Radical of the minimal discriminant; exact for semistable curves.
    Approximated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Good,
    Bad,
}

/// Standard invariants of a long Weierstrass model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
}

impl Invariants {
    pub fn of(a: &[BigInt; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a;
        let b2: BigInt = a1 * a1 + BigInt::from(4) * a2;
        let b4: BigInt = BigInt::from(2) * a4 + a1 * a3;
        let b6: BigInt = a3 * a3 + BigInt::from(4) * a6;
        let b8 = a1 * a1 * a6 + BigInt::from(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - BigInt::from(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - BigInt::from(216) * &b6;
        let disc = -(&b2 * &b2 * &b8) - BigInt::from(8) * &b4 * &b4 * &b4 - BigInt::from(27) * &b6 * &b6
            + BigInt::from(9) * &b2 * &b4 * &b6;
        Invariants {
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
        }
    }
}

/// An elliptic curve over Q, stored as its reduced minimal model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveQ {
    coeffs: [i64; 5],
    label: Option<String>,
    c4: BigInt,
    c6: BigInt,
    disc_min: BigInt,
    conductor: BigUint,
    conductor_mode: ConductorMode,
    degree: u32,
}

fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

fn kraus_at_2(c4: &BigInt, c6: &BigInt) -> bool {
    let m4 = c6.mod_floor(&BigInt::from(4));
    if m4 == BigInt::from(3) {
        return true;
    }
    let m32 = c6.mod_floor(&BigInt::from(32));
    valuation(c4, 2) >= 4 && (m32.is_zero() || m32 == BigInt::from(8))
}

fn kraus_at_3(c6: &BigInt) -> bool {
    valuation(c6, 3) != 2
}

/// Cremona's reduced model with the given invariants, if one is integral.
fn model_from_invariants(c4: &BigInt, c6: &BigInt) -> Option<[BigInt; 5]> {
    let twelve = BigInt::from(12);
    let mut b2 = (-c6).mod_floor(&twelve);
    if b2 > BigInt::from(6) {
        b2 -= &twelve;
    }
    let (b4, r4) = (&b2 * &b2 - c4).div_rem(&BigInt::from(24));
    if !r4.is_zero() {
        return None;
    }
    let (b6, r6) = (-(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - c6).div_rem(&BigInt::from(216));
    if !r6.is_zero() {
        return None;
    }
    let two = BigInt::from(2);
    let a1 = b2.mod_floor(&two);
    let a3 = b6.mod_floor(&two);
    let exact = |num: BigInt, den: i64| {
        let (q, r) = num.div_rem(&BigInt::from(den));
        r.is_zero().then_some(q)
    };
    let a2 = exact(&b2 - &a1, 4)?;
    let a4 = exact(&b4 - &a1 * &a3, 2)?;
    let a6 = exact(&b6 - &a3, 4)?;
    Some([a1, a2, a3, a4, a6])
}

fn radical(n: &BigInt) -> BigUint {
    let n = n.magnitude().clone();
    if n.is_one() || n.is_zero() {
        return BigUint::one();
    }
    num_prime::nt_funcs::factorize(n)
        .into_keys()
        .fold(BigUint::one(), |acc, p| acc * p)
}

/// Globally minimal integral model of the curve with the given long
/// Weierstrass coefficients `[a1, a2, a3, a4, a6]`.
pub fn minimal_model(coeffs: &[BigInt; 5]) -> Result<CurveQ, CurveError> {
    let inv = Invariants::of(coeffs);
    if inv.disc.is_zero() {
        return Err(CurveError::Singular);
    }
    let (mut c4, mut c6) = (inv.c4, inv.c6);
    // Every prime with p^4 | c4 and p^6 | c6 divides gcd(c4, c6); when one
    // of them vanishes the other carries the constraint.
    let g = c4.gcd(&c6);
    let mut scale = BigInt::one();
    if !g.magnitude().is_one() {
        for (p, _) in num_prime::nt_funcs::factorize(g.magnitude().clone()) {
            let p = p.to_u64().expect("prime dividing gcd(c4, c6) is small");
            let bound = [
                valuation(&c4, p) / 4,
                valuation(&c6, p) / 6,
                valuation(&inv.disc, p) / 12,
            ]
            .into_iter()
            .min()
            .unwrap();
            let mut d = bound;
            while d > 0 {
                let u = BigInt::from(p).pow(d);
                let c4r = &c4 / u.pow(4);
                let c6r = &c6 / u.pow(6);
                let ok = match p {
                    2 => kraus_at_2(&c4r, &c6r),
                    3 => kraus_at_3(&c6r),
                    _ => true,
                };
                if ok {
                    break;
                }
                d -= 1;
            }
            if d > 0 {
                scale *= BigInt::from(p).pow(d);
            }
        }
    }
    c4 /= scale.pow(4);
    c6 /= scale.pow(6);
    let reduced = model_from_invariants(&c4, &c6).ok_or_else(|| CurveError::NonIntegralReduction {
        c4: c4.clone(),
        c6: c6.clone(),
    })?;
    let check = Invariants::of(&reduced);
    debug_assert_eq!(check.c4, c4);
    debug_assert_eq!(check.c6, c6);
    let mut small = [0i64; 5];
    for (dst, src) in small.iter_mut().zip(reduced.iter()) {
        *dst = src.to_i64().ok_or_else(|| CurveError::CoefficientOverflow(src.clone()))?;
    }
    let conductor = radical(&check.disc);
    Ok(CurveQ {
        coeffs: small,
        label: None,
        c4,
        c6,
        disc_min: check.disc,
        conductor,
        conductor_mode: ConductorMode::Approximated,
        degree: 1,
    })
}

impl CurveQ {
    /// Minimal model of `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
    pub fn from_coeffs(a: [i64; 5]) -> Result<Self, CurveError> {
        minimal_model(&a.map(BigInt::from))
    }

    /// Minimal model of `y^2 = x^3 + a4 x + a6`.
    pub fn short(a4: i64, a6: i64) -> Result<Self, CurveError> {
        Self::from_coeffs([0, 0, 0, a4, a6])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Replace the approximated conductor with a known one.
    ///
    /// Rejects values whose support is not contained in the primes of bad
    /// reduction.
    pub fn with_conductor(mut self, conductor: BigUint) -> Result<Self, CurveError> {
        if conductor.is_zero() {
            return Err(CurveError::ZeroConductor);
        }
        let disc = self.disc_min.magnitude();
        let mut rest = conductor.clone();
        loop {
            let g = rest.gcd(disc);
            if g.is_one() {
                break;
            }
            while (&rest % &g).is_zero() {
                rest /= &g;
            }
        }
        if !rest.is_one() {
            return Err(CurveError::ConductorSupport {
                conductor,
                disc: self.disc_min.clone(),
            });
        }
        self.conductor = conductor;
        self.conductor_mode = ConductorMode::Supplied;
        Ok(self)
    }

    pub fn coeffs(&self) -> [i64; 5] {
        self.coeffs
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// The label if one was given, otherwise the coefficient vector.
    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self.coeff_string(),
        }
    }

    /// `a1,a2,a3,a4,a6` of the minimal model.
    pub fn coeff_string(&self) -> String {
        let c = self.coeffs;
        format!("{},{},{},{},{}", c[0], c[1], c[2], c[3], c[4])
    }

    pub fn c4(&self) -> &BigInt {
        &self.c4
    }

    pub fn c6(&self) -> &BigInt {
        &self.c6
    }

    pub fn disc_min(&self) -> &BigInt {
        &self.disc_min
    }

    pub fn conductor(&self) -> &BigUint {
        &self.conductor
    }

    pub fn conductor_mode(&self) -> ConductorMode {
        self.conductor_mode
    }

    /// Field degree [K:Q]; always 1 here, carried for the bound formulas.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// j-invariant as a reduced fraction `(num, den)` with `den > 0`.
    pub fn j_invariant(&self) -> (BigInt, BigInt) {
        let num = &self.c4 * &self.c4 * &self.c4;
        let g = num.gcd(&self.disc_min);
        let (mut n, mut d) = (num / &g, &self.disc_min / &g);
        if d.sign() == Sign::Minus {
            n = -n;
            d = -d;
        }
        (n, d)
    }

    pub fn reduction_type(&self, p: u64) -> Reduction {
        if (&self.disc_min % BigInt::from(p)).is_zero() {
            Reduction::Bad
        } else {
            Reduction::Good
        }
    }

    /// True iff the curve has complex multiplication over Q-bar.
    pub fn cm_check(&self) -> bool {
        let (n, d) = self.j_invariant();
        d.is_one() && CM_J_INVARIANTS.iter().any(|&j| n == BigInt::from(j))
    }

    /// Quadratic twist by `d`, as the minimal model of
    /// `y^2 = x^3 - 27 d^2 c4 x - 54 d^3 c6`.
    pub fn quadratic_twist(&self, d: i64) -> Result<CurveQ, CurveError> {
        let d = BigInt::from(d);
        let a4 = -27 * &d * &d * &self.c4;
        let a6 = -54 * &d * &d * &d * &self.c6;
        let z = BigInt::zero();
        minimal_model(&[z.clone(), z.clone(), z, a4, a6])
    }

    /// `(a1, a2, a3, a4, a6)` reduced into `0..p`.
    pub(crate) fn coeffs_mod(&self, p: u64) -> [u64; 5] {
        self.coeffs.map(|a| crate::modp::reduce_i64(a, p))
    }

    /// `(c4 mod p, c6 mod p)`.
    pub(crate) fn c4_c6_mod(&self, p: u64) -> (u64, u64) {
        let m = BigInt::from(p);
        let r = |v: &BigInt| v.mod_floor(&m).to_u64().unwrap();
        (r(&self.c4), r(&self.c6))
    }
}

impl fmt::Display for CurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = self.coeffs;
        write!(f, "[{a1},{a2},{a3},{a4},{a6}]")?;
        if let Some(l) = &self.label {
            write!(f, " ({l})")?;
        }
        Ok(())
    }
}
