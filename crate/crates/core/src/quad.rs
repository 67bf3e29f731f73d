//! Numbers of the form `a + b·√d` with rational `a`, `b`, `d`.
//!
//! `R_α`, `c₁`, `c₂` and `λ` all live in `ℚ(√(12/α − 3))`, so sign tests and
//! the `[[·]]` rounding of `c₁N + λ/N` can be decided without approximation.

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq)]
pub struct Surd {
    pub a: Q,
    pub b: Q,
    /// Positive non-square radicand, or zero when the value is rational.
    pub d: Q,
}

/// Writes `√d = k·√n` with `n` an integer free of square factors below
/// `10⁵` (and not itself a square).
fn squarefree_part(d: &Q) -> (Q, BigInt) {
    let q = d.denom().clone();
    let mut n = d.numer() * &q;
    let mut k = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(100_000u32);
    while p <= limit && &p * &p <= n {
        let pp = &p * &p;
        while (&n % &pp).is_zero() {
            n /= &pp;
            k *= &p;
        }
        p += 1u32;
    }
    let r = n.sqrt();
    if &r * &r == n {
        k *= &r;
        n = BigInt::one();
    }
    (Q::new(k, q), n)
}

impl Surd {
    pub fn rational(a: Q) -> Self {
        Surd { a, b: Q::zero(), d: Q::zero() }
    }

    /// `a + b·√d`, folding `√d` into `a` when `d` is a rational square.
    pub fn new(a: Q, b: Q, d: Q) -> Result<Self> {
        if d.is_negative() {
            return Err(Error::Domain("negative radicand".into()));
        }
        if b.is_zero() || d.is_zero() {
            return Ok(Surd::rational(a));
        }
        match exact::rational_sqrt(&d) {
            Some(r) => Ok(Surd::rational(a + b * r)),
            None => {
                let (k, n) = squarefree_part(&d);
                Ok(Surd { a, b: b * k, d: Q::from_integer(n) })
            }
        }
    }

    /// `√d`.
    pub fn sqrt(d: Q) -> Result<Self> {
        Surd::new(Q::zero(), Q::one(), d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.is_rational().then_some(&self.a)
    }

    fn compatible(&self, o: &Surd) -> Result<Q> {
        match (self.is_rational(), o.is_rational()) {
            (true, true) => Ok(Q::zero()),
            (false, true) => Ok(self.d.clone()),
            (true, false) => Ok(o.d.clone()),
            (false, false) if self.d == o.d => Ok(self.d.clone()),
            _ => Err(Error::Unsupported("surds with different radicands".into())),
        }
    }

    pub fn add(&self, o: &Surd) -> Result<Surd> {
        let d = self.compatible(o)?;
        Surd::new(&self.a + &o.a, &self.b + &o.b, d)
    }

    pub fn sub(&self, o: &Surd) -> Result<Surd> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Surd {
        Surd { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }

    pub fn mul(&self, o: &Surd) -> Result<Surd> {
        let d = self.compatible(o)?;
        let a = &self.a * &o.a + &self.b * &o.b * &d;
        let b = &self.a * &o.b + &self.b * &o.a;
        Surd::new(a, b, d)
    }

    pub fn scale(&self, k: &Q) -> Surd {
        Surd { a: &self.a * k, b: &self.b * k, d: self.d.clone() }
    }

    pub fn add_q(&self, k: &Q) -> Surd {
        Surd { a: &self.a + k, b: self.b.clone(), d: self.d.clone() }
    }

    pub fn recip(&self) -> Result<Surd> {
        // 1/(a + b√d) = (a − b√d)/(a² − b²d)
        let den = &self.a * &self.a - &self.b * &self.b * &self.d;
        if den.is_zero() {
            return Err(Error::Domain("division by zero surd".into()));
        }
        Surd::new(&self.a / &den, -&self.b / &den, self.d.clone())
    }

    pub fn div(&self, o: &Surd) -> Result<Surd> {
        self.mul(&o.recip()?)
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Q::zero());
        let sb = self.b.cmp(&Q::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with b²d
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * &self.d;
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_q(&self, k: &Q) -> Ordering {
        self.add_q(&-k).signum()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return exact::floor(&self.a);
        }
        let guess = exact::floor(&self.approx(64));
        let mut k = guess;
        loop {
            let kq = Q::from_integer(k.clone());
            if self.cmp_q(&kq) == Ordering::Less {
                k -= 1;
                continue;
            }
            if self.cmp_q(&(kq + Q::one())) != Ordering::Less {
                k += 1;
                continue;
            }
            return k;
        }
    }

    /// Exact `[[·]]`. An irrational value is never a half-integer.
    pub fn round_half_even(&self) -> BigInt {
        if self.is_rational() {
            return exact::round_half_even(&self.a);
        }
        self.add_q(&exact::qr(1, 2)).floor()
    }

    /// Dyadic approximation with error below `2^-bits` (plus the truncation
    /// of the rational parts, which are exact).
    pub fn approx(&self, bits: u32) -> Q {
        if self.is_rational() {
            return self.a.clone();
        }
        // b√d = sign(b)·√(b²d)
        let r = exact::sqrt_fixed(&(&self.b * &self.b * &self.d), bits).expect("nonnegative");
        if self.b.is_negative() {
            &self.a - r
        } else {
            &self.a + r
        }
    }

    pub fn to_f64(&self) -> f64 {
        exact::to_f64(&self.approx(128))
    }
}
