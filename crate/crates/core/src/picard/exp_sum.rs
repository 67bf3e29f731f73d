//! Finite sums `Σ c·tᵏ·e^{iωt}` with exact rational frequencies.

use crate::exact::{self, Q};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExponentialSum {
    terms: BTreeMap<(u32, Q), Complex64>,
}

impl ExponentialSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::term(c, 0, Q::zero())
    }

    /// `c·tᵏ·e^{iωt}`.
    pub fn term(c: Complex64, k: u32, omega: Q) -> Self {
        let mut s = Self::zero();
        s.push(c, k, omega);
        s
    }

    pub fn exp(omega: Q) -> Self {
        Self::term(Complex64::new(1.0, 0.0), 0, omega)
    }

    fn push(&mut self, c: Complex64, k: u32, omega: Q) {
        let key = (k, omega);
        let v = self.terms.entry(key.clone()).or_insert_with(Complex64::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coefficient, power, frequency)` triples in key order.
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, u32, &Q)> {
        self.terms.iter().map(|((k, w), c)| (*c, *k, w))
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((k, w), c) in &o.terms {
            out.push(*c, *k, w.clone());
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for ((k, w), v) in &self.terms {
            out.push(v * c, *k, w.clone());
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((k1, w1), c1) in &self.terms {
            for ((k2, w2), c2) in &o.terms {
                out.push(c1 * c2, k1 + k2, w1 + w2);
            }
        }
        out
    }

    /// Multiplies by `e^{iωt}`.
    pub fn shift(&self, omega: &Q) -> Self {
        let mut out = Self::zero();
        for ((k, w), c) in &self.terms {
            out.push(*c, *k, w + omega);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for ((k, w), c) in &self.terms {
            out.push(c.conj(), *k, -w);
        }
        out
    }

    /// `t ↦ ∫₀ᵗ f`. A term is secular exactly when its frequency is the rational zero.
    pub fn integrate(&self) -> Self {
        let mut out = Self::zero();
        for ((k, w), c) in &self.terms {
            if w.is_zero() {
                out.push(c / (*k as f64 + 1.0), k + 1, Q::zero());
                continue;
            }
            // ∫ tᵏe^{iωt} = e^{iωt} Σ_j (−1)^j k!/(k−j)! t^{k−j} / (iω)^{j+1}
            let iw = Complex64::new(0.0, exact::to_f64(w));
            let mut coef = c / iw;
            for j in 0..=*k {
                out.push(coef, k - j, w.clone());
                if j == *k {
                    // value of the antiderivative at 0 is coef at t⁰
                    out.push(-coef, 0, Q::zero());
                }
                coef = -coef * (k - j) as f64 / iw;
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((k, w), c)| c * t.powi(*k as i32) * Complex64::from_polar(1.0, exact::to_f64(w) * t))
            .sum()
    }

    /// Sum of `|c|·tᵏ`, an upper bound for `|f(t)|`.
    pub fn abs_bound(&self, t: f64) -> f64 {
        self.terms.iter().map(|((k, _), c)| c.norm() * t.abs().powi(*k as i32)).sum()
    }

    /// Whether some term carries a positive power of `t`.
    pub fn has_secular(&self) -> bool {
        self.terms.keys().any(|(k, _)| *k > 0)
    }

    pub fn max_abs_frequency(&self) -> Option<Q> {
        self.terms.keys().map(|(_, w)| w.abs()).max()
    }
}

/// `t ↦ ∫₀ᵗ e^{iP(t−t′)} f(t′) dt′`.
pub fn duhamel(phase: &Q, forcing: &ExponentialSum) -> ExponentialSum {
    forcing.shift(&-phase).integrate().shift(phase)
}

impl fmt::Display for ExponentialSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((k, w), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", exact::fmt_f64(c.re), c.im)?;
            if *k > 0 {
                write!(f, "·t^{k}")?;
            }
            if !w.is_zero() {
                write!(f, "·e^(i·{}·t)", exact::format_q(w))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qr};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn integrate_constant() {
        let f = ExponentialSum::constant(c(1.0, 0.0)).integrate();
        assert_eq!(f, ExponentialSum::term(c(1.0, 0.0), 1, qi(0)));
    }

    #[test]
    fn integrate_exponential() {
        let w = qr(3, 2);
        let f = ExponentialSum::exp(w.clone()).integrate();
        for t in [0.0, 0.4, 2.0] {
            let want = (Complex64::from_polar(1.0, 1.5 * t) - 1.0) / c(0.0, 1.5);
            assert!(close(f.eval(t), want, 1e-14));
        }
    }

    #[test]
    fn integrate_t_exp_it() {
        let f = ExponentialSum::term(c(1.0, 0.0), 1, qi(1)).integrate();
        for t in [0.3, 1.0] {
            let e = Complex64::from_polar(1.0, t);
            let want = c(0.0, -t) * e + e - 1.0;
            assert!(close(f.eval(t), want, 1e-14));
        }
    }

    #[test]
    fn duhamel_examples() {
        let one = ExponentialSum::constant(c(1.0, 0.0));
        assert_eq!(duhamel(&qi(0), &one), ExponentialSum::term(c(1.0, 0.0), 1, qi(0)));
        let w = qr(7, 3);
        let d = duhamel(&w, &ExponentialSum::exp(w.clone()));
        assert_eq!(d, ExponentialSum::term(c(1.0, 0.0), 1, w));
        let d = duhamel(&qi(2), &one);
        for t in [0.1, 0.9] {
            let want = (Complex64::from_polar(1.0, 2.0 * t) - 1.0) / c(0.0, 2.0);
            assert!(close(d.eval(t), want, 1e-14));
        }
    }

    #[test]
    fn secular_only_at_exact_zero() {
        let tiny = qr(1, 1_000_000_000_000_000_000);
        let f = ExponentialSum::exp(tiny).integrate();
        assert!(!f.has_secular());
        assert!(ExponentialSum::exp(qi(0)).integrate().has_secular());
    }

    #[test]
    fn zero_coefficients_pruned() {
        let a = ExponentialSum::term(c(2.0, -1.0), 2, qr(1, 3));
        assert!(a.add(&a.scale(c(-1.0, 0.0))).is_zero());
    }

    #[test]
    fn mul_and_conj() {
        let a = ExponentialSum::exp(qi(2)).add(&ExponentialSum::constant(c(0.5, 0.0)));
        let p = a.mul(&a.conj());
        for t in [0.0, 0.7] {
            assert!(p.eval(t).im.abs() < 1e-15);
            assert!(close(p.eval(t), c(a.eval(t).norm_sqr(), 0.0), 1e-14));
        }
    }
}
