//! Finitely supported spectra and the first three Picard iterates.

use super::exp_sum::{duhamel, ExponentialSum};
use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::resonance::{dispersion_phase, DispersionParams, Equation};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// `ξ ↦ f̂(ξ)` on finitely many lattice points, with `f̂(ξ) = ∫ e^{−ixξ} f(x) dx`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseSpectrum {
    pub entries: BTreeMap<Q, Complex64>,
    pub real_field: bool,
}

impl SparseSpectrum {
    pub fn new(real_field: bool) -> Self {
        SparseSpectrum { entries: BTreeMap::new(), real_field }
    }

    /// `(A/π)·cos(mx)` for each `(m, A)`, whose transform is `A` at `±m`.
    pub fn cosines(modes: &[(Q, f64)]) -> Self {
        let mut s = SparseSpectrum::new(true);
        for (m, a) in modes {
            for x in [m.clone(), -m.clone()] {
                *s.entries.entry(x).or_insert_with(Complex64::zero) += Complex64::new(*a, 0.0);
            }
        }
        s.entries.retain(|_, v| !v.is_zero());
        s
    }

    pub fn get(&self, xi: &Q) -> Complex64 {
        self.entries.get(xi).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &Q> {
        self.entries.keys()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries.iter().all(|(x, v)| (self.get(&-x) - v.conj()).norm() <= tol * (1.0 + v.norm()))
    }
}

/// `ξ ↦ F_x f(ξ, t)` as exponential sums in `t`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSpectrum {
    pub entries: BTreeMap<Q, ExponentialSum>,
}

impl TimeSpectrum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, xi: &Q) -> ExponentialSum {
        self.entries.get(xi).cloned().unwrap_or_default()
    }

    pub fn eval(&self, xi: &Q, t: f64) -> Complex64 {
        self.entries.get(xi).map_or_else(Complex64::zero, |f| f.eval(t))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Q> {
        self.entries.keys()
    }

    fn insert_add(&mut self, xi: Q, f: ExponentialSum) {
        let merged = match self.entries.remove(&xi) {
            Some(g) => g.add(&f),
            None => f,
        };
        if !merged.is_zero() {
            self.entries.insert(xi, merged);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (x, f) in &o.entries {
            out.insert_add(x.clone(), f.clone());
        }
        out
    }

    /// `F_x(fg) = (1/2πσ) Σ_{ξ₁} f̂(ξ₁) ĝ(ξ − ξ₁)`.
    pub fn convolve(&self, o: &Self, sigma: &Q) -> Self {
        let w = Complex64::new(1.0 / (2.0 * PI * exact::to_f64(sigma)), 0.0);
        let mut out = Self::zero();
        for (x1, f) in &self.entries {
            for (x2, g) in &o.entries {
                out.insert_add(x1 + x2, f.mul(g).scale(w));
            }
        }
        out
    }

    /// `(1/2πσ) Σ ⟨ξ⟩^{2s} |F_x f(ξ, t)|²`, square-rooted.
    pub fn hs_norm(&self, s: f64, t: f64, sigma: &Q) -> f64 {
        let sum: f64 = self
            .entries
            .iter()
            .map(|(x, f)| {
                let xf = exact::to_f64(x);
                (1.0 + xf * xf).powf(s) * f.eval(t).norm_sqr()
            })
            .sum();
        (sum / (2.0 * PI * exact::to_f64(sigma))).sqrt()
    }

    pub fn is_hermitian(&self, t: f64, tol: f64) -> bool {
        self.entries.iter().all(|(x, f)| {
            let a = f.eval(t);
            (self.eval(&-x, t) - a.conj()).norm() <= tol * (1.0 + a.norm())
        })
    }
}

/// `φ_k`, `ψ_k` for `k = 1..=order`; index 0 holds the first iterate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PicardIterates {
    pub phi: Vec<TimeSpectrum>,
    pub psi: Vec<TimeSpectrum>,
}

/// `G(η₁, η₂, η₃) = P_{α,β}(η₁) + P_{α,β}(η₂) + P_{1,0}(η₃)` on zero-sum triples.
pub fn gamma3_g(p: &DispersionParams, eta1: &Q, eta2: &Q, eta3: &Q) -> Result<Q> {
    if !(eta1 + eta2 + eta3).is_zero() {
        return Err(Error::Domain("G is defined on triples summing to zero".into()));
    }
    Ok(dispersion_phase(p, eta1, Equation::VEquation)
        + dispersion_phase(p, eta2, Equation::VEquation)
        + dispersion_phase(p, eta3, Equation::UEquation))
}

/// `ξ ↦ c·(iξ)·∫₀ᵗ e^{iP(ξ)(t−t′)} forcing(ξ, t′) dt′`.
fn duhamel_dx(p: &DispersionParams, which: Equation, c: f64, forcing: &TimeSpectrum) -> TimeSpectrum {
    let mut out = TimeSpectrum::zero();
    for (xi, f) in &forcing.entries {
        if xi.is_zero() {
            continue;
        }
        let phase = dispersion_phase(p, xi, which);
        let g = duhamel(&phase, f).scale(Complex64::new(0.0, c * exact::to_f64(xi)));
        out.insert_add(xi.clone(), g);
    }
    out
}

fn linear(p: &DispersionParams, which: Equation, data: &SparseSpectrum) -> TimeSpectrum {
    let mut out = TimeSpectrum::zero();
    for (xi, a) in &data.entries {
        let phase = dispersion_phase(p, xi, which);
        out.insert_add(xi.clone(), ExponentialSum::term(*a, 0, phase));
    }
    out
}

/// The `δ`-derivatives at `δ = 0` of the solution with data `δ(φ, ψ)`:
///
/// ```text
/// φ₂ = −∫S ∂x(ψ₁²)            ψ₂ = −2∫S_{α,β} ∂x(φ₁ψ₁)
/// φ₃ = −3∫S ∂x(ψ₁ψ₂)          ψ₃ = −3∫S_{α,β} ∂x(φ₁ψ₂ + φ₂ψ₁)
/// ```
pub fn picard_iterates(
    p: &DispersionParams,
    phi0: &SparseSpectrum,
    psi0: &SparseSpectrum,
    order: usize,
) -> Result<PicardIterates> {
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("order must be 1, 2 or 3, got {order}")));
    }
    for xi in phi0.support().chain(psi0.support()) {
        p.lattice_index(xi)?;
    }
    let s = &p.sigma;
    let (u, v) = (Equation::UEquation, Equation::VEquation);
    let phi1 = linear(p, u, phi0);
    let psi1 = linear(p, v, psi0);
    let mut it = PicardIterates { phi: vec![phi1], psi: vec![psi1] };
    if order >= 2 {
        let (phi1, psi1) = (&it.phi[0], &it.psi[0]);
        let phi2 = duhamel_dx(p, u, -1.0, &psi1.convolve(psi1, s));
        let psi2 = duhamel_dx(p, v, -2.0, &phi1.convolve(psi1, s));
        it.phi.push(phi2);
        it.psi.push(psi2);
    }
    if order >= 3 {
        let (phi1, psi1, phi2, psi2) = (&it.phi[0], &it.psi[0], &it.phi[1], &it.psi[1]);
        let phi3 = duhamel_dx(p, u, -3.0, &psi1.convolve(psi2, s));
        let forcing = phi1.convolve(psi2, s).add(&phi2.convolve(psi1, s));
        let psi3 = duhamel_dx(p, v, -3.0, &forcing);
        it.phi.push(phi3);
        it.psi.push(psi3);
    }
    Ok(it)
}

/// `Σ_k δᵏ/k! · f_k(ξ, t)` truncated at `order`.
pub fn taylor(iterates: &[TimeSpectrum], delta: f64, order: usize, xi: &Q, t: f64) -> Complex64 {
    let mut fact = 1.0;
    let mut out = Complex64::zero();
    for (k, f) in iterates.iter().take(order).enumerate() {
        fact *= (k + 1) as f64;
        out += f.eval(xi, t) * delta.powi(k as i32 + 1) / fact;
    }
    out
}

/// Largest `|ξ|` in the support of any iterate.
pub fn max_frequency(it: &PicardIterates) -> Q {
    it.phi
        .iter()
        .chain(&it.psi)
        .flat_map(|s| s.support().map(|x| x.abs()))
        .max()
        .unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qr};

    fn params(a: i64, b: i64) -> DispersionParams {
        DispersionParams::from_ints(a, b, 1).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(gamma3_g(&params(3, 1), &qi(-4), &qi(-2), &qi(6)).unwrap(), qi(6));
        assert_eq!(gamma3_g(&params(4, 3), &qi(6), &qi(5), &qi(-11)).unwrap(), qi(0));
        let p = DispersionParams::new(qr(12, 7), qr(-2, 3), qi(1)).unwrap();
        assert_eq!(gamma3_g(&p, &qr(5, 2), &qr(-5, 2), &qi(0)).unwrap(), qi(0));
        assert!(gamma3_g(&p, &qi(1), &qi(1), &qi(1)).is_err());
    }

    #[test]
    fn g_alpha4_reduction() {
        for b in [-2i64, 1, 3, 7] {
            let p = params(4, b);
            for (e1, e3) in [(3i64, -5i64), (-2, 7), (4, 4)] {
                let (e1q, e3q) = (qi(e1), qi(e3));
                let e2 = -(&e1q + &e3q);
                let g = gamma3_g(&p, &e1q, &e2, &e3q).unwrap();
                let k = &e3q + qi(2) * &e1q;
                assert_eq!(g, qi(-3) * &e3q * (&k * &k - qr(b, 3)));
            }
        }
    }

    #[test]
    fn zero_phi_kills_psi2_and_phi3() {
        let psi0 = SparseSpectrum::cosines(&[(qi(3), 0.7), (qi(5), 0.2)]);
        let it = picard_iterates(&params(2, 1), &SparseSpectrum::new(true), &psi0, 3).unwrap();
        assert!(it.psi[1].is_zero());
        assert!(it.phi[2].is_zero());
        assert!(!it.psi[2].is_zero());
    }

    #[test]
    fn single_mode_support() {
        let d = SparseSpectrum::cosines(&[(qi(1), PI)]);
        let it = picard_iterates(&params(2, 1), &d, &d, 2).unwrap();
        let supp: Vec<Q> = it.phi[1].support().cloned().collect();
        assert_eq!(supp, vec![qi(-2), qi(2)]);
        assert!(it.phi[1].get(&qi(0)).is_zero());
        // by hand: ψ₁² has ±2 with weight π²/2π and 0 with weight 2π²/2π
        let pair = it.psi[0].convolve(&it.psi[0], &qi(1));
        assert!((pair.eval(&qi(0), 0.0).re - PI).abs() < 1e-14);
        assert!((pair.eval(&qi(2), 0.0).re - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_persists() {
        let d = SparseSpectrum::cosines(&[(qi(2), 0.4), (qi(3), -0.3)]);
        let it = picard_iterates(&params(2, 1), &d, &d, 3).unwrap();
        for t in [0.0, 0.37, 1.3] {
            for s in it.phi.iter().chain(&it.psi) {
                assert!(s.is_hermitian(t, 1e-12));
            }
        }
    }

    #[test]
    fn case1_phi2_is_secular() {
        // N = 11, n = 1: modes 6 and 5, amplitude N^{-s}, s = 1
        let a = 1.0 / 11.0;
        let d = SparseSpectrum::cosines(&[(qi(6), a), (qi(5), a)]);
        let it = picard_iterates(&params(4, 3), &SparseSpectrum::new(true), &d, 2).unwrap();
        let f = it.phi[1].get(&qi(11));
        assert!(f.has_secular());
        for t in [0.1, 0.5] {
            let want = 11.0 * t * 2.0 * a * a / (2.0 * PI);
            assert!((f.eval(t).norm() - want).abs() < 1e-13);
        }
    }
}
