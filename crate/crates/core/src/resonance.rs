//! Resonance functions on the σ-torus.
//!
//! With `ξ₂ = ξ − ξ₁`,
//!
//! ```text
//! H(ξ, ξ₁) = ξ³ − α(ξ₁³ + ξ₂³) + β_σ(ξ₁ + ξ₂) = −3αξ (ξ₁ − x₁)(ξ₁ − x₂)
//! ```
//!
//! Lattice points are `k/σ` with integer `k`. Multiplying through by `b·d·σ³`
//! (`α = a/b`, `β = c/d`) turns `H` into the integer polynomial
//! `bd·k³ − ad·(k₁³ + k₂³) + bc·k`, which is what the scans evaluate.

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::fit;
use crate::par::{self, Exec};
use crate::quad::Surd;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// `R_α`, `c₁`, `c₂`, `λ` for `α ∈ (0,4) \ {1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootConstants {
    /// `R_α² = 12/α − 3`.
    pub r2: Q,
    pub r_alpha: Surd,
    pub c1: Surd,
    pub c2: Surd,
    pub lambda: Surd,
}

impl RootConstants {
    pub fn new(alpha: &Q, beta: &Q) -> Result<Self> {
        if !alpha.is_positive() || alpha >= &exact::qi(4) || alpha == &exact::qi(1) {
            return Err(Error::OutOfScope(format!(
                "root constants need α ∈ (0,4) \\ {{1}}, got {}",
                exact::format_q(alpha)
            )));
        }
        let r2 = exact::qi(12) / alpha - exact::qi(3);
        let r_alpha = Surd::sqrt(r2.clone())?;
        let half = exact::qr(1, 2);
        let c1 = r_alpha.scale(&exact::qr(1, 6)).add_q(&half);
        let c2 = r_alpha.scale(&exact::qr(-1, 6)).add_q(&half);
        let lambda = Surd::new(Q::zero(), beta / (alpha * &r2), r2.clone())?;
        Ok(RootConstants { r2, r_alpha, c1, c2, lambda })
    }

    pub fn is_rational(&self) -> bool {
        self.r_alpha.is_rational()
    }
}

/// The constants `α`, `β`, `σ` and everything derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionParams {
    pub alpha: Q,
    pub beta: Q,
    pub sigma: Q,
    pub beta_sigma: Q,
    pub roots: Option<RootConstants>,
}

impl DispersionParams {
    pub fn new(alpha: Q, beta: Q, sigma: Q) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::Domain("α must be nonzero".into()));
        }
        if sigma < Q::one() {
            return Err(Error::Domain(format!("σ must be at least 1, got {}", exact::format_q(&sigma))));
        }
        let beta_sigma = &beta / (&sigma * &sigma);
        let roots = RootConstants::new(&alpha, &beta).ok();
        Ok(DispersionParams { alpha, beta, sigma, beta_sigma, roots })
    }

    pub fn from_ints(alpha: i64, beta: i64, sigma: i64) -> Result<Self> {
        Self::new(exact::qi(alpha), exact::qi(beta), exact::qi(sigma))
    }

    pub fn roots(&self) -> Result<&RootConstants> {
        self.roots.as_ref().ok_or_else(|| {
            Error::OutOfScope(format!("α = {} is outside (0,4) \\ {{1}}", exact::format_q(&self.alpha)))
        })
    }

    /// Lattice index `σξ` of a lattice point.
    pub fn lattice_index(&self, xi: &Q) -> Result<i64> {
        let k = xi * &self.sigma;
        exact::as_integer(&k)
            .and_then(|k| k.to_i64())
            .ok_or_else(|| Error::Domain(format!("{} is not a point of ℤ/σ", exact::format_q(xi))))
    }

    pub fn lattice_point(&self, k: i64) -> Q {
        exact::qi(k) / &self.sigma
    }

    pub fn summary(&self) -> ParamsSummary {
        let r = self.roots.as_ref();
        ParamsSummary {
            alpha: exact::format_q(&self.alpha),
            beta: exact::format_q(&self.beta),
            sigma: exact::format_q(&self.sigma),
            beta_sigma: exact::format_q(&self.beta_sigma),
            r_alpha: r.map(|r| r.r_alpha.to_f64()),
            c1: r.map(|r| r.c1.to_f64()),
            c2: r.map(|r| r.c2.to_f64()),
            lambda: r.map(|r| r.lambda.to_f64()),
            r_alpha_rational: r.map(|r| r.is_rational()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub alpha: String,
    pub beta: String,
    pub sigma: String,
    pub beta_sigma: String,
    pub r_alpha: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub lambda: Option<f64>,
    pub r_alpha_rational: Option<bool>,
}

/// Integer form of `H` on lattice indices.
#[derive(Clone, Debug)]
pub struct LatticeKernel {
    bd: i128,
    ad: i128,
    bc: i128,
    /// `b·d·σ³`; `H = h / den`.
    pub den: Q,
}

impl LatticeKernel {
    pub fn new(p: &DispersionParams) -> Result<Self> {
        let conv = |x: &BigInt| x.to_i128().ok_or_else(|| Error::Numerical("parameter too large for the lattice kernel".into()));
        let (a, b) = (p.alpha.numer(), p.alpha.denom());
        let (c, d) = (p.beta.numer(), p.beta.denom());
        let den = Q::from_integer(b * d) * &p.sigma * &p.sigma * &p.sigma;
        Ok(LatticeKernel { bd: conv(&(b * d))?, ad: conv(&(a * d))?, bc: conv(&(b * c))?, den })
    }

    /// `b·d·σ³·H(k/σ, k₁/σ)`, or `None` on `i128` overflow.
    pub fn h_scaled(&self, k: i64, k1: i64) -> Option<i128> {
        let (k, k1) = (k as i128, k1 as i128);
        let k2 = k - k1;
        let cube = |x: i128| x.checked_mul(x)?.checked_mul(x);
        let t1 = self.bd.checked_mul(cube(k)?)?;
        let t2 = self.ad.checked_mul(cube(k1)?.checked_add(cube(k2)?)?)?;
        let t3 = self.bc.checked_mul(k)?;
        t1.checked_sub(t2)?.checked_add(t3)
    }

    pub fn h(&self, k: i64, k1: i64) -> Result<Q> {
        let h = self.h_scaled(k, k1).ok_or_else(overflow)?;
        Ok(Q::from_integer(BigInt::from(h)) / &self.den)
    }
}

fn overflow() -> Error {
    Error::Numerical("lattice index too large for exact evaluation".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equation {
    UEquation,
    VEquation,
}

/// `P_{1,0}(η) = η³` for the `u` equation, `P_{α,β_σ}(η) = αη³ − β_σ η` for `v`.
pub fn dispersion_phase(p: &DispersionParams, eta: &Q, which: Equation) -> Q {
    let cube = eta * eta * eta;
    match which {
        Equation::UEquation => cube,
        Equation::VEquation => &p.alpha * cube - &p.beta_sigma * eta,
    }
}

/// `H_σ^ξ(ξ₁)`, exactly.
pub fn resonance_h(p: &DispersionParams, xi: &Q, xi1: &Q) -> Q {
    let xi2 = xi - xi1;
    let c = |x: &Q| x * x * x;
    c(xi) - &p.alpha * (c(xi1) + c(&xi2)) + &p.beta_sigma * (xi1 + &xi2)
}

/// `H̃^{ξ₁}(ξ) = 3αξ₁[(ξ − c₁ξ₁)(ξ − c₂ξ₁) − β/(3ασ²)]`, expanded with
/// `c₁ + c₂ = 1` and `c₁c₂ = (α−1)/(3α)` so it stays rational for every `α`.
pub fn resonance_h_tilde(p: &DispersionParams, xi1: &Q, xi: &Q) -> Q {
    let three = exact::qi(3);
    let a = &p.alpha;
    &three * a * xi1 * (xi * xi - xi * xi1) + (a - Q::one()) * xi1 * xi1 * xi1 - &p.beta_sigma * xi1
}

/// Roots of `ξ₁ ↦ H_σ^ξ(ξ₁)` and their expansion about `c_j ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceDecomposition {
    pub xi: Q,
    /// Root associated with `c₁`; `x₁ + x₂ = ξ`. Real parts when complex.
    pub x1: f64,
    pub x2: f64,
    pub x1_exact: Option<Surd>,
    pub x2_exact: Option<Surd>,
    /// Remainders `x₁ − (c₁ξ + λ/(σ²ξ))` and `x₂ − (c₂ξ − λ/(σ²ξ))`,
    /// evaluated without cancellation.
    pub q1: f64,
    pub q2: f64,
    pub q1_bound: f64,
    pub q2_bound: f64,
    pub expansion_valid: bool,
    pub complex_roots: bool,
    /// `x₁x₂ = (α−1)ξ²/(3α) − β/(3ασ²)`.
    pub root_product: Q,
}

pub fn decompose_roots(p: &DispersionParams, xi: &Q) -> Result<ResonanceDecomposition> {
    let rc = p.roots()?;
    if xi.is_zero() {
        return Err(Error::Domain("ξ must be nonzero".into()));
    }
    let a = &p.alpha;
    let s2 = &p.sigma * &p.sigma;
    let eps = exact::qi(12) * &p.beta / (a * &s2);
    let disc = &rc.r2 * xi * xi + &eps;
    let root_product = (a - Q::one()) * xi * xi / (exact::qi(3) * a) - &p.beta / (exact::qi(3) * a * &s2);
    let large = xi * xi * (exact::qi(12) - exact::qi(3) * a) * &s2 >= exact::qi(24) * p.beta.abs();
    let lam = rc.lambda.to_f64();
    let r = rc.r_alpha.to_f64();
    let xf = exact::to_f64(xi);
    let bound = 12.0 * lam * lam / (r * exact::to_f64(&s2).powi(2) * xf.abs().powi(3));
    let half = xi / exact::qi(2);
    let sgn = if xi.is_positive() { Q::one() } else { -Q::one() };
    if disc.is_negative() {
        let h = exact::to_f64(&half);
        return Ok(ResonanceDecomposition {
            xi: xi.clone(),
            x1: h,
            x2: h,
            x1_exact: None,
            x2_exact: None,
            q1: f64::NAN,
            q2: f64::NAN,
            q1_bound: bound,
            q2_bound: bound,
            expansion_valid: false,
            complex_roots: true,
            root_product,
        });
    }
    let x1 = Surd::new(half.clone(), &sgn * exact::qr(1, 6), disc.clone())?;
    let x2 = Surd::new(half, -&sgn * exact::qr(1, 6), disc)?;
    // x₁ − c₁ξ − λ/(σ²ξ) = −sgn(ξ)·ε²/(12·√A·(√(A+ε) + √A)²), A = R²ξ²
    let ef = exact::to_f64(&eps);
    let sa = r * xf.abs();
    let sae = (sa * sa + ef).sqrt();
    let q1 = -xf.signum() * ef * ef / (12.0 * sa * (sae + sa).powi(2));
    Ok(ResonanceDecomposition {
        xi: xi.clone(),
        x1: x1.to_f64(),
        x2: x2.to_f64(),
        x1_exact: Some(x1),
        x2_exact: Some(x2),
        q1,
        q2: -q1,
        q1_bound: bound,
        q2_bound: bound,
        expansion_valid: large,
        complex_roots: false,
        root_product,
    })
}

/// `θ(x) = min_k |x − k|`.
pub fn nearest_integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Exact `min_{j ∈ ℤ} |j² − t|` for `t ≥ 0`.
fn min_square_gap(t: &Q) -> Q {
    let j0 = exact::floor(&exact::sqrt_fixed(t, 64).unwrap_or_else(|_| Q::zero()));
    let mut best: Option<Q> = None;
    for dj in -1..=2 {
        let j: BigInt = &j0 + dj;
        if j.is_negative() {
            continue;
        }
        let g = (Q::from_integer(&j * &j) - t).abs();
        if best.as_ref().map_or(true, |b| &g < b) {
            best = Some(g);
        }
    }
    best.unwrap_or_else(Q::zero)
}

/// Which certificate class `(α, β)` belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateClass {
    Alpha4NegativeBeta,
    Alpha4Nonresonant,
    RationalRalpha,
}

pub fn certificate_class(p: &DispersionParams) -> Result<CertificateClass> {
    if p.alpha == exact::qi(4) {
        if p.beta.is_negative() {
            return Ok(CertificateClass::Alpha4NegativeBeta);
        }
        let t = &p.beta / exact::qi(3);
        let resonant = exact::rational_sqrt(&t).map_or(false, |r| r.is_integer());
        if resonant {
            return Err(Error::Unsupported("β = 3n²: H vanishes on 2ξ₁ − ξ = ±n/σ".into()));
        }
        return Ok(CertificateClass::Alpha4Nonresonant);
    }
    match &p.roots {
        Some(rc) if rc.is_rational() && !p.beta.is_zero() => Ok(CertificateClass::RationalRalpha),
        Some(_) if p.beta.is_zero() => Err(Error::Unsupported("β = 0 has no certified lower bound".into())),
        Some(_) => Err(Error::Unsupported("irrational R_α: use scan_min_resonance".into())),
        None => Err(Error::Unsupported("α outside the certified classes".into())),
    }
}

/// A bound `B ≤ |H_σ^ξ(ξ₁)|` in one of the certified classes.
///
/// * α = 4, β < 0: `3|ξ|((2ξ₁ − ξ)² + |β|/(3σ²))`.
/// * α = 4, β > 0, β ≠ 3n²: `(3|ξ|/σ²)·min_j |j² − β/3|`, at least `3|ξ|θ²(√(β/3))/σ²`.
/// * rational `R_α`, β ≠ 0: `|β||ξ|/(8σ²)` for `|ξ| > E`, else 0.
pub fn certified_lower_bound(p: &DispersionParams, xi: &Q, xi1: &Q) -> Result<Q> {
    Ok(Certificate::new(p)?.bound(xi, xi1))
}

/// [`certified_lower_bound`] with the per-parameter constants computed once.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub class: CertificateClass,
    s2: Q,
    abs_beta: Q,
    /// `min_j |j² − β/3|` for α = 4, or `E` for rational `R_α`.
    aux: Q,
}

impl Certificate {
    pub fn new(p: &DispersionParams) -> Result<Self> {
        let class = certificate_class(p)?;
        let aux = match class {
            CertificateClass::Alpha4NegativeBeta => Q::zero(),
            CertificateClass::Alpha4Nonresonant => min_square_gap(&(&p.beta / exact::qi(3))),
            CertificateClass::RationalRalpha => threshold_exact(p)?,
        };
        Ok(Certificate { class, s2: &p.sigma * &p.sigma, abs_beta: p.beta.abs(), aux })
    }

    pub fn bound(&self, xi: &Q, xi1: &Q) -> Q {
        if xi.is_zero() {
            return Q::zero();
        }
        let three = exact::qi(3);
        match self.class {
            CertificateClass::Alpha4NegativeBeta => {
                let k = exact::qi(2) * xi1 - xi;
                &three * xi.abs() * (&k * &k + &self.abs_beta / (&three * &self.s2))
            }
            CertificateClass::Alpha4Nonresonant => &three * xi.abs() / &self.s2 * &self.aux,
            CertificateClass::RationalRalpha => {
                if xi.abs() > self.aux {
                    &self.abs_beta * xi.abs() / (exact::qi(8) * &self.s2)
                } else {
                    Q::zero()
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingScan {
    pub xi: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub count: u64,
    pub bin: (f64, f64),
    /// Half-width of the enumerated `ξ₁` window around `ξ/2`.
    pub window: f64,
    /// Reference bound `8σM^{1/2}`.
    pub limit: f64,
}

/// `#{ξ₁ ∈ ℤ/σ : |H_σ^ξ(ξ₁)| ∈ [M, 2M)}` by exhaustive enumeration.
///
/// Writing `H = −3αξ[(ξ₁ − ξ/2)² + K]`, every `ξ₁` with `|H| < 2M` satisfies
/// `(ξ₁ − ξ/2)² < 2M/(3|αξ|) + |K|`; the enumeration covers that window plus
/// two lattice steps.
pub fn count_level_set(p: &DispersionParams, xi: &Q, m: f64) -> Result<CountingScan> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Domain(format!("M must be at least 1, got {m}")));
    }
    if xi.is_zero() {
        return Err(Error::Domain("ξ must be nonzero".into()));
    }
    let k = p.lattice_index(xi)?;
    let kernel = LatticeKernel::new(p)?;
    let mq = exact::from_f64(m)?;
    let lo = exact::ceil(&(&mq * &kernel.den));
    let hi = exact::ceil(&(exact::qi(2) * &mq * &kernel.den));
    let (lo, hi) = (lo.to_i128().ok_or_else(overflow)?, hi.to_i128().ok_or_else(overflow)?);
    let a = &p.alpha;
    let kk = (a - exact::qi(4)) * xi * xi / (exact::qi(12) * a)
        - &p.beta / (exact::qi(3) * a * &p.sigma * &p.sigma);
    let w2 = 2.0 * m / (3.0 * exact::to_f64(a).abs() * exact::to_f64(xi).abs()) + exact::to_f64(&kk).abs();
    let w = w2.sqrt() * (1.0 + 1e-9);
    let sig = exact::to_f64(&p.sigma);
    let centre = k as f64 / 2.0;
    let k1_lo = (centre - sig * w).floor() as i64 - 2;
    let k1_hi = (centre + sig * w).ceil() as i64 + 2;
    let mut count = 0u64;
    for k1 in k1_lo..=k1_hi {
        let h = kernel.h_scaled(k, k1).ok_or_else(overflow)?.abs();
        if h >= lo && h < hi {
            count += 1;
        }
    }
    Ok(CountingScan {
        xi: exact::to_f64(xi),
        m,
        count,
        bin: (m, 2.0 * m),
        window: w,
        limit: 8.0 * sig * m.sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinRow {
    pub xi: f64,
    pub xi1_min: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    /// Smallest certified bound over the window, when a certificate exists.
    pub bound: Option<f64>,
    /// Whether the certificate held at every scanned `ξ₁`.
    pub valid: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinScan {
    pub rows: Vec<MinRow>,
    /// Log-log slope of `min|H|` against `|ξ|` over rows with `min|H| > 0`.
    pub fitted_exponent: Option<f64>,
}

impl MinScan {
    /// Rows with the exact minimum value, for callers that need rationals.
    pub fn zero_rows(&self) -> impl Iterator<Item = &MinRow> {
        self.rows.iter().filter(|r| r.h_min == 0.0)
    }
}

/// Minimum of `|H|` over the near-resonant window for each lattice `ξ` in
/// `(0, xi_max]`. `ξ < 0` follows from `H(−ξ, −ξ₁) = −H(ξ, ξ₁)`.
pub fn scan_min_resonance(p: &DispersionParams, xi_max: f64) -> Result<MinScan> {
    scan_min_resonance_with(p, xi_max, Exec::default())
}

pub fn scan_min_resonance_with(p: &DispersionParams, xi_max: f64, exec: Exec) -> Result<MinScan> {
    if !(xi_max >= 10.0) {
        return Err(Error::Domain(format!("xi_max must be at least 10, got {xi_max}")));
    }
    let kernel = LatticeKernel::new(p)?;
    let sig = exact::to_f64(&p.sigma);
    let kmax = (xi_max * sig + 1e-9).floor() as i64;
    let cert = Certificate::new(p).ok();
    let slopes = window_slopes(p);
    let rows = par::map_range(exec, 1, kmax + 1, |k| -> Result<MinRow> {
        let xi = p.lattice_point(k);
        let (lo, hi) = near_window(p, &slopes, k, sig);
        let mut best: Option<(i128, i64)> = None;
        let mut min_bound: Option<Q> = None;
        let mut valid = true;
        for k1 in lo..=hi {
            let h = kernel.h_scaled(k, k1).ok_or_else(overflow)?.abs();
            if best.map_or(true, |b| h < b.0) {
                best = Some((h, k1));
            }
            if let Some(c) = &cert {
                let b = c.bound(&xi, &p.lattice_point(k1));
                let habs = Q::from_integer(BigInt::from(h)) / &kernel.den;
                valid &= b <= habs;
                if min_bound.as_ref().map_or(true, |m| &b < m) {
                    min_bound = Some(b);
                }
            }
        }
        let (h, k1) = best.expect("window is nonempty");
        Ok(MinRow {
            xi: exact::to_f64(&xi),
            xi1_min: k1 as f64 / sig,
            h_min: exact::to_f64(&(Q::from_integer(BigInt::from(h)) / &kernel.den)),
            bound: min_bound.map(|b| exact::to_f64(&b)),
            valid: cert.is_some().then_some(valid),
        })
    });
    let rows: Vec<MinRow> = rows.into_iter().collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.xi, r.h_min)).collect();
    let fitted_exponent = fit::loglog_slope(&pts).ok();
    Ok(MinScan { rows, fitted_exponent })
}

/// Lower and upper slopes `(c₂, c₁)` of the near-resonant window, or `None`
/// when only the `ξ/2` window applies.
fn window_slopes(p: &DispersionParams) -> Option<(f64, f64)> {
    p.roots.as_ref().map(|r| (r.c2.to_f64(), r.c1.to_f64()))
}

fn near_window(p: &DispersionParams, slopes: &Option<(f64, f64)>, k: i64, sig: f64) -> (i64, i64) {
    let kf = k as f64;
    let (mut lo, mut hi) = (kf / 2.0, kf / 2.0);
    if let Some((c2, c1)) = slopes {
        lo = lo.min(c2 * kf).min(c1 * kf);
        hi = hi.max(c2 * kf).max(c1 * kf);
    } else if p.alpha != exact::qi(4) {
        // real roots of the quadratic, if any
        let a = exact::to_f64(&p.alpha);
        let xi = kf / sig;
        let kk = (a - 4.0) * xi * xi / (12.0 * a) - exact::to_f64(&p.beta_sigma) / (3.0 * a);
        if kk < 0.0 {
            let w = (-kk).sqrt() * sig;
            lo = lo.min(kf / 2.0 - w);
            hi = hi.max(kf / 2.0 + w);
        }
    }
    let step = (2.0 * sig).ceil();
    ((lo - step).floor() as i64 - 1, (hi + step).ceil() as i64 + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    ResonanceGap,
    C2Nonvanish,
    RationalDenominator,
    DiophantineCutoff,
    RemainderDomination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub params: ParamsSummary,
    pub s: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Exact `E` when `R_α` is rational.
    pub e_exact: Option<String>,
    pub constraints_applied: Vec<Constraint>,
    pub constraint_values: Vec<(Constraint, f64)>,
    /// Values that rest on estimated Diophantine constants; not part of `E`.
    pub estimates: Vec<(Constraint, f64)>,
}

/// `E` for rational `R_α`, exactly: `max{(4/R)(1+|β|/α), 6/|3−R|, 2p|β|/(αR)}`.
fn threshold_exact(p: &DispersionParams) -> Result<Q> {
    let rc = p.roots()?;
    let r = rc.r_alpha.as_rational().ok_or_else(|| Error::Unsupported("R_α is irrational".into()))?;
    let a = &p.alpha;
    let m1 = exact::qi(4) / r * (Q::one() + p.beta.abs() / a);
    let m2 = exact::qi(6) / (exact::qi(3) - r).abs();
    let c1 = rc.c1.as_rational().expect("rational with R_α");
    let pden = Q::from_integer(c1.denom().clone());
    let m3 = exact::qi(2) * pden * p.beta.abs() / (a * r);
    Ok([m1, m2, m3].into_iter().max().expect("nonempty"))
}

/// The computable part of `E_{α,β,s}`.
pub fn threshold_e(p: &DispersionParams, s: f64) -> Result<ThresholdReport> {
    threshold_e_with(p, s, 1000)
}

/// As [`threshold_e`]; `n_max` sizes the Diophantine scan behind the
/// estimate-only constraints when `R_α` is irrational.
pub fn threshold_e_with(p: &DispersionParams, s: f64, n_max: u64) -> Result<ThresholdReport> {
    let rc = p.roots()?;
    let a = exact::to_f64(&p.alpha);
    let b = exact::to_f64(&p.beta).abs();
    let r = rc.r_alpha.to_f64();
    let mut values = vec![
        (Constraint::ResonanceGap, 4.0 / r * (1.0 + b / a)),
        (Constraint::C2Nonvanish, 6.0 / (3.0 - r).abs()),
    ];
    let mut estimates = Vec::new();
    let mut e_exact = None;
    if rc.is_rational() {
        let c1 = rc.c1.as_rational().expect("rational");
        let pden = exact::to_f64(&Q::from_integer(c1.denom().clone()));
        values.push((Constraint::RationalDenominator, 2.0 * pden * b / (a * r)));
        e_exact = Some(threshold_exact(p)?);
    } else if b > 0.0 {
        use crate::exact::ParsedReal;
        let lam = ParsedReal { value: rc.lambda.approx(256), exact: false };
        let mut n_cut = 0u64;
        let mut k1 = f64::INFINITY;
        for c in [&rc.c1, &rc.c2] {
            let est = crate::diophantine::estimate_indices(&ParsedReal { value: c.approx(256), exact: false }, &lam, n_max)?;
            n_cut = n_cut.max(est.witness_n);
            k1 = k1.min(est.witness_k);
        }
        let l = rc.lambda.to_f64();
        estimates.push((Constraint::DiophantineCutoff, n_cut as f64 + 1.0));
        estimates.push((Constraint::RemainderDomination, 24.0 * l * l / (r * k1)));
    }
    let e = match &e_exact {
        Some(q) => exact::to_f64(q),
        None => values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(ThresholdReport {
        params: p.summary(),
        s,
        e,
        e_exact: e_exact.map(|q| exact::format_q(&q)),
        constraints_applied: values.iter().map(|v| v.0).collect(),
        constraint_values: values,
        estimates,
    })
}

/// Rows of `(ξ, ξ₁)` lattice indices in the box where `H` vanishes exactly.
pub fn zero_set(p: &DispersionParams, k_max: i64, k1_max: i64, exec: Exec) -> Result<Vec<(i64, i64)>> {
    let kernel = LatticeKernel::new(p)?;
    let rows = par::map_range(exec, -k_max, k_max + 1, |k| -> Result<Vec<(i64, i64)>> {
        let mut out = Vec::new();
        for k1 in -k1_max..=k1_max {
            if kernel.h_scaled(k, k1).ok_or_else(overflow)? == 0 {
                out.push((k, k1));
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

/// Compares the exact `H` with the factored form `−3αξ(ξ₁ − x₁)(ξ₁ − x₂)`.
pub fn factored_agrees(p: &DispersionParams, xi: &Q, xi1: &Q) -> Result<bool> {
    let h = resonance_h(p, xi, xi1);
    if xi.is_zero() {
        return Ok(h.is_zero());
    }
    let d = decompose_roots(p, xi)?;
    // (ξ₁ − x₁)(ξ₁ − x₂) = ξ₁² − ξξ₁ + x₁x₂
    let prod = xi1 * xi1 - xi * xi1 + &d.root_product;
    let f = -exact::qi(3) * &p.alpha * xi * prod;
    if let (Some(x1), Some(x2)) = (&d.x1_exact, &d.x2_exact) {
        let direct = x1.mul(x2)?;
        if direct.as_rational() != Some(&d.root_product) {
            return Ok(false);
        }
    }
    Ok(f.cmp(&h) == Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qr};

    fn params(a: i64, b: i64, s: i64) -> DispersionParams {
        DispersionParams::from_ints(a, b, s).unwrap()
    }

    #[test]
    fn phase_examples() {
        let p = params(3, 1, 1);
        assert_eq!(dispersion_phase(&p, &qi(-4), Equation::VEquation), qi(-188));
        assert_eq!(dispersion_phase(&p, &qi(0), Equation::UEquation), qi(0));
        assert_eq!(dispersion_phase(&params(4, 0, 1), &qi(2), Equation::VEquation), qi(32));
    }

    #[test]
    fn h_examples() {
        assert_eq!(resonance_h(&params(2, 1, 1), &qi(10), &qi(7)), qi(270));
        assert_eq!(resonance_h(&params(2, 1, 1), &qi(0), &qi(9)), qi(0));
        assert_eq!(resonance_h(&params(4, 3, 1), &qi(3), &qi(2)), qi(0));
    }

    #[test]
    fn h_tilde_examples() {
        assert_eq!(resonance_h_tilde(&params(2, 1, 1), &qi(0), &qi(4)), qi(0));
        assert_eq!(resonance_h_tilde(&params(3, 0, 1), &qi(3), &qi(2)), qi(0));
        assert_eq!(resonance_h_tilde(&params(2, 1, 1), &qi(5), &qi(1)), qi(0));
    }

    #[test]
    fn kernel_matches_rational_formula() {
        let p = DispersionParams::new(qr(12, 7), qr(-5, 3), qr(3, 2)).unwrap();
        let kern = LatticeKernel::new(&p).unwrap();
        for (k, k1) in [(3, 1), (-7, 4), (10, -2), (0, 5)] {
            let direct = resonance_h(&p, &p.lattice_point(k), &p.lattice_point(k1));
            assert_eq!(kern.h(k, k1).unwrap(), direct);
        }
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_roots(&params(3, 3, 1), &qi(6)).unwrap();
        assert!((d.x1 - (3.0 + 2.0 * 3f64.sqrt() / 3.0)).abs() < 1e-12);
        assert!(d.expansion_valid);
        assert!(d.q1.abs() <= d.q1_bound);
        assert!((d.q1_bound - 12.0 / 216.0).abs() < 1e-15);
        let d = decompose_roots(&params(2, 0, 1), &qi(10)).unwrap();
        assert_eq!(d.q1_bound, 0.0);
        assert_eq!(d.q1, 0.0);
        let c1 = params(2, 0, 1).roots.unwrap().c1;
        assert_eq!(d.x1_exact.unwrap(), c1.scale(&qi(10)));
        assert!(!decompose_roots(&params(3, 3, 1), &qi(2)).unwrap().expansion_valid);
        let d = decompose_roots(&params(3, -300, 1), &qi(1)).unwrap();
        assert!(d.complex_roots && !d.expansion_valid);
        assert!(decompose_roots(&params(4, 1, 1), &qi(3)).is_err());
    }

    #[test]
    fn negative_xi_root_follows_c1() {
        let p = params(2, 5, 1);
        let d = decompose_roots(&p, &qi(-40)).unwrap();
        let c1 = p.roots.as_ref().unwrap().c1.to_f64();
        assert!((d.x1 - c1 * -40.0).abs() < 0.1);
        assert!((d.x1 + d.x2 + 40.0).abs() < 1e-12);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(nearest_integer_distance(0.5), 0.5);
        assert!((nearest_integer_distance((2.0f64 / 3.0).sqrt()) - 0.18350341907227).abs() < 1e-12);
        assert_eq!(nearest_integer_distance(3.0), 0.0);
    }

    #[test]
    fn certificate_examples() {
        let p = params(4, 2, 1);
        assert_eq!(certified_lower_bound(&p, &qi(5), &qi(2)).unwrap(), qi(5));
        assert_eq!(resonance_h(&p, &qi(5), &qi(2)).abs(), qi(5));
        let p = params(4, -3, 1);
        assert_eq!(certified_lower_bound(&p, &qi(7), &qi(4)).unwrap(), qi(42));
        assert_eq!(resonance_h(&p, &qi(7), &qi(4)).abs(), qi(42));
        assert_eq!(certified_lower_bound(&p, &qi(0), &qi(4)).unwrap(), qi(0));
        assert!(matches!(certified_lower_bound(&params(2, 1, 1), &qi(5), &qi(1)), Err(Error::Unsupported(_))));
        assert!(certified_lower_bound(&params(4, 12, 1), &qi(5), &qi(1)).is_err());
    }

    #[test]
    fn rational_ralpha_certificate_holds() {
        for (a, b, s) in [(3, 1, 1), (3, -2, 2), (3, 5, 1)] {
            let p = params(a, b, s);
            let kern = LatticeKernel::new(&p).unwrap();
            let cert = Certificate::new(&p).unwrap();
            for k in 1..120 {
                for k1 in -30..150 {
                    let b = cert.bound(&p.lattice_point(k), &p.lattice_point(k1));
                    assert!(b <= kern.h(k, k1).unwrap().abs(), "α={a} β={b} k={k} k1={k1}");
                }
            }
        }
    }

    #[test]
    fn counting_examples() {
        let p = params(4, 2, 1);
        assert_eq!(count_level_set(&p, &qi(5), 4.0).unwrap().count, 2);
        let c = count_level_set(&p, &qi(5), 1e6).unwrap();
        assert!((c.count as f64) <= 4.0 * 1e3);
        let p = params(4, -3, 1);
        let c = count_level_set(&p, &qi(1), 1.0).unwrap();
        let kern = LatticeKernel::new(&p).unwrap();
        let brute = (-2000..2000)
            .filter(|&k1| {
                let h = kern.h(1, k1).unwrap().abs();
                h >= qi(1) && h < qi(2)
            })
            .count() as u64;
        assert_eq!(c.count, brute);
    }

    #[test]
    fn min_scan_examples() {
        let scan = scan_min_resonance(&params(4, 2, 1), 100.0).unwrap();
        let odd_min = scan.rows.iter().filter(|r| (r.xi as i64) % 2 == 1).map(|r| r.h_min / r.xi).fold(f64::INFINITY, f64::min);
        assert_eq!(odd_min, 1.0);
        assert!(scan.rows.iter().all(|r| r.valid == Some(true)));
        let scan = scan_min_resonance(&params(4, 3, 1), 100.0).unwrap();
        assert!(scan.rows.iter().filter(|r| (r.xi as i64) % 2 == 1).all(|r| r.h_min == 0.0));
        let scan = scan_min_resonance(&params(3, 1, 1), 200.0).unwrap();
        assert!(scan.fitted_exponent.unwrap() >= 0.9);
        assert!(scan.rows.iter().all(|r| r.valid == Some(true)));
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_e(&params(3, 1, 1), 0.5).unwrap();
        assert_eq!(t.e_exact.as_deref(), Some("16/3"));
        let t = threshold_e(&params(2, 0, 1), 0.5).unwrap();
        let r = 3f64.sqrt();
        assert!((t.e - (4.0 / r).max(6.0 / (3.0 - r))).abs() < 1e-12);
        assert!(threshold_e(&params(1, 1, 1), 0.5).is_err());
    }

    #[test]
    fn threshold_implies_large_xi() {
        for (a, b) in [(3, 1), (3, -7), (2, 5), (2, -5)] {
            for s in [1, 2] {
                let p = params(a, b, s);
                let t = threshold_e(&p, 0.5).unwrap();
                let need = 24.0 * (b as f64).abs() / ((12.0 - 3.0 * a as f64) * (s * s) as f64);
                assert!(t.e * t.e >= need);
            }
        }
    }

    #[test]
    fn factored_form_agrees() {
        let p = DispersionParams::new(qi(2), qr(5, 3), qi(2)).unwrap();
        for k in [-9, -2, 1, 5, 30] {
            for k1 in [-4, 0, 3, 17] {
                assert!(factored_agrees(&p, &p.lattice_point(k), &p.lattice_point(k1)).unwrap());
            }
        }
    }
}
