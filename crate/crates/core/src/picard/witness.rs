//! The ill-posedness witness families and their growth exponents.

use super::exp_sum::ExponentialSum;
use super::spectrum::{gamma3_g, picard_iterates, SparseSpectrum};
use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::fit;
use crate::par::{self, Exec};
use crate::quad::Surd;
use crate::resonance::{dispersion_phase, DispersionParams, Equation};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessCase {
    /// α = 4, β = 3n²: two modes at `(N ± n)/2`, probe `φ₂` at `N`.
    Alpha4Resonant,
    /// α = 4, β ≠ 3n²: one mode at `N`, probe `ψ₃` at `N`.
    Alpha4Nonresonant,
    /// Rational `R_α`: modes at `c₁N`, `c₂N`, probe `ψ₃` at `N₁`.
    RationalRalpha,
    /// Irrational `R_α`: modes at `[[c₁N + λ/N]]`, `[[c₂N − λ/N]]`, probe `ψ₃` at `N₁`.
    BiasedIrrational,
    /// As [`WitnessCase::BiasedIrrational`], probing `φ₂` at `N` at time `N^{−2ε}T`.
    HighIndexIrrational,
}

impl WitnessCase {
    pub const ALL: [WitnessCase; 5] = [
        WitnessCase::Alpha4Resonant,
        WitnessCase::Alpha4Nonresonant,
        WitnessCase::RationalRalpha,
        WitnessCase::BiasedIrrational,
        WitnessCase::HighIndexIrrational,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            WitnessCase::Alpha4Resonant => "alpha4-resonant",
            WitnessCase::Alpha4Nonresonant => "alpha4-nonresonant",
            WitnessCase::RationalRalpha => "rational-ralpha",
            WitnessCase::BiasedIrrational => "biased-irrational",
            WitnessCase::HighIndexIrrational => "high-index-irrational",
        }
    }

    pub fn probes_phi2(self) -> bool {
        matches!(self, WitnessCase::Alpha4Resonant | WitnessCase::HighIndexIrrational)
    }
}

impl fmt::Display for WitnessCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for WitnessCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        WitnessCase::ALL
            .into_iter()
            .find(|c| c.cli_name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown witness case '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub case_id: WitnessCase,
    #[serde(rename = "N")]
    pub n_big: i64,
    /// `n` with `β = 3n²` in the resonant case, else 0.
    pub n: i64,
    #[serde(rename = "N1")]
    pub n1: i64,
    #[serde(rename = "N2")]
    pub n2: i64,
    pub s: f64,
    #[serde(with = "exact::serde_q")]
    pub alpha: Q,
    #[serde(with = "exact::serde_q")]
    pub beta: Q,
    /// Probe-time exponent for [`WitnessCase::HighIndexIrrational`].
    pub epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 0.05;

fn inadmissible(msg: impl Into<String>) -> Error {
    Error::Admissibility(msg.into())
}

fn as_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Numerical("mode index out of range".into()))
}

/// `[[y]]`: nearest integer, half-integers to the nearest even one.
pub fn nearint(y: &Surd) -> BigInt {
    y.round_half_even()
}

/// `([[c₁N + λ/N]], [[c₂N − λ/N]])`, decided exactly.
pub fn biased_pair(c1: &Surd, c2: &Surd, lambda: &Surd, n: i64) -> Result<(BigInt, BigInt)> {
    let inv = exact::qr(1, n);
    let y1 = c1.scale(&exact::qi(n)).add(&lambda.scale(&inv))?;
    let y2 = c2.scale(&exact::qi(n)).sub(&lambda.scale(&inv))?;
    Ok((nearint(&y1), nearint(&y2)))
}

pub fn build_witness(case_id: WitnessCase, n_big: i64, s: f64, p: &DispersionParams) -> Result<WitnessFamily> {
    if !p.sigma.is_one() {
        return Err(Error::Domain("witness families live on the unit torus (σ = 1)".into()));
    }
    if n_big <= 0 {
        return Err(inadmissible(format!("N must be positive, got {n_big}")));
    }
    if !s.is_finite() {
        return Err(Error::Domain("s must be finite".into()));
    }
    let four = exact::qi(4);
    let mut fam = WitnessFamily {
        case_id,
        n_big,
        n: 0,
        n1: 0,
        n2: 0,
        s,
        alpha: p.alpha.clone(),
        beta: p.beta.clone(),
        epsilon: DEFAULT_EPSILON,
    };
    let resonant_n = || -> Option<BigInt> {
        let r = exact::rational_sqrt(&(&p.beta / exact::qi(3)))?;
        exact::as_integer(&r)
    };
    match case_id {
        WitnessCase::Alpha4Resonant => {
            if p.alpha != four {
                return Err(inadmissible("α = 4 required"));
            }
            let n = resonant_n().ok_or_else(|| inadmissible("β = 3n² with integer n required"))?;
            let n = as_i64(&n)?;
            if n == 0 {
                return Err(inadmissible("n = 0 merges the two modes; n ≥ 1 required"));
            }
            if n_big < 10 * n + 10 {
                return Err(inadmissible(format!("N ≥ 10n + 10 = {} required", 10 * n + 10)));
            }
            if (n_big + n) % 2 != 0 {
                return Err(inadmissible("(N ± n)/2 must be integers"));
            }
            fam.n = n;
            fam.n1 = (n_big + n) / 2;
            fam.n2 = (n_big - n) / 2;
        }
        WitnessCase::Alpha4Nonresonant => {
            if p.alpha != four {
                return Err(inadmissible("α = 4 required"));
            }
            if resonant_n().is_some() {
                return Err(inadmissible("β = 3n² is the resonant case"));
            }
            fam.n1 = n_big;
        }
        WitnessCase::RationalRalpha => {
            let rc = p.roots()?;
            let c1 = rc.c1.as_rational().ok_or_else(|| inadmissible("R_α must be rational"))?;
            if p.beta.is_zero() {
                return Err(inadmissible("β ≠ 0 required"));
            }
            let n1 = c1 * exact::qi(n_big);
            let n1 = exact::as_integer(&n1)
                .ok_or_else(|| inadmissible(format!("c₁N, c₂N must be integers: N must be a multiple of {}", c1.denom())))?;
            fam.n1 = as_i64(&n1)?;
            fam.n2 = n_big - fam.n1;
        }
        WitnessCase::BiasedIrrational | WitnessCase::HighIndexIrrational => {
            let rc = p.roots()?;
            if rc.is_rational() {
                return Err(inadmissible("R_α must be irrational"));
            }
            if p.beta.is_zero() {
                return Err(inadmissible("β ≠ 0 required"));
            }
            let (n1, n2) = biased_pair(&rc.c1, &rc.c2, &rc.lambda, n_big)?;
            if &n1 + &n2 != BigInt::from(n_big) {
                return Err(inadmissible("[[c₁N + λ/N]] + [[c₂N − λ/N]] ≠ N at this N"));
            }
            fam.n1 = as_i64(&n1)?;
            fam.n2 = as_i64(&n2)?;
        }
    }
    if matches!(case_id, WitnessCase::RationalRalpha | WitnessCase::BiasedIrrational | WitnessCase::HighIndexIrrational) {
        if fam.n2 == 0 || fam.n1 == 0 {
            return Err(inadmissible("both modes must be nonzero"));
        }
        if fam.n1.abs() == fam.n2.abs() {
            return Err(inadmissible("the two modes coincide"));
        }
    }
    Ok(fam)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Iterate {
    Phi2,
    Psi3,
}

impl WitnessFamily {
    pub fn params(&self) -> Result<DispersionParams> {
        DispersionParams::new(self.alpha.clone(), self.beta.clone(), Q::one())
    }

    pub fn amplitude(&self) -> f64 {
        (self.n_big as f64).powf(-self.s)
    }

    /// Positive mode frequencies of `ψ`.
    pub fn modes(&self) -> Vec<i64> {
        match self.case_id {
            WitnessCase::Alpha4Nonresonant => vec![self.n_big],
            _ => vec![self.n1.abs(), self.n2.abs()],
        }
    }

    /// `ψ̂ = N^{−s}` on `±` each mode; `φ = 0`.
    pub fn data(&self) -> SparseSpectrum {
        let a = self.amplitude();
        let modes: Vec<(Q, f64)> = self.modes().into_iter().map(|m| (exact::qi(m), a)).collect();
        SparseSpectrum::cosines(&modes)
    }

    pub fn probe(&self) -> (Iterate, i64) {
        match self.case_id {
            WitnessCase::Alpha4Resonant | WitnessCase::HighIndexIrrational => (Iterate::Phi2, self.n_big),
            WitnessCase::Alpha4Nonresonant => (Iterate::Psi3, self.n_big),
            WitnessCase::RationalRalpha | WitnessCase::BiasedIrrational => (Iterate::Psi3, self.n1),
        }
    }

    pub fn probe_time(&self, t: f64) -> f64 {
        match self.case_id {
            WitnessCase::HighIndexIrrational => (self.n_big as f64).powf(-2.0 * self.epsilon) * t,
            _ => t,
        }
    }

    /// Exponent of `⟨probe⟩^s |amplitude|` in `N` that the construction predicts.
    pub fn expected_exponent(&self) -> f64 {
        match self.case_id {
            WitnessCase::Alpha4Resonant => 1.0 - self.s,
            WitnessCase::HighIndexIrrational => 1.0 - self.s - 2.0 * self.epsilon,
            _ => 1.0 - 2.0 * self.s,
        }
    }

    fn check_cutoff(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("T must be positive, got {t}")));
        }
        let b = exact::to_f64(&self.beta).abs();
        let nf = self.n_big as f64;
        let need = match self.case_id {
            WitnessCase::Alpha4Nonresonant => Some((2.0 / (b * t), "N > 2/(|β|T)")),
            WitnessCase::RationalRalpha | WitnessCase::BiasedIrrational => Some((4.0 / (b * t), "N > 4/(|β|T)")),
            _ => None,
        };
        match need {
            Some((c, what)) if nf <= c => Err(Error::Cutoff(format!("{what}: need N > {}", exact::fmt_f64(c)))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub xi1: i64,
    pub xi2: i64,
    /// `ξ₁ / G(ξ₂, ξ₁ − ξ₂, −ξ₁)`, absent when `G` vanishes.
    pub f: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessEvaluation {
    pub family: WitnessFamily,
    pub iterate: Iterate,
    pub probe_xi: i64,
    pub probe_time: f64,
    /// The set `𝒟`; pairs `(ξ₁, ξ − ξ₁)` when probing `φ₂`.
    pub support_pairs: Vec<(i64, i64)>,
    pub d1: Vec<(i64, i64)>,
    pub d2: Vec<(i64, i64)>,
    pub f_values: Vec<((i64, i64), Option<Q>)>,
    pub i1: Option<Complex64>,
    pub i2: Option<Complex64>,
    /// `F_x` of the probed iterate from the full Picard computation.
    pub target_mode_amplitude: Complex64,
    /// The same value from the closed form over `𝒟`.
    pub support_formula_amplitude: Complex64,
    /// `H^s` norm of the probed iterate at the probe time.
    pub hs_norm: f64,
    pub data_hs_norm: f64,
}

fn phase(p: &DispersionParams, xi: i64, w: Equation) -> Q {
    dispersion_phase(p, &exact::qi(xi), w)
}

fn g(p: &DispersionParams, a: i64, b: i64, c: i64) -> Result<Q> {
    gamma3_g(p, &exact::qi(a), &exact::qi(b), &exact::qi(c))
}

/// `t ↦ ∫₀ᵗ e^{iaτ′} ∫₀^{τ′} e^{ibτ} dτ dτ′`.
fn nested(a: &Q, b: &Q) -> ExponentialSum {
    ExponentialSum::exp(b.clone()).integrate().shift(a).integrate()
}

/// All `(ξ₁, ξ₂)` with `ξ₁ ≠ 0` and `ξ − ξ₁, ξ₂, ξ₁ − ξ₂` in `supp`.
pub fn psi3_support(supp: &BTreeSet<i64>, xi: i64) -> Vec<(i64, i64)> {
    let mut out = BTreeSet::new();
    for &x2 in supp {
        for &eta in supp {
            let x1 = x2 + eta;
            if x1 != 0 && supp.contains(&(xi - x1)) {
                out.insert((x1, x2));
            }
        }
    }
    out.into_iter().collect()
}

/// All `(ξ₁, ξ − ξ₁)` with both entries in `supp`.
pub fn phi2_support(supp: &BTreeSet<i64>, xi: i64) -> Vec<(i64, i64)> {
    supp.iter().filter(|&&x1| supp.contains(&(xi - x1))).map(|&x1| (x1, xi - x1)).collect()
}

pub fn evaluate_witness(fam: &WitnessFamily, t: f64) -> Result<WitnessEvaluation> {
    fam.check_cutoff(t)?;
    let p = fam.params()?;
    let data = fam.data();
    let supp: BTreeSet<i64> = data.support().map(|x| exact::to_i64(&x.to_integer())).collect::<Result<_>>()?;
    let (iterate, xi) = fam.probe();
    let tp = fam.probe_time(t);
    let one = Q::one();
    let order = if iterate == Iterate::Phi2 { 2 } else { 3 };
    let it = picard_iterates(&p, &SparseSpectrum::new(true), &data, order)?;
    let spec = if iterate == Iterate::Phi2 { &it.phi[1] } else { &it.psi[2] };
    let target = spec.eval(&exact::qi(xi), tp);
    let hs_norm = spec.hs_norm(fam.s, tp, &one);
    let data_hs_norm = {
        let amp = fam.amplitude();
        let sum: f64 = supp.iter().map(|&m| (1.0 + (m * m) as f64).powf(fam.s) * amp * amp).sum();
        (sum / (2.0 * PI)).sqrt()
    };
    let psi_hat = |x: i64| data.get(&exact::qi(x));
    let mut eval = WitnessEvaluation {
        family: fam.clone(),
        iterate,
        probe_xi: xi,
        probe_time: tp,
        support_pairs: Vec::new(),
        d1: Vec::new(),
        d2: Vec::new(),
        f_values: Vec::new(),
        i1: None,
        i2: None,
        target_mode_amplitude: target,
        support_formula_amplitude: Complex64::zero(),
        hs_norm,
        data_hs_norm,
    };
    match iterate {
        Iterate::Phi2 => {
            // φ₂(ξ,t) = −iξ e^{iξ³t} (1/2π) Σ ψ̂(ξ₁)ψ̂(ξ−ξ₁) ∫₀ᵗ e^{iG(ξ₁, ξ−ξ₁, −ξ)t′}dt′
            let pairs = phi2_support(&supp, xi);
            let mut sum = ExponentialSum::zero();
            for &(x1, x2) in &pairs {
                let gq = g(&p, x1, x2, -xi)?;
                sum = sum.add(&ExponentialSum::exp(gq).integrate().scale(psi_hat(x1) * psi_hat(x2)));
            }
            let pre = Complex64::new(0.0, -(xi as f64) / (2.0 * PI));
            let f = sum.shift(&phase(&p, xi, Equation::UEquation)).scale(pre);
            eval.support_formula_amplitude = f.eval(tp);
            eval.support_pairs = pairs;
        }
        Iterate::Psi3 => {
            // ψ₃(ξ,t) = −3ξ e^{iP(ξ)t}/(4π²) Σ_𝒟 ξ₁ ψ̂(ξ−ξ₁)ψ̂(ξ₂)ψ̂(ξ₁−ξ₂) ∫∫ e^{iG_a t′} e^{iG_b τ}
            let pairs = psi3_support(&supp, xi);
            let mut sum = ExponentialSum::zero();
            let mut i1 = Complex64::zero();
            let mut i2 = Complex64::zero();
            let split = matches!(fam.case_id, WitnessCase::RationalRalpha | WitnessCase::BiasedIrrational);
            for &(x1, x2) in &pairs {
                let ga = g(&p, -xi, xi - x1, x1)?;
                let gb = g(&p, x2, x1 - x2, -x1)?;
                let w = psi_hat(xi - x1) * psi_hat(x2) * psi_hat(x1 - x2) * x1 as f64;
                sum = sum.add(&nested(&ga, &gb).scale(w));
                let f = (!gb.is_zero()).then(|| exact::qi(x1) / &gb);
                if let Some(fq) = &f {
                    // 𝒢 = e^{it′(G_a + G_b)} − e^{it′G_a}
                    let script = ExponentialSum::exp(&ga + &gb).add(&ExponentialSum::exp(ga.clone()).scale(Complex64::new(-1.0, 0.0)));
                    let v = script.integrate().eval(tp) * exact::to_f64(fq);
                    let in_d1 = split && x1 == fam.n_big && (x2 == fam.n1 || x2 == fam.n2);
                    if in_d1 || !split {
                        i1 += v;
                    } else {
                        i2 += v;
                    }
                }
                if split && x1 == fam.n_big && (x2 == fam.n1 || x2 == fam.n2) {
                    eval.d1.push((x1, x2));
                } else {
                    eval.d2.push((x1, x2));
                }
                eval.f_values.push(((x1, x2), f));
            }
            let pre = Complex64::new(-3.0 * xi as f64 / (4.0 * PI * PI), 0.0);
            let f = sum.shift(&phase(&p, xi, Equation::VEquation)).scale(pre);
            eval.support_formula_amplitude = f.eval(tp);
            eval.support_pairs = pairs;
            eval.i1 = Some(i1);
            eval.i2 = split.then_some(i2);
        }
    }
    Ok(eval)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub case: WitnessCase,
    #[serde(rename = "N")]
    pub n_big: i64,
    #[serde(rename = "N1")]
    pub n1: i64,
    #[serde(rename = "N2")]
    pub n2: i64,
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub probe_xi: i64,
    pub probe_time: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub hs_norm: f64,
    pub slope_partial: Option<f64>,
    pub support_pairs: Vec<(i64, i64)>,
    pub f_values: Vec<FValue>,
    pub i1: Option<(f64, f64)>,
    pub i2: Option<(f64, f64)>,
}

impl WitnessEvaluation {
    pub fn report(&self, t: f64, slope_partial: Option<f64>) -> WitnessReport {
        let f = &self.family;
        WitnessReport {
            case: f.case_id,
            n_big: f.n_big,
            n1: f.n1,
            n2: f.n2,
            s: f.s,
            t,
            probe_xi: self.probe_xi,
            probe_time: self.probe_time,
            amplitude_re: self.target_mode_amplitude.re,
            amplitude_im: self.target_mode_amplitude.im,
            hs_norm: self.hs_norm,
            slope_partial,
            support_pairs: self.support_pairs.clone(),
            f_values: self
                .f_values
                .iter()
                .map(|((a, b), q)| FValue { xi1: *a, xi2: *b, f: q.as_ref().map(exact::format_q) })
                .collect(),
            i1: self.i1.map(|c| (c.re, c.im)),
            i2: self.i2.map(|c| (c.re, c.im)),
        }
    }

    /// `⟨probe⟩^s |amplitude|`.
    pub fn weighted_amplitude(&self) -> f64 {
        let x = self.probe_xi as f64;
        (1.0 + x * x).powf(self.family.s / 2.0) * self.target_mode_amplitude.norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "N")]
    pub n_big: i64,
    #[serde(rename = "N1")]
    pub n1: i64,
    #[serde(rename = "N2")]
    pub n2: i64,
    pub probe_xi: i64,
    pub probe_time: f64,
    pub amplitude: f64,
    pub weighted_amplitude: f64,
    pub log_amplitude: f64,
    pub hs_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub case: WitnessCase,
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub rows: Vec<GrowthRow>,
    /// Log-log slope of `⟨probe⟩^s |amplitude|` against `N`.
    pub slope: f64,
    /// Log-log slope of the `H^s` norm of the probed iterate against `N`.
    pub hs_slope: f64,
    pub expected: f64,
}

pub fn growth_exponent(case_id: WitnessCase, p: &DispersionParams, s: f64, n_list: &[i64], t: f64) -> Result<GrowthReport> {
    growth_exponent_with(case_id, p, s, n_list, t, Exec::default())
}

pub fn growth_exponent_with(
    case_id: WitnessCase,
    p: &DispersionParams,
    s: f64,
    n_list: &[i64],
    t: f64,
    exec: Exec,
) -> Result<GrowthReport> {
    let distinct: BTreeSet<i64> = n_list.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::Fit("growth fit needs at least two distinct N".into()));
    }
    let rows = par::map_slice(exec, n_list, |&n| -> Result<(GrowthRow, f64)> {
        let fam = build_witness(case_id, n, s, p)?;
        let ev = evaluate_witness(&fam, t)?;
        let w = ev.weighted_amplitude();
        Ok((
            GrowthRow {
                n_big: n,
                n1: fam.n1,
                n2: fam.n2,
                probe_xi: ev.probe_xi,
                probe_time: ev.probe_time,
                amplitude: ev.target_mode_amplitude.norm(),
                weighted_amplitude: w,
                log_amplitude: w.ln(),
                hs_norm: ev.hs_norm,
            },
            fam.expected_exponent(),
        ))
    });
    let rows: Vec<(GrowthRow, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let expected = rows[0].1;
    let rows: Vec<GrowthRow> = rows.into_iter().map(|r| r.0).collect();
    let slope = fit::loglog_slope(&rows.iter().map(|r| (r.n_big as f64, r.weighted_amplitude)).collect::<Vec<_>>())?;
    let hs_slope = fit::loglog_slope(&rows.iter().map(|r| (r.n_big as f64, r.hs_norm)).collect::<Vec<_>>())?;
    Ok(GrowthReport { case: case_id, s, t, rows, slope, hs_slope, expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qr};

    fn params(a: i64, b: i64) -> DispersionParams {
        DispersionParams::from_ints(a, b, 1).unwrap()
    }

    #[test]
    fn rational_family_modes() {
        let f = build_witness(WitnessCase::RationalRalpha, 6, 0.5, &params(3, 1)).unwrap();
        assert_eq!((f.n1, f.n2), (4, 2));
        assert!(build_witness(WitnessCase::RationalRalpha, 7, 0.5, &params(3, 1)).is_err());
    }

    #[test]
    fn resonant_family_modes() {
        let f = build_witness(WitnessCase::Alpha4Resonant, 31, 1.0, &params(4, 3)).unwrap();
        assert_eq!(f.modes(), vec![16, 15]);
        let err = build_witness(WitnessCase::Alpha4Resonant, 32, 1.0, &params(4, 3)).unwrap_err();
        assert!(matches!(err, Error::Admissibility(_)));
        assert!(build_witness(WitnessCase::Alpha4Resonant, 11, 1.0, &params(4, 3)).is_err());
        assert!(build_witness(WitnessCase::Alpha4Resonant, 41, 1.0, &params(4, 2)).is_err());
    }

    #[test]
    fn nearint_examples() {
        let r = |a: i64, b: i64| nearint(&Surd::rational(qr(a, b)));
        assert_eq!([r(5, 2), r(7, 2), r(21, 10), r(29, 10)], [2, 4, 2, 3].map(BigInt::from));
        assert_eq!(r(-5, 2), BigInt::from(-2));
    }

    #[test]
    fn table_one_support() {
        let f = build_witness(WitnessCase::RationalRalpha, 6, 0.5, &params(3, 1)).unwrap();
        let ev = evaluate_witness(&f, 1.0).unwrap();
        let want: BTreeSet<(i64, i64)> = [(8, 4), (6, 4), (6, 2), (2, 4), (2, -2)].into_iter().collect();
        assert_eq!(ev.support_pairs.iter().copied().collect::<BTreeSet<_>>(), want);
        assert_eq!(ev.d1.len(), 2);
        for (pair, f) in &ev.f_values {
            if ev.d1.contains(pair) {
                assert_eq!(f.as_ref().unwrap(), &qi(-1));
            }
        }
    }

    #[test]
    fn support_route_matches_full_iterates() {
        let cases = [
            (WitnessCase::Alpha4Resonant, params(4, 3), 21, 1.0),
            (WitnessCase::Alpha4Nonresonant, params(4, 1), 16, 0.5),
            (WitnessCase::RationalRalpha, params(3, 1), 12, 0.5),
            (WitnessCase::BiasedIrrational, params(2, 1), 20, 0.5),
            (WitnessCase::HighIndexIrrational, params(2, 1), 20, 0.7),
        ];
        for (case, p, n, s) in cases {
            let f = build_witness(case, n, s, &p).unwrap();
            let ev = evaluate_witness(&f, 1.0).unwrap();
            let a = ev.target_mode_amplitude;
            let b = ev.support_formula_amplitude;
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300), "{case}: {a} vs {b}");
        }
    }

    #[test]
    fn temp4_identity_and_i_split() {
        let p = params(3, 1);
        for n in [6, 12, 24] {
            let f = build_witness(WitnessCase::RationalRalpha, n, 0.5, &p).unwrap();
            assert_eq!(gamma3_g(&p, &qi(-f.n1), &qi(-f.n2), &qi(n)).unwrap(), qi(n));
            let ev = evaluate_witness(&f, 1.0).unwrap();
            let (i1, i2) = (ev.i1.unwrap(), ev.i2.unwrap());
            let pref = 3.0 * f.n1 as f64 / (4.0 * PI * PI * (n as f64).powf(1.5));
            assert!(((i1 + i2).norm() * pref - ev.target_mode_amplitude.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn cutoff_enforced() {
        let f = build_witness(WitnessCase::Alpha4Nonresonant, 1, 0.5, &params(4, 1)).unwrap();
        assert!(matches!(evaluate_witness(&f, 1.0), Err(Error::Cutoff(_))));
    }

    #[test]
    fn biased_modes_sum_to_n() {
        let p = params(2, 1);
        let rc = p.roots.clone().unwrap();
        for n in 5..200 {
            let (a, b) = biased_pair(&rc.c1, &rc.c2, &rc.lambda, n).unwrap();
            assert_eq!(a + b, BigInt::from(n));
        }
    }

    #[test]
    fn case_names_round_trip() {
        for c in WitnessCase::ALL {
            assert_eq!(c.cli_name().parse::<WitnessCase>().unwrap(), c);
        }
    }

    #[test]
    fn large_s_decays() {
        let r = growth_exponent(WitnessCase::Alpha4Nonresonant, &params(4, 1), 3.0, &[32, 64, 128, 256], 1.0).unwrap();
        assert!(r.slope < 0.0);
    }
}
