//! Biased Diophantine approximation.
//!
//! For real `ρ, γ` and `n ≠ 0` the biased distance is `|ρ − m/n + γ/n²|`. The
//! type index `ν_γ(ρ)` is the least `ν` with distance `≥ K/|n|^{2+ν}` for all
//! large `|n|`, and the irrational measure `μ_γ(ρ) = ν_γ(ρ) + 2` when `γ ≠ 0`.
//!
//! Inputs are always rationals: exact fractions, or decimal approximants of an
//! irrational number. Per-`n` scans use the integer numerator
//! `P·H·n² − m·n·Q·H + G·Q` over `Q·H·n²` (with `ρ = P/Q`, `γ = G/H`), so a zero
//! distance is detected exactly.

use crate::error::{Error, Result};
use crate::exact::{self, ParsedReal, Q};
use crate::fit;
use crate::par::{self, Exec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Canonical fraction `p/q` with `q > 0` and `gcd(|p|, q) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalNumber(#[serde(with = "exact::serde_q")] pub Q);

impl RationalNumber {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(RationalNumber(exact::qr(p, q)))
    }
    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }
    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }
}

impl std::str::FromStr for RationalNumber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        exact::parse_rational(s).map(RationalNumber)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasedApproxRecord {
    pub rho: f64,
    pub gamma: f64,
    pub m: i64,
    pub n: i64,
    pub distance: f64,
    /// Set exactly when the distance is the rational zero.
    pub exact_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIndexEstimate {
    pub rho: f64,
    pub gamma: f64,
    pub n_max: u64,
    pub mu_hat: f64,
    pub nu_hat: f64,
    #[serde(rename = "witness_K")]
    pub witness_k: f64,
    #[serde(rename = "witness_N")]
    pub witness_n: u64,
    pub zero_pairs: Vec<(i64, i64)>,
    pub best_table: Vec<BiasedApproxRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Alpha4Resonant,
    Alpha4Nonresonant,
    RalphaRational,
    IrrationalHighIndex,
    IrrationalLowIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalIndexReport {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_exact: String,
    pub beta_exact: String,
    pub s_star: f64,
    pub branch: Branch,
    pub s_alpha_beta: Option<f64>,
    pub nu_c1: Option<f64>,
    pub nu_c2: Option<f64>,
    /// True when `s_star` rests on estimated type indices.
    pub empirical: bool,
    /// For the resonant α = 4 branch, the `n` with `β = 3n²`.
    pub resonant_n: Option<u64>,
    pub convention: String,
    pub s: Option<f64>,
}

/// Precomputed integers for the per-`n` kernel.
struct Kernel {
    ph: BigInt,
    gq: BigInt,
    qh: BigInt,
    rho: f64,
    gamma: f64,
}

impl Kernel {
    fn new(rho: &Q, gamma: &Q) -> Self {
        Kernel {
            ph: rho.numer() * gamma.denom(),
            gq: gamma.numer() * rho.denom(),
            qh: rho.denom() * gamma.denom(),
            rho: exact::to_f64(rho),
            gamma: exact::to_f64(gamma),
        }
    }

    /// Best `m` and the absolute numerator `|A − mB|`; ties go to the smaller `m`.
    fn best(&self, n: i64) -> (BigInt, BigInt) {
        let nb = BigInt::from(n);
        let a = &self.ph * &nb * &nb + &self.gq;
        let b = &nb * &self.qh;
        let m0 = a.div_floor(&b);
        let r0 = (&a - &m0 * &b).abs();
        let m1: BigInt = &m0 + 1;
        let r1 = (&a - &m1 * &b).abs();
        if r1 < r0 {
            (m1, r1)
        } else {
            (m0, r0)
        }
    }

    fn denom(&self, n: i64) -> BigInt {
        let nb = BigInt::from(n);
        &self.qh * &nb * &nb
    }

    fn record(&self, n: i64) -> Result<(BiasedApproxRecord, f64)> {
        let (m, num) = self.best(n);
        let den = self.denom(n);
        let ln_d = if num.is_zero() { f64::NEG_INFINITY } else { exact::ln_big(&num) - exact::ln_big(&den) };
        let rec = BiasedApproxRecord {
            rho: self.rho,
            gamma: self.gamma,
            m: exact::to_i64(&m)?,
            n,
            distance: exact::ratio_f64(&num, &den),
            exact_zero: num.is_zero(),
        };
        Ok((rec, ln_d))
    }
}

/// `|ρ − m/n + γ/n²|`, exactly.
pub fn biased_distance(rho: &Q, gamma: &Q, m: &BigInt, n: i64) -> Result<Q> {
    if n == 0 {
        return Err(Error::Domain("n must be nonzero".into()));
    }
    let nq = exact::qi(n);
    let v = rho - Q::from_integer(m.clone()) / &nq + gamma / (&nq * &nq);
    Ok(v.abs())
}

/// The record minimising the biased distance over `m` for this `n`.
pub fn best_biased_approx(rho: &Q, gamma: &Q, n: i64) -> Result<BiasedApproxRecord> {
    if n == 0 {
        return Err(Error::Domain("n must be nonzero".into()));
    }
    Kernel::new(rho, gamma).record(n).map(|r| r.0)
}

/// All `(m, n)` with `|n| ≤ n_max` and `ρ − m/n + γ/n² = 0`.
///
/// Any solution has `n | G·Q` (`γ = G/H`, `ρ = P/Q`), so only divisors are
/// tried. The list is sign-symmetric and sorted by `n` descending.
pub fn find_zero_pairs(rho: &Q, gamma: &Q, n_max: u64) -> Result<Vec<(i64, i64)>> {
    if gamma.is_zero() {
        return Err(Error::Degenerate("γ = 0 with rational ρ: every multiple of the reduced fraction is a zero".into()));
    }
    let kernel = Kernel::new(rho, gamma);
    let gq = kernel.gq.abs();
    let mut out = Vec::new();
    let limit = n_max.min(gq.to_u64().unwrap_or(u64::MAX));
    for n in 1..=limit as i64 {
        if !(&gq % BigInt::from(n)).is_zero() {
            continue;
        }
        let (m, num) = kernel.best(n);
        if num.is_zero() {
            let m = exact::to_i64(&m)?;
            out.push((m, n));
            out.push((-m, -n));
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Empirical `μ̂_γ(ρ)` and `ν̂ = μ̂ − 2` over `1 ≤ n ≤ n_max`.
///
/// The scan is cut into dyadic blocks `[2^j, 2^{j+1})` starting at `witness_N`.
/// Each block contributes its smallest nonzero distance; `μ̂` is the
/// least-squares slope of `log(1/d)` against `log n` over those block minima,
/// clipped below at 2. `witness_K` is the largest `K` with
/// `d(n) ≥ K/n^{μ̂}` on the scanned range.
pub fn estimate_indices(rho: &ParsedReal, gamma: &ParsedReal, n_max: u64) -> Result<TypeIndexEstimate> {
    estimate_indices_with(rho, gamma, n_max, Exec::default())
}

pub fn estimate_indices_with(rho: &ParsedReal, gamma: &ParsedReal, n_max: u64, exec: Exec) -> Result<TypeIndexEstimate> {
    if n_max < 100 {
        return Err(Error::Domain(format!("n_max must be at least 100, got {n_max}")));
    }
    if n_max > i64::MAX as u64 / 4 {
        return Err(Error::Domain("n_max too large".into()));
    }
    let exact_inputs = rho.exact && gamma.exact;
    if exact_inputs && gamma.value.is_zero() {
        return Err(Error::Degenerate("γ = 0 with rational ρ has ν₀ = ∞ and μ₀ = 1".into()));
    }
    let kernel = Kernel::new(&rho.value, &gamma.value);
    let rows = par::map_range(exec, 1, n_max as i64 + 1, |n| kernel.record(n));
    let mut table = Vec::with_capacity(rows.len());
    let mut ln_d = Vec::with_capacity(rows.len());
    for r in rows {
        let (rec, l) = r?;
        table.push(rec);
        ln_d.push(l);
    }
    if table.iter().all(|r| r.exact_zero) {
        return Err(Error::Degenerate("every best distance is exactly zero".into()));
    }

    let zero_pairs = if exact_inputs {
        find_zero_pairs(&rho.value, &gamma.value, n_max)?
    } else {
        let mut z: Vec<(i64, i64)> =
            table.iter().filter(|r| r.exact_zero).flat_map(|r| [(r.m, r.n), (-r.m, -r.n)]).collect();
        z.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        z
    };
    let witness_n = zero_pairs.iter().map(|p| p.1.unsigned_abs()).max().unwrap_or(0) + 1;

    let mut points = Vec::new();
    let mut lo = witness_n;
    while lo <= n_max {
        let hi = (lo + 1).next_power_of_two().min(n_max + 1);
        let best = (lo..hi)
            .map(|n| (n, ln_d[(n - 1) as usize]))
            .filter(|p| p.1.is_finite())
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        if let Some((n, l)) = best {
            points.push(((n as f64).ln(), -l));
        }
        lo = hi;
    }
    let mu_hat = match fit::slope(&points) {
        Ok(s) => s.max(2.0),
        Err(_) => 2.0,
    };
    let nu_hat = mu_hat - 2.0;
    let witness_k = (witness_n..=n_max)
        .map(|n| ln_d[(n - 1) as usize])
        .zip(witness_n..=n_max)
        .filter(|p| p.0.is_finite())
        .map(|(l, n)| mu_hat * (n as f64).ln() + l)
        .fold(f64::INFINITY, f64::min)
        .exp();

    Ok(TypeIndexEstimate {
        rho: exact::to_f64(&rho.value),
        gamma: exact::to_f64(&gamma.value),
        n_max,
        mu_hat,
        nu_hat,
        witness_k,
        witness_n,
        zero_pairs,
        best_table: table,
    })
}

const CONVENTION: &str = "n ranges over {0, 1, 2, ...} in β = 3n²";

/// Critical Sobolev index `s*(α, β)`.
///
/// `α = 4` is decided exactly. For `α ∈ (0,4) \ {1}` the rationality of
/// `R_α = √(12/α − 3)` is decided exactly; when it is irrational the index is
/// assembled from estimated `ν̂_λ(c₁)`, `ν̂_λ(c₂)` and flagged empirical.
pub fn critical_index(alpha: &Q, beta: &Q, n_max: u64) -> Result<CriticalIndexReport> {
    critical_index_with(alpha, beta, n_max, Exec::default())
}

pub fn critical_index_with(alpha: &Q, beta: &Q, n_max: u64, exec: Exec) -> Result<CriticalIndexReport> {
    let four = exact::qi(4);
    if !alpha.is_positive() || alpha > &four || alpha == &exact::qi(1) {
        return Err(Error::OutOfScope(format!("α = {} is outside (0,4] \\ {{1}}", exact::format_q(alpha))));
    }
    let mut report = CriticalIndexReport {
        alpha: exact::to_f64(alpha),
        beta: exact::to_f64(beta),
        alpha_exact: exact::format_q(alpha),
        beta_exact: exact::format_q(beta),
        s_star: 0.5,
        branch: Branch::Alpha4Nonresonant,
        s_alpha_beta: None,
        nu_c1: None,
        nu_c2: None,
        empirical: false,
        resonant_n: None,
        convention: CONVENTION.into(),
        s: None,
    };
    if alpha == &four {
        let n = exact::rational_sqrt(&(beta / exact::qi(3))).and_then(|r| exact::as_integer(&r));
        if let Some(n) = n {
            report.s_star = 1.0;
            report.branch = Branch::Alpha4Resonant;
            report.resonant_n = n.to_u64();
        }
        return Ok(report);
    }
    if beta.is_zero() {
        return Err(Error::Domain("β = 0 is outside the drift branches for α ≠ 4".into()));
    }
    let r2 = exact::qi(12) / alpha - exact::qi(3);
    if exact::rational_sqrt(&r2).is_some() {
        report.branch = Branch::RalphaRational;
        return Ok(report);
    }
    let consts = crate::resonance::RootConstants::new(alpha, beta)?;
    let lam = ParsedReal { value: consts.lambda.approx(256), exact: false };
    let c1 = ParsedReal { value: consts.c1.approx(256), exact: false };
    let c2 = ParsedReal { value: consts.c2.approx(256), exact: false };
    let e1 = estimate_indices_with(&c1, &lam, n_max, exec)?;
    let e2 = estimate_indices_with(&c2, &lam, n_max, exec)?;
    let s = e1.nu_hat.max(e2.nu_hat);
    report.nu_c1 = Some(e1.nu_hat);
    report.nu_c2 = Some(e2.nu_hat);
    report.s_alpha_beta = Some(s);
    report.empirical = true;
    if s >= 1.0 {
        report.s_star = 1.0;
        report.branch = Branch::IrrationalHighIndex;
    } else {
        report.s_star = (1.0 + s) / 2.0;
        report.branch = Branch::IrrationalLowIndex;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qr};

    fn ex(q: Q) -> ParsedReal {
        ParsedReal { value: q, exact: true }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(biased_distance(&qi(0), &qi(1), &BigInt::from(1), 1).unwrap(), qi(0));
        assert_eq!(biased_distance(&qr(2, 3), &qr(1, 3), &BigInt::from(1), 1).unwrap(), qi(0));
        assert_eq!(biased_distance(&qr(2, 3), &qr(1, 3), &BigInt::from(7), 3).unwrap(), qr(44, 27));
        assert!(biased_distance(&qi(0), &qi(0), &BigInt::from(0), 0).is_err());
    }

    #[test]
    fn best_approx_examples() {
        let r = best_biased_approx(&qr(1, 2), &qi(0), 2).unwrap();
        assert_eq!((r.m, r.exact_zero), (1, true));
        let r = best_biased_approx(&qr(2, 3), &qr(1, 3), 1).unwrap();
        assert_eq!((r.m, r.distance), (1, 0.0));
        let sqrt2 = exact::sqrt_fixed(&qi(2), 256).unwrap();
        let r = best_biased_approx(&sqrt2, &qi(0), 5).unwrap();
        assert_eq!(r.m, 7);
        assert!((r.distance - 0.014213562373095).abs() < 1e-12);
    }

    #[test]
    fn ties_pick_smaller_m() {
        // ρ = 1/2, γ = 0, n = 1: m = 0 and m = 1 are equidistant.
        let r = best_biased_approx(&qr(1, 2), &qi(0), 1).unwrap();
        assert_eq!(r.m, 0);
        let r = best_biased_approx(&qr(1, 2), &qi(0), -1).unwrap();
        assert_eq!(r.m, -1);
    }

    #[test]
    fn zero_pair_examples() {
        assert_eq!(find_zero_pairs(&qr(2, 3), &qr(1, 3), 100).unwrap(), vec![(1, 1), (-1, -1)]);
        assert!(find_zero_pairs(&qr(1, 2), &qi(1), 100).unwrap().is_empty());
        assert!(matches!(find_zero_pairs(&qi(0), &qi(0), 10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn integer_rho_can_have_more_than_two_zero_pairs() {
        // m = 2n + 6/n is an integer for every n | 6.
        let z = find_zero_pairs(&qi(2), &qi(6), 100).unwrap();
        assert_eq!(z.len(), 8);
    }

    #[test]
    fn rational_index_is_zero() {
        let e = estimate_indices(&ex(qr(2, 3)), &ex(qr(1, 3)), 5000).unwrap();
        assert_eq!(e.zero_pairs, vec![(1, 1), (-1, -1)]);
        assert_eq!(e.witness_n, 2);
        assert!(e.nu_hat <= 0.15, "nu_hat = {}", e.nu_hat);
        assert_eq!(e.nu_hat, e.mu_hat - 2.0);
        assert_eq!(e.best_table.len(), 5000);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(estimate_indices(&ex(qr(1, 3)), &ex(qi(0)), 200), Err(Error::Degenerate(_))));
        assert!(estimate_indices(&ex(qr(1, 3)), &ex(qi(1)), 50).is_err());
    }

    #[test]
    fn translation_invariance() {
        let a = estimate_indices(&ex(qr(2, 3)), &ex(qr(1, 3)), 1000).unwrap();
        let b = estimate_indices(&ex(qr(2, 3) + qi(7)), &ex(qr(1, 3)), 1000).unwrap();
        assert_eq!(a.nu_hat, b.nu_hat);
    }

    #[test]
    fn critical_index_examples() {
        let r = critical_index(&qi(4), &qi(12), 1000).unwrap();
        assert_eq!((r.s_star, r.branch, r.resonant_n), (1.0, Branch::Alpha4Resonant, Some(2)));
        let r = critical_index(&qi(4), &qi(5), 1000).unwrap();
        assert_eq!((r.s_star, r.branch), (0.5, Branch::Alpha4Nonresonant));
        let r = critical_index(&qi(4), &qi(0), 1000).unwrap();
        assert_eq!(r.branch, Branch::Alpha4Resonant);
        let r = critical_index(&qi(3), &qi(1), 1000).unwrap();
        assert_eq!((r.s_star, r.branch), (0.5, Branch::RalphaRational));
        let r = critical_index(&qr(12, 7), &qi(1), 1000).unwrap();
        assert_eq!(r.branch, Branch::RalphaRational);
        assert!(critical_index(&qi(1), &qi(1), 1000).is_err());
        assert!(critical_index(&qi(5), &qi(1), 1000).is_err());
        assert!(critical_index(&qi(0), &qi(1), 1000).is_err());
    }

    #[test]
    fn irrational_branch_is_flagged_empirical() {
        let r = critical_index(&qi(2), &qi(1), 2000).unwrap();
        assert!(r.empirical);
        assert!(matches!(r.branch, Branch::IrrationalLowIndex | Branch::IrrationalHighIndex));
        assert_eq!(r.s_alpha_beta, Some(r.nu_c1.unwrap().max(r.nu_c2.unwrap())));
        assert_eq!(r.s_star == 1.0, r.branch == Branch::IrrationalHighIndex);
    }

    #[test]
    fn json_field_names() {
        let e = estimate_indices(&ex(qr(2, 3)), &ex(qr(1, 3)), 100).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        for k in ["rho", "gamma", "n_max", "mu_hat", "nu_hat", "witness_K", "witness_N", "zero_pairs", "best_table"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
        assert_eq!(v["zero_pairs"], serde_json::json!([[1, 1], [-1, -1]]));
    }
}
