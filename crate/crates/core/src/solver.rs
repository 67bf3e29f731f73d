//! Lawson-RK4 pseudospectral integrator on the σ-torus.
//!
//! States hold the discrete Fourier coefficients `a_j = (1/M) Σ f(x_n) e^{−ijx_n/σ}`
//! at lattice frequency `ξ = j/σ`; the continuous transform is `f̂(ξ) = 2πσ·a_j`.

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::picard::{picard_iterates, taylor, SparseSpectrum};
use crate::resonance::DispersionParams;
use num_complex::Complex64;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    pub sigma: f64,
    pub num_modes: usize,
}

impl TorusGrid {
    pub fn new(sigma: f64, num_modes: usize) -> Result<Self> {
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("σ must be at least 1, got {sigma}")));
        }
        if num_modes < 4 || !num_modes.is_power_of_two() {
            return Err(Error::Domain(format!("num_modes must be a power of two ≥ 4, got {num_modes}")));
        }
        Ok(TorusGrid { sigma, num_modes })
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.sigma
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.num_modes as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_modes).map(|n| n as f64 * self.spacing()).collect()
    }

    /// Signed lattice index of storage slot `i`.
    pub fn index(&self, i: usize) -> i64 {
        let m = self.num_modes;
        if i < m / 2 {
            i as i64
        } else {
            i as i64 - m as i64
        }
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.index(i) as f64 / self.sigma
    }

    pub fn slot(&self, j: i64) -> Option<usize> {
        let h = (self.num_modes / 2) as i64;
        if j >= h || j < -h {
            None
        } else if j >= 0 {
            Some(j as usize)
        } else {
            Some((j + self.num_modes as i64) as usize)
        }
    }

    /// Slots kept by the 2/3 rule.
    pub fn kept(&self, i: usize) -> bool {
        3 * self.index(i).unsigned_abs() as usize <= self.num_modes
            && (self.index(i).unsigned_abs() as usize) < self.num_modes / 2
    }
}

#[derive(Clone)]
struct Transforms {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms { fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    fn to_coeffs(&self, mut x: Vec<Complex64>) -> Vec<Complex64> {
        let m = x.len() as f64;
        self.fwd.process(&mut x);
        x.iter_mut().for_each(|c| *c /= m);
        x
    }

    fn to_values(&self, a: &[Complex64]) -> Vec<Complex64> {
        let mut x = a.to_vec();
        self.inv.process(&mut x);
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    pub grid: TorusGrid,
    pub u_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
    pub time: f64,
}

impl SpectralState {
    pub fn zero(grid: &TorusGrid) -> Self {
        let z = vec![Complex64::zero(); grid.num_modes];
        SpectralState { grid: grid.clone(), u_hat: z.clone(), v_hat: z, time: 0.0 }
    }

    pub fn from_real(grid: &TorusGrid, u: &[f64], v: &[f64]) -> Result<Self> {
        let m = grid.num_modes;
        if u.len() != m || v.len() != m {
            return Err(Error::Domain(format!("expected {m} samples per field")));
        }
        let tr = Transforms::new(m);
        let c = |f: &[f64]| tr.to_coeffs(f.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        Ok(SpectralState { grid: grid.clone(), u_hat: c(u), v_hat: c(v), time: 0.0 })
    }

    pub fn from_fn(grid: &TorusGrid, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = grid.points();
        let us: Vec<f64> = xs.iter().map(|&x| u(x)).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| v(x)).collect();
        Self::from_real(grid, &us, &vs)
    }

    /// State whose continuous transforms are `δ·φ̂` and `δ·ψ̂`.
    pub fn from_spectra(grid: &TorusGrid, phi: &SparseSpectrum, psi: &SparseSpectrum, delta: f64) -> Result<Self> {
        let mut s = Self::zero(grid);
        let norm = delta / grid.length();
        for (spec, out) in [(phi, &mut s.u_hat), (psi, &mut s.v_hat)] {
            for (xi, a) in &spec.entries {
                let j = exact::to_f64(xi) * grid.sigma;
                if (j - j.round()).abs() > 1e-9 {
                    return Err(Error::Domain(format!("{} is not on the grid lattice", exact::format_q(xi))));
                }
                let slot = grid
                    .slot(j.round() as i64)
                    .ok_or_else(|| Error::Domain(format!("frequency {} exceeds the grid", exact::format_q(xi))))?;
                out[slot] += a * norm;
            }
        }
        Ok(s)
    }

    pub fn to_real(&self) -> (Vec<f64>, Vec<f64>) {
        let tr = Transforms::new(self.grid.num_modes);
        let r = |a: &[Complex64]| tr.to_values(a).into_iter().map(|c| c.re).collect();
        (r(&self.u_hat), r(&self.v_hat))
    }

    /// Continuous transform `f̂(ξ) = 2πσ·a_j` at lattice index `j`.
    pub fn hat(&self, which_u: bool, j: i64) -> Complex64 {
        let a = if which_u { &self.u_hat } else { &self.v_hat };
        self.grid.slot(j).map_or_else(Complex64::zero, |i| a[i] * self.grid.length())
    }

    pub fn dealias(&mut self) {
        for i in 0..self.grid.num_modes {
            if !self.grid.kept(i) {
                self.u_hat[i] = Complex64::zero();
                self.v_hat[i] = Complex64::zero();
            }
        }
    }

    /// Whether the dealiased band is empty up to `tol` relative to the largest coefficient.
    pub fn is_dealiased(&self, tol: f64) -> bool {
        let scale = self.u_hat.iter().chain(&self.v_hat).map(|c| c.norm()).fold(0.0, f64::max);
        (0..self.grid.num_modes)
            .filter(|&i| !self.grid.kept(i))
            .all(|i| self.u_hat[i].norm() <= tol * scale && self.v_hat[i].norm() <= tol * scale)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = self.grid.num_modes;
        (1..m).all(|i| {
            let k = m - i;
            (self.u_hat[i] - self.u_hat[k].conj()).norm() <= tol && (self.v_hat[i] - self.v_hat[k].conj()).norm() <= tol
        })
    }

    pub fn mean_u(&self) -> f64 {
        self.u_hat[0].re
    }

    pub fn mean_v(&self) -> f64 {
        self.v_hat[0].re
    }

    /// `∫(u² + v²) dx = 2πσ Σ (|a_j|² + |b_j|²)`.
    pub fn quadratic_invariant(&self) -> f64 {
        let s: f64 = self.u_hat.iter().chain(&self.v_hat).map(|c| c.norm_sqr()).sum();
        s * self.grid.length()
    }

    /// `‖f‖_{H^s}² = (1/2πσ) Σ ⟨ξ⟩^{2s} |f̂|² = 2πσ Σ ⟨ξ⟩^{2s} |a|²`, for the pair `(u, v)`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.num_modes {
            let xi = self.grid.xi(i);
            sum += (1.0 + xi * xi).powf(s) * (self.u_hat[i].norm_sqr() + self.v_hat[i].norm_sqr());
        }
        (sum * self.grid.length()).sqrt()
    }

    /// Largest coefficient difference, in the continuous normalisation.
    pub fn max_diff(&self, o: &SpectralState) -> f64 {
        let l = self.grid.length();
        self.u_hat
            .iter()
            .zip(&o.u_hat)
            .chain(self.v_hat.iter().zip(&o.v_hat))
            .map(|(a, b)| (a - b).norm() * l)
            .fold(0.0, f64::max)
    }
}

/// Drops the mean of `u₀`: returns the zero-mean coefficients and `β = mean(u₀)`.
pub fn mean_reduce(u_hat: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut out = u_hat.to_vec();
    let beta = out.first().map_or(0.0, |c| c.re);
    if let Some(c) = out.first_mut() {
        *c = Complex64::zero();
    }
    (out, beta)
}

/// Real-space form of [`mean_reduce`].
pub fn mean_reduce_samples(u: &[f64]) -> (Vec<f64>, f64) {
    let tr = Transforms::new(u.len());
    let a = tr.to_coeffs(u.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    let (a, beta) = mean_reduce(&a);
    (tr.to_values(&a).into_iter().map(|c| c.re).collect(), beta)
}

/// `(u, v) ↦ σ⁻²(u, v)(·/σ)`: samples on `[0, 2π)` become samples on `[0, 2πσ)`.
pub fn scale_problem(grid_unit: &TorusGrid, u0: &[f64], v0: &[f64], sigma: f64) -> Result<SpectralState> {
    if !(sigma >= 1.0) {
        return Err(Error::Domain(format!("σ must be at least 1, got {sigma}")));
    }
    if grid_unit.sigma != 1.0 {
        return Err(Error::Domain("input must live on the unit torus".into()));
    }
    let grid = TorusGrid::new(sigma, grid_unit.num_modes)?;
    let k = sigma.powi(-2);
    let us: Vec<f64> = u0.iter().map(|x| x * k).collect();
    let vs: Vec<f64> = v0.iter().map(|x| x * k).collect();
    SpectralState::from_real(&grid, &us, &vs)
}

/// Linear coefficients `(α, β_σ)` of a state's equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    pub alpha: f64,
    pub beta_sigma: f64,
}

impl LinearCoeffs {
    pub fn of(p: &DispersionParams) -> Self {
        LinearCoeffs { alpha: exact::to_f64(&p.alpha), beta_sigma: exact::to_f64(&p.beta_sigma) }
    }

    fn phases(&self, grid: &TorusGrid) -> (Vec<f64>, Vec<f64>) {
        (0..grid.num_modes)
            .map(|i| {
                let x = grid.xi(i);
                (x * x * x, self.alpha * x * x * x - self.beta_sigma * x)
            })
            .unzip()
    }
}

fn check_grid(p: &DispersionParams, grid: &TorusGrid) -> Result<()> {
    let s = exact::to_f64(&p.sigma);
    if (s - grid.sigma).abs() > 1e-12 * s {
        return Err(Error::Domain(format!("grid σ = {} does not match σ = {}", grid.sigma, exact::format_q(&p.sigma))));
    }
    Ok(())
}

/// `û(ξ) ↦ e^{iξ³t}û(ξ)`, `v̂(ξ) ↦ e^{i(αξ³ − β_σξ)t}v̂(ξ)`.
pub fn linear_propagate(state: &SpectralState, p: &DispersionParams, t: f64) -> Result<SpectralState> {
    check_grid(p, &state.grid)?;
    let (pu, pv) = LinearCoeffs::of(p).phases(&state.grid);
    let mut out = state.clone();
    for i in 0..state.grid.num_modes {
        out.u_hat[i] *= Complex64::from_polar(1.0, pu[i] * t);
        out.v_hat[i] *= Complex64::from_polar(1.0, pv[i] * t);
    }
    out.time += t;
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    #[default]
    LawsonRK4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub integrator: Integrator,
    /// Drop the nonlinear terms.
    pub linear_only: bool,
    /// Keep a snapshot every this many steps; the final state is always kept.
    pub snapshot_every: Option<usize>,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SolverConfig { dt, t_end, dealias: true, integrator: Integrator::LawsonRK4, linear_only: false, snapshot_every: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub mean_u: f64,
    pub mean_v: f64,
    pub quad_inv: f64,
    pub hs_half: f64,
    pub hs_one: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub records: Vec<DiagRecord>,
    /// `dt · max|P|` over the retained modes.
    pub stability_number: f64,
    pub max_mean_drift: f64,
    pub quad_rel_drift: f64,
}

impl Diagnostics {
    fn record(s: &SpectralState) -> DiagRecord {
        DiagRecord {
            t: s.time,
            mean_u: s.mean_u(),
            mean_v: s.mean_v(),
            quad_inv: s.quadratic_invariant(),
            hs_half: s.hs_norm(0.5),
            hs_one: s.hs_norm(1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<SpectralState>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &SpectralState {
        self.snapshots.last().expect("trajectory keeps its final state")
    }
}

struct Stepper {
    tr: Transforms,
    grid: TorusGrid,
    pu: Vec<f64>,
    pv: Vec<f64>,
    dealias: bool,
    linear_only: bool,
}

type Pair = (Vec<Complex64>, Vec<Complex64>);

impl Stepper {
    /// `(−(iξ/2)·F(v²), −iξ·F(uv))`.
    fn nonlinear(&self, u: &[Complex64], v: &[Complex64]) -> Pair {
        let m = self.grid.num_modes;
        if self.linear_only {
            return (vec![Complex64::zero(); m], vec![Complex64::zero(); m]);
        }
        let uu = self.tr.to_values(u);
        let vv = self.tr.to_values(v);
        let v2: Vec<Complex64> = vv.iter().map(|x| Complex64::new(x.re * x.re, 0.0)).collect();
        let uv: Vec<Complex64> = uu.iter().zip(&vv).map(|(a, b)| Complex64::new(a.re * b.re, 0.0)).collect();
        let mut a = self.tr.to_coeffs(v2);
        let mut b = self.tr.to_coeffs(uv);
        for i in 0..m {
            let ik = Complex64::new(0.0, self.grid.xi(i));
            let keep = !self.dealias || self.grid.kept(i);
            if keep && self.grid.index(i).unsigned_abs() as usize != m / 2 {
                a[i] *= -ik * 0.5;
                b[i] *= -ik;
            } else {
                a[i] = Complex64::zero();
                b[i] = Complex64::zero();
            }
        }
        (a, b)
    }

    fn expo(&self, f: &Pair, h: f64) -> Pair {
        let e = |x: &[Complex64], p: &[f64]| -> Vec<Complex64> {
            x.iter().zip(p).map(|(c, w)| c * Complex64::from_polar(1.0, w * h)).collect()
        };
        (e(&f.0, &self.pu), e(&f.1, &self.pv))
    }

    fn step(&self, y: &Pair, h: f64) -> Pair {
        let axpy = |a: &Pair, k: f64, b: &Pair| -> Pair {
            let f = |x: &[Complex64], z: &[Complex64]| x.iter().zip(z).map(|(p, q)| p + q * k).collect();
            (f(&a.0, &b.0), f(&a.1, &b.1))
        };
        let n = |p: &Pair| self.nonlinear(&p.0, &p.1);
        let k1 = n(y);
        let eh2y = self.expo(y, h / 2.0);
        let k2 = n(&axpy(&eh2y, h / 2.0, &self.expo(&k1, h / 2.0)));
        let k3 = n(&axpy(&eh2y, h / 2.0, &k2));
        let ehy = self.expo(y, h);
        let k4 = n(&axpy(&ehy, h, &self.expo(&k3, h / 2.0)));
        let k23 = axpy(&k2, 1.0, &k3);
        let mut out = axpy(&ehy, h / 6.0, &self.expo(&k1, h));
        out = axpy(&out, h / 3.0, &self.expo(&k23, h / 2.0));
        axpy(&out, h / 6.0, &k4)
    }
}

/// Integrates to `t_end` with Lawson-RK4 in the interaction picture.
pub fn evolve(state: &SpectralState, p: &DispersionParams, cfg: &SolverConfig) -> Result<Trajectory> {
    check_grid(p, &state.grid)?;
    if !(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || cfg.dt > cfg.t_end {
        return Err(Error::Domain(format!("need 0 < dt ≤ t_end, got dt = {}, t_end = {}", cfg.dt, cfg.t_end)));
    }
    let mut cur = state.clone();
    if cfg.dealias {
        if !cur.is_dealiased(1e-12) {
            return Err(Error::Domain("initial state has energy in the dealiased band".into()));
        }
        cur.dealias();
    }
    let grid = state.grid.clone();
    let (pu, pv) = LinearCoeffs::of(p).phases(&grid);
    let pmax = (0..grid.num_modes)
        .filter(|&i| !cfg.dealias || grid.kept(i))
        .map(|i| pu[i].abs().max(pv[i].abs()))
        .fold(0.0, f64::max);
    let st = Stepper { tr: Transforms::new(grid.num_modes), grid, pu, pv, dealias: cfg.dealias, linear_only: cfg.linear_only };
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let h = cfg.t_end / steps as f64;
    let first = Diagnostics::record(&cur);
    let (m0u, m0v, q0) = (first.mean_u, first.mean_v, first.quad_inv);
    let mut records = vec![first];
    let mut snapshots = vec![cur.clone()];
    let mut y = (cur.u_hat.clone(), cur.v_hat.clone());
    let t0 = cur.time;
    for n in 1..=steps {
        let next = st.step(&y, h);
        if next.0.iter().chain(&next.1).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::BlowUp { last_valid_time: t0 + (n - 1) as f64 * h });
        }
        y = next;
        cur.u_hat.clone_from(&y.0);
        cur.v_hat.clone_from(&y.1);
        cur.time = t0 + n as f64 * h;
        records.push(Diagnostics::record(&cur));
        if cfg.snapshot_every.is_some_and(|k| k > 0 && n % k == 0) && n != steps {
            snapshots.push(cur.clone());
        }
    }
    snapshots.push(cur);
    let max_mean_drift = records.iter().map(|r| (r.mean_u - m0u).abs().max((r.mean_v - m0v).abs())).fold(0.0, f64::max);
    let quad_rel_drift = records.iter().map(|r| (r.quad_inv - q0).abs()).fold(0.0, f64::max) / q0.max(f64::MIN_POSITIVE);
    Ok(Trajectory {
        snapshots,
        diagnostics: Diagnostics { records, stability_number: h * pmax, max_mean_drift, quad_rel_drift },
    })
}

/// `‖y_h − y_{h/2}‖ / ‖y_{h/2} − y_{h/4}‖`, about 16 for a fourth-order scheme.
pub fn dt_halving_ratio(state: &SpectralState, p: &DispersionParams, dt: f64, t_end: f64) -> Result<f64> {
    let run = |h: f64| evolve(state, p, &SolverConfig::new(h, t_end)).map(|t| t.last().clone());
    let (a, b, c) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
    Ok(a.max_diff(&b) / b.max_diff(&c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardAgreement {
    pub deltas: Vec<f64>,
    /// Largest deviation from the order-2 expansion over all modes of `u`, `v`.
    pub errors: Vec<f64>,
    /// Log-log slope of error against `δ`.
    pub order: f64,
}

/// Runs the solver on `δ(φ, ψ)` and compares with `δf₁ + δ²f₂/2`.
pub fn picard_agreement(
    p: &DispersionParams,
    phi: &SparseSpectrum,
    psi: &SparseSpectrum,
    grid: &TorusGrid,
    deltas: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<PicardAgreement> {
    let it = picard_iterates(p, phi, psi, 2)?;
    let mut errors = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let s0 = SpectralState::from_spectra(grid, phi, psi, d)?;
        let traj = evolve(&s0, p, &SolverConfig::new(dt, t_end))?;
        let end = traj.last();
        let mut err: f64 = 0.0;
        for i in 0..grid.num_modes {
            let j = grid.index(i);
            let xi = Q::from_integer(j.into()) / &p.sigma;
            let pu = taylor(&it.phi, d, 2, &xi, end.time);
            let pv = taylor(&it.psi, d, 2, &xi, end.time);
            err = err.max((end.hat(true, j) - pu).norm()).max((end.hat(false, j) - pv).norm());
        }
        errors.push(err);
    }
    let pts: Vec<(f64, f64)> = deltas.iter().copied().zip(errors.iter().copied()).collect();
    let order = crate::fit::loglog_slope(&pts)?;
    Ok(PicardAgreement { deltas: deltas.to_vec(), errors, order })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub t: f64,
    pub solver: f64,
    pub picard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    #[serde(with = "exact::serde_q")]
    pub beta: Q,
    pub n: i64,
    #[serde(rename = "N")]
    pub n_big: i64,
    pub amplitude: f64,
    /// Whether `G((N+n)/2, (N−n)/2, −N) = 0`.
    pub resonant: bool,
    pub rows: Vec<TransferRow>,
    /// Least-squares slopes of `|û(N, t)|` in `t` through the origin.
    pub solver_slope: f64,
    pub picard_slope: f64,
    /// `|û(N, T)|` from the solver over the order-2 Picard value.
    pub ratio_at_t: f64,
}

/// α = 4, `v = δ·(1/πN^s)[cos((N+n)x/2) + cos((N−n)x/2)]`, `u = 0`: tracks `|û(N, t)|`.
pub fn resonance_transfer_experiment(
    beta: &Q,
    n: i64,
    n_big: i64,
    t_end: f64,
    amplitude: f64,
    num_modes: usize,
    dt: f64,
) -> Result<TransferReport> {
    if n < 1 || (n_big + n) % 2 != 0 || n_big <= n {
        return Err(Error::Admissibility("need n ≥ 1, N > n and (N ± n)/2 integers".into()));
    }
    let p = DispersionParams::new(exact::qi(4), beta.clone(), exact::qi(1))?;
    let s = 1.0;
    let a = (n_big as f64).powf(-s);
    let m1 = (n_big + n) / 2;
    let m2 = (n_big - n) / 2;
    let psi = SparseSpectrum::cosines(&[(exact::qi(m1), a), (exact::qi(m2), a)]);
    let phi = SparseSpectrum::new(true);
    let grid = TorusGrid::new(1.0, num_modes)?;
    if 3 * (2 * m1 as usize) > num_modes {
        return Err(Error::Domain(format!("num_modes too small for N = {n_big}")));
    }
    let it = picard_iterates(&p, &phi, &psi, 2)?;
    let s0 = SpectralState::from_spectra(&grid, &phi, &psi, amplitude)?;
    let mut cfg = SolverConfig::new(dt, t_end);
    let steps = (t_end / dt).round() as usize;
    cfg.snapshot_every = Some((steps / 20).max(1));
    let traj = evolve(&s0, &p, &cfg)?;
    let xi = exact::qi(n_big);
    let rows: Vec<TransferRow> = traj
        .snapshots
        .iter()
        .map(|st| TransferRow {
            t: st.time,
            solver: st.hat(true, n_big).norm(),
            picard: taylor(&it.phi, amplitude, 2, &xi, st.time).norm(),
        })
        .collect();
    let slope = |f: &dyn Fn(&TransferRow) -> f64| {
        let num: f64 = rows.iter().map(|r| r.t * f(r)).sum();
        let den: f64 = rows.iter().map(|r| r.t * r.t).sum();
        num / den
    };
    let last = rows.last().expect("nonempty");
    let g = crate::picard::gamma3_g(&p, &exact::qi(m1), &exact::qi(m2), &-xi.clone())?;
    Ok(TransferReport {
        beta: beta.clone(),
        n,
        n_big,
        amplitude,
        resonant: num_traits::Zero::is_zero(&g),
        solver_slope: slope(&|r| r.solver),
        picard_slope: slope(&|r| r.picard),
        ratio_at_t: last.solver / last.picard,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    fn p(a: i64, b: i64) -> DispersionParams {
        DispersionParams::from_ints(a, b, 1).unwrap()
    }

    #[test]
    fn mean_reduce_examples() {
        let g = TorusGrid::new(1.0, 32).unwrap();
        let xs = g.points();
        let (r, b) = mean_reduce_samples(&xs.iter().map(|x| 2.0 + x.cos()).collect::<Vec<_>>());
        assert!((b - 2.0).abs() < 1e-14);
        assert!(r.iter().zip(&xs).all(|(y, x)| (y - x.cos()).abs() < 1e-14));
        let (r, b) = mean_reduce_samples(&vec![0.0; 32]);
        assert!(b == 0.0 && r.iter().all(|&y| y == 0.0));
        let (_, b) = mean_reduce_samples(&xs.iter().map(|x| 3.0 * (2.0 * x).sin() - 5.0).collect::<Vec<_>>());
        assert!((b + 5.0).abs() < 1e-14);
    }

    #[test]
    fn scale_problem_examples() {
        let g = TorusGrid::new(1.0, 64).unwrap();
        let u: Vec<f64> = g.points().iter().map(|x| x.cos()).collect();
        let s = scale_problem(&g, &u, &u, 2.0).unwrap();
        let (us, _) = s.to_real();
        for (x, y) in s.grid.points().iter().zip(&us) {
            assert!((y - 0.25 * (x / 2.0).cos()).abs() < 1e-14);
        }
        // ‖u^σ‖_{L²(𝕋_σ)} = σ^{−3/2}‖u‖_{L²(𝕋)}
        let l2 = |st: &SpectralState| st.hs_norm(0.0) / 2f64.sqrt();
        let unit = SpectralState::from_real(&g, &u, &vec![0.0; 64]).unwrap();
        let sc = scale_problem(&g, &u, &vec![0.0; 64], 2.0).unwrap();
        assert!((l2(&sc) - 2f64.powf(-1.5) * l2(&unit)).abs() < 1e-13);
        assert!(scale_problem(&g, &u, &u, 0.5).is_err());
        assert_eq!(scale_problem(&g, &u, &u, 1.0).unwrap().to_real().0.len(), 64);
    }

    #[test]
    fn linear_propagation_residual() {
        let g = TorusGrid::new(1.0, 16).unwrap();
        let s0 = SpectralState::from_fn(&g, |x| x.cos(), |x| x.cos()).unwrap();
        let params = p(2, 3);
        let t = 0.7;
        let s = linear_propagate(&s0, &params, t).unwrap();
        let (u, v) = s.to_real();
        for (x, (a, b)) in g.points().iter().zip(u.iter().zip(&v)) {
            assert!((a - (x + t).cos()).abs() < 1e-13);
            // v̂(1) picks up e^{i(2 − 3)t}: v = cos(x − t)
            assert!((b - (x - t).cos()).abs() < 1e-13);
        }
        assert_eq!(linear_propagate(&s0, &params, 0.0).unwrap().u_hat, s0.u_hat);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = TorusGrid::new(1.0, 32).unwrap();
        let s0 = SpectralState::zero(&g);
        let tr = evolve(&s0, &p(2, 1), &SolverConfig::new(0.01, 0.1)).unwrap();
        assert!(tr.last().u_hat.iter().chain(&tr.last().v_hat).all(|c| c.is_zero()));
    }

    #[test]
    fn linear_only_matches_propagator() {
        let g = TorusGrid::new(2.0, 64).unwrap();
        let params = DispersionParams::new(qi(3), qi(-2), qi(2)).unwrap();
        let mut s0 = SpectralState::from_fn(&g, |x| (x / 2.0).sin(), |x| (1.5 * x).cos() + 0.3).unwrap();
        s0.dealias();
        let mut cfg = SolverConfig::new(0.01, 0.5);
        cfg.linear_only = true;
        let a = evolve(&s0, &params, &cfg).unwrap();
        let b = linear_propagate(&s0, &params, 0.5).unwrap();
        assert!(a.last().max_diff(&b) < 1e-12);
    }

    #[test]
    fn conservation_short_run() {
        let g = TorusGrid::new(1.0, 64).unwrap();
        let s0 = SpectralState::from_fn(&g, |x| 0.3 * x.cos() + 0.1, |x| 0.2 * (2.0 * x).sin() - 0.05).unwrap();
        let tr = evolve(&s0, &p(2, 1), &SolverConfig::new(1e-3, 0.2)).unwrap();
        assert!(tr.diagnostics.max_mean_drift < 1e-13);
        assert!(tr.diagnostics.quad_rel_drift < 1e-8);
        assert!(tr.last().is_hermitian(1e-12));
    }

    #[test]
    fn blow_up_reported() {
        let g = TorusGrid::new(1.0, 16).unwrap();
        let s0 = SpectralState::from_fn(&g, |x| 1e300 * x.cos(), |x| 1e300 * x.sin()).unwrap();
        let err = evolve(&s0, &p(2, 1), &SolverConfig::new(0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }
}
