//! Minimizers of the action S_ω and the constrained energy, plus the N(ω)
//! map and multistart uniqueness experiments.
//!
//! All solves work in the reduced variable u = rχ on a uniform grid with
//! Dirichlet ends, where −Δχ becomes −u''/r and every functional is a plain
//! sum. The internal discrete objective and its gradient are exactly
//! consistent (the gradient is the derivative of the evaluated sum), so the
//! Euler–Lagrange residual
//!
//!   ‖(−u'' − u/r + (ω + Φ)u)‖ / ‖u‖
//!
//! is a true stationarity measure, and the self-consistent-field solver and
//! the gradient-flow solver agree on what "solved" means. Final reports are
//! recomputed with the high-order quadrature of `functionals`.

use crate::error::{Error, Result};
use crate::functionals::{report, FunctionalReport};
use crate::radial::{
    rel_l2_distance, FieldEnvelope, Parity, RadialField, RadialGrid, SpacingKind, FOUR_PI,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    GaussianRandom,
    ScaledE0,
    Custom(FieldEnvelope),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub omega: f64,
    pub n: usize,
    pub r_max: f64,
    /// Initial line-search step, in (0, 1].
    pub step_size: f64,
    pub max_iters: usize,
    /// Euler–Lagrange residual target.
    pub el_tol: f64,
    pub seed: u64,
    pub init_kind: InitKind,
}

impl SolverConfig {
    pub fn new(omega: f64) -> SolverConfig {
        SolverConfig {
            omega,
            n: crate::radial::DEFAULT_N,
            r_max: crate::radial::DEFAULT_R_MAX,
            step_size: 1.0,
            max_iters: 50_000,
            el_tol: 1e-8,
            seed: 1,
            init_kind: InitKind::ScaledE0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Config(format!("need omega > 0, got {}", self.omega)));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::Config(format!(
                "step_size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        if self.el_tol < 1e-12 {
            return Err(Error::Config(format!(
                "el_tol must be at least 1e-12, got {}",
                self.el_tol
            )));
        }
        Ok(())
    }

    fn grid(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::build(self.n, self.r_max, SpacingKind::Uniform)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerResult {
    #[serde(skip)]
    pub chi: RadialField,
    pub omega: f64,
    pub report: FunctionalReport,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The iterate died to the zero field (a stationary point, but never the
    /// minimizer for ω < 1/4).
    pub collapsed: bool,
}

/// Reduced-variable workspace: everything is a length-m vector on the
/// interior nodes r_1..r_{n−1} (u = 0 at both the origin and R_max).
struct UGrid {
    r: Vec<f64>,
    h: f64,
    grid: Arc<RadialGrid>,
}

impl UGrid {
    fn new(grid: Arc<RadialGrid>) -> UGrid {
        let h = grid.step().expect("solver grids are uniform");
        let r = grid.nodes()[..grid.n() - 1].to_vec();
        UGrid { r, h, grid }
    }

    fn m(&self) -> usize {
        self.r.len()
    }

    /// Discrete −u'' with Dirichlet ends.
    fn apply_k(&self, u: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        let m = u.len();
        for i in 0..m {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < m { u[i + 1] } else { 0.0 };
            out[i] = inv_h2 * (2.0 * u[i] - left - right);
        }
    }

    /// Hartree potential of the density u²: Φ_i = 4πh Σ_j u_j² / max(r_i,r_j),
    /// via prefix sums.
    fn phi(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let mut prefix_sq = vec![0.0; m];
        let mut prefix_over_r = vec![0.0; m];
        let mut acc_sq = 0.0;
        let mut acc_over_r = 0.0;
        for i in 0..m {
            acc_sq += u[i] * u[i];
            acc_over_r += u[i] * u[i] / self.r[i];
            prefix_sq[i] = acc_sq;
            prefix_over_r[i] = acc_over_r;
        }
        let total_over_r = acc_over_r;
        (0..m)
            .map(|i| {
                FOUR_PI * self.h * (prefix_sq[i] / self.r[i] + (total_over_r - prefix_over_r[i]))
            })
            .collect()
    }

    /// Discrete action: S = 4πh [ ½uᵀKu + ½Σ(ω−1/r)u² + ¼Σ Φ_i u_i² ].
    fn action(&self, u: &[f64], omega: f64) -> f64 {
        let m = u.len();
        let mut ku = vec![0.0; m];
        self.apply_k(u, &mut ku);
        let phi = self.phi(u);
        let mut s = 0.0;
        for i in 0..m {
            s += 0.5 * u[i] * ku[i]
                + 0.5 * (omega - 1.0 / self.r[i]) * u[i] * u[i]
                + 0.25 * phi[i] * u[i] * u[i];
        }
        FOUR_PI * self.h * s
    }

    /// Euler–Lagrange field Ku + (ω − 1/r + Φ)u; this times 4πh is the exact
    /// gradient of `action`.
    fn el_field(&self, u: &[f64], omega: f64) -> Vec<f64> {
        let m = u.len();
        let mut out = vec![0.0; m];
        self.apply_k(u, &mut out);
        let phi = self.phi(u);
        for i in 0..m {
            out[i] += (omega - 1.0 / self.r[i] + phi[i]) * u[i];
        }
        out
    }

    fn el_residual(&self, u: &[f64], omega: f64) -> f64 {
        let el = self.el_field(u, omega);
        let rn: f64 = el.iter().map(|x| x * x).sum::<f64>().sqrt();
        let un: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if un == 0.0 {
            0.0
        } else {
            rn / un
        }
    }

    /// Solves (K + c) d = b by the Thomas algorithm (SPD for c > 0).
    fn precondition(&self, c: f64, b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        let diag = 2.0 * inv_h2 + c;
        let off = -inv_h2;
        let mut cp = vec![0.0; m];
        let mut dp = vec![0.0; m];
        cp[0] = off / diag;
        dp[0] = b[0] / diag;
        for i in 1..m {
            let denom = diag - off * cp[i - 1];
            cp[i] = off / denom;
            dp[i] = (b[i] - off * dp[i - 1]) / denom;
        }
        let mut x = vec![0.0; m];
        x[m - 1] = dp[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    }

    fn chi_field(&self, u: &[f64]) -> RadialField {
        let mut chi: Vec<f64> = u.iter().zip(&self.r).map(|(&ui, &ri)| ui / ri).collect();
        chi.push(0.0);
        RadialField::new(self.grid.clone(), chi, Parity::Even).expect("chi from u")
    }

    fn l2_sq(&self, u: &[f64]) -> f64 {
        FOUR_PI * self.h * u.iter().map(|x| x * x).sum::<f64>()
    }
}

fn initial_u(ug: &UGrid, config: &SolverConfig) -> Result<Vec<f64>> {
    match &config.init_kind {
        InitKind::ScaledE0 => {
            // Amplitude from the trial family: the quartic in δ minimizes at
            // δ² = (1/4 − ω)·8π / (2·20π²).
            let delta_sq = ((0.25 - config.omega).max(0.01) * 8.0 * std::f64::consts::PI)
                / (40.0 * std::f64::consts::PI * std::f64::consts::PI);
            let delta = delta_sq.sqrt();
            Ok(ug.r.iter().map(|&r| delta * r * (-r / 2.0).exp()).collect())
        }
        InitKind::GaussianRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let delta: f64 = rng.gen_range(0.02..0.4);
            let r0: f64 = rng.gen_range(0.0..5.0);
            let width: f64 = rng.gen_range(0.5..3.0);
            Ok(ug
                .r
                .iter()
                .map(|&r| delta * r * (-((r - r0) / width).powi(2)).exp())
                .collect())
        }
        InitKind::Custom(env) => {
            let f = RadialField::from_envelope(env)?;
            if f.grid().n() != ug.grid.n() || (f.grid().r_max() - ug.grid.r_max()).abs() > 1e-12 {
                return Err(Error::Config(
                    "custom initial field does not match the solver grid".into(),
                ));
            }
            Ok(ug
                .r
                .iter()
                .zip(f.values())
                .map(|(&r, &v)| r * v)
                .collect())
        }
    }
}

fn package(
    ug: &UGrid,
    u: &[f64],
    omega: f64,
    el_residual: f64,
    iterations: usize,
    converged: bool,
    collapsed: bool,
) -> MinimizerResult {
    let chi = ug.chi_field(u);
    let rep = report(&chi, omega);
    MinimizerResult {
        chi,
        omega,
        report: rep,
        el_residual,
        iterations,
        converged,
        collapsed,
    }
}

/// Preconditioned projected gradient descent on S_ω.
pub fn minimize_action(config: &SolverConfig) -> Result<MinimizerResult> {
    config.validate()?;
    let ug = UGrid::new(config.grid()?);
    let mut u = initial_u(&ug, config)?;
    let init_scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if init_scale == 0.0 {
        return Ok(package(&ug, &u, config.omega, 0.0, 0, false, true));
    }
    let mut step = config.step_size;
    let mut s = ug.action(&u, config.omega);
    let mut iterations = 0;
    let mut residual = ug.el_residual(&u, config.omega);
    while iterations < config.max_iters {
        if residual <= config.el_tol {
            break;
        }
        let el = ug.el_field(&u, config.omega);
        let dir = ug.precondition(config.omega, &el);
        // Backtracking on u ← |u − α·dir|. Near the minimum the action
        // decrease drops below f64 rounding while the residual still shrinks,
        // so steps that hold the action flat but cut the residual also count.
        let mut alpha = step;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&dir)
                .map(|(&ui, &di)| (ui - alpha * di).abs())
                .collect();
            let s_trial = ug.action(&trial, config.omega);
            let ok = s_trial < s
                || (s_trial <= s + 1e-13 * s.abs()
                    && ug.el_residual(&trial, config.omega) < 0.9 * residual);
            if ok {
                u = trial;
                s = s_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        step = (alpha * 1.5).min(1.0);
        residual = ug.el_residual(&u, config.omega);
        let scale = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale < 1e-10 * init_scale.max(1e-3) {
            return Ok(package(&ug, &u, config.omega, residual, iterations, false, true));
        }
    }
    let converged = residual <= config.el_tol;
    Ok(package(
        &ug,
        &u,
        config.omega,
        residual,
        iterations,
        converged,
        false,
    ))
}

/// Lowest eigenpair of K − diag(1/r) + diag(v) by Sturm bisection plus
/// inverse iteration; returns (eigenvalue, unit eigenvector).
fn lowest_eigenpair(ug: &UGrid, extra: &[f64]) -> (f64, Vec<f64>) {
    let m = ug.m();
    let inv_h2 = 1.0 / (ug.h * ug.h);
    let diag: Vec<f64> = (0..m)
        .map(|i| 2.0 * inv_h2 - 1.0 / ug.r[i] + extra[i])
        .collect();
    let off = vec![-inv_h2; m - 1];
    let lambda = crate::spectral::lowest_eigenvalue(&diag, &off);
    let v = crate::spectral::inverse_iterate(&diag, &off, lambda);
    (lambda, v)
}

/// Damped self-consistent iteration on the reduced nonlocal ODE.
///
/// Each step freezes the Hartree coefficient from the current iterate,
/// rescales it so the lowest eigenvalue of the frozen linear operator equals
/// −ω (amplitude bisection — the eigenvalue is monotone in the scaling), and
/// mixes the resulting eigenvector into the iterate.
pub fn scf_fixed_point(config: &SolverConfig) -> Result<MinimizerResult> {
    config.validate()?;
    if config.omega >= 0.25 {
        return Err(Error::Precondition(format!(
            "scf targets bound states below the hydrogen ground level: need omega < 1/4, got {}",
            config.omega
        )));
    }
    let ug = UGrid::new(config.grid()?);
    let mut u = initial_u(&ug, config)?;
    let norm = ug.l2_sq(&u).sqrt();
    if norm == 0.0 {
        return Ok(package(&ug, &u, config.omega, 0.0, 0, false, true));
    }
    let mixing = 0.5;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let max_outer = config.max_iters.min(500).max(50);
    while iterations < max_outer {
        residual = ug.el_residual(&u, config.omega);
        if residual <= config.el_tol {
            break;
        }
        // Unit-density Hartree shape from the current iterate.
        let l2 = ug.l2_sq(&u);
        if l2 < 1e-300 {
            return Ok(package(&ug, &u, config.omega, residual, iterations, false, true));
        }
        let phi_hat: Vec<f64> = ug.phi(&u).iter().map(|p| p / l2).collect();
        // λ(s) for the operator K − 1/r + s·(l2-normalized Φ) is increasing;
        // find s with λ(s) = −ω.
        let target = -config.omega;
        let mut lo = 0.0;
        let mut hi = 1.0;
        let lam = |s: f64| {
            let extra: Vec<f64> = phi_hat.iter().map(|p| s * p).collect();
            lowest_eigenpair(&ug, &extra).0
        };
        while lam(hi) < target {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NonConvergence(
                    "scf amplitude bisection diverged; try a smaller mixing parameter".into(),
                ));
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if lam(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s_star = 0.5 * (lo + hi);
        let extra: Vec<f64> = phi_hat.iter().map(|p| s_star * p).collect();
        let (_, v) = lowest_eigenpair(&ug, &extra);
        // Positive sign and the amplitude that reproduces s_star·Φ̂.
        let sign = if v.iter().sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
        let vnorm = ug.l2_sq(&v).sqrt();
        // Self-consistency wants ‖u_new‖² (in the 4πh∫ metric, matching the
        // Φ̂ normalization above) equal to s_star.
        let amp = sign * s_star.sqrt() / vnorm;
        let u_new: Vec<f64> = v.iter().map(|&x| amp * x).collect();
        for i in 0..u.len() {
            u[i] = (1.0 - mixing) * u[i] + mixing * u_new[i];
            u[i] = u[i].abs();
        }
        iterations += 1;
    }
    let converged = residual <= config.el_tol;
    if !converged && iterations >= max_outer {
        return Err(Error::NonConvergence(format!(
            "scf stalled at residual {residual:.3e} after {iterations} sweeps; \
             try a smaller mixing parameter or looser el_tol"
        )));
    }
    Ok(package(
        &ug,
        &u,
        config.omega,
        residual,
        iterations,
        converged,
        false,
    ))
}

/// Constrained minimization of the energy E over ‖χ‖² = N; the returned
/// `omega` is the Lagrange multiplier ω_eff read off the converged iterate.
pub fn minimize_energy_constrained(n_constraint: f64, config: &SolverConfig) -> Result<MinimizerResult> {
    config.validate()?;
    if !(n_constraint > 0.0) {
        return Err(Error::Config(format!("need N > 0, got {n_constraint}")));
    }
    let ug = UGrid::new(config.grid()?);
    let mut u = initial_u(&ug, config)?;
    let renorm = |u: &mut Vec<f64>| {
        let l2 = FOUR_PI * ug.h * u.iter().map(|x| x * x).sum::<f64>();
        let c = (n_constraint / l2).sqrt();
        for x in u.iter_mut() {
            *x *= c;
        }
    };
    if ug.l2_sq(&u) == 0.0 {
        return Err(Error::Precondition("zero initial field cannot be normalized".into()));
    }
    renorm(&mut u);
    // Energy gradient field: Ku − u/r + Φu (no ω term).
    let grad = |u: &[f64]| -> Vec<f64> {
        let m = u.len();
        let mut g = vec![0.0; m];
        ug.apply_k(u, &mut g);
        let phi = ug.phi(u);
        for i in 0..m {
            g[i] += (-1.0 / ug.r[i] + phi[i]) * u[i];
        }
        g
    };
    let energy = |u: &[f64]| -> f64 {
        // E = S_0 form: ½uᵀKu − ½Σu²/r + ¼ΣΦu², times 4πh.
        ug.action(u, 0.0)
    };
    let rayleigh = |u: &[f64], g: &[f64]| -> f64 {
        let num: f64 = u.iter().zip(g).map(|(&a, &b)| a * b).sum();
        let den: f64 = u.iter().map(|&a| a * a).sum();
        -num / den
    };
    let mut e = energy(&u);
    let mut step = config.step_size;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let g = grad(&u);
        let omega_eff = rayleigh(&u, &g);
        // Stationarity of the constrained problem: gradient plus ω_eff·u
        // vanishes on the constraint manifold.
        let un: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let residual = g
            .iter()
            .zip(&u)
            .map(|(&gi, &ui)| (gi + omega_eff * ui).powi(2))
            .sum::<f64>()
            .sqrt()
            / un;
        if residual <= config.el_tol {
            break;
        }
        // Descend along the constraint tangent g + ω_eff·u (⊥ u by the
        // Rayleigh choice of ω_eff), so steps do not fight the renormalizer.
        let tangent: Vec<f64> = g
            .iter()
            .zip(&u)
            .map(|(&gi, &ui)| gi + omega_eff * ui)
            .collect();
        let dir = ug.precondition(omega_eff.abs().max(1e-3), &tangent);
        let mut alpha = step;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial: Vec<f64> = u
                .iter()
                .zip(&dir)
                .map(|(&ui, &di)| (ui - alpha * di).abs())
                .collect();
            renorm(&mut trial);
            let e_trial = energy(&trial);
            let ok = e_trial < e
                || (e_trial <= e + 1e-13 * e.abs() && {
                    let gt = grad(&trial);
                    let om = rayleigh(&trial, &gt);
                    let tn: f64 = trial.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let res_t = gt
                        .iter()
                        .zip(&trial)
                        .map(|(&gi, &ui)| (gi + om * ui).powi(2))
                        .sum::<f64>()
                        .sqrt()
                        / tn;
                    res_t < 0.9 * residual
                });
            if ok {
                u = trial;
                e = e_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        step = (alpha * 1.5).min(1.0);
    }
    // The loop keeps the constraint in the plain-h metric; the contract is
    // stated in the high-order quadrature metric, so rescale once at the end.
    let (l2_rep, _) = crate::radial::norms(&ug.chi_field(&u));
    let c = (n_constraint / l2_rep).sqrt();
    for x in u.iter_mut() {
        *x *= c;
    }
    let g = grad(&u);
    let omega_eff = rayleigh(&u, &g);
    let un: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let residual: f64 = g
        .iter()
        .zip(&u)
        .map(|(&gi, &ui)| (gi + omega_eff * ui).powi(2))
        .sum::<f64>()
        .sqrt()
        / un;
    let converged = residual <= config.el_tol;
    Ok(package(&ug, &u, omega_eff, residual, iterations, converged, false))
}

/// N(ω) = ‖χ_ω‖², with a warning outside the uniqueness regime (1/16, 1/4).
pub fn n_of_omega(omega: f64, config: &SolverConfig) -> Result<(f64, Option<String>)> {
    let mut cfg = config.clone();
    cfg.omega = omega;
    let result = minimize_action(&cfg)?;
    if !result.converged {
        return Err(Error::NonConvergence(format!(
            "minimize_action stalled at residual {:.3e}",
            result.el_residual
        )));
    }
    let warning = if omega <= 1.0 / 16.0 + 1e-9 || omega >= 0.25 - 1e-9 {
        Some(format!(
            "omega = {omega} lies outside the uniqueness regime (1/16, 1/4); N(omega) may not determine the minimizer"
        ))
    } else {
        None
    };
    Ok((result.report.l2_sq, warning))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultistartReport {
    pub omega: f64,
    pub n_starts: usize,
    pub n_converged: usize,
    pub max_pairwise_rel_l2: f64,
    pub el_residuals: Vec<f64>,
    pub actions: Vec<f64>,
    pub failed_starts: Vec<usize>,
}

/// Runs `n_starts` random-start solves and measures the spread of the limits.
pub fn multistart_uniqueness(
    omega: f64,
    n_starts: usize,
    seed: u64,
    base: &SolverConfig,
) -> Result<(MultistartReport, Vec<MinimizerResult>)> {
    if n_starts < 1 {
        return Err(Error::Config("need at least one start".into()));
    }
    if omega <= 1.0 / 16.0 + 1e-9 || omega >= 0.25 - 1e-9 {
        return Err(Error::Precondition(format!(
            "multistart uniqueness is stated for omega in (1/16, 1/4), got {omega}"
        )));
    }
    use rayon::prelude::*;
    let runs: Vec<(usize, Result<MinimizerResult>)> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let mut cfg = base.clone();
            cfg.omega = omega;
            cfg.seed = seed.wrapping_add(i as u64);
            cfg.init_kind = InitKind::GaussianRandom;
            (i, minimize_action(&cfg))
        })
        .collect();
    let mut converged = Vec::new();
    let mut failed = Vec::new();
    let mut residuals = Vec::new();
    let mut actions = Vec::new();
    for (i, run) in runs {
        match run {
            Ok(res) if res.converged && !res.collapsed => {
                residuals.push(res.el_residual);
                actions.push(res.report.action);
                converged.push(res);
            }
            _ => failed.push(i),
        }
    }
    let mut max_dist = 0.0_f64;
    for i in 0..converged.len() {
        for j in 0..i {
            max_dist = max_dist.max(rel_l2_distance(&converged[i].chi, &converged[j].chi));
        }
    }
    let report = MultistartReport {
        omega,
        n_starts,
        n_converged: converged.len(),
        max_pairwise_rel_l2: max_dist,
        el_residuals: residuals,
        actions,
        failed_starts: failed,
    };
    Ok((report, converged))
}
