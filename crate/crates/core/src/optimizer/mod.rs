//! Weighted sum energy-efficiency maximization by successive convex
//! approximation.
//!
//! Each iteration replaces every rate by its concave quadratic minorant at
//! the current precoders and prices transmit power at the current energy
//! efficiency, which turns the fractional objective into a concave
//! maximization over a ball. Any point that improves the priced surrogate
//! improves the true energy efficiency, so the iterates ascend
//! monotonically; steps that fail to improve the exact objective (because
//! of inner-solver tolerance) are shortened and finally rejected.
//!
//! The RSMA common-rate vector is not a decision variable of the inner
//! problem: for fixed precoders the best split puts the whole decodable
//! common rate `min_k R^c_k` on the heaviest weight, so the common layer
//! enters the surrogate as `max_k beta_k * min_k Rc_k`.

mod barrier;
pub mod oracle;
mod surrogate;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::standard_complex_gaussian;
use crate::error::{Error, Result};
use crate::ma::{evaluate, LinkBudget, PrecoderSolution, RateReport, Scheme};

pub use oracle::oracle_search;

use barrier::Subproblem;
use surrogate::{solution_at, Layout, Surrogate};

/// Step fractions tried when a full SCA step lowers the exact objective.
const MAX_STEP_HALVINGS: usize = 6;
/// Relative size of the Gaussian perturbation applied on restarts.
const RESTART_PERTURBATION: f64 = 0.1;
/// Share of the transmit power moved onto each silent column of a warm start.
const NUDGE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub num_restarts: usize,
    pub inner_solver_tolerance: f64,
    /// Fraction of the way from the current point to the subproblem optimum
    /// taken on the first attempt of each iteration. `None` means a full step.
    pub trust_region_initial: Option<f64>,
    pub restart_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            rel_tolerance: 1e-4,
            num_restarts: 5,
            inner_solver_tolerance: 1e-7,
            trust_region_initial: None,
            restart_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("solver.max_iterations", "must be >= 1"));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::config("solver.rel_tolerance", "must be > 0"));
        }
        if !(self.inner_solver_tolerance > 0.0) {
            return Err(Error::config("solver.inner_solver_tolerance", "must be > 0"));
        }
        if self.num_restarts == 0 {
            return Err(Error::config("solver.num_restarts", "must be >= 1"));
        }
        if let Some(tr) = self.trust_region_initial {
            if !(tr > 0.0 && tr <= 1.0) {
                return Err(Error::config("solver.trust_region_initial", "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: PrecoderSolution,
    pub report: RateReport,
    /// Weighted sum energy efficiency of `solution`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iteration of the winning trajectory, starting
    /// with its initial point.
    pub objective_trace: Vec<f64>,
    /// Final objective of every trajectory, in start order.
    pub start_objectives: Vec<f64>,
    /// Iterations where the inner solve failed and the iterate was kept.
    pub inner_failures: usize,
}

/// Exact objective at a flattened point.
fn objective_at(x: &[f64], scheme: Scheme, lb: &LinkBudget) -> (PrecoderSolution, f64) {
    let sol = solution_at(x, scheme, lb);
    let ee = evaluate(&sol, lb).ee_sum;
    (sol, ee)
}

struct StepOutcome {
    x: Vec<f64>,
    objective: f64,
    inner_failed: bool,
}

fn sca_step(scheme: Scheme, lb: &LinkBudget, x: &[f64], objective: f64, cfg: &SolverConfig) -> StepOutcome {
    let keep = |inner_failed| StepOutcome {
        x: x.to_vec(),
        objective,
        inner_failed,
    };
    let surrogate = Surrogate::build(scheme, lb, x);
    let sub = Subproblem {
        surrogate: &surrogate,
        lambda: objective,
        power_budget: lb.power_budget,
    };
    let Some(out) = sub.solve(x, cfg.inner_solver_tolerance) else {
        return keep(true);
    };
    let mut alpha = cfg.trust_region_initial.unwrap_or(1.0);
    for _ in 0..=MAX_STEP_HALVINGS {
        let cand: Vec<f64> = x.iter().zip(&out).map(|(a, b)| a + alpha * (b - a)).collect();
        let (_, value) = objective_at(&cand, scheme, lb);
        if value >= objective && value.is_finite() {
            return StepOutcome {
                x: cand,
                objective: value,
                inner_failed: false,
            };
        }
        alpha *= 0.5;
    }
    keep(false)
}

/// One SCA update from a feasible point. Returns `current` unchanged when
/// no improving step is found or the inner solve fails.
pub fn sca_iteration(current: &PrecoderSolution, lb: &LinkBudget, cfg: &SolverConfig) -> PrecoderSolution {
    let scheme = current.scheme;
    if lb.power_budget <= 0.0 {
        return current.clone();
    }
    let layout = Layout::for_scheme(scheme, lb.num_antennas(), lb.num_uavs());
    let x = layout.pack(current);
    let (_, objective) = objective_at(&x, scheme, lb);
    let step = sca_step(scheme, lb, &x, objective, cfg);
    if step.x == x {
        return current.clone();
    }
    solution_at(&step.x, scheme, lb)
}

struct Trajectory {
    x: Vec<f64>,
    objective: f64,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    inner_failures: usize,
}

fn run_trajectory(scheme: Scheme, lb: &LinkBudget, start: Vec<f64>, cfg: &SolverConfig) -> Trajectory {
    let (_, mut objective) = objective_at(&start, scheme, lb);
    let mut x = start;
    let mut trace = vec![objective];
    let mut small_changes = 0;
    let mut inner_failures = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let step = sca_step(scheme, lb, &x, objective, cfg);
        inner_failures += usize::from(step.inner_failed);
        let stalled = step.x == x;
        let change = (step.objective - objective).abs() / objective.abs().max(f64::MIN_POSITIVE);
        x = step.x;
        objective = step.objective;
        trace.push(objective);
        if stalled {
            // a rejected step would repeat identically
            converged = true;
            break;
        }
        small_changes = if change < cfg.rel_tolerance { small_changes + 1 } else { 0 };
        if small_changes >= 2 {
            converged = true;
            break;
        }
    }
    Trajectory {
        x,
        objective,
        trace,
        iterations,
        converged,
        inner_failures,
    }
}

fn column_norm(w: &[Complex64]) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scaled(w: &[Complex64], power: f64) -> Vec<Complex64> {
    let norm = column_norm(w);
    if norm == 0.0 {
        let mut e = vec![Complex64::new(0.0, 0.0); w.len()];
        e[0] = Complex64::new(power.sqrt(), 0.0);
        return e;
    }
    w.iter().map(|z| z * (power.sqrt() / norm)).collect()
}

/// Principal eigenvector of `sum_k G_k h_k h_k^H`.
fn principal_direction(lb: &LinkBudget) -> Vec<Complex64> {
    let m = lb.num_antennas();
    let cov = DMatrix::<Complex64>::from_fn(m, m, |r, c| {
        lb.channels
            .iter()
            .map(|ch| ch.h[r] * ch.h[c].conj() * ch.gain_linear)
            .sum()
    });
    let eig = cov.symmetric_eigen();
    let best = eig.eigenvalues.imax();
    eig.eigenvectors.column(best).iter().copied().collect()
}

/// Maximum-ratio start with the budget split equally; RSMA puts half of it
/// on the common layer along the dominant joint channel direction.
pub fn initial_solution(scheme: Scheme, lb: &LinkBudget) -> PrecoderSolution {
    let k = lb.num_uavs();
    let m = lb.num_antennas();
    let mut sol = PrecoderSolution::zeros(scheme, m, k);
    let private_share = if scheme.has_common_layer() {
        lb.power_budget / (2 * k) as f64
    } else {
        lb.power_budget / k as f64
    };
    for (w, ch) in sol.private.iter_mut().zip(&lb.channels) {
        *w = scaled(&ch.h, private_share);
    }
    if scheme.has_common_layer() {
        sol.common = scaled(&principal_direction(lb), lb.power_budget / 2.0);
        let rc = evaluate(&sol, lb).common_rate_min;
        sol.common_rates = vec![rc / k as f64; k];
    }
    sol
}

fn perturbed(base: &PrecoderSolution, lb: &LinkBudget, rng: &mut ChaCha8Rng) -> PrecoderSolution {
    let mut sol = base.clone();
    let m = sol.num_antennas() as f64;
    let mut perturb = |w: &mut Vec<Complex64>| {
        let sigma = RESTART_PERTURBATION * column_norm(w) / m.sqrt();
        for z in w.iter_mut() {
            *z += standard_complex_gaussian(rng) * sigma;
        }
    };
    for w in sol.private.iter_mut() {
        perturb(w);
    }
    if sol.scheme.has_common_layer() {
        perturb(&mut sol.common);
    }
    let used = sol.transmit_power();
    if used > lb.power_budget {
        let s = (lb.power_budget / used).sqrt();
        sol.private.iter_mut().flatten().for_each(|z| *z *= s);
        sol.common.iter_mut().for_each(|z| *z *= s);
    }
    sol
}

/// RSMA point with exactly the energy efficiency of an SDMA or NOMA
/// solution (or better, once the common rate is re-split). NOMA's top
/// layer is decoded by every UAV, so it moves onto the common stream.
pub fn embed_in_rsma(sol: &PrecoderSolution, lb: &LinkBudget) -> PrecoderSolution {
    let mut out = sol.clone();
    out.scheme = Scheme::Rsma;
    out.common = vec![Complex64::new(0.0, 0.0); lb.num_antennas()];
    out.common_rates = vec![0.0; lb.num_uavs()];
    if sol.scheme == Scheme::Noma && lb.num_uavs() > 1 {
        let top = *lb.noma_order.last().expect("nonempty order");
        out.common = std::mem::replace(&mut out.private[top], vec![Complex64::new(0.0, 0.0); lb.num_antennas()]);
    }
    out
}

/// Copy of `sol` with a little power on every all-zero column (along the
/// UAV's channel, or the joint principal direction for the common stream).
/// A silent stream has a flat minorant, so SCA alone never switches it on.
pub fn nudged(sol: &PrecoderSolution, lb: &LinkBudget) -> Option<PrecoderSolution> {
    let is_zero = |w: &[Complex64]| w.iter().all(|z| *z == Complex64::new(0.0, 0.0));
    let silent_private: Vec<usize> = (0..sol.private.len()).filter(|&k| is_zero(&sol.private[k])).collect();
    let silent_common = sol.scheme.has_common_layer() && is_zero(&sol.common);
    let count = silent_private.len() + usize::from(silent_common);
    let power = sol.transmit_power();
    if count == 0 || count > sol.private.len() || !(power > 0.0) {
        return None;
    }
    let share = NUDGE_FRACTION * power;
    let keep = (1.0 - count as f64 * NUDGE_FRACTION).sqrt();
    let mut out = sol.clone();
    out.private.iter_mut().flatten().for_each(|z| *z *= keep);
    out.common.iter_mut().for_each(|z| *z *= keep);
    for k in silent_private {
        out.private[k] = scaled(&lb.channels[k].h, share);
    }
    if silent_common {
        out.common = scaled(&principal_direction(lb), share);
    }
    Some(out)
}

fn zero_result(scheme: Scheme, lb: &LinkBudget) -> SolveResult {
    let solution = PrecoderSolution::zeros(scheme, lb.num_antennas(), lb.num_uavs());
    let report = evaluate(&solution, lb);
    SolveResult {
        objective: report.ee_sum,
        report,
        solution,
        iterations: 1,
        converged: true,
        objective_trace: vec![0.0],
        start_objectives: vec![0.0],
        inner_failures: 0,
    }
}

/// Runs SCA from the restart starts plus any extra warm starts and keeps the
/// best trajectory (lowest start index on ties).
pub fn optimize_from(
    scheme: Scheme,
    lb: &LinkBudget,
    cfg: &SolverConfig,
    warm_starts: &[PrecoderSolution],
) -> Result<SolveResult> {
    lb.validate()?;
    cfg.validate()?;
    if lb.power_budget <= 0.0 {
        return Ok(zero_result(scheme, lb));
    }
    let layout = Layout::for_scheme(scheme, lb.num_antennas(), lb.num_uavs());
    let base = initial_solution(scheme, lb);
    let mut starts = vec![base.clone()];
    for r in 1..cfg.num_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.restart_seed);
        rng.set_stream(r as u64);
        starts.push(perturbed(&base, lb, &mut rng));
    }
    for w in warm_starts {
        let mut w = w.clone();
        w.scheme = scheme;
        starts.push(w);
    }

    let mut best: Option<Trajectory> = None;
    let mut start_objectives = Vec::with_capacity(starts.len());
    for start in &starts {
        let traj = run_trajectory(scheme, lb, layout.pack(start), cfg);
        start_objectives.push(traj.objective);
        if best.as_ref().is_none_or(|b| traj.objective > b.objective) {
            best = Some(traj);
        }
    }
    let best = best.expect("at least one start");
    let solution = solution_at(&best.x, scheme, lb);
    let report = evaluate(&solution, lb);
    Ok(SolveResult {
        objective: report.ee_sum,
        report,
        solution,
        iterations: best.iterations,
        converged: best.converged,
        objective_trace: best.trace,
        start_objectives,
        inner_failures: best.inner_failures,
    })
}

/// Solves several schemes on the same channels. RSMA is warm-started from
/// the SDMA and NOMA optima (both embed in its feasible set when `K <= 2`;
/// SDMA always does), so those are solved first even if not requested.
pub fn optimize_schemes(schemes: &[Scheme], lb: &LinkBudget, cfg: &SolverConfig) -> Result<Vec<SolveResult>> {
    let needs_rsma = schemes.contains(&Scheme::Rsma);
    let mut cache: Vec<(Scheme, SolveResult)> = Vec::new();
    let solve = |scheme: Scheme, cache: &mut Vec<(Scheme, SolveResult)>| -> Result<SolveResult> {
        if let Some((_, r)) = cache.iter().find(|(s, _)| *s == scheme) {
            return Ok(r.clone());
        }
        let r = match scheme {
            Scheme::Rsma => {
                let mut warm = Vec::new();
                for (_, r) in cache.iter().filter(|(s, _)| *s == Scheme::Sdma || *s == Scheme::Noma) {
                    let embedded = embed_in_rsma(&r.solution, lb);
                    warm.extend(nudged(&embedded, lb));
                    warm.push(embedded);
                }
                optimize_from(Scheme::Rsma, lb, cfg, &warm)?
            }
            other => optimize_from(other, lb, cfg, &[])?,
        };
        cache.push((scheme, r.clone()));
        Ok(r)
    };
    if needs_rsma {
        solve(Scheme::Sdma, &mut cache)?;
        solve(Scheme::Noma, &mut cache)?;
    }
    schemes.iter().map(|&s| solve(s, &mut cache)).collect()
}

/// Maximizes the weighted sum energy efficiency of one scheme.
pub fn optimize(scheme: Scheme, lb: &LinkBudget, cfg: &SolverConfig) -> Result<SolveResult> {
    Ok(optimize_schemes(&[scheme], lb, cfg)?.remove(0))
}

/// RSMA with the common layer frozen at zero.
pub fn optimize_sdma(lb: &LinkBudget, cfg: &SolverConfig) -> Result<SolveResult> {
    optimize(Scheme::Sdma, lb, cfg)
}

/// Feasibility of a returned point: power budget and, for RSMA, the
/// common-rate decodability constraint.
pub fn is_feasible(sol: &PrecoderSolution, lb: &LinkBudget) -> bool {
    let power_ok = crate::ma::check_power(sol, lb).feasible;
    let rates_ok = evaluate(sol, lb).common_rate_feasible;
    power_ok && rates_ok
}
