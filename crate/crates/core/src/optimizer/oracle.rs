//! Random-search oracle used to cross-check the SCA solver on small
//! instances. It shares nothing with the solver except exact evaluation.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SolveResult;
use crate::channel::standard_complex_gaussian;
use crate::error::Result;
use crate::ma::{evaluate, LinkBudget, PrecoderSolution, Scheme};

/// Uniform point on the probability simplex with `n` vertices.
fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

fn random_direction<R: Rng>(rng: &mut R, m: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..m).map(|_| standard_complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

fn sample<R: Rng>(rng: &mut R, scheme: Scheme, lb: &LinkBudget) -> PrecoderSolution {
    let k = lb.num_uavs();
    let m = lb.num_antennas();
    let columns = if scheme.has_common_layer() { k + 1 } else { k };
    let total = lb.power_budget * rng.random::<f64>();
    let shares = simplex(rng, columns);
    let mut sol = PrecoderSolution::zeros(scheme, m, k);
    for (j, share) in shares.iter().enumerate() {
        let amp = (total * share).sqrt();
        let w: Vec<Complex64> = random_direction(rng, m).into_iter().map(|z| z * amp).collect();
        if j < k {
            sol.private[j] = w;
        } else {
            sol.common = w;
        }
    }
    if scheme.has_common_layer() {
        let cap = evaluate(&sol, lb).common_rate_min;
        let split = simplex(rng, k + 1);
        sol.common_rates = split[..k].iter().map(|s| s * cap).collect();
    }
    sol
}

/// Best of `sample_budget` random feasible points. Deterministic in `seed`.
pub fn oracle_search(scheme: Scheme, lb: &LinkBudget, sample_budget: usize, seed: u64) -> Result<SolveResult> {
    lb.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = PrecoderSolution::zeros(scheme, lb.num_antennas(), lb.num_uavs());
    let mut best_report = evaluate(&best, lb);
    for _ in 0..sample_budget {
        let cand = sample(&mut rng, scheme, lb);
        let report = evaluate(&cand, lb);
        if report.ee_sum > best_report.ee_sum {
            best = cand;
            best_report = report;
        }
    }
    Ok(SolveResult {
        objective: best_report.ee_sum,
        objective_trace: vec![best_report.ee_sum],
        start_objectives: vec![best_report.ee_sum],
        report: best_report,
        solution: best,
        iterations: sample_budget,
        converged: true,
        inner_failures: 0,
    })
}
