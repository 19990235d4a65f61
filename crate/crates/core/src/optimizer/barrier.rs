//! Primal-dual interior-point solver (slack form) for the convexified EE subproblem
//!
//! ```text
//! maximize   sum_g weight_g t_g - lambda ||x||^2
//! subject to t_g <= q_i(x)   for every rate term i in group g
//!            ||x||^2 <= P_t
//! ```
//!
//! where every `q_i` is a concave quadratic from [`Surrogate`]. The problem
//! is small and dense, so each Newton step is one Cholesky solve.

use nalgebra::{DMatrix, DVector};

use super::surrogate::{dot, Surrogate};

const MAX_STEPS: usize = 200;
const GAP_REDUCTION: f64 = 10.0;
const RESIDUAL_SLOPE: f64 = 0.01;

pub(crate) struct Subproblem<'a> {
    pub surrogate: &'a Surrogate,
    /// Price on transmit power (the current energy efficiency).
    pub lambda: f64,
    pub power_budget: f64,
}

/// Constraint values `c_i(z)` (feasible when `>= 0`) and their gradients;
/// index 0 is the power budget.
struct Linearization {
    value: Vec<f64>,
    grad: Vec<DVector<f64>>,
}

impl Subproblem<'_> {
    fn nx(&self) -> usize {
        self.surrogate.layout.len()
    }

    fn dim(&self) -> usize {
        self.nx() + self.surrogate.num_groups()
    }

    /// Surrogate objective at `x` (epigraph variables at their optimum).
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.surrogate.value(x) - self.lambda * dot(x, x)
    }

    fn linearize(&self, z: &[f64]) -> Linearization {
        let nx = self.nx();
        let n = self.dim();
        let (x, t) = z.split_at(nx);
        let s = self.surrogate;
        let block = s.layout.block();
        let inner = s.inner_products(x);

        let mut value = Vec::with_capacity(s.terms.len() + 1);
        let mut grad = Vec::with_capacity(s.terms.len() + 1);
        value.push(self.power_budget - dot(x, x));
        let mut g0 = DVector::zeros(n);
        for i in 0..nx {
            g0[i] = -2.0 * x[i];
        }
        grad.push(g0);
        for term in &s.terms {
            value.push(s.term_value(term, x, &inner) - t[term.group]);
            let proj = &s.projections[term.uav];
            let mut g = DVector::zeros(n);
            let d0 = term.desired * block;
            for r in 0..block {
                g[d0 + r] = term.linear[r];
            }
            for &j in &term.support {
                let (a, b) = inner[term.uav][j];
                let off = j * block;
                for r in 0..block {
                    g[off + r] -= 2.0 * term.curvature * (a * proj.u[r] + b * proj.v[r]);
                }
            }
            g[nx + term.group] = -1.0;
            grad.push(g);
        }
        Linearization { value, grad }
    }

    fn objective_gradient(&self, z: &[f64]) -> DVector<f64> {
        let nx = self.nx();
        let mut g = DVector::zeros(self.dim());
        for i in 0..nx {
            g[i] = 2.0 * self.lambda * z[i];
        }
        for (k, w) in self.surrogate.group_weights.iter().enumerate() {
            g[nx + k] = -w;
        }
        g
    }

    /// Dual, primal (`c(z) - s`) and centrality residuals, stacked.
    fn residual_norm(&self, z: &[f64], lin: &Linearization, slack: &[f64], mu: &[f64], tau: f64) -> f64 {
        let mut dual = self.objective_gradient(z);
        for (m, g) in mu.iter().zip(&lin.grad) {
            dual.axpy(-*m, g, 1.0);
        }
        let mut sq = dual.norm_squared();
        for ((c, sl), m) in lin.value.iter().zip(slack).zip(mu) {
            sq += (c - sl).powi(2) + (m * sl - 1.0 / tau).powi(2);
        }
        sq.sqrt()
    }

    fn hessian(&self, mu: &[f64], slack: &[f64], lin: &Linearization) -> DMatrix<f64> {
        let nx = self.nx();
        let n = self.dim();
        let s = self.surrogate;
        let block = s.layout.block();
        let mut h = DMatrix::<f64>::zeros(n, n);
        let diag = 2.0 * self.lambda + 2.0 * mu[0];
        for i in 0..nx {
            h[(i, i)] += diag;
        }
        for (i, term) in s.terms.iter().enumerate() {
            let proj = &s.projections[term.uav];
            let cc = 2.0 * term.curvature * mu[i + 1];
            for &j in &term.support {
                let off = j * block;
                for r in 0..block {
                    for q in 0..block {
                        h[(off + r, off + q)] += cc * (proj.u[r] * proj.u[q] + proj.v[r] * proj.v[q]);
                    }
                }
            }
        }
        let mut nz = Vec::with_capacity(n);
        for (m, (sl, g)) in mu.iter().zip(slack.iter().zip(&lin.grad)) {
            let w = m / sl;
            nz.clear();
            nz.extend((0..n).filter(|&i| g[i] != 0.0));
            for &a in &nz {
                let ga = w * g[a];
                for &b in &nz {
                    h[(a, b)] += ga * g[b];
                }
            }
        }
        h
    }

    /// Solves from a point whose `x` part satisfies the power budget. The
    /// returned point satisfies it too.
    pub fn solve(&self, start: &[f64], tolerance: f64) -> Option<Vec<f64>> {
        let s = self.surrogate;
        let nx = self.nx();
        if !(self.power_budget > 0.0) {
            return None;
        }

        let mut x = start.to_vec();
        let sq = dot(&x, &x);
        let cap = self.power_budget * (1.0 - 1e-4);
        if sq > cap {
            let shrink = (cap / sq).sqrt();
            x.iter_mut().for_each(|v| *v *= shrink);
        }

        let num_constraints = s.terms.len() + 1;
        let m = num_constraints as f64;
        let scale = self
            .objective(&x)
            .abs()
            .max(s.group_weights.iter().sum::<f64>() * 1e-3)
            .max(1e-9);
        let target = tolerance * scale.max(1.0);

        // dual start: group multipliers sum to the group weight and every
        // pair (mu_i, s_i) starts on the central path of an initial gap
        let mut counts = vec![0usize; s.num_groups()];
        for term in &s.terms {
            counts[term.group] += 1;
        }
        let per_pair = scale / m;
        let minima = s.group_minima(&x);
        let mut mu = Vec::with_capacity(num_constraints);
        mu.push(per_pair / (self.power_budget - dot(&x, &x)));
        for term in &s.terms {
            mu.push(s.group_weights[term.group] / counts[term.group] as f64);
        }
        let mut z = x;
        for g in 0..s.num_groups() {
            let mu_g = s.group_weights[g] / counts[g] as f64;
            z.push(minima[g] - per_pair / mu_g);
        }

        let mut lin = self.linearize(&z);
        let mut slack = lin.value.clone();
        for _ in 0..MAX_STEPS {
            let gap = dot(&mu, &slack);
            let tau = GAP_REDUCTION * m / gap;
            let r0 = self.residual_norm(&z, &lin, &slack, &mu, tau);
            let primal: f64 = lin.value.iter().zip(&slack).map(|(c, sl)| (c - sl).abs()).fold(0.0, f64::max);
            if gap <= target && r0 <= target && primal <= target {
                break;
            }

            let mut rhs = -self.objective_gradient(&z);
            for (((c, sl), m), g) in lin.value.iter().zip(&slack).zip(&mu).zip(&lin.grad) {
                rhs.axpy(m + 1.0 / (tau * sl) - m * c / sl, g, 1.0);
            }
            let dz = solve_spd(self.hessian(&mu, &slack, &lin), &rhs)?;
            let ds: Vec<f64> = lin
                .value
                .iter()
                .zip(&slack)
                .zip(&lin.grad)
                .map(|((c, sl), g)| c + g.dot(&dz) - sl)
                .collect();
            let dmu: Vec<f64> = mu
                .iter()
                .zip(&slack)
                .zip(&ds)
                .map(|((m, sl), d)| (1.0 / tau - m * sl - m * d) / sl)
                .collect();

            let mut step = 1.0f64;
            for (v, d) in mu.iter().chain(&slack).zip(dmu.iter().chain(&ds)) {
                if *d < 0.0 {
                    step = step.min(-v / d);
                }
            }
            step *= 0.99;

            let mut accepted = None;
            while step > 1e-12 {
                let cand: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, d)| a + step * d).collect();
                let cand_slack: Vec<f64> = slack.iter().zip(&ds).map(|(v, d)| v + step * d).collect();
                let cand_mu: Vec<f64> = mu.iter().zip(&dmu).map(|(v, d)| v + step * d).collect();
                let cand_lin = self.linearize(&cand);
                if self.residual_norm(&cand, &cand_lin, &cand_slack, &cand_mu, tau) <= (1.0 - RESIDUAL_SLOPE * step) * r0 {
                    accepted = Some((cand, cand_slack, cand_mu, cand_lin));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, cand_slack, cand_mu, cand_lin)) = accepted else {
                break;
            };
            z = cand;
            slack = cand_slack;
            mu = cand_mu;
            lin = cand_lin;
        }
        z.truncate(nx);
        if !z.iter().all(|v| v.is_finite()) {
            return None;
        }
        let used = dot(&z, &z);
        if used > self.power_budget {
            let shrink = (self.power_budget / used).sqrt();
            z.iter_mut().for_each(|v| *v *= shrink);
        }
        Some(z)
    }
}

fn solve_spd(mut hess: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let n = hess.nrows();
    let trace: f64 = (0..n).map(|i| hess[(i, i)]).sum::<f64>() / n as f64;
    let mut shift = 0.0;
    for _ in 0..6 {
        if let Some(chol) = hess.clone().cholesky() {
            let sol = chol.solve(rhs);
            return sol.iter().all(|v| v.is_finite()).then_some(sol);
        }
        let next = if shift == 0.0 { 1e-12 * trace.max(1e-300) } else { shift * 100.0 };
        for i in 0..n {
            hess[(i, i)] += next - shift;
        }
        shift = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::channel::ChannelRealization;
    use crate::ma::{LinkBudget, Scheme};
    use crate::optimizer::surrogate::Layout;

    fn scalar_budget(p_t: f64) -> LinkBudget {
        LinkBudget::new(
            vec![ChannelRealization::from_vector(vec![Complex64::new(1.0, 0.0)], 1.0)],
            1.0,
            p_t,
            10.0,
            vec![1.0],
        )
    }

    #[test]
    fn single_user_subproblem_matches_closed_form() {
        // at x0 = 1 the minorant of log2(1 + x^2) is
        // (ln 2 - 1 + 2x - (x^2 + 1)/2) / ln 2; with lambda = 0 and a large
        // budget it peaks at x = 2
        let lb = scalar_budget(100.0);
        let layout = Layout::for_scheme(Scheme::Sdma, 1, 1);
        let x0 = vec![1.0, 0.0];
        assert_eq!(layout.len(), 2);
        let s = Surrogate::build(Scheme::Sdma, &lb, &x0);
        let sub = Subproblem { surrogate: &s, lambda: 0.0, power_budget: 100.0 };
        let out = sub.solve(&x0, 1e-9).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-6, "{:?}", out);
        assert!(out[1].abs() < 1e-6);
    }

    #[test]
    fn power_budget_binds() {
        let lb = scalar_budget(1.0);
        let x0 = vec![0.5, 0.0];
        let s = Surrogate::build(Scheme::Sdma, &lb, &x0);
        let sub = Subproblem { surrogate: &s, lambda: 0.0, power_budget: 1.0 };
        let out = sub.solve(&x0, 1e-9).unwrap();
        let p = dot(&out, &out);
        assert!(p <= 1.0 && p > 1.0 - 1e-6, "{p}");
    }

    #[test]
    fn priced_power_has_interior_optimum() {
        // maximize (ln 2 - 1 + 2x - (x^2+1)/2)/ln 2 - lambda x^2:
        // x* = 2 / (1 + 2 lambda ln 2)
        let lb = scalar_budget(10.0);
        let x0 = vec![1.0, 0.0];
        let s = Surrogate::build(Scheme::Sdma, &lb, &x0);
        let lambda = 0.3;
        let sub = Subproblem { surrogate: &s, lambda, power_budget: 10.0 };
        let out = sub.solve(&x0, 1e-9).unwrap();
        let expected = 2.0 / (1.0 + 2.0 * lambda * std::f64::consts::LN_2);
        assert!((out[0] - expected).abs() < 1e-6, "{} vs {expected}", out[0]);
        assert!(sub.objective(&out) > sub.objective(&x0));
    }
}
