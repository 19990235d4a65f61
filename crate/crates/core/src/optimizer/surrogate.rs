//! Concave quadratic minorants of the achievable rates.
//!
//! Precoders are flattened into one real vector: column `j`, antenna `i`
//! holds `Re w` at `2 (j M + i)` and `Im w` right after it. Private columns
//! come first; the RSMA common column is last.
//!
//! Around a point with desired amplitude `a0` and interference-plus-noise
//! `b0`, every rate obeys
//!
//! ```text
//! ln(1 + |a|^2/b) >= ln(1 + |a0|^2/b0) - |a0|^2/b0 + 2 Re(a0* a)/b0
//!                    - |a0|^2 (|a|^2 + b) / (b0 (b0 + |a0|^2))
//! ```
//!
//! with equality (value and gradient) at the expansion point. `a` is linear
//! and `b` convex quadratic in the precoders, so the bound is a concave
//! quadratic.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::ma::{split_common_rate, LinkBudget, PrecoderSolution, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub antennas: usize,
    pub columns: usize,
}

impl Layout {
    pub fn for_scheme(scheme: Scheme, antennas: usize, uavs: usize) -> Self {
        let columns = if scheme.has_common_layer() { uavs + 1 } else { uavs };
        Self { antennas, columns }
    }

    /// Real entries per column.
    pub fn block(&self) -> usize {
        2 * self.antennas
    }

    pub fn len(&self) -> usize {
        self.block() * self.columns
    }

    pub fn column<'a>(&self, x: &'a [f64], j: usize) -> &'a [f64] {
        &x[j * self.block()..(j + 1) * self.block()]
    }

    pub fn pack(&self, sol: &PrecoderSolution) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        let uavs = sol.private.len();
        for j in 0..self.columns {
            let col = if j < uavs { &sol.private[j] } else { &sol.common };
            for z in col {
                x.push(z.re);
                x.push(z.im);
            }
        }
        x
    }

    /// Rebuilds precoders; common rates are left at zero.
    pub fn unpack(&self, x: &[f64], scheme: Scheme, uavs: usize) -> PrecoderSolution {
        let mut sol = PrecoderSolution::zeros(scheme, self.antennas, uavs);
        for j in 0..self.columns {
            let col: Vec<Complex64> = self
                .column(x, j)
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            if j < uavs {
                sol.private[j] = col;
            } else {
                sol.common = col;
            }
        }
        sol
    }
}

/// Real projections of a channel: `u . x_j = Re(h^H w_j)` and
/// `v . x_j = Im(h^H w_j)`.
#[derive(Debug, Clone)]
pub(crate) struct Projection {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Projection {
    pub fn new(h: &[Complex64]) -> Self {
        let mut u = Vec::with_capacity(2 * h.len());
        let mut v = Vec::with_capacity(2 * h.len());
        for z in h {
            u.extend([z.re, z.im]);
            v.extend([-z.im, z.re]);
        }
        Self { u, v }
    }

    pub fn apply(&self, xj: &[f64]) -> (f64, f64) {
        (dot(&self.u, xj), dot(&self.v, xj))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One concave rate minorant, in bits:
/// `constant + linear . x_desired - curvature * sum_{j in support} |h^H w_j|^2`.
#[derive(Debug, Clone)]
pub(crate) struct RateTerm {
    pub group: usize,
    pub uav: usize,
    pub desired: usize,
    pub constant: f64,
    pub linear: Vec<f64>,
    pub curvature: f64,
    pub support: Vec<usize>,
}

/// A stream decoded by one receiver: which column is wanted and which
/// columns interfere.
#[derive(Debug, Clone)]
struct Link {
    group: usize,
    uav: usize,
    desired: usize,
    interferers: Vec<usize>,
}

/// Weighted-sum-of-minima surrogate of the EE numerator,
/// `sum_g weight_g * min_{i in g} q_i(x)`.
#[derive(Debug, Clone)]
pub(crate) struct Surrogate {
    pub layout: Layout,
    pub projections: Vec<Projection>,
    pub terms: Vec<RateTerm>,
    pub group_weights: Vec<f64>,
}

fn links(scheme: Scheme, lb: &LinkBudget) -> (Vec<Link>, Vec<f64>) {
    let k = lb.num_uavs();
    let mut links = Vec::new();
    let mut weights = Vec::new();
    match scheme {
        Scheme::Rsma | Scheme::Sdma => {
            for uav in 0..k {
                links.push(Link {
                    group: uav,
                    uav,
                    desired: uav,
                    interferers: (0..k).filter(|l| *l != uav).collect(),
                });
                weights.push(lb.weights[uav]);
            }
            if scheme == Scheme::Rsma {
                for uav in 0..k {
                    links.push(Link {
                        group: k,
                        uav,
                        desired: k,
                        interferers: (0..k).collect(),
                    });
                }
                weights.push(lb.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
        Scheme::Noma => {
            let order = &lb.noma_order;
            for m in 0..k {
                for &uav in &order[..=m] {
                    links.push(Link {
                        group: m,
                        uav,
                        desired: order[m],
                        interferers: order[..m].to_vec(),
                    });
                }
                weights.push(lb.weights[order[m]]);
            }
        }
    }
    (links, weights)
}

impl Surrogate {
    pub fn build(scheme: Scheme, lb: &LinkBudget, x: &[f64]) -> Self {
        let layout = Layout::for_scheme(scheme, lb.num_antennas(), lb.num_uavs());
        let projections: Vec<Projection> = lb.channels.iter().map(|c| Projection::new(&c.h)).collect();
        let (links, group_weights) = links(scheme, lb);
        let terms = links
            .into_iter()
            .map(|link| {
                let gain = lb.channels[link.uav].gain_linear;
                let proj = &projections[link.uav];
                let (re, im) = proj.apply(layout.column(x, link.desired));
                let amp = Complex64::new(re, im) * gain.sqrt();
                let signal = amp.norm_sqr();
                let denom = lb.noise_power
                    + gain
                        * link
                            .interferers
                            .iter()
                            .map(|&j| {
                                let (a, b) = proj.apply(layout.column(x, j));
                                a * a + b * b
                            })
                            .sum::<f64>();
                let ratio = signal / denom;
                let kappa = signal / (denom * (denom + signal));
                let lin_scale = 2.0 * gain.sqrt() / (denom * LN_2);
                let linear = proj
                    .u
                    .iter()
                    .zip(&proj.v)
                    .map(|(u, v)| lin_scale * (amp.re * u + amp.im * v))
                    .collect();
                let mut support = link.interferers.clone();
                support.push(link.desired);
                RateTerm {
                    group: link.group,
                    uav: link.uav,
                    desired: link.desired,
                    constant: (ratio.ln_1p() - ratio - kappa * lb.noise_power) / LN_2,
                    linear,
                    curvature: kappa * gain / LN_2,
                    support,
                }
            })
            .collect();
        Self {
            layout,
            projections,
            terms,
            group_weights,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.group_weights.len()
    }

    /// `(Re, Im)` of `h_k^H w_j` for every UAV `k` and column `j`.
    pub fn inner_products(&self, x: &[f64]) -> Vec<Vec<(f64, f64)>> {
        self.projections
            .iter()
            .map(|p| (0..self.layout.columns).map(|j| p.apply(self.layout.column(x, j))).collect())
            .collect()
    }

    pub fn term_value(&self, term: &RateTerm, x: &[f64], inner: &[Vec<(f64, f64)>]) -> f64 {
        let quad: f64 = term
            .support
            .iter()
            .map(|&j| {
                let (a, b) = inner[term.uav][j];
                a * a + b * b
            })
            .sum();
        term.constant + dot(&term.linear, self.layout.column(x, term.desired)) - term.curvature * quad
    }

    pub fn term_values(&self, x: &[f64]) -> Vec<f64> {
        let inner = self.inner_products(x);
        self.terms.iter().map(|t| self.term_value(t, x, &inner)).collect()
    }

    pub fn group_minima(&self, x: &[f64]) -> Vec<f64> {
        let mut minima = vec![f64::INFINITY; self.num_groups()];
        for (t, q) in self.terms.iter().zip(self.term_values(x)) {
            minima[t.group] = minima[t.group].min(q);
        }
        minima
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.group_minima(x)
            .iter()
            .zip(&self.group_weights)
            .map(|(q, w)| w * q)
            .sum()
    }
}

/// Precoders at `x` with the common rate split optimally, for exact
/// evaluation by the `ma` module.
pub(crate) fn solution_at(x: &[f64], scheme: Scheme, lb: &LinkBudget) -> PrecoderSolution {
    let layout = Layout::for_scheme(scheme, lb.num_antennas(), lb.num_uavs());
    let mut sol = layout.unpack(x, scheme, lb.num_uavs());
    if scheme == Scheme::Rsma {
        let caps = crate::ma::rsma_rates(&sol, lb).common_rate_min;
        sol.common_rates = split_common_rate(caps, &lb.weights);
    }
    sol
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    use super::*;
    use crate::channel::{standard_complex_gaussian, ChannelRealization};
    use crate::ma::evaluate;

    fn random_budget(seed: u64, m: usize, k: usize) -> LinkBudget {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let channels = (0..k)
            .map(|_| {
                let h = (0..m).map(|_| standard_complex_gaussian(&mut rng)).collect();
                ChannelRealization::from_vector(h, rng.random_range(0.2..3.0))
            })
            .collect();
        let weights = (0..k).map(|_| rng.random_range(0.1..5.0)).collect();
        LinkBudget::new(channels, rng.random_range(0.2..2.0), 10.0, 10.0, weights)
    }

    fn random_point(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    /// Weighted rate sum the surrogate should reproduce exactly at its
    /// expansion point.
    fn true_numerator(scheme: Scheme, lb: &LinkBudget, x: &[f64]) -> f64 {
        let sol = solution_at(x, scheme, lb);
        let r = evaluate(&sol, lb);
        r.rates.iter().zip(&lb.weights).map(|(r, w)| r * w).sum()
    }

    #[test]
    fn pack_unpack_inverse() {
        let layout = Layout::for_scheme(Scheme::Rsma, 3, 2);
        let x = random_point(1, layout.len());
        let sol = layout.unpack(&x, Scheme::Rsma, 2);
        assert_eq!(layout.pack(&sol), x);
        assert_eq!(layout.columns, 3);
        assert_eq!(Layout::for_scheme(Scheme::Noma, 3, 2).columns, 2);
    }

    #[test]
    fn projection_matches_complex_inner_product() {
        let lb = random_budget(2, 4, 1);
        let layout = Layout::for_scheme(Scheme::Sdma, 4, 1);
        let x = random_point(3, layout.len());
        let sol = layout.unpack(&x, Scheme::Sdma, 1);
        let z = lb.channels[0].inner(&sol.private[0]);
        let (re, im) = Projection::new(&lb.channels[0].h).apply(&x);
        assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12);
    }

    #[test]
    fn tight_at_expansion_point() {
        for scheme in Scheme::ALL {
            for seed in 0..20 {
                let lb = random_budget(seed, 3, 3);
                let layout = Layout::for_scheme(scheme, 3, 3);
                let x = random_point(seed + 100, layout.len());
                let s = Surrogate::build(scheme, &lb, &x);
                let truth = true_numerator(scheme, &lb, &x);
                assert!((s.value(&x) - truth).abs() <= 1e-10 * truth.max(1.0), "{scheme} {seed}");
            }
        }
    }

    #[test]
    fn gradient_matches_at_expansion_point() {
        // compare directional derivatives of single terms against the exact
        // log2(1 + SINR) by central differences
        let lb = random_budget(5, 2, 2);
        let layout = Layout::for_scheme(Scheme::Sdma, 2, 2);
        let x = random_point(6, layout.len());
        let s = Surrogate::build(Scheme::Sdma, &lb, &x);
        let dir = random_point(7, layout.len());
        let h = 1e-6;
        let plus: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
        let minus: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a - h * d).collect();
        let exact = |p: &[f64]| evaluate(&layout.unpack(p, Scheme::Sdma, 2), &lb).private_rates.clone();
        let (ep, em) = (exact(&plus), exact(&minus));
        let (sp, sm) = (s.term_values(&plus), s.term_values(&minus));
        for k in 0..2 {
            let de = (ep[k] - em[k]) / (2.0 * h);
            let ds = (sp[k] - sm[k]) / (2.0 * h);
            assert!((de - ds).abs() < 1e-6 * de.abs().max(1.0), "{de} vs {ds}");
        }
    }

    proptest! {
        #[test]
        fn minorizes_everywhere(seed in 0u64..1000, scheme_idx in 0usize..3) {
            let scheme = Scheme::ALL[scheme_idx];
            let lb = random_budget(seed, 2, 2);
            let layout = Layout::for_scheme(scheme, 2, 2);
            let x0 = random_point(seed ^ 0xabc, layout.len());
            let x1 = random_point(seed ^ 0xdef, layout.len());
            let s = Surrogate::build(scheme, &lb, &x0);
            prop_assert!(s.value(&x1) <= true_numerator(scheme, &lb, &x1) + 1e-10);
        }
    }
}
