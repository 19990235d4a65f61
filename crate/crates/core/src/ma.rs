//! SINR, rate and energy-efficiency evaluation for RSMA, NOMA and SDMA.
//!
//! Rates are in bits/s/Hz and energy efficiency in bits/s/Hz per Watt. The
//! EE denominator is the transmit power actually radiated plus the static
//! BS power, never the budget.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Relative slack allowed on the transmit power budget.
pub const POWER_TOLERANCE: f64 = 1e-9;
/// Slack allowed on the RSMA common-rate decodability constraint.
pub const COMMON_RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rsma,
    Noma,
    Sdma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Rsma, Scheme::Noma, Scheme::Sdma];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Rsma => "rsma",
            Scheme::Noma => "noma",
            Scheme::Sdma => "sdma",
        }
    }

    pub fn has_common_layer(&self) -> bool {
        matches!(self, Scheme::Rsma)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsma" => Ok(Scheme::Rsma),
            "noma" => Ok(Scheme::Noma),
            "sdma" => Ok(Scheme::Sdma),
            other => Err(Error::config("schemes", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Precoders for one transmission. `private[k]` is the column serving UAV
/// `k` (for NOMA, the superposition layer of UAV `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    pub scheme: Scheme,
    pub private: Vec<Vec<Complex64>>,
    pub common: Vec<Complex64>,
    pub common_rates: Vec<f64>,
}

impl PrecoderSolution {
    pub fn zeros(scheme: Scheme, num_antennas: usize, num_uavs: usize) -> Self {
        Self {
            scheme,
            private: vec![vec![Complex64::new(0.0, 0.0); num_antennas]; num_uavs],
            common: vec![Complex64::new(0.0, 0.0); num_antennas],
            common_rates: vec![0.0; num_uavs],
        }
    }

    pub fn num_uavs(&self) -> usize {
        self.private.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.common.len()
    }

    /// `tr(W W^H)` including the common column.
    pub fn transmit_power(&self) -> f64 {
        let col = |w: &[Complex64]| w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        col(&self.common) + self.private.iter().map(|w| col(w)).sum::<f64>()
    }
}

/// Everything except the precoders that the rate and EE expressions need.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub channels: Vec<ChannelRealization>,
    pub noise_power: f64,
    pub power_budget: f64,
    pub bs_static_power: f64,
    pub weights: Vec<f64>,
    /// `noma_order[i]` is the UAV at decode position `i`. Position 0 carries
    /// the least power and cancels every later layer before decoding its own.
    pub noma_order: Vec<usize>,
}

impl LinkBudget {
    /// Builds a budget with the default NOMA order (strongest channel first).
    pub fn new(
        channels: Vec<ChannelRealization>,
        noise_power: f64,
        power_budget: f64,
        bs_static_power: f64,
        weights: Vec<f64>,
    ) -> Self {
        let noma_order = strength_order(&channels);
        Self {
            channels,
            noise_power,
            power_budget,
            bs_static_power,
            weights,
            noma_order,
        }
    }

    pub fn num_uavs(&self) -> usize {
        self.channels.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.channels.first().map_or(0, |c| c.num_antennas())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_uavs();
        if k == 0 {
            return Err(Error::config("uavs", "at least one UAV is required"));
        }
        let m = self.num_antennas();
        if m == 0 || self.channels.iter().any(|c| c.num_antennas() != m) {
            return Err(Error::config("channels", "all channels need the same nonzero length"));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("budget.noise_power", "must be finite and > 0"));
        }
        if !(self.power_budget >= 0.0 && self.power_budget.is_finite()) {
            return Err(Error::config("budget.transmit_power", "must be finite and >= 0"));
        }
        if !(self.bs_static_power >= 0.0 && self.bs_static_power.is_finite()) {
            return Err(Error::config("budget.bs_static_power", "must be finite and >= 0"));
        }
        if self.weights.len() != k || self.weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::config("weights", format!("need {k} finite positive weights")));
        }
        let mut seen = vec![false; k];
        if self.noma_order.len() != k {
            return Err(Error::config("noma_order", "must be a permutation of the UAV indices"));
        }
        for &i in &self.noma_order {
            if i >= k || seen[i] {
                return Err(Error::config("noma_order", "must be a permutation of the UAV indices"));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// UAV indices sorted by descending `G_k ||h_k||^2`, ties by index.
pub fn strength_order(channels: &[ChannelRealization]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..channels.len()).collect();
    order.sort_by(|&a, &b| {
        channels[b]
            .effective_strength()
            .total_cmp(&channels[a].effective_strength())
            .then(a.cmp(&b))
    });
    order
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    pub common_sinrs: Vec<f64>,
    pub common_rate_caps: Vec<f64>,
    pub common_rate_min: f64,
    /// RSMA: private-stream SINR. NOMA: the limiting SINR over the decode
    /// chain. SDMA: the stream SINR.
    pub private_sinrs: Vec<f64>,
    pub private_rates: Vec<f64>,
    pub common_rates: Vec<f64>,
    pub rates: Vec<f64>,
    pub ee_per_uav: Vec<f64>,
    pub ee_sum: f64,
    pub transmit_power: f64,
    /// False when the assigned common rates are not decodable by every UAV.
    pub common_rate_feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    pub feasible: bool,
    /// `P_t - tr(W W^H)`; negative when over budget.
    pub slack: f64,
}

pub fn check_power(sol: &PrecoderSolution, lb: &LinkBudget) -> PowerCheck {
    let used = sol.transmit_power();
    PowerCheck {
        feasible: used <= lb.power_budget * (1.0 + POWER_TOLERANCE),
        slack: lb.power_budget - used,
    }
}

fn rx_power(ch: &ChannelRealization, w: &[Complex64]) -> f64 {
    ch.gain_linear * ch.inner(w).norm_sqr()
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn rsma_rates(sol: &PrecoderSolution, lb: &LinkBudget) -> RateReport {
    let k = lb.num_uavs();
    let mut common_sinrs = Vec::with_capacity(k);
    let mut private_sinrs = Vec::with_capacity(k);
    for (i, ch) in lb.channels.iter().enumerate() {
        let streams: Vec<f64> = sol.private.iter().map(|w| rx_power(ch, w)).collect();
        let total: f64 = streams.iter().sum();
        common_sinrs.push(rx_power(ch, &sol.common) / (total + lb.noise_power));
        let interference: f64 = streams.iter().enumerate().filter(|(l, _)| *l != i).map(|(_, p)| p).sum();
        private_sinrs.push(streams[i] / (interference + lb.noise_power));
    }
    let common_rate_caps: Vec<f64> = common_sinrs.iter().map(|s| log2_1p(*s)).collect();
    let common_rate_min = common_rate_caps.iter().copied().fold(f64::INFINITY, f64::min);
    let private_rates: Vec<f64> = private_sinrs.iter().map(|s| log2_1p(*s)).collect();
    let common_rates = sol.common_rates.clone();
    let total_common: f64 = common_rates.iter().sum();
    let common_rate_feasible = common_rates.iter().all(|r| *r >= 0.0)
        && total_common <= common_rate_min + COMMON_RATE_TOLERANCE * common_rate_min.max(1.0);
    let rates = common_rates.iter().zip(&private_rates).map(|(c, p)| c + p).collect();
    finish(
        RateReport {
            common_sinrs,
            common_rate_caps,
            common_rate_min,
            private_sinrs,
            private_rates,
            common_rates,
            rates,
            common_rate_feasible,
            ..RateReport::default()
        },
        sol,
        lb,
    )
}

pub fn sdma_rates(sol: &PrecoderSolution, lb: &LinkBudget) -> RateReport {
    let mut stripped = sol.clone();
    stripped.common.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    stripped.common_rates.iter_mut().for_each(|r| *r = 0.0);
    rsma_rates(&stripped, lb)
}

pub fn noma_rates(sol: &PrecoderSolution, lb: &LinkBudget) -> RateReport {
    let k = lb.num_uavs();
    let order = &lb.noma_order;
    // rx[pos_rx][pos_msg]: power of layer at pos_msg received by UAV at pos_rx
    let rx: Vec<Vec<f64>> = order
        .iter()
        .map(|&u| order.iter().map(|&m| rx_power(&lb.channels[u], &sol.private[m])).collect())
        .collect();
    let mut private_sinrs = vec![0.0; k];
    for m in 0..k {
        let mut worst = f64::INFINITY;
        for rx_pos in rx.iter().take(m + 1) {
            let interference: f64 = rx_pos[..m].iter().sum();
            worst = worst.min(rx_pos[m] / (interference + lb.noise_power));
        }
        private_sinrs[order[m]] = worst;
    }
    let private_rates: Vec<f64> = private_sinrs.iter().map(|s| log2_1p(*s)).collect();
    finish(
        RateReport {
            common_sinrs: vec![0.0; k],
            common_rate_caps: vec![0.0; k],
            common_rate_min: 0.0,
            private_sinrs,
            rates: private_rates.clone(),
            private_rates,
            common_rates: vec![0.0; k],
            common_rate_feasible: true,
            ..RateReport::default()
        },
        sol,
        lb,
    )
}

/// Dispatches on `sol.scheme`.
pub fn evaluate(sol: &PrecoderSolution, lb: &LinkBudget) -> RateReport {
    match sol.scheme {
        Scheme::Rsma => rsma_rates(sol, lb),
        Scheme::Noma => noma_rates(sol, lb),
        Scheme::Sdma => sdma_rates(sol, lb),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEfficiency {
    pub ee_per_uav: Vec<f64>,
    pub ee_sum: f64,
}

pub fn energy_efficiency(rates: &[f64], sol: &PrecoderSolution, lb: &LinkBudget) -> EnergyEfficiency {
    let consumed = sol.transmit_power() + lb.bs_static_power;
    let ee_per_uav: Vec<f64> = rates
        .iter()
        .zip(&lb.weights)
        .map(|(r, b)| if consumed > 0.0 { b * r / consumed } else { 0.0 })
        .collect();
    let ee_sum = ee_per_uav.iter().sum();
    EnergyEfficiency { ee_per_uav, ee_sum }
}

fn finish(mut report: RateReport, sol: &PrecoderSolution, lb: &LinkBudget) -> RateReport {
    let ee = energy_efficiency(&report.rates, sol, lb);
    report.ee_per_uav = ee.ee_per_uav;
    report.ee_sum = ee.ee_sum;
    report.transmit_power = sol.transmit_power();
    report
}

/// Splits a total common rate so that `sum(weights * split)` is maximal:
/// everything goes to the largest weight, shared equally on exact ties.
pub fn split_common_rate(total: f64, weights: &[f64]) -> Vec<f64> {
    let best = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<bool> = weights.iter().map(|w| *w >= best * (1.0 - 1e-12)).collect();
    let n = winners.iter().filter(|w| **w).count() as f64;
    winners
        .into_iter()
        .map(|win| if win && total > 0.0 { total / n } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn budget(hs: Vec<Vec<Complex64>>) -> LinkBudget {
        let k = hs.len();
        let channels = hs.into_iter().map(|h| ChannelRealization::from_vector(h, 1.0)).collect();
        let mut lb = LinkBudget::new(channels, 1.0, 10.0, 10.0, vec![1.0; k]);
        lb.noma_order = (0..k).collect();
        lb
    }

    fn sol(scheme: Scheme, private: Vec<Vec<Complex64>>, common: Vec<Complex64>, rc: Vec<f64>) -> PrecoderSolution {
        PrecoderSolution { scheme, private, common, common_rates: rc }
    }

    #[test]
    fn single_user_without_common_layer() {
        let p: f64 = 3.0;
        let lb = budget(vec![vec![c(1.0)]]);
        let s = sol(Scheme::Rsma, vec![vec![c(p.sqrt())]], vec![c(0.0)], vec![0.0]);
        let r = rsma_rates(&s, &lb);
        assert!((r.rates[0] - (1.0 + p).log2()).abs() < 1e-12);
    }

    #[test]
    fn two_user_scalar_rsma() {
        let lb = budget(vec![vec![c(1.0)], vec![c(1.0)]]);
        let s = sol(Scheme::Rsma, vec![vec![c(1.0)], vec![c(1.0)]], vec![c(2f64.sqrt())], vec![0.3, 0.3]);
        let r = rsma_rates(&s, &lb);
        for k in 0..2 {
            assert!((r.common_sinrs[k] - 2.0 / 3.0).abs() < 1e-12);
            assert!((r.private_sinrs[k] - 0.5).abs() < 1e-12);
            assert!((r.private_rates[k] - 1.5f64.log2()).abs() < 1e-12);
        }
        assert!((r.common_rate_min - (5.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!((r.common_rate_min - 0.737).abs() < 1e-3);
        assert!((r.private_rates[0] - 0.585).abs() < 1e-3);
        assert!(r.common_rate_feasible);
        assert!((r.rates[0] - (0.3 + 1.5f64.log2())).abs() < 1e-12);

        let greedy = sol(Scheme::Rsma, s.private.clone(), s.common.clone(), vec![0.5, 0.5]);
        assert!(!rsma_rates(&greedy, &lb).common_rate_feasible);
    }

    #[test]
    fn orthogonal_channels() {
        let lb = budget(vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]]);
        let w = vec![vec![c(2f64.sqrt()), c(0.0)], vec![c(0.0), c(2f64.sqrt())]];
        for scheme in [Scheme::Rsma, Scheme::Sdma] {
            let r = evaluate(&sol(scheme, w.clone(), vec![c(0.0); 2], vec![0.0; 2]), &lb);
            for k in 0..2 {
                assert!((r.private_sinrs[k] - 2.0).abs() < 1e-12);
                assert!((r.rates[k] - 3f64.log2()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn aligned_noma_chain() {
        let lb = budget(vec![vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]]);
        let s = sol(Scheme::Noma, vec![vec![c(1.0), c(0.0)], vec![c(2.0), c(0.0)]], vec![c(0.0); 2], vec![0.0; 2]);
        let r = noma_rates(&s, &lb);
        assert!((r.private_sinrs[1] - 2.0).abs() < 1e-12);
        assert!((r.rates[1] - 3f64.log2()).abs() < 1e-12);
        assert!((r.private_sinrs[0] - 1.0).abs() < 1e-12);
        assert!((r.rates[0] - 1.0).abs() < 1e-12);

        let silent = sol(Scheme::Noma, vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]], vec![c(0.0); 2], vec![0.0; 2]);
        let r = noma_rates(&silent, &lb);
        assert_eq!(r.rates[1], 0.0);
        assert!((r.rates[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noma_single_user() {
        let lb = budget(vec![vec![c(0.5), Complex64::new(0.0, 0.5)]]);
        let w = vec![vec![c(1.0), c(1.0)]];
        let r = noma_rates(&sol(Scheme::Noma, w.clone(), vec![c(0.0); 2], vec![0.0]), &lb);
        let snr = lb.channels[0].inner(&w[0]).norm_sqr();
        assert!((r.rates[0] - (1.0 + snr).log2()).abs() < 1e-12);
    }

    #[test]
    fn noma_respects_custom_order() {
        let mut lb = budget(vec![vec![c(1.0)], vec![c(1.0)]]);
        lb.noma_order = vec![1, 0];
        let s = sol(Scheme::Noma, vec![vec![c(2.0)], vec![c(1.0)]], vec![c(0.0)], vec![0.0; 2]);
        let r = noma_rates(&s, &lb);
        // UAV 1 decodes first layer position; UAV 0 is the top layer
        assert!((r.private_sinrs[1] - 1.0).abs() < 1e-12);
        assert!((r.private_sinrs[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_efficiency_arithmetic() {
        let lb = budget(vec![vec![c(1.0)]]);
        let s = sol(Scheme::Sdma, vec![vec![c(10f64.sqrt())]], vec![c(0.0)], vec![0.0]);
        let ee = energy_efficiency(&[1.0], &s, &lb);
        assert!((ee.ee_per_uav[0] - 0.05).abs() < 1e-15);

        let zero = PrecoderSolution::zeros(Scheme::Sdma, 1, 1);
        assert_eq!(sdma_rates(&zero, &lb).ee_sum, 0.0);

        let mut lb2 = budget(vec![vec![c(1.0)], vec![c(0.5)]]);
        let two = sol(Scheme::Sdma, vec![vec![c(1.0)], vec![c(1.0)]], vec![c(0.0)], vec![0.0; 2]);
        let before = sdma_rates(&two, &lb2);
        lb2.weights[0] = 2.0;
        let after = sdma_rates(&two, &lb2);
        assert!((after.ee_per_uav[0] - 2.0 * before.ee_per_uav[0]).abs() < 1e-15);
        assert_eq!(after.ee_per_uav[1], before.ee_per_uav[1]);
    }

    #[test]
    fn power_check() {
        let lb = budget(vec![vec![c(1.0)]]);
        let zero = PrecoderSolution::zeros(Scheme::Rsma, 1, 1);
        assert_eq!(check_power(&zero, &lb), PowerCheck { feasible: true, slack: 10.0 });
        let full = sol(Scheme::Rsma, vec![vec![c(6f64.sqrt())]], vec![c(2.0)], vec![0.0]);
        let pc = check_power(&full, &lb);
        assert!(pc.feasible && pc.slack.abs() < 1e-12);
        let over = sol(Scheme::Rsma, vec![vec![c(10.1f64.sqrt())]], vec![c(0.0)], vec![0.0]);
        assert!(!check_power(&over, &lb).feasible);
    }

    #[test]
    fn split_prefers_heavier_weight() {
        assert_eq!(split_common_rate(1.0, &[1.0, 3.0]), vec![0.0, 1.0]);
        assert_eq!(split_common_rate(1.0, &[2.0, 2.0]), vec![0.5, 0.5]);
        assert_eq!(split_common_rate(0.0, &[2.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("RSMA".parse::<Scheme>().unwrap(), Scheme::Rsma);
        assert!("tdma".parse::<Scheme>().is_err());
    }

    #[test]
    fn validation_rejects_bad_order() {
        let mut lb = budget(vec![vec![c(1.0)], vec![c(1.0)]]);
        assert!(lb.validate().is_ok());
        lb.noma_order = vec![0, 0];
        assert!(lb.validate().is_err());
    }

    fn cvec(parts: &[(f64, f64)]) -> Vec<Complex64> {
        parts.iter().map(|(r, i)| Complex64::new(*r, *i)).collect()
    }

    fn arb_cvec(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m).prop_map(|v| cvec(&v))
    }

    proptest! {
        #[test]
        fn rsma_without_common_equals_sdma(
            h1 in arb_cvec(2), h2 in arb_cvec(2), w1 in arb_cvec(2), w2 in arb_cvec(2), g in 0.1..5.0f64
        ) {
            let mut lb = budget(vec![h1, h2]);
            lb.channels[0].gain_linear = g;
            let zero = vec![Complex64::new(0.0, 0.0); 2];
            let r = rsma_rates(&sol(Scheme::Rsma, vec![w1.clone(), w2.clone()], zero.clone(), vec![0.0; 2]), &lb);
            let s = sdma_rates(&sol(Scheme::Sdma, vec![w1, w2], zero, vec![0.0; 2]), &lb);
            prop_assert_eq!(r, s);
        }

        #[test]
        fn sinr_scale_invariance(
            h1 in arb_cvec(2), h2 in arb_cvec(2), w1 in arb_cvec(2), w2 in arb_cvec(2), wc in arb_cvec(2), scale in 0.01..100.0f64
        ) {
            let lb = budget(vec![h1, h2]);
            let s = sol(Scheme::Rsma, vec![w1, w2], wc, vec![0.0; 2]);
            let base = rsma_rates(&s, &lb);
            let mut scaled = lb.clone();
            scaled.noise_power *= scale;
            for ch in &mut scaled.channels {
                ch.h.iter_mut().for_each(|z| *z *= scale.sqrt());
            }
            let other = rsma_rates(&s, &scaled);
            for k in 0..2 {
                prop_assert!((base.common_sinrs[k] - other.common_sinrs[k]).abs() <= 1e-9 * base.common_sinrs[k].max(1e-12));
                prop_assert!((base.private_sinrs[k] - other.private_sinrs[k]).abs() <= 1e-9 * base.private_sinrs[k].max(1e-12));
            }
        }

        #[test]
        fn sinrs_fall_with_noise(
            h1 in arb_cvec(2), h2 in arb_cvec(2), w1 in arb_cvec(2), w2 in arb_cvec(2), wc in arb_cvec(2), extra in 0.0..10.0f64
        ) {
            let lb = budget(vec![h1, h2]);
            let mut noisy = lb.clone();
            noisy.noise_power += extra;
            for scheme in Scheme::ALL {
                let s = sol(scheme, vec![w1.clone(), w2.clone()], wc.clone(), vec![0.0; 2]);
                let a = evaluate(&s, &lb);
                let b = evaluate(&s, &noisy);
                for k in 0..2 {
                    prop_assert!(b.private_sinrs[k] <= a.private_sinrs[k]);
                    prop_assert!(b.common_sinrs[k] <= a.common_sinrs[k]);
                }
            }
        }

        #[test]
        fn ee_recovers_rate(
            h1 in arb_cvec(2), h2 in arb_cvec(2), w1 in arb_cvec(2), w2 in arb_cvec(2), b1 in 0.01..100.0f64
        ) {
            let mut lb = budget(vec![h1, h2]);
            lb.weights = vec![b1, 1.0];
            let s = sol(Scheme::Noma, vec![w1, w2], vec![Complex64::new(0.0, 0.0); 2], vec![0.0; 2]);
            let r = noma_rates(&s, &lb);
            let denom = s.transmit_power() + lb.bs_static_power;
            for k in 0..2 {
                let back = r.ee_per_uav[k] * denom / lb.weights[k];
                prop_assert!((back - r.rates[k]).abs() <= 1e-12 * r.rates[k].max(1e-300));
            }
        }

        #[test]
        fn noma_removing_earlier_uav_never_hurts(
            h in proptest::collection::vec(arb_cvec(2), 3), w in proptest::collection::vec(arb_cvec(2), 3)
        ) {
            let lb = budget(h.clone());
            let full = noma_rates(&sol(Scheme::Noma, w.clone(), vec![Complex64::new(0.0, 0.0); 2], vec![0.0; 3]), &lb);
            // drop the UAV at decode position 0; its layer is removed too
            let lb2 = budget(h[1..].to_vec());
            let reduced = noma_rates(&sol(Scheme::Noma, w[1..].to_vec(), vec![Complex64::new(0.0, 0.0); 2], vec![0.0; 2]), &lb2);
            for k in 1..3 {
                prop_assert!(reduced.rates[k - 1] >= full.rates[k] - 1e-12);
            }
        }
    }
}
