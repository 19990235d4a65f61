//! mmWave channel vectors for a vertical ULA.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::antenna::{uav_gain, AntennaConfig};
use crate::error::{Error, Result};
use crate::geometry::{BsConfig, EngagementGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub num_paths: usize,
    pub pathloss_exponent: f64,
    pub seed: u64,
    /// Half-width of the uniform AoD spread around the LoS angle, used only
    /// when `num_paths > 1`.
    pub aod_spread_deg: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            num_paths: 1,
            pathloss_exponent: 2.0,
            seed: 0,
            aod_spread_deg: 10.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::config("channel.num_paths", "must be >= 1"));
        }
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return Err(Error::config("channel.pathloss_exponent", "must be finite and > 0"));
        }
        if !(self.aod_spread_deg >= 0.0 && self.aod_spread_deg.is_finite()) {
            return Err(Error::config("channel.aod_spread_deg", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    /// Linear element gain `G_k` applied at the receiver.
    pub gain_linear: f64,
    pub aod_rad: f64,
    pub path_gains: Vec<Complex64>,
    pub path_aods_rad: Vec<f64>,
}

impl ChannelRealization {
    /// Bare channel with no path bookkeeping, mostly for hand-built cases.
    pub fn from_vector(h: Vec<Complex64>, gain_linear: f64) -> Self {
        Self {
            h,
            gain_linear,
            aod_rad: 0.0,
            path_gains: Vec::new(),
            path_aods_rad: Vec::new(),
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.h.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `G_k ||h_k||^2`, the strength used to order NOMA decoding.
    pub fn effective_strength(&self) -> f64 {
        self.gain_linear * self.norm_sqr()
    }

    /// `h^H w`.
    pub fn inner(&self, w: &[Complex64]) -> Complex64 {
        self.h.iter().zip(w).map(|(h, w)| h.conj() * w).sum()
    }
}

/// ULA steering vector: entry `i` is `exp(-j 2 pi (D/lambda) i cos(theta))`.
pub fn steering_vector(theta_rad: f64, m: usize, spacing_ratio: f64) -> Vec<Complex64> {
    let step = -2.0 * PI * spacing_ratio * theta_rad.cos();
    (0..m)
        .map(|i| Complex64::from_polar(1.0, step * i as f64))
        .collect()
}

pub fn path_loss(los_distance_m: f64, gamma: f64) -> f64 {
    1.0 + los_distance_m.powf(gamma)
}

/// Generator for one UAV's draws. The key comes from the seed and the UAV
/// index selects the ChaCha stream, so streams never overlap across seeds
/// or UAVs and adding UAVs leaves existing draws untouched.
pub fn uav_stream(seed: u64, uav_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(uav_index as u64);
    rng
}

pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Single-LoS channel `sqrt(M) alpha a(theta) / sqrt(PL)` with explicit
/// path gain and path loss.
pub fn los_channel(
    aod_rad: f64,
    bs: &BsConfig,
    alpha: Complex64,
    path_loss: f64,
    gain_linear: f64,
) -> ChannelRealization {
    let m = bs.array_size;
    let scale = alpha * ((m as f64) / path_loss).sqrt();
    let h = steering_vector(aod_rad, m, bs.element_spacing_over_wavelength)
        .into_iter()
        .map(|a| a * scale)
        .collect();
    ChannelRealization {
        h,
        gain_linear,
        aod_rad,
        path_gains: vec![alpha],
        path_aods_rad: vec![aod_rad],
    }
}

pub fn draw_channel<R: Rng + ?Sized>(
    geom: &EngagementGeometry,
    bs: &BsConfig,
    antenna: &AntennaConfig,
    params: &ChannelParams,
    rng: &mut R,
) -> ChannelRealization {
    let gain_linear = uav_gain(geom, antenna).gain_linear;
    let pl = path_loss(geom.los_distance_m, params.pathloss_exponent);
    let aod = geom.vertical_angle_rad;

    if params.num_paths == 1 {
        let alpha = standard_complex_gaussian(rng);
        return los_channel(aod, bs, alpha, pl, gain_linear);
    }

    let m = bs.array_size;
    let spread = params.aod_spread_deg.to_radians();
    let mut path_gains = Vec::with_capacity(params.num_paths);
    let mut path_aods_rad = Vec::with_capacity(params.num_paths);
    for p in 0..params.num_paths {
        path_gains.push(standard_complex_gaussian(rng));
        // first path keeps the geometric LoS angle
        let offset = if p == 0 || spread == 0.0 {
            0.0
        } else {
            rng.random_range(-spread..=spread)
        };
        path_aods_rad.push(aod + offset);
    }
    let scale = ((m as f64) / pl).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); m];
    for (alpha, theta) in path_gains.iter().zip(&path_aods_rad) {
        for (hi, a) in h
            .iter_mut()
            .zip(steering_vector(*theta, m, bs.element_spacing_over_wavelength))
        {
            *hi += alpha * a * scale;
        }
    }
    ChannelRealization {
        h,
        gain_linear,
        aod_rad: aod,
        path_gains,
        path_aods_rad,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    use proptest::prelude::*;

    use super::*;
    use crate::geometry::{compute_geometry, UavPlacement};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn steering_first_entry_and_broadside() {
        let a = steering_vector(1.1, 6, 0.5);
        assert_eq!(a[0], c(1.0, 0.0));
        for z in steering_vector(FRAC_PI_2, 5, 0.5) {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_quarter_turn_steps() {
        let a = steering_vector(FRAC_PI_3, 4, 0.5);
        let expected = [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)];
        for (z, e) in a.iter().zip(expected) {
            assert!((z - e).norm() < 1e-12, "{z} vs {e}");
        }
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(0.0, 2.0), 1.0);
        assert_eq!(path_loss(10.0, 2.0), 101.0);
        let x = 25f64.hypot(14.4);
        assert!((path_loss(x, 2.0) - 833.36).abs() < 1e-9);
        // doubling distance quadruples the excess loss
        let pl1 = path_loss(x, 2.0) - 1.0;
        let pl2 = path_loss(2.0 * x, 2.0) - 1.0;
        assert!((pl2 - 4.0 * pl1).abs() < 1e-9 * pl2);
    }

    fn fig2_uav1() -> EngagementGeometry {
        compute_geometry(&BsConfig::default(), &UavPlacement::polar(25.0, PI / 10.0, 24.4)).unwrap()
    }

    #[test]
    fn unit_alpha_norm_matches_closed_form() {
        let g = fig2_uav1();
        let bs = BsConfig::default();
        let ch = los_channel(g.vertical_angle_rad, &bs, c(1.0, 0.0), path_loss(g.los_distance_m, 2.0), 1.0);
        assert!((ch.norm_sqr() - 64.0 / 833.36).abs() < 1e-12);
        assert!((ch.norm_sqr() - 0.0768).abs() < 1e-4);
        // sqrt(M) prefactor on unit-modulus entries: ||h||^2 = M^2
        let unit = los_channel(0.4, &bs, c(1.0, 0.0), 1.0, 1.0);
        assert!((unit.norm_sqr() - 64.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let g = fig2_uav1();
        let bs = BsConfig::default();
        let params = ChannelParams::default();
        let a = draw_channel(&g, &bs, &AntennaConfig::default(), &params, &mut uav_stream(42, 0));
        let b = draw_channel(&g, &bs, &AntennaConfig::default(), &params, &mut uav_stream(42, 0));
        assert_eq!(a, b);
        let other = draw_channel(&g, &bs, &AntennaConfig::default(), &params, &mut uav_stream(42, 1));
        assert_ne!(a.h, other.h);
        let next_seed = draw_channel(&g, &bs, &AntennaConfig::default(), &params, &mut uav_stream(43, 0));
        assert_ne!(a.h, next_seed.h);
    }

    #[test]
    fn drawn_channel_carries_gain_and_norm() {
        let g = fig2_uav1();
        let bs = BsConfig::default();
        let ant = AntennaConfig::default();
        let ch = draw_channel(&g, &bs, &ant, &ChannelParams::default(), &mut uav_stream(7, 0));
        assert_eq!(ch.gain_linear, uav_gain(&g, &ant).gain_linear);
        let alpha = ch.path_gains[0].norm_sqr();
        let expected = 64.0 * alpha / path_loss(g.los_distance_m, 2.0);
        assert!((ch.norm_sqr() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn multipath_draw_has_requested_paths() {
        let g = fig2_uav1();
        let params = ChannelParams { num_paths: 4, ..ChannelParams::default() };
        let ch = draw_channel(&g, &BsConfig::default(), &AntennaConfig::default(), &params, &mut uav_stream(3, 0));
        assert_eq!(ch.path_gains.len(), 4);
        assert_eq!(ch.h.len(), 8);
        assert_eq!(ch.path_aods_rad[0], g.vertical_angle_rad);
        for t in &ch.path_aods_rad {
            assert!((t - g.vertical_angle_rad).abs() <= 10f64.to_radians() + 1e-12);
        }
    }

    #[test]
    fn gaussian_is_unit_power() {
        let mut rng = uav_stream(11, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| standard_complex_gaussian(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((0.98..=1.02).contains(&mean), "{mean}");
    }

    proptest! {
        #[test]
        fn steering_entries_unit_modulus(theta in 0.0..PI, m in 1usize..32, d in 0.1..2.0f64) {
            let a = steering_vector(theta, m, d);
            prop_assert_eq!(a.len(), m);
            for z in &a {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn los_channel_is_scaled_steering(theta in 0.0..PI, m in 1usize..16, re in -2.0..2.0f64, im in -2.0..2.0f64, pl in 1.0..1e4f64) {
            let bs = BsConfig { array_size: m, ..BsConfig::default() };
            let ch = los_channel(theta, &bs, c(re, im), pl, 1.0);
            let a = steering_vector(theta, m, 0.5);
            let proj = ch.inner(&a).norm_sqr();
            let norm = ch.norm_sqr();
            prop_assert!((proj - norm * m as f64).abs() <= 1e-10 * (norm * m as f64).max(1e-300));
            let expected = (m * m) as f64 * (re * re + im * im) / pl;
            prop_assert!((norm - expected).abs() <= 1e-9 * expected.max(1e-300));
        }
    }
}
