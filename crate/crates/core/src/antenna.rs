//! 3GPP single-element radiation pattern.
//!
//! Angles are in degrees here. The vertical angle is measured from zenith,
//! so the electrical boresight of a down-tilted element sits at `90 + tilt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EngagementGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaConfig {
    pub tilt_deg: f64,
    pub theta_3db_deg: f64,
    /// Side-lobe level limit of the vertical cut.
    pub sla_v_db: f64,
    pub phi_3db_deg: f64,
    /// Front-to-back ratio.
    pub a_m_db: f64,
    pub g_max_dbi: f64,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            tilt_deg: 12.0,
            theta_3db_deg: 65.0,
            sla_v_db: 30.0,
            phi_3db_deg: 65.0,
            a_m_db: 30.0,
            g_max_dbi: 8.0,
        }
    }
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("antenna.theta_3db_deg", self.theta_3db_deg),
            ("antenna.phi_3db_deg", self.phi_3db_deg),
            ("antenna.sla_v_db", self.sla_v_db),
            ("antenna.a_m_db", self.a_m_db),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(field, "must be finite and > 0"));
            }
        }
        if !self.g_max_dbi.is_finite() || !self.tilt_deg.is_finite() {
            return Err(Error::config("antenna", "tilt and gain must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGain {
    pub gain_db: f64,
    pub gain_linear: f64,
}

/// Vertical attenuation in dB, in `[-sla_v, 0]`.
pub fn vertical_attenuation_db(theta_deg: f64, cfg: &AntennaConfig) -> f64 {
    let offset = (theta_deg - 90.0 - cfg.tilt_deg) / cfg.theta_3db_deg;
    -(12.0 * offset * offset).min(cfg.sla_v_db)
}

/// Horizontal attenuation in dB, in `[-a_m, 0]`.
pub fn horizontal_attenuation_db(phi_deg: f64, cfg: &AntennaConfig) -> f64 {
    let offset = phi_deg / cfg.phi_3db_deg;
    -(12.0 * offset * offset).min(cfg.a_m_db)
}

/// Combined element gain. The summed deficit is clipped at the front-to-back
/// ratio even though each cut is already clipped on its own.
pub fn element_gain(theta_deg: f64, phi_deg: f64, cfg: &AntennaConfig) -> ElementGain {
    let deficit = -(vertical_attenuation_db(theta_deg, cfg) + horizontal_attenuation_db(phi_deg, cfg));
    let gain_db = cfg.g_max_dbi - deficit.min(cfg.a_m_db);
    ElementGain {
        gain_db,
        gain_linear: db_to_linear(gain_db),
    }
}

/// Gain `G_k` seen by a UAV at the given geometry.
pub fn uav_gain(geom: &EngagementGeometry, cfg: &AntennaConfig) -> ElementGain {
    element_gain(geom.vertical_angle_deg(), geom.horizontal_angle_deg(), cfg)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
