//! Engagement geometry between the tilted base-station array and each UAV.
//!
//! Vertical angles are measured from the array axis (zenith), so a UAV level
//! with the array sits at `pi/2` and UAVs above it have smaller angles.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base station mounting and array layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsConfig {
    pub height_m: f64,
    /// Mechanical down-tilt.
    pub tilt_deg: f64,
    pub array_size: usize,
    pub element_spacing_over_wavelength: f64,
}

impl Default for BsConfig {
    fn default() -> Self {
        Self {
            height_m: 10.0,
            tilt_deg: 12.0,
            array_size: 8,
            element_spacing_over_wavelength: 0.5,
        }
    }
}

impl BsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.height_m >= 0.0 && self.height_m.is_finite()) {
            return Err(Error::config("bs.height_m", "must be finite and >= 0"));
        }
        if self.array_size == 0 {
            return Err(Error::config("bs.array_size", "must be >= 1"));
        }
        if !(self.element_spacing_over_wavelength > 0.0
            && self.element_spacing_over_wavelength.is_finite())
        {
            return Err(Error::config(
                "bs.element_spacing_over_wavelength",
                "must be finite and > 0",
            ));
        }
        if !(0.0..90.0).contains(&self.tilt_deg) {
            return Err(Error::config("bs.tilt_deg", "must lie in [0, 90)"));
        }
        Ok(())
    }
}

/// Ground projection and altitude of a UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavPlacement {
    pub x_m: f64,
    pub y_m: f64,
    pub altitude_m: f64,
}

impl UavPlacement {
    /// Placement from ground distance and azimuth.
    pub fn polar(ground_distance_m: f64, azimuth_rad: f64, altitude_m: f64) -> Self {
        Self {
            x_m: ground_distance_m * azimuth_rad.cos(),
            y_m: ground_distance_m * azimuth_rad.sin(),
            altitude_m,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("uavs[{index}].{name}");
        if !(self.altitude_m >= 0.0 && self.altitude_m.is_finite()) {
            return Err(Error::config(field("altitude_m"), "must be finite and >= 0"));
        }
        if !(self.x_m.is_finite() && self.y_m.is_finite()) {
            return Err(Error::config(field("x_m"), "coordinates must be finite"));
        }
        if self.x_m == 0.0 && self.y_m == 0.0 {
            return Err(Error::config(
                field("x_m"),
                "ground position (0, 0) makes the vertical angle undefined",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementGeometry {
    pub ground_distance_m: f64,
    /// UAV altitude minus BS height; negative when the UAV is below the array.
    pub relative_altitude_m: f64,
    pub vertical_angle_rad: f64,
    pub horizontal_angle_rad: f64,
    pub los_distance_m: f64,
}

impl EngagementGeometry {
    pub fn vertical_angle_deg(&self) -> f64 {
        self.vertical_angle_rad.to_degrees()
    }

    pub fn horizontal_angle_deg(&self) -> f64 {
        self.horizontal_angle_rad.to_degrees()
    }
}

pub fn compute_geometry(bs: &BsConfig, uav: &UavPlacement) -> Result<EngagementGeometry> {
    let ground_distance_m = uav.x_m.hypot(uav.y_m);
    if ground_distance_m == 0.0 {
        return Err(Error::ZeroGroundDistance);
    }
    let relative_altitude_m = uav.altitude_m - bs.height_m;
    Ok(EngagementGeometry {
        ground_distance_m,
        relative_altitude_m,
        vertical_angle_rad: FRAC_PI_2 - (relative_altitude_m / ground_distance_m).atan(),
        horizontal_angle_rad: uav.y_m.atan2(uav.x_m),
        los_distance_m: ground_distance_m.hypot(relative_altitude_m),
    })
}
