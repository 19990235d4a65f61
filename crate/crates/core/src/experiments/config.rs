//! Scenario files and the built-in presets.
//!
//! A scenario file is TOML. It may name a `preset`; the file is then laid
//! over that preset key by key (tables merge recursively, everything else
//! replaces). Powers are given either in Watts (`*_w`) or dBm (`*_dbm`) and
//! are stored in Watts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::antenna::AntennaConfig;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{BsConfig, UavPlacement};
use crate::ma::Scheme;
use crate::optimizer::SolverConfig;

pub const PRESET_NAMES: [&str; 3] = ["fig2", "fig3_4", "fig6_7"];

fn preset_source(name: &str) -> Result<&'static str> {
    match name {
        "fig2" => Ok(include_str!("../../presets/fig2.toml")),
        "fig3_4" => Ok(include_str!("../../presets/fig3_4.toml")),
        "fig6_7" => Ok(include_str!("../../presets/fig6_7.toml")),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Keys that select between alternative ways of giving one quantity. When
/// an overlay sets any key of one alternative, the base loses the others.
const ALTERNATIVES: &[&[&[&str]]] = &[
    &[&["transmit_power_w"], &["transmit_power_dbm"]],
    &[&["bs_static_power_w"], &["bs_static_power_dbm"]],
    &[&["grid"], &["start", "stop", "points"]],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    None,
    WeightEta,
    Uav2Altitude,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::None => "none",
            SweepKind::WeightEta => "weight_eta",
            SweepKind::Uav2Altitude => "uav2_altitude",
        }
    }
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SweepKind::None),
            "weight_eta" => Ok(SweepKind::WeightEta),
            "uav2_altitude" => Ok(SweepKind::Uav2Altitude),
            other => Err(Error::config("sweep.kind", format!("unknown sweep kind `{other}`"))),
        }
    }
}

/// One swept axis. `weight_eta` sets `beta[uav] = 10^value`;
/// `uav2_altitude` sets the altitude of UAV `uav` in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub kind: SweepKind,
    pub uav: usize,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub transmit_power_w: f64,
    pub bs_static_power_w: f64,
    /// Noise variance in the same units as received power.
    pub noise_power: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            transmit_power_w: 10.0,
            bs_static_power_w: 10.0,
            noise_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarlo {
    pub num_seeds: usize,
    pub base_seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            num_seeds: 100,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub bs: BsConfig,
    pub uavs: Vec<UavPlacement>,
    pub antenna: AntennaConfig,
    pub channel: ChannelParams,
    pub budget: Budget,
    /// Base weights; a `weight_eta` sweep overrides one entry per point.
    pub weights: Vec<f64>,
    /// Fixed NOMA decode order; `None` orders by channel strength per draw.
    pub noma_order: Option<Vec<usize>>,
    pub schemes: Vec<Scheme>,
    pub solver: SolverConfig,
    pub monte_carlo: MonteCarlo,
    pub sweep: Option<Sweep>,
}

impl ScenarioConfig {
    /// Sweep points as `(kind, value)`; a single `(None, 0)` without a sweep.
    pub fn sweep_points(&self) -> Vec<(SweepKind, f64)> {
        match &self.sweep {
            Some(s) => s.grid.iter().map(|&v| (s.kind, v)).collect(),
            None => vec![(SweepKind::None, 0.0)],
        }
    }

    /// Placements and weights at one sweep point.
    pub fn at_point(&self, kind: SweepKind, value: f64) -> (Vec<UavPlacement>, Vec<f64>) {
        let mut uavs = self.uavs.clone();
        let mut weights = self.weights.clone();
        if let Some(sweep) = &self.sweep {
            match kind {
                SweepKind::WeightEta => weights[sweep.uav] = 10f64.powf(value),
                SweepKind::Uav2Altitude => uavs[sweep.uav].altitude_m = value,
                SweepKind::None => {}
            }
        }
        (uavs, weights)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario_id.trim().is_empty() {
            return Err(Error::config("scenario_id", "must be nonempty"));
        }
        if self.scenario_id.contains(['\n', '\r']) {
            return Err(Error::config("scenario_id", "must be a single line"));
        }
        self.bs.validate()?;
        if self.uavs.is_empty() {
            return Err(Error::config("uavs", "at least one UAV is required"));
        }
        for (i, u) in self.uavs.iter().enumerate() {
            u.validate(i)?;
        }
        self.antenna.validate()?;
        self.channel.validate()?;

        let b = &self.budget;
        if !(b.transmit_power_w >= 0.0 && b.transmit_power_w.is_finite()) {
            return Err(Error::config("budget.transmit_power", "must be finite and >= 0"));
        }
        if !(b.bs_static_power_w >= 0.0 && b.bs_static_power_w.is_finite()) {
            return Err(Error::config("budget.bs_static_power", "must be finite and >= 0"));
        }
        if !(b.noise_power > 0.0 && b.noise_power.is_finite()) {
            return Err(Error::config("budget.noise_power", "must be finite and > 0"));
        }

        let k = self.uavs.len();
        if self.weights.len() != k {
            return Err(Error::config(
                "weights",
                format!("expected {k} entries (one per UAV), got {}", self.weights.len()),
            ));
        }
        if let Some(i) = self.weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::config(format!("weights[{i}]"), "must be finite and > 0"));
        }
        if let Some(order) = &self.noma_order {
            let mut seen = vec![false; k];
            let ok = order.len() == k
                && order.iter().all(|&i| i < k && !std::mem::replace(&mut seen[i], true));
            if !ok {
                return Err(Error::config("noma_order", format!("must be a permutation of 0..{k}")));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(Error::config("schemes", format!("`{s}` listed twice")));
            }
        }
        self.solver.validate()?;
        if self.monte_carlo.num_seeds == 0 {
            return Err(Error::config("monte_carlo.num_seeds", "must be >= 1"));
        }
        if let Some(sweep) = &self.sweep {
            sweep_checks(sweep, self)?;
        }
        Ok(())
    }
}

fn sweep_checks(sweep: &Sweep, cfg: &ScenarioConfig) -> Result<()> {
    if sweep.kind == SweepKind::None {
        return Err(Error::config("sweep.kind", "use no [sweep] table instead of `none`"));
    }
    if sweep.uav >= cfg.uavs.len() {
        return Err(Error::config(
            "sweep.uav",
            format!("index {} out of range for {} UAVs", sweep.uav, cfg.uavs.len()),
        ));
    }
    if sweep.grid.is_empty() {
        return Err(Error::config("sweep.grid", "must be nonempty"));
    }
    if let Some(i) = sweep.grid.iter().position(|v| !v.is_finite()) {
        return Err(Error::config(format!("sweep.grid[{i}]"), "must be finite"));
    }
    if sweep.kind == SweepKind::Uav2Altitude {
        if let Some(i) = sweep.grid.iter().position(|v| *v < 0.0) {
            return Err(Error::config(format!("sweep.grid[{i}]"), "altitudes must be >= 0"));
        }
    }
    Ok(())
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `points` values from `start` to `stop` inclusive, evenly spaced.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| {
                if i == n - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

// ---- file format ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[allow(dead_code)]
    preset: Option<String>,
    scenario_id: Option<String>,
    #[serde(default)]
    bs: BsConfig,
    #[serde(default)]
    uavs: Vec<RawUav>,
    #[serde(default)]
    antenna: RawAntenna,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    budget: RawBudget,
    weights: Option<Vec<f64>>,
    noma_order: Option<Vec<usize>>,
    schemes: Option<Vec<Scheme>>,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    monte_carlo: MonteCarlo,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUav {
    x_m: Option<f64>,
    y_m: Option<f64>,
    ground_distance_m: Option<f64>,
    azimuth_deg: Option<f64>,
    altitude_m: f64,
}

/// Antenna pattern without the tilt, which always follows `bs.tilt_deg`.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawAntenna {
    theta_3db_deg: f64,
    sla_v_db: f64,
    phi_3db_deg: f64,
    a_m_db: f64,
    g_max_dbi: f64,
}

impl Default for RawAntenna {
    fn default() -> Self {
        let d = AntennaConfig::default();
        Self {
            theta_3db_deg: d.theta_3db_deg,
            sla_v_db: d.sla_v_db,
            phi_3db_deg: d.phi_3db_deg,
            a_m_db: d.a_m_db,
            g_max_dbi: d.g_max_dbi,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawChannel {
    num_paths: usize,
    pathloss_exponent: f64,
    aod_spread_deg: f64,
}

impl Default for RawChannel {
    fn default() -> Self {
        let d = ChannelParams::default();
        Self {
            num_paths: d.num_paths,
            pathloss_exponent: d.pathloss_exponent,
            aod_spread_deg: d.aod_spread_deg,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    transmit_power_w: Option<f64>,
    transmit_power_dbm: Option<f64>,
    bs_static_power_w: Option<f64>,
    bs_static_power_dbm: Option<f64>,
    noise_power: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kind: SweepKind,
    #[serde(default = "default_sweep_uav")]
    uav: usize,
    grid: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
}

fn default_sweep_uav() -> usize {
    1
}

fn watts(field: &str, w: Option<f64>, dbm: Option<f64>, default: f64) -> Result<f64> {
    match (w, dbm) {
        (Some(_), Some(_)) => Err(Error::config(
            format!("budget.{field}"),
            format!("give either {field}_w or {field}_dbm, not both"),
        )),
        (Some(w), None) => Ok(w),
        (None, Some(dbm)) => Ok(dbm_to_watts(dbm)),
        (None, None) => Ok(default),
    }
}

impl RawUav {
    fn resolve(&self, index: usize) -> Result<UavPlacement> {
        let field = |name: &str| format!("uavs[{index}].{name}");
        match (self.x_m, self.y_m, self.ground_distance_m, self.azimuth_deg) {
            (Some(x_m), Some(y_m), None, None) => Ok(UavPlacement {
                x_m,
                y_m,
                altitude_m: self.altitude_m,
            }),
            (None, None, Some(d), Some(az)) => Ok(UavPlacement::polar(d, az.to_radians(), self.altitude_m)),
            _ => Err(Error::config(
                field("position"),
                "give either x_m and y_m, or ground_distance_m and azimuth_deg",
            )),
        }
    }
}

impl RawSweep {
    fn resolve(&self) -> Result<Sweep> {
        let grid = match (&self.grid, self.start, self.stop, self.points) {
            (Some(g), None, None, None) => g.clone(),
            (None, Some(start), Some(stop), Some(points)) => {
                if points == 0 {
                    return Err(Error::config("sweep.points", "must be >= 1"));
                }
                linspace(start, stop, points)
            }
            _ => {
                return Err(Error::config(
                    "sweep.grid",
                    "give either `grid` or all of `start`, `stop` and `points`",
                ))
            }
        };
        Ok(Sweep {
            kind: self.kind,
            uav: self.uav,
            grid,
        })
    }
}

impl RawConfig {
    fn resolve(self) -> Result<ScenarioConfig> {
        let uavs = self
            .uavs
            .iter()
            .enumerate()
            .map(|(i, u)| u.resolve(i))
            .collect::<Result<Vec<_>>>()?;
        let k = uavs.len();
        let antenna = AntennaConfig {
            tilt_deg: self.bs.tilt_deg,
            theta_3db_deg: self.antenna.theta_3db_deg,
            sla_v_db: self.antenna.sla_v_db,
            phi_3db_deg: self.antenna.phi_3db_deg,
            a_m_db: self.antenna.a_m_db,
            g_max_dbi: self.antenna.g_max_dbi,
        };
        let channel = ChannelParams {
            num_paths: self.channel.num_paths,
            pathloss_exponent: self.channel.pathloss_exponent,
            aod_spread_deg: self.channel.aod_spread_deg,
            ..ChannelParams::default()
        };
        let defaults = Budget::default();
        let b = &self.budget;
        let budget = Budget {
            transmit_power_w: watts(
                "transmit_power",
                b.transmit_power_w,
                b.transmit_power_dbm,
                defaults.transmit_power_w,
            )?,
            bs_static_power_w: watts(
                "bs_static_power",
                b.bs_static_power_w,
                b.bs_static_power_dbm,
                defaults.bs_static_power_w,
            )?,
            noise_power: b.noise_power.unwrap_or(defaults.noise_power),
        };
        let cfg = ScenarioConfig {
            scenario_id: self.scenario_id.unwrap_or_else(|| "scenario".to_string()),
            bs: self.bs,
            uavs,
            antenna,
            channel,
            budget,
            weights: self.weights.unwrap_or_else(|| vec![1.0; k]),
            noma_order: self.noma_order,
            schemes: self.schemes.unwrap_or_else(|| vec![Scheme::Rsma, Scheme::Noma]),
            solver: self.solver,
            monte_carlo: self.monte_carlo,
            sweep: self.sweep.as_ref().map(RawSweep::resolve).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

// ---- merging ----

fn merge(base: &mut Table, overlay: Table) {
    for alternatives in ALTERNATIVES {
        for (i, alt) in alternatives.iter().enumerate() {
            if alt.iter().any(|k| overlay.contains_key(*k)) {
                for (j, other) in alternatives.iter().enumerate() {
                    if i != j {
                        for k in *other {
                            base.remove(*k);
                        }
                    }
                }
            }
        }
    }
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn parse_table(source: &str, origin: &Path) -> Result<Table> {
    source.parse::<Table>().map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })
}

/// Expands `preset` references, innermost first.
fn expand(mut table: Table, depth: usize) -> Result<Table> {
    let Some(name) = table.get("preset") else {
        return Ok(table);
    };
    let Some(name) = name.as_str().map(str::to_string) else {
        return Err(Error::config("preset", "must be a string"));
    };
    if depth > PRESET_NAMES.len() {
        return Err(Error::config("preset", "presets refer to each other in a cycle"));
    }
    let source = preset_source(&name)?;
    let preset_path = Path::new("<preset>").join(&name);
    let mut base = expand(parse_table(source, &preset_path)?, depth + 1)?;
    table.remove("preset");
    merge(&mut base, table);
    Ok(base)
}

fn from_table(table: Table, origin: &Path) -> Result<ScenarioConfig> {
    let table = expand(table, 0)?;
    let raw: RawConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    raw.resolve()
}

/// Parses a scenario from TOML text. `origin` only labels errors.
pub fn parse_scenario(source: &str, origin: &Path) -> Result<ScenarioConfig> {
    from_table(parse_table(source, origin)?, origin)
}

/// Parses a scenario laid over `preset` (which the file may still override
/// with its own `preset` key).
pub fn parse_scenario_with_preset(source: &str, origin: &Path, preset: &str) -> Result<ScenarioConfig> {
    let mut table = Table::new();
    table.insert("preset".to_string(), Value::String(preset.to_string()));
    merge(&mut table, parse_table(source, origin)?);
    from_table(table, origin)
}

pub fn load_scenario(path: &Path, preset: Option<&str>) -> Result<ScenarioConfig> {
    let source = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match preset {
        Some(p) => parse_scenario_with_preset(&source, path, p),
        None => parse_scenario(&source, path),
    }
}

/// A built-in scenario.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    parse_scenario_with_preset("", Path::new("<preset>"), name)
}
