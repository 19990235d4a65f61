//! Seeded Monte-Carlo sweeps over scenarios.
//!
//! Every (sweep point, seed) cell draws its channels from the seed alone,
//! so all schemes and all sweep points see the same small-scale fading for
//! a given seed and comparisons are paired. Cells run on a bounded worker
//! pool and the rows are sorted afterwards, so output does not depend on
//! scheduling.

mod config;
mod output;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::channel::{draw_channel, uav_stream};
use crate::error::{Error, Result};
use crate::geometry::compute_geometry;
use crate::ma::{LinkBudget, Scheme};
use crate::optimizer::optimize_schemes;

pub use config::{
    dbm_to_watts, linspace, load_scenario, parse_scenario, parse_scenario_with_preset, preset, Budget, MonteCarlo,
    ScenarioConfig, Sweep, SweepKind, PRESET_NAMES,
};
pub use output::{csv_header, format_sig9, read_csv, write_csv};

/// One optimized (sweep point, seed, scheme) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub scheme: Scheme,
    /// Channel seed (`base_seed + seed index`).
    pub seed: u64,
    pub sweep_kind: SweepKind,
    pub sweep_value: f64,
    /// Weighted per-UAV energy efficiency, bits/s/Hz per Watt.
    pub ee: Vec<f64>,
    pub ee_sum: f64,
    /// Share of the common stream assigned to each UAV (zero without one).
    pub rate_common: Vec<f64>,
    pub rate_private: Vec<f64>,
    pub power_used_w: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
}

/// Channels and budget of one cell.
pub fn cell_budget(cfg: &ScenarioConfig, kind: SweepKind, value: f64, seed: u64) -> Result<LinkBudget> {
    let (uavs, weights) = cfg.at_point(kind, value);
    let channels = uavs
        .iter()
        .enumerate()
        .map(|(k, uav)| {
            let geom = compute_geometry(&cfg.bs, uav)?;
            let mut rng = uav_stream(seed, k);
            Ok(draw_channel(&geom, &cfg.bs, &cfg.antenna, &cfg.channel, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lb = LinkBudget::new(
        channels,
        cfg.budget.noise_power,
        cfg.budget.transmit_power_w,
        cfg.budget.bs_static_power_w,
        weights,
    );
    if let Some(order) = &cfg.noma_order {
        lb.noma_order = order.clone();
    }
    Ok(lb)
}

fn run_cell(cfg: &ScenarioConfig, kind: SweepKind, value: f64, seed: u64) -> Result<Vec<ResultRow>> {
    let lb = cell_budget(cfg, kind, value, seed)?;
    let results = optimize_schemes(&cfg.schemes, &lb, &cfg.solver)?;
    Ok(cfg
        .schemes
        .iter()
        .zip(results)
        .map(|(&scheme, r)| ResultRow {
            scenario_id: cfg.scenario_id.clone(),
            scheme,
            seed,
            sweep_kind: kind,
            sweep_value: value,
            ee: r.report.ee_per_uav,
            ee_sum: r.report.ee_sum,
            rate_common: r.report.common_rates,
            rate_private: r.report.private_rates,
            power_used_w: r.report.transmit_power,
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect())
}

/// Runs every (sweep point x seed x scheme) cell. Rows come back ordered by
/// sweep point, then seed, then the scheme order of the config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    run_scenario_with(cfg, RunOptions::default(), |_, _| {})
}

/// [`run_scenario`] with an explicit worker count and a progress callback
/// receiving `(finished cells, total cells)`.
pub fn run_scenario_with<F>(cfg: &ScenarioConfig, opts: RunOptions, progress: F) -> Result<Vec<ResultRow>>
where
    F: Fn(usize, usize) + Sync,
{
    cfg.validate()?;
    let points = cfg.sweep_points();
    let seeds: Vec<u64> = (0..cfg.monte_carlo.num_seeds as u64)
        .map(|i| cfg.monte_carlo.base_seed.wrapping_add(i))
        .collect();
    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..seeds.len()).map(move |s| (p, s)))
        .collect();
    let total = cells.len();
    let done = AtomicUsize::new(0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let per_cell: Vec<Result<Vec<ResultRow>>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, s)| {
                let (kind, value) = points[p];
                let rows = run_cell(cfg, kind, value, seeds[s]);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
                rows
            })
            .collect()
    });

    let scheme_rank = |s: Scheme| cfg.schemes.iter().position(|x| *x == s).unwrap_or(usize::MAX);
    let mut keyed = Vec::with_capacity(total * cfg.schemes.len());
    for (&(p, s), rows) in cells.iter().zip(per_cell) {
        for row in rows? {
            keyed.push(((p, s, scheme_rank(row.scheme)), row));
        }
    }
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}

/// Altitude sweep of one UAV; the config must carry a `uav2_altitude` sweep.
pub fn sweep_altitude(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    sweep_altitude_with(cfg, RunOptions::default(), |_, _| {})
}

pub fn sweep_altitude_with<F>(cfg: &ScenarioConfig, opts: RunOptions, progress: F) -> Result<Vec<ResultRow>>
where
    F: Fn(usize, usize) + Sync,
{
    match &cfg.sweep {
        Some(s) if s.kind == SweepKind::Uav2Altitude => run_scenario_with(cfg, opts, progress),
        _ => Err(Error::config("sweep.kind", "an altitude sweep needs kind = \"uav2_altitude\"")),
    }
}

/// Mean of `value(row)` over seeds for every (sweep value, scheme) pair, in
/// row order of first appearance.
pub fn mean_by_point<F>(rows: &[ResultRow], value: F) -> Vec<(f64, Scheme, f64)>
where
    F: Fn(&ResultRow) -> f64,
{
    let mut acc: Vec<(f64, Scheme, f64, usize)> = Vec::new();
    for row in rows {
        match acc
            .iter_mut()
            .find(|(v, s, _, _)| v.to_bits() == row.sweep_value.to_bits() && *s == row.scheme)
        {
            Some(entry) => {
                entry.2 += value(row);
                entry.3 += 1;
            }
            None => acc.push((row.sweep_value, row.scheme, value(row), 1)),
        }
    }
    acc.into_iter().map(|(v, s, sum, n)| (v, s, sum / n as f64)).collect()
}
