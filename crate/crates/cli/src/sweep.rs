//! Multi-cell experiment sweeps with a bounded worker pool.
//!
//! Cells are all (config index, seed) pairs across the sweep's experiments.
//! Execution order is whatever the workers get to first; output order is
//! always sorted by (config index, seed), so the emitted bytes do not depend
//! on the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use erl_core::harness::{self, RegretTrace, RunConfig};
use erl_core::mdp::TabularMdp;

/// One experiment with its MDP already resolved.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub mdp: TabularMdp,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub parallelism: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub final_cum_regret: f64,
    pub final_cum_exp_regret: f64,
    pub mean_inst_regret: f64,
    pub median_inst_regret: f64,
    pub q25_inst_regret: f64,
    pub q75_inst_regret: f64,
    pub optimism_violations: u64,
    pub regret_bound_violations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellRow {
    pub config_index: usize,
    pub config_hash: u64,
    pub agent: &'static str,
    pub beta: f64,
    pub episodes: u64,
    pub bonus_c: f64,
    pub delta: f64,
    pub seed: u64,
    /// Per-cell failures are recorded, not fatal to the sweep.
    pub outcome: Result<CellStats, String>,
}

/// Nearest-rank quantile of a sorted sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn cell_stats(trace: &RegretTrace) -> CellStats {
    let mut inst: Vec<f64> = trace.records.iter().map(|r| r.inst_regret).collect();
    inst.sort_by(|a, b| a.partial_cmp(b).expect("regret values are never NaN"));
    let mean = inst.iter().sum::<f64>() / inst.len().max(1) as f64;
    CellStats {
        final_cum_regret: trace.final_cum_regret(),
        final_cum_exp_regret: trace.final_cum_exp_regret(),
        mean_inst_regret: mean,
        median_inst_regret: quantile(&inst, 0.5),
        q25_inst_regret: quantile(&inst, 0.25),
        q75_inst_regret: quantile(&inst, 0.75),
        optimism_violations: trace.optimism_violations(),
        regret_bound_violations: trace.regret_bound_violations,
    }
}

/// Runs every (config, seed) cell, at most `max_workers` at a time, and
/// returns rows sorted by (config index, seed).
pub fn run_sweep(experiments: &[ResolvedExperiment], max_workers: usize) -> Vec<CellRow> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (i, exp) in experiments.iter().enumerate() {
        for (j, _) in exp.seeds.iter().enumerate() {
            cells.push((i, j));
        }
    }

    let requested = experiments.iter().map(|e| e.parallelism).max().unwrap_or(1);
    let workers = requested.min(max_workers).min(cells.len()).max(1);

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellRow>>> = Mutex::new(vec![None; cells.len()]);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (config_index, seed_index) = cells[i];
                let exp = &experiments[config_index];
                let seed = exp.seeds[seed_index];
                let outcome = harness::run(&exp.mdp, &exp.config, seed)
                    .map(|trace| cell_stats(&trace))
                    .map_err(|e| e.to_string());
                let row = CellRow {
                    config_index,
                    config_hash: exp.config.stable_hash(),
                    agent: exp.config.agent.as_str(),
                    beta: exp.config.beta,
                    episodes: exp.config.episodes,
                    bonus_c: exp.config.bonus_c,
                    delta: exp.config.delta,
                    seed,
                    outcome,
                };
                results.lock().expect("sweep worker panicked")[i] = Some(row);
            });
        }
    });

    let mut rows: Vec<CellRow> = results
        .into_inner()
        .expect("sweep worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell executed"))
        .collect();
    rows.sort_by_key(|row| (row.config_index, row.seed));
    rows
}

pub const AGGREGATE_CSV_HEADER: &str = "config_index,config_hash,agent,beta,episodes,bonus_c,delta,seed,status,final_cum_regret,final_cum_exp_regret,mean_inst_regret,median_inst_regret,q25_inst_regret,q75_inst_regret,optimism_violations,regret_bound_violations";

pub fn aggregate_csv(rows: &[CellRow]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let prefix = format!(
            "{},{:016x},{},{},{},{},{},{}",
            row.config_index,
            row.config_hash,
            row.agent,
            row.beta,
            row.episodes,
            row.bonus_c,
            row.delta,
            row.seed
        );
        match &row.outcome {
            Ok(stats) => out.push_str(&format!(
                "{prefix},ok,{},{},{},{},{},{},{},{}\n",
                stats.final_cum_regret,
                stats.final_cum_exp_regret,
                stats.mean_inst_regret,
                stats.median_inst_regret,
                stats.q25_inst_regret,
                stats.q75_inst_regret,
                stats.optimism_violations,
                stats.regret_bound_violations,
            )),
            Err(message) => {
                let clean = message.replace(',', ";");
                out.push_str(&format!("{prefix},error: {clean},,,,,,,,\n"));
            }
        }
    }
    out
}
