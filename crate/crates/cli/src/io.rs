//! On-disk formats: the JSON MDP document, value-table and gap-report JSON,
//! experiment configs, and the trace/aggregate CSV emitters.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use erl_core::gaps::{LocationGap, MinimalGapReport};
use erl_core::harness::{AgentKind, RegretTrace, RunConfig};
use erl_core::mdp::TabularMdp;
use erl_core::risk::{RiskNeutralTables, RiskValueTables};

use crate::CliError;

/// The JSON MDP document: `S`, `A`, `H`, `s1`, `rewards` (H×S×A),
/// `transitions` (H×S×A×S).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MdpJson {
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    pub s1: usize,
    pub rewards: Vec<Vec<Vec<f64>>>,
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
}

impl MdpJson {
    pub fn from_mdp(mdp: &TabularMdp) -> Self {
        let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
        let rewards = (1..=horizon)
            .map(|h| {
                (0..ns)
                    .map(|s| (0..na).map(|a| mdp.reward(h, s, a)).collect())
                    .collect()
            })
            .collect();
        let transitions = (1..=horizon)
            .map(|h| {
                (0..ns)
                    .map(|s| {
                        (0..na)
                            .map(|a| mdp.transition_row(h, s, a).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            num_states: ns,
            num_actions: na,
            horizon,
            s1: mdp.initial_state(),
            rewards,
            transitions,
        }
    }

    /// Flattens and validates.
    pub fn into_mdp(self) -> Result<TabularMdp, CliError> {
        let mut rewards = Vec::with_capacity(self.horizon * self.num_states * self.num_actions);
        for level in &self.rewards {
            for row in level {
                rewards.extend_from_slice(row);
            }
        }
        let mut transitions = Vec::with_capacity(rewards.capacity() * self.num_states);
        for level in &self.transitions {
            for per_state in level {
                for row in per_state {
                    transitions.extend_from_slice(row);
                }
            }
        }
        TabularMdp::new(
            self.num_states,
            self.num_actions,
            self.horizon,
            self.s1,
            rewards,
            transitions,
        )
        .map_err(|e| CliError::failure(format!("invalid MDP: {e}")))
    }
}

pub fn load_mdp(path: &Path) -> Result<TabularMdp, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::failure(format!("cannot read {}: {e}", path.display())))?;
    let doc: MdpJson = serde_json::from_str(&text)
        .map_err(|e| CliError::failure(format!("cannot parse {}: {e}", path.display())))?;
    doc.into_mdp()
}

pub fn save_mdp(mdp: &TabularMdp, path: &Path) -> Result<(), CliError> {
    write_json(&MdpJson::from_mdp(mdp), path)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::failure(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::failure(format!("cannot write {}: {e}", path.display())))
}

/// `solve` output: explicit `beta`, `V` ((H+1)×S), `Q` (H×S×A).
#[derive(Debug, Serialize, Deserialize)]
pub struct ValueTablesJson {
    pub beta: f64,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Vec<f64>>>,
}

impl ValueTablesJson {
    pub fn from_tables(tables: &RiskValueTables) -> Self {
        let (ns, na, horizon) = (tables.num_states(), tables.num_actions(), tables.horizon());
        Self {
            beta: tables.beta(),
            v: (1..=horizon + 1)
                .map(|h| (0..ns).map(|s| tables.v(h, s)).collect())
                .collect(),
            q: (1..=horizon)
                .map(|h| {
                    (0..ns)
                        .map(|s| (0..na).map(|a| tables.q(h, s, a)).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// `solve --risk-neutral` output.
#[derive(Debug, Serialize, Deserialize)]
pub struct NeutralTablesJson {
    pub risk_neutral: bool,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<Vec<f64>>>,
}

impl NeutralTablesJson {
    pub fn from_tables(tables: &RiskNeutralTables) -> Self {
        let (ns, na, horizon) = (tables.num_states(), tables.num_actions(), tables.horizon());
        Self {
            risk_neutral: true,
            v: (1..=horizon + 1)
                .map(|h| (0..ns).map(|s| tables.v(h, s)).collect())
                .collect(),
            q: (1..=horizon)
                .map(|h| {
                    (0..ns)
                        .map(|s| (0..na).map(|a| tables.q(h, s, a)).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GapWitnessJson {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub prefix_reward: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GapLocationJson {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub reachable: bool,
    /// Minimizing prefix reward for the report's mode; null when the
    /// location is unreachable in reachable-only mode.
    pub prefix_reward: Option<f64>,
    pub semi_normalized: f64,
    pub cascaded: f64,
    pub alternative: f64,
    pub risk_neutral: f64,
}

/// `gaps` output: every per-location semi-normalized gap at its minimizing
/// prefix, the minimal gap with witness, mode, and tolerance.
#[derive(Debug, Serialize, Deserialize)]
pub struct GapReportJson {
    pub beta: f64,
    pub mode: String,
    pub zero_tolerance: f64,
    /// True when no nonzero gap exists.
    pub degenerate: bool,
    pub delta_min: Option<f64>,
    pub semi_normalized_delta_min: Option<f64>,
    pub witness: Option<GapWitnessJson>,
    pub locations: Vec<GapLocationJson>,
}

impl GapReportJson {
    pub fn assemble(
        beta: f64,
        zero_tolerance: f64,
        minimal: Option<&MinimalGapReport>,
        mode: &str,
        locations: &[LocationGap],
        risk_neutral: &[f64],
    ) -> Self {
        Self {
            beta,
            mode: mode.to_owned(),
            zero_tolerance,
            degenerate: minimal.is_none(),
            delta_min: minimal.map(|m| m.delta_min),
            semi_normalized_delta_min: minimal.map(|m| m.semi_delta_min),
            witness: minimal.map(|m| GapWitnessJson {
                h: m.witness.h,
                s: m.witness.s,
                a: m.witness.a,
                prefix_reward: m.witness.prefix_reward,
            }),
            locations: locations
                .iter()
                .zip(risk_neutral)
                .map(|(loc, &rn)| GapLocationJson {
                    h: loc.h,
                    s: loc.s,
                    a: loc.a,
                    reachable: loc.reachable,
                    prefix_reward: (!loc.prefix_reward.is_nan()).then_some(loc.prefix_reward),
                    semi_normalized: loc.semi_normalized,
                    cascaded: loc.cascaded,
                    alternative: loc.alternative,
                    risk_neutral: rn,
                })
                .collect(),
        }
    }
}

/// Where an experiment's MDP comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MdpSource {
    File { file: String },
    Inline { inline: MdpJson },
}

impl MdpSource {
    pub fn resolve(&self, base_dir: &Path) -> Result<TabularMdp, CliError> {
        match self {
            MdpSource::File { file } => {
                let path = Path::new(file);
                let resolved = if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base_dir.join(path)
                };
                load_mdp(&resolved)
            }
            MdpSource::Inline { inline } => inline.clone().into_mdp(),
        }
    }
}

fn default_bonus_c() -> f64 {
    1.0
}

fn default_parallelism() -> usize {
    1
}

/// One experiment: an MDP source, an agent, risk/bonus parameters, and the
/// seeds to run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfigJson {
    pub mdp: MdpSource,
    pub agent: String,
    pub beta: f64,
    pub episodes: u64,
    #[serde(default = "default_bonus_c")]
    pub bonus_c: f64,
    pub delta: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

impl ExperimentConfigJson {
    pub fn agent_kind(&self) -> Result<AgentKind, CliError> {
        AgentKind::parse(&self.agent).ok_or_else(|| {
            CliError::usage(format!(
                "unknown agent kind '{}' (expected rsvi2, rsq2, or uniform_random)",
                self.agent
            ))
        })
    }

    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        if self.beta == 0.0 {
            return Err(CliError::usage(
                "beta must be nonzero; use --risk-neutral with the solve subcommand for beta = 0",
            ));
        }
        if self.seeds.is_empty() {
            return Err(CliError::usage("config must list at least one seed"));
        }
        if self.episodes == 0 {
            return Err(CliError::usage("episodes must be at least 1"));
        }
        Ok(RunConfig {
            agent: self.agent_kind()?,
            beta: self.beta,
            episodes: self.episodes,
            bonus_c: self.bonus_c,
            delta: self.delta,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfigJson {
    pub experiments: Vec<ExperimentConfigJson>,
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfigJson, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::failure(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse config {}: {e}", path.display())))
}

pub fn load_sweep(path: &Path) -> Result<SweepConfigJson, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::failure(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse config {}: {e}", path.display())))
}

pub const TRACE_CSV_HEADER: &str =
    "episode,inst_regret,cum_regret,exp_regret_inc,cum_exp_regret,optimism_violation";

/// Renders the per-episode trace exactly as recorded; floats use shortest
/// round-trip formatting so the bytes are a pure function of the run.
pub fn trace_csv(trace: &RegretTrace) -> String {
    let mut out = String::with_capacity(trace.records.len() * 48 + 64);
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for (i, rec) in trace.records.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            rec.inst_regret,
            rec.cum_regret,
            rec.exp_regret_inc,
            rec.cum_exp_regret,
            u8::from(rec.optimism_violation),
        ));
    }
    out
}

pub fn trace_file_name(config: &RunConfig, seed: u64) -> String {
    format!("trace_{:016x}_seed{}.csv", config.stable_hash(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use erl_core::instances;

    #[test]
    fn mdp_json_round_trips() {
        let mdp = instances::random_mdp(7, 3, 2, 3, 2);
        let doc = MdpJson::from_mdp(&mdp);
        let text = serde_json::to_string(&doc).unwrap();
        let back: MdpJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_mdp().unwrap(), mdp);
    }

    #[test]
    fn mdp_source_accepts_both_shapes() {
        let inline: MdpSource = serde_json::from_str(&format!(
            "{{\"inline\": {}}}",
            serde_json::to_string(&MdpJson::from_mdp(&instances::random_mdp(1, 2, 2, 2, 2)))
                .unwrap()
        ))
        .unwrap();
        assert!(matches!(inline, MdpSource::Inline { .. }));
        let file: MdpSource = serde_json::from_str("{\"file\": \"mdp.json\"}").unwrap();
        assert!(matches!(file, MdpSource::File { .. }));
    }

    #[test]
    fn trace_csv_has_the_contract_header() {
        let trace = RegretTrace {
            seed: 0,
            config_hash: 1,
            records: vec![],
            regret_bound_violations: 0,
        };
        assert!(trace_csv(&trace).starts_with(
            "episode,inst_regret,cum_regret,exp_regret_inc,cum_exp_regret,optimism_violation\n"
        ));
    }
}
