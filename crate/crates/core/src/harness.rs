//! Learning-experiment harness: the episode loop with exact per-episode
//! regret accounting, invariant monitoring, scaling diagnostics, and
//! reference bound curves.

use alloc::vec::Vec;
use core::fmt;

use crate::agents::{self, BonusConfig, EpisodicAgent, Rsq2, Rsvi2, UniformRandomAgent};
use crate::gaps::Normalizers;
use crate::math;
use crate::mdp::{self, TabularMdp};
use crate::risk::{evaluate_policy, solve_optimal, RiskError, RiskParams};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Rsvi2,
    Rsq2,
    UniformRandom,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Rsvi2 => "rsvi2",
            AgentKind::Rsq2 => "rsq2",
            AgentKind::UniformRandom => "uniform_random",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "rsvi2" => Some(AgentKind::Rsvi2),
            "rsq2" => Some(AgentKind::Rsq2),
            "uniform_random" => Some(AgentKind::UniformRandom),
            _ => None,
        }
    }
}

/// One experiment cell: agent, risk parameter, episode budget, and bonus
/// parameters. Seeds live outside (one run per seed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub agent: AgentKind,
    pub beta: f64,
    pub episodes: u64,
    pub bonus_c: f64,
    pub delta: f64,
}

impl RunConfig {
    /// A stable FNV-1a hash over the config fields, used to key output rows.
    pub fn stable_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.agent.as_str().as_bytes());
        eat(&self.beta.to_bits().to_le_bytes());
        eat(&self.episodes.to_le_bytes());
        eat(&self.bonus_c.to_bits().to_le_bytes());
        eat(&self.delta.to_bits().to_le_bytes());
        hash
    }
}

/// Per-episode regret accounting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// `(V*_1 − V^{π_k}_1)(s1)`, from exact policy evaluation.
    pub inst_regret: f64,
    pub cum_regret: f64,
    /// `(1/β)(e^{βV*_1} − e^{βV^{π_k}_1})(s1)`.
    pub exp_regret_inc: f64,
    pub cum_exp_regret: f64,
    /// Set when the agent's value estimate at `(1, s1)` fails the β-signed
    /// optimism inequality against `V*` (always false for agents without
    /// value estimates).
    pub optimism_violation: bool,
}

/// A full run: per-episode records plus run-level invariant counters.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub config_hash: u64,
    pub records: Vec<EpisodeRecord>,
    /// Episodes where cumulative regret exceeded `ψ̄_β ·` cumulative
    /// exponential regret; must stay 0.
    pub regret_bound_violations: u64,
}

impl RegretTrace {
    pub fn final_cum_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn final_cum_exp_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_exp_regret)
    }

    /// Cumulative regret at episode `k` (1-based).
    pub fn cum_regret_at(&self, k: u64) -> f64 {
        self.records[(k - 1) as usize].cum_regret
    }

    pub fn optimism_violations(&self) -> u64 {
        self.records.iter().filter(|r| r.optimism_violation).count() as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HarnessError {
    Risk(RiskError),
    Mdp(mdp::MdpError),
    InsufficientCheckpoints { have: usize, need: usize },
    NonGeometricGrid { at: usize },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Risk(e) => write!(f, "{e}"),
            HarnessError::Mdp(e) => write!(f, "{e}"),
            HarnessError::InsufficientCheckpoints { have, need } => {
                write!(
                    f,
                    "scaling report needs at least {need} checkpoints, got {have}"
                )
            }
            HarnessError::NonGeometricGrid { at } => {
                write!(
                    f,
                    "scaling checkpoints must double; entry {at} breaks the grid"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for HarnessError {}

impl From<RiskError> for HarnessError {
    fn from(e: RiskError) -> Self {
        HarnessError::Risk(e)
    }
}

impl From<mdp::MdpError> for HarnessError {
    fn from(e: mdp::MdpError) -> Self {
        HarnessError::Mdp(e)
    }
}

/// Runs one seeded experiment. The environment samples from stream 0 of
/// `seed` and the agent (when randomized) from stream 1, so traces are a
/// pure function of `(mdp, config, seed)`.
///
/// Each episode: the agent plans (RSVI2) and its greedy policy is frozen as
/// `π_k`; the episode rolls out with agent-chosen actions; instantaneous
/// regret comes from exact policy evaluation of the snapshot, never from
/// Monte-Carlo returns. The deterministic inequality
/// `R(k) ≤ ψ̄_β·E(k)` is checked at every episode.
pub fn run(mdp: &TabularMdp, config: &RunConfig, seed: u64) -> Result<RegretTrace, HarnessError> {
    mdp.validate()?;
    let params = RiskParams::new(config.beta)?;
    let (num_states, num_actions, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let bonus = BonusConfig::new(config.bonus_c, config.delta, config.episodes);

    let mut agent: alloc::boxed::Box<dyn EpisodicAgent> = match config.agent {
        AgentKind::Rsvi2 => alloc::boxed::Box::new(Rsvi2::new(
            num_states,
            num_actions,
            horizon,
            config.beta,
            &bonus,
        )),
        AgentKind::Rsq2 => alloc::boxed::Box::new(Rsq2::new(
            num_states,
            num_actions,
            horizon,
            config.beta,
            &bonus,
        )),
        AgentKind::UniformRandom => alloc::boxed::Box::new(UniformRandomAgent::new(
            num_states,
            num_actions,
            horizon,
            RngStream::new(seed, 1),
        )),
    };
    let mut env_rng = RngStream::new(seed, 0);

    let (optimal, _) = solve_optimal(mdp, &params)?;
    let s1 = mdp.initial_state();
    let v_star = optimal.v(1, s1);
    let y_star = optimal.exp_v_minus_one(1, s1);
    let norms = Normalizers::new(config.beta, horizon);

    let mut records = Vec::with_capacity(config.episodes as usize);
    let mut cum_regret = 0.0;
    let mut cum_exp_regret = 0.0;
    let mut regret_bound_violations = 0u64;

    for episode in 1..=config.episodes {
        agent.begin_episode();
        let snapshot = agents::policy_snapshot(agent.as_ref(), episode);
        let eval = evaluate_policy(mdp, &snapshot.policy, &params)?;
        let inst_regret = v_star - eval.v(1, s1);
        let exp_regret_inc = (y_star - eval.exp_v_minus_one(1, s1)) / config.beta;
        let optimism_violation = match agent.optimistic_value(1, s1) {
            Some(estimate) => estimate < v_star,
            None => false,
        };

        let mut s = s1;
        for h in 1..=horizon {
            let a = agent.act(h, s);
            debug_assert_eq!(a, snapshot.policy.action(h, s));
            let r = mdp.reward(h, s, a);
            let next = mdp::step(mdp, h, s, a, &mut env_rng);
            agent.observe(h, s, a, r, next);
            s = next;
        }

        cum_regret += inst_regret;
        cum_exp_regret += exp_regret_inc;
        if cum_regret > norms.semi_normalizer * cum_exp_regret {
            regret_bound_violations += 1;
        }
        records.push(EpisodeRecord {
            inst_regret,
            cum_regret,
            exp_regret_inc,
            cum_exp_regret,
            optimism_violation,
        });
    }

    Ok(RegretTrace {
        seed,
        config_hash: config.stable_hash(),
        records,
        regret_bound_violations,
    })
}

/// Growth flagged "log-consistent" when the last three doubling ratios stay
/// at or below this: log²-growth tends to 1, √K-growth to ≈1.41, linear
/// growth to 2.
pub const LOG_CONSISTENT_RATIO: f64 = 1.7;
const MIN_CHECKPOINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub episodes: u64,
    pub regret: f64,
    pub per_log_sq: f64,
    pub per_log: f64,
    pub per_sqrt: f64,
    /// `R(K)/R(K/2)`; absent on the first checkpoint.
    pub doubling_ratio: Option<f64>,
    /// Gap-normalized regret `R(K)·Δ_min`.
    pub regret_times_delta_min: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub log_consistent: bool,
    pub delta_min: f64,
}

/// Scaling diagnostics over cumulative-regret checkpoints on a
/// doubling K-grid (at least four points).
pub fn scaling_report(
    checkpoints: &[(u64, f64)],
    delta_min: f64,
) -> Result<ScalingReport, HarnessError> {
    if checkpoints.len() < MIN_CHECKPOINTS {
        return Err(HarnessError::InsufficientCheckpoints {
            have: checkpoints.len(),
            need: MIN_CHECKPOINTS,
        });
    }
    for (i, window) in checkpoints.windows(2).enumerate() {
        if window[1].0 != window[0].0 * 2 {
            return Err(HarnessError::NonGeometricGrid { at: i + 1 });
        }
    }
    let mut rows = Vec::with_capacity(checkpoints.len());
    for (i, &(episodes, regret)) in checkpoints.iter().enumerate() {
        let logk = math::ln(episodes as f64);
        let doubling_ratio = (i > 0).then(|| {
            let prev = checkpoints[i - 1].1;
            if prev == 0.0 {
                if regret == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                regret / prev
            }
        });
        rows.push(ScalingRow {
            episodes,
            regret,
            per_log_sq: regret / (logk * logk),
            per_log: regret / logk,
            per_sqrt: regret / math::sqrt(episodes as f64),
            doubling_ratio,
            regret_times_delta_min: regret * delta_min,
        });
    }
    let log_consistent = rows.iter().rev().take(3).all(|row| {
        row.doubling_ratio
            .is_some_and(|r| r <= LOG_CONSISTENT_RATIO)
    });
    Ok(ScalingReport {
        rows,
        log_consistent,
        delta_min,
    })
}

/// Reference curves of the two regret-bound shapes (constant set to 1) and
/// the trivial bound `H·K`. Shape references only; never a pass/fail
/// criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurves {
    pub points: Vec<BoundPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub episodes: u64,
    /// `(e^{|β|H}−1)²·H³S²A/(β²Δ_min)·log(HSAK/δ)²`.
    pub value_iteration_reference: f64,
    /// `(e^{|β|H}−1)²·H⁴SA/(β²Δ_min)·log(HSAK/δ)`.
    pub q_learning_reference: f64,
    pub trivial: f64,
}

pub fn bound_curves(
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    beta: f64,
    delta: f64,
    delta_min: f64,
    episode_grid: &[u64],
) -> BoundCurves {
    let (s, a, h) = (num_states as f64, num_actions as f64, horizon as f64);
    let lead = math::expm1(math::abs(beta) * h);
    let shared = lead * lead / (beta * beta * delta_min);
    let points = episode_grid
        .iter()
        .map(|&episodes| {
            let log_term = math::ln(h * s * a * episodes as f64 / delta);
            BoundPoint {
                episodes,
                value_iteration_reference: shared * h * h * h * s * s * a * log_term * log_term,
                q_learning_reference: shared * h * h * h * h * s * a * log_term,
                trivial: h * episodes as f64,
            }
        })
        .collect();
    BoundCurves { points }
}
