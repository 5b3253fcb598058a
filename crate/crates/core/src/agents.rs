//! The RSVI2 and RSQ2 optimistic learning agents, plus a uniform-random
//! baseline, behind a common episodic interface.
//!
//! Both learners maintain an exponential-domain action table `G` (truncated
//! optimistic estimates of `e^{βQ}`) alongside the log-domain `Q`/`V`
//! tables, and explore through a doubly decaying bonus
//! `c·|e^{β(H−h+1)} − 1|·√(·/count)`. RSVI2 replans all visited pairs from
//! transition counts at the start of every episode; RSQ2 updates online with
//! the learning rate `α_t = (H+1)/(H+t)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::mdp::MarkovPolicy;
use crate::rng::RngStream;

/// Exploration-bonus parameters shared by both learners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BonusConfig {
    /// The bonus multiplier (a universal constant in the bound statements;
    /// free here).
    pub c: f64,
    /// Confidence level in (0, 1].
    pub delta: f64,
    /// Planned number of episodes K (enters the log factor only).
    pub planned_episodes: u64,
}

impl BonusConfig {
    pub fn new(c: f64, delta: f64, planned_episodes: u64) -> Self {
        assert!(c > 0.0, "bonus multiplier must be positive");
        assert!(
            delta > 0.0 && delta <= 1.0,
            "confidence level must lie in (0, 1]"
        );
        assert!(planned_episodes >= 1);
        Self {
            c,
            delta,
            planned_episodes,
        }
    }

    /// `log(2·S·A·H·K/δ)`, natural log.
    fn log_term(&self, num_states: usize, num_actions: usize, horizon: usize) -> f64 {
        math::ln(
            2.0 * num_states as f64
                * num_actions as f64
                * horizon as f64
                * self.planned_episodes as f64
                / self.delta,
        )
    }
}

/// The learning-rate schedule of the online agent.
#[inline]
pub fn learning_rate(horizon: usize, t: u64) -> f64 {
    (horizon as f64 + 1.0) / (horizon as f64 + t as f64)
}

/// One episode's interaction surface. `begin_episode` runs any per-episode
/// planning; the greedy policy read right after it is exactly the policy the
/// agent executes during the episode.
pub trait EpisodicAgent {
    fn begin_episode(&mut self);
    /// Greedy action at `(h, s)`, lowest-index tie-break.
    fn act(&self, h: usize, s: usize) -> usize;
    fn observe(&mut self, h: usize, s: usize, a: usize, reward: f64, next_state: usize);
    /// The agent's current deterministic Markov policy.
    fn greedy_policy(&self) -> MarkovPolicy;
    /// The agent's optimistic state value `V_h(s)` (log domain), when it
    /// maintains one.
    fn optimistic_value(&self, h: usize, s: usize) -> Option<f64>;
}

/// A frozen greedy policy taken at the start of an episode, used for exact
/// regret accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpisodePolicySnapshot {
    pub episode: u64,
    pub policy: MarkovPolicy,
}

pub fn policy_snapshot(agent: &dyn EpisodicAgent, episode: u64) -> EpisodePolicySnapshot {
    EpisodePolicySnapshot {
        episode,
        policy: agent.greedy_policy(),
    }
}

#[inline]
fn sa_index(num_states: usize, num_actions: usize, h: usize, s: usize, a: usize) -> usize {
    ((h - 1) * num_states + s) * num_actions + a
}

#[inline]
fn greedy_action(q: &[f64], num_states: usize, num_actions: usize, h: usize, s: usize) -> usize {
    let base = ((h - 1) * num_states + s) * num_actions;
    let mut best = 0usize;
    for a in 1..num_actions {
        if q[base + a] > q[base + best] {
            best = a;
        }
    }
    best
}

fn greedy_policy_from(
    q: &[f64],
    horizon: usize,
    num_states: usize,
    num_actions: usize,
) -> MarkovPolicy {
    let mut pi = MarkovPolicy::zeros(horizon, num_states);
    for h in 1..=horizon {
        for s in 0..num_states {
            pi.set_action(h, s, greedy_action(q, num_states, num_actions, h, s));
        }
    }
    pi
}

/// Optimistic value iteration: every episode rebuilds `w`, the bonus, and
/// the truncated `G`/`Q` tables for all visited pairs from transition
/// counts, then acts greedily.
#[derive(Clone, Debug)]
pub struct Rsvi2 {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    beta: f64,
    bonus_c: f64,
    log_term: f64,
    /// `e^{β(H−h+1)}` per `h ∈ 1..=H`: the optimistic truncation level.
    truncation: Vec<f64>,
    q: Vec<f64>,
    v: Vec<f64>,
    exp_q: Vec<f64>,
    sample_avg: Vec<f64>,
    bonus: Vec<f64>,
    visits: Vec<u64>,
    transition_counts: Vec<u64>,
    observed_reward: Vec<f64>,
}

impl Rsvi2 {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        beta: f64,
        cfg: &BonusConfig,
    ) -> Self {
        assert!(beta != 0.0);
        let truncation = (1..=horizon)
            .map(|h| math::exp(beta * (horizon - h + 1) as f64))
            .collect::<Vec<_>>();
        let mut q = vec![0.0; horizon * num_states * num_actions];
        let mut v = vec![0.0; (horizon + 1) * num_states];
        let mut exp_q = vec![0.0; horizon * num_states * num_actions];
        for h in 1..=horizon {
            for s in 0..num_states {
                v[(h - 1) * num_states + s] = (horizon - h + 1) as f64;
                for a in 0..num_actions {
                    q[sa_index(num_states, num_actions, h, s, a)] = (horizon - h + 1) as f64;
                    exp_q[sa_index(num_states, num_actions, h, s, a)] = truncation[h - 1];
                }
            }
        }
        Self {
            num_states,
            num_actions,
            horizon,
            beta,
            bonus_c: cfg.c,
            log_term: cfg.log_term(num_states, num_actions, horizon),
            truncation,
            q,
            v,
            exp_q,
            sample_avg: vec![0.0; horizon * num_states * num_actions],
            bonus: vec![0.0; horizon * num_states * num_actions],
            visits: vec![0; horizon * num_states * num_actions],
            transition_counts: vec![0; horizon * num_states * num_actions * num_states],
            observed_reward: vec![0.0; horizon * num_states * num_actions],
        }
    }

    /// Full backward pass over all visited pairs: the sample average over
    /// prior episodes is formed from transition counts (exact, since rewards
    /// are deterministic), the bonus shrinks as `√(S·logterm/N)`, and the
    /// estimate truncates at `e^{β(H−h+1)}`.
    pub fn plan(&mut self) {
        let (ns, na) = (self.num_states, self.num_actions);
        for h in (1..=self.horizon).rev() {
            for s in 0..ns {
                for a in 0..na {
                    let i = sa_index(ns, na, h, s, a);
                    let n = self.visits[i];
                    if n == 0 {
                        continue;
                    }
                    let r = self.observed_reward[i];
                    let growth = math::exp(self.beta * r);
                    let mut total = 0.0;
                    let base = i * ns;
                    for next in 0..ns {
                        let count = self.transition_counts[base + next];
                        if count > 0 {
                            total += count as f64
                                * growth
                                * math::exp(self.beta * self.v[h * ns + next]);
                        }
                    }
                    let w = total / n as f64;
                    let b = self.bonus_c
                        * math::abs(self.truncation[h - 1] - 1.0)
                        * math::sqrt(ns as f64 * self.log_term / n as f64);
                    let g = if self.beta > 0.0 {
                        (w + b).min(self.truncation[h - 1])
                    } else {
                        (w - b).max(self.truncation[h - 1])
                    };
                    self.sample_avg[i] = w;
                    self.bonus[i] = b;
                    self.exp_q[i] = g;
                    self.q[i] = math::ln(g) / self.beta;
                }
                let best = greedy_action(&self.q, ns, na, h, s);
                self.v[(h - 1) * ns + s] = self.q[sa_index(ns, na, h, s, best)];
            }
        }
    }

    pub fn visits(&self, h: usize, s: usize, a: usize) -> u64 {
        self.visits[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn transition_count(&self, h: usize, s: usize, a: usize, next: usize) -> u64 {
        self.transition_counts
            [sa_index(self.num_states, self.num_actions, h, s, a) * self.num_states + next]
    }

    pub fn q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn exp_q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.exp_q[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn sample_avg_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.sample_avg[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn bonus_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.bonus[sa_index(self.num_states, self.num_actions, h, s, a)]
    }
}

impl EpisodicAgent for Rsvi2 {
    fn begin_episode(&mut self) {
        self.plan();
    }

    fn act(&self, h: usize, s: usize) -> usize {
        greedy_action(&self.q, self.num_states, self.num_actions, h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, reward: f64, next_state: usize) {
        let i = sa_index(self.num_states, self.num_actions, h, s, a);
        self.visits[i] += 1;
        self.transition_counts[i * self.num_states + next_state] += 1;
        self.observed_reward[i] = reward;
    }

    fn greedy_policy(&self) -> MarkovPolicy {
        greedy_policy_from(&self.q, self.horizon, self.num_states, self.num_actions)
    }

    fn optimistic_value(&self, h: usize, s: usize) -> Option<f64> {
        Some(self.v[(h - 1) * self.num_states + s])
    }
}

/// Optimistic Q-learning: per-step moving-average updates of the
/// exponential estimate with rate `α_t = (H+1)/(H+t)` and a per-visit bonus
/// folded in at weight `α_t`.
#[derive(Clone, Debug)]
pub struct Rsq2 {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    beta: f64,
    bonus_c: f64,
    log_term: f64,
    truncation: Vec<f64>,
    q: Vec<f64>,
    v: Vec<f64>,
    exp_q: Vec<f64>,
    visits: Vec<u64>,
}

impl Rsq2 {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        beta: f64,
        cfg: &BonusConfig,
    ) -> Self {
        assert!(beta != 0.0);
        let truncation = (1..=horizon)
            .map(|h| math::exp(beta * (horizon - h + 1) as f64))
            .collect::<Vec<_>>();
        // β > 0 initializes at the optimistic ceiling H−h+1; β < 0 at zero
        let mut q = vec![0.0; horizon * num_states * num_actions];
        let mut v = vec![0.0; (horizon + 1) * num_states];
        let mut exp_q = vec![1.0; horizon * num_states * num_actions];
        if beta > 0.0 {
            for h in 1..=horizon {
                for s in 0..num_states {
                    v[(h - 1) * num_states + s] = (horizon - h + 1) as f64;
                    for a in 0..num_actions {
                        q[sa_index(num_states, num_actions, h, s, a)] = (horizon - h + 1) as f64;
                        exp_q[sa_index(num_states, num_actions, h, s, a)] = truncation[h - 1];
                    }
                }
            }
        }
        Self {
            num_states,
            num_actions,
            horizon,
            beta,
            bonus_c: cfg.c,
            log_term: cfg.log_term(num_states, num_actions, horizon),
            truncation,
            q,
            v,
            exp_q,
            visits: vec![0; horizon * num_states * num_actions],
        }
    }

    pub fn visits(&self, h: usize, s: usize, a: usize) -> u64 {
        self.visits[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[sa_index(self.num_states, self.num_actions, h, s, a)]
    }

    pub fn exp_q_value(&self, h: usize, s: usize, a: usize) -> f64 {
        self.exp_q[sa_index(self.num_states, self.num_actions, h, s, a)]
    }
}

/// `(1−α)·current + α·target`: the exponential moving-average step.
#[inline]
pub fn blend(alpha: f64, current: f64, target: f64) -> f64 {
    (1.0 - alpha) * current + alpha * target
}

impl EpisodicAgent for Rsq2 {
    fn begin_episode(&mut self) {}

    fn act(&self, h: usize, s: usize) -> usize {
        greedy_action(&self.q, self.num_states, self.num_actions, h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, reward: f64, next_state: usize) {
        let (ns, na) = (self.num_states, self.num_actions);
        let i = sa_index(ns, na, h, s, a);
        self.visits[i] += 1;
        let t = self.visits[i];
        let alpha = learning_rate(self.horizon, t);
        let target = math::exp(self.beta * (reward + self.v[h * ns + next_state]));
        let w = blend(alpha, self.exp_q[i], target);
        let b = self.bonus_c
            * math::abs(self.truncation[h - 1] - 1.0)
            * math::sqrt(self.horizon as f64 * self.log_term / t as f64);
        let g = if self.beta > 0.0 {
            (w + alpha * b).min(self.truncation[h - 1])
        } else {
            (w - alpha * b).max(self.truncation[h - 1])
        };
        self.exp_q[i] = g;
        self.q[i] = math::ln(g) / self.beta;
        let best = greedy_action(&self.q, ns, na, h, s);
        self.v[(h - 1) * ns + s] = self.q[sa_index(ns, na, h, s, best)];
    }

    fn greedy_policy(&self) -> MarkovPolicy {
        greedy_policy_from(&self.q, self.horizon, self.num_states, self.num_actions)
    }

    fn optimistic_value(&self, h: usize, s: usize) -> Option<f64> {
        Some(self.v[(h - 1) * self.num_states + s])
    }
}

/// Linear-regret calibration baseline: draws a fresh deterministic Markov
/// policy uniformly at random at the start of every episode and follows it.
#[derive(Clone, Debug)]
pub struct UniformRandomAgent {
    num_actions: usize,
    rng: RngStream,
    current: MarkovPolicy,
}

impl UniformRandomAgent {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize, rng: RngStream) -> Self {
        Self {
            num_actions,
            rng,
            current: MarkovPolicy::zeros(horizon, num_states),
        }
    }
}

impl EpisodicAgent for UniformRandomAgent {
    fn begin_episode(&mut self) {
        self.current = MarkovPolicy::random(
            self.current.horizon(),
            self.current.num_states(),
            self.num_actions,
            &mut self.rng,
        );
    }

    fn act(&self, h: usize, s: usize) -> usize {
        self.current.action(h, s)
    }

    fn observe(&mut self, _h: usize, _s: usize, _a: usize, _reward: f64, _next_state: usize) {}

    fn greedy_policy(&self) -> MarkovPolicy {
        self.current.clone()
    }

    fn optimistic_value(&self, _h: usize, _s: usize) -> Option<f64> {
        None
    }
}
