//! Tabular episodic MDPs, trajectories, policies, and sampling.
//!
//! An MDP is a tuple (S, A, H, P, r) with a fixed initial state: `S` states,
//! `A` actions, horizon `H`, step-indexed transition kernels
//! `P_h(s'|s,a)`, and deterministic rewards `r_h(s,a) ∈ [0,1]`. Episodes
//! always start at the fixed initial state; an initial-state distribution is
//! deliberately not supported.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::rng::RngStream;

/// Tolerance for "each transition row sums to 1".
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MdpError {
    DimensionMismatch {
        table: &'static str,
        expected: usize,
        actual: usize,
    },
    RewardOutOfRange {
        h: usize,
        s: usize,
        a: usize,
        value: f64,
    },
    NegativeTransition {
        h: usize,
        s: usize,
        a: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        h: usize,
        s: usize,
        a: usize,
        sum: f64,
    },
    InitialStateOutOfRange {
        initial_state: usize,
        num_states: usize,
    },
    IndexOutOfBounds {
        what: &'static str,
        index: usize,
        bound: usize,
    },
}

impl fmt::Display for MdpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MdpError::DimensionMismatch {
                table,
                expected,
                actual,
            } => {
                write!(f, "{table} has length {actual}, expected {expected}")
            }
            MdpError::RewardOutOfRange { h, s, a, value } => {
                write!(f, "reward out of [0,1] at (h={h}, s={s}, a={a}): {value}")
            }
            MdpError::NegativeTransition {
                h,
                s,
                a,
                next,
                value,
            } => {
                write!(f, "negative transition probability at (h={h}, s={s}, a={a}) -> s'={next}: {value}")
            }
            MdpError::RowSum { h, s, a, sum } => {
                write!(
                    f,
                    "transition row at (h={h}, s={s}, a={a}) sums to {sum}, expected 1"
                )
            }
            MdpError::InitialStateOutOfRange {
                initial_state,
                num_states,
            } => {
                write!(
                    f,
                    "initial state {initial_state} out of range for {num_states} states"
                )
            }
            MdpError::IndexOutOfBounds { what, index, bound } => {
                write!(f, "{what} index {index} out of bounds (< {bound} required)")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MdpError {}

/// A finite-horizon tabular MDP with deterministic rewards and a fixed
/// initial state. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    initial_state: usize,
    /// Dense `(h, s, a)` table, `h ∈ 1..=H` stored at offset `h-1`.
    rewards: Vec<f64>,
    /// Dense `(h, s, a, s')` table.
    transitions: Vec<f64>,
}

impl TabularMdp {
    /// Builds and validates an MDP from dense row-major tables.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        initial_state: usize,
        rewards: Vec<f64>,
        transitions: Vec<f64>,
    ) -> Result<Self, MdpError> {
        let mdp = Self::from_parts(
            num_states,
            num_actions,
            horizon,
            initial_state,
            rewards,
            transitions,
        )?;
        mdp.validate()?;
        Ok(mdp)
    }

    /// Builds without semantic validation (shape is still checked); callers
    /// such as file loaders run [`TabularMdp::validate`] afterwards.
    pub fn from_parts(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        initial_state: usize,
        rewards: Vec<f64>,
        transitions: Vec<f64>,
    ) -> Result<Self, MdpError> {
        assert!(num_states > 0 && num_actions > 0 && horizon > 0);
        let r_len = horizon * num_states * num_actions;
        if rewards.len() != r_len {
            return Err(MdpError::DimensionMismatch {
                table: "rewards",
                expected: r_len,
                actual: rewards.len(),
            });
        }
        let p_len = r_len * num_states;
        if transitions.len() != p_len {
            return Err(MdpError::DimensionMismatch {
                table: "transitions",
                expected: p_len,
                actual: transitions.len(),
            });
        }
        Ok(Self {
            num_states,
            num_actions,
            horizon,
            initial_state,
            rewards,
            transitions,
        })
    }

    /// Checks every structural invariant, reporting the first violation in
    /// a fixed (s1, then ascending `(h,s,a)`) scan order.
    pub fn validate(&self) -> Result<(), MdpError> {
        if self.initial_state >= self.num_states {
            return Err(MdpError::InitialStateOutOfRange {
                initial_state: self.initial_state,
                num_states: self.num_states,
            });
        }
        for h in 1..=self.horizon {
            for s in 0..self.num_states {
                for a in 0..self.num_actions {
                    let r = self.reward(h, s, a);
                    if !(0.0..=1.0).contains(&r) {
                        return Err(MdpError::RewardOutOfRange { h, s, a, value: r });
                    }
                    let row = self.transition_row(h, s, a);
                    let mut sum = 0.0;
                    for (next, &p) in row.iter().enumerate() {
                        if p < 0.0 {
                            return Err(MdpError::NegativeTransition {
                                h,
                                s,
                                a,
                                next,
                                value: p,
                            });
                        }
                        sum += p;
                    }
                    if math::abs(sum - 1.0) > ROW_SUM_TOL {
                        return Err(MdpError::RowSum { h, s, a, sum });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    #[inline]
    fn sa_index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!((1..=self.horizon).contains(&h));
        debug_assert!(s < self.num_states && a < self.num_actions);
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    /// `r_h(s, a)`, `h ∈ 1..=H`.
    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.sa_index(h, s, a)]
    }

    /// The probability vector `P_h(·|s, a)` over next states.
    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let base = self.sa_index(h, s, a) * self.num_states;
        &self.transitions[base..base + self.num_states]
    }

    pub fn rewards_raw(&self) -> &[f64] {
        &self.rewards
    }

    pub fn transitions_raw(&self) -> &[f64] {
        &self.transitions
    }
}

/// A full-length episode: exactly `H` state-action pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    steps: Vec<(usize, usize)>,
}

impl Trajectory {
    pub fn new(mdp: &TabularMdp, steps: Vec<(usize, usize)>) -> Result<Self, MdpError> {
        if steps.len() != mdp.horizon() {
            return Err(MdpError::DimensionMismatch {
                table: "trajectory",
                expected: mdp.horizon(),
                actual: steps.len(),
            });
        }
        check_steps(mdp, &steps)?;
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    /// The prefix of the first `h` pairs (`τ_h`), `h ≤ H`.
    pub fn prefix(&self, h: usize) -> TrajectoryPrefix {
        TrajectoryPrefix {
            steps: self.steps[..h].to_vec(),
        }
    }
}

/// A partial episode `τ_{h-1}`: the first `h−1` state-action pairs, possibly
/// empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrajectoryPrefix {
    steps: Vec<(usize, usize)>,
}

impl TrajectoryPrefix {
    pub fn empty() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn new(mdp: &TabularMdp, steps: Vec<(usize, usize)>) -> Result<Self, MdpError> {
        if steps.len() > mdp.horizon().saturating_sub(1) {
            return Err(MdpError::DimensionMismatch {
                table: "trajectory prefix",
                expected: mdp.horizon() - 1,
                actual: steps.len(),
            });
        }
        check_steps(mdp, &steps)?;
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn check_steps(mdp: &TabularMdp, steps: &[(usize, usize)]) -> Result<(), MdpError> {
    for &(s, a) in steps {
        if s >= mdp.num_states() {
            return Err(MdpError::IndexOutOfBounds {
                what: "state",
                index: s,
                bound: mdp.num_states(),
            });
        }
        if a >= mdp.num_actions() {
            return Err(MdpError::IndexOutOfBounds {
                what: "action",
                index: a,
                bound: mdp.num_actions(),
            });
        }
    }
    Ok(())
}

/// A deterministic Markov policy: one action per `(h, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovPolicy {
    horizon: usize,
    num_states: usize,
    actions: Vec<usize>,
}

impl MarkovPolicy {
    /// `actions` is a dense `(h, s)` table, `h ∈ 1..=H` at offset `h-1`.
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        actions: Vec<usize>,
    ) -> Result<Self, MdpError> {
        if actions.len() != horizon * num_states {
            return Err(MdpError::DimensionMismatch {
                table: "policy",
                expected: horizon * num_states,
                actual: actions.len(),
            });
        }
        for &a in &actions {
            if a >= num_actions {
                return Err(MdpError::IndexOutOfBounds {
                    what: "action",
                    index: a,
                    bound: num_actions,
                });
            }
        }
        Ok(Self {
            horizon,
            num_states,
            actions,
        })
    }

    /// The all-zeros policy.
    pub fn zeros(horizon: usize, num_states: usize) -> Self {
        Self {
            horizon,
            num_states,
            actions: vec![0; horizon * num_states],
        }
    }

    /// A uniformly random deterministic policy, drawn per `(h, s)` in fixed
    /// ascending order.
    pub fn random(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        rng: &mut RngStream,
    ) -> Self {
        let actions = (0..horizon * num_states)
            .map(|_| rng.next_below(num_actions))
            .collect();
        Self {
            horizon,
            num_states,
            actions,
        }
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        debug_assert!((1..=self.horizon).contains(&h));
        self.actions[(h - 1) * self.num_states + s]
    }

    pub fn set_action(&mut self, h: usize, s: usize, a: usize) {
        self.actions[(h - 1) * self.num_states + s] = a;
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn actions_raw(&self) -> &[usize] {
        &self.actions
    }
}

/// Cumulative reward `R(τ_{h-1}) = Σ_j r_j(s_j, a_j)` along a prefix;
/// 0 for the empty prefix.
pub fn prefix_reward(mdp: &TabularMdp, prefix: &TrajectoryPrefix) -> Result<f64, MdpError> {
    check_steps(mdp, prefix.steps())?;
    let mut total = 0.0;
    for (j, &(s, a)) in prefix.steps().iter().enumerate() {
        total += mdp.reward(j + 1, s, a);
    }
    Ok(total)
}

/// Samples `s' ~ P_h(·|s,a)` by inverse CDF over the stored probability
/// vector, consuming exactly one uniform draw. Ties in cumulative sums
/// resolve to the lower state index.
pub fn step(mdp: &TabularMdp, h: usize, s: usize, a: usize, rng: &mut RngStream) -> usize {
    let row = mdp.transition_row(h, s, a);
    let u = rng.next_f64();
    let mut cum = 0.0;
    let mut last_positive = s;
    for (next, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = next;
            if u < cum {
                return next;
            }
        }
    }
    // u landed within float round-off of the total mass.
    last_positive
}

/// Per-(h, s) extrema of the prefix reward over positive-probability
/// prefixes, plus reachability flags. Entry `h ∈ 1..=H`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixRewardBounds {
    horizon: usize,
    num_states: usize,
    reachable: Vec<bool>,
    min_reward: Vec<f64>,
    max_reward: Vec<f64>,
}

impl PrefixRewardBounds {
    #[inline]
    fn index(&self, h: usize, s: usize) -> usize {
        debug_assert!((1..=self.horizon).contains(&h));
        (h - 1) * self.num_states + s
    }

    pub fn is_reachable(&self, h: usize, s: usize) -> bool {
        self.reachable[self.index(h, s)]
    }

    /// `min R(τ_{h-1})` over positive-probability prefixes ending in `s` at
    /// step `h`. Only meaningful when reachable.
    pub fn min_reward(&self, h: usize, s: usize) -> f64 {
        self.min_reward[self.index(h, s)]
    }

    pub fn max_reward(&self, h: usize, s: usize) -> f64 {
        self.max_reward[self.index(h, s)]
    }
}

/// Forward dynamic programming over the transition support (an edge
/// participates iff its stored probability is > 0 exactly).
pub fn reachable_prefix_reward_bounds(mdp: &TabularMdp) -> PrefixRewardBounds {
    let horizon = mdp.horizon();
    let num_states = mdp.num_states();
    let len = horizon * num_states;
    let mut bounds = PrefixRewardBounds {
        horizon,
        num_states,
        reachable: vec![false; len],
        min_reward: vec![f64::INFINITY; len],
        max_reward: vec![f64::NEG_INFINITY; len],
    };
    let s1 = mdp.initial_state();
    bounds.reachable[s1] = true;
    bounds.min_reward[s1] = 0.0;
    bounds.max_reward[s1] = 0.0;
    for h in 1..horizon {
        for s in 0..num_states {
            let i = (h - 1) * num_states + s;
            if !bounds.reachable[i] {
                continue;
            }
            let (lo, hi) = (bounds.min_reward[i], bounds.max_reward[i]);
            for a in 0..mdp.num_actions() {
                let r = mdp.reward(h, s, a);
                let row = mdp.transition_row(h, s, a);
                for (next, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let j = h * num_states + next;
                        bounds.reachable[j] = true;
                        if lo + r < bounds.min_reward[j] {
                            bounds.min_reward[j] = lo + r;
                        }
                        if hi + r > bounds.max_reward[j] {
                            bounds.max_reward[j] = hi + r;
                        }
                    }
                }
            }
        }
    }
    bounds
}
