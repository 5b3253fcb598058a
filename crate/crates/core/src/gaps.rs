//! Cascaded sub-optimality gaps and their companions.
//!
//! The risk-sensitive gap at `(h, s, a)` given a trajectory prefix with
//! cumulative reward `R` is
//!
//! ```text
//! Δ_{h,β}(s, a; R) = ψ_β · e^{βR} · [e^{β·V*_h(s)} − e^{β·Q*_h(s,a)}]
//! ```
//!
//! with the normalizer `ψ_β = 1/β` for β > 0 and `e^{−βH}/β` for β < 0. The
//! semi-normalized form divides out `ψ̄_β` (1 for β > 0, `e^{−βH}` for
//! β < 0), so `Δ = ψ̄_β · Δ̄` exactly. A gap depends on the prefix only
//! through the scalar `R`, which is what lets the minimal-gap search
//! collapse the trajectory space to per-(h, s) reward extrema.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mdp::{self, MarkovPolicy, TabularMdp};
use crate::risk::{RiskNeutralTables, RiskValueTables};

/// Default absolute tolerance (semi-normalized scale) separating true ties
/// from rounding in the "minimum non-zero gap" search.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum GapError {
    /// Every gap is zero (all actions optimal everywhere).
    NoNonzeroGap,
}

impl fmt::Display for GapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapError::NoNonzeroGap => write!(
                f,
                "no nonzero gap exists: every action is optimal at every location"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GapError {}

/// The β-dependent gap normalizers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalizers {
    /// `ψ_β`: `1/β` for β > 0, `e^{−βH}/β` for β < 0.
    pub normalizer: f64,
    /// `ψ̄_β`: 1 for β > 0, `e^{−βH}` for β < 0.
    pub semi_normalizer: f64,
    beta: f64,
    horizon: usize,
}

impl Normalizers {
    pub fn new(beta: f64, horizon: usize) -> Self {
        debug_assert!(beta != 0.0);
        let semi_normalizer = if beta > 0.0 {
            1.0
        } else {
            math::exp(-beta * horizon as f64)
        };
        Self {
            normalizer: semi_normalizer / beta,
            semi_normalizer,
            beta,
            horizon,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapKind {
    Cascaded,
    SemiNormalized,
    RiskNeutral,
    Alternative,
    Controlled,
    Optimism,
}

/// One gap evaluation at a location, tagged with the prefix reward it used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapValue {
    pub value: f64,
    pub kind: GapKind,
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub prefix_reward: f64,
}

/// `Δ_{h,β}(s, a; R)`: nonnegative for both signs of β.
pub fn cascaded_gap(
    tables: &RiskValueTables,
    h: usize,
    s: usize,
    a: usize,
    prefix_reward: f64,
) -> GapValue {
    let norms = Normalizers::new(tables.beta(), tables.horizon());
    let semi = semi_normalized_gap(tables, h, s, a, prefix_reward);
    GapValue {
        value: norms.semi_normalizer * semi.value,
        kind: GapKind::Cascaded,
        ..semi
    }
}

/// `Δ̄_{h}(s, a; R) = (1/β)·e^{βR}·[e^{βV*_h(s)} − e^{βQ*_h(s,a)}]`.
pub fn semi_normalized_gap(
    tables: &RiskValueTables,
    h: usize,
    s: usize,
    a: usize,
    prefix_reward: f64,
) -> GapValue {
    let beta = tables.beta();
    let bracket = tables.exp_v_minus_one(h, s) - tables.exp_q_minus_one(h, s, a);
    GapValue {
        value: math::exp(beta * prefix_reward) * bracket / beta,
        kind: GapKind::SemiNormalized,
        h,
        s,
        a,
        prefix_reward,
    }
}

/// `Δ̃_h(s,a) = Ṽ*_h(s) − Q̃*_h(s,a)` (risk-neutral).
pub fn risk_neutral_gap(neutral: &RiskNeutralTables, h: usize, s: usize, a: usize) -> GapValue {
    GapValue {
        value: neutral.v(h, s) - neutral.q(h, s, a),
        kind: GapKind::RiskNeutral,
        h,
        s,
        a,
        prefix_reward: 0.0,
    }
}

/// The unnormalized variant `sign(β)·e^{βR}·[e^{βV*} − e^{βQ*}]`, which
/// degenerates as β → 0; provided for normalization comparisons.
pub fn alternative_gap(
    tables: &RiskValueTables,
    h: usize,
    s: usize,
    a: usize,
    prefix_reward: f64,
) -> GapValue {
    let beta = tables.beta();
    let sign = if beta > 0.0 { 1.0 } else { -1.0 };
    let bracket = tables.exp_v_minus_one(h, s) - tables.exp_q_minus_one(h, s, a);
    GapValue {
        value: sign * math::exp(beta * prefix_reward) * bracket,
        kind: GapKind::Alternative,
        h,
        s,
        a,
        prefix_reward,
    }
}

/// `Δ̄^π_h(s, a; R)`: the π-controlled gap, with `Q^π` in place of `Q*`.
pub fn controlled_gap(
    optimal: &RiskValueTables,
    pi_eval: &RiskValueTables,
    h: usize,
    s: usize,
    a: usize,
    prefix_reward: f64,
) -> GapValue {
    let beta = optimal.beta();
    let bracket = optimal.exp_v_minus_one(h, s) - pi_eval.exp_q_minus_one(h, s, a);
    GapValue {
        value: math::exp(beta * prefix_reward) * bracket / beta,
        kind: GapKind::Controlled,
        h,
        s,
        a,
        prefix_reward,
    }
}

/// `Δ̄^k_h(s, a; R)`: the optimism gap of an optimistic estimate
/// `q_estimate` (log domain) against `V*_h(s)`. Positive when the estimate
/// is optimistic.
pub fn optimism_gap(
    optimal: &RiskValueTables,
    q_estimate: f64,
    h: usize,
    s: usize,
    a: usize,
    prefix_reward: f64,
) -> GapValue {
    let beta = optimal.beta();
    let bracket = math::expm1(beta * q_estimate) - optimal.exp_v_minus_one(h, s);
    GapValue {
        value: math::exp(beta * prefix_reward) * bracket / beta,
        kind: GapKind::Optimism,
        h,
        s,
        a,
        prefix_reward,
    }
}

/// Which trajectory prefixes participate in the minimal-gap search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReachabilityMode {
    /// Positive-probability prefixes consistent with being at `s` at step
    /// `h` (the default).
    ReachableOnly,
    /// All prefix rewards in `[0, h−1]`, ignoring the dynamics.
    Unconstrained,
}

impl ReachabilityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReachabilityMode::ReachableOnly => "reachable_only",
            ReachabilityMode::Unconstrained => "unconstrained",
        }
    }
}

/// The minimum nonzero cascaded gap and its witness.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalGapReport {
    /// Cascaded scale: `Δ_min = ψ̄_β · Δ̄_min`.
    pub delta_min: f64,
    /// Semi-normalized scale.
    pub semi_delta_min: f64,
    pub witness: GapWitness,
    pub mode: ReachabilityMode,
    pub zero_tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapWitness {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    /// The extremal prefix reward realizing the minimum.
    pub prefix_reward: f64,
}

/// Per-location gap summary as used by gap reports: each location carries
/// the minimizing prefix reward for the chosen mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocationGap {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub reachable: bool,
    pub prefix_reward: f64,
    pub semi_normalized: f64,
    pub cascaded: f64,
    pub alternative: f64,
}

/// The minimizing prefix reward at `(h, s)`: exponential monotonicity makes
/// `e^{βR}` smallest at `R = min` for β > 0 and at `R = max` for β < 0.
fn minimizing_prefix_reward(
    beta: f64,
    mode: ReachabilityMode,
    bounds: &mdp::PrefixRewardBounds,
    h: usize,
    s: usize,
) -> Option<f64> {
    match mode {
        ReachabilityMode::ReachableOnly => {
            if !bounds.is_reachable(h, s) {
                return None;
            }
            Some(if beta > 0.0 {
                bounds.min_reward(h, s)
            } else {
                bounds.max_reward(h, s)
            })
        }
        ReachabilityMode::Unconstrained => Some(if beta > 0.0 { 0.0 } else { (h - 1) as f64 }),
    }
}

/// Scans every location for its minimizing-prefix semi-normalized gap.
/// Unreachable locations appear with `reachable: false` and a zero gap in
/// `ReachableOnly` mode.
pub fn location_gaps(
    mdp: &TabularMdp,
    tables: &RiskValueTables,
    mode: ReachabilityMode,
) -> Vec<LocationGap> {
    let beta = tables.beta();
    let norms = Normalizers::new(beta, tables.horizon());
    let bounds = mdp::reachable_prefix_reward_bounds(mdp);
    let mut out = Vec::with_capacity(mdp.horizon() * mdp.num_states() * mdp.num_actions());
    for h in 1..=mdp.horizon() {
        for s in 0..mdp.num_states() {
            let prefix = minimizing_prefix_reward(beta, mode, &bounds, h, s);
            for a in 0..mdp.num_actions() {
                match prefix {
                    Some(prefix_reward) => {
                        let semi = semi_normalized_gap(tables, h, s, a, prefix_reward);
                        out.push(LocationGap {
                            h,
                            s,
                            a,
                            reachable: bounds.is_reachable(h, s),
                            prefix_reward,
                            semi_normalized: semi.value,
                            cascaded: norms.semi_normalizer * semi.value,
                            alternative: alternative_gap(tables, h, s, a, prefix_reward).value,
                        });
                    }
                    None => out.push(LocationGap {
                        h,
                        s,
                        a,
                        reachable: false,
                        prefix_reward: f64::NAN,
                        semi_normalized: 0.0,
                        cascaded: 0.0,
                        alternative: 0.0,
                    }),
                }
            }
        }
    }
    out
}

/// The minimum nonzero cascaded gap over locations and (mode-dependent)
/// prefixes. `zero_tolerance` defaults to [`DEFAULT_ZERO_TOLERANCE`] on the
/// semi-normalized scale.
pub fn minimal_gap(
    mdp: &TabularMdp,
    tables: &RiskValueTables,
    mode: ReachabilityMode,
    zero_tolerance: Option<f64>,
) -> Result<MinimalGapReport, GapError> {
    let tol = zero_tolerance.unwrap_or(DEFAULT_ZERO_TOLERANCE);
    let norms = Normalizers::new(tables.beta(), tables.horizon());
    let mut best: Option<(f64, GapWitness)> = None;
    for loc in location_gaps(mdp, tables, mode) {
        if !loc.prefix_reward.is_nan() && loc.semi_normalized > tol {
            let better = match &best {
                Some((incumbent, _)) => loc.semi_normalized < *incumbent,
                None => true,
            };
            if better {
                best = Some((
                    loc.semi_normalized,
                    GapWitness {
                        h: loc.h,
                        s: loc.s,
                        a: loc.a,
                        prefix_reward: loc.prefix_reward,
                    },
                ));
            }
        }
    }
    match best {
        Some((semi, witness)) => Ok(MinimalGapReport {
            delta_min: norms.semi_normalizer * semi,
            semi_delta_min: semi,
            witness,
            mode,
            zero_tolerance: tol,
        }),
        None => Err(GapError::NoNonzeroGap),
    }
}

/// Residual of the gap Bellman-difference identity at `(h, s)` for the
/// policy action `a = π_h(s)`:
///
/// ```text
/// D^π_h(s) − Δ_h(s, a; R) − E_{s'~P_h(·|s,a)}[D^π_{h+1}(s')]
/// ```
///
/// with `D^π_h = (ψ̄_β/β)·e^{βR}·(e^{βV*_h} − e^{βV^π_h})` and the inner
/// `D^π_{h+1}` evaluated at prefix reward `R + r_h(s,a)`. Vanishes
/// identically; the return value is the numerical residual.
pub fn bellman_difference_residual(
    mdp: &TabularMdp,
    optimal: &RiskValueTables,
    pi: &MarkovPolicy,
    pi_eval: &RiskValueTables,
    h: usize,
    s: usize,
    prefix_reward: f64,
) -> f64 {
    let beta = optimal.beta();
    let norms = Normalizers::new(beta, optimal.horizon());
    let scale = norms.semi_normalizer / beta;
    let a = pi.action(h, s);

    let here = math::exp(beta * prefix_reward);
    let d_h = scale * here * (optimal.exp_v_minus_one(h, s) - pi_eval.exp_v_minus_one(h, s));
    let gap = norms.semi_normalizer * semi_normalized_gap(optimal, h, s, a, prefix_reward).value;

    let next_prefix = math::exp(beta * (prefix_reward + mdp.reward(h, s, a)));
    let mut expectation = 0.0;
    for (next, &p) in mdp.transition_row(h, s, a).iter().enumerate() {
        if p != 0.0 {
            expectation +=
                p * (optimal.exp_v_minus_one(h + 1, next) - pi_eval.exp_v_minus_one(h + 1, next));
        }
    }
    d_h - gap - scale * next_prefix * expectation
}

/// Risk-neutral analogue of [`bellman_difference_residual`]:
/// `D̃_h(s) − Δ̃_h(s,a) − E[D̃_{h+1}(s')]` with `D̃ = Ṽ* − Ṽ^π`.
pub fn risk_neutral_bellman_residual(
    mdp: &TabularMdp,
    optimal: &RiskNeutralTables,
    pi: &MarkovPolicy,
    pi_eval: &RiskNeutralTables,
    h: usize,
    s: usize,
) -> f64 {
    let a = pi.action(h, s);
    let d_h = optimal.v(h, s) - pi_eval.v(h, s);
    let gap = optimal.v(h, s) - optimal.q(h, s, a);
    let mut expectation = 0.0;
    for (next, &p) in mdp.transition_row(h, s, a).iter().enumerate() {
        if p != 0.0 {
            expectation += p * (optimal.v(h + 1, next) - pi_eval.v(h + 1, next));
        }
    }
    d_h - gap - expectation
}

/// Residual of the exponential-regret decomposition for policy `pi`:
///
/// ```text
/// (1/β)[e^{βV*_1} − e^{βV^π_1}](s1) − E_π[Σ_h Δ̄_h(s_h, π_h(s_h); τ^π_{h−1})]
/// ```
///
/// The expectation side is computed exactly by propagating
/// `W_h(s) = E[1{s_h = s}·e^{β R(τ^π_{h−1})}]` forward under `pi` (the gap
/// is linear in `e^{βR}`, so the weights are a sufficient statistic).
pub fn decomposition_residual(
    mdp: &TabularMdp,
    optimal: &RiskValueTables,
    pi: &MarkovPolicy,
    pi_eval: &RiskValueTables,
) -> f64 {
    let beta = optimal.beta();
    let (num_states, horizon) = (mdp.num_states(), mdp.horizon());

    let s1 = mdp.initial_state();
    let lhs = (optimal.exp_v_minus_one(1, s1) - pi_eval.exp_v_minus_one(1, s1)) / beta;

    let mut weights = alloc::vec![0.0; num_states];
    weights[s1] = 1.0;
    let mut rhs = 0.0;
    for h in 1..=horizon {
        let mut next_weights = alloc::vec![0.0; num_states];
        for (s, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let a = pi.action(h, s);
            let bracket = optimal.exp_v_minus_one(h, s) - optimal.exp_q_minus_one(h, s, a);
            rhs += w * bracket / beta;
            let growth = w * math::exp(beta * mdp.reward(h, s, a));
            for (next, &p) in mdp.transition_row(h, s, a).iter().enumerate() {
                if p != 0.0 {
                    next_weights[next] += growth * p;
                }
            }
        }
        weights = next_weights;
    }
    lhs - rhs
}
