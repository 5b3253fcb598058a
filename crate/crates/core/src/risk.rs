//! Exact entropic-risk value functions.
//!
//! The entropic value of a policy is `V^π_h(s) = (1/β)·log E[e^{β·ΣR}]`. Its
//! Bellman recursion is multiplicative in the exponential domain:
//! `e^{βQ_h(s,a)} = e^{β r_h(s,a)} · Σ_{s'} P_h(s'|s,a) e^{βV_{h+1}(s')}`.
//!
//! All backward induction here runs in the *centered* exponential domain,
//! carrying `y = e^{βV} − 1` instead of `e^{βV}`:
//!
//! ```text
//! yQ_h(s,a) = expm1(β r) + e^{β r} · Σ_{s'} P_h(s'|s,a) · yV_{h+1}(s')
//! ```
//!
//! which is the same recursion with the constant 1 subtracted out. For tiny
//! |β| the value information lives entirely in that offset from 1, so the
//! centered form preserves full relative precision where the plain form
//! would round it away; for large |β| the two are equally accurate. Both
//! sum terms share a sign (fixed by the sign of β), so no cancellation
//! occurs inside the recursion.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mdp::{MarkovPolicy, TabularMdp};

/// Default ceiling on `|β|·H`; `e^30 ≈ 1e13` leaves ample headroom in f64.
pub const DEFAULT_EXP_BUDGET: f64 = 30.0;

/// Admissible `|β|` range: the floor keeps `(1/β)·log` stable, the ceiling
/// keeps `e^{βH}` representable for any sane horizon.
pub const BETA_ABS_MIN: f64 = 1e-8;
pub const BETA_ABS_MAX: f64 = 50.0;

#[derive(Clone, Debug, PartialEq)]
pub enum RiskError {
    ZeroBeta,
    BetaOutOfRange {
        beta: f64,
    },
    ExpBudgetExceeded {
        beta: f64,
        horizon: usize,
        budget: f64,
    },
    EnumerationGuardExceeded {
        trajectories: u128,
        limit: u128,
    },
}

impl fmt::Display for RiskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskError::ZeroBeta => write!(
                f,
                "risk parameter beta must be nonzero (use the risk-neutral solver for beta = 0)"
            ),
            RiskError::BetaOutOfRange { beta } => {
                write!(
                    f,
                    "|beta| = {} outside admissible range [{BETA_ABS_MIN}, {BETA_ABS_MAX}]",
                    math::abs(*beta)
                )
            }
            RiskError::ExpBudgetExceeded {
                beta,
                horizon,
                budget,
            } => {
                write!(f, "|beta|*H = {} exceeds the representable budget {budget} (beta = {beta}, H = {horizon})", math::abs(*beta) * *horizon as f64)
            }
            RiskError::EnumerationGuardExceeded {
                trajectories,
                limit,
            } => {
                write!(
                    f,
                    "trajectory enumeration of {trajectories} paths exceeds the guard {limit}"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RiskError {}

/// The risk parameter β ≠ 0 plus the representable-budget ceiling on |β|·H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskParams {
    beta: f64,
    exp_budget: f64,
}

impl RiskParams {
    pub fn new(beta: f64) -> Result<Self, RiskError> {
        if beta == 0.0 || beta.is_nan() {
            return Err(RiskError::ZeroBeta);
        }
        let mag = math::abs(beta);
        if !(BETA_ABS_MIN..=BETA_ABS_MAX).contains(&mag) {
            return Err(RiskError::BetaOutOfRange { beta });
        }
        Ok(Self {
            beta,
            exp_budget: DEFAULT_EXP_BUDGET,
        })
    }

    pub fn with_exp_budget(mut self, budget: f64) -> Self {
        self.exp_budget = budget;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn exp_budget(&self) -> f64 {
        self.exp_budget
    }

    pub fn is_risk_seeking(&self) -> bool {
        self.beta > 0.0
    }

    fn check_horizon(&self, horizon: usize) -> Result<(), RiskError> {
        if math::abs(self.beta) * horizon as f64 > self.exp_budget {
            return Err(RiskError::ExpBudgetExceeded {
                beta: self.beta,
                horizon,
                budget: self.exp_budget,
            });
        }
        Ok(())
    }
}

/// Entropic value tables for one policy (or the optimum): log-domain `V`/`Q`
/// plus their exponential-domain twins, stored centered (`e^{βV} − 1`).
///
/// `V` is indexed by `h ∈ 1..=H+1` (the `H+1` row is identically 0), `Q` by
/// `h ∈ 1..=H`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskValueTables {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    beta: f64,
    v: Vec<f64>,
    q: Vec<f64>,
    exp_v_minus_one: Vec<f64>,
    exp_q_minus_one: Vec<f64>,
}

impl RiskValueTables {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn v_index(&self, h: usize, s: usize) -> usize {
        debug_assert!((1..=self.horizon + 1).contains(&h));
        debug_assert!(s < self.num_states);
        (h - 1) * self.num_states + s
    }

    #[inline]
    fn q_index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!((1..=self.horizon).contains(&h));
        debug_assert!(s < self.num_states && a < self.num_actions);
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    /// `V_h(s)`, `h ∈ 1..=H+1`.
    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[self.v_index(h, s)]
    }

    /// `Q_h(s, a)`, `h ∈ 1..=H`.
    #[inline]
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.q_index(h, s, a)]
    }

    /// `e^{β·V_h(s)}`.
    #[inline]
    pub fn exp_v(&self, h: usize, s: usize) -> f64 {
        1.0 + self.exp_v_minus_one[self.v_index(h, s)]
    }

    /// `e^{β·Q_h(s,a)}`.
    #[inline]
    pub fn exp_q(&self, h: usize, s: usize, a: usize) -> f64 {
        1.0 + self.exp_q_minus_one[self.q_index(h, s, a)]
    }

    /// `e^{β·V_h(s)} − 1`, full relative precision.
    #[inline]
    pub fn exp_v_minus_one(&self, h: usize, s: usize) -> f64 {
        self.exp_v_minus_one[self.v_index(h, s)]
    }

    /// `e^{β·Q_h(s,a)} − 1`, full relative precision.
    #[inline]
    pub fn exp_q_minus_one(&self, h: usize, s: usize, a: usize) -> f64 {
        self.exp_q_minus_one[self.q_index(h, s, a)]
    }
}

/// Whether `candidate` improves on `incumbent` in the log domain, comparing
/// centered exponential values (strict improvement; equal keeps the
/// incumbent, so ascending scans break ties toward the lowest index).
#[inline]
fn improves(beta: f64, candidate: f64, incumbent: f64) -> bool {
    if beta > 0.0 {
        candidate > incumbent
    } else {
        candidate < incumbent
    }
}

fn backward_induction(
    mdp: &TabularMdp,
    params: &RiskParams,
    pi: Option<&MarkovPolicy>,
) -> Result<(RiskValueTables, MarkovPolicy), RiskError> {
    params.check_horizon(mdp.horizon())?;
    let beta = params.beta();
    let (horizon, num_states, num_actions) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());

    let mut y_v = vec![0.0; (horizon + 1) * num_states];
    let mut y_q = vec![0.0; horizon * num_states * num_actions];
    let mut greedy = MarkovPolicy::zeros(horizon, num_states);

    for h in (1..=horizon).rev() {
        for s in 0..num_states {
            let mut best_a = 0usize;
            let mut best_y = f64::NAN;
            for a in 0..num_actions {
                let row = mdp.transition_row(h, s, a);
                let mut t = 0.0;
                for (next, &p) in row.iter().enumerate() {
                    if p != 0.0 {
                        t += p * y_v[h * num_states + next];
                    }
                }
                let r = mdp.reward(h, s, a);
                let y = math::expm1(beta * r) + math::exp(beta * r) * t;
                y_q[((h - 1) * num_states + s) * num_actions + a] = y;
                if a == 0 || improves(beta, y, best_y) {
                    best_a = a;
                    best_y = y;
                }
            }
            let (chosen_a, chosen_y) = match pi {
                Some(pi) => {
                    let a = pi.action(h, s);
                    (a, y_q[((h - 1) * num_states + s) * num_actions + a])
                }
                None => (best_a, best_y),
            };
            greedy.set_action(h, s, chosen_a);
            y_v[(h - 1) * num_states + s] = chosen_y;
        }
    }

    let v = y_v.iter().map(|&y| math::ln_1p(y) / beta).collect();
    let q = y_q.iter().map(|&y| math::ln_1p(y) / beta).collect();
    Ok((
        RiskValueTables {
            horizon,
            num_states,
            num_actions,
            beta,
            v,
            q,
            exp_v_minus_one: y_v,
            exp_q_minus_one: y_q,
        },
        greedy,
    ))
}

/// Optimal entropic value tables and a greedy optimal policy, by backward
/// induction in the exponential domain. Argmax ties resolve to the lowest
/// action index.
pub fn solve_optimal(
    mdp: &TabularMdp,
    params: &RiskParams,
) -> Result<(RiskValueTables, MarkovPolicy), RiskError> {
    backward_induction(mdp, params, None)
}

/// Entropic value tables of a fixed deterministic Markov policy.
pub fn evaluate_policy(
    mdp: &TabularMdp,
    pi: &MarkovPolicy,
    params: &RiskParams,
) -> Result<RiskValueTables, RiskError> {
    backward_induction(mdp, params, Some(pi)).map(|(tables, _)| tables)
}

/// Ceiling on the brute-force trajectory count (`S^H`).
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// Direct evaluation of the defining expectation: enumerates every
/// positive-probability trajectory under `pi` from the initial state and
/// returns `(1/β)·log Σ_τ Pr[τ]·e^{β·R(τ)}`.
///
/// This is the independent oracle for [`evaluate_policy`]; it shares no code
/// with the backward induction. The sum is accumulated as
/// `Σ_τ Pr[τ]·(e^{β·R(τ)} − 1)` (all terms share the sign of β) so the
/// comparison stays meaningful at tiny |β|.
pub fn brute_force_value(
    mdp: &TabularMdp,
    pi: &MarkovPolicy,
    params: &RiskParams,
) -> Result<f64, RiskError> {
    params.check_horizon(mdp.horizon())?;
    let trajectories = (mdp.num_states() as u128).saturating_pow(mdp.horizon() as u32);
    if trajectories > ENUMERATION_GUARD {
        return Err(RiskError::EnumerationGuardExceeded {
            trajectories,
            limit: ENUMERATION_GUARD,
        });
    }

    struct Walk<'a> {
        mdp: &'a TabularMdp,
        pi: &'a MarkovPolicy,
        beta: f64,
        acc: f64,
    }

    impl Walk<'_> {
        fn descend(&mut self, h: usize, s: usize, prob: f64, reward_sum: f64) {
            if h > self.mdp.horizon() {
                self.acc += prob * math::expm1(self.beta * reward_sum);
                return;
            }
            let a = self.pi.action(h, s);
            let r = self.mdp.reward(h, s, a);
            for (next, &p) in self.mdp.transition_row(h, s, a).iter().enumerate() {
                if p > 0.0 {
                    self.descend(h + 1, next, prob * p, reward_sum + r);
                }
            }
        }
    }

    let mut walk = Walk {
        mdp,
        pi,
        beta: params.beta(),
        acc: 0.0,
    };
    walk.descend(1, mdp.initial_state(), 1.0, 0.0);
    Ok(math::ln_1p(walk.acc) / params.beta())
}

/// Standard (risk-neutral) value tables: `V` indexed by `h ∈ 1..=H+1`,
/// `Q` by `h ∈ 1..=H`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskNeutralTables {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    v: Vec<f64>,
    q: Vec<f64>,
}

impl RiskNeutralTables {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        debug_assert!((1..=self.horizon + 1).contains(&h));
        self.v[(h - 1) * self.num_states + s]
    }

    #[inline]
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        debug_assert!((1..=self.horizon).contains(&h));
        self.q[((h - 1) * self.num_states + s) * self.num_actions + a]
    }
}

/// Linear Bellman backward induction. With `pi` absent computes the optimal
/// tables (max over actions, lowest-index tie-break); with `pi` present,
/// evaluates that policy.
pub fn solve_risk_neutral(mdp: &TabularMdp, pi: Option<&MarkovPolicy>) -> RiskNeutralTables {
    let (horizon, num_states, num_actions) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut v = vec![0.0; (horizon + 1) * num_states];
    let mut q = vec![0.0; horizon * num_states * num_actions];
    for h in (1..=horizon).rev() {
        for s in 0..num_states {
            let mut best = f64::NAN;
            for a in 0..num_actions {
                let row = mdp.transition_row(h, s, a);
                let mut t = 0.0;
                for (next, &p) in row.iter().enumerate() {
                    if p != 0.0 {
                        t += p * v[h * num_states + next];
                    }
                }
                let value = mdp.reward(h, s, a) + t;
                q[((h - 1) * num_states + s) * num_actions + a] = value;
                if a == 0 || value > best {
                    best = value;
                }
            }
            v[(h - 1) * num_states + s] = match pi {
                Some(pi) => q[((h - 1) * num_states + s) * num_actions + pi.action(h, s)],
                None => best,
            };
        }
    }
    RiskNeutralTables {
        horizon,
        num_states,
        num_actions,
        v,
        q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rng::RngStream;

    /// S-state deterministic chain with all rewards 1.
    fn all_ones_chain(horizon: usize) -> TabularMdp {
        let num_states = 3;
        let num_actions = 2;
        let mut transitions = vec![0.0; horizon * num_states * num_actions * num_states];
        let rewards = vec![1.0; horizon * num_states * num_actions];
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let next = (s + 1) % num_states;
                    transitions[((h * num_states + s) * num_actions + a) * num_states + next] = 1.0;
                }
            }
        }
        TabularMdp::new(num_states, num_actions, horizon, 0, rewards, transitions).unwrap()
    }

    #[test]
    fn deterministic_chain_value_is_horizon() {
        let mdp = all_ones_chain(3);
        for beta in [1.3, -0.4, 2.0, -2.0] {
            let params = RiskParams::new(beta).unwrap();
            let (tables, _) = solve_optimal(&mdp, &params).unwrap();
            assert!((tables.v(1, 0) - 3.0).abs() < 1e-12, "beta {beta}");
            // any policy attains H when every reward is 1
            let mut rng = RngStream::new(5, 0);
            let pi = MarkovPolicy::random(3, 3, 2, &mut rng);
            let eval = evaluate_policy(&mdp, &pi, &params).unwrap();
            assert!((eval.v(1, 0) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_step_two_action_values() {
        // H=1, one state, a0 reward 1, a1 reward 0
        let mdp = TabularMdp::new(1, 2, 1, 0, vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        for beta in [0.7, -0.7, 2.0] {
            let params = RiskParams::new(beta).unwrap();
            let (tables, pi) = solve_optimal(&mdp, &params).unwrap();
            assert!((tables.q(1, 0, 0) - 1.0).abs() < 1e-12);
            assert!(tables.q(1, 0, 1).abs() < 1e-12);
            assert!((tables.v(1, 0) - 1.0).abs() < 1e-12);
            assert_eq!(pi.action(1, 0), 0);
        }
    }

    #[test]
    fn bandit_closed_form_value() {
        // two-outcome closed form: V*_1(s0) = (1/β)·log(p1·e^{β(H-1)} + (1-p1))
        let params = instances::LowerBoundParams::new(
            1.0,
            3,
            instances::BetaRegime::LargeBeta,
            None,
            instances::BanditKind::BanditI,
        )
        .unwrap();
        let mdp = instances::lower_bound_mdp(&params);
        let rp = RiskParams::new(1.0).unwrap();
        let (tables, pi) = solve_optimal(&mdp, &rp).unwrap();
        let (arm1, _) = params.success_probs();
        let expected = (arm1 * (2.0f64).exp() + (1.0 - arm1)).ln();
        assert!((tables.v(1, 0) - expected).abs() < 1e-12);
        assert_eq!(pi.action(1, 0), 0);
    }

    #[test]
    fn greedy_policy_attains_optimum() {
        let mdp = instances::random_mdp(12, 4, 3, 4, 3);
        for beta in [1.1, -0.9] {
            let params = RiskParams::new(beta).unwrap();
            let (tables, pi) = solve_optimal(&mdp, &params).unwrap();
            let eval = evaluate_policy(&mdp, &pi, &params).unwrap();
            for h in 1..=mdp.horizon() + 1 {
                for s in 0..mdp.num_states() {
                    assert!((tables.v(h, s) - eval.v(h, s)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn policy_evaluation_matches_brute_force() {
        let mdp = instances::random_mdp(31, 3, 2, 3, 3);
        let mut rng = RngStream::new(8, 0);
        let pi = MarkovPolicy::random(3, 3, 2, &mut rng);
        let params = RiskParams::new(-0.7).unwrap();
        let eval = evaluate_policy(&mdp, &pi, &params).unwrap();
        let oracle = brute_force_value(&mdp, &pi, &params).unwrap();
        let rel = (eval.v(1, mdp.initial_state()) - oracle).abs() / oracle.abs().max(1.0);
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn brute_force_on_deterministic_mdp() {
        let mdp = all_ones_chain(4);
        let pi = MarkovPolicy::zeros(4, 3);
        let params = RiskParams::new(1.5).unwrap();
        let value = brute_force_value(&mdp, &pi, &params).unwrap();
        assert!((value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_two_outcome_closed_form() {
        let params = instances::LowerBoundParams::new(
            -1.0,
            3,
            instances::BetaRegime::LargeBeta,
            None,
            instances::BanditKind::BanditI,
        )
        .unwrap();
        let mdp = instances::lower_bound_mdp(&params);
        let rp = RiskParams::new(-1.0).unwrap();
        let pi = MarkovPolicy::zeros(3, 3);
        // success_probs already applies the β-sign flip
        let (success, _) = params.success_probs();
        let expected = (success * (-2.0f64).exp() + (1.0 - success)).ln() / -1.0;
        let value = brute_force_value(&mdp, &pi, &rp).unwrap();
        assert!((value - expected).abs() < 1e-12);
    }

    #[test]
    fn monotone_optimality_over_random_policies() {
        let mdp = instances::random_mdp(44, 4, 3, 3, 2);
        for beta in [0.8, -0.8] {
            let params = RiskParams::new(beta).unwrap();
            let (opt, _) = solve_optimal(&mdp, &params).unwrap();
            let mut rng = RngStream::new(beta.to_bits(), 1);
            for _ in 0..20 {
                let pi = MarkovPolicy::random(3, 4, 3, &mut rng);
                let eval = evaluate_policy(&mdp, &pi, &params).unwrap();
                for h in 1..=3 {
                    for s in 0..4 {
                        assert!(opt.v(h, s) >= eval.v(h, s) - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn values_stay_in_bounds() {
        let mdp = instances::random_mdp(3, 4, 2, 4, 4);
        for beta in [2.0, -2.0, 1e-6, -1e-6] {
            let params = RiskParams::new(beta).unwrap();
            let (tables, _) = solve_optimal(&mdp, &params).unwrap();
            for h in 1..=4 {
                for s in 0..4 {
                    let v = tables.v(h, s);
                    assert!(
                        v >= -1e-12 && v <= (4 - h + 1) as f64 + 1e-12,
                        "V_{h}({s}) = {v} at beta {beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn exp_log_tables_cohere() {
        let mdp = instances::random_mdp(71, 3, 3, 3, 2);
        let params = RiskParams::new(-1.4).unwrap();
        let (tables, _) = solve_optimal(&mdp, &params).unwrap();
        for h in 1..=4 {
            for s in 0..3 {
                let direct = (params.beta() * tables.v(h, s)).exp();
                let rel = (tables.exp_v(h, s) - direct).abs() / direct;
                assert!(rel < 1e-12);
            }
        }
        for h in 1..=3 {
            for s in 0..3 {
                for a in 0..3 {
                    let direct = (params.beta() * tables.q(h, s, a)).exp();
                    let rel = (tables.exp_q(h, s, a) - direct).abs() / direct;
                    assert!(rel < 1e-12);
                }
            }
        }
        // terminal row
        for s in 0..3 {
            assert_eq!(tables.v(4, s), 0.0);
            assert_eq!(tables.exp_v(4, s), 1.0);
        }
    }

    #[test]
    fn risk_neutral_matches_tiny_beta() {
        let mdp = instances::random_mdp(15, 3, 2, 4, 3);
        let neutral = solve_risk_neutral(&mdp, None);
        let params = RiskParams::new(1e-6).unwrap();
        let (tables, _) = solve_optimal(&mdp, &params).unwrap();
        for h in 1..=4 {
            for s in 0..3 {
                assert!((tables.v(h, s) - neutral.v(h, s)).abs() < 1e-5);
            }
        }
        assert!((neutral.v(1, 0) - solve_risk_neutral(&mdp, None).v(1, 0)).abs() == 0.0);
    }

    #[test]
    fn risk_neutral_bandit_expectation() {
        let params = instances::LowerBoundParams::new(
            1.0,
            3,
            instances::BetaRegime::LargeBeta,
            None,
            instances::BanditKind::BanditI,
        )
        .unwrap();
        let mdp = instances::lower_bound_mdp(&params);
        let neutral = solve_risk_neutral(&mdp, None);
        let (arm1, _) = params.success_probs();
        assert!((neutral.v(1, 0) - arm1 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn beta_continuity_shrinks_linearly() {
        let mdp = instances::random_mdp(58, 3, 2, 3, 3);
        let neutral = solve_risk_neutral(&mdp, None);
        let max_diff = |beta: f64| {
            let params = RiskParams::new(beta).unwrap();
            let (tables, _) = solve_optimal(&mdp, &params).unwrap();
            let mut worst = 0.0f64;
            for h in 1..=3 {
                for s in 0..3 {
                    worst = worst.max((tables.v(h, s) - neutral.v(h, s)).abs());
                }
            }
            worst
        };
        for sign in [1.0, -1.0] {
            let coarse = max_diff(sign * 1e-4);
            let fine = max_diff(sign * 1e-5);
            let ratio = fine / coarse;
            assert!(ratio > 0.05 && ratio < 0.15, "ratio {ratio}");
        }
    }

    #[test]
    fn parameter_guards() {
        assert!(matches!(RiskParams::new(0.0), Err(RiskError::ZeroBeta)));
        assert!(matches!(
            RiskParams::new(1e-9),
            Err(RiskError::BetaOutOfRange { .. })
        ));
        assert!(matches!(
            RiskParams::new(-60.0),
            Err(RiskError::BetaOutOfRange { .. })
        ));
        let mdp = all_ones_chain(31);
        let params = RiskParams::new(1.0).unwrap();
        assert!(matches!(
            solve_optimal(&mdp, &params),
            Err(RiskError::ExpBudgetExceeded { .. })
        ));
        let roomy = RiskParams::new(1.0).unwrap().with_exp_budget(40.0);
        assert!(solve_optimal(&mdp, &roomy).is_ok());
    }

    #[test]
    fn enumeration_guard_trips() {
        let mdp = instances::random_mdp(2, 10, 2, 7, 3);
        let pi = MarkovPolicy::zeros(7, 10);
        let params = RiskParams::new(0.5).unwrap();
        assert!(matches!(
            brute_force_value(&mdp, &pi, &params),
            Err(RiskError::EnumerationGuardExceeded { .. })
        ));
    }
}
