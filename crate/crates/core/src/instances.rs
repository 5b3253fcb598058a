//! Hard and illustrative MDP instances, plus seeded random MDPs for test
//! corpora.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mdp::TabularMdp;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaRegime {
    /// `|β|(H−1) ≥ log 4`; the base success probability is `e^{−|β|(H−1)}`.
    LargeBeta,
    /// `|β|(H−1) ≤ log H`, `H ≥ 8`; the base success probability is `1/H`.
    SmallBeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BanditKind {
    BanditI,
    BanditII,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceError {
    /// The violated inequality, e.g. `|beta|*(H-1) >= log(4)`.
    pub constraint: &'static str,
    pub detail: f64,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lower-bound parameter constraint violated: {} (offending value {})",
            self.constraint, self.detail
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for InstanceError {}

/// Parameters of the two-armed hard instances. Arm probabilities derive from
/// a base success probability `u` fixed by the regime:
/// `p2 = u`, `p1 = q1 = p2 ± ξ`, `q2 = p2 ± 2ξ` (sign `+` for β > 0,
/// `−` for β < 0), so arm 1 is optimal on Bandit I and arm 2 on Bandit II
/// for both signs of β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundParams {
    beta: f64,
    horizon: usize,
    regime: BetaRegime,
    xi: f64,
    which: BanditKind,
}

impl LowerBoundParams {
    /// Validates the regime inequalities; `xi = None` picks the maximum
    /// admissible value for the regime.
    pub fn new(
        beta: f64,
        horizon: usize,
        regime: BetaRegime,
        xi: Option<f64>,
        which: BanditKind,
    ) -> Result<Self, InstanceError> {
        if beta == 0.0 {
            return Err(InstanceError {
                constraint: "beta != 0",
                detail: beta,
            });
        }
        let mag = math::abs(beta) * (horizon as f64 - 1.0);
        let xi_cap = match regime {
            BetaRegime::LargeBeta => {
                if horizon < 2 {
                    return Err(InstanceError {
                        constraint: "H >= 2",
                        detail: horizon as f64,
                    });
                }
                if mag < math::ln(4.0) {
                    return Err(InstanceError {
                        constraint: "|beta|*(H-1) >= log(4)",
                        detail: mag,
                    });
                }
                0.25 * math::exp(-mag)
            }
            BetaRegime::SmallBeta => {
                if horizon < 8 {
                    return Err(InstanceError {
                        constraint: "H >= 8",
                        detail: horizon as f64,
                    });
                }
                if mag > math::ln(horizon as f64) {
                    return Err(InstanceError {
                        constraint: "|beta|*(H-1) <= log(H)",
                        detail: mag,
                    });
                }
                0.25 / horizon as f64
            }
        };
        let xi = xi.unwrap_or(xi_cap);
        if xi <= 0.0 {
            return Err(InstanceError {
                constraint: "xi > 0",
                detail: xi,
            });
        }
        // tiny slack so the boundary value xi = cap survives float round-off
        if xi > xi_cap * (1.0 + 1e-12) {
            return Err(InstanceError {
                constraint: match regime {
                    BetaRegime::LargeBeta => "xi <= exp(-|beta|*(H-1))/4",
                    BetaRegime::SmallBeta => "xi <= 1/(4H)",
                },
                detail: xi,
            });
        }
        let params = Self {
            beta,
            horizon,
            regime,
            xi,
            which,
        };
        for (name, p) in [
            ("p1 in (0,1)", params.arm_params().0),
            ("p2 in (0,1)", params.arm_params().1),
        ] {
            if !(0.0 < p && p < 1.0) {
                return Err(InstanceError {
                    constraint: name,
                    detail: p,
                });
            }
        }
        Ok(params)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn regime(&self) -> BetaRegime {
        self.regime
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn which(&self) -> BanditKind {
        self.which
    }

    /// The regime's base success probability `u`.
    pub fn base_probability(&self) -> f64 {
        match self.regime {
            BetaRegime::LargeBeta => math::exp(-math::abs(self.beta) * (self.horizon as f64 - 1.0)),
            BetaRegime::SmallBeta => 1.0 / self.horizon as f64,
        }
    }

    /// Raw `(arm1, arm2)` probability parameters before the β-sign success
    /// flip.
    pub fn arm_params(&self) -> (f64, f64) {
        let p2 = self.base_probability();
        let sign = if self.beta < 0.0 { -1.0 } else { 1.0 };
        let first = p2 + sign * self.xi;
        match self.which {
            BanditKind::BanditI => (first, p2),
            BanditKind::BanditII => (first, p2 + sign * 2.0 * self.xi),
        }
    }

    /// Per-arm probability of landing in the rewarding absorbing state
    /// (the β-sign flip applied).
    pub fn success_probs(&self) -> (f64, f64) {
        let (a1, a2) = self.arm_params();
        if self.beta > 0.0 {
            (a1, a2)
        } else {
            (1.0 - a1, 1.0 - a2)
        }
    }

    /// Closed-form minimal semi-normalized gap
    /// `(1/|β|)·|e^{β(H−1)} − 1|·ξ` of the generated instance.
    pub fn semi_normalized_minimal_gap(&self) -> f64 {
        let b = self.beta;
        math::abs(math::expm1(b * (self.horizon as f64 - 1.0))) * self.xi / math::abs(b)
    }

    /// Episode count `⌊p2(1−p2)/ξ²⌋` suggested for lower-bound experiments;
    /// informational only.
    pub fn suggested_episodes(&self) -> u64 {
        let p2 = self.base_probability();
        math::floor(p2 * (1.0 - p2) / (self.xi * self.xi)) as u64
    }
}

/// The 3-state, 2-action, horizon-H embedding of the two-armed bandit:
/// state 0 chooses an arm at step 1, state 1 absorbs with unit reward,
/// state 2 absorbs with zero reward. State 0 is unreachable after step 1
/// and self-loops with zero reward to keep the kernel total.
pub fn lower_bound_mdp(params: &LowerBoundParams) -> TabularMdp {
    let (num_states, num_actions, horizon) = (3usize, 2usize, params.horizon());
    let mut rewards = vec![0.0; horizon * num_states * num_actions];
    let mut transitions = vec![0.0; horizon * num_states * num_actions * num_states];
    let (succ1, succ2) = params.success_probs();

    for h in 0..horizon {
        for a in 0..num_actions {
            rewards[(h * num_states + 1) * num_actions + a] = 1.0;
            let put = |t: &mut Vec<f64>, s: usize, next: usize, p: f64| {
                t[((h * num_states + s) * num_actions + a) * num_states + next] = p;
            };
            if h == 0 {
                let succ = if a == 0 { succ1 } else { succ2 };
                put(&mut transitions, 0, 1, succ);
                put(&mut transitions, 0, 2, 1.0 - succ);
            } else {
                put(&mut transitions, 0, 0, 1.0);
            }
            put(&mut transitions, 1, 1, 1.0);
            put(&mut transitions, 2, 2, 1.0);
        }
    }
    TabularMdp::new(num_states, num_actions, horizon, 0, rewards, transitions)
        .expect("bandit construction always yields a valid MDP")
}

/// All rewards 1 except at the last step, where only action 0 pays;
/// transitions are seeded random full-support rows. Every state value is
/// `H−h+1` regardless of β, so nonzero gaps exist only at `h = H`.
pub fn risk_consistency_mdp(
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    kernel_seed: u64,
) -> TabularMdp {
    assert!(num_states >= 1 && num_actions >= 1 && horizon >= 2);
    let mut rng = RngStream::new(kernel_seed, 0);
    let mut rewards = vec![1.0; horizon * num_states * num_actions];
    for s in 0..num_states {
        for a in 1..num_actions {
            rewards[((horizon - 1) * num_states + s) * num_actions + a] = 0.0;
        }
    }
    let mut transitions = vec![0.0; horizon * num_states * num_actions * num_states];
    for h in 0..horizon {
        for s in 0..num_states {
            for a in 0..num_actions {
                let base = ((h * num_states + s) * num_actions + a) * num_states;
                fill_dirichlet_row(&mut transitions[base..base + num_states], None, &mut rng);
            }
        }
    }
    TabularMdp::new(num_states, num_actions, horizon, 0, rewards, transitions)
        .expect("risk-consistency construction always yields a valid MDP")
}

/// Seeded random MDP. Each transition row is a normalized vector of
/// exponential draws over a random support of `support_size` states;
/// rewards are uniform in [0,1] quantized to 1e-6.
pub fn random_mdp(
    seed: u64,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    support_size: usize,
) -> TabularMdp {
    assert!(support_size >= 1 && support_size <= num_states);
    let mut rng = RngStream::new(seed, 0);
    let mut rewards = vec![0.0; horizon * num_states * num_actions];
    for r in rewards.iter_mut() {
        *r = math::floor(rng.next_f64() * 1e6) / 1e6;
    }
    let mut transitions = vec![0.0; horizon * num_states * num_actions * num_states];
    let mut support = Vec::with_capacity(support_size);
    for h in 0..horizon {
        for s in 0..num_states {
            for a in 0..num_actions {
                // sample the support without replacement (partial Fisher-Yates)
                let mut pool: Vec<usize> = (0..num_states).collect();
                support.clear();
                for i in 0..support_size {
                    let j = i + rng.next_below(num_states - i);
                    pool.swap(i, j);
                    support.push(pool[i]);
                }
                let base = ((h * num_states + s) * num_actions + a) * num_states;
                fill_dirichlet_row(
                    &mut transitions[base..base + num_states],
                    Some(&support),
                    &mut rng,
                );
            }
        }
    }
    TabularMdp::new(num_states, num_actions, horizon, 0, rewards, transitions)
        .expect("random construction always yields a valid MDP")
}

/// Writes a flat-Dirichlet row (normalized Exp(1) draws) over the given
/// support, or over all states when `support` is `None`.
fn fill_dirichlet_row(row: &mut [f64], support: Option<&[usize]>, rng: &mut RngStream) {
    let full: Vec<usize>;
    let support = match support {
        Some(s) => s,
        None => {
            full = (0..row.len()).collect();
            &full
        }
    };
    if support.len() == 1 {
        row[support[0]] = 1.0;
        return;
    }
    let mut total = 0.0;
    // draw in support order so the bytes depend only on (seed, draw index)
    let mut draws = Vec::with_capacity(support.len());
    for _ in 0..support.len() {
        let e = -math::ln_1p(-rng.next_f64());
        draws.push(e);
        total += e;
    }
    for (&s, &e) in support.iter().zip(&draws) {
        row[s] = e / total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaps;
    use crate::risk::{solve_optimal, RiskParams};

    #[test]
    fn regime_one_base_probability() {
        let params =
            LowerBoundParams::new(1.0, 3, BetaRegime::LargeBeta, None, BanditKind::BanditI)
                .unwrap();
        assert!((params.base_probability() - (-2.0f64).exp()).abs() < 1e-15);
        assert!((params.xi() - (-2.0f64).exp() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn bandit_two_differs_only_in_second_arm() {
        let one = LowerBoundParams::new(
            1.0,
            3,
            BetaRegime::LargeBeta,
            Some(0.02),
            BanditKind::BanditI,
        )
        .unwrap();
        let two = LowerBoundParams::new(
            1.0,
            3,
            BetaRegime::LargeBeta,
            Some(0.02),
            BanditKind::BanditII,
        )
        .unwrap();
        let (p1, p2) = one.arm_params();
        let (q1, q2) = two.arm_params();
        assert_eq!(p1, q1);
        assert!((q2 - (p2 + 2.0 * 0.02)).abs() < 1e-15);
        // β < 0 flips the offset sign
        let neg = LowerBoundParams::new(
            -1.0,
            3,
            BetaRegime::LargeBeta,
            Some(0.02),
            BanditKind::BanditII,
        )
        .unwrap();
        let (_, q2n) = neg.arm_params();
        assert!((q2n - (neg.base_probability() - 0.04)).abs() < 1e-15);
    }

    #[test]
    fn constraint_violations_name_the_inequality() {
        let err = LowerBoundParams::new(0.1, 3, BetaRegime::LargeBeta, None, BanditKind::BanditI)
            .unwrap_err();
        assert_eq!(err.constraint, "|beta|*(H-1) >= log(4)");
        let err = LowerBoundParams::new(0.3, 4, BetaRegime::SmallBeta, None, BanditKind::BanditI)
            .unwrap_err();
        assert_eq!(err.constraint, "H >= 8");
        let err = LowerBoundParams::new(1.0, 9, BetaRegime::SmallBeta, None, BanditKind::BanditI)
            .unwrap_err();
        assert_eq!(err.constraint, "|beta|*(H-1) <= log(H)");
        let err = LowerBoundParams::new(
            1.0,
            3,
            BetaRegime::LargeBeta,
            Some(0.2),
            BanditKind::BanditI,
        )
        .unwrap_err();
        assert_eq!(err.constraint, "xi <= exp(-|beta|*(H-1))/4");
    }

    #[test]
    fn optimal_arms_for_both_signs() {
        for beta in [1.0, -1.0] {
            let params = RiskParams::new(beta).unwrap();
            let one =
                LowerBoundParams::new(beta, 3, BetaRegime::LargeBeta, None, BanditKind::BanditI)
                    .unwrap();
            let (_, pi) = solve_optimal(&lower_bound_mdp(&one), &params).unwrap();
            assert_eq!(pi.action(1, 0), 0, "Bandit I optimal arm, beta {beta}");
            let two =
                LowerBoundParams::new(beta, 3, BetaRegime::LargeBeta, None, BanditKind::BanditII)
                    .unwrap();
            let (_, pi) = solve_optimal(&lower_bound_mdp(&two), &params).unwrap();
            assert_eq!(pi.action(1, 0), 1, "Bandit II optimal arm, beta {beta}");
        }
    }

    #[test]
    fn bandit_has_exactly_one_nonzero_gap_location() {
        let lb = LowerBoundParams::new(1.0, 3, BetaRegime::LargeBeta, None, BanditKind::BanditI)
            .unwrap();
        let mdp = lower_bound_mdp(&lb);
        let params = RiskParams::new(1.0).unwrap();
        let (tables, _) = solve_optimal(&mdp, &params).unwrap();
        let mut nonzero = Vec::new();
        for h in 1..=3 {
            for s in 0..3 {
                for a in 0..2 {
                    let gap = gaps::semi_normalized_gap(&tables, h, s, a, 0.0);
                    if gap.value > 1e-9 {
                        nonzero.push((h, s, a));
                    }
                }
            }
        }
        assert_eq!(nonzero, vec![(1, 0, 1)]);
    }

    #[test]
    fn risk_consistency_values_collapse() {
        let mdp = risk_consistency_mdp(3, 2, 4, 23);
        for beta in [1.0, -1.0, 0.3] {
            let params = RiskParams::new(beta).unwrap();
            let (tables, _) = solve_optimal(&mdp, &params).unwrap();
            for h in 1..=4 {
                for s in 0..3 {
                    assert!((tables.v(h, s) - (4 - h + 1) as f64).abs() < 1e-12);
                }
            }
            // gaps vanish before the last step
            for h in 1..4 {
                for s in 0..3 {
                    for a in 0..2 {
                        assert!(gaps::semi_normalized_gap(&tables, h, s, a, 0.0).value < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn risk_consistency_last_step_neutral_gap_is_one() {
        let mdp = risk_consistency_mdp(3, 3, 4, 29);
        let neutral = crate::risk::solve_risk_neutral(&mdp, None);
        for s in 0..3 {
            for a in 1..3 {
                let gap = gaps::risk_neutral_gap(&neutral, 4, s, a).value;
                assert!((gap - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalizer_keeps_gap_magnitudes_comparable_across_beta_signs() {
        // at the last step the bracket is e^{β·1} − 1 with prefix reward H−1;
        // the ψ-normalized gap stays within a factor e² across β = ±1 while
        // the sign-only variant diverges by ~e^{2H-1}
        let horizon = 3;
        let mdp = risk_consistency_mdp(2, 2, horizon, 31);
        let gap_pair = |beta: f64| {
            let params = RiskParams::new(beta).unwrap();
            let (tables, _) = solve_optimal(&mdp, &params).unwrap();
            let prefix = (horizon - 1) as f64;
            (
                gaps::cascaded_gap(&tables, horizon, 0, 1, prefix).value,
                gaps::alternative_gap(&tables, horizon, 0, 1, prefix).value,
            )
        };
        let (cascaded_pos, alternative_pos) = gap_pair(1.0);
        let (cascaded_neg, alternative_neg) = gap_pair(-1.0);
        let cascaded_ratio = cascaded_pos / cascaded_neg;
        let alternative_ratio = alternative_pos / alternative_neg;
        assert!(cascaded_ratio < alternative_ratio);
        let e = core::f64::consts::E;
        assert!(
            (cascaded_ratio - e * e).abs() < 1e-9,
            "ratio {cascaded_ratio}"
        );
        assert!(
            (alternative_ratio - e.powi(2 * horizon as i32 - 1)).abs() < 1e-6,
            "ratio {alternative_ratio}"
        );
    }

    #[test]
    fn suggested_episodes_matches_formula() {
        let lb = LowerBoundParams::new(1.0, 3, BetaRegime::LargeBeta, None, BanditKind::BanditI)
            .unwrap();
        let p2 = lb.base_probability();
        let xi = lb.xi();
        assert_eq!(
            lb.suggested_episodes(),
            (p2 * (1.0 - p2) / (xi * xi)) as u64
        );
    }

    #[test]
    fn random_mdp_with_unit_support_is_deterministic() {
        let mdp = random_mdp(100, 4, 2, 3, 1);
        for h in 1..=3 {
            for s in 0..4 {
                for a in 0..2 {
                    let row = mdp.transition_row(h, s, a);
                    assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
                    assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), 3);
                }
            }
        }
    }

    #[test]
    fn random_mdp_is_reproducible() {
        let a = random_mdp(5, 3, 2, 4, 2);
        let b = random_mdp(5, 3, 2, 4, 2);
        assert_eq!(a, b);
        let c = random_mdp(6, 3, 2, 4, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn random_rewards_are_quantized() {
        let mdp = random_mdp(8, 3, 2, 3, 2);
        for &r in mdp.rewards_raw() {
            let scaled = r * 1e6;
            assert!((scaled - libm::round(scaled)).abs() < 1e-6);
            assert!((0.0..=1.0).contains(&r));
        }
    }
}
