//! The `check` invariant battery: oracle equivalence, Bellman-difference
//! and decomposition residuals, and gap nonnegativity, all on a fixed
//! internal seed so repeated invocations agree byte-for-byte.

use erl_core::gaps::{self, ReachabilityMode};
use erl_core::mdp::{MarkovPolicy, TabularMdp};
use erl_core::risk::{self, RiskParams};
use erl_core::rng::RngStream;

const RESIDUAL_TOL: f64 = 1e-9;
const ORACLE_REL_TOL: f64 = 1e-10;
const BATTERY_SEED: u64 = 0x005e_ed0f_c4ec;

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn pass(name: &'static str, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: true,
        detail: detail.into(),
    }
}

fn fail(name: &'static str, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: false,
        detail: detail.into(),
    }
}

/// Runs every check; the battery keeps going past failures so the report is
/// complete.
pub fn run_battery(mdp: &TabularMdp, beta: f64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    if let Err(e) = mdp.validate() {
        out.push(fail("validate", e.to_string()));
        return out;
    }
    out.push(pass("validate", "structural invariants hold"));

    let params = match RiskParams::new(beta) {
        Ok(p) => p,
        Err(e) => {
            out.push(fail("risk_params", e.to_string()));
            return out;
        }
    };
    let (optimal, _) = match risk::solve_optimal(mdp, &params) {
        Ok(v) => v,
        Err(e) => {
            out.push(fail("solve_optimal", e.to_string()));
            return out;
        }
    };
    out.push(pass(
        "solve_optimal",
        "entropic backward induction completed",
    ));

    let (horizon, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut rng = RngStream::new(BATTERY_SEED, 0);

    // oracle equivalence on three random policies
    let trajectories = (ns as u128).saturating_pow(horizon as u32);
    if trajectories <= risk::ENUMERATION_GUARD {
        let mut worst = 0.0f64;
        let mut ok = true;
        for _ in 0..3 {
            let pi = MarkovPolicy::random(horizon, ns, na, &mut rng);
            let eval = match risk::evaluate_policy(mdp, &pi, &params) {
                Ok(t) => t,
                Err(e) => {
                    out.push(fail("oracle_equivalence", e.to_string()));
                    ok = false;
                    break;
                }
            };
            let oracle = match risk::brute_force_value(mdp, &pi, &params) {
                Ok(v) => v,
                Err(e) => {
                    out.push(fail("oracle_equivalence", e.to_string()));
                    ok = false;
                    break;
                }
            };
            let rel = (eval.v(1, mdp.initial_state()) - oracle).abs() / oracle.abs().max(1.0);
            worst = worst.max(rel);
        }
        if ok {
            if worst <= ORACLE_REL_TOL {
                out.push(pass(
                    "oracle_equivalence",
                    format!("max relative deviation {worst:.3e}"),
                ));
            } else {
                out.push(fail(
                    "oracle_equivalence",
                    format!("relative deviation {worst:.3e} exceeds {ORACLE_REL_TOL:.0e}"),
                ));
            }
        }
    } else {
        out.push(pass(
            "oracle_equivalence",
            format!("skipped: S^H = {trajectories} exceeds the enumeration guard"),
        ));
    }

    // Bellman-difference residuals, entropic and risk-neutral
    let neutral_opt = risk::solve_risk_neutral(mdp, None);
    let mut worst = 0.0f64;
    let mut worst_neutral = 0.0f64;
    for _ in 0..20 {
        let pi = MarkovPolicy::random(horizon, ns, na, &mut rng);
        let pi_eval = match risk::evaluate_policy(mdp, &pi, &params) {
            Ok(t) => t,
            Err(e) => {
                out.push(fail("condition1_residuals", e.to_string()));
                return out;
            }
        };
        let neutral_pi = risk::solve_risk_neutral(mdp, Some(&pi));
        for _ in 0..5 {
            let h = 1 + rng.next_below(horizon);
            let s = rng.next_below(ns);
            let prefix_reward = rng.next_f64() * (h - 1) as f64;
            let res = gaps::bellman_difference_residual(
                mdp,
                &optimal,
                &pi,
                &pi_eval,
                h,
                s,
                prefix_reward,
            );
            worst = worst.max(res.abs());
            let res =
                gaps::risk_neutral_bellman_residual(mdp, &neutral_opt, &pi, &neutral_pi, h, s);
            worst_neutral = worst_neutral.max(res.abs());
        }
    }
    if worst <= RESIDUAL_TOL && worst_neutral <= RESIDUAL_TOL {
        out.push(pass(
            "condition1_residuals",
            format!("max |residual| {worst:.3e} (entropic), {worst_neutral:.3e} (risk-neutral)"),
        ));
    } else {
        out.push(fail(
            "condition1_residuals",
            format!("residuals {worst:.3e} / {worst_neutral:.3e} exceed {RESIDUAL_TOL:.0e}"),
        ));
    }

    // exponential-regret decomposition residuals
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let pi = MarkovPolicy::random(horizon, ns, na, &mut rng);
        match risk::evaluate_policy(mdp, &pi, &params) {
            Ok(pi_eval) => {
                let res = gaps::decomposition_residual(mdp, &optimal, &pi, &pi_eval);
                worst = worst.max(res.abs());
            }
            Err(e) => {
                out.push(fail("decomposition_residuals", e.to_string()));
                return out;
            }
        }
    }
    if worst <= RESIDUAL_TOL {
        out.push(pass(
            "decomposition_residuals",
            format!("max |residual| {worst:.3e}"),
        ));
    } else {
        out.push(fail(
            "decomposition_residuals",
            format!("residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}"),
        ));
    }

    // gap nonnegativity at the minimizing prefixes
    let locations = gaps::location_gaps(mdp, &optimal, ReachabilityMode::ReachableOnly);
    let most_negative = locations
        .iter()
        .map(|l| l.semi_normalized.min(l.cascaded))
        .fold(f64::INFINITY, f64::min);
    if most_negative >= -1e-12 {
        out.push(pass(
            "gap_nonnegativity",
            format!("most negative gap {most_negative:.3e}"),
        ));
    } else {
        out.push(fail(
            "gap_nonnegativity",
            format!("negative gap {most_negative:.3e} found"),
        ));
    }

    // minimal gap existence (a degenerate MDP is reported, not failed)
    match gaps::minimal_gap(mdp, &optimal, ReachabilityMode::ReachableOnly, None) {
        Ok(report) => out.push(pass(
            "minimal_gap",
            format!(
                "delta_min {} at (h={}, s={}, a={})",
                report.delta_min, report.witness.h, report.witness.s, report.witness.a
            ),
        )),
        Err(e) => out.push(pass("minimal_gap", format!("degenerate: {e}"))),
    }

    out
}
