//! The `erl` command line: solvers, gap reports, instance generation,
//! experiments, and the invariant battery, over the JSON/CSV formats in
//! [`io`].
//!
//! Exit codes: 0 on success, 1 for invariant or validation failures, 2 for
//! usage errors. No subcommand mutates its input files, and identical
//! invocations produce identical output bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

pub mod check;
pub mod io;
pub mod sweep;

use erl_core::gaps::{self, ReachabilityMode};
use erl_core::harness::RunConfig;
use erl_core::instances::{self, BanditKind, BetaRegime, LowerBoundParams};
use erl_core::risk::{self, RiskParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags or config contents: exit 2.
    Usage(String),
    /// Validation or invariant failures while working: exit 1.
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        CliError::Failure(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub const USAGE: &str = "\
usage: erl <subcommand> [flags]

subcommands:
  solve   --mdp F (--beta B | --risk-neutral) [--out F]
  gaps    --mdp F --beta B [--unconstrained] [--out F]
  gen     --kind random --seed N --states S --actions A --horizon H --support P --out F
          --kind risk-consistency --seed N --states S --actions A --horizon H --out F
  lb-gen  --beta B --horizon H --regime large-beta|small-beta [--xi X] [--bandit 1|2] --out F
  run     (--config F | --mdp F --agent NAME --beta B --episodes K [--delta D] [--bonus-c C])
          (--seed N | --seeds a,b,c) --out DIR
  sweep   --config F --out DIR
  check   --mdp F --beta B

environment: ERL_THREADS caps sweep workers.";

/// Parsed command line: one subcommand, `--key value` options, and boolean
/// flags.
struct Invocation {
    options: BTreeMap<String, String>,
    flags: Vec<String>,
}

const BOOLEAN_FLAGS: &[&str] = &["risk-neutral", "unconstrained"];

impl Invocation {
    fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut options = BTreeMap::new();
        let mut flags = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::usage(format!("unexpected argument '{arg}'")))?;
            if BOOLEAN_FLAGS.contains(&name) {
                flags.push(name.to_owned());
                i += 1;
            } else {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| CliError::usage(format!("flag --{name} expects a value")))?;
                options.insert(name.to_owned(), value.clone());
                i += 2;
            }
        }
        Ok(Self { options, flags })
    }

    fn has_flag(&self, name: &str) -> bool {
        self.flags.iter().any(|f| f == name)
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.options.get(name).map(String::as_str)
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::usage(format!("missing required flag --{name}")))
    }

    fn require_f64(&self, name: &str) -> Result<f64, CliError> {
        parse_f64(name, self.require(name)?)
    }

    fn require_usize(&self, name: &str) -> Result<usize, CliError> {
        let raw = self.require(name)?;
        raw.parse().map_err(|_| {
            CliError::usage(format!(
                "flag --{name} expects a nonnegative integer, got '{raw}'"
            ))
        })
    }

    fn require_u64(&self, name: &str) -> Result<u64, CliError> {
        let raw = self.require(name)?;
        raw.parse().map_err(|_| {
            CliError::usage(format!(
                "flag --{name} expects a nonnegative integer, got '{raw}'"
            ))
        })
    }

    /// β from `--beta`, rejecting zero with a pointer to the risk-neutral
    /// solver.
    fn require_beta(&self) -> Result<f64, CliError> {
        let beta = self.require_f64("beta")?;
        if beta == 0.0 {
            return Err(CliError::usage(
                "beta must be nonzero; for beta = 0 use `solve --risk-neutral`",
            ));
        }
        Ok(beta)
    }
}

fn parse_f64(name: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse().map_err(|_| {
        CliError::usage(format!(
            "flag --{name} expects a decimal number, got '{raw}'"
        ))
    })
}

/// Runs one invocation; the binary maps the result onto exit codes.
pub fn dispatch(args: &[String]) -> Result<(), CliError> {
    let (sub, rest) = args.split_first().ok_or_else(|| CliError::usage(USAGE))?;
    let inv = Invocation::parse(rest)?;
    match sub.as_str() {
        "solve" => cmd_solve(&inv),
        "gaps" => cmd_gaps(&inv),
        "gen" => cmd_gen(&inv),
        "lb-gen" => cmd_lb_gen(&inv),
        "run" => cmd_run(&inv),
        "sweep" => cmd_sweep(&inv),
        "check" => cmd_check(&inv),
        other => Err(CliError::usage(format!(
            "unknown subcommand '{other}'\n{USAGE}"
        ))),
    }
}

fn out_path(inv: &Invocation) -> Option<PathBuf> {
    inv.get("out").map(PathBuf::from)
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => io::write_json(value, &path),
        None => {
            let text = serde_json::to_string_pretty(value)
                .map_err(|e| CliError::failure(format!("serialization failed: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(inv: &Invocation) -> Result<(), CliError> {
    let mdp_path = PathBuf::from(inv.require("mdp")?);
    if inv.has_flag("risk-neutral") {
        let mdp = io::load_mdp(&mdp_path)?;
        let tables = risk::solve_risk_neutral(&mdp, None);
        return emit_json(&io::NeutralTablesJson::from_tables(&tables), out_path(inv));
    }
    let params =
        RiskParams::new(inv.require_beta()?).map_err(|e| CliError::usage(e.to_string()))?;
    let mdp = io::load_mdp(&mdp_path)?;
    let (tables, _) =
        risk::solve_optimal(&mdp, &params).map_err(|e| CliError::failure(e.to_string()))?;
    emit_json(&io::ValueTablesJson::from_tables(&tables), out_path(inv))
}

fn cmd_gaps(inv: &Invocation) -> Result<(), CliError> {
    let mdp_path = PathBuf::from(inv.require("mdp")?);
    let params =
        RiskParams::new(inv.require_beta()?).map_err(|e| CliError::usage(e.to_string()))?;
    let mdp = io::load_mdp(&mdp_path)?;
    let mode = if inv.has_flag("unconstrained") {
        ReachabilityMode::Unconstrained
    } else {
        ReachabilityMode::ReachableOnly
    };
    let (tables, _) =
        risk::solve_optimal(&mdp, &params).map_err(|e| CliError::failure(e.to_string()))?;
    let neutral = risk::solve_risk_neutral(&mdp, None);
    let locations = gaps::location_gaps(&mdp, &tables, mode);
    let neutral_gaps: Vec<f64> = locations
        .iter()
        .map(|loc| gaps::risk_neutral_gap(&neutral, loc.h, loc.s, loc.a).value)
        .collect();
    // NoNonzeroGap is the only error; it marks the report degenerate
    let minimal = gaps::minimal_gap(&mdp, &tables, mode, None).ok();
    let report = io::GapReportJson::assemble(
        params.beta(),
        gaps::DEFAULT_ZERO_TOLERANCE,
        minimal.as_ref(),
        mode.as_str(),
        &locations,
        &neutral_gaps,
    );
    emit_json(&report, out_path(inv))
}

fn cmd_gen(inv: &Invocation) -> Result<(), CliError> {
    let kind = inv.require("kind")?;
    let seed = inv.require_u64("seed")?;
    let states = inv.require_usize("states")?;
    let actions = inv.require_usize("actions")?;
    let horizon = inv.require_usize("horizon")?;
    if states == 0 || actions == 0 || horizon == 0 {
        return Err(CliError::usage(
            "--states, --actions, and --horizon must be positive",
        ));
    }
    let out = PathBuf::from(inv.require("out")?);
    let mdp = match kind {
        "random" => {
            let support = inv.require_usize("support")?;
            if support == 0 || support > states {
                return Err(CliError::usage(format!(
                    "--support must lie in 1..={states}"
                )));
            }
            instances::random_mdp(seed, states, actions, horizon, support)
        }
        "risk-consistency" => {
            if horizon < 2 {
                return Err(CliError::usage(
                    "risk-consistency instances need --horizon >= 2",
                ));
            }
            instances::risk_consistency_mdp(states, actions, horizon, seed)
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown --kind '{other}' (expected random or risk-consistency)"
            )))
        }
    };
    io::save_mdp(&mdp, &out)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_lb_gen(inv: &Invocation) -> Result<(), CliError> {
    let beta = inv.require_beta()?;
    let horizon = inv.require_usize("horizon")?;
    let regime = match inv.require("regime")? {
        "large-beta" => BetaRegime::LargeBeta,
        "small-beta" => BetaRegime::SmallBeta,
        other => {
            return Err(CliError::usage(format!(
                "unknown --regime '{other}' (expected large-beta or small-beta)"
            )))
        }
    };
    let xi = inv.get("xi").map(|raw| parse_f64("xi", raw)).transpose()?;
    let which = match inv.get("bandit").unwrap_or("1") {
        "1" => BanditKind::BanditI,
        "2" => BanditKind::BanditII,
        other => {
            return Err(CliError::usage(format!(
                "unknown --bandit '{other}' (expected 1 or 2)"
            )))
        }
    };
    let out = PathBuf::from(inv.require("out")?);
    let params = LowerBoundParams::new(beta, horizon, regime, xi, which)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mdp = instances::lower_bound_mdp(&params);
    io::save_mdp(&mdp, &out)?;
    eprintln!(
        "wrote {} (xi = {}, suggested episode count {})",
        out.display(),
        params.xi(),
        params.suggested_episodes()
    );
    Ok(())
}

fn parse_seed_list(inv: &Invocation) -> Result<Option<Vec<u64>>, CliError> {
    if let Some(raw) = inv.get("seeds") {
        let seeds = raw
            .split(',')
            .map(|part| {
                part.trim().parse::<u64>().map_err(|_| {
                    CliError::usage(format!(
                        "--seeds expects comma-separated integers, got '{part}'"
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if seeds.is_empty() {
            return Err(CliError::usage("--seeds must list at least one seed"));
        }
        return Ok(Some(seeds));
    }
    if let Some(raw) = inv.get("seed") {
        let seed = raw
            .parse::<u64>()
            .map_err(|_| CliError::usage(format!("--seed expects an integer, got '{raw}'")))?;
        return Ok(Some(vec![seed]));
    }
    Ok(None)
}

/// Builds the experiment for `run` from either `--config` or direct flags.
fn resolve_run(inv: &Invocation) -> Result<sweep::ResolvedExperiment, CliError> {
    if let Some(config_path) = inv.get("config") {
        let path = Path::new(config_path);
        let config = io::load_experiment(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mdp = config.mdp.resolve(base)?;
        let run_config = config.run_config()?;
        let seeds = parse_seed_list(inv)?.unwrap_or_else(|| config.seeds.clone());
        return Ok(sweep::ResolvedExperiment {
            mdp,
            config: run_config,
            seeds,
            parallelism: config.parallelism,
        });
    }
    let mdp_path = PathBuf::from(inv.require("mdp")?);
    let agent = inv.require("agent")?;
    let kind = erl_core::harness::AgentKind::parse(agent).ok_or_else(|| {
        CliError::usage(format!(
            "unknown agent kind '{agent}' (expected rsvi2, rsq2, or uniform_random)"
        ))
    })?;
    let config = RunConfig {
        agent: kind,
        beta: inv.require_beta()?,
        episodes: inv.require_u64("episodes")?,
        bonus_c: inv
            .get("bonus-c")
            .map(|raw| parse_f64("bonus-c", raw))
            .transpose()?
            .unwrap_or(1.0),
        delta: inv
            .get("delta")
            .map(|raw| parse_f64("delta", raw))
            .transpose()?
            .unwrap_or(0.1),
    };
    if config.episodes == 0 {
        return Err(CliError::usage("--episodes must be at least 1"));
    }
    let seeds =
        parse_seed_list(inv)?.ok_or_else(|| CliError::usage("run needs --seed or --seeds"))?;
    let mdp = io::load_mdp(&mdp_path)?;
    Ok(sweep::ResolvedExperiment {
        mdp,
        config,
        seeds,
        parallelism: 1,
    })
}

fn ensure_out_dir(inv: &Invocation) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(inv.require("out")?);
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::failure(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn cmd_run(inv: &Invocation) -> Result<(), CliError> {
    let experiment = resolve_run(inv)?;
    let dir = ensure_out_dir(inv)?;
    for &seed in &experiment.seeds {
        let trace = erl_core::harness::run(&experiment.mdp, &experiment.config, seed)
            .map_err(|e| CliError::failure(e.to_string()))?;
        let path = dir.join(io::trace_file_name(&experiment.config, seed));
        fs::write(&path, io::trace_csv(&trace))
            .map_err(|e| CliError::failure(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn max_workers_from_env() -> usize {
    std::env::var("ERL_THREADS")
        .ok()
        .and_then(|raw| raw.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(usize::MAX)
}

fn cmd_sweep(inv: &Invocation) -> Result<(), CliError> {
    let path = Path::new(inv.require("config")?);
    let config = io::load_sweep(path)?;
    if config.experiments.is_empty() {
        return Err(CliError::usage("sweep config lists no experiments"));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut experiments = Vec::with_capacity(config.experiments.len());
    for exp in &config.experiments {
        experiments.push(sweep::ResolvedExperiment {
            mdp: exp.mdp.resolve(base)?,
            config: exp.run_config()?,
            seeds: exp.seeds.clone(),
            parallelism: exp.parallelism,
        });
    }
    let dir = ensure_out_dir(inv)?;
    let rows = sweep::run_sweep(&experiments, max_workers_from_env());
    let path = dir.join("aggregate.csv");
    fs::write(&path, sweep::aggregate_csv(&rows))
        .map_err(|e| CliError::failure(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_check(inv: &Invocation) -> Result<(), CliError> {
    let mdp_path = PathBuf::from(inv.require("mdp")?);
    let beta = inv.require_beta()?;
    let mdp = io::load_mdp(&mdp_path)?;
    let outcomes = check::run_battery(&mdp, beta);
    let mut failures = 0;
    for outcome in &outcomes {
        if outcome.passed {
            println!("ok   - {}: {}", outcome.name, outcome.detail);
        } else {
            eprintln!("FAIL - {}: {}", outcome.name, outcome.detail);
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::failure(format!(
            "{failures} invariant check(s) failed"
        )));
    }
    Ok(())
}
