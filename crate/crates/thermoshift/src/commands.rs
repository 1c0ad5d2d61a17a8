//! Batch entry points behind the thin CLI: structural checks, RPF and
//! max-plus solves, deviation reports, and sweeps. Each command loads one
//! config, writes machine-readable artifacts into the output directory, and
//! returns a process exit code: 0 success, 1 usage or config error,
//! 2 numerical failure, 3 audit failure.

use crate::config::{LoadedInstance, RunConfig};
use crate::context::ContextGraph;
use crate::deviation::{
    inf_deviation_on_cylinder, zero_level_check, AubryDistances, Deviation, RPlusWeights,
    ZeroLevelReport,
};
use crate::error::{Result, ShiftError};
use crate::logsum::fmt_g17;
use crate::maxplus;
use crate::shift::word_to_string;
use crate::sweep::{
    limit_estimates, run_sweep, sweep_audit, EmitFormat, SweepConfig,
};
use crate::transfer::{rpf_solve, RpfOptions};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

/// Classify an error into the exit-code contract.
pub fn exit_code_for(err: &ShiftError) -> i32 {
    match err {
        ShiftError::Config(_)
        | ShiftError::Io(_)
        | ShiftError::Json(_)
        | ShiftError::NonSquare { .. }
        | ShiftError::EmptyRowOrColumn { .. }
        | ShiftError::NoEdges
        | ShiftError::BadMetricBase(_)
        | ShiftError::SymbolOutOfRange { .. }
        | ShiftError::ZeroRange
        | ShiftError::BadPotentialValue(_)
        | ShiftError::WordTooShort { .. }
        | ShiftError::InadmissibleWord(_)
        | ShiftError::CycleNotClosed
        | ShiftError::InsufficientData { .. } => EXIT_USAGE,
        ShiftError::NoConvergence { .. }
        | ShiftError::PositiveCycleDetected
        | ShiftError::SubActionViolated { .. }
        | ShiftError::RuleFailure(_)
        | ShiftError::EnvelopeNotSummable { .. } => EXIT_NUMERICAL,
        ShiftError::NotMixing { .. } => EXIT_AUDIT,
    }
}

/// Emit a single-line machine-readable error description on stderr.
pub fn report_error(err: &ShiftError) -> i32 {
    let code = exit_code_for(err);
    let json = serde_json::json!({ "error": err.to_string(), "exit_code": code });
    eprintln!("{json}");
    code
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn say(quiet: bool, line: &str) {
    if !quiet {
        println!("{line}");
    }
}

fn rpf_options(config: &RunConfig) -> RpfOptions {
    RpfOptions {
        tol: config.tolerance,
        max_iter: config.max_iter,
        ..Default::default()
    }
}

/// Run closures on a pool sized by THERMOSHIFT_WORKERS (default: available
/// parallelism). Per-beta determinism makes results schedule-independent.
fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let workers = std::env::var("THERMOSHIFT_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ShiftError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Structural report of `check`: the standing hypotheses of the zero-
/// temperature large deviation statement, evaluated on the loaded instance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub alphabet_size: u32,
    pub range: u32,
    pub irreducible: bool,
    pub period: u64,
    pub mixing: bool,
    pub bip_k0: Option<u32>,
    pub walters_moduli: Vec<f64>,
    pub declared_var1: Option<f64>,
    pub truncation_level: Option<u32>,
    pub m_f: Option<f64>,
    pub unique_maximizing: Option<bool>,
    pub hypotheses: Vec<Hypothesis>,
    pub all_pass: bool,
}

pub fn cmd_check(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<i32> {
    let inst = LoadedInstance::load(config)?;
    let shift = &inst.shift;
    let range = inst.potential.range();
    let mixing = shift.is_topologically_mixing();
    let witness = shift.primitivity_witness();
    let walters_moduli: Vec<f64> = (1..=range)
        .map(|j| inst.potential.walters_modulus(j))
        .collect();

    let mut hypotheses = vec![
        Hypothesis {
            name: "topologically mixing".into(),
            pass: mixing,
            detail: format!(
                "irreducible: {}, period: {}",
                shift.is_irreducible(),
                shift.period()
            ),
        },
        Hypothesis {
            name: "finitely primitive (BIP)".into(),
            pass: witness.is_some(),
            detail: match &witness {
                Some(w) => format!("K0 = {}, |F| = {}", w.k0, w.f.len()),
                None => "no finite connector length".into(),
            },
        },
        Hypothesis {
            name: "Walters condition".into(),
            pass: walters_moduli.iter().all(|m| m.is_finite()),
            detail: format!(
                "locally constant range {range}; moduli {:?}",
                walters_moduli
            ),
        },
        Hypothesis {
            name: "Var_1 finite".into(),
            pass: true,
            detail: match inst.declared_var1 {
                Some(v) => format!("declared bound {v}"),
                None => "finite table".into(),
            },
        },
        Hypothesis {
            name: "finite Gurevich pressure / coercive tail".into(),
            pass: true,
            detail: match (&inst.envelope, inst.truncation_level) {
                (Some(env), Some(n)) => format!(
                    "tail bound at truncation {n}: {}",
                    fmt_g17(env.tail_bound(n as usize))
                ),
                _ => "finite alphabet".into(),
            },
        },
    ];

    let (m_f, unique) = if mixing {
        let graph = ContextGraph::new(shift, &inst.potential);
        let sol = maxplus::solve(&graph, maxplus::R_ZERO_THRESHOLD)?;
        (Some(sol.m_f), Some(sol.unique))
    } else {
        (None, None)
    };
    hypotheses.push(Hypothesis {
        name: "unique maximizing measure".into(),
        pass: unique.unwrap_or(false),
        detail: match (m_f, unique) {
            (Some(m), Some(u)) => format!("m(f) = {}, unique: {u}", fmt_g17(m)),
            _ => "not evaluated (shift not mixing)".into(),
        },
    });

    let all_pass = hypotheses.iter().all(|h| h.pass);
    let report = CheckReport {
        alphabet_size: shift.alphabet_size(),
        range,
        irreducible: shift.is_irreducible(),
        period: shift.period(),
        mixing,
        bip_k0: witness.map(|w| w.k0),
        walters_moduli,
        declared_var1: inst.declared_var1,
        truncation_level: inst.truncation_level,
        m_f,
        unique_maximizing: unique,
        hypotheses,
        all_pass,
    };
    for h in &report.hypotheses {
        say(
            quiet,
            &format!(
                "{} {} ({})",
                if h.pass { "PASS" } else { "FAIL" },
                h.name,
                h.detail
            ),
        );
    }
    write_json(&out_dir.join("check.json"), &report)?;
    Ok(if all_pass { EXIT_SUCCESS } else { EXIT_AUDIT })
}

pub fn cmd_solve(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<i32> {
    let inst = LoadedInstance::load(config)?;
    let graph = ContextGraph::new(&inst.shift, &inst.potential);
    let zero_t = maxplus::solve(&graph, maxplus::R_ZERO_THRESHOLD)?;
    write_json(&out_dir.join("maxplus.json"), &zero_t)?;
    say(
        quiet,
        &format!("max-plus: m(f) = {}, unique = {}", fmt_g17(zero_t.m_f), zero_t.unique),
    );
    let opts = rpf_options(config);
    for &beta in &config.beta_grid {
        let rpf = rpf_solve(&inst.shift, &inst.potential, beta, &opts)?;
        say(
            quiet,
            &format!(
                "beta {beta}: log lambda = {}, residual = {}",
                fmt_g17(rpf.log_lambda),
                fmt_g17(rpf.residual)
            ),
        );
        write_json(&out_dir.join(format!("rpf_beta_{beta}.json")), &rpf)?;
    }
    Ok(EXIT_SUCCESS)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationEntry {
    pub word: String,
    /// None encodes +infinity (empty or escaping cylinder).
    pub inf_i: Option<f64>,
    pub witness_path: Vec<String>,
    pub prefix_cost: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub m_f: f64,
    pub unique_maximizing: bool,
    pub cylinders: Vec<DeviationEntry>,
    pub zero_level: ZeroLevelReport,
}

pub fn cmd_deviation(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<i32> {
    let inst = LoadedInstance::load(config)?;
    let graph = ContextGraph::new(&inst.shift, &inst.potential);
    let zero_t = maxplus::solve(&graph, maxplus::R_ZERO_THRESHOLD)?;
    let weights = RPlusWeights::new(&graph, zero_t.m_f, &zero_t.v)?;
    let aubry_dist = AubryDistances::new(&graph, &weights, &zero_t.aubry_contexts);
    let kernel = maxplus::mane_kernel(&graph, zero_t.m_f)?;

    let mut entries = Vec::new();
    for cyl in config.parsed_cylinders()? {
        let res = inf_deviation_on_cylinder(&graph, &weights, &aubry_dist, &cyl);
        let entry = DeviationEntry {
            word: word_to_string(&cyl),
            inf_i: res.inf_i.finite(),
            witness_path: res
                .witness
                .iter()
                .map(|&c| word_to_string(graph.context_word(c)))
                .collect(),
            prefix_cost: res.prefix_cost,
        };
        say(
            quiet,
            &format!(
                "inf I over [{}] = {}",
                entry.word,
                entry
                    .inf_i
                    .map(fmt_g17)
                    .unwrap_or_else(|| "inf".into())
            ),
        );
        entries.push(entry);
    }
    let zero_level = zero_level_check(
        &graph,
        &weights,
        &kernel,
        &zero_t.aubry_contexts,
        zero_t.unique,
        config.max_period,
    );
    if zero_level.skipped {
        say(
            quiet,
            "zero-level check skipped: maximizing measure not unique",
        );
    }
    let passed = zero_level.passed();
    let report = DeviationReport {
        m_f: zero_t.m_f,
        unique_maximizing: zero_t.unique,
        cylinders: entries,
        zero_level,
    };
    write_json(&out_dir.join("deviation.json"), &report)?;
    Ok(if passed { EXIT_SUCCESS } else { EXIT_AUDIT })
}

pub fn cmd_sweep(
    config: &RunConfig,
    out_dir: &Path,
    format: EmitFormat,
    quiet: bool,
) -> Result<i32> {
    let inst = LoadedInstance::load(config)?;
    let sweep_config = SweepConfig {
        beta_grid: config.beta_grid.clone(),
        cylinders: config.parsed_cylinders()?,
        tracked_words: config.parsed_tracked_words()?,
        rpf: rpf_options(config),
    };
    let output = with_worker_pool(|| run_sweep(&inst.shift, &inst.potential, &sweep_config))??;
    for (beta, err) in &output.skipped {
        say(quiet, &format!("beta {beta} skipped: {err}"));
    }
    for w in &output.flagged_cylinders {
        say(quiet, &format!("cylinder [{w}] is inadmissible; flagged"));
    }
    if output.records.is_empty() {
        return Err(ShiftError::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }

    std::fs::create_dir_all(out_dir)?;
    let sweep_path = match format {
        EmitFormat::Csv => out_dir.join("sweep.csv"),
        EmitFormat::Json => out_dir.join("sweep.json"),
    };
    let mut file = std::fs::File::create(&sweep_path)?;
    crate::sweep::emit(&output.records, format, &mut file)?;

    let audit = sweep_audit(&output.records);
    write_json(&out_dir.join("audit.json"), &audit)?;
    if output.records.len() >= 3 {
        let limits = limit_estimates(&output.records)?;
        say(
            quiet,
            &format!(
                "extrapolated m(f) from pressure route: {}",
                fmt_g17(limits.m_f_from_pressure)
            ),
        );
        write_json(&out_dir.join("limits.json"), &limits)?;
    }
    for v in audit
        .monotonicity
        .violations
        .iter()
        .chain(&audit.violations)
    {
        say(quiet, &format!("AUDIT VIOLATION: {v}"));
    }
    say(
        quiet,
        &format!(
            "{} records written to {}",
            output.records.len(),
            sweep_path.display()
        ),
    );
    Ok(if audit.passed() {
        EXIT_SUCCESS
    } else {
        EXIT_AUDIT
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn fixture(dir: &Path) -> PathBuf {
        std::fs::write(
            dir.join("model.json"),
            r#"{ "alphabet_size": 2, "full": true }"#,
        )
        .unwrap();
        std::fs::write(
            dir.join("potential.json"),
            r#"{ "range": 1, "values": { "0": 0.0, "1": -1.0 } }"#,
        )
        .unwrap();
        std::fs::write(
            dir.join("run.json"),
            r#"{ "model": "model.json", "potential": "potential.json",
                 "beta_grid": [8.0, 16.0, 32.0], "cylinders": ["1", "0"],
                 "tracked_words": ["10"] }"#,
        )
        .unwrap();
        dir.join("run.json")
    }

    #[test]
    fn check_solve_deviation_sweep_on_bernoulli() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::load(&fixture(dir.path())).unwrap();
        let out = dir.path().join("out");
        assert_eq!(cmd_check(&cfg, &out, true).unwrap(), EXIT_SUCCESS);
        assert!(out.join("check.json").exists());
        assert_eq!(cmd_solve(&cfg, &out, true).unwrap(), EXIT_SUCCESS);
        assert!(out.join("maxplus.json").exists());
        assert!(out.join("rpf_beta_8.json").exists());
        assert_eq!(cmd_deviation(&cfg, &out, true).unwrap(), EXIT_SUCCESS);
        let dev: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("deviation.json")).unwrap())
                .unwrap();
        assert_eq!(dev["cylinders"][0]["inf_i"], 1.0);
        assert_eq!(
            cmd_sweep(&cfg, &out, EmitFormat::Csv, true).unwrap(),
            EXIT_SUCCESS
        );
        assert!(out.join("sweep.csv").exists());
        assert!(out.join("audit.json").exists());
        assert!(out.join("limits.json").exists());
    }

    #[test]
    fn missing_model_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("run.json"),
            r#"{ "model": "nope.json", "potential": "nope.json" }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&dir.path().join("run.json")).unwrap();
        let err = cmd_check(&cfg, dir.path(), true).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
    }

    #[test]
    fn period_two_fails_check() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("model.json"),
            r#"{ "alphabet_size": 2, "edges": [[0,1],[1,0]] }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("potential.json"),
            r#"{ "range": 1, "values": { "0": 0.0, "1": -1.0 } }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("run.json"),
            r#"{ "model": "model.json", "potential": "potential.json" }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&dir.path().join("run.json")).unwrap();
        assert_eq!(
            cmd_check(&cfg, &dir.path().join("out"), true).unwrap(),
            EXIT_AUDIT
        );
    }

    #[test]
    fn flat_potential_fails_uniqueness() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("model.json"),
            r#"{ "alphabet_size": 2, "full": true }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("potential.json"),
            r#"{ "range": 1, "values": { "0": 0.0, "1": 0.0 } }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("run.json"),
            r#"{ "model": "model.json", "potential": "potential.json" }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&dir.path().join("run.json")).unwrap();
        assert_eq!(
            cmd_check(&cfg, &dir.path().join("out"), true).unwrap(),
            EXIT_AUDIT
        );
    }

    #[test]
    fn deviation_with_inadmissible_cylinder_still_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("model.json"),
            r#"{ "alphabet_size": 3, "full": true, "edges": null }"#,
        )
        .unwrap();
        // Golden 3-node adjacency spelled out.
        std::fs::write(
            dir.path().join("model.json"),
            r#"{ "alphabet_size": 3,
                 "edges": [[0,0],[0,1],[0,2],[1,0],[1,1],[1,2],[2,0],[2,1]] }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("potential.json"),
            r#"{ "range": 2, "values": {
                 "00": -1.0, "01": 0.0, "02": -2.0,
                 "10": 0.0, "11": -1.5, "12": -1.0,
                 "20": -0.5, "21": -2.5 } }"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("run.json"),
            r#"{ "model": "model.json", "potential": "potential.json",
                 "cylinders": ["22", "2"] }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&dir.path().join("run.json")).unwrap();
        let out = dir.path().join("out");
        assert_eq!(cmd_deviation(&cfg, &out, true).unwrap(), EXIT_SUCCESS);
        let dev: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("deviation.json")).unwrap())
                .unwrap();
        assert!(dev["cylinders"][0]["inf_i"].is_null());
        assert_eq!(dev["cylinders"][1]["inf_i"], 1.5);
    }
}
