//! Beta sweeps tying the positive-temperature and zero-temperature halves
//! together, with machine-readable per-beta diagnostics and audits of every
//! limit statement the sweep is supposed to exhibit.
//!
//! The LDP residual uses inf I from the deviation module, not a re-derived
//! quantity, so each record is a genuine two-engine cross-validation.

use crate::context::ContextGraph;
use crate::deviation::{inf_deviation_on_cylinder, AubryDistances, Deviation, RPlusWeights};
use crate::error::{Result, ShiftError};
use crate::logsum::fmt_g17;
use crate::maxplus::{self, MaxPlusSolution};
use crate::potential::Potential;
use crate::shift::{word_to_string, MarkovShift};
use crate::transfer::{
    cylinder_log_measure, equilibrium_diagnostics, g_beta_edge, gibbs_chain,
    gibbs_sandwich_gap, rpf_solve_graph, RpfOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Per-beta diagnostics. `v_beta` is `(1/beta) log h_beta` per context;
/// `v_gap` its max-minus-min distance to the calibrated sub-action (the
/// modulo-constant metric); residual maps are keyed by word strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub beta: f64,
    pub pressure: f64,
    pub pressure_over_beta: f64,
    pub integral_f: f64,
    pub entropy: f64,
    pub v_beta: Vec<f64>,
    pub v_gap: f64,
    pub sandwich_gap: f64,
    pub pressure_defect: f64,
    pub ldp_residuals: BTreeMap<String, f64>,
    /// Raw per-cylinder values (1/beta) log mu_beta(C); the residual above is
    /// this plus inf I(C).
    pub ldp_log_mu_over_beta: BTreeMap<String, f64>,
    pub ratio_residuals: BTreeMap<String, f64>,
    /// max over edges of |g_beta(e)/beta + r(e)|; the uniform-convergence
    /// defect of g_beta/beta toward R_-.
    pub g_beta_gap: f64,
}

/// Everything a sweep produces besides the records themselves.
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    /// (beta, error) pairs for grid points whose solve failed.
    pub skipped: Vec<(f64, String)>,
    /// Cylinder strings rejected as inadmissible (their measure is zero).
    pub flagged_cylinders: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub beta_grid: Vec<f64>,
    pub cylinders: Vec<Vec<u32>>,
    pub tracked_words: Vec<Vec<u32>>,
    pub rpf: RpfOptions,
}

impl SweepConfig {
    pub fn validate(&self, shift: &MarkovShift, graph: &ContextGraph) -> Result<Vec<String>> {
        if self.beta_grid.is_empty() {
            return Err(ShiftError::Config("empty beta grid".into()));
        }
        for pair in self.beta_grid.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(ShiftError::Config("beta grid must be increasing".into()));
            }
        }
        if !(self.beta_grid[0] > 1.0) {
            return Err(ShiftError::Config(
                "beta grid must stay above 1 for the equilibrium interpretation".into(),
            ));
        }
        if !(self.rpf.tol > 0.0) {
            return Err(ShiftError::Config("tolerance must be positive".into()));
        }
        let mut flagged = Vec::new();
        for c in &self.cylinders {
            if !shift.admissible_word(c) {
                flagged.push(word_to_string(c));
            }
        }
        for w in &self.tracked_words {
            if w.len() < graph.context_len() + 1 {
                return Err(ShiftError::Config(format!(
                    "tracked word {} is shorter than one context transition",
                    word_to_string(w)
                )));
            }
            if !shift.admissible_word(w) {
                return Err(ShiftError::Config(format!(
                    "tracked word {} is inadmissible",
                    word_to_string(w)
                )));
            }
        }
        Ok(flagged)
    }
}

/// Zero-temperature data shared by every record of a sweep.
pub struct SweepContext {
    pub graph: ContextGraph,
    pub zero_t: MaxPlusSolution,
    pub weights: RPlusWeights,
    pub aubry_dist: AubryDistances,
}

impl SweepContext {
    pub fn new(shift: &MarkovShift, potential: &Potential) -> Result<Self> {
        if !shift.is_topologically_mixing() {
            return Err(ShiftError::NotMixing {
                period: shift.period(),
                irreducible: shift.is_irreducible(),
            });
        }
        let graph = ContextGraph::new(shift, potential);
        let zero_t = maxplus::solve(&graph, maxplus::R_ZERO_THRESHOLD)?;
        let weights = RPlusWeights::new(&graph, zero_t.m_f, &zero_t.v)?;
        let aubry_dist = AubryDistances::new(&graph, &weights, &zero_t.aubry_contexts);
        Ok(Self {
            graph,
            zero_t,
            weights,
            aubry_dist,
        })
    }
}

/// One record per grid point, computed independently per beta (safe to run
/// on a parallel pool; the output order is the grid order regardless of
/// scheduling). Failed solves are recorded and skipped.
pub fn run_sweep(
    shift: &MarkovShift,
    potential: &Potential,
    config: &SweepConfig,
) -> Result<SweepOutput> {
    let ctx = SweepContext::new(shift, potential)?;
    let flagged_cylinders = config.validate(shift, &ctx.graph)?;
    let admissible_cylinders: Vec<Vec<u32>> = config
        .cylinders
        .iter()
        .filter(|c| shift.admissible_word(c))
        .cloned()
        .collect();

    let results: Vec<(f64, Result<SweepRecord>)> = config
        .beta_grid
        .par_iter()
        .map(|&beta| {
            (
                beta,
                sweep_record(
                    &ctx,
                    potential,
                    beta,
                    &admissible_cylinders,
                    &config.tracked_words,
                    &config.rpf,
                ),
            )
        })
        .collect();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (beta, res) in results {
        match res {
            Ok(r) => records.push(r),
            Err(e) => skipped.push((beta, e.to_string())),
        }
    }
    Ok(SweepOutput {
        records,
        skipped,
        flagged_cylinders,
    })
}

fn sweep_record(
    ctx: &SweepContext,
    potential: &Potential,
    beta: f64,
    cylinders: &[Vec<u32>],
    tracked_words: &[Vec<u32>],
    rpf_opts: &RpfOptions,
) -> Result<SweepRecord> {
    let rpf = rpf_solve_graph(&ctx.graph, beta, rpf_opts)?;
    let chain = gibbs_chain(&ctx.graph, &rpf);
    let diag = equilibrium_diagnostics(&ctx.graph, &rpf, &chain);

    let v_beta: Vec<f64> = rpf.log_h.iter().map(|h| h / beta).collect();
    let diffs: Vec<f64> = v_beta
        .iter()
        .zip(&ctx.zero_t.v)
        .map(|(vb, v)| vb - v)
        .collect();
    let v_gap = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - diffs.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut sandwich_words: Vec<Vec<u32>> = cylinders.to_vec();
    sandwich_words.extend_from_slice(tracked_words);
    let sandwich_gap = gibbs_sandwich_gap(&ctx.graph, &chain, &rpf, potential, &sandwich_words);

    let mut ldp_residuals = BTreeMap::new();
    let mut ldp_log_mu_over_beta = BTreeMap::new();
    for c in cylinders {
        let dev = inf_deviation_on_cylinder(&ctx.graph, &ctx.weights, &ctx.aubry_dist, c);
        if let Deviation::Finite(inf_i) = dev.inf_i {
            let log_mu = cylinder_log_measure(&ctx.graph, &chain, c);
            ldp_residuals.insert(word_to_string(c), log_mu / beta + inf_i);
            ldp_log_mu_over_beta.insert(word_to_string(c), log_mu / beta);
        }
    }

    let mut ratio_residuals = BTreeMap::new();
    for w in tracked_words {
        let l = ctx.graph.context_len();
        let first_edge = ctx
            .graph
            .edge_of_window(&w[..l + 1])
            .expect("validated tracked word");
        let log_tail = cylinder_log_measure(&ctx.graph, &chain, &w[1..]);
        let log_full = cylinder_log_measure(&ctx.graph, &chain, w);
        let ratio = (log_tail - log_full) / beta;
        ratio_residuals.insert(
            word_to_string(w),
            ratio - ctx.weights.r_plus(first_edge),
        );
    }

    let g_beta_gap = (0..ctx.graph.edges().len())
        .map(|e| (g_beta_edge(&ctx.graph, &rpf, e) / beta + ctx.weights.r_plus(e)).abs())
        .fold(0.0f64, f64::max);

    Ok(SweepRecord {
        beta,
        pressure: rpf.log_lambda,
        pressure_over_beta: rpf.log_lambda / beta,
        integral_f: diag.integral_f,
        entropy: diag.entropy,
        v_beta,
        v_gap,
        sandwich_gap,
        pressure_defect: rpf.log_lambda - beta * ctx.zero_t.m_f,
        ldp_residuals,
        ldp_log_mu_over_beta,
        ratio_residuals,
        g_beta_gap,
    })
}

/// Linear extrapolation in 1/beta of the pressure route to m(f) and of each
/// cylinder's LDP limit, plus empirical convergence orders fitted from
/// successive residual ratios.
#[derive(Debug, Clone, Serialize)]
pub struct LimitEstimates {
    pub m_f_from_pressure: f64,
    pub ldp_limits: BTreeMap<String, f64>,
    pub convergence_orders: BTreeMap<String, f64>,
}

pub fn limit_estimates(records: &[SweepRecord]) -> Result<LimitEstimates> {
    if records.len() < 3 {
        return Err(ShiftError::InsufficientData {
            need: 3,
            got: records.len(),
        });
    }
    let extrapolate = |y_prev: f64, y_last: f64, b_prev: f64, b_last: f64| {
        let (x0, x1) = (1.0 / b_prev, 1.0 / b_last);
        y_last - x1 * (y_prev - y_last) / (x0 - x1)
    };
    let last = &records[records.len() - 1];
    let prev = &records[records.len() - 2];
    let m_f_from_pressure = extrapolate(
        prev.pressure_over_beta,
        last.pressure_over_beta,
        prev.beta,
        last.beta,
    );
    let mut ldp_limits = BTreeMap::new();
    let mut convergence_orders = BTreeMap::new();
    for (word, &raw_last) in &last.ldp_log_mu_over_beta {
        let Some(&raw_prev) = prev.ldp_log_mu_over_beta.get(word) else {
            continue;
        };
        ldp_limits.insert(
            word.clone(),
            extrapolate(raw_prev, raw_last, prev.beta, last.beta),
        );
        let (res_prev, res_last) = (prev.ldp_residuals[word], last.ldp_residuals[word]);
        if res_prev.abs() > 0.0 && res_last.abs() > 0.0 {
            let p = (res_prev.abs() / res_last.abs()).ln() / (last.beta / prev.beta).ln();
            convergence_orders.insert(format!("ldp:{word}"), p);
        }
    }
    let (dp, dl) = (
        prev.pressure_defect / prev.beta,
        last.pressure_defect / last.beta,
    );
    if dp > 0.0 && dl > 0.0 {
        convergence_orders.insert(
            "pressure_over_beta".into(),
            (dp / dl).ln() / (last.beta / prev.beta).ln(),
        );
    }
    Ok(LimitEstimates {
        m_f_from_pressure,
        ldp_limits,
        convergence_orders,
    })
}

/// Violations of the monotone statements along an increasing grid:
/// integral f strictly increasing, entropy strictly decreasing, pressure
/// defect nonincreasing and nonnegative, entropy nonnegative; all with
/// 1e-12 slack.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub violations: Vec<String>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn monotonicity_audit(records: &[SweepRecord]) -> MonotonicityReport {
    let mut violations = Vec::new();
    const SLACK: f64 = 1e-12;
    for r in records {
        if r.pressure_defect < -SLACK {
            violations.push(format!(
                "beta {}: pressure defect {} below zero",
                r.beta, r.pressure_defect
            ));
        }
        if r.entropy < -SLACK {
            violations.push(format!("beta {}: entropy {} below zero", r.beta, r.entropy));
        }
    }
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if !(b.integral_f > a.integral_f - SLACK) {
            violations.push(format!(
                "integral f not increasing between beta {} and {}",
                a.beta, b.beta
            ));
        }
        if !(b.entropy < a.entropy + SLACK) {
            violations.push(format!(
                "entropy not decreasing between beta {} and {}",
                a.beta, b.beta
            ));
        }
        if !(b.pressure_defect <= a.pressure_defect + SLACK) {
            violations.push(format!(
                "pressure defect increased between beta {} and {}",
                a.beta, b.beta
            ));
        }
    }
    MonotonicityReport { violations }
}

/// Full audit: monotonicity plus the identities and shrinkage statements a
/// sweep of a well-posed instance must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct SweepAudit {
    pub monotonicity: MonotonicityReport,
    pub violations: Vec<String>,
}

impl SweepAudit {
    pub fn passed(&self) -> bool {
        self.monotonicity.passed() && self.violations.is_empty()
    }
}

pub fn sweep_audit(records: &[SweepRecord]) -> SweepAudit {
    let monotonicity = monotonicity_audit(records);
    let mut violations = Vec::new();
    for r in records {
        // Ratio identity: exact up to the sub-action gap plus the pressure
        // defect spread over beta.
        let bound = r.v_gap + r.pressure_defect / r.beta + 1e-9;
        for (w, res) in &r.ratio_residuals {
            if res.abs() > bound {
                violations.push(format!(
                    "beta {}: ratio residual {res} for {w} exceeds bound {bound}",
                    r.beta
                ));
            }
        }
        let g_bound = 2.0 * r.v_gap + r.pressure_defect.abs() / r.beta + 1e-12;
        if r.g_beta_gap > g_bound {
            violations.push(format!(
                "beta {}: g_beta/beta defect {} exceeds bound {g_bound}",
                r.beta, r.g_beta_gap
            ));
        }
    }
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        if last.v_gap > first.v_gap + 1e-9 {
            violations.push(format!(
                "sub-action gap grew along the sweep: {} -> {}",
                first.v_gap, last.v_gap
            ));
        }
        for (w, res_last) in &last.ldp_residuals {
            if let Some(res_first) = first.ldp_residuals.get(w) {
                if res_last.abs() > res_first.abs() + 1e-12 {
                    violations.push(format!(
                        "LDP residual for {w} grew along the sweep: {} -> {}",
                        res_first, res_last
                    ));
                }
            }
        }
    }
    SweepAudit {
        monotonicity,
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = ShiftError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(ShiftError::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// Write records in the chosen format; CSV is wide (one row per beta, fixed
/// column order documented in the header), JSON is the full record array.
/// Both are UTF-8, line-feed terminated, and bit-stable across runs.
pub fn emit(records: &[SweepRecord], format: EmitFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        EmitFormat::Csv => emit_csv(records, out),
        EmitFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn emit_csv(records: &[SweepRecord], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# beta sweep records, one row per beta")?;
    writeln!(
        out,
        "# scalar columns: pressure P(beta f); pressure_over_beta; integral_f = mu_beta(f); \
         entropy = P - beta mu_beta(f); v_gap = spread of (log h_beta)/beta - V; \
         sandwich_gap; pressure_defect = P - beta m(f); g_beta_gap"
    )?;
    writeln!(
        out,
        "# keyed columns: ldp_residual:<cylinder> = (1/beta) log mu(C) + inf I(C); \
         ratio_residual:<word>; v_beta:<context> = (log h_beta)/beta"
    )?;
    let mut header = vec![
        "beta".to_string(),
        "pressure".to_string(),
        "pressure_over_beta".to_string(),
        "integral_f".to_string(),
        "entropy".to_string(),
        "v_gap".to_string(),
        "sandwich_gap".to_string(),
        "pressure_defect".to_string(),
        "g_beta_gap".to_string(),
    ];
    if let Some(first) = records.first() {
        for w in first.ldp_residuals.keys() {
            header.push(format!("ldp_residual:{w}"));
        }
        for w in first.ratio_residuals.keys() {
            header.push(format!("ratio_residual:{w}"));
        }
        for i in 0..first.v_beta.len() {
            header.push(format!("v_beta:{i}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![
            fmt_g17(r.beta),
            fmt_g17(r.pressure),
            fmt_g17(r.pressure_over_beta),
            fmt_g17(r.integral_f),
            fmt_g17(r.entropy),
            fmt_g17(r.v_gap),
            fmt_g17(r.sandwich_gap),
            fmt_g17(r.pressure_defect),
            fmt_g17(r.g_beta_gap),
        ];
        for v in r.ldp_residuals.values() {
            row.push(fmt_g17(*v));
        }
        for v in r.ratio_residuals.values() {
            row.push(fmt_g17(*v));
        }
        for v in &r.v_beta {
            row.push(fmt_g17(*v));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn geometric_grid(from: f64, to: f64) -> Vec<f64> {
        let mut g = vec![from];
        while *g.last().unwrap() < to {
            let next = g.last().unwrap() * 2.0;
            g.push(next);
        }
        g
    }

    fn bernoulli_sweep() -> SweepOutput {
        let (shift, f) = instances::bernoulli2();
        let config = SweepConfig {
            beta_grid: geometric_grid(8.0, 512.0),
            cylinders: vec![vec![1], vec![0]],
            tracked_words: vec![vec![1, 0], vec![0, 1]],
            rpf: RpfOptions::default(),
        };
        run_sweep(&shift, &f, &config).unwrap()
    }

    fn golden_sweep() -> SweepOutput {
        let (shift, f) = instances::golden3();
        let config = SweepConfig {
            beta_grid: geometric_grid(4.0, 512.0),
            cylinders: vec![vec![2], vec![1], vec![0, 2]],
            tracked_words: vec![vec![0, 1], vec![1, 2], vec![2, 0, 1]],
            rpf: RpfOptions::default(),
        };
        run_sweep(&shift, &f, &config).unwrap()
    }

    #[test]
    fn bernoulli_ldp_residual_closed_form() {
        let out = bernoulli_sweep();
        assert!(out.skipped.is_empty());
        for r in &out.records {
            let expect = -(1.0 + (-r.beta).exp()).ln() / r.beta;
            let got = r.ldp_residuals["1"];
            assert!((got - expect).abs() < 1e-12, "beta {}", r.beta);
            assert!(got.abs() <= 2.0f64.ln() / r.beta + 1e-12);
        }
    }

    #[test]
    fn golden_v_gap_shrinks() {
        let out = golden_sweep();
        assert!(out.skipped.is_empty());
        let first = out.records.first().unwrap();
        let last = out.records.last().unwrap();
        assert!(last.v_gap <= 0.05, "v_gap at 512: {}", last.v_gap);
        assert!(last.v_gap <= first.v_gap + 1e-9);
    }

    #[test]
    fn audits_pass_on_goldens() {
        for out in [bernoulli_sweep(), golden_sweep()] {
            let audit = sweep_audit(&out.records);
            assert!(audit.passed(), "{:?}", audit);
        }
    }

    #[test]
    fn shuffled_records_flagged() {
        let mut records = golden_sweep().records;
        records.reverse();
        let report = monotonicity_audit(&records);
        assert!(!report.passed());
    }

    #[test]
    fn limit_estimates_bernoulli() {
        let out = bernoulli_sweep();
        let est = limit_estimates(&out.records).unwrap();
        assert!(est.m_f_from_pressure.abs() < 1e-6);
        assert!((est.ldp_limits["1"] + 1.0).abs() < 1e-4);
        assert!(matches!(
            limit_estimates(&out.records[..2]),
            Err(ShiftError::InsufficientData { .. })
        ));
    }

    #[test]
    fn flat_potential_extrapolation_exact() {
        // f == c on the full shift: P(beta f) = beta c + log 2 exactly, so
        // the linear-in-1/beta model is exact at every grid point.
        let shift = std::sync::Arc::new(crate::shift::MarkovShift::full(2).unwrap());
        let f = Potential::from_fn(std::sync::Arc::clone(&shift), 1, |_| -0.75).unwrap();
        let config = SweepConfig {
            beta_grid: vec![2.0, 4.0, 8.0, 16.0],
            cylinders: vec![],
            tracked_words: vec![],
            rpf: RpfOptions::default(),
        };
        let out = run_sweep(&shift, &f, &config).unwrap();
        let est = limit_estimates(&out.records).unwrap();
        assert!((est.m_f_from_pressure + 0.75).abs() < 1e-12);
        for r in &out.records {
            assert!((r.pressure_over_beta - (-0.75 + 2.0f64.ln() / r.beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn inadmissible_cylinder_flagged() {
        let (shift, f) = instances::golden3();
        let config = SweepConfig {
            beta_grid: vec![4.0, 8.0],
            cylinders: vec![vec![2, 2], vec![1]],
            tracked_words: vec![],
            rpf: RpfOptions::default(),
        };
        let out = run_sweep(&shift, &f, &config).unwrap();
        assert_eq!(out.flagged_cylinders, vec!["22".to_string()]);
        assert!(out.records[0].ldp_residuals.contains_key("1"));
        assert!(!out.records[0].ldp_residuals.contains_key("22"));
    }

    #[test]
    fn grid_validation() {
        let (shift, f) = instances::bernoulli2();
        let bad = SweepConfig {
            beta_grid: vec![4.0, 2.0],
            cylinders: vec![],
            tracked_words: vec![],
            rpf: RpfOptions::default(),
        };
        assert!(run_sweep(&shift, &f, &bad).is_err());
        let low = SweepConfig {
            beta_grid: vec![0.5, 2.0],
            cylinders: vec![],
            tracked_words: vec![],
            rpf: RpfOptions::default(),
        };
        assert!(run_sweep(&shift, &f, &low).is_err());
    }

    #[test]
    fn emit_round_trips() {
        let out = golden_sweep();
        // JSON round-trip reproduces the records exactly.
        let mut buf = Vec::new();
        emit(&out.records, EmitFormat::Json, &mut buf).unwrap();
        let back: Vec<SweepRecord> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, out.records);
        // CSV parses, has one data row per beta, and is bit-stable.
        let mut csv1 = Vec::new();
        emit(&out.records, EmitFormat::Csv, &mut csv1).unwrap();
        let mut csv2 = Vec::new();
        emit(&out.records, EmitFormat::Csv, &mut csv2).unwrap();
        assert_eq!(csv1, csv2);
        let text = String::from_utf8(csv1).unwrap();
        let data_rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("beta"))
            .collect();
        assert_eq!(data_rows.len(), out.records.len());
        let header = text
            .lines()
            .find(|l| l.starts_with("beta"))
            .unwrap()
            .split(',')
            .count();
        for row in data_rows {
            assert_eq!(row.split(',').count(), header);
            for field in row.split(',') {
                field.parse::<f64>().unwrap();
            }
        }
        // Empty record list: header only.
        let mut empty = Vec::new();
        emit(&[], EmitFormat::Csv, &mut empty).unwrap();
        let text = String::from_utf8(empty).unwrap();
        assert!(text.lines().any(|l| l.starts_with("beta")));
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = golden_sweep();
        let b = golden_sweep();
        assert_eq!(a.records, b.records);
    }
}
