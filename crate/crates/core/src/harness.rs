//! Experiment orchestration: seeded trials, parallel execution, aggregation,
//! and phase sweeps.
//!
//! Trial `t` of an experiment with base seed `b` draws all of its randomness
//! from `rng_from(derive_seed(b, t), 0)`, so reports do not depend on the
//! worker count or scheduling.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{corrupt_nodes, corrupt_z2, erasure_adversary, NodeStrategy, Z2Strategy};
use crate::calibration::{cached_push_out, cached_z2, PushOutCalibration, Z2Calibration};
use crate::dense::{recover_dense, DenseProgramParams};
use crate::error::{invalid, Error, Result};
use crate::model::{balanced_labels, center_adjacency, sample_sbm, sample_z2, LabelVector, SbmParams, Z2Instance};
use crate::rounding::{gaussian_sign_rounding, select_estimate, DEFAULT_TRIALS};
use crate::seed::{derive_seed, rng_from};
use crate::sdp::{solve_basic_sdp, SdpOptions};
use crate::sparse::{recover_sparse, SparseParams};
use crate::z2::{recover_z2, Z2ProgramParams};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const WORKERS_ENV: &str = "KSROBUST_WORKERS";

/// `⟨x̂, x*⟩² / n²`.
pub fn evaluate_overlap(xhat: &LabelVector, xstar: &LabelVector) -> Result<f64> {
    if xhat.len() != xstar.len() {
        return invalid(format!("overlap of vectors with lengths {} and {}", xhat.len(), xstar.len()));
    }
    if xhat.is_empty() {
        return invalid("overlap of empty vectors");
    }
    let ip: i64 = xhat.as_slice().iter().zip(xstar.as_slice()).map(|(&a, &b)| (a * b) as i64).sum();
    let n = xhat.len() as f64;
    Ok((ip as f64 / n).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Sbm,
    Z2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dense,
    Sparse,
    /// Basic SDP on the whole observation followed by rounding.
    Baseline,
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sbm" => Ok(Self::Sbm),
            "z2" => Ok(Self::Z2),
            _ => Err(Error::InvalidParameter(format!("unknown model `{s}`"))),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            "baseline" | "basic-sdp-baseline" => Ok(Self::Baseline),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Parsed adversary tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    None,
    Erasure,
    Node(NodeStrategy),
    Z2(Z2Strategy),
}

impl FromStr for AdversaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "erasure" => Ok(Self::Erasure),
            _ => s
                .parse::<NodeStrategy>()
                .map(Self::Node)
                .or_else(|_| s.parse::<Z2Strategy>().map(Self::Z2))
                .map_err(|_| Error::InvalidParameter(format!("unknown adversary `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub n: usize,
    /// Average degree (SBM only).
    pub d: f64,
    /// Bias `ε`; when absent it is derived from `delta`.
    pub eps: Option<f64>,
    /// KS gap `δ` with `ε² d = 1 + δ`.
    pub delta: Option<f64>,
    /// Signal strength (Z₂ only).
    pub sigma: f64,
    pub mu: f64,
    /// `none`, `erasure`, or a node / Z₂ strategy tag.
    pub adversary: String,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; `KSROBUST_WORKERS` takes precedence, default 1.
    pub workers: Option<usize>,
    /// Trials running longer than this many seconds are recorded as timeouts.
    pub timeout_s: Option<f64>,
    /// Store wall-clock runtime in each record. Off by default so that
    /// reports are reproducible bit for bit.
    pub record_runtime: bool,
    pub rounding_trials: usize,
    /// Uncorrupted instances used to calibrate `Δ`.
    pub calibration_seeds: usize,
    pub calibration_seed: u64,
    /// `δ` (SBM) or `σ` (Z₂) at which the margin is calibrated. Defaults to the
    /// instance value when it lies above the threshold, else `δ = 1` / `σ = 1.5`.
    pub calibrate_at: Option<f64>,
    pub delta_override: Option<f64>,
    pub cdeg: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Sbm,
            n: 1000,
            d: 40.0,
            eps: None,
            delta: Some(1.0),
            sigma: 1.5,
            mu: 0.0,
            adversary: "none".into(),
            algorithm: Algorithm::Dense,
            trials: 10,
            base_seed: 0,
            workers: None,
            timeout_s: None,
            record_runtime: false,
            rounding_trials: DEFAULT_TRIALS,
            calibration_seeds: 10,
            calibration_seed: 0xCA11B,
            calibrate_at: None,
            delta_override: None,
            cdeg: None,
        }
    }
}

impl ExperimentConfig {
    pub fn eps(&self) -> Result<f64> {
        match (self.eps, self.delta) {
            (Some(e), _) => Ok(e),
            (None, Some(delta)) => Ok(SbmParams::from_delta(self.n, self.d, delta)?.eps),
            (None, None) => invalid("either eps or delta is required"),
        }
    }

    pub fn adversary_kind(&self) -> Result<AdversaryKind> {
        self.adversary.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if !(0.0..1.0).contains(&self.mu) {
            return invalid(format!("mu = {} outside [0, 1)", self.mu));
        }
        if self.rounding_trials == 0 {
            return invalid("rounding trials must be at least 1");
        }
        let adv = self.adversary_kind()?;
        match self.model {
            ModelKind::Sbm => {
                SbmParams::new(self.n, self.d, self.eps()?)?;
                if matches!(adv, AdversaryKind::Z2(_)) {
                    return invalid(format!("adversary `{}` applies to z2 only", self.adversary));
                }
            }
            ModelKind::Z2 => {
                if self.n < 2 || !(self.sigma >= 0.0) {
                    return invalid("z2 needs n ≥ 2 and sigma ≥ 0");
                }
                if matches!(adv, AdversaryKind::Node(_) | AdversaryKind::Erasure) {
                    return invalid(format!("adversary `{}` applies to sbm only", self.adversary));
                }
                if self.algorithm == Algorithm::Sparse {
                    return invalid("the sparse pipeline is defined for sbm only");
                }
            }
        }
        Ok(())
    }

    /// Applies a named numeric override, as used by [`phase_sweep`].
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "n" => self.n = value as usize,
            "d" => self.d = value,
            "eps" => {
                self.eps = Some(value);
                self.delta = None;
            }
            "delta" => {
                self.delta = Some(value);
                self.eps = None;
            }
            "sigma" => self.sigma = value,
            "mu" => self.mu = value,
            "trials" => self.trials = value as usize,
            "cdeg" => self.cdeg = Some(value),
            _ => return invalid(format!("unknown sweep parameter `{name}`")),
        }
        Ok(())
    }
}

/// Number of rayon workers: `KSROBUST_WORKERS`, then the configured value, then 1.
pub fn resolve_workers(configured: Option<usize>) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .or(configured)
        .unwrap_or(1)
        .max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Ok,
    Error,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub overlap_sq_frac: Option<f64>,
    pub feasible: Option<bool>,
    /// Program objective (dense / z2) or basic SDP value (baseline / sparse).
    pub sdp_value: Option<f64>,
    pub spectral: Option<f64>,
    pub dual_gap: Option<f64>,
    pub iterations: Option<usize>,
    pub program_rounds: Option<usize>,
    pub prune_rounds: Option<usize>,
    /// Maximum degree left after pruning (sparse).
    pub max_degree: Option<usize>,
    pub corrupted: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl TrialRecord {
    fn failed(trial: usize, seed: u64, status: TrialStatus, msg: String) -> Self {
        Self {
            trial,
            seed,
            status,
            overlap_sq_frac: None,
            feasible: None,
            sdp_value: None,
            spectral: None,
            dual_gap: None,
            iterations: None,
            program_rounds: None,
            prune_rounds: None,
            max_degree: None,
            corrupted: 0,
            runtime_s: None,
            error: Some(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub completed: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Fraction of records with a feasibility verdict that were feasible.
    pub feasible_rate: Option<f64>,
    pub mean_runtime_s: Option<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Aggregates over the records that produced an overlap.
pub fn aggregate(records: &[TrialRecord]) -> Aggregates {
    let mut v: Vec<f64> = records.iter().filter_map(|r| r.overlap_sq_frac).collect();
    let k = v.len() as f64;
    let mean = if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / k };
    let std = if v.is_empty() { f64::NAN } else { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k).sqrt() };
    v.sort_by(f64::total_cmp);
    let verdicts: Vec<bool> = records.iter().filter_map(|r| r.feasible).collect();
    let runtimes: Vec<f64> = records.iter().filter_map(|r| r.runtime_s).collect();
    Aggregates {
        completed: v.len(),
        mean,
        std,
        min: quantile(&v, 0.0),
        q25: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q75: quantile(&v, 0.75),
        max: quantile(&v, 1.0),
        feasible_rate: (!verdicts.is_empty())
            .then(|| verdicts.iter().filter(|&&f| f).count() as f64 / verdicts.len() as f64),
        mean_runtime_s: (!runtimes.is_empty()).then(|| runtimes.iter().sum::<f64>() / runtimes.len() as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CalibrationUsed {
    PushOut(PushOutCalibration),
    Z2(Z2Calibration),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub calibration: Option<CalibrationUsed>,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Bias at which the push-out margin is calibrated: the instance's own `ε`
/// above the KS threshold, `δ = 1` below it, or an explicit `δ`.
pub fn calibration_eps(d: f64, eps: f64, at_delta: Option<f64>) -> f64 {
    let own = eps * eps * d - 1.0;
    let at = at_delta.unwrap_or(if own > 0.0 { own } else { 1.0 });
    ((1.0 + at) / d).sqrt()
}

/// Signal level at which the Z₂ margin is calibrated.
pub fn calibration_sigma(sigma: f64, at: Option<f64>) -> f64 {
    at.unwrap_or(if sigma > 1.0 { sigma } else { 1.5 })
}

fn calibration_for(config: &ExperimentConfig) -> Result<Option<CalibrationUsed>> {
    if config.algorithm != Algorithm::Dense {
        return Ok(None);
    }
    match config.model {
        ModelKind::Sbm => {
            let adv = config.adversary_kind()?;
            let n = match adv {
                AdversaryKind::Erasure => config.n - crate::adversary::corruption_count(config.mu, config.n),
                _ => config.n,
            };
            let d = config.d * n as f64 / config.n as f64;
            let eps = calibration_eps(config.d, config.eps()?, config.calibrate_at);
            let cal = cached_push_out(n, d, eps, config.calibration_seeds, config.calibration_seed)?;
            Ok(Some(CalibrationUsed::PushOut(cal)))
        }
        ModelKind::Z2 => {
            let at = calibration_sigma(config.sigma, config.calibrate_at);
            let cal = cached_z2(config.n, at, config.calibration_seeds, config.calibration_seed)?;
            Ok(Some(CalibrationUsed::Z2(cal)))
        }
    }
}

fn run_trial(config: &ExperimentConfig, cal: Option<&CalibrationUsed>, trial: usize) -> TrialRecord {
    let seed = derive_seed(config.base_seed, trial as u64);
    let start = Instant::now();
    let mut rec = match trial_body(config, cal, trial, seed) {
        Ok(r) => r,
        Err(e) => TrialRecord::failed(trial, seed, TrialStatus::Error, e.to_string()),
    };
    let elapsed = start.elapsed().as_secs_f64();
    if config.timeout_s.is_some_and(|cap| elapsed > cap) {
        rec = TrialRecord::failed(trial, seed, TrialStatus::Timeout, format!("exceeded {:.1}s", elapsed));
    }
    if config.record_runtime {
        rec.runtime_s = Some(elapsed);
    }
    rec
}

fn trial_body(config: &ExperimentConfig, cal: Option<&CalibrationUsed>, trial: usize, seed: u64) -> Result<TrialRecord> {
    let mut rng = rng_from(seed, 0);
    let mut rec = TrialRecord::failed(trial, seed, TrialStatus::Ok, String::new());
    rec.error = None;
    let n = config.n;
    let labels = balanced_labels(n, &mut rng)?;
    let adv = config.adversary_kind()?;
    let sdp = SdpOptions { restarts: 1, certify: false, ..SdpOptions::default() };
    match config.model {
        ModelKind::Sbm => {
            let eps = config.eps()?;
            let params = SbmParams::new(n, config.d, eps)?;
            let clean = sample_sbm(&params, &labels, &mut rng)?;
            let (graph, truth) = match adv {
                AdversaryKind::None => (clean, labels),
                AdversaryKind::Erasure => {
                    let (g, keep) = erasure_adversary(&clean, config.mu, &mut rng)?;
                    rec.corrupted = n - keep.len();
                    (g, labels.select(&keep))
                }
                AdversaryKind::Node(s) => {
                    let (g, r) = corrupt_nodes(&clean, &labels, &params, s, config.mu, &mut rng)?;
                    rec.corrupted = r.corrupted.len();
                    (g, labels)
                }
                AdversaryKind::Z2(_) => return invalid("z2 adversary on sbm"),
            };
            // Erasure keeps the edge density.
            let d = config.d * graph.n() as f64 / n as f64;
            let est = match config.algorithm {
                Algorithm::Dense => {
                    let Some(CalibrationUsed::PushOut(cal)) = cal else {
                        return invalid("dense pipeline needs a push-out calibration");
                    };
                    let mut p = DenseProgramParams::calibrated(config.mu, cal);
                    if let Some(delta) = config.delta_override {
                        p.delta = delta;
                    }
                    p.trials = config.rounding_trials;
                    p.sdp.seed = seed;
                    let (est, out) = recover_dense(&graph, &p, d, eps, &mut rng)?;
                    rec.feasible = Some(out.report.feasible);
                    rec.sdp_value = Some(out.report.objective);
                    rec.spectral = Some(out.report.spectral);
                    rec.program_rounds = Some(out.rounds);
                    est
                }
                Algorithm::Sparse => {
                    let mut p = SparseParams::new(graph.n(), d, config.mu);
                    if let Some(c) = config.cdeg {
                        p.c_deg = c;
                    }
                    p.trials = config.rounding_trials;
                    let (est, pruned) = recover_sparse(&graph, &p, d, &mut rng)?;
                    rec.prune_rounds = Some(pruned.log.rounds);
                    rec.max_degree = Some(pruned.graph.max_degree());
                    rec.sdp_value = Some(est.objective);
                    est
                }
                Algorithm::Baseline => {
                    let m = center_adjacency::<f64>(&graph, d);
                    let sol = solve_basic_sdp(&m, &SdpOptions { seed, ..sdp })?;
                    rec.sdp_value = Some(sol.value);
                    rec.iterations = Some(sol.iterations);
                    rec.dual_gap = sol.dual_gap;
                    select_estimate(gaussian_sign_rounding(&sol.factor, config.rounding_trials, &mut rng), &m)?
                }
            };
            rec.overlap_sq_frac = Some(evaluate_overlap(&est.labels, &truth)?);
        }
        ModelKind::Z2 => {
            let clean: Z2Instance<f64> = sample_z2(n, config.sigma, &labels, &mut rng)?;
            let inst = match adv {
                AdversaryKind::None => clean,
                AdversaryKind::Z2(s) => {
                    let (i, r) = corrupt_z2(&clean, s, config.mu, &mut rng)?;
                    rec.corrupted = r.corrupted.len();
                    i
                }
                _ => return invalid("sbm adversary on z2"),
            };
            let est = match config.algorithm {
                Algorithm::Dense => {
                    let Some(CalibrationUsed::Z2(cal)) = cal else {
                        return invalid("z2 pipeline needs a z2 calibration");
                    };
                    let mut p = Z2ProgramParams::calibrated(config.mu, cal);
                    p.sigma = config.sigma;
                    if let Some(delta) = config.delta_override {
                        p.delta_sigma = delta;
                    }
                    p.trials = config.rounding_trials;
                    p.sdp.seed = seed;
                    let (est, out) = recover_z2(&inst.matrix, &p, &mut rng)?;
                    rec.feasible = Some(out.report.feasible);
                    rec.sdp_value = Some(out.report.objective);
                    rec.spectral = Some(out.report.spectral);
                    rec.program_rounds = Some(out.rounds);
                    est
                }
                Algorithm::Baseline => {
                    let sol = solve_basic_sdp(&inst.matrix, &SdpOptions { seed, ..sdp })?;
                    rec.sdp_value = Some(sol.value);
                    rec.iterations = Some(sol.iterations);
                    rec.dual_gap = sol.dual_gap;
                    select_estimate(gaussian_sign_rounding(&sol.factor, config.rounding_trials, &mut rng), &inst.matrix)?
                }
                Algorithm::Sparse => return invalid("the sparse pipeline is defined for sbm only"),
            };
            rec.overlap_sq_frac = Some(evaluate_overlap(&est.labels, &labels)?);
        }
    }
    Ok(rec)
}

/// Runs every trial, in parallel up to the worker count, and aggregates.
/// Trial failures are recorded, never propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let calibration = calibration_for(config)?;
    let cal = calibration.as_ref();
    let workers = resolve_workers(config.workers);
    let records: Vec<TrialRecord> = if workers == 1 {
        (0..config.trials).map(|t| run_trial(config, cal, t)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..config.trials).into_par_iter().map(|t| run_trial(config, cal, t)).collect())
    };
    let aggregates = aggregate(&records);
    Ok(Report { schema_version: REPORT_SCHEMA_VERSION, config: config.clone(), calibration, records, aggregates })
}

/// One grid point: named overrides applied to the base configuration.
pub type GridPoint = Vec<(String, f64)>;

fn csv_cell(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

/// One CSV row per grid point, in grid order. Columns are the override names
/// in order of first appearance, then `mean_overlap, std, feasible_rate,
/// mean_runtime_s`. Points with failed trials are listed in a trailing
/// `#` comment line.
pub fn phase_sweep(base: &ExperimentConfig, grid: &[GridPoint]) -> Result<String> {
    if grid.is_empty() {
        return invalid("phase sweep needs a nonempty grid");
    }
    let mut names: Vec<&str> = Vec::new();
    for (name, _) in grid.iter().flatten() {
        if !names.contains(&name.as_str()) {
            names.push(name);
        }
    }
    let mut out = format!("# ksrobust sweep csv v{CSV_SCHEMA_VERSION}\n");
    out.push_str(&names.join(","));
    out.push_str(",mean_overlap,std,feasible_rate,mean_runtime_s\n");
    let mut notes = Vec::new();
    for (row, point) in grid.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.record_runtime = true;
        let mut cells: Vec<String> = Vec::new();
        let mut setup = Ok(());
        for name in &names {
            match point.iter().find(|(k, _)| k == name) {
                Some(&(_, v)) => {
                    setup = setup.and(cfg.set_param(name, v));
                    cells.push(csv_cell(v));
                }
                None => cells.push(String::new()),
            }
        }
        let agg = match setup.and_then(|_| run_experiment(&cfg)) {
            Ok(report) => {
                let failed = report.records.iter().filter(|r| r.status != TrialStatus::Ok).count();
                if failed > 0 {
                    notes.push(format!("row {row}: {failed}/{} trials failed", report.records.len()));
                }
                report.aggregates
            }
            Err(e) => {
                notes.push(format!("row {row}: {e}"));
                aggregate(&[])
            }
        };
        cells.push(csv_cell(agg.mean));
        cells.push(csv_cell(agg.std));
        cells.push(csv_cell(agg.feasible_rate.unwrap_or(f64::NAN)));
        cells.push(csv_cell(agg.mean_runtime_s.unwrap_or(f64::NAN)));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    if !notes.is_empty() {
        let _ = writeln!(out, "# NaN or partial cells: {}", notes.join("; "));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[i8]) -> LabelVector {
        LabelVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let x = lv(&[1, -1, 1, -1]);
        assert_eq!(evaluate_overlap(&x, &x).unwrap(), 1.0);
        assert_eq!(evaluate_overlap(&x.negated(), &x).unwrap(), 1.0);
        assert_eq!(evaluate_overlap(&lv(&[1, 1, 1, 1]), &x).unwrap(), 0.0);
        assert!(evaluate_overlap(&lv(&[1]), &x).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&s, 0.5), 1.5);
        assert_eq!(quantile(&s, 1.0), 3.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn adversary_tags_parse() {
        assert_eq!("none".parse::<AdversaryKind>().unwrap(), AdversaryKind::None);
        assert_eq!("stealth-rewire".parse::<AdversaryKind>().unwrap(), AdversaryKind::Node(NodeStrategy::StealthRewire));
        assert_eq!("anti-signal".parse::<AdversaryKind>().unwrap(), AdversaryKind::Z2(Z2Strategy::AntiSignal));
        assert!("bogus".parse::<AdversaryKind>().is_err());
    }

    fn small() -> ExperimentConfig {
        ExperimentConfig { n: 60, d: 8.0, trials: 3, algorithm: Algorithm::Baseline, ..Default::default() }
    }

    #[test]
    fn reports_are_deterministic_and_complete() {
        let a = run_experiment(&small()).unwrap();
        let b = run_experiment(&ExperimentConfig { workers: Some(2), ..small() }).unwrap();
        assert_eq!(a.records.len(), 3);
        assert_eq!(serde_json::to_string(&a.records).unwrap(), serde_json::to_string(&b.records).unwrap());
        assert_eq!(a.to_json().unwrap(), run_experiment(&small()).unwrap().to_json().unwrap());
        assert!(a.records.iter().all(|r| r.status == TrialStatus::Ok));
    }

    #[test]
    fn trial_failures_are_recorded() {
        let mut cfg = small();
        cfg.algorithm = Algorithm::Sparse;
        cfg.cdeg = Some(0.01);
        let r = run_experiment(&cfg).unwrap();
        assert!(r.records.iter().all(|r| r.status == TrialStatus::Error));
        assert!(r.aggregates.mean.is_nan());
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let grid = vec![vec![("mu".to_string(), 0.0)], vec![("mu".to_string(), 0.1)]];
        let csv = phase_sweep(&small(), &grid).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "mu,mean_overlap,std,feasible_rate,mean_runtime_s");
        assert!(lines[2].starts_with("0,"));
        assert!(lines[3].starts_with("0.1,"));
        assert!(phase_sweep(&small(), &[]).is_err());
    }
}
