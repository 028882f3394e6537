use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ksrobust::adversary::{corrupt_nodes, corrupt_z2, erasure_adversary, NodeStrategy, Z2Strategy};
use ksrobust::calibration::cached_push_out;
use ksrobust::harness::{
    calibration_eps, evaluate_overlap, phase_sweep, run_experiment, Algorithm, ExperimentConfig, GridPoint, ModelKind,
};
use ksrobust::io::{read_edge_list, read_labels, read_z2_matrix, write_edge_list, write_labels, write_z2_matrix};
use ksrobust::model::{balanced_labels, sample_sbm, sample_z2, CenteredMatrix, Graph, SbmParams, Z2Instance};
use ksrobust::sdp::{solve_basic_sdp, SdpOptions};
use ksrobust::seed::rng_from;
use ksrobust::spectral::prune_high_degree;
use ksrobust::{recover_dense, recover_sparse, DenseProgramParams, LabelVector, SparseParams};

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "ksrobust", version, about = "Robust community detection and Z2 synchronization")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for experiment runs (KSROBUST_WORKERS overrides).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample an SBM graph or a Z2 observation.
    Gen(GenArgs),
    /// Apply an adversary to a graph or Z2 matrix.
    Corrupt(CorruptArgs),
    /// Solve the basic SDP.
    Sdp(SdpArgs),
    /// Degree pruning and the resulting operator norm.
    Spectral(SpectralArgs),
    /// Recover communities from an edge list.
    Recover(RecoverArgs),
    /// Run a Z2 synchronization experiment.
    Z2(Z2Args),
    /// Phase sweep over a parameter grid, emitted as CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Sbm,
    Z2,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "sbm")]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 40.0)]
    d: f64,
    #[arg(long, conflicts_with = "delta")]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    sigma: f64,
    /// Where to write the planted labels.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    input: PathBuf,
    /// Planted labels (SBM strategies other than erasure need them).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    adversary: String,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 40.0)]
    d: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Treat the input as a binary Z2 matrix.
    #[arg(long)]
    matrix: bool,
    #[arg(long, default_value_t = 1.5)]
    sigma: f64,
    /// Where to write the corruption record JSON; stderr when absent.
    #[arg(long)]
    record_out: Option<PathBuf>,
}

#[derive(Args)]
struct SdpArgs {
    #[arg(long)]
    input: PathBuf,
    /// Center the adjacency matrix by d/n.
    #[arg(long)]
    centered: bool,
    /// Average degree for centering; defaults to 2m/n.
    #[arg(long)]
    d: Option<f64>,
    /// Treat the input as a binary Z2 matrix.
    #[arg(long)]
    matrix: bool,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Average degree for centering; defaults to 2m/n.
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Sparse,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long, value_enum, default_value = "dense")]
    mode: Mode,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Ground truth; adds overlap_sq_frac to the output.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Degree multiplier override for the sparse pipeline.
    #[arg(long)]
    cdeg: Option<f64>,
    /// Push-out margin override; calibrated when absent.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long, default_value_t = 5)]
    calibration_seeds: usize,
}

#[derive(Args)]
struct Z2Args {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value = "none")]
    adversary: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value = "dense")]
    algorithm: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "sbm")]
    model: String,
    #[arg(long, default_value = "dense")]
    algorithm: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 40.0)]
    d: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.5)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value = "none")]
    adversary: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// `name=v1,v2,...`; repeated flags form a cartesian product.
    #[arg(long, required = true)]
    grid: Vec<String>,
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> CliResult<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    Ok(())
}

fn open(p: &Path) -> CliResult<BufReader<File>> {
    File::open(p).map(BufReader::new).map_err(|e| format!("{}: {e}", p.display()).into())
}

fn load_graph(p: &Path) -> CliResult<Graph> {
    Ok(read_edge_list(open(p)?)?)
}

fn load_labels(p: &Path) -> CliResult<LabelVector> {
    Ok(read_labels(open(p)?)?)
}

fn empirical_d(g: &Graph) -> f64 {
    2.0 * g.edge_count() as f64 / g.n() as f64
}

fn gen(cli: &Cli, a: &GenArgs) -> CliResult<()> {
    let mut rng = rng_from(cli.seed, 0);
    let labels = balanced_labels(a.n, &mut rng)?;
    match a.model {
        Model::Sbm => {
            let params = match (a.eps, a.delta) {
                (Some(e), _) => SbmParams::new(a.n, a.d, e)?,
                (None, Some(delta)) => SbmParams::from_delta(a.n, a.d, delta)?,
                (None, None) => SbmParams::new(a.n, a.d, 0.0)?,
            };
            let g = sample_sbm(&params, &labels, &mut rng)?;
            write_edge_list(&g, sink(&cli.out)?)?;
        }
        Model::Z2 => {
            let inst: Z2Instance<f64> = sample_z2(a.n, a.sigma, &labels, &mut rng)?;
            let Some(out) = &cli.out else {
                return Err("z2 output is binary; pass --out".into());
            };
            write_z2_matrix(&inst.matrix, BufWriter::new(File::create(out)?))?;
        }
    }
    if let Some(p) = &a.labels_out {
        write_labels(&labels, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn corrupt(cli: &Cli, a: &CorruptArgs) -> CliResult<()> {
    let mut rng = rng_from(cli.seed, 0);
    let record = if a.matrix {
        let strategy: Z2Strategy = a.adversary.parse()?;
        let m = read_z2_matrix(open(&a.input)?)?;
        let n = m.n();
        let labels = match &a.labels {
            Some(p) => load_labels(p)?,
            None => LabelVector::new(vec![1; n])?,
        };
        let inst = Z2Instance { n, sigma: a.sigma, matrix: m, labels };
        let (out, rec) = corrupt_z2(&inst, strategy, a.mu, &mut rng)?;
        let Some(path) = &cli.out else {
            return Err("z2 output is binary; pass --out".into());
        };
        write_z2_matrix(&out.matrix, BufWriter::new(File::create(path)?))?;
        rec.to_json()?
    } else if a.adversary == "erasure" {
        let g = load_graph(&a.input)?;
        let (out, keep) = erasure_adversary(&g, a.mu, &mut rng)?;
        write_edge_list(&out, sink(&cli.out)?)?;
        let removed: Vec<usize> = (0..g.n()).filter(|i| keep.binary_search(i).is_err()).collect();
        json!({"mu": a.mu, "corrupted": removed, "strategy": "erasure", "kept": keep}).to_string()
    } else {
        let strategy: NodeStrategy = a.adversary.parse()?;
        let g = load_graph(&a.input)?;
        let labels = load_labels(a.labels.as_deref().ok_or("--labels is required for node corruption")?)?;
        let params = SbmParams::new(g.n(), a.d, a.eps)?;
        let (out, rec) = corrupt_nodes(&g, &labels, &params, strategy, a.mu, &mut rng)?;
        write_edge_list(&out, sink(&cli.out)?)?;
        rec.to_json()?
    };
    match &a.record_out {
        Some(p) => std::fs::write(p, record + "\n")?,
        None => eprintln!("{record}"),
    }
    Ok(())
}

fn sdp(cli: &Cli, a: &SdpArgs) -> CliResult<()> {
    let opts = SdpOptions { rank: a.rank, restarts: a.restarts.max(1), seed: cli.seed, ..SdpOptions::default() };
    let sol = if a.matrix {
        solve_basic_sdp(&read_z2_matrix(open(&a.input)?)?, &opts)?
    } else {
        let g = load_graph(&a.input)?;
        let shift = if a.centered { a.d.unwrap_or_else(|| empirical_d(&g)) / g.n() as f64 } else { 0.0 };
        solve_basic_sdp(&CenteredMatrix::new(g, shift), &opts)?
    };
    emit_json(&cli.out, &json!({"value": sol.value, "dual_gap": sol.dual_gap, "iterations": sol.iterations}))
}

fn spectral(cli: &Cli, a: &SpectralArgs) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let d = a.d.unwrap_or_else(|| empirical_d(&g));
    let r = prune_high_degree::<f64>(&g, a.alpha, d);
    emit_json(
        &cli.out,
        &json!({"kept_count": r.kept.len(), "norm_after": r.norm_after, "removed_fraction": r.removed_fraction}),
    )
}

fn recover(cli: &Cli, a: &RecoverArgs) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let truth = a.labels.as_deref().map(load_labels).transpose()?;
    let mut rng = rng_from(cli.seed, 0);
    let mut out = match a.mode {
        Mode::Dense => {
            let cal = cached_push_out(g.n(), a.d, calibration_eps(a.d, a.eps, None), a.calibration_seeds, cli.seed)?;
            let mut params = DenseProgramParams::calibrated(a.mu, &cal);
            if let Some(m) = a.margin {
                params.delta = m;
            }
            params.sdp.seed = cli.seed;
            let (est, outcome) = recover_dense(&g, &params, a.d, a.eps, &mut rng)?;
            json!({
                "labels": est.labels,
                "feasible": outcome.report.feasible,
                "objective": outcome.report.objective,
                "spectral": outcome.report.spectral,
                "objective_threshold": outcome.report.objective_threshold,
                "spectral_threshold": outcome.report.spectral_threshold,
                "support_size": outcome.point.support().len(),
            })
        }
        Mode::Sparse => {
            let mut params = SparseParams::new(g.n(), a.d, a.mu);
            if let Some(c) = a.cdeg {
                params.c_deg = c;
            }
            params.sdp.seed = cli.seed;
            let (est, pruned) = recover_sparse(&g, &params, a.d, &mut rng)?;
            json!({
                "labels": est.labels,
                "objective": est.objective,
                "low_confidence": est.low_confidence,
                "removal_log": pruned.log,
                "max_degree_after": pruned.graph.max_degree(),
            })
        }
    };
    if let Some(t) = truth {
        let labels: LabelVector = serde_json::from_value(out["labels"].clone())?;
        out["overlap_sq_frac"] = json!(evaluate_overlap(&labels, &t)?);
    }
    emit_json(&cli.out, &out)
}

fn z2(cli: &Cli, a: &Z2Args) -> CliResult<()> {
    let cfg = ExperimentConfig {
        model: ModelKind::Z2,
        n: a.n,
        sigma: a.sigma,
        mu: a.mu,
        adversary: a.adversary.clone(),
        algorithm: a.algorithm.parse()?,
        trials: a.trials,
        base_seed: cli.seed,
        workers: cli.workers,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg)?;
    emit_json(&cli.out, &serde_json::to_value(&report)?)
}

fn parse_grid(specs: &[String]) -> CliResult<Vec<GridPoint>> {
    let mut grid: Vec<GridPoint> = vec![Vec::new()];
    for spec in specs {
        let (name, values) = spec.split_once('=').ok_or_else(|| format!("grid `{spec}` is not name=v1,v2"))?;
        let values = values.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
        grid = grid
            .into_iter()
            .flat_map(|p| values.iter().map(move |&v| [p.clone(), vec![(name.to_string(), v)]].concat()))
            .collect();
    }
    Ok(grid)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> CliResult<()> {
    let model: ModelKind = a.model.parse()?;
    let algorithm: Algorithm = a.algorithm.parse()?;
    let base = ExperimentConfig {
        model,
        algorithm,
        n: a.n,
        d: a.d,
        delta: Some(a.delta),
        sigma: a.sigma,
        mu: a.mu,
        adversary: a.adversary.clone(),
        trials: a.trials,
        base_seed: cli.seed,
        workers: cli.workers,
        ..ExperimentConfig::default()
    };
    let csv = phase_sweep(&base, &parse_grid(&a.grid)?)?;
    sink(&cli.out)?.write_all(csv.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Gen(a) => gen(&cli, a),
        Cmd::Corrupt(a) => corrupt(&cli, a),
        Cmd::Sdp(a) => sdp(&cli, a),
        Cmd::Spectral(a) => spectral(&cli, a),
        Cmd::Recover(a) => recover(&cli, a),
        Cmd::Z2(a) => z2(&cli, a),
        Cmd::Sweep(a) => sweep(&cli, a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_cartesian() {
        let g = parse_grid(&["mu=0,0.1".into(), "delta=1,2,3".into()]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![("mu".to_string(), 0.0), ("delta".to_string(), 2.0)]);
        assert!(parse_grid(&["mu".into()]).is_err());
    }

    #[test]
    fn cli_parses() {
        Cli::try_parse_from(["ksrobust", "--seed", "3", "sdp", "--input", "g.txt", "--centered", "--rank", "8"]).unwrap();
        Cli::try_parse_from(["ksrobust", "recover", "--mode", "sparse", "--input", "g", "--d", "5", "--eps", "0.6", "--cdeg", "10"])
            .unwrap();
        assert!(Cli::try_parse_from(["ksrobust", "gen", "--n", "10", "--eps", "0.1", "--delta", "1"]).is_err());
    }
}
