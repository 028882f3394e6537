//! Node-robust recovery for diverging degree: find `(X, w)` whose support
//! carries a large basic-SDP value and a bounded spectral norm, then round `X`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationTable, PushOutCalibration};
use crate::error::{invalid, Result};
use crate::linalg::{Restrict, SymOperator};
use crate::model::{center_adjacency, CenteredMatrix, Graph};
use crate::program::{
    check_constraints, solve_alternating, AlternatingOptions, FeasibilityReport, ProgramConstraints, ProgramOutcome,
    ProgramPoint,
};
use crate::rounding::{gaussian_sign_rounding, select_estimate, Estimate, DEFAULT_TRIALS};
use crate::scalar::Scalar;
use crate::sdp::SdpOptions;
use crate::spectral::prune_high_degree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseProgramParams {
    /// Corruption budget `μ`.
    pub mu: f64,
    /// Pruning budget `β`.
    pub beta: f64,
    /// Push-out margin `Δ`.
    pub delta: f64,
    /// Spectral constant `C_s`.
    pub c_s: f64,
    /// Push-in slack `ρ`; only enters [`certified_correlation_bound`].
    pub rho: f64,
    /// Level the margin is measured from. Asymptotically 2; calibration
    /// replaces it with the measured null level at the working size.
    pub baseline: f64,
    pub sdp: SdpOptions,
    pub trials: usize,
}

impl DenseProgramParams {
    /// Table defaults with the asymptotic baseline 2.
    pub fn new(mu: f64, delta: f64, rho: f64) -> Self {
        let t = CalibrationTable::builtin();
        Self {
            mu,
            beta: t.prune_budget,
            delta,
            c_s: t.spectral_constant,
            rho,
            baseline: 2.0,
            sdp: SdpOptions { restarts: 1, certify: false, ..SdpOptions::default() },
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn calibrated(mu: f64, cal: &PushOutCalibration) -> Self {
        Self { baseline: cal.null_level, ..Self::new(mu, cal.delta, cal.rho) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mu) || self.beta < 0.0 || self.mu + self.beta >= 1.0 {
            return invalid(format!("need 0 ≤ mu, beta and mu + beta < 1 (mu = {}, beta = {})", self.mu, self.beta));
        }
        if !(self.delta > 0.0) {
            return invalid(format!("Delta = {} must be positive", self.delta));
        }
        if !(self.c_s > 0.0) {
            return invalid(format!("C_s = {} must be positive", self.c_s));
        }
        if self.trials == 0 {
            return invalid("rounding needs at least one trial");
        }
        Ok(())
    }

    pub fn support_size(&self, n: usize) -> usize {
        (((1.0 - self.mu - self.beta) * n as f64) + 1e-9).floor() as usize
    }

    pub fn constraints(&self, n: usize, d: f64) -> ProgramConstraints {
        ProgramConstraints {
            support_size: self.support_size(n),
            objective_threshold: (self.baseline + self.delta) * (1.0 - self.mu - self.beta) * n as f64 * d.sqrt(),
            spectral_cap: self.c_s * d.sqrt(),
        }
    }

    /// `4 ⌈μn⌉ + 20`.
    pub fn swap_budget(&self, n: usize) -> usize {
        4 * (self.mu * n as f64 - 1e-9).ceil().max(0.0) as usize + 20
    }
}

/// Initial support: drop vertices above the `20 α` degree cap, then trim or
/// refill by degree atypicality `|deg − d|` (ties favor the lower index).
pub fn initial_support(graph: &Graph, d: f64, eps: f64, size: usize) -> Vec<usize> {
    let alpha = CalibrationTable::builtin().alpha(d, eps);
    let pruned = prune_high_degree::<f64>(graph, alpha, d);
    let atypical = |i: usize| (graph.degree(i) as f64 - d).abs();
    let mut kept = pruned.kept;
    if kept.len() > size {
        kept.sort_by(|&a, &b| atypical(a).total_cmp(&atypical(b)).then(a.cmp(&b)));
        kept.truncate(size);
    } else if kept.len() < size {
        let mut back = pruned.removed;
        back.sort_by(|&a, &b| graph.degree(a).cmp(&graph.degree(b)).then(a.cmp(&b)));
        kept.extend(back.into_iter().take(size - kept.len()));
    }
    kept.sort_unstable();
    kept
}

/// Alternating search for a feasible `(X, w)` on the centered matrix.
pub fn solve_program<T: Scalar, R: Rng + ?Sized>(
    centered: &CenteredMatrix<T>,
    params: &DenseProgramParams,
    d: f64,
    eps: f64,
    rng: &mut R,
) -> Result<ProgramOutcome<T>> {
    params.validate()?;
    let n = centered.dim();
    let c = params.constraints(n, d);
    let init = initial_support(centered.graph(), d, eps, c.support_size);
    let opts = AlternatingOptions {
        sdp: params.sdp.clone(),
        swap_budget: params.swap_budget(n),
        batch: (n / 100).max(4),
        seed: rng.random(),
        ..AlternatingOptions::default()
    };
    solve_alternating(centered, &init, &c, &opts)
}

pub fn check_feasibility<T: Scalar>(
    centered: &CenteredMatrix<T>,
    point: &ProgramPoint<T>,
    params: &DenseProgramParams,
    d: f64,
) -> Result<FeasibilityReport> {
    check_constraints(centered, point, &params.constraints(centered.dim(), d))
}

/// Explicit lower bound on `⟨X, x xᵀ⟩` for a feasible point:
/// `((Δ − ρ)(1 − 2μ − β) − 2 C_s μ) n² / (ε √d) − 2 (2μ + β) n²`.
pub fn certified_correlation_bound(params: &DenseProgramParams, n: usize, d: f64, eps: f64) -> f64 {
    let (mu, beta) = (params.mu, params.beta);
    let n2 = (n * n) as f64;
    ((params.delta - params.rho) * (1.0 - 2.0 * mu - beta) - 2.0 * params.c_s * mu) * n2 / (eps * d.sqrt())
        - 2.0 * (2.0 * mu + beta) * n2
}

/// Center, solve the program, round, and select on the chosen support.
pub fn recover_dense<R: Rng + ?Sized>(
    graph: &Graph,
    params: &DenseProgramParams,
    d: f64,
    eps: f64,
    rng: &mut R,
) -> Result<(Estimate, ProgramOutcome<f64>)> {
    let centered = center_adjacency::<f64>(graph, d);
    let outcome = solve_program(&centered, params, d, eps, rng)?;
    let candidates = gaussian_sign_rounding(&outcome.point.factor, params.trials, rng);
    let support = outcome.point.support();
    let mut est = select_on_support(candidates, &centered, &support)?;
    est.low_confidence = !outcome.report.feasible;
    est.feasibility = Some(outcome.report.clone());
    Ok((est, outcome))
}

/// [`select_estimate`] scored by `x̂ᵀ (M ⊙ w wᵀ) x̂`.
pub(crate) fn select_on_support<T, O>(
    candidates: Vec<crate::model::LabelVector>,
    m: &O,
    support: &[usize],
) -> Result<Estimate>
where
    T: Scalar,
    O: SymOperator<T> + Restrict,
{
    let sub = m.restrict(support);
    let restricted: Vec<_> = candidates.iter().map(|c| c.select(support)).collect();
    let chosen = select_estimate(restricted, &sub)?;
    let k = candidates
        .iter()
        .position(|c| c.select(support) == chosen.labels)
        .expect("selected candidate comes from the list");
    Ok(Estimate { labels: candidates[k].clone(), ..chosen })
}
