//! Robust Z₂ synchronization: the same alternating program on a dense
//! observation, with spectral cap `(σ + σ⁻¹) n` and no pruning budget.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::Z2Calibration;
use crate::dense::select_on_support;
use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, SymOperator};
use crate::program::{solve_alternating, AlternatingOptions, ProgramConstraints, ProgramOutcome};
use crate::rounding::{gaussian_sign_rounding, Estimate, DEFAULT_TRIALS};
use crate::scalar::Scalar;
use crate::sdp::SdpOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z2ProgramParams {
    pub mu: f64,
    pub sigma: f64,
    /// Push-out margin `Δ(σ)`.
    pub delta_sigma: f64,
    /// Asymptotic level 2, or the measured null level.
    pub baseline: f64,
    pub sdp: SdpOptions,
    pub trials: usize,
}

impl Z2ProgramParams {
    pub fn new(mu: f64, sigma: f64, delta_sigma: f64) -> Self {
        Self {
            mu,
            sigma,
            delta_sigma,
            baseline: 2.0,
            sdp: SdpOptions { restarts: 1, certify: false, ..SdpOptions::default() },
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn calibrated(mu: f64, cal: &Z2Calibration) -> Self {
        Self { baseline: cal.null_level, ..Self::new(mu, cal.sigma, cal.delta_sigma) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mu) {
            return invalid(format!("mu = {} outside [0, 1)", self.mu));
        }
        if !(self.sigma > 0.0) {
            return invalid(format!("sigma = {} must be positive", self.sigma));
        }
        if !(self.delta_sigma > 0.0) {
            return invalid(format!("Delta(sigma) = {} must be positive", self.delta_sigma));
        }
        if self.trials == 0 {
            return invalid("rounding needs at least one trial");
        }
        Ok(())
    }

    pub fn constraints(&self, n: usize) -> ProgramConstraints {
        let kept = 1.0 - self.mu;
        ProgramConstraints {
            support_size: ((kept * n as f64) + 1e-9).floor() as usize,
            objective_threshold: (self.baseline + self.delta_sigma) * kept * kept * (n * n) as f64,
            spectral_cap: (self.sigma + 1.0 / self.sigma) * n as f64,
        }
    }
}

/// Initial support: drop the rows whose norm deviates most from the median row norm.
fn initial_support<T: Scalar>(a: &DenseMatrix<T>, size: usize) -> Vec<usize> {
    let n = a.n();
    let norms: Vec<f64> = (0..n).map(|i| a.row_norm_sq(i).sqrt().to_f64_lossy()).collect();
    let mut sorted = norms.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| (norms[a] - median).abs().total_cmp(&(norms[b] - median).abs()).then(a.cmp(&b)));
    idx.truncate(size);
    idx.sort_unstable();
    idx
}

pub fn solve_z2_program<T: Scalar, R: Rng + ?Sized>(
    a: &DenseMatrix<T>,
    params: &Z2ProgramParams,
    rng: &mut R,
) -> Result<ProgramOutcome<T>> {
    params.validate()?;
    if !a.is_symmetric() {
        return invalid("Z2 observation must be symmetric");
    }
    let n = a.n();
    let c = params.constraints(n);
    let init = initial_support(a, c.support_size);
    let opts = AlternatingOptions {
        sdp: params.sdp.clone(),
        swap_budget: 4 * (params.mu * n as f64 - 1e-9).ceil().max(0.0) as usize + 20,
        batch: (n / 100).max(4),
        seed: rng.random(),
        ..AlternatingOptions::default()
    };
    solve_alternating(a, &init, &c, &opts)
}

pub fn recover_z2<R: Rng + ?Sized>(
    a: &DenseMatrix<f64>,
    params: &Z2ProgramParams,
    rng: &mut R,
) -> Result<(Estimate, ProgramOutcome<f64>)> {
    let outcome = solve_z2_program(a, params, rng)?;
    let candidates = gaussian_sign_rounding(&outcome.point.factor, params.trials, rng);
    let mut est = select_on_support(candidates, a, &outcome.point.support())?;
    est.low_confidence = !outcome.report.feasible;
    est.feasibility = Some(outcome.report.clone());
    Ok((est, outcome))
}
