//! Alternating maximization over pairs `(X, w)`: a unit-diagonal Gram matrix
//! `X = V Vᵀ` and a 0/1 support vector `w` of fixed size, subject to
//!
//! ```text
//! ⟨M ⊙ w wᵀ, X⟩ ≥ objective_threshold,   ‖M ⊙ w wᵀ‖_op ≤ spectral_cap.
//! ```
//!
//! With `w` fixed the first constraint is a basic SDP on the principal
//! submatrix; with `X` fixed, vertices are swapped in and out of the support.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{gram_objective, Factor, Restrict, SymOperator};
use crate::scalar::{dot, norm, Scalar};
use crate::sdp::{solve_basic_sdp, solve_basic_sdp_from, SdpOptions};
use crate::seed::rng_from;
use crate::spectral::{operator_norm, DEFAULT_NORM_TOL};

/// Relative slack allowed on the objective constraint.
pub const OBJECTIVE_TOL: f64 = 1e-6;

/// A candidate `(X, w)`; rows of the factor outside the support are free.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramPoint<T> {
    pub factor: Factor<T>,
    pub w: Vec<u8>,
}

impl<T: Scalar> ProgramPoint<T> {
    pub fn new(factor: Factor<T>, support: &[usize]) -> Result<Self> {
        let n = factor.rows();
        let mut w = vec![0u8; n];
        for &i in support {
            if i >= n {
                return invalid(format!("support index {i} out of range for n = {n}"));
            }
            w[i] = 1;
        }
        Ok(Self { factor, w })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// `{ i : wᵢ = 1 }`, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.w.iter().enumerate().filter_map(|(i, &x)| (x == 1).then_some(i)).collect()
    }

    /// `Xᵢⱼ = ⟨Vᵢ, Vⱼ⟩`.
    pub fn x(&self, i: usize, j: usize) -> T {
        self.factor.gram(i, j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub objective: f64,
    pub objective_threshold: f64,
    pub spectral: f64,
    pub spectral_threshold: f64,
    /// `objective − objective_threshold`.
    pub objective_slack: f64,
    /// `spectral_threshold − spectral`.
    pub spectral_slack: f64,
    pub objective_tol: f64,
    pub spectral_tol: f64,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn new(objective: f64, objective_threshold: f64, spectral: f64, spectral_threshold: f64) -> Self {
        let objective_tol = OBJECTIVE_TOL * objective_threshold.abs().max(1.0);
        let spectral_tol = DEFAULT_NORM_TOL * spectral_threshold.abs().max(1e-12);
        let feasible = objective >= objective_threshold - objective_tol && spectral <= spectral_threshold + spectral_tol;
        Self {
            objective,
            objective_threshold,
            spectral,
            spectral_threshold,
            objective_slack: objective - objective_threshold,
            spectral_slack: spectral_threshold - spectral,
            objective_tol,
            spectral_tol,
            feasible,
        }
    }

    fn spectral_excess(&self) -> f64 {
        (-self.spectral_slack - self.spectral_tol).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgramConstraints {
    pub support_size: usize,
    pub objective_threshold: f64,
    pub spectral_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternatingOptions {
    pub sdp: SdpOptions,
    /// Total number of single-vertex swaps allowed.
    pub swap_budget: usize,
    pub max_rounds: usize,
    /// Swaps applied per round before the SDP is re-solved.
    pub batch: usize,
    pub seed: u64,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        Self { sdp: SdpOptions::default(), swap_budget: 20, max_rounds: 12, batch: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramOutcome<T> {
    pub point: ProgramPoint<T>,
    pub report: FeasibilityReport,
    pub rounds: usize,
    pub swaps: usize,
}

/// Exact evaluation of both constraints at `point`.
pub fn check_constraints<T, O>(m: &O, point: &ProgramPoint<T>, c: &ProgramConstraints) -> Result<FeasibilityReport>
where
    T: Scalar,
    O: SymOperator<T> + Restrict,
{
    if point.n() != m.dim() || point.factor.rows() != m.dim() {
        return invalid("program point does not match the matrix dimension");
    }
    let support = point.support();
    let sub = m.restrict(&support);
    let objective = gram_objective(&sub, &point.factor.select_rows(&support)).to_f64_lossy();
    let spectral = support_norm(&sub, support.len());
    Ok(FeasibilityReport::new(objective, c.objective_threshold, spectral, c.spectral_cap))
}

fn support_norm<T: Scalar, O: SymOperator<T>>(sub: &O, size: usize) -> f64 {
    let mut rng = rng_from(0x0_9E27_0B5, size as u64);
    operator_norm(sub, DEFAULT_NORM_TOL, &mut rng).value.to_f64_lossy()
}

/// Per-vertex data derived from the current factor restricted to the support.
struct Fields<T> {
    /// `Σ_{j∈S} Mᵢⱼ vⱼ` for every vertex `i`.
    field: Factor<T>,
}

impl<T: Scalar> Fields<T> {
    fn compute<O: SymOperator<T>>(m: &O, v: &Factor<T>, in_support: &[bool]) -> Self {
        let mut masked = v.clone();
        for (i, &s) in in_support.iter().enumerate() {
            if !s {
                masked.row_mut(i).iter_mut().for_each(|x| *x = T::zero());
            }
        }
        let mut field = Factor::zeros(v.rows(), v.cols());
        m.apply_block(&masked, &mut field);
        Self { field }
    }

    /// Objective lost when `i ∈ S` leaves: `2⟨vᵢ, fᵢ − Mᵢᵢ vᵢ⟩ + Mᵢᵢ`.
    fn loss<O: SymOperator<T>>(&self, m: &O, v: &Factor<T>, i: usize) -> f64 {
        let mii = m.entry(i, i);
        let fi = dot(v.row(i), self.field.row(i)) - mii;
        (T::of(2.0) * fi + mii).to_f64_lossy()
    }

    /// Objective gained when `j ∉ S` joins with its best-response row.
    fn gain<O: SymOperator<T>>(&self, m: &O, j: usize) -> f64 {
        (T::of(2.0) * norm(self.field.row(j)) + m.entry(j, j)).to_f64_lossy()
    }

    fn best_response(&self, j: usize, out: &mut [T]) {
        let f = self.field.row(j);
        let nrm = norm(f);
        if nrm > T::zero() {
            out.iter_mut().zip(f).for_each(|(o, &x)| *o = x / nrm);
        }
    }
}

/// Alternating maximization from `init_support`. Returns the best feasible
/// point seen, or else the point with the smallest spectral violation
/// (ties broken by objective).
pub fn solve_alternating<T, O>(
    m: &O,
    init_support: &[usize],
    c: &ProgramConstraints,
    opts: &AlternatingOptions,
) -> Result<ProgramOutcome<T>>
where
    T: Scalar,
    O: SymOperator<T> + Restrict,
{
    let n = m.dim();
    if init_support.len() != c.support_size {
        return invalid(format!("initial support has {} vertices, expected {}", init_support.len(), c.support_size));
    }
    if c.support_size > n {
        return invalid(format!("support size {} exceeds n = {n}", c.support_size));
    }
    let mut in_s = vec![false; n];
    for &i in init_support {
        if i >= n || in_s[i] {
            return invalid(format!("initial support entry {i} is out of range or repeated"));
        }
        in_s[i] = true;
    }
    let r = opts.sdp.rank_for(c.support_size.max(1));
    let mut rng = rng_from(opts.seed, 0x5EED);
    let mut v = Factor::random_unit(n, r, &mut rng);
    let mut banned = vec![false; n];
    let mut swaps = 0usize;
    let mut best: Option<(ProgramPoint<T>, FeasibilityReport)> = None;
    let mut rounds = 0;

    for round in 0..opts.max_rounds.max(1) {
        rounds = round + 1;
        let support: Vec<usize> = (0..n).filter(|&i| in_s[i]).collect();
        let sub = m.restrict(&support);
        let sdp_opts = SdpOptions { certify: false, seed: opts.seed.wrapping_add(round as u64), ..opts.sdp.clone() };
        let sol = if round == 0 {
            solve_basic_sdp(&sub, &sdp_opts)?
        } else {
            solve_basic_sdp_from(&sub, v.select_rows(&support), &sdp_opts)?
        };
        for (k, &i) in support.iter().enumerate() {
            v.row_mut(i).copy_from_slice(sol.factor.row(k));
        }
        let fields = Fields::compute(m, &v, &in_s);
        for j in (0..n).filter(|&j| !in_s[j]) {
            let mut row = v.row(j).to_vec();
            fields.best_response(j, &mut row);
            v.row_mut(j).copy_from_slice(&row);
        }
        let mut norm_rng = rng_from(0x0_9E27_0B5, support.len() as u64);
        let est = operator_norm(&sub, DEFAULT_NORM_TOL, &mut norm_rng);
        let report = FeasibilityReport::new(sol.value.to_f64_lossy(), c.objective_threshold, est.value.to_f64_lossy(), c.spectral_cap);
        let better = match &best {
            None => true,
            Some((_, b)) => match (report.feasible, b.feasible) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => report.objective > b.objective,
                (false, false) => {
                    let (e, be) = (report.spectral_excess(), b.spectral_excess());
                    e < be || (e == be && report.objective > b.objective)
                }
            },
        };
        if better {
            best = Some((ProgramPoint { factor: v.clone(), w: in_s.iter().map(|&b| b as u8).collect() }, report.clone()));
        }
        if swaps >= opts.swap_budget || round + 1 == opts.max_rounds.max(1) {
            break;
        }

        let mut changed = false;
        if report.spectral > c.spectral_cap + report.spectral_tol {
            // Spectral repair: evict high-leverage vertices, without re-solving the SDP.
            let mut cur_norm = report.spectral;
            let mut cur_vec: Vec<T> = est.vector.clone();
            let mut cur_support = support.clone();
            while cur_norm > c.spectral_cap + report.spectral_tol && swaps < opts.swap_budget {
                let sub = m.restrict(&cur_support);
                let mut lev: Vec<(f64, usize)> = cur_support
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| ((sub.row_norm_sq(k).sqrt() * cur_vec[k].abs()).to_f64_lossy(), i))
                    .collect();
                lev.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                let mut evicted = 0;
                for &(_, i) in lev.iter().take(opts.batch.max(1)) {
                    if swaps >= opts.swap_budget {
                        break;
                    }
                    let Some(j) = best_admission(m, &fields, &in_s, &banned) else { break };
                    in_s[i] = false;
                    banned[i] = true;
                    in_s[j] = true;
                    swaps += 1;
                    evicted += 1;
                }
                if evicted == 0 {
                    break;
                }
                changed = true;
                cur_support = (0..n).filter(|&i| in_s[i]).collect();
                let sub = m.restrict(&cur_support);
                let mut norm_rng = rng_from(0x0_9E27_0B5, cur_support.len() as u64);
                let e = operator_norm(&sub, DEFAULT_NORM_TOL, &mut norm_rng);
                cur_norm = e.value.to_f64_lossy();
                cur_vec = e.vector;
            }
        } else {
            // Objective improvement: trade the weakest members for the strongest outsiders.
            let mut losses: Vec<(f64, usize)> = support.iter().map(|&i| (fields.loss(m, &v, i), i)).collect();
            losses.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut gains: Vec<(f64, usize)> =
                (0..n).filter(|&j| !in_s[j] && !banned[j]).map(|j| (fields.gain(m, j), j)).collect();
            gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            for (&(l, i), &(g, j)) in losses.iter().zip(&gains).take(opts.batch.max(1)) {
                if swaps >= opts.swap_budget || g <= l + 1e-9 * l.abs().max(1.0) {
                    break;
                }
                in_s[i] = false;
                in_s[j] = true;
                swaps += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let (point, report) = best.expect("at least one round");
    Ok(ProgramOutcome { point, report, rounds, swaps })
}

fn best_admission<T: Scalar, O: SymOperator<T>>(m: &O, fields: &Fields<T>, in_s: &[bool], banned: &[bool]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for j in 0..in_s.len() {
        if in_s[j] || banned[j] {
            continue;
        }
        let g = fields.gain(m, j);
        if best.is_none_or(|(b, _)| g > b) {
            best = Some((g, j));
        }
    }
    best.map(|(_, j)| j)
}
