//! Gaussian sign rounding of a unit-diagonal Gram factor and ground-truth-free
//! candidate selection.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{quadratic_form, Factor, SymOperator};
use crate::model::LabelVector;
use crate::program::FeasibilityReport;
use crate::scalar::{dot, Scalar};

pub const DEFAULT_TRIALS: usize = 50;

/// A recovered labelling with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub labels: LabelVector,
    /// `x̂ᵀ M x̂` under the selection matrix.
    pub objective: f64,
    pub trials_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap_sq_frac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityReport>,
    /// Set when the program was infeasible or pruning hit its round cap.
    pub low_confidence: bool,
}

impl Estimate {
    /// Attaches `⟨x̂, x*⟩² / n²`.
    pub fn with_truth(mut self, truth: &LabelVector) -> Result<Self> {
        self.overlap_sq_frac = Some(crate::harness::evaluate_overlap(&self.labels, truth)?);
        Ok(self)
    }
}

/// `trials` draws of `sign(V g)` with `g ~ N(0, I_r)`; `sign(0) = +1`.
pub fn gaussian_sign_rounding<T: Scalar, R: Rng + ?Sized>(factor: &Factor<T>, trials: usize, rng: &mut R) -> Vec<LabelVector> {
    let r = factor.cols();
    let mut g = vec![T::zero(); r];
    (0..trials.max(1))
        .map(|_| {
            for x in g.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *x = T::of(z);
            }
            let signs = (0..factor.rows())
                .map(|i| if dot(factor.row(i), &g) >= T::zero() { 1 } else { -1 })
                .collect();
            LabelVector::new(signs).expect("signs are ±1")
        })
        .collect()
}

/// Picks the candidate with the largest `x̂ᵀ M x̂`; ties keep the earliest.
pub fn select_estimate<T, O>(candidates: Vec<LabelVector>, m: &O) -> Result<Estimate>
where
    T: Scalar,
    O: SymOperator<T> + ?Sized,
{
    if candidates.is_empty() {
        return invalid("no candidates to select from");
    }
    let trials_used = candidates.len();
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in candidates.iter().enumerate() {
        if c.len() != m.dim() {
            return invalid(format!("candidate length {} does not match dimension {}", c.len(), m.dim()));
        }
        let score = quadratic_form(m, &c.to_scalars::<T>()).to_f64_lossy();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    let (k, objective) = best.expect("nonempty");
    let labels = candidates.into_iter().nth(k).expect("index in range");
    Ok(Estimate { labels, objective, trials_used, overlap_sq_frac: None, feasibility: None, low_confidence: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::evaluate_overlap;
    use crate::linalg::DenseMatrix;
    use crate::model::balanced_labels;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_one_factor_rounds_to_plus_minus_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = balanced_labels(40, &mut rng).unwrap();
        let f = Factor::from_column(&x.to_scalars::<f64>());
        for c in gaussian_sign_rounding(&f, 20, &mut rng) {
            assert!(c == x || c == x.negated());
            assert_eq!(evaluate_overlap(&c, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_projection_maps_to_plus() {
        let f = Factor::from_rows(&[vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        // g is never exactly orthogonal in general, but a zero row always is.
        let z = Factor::<f64>::zeros(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = gaussian_sign_rounding(&z, 3, &mut rng);
        assert!(out.iter().all(|c| c.as_slice().iter().all(|&s| s == 1)));
        let out = gaussian_sign_rounding(&f, 10, &mut rng);
        assert!(out.iter().all(|c| c.get(0) == -c.get(1)));
    }

    #[test]
    fn selection_rules() {
        let m = DenseMatrix::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let a = LabelVector::new(vec![1, 1]).unwrap();
        let b = LabelVector::new(vec![1, -1]).unwrap();
        let e = select_estimate(vec![b.clone()], &m).unwrap();
        assert_eq!(e.labels, b);
        let e = select_estimate(vec![b.clone(), a.clone(), a.negated()], &m).unwrap();
        assert_eq!(e.labels, a);
        assert_eq!(e.objective, 2.0);
        let e = select_estimate(vec![a.negated(), a.clone()], &m).unwrap();
        assert_eq!(e.labels, a.negated());
        assert!(select_estimate::<f64, _>(vec![], &m).is_err());
    }
}
