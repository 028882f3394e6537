//! Constant-degree pipeline: iterative removal of the highest-degree vertex
//! together with a random neighbor, then basic-SDP recovery on the survivors.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationTable;
use crate::error::{invalid, Result};
use crate::model::{CenteredMatrix, Graph, LabelVector};
use crate::rounding::{gaussian_sign_rounding, select_estimate, Estimate, DEFAULT_TRIALS};
use crate::sdp::{solve_basic_sdp, SdpOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseParams {
    /// Degree multiplier `C_deg`.
    pub c_deg: f64,
    pub d: f64,
    pub mu: f64,
    pub round_cap: usize,
    pub sdp: SdpOptions,
    pub trials: usize,
}

impl SparseParams {
    /// Table `C_deg(μ)` and round cap `10 ⌈μn⌉ + 100`.
    pub fn new(n: usize, d: f64, mu: f64) -> Self {
        Self {
            c_deg: CalibrationTable::builtin().cdeg(mu),
            d,
            mu,
            round_cap: 10 * (mu * n as f64 - 1e-9).ceil().max(0.0) as usize + 100,
            sdp: SdpOptions { restarts: 1, certify: false, ..SdpOptions::default() },
            trials: DEFAULT_TRIALS,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.c_deg * self.d
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_deg * self.d >= 1.0) {
            return invalid(format!("C_deg · d = {} must be at least 1", self.c_deg * self.d));
        }
        if self.round_cap == 0 {
            return invalid("round cap must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalLog {
    pub rounds: usize,
    /// `(highest-degree vertex, random neighbor)` per round, original indices.
    pub removed: Vec<(usize, usize)>,
    pub cap_hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    /// Induced subgraph on the survivors, re-indexed.
    pub graph: Graph,
    /// `survivors[k]` is the original index of vertex `k`.
    pub survivors: Vec<usize>,
    pub log: RemovalLog,
}

/// While some vertex has degree above `C_deg · d`: remove the highest-degree
/// vertex (lowest index on ties) and a uniformly random surviving neighbor.
pub fn prune_iterative<R: Rng + ?Sized>(graph: &Graph, params: &SparseParams, rng: &mut R) -> Result<PruneOutcome> {
    params.validate()?;
    let n = graph.n();
    if n == 0 {
        return invalid("graph is empty");
    }
    let threshold = params.threshold();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = graph.degrees().to_vec();
    let mut heap: BTreeSet<(Reverse<usize>, usize)> = (0..n).map(|i| (Reverse(deg[i]), i)).collect();
    let mut log = RemovalLog { rounds: 0, removed: Vec::new(), cap_hit: false };

    let remove = |v: usize, alive: &mut Vec<bool>, deg: &mut Vec<usize>, heap: &mut BTreeSet<(Reverse<usize>, usize)>| {
        alive[v] = false;
        heap.remove(&(Reverse(deg[v]), v));
        for &u in graph.neighbors(v) {
            if alive[u] {
                heap.remove(&(Reverse(deg[u]), u));
                deg[u] -= 1;
                heap.insert((Reverse(deg[u]), u));
            }
        }
    };

    while let Some(&(Reverse(top), v)) = heap.first() {
        if top as f64 <= threshold {
            break;
        }
        if log.rounds >= params.round_cap {
            log.cap_hit = true;
            break;
        }
        let live: Vec<usize> = graph.neighbors(v).iter().copied().filter(|&u| alive[u]).collect();
        let u = live[rng.random_range(0..live.len())];
        remove(v, &mut alive, &mut deg, &mut heap);
        remove(u, &mut alive, &mut deg, &mut heap);
        log.removed.push((v, u));
        log.rounds += 1;
    }
    let survivors: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    Ok(PruneOutcome { graph: graph.induced(&survivors), survivors, log })
}

/// Prune, run the basic SDP on the centered survivor graph, round, and map
/// back; removed vertices receive independent uniform signs.
pub fn recover_sparse<R: Rng + ?Sized>(
    graph: &Graph,
    params: &SparseParams,
    d: f64,
    rng: &mut R,
) -> Result<(Estimate, PruneOutcome)> {
    let n = graph.n();
    let pruned = prune_iterative(graph, params, rng)?;
    let mut labels: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let mut est = if pruned.survivors.is_empty() {
        Estimate {
            labels: LabelVector::new(labels.clone())?,
            objective: 0.0,
            trials_used: 0,
            overlap_sq_frac: None,
            feasibility: None,
            low_confidence: true,
        }
    } else {
        let centered = CenteredMatrix::new(pruned.graph.clone(), d / n as f64);
        let sol = solve_basic_sdp(&centered, &SdpOptions { seed: rng.random(), ..params.sdp.clone() })?;
        let candidates = gaussian_sign_rounding(&sol.factor, params.trials, rng);
        let chosen = select_estimate(candidates, &centered)?;
        for (k, &i) in pruned.survivors.iter().enumerate() {
            labels[i] = chosen.labels.get(k);
        }
        Estimate { labels: LabelVector::new(labels)?, ..chosen }
    };
    est.low_confidence |= pruned.log.cap_hit;
    Ok((est, pruned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn low_degree_graph_is_untouched() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let p = SparseParams::new(5, 1.0, 0.0);
        let out = prune_iterative(&g, &p, &mut rng_from(0, 0)).unwrap();
        assert_eq!(out.log.rounds, 0);
        assert_eq!(out.graph, g);
    }

    #[test]
    fn star_loses_hub_and_one_leaf() {
        let n = 30;
        let g = Graph::from_edges(n, (1..n).map(|j| (0, j))).unwrap();
        let mut p = SparseParams::new(n, 1.0, 0.0);
        p.c_deg = 5.0;
        let out = prune_iterative(&g, &p, &mut rng_from(1, 0)).unwrap();
        assert_eq!(out.log.rounds, 1);
        assert_eq!(out.log.removed[0].0, 0);
        assert_eq!(out.graph.n(), n - 2);
        assert_eq!(out.graph.max_degree(), 0);
    }

    #[test]
    fn round_cap_is_flagged() {
        let n = 40;
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        let g = Graph::from_edges(n, edges).unwrap();
        let mut p = SparseParams::new(n, 1.0, 0.0);
        p.c_deg = 2.0;
        p.round_cap = 3;
        let out = prune_iterative(&g, &p, &mut rng_from(2, 0)).unwrap();
        assert!(out.log.cap_hit);
        assert_eq!(out.log.rounds, 3);
        assert_eq!(out.survivors.len(), n - 6);
    }

    #[test]
    fn defaults_follow_table() {
        let p = SparseParams::new(5000, 5.0, 0.02);
        assert_eq!(p.c_deg, 20.0);
        assert_eq!(p.round_cap, 1100);
        assert_eq!(p.threshold(), 100.0);
    }
}
