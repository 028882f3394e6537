//! Node-corruption adversaries for SBM graphs and row/column corruptions for
//! Z₂ matrices. Every strategy leaves the block on the uncorrupted set
//! untouched.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{balanced_labels, Graph, LabelVector, SbmParams, Z2Instance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStrategy {
    /// Drop all incident edges and attach `Poisson(d)` edges to the opposite community.
    StealthRewire,
    /// Connect each corrupted vertex to `⌊n/2⌋` random vertices.
    DegreeFlood,
    /// Resample incident edges as if the vertex's label were flipped.
    SignFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Z2Strategy {
    /// Corrupted rows carry `−σ xᵢ xⱼ` plus fresh noise.
    AntiSignal,
    ZeroOut,
    /// Corrupted rows carry `σ yᵢ yⱼ` for an independent sign vector `y`, plus fresh noise.
    SpikePlant,
}

macro_rules! tagged {
    ($ty:ty, $($variant:ident => $tag:literal),+) => {
        impl $ty {
            pub fn tag(&self) -> &'static str {
                match self { $(Self::$variant => $tag),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.tag())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($tag => Ok(Self::$variant),)+
                    other => invalid(format!("unknown adversary strategy `{other}`")),
                }
            }
        }
    };
}

tagged!(NodeStrategy, StealthRewire => "stealth-rewire", DegreeFlood => "degree-flood", SignFlip => "sign-flip");
tagged!(Z2Strategy, AntiSignal => "anti-signal", ZeroOut => "zero-out", SpikePlant => "spike-plant");

/// The hidden corrupted set and its complement indicator `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub mu: f64,
    /// Sorted corrupted indices.
    pub corrupted: Vec<usize>,
    pub strategy: String,
    /// `sᵢ = 1` iff `i` is not corrupted.
    #[serde(skip)]
    pub uncorrupted_indicator: Vec<u8>,
}

impl CorruptionRecord {
    fn new(n: usize, mu: f64, corrupted: Vec<usize>, strategy: &str) -> Self {
        let mut s = vec![1u8; n];
        for &i in &corrupted {
            s[i] = 0;
        }
        Self { mu, corrupted, strategy: strategy.to_string(), uncorrupted_indicator: s }
    }

    pub fn n(&self) -> usize {
        self.uncorrupted_indicator.len()
    }

    pub fn is_corrupted(&self, i: usize) -> bool {
        self.uncorrupted_indicator[i] == 0
    }

    /// The uncorrupted set `S*`, ascending.
    pub fn uncorrupted(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_corrupted(i)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses the JSON form; `n` restores the indicator vector.
    pub fn from_json(s: &str, n: usize) -> Result<Self> {
        let mut rec: Self = serde_json::from_str(s)?;
        if rec.corrupted.iter().any(|&i| i >= n) {
            return invalid("corrupted index out of range");
        }
        let corrupted = std::mem::take(&mut rec.corrupted);
        Ok(Self::new(n, rec.mu, corrupted, &rec.strategy))
    }
}

/// `⌊mu · n⌋`, robust to representation error in `mu`.
pub fn corruption_count(mu: f64, n: usize) -> usize {
    ((mu * n as f64) + 1e-9).floor() as usize
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&mu) {
        return invalid(format!("mu = {mu} outside [0, 1)"));
    }
    Ok(())
}

fn pick_corrupted<R: Rng + ?Sized>(n: usize, mu: f64, rng: &mut R) -> Vec<usize> {
    let k = corruption_count(mu, n);
    let mut c = sample(rng, n, k).into_vec();
    c.sort_unstable();
    c
}

fn assemble(n: usize, mut edges: Vec<(usize, usize)>) -> Graph {
    for e in edges.iter_mut() {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    edges.dedup();
    Graph::from_edges(n, edges).expect("adversary produced a simple graph")
}

/// Corrupts `⌊mu · n⌋` uniformly chosen vertices of `graph` with `strategy`.
pub fn corrupt_nodes<R: Rng + ?Sized>(
    graph: &Graph,
    labels: &LabelVector,
    params: &SbmParams,
    strategy: NodeStrategy,
    mu: f64,
    rng: &mut R,
) -> Result<(Graph, CorruptionRecord)> {
    check_mu(mu)?;
    let n = graph.n();
    if labels.len() != n || params.n != n {
        return invalid("labels, params and graph disagree on n");
    }
    let corrupted = pick_corrupted(n, mu, rng);
    let record = CorruptionRecord::new(n, mu, corrupted, strategy.tag());
    if record.corrupted.is_empty() {
        return Ok((graph.clone(), record));
    }
    let bad = |i: usize| record.is_corrupted(i);
    let mut edges: Vec<(usize, usize)> = graph.edges().iter().copied().filter(|&(u, v)| !bad(u) && !bad(v)).collect();
    let x = labels.as_slice();
    match strategy {
        NodeStrategy::StealthRewire => {
            let pois = Poisson::new(params.d).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for &v in &record.corrupted {
                let pool: Vec<usize> = (0..n).filter(|&u| x[u] != x[v]).collect();
                let k = (pois.sample(rng) as usize).min(pool.len());
                edges.extend(sample(rng, pool.len(), k).into_iter().map(|t| (v, pool[t])));
            }
        }
        NodeStrategy::DegreeFlood => {
            for &v in &record.corrupted {
                let k = n / 2;
                edges.extend(sample(rng, n - 1, k).into_iter().map(|t| (v, if t >= v { t + 1 } else { t })));
            }
        }
        NodeStrategy::SignFlip => {
            let base = params.d / n as f64;
            let apparent = |u: usize| if bad(u) { -x[u] } else { x[u] };
            for &v in &record.corrupted {
                for u in 0..n {
                    if u == v || (bad(u) && u < v) {
                        continue;
                    }
                    let p = (1.0 + params.eps * (apparent(v) * apparent(u)) as f64) * base;
                    if rng.random::<f64>() < p {
                        edges.push((v, u));
                    }
                }
            }
        }
    }
    Ok((assemble(n, edges), record))
}

/// Removes `⌊mu · n⌋` uniformly random vertices. Returns the induced
/// subgraph on the survivors and the map from new to original indices.
pub fn erasure_adversary<R: Rng + ?Sized>(graph: &Graph, mu: f64, rng: &mut R) -> Result<(Graph, Vec<usize>)> {
    check_mu(mu)?;
    let n = graph.n();
    let removed = pick_corrupted(n, mu, rng);
    let mut gone = vec![false; n];
    removed.iter().for_each(|&i| gone[i] = true);
    let keep: Vec<usize> = (0..n).filter(|&i| !gone[i]).collect();
    Ok((graph.induced(&keep), keep))
}

/// Overwrites the rows and columns of `⌊mu · n⌋` random indices.
pub fn corrupt_z2<T: Scalar, R: Rng + ?Sized>(
    inst: &Z2Instance<T>,
    strategy: Z2Strategy,
    mu: f64,
    rng: &mut R,
) -> Result<(Z2Instance<T>, CorruptionRecord)> {
    check_mu(mu)?;
    let n = inst.n;
    let corrupted = pick_corrupted(n, mu, rng);
    let record = CorruptionRecord::new(n, mu, corrupted, strategy.tag());
    let mut out = inst.clone();
    if record.corrupted.is_empty() {
        return Ok((out, record));
    }
    let off = Normal::new(0.0, (n as f64).sqrt()).expect("positive std");
    let diag = Normal::new(0.0, (2.0 * n as f64).sqrt()).expect("positive std");
    let x = inst.labels.as_slice();
    let sigma = inst.sigma;
    let fake = match strategy {
        Z2Strategy::SpikePlant => Some(balanced_labels(n, rng)?),
        _ => None,
    };
    for &i in &record.corrupted {
        for j in 0..n {
            if record.is_corrupted(j) && j < i {
                continue;
            }
            let noise = |rng: &mut R| -> f64 { if i == j { diag.sample(rng) } else { off.sample(rng) } };
            let val = match strategy {
                Z2Strategy::ZeroOut => 0.0,
                Z2Strategy::AntiSignal => -sigma * (x[i] * x[j]) as f64 + noise(rng),
                Z2Strategy::SpikePlant => {
                    let y = fake.as_ref().expect("fake spike").as_slice();
                    sigma * (y[i] * y[j]) as f64 + noise(rng)
                }
            };
            out.matrix.set(i, j, T::of(val));
            out.matrix.set(j, i, T::of(val));
        }
    }
    Ok((out, record))
}
