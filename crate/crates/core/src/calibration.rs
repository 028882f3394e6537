//! Empirical constants. The theory only asserts that they exist; the values
//! here are measured at desk scale and versioned in `calibration.json`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::RankOneShift;
use crate::model::{balanced_labels, center_adjacency, sample_sbm, sample_z2, SbmParams, Z2Instance};
use crate::sdp::{solve_basic_sdp, SdpOptions};
use crate::seed::{derive_seed, rng_from};

const TABLE_JSON: &str = include_str!("../calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdegEntry {
    pub mu_max: f64,
    pub cdeg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub version: u32,
    /// `C_s` in the spectral cap `C_s √d`.
    pub spectral_constant: f64,
    /// Fraction `β` of vertices the program may drop beyond the corruption budget.
    pub prune_budget: f64,
    /// `alpha = alpha_multiplier · (1 + eps) · d` for degree pruning.
    pub alpha_multiplier: f64,
    pub z2_xi: f64,
    /// `Δ = margin_factor · (signal level − null level)`.
    pub margin_factor: f64,
    /// `ρ = slack_factor · max(0, push-in level − null level)`.
    pub slack_factor: f64,
    pub cdeg_table: Vec<CdegEntry>,
}

impl CalibrationTable {
    pub fn builtin() -> &'static CalibrationTable {
        static TABLE: OnceLock<CalibrationTable> = OnceLock::new();
        TABLE.get_or_init(|| serde_json::from_str(TABLE_JSON).expect("bundled calibration table parses"))
    }

    /// `C_deg(μ)`: first table entry whose `mu_max` covers `mu`.
    pub fn cdeg(&self, mu: f64) -> f64 {
        self.cdeg_table
            .iter()
            .find(|e| mu <= e.mu_max)
            .or(self.cdeg_table.last())
            .map_or(12.0, |e| e.cdeg)
    }

    pub fn alpha(&self, d: f64, eps: f64) -> f64 {
        self.alpha_multiplier * (1.0 + eps) * d
    }
}

/// Measured SDP levels of uncorrupted SBM instances, normalized by `n √d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushOutCalibration {
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub seeds: usize,
    /// Mean `SDP(Ã)/(n√d)` at `eps = 0`: the finite-size stand-in for the asymptotic level 2.
    pub null_level: f64,
    /// Mean `SDP(Ã)/(n√d)` at the target `eps`.
    pub signal_level: f64,
    /// Mean `SDP(Ã − (εd/n) x xᵀ)/(n√d)` at the target `eps`.
    pub push_in_level: f64,
    pub delta: f64,
    pub rho: f64,
}

fn calibration_sdp_options(seed: u64) -> SdpOptions {
    SdpOptions { restarts: 1, certify: false, seed, ..SdpOptions::default() }
}

/// Runs `seeds` uncorrupted instances at `eps = 0` and at `eps`.
pub fn calibrate_push_out(n: usize, d: f64, eps: f64, seeds: usize, base_seed: u64) -> Result<PushOutCalibration> {
    let table = CalibrationTable::builtin();
    let scale = n as f64 * d.sqrt();
    let (mut null, mut signal, mut push_in) = (0.0, 0.0, 0.0);
    for s in 0..seeds {
        let seed = derive_seed(base_seed, s as u64);
        let mut rng = rng_from(seed, 1);
        let labels = balanced_labels(n, &mut rng)?;
        let null_graph = sample_sbm(&SbmParams::new(n, d, 0.0)?, &labels, &mut rng)?;
        let opts = calibration_sdp_options(seed);
        null += solve_basic_sdp(&center_adjacency::<f64>(&null_graph, d), &opts)?.value / scale;
        let params = SbmParams::new(n, d, eps)?;
        let graph = sample_sbm(&params, &labels, &mut rng)?;
        let centered = center_adjacency::<f64>(&graph, d);
        signal += solve_basic_sdp(&centered, &opts)?.value / scale;
        let shifted = RankOneShift::new(centered, eps * d / n as f64, labels.to_scalars());
        push_in += solve_basic_sdp(&shifted, &opts)?.value / scale;
    }
    let k = seeds.max(1) as f64;
    let (null, signal, push_in) = (null / k, signal / k, push_in / k);
    Ok(PushOutCalibration {
        n,
        d,
        eps,
        seeds,
        null_level: null,
        signal_level: signal,
        push_in_level: push_in,
        delta: table.margin_factor * (signal - null),
        rho: table.slack_factor * (push_in - null).max(0.0),
    })
}

/// Measured `SDP(A⁰)/n²` for uncorrupted Z₂ instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z2Calibration {
    pub n: usize,
    pub sigma: f64,
    pub seeds: usize,
    pub null_level: f64,
    pub signal_level: f64,
    pub delta_sigma: f64,
}

pub fn calibrate_z2(n: usize, sigma: f64, seeds: usize, base_seed: u64) -> Result<Z2Calibration> {
    let table = CalibrationTable::builtin();
    let scale = (n * n) as f64;
    let (mut null, mut signal) = (0.0, 0.0);
    for s in 0..seeds {
        let seed = derive_seed(base_seed, s as u64);
        let mut rng = rng_from(seed, 2);
        let labels = balanced_labels(n, &mut rng)?;
        let opts = calibration_sdp_options(seed);
        let a0: Z2Instance<f64> = sample_z2(n, 0.0, &labels, &mut rng)?;
        null += solve_basic_sdp(&a0.matrix, &opts)?.value / scale;
        let a: Z2Instance<f64> = sample_z2(n, sigma, &labels, &mut rng)?;
        signal += solve_basic_sdp(&a.matrix, &opts)?.value / scale;
    }
    let k = seeds.max(1) as f64;
    let (null, signal) = (null / k, signal / k);
    Ok(Z2Calibration { n, sigma, seeds, null_level: null, signal_level: signal, delta_sigma: table.margin_factor * (signal - null) })
}

type PushOutKey = (usize, u64, u64, usize, u64);

/// Memoized [`calibrate_push_out`]; results are deterministic so caching is transparent.
pub fn cached_push_out(n: usize, d: f64, eps: f64, seeds: usize, base_seed: u64) -> Result<PushOutCalibration> {
    static CACHE: OnceLock<Mutex<HashMap<PushOutKey, PushOutCalibration>>> = OnceLock::new();
    let key = (n, d.to_bits(), eps.to_bits(), seeds, base_seed);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("calibration cache").get(&key) {
        return Ok(c.clone());
    }
    let c = calibrate_push_out(n, d, eps, seeds, base_seed)?;
    cache.lock().expect("calibration cache").insert(key, c.clone());
    Ok(c)
}

type Z2Key = (usize, u64, usize, u64);

pub fn cached_z2(n: usize, sigma: f64, seeds: usize, base_seed: u64) -> Result<Z2Calibration> {
    static CACHE: OnceLock<Mutex<HashMap<Z2Key, Z2Calibration>>> = OnceLock::new();
    let key = (n, sigma.to_bits(), seeds, base_seed);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("calibration cache").get(&key) {
        return Ok(c.clone());
    }
    let c = calibrate_z2(n, sigma, seeds, base_seed)?;
    cache.lock().expect("calibration cache").insert(key, c.clone());
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_values() {
        let t = CalibrationTable::builtin();
        assert_eq!(t.version, 1);
        assert_eq!(t.spectral_constant, 3.0);
        assert_eq!(t.prune_budget, 0.02);
        assert_eq!(t.cdeg(0.0), 30.0);
        assert_eq!(t.cdeg(0.01), 30.0);
        assert_eq!(t.cdeg(0.02), 20.0);
        assert_eq!(t.cdeg(0.2), 12.0);
        assert!((t.alpha(40.0, 0.25) - 50.0).abs() < 1e-12);
    }
}
