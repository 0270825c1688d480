//! Cross-solver check of the weak-drive amplitudes against the master equation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lindblad::{self, OracleConfig};
use crate::params::{DriveKind, SystemParams};
use crate::wavefunction;

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_POINTS: usize = 100;
pub const DRIVE: f64 = 1e-3;

/// Sampling box of the random parameter cloud.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CloudRanges {
    pub g: (f64, f64),
    pub kappa0: (f64, f64),
    /// Extra-loss fractions kappa_n / kappa and gamma_n / gamma.
    pub beta: (f64, f64),
    /// Detunings drawn from [-span * q, span * q].
    pub detuning_span: f64,
}

impl Default for CloudRanges {
    fn default() -> Self {
        Self { g: (0.1, 20.0), kappa0: (0.1, 20.0), beta: (0.0, 0.5), detuning_span: 2.0 }
    }
}

/// `count` reproducible parameter points, alternating atom and cavity drive.
pub fn random_cloud(count: usize, seed: u64, ranges: &CloudRanges) -> Vec<SystemParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let g = rng.gen_range(ranges.g.0..=ranges.g.1);
            let kappa0 = rng.gen_range(ranges.kappa0.0..=ranges.kappa0.1);
            let bk: f64 = rng.gen_range(ranges.beta.0..=ranges.beta.1);
            let bg: f64 = rng.gen_range(ranges.beta.0..=ranges.beta.1);
            let gamma0 = 1.0;
            let q = 2.0 * g / (kappa0 * gamma0).sqrt();
            let span = ranges.detuning_span * q;
            let delta_0c = rng.gen_range(-span..=span);
            let delta_0l = rng.gen_range(-span..=span);
            let kind = if k % 2 == 0 { DriveKind::Atom } else { DriveKind::Cavity };
            SystemParams {
                g,
                kappa0,
                kappa_n: kappa0 * bk / (1.0 - bk),
                gamma0,
                gamma_n: gamma0 * bg / (1.0 - bg),
                delta_0c,
                delta_0l,
                ..Default::default()
            }
            .with_drive(kind, DRIVE)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyPoint {
    pub params: SystemParams,
    pub g2_wavefunction: f64,
    pub g2_oracle: f64,
    pub rel_dev: f64,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub points: Vec<VerifyPoint>,
    /// Points where either solver failed, with the error text.
    pub failures: Vec<(SystemParams, String)>,
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
}

impl VerifyReport {
    pub fn worst(&self) -> Option<&VerifyPoint> {
        self.points.iter().max_by(|a, b| a.rel_dev.total_cmp(&b.rel_dev))
    }
}

pub fn compare(p: &SystemParams, cfg: &OracleConfig) -> Result<VerifyPoint> {
    let wf = wavefunction::observables(p)?;
    let sol = lindblad::solve(p, &cfg.adapted_to(p))?;
    let g2o = sol.observables.g2;
    Ok(VerifyPoint {
        params: *p,
        g2_wavefunction: wf.g2,
        g2_oracle: g2o,
        rel_dev: (wf.g2 - g2o).abs() / g2o,
        n_max: sol.state.n_max,
    })
}

/// Runs [`compare`] over the random cloud with auto-converged cutoffs.
pub fn run(count: usize, seed: u64, ranges: &CloudRanges, cfg: &OracleConfig) -> VerifyReport {
    let cfg = OracleConfig { auto_converge: true, ..*cfg };
    let cloud = random_cloud(count, seed, ranges);
    let results: Vec<_> = cloud.par_iter().map(|p| (p, compare(p, &cfg))).collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (p, r) in results {
        match r {
            Ok(v) => points.push(v),
            Err(e) => failures.push((*p, e.to_string())),
        }
    }
    let max_rel_dev = points.iter().map(|v| v.rel_dev).fold(0.0, f64::max);
    let mean_rel_dev = if points.is_empty() { 0.0 } else { points.iter().map(|v| v.rel_dev).sum::<f64>() / points.len() as f64 };
    VerifyReport { seed, points, failures, max_rel_dev, mean_rel_dev }
}
