//! Training overhead versus BS antennas, plus the LS estimation error of the
//! general double-reflection cascade versus pilot noise.

use irs_core::channel::complex_gaussian;
use irs_core::estimation::{
    dft_training_pairs, ls_estimate_cascaded_siso, nmse, overhead_benchmark_multi_user,
    overhead_benchmark_siso_general, overhead_double_irs_single_user, overhead_multi_user_extra,
    siso_observation,
};
use irs_core::{CMatrix, CVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ExperimentConfig;
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{Runner, SimError};

pub const DEFAULT_ANTENNAS: [f64; 10] = [10.0, 20.0, 40.0, 80.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0];
pub const ELEMENTS: u64 = 400;
pub const USERS: u64 = 5;
/// IRS size of the NMSE sweep, kept small since the regression has `M²` unknowns.
pub const NMSE_ELEMENTS: usize = 6;
pub const NMSE_NOISE: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// Proposed and benchmark pilot counts at `n_b` antennas.
pub fn overheads(m: u64, n_b: u64, k: u64) -> [(&'static str, u64); 4] {
    let single = overhead_double_irs_single_user(m, n_b);
    [
        ("overhead_proposed_single", single),
        ("overhead_proposed_multi", single + overhead_multi_user_extra(m, n_b, k)),
        ("overhead_benchmark_single", overhead_benchmark_siso_general(m)),
        ("overhead_benchmark_multi", overhead_benchmark_multi_user(m, k)),
    ]
}

/// NMSE of one LS estimate of a unit-variance cascade with `M²` DFT pilots.
pub fn ls_nmse_trial(m: usize, noise_var: f64, seed: u64) -> Result<f64, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = CMatrix::from_fn(m, m, |_, _| complex_gaussian(&mut rng));
    let pairs = dft_training_pairs(m);
    let sd = noise_var.sqrt();
    let y = CVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|(a, b)| siso_observation(&truth, a, b) + complex_gaussian(&mut rng) * sd),
    );
    let est = ls_estimate_cascaded_siso(&pairs, &y)?;
    Ok(nmse(&est, &truth))
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<ResultTable, SimError> {
    let mut table = ResultTable::new("fig8", config.seed);
    for n_b in config.sweep_or(&DEFAULT_ANTENNAS) {
        if !(n_b >= 1.0) || n_b.fract() != 0.0 {
            return Err(SimError::Config(format!("antenna count {n_b} must be a positive integer")));
        }
        for (name, v) in overheads(ELEMENTS, n_b as u64, USERS) {
            table.push_exact("bs_antennas", n_b, name, v as f64);
        }
    }
    for (i, &noise) in NMSE_NOISE.iter().enumerate() {
        let seed = config.seed;
        let v = runner.try_map(config.trials, |t| ls_nmse_trial(NMSE_ELEMENTS, noise, trial_seed(seed, 80 + i as u64, t as u64)))?;
        table.push("noise_var", noise, "ls_nmse", &v);
    }
    Ok(table)
}
