//! Uplink max-min rate versus user power: double-IRS system against a
//! single BS-side IRS with the same total element count.

use irs_core::beamforming::{ascend_frobenius, conj_phase, diag_mul, linear_receivers, Receiver};
use irs_core::channel::{synth_link, LinkChannel};
use irs_core::linalg::numerical_rank;
use irs_core::scene::{Scene, SceneConfig};
use irs_core::units::dbm_to_watts;
use irs_core::{CMatrix, CVector, C64};

use super::{rate, ExperimentConfig};
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{scenes, Runner, SimError};

/// User transmit power sweep in dBm.
pub const DEFAULT_POWERS_DBM: [f64; 11] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0];
pub const ASCENT_SWEEPS: usize = 2;

/// Effective `N_B x K` channels of one realization.
#[derive(Clone, Debug)]
pub struct Fig7Channels {
    pub double: CMatrix,
    pub single: CMatrix,
}

fn columns(links: &[&LinkChannel]) -> CMatrix {
    let m = links[0].matrix.nrows();
    CMatrix::from_fn(m, links.len(), |r, c| links[c].matrix[(r, 0)])
}

fn gather(scene: &Scene, irs: usize, seed: u64) -> Result<(LinkChannel, Vec<LinkChannel>), SimError> {
    let q = synth_link(scene, 0, irs, seed)?;
    let g = (0..scene.num_users()).map(|k| synth_link(scene, irs, scene.user_node(k), seed)).collect::<Result<_, _>>()?;
    Ok((q, g))
}

/// The baseline: IRS 1 alone, widened to the total element count of both IRSs.
pub fn baseline_config(config: &SceneConfig, elements: [usize; 2]) -> SceneConfig {
    let mut c = config.clone();
    c.irs.truncate(1);
    c.irs[0].elements = Some(elements);
    c.irs[0].m0 = None;
    c.effective_regions = None;
    c
}

/// Direct links are left out in both systems.
pub fn realize(double: &Scene, single: &Scene, seed: u64) -> Result<Fig7Channels, SimError> {
    let (q1, g1) = gather(double, 1, seed)?;
    let (q2, g2) = gather(double, 2, seed)?;
    let s = synth_link(double, 1, 2, seed)?;
    let g1 = columns(&g1.iter().collect::<Vec<_>>());
    let g2 = columns(&g2.iter().collect::<Vec<_>>());

    // IRS 1 aligned toward IRS 2 over the LoS parts, IRS 2 by Frobenius ascent.
    let phi1 = match (&q1.los, &s.los) {
        (Some(a), Some(b)) => conj_phase(&a.right.conjugate().component_mul(&b.left)),
        _ => CVector::from_element(q1.matrix.ncols(), C64::new(1.0, 0.0)),
    };
    let q1p = diag_mul(&phi1, &q1.matrix.transpose()).transpose();
    let a = &q1p * &g1;
    let b = &q1p * &s.matrix + &q2.matrix;
    let mut phi2 = CVector::from_element(g2.nrows(), C64::new(1.0, 0.0));
    ascend_frobenius(&a, &b, &g2, &mut phi2, ASCENT_SWEEPS);
    let h_double = a + b * diag_mul(&phi2, &g2);

    let (q, g) = gather(single, 1, seed)?;
    let g = columns(&g.iter().collect::<Vec<_>>());
    let zero = CMatrix::zeros(q.matrix.nrows(), g.ncols());
    let mut phi = CVector::from_element(g.nrows(), C64::new(1.0, 0.0));
    ascend_frobenius(&zero, &q.matrix, &g, &mut phi, ASCENT_SWEEPS);
    let h_single = &q.matrix * diag_mul(&phi, &g);
    Ok(Fig7Channels { double: h_double, single: h_single })
}

pub fn min_rate(h: &CMatrix, kind: Receiver, p: f64, noise: f64) -> f64 {
    linear_receivers(h, kind, p, noise).sinrs.into_iter().map(rate).fold(f64::INFINITY, f64::min)
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<ResultTable, SimError> {
    let base = scenes::load_or(config.scene.as_deref(), scenes::FIG7)?;
    let double = scenes::build(&base)?;
    if double.num_irs() != 2 {
        return Err(SimError::Config("fig7 needs a scene with exactly two IRSs".into()));
    }
    let a = &double.irs[0].array;
    let single = scenes::build(&baseline_config(&base, [2 * a.horizontal, a.vertical]))?;
    let noise = double.constants.noise_watts();
    let powers = config.sweep_or(&DEFAULT_POWERS_DBM);
    let seed = config.seed;

    let per_trial = runner.try_map(config.trials, |t| {
        let ch = realize(&double, &single, trial_seed(seed, 7, t as u64))?;
        let mut rates = Vec::with_capacity(powers.len());
        for &p_dbm in &powers {
            let p = dbm_to_watts(p_dbm);
            rates.push([
                min_rate(&ch.double, Receiver::Zf, p, noise),
                min_rate(&ch.double, Receiver::Mmse, p, noise),
                min_rate(&ch.single, Receiver::Zf, p, noise),
                min_rate(&ch.single, Receiver::Mmse, p, noise),
            ]);
        }
        Ok((rates, numerical_rank(&ch.double) as f64, numerical_rank(&ch.single) as f64))
    })?;

    let mut table = ResultTable::new("fig7", seed);
    const METRICS: [&str; 4] = ["min_rate_double_zf", "min_rate_double_mmse", "min_rate_single_zf", "min_rate_single_mmse"];
    for (i, &p) in powers.iter().enumerate() {
        for (m, name) in METRICS.iter().enumerate() {
            let v: Vec<f64> = per_trial.iter().map(|(r, _, _)| r[i][m]).collect();
            table.push("power_dbm", p, name, &v);
        }
    }
    let rd: Vec<f64> = per_trial.iter().map(|x| x.1).collect();
    let rs: Vec<f64> = per_trial.iter().map(|x| x.2).collect();
    table.push("channel", 0.0, "rank_double", &rd);
    table.push("channel", 0.0, "rank_single", &rs);
    Ok(table)
}
