//! Rate versus total IRS elements: double reflection (LoS and Rayleigh
//! inter-IRS link) against the two single-reflection links.

use irs_core::beamforming::{ao_joint_beamforming, DoubleIrsLinks};
use irs_core::channel::{cascaded_path_channel, synth_link_with, ChannelSet, LinkModel, PhaseConfig};
use irs_core::routing::design_path_beams;
use irs_core::scene::{Scene, SceneConfig};

use super::{db, rate, ExperimentConfig};
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{scenes, Runner, SimError};

pub const DEFAULT_TOTALS: [f64; 5] = [200.0, 400.0, 600.0, 800.0, 1000.0];
/// Horizontal element count of every IRS; the vertical count carries the sweep.
pub const HORIZONTAL: usize = 20;
pub const RAYLEIGH_ALPHA: f64 = 2.5;

/// Channel power gains of one layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosGains {
    pub double: f64,
    pub single: f64,
}

/// Pure-LoS links BS-IRS 1, BS-IRS 2, IRS 1-IRS 2, IRS 1-user and IRS 2-user
/// of the two-IRS scene.
pub fn los_channels(scene: &Scene, seed: u64) -> Result<ChannelSet, SimError> {
    let u = scene.user_node(0);
    let mut ch = ChannelSet::empty(seed);
    for (i, j) in [(0, 1), (0, 2), (1, 2), (1, u), (2, u)] {
        ch.insert(synth_link_with(scene, i, j, LinkModel::pure_los(scene.constants.alpha_los), seed)?);
    }
    Ok(ch)
}

/// Optimized double-reflection gain and the coherently combined gain of the
/// two single-reflection links.
pub fn los_gains(scene: &Scene, channels: &ChannelSet) -> Result<LosGains, SimError> {
    let u = scene.user_node(0);
    let mut phases = PhaseConfig::for_scene(scene);
    let (thetas, w) = design_path_beams(channels, &[1, 2], u)?;
    for (j, t) in &thetas {
        phases.set(*j, t);
    }
    let double = w.dotc(&cascaded_path_channel(channels, &[1, 2], u, &phases)?).norm_sqr();

    let mut amps = Vec::new();
    for j in [1, 2] {
        let (thetas, w) = design_path_beams(channels, &[j], u)?;
        phases.set(j, &thetas[0].1);
        amps.push(w.dotc(&cascaded_path_channel(channels, &[j], u, &phases)?));
    }
    let single = (amps[0].norm() + amps[1].norm()).powi(2);
    Ok(LosGains { double, single })
}

/// Double-reflection gain with a Rayleigh IRS 1-IRS 2 link, optimized by AO.
pub fn rayleigh_double_gain(scene: &Scene, los: &ChannelSet, seed: u64) -> Result<f64, SimError> {
    let u = scene.user_node(0);
    let s = synth_link_with(scene, 1, 2, LinkModel::rayleigh(RAYLEIGH_ALPHA), seed)?;
    let links = DoubleIrsLinks {
        f: None,
        q1: los.link(0, 1)?.matrix.clone(),
        q2: None,
        s12: s.matrix,
        g1: None,
        g2: los.link(2, u)?.matrix.clone(),
    };
    Ok(ao_joint_beamforming(&links, None, 1e-9, 200).gain)
}

fn scene_for_total(base: &SceneConfig, total: f64) -> Result<Scene, SimError> {
    let per_irs = total / 2.0;
    if per_irs.fract() != 0.0 || per_irs < HORIZONTAL as f64 || (per_irs as usize) % HORIZONTAL != 0 {
        return Err(SimError::Config(format!(
            "total element count {total} must split into two IRSs of {HORIZONTAL} x n elements"
        )));
    }
    scenes::build(&scenes::with_elements(base, [HORIZONTAL, per_irs as usize / HORIZONTAL]))
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<ResultTable, SimError> {
    let base = scenes::load_or(config.scene.as_deref(), scenes::FIG4)?;
    let mut table = ResultTable::new("fig6", config.seed);
    for total in config.sweep_or(&DEFAULT_TOTALS) {
        let scene = scene_for_total(&base, total)?;
        let snr = scene.constants.tx_watts() / scene.constants.noise_watts();
        let los = los_channels(&scene, config.seed)?;
        let g = los_gains(&scene, &los)?;
        table.push_exact("total_elements", total, "gain_double_los_db", db(g.double));
        table.push_exact("total_elements", total, "gain_single_los_db", db(g.single));
        table.push_exact("total_elements", total, "rate_double_los", rate(snr * g.double));
        table.push_exact("total_elements", total, "rate_single_los", rate(snr * g.single));
        let ray = runner.try_map(config.trials, |t| {
            rayleigh_double_gain(&scene, &los, trial_seed(config.seed, total as u64, t as u64))
        })?;
        let rates: Vec<f64> = ray.iter().map(|&x| rate(snr * x)).collect();
        table.push("total_elements", total, "gain_double_rayleigh_db", &ray.iter().map(|&x| db(x)).collect::<Vec<_>>());
        table.push("total_elements", total, "rate_double_rayleigh", &rates);
    }
    Ok(table)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
