//! Any scene file: the P1 route of each user, its closed-form gain and the
//! SNR the path-aligned design reaches on random channel draws.

use irs_core::channel::{cascaded_path_channel, synth_link, ChannelSet, PhaseConfig};
use irs_core::routing::{design_path_beams, optimal_single_route, GainModel, ReflectionPath};
use irs_core::scene::Scene;

use super::{db, ExperimentConfig};
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{scenes, Runner, SimError};

/// SNR of `path` on one draw of its links.
pub fn path_snr(scene: &Scene, path: &ReflectionPath, seed: u64) -> Result<f64, SimError> {
    let un = scene.user_node(path.user);
    let mut nodes = vec![0];
    nodes.extend_from_slice(&path.irs);
    nodes.push(un);
    let mut ch = ChannelSet::empty(seed);
    for w in nodes.windows(2) {
        ch.insert(synth_link(scene, w[0], w[1], seed)?);
    }
    let (thetas, w) = design_path_beams(&ch, &path.irs, un)?;
    let mut phases = PhaseConfig::for_scene(scene);
    for (j, t) in &thetas {
        phases.set(*j, t);
    }
    let h = cascaded_path_channel(&ch, &path.irs, un, &phases)?;
    let c = &scene.constants;
    Ok(c.tx_watts() * w.dotc(&h).norm_sqr() / c.noise_watts())
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<ResultTable, SimError> {
    let path = config.scene.as_deref().ok_or_else(|| SimError::Config("the custom scenario needs a scene file".into()))?;
    let scene = scenes::build(&scenes::load(path)?)?;
    let model = GainModel::from_scene(&scene);
    let mut table = ResultTable::new("custom", config.seed);
    for k in 0..scene.num_users() {
        let path = optimal_single_route(&scene.build_los_graph(k), &model)?;
        let x = (k + 1) as f64;
        table.push_exact("user", x, "hops", path.hops() as f64);
        table.push_exact("user", x, "route_gain_db", db(path.gain));
        let seed = config.seed;
        let snr = runner.try_map(config.trials, |t| path_snr(&scene, &path, trial_seed(seed, k as u64, t as u64)))?;
        table.push("user", x, "snr_db", &snr.iter().map(|&s| db(s)).collect::<Vec<_>>());
    }
    Ok(table)
}
