//! Beam training on the eight-IRS scene: sequential codebook search against
//! distributed training from per-node beam training tables, versus κ.

use irs_core::channel::{synth_link, ChannelSet};
use irs_core::routing::{optimal_single_route, GainModel};
use irs_core::scene::Scene;
use irs_core::training::{
    assemble_global_btt, build_bs_btt, build_irs_btt, distributed_route_and_beams, path_graph, reference_gains,
    sequential_search, BeamChoice, BeamSearch, Codebooks, RssConfig,
};

use super::{db, ExperimentConfig};
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{scenes, Runner, SimError};

/// Rician factors in dB; infinity is pure LoS.
pub const DEFAULT_KAPPA_DB: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, f64::INFINITY];
pub const M0: usize = 24;
pub const BS_BEAMS: usize = 32;
/// Beams per IRS dimension.
pub const IRS_BEAMS: usize = 32;
pub const MAX_SWEEPS: usize = 20;

/// True effective gains of the two schemes on one realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingGains {
    pub sequential: f64,
    pub distributed: f64,
}

/// Links of `path` for `user` only.
pub fn path_channels(scene: &Scene, user: usize, path: &[usize], seed: u64) -> Result<ChannelSet, SimError> {
    let mut nodes = vec![0];
    nodes.extend_from_slice(path);
    nodes.push(scene.user_node(user));
    let mut ch = ChannelSet::empty(seed);
    for w in nodes.windows(2) {
        ch.insert(synth_link(scene, w[0], w[1], seed)?);
    }
    Ok(ch)
}

pub fn train_once(
    scene: &Scene,
    codebooks: &Codebooks,
    user: usize,
    path: &[usize],
    seed: u64,
) -> Result<TrainingGains, SimError> {
    let ch = path_channels(scene, user, path, seed)?;
    let search = BeamSearch::for_path(scene, &ch, codebooks, user, path)?;
    let seq = sequential_search(&search, None, MAX_SWEEPS)?;

    let graphs = vec![path_graph(&ch, scene.num_irs(), user, path)?];
    let cfg = RssConfig::for_scene(scene, seed);
    let bs = build_bs_btt(&ch, &graphs, &codebooks.bs, &cfg)?;
    let irs = path
        .iter()
        .map(|&j| build_irs_btt(&ch, &graphs, j, codebooks.irs(j)?, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let global = assemble_global_btt(bs, irs, cfg.tx_power, reference_gains(&ch))?;
    let dist = distributed_route_and_beams(&global, &graphs, |_, _| false, None)?;
    let b = &dist.beams[0];
    let (_, d_obj) = search.evaluate(&BeamChoice { bs: vec![b.bs_beam], irs: b.irs_beams.clone() })?;
    // SNR back to channel power gain
    let to_gain = search.noise / search.tx_power;
    Ok(TrainingGains { sequential: seq.objective * to_gain, distributed: d_obj * to_gain })
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<ResultTable, SimError> {
    let base = scenes::with_m0(&scenes::load_or(config.scene.as_deref(), scenes::FIG9)?, M0);
    let route_scene = scenes::build(&base)?;
    let route = optimal_single_route(&route_scene.build_los_graph(0), &GainModel::from_scene(&route_scene))?;
    let codebooks = Codebooks::dft(&route_scene, BS_BEAMS, IRS_BEAMS)?;
    let mut table = ResultTable::new("fig13", config.seed);
    for kappa in config.sweep_or(&DEFAULT_KAPPA_DB) {
        let scene = scenes::build(&scenes::with_kappa(&base, kappa.is_finite().then_some(kappa)))?;
        let seed = config.seed;
        let gains = runner.try_map(config.trials, |t| {
            train_once(&scene, &codebooks, 0, &route.irs, trial_seed(seed, 13, t as u64))
        })?;
        let seq: Vec<f64> = gains.iter().map(|g| db(g.sequential)).collect();
        let dist: Vec<f64> = gains.iter().map(|g| db(g.distributed)).collect();
        let gap: Vec<f64> = gains.iter().map(|g| db(g.sequential / g.distributed)).collect();
        table.push("kappa_db", kappa, "gain_sequential_db", &seq);
        table.push("kappa_db", kappa, "gain_distributed_db", &dist);
        table.push("kappa_db", kappa, "gap_db", &gap);
    }
    Ok(table)
}
