//! Beam routing case study on the eight-IRS scene: single-user routes versus
//! IRS size, and joint two-user routes with and without path separation.

use irs_core::channel::ChannelSet;
use irs_core::routing::{
    interference_audit, optimal_multi_route, optimal_single_route, paths_separated, GainModel,
    MultiRouteOptions, ReflectionPath,
};
use irs_core::scene::{Scene, SceneConfig};
use irs_core::RoutingSolution;
use serde::Serialize;

use super::{db, ExperimentConfig};
use crate::parallel::trial_seed;
use crate::table::ResultTable;
use crate::{scenes, Runner, SimError};

pub const DEFAULT_M0: [f64; 11] = [12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0, 32.0];
/// IRS size of the joint routing study.
pub const JOINT_M0: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteEntry {
    /// 1-based user number.
    pub user: usize,
    pub irs: Vec<usize>,
    pub gain_db: f64,
}

impl RouteEntry {
    fn of(p: &ReflectionPath) -> Self {
        Self { user: p.user + 1, irs: p.irs.clone(), gain_db: db(p.gain) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleRoute {
    pub m0: usize,
    pub hops: usize,
    pub route: RouteEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointRoutes {
    pub routes: Vec<RouteEntry>,
    pub min_gain_db: f64,
    pub separated: bool,
    /// Some link (BS hop included) is used by more than one user.
    pub shares_link: bool,
    /// A node of one route has LoS to a node of another.
    pub cross_los: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteDump {
    pub user1: Vec<SingleRoute>,
    pub joint_m0: usize,
    pub unconstrained: JointRoutes,
    pub constrained: JointRoutes,
}

fn node_seq(scene: &Scene, p: &ReflectionPath) -> Vec<usize> {
    let mut v = vec![0];
    v.extend_from_slice(&p.irs);
    v.push(scene.user_node(p.user));
    v
}

fn summarize(scene: &Scene, sol: &RoutingSolution) -> JointRoutes {
    let u = |i, j| scene.los_indicator(i, j, None);
    let un = |k| scene.user_node(k);
    let mut shares_link = false;
    let mut cross_los = false;
    for (a, pa) in sol.paths.iter().enumerate() {
        for pb in &sol.paths[a + 1..] {
            let (sa, sb) = (node_seq(scene, pa), node_seq(scene, pb));
            shares_link |= sa.windows(2).any(|e| sb.windows(2).any(|f| e == f));
            cross_los |= !paths_separated(pa, pb, un, u);
        }
    }
    JointRoutes {
        routes: sol.paths.iter().map(RouteEntry::of).collect(),
        min_gain_db: db(sol.objective),
        separated: sol.separation_ok,
        shares_link,
        cross_los,
    }
}

/// P1 route of user 1 at each IRS size.
pub fn user1_routes(base: &SceneConfig, m0s: &[f64]) -> Result<Vec<SingleRoute>, SimError> {
    m0s.iter()
        .map(|&m0| {
            if !(m0 >= 1.0) || m0.fract() != 0.0 {
                return Err(SimError::Config(format!("IRS size {m0} must be a positive integer")));
            }
            let scene = scenes::build(&scenes::with_m0(base, m0 as usize))?;
            let p = optimal_single_route(&scene.build_los_graph(0), &GainModel::from_scene(&scene))?;
            Ok(SingleRoute { m0: m0 as usize, hops: p.hops(), route: RouteEntry::of(&p) })
        })
        .collect()
}

/// Joint max-min routes over all users, with and without path separation.
pub fn joint_routes(scene: &Scene) -> Result<(RoutingSolution, RoutingSolution), SimError> {
    let model = GainModel::from_scene(scene);
    let graphs: Vec<_> = (0..scene.num_users()).map(|k| scene.build_los_graph(k)).collect();
    let gain = |k: usize, irs: &[usize]| model.path_gain(&graphs[k], irs);
    let u = |i, j| scene.los_indicator(i, j, None);
    let free = optimal_multi_route(&graphs, gain, u, MultiRouteOptions { budget: None, enforce_separation: false })?;
    let sep = optimal_multi_route(&graphs, gain, u, MultiRouteOptions { budget: None, enforce_separation: true })?;
    Ok((free, sep))
}

pub fn route_dump(base: &SceneConfig, m0s: &[f64]) -> Result<(RouteDump, Scene, RoutingSolution, RoutingSolution), SimError> {
    let user1 = user1_routes(base, m0s)?;
    let scene = scenes::build(&scenes::with_m0(base, JOINT_M0))?;
    let (free, sep) = joint_routes(&scene)?;
    let dump = RouteDump {
        user1,
        joint_m0: JOINT_M0,
        unconstrained: summarize(&scene, &free),
        constrained: summarize(&scene, &sep),
    };
    Ok((dump, scene, free, sep))
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<(ResultTable, RouteDump), SimError> {
    let base = scenes::load_or(config.scene.as_deref(), scenes::FIG9)?;
    let (dump, scene, free, sep) = route_dump(&base, &config.sweep_or(&DEFAULT_M0))?;
    let mut table = ResultTable::new(config.scenario.name(), config.seed);
    for r in &dump.user1 {
        table.push_exact("m0", r.m0 as f64, "user1_hops", r.hops as f64);
        table.push_exact("m0", r.m0 as f64, "user1_gain_db", r.route.gain_db);
    }

    // 0: unconstrained, 1: separated
    let seed = config.seed;
    let audits = runner.try_map(config.trials, |t| {
        let ch = ChannelSet::synthesize(&scene, trial_seed(seed, 11, t as u64))?;
        Ok::<_, SimError>([interference_audit(&scene, &ch, &free)?, interference_audit(&scene, &ch, &sep)?])
    })?;
    for (s, sol) in [&free, &sep].into_iter().enumerate() {
        let x = s as f64;
        table.push_exact("separation", x, "min_gain_db", db(sol.objective));
        for k in 0..scene.num_users() {
            let inter: Vec<f64> = audits.iter().map(|a| db(a[s].interference_over_noise[k])).collect();
            let sig: Vec<f64> = audits.iter().map(|a| db(a[s].signal_over_noise[k])).collect();
            table.push("separation", x, &format!("interference_db_user{}", k + 1), &inter);
            table.push("separation", x, &format!("snr_db_user{}", k + 1), &sig);
        }
    }
    Ok((table, dump))
}
