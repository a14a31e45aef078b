//! Beam routing over LoS graphs: single-user shortest paths, path traversal
//! with a direct link, and multi-user max-min routing with path separation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::beamforming::{bs_mrt, conj_phase, BeamError};
use crate::channel::{effective_channel, ChannelError, ChannelSet, PhaseConfig, RankOne};
use crate::scene::{LosGraph, Scene};
use crate::{CVector, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    #[error("user {user} has no feasible reflection path")]
    NoFeasiblePath { user: usize },
    #[error("no separated route assignment exists (candidate paths per user: {candidates:?})")]
    Infeasible { candidates: Vec<usize> },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Beam(#[from] BeamError),
}

/// IRS sequence `a_1, ..., a_n` from the BS to one user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPath {
    pub user: usize,
    pub irs: Vec<usize>,
    /// Linear end-to-end power gain.
    pub gain: f64,
}

impl ReflectionPath {
    pub fn hops(&self) -> usize {
        self.irs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingSolution {
    pub paths: Vec<ReflectionPath>,
    /// Minimum gain over users.
    pub objective: f64,
    pub separation_ok: bool,
}

/// Parameters of the closed-form LoS path gain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    pub beta: f64,
    pub n_b: usize,
    /// Element count per IRS node id (index 0 unused).
    pub elements: Vec<usize>,
}

impl GainModel {
    pub fn from_scene(scene: &Scene) -> Self {
        let mut elements = vec![0];
        elements.extend(scene.irs.iter().map(|i| i.elements()));
        Self { beta: scene.constants.beta(), n_b: scene.num_bs_antennas(), elements }
    }

    pub fn uniform(num_irs: usize, m: usize, n_b: usize, beta: f64) -> Self {
        let mut elements = vec![0];
        elements.extend(core::iter::repeat(m).take(num_irs));
        Self { beta, n_b, elements }
    }

    /// Weight of edge `i -> j` in graph `g`.
    pub fn weight(&self, g: &LosGraph, j: usize, d: f64) -> f64 {
        edge_weight(d, self.beta, g.is_irs(j).then(|| self.elements[j]))
    }

    /// Closed-form gain of a path given its hop distances.
    pub fn gain_of(&self, irs: &[usize], distances: &[f64]) -> f64 {
        let m: f64 = irs.iter().map(|&a| (self.elements[a] as f64).powi(2)).product();
        let d: f64 = distances.iter().map(|d| d.powi(-2)).product();
        m * self.n_b as f64 * self.beta.powi(irs.len() as i32 + 1) * d
    }

    /// Closed-form gain of `irs` along the edges of `g` (`None` if an edge is missing).
    pub fn path_gain(&self, g: &LosGraph, irs: &[usize]) -> Option<f64> {
        Some(self.gain_of(irs, &path_distances(g, irs)?))
    }
}

/// Hop distances of a path through `g`.
pub fn path_distances(g: &LosGraph, irs: &[usize]) -> Option<Vec<f64>> {
    let mut nodes = vec![0];
    nodes.extend_from_slice(irs);
    nodes.push(g.user_node);
    nodes.windows(2).map(|w| g.edge_distance(w[0], w[1])).collect()
}

/// `2 ln d - ln β - 2 ln M` for an edge into an IRS with `M` elements,
/// `2 ln d - ln β` for the final hop. Summed over a path, `N_B e^{-Σw}` is the
/// closed-form path gain.
pub fn edge_weight(d: f64, beta: f64, m_into: Option<usize>) -> f64 {
    let base = 2.0 * d.ln() - beta.ln();
    match m_into {
        Some(m) => base - 2.0 * (m as f64).ln(),
        None => base,
    }
}

const TIE_TOL: f64 = 1e-12;

/// Orders candidate paths: larger gain, then fewer hops, then lexicographic.
pub fn compare_candidates(a_gain: f64, a: &[usize], b_gain: f64, b: &[usize]) -> Ordering {
    let scale = a_gain.abs().max(b_gain.abs());
    if (a_gain - b_gain).abs() > TIE_TOL * scale {
        return b_gain.partial_cmp(&a_gain).unwrap_or(Ordering::Equal);
    }
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Clone, Debug)]
struct Label {
    dist: f64,
    seq: Vec<usize>,
}

fn better(a: &Label, b: &Label) -> bool {
    let scale = a.dist.abs().max(b.dist.abs()).max(1.0);
    if (a.dist - b.dist).abs() > TIE_TOL * scale {
        return a.dist < b.dist;
    }
    (a.seq.len(), &a.seq) < (b.seq.len(), &b.seq)
}

/// Best LoS path for the graph's user by Bellman-Ford on [`edge_weight`].
/// Ties prefer fewer hops, then the lexicographically smallest IRS sequence.
pub fn optimal_single_route(g: &LosGraph, model: &GainModel) -> Result<ReflectionPath, RoutingError> {
    let mut labels: BTreeMap<usize, Label> = BTreeMap::new();
    labels.insert(0, Label { dist: 0.0, seq: Vec::new() });
    let edges: Vec<(usize, usize, f64)> = g.edges().collect();
    for _ in 1..g.vertices.len() {
        let mut changed = false;
        for &(i, j, d) in &edges {
            let Some(li) = labels.get(&i) else { continue };
            let mut seq = li.seq.clone();
            if g.is_irs(j) {
                seq.push(j);
            }
            let cand = Label { dist: li.dist + model.weight(g, j, d), seq };
            if labels.get(&j).map_or(true, |lj| better(&cand, lj)) {
                labels.insert(j, cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let best = labels.remove(&g.user_node).ok_or(RoutingError::NoFeasiblePath { user: g.user })?;
    let gain = model.path_gain(g, &best.seq).expect("label follows graph edges");
    Ok(ReflectionPath { user: g.user, irs: best.seq, gain })
}

/// All BS-to-user paths (IRS sequences) in lexicographic order of the node
/// sequence, by depth-first search.
pub fn enumerate_routes(g: &LosGraph, max_paths: Option<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    dfs(g, 0, &mut stack, &mut out, max_paths.unwrap_or(usize::MAX));
    out
}

fn dfs(g: &LosGraph, v: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
    for e in g.successors(v) {
        if out.len() >= cap {
            return;
        }
        if e.to == g.user_node {
            out.push(stack.clone());
        } else if g.is_irs(e.to) && !stack.contains(&e.to) {
            stack.push(e.to);
            dfs(g, e.to, stack, out, cap);
            stack.pop();
        }
    }
}

/// Route maximizing the gain with a coherently combined direct link `f`.
/// `bs_response(a)` is the unit-modulus BS array response toward IRS `a`.
/// Returns an empty path (direct link only) when no reflection path exists
/// and `f` is nonzero.
pub fn optimal_single_route_with_direct(
    g: &LosGraph,
    model: &GainModel,
    f: &CVector,
    bs_response: impl Fn(usize) -> CVector,
) -> Result<ReflectionPath, RoutingError> {
    let mut best: Option<ReflectionPath> = None;
    for irs in enumerate_routes(g, None) {
        let g_los = model.path_gain(g, &irs).expect("enumerated along edges");
        let amp = (g_los / model.n_b as f64).sqrt();
        let q = bs_response(irs[0]);
        let gain = f.norm_squared() + g_los + 2.0 * amp * q.dotc(f).norm();
        let replace = match &best {
            None => true,
            Some(b) => compare_candidates(gain, &irs, b.gain, &b.irs) == Ordering::Less,
        };
        if replace {
            best = Some(ReflectionPath { user: g.user, irs, gain });
        }
    }
    match best {
        Some(p) => Ok(p),
        None if f.norm_squared() > 0.0 => Ok(ReflectionPath { user: g.user, irs: Vec::new(), gain: f.norm_squared() }),
        None => Err(RoutingError::NoFeasiblePath { user: g.user }),
    }
}

fn path_nodes(p: &ReflectionPath, user_node: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut v = p.irs.clone();
    v.push(user_node(p.user));
    v
}

/// Whether two paths (non-BS nodes, user included) satisfy separation:
/// no shared IRS and no LoS indicator in either direction between them.
pub fn paths_separated(
    a: &ReflectionPath,
    b: &ReflectionPath,
    user_node: impl Fn(usize) -> usize + Copy,
    u: impl Fn(usize, usize) -> bool,
) -> bool {
    if a.irs.iter().any(|x| b.irs.contains(x)) {
        return false;
    }
    let (na, nb) = (path_nodes(a, user_node), path_nodes(b, user_node));
    for &x in &na {
        for &y in &nb {
            if x != y && (u(x, y) || u(y, x)) {
                return false;
            }
        }
    }
    true
}

/// Path separation over all pairs of distinct users.
pub fn check_path_separation(
    paths: &[ReflectionPath],
    user_node: impl Fn(usize) -> usize + Copy,
    u: impl Fn(usize, usize) -> bool + Copy,
) -> bool {
    for i in 0..paths.len() {
        for k in i + 1..paths.len() {
            if paths[i].user != paths[k].user && !paths_separated(&paths[i], &paths[k], user_node, u) {
                return false;
            }
        }
    }
    true
}

/// Options of the multi-user search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiRouteOptions {
    /// Candidate paths kept per user (per recursion level); `None` is exact.
    pub budget: Option<usize>,
    pub enforce_separation: bool,
}

impl Default for MultiRouteOptions {
    fn default() -> Self {
        Self { budget: None, enforce_separation: true }
    }
}

/// Max-min routing over users with optional path separation.
///
/// Users are visited in descending order of their best single-path gain.
/// Each user's candidates (all paths of its graph, scored by `gain(user, irs)`,
/// `None` for untrainable paths) are sorted best first and truncated to the
/// budget; a depth-first branch and bound then keeps the best assignment,
/// pruning as soon as a branch cannot beat the incumbent minimum.
pub fn optimal_multi_route(
    graphs: &[LosGraph],
    gain: impl Fn(usize, &[usize]) -> Option<f64>,
    u: impl Fn(usize, usize) -> bool + Copy,
    options: MultiRouteOptions,
) -> Result<RoutingSolution, RoutingError> {
    let k = graphs.len();
    let user_nodes: BTreeMap<usize, usize> = graphs.iter().map(|g| (g.user, g.user_node)).collect();
    let un = |user: usize| user_nodes[&user];
    let mut cands: Vec<Vec<ReflectionPath>> = graphs
        .iter()
        .map(|g| {
            let mut c: Vec<ReflectionPath> = enumerate_routes(g, None)
                .into_iter()
                .filter_map(|irs| gain(g.user, &irs).map(|gain| ReflectionPath { user: g.user, irs, gain }))
                .collect();
            c.sort_by(|a, b| compare_candidates(a.gain, &a.irs, b.gain, &b.irs));
            if let Some(b) = options.budget {
                c.truncate(b.max(1));
            }
            c
        })
        .collect();
    if let Some(empty) = cands.iter().position(|c| c.is_empty()) {
        return Err(RoutingError::NoFeasiblePath { user: graphs[empty].user });
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        cands[b][0].gain.partial_cmp(&cands[a][0].gain).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });

    struct Search<'a, U> {
        cands: &'a [Vec<ReflectionPath>],
        order: &'a [usize],
        u: U,
        separate: bool,
        best: Option<(f64, Vec<usize>)>,
    }
    impl<U: Fn(usize, usize) -> bool + Copy> Search<'_, U> {
        fn go(&mut self, level: usize, chosen: &mut Vec<usize>, cur_min: f64, un: &dyn Fn(usize) -> usize) {
            if level == self.order.len() {
                if self.best.as_ref().map_or(true, |(b, _)| cur_min > *b) {
                    self.best = Some((cur_min, chosen.clone()));
                }
                return;
            }
            let user = self.order[level];
            for (ci, c) in self.cands[user].iter().enumerate() {
                let m = cur_min.min(c.gain);
                if let Some((b, _)) = &self.best {
                    if m <= *b {
                        break;
                    }
                }
                if self.separate {
                    let clash = chosen.iter().enumerate().any(|(l, &pick)| {
                        let other = &self.cands[self.order[l]][pick];
                        !paths_separated(other, c, un, self.u)
                    });
                    if clash {
                        continue;
                    }
                }
                chosen.push(ci);
                self.go(level + 1, chosen, m, un);
                chosen.pop();
            }
        }
    }

    let mut s = Search { cands: &cands, order: &order, u, separate: options.enforce_separation, best: None };
    s.go(0, &mut Vec::new(), f64::INFINITY, &un);
    let Some((objective, picks)) = s.best else {
        return Err(RoutingError::Infeasible { candidates: cands.iter().map(Vec::len).collect() });
    };
    let mut paths: Vec<Option<ReflectionPath>> = vec![None; k];
    for (level, &pick) in picks.iter().enumerate() {
        let user = order[level];
        paths[user] = Some(core::mem::take(&mut cands[user][pick]));
    }
    let paths: Vec<ReflectionPath> = paths.into_iter().map(|p| p.expect("every user assigned")).collect();
    let separation_ok = check_path_separation(&paths, un, u);
    Ok(RoutingSolution { paths, objective, separation_ok })
}

impl Default for ReflectionPath {
    fn default() -> Self {
        Self { user: 0, irs: Vec::new(), gain: 0.0 }
    }
}

/// LoS rank-one terms (unit Rician weight) along a path, BS hop first.
pub fn path_los_hops(channels: &ChannelSet, irs: &[usize], user_node: usize) -> Result<Vec<RankOne>, RoutingError> {
    let mut nodes = vec![0];
    nodes.extend_from_slice(irs);
    nodes.push(user_node);
    nodes
        .windows(2)
        .enumerate()
        .map(|(h, w)| {
            channels.link(w[0], w[1])?.los_unweighted().ok_or(RoutingError::Beam(BeamError::MissingLos(h)))
        })
        .collect()
}

/// Closed-form design along one path: per-IRS phases aligning every LoS hop
/// and BS MRT toward the first IRS.
pub fn design_path_beams(
    channels: &ChannelSet,
    irs: &[usize],
    user_node: usize,
) -> Result<(Vec<(usize, CVector)>, CVector), RoutingError> {
    let hops = path_los_hops(channels, irs, user_node)?;
    let thetas = hops
        .windows(2)
        .zip(irs)
        .map(|(w, &a)| (a, conj_phase(&w[0].right.conjugate().component_mul(&w[1].left))))
        .collect();
    let w = bs_mrt(&hops[0].left)?;
    Ok((thetas, w))
}

/// Per-user interference and signal power, both relative to noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub interference_over_noise: Vec<f64>,
    pub signal_over_noise: Vec<f64>,
}

/// Received interference `P Σ_{k'≠k} |w_{k'}^H h_k|²` at each user on the full
/// channel (all admissible paths, scattered ones included), with path-aligned
/// phases, all-zero phase shifts on unused IRSs and BS MRT toward each first
/// IRS. An IRS on several paths takes the phase of the sum of their aligned
/// phase vectors, a multi-beam compromise.
pub fn interference_audit(
    scene: &Scene,
    channels: &ChannelSet,
    solution: &RoutingSolution,
) -> Result<InterferenceReport, RoutingError> {
    let mut phases = PhaseConfig::for_scene(scene);
    let mut sums: BTreeMap<usize, CVector> = BTreeMap::new();
    let mut beams = Vec::with_capacity(solution.paths.len());
    for p in &solution.paths {
        let un = scene.user_node(p.user);
        if p.irs.is_empty() {
            let f = &channels.link(0, un)?.matrix;
            beams.push(bs_mrt(&f.column(0).into_owned())?);
            continue;
        }
        let (thetas, w) = design_path_beams(channels, &p.irs, un)?;
        for (a, t) in thetas {
            match sums.get_mut(&a) {
                Some(acc) => *acc += t,
                None => {
                    sums.insert(a, t);
                }
            }
        }
        beams.push(w);
    }
    for (a, acc) in &sums {
        phases.set(*a, &acc.map(|z| if z == C64::new(0.0, 0.0) { C64::new(1.0, 0.0) } else { z / z.norm() }));
    }
    let p_tx = scene.constants.tx_watts();
    let noise = scene.constants.noise_watts();
    let mut interference = Vec::new();
    let mut signal = Vec::new();
    for (i, p) in solution.paths.iter().enumerate() {
        let h = effective_channel(channels, &scene.build_reflection_graph(p.user), &phases)?;
        let mut inter = 0.0;
        for (j, w) in beams.iter().enumerate() {
            let v = p_tx * w.dotc(&h).norm_sqr();
            if i == j {
                signal.push(v / noise);
            } else {
                inter += v;
            }
        }
        interference.push(inter / noise);
    }
    Ok(InterferenceReport { interference_over_noise: interference, signal_over_noise: signal })
}
