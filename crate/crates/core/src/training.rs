//! Codebook-based beam training: DFT codebooks, exhaustive and sequential
//! beam search, and distributed training from per-node beam training tables
//! (BTTs).
//!
//! A node's controller is modeled as a single reference element at the node:
//! the signal a controller sends toward IRS `j` is row 0 of the link matrix
//! into `j`, and what it receives from `j` is column 0 of the link out of `j`.

use alloc::borrow::Cow;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::beamforming::BeamSolution;
use crate::channel::{
    complex_gaussian, effective_channel, irs_downstream, link_rng, ChannelError, ChannelSet, LinkChannel, PhaseConfig,
};
use crate::linalg::cis;
use crate::routing::{optimal_multi_route, MultiRouteOptions, RoutingError, RoutingSolution};
use crate::scene::{ArrayGeometry, LosGraph, Scene};
use crate::{CMatrix, CVector, C64};

/// Largest number of beam combinations an exhaustive search will visit.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainingError {
    #[error("codebook with {beams} beams cannot cover dimension {dimension}")]
    CodebookTooSmall { beams: usize, dimension: usize },
    #[error("codebook has no beams")]
    EmptyCodebook,
    #[error("beam {index} violates the {kind:?} codebook constraint")]
    InvalidBeam { index: usize, kind: CodebookKind },
    #[error("codebook dimension {found} does not match {expected} elements at node {node}")]
    CodebookDimension { node: usize, expected: usize, found: usize },
    #[error("no codebook for IRS {0}")]
    MissingCodebook(usize),
    #[error("exhaustive search needs {count:.3e} combinations, above the limit {limit:.0e}")]
    TooManyCombinations { count: f64, limit: f64 },
    #[error("node {owner} has no table row for {prev:?} -> {owner} -> {next} with beam {beam}")]
    NotTrainable { owner: usize, prev: Option<usize>, beam: usize, next: usize },
    #[error("node {owner} has no table rows for {prev:?} -> {owner} -> {next}")]
    NoRows { owner: usize, prev: Option<usize>, next: usize },
    #[error("conflicting rows at node {owner} for {prev:?} -> {next}, beam {beam}")]
    ConflictingRows { owner: usize, prev: Option<usize>, beam: usize, next: usize },
    #[error("row {prev:?} -> {owner} -> {next} has RSS {rss:e} below the threshold {threshold:e}")]
    BelowThreshold { owner: usize, prev: Option<usize>, next: usize, rss: f64, threshold: f64 },
    #[error("no reference gain for link {0} -> {1}")]
    MissingReference(usize, usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    Active,
    PassiveHorizontal,
    PassiveVertical,
    Passive,
}

impl CodebookKind {
    pub fn is_active(self) -> bool {
        self == CodebookKind::Active
    }
}

/// Finite set of beams of one kind: unit-norm for the BS, unit-modulus for IRSs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCodebook")]
pub struct Codebook {
    kind: CodebookKind,
    #[serde(with = "crate::linalg::serde_cvectors")]
    beams: Vec<CVector>,
}

#[derive(Deserialize)]
struct RawCodebook {
    kind: CodebookKind,
    #[serde(with = "crate::linalg::serde_cvectors")]
    beams: Vec<CVector>,
}

impl TryFrom<RawCodebook> for Codebook {
    type Error = TrainingError;
    fn try_from(r: RawCodebook) -> Result<Self, TrainingError> {
        Codebook::from_beams(r.kind, r.beams)
    }
}

impl Codebook {
    pub fn from_beams(kind: CodebookKind, beams: Vec<CVector>) -> Result<Self, TrainingError> {
        let first = beams.first().ok_or(TrainingError::EmptyCodebook)?;
        let dim = first.len();
        for (index, b) in beams.iter().enumerate() {
            let ok = b.len() == dim
                && dim > 0
                && if kind.is_active() {
                    (b.norm() - 1.0).abs() <= UNIT_TOL
                } else {
                    b.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_TOL)
                };
            if !ok {
                return Err(TrainingError::InvalidBeam { index, kind });
            }
        }
        Ok(Self { kind, beams })
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// Number of beams `D`.
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.beams[0].len()
    }

    pub fn beam(&self, i: usize) -> &CVector {
        &self.beams[i]
    }

    pub fn beams(&self) -> &[CVector] {
        &self.beams
    }

    /// Beams as the columns of a `dimension x D` matrix.
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_columns(&self.beams)
    }
}

/// `D`-point DFT steering grid cut to `dimension` entries: beam `d` has
/// entries `e^{-j2π m d / D}`, scaled to unit norm for active codebooks.
pub fn dft_codebook(d: usize, dimension: usize, kind: CodebookKind) -> Result<Codebook, TrainingError> {
    if dimension == 0 {
        return Err(TrainingError::EmptyCodebook);
    }
    if d < dimension {
        return Err(TrainingError::CodebookTooSmall { beams: d, dimension });
    }
    let scale = if kind.is_active() { 1.0 / (dimension as f64).sqrt() } else { 1.0 };
    let beams = (0..d)
        .map(|k| {
            CVector::from_fn(dimension, |m, _| cis(-2.0 * PI * ((m * k) % d) as f64 / d as f64) * scale)
        })
        .collect();
    Codebook::from_beams(kind, beams)
}

/// Passive codebook of one IRS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum PassiveCodebook {
    /// 3D beams `θ = θ_h ⊗ θ_v`, joint index `i_h * D_v + i_v`.
    Separable { horizontal: Codebook, vertical: Codebook },
    /// Arbitrary unit-modulus beams.
    Flat { beams: Codebook },
}

impl PassiveCodebook {
    /// Per-dimension `D`-point DFT codebooks for an IRS array.
    pub fn dft(d: usize, array: &ArrayGeometry) -> Result<Self, TrainingError> {
        Ok(Self::Separable {
            horizontal: dft_codebook(d, array.horizontal, CodebookKind::PassiveHorizontal)?,
            vertical: dft_codebook(d, array.vertical, CodebookKind::PassiveVertical)?,
        })
    }

    pub fn flat(beams: Vec<CVector>) -> Result<Self, TrainingError> {
        Ok(Self::Flat { beams: Codebook::from_beams(CodebookKind::Passive, beams)? })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Separable { horizontal, vertical } => horizontal.len() * vertical.len(),
            Self::Flat { beams } => beams.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Separable { horizontal, vertical } => horizontal.dimension() * vertical.dimension(),
            Self::Flat { beams } => beams.dimension(),
        }
    }

    pub fn beam(&self, i: usize) -> CVector {
        match self {
            Self::Separable { horizontal, vertical } => {
                crate::linalg::kron(horizontal.beam(i / vertical.len()), vertical.beam(i % vertical.len()))
            }
            Self::Flat { beams } => beams.beam(i).clone(),
        }
    }

    /// `θ_d^T c` for every beam `d`.
    pub fn scores(&self, c: &CVector) -> Vec<C64> {
        match self {
            Self::Separable { horizontal, vertical } => {
                let (h, v) = (horizontal.dimension(), vertical.dimension());
                let cm = CMatrix::from_fn(h, v, |i, k| c[i * v + k]);
                let s = horizontal.matrix().transpose() * cm * vertical.matrix();
                let mut out = Vec::with_capacity(s.len());
                for ih in 0..s.nrows() {
                    for iv in 0..s.ncols() {
                        out.push(s[(ih, iv)]);
                    }
                }
                out
            }
            Self::Flat { beams } => (beams.matrix().transpose() * c).iter().copied().collect(),
        }
    }
}

/// Codebooks of the BS and of every IRS.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebooks {
    pub bs: Codebook,
    pub irs: BTreeMap<usize, PassiveCodebook>,
}

impl Codebooks {
    /// DFT codebooks with `d_b` BS beams and `d_i` beams per IRS dimension.
    pub fn dft(scene: &Scene, d_b: usize, d_i: usize) -> Result<Self, TrainingError> {
        let bs = dft_codebook(d_b, scene.num_bs_antennas(), CodebookKind::Active)?;
        let mut irs = BTreeMap::new();
        for j in 1..=scene.num_irs() {
            irs.insert(j, PassiveCodebook::dft(d_i, &scene.irs(j).array)?);
        }
        Ok(Self { bs, irs })
    }

    pub fn irs(&self, j: usize) -> Result<&PassiveCodebook, TrainingError> {
        self.irs.get(&j).ok_or(TrainingError::MissingCodebook(j))
    }
}

/// `h(θ_j) = constant + upstream (θ_j ⊙ tail)`: a channel that is affine in
/// the reflection vector of one IRS.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChannel {
    pub constant: CVector,
    pub upstream: CMatrix,
    pub tail: CVector,
}

impl AffineChannel {
    pub fn at(&self, theta: &CVector) -> CVector {
        &self.constant + &self.upstream * theta.component_mul(&self.tail)
    }
}

fn bs_dimension(channels: &ChannelSet, graph: &LosGraph) -> Result<usize, ChannelError> {
    if let Some(f) = channels.get(0, graph.user_node) {
        return Ok(f.matrix.nrows());
    }
    match graph.successors(0).first() {
        Some(e) => Ok(channels.link(0, e.to)?.matrix.nrows()),
        None => Ok(0),
    }
}

/// For every IRS `v` reachable from the BS, the sum over all path prefixes
/// ending at `v` (phases of `v` excluded), an `N_B x M_v` matrix.
pub fn irs_upstream(
    channels: &ChannelSet,
    graph: &LosGraph,
    phases: &PhaseConfig,
) -> Result<BTreeMap<usize, CMatrix>, ChannelError> {
    let order = graph.topological_order().expect("reflection graphs are acyclic");
    let mut acc: BTreeMap<usize, CMatrix> = BTreeMap::new();
    for e in graph.successors(0) {
        if graph.is_irs(e.to) {
            acc.insert(e.to, channels.link(0, e.to)?.matrix.clone());
        }
    }
    let mut out = BTreeMap::new();
    for v in order {
        if !graph.is_irs(v) {
            continue;
        }
        let Some(u) = acc.remove(&v) else { continue };
        let mut scaled = u.clone();
        let theta = phases.theta(v)?;
        for (c, mut col) in scaled.column_iter_mut().enumerate() {
            col *= theta[c];
        }
        for e in graph.successors(v) {
            if graph.is_irs(e.to) {
                let term = &scaled * &channels.link(v, e.to)?.matrix;
                match acc.get_mut(&e.to) {
                    Some(a) => *a += term,
                    None => {
                        acc.insert(e.to, term);
                    }
                }
            }
        }
        out.insert(v, u);
    }
    Ok(out)
}

/// The user channel of `graph` as an affine function of `θ_j`; `None` when no
/// BS-to-user path of the graph visits `j`.
pub fn affine_in_irs(
    channels: &ChannelSet,
    graph: &LosGraph,
    phases: &PhaseConfig,
    j: usize,
) -> Result<Option<AffineChannel>, ChannelError> {
    let up = irs_upstream(channels, graph, phases)?;
    let Some(upstream) = up.get(&j).cloned() else { return Ok(None) };
    let down = irs_downstream(channels, graph, phases)?;
    let mut tail = CVector::zeros(upstream.ncols());
    let mut reaches = false;
    for e in graph.successors(j) {
        let l = &channels.link(j, e.to)?.matrix;
        if e.to == graph.user_node {
            tail += l.column(0);
            reaches = true;
        } else if let Some(x) = down.get(&e.to) {
            tail += l * x;
            reaches = true;
        }
    }
    if !reaches {
        return Ok(None);
    }
    let h = effective_channel(channels, graph, phases)?;
    let constant = h - &upstream * phases.theta(j)?.component_mul(&tail);
    Ok(Some(AffineChannel { constant, upstream, tail }))
}

/// BS beam per user and passive beam per searched IRS (codebook indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamChoice {
    pub bs: Vec<usize>,
    pub irs: Vec<usize>,
}

/// Result of a beam search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub choice: BeamChoice,
    pub solution: BeamSolution,
    /// Minimum SINR over users.
    pub objective: f64,
    /// Beam combinations (exhaustive) or candidate beams (sequential) tried.
    pub evaluations: u64,
    pub sweeps: usize,
    /// Objective after every coordinate update (sequential search).
    pub history: Vec<f64>,
}

/// A beam-search problem: users (one graph each), the IRSs whose beams are
/// searched, and the fixed phases of every other IRS.
#[derive(Clone, Debug)]
pub struct BeamSearch<'a> {
    pub channels: Cow<'a, ChannelSet>,
    pub graphs: Vec<LosGraph>,
    pub irs: Vec<usize>,
    pub codebooks: &'a Codebooks,
    pub base: PhaseConfig,
    pub tx_power: f64,
    pub noise: f64,
}

impl<'a> BeamSearch<'a> {
    /// All IRSs searched, each user on its full reflection graph.
    pub fn for_users(
        scene: &Scene,
        channels: &'a ChannelSet,
        codebooks: &'a Codebooks,
        users: &[usize],
    ) -> Self {
        Self {
            channels: Cow::Borrowed(channels),
            graphs: users.iter().map(|&k| scene.build_reflection_graph(k)).collect(),
            irs: (1..=scene.num_irs()).collect(),
            codebooks,
            base: PhaseConfig::for_scene(scene),
            tx_power: scene.constants.tx_watts(),
            noise: scene.constants.noise_watts(),
        }
    }

    /// One user served over a single reflection path; only the links of the
    /// path (no direct link) make up the channel.
    pub fn for_path(
        scene: &Scene,
        channels: &'a ChannelSet,
        codebooks: &'a Codebooks,
        user: usize,
        path: &[usize],
    ) -> Result<Self, TrainingError> {
        let graph = path_graph(channels, scene.num_irs(), user, path)?;
        let mut own = ChannelSet::empty(channels.seed);
        for (i, j, _) in graph.edges() {
            own.insert(channels.link(i, j)?.clone());
        }
        Ok(Self {
            channels: Cow::Owned(own),
            graphs: vec![graph],
            irs: path.to_vec(),
            codebooks,
            base: PhaseConfig::for_scene(scene),
            tx_power: scene.constants.tx_watts(),
            noise: scene.constants.noise_watts(),
        })
    }

    fn users(&self) -> usize {
        self.graphs.len()
    }

    /// `D_B^K · Π_j D_I(j)`.
    pub fn combination_count(&self) -> Result<f64, TrainingError> {
        let mut c = (self.codebooks.bs.len() as f64).powi(self.users() as i32);
        for &j in &self.irs {
            c *= self.codebooks.irs(j)?.len() as f64;
        }
        Ok(c)
    }

    fn check(&self) -> Result<(), TrainingError> {
        for g in &self.graphs {
            let n_b = bs_dimension(&self.channels, g)?;
            if n_b != 0 && n_b != self.codebooks.bs.dimension() {
                return Err(TrainingError::CodebookDimension {
                    node: 0,
                    expected: n_b,
                    found: self.codebooks.bs.dimension(),
                });
            }
        }
        for &j in &self.irs {
            let m = self.base.theta(j)?.len();
            let cb = self.codebooks.irs(j)?;
            if cb.dimension() != m {
                return Err(TrainingError::CodebookDimension { node: j, expected: m, found: cb.dimension() });
            }
        }
        Ok(())
    }

    pub fn phases(&self, choice: &BeamChoice) -> Result<PhaseConfig, TrainingError> {
        let mut p = self.base.clone();
        for (&j, &b) in self.irs.iter().zip(&choice.irs) {
            p.set(j, &self.codebooks.irs(j)?.beam(b));
        }
        Ok(p)
    }

    fn channels_for(&self, phases: &PhaseConfig) -> Result<Vec<CVector>, TrainingError> {
        self.graphs.iter().map(|g| Ok(effective_channel(&self.channels, g, phases)?)).collect()
    }

    /// Min SINR from `a[t][k] = |w_t^H h_k|²`.
    fn min_sinr(&self, a: &[Vec<f64>]) -> f64 {
        (0..self.users())
            .map(|k| self.sinr(a, k))
            .fold(f64::INFINITY, f64::min)
    }

    fn sinr(&self, a: &[Vec<f64>], k: usize) -> f64 {
        let inter: f64 = (0..self.users()).filter(|&t| t != k).map(|t| a[t][k]).sum();
        self.tx_power * a[k][k] / (self.tx_power * inter + self.noise)
    }

    fn cross(&self, beams: &[usize], h: &[CVector]) -> Vec<Vec<f64>> {
        beams
            .iter()
            .map(|&b| {
                let w = self.codebooks.bs.beam(b);
                h.iter().map(|hk| w.dotc(hk).norm_sqr()).collect()
            })
            .collect()
    }

    /// Full evaluation of one beam choice.
    pub fn evaluate(&self, choice: &BeamChoice) -> Result<(BeamSolution, f64), TrainingError> {
        let phases = self.phases(choice)?;
        let h = self.channels_for(&phases)?;
        let a = self.cross(&choice.bs, &h);
        let sinrs: Vec<f64> = (0..self.users()).map(|k| self.sinr(&a, k)).collect();
        let objective = sinrs.iter().copied().fold(f64::INFINITY, f64::min);
        let solution = BeamSolution {
            phases,
            bs_beams: choice.bs.iter().map(|&b| self.codebooks.bs.beam(b).clone()).collect(),
            achieved_gains: (0..self.users()).map(|k| a[k][k]).collect(),
            sinrs,
        };
        Ok((solution, objective))
    }

    /// Affine form of every user channel in `θ_j`, with the current phases.
    fn affine_all(&self, phases: &PhaseConfig, j: usize) -> Result<Vec<AffineOrConst>, TrainingError> {
        self.graphs
            .iter()
            .map(|g| {
                Ok(match affine_in_irs(&self.channels, g, phases, j)? {
                    Some(a) => AffineOrConst::Affine(a),
                    None => AffineOrConst::Const(effective_channel(&self.channels, g, phases)?),
                })
            })
            .collect()
    }

    /// `|w_t^H h_k(θ_d)|²` for every beam `d` of IRS `j`, indexed `[d][t][k]`
    /// flattened as `d * K² + t * K + k`.
    fn batch_irs(&self, j: usize, forms: &[AffineOrConst], beams: &[usize]) -> Result<Vec<f64>, TrainingError> {
        let cb = self.codebooks.irs(j)?;
        let k_n = self.users();
        let d_n = cb.len();
        let mut out = vec![0.0; d_n * k_n * k_n];
        for (t, &b) in beams.iter().enumerate() {
            let w = self.codebooks.bs.beam(b);
            for (k, form) in forms.iter().enumerate() {
                match form {
                    AffineOrConst::Const(h) => {
                        let v = w.dotc(h).norm_sqr();
                        for d in 0..d_n {
                            out[d * k_n * k_n + t * k_n + k] = v;
                        }
                    }
                    AffineOrConst::Affine(a) => {
                        let base = w.dotc(&a.constant);
                        let coef = (a.upstream.transpose() * w.conjugate()).component_mul(&a.tail);
                        for (d, s) in cb.scores(&coef).into_iter().enumerate() {
                            out[d * k_n * k_n + t * k_n + k] = (base + s).norm_sqr();
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn min_sinr_flat(&self, block: &[f64]) -> f64 {
        let k_n = self.users();
        let a: Vec<Vec<f64>> = (0..k_n).map(|t| block[t * k_n..(t + 1) * k_n].to_vec()).collect();
        self.min_sinr(&a)
    }
}

enum AffineOrConst {
    Affine(AffineChannel),
    Const(CVector),
}

/// Graph holding only the edges of one reflection path.
pub fn path_graph(channels: &ChannelSet, num_irs: usize, user: usize, path: &[usize]) -> Result<LosGraph, ChannelError> {
    let user_node = num_irs + 1 + user;
    let mut nodes = vec![0];
    nodes.extend_from_slice(path);
    nodes.push(user_node);
    let edges: Result<Vec<(usize, usize, f64)>, ChannelError> =
        nodes.windows(2).map(|w| Ok((w[0], w[1], channels.link(w[0], w[1])?.distance))).collect();
    Ok(LosGraph::from_edges(num_irs, user, &edges?))
}

fn next_combo(idx: &mut [usize], radix: usize) -> bool {
    for x in idx.iter_mut() {
        *x += 1;
        if *x < radix {
            return true;
        }
        *x = 0;
    }
    false
}

/// Visits every combination of BS beams (one per user) and passive beams of
/// the searched IRSs and keeps the one with the largest minimum SINR on the
/// channels of the search graphs. Refuses when the combination count exceeds
/// [`EXHAUSTIVE_LIMIT`].
pub fn exhaustive_search(search: &BeamSearch) -> Result<SearchOutcome, TrainingError> {
    search.check()?;
    let count = search.combination_count()?;
    if count > EXHAUSTIVE_LIMIT {
        return Err(TrainingError::TooManyCombinations { count, limit: EXHAUSTIVE_LIMIT });
    }
    let k_n = search.users();
    let d_b = search.codebooks.bs.len();
    let mut best: Option<(f64, BeamChoice)> = None;
    let n = search.irs.len();
    let mut prefix = vec![0usize; n.saturating_sub(1)];
    loop {
        let mut choice = BeamChoice { bs: vec![0; k_n], irs: prefix.clone() };
        if n > 0 {
            choice.irs.push(0);
        }
        let phases = search.phases(&choice)?;
        if n == 0 {
            let h = search.channels_for(&phases)?;
            loop {
                let v = search.min_sinr(&search.cross(&choice.bs, &h));
                if best.as_ref().map_or(true, |(b, _)| v > *b) {
                    best = Some((v, choice.clone()));
                }
                if !next_combo(&mut choice.bs, d_b) {
                    break;
                }
            }
        } else {
            let j = search.irs[n - 1];
            let forms = search.affine_all(&phases, j)?;
            loop {
                let batch = search.batch_irs(j, &forms, &choice.bs)?;
                for (d, block) in batch.chunks(k_n * k_n).enumerate() {
                    let v = search.min_sinr_flat(block);
                    if best.as_ref().map_or(true, |(b, _)| v > *b) {
                        let mut c = choice.clone();
                        c.irs[n - 1] = d;
                        best = Some((v, c));
                    }
                }
                if !next_combo(&mut choice.bs, d_b) {
                    break;
                }
            }
        }
        let radices: Vec<usize> =
            search.irs[..n.saturating_sub(1)].iter().map(|&j| search.codebooks.irs(j).map(|c| c.len())).collect::<Result<_, _>>()?;
        let mut advanced = false;
        for (x, &r) in prefix.iter_mut().zip(&radices) {
            *x += 1;
            if *x < r {
                advanced = true;
                break;
            }
            *x = 0;
        }
        if !advanced {
            break;
        }
    }
    let (_, choice) = best.expect("at least one combination");
    let (solution, objective) = search.evaluate(&choice)?;
    Ok(SearchOutcome { choice, solution, objective, evaluations: count as u64, sweeps: 0, history: Vec::new() })
}

fn improves(new: f64, old: f64) -> bool {
    new > old && new - old > 1e-12 * old.abs()
}

/// Cyclic coordinate ascent: each user's BS beam, then each searched IRS's
/// beam, holding the rest fixed. A coordinate moves only on strict
/// improvement. Stops after a sweep without change or after `max_sweeps`.
/// One sweep tries `K·D_B + Σ_j D_I(j)` beams.
pub fn sequential_search(
    search: &BeamSearch,
    init: Option<BeamChoice>,
    max_sweeps: usize,
) -> Result<SearchOutcome, TrainingError> {
    search.check()?;
    let k_n = search.users();
    let mut choice = init.unwrap_or_else(|| BeamChoice { bs: vec![0; k_n], irs: vec![0; search.irs.len()] });
    let (_, mut current) = search.evaluate(&choice)?;
    let mut history = vec![current];
    let mut evaluations = 0u64;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for k in 0..k_n {
            let phases = search.phases(&choice)?;
            let h = search.channels_for(&phases)?;
            let mut a = search.cross(&choice.bs, &h);
            let mut best = (current, choice.bs[k]);
            for d in 0..search.codebooks.bs.len() {
                let w = search.codebooks.bs.beam(d);
                a[k] = h.iter().map(|hk| w.dotc(hk).norm_sqr()).collect();
                let v = search.min_sinr(&a);
                if d != choice.bs[k] && improves(v, best.0) {
                    best = (v, d);
                }
            }
            evaluations += search.codebooks.bs.len() as u64;
            if best.1 != choice.bs[k] {
                choice.bs[k] = best.1;
                current = best.0;
                changed = true;
            }
            history.push(current);
        }
        for (slot, &j) in search.irs.iter().enumerate() {
            let phases = search.phases(&choice)?;
            let forms = search.affine_all(&phases, j)?;
            let batch = search.batch_irs(j, &forms, &choice.bs)?;
            let mut best = (current, choice.irs[slot]);
            for (d, block) in batch.chunks(k_n * k_n).enumerate() {
                let v = search.min_sinr_flat(block);
                if d != choice.irs[slot] && improves(v, best.0) {
                    best = (v, d);
                }
            }
            evaluations += search.codebooks.irs(j)?.len() as u64;
            if best.1 != choice.irs[slot] {
                choice.irs[slot] = best.1;
                current = best.0;
                changed = true;
            }
            history.push(current);
        }
        if !changed {
            break;
        }
    }
    let (solution, objective) = search.evaluate(&choice)?;
    Ok(SearchOutcome { choice, solution, objective, evaluations, sweeps, history })
}

/// One BTT row: RSS measured at `next` while the owner uses `beam` on a
/// signal sent by `prev` (`None` at the BS).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BttRow {
    pub prev: Option<usize>,
    pub beam: usize,
    pub next: usize,
    pub rss: f64,
    /// Measured by a user, so it needs online training.
    pub online: bool,
}

impl BttRow {
    fn key(&self) -> (Option<usize>, usize, usize) {
        (self.prev, self.next, self.beam)
    }
}

/// Local beam training table of one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct BeamTrainingTable {
    pub owner: usize,
    pub threshold: f64,
    rows: Vec<BttRow>,
}

#[derive(Deserialize)]
struct RawTable {
    owner: usize,
    threshold: f64,
    rows: Vec<BttRow>,
}

impl TryFrom<RawTable> for BeamTrainingTable {
    type Error = TrainingError;
    fn try_from(r: RawTable) -> Result<Self, TrainingError> {
        BeamTrainingTable::from_rows(r.owner, r.threshold, r.rows)
    }
}

impl BeamTrainingTable {
    /// Sorts rows by `(prev, next, beam)`; identical duplicates collapse,
    /// differing ones and rows below the threshold are errors.
    pub fn from_rows(owner: usize, threshold: f64, mut rows: Vec<BttRow>) -> Result<Self, TrainingError> {
        if let Some(r) = rows.iter().find(|r| !(r.rss >= threshold)) {
            return Err(TrainingError::BelowThreshold { owner, prev: r.prev, next: r.next, rss: r.rss, threshold });
        }
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut out: Vec<BttRow> = Vec::with_capacity(rows.len());
        for r in rows {
            if let Some(last) = out.last() {
                if last.key() == r.key() {
                    if *last != r {
                        return Err(TrainingError::ConflictingRows { owner, prev: r.prev, beam: r.beam, next: r.next });
                    }
                    continue;
                }
            }
            out.push(r);
        }
        Ok(Self { owner, threshold, rows: out })
    }

    pub fn rows(&self) -> &[BttRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn range(&self, prev: Option<usize>, next: usize) -> &[BttRow] {
        let lo = self.rows.partition_point(|r| (r.prev, r.next) < (prev, next));
        let hi = self.rows.partition_point(|r| (r.prev, r.next) <= (prev, next));
        &self.rows[lo..hi]
    }

    pub fn lookup(&self, prev: Option<usize>, beam: usize, next: usize) -> Option<&BttRow> {
        let r = self.range(prev, next);
        r.binary_search_by_key(&beam, |x| x.beam).ok().map(|i| &r[i])
    }

    /// Strongest row for `prev -> owner -> next` (lowest beam index on ties).
    pub fn best(&self, prev: Option<usize>, next: usize) -> Option<&BttRow> {
        self.range(prev, next).iter().fold(None, |acc: Option<&BttRow>, r| match acc {
            Some(b) if b.rss >= r.rss => Some(b),
            _ => Some(r),
        })
    }

    pub fn online_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.online).count()
    }

    /// Same table with a higher threshold applied.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        let threshold = threshold.max(self.threshold);
        Self { owner: self.owner, threshold, rows: self.rows.iter().filter(|r| r.rss >= threshold).cloned().collect() }
    }
}

/// How RSS values are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RssConfig {
    /// Power sent by each training node.
    pub tx_power: f64,
    /// Rows below this RSS are not reported.
    pub threshold: f64,
    /// Fading realizations averaged per RSS; the first is the given channel.
    pub draws: usize,
    pub seed: u64,
}

impl RssConfig {
    /// Ten draws, threshold at the noise power.
    pub fn new(tx_power: f64, noise: f64, seed: u64) -> Self {
        Self { tx_power, threshold: noise, draws: 10, seed }
    }

    pub fn for_scene(scene: &Scene, seed: u64) -> Self {
        Self::new(scene.constants.tx_watts(), scene.constants.noise_watts(), seed)
    }
}

/// Successors of `v` in any of the graphs.
pub fn next_nodes(graphs: &[LosGraph], v: usize) -> Vec<usize> {
    let s: BTreeSet<usize> = graphs.iter().flat_map(|g| g.successors(v).iter().map(|e| e.to)).collect();
    s.into_iter().collect()
}

/// Predecessors of `v` in any of the graphs.
pub fn prev_nodes(graphs: &[LosGraph], v: usize) -> Vec<usize> {
    let s: BTreeSet<usize> =
        graphs.iter().flat_map(|g| g.edges().filter(move |&(_, j, _)| j == v).map(|(i, _, _)| i)).collect();
    s.into_iter().collect()
}

const ROW_TAG: u64 = 0x4_0000;
const COL_TAG: u64 = 0x8_0000;

/// Row 0 (`row = true`) or column 0 of `link`, for the given realization
/// followed by `draws - 1` redraws of the scattered part.
fn reference_samples(link: &LinkChannel, row: bool, draws: usize, seed: u64) -> Vec<CVector> {
    let m = &link.matrix;
    let first: CVector = if row { m.row(0).transpose() } else { m.column(0).into_owned() };
    let mut out = vec![first];
    let los: CVector = match &link.los {
        Some(l) if row => l.right.conjugate() * (l.gain * l.left[0]),
        Some(l) => &l.left * (l.gain * l.right[0].conj()),
        None => CVector::zeros(if row { m.ncols() } else { m.nrows() }),
    };
    for t in 1..draws.max(1) {
        let tag = if row { ROW_TAG } else { COL_TAG } | t as u64;
        let mut rng = link_rng(seed, link.from, link.to, tag);
        let mut v = los.clone();
        if link.nlos_std > 0.0 {
            for z in v.iter_mut() {
                *z += complex_gaussian(&mut rng) * link.nlos_std;
            }
        }
        out.push(v);
    }
    out
}

/// BS table: RSS at each next node's controller for every active beam.
pub fn build_bs_btt(
    channels: &ChannelSet,
    graphs: &[LosGraph],
    codebook: &Codebook,
    cfg: &RssConfig,
) -> Result<BeamTrainingTable, TrainingError> {
    let num_irs = graphs.first().map_or(0, |g| g.num_irs);
    let mut rows = Vec::new();
    for next in next_nodes(graphs, 0) {
        let link = channels.link(0, next)?;
        if link.matrix.nrows() != codebook.dimension() {
            return Err(TrainingError::CodebookDimension {
                node: 0,
                expected: link.matrix.nrows(),
                found: codebook.dimension(),
            });
        }
        let samples = reference_samples(link, false, cfg.draws, cfg.seed);
        for (beam, w) in codebook.beams().iter().enumerate() {
            let mean = samples.iter().map(|s| w.dotc(s).norm_sqr()).sum::<f64>() / samples.len() as f64;
            let rss = cfg.tx_power * mean;
            if rss >= cfg.threshold {
                rows.push(BttRow { prev: None, beam, next, rss, online: next > num_irs });
            }
        }
    }
    BeamTrainingTable::from_rows(0, cfg.threshold, rows)
}

/// Table of IRS `j`: RSS at each next node for every (previous node, passive
/// beam) pair. Rows measured by users are flagged online.
pub fn build_irs_btt(
    channels: &ChannelSet,
    graphs: &[LosGraph],
    j: usize,
    codebook: &PassiveCodebook,
    cfg: &RssConfig,
) -> Result<BeamTrainingTable, TrainingError> {
    let num_irs = graphs.first().map_or(0, |g| g.num_irs);
    let prevs = prev_nodes(graphs, j);
    let nexts = next_nodes(graphs, j);
    let mut rows = Vec::new();
    if prevs.is_empty() || nexts.is_empty() {
        return BeamTrainingTable::from_rows(j, cfg.threshold, rows);
    }
    let ins: Vec<Vec<CVector>> = prevs
        .iter()
        .map(|&p| Ok(reference_samples(channels.link(p, j)?, true, cfg.draws, cfg.seed)))
        .collect::<Result<_, ChannelError>>()?;
    let outs: Vec<Vec<CVector>> = nexts
        .iter()
        .map(|&n| Ok(reference_samples(channels.link(j, n)?, false, cfg.draws, cfg.seed)))
        .collect::<Result<_, ChannelError>>()?;
    let m = ins[0][0].len();
    if codebook.dimension() != m {
        return Err(TrainingError::CodebookDimension { node: j, expected: m, found: codebook.dimension() });
    }
    for (pi, &prev) in prevs.iter().enumerate() {
        for (ni, &next) in nexts.iter().enumerate() {
            let mut acc = vec![0.0; codebook.len()];
            let draws = ins[pi].len();
            for t in 0..draws {
                let c = ins[pi][t].component_mul(&outs[ni][t]);
                for (a, s) in acc.iter_mut().zip(codebook.scores(&c)) {
                    *a += s.norm_sqr();
                }
            }
            for (beam, a) in acc.into_iter().enumerate() {
                let rss = cfg.tx_power * a / draws as f64;
                if rss >= cfg.threshold {
                    rows.push(BttRow { prev: Some(prev), beam, next, rss, online: next > num_irs });
                }
            }
        }
    }
    BeamTrainingTable::from_rows(j, cfg.threshold, rows)
}

/// Large-scale gain of one link, known to the BS from the deployment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReference {
    pub from: usize,
    pub to: usize,
    pub gain: f64,
}

/// Path loss of every link in the set.
pub fn reference_gains(channels: &ChannelSet) -> Vec<LinkReference> {
    channels.links().map(|l| LinkReference { from: l.from, to: l.to, gain: l.path_loss }).collect()
}

/// All tables merged at the BS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalBtt {
    pub bs: BeamTrainingTable,
    pub irs: BTreeMap<usize, BeamTrainingTable>,
    pub tx_power: f64,
    references: Vec<LinkReference>,
}

/// Merges the BS table with the IRS tables; tables of the same owner are
/// combined and conflicting duplicate rows are rejected.
pub fn assemble_global_btt(
    bs: BeamTrainingTable,
    irs: Vec<BeamTrainingTable>,
    tx_power: f64,
    mut references: Vec<LinkReference>,
) -> Result<GlobalBtt, TrainingError> {
    let mut merged: BTreeMap<usize, BeamTrainingTable> = BTreeMap::new();
    for t in irs {
        let t = match merged.remove(&t.owner) {
            Some(prev) => {
                let threshold = prev.threshold.max(t.threshold);
                let mut rows = prev.rows;
                rows.extend(t.rows);
                rows.retain(|r| r.rss >= threshold);
                BeamTrainingTable::from_rows(t.owner, threshold, rows)?
            }
            None => t,
        };
        merged.insert(t.owner, t);
    }
    references.sort_by_key(|r| (r.from, r.to));
    Ok(GlobalBtt { bs, irs: merged, tx_power, references })
}

impl GlobalBtt {
    pub fn table(&self, owner: usize) -> Option<&BeamTrainingTable> {
        if owner == 0 {
            Some(&self.bs)
        } else {
            self.irs.get(&owner)
        }
    }

    pub fn row_count(&self) -> usize {
        self.bs.len() + self.irs.values().map(BeamTrainingTable::len).sum::<usize>()
    }

    /// Rows that need online training (measured by users).
    pub fn online_rows(&self) -> usize {
        self.bs.online_rows() + self.irs.values().map(BeamTrainingTable::online_rows).sum::<usize>()
    }

    pub fn reference(&self, from: usize, to: usize) -> Option<f64> {
        self.references
            .binary_search_by_key(&(from, to), |r| (r.from, r.to))
            .ok()
            .map(|i| self.references[i].gain)
    }

    fn hop_rss(&self, owner: usize, prev: Option<usize>, beam: usize, next: usize) -> Result<f64, TrainingError> {
        self.table(owner)
            .and_then(|t| t.lookup(prev, beam, next))
            .map(|r| r.rss)
            .ok_or(TrainingError::NotTrainable { owner, prev, beam, next })
    }

    fn normalize(&self, nodes: &[usize], rss: &[f64]) -> Result<f64, TrainingError> {
        let mut g: f64 = rss.iter().map(|r| r / self.tx_power).product();
        for w in nodes.windows(2).take(nodes.len().saturating_sub(2)) {
            g /= self.reference(w[0], w[1]).ok_or(TrainingError::MissingReference(w[0], w[1]))?;
        }
        Ok(g)
    }
}

fn route_nodes(path: &[usize], user_node: usize) -> Vec<usize> {
    let mut nodes = vec![0];
    nodes.extend_from_slice(path);
    nodes.push(user_node);
    nodes
}

/// End-to-end gain estimate of `path` with the given beams: the product of
/// per-hop RSS over transmit power, divided by the path loss of every hop but
/// the last (each of those is counted twice by consecutive tables).
pub fn approx_gain(
    global: &GlobalBtt,
    path: &[usize],
    user_node: usize,
    bs_beam: usize,
    irs_beams: &[usize],
) -> Result<f64, TrainingError> {
    let nodes = route_nodes(path, user_node);
    let mut rss = vec![global.hop_rss(0, None, bs_beam, nodes[1])?];
    for (i, &b) in irs_beams.iter().enumerate().take(path.len()) {
        rss.push(global.hop_rss(nodes[i + 1], Some(nodes[i]), b, nodes[i + 2])?);
    }
    global.normalize(&nodes, &rss)
}

/// Beams selected for one user's path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathBeams {
    pub user: usize,
    pub irs: Vec<usize>,
    pub bs_beam: usize,
    pub irs_beams: Vec<usize>,
    pub approx_gain: f64,
}

impl PathBeams {
    /// Writes the passive beams into `phases` and returns the BS beam.
    pub fn apply(&self, codebooks: &Codebooks, phases: &mut PhaseConfig) -> Result<CVector, TrainingError> {
        for (&j, &b) in self.irs.iter().zip(&self.irs_beams) {
            phases.set(j, &codebooks.irs(j)?.beam(b));
        }
        Ok(codebooks.bs.beam(self.bs_beam).clone())
    }
}

/// Beams maximizing [`approx_gain`] on a path. The estimate factors over hops,
/// so each node's beam is the best row of its own table.
pub fn best_path_beams(
    global: &GlobalBtt,
    path: &[usize],
    user: usize,
    user_node: usize,
) -> Result<PathBeams, TrainingError> {
    let nodes = route_nodes(path, user_node);
    let best = |owner: usize, prev: Option<usize>, next: usize| {
        global
            .table(owner)
            .and_then(|t| t.best(prev, next))
            .cloned()
            .ok_or(TrainingError::NoRows { owner, prev, next })
    };
    let b0 = best(0, None, nodes[1])?;
    let mut rss = vec![b0.rss];
    let mut irs_beams = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let r = best(nodes[i + 1], Some(nodes[i]), nodes[i + 2])?;
        rss.push(r.rss);
        irs_beams.push(r.beam);
    }
    let approx_gain = global.normalize(&nodes, &rss)?;
    Ok(PathBeams { user, irs: path.to_vec(), bs_beam: b0.beam, irs_beams, approx_gain })
}

/// Distributed beam training outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributedSolution {
    pub routing: RoutingSolution,
    /// Per user, in the order of the input graphs.
    pub beams: Vec<PathBeams>,
    /// Table rows that required online (user-side) training.
    pub online_rows: usize,
}

/// Route and beam selection from the global BTT: every path is scored by its
/// best approximate gain, then routes are chosen max-min over users. With
/// more than one user, paths must satisfy separation under `u`.
pub fn distributed_route_and_beams(
    global: &GlobalBtt,
    graphs: &[LosGraph],
    u: impl Fn(usize, usize) -> bool + Copy,
    budget: Option<usize>,
) -> Result<DistributedSolution, TrainingError> {
    let user_nodes: BTreeMap<usize, usize> = graphs.iter().map(|g| (g.user, g.user_node)).collect();
    let gain = |user: usize, irs: &[usize]| best_path_beams(global, irs, user, user_nodes[&user]).ok().map(|b| b.approx_gain);
    let options = MultiRouteOptions { budget, enforce_separation: graphs.len() > 1 };
    let routing = optimal_multi_route(graphs, gain, u, options)?;
    let beams = routing
        .paths
        .iter()
        .map(|p| best_path_beams(global, &p.irs, p.user, user_nodes[&p.user]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DistributedSolution { routing, beams, online_rows: global.online_rows() })
}
