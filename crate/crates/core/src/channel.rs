//! Link channel synthesis and multi-reflection channel composition.
//!
//! Every link matrix is oriented (transmit side) x (receive side): the BS to
//! IRS `j` channel is `N_B x M_j`, IRS `i` to IRS `j` is `M_i x M_j`, IRS to
//! user is `M x 1` and BS to user is `N_B x 1`. A reflection path
//! `a_1, ..., a_n` then composes left to right:
//! `Q_{0,a_1} Φ_{a_1} S_{a_1,a_2} ... Φ_{a_n} g_{a_n,k}`.

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::linalg::cis;
use crate::scene::{ArrayGeometry, LosGraph, Scene};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("direction must be a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("no channel stored for link {0} -> {1}")]
    MissingLink(usize, usize),
    #[error("no phase vector for IRS {0}")]
    MissingPhase(usize),
    #[error("link {from} -> {to} is {found:?}, expected {expected:?}")]
    DimensionMismatch { from: usize, to: usize, expected: (usize, usize), found: (usize, usize) },
}

/// Array steering vector toward unit direction `u`: entry `m` is
/// `e^{j2π (offset_m · u)}` with offsets in wavelengths.
pub fn array_response(array: &ArrayGeometry, u: Vec3) -> Result<CVector, ChannelError> {
    let n = u.norm();
    if !((n - 1.0).abs() <= 1e-9) {
        return Err(ChannelError::NonUnitDirection(n));
    }
    Ok(CVector::from_fn(array.len(), |m, _| cis(2.0 * PI * array.offset(m).dot(u))))
}

/// Large-scale path loss `β d^{-α}`.
pub fn path_loss(d: f64, alpha: f64, beta: f64) -> Result<f64, ChannelError> {
    if !(d > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    Ok(beta * d.powf(-alpha))
}

/// Rank-one matrix `gain · left · right^H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOne {
    #[serde(with = "crate::linalg::serde_c64")]
    pub gain: C64,
    #[serde(with = "crate::linalg::serde_cvector")]
    pub left: CVector,
    #[serde(with = "crate::linalg::serde_cvector")]
    pub right: CVector,
}

impl RankOne {
    pub fn matrix(&self) -> CMatrix {
        &self.left * self.right.adjoint() * self.gain
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { gain: self.gain * s, left: self.left.clone(), right: self.right.clone() }
    }
}

/// Statistical model of one link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub alpha: f64,
    /// Linear Rician factor; `None` is pure LoS. Ignored without LoS.
    pub kappa: Option<f64>,
    /// Whether a deterministic LoS component exists.
    pub los: bool,
    /// Extra linear power factor (penetration loss), 1 for none.
    pub extra_gain: f64,
}

impl LinkModel {
    /// Default model of link `i -> j` from the scene geometry.
    pub fn for_link(scene: &Scene, i: usize, j: usize) -> Self {
        let c = &scene.constants;
        if scene.has_geometric_los(i, j) {
            Self { alpha: c.alpha_los, kappa: c.kappa(), los: true, extra_gain: 1.0 }
        } else {
            Self {
                alpha: c.alpha_nlos,
                kappa: Some(0.0),
                los: false,
                extra_gain: crate::units::db_to_linear(-c.blocked_loss_db),
            }
        }
    }

    /// Rayleigh fading with the given exponent.
    pub fn rayleigh(alpha: f64) -> Self {
        Self { alpha, kappa: Some(0.0), los: false, extra_gain: 1.0 }
    }

    pub fn pure_los(alpha: f64) -> Self {
        Self { alpha, kappa: None, los: true, extra_gain: 1.0 }
    }
}

/// One synthesized link channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkChannel {
    pub from: usize,
    pub to: usize,
    #[serde(with = "crate::linalg::serde_cmatrix")]
    pub matrix: CMatrix,
    /// Deterministic LoS part of `matrix`, Rician weight included.
    pub los: Option<RankOne>,
    /// Per-entry standard deviation of the scattered part.
    pub nlos_std: f64,
    pub distance: f64,
    pub path_loss: f64,
}

impl LinkChannel {
    /// Fresh draw of the scattered part with the LoS part held fixed.
    pub fn redraw<R: Rng>(&self, rng: &mut R) -> CMatrix {
        let mut m = match &self.los {
            Some(l) => l.matrix(),
            None => CMatrix::zeros(self.matrix.nrows(), self.matrix.ncols()),
        };
        if self.nlos_std > 0.0 {
            for z in m.iter_mut() {
                *z += complex_gaussian(rng) * self.nlos_std;
            }
        }
        m
    }

    /// LoS part with unit Rician weight: `sqrt(PL) e^{-j2πd/λ} a_tx a_rx^T`.
    pub fn los_unweighted(&self) -> Option<RankOne> {
        let l = self.los.as_ref()?;
        let g = l.gain.norm();
        if g == 0.0 {
            return None;
        }
        Some(l.scaled(self.path_loss.sqrt() / g))
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

/// Independent generator for link `i -> j` and purpose `tag`, so adding a
/// link or a realization never shifts other draws.
pub fn link_rng(seed: u64, i: usize, j: usize, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 44) ^ ((j as u64) << 20) ^ tag);
    rng
}

/// Link endpoints as seen by the synthesizer.
#[derive(Clone, Debug)]
pub struct Endpoint {
    pub id: usize,
    pub position: Vec3,
    pub array: ArrayGeometry,
}

impl Endpoint {
    pub fn of(scene: &Scene, node: usize) -> Self {
        Self { id: node, position: scene.position(node), array: scene.array(node) }
    }
}

/// Draws `sqrt(PL) (sqrt(κ/(1+κ)) LoS + sqrt(1/(1+κ)) CN(0, I))` for the link
/// `tx -> rx`.
pub fn synth_between<R: Rng>(
    tx: &Endpoint,
    rx: &Endpoint,
    model: LinkModel,
    beta: f64,
    wavelength: f64,
    rng: &mut R,
) -> Result<LinkChannel, ChannelError> {
    let d = tx.position.distance(rx.position);
    let pl = path_loss(d, model.alpha, beta)? * model.extra_gain;
    let (los_w, nlos_w) = match (model.los, model.kappa) {
        (false, _) => (0.0, 1.0),
        (true, None) => (1.0, 0.0),
        (true, Some(k)) => ((k / (1.0 + k)).sqrt(), (1.0 / (1.0 + k)).sqrt()),
    };
    let los = if model.los {
        let u = (rx.position - tx.position) * (1.0 / d);
        let left = array_response(&tx.array, u)?;
        let right = array_response(&rx.array, -u)?.conjugate();
        let gain = cis(-2.0 * PI * d / wavelength) * (pl.sqrt() * los_w);
        Some(RankOne { gain, left, right })
    } else {
        None
    };
    let nlos_std = pl.sqrt() * nlos_w;
    let mut link = LinkChannel {
        from: tx.id,
        to: rx.id,
        matrix: CMatrix::zeros(tx.array.len(), rx.array.len()),
        los,
        nlos_std,
        distance: d,
        path_loss: pl,
    };
    link.matrix = link.redraw(rng);
    Ok(link)
}

/// Synthesizes link `i -> j` of a scene with its default model.
pub fn synth_link(scene: &Scene, i: usize, j: usize, seed: u64) -> Result<LinkChannel, ChannelError> {
    synth_link_with(scene, i, j, LinkModel::for_link(scene, i, j), seed)
}

pub fn synth_link_with(
    scene: &Scene,
    i: usize,
    j: usize,
    model: LinkModel,
    seed: u64,
) -> Result<LinkChannel, ChannelError> {
    let mut rng = link_rng(seed, i, j, 0);
    let c = &scene.constants;
    synth_between(&Endpoint::of(scene, i), &Endpoint::of(scene, j), model, c.beta(), c.wavelength(), &mut rng)
}

/// All link channels of one network realization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "ChannelDump", into = "ChannelDump")]
pub struct ChannelSet {
    pub seed: u64,
    links: BTreeMap<(usize, usize), LinkChannel>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ChannelDump {
    seed: u64,
    links: Vec<LinkChannel>,
}

impl From<ChannelDump> for ChannelSet {
    fn from(d: ChannelDump) -> Self {
        let mut s = ChannelSet { seed: d.seed, links: BTreeMap::new() };
        for l in d.links {
            s.insert(l);
        }
        s
    }
}

impl From<ChannelSet> for ChannelDump {
    fn from(s: ChannelSet) -> Self {
        ChannelDump { seed: s.seed, links: s.links.into_values().collect() }
    }
}

impl ChannelSet {
    pub fn empty(seed: u64) -> Self {
        Self { seed, links: BTreeMap::new() }
    }

    /// Every reflection-admissible link of every user (blocked ones as
    /// scattered-only channels) plus the direct BS-user channels.
    pub fn synthesize(scene: &Scene, seed: u64) -> Result<Self, ChannelError> {
        let mut set = Self::empty(seed);
        for (i, j) in required_links(scene) {
            set.insert(synth_link(scene, i, j, seed)?);
        }
        Ok(set)
    }

    pub fn insert(&mut self, link: LinkChannel) {
        self.links.insert((link.from, link.to), link);
    }

    pub fn remove(&mut self, i: usize, j: usize) -> Option<LinkChannel> {
        self.links.remove(&(i, j))
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&LinkChannel> {
        self.links.get(&(i, j))
    }

    pub fn link(&self, i: usize, j: usize) -> Result<&LinkChannel, ChannelError> {
        self.get(i, j).ok_or(ChannelError::MissingLink(i, j))
    }

    pub fn links(&self) -> impl Iterator<Item = &LinkChannel> {
        self.links.values()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Sorted link list used by [`ChannelSet::synthesize`].
pub fn required_links(scene: &Scene) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..scene.num_users() {
        for (i, j, _) in scene.build_reflection_graph(k).edges() {
            out.push((i, j));
        }
        out.push((0, scene.user_node(k)));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Unit-modulus reflection vectors θ_j of all IRSs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    #[serde(with = "crate::linalg::serde_cvectors")]
    thetas: Vec<CVector>,
}

impl PhaseConfig {
    /// All-zero phase shifts (θ = 1).
    pub fn ones(elements: &[usize]) -> Self {
        Self { thetas: elements.iter().map(|&m| CVector::from_element(m, C64::new(1.0, 0.0))).collect() }
    }

    pub fn for_scene(scene: &Scene) -> Self {
        let e: Vec<usize> = scene.irs.iter().map(|i| i.elements()).collect();
        Self::ones(&e)
    }

    /// From explicit vectors, entries projected onto the unit circle
    /// (zero entries become 1).
    pub fn from_vectors(thetas: Vec<CVector>) -> Self {
        let mut p = Self { thetas };
        for j in 1..=p.thetas.len() {
            let v = p.thetas[j - 1].clone();
            p.set(j, &v);
        }
        p
    }

    pub fn num_irs(&self) -> usize {
        self.thetas.len()
    }

    /// θ_j for IRS node `j` (1-based).
    pub fn theta(&self, j: usize) -> Result<&CVector, ChannelError> {
        j.checked_sub(1).and_then(|i| self.thetas.get(i)).ok_or(ChannelError::MissingPhase(j))
    }

    /// Sets θ_j to the phases of `v`.
    pub fn set(&mut self, j: usize, v: &CVector) {
        self.thetas[j - 1] = v.map(|z| cis(crate::linalg::phase(z)));
    }

    /// Φ_j = diag(θ_j).
    pub fn phi(&self, j: usize) -> Result<CMatrix, ChannelError> {
        Ok(CMatrix::from_diagonal(self.theta(j)?))
    }

    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.thetas.iter().all(|t| t.iter().all(|z| (z.norm() - 1.0).abs() <= tol))
    }

    /// Multiplies θ_j by `e^{jψ}`.
    pub fn rotate(&mut self, j: usize, psi: f64) {
        let r = cis(psi);
        for z in self.thetas[j - 1].iter_mut() {
            *z *= r;
        }
    }
}

fn checked<'a>(
    channels: &'a ChannelSet,
    i: usize,
    j: usize,
    rows: Option<usize>,
) -> Result<&'a CMatrix, ChannelError> {
    let m = &channels.link(i, j)?.matrix;
    if let Some(r) = rows {
        if m.nrows() != r {
            return Err(ChannelError::DimensionMismatch {
                from: i,
                to: j,
                expected: (r, m.ncols()),
                found: m.shape(),
            });
        }
    }
    Ok(m)
}

/// Channel of one reflection path `path = [a_1, ..., a_n]` toward `user_node`;
/// an empty path gives the direct channel.
pub fn cascaded_path_channel(
    channels: &ChannelSet,
    path: &[usize],
    user_node: usize,
    phases: &PhaseConfig,
) -> Result<CVector, ChannelError> {
    let mut nodes = Vec::with_capacity(path.len() + 2);
    nodes.push(0);
    nodes.extend_from_slice(path);
    nodes.push(user_node);
    // accumulate from the user end: x = Φ_{a_i} L_{a_i, next} x
    let mut x = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for w in nodes.windows(2).rev() {
        let l = checked(channels, w[0], w[1], None)?;
        if l.ncols() != x.nrows() {
            return Err(ChannelError::DimensionMismatch {
                from: w[0],
                to: w[1],
                expected: (l.nrows(), x.nrows()),
                found: l.shape(),
            });
        }
        x = l * x;
        if w[0] != 0 {
            let t = phases.theta(w[0])?;
            if t.len() != x.nrows() {
                return Err(ChannelError::DimensionMismatch {
                    from: w[0],
                    to: w[1],
                    expected: (t.len(), 1),
                    found: l.shape(),
                });
            }
            for (r, z) in x.iter_mut().enumerate() {
                *z *= t[r];
            }
        }
    }
    Ok(x.column(0).into_owned())
}

/// `f_k` plus the sum of all reflection paths of `graph`, computed by dynamic
/// programming over the DAG. Pass the reflection graph for the full channel
/// or the LoS graph for LoS-only paths. A missing direct link counts as zero.
pub fn effective_channel(
    channels: &ChannelSet,
    graph: &LosGraph,
    phases: &PhaseConfig,
) -> Result<CVector, ChannelError> {
    let n_b = match channels.get(0, graph.user_node) {
        Some(f) => f.matrix.nrows(),
        None => graph
            .successors(0)
            .first()
            .map(|e| channels.link(0, e.to).map(|l| l.matrix.nrows()))
            .transpose()?
            .unwrap_or(0),
    };
    let mut h = match channels.get(0, graph.user_node) {
        Some(f) => f.matrix.column(0).into_owned(),
        None => CVector::zeros(n_b),
    };
    for (v, x) in irs_downstream(channels, graph, phases)? {
        if graph.has_edge(0, v) {
            h += checked(channels, 0, v, Some(n_b))? * x;
        }
    }
    Ok(h)
}

/// For every IRS vertex `v`, `x_v = θ_v ⊙ (g_{v,user} + Σ_w S_{v,w} x_w)`:
/// the sum over all path tails starting at `v` (phases of `v` included).
pub fn irs_downstream(
    channels: &ChannelSet,
    graph: &LosGraph,
    phases: &PhaseConfig,
) -> Result<BTreeMap<usize, CVector>, ChannelError> {
    let order = graph.topological_order().expect("reflection graphs are acyclic");
    let mut x: BTreeMap<usize, CVector> = BTreeMap::new();
    for &v in order.iter().rev() {
        if !graph.is_irs(v) {
            continue;
        }
        let theta = phases.theta(v)?;
        let mut acc = CVector::zeros(theta.len());
        for e in graph.successors(v) {
            let l = checked(channels, v, e.to, Some(theta.len()))?;
            if e.to == graph.user_node {
                acc += l.column(0);
            } else if let Some(xw) = x.get(&e.to) {
                acc += l * xw;
            }
        }
        acc.component_mul_assign(theta);
        x.insert(v, acc);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{BsConfig, IrsConfig, SceneConfig};
    use alloc::vec;

    #[test]
    fn broadside_is_all_ones() {
        let a = ArrayGeometry::facing(Vec3::new(0.0, 1.0, 0.0), 3, 3, 0.25);
        let r = array_response(&a, Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(r.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn endfire_quarter_wave_pair() {
        let a = ArrayGeometry::facing(Vec3::new(1.0, 0.0, 0.0), 2, 1, 0.25);
        let r = array_response(&a, a.h_axis).unwrap();
        let diff = (r[1] / r[0]).arg();
        assert!((diff - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn response_conjugate_symmetry() {
        let a = ArrayGeometry::facing(Vec3::new(0.3, 0.4, 0.0).normalized().unwrap(), 3, 2, 0.5);
        let u = Vec3::new(0.2, -0.5, 0.7).normalized().unwrap();
        let p = array_response(&a, u).unwrap();
        let n = array_response(&a, -u).unwrap();
        assert!((p.conjugate() - n).norm() < 1e-12);
        assert!(array_response(&a, Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss(1.0, 2.0, 1e-3).unwrap() - 1e-3).abs() < 1e-18);
        assert!((path_loss(10.0, 2.0, 1e-3).unwrap() - 1e-5).abs() < 1e-18);
        assert!((path_loss(10.0, 2.5, 1e-3).unwrap() - 1e-3 * 10f64.powf(-2.5)).abs() < 1e-18);
        assert!(path_loss(0.0, 2.0, 1e-3).is_err());
    }

    fn two_irs_scene(kappa_db: Option<f64>) -> Scene {
        let mut cfg = SceneConfig {
            bs: Some(BsConfig { position: Some(Vec3::new(0.0, 0.0, 0.0)), antennas: Some(2), ..Default::default() }),
            irs: vec![
                IrsConfig {
                    position: Some(Vec3::new(2.0, 2.0, 0.0)),
                    pointing_normal: Some(Vec3::new(0.6, -0.8, 0.0)),
                    m0: Some(2),
                    ..Default::default()
                },
                IrsConfig {
                    position: Some(Vec3::new(20.0, 2.0, 0.0)),
                    pointing_normal: Some(Vec3::new(-0.6, -0.8, 0.0)),
                    m0: Some(2),
                    ..Default::default()
                },
            ],
            users: vec![Vec3::new(22.0, 0.0, 0.0)],
            ..Default::default()
        };
        cfg.constants.kappa_db = kappa_db;
        Scene::from_config(&cfg).unwrap()
    }

    #[test]
    fn pure_los_link_equals_los_component() {
        let s = two_irs_scene(None);
        let l = synth_link(&s, 1, 2, 3).unwrap();
        assert_eq!(l.nlos_std, 0.0);
        assert!((l.los.as_ref().unwrap().matrix() - &l.matrix).norm() < 1e-15);
        assert_eq!(l.matrix.shape(), (4, 4));
    }

    #[test]
    fn rician_power_split() {
        let s = two_irs_scene(Some(20.0));
        let l = synth_link(&s, 0, 1, 3).unwrap();
        let los_pow = l.los.as_ref().unwrap().gain.norm_sqr();
        let frac = los_pow / l.path_loss;
        assert!((frac - 100.0 / 101.0).abs() < 1e-12);
        assert!((frac - 0.990).abs() < 1e-3);
    }

    #[test]
    fn synthesis_is_reproducible() {
        let s = two_irs_scene(Some(5.0));
        let a = ChannelSet::synthesize(&s, 11).unwrap();
        let b = ChannelSet::synthesize(&s, 11).unwrap();
        assert_eq!(a, b);
        // removing a link from the required set leaves the others untouched
        let single = synth_link(&s, 0, 1, 11).unwrap();
        assert_eq!(a.get(0, 1).unwrap(), &single);
    }

    #[test]
    fn four_term_decomposition() {
        let s = two_irs_scene(Some(3.0));
        let ch = ChannelSet::synthesize(&s, 5).unwrap();
        let g = s.build_reflection_graph(0);
        assert!(g.has_edge(1, 2));
        let mut p = PhaseConfig::for_scene(&s);
        p.set(1, &CVector::from_fn(4, |m, _| cis(0.3 * m as f64)));
        p.set(2, &CVector::from_fn(4, |m, _| cis(-1.1 * m as f64 + 0.2)));
        let h = effective_channel(&ch, &g, &p).unwrap();
        let u = s.user_node(0);
        let f = ch.get(0, u).unwrap().matrix.column(0).into_owned();
        let q1 = &ch.get(0, 1).unwrap().matrix;
        let q2 = &ch.get(0, 2).unwrap().matrix;
        let s12 = &ch.get(1, 2).unwrap().matrix;
        let g1 = &ch.get(1, u).unwrap().matrix;
        let g2 = &ch.get(2, u).unwrap().matrix;
        let (p1, p2) = (p.phi(1).unwrap(), p.phi(2).unwrap());
        let want = f + (q1 * &p1 * g1).column(0) + (q2 * &p2 * g2).column(0) + (q1 * &p1 * s12 * &p2 * g2).column(0);
        assert!((h - &want).norm() / want.norm() < 1e-12);
    }

    #[test]
    fn no_irs_gives_direct_link() {
        let cfg = SceneConfig {
            bs: Some(BsConfig { position: Some(Vec3::new(0.0, 0.0, 0.0)), antennas: Some(3), ..Default::default() }),
            users: vec![Vec3::new(5.0, 1.0, 0.0)],
            ..Default::default()
        };
        let s = Scene::from_config(&cfg).unwrap();
        let ch = ChannelSet::synthesize(&s, 1).unwrap();
        let h = effective_channel(&ch, &s.build_reflection_graph(0), &PhaseConfig::for_scene(&s)).unwrap();
        assert_eq!(h, ch.get(0, 1).unwrap().matrix.column(0).into_owned());
    }

    #[test]
    fn single_reflection_hand_case() {
        // Q = [1 2], θ = 1, g = [3, 4]^T, N_B = 1
        let mut ch = ChannelSet::empty(0);
        let real = |r, c, v: &[f64]| CMatrix::from_iterator(r, c, v.iter().map(|&x| C64::new(x, 0.0)));
        let link = |from, to, m: CMatrix| LinkChannel { from, to, matrix: m, los: None, nlos_std: 0.0, distance: 1.0, path_loss: 1.0 };
        ch.insert(link(0, 1, real(1, 2, &[1.0, 2.0])));
        ch.insert(link(1, 2, real(2, 1, &[3.0, 4.0])));
        let h = cascaded_path_channel(&ch, &[1], 2, &PhaseConfig::ones(&[2])).unwrap();
        assert_eq!(h[0], C64::new(11.0, 0.0));
        assert!(matches!(
            cascaded_path_channel(&ch, &[1], 2, &PhaseConfig::ones(&[3])),
            Err(ChannelError::DimensionMismatch { .. })
        ));
    }
}
