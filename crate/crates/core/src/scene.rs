//! Network geometry, LoS indicators and the per-user LoS graph.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};
use crate::units::{db_to_linear, dbm_to_watts};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("{node} lies inside obstacle {obstacle}")]
    NodeInsideObstacle { node: String, obstacle: usize },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SceneError {
    SceneError::Invalid { field: field.into(), reason: reason.into() }
}

/// Propagation constants shared by every link of a scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Propagation {
    /// Path loss at the 1 m reference distance.
    pub beta_db: f64,
    /// Path-loss exponent of links with geometric line of sight.
    pub alpha_los: f64,
    /// Path-loss exponent of blocked links.
    pub alpha_nlos: f64,
    /// Extra penetration loss applied to blocked links.
    pub blocked_loss_db: f64,
    /// Rician factor of LoS links; `None` means pure LoS.
    pub kappa_db: Option<f64>,
    pub carrier_freq_hz: f64,
    pub noise_power_dbm: f64,
    pub tx_power_dbm: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Self {
            beta_db: -30.0,
            alpha_los: 2.0,
            alpha_nlos: 3.5,
            blocked_loss_db: 0.0,
            kappa_db: None,
            carrier_freq_hz: 5e9,
            noise_power_dbm: -90.0,
            tx_power_dbm: 0.0,
        }
    }
}

impl Propagation {
    pub fn beta(&self) -> f64 {
        db_to_linear(self.beta_db)
    }

    /// Linear Rician factor, `None` for pure LoS.
    pub fn kappa(&self) -> Option<f64> {
        self.kappa_db.map(db_to_linear)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn tx_watts(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BsConfig {
    pub position: Option<Vec3>,
    /// Total antenna count N_B. Laid out as a horizontal line unless `layout` is set.
    pub antennas: Option<usize>,
    /// `[horizontal, vertical]` element counts.
    pub layout: Option<[usize; 2]>,
    /// Array broadside direction (default `+x`).
    pub boresight: Option<Vec3>,
    pub spacing_wavelengths: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IrsConfig {
    pub position: Option<Vec3>,
    pub pointing_normal: Option<Vec3>,
    /// Elements per dimension, M = m0².
    pub m0: Option<usize>,
    /// `[horizontal, vertical]` element counts; overrides `m0`.
    pub elements: Option<[usize; 2]>,
    pub spacing_wavelengths: Option<f64>,
}

/// Scenario description as read from a scene file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub bs: Option<BsConfig>,
    #[serde(default)]
    pub irs: Vec<IrsConfig>,
    #[serde(default)]
    pub users: Vec<Vec3>,
    #[serde(default)]
    pub obstacles: Vec<Aabb>,
    #[serde(default)]
    pub constants: Propagation,
    /// Per-user IRS node indices (1-based). Missing means every IRS.
    #[serde(default)]
    pub effective_regions: Option<Vec<Vec<usize>>>,
}

/// Uniform planar array: element `(i, k)` has index `i * vertical + k` and
/// sits at `(i - (H-1)/2) * s * h_axis + (k - (V-1)/2) * s * v_axis`
/// (spacing `s` in wavelengths) relative to the array center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub horizontal: usize,
    pub vertical: usize,
    pub spacing_wavelengths: f64,
    pub h_axis: Vec3,
    pub v_axis: Vec3,
}

impl ArrayGeometry {
    /// Array in the plane orthogonal to `normal`, with the horizontal axis
    /// taken perpendicular to global up (`+z`, or `+y` when the normal is vertical).
    pub fn facing(normal: Vec3, horizontal: usize, vertical: usize, spacing_wavelengths: f64) -> Self {
        let n = normal.normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        let up = Vec3::new(0.0, 0.0, 1.0);
        let h = up
            .cross(n)
            .normalized()
            .filter(|h| h.norm() > 0.5 && up.cross(n).norm() > 1e-9)
            .unwrap_or_else(|| Vec3::new(0.0, 1.0, 0.0).cross(n).normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0)));
        let v = n.cross(h);
        Self { horizontal, vertical, spacing_wavelengths, h_axis: h, v_axis: v }
    }

    /// Single isotropic element (users, IRS controllers).
    pub fn point() -> Self {
        Self::facing(Vec3::new(1.0, 0.0, 0.0), 1, 1, 0.5)
    }

    pub fn len(&self) -> usize {
        self.horizontal * self.vertical
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of element `m` relative to the center, in wavelengths.
    pub fn offset(&self, m: usize) -> Vec3 {
        let (i, k) = (m / self.vertical, m % self.vertical);
        let ci = i as f64 - (self.horizontal as f64 - 1.0) / 2.0;
        let ck = k as f64 - (self.vertical as f64 - 1.0) / 2.0;
        (self.h_axis * ci + self.v_axis * ck) * self.spacing_wavelengths
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub position: Vec3,
    pub array: ArrayGeometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Irs {
    /// Geometric center, also the reference point and controller location.
    pub position: Vec3,
    pub normal: Vec3,
    pub array: ArrayGeometry,
}

impl Irs {
    pub fn elements(&self) -> usize {
        self.array.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Bs,
    /// 1-based IRS index, equal to the node id.
    Irs(usize),
    /// 0-based user index.
    User(usize),
}

/// Validated, immutable network geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub bs: BaseStation,
    pub irs: Vec<Irs>,
    pub users: Vec<Vec3>,
    pub obstacles: Vec<Aabb>,
    pub constants: Propagation,
    /// Sorted IRS node ids per user.
    pub effective_regions: Vec<Vec<usize>>,
}

impl Scene {
    pub fn from_config(config: &SceneConfig) -> Result<Self, SceneError> {
        let bs_cfg = config.bs.as_ref().ok_or_else(|| SceneError::MissingField("bs".into()))?;
        let bs_pos = bs_cfg.position.ok_or_else(|| SceneError::MissingField("bs.position".into()))?;
        check_point("bs.position", bs_pos)?;
        let (bh, bv) = match (bs_cfg.layout, bs_cfg.antennas) {
            (Some([h, v]), Some(n)) if h * v != n => {
                return Err(invalid("bs.layout", format!("{h}x{v} does not hold {n} antennas")))
            }
            (Some([h, v]), _) => (h, v),
            (None, Some(n)) => (n, 1),
            (None, None) => return Err(SceneError::MissingField("bs.antennas".into())),
        };
        if bh * bv == 0 {
            return Err(invalid("bs.antennas", "N_B must be at least 1"));
        }
        let boresight = match bs_cfg.boresight {
            Some(b) => unit("bs.boresight", b)?,
            None => Vec3::new(1.0, 0.0, 0.0),
        };
        let bs_spacing = positive("bs.spacing_wavelengths", bs_cfg.spacing_wavelengths.unwrap_or(0.5))?;
        let bs = BaseStation { position: bs_pos, array: ArrayGeometry::facing(boresight, bh, bv, bs_spacing) };

        let mut irs = Vec::with_capacity(config.irs.len());
        for (idx, c) in config.irs.iter().enumerate() {
            let field = |f: &str| format!("irs[{idx}].{f}");
            let position = c.position.ok_or_else(|| SceneError::MissingField(field("position")))?;
            check_point(&field("position"), position)?;
            let normal = c.pointing_normal.ok_or_else(|| SceneError::MissingField(field("pointing_normal")))?;
            let normal = unit(&field("pointing_normal"), normal)?;
            let [h, v] = match (c.elements, c.m0) {
                (Some(e), _) => e,
                (None, Some(m0)) => [m0, m0],
                (None, None) => return Err(SceneError::MissingField(field("m0"))),
            };
            if h * v == 0 {
                return Err(invalid(field("m0"), "M0 must be at least 1"));
            }
            let spacing = positive(&field("spacing_wavelengths"), c.spacing_wavelengths.unwrap_or(0.25))?;
            irs.push(Irs { position, normal, array: ArrayGeometry::facing(normal, h, v, spacing) });
        }

        for (k, u) in config.users.iter().enumerate() {
            check_point(&format!("users[{k}]"), *u)?;
        }

        let j = irs.len();
        let effective_regions = match &config.effective_regions {
            None => (0..config.users.len()).map(|_| (1..=j).collect()).collect(),
            Some(regions) => {
                if regions.len() != config.users.len() {
                    return Err(invalid(
                        "effective_regions",
                        format!("{} regions for {} users", regions.len(), config.users.len()),
                    ));
                }
                let mut out = Vec::with_capacity(regions.len());
                for (k, r) in regions.iter().enumerate() {
                    let mut r = r.clone();
                    if let Some(bad) = r.iter().find(|&&x| x == 0 || x > j) {
                        return Err(invalid(format!("effective_regions[{k}]"), format!("IRS {bad} does not exist")));
                    }
                    r.sort_unstable();
                    r.dedup();
                    out.push(r);
                }
                out
            }
        };

        let c = &config.constants;
        if !(c.carrier_freq_hz > 0.0) {
            return Err(invalid("constants.carrier_freq_hz", "must be positive"));
        }
        if !(c.alpha_los > 0.0 && c.alpha_nlos > 0.0) {
            return Err(invalid("constants.alpha", "path-loss exponents must be positive"));
        }

        let scene = Scene {
            bs,
            irs,
            users: config.users.clone(),
            obstacles: config.obstacles.clone(),
            constants: config.constants.clone(),
            effective_regions,
        };
        for node in 0..scene.node_count() {
            let p = scene.position(node);
            if let Some(o) = scene.obstacles.iter().position(|b| b.contains(p)) {
                return Err(SceneError::NodeInsideObstacle { node: scene.node_label(node), obstacle: o });
            }
        }
        Ok(scene)
    }

    /// Number of IRSs, J.
    pub fn num_irs(&self) -> usize {
        self.irs.len()
    }

    /// Number of users, K.
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_bs_antennas(&self) -> usize {
        self.bs.array.len()
    }

    pub fn node_count(&self) -> usize {
        1 + self.irs.len() + self.users.len()
    }

    pub fn user_node(&self, user: usize) -> usize {
        self.irs.len() + 1 + user
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        let j = self.irs.len();
        match node {
            0 => NodeKind::Bs,
            n if n <= j => NodeKind::Irs(n),
            n => NodeKind::User(n - j - 1),
        }
    }

    pub fn is_irs(&self, node: usize) -> bool {
        matches!(self.kind(node), NodeKind::Irs(_))
    }

    pub fn is_user(&self, node: usize) -> bool {
        matches!(self.kind(node), NodeKind::User(_))
    }

    /// IRS by node id (1-based).
    pub fn irs(&self, node: usize) -> &Irs {
        &self.irs[node - 1]
    }

    pub fn position(&self, node: usize) -> Vec3 {
        match self.kind(node) {
            NodeKind::Bs => self.bs.position,
            NodeKind::Irs(j) => self.irs[j - 1].position,
            NodeKind::User(k) => self.users[k],
        }
    }

    /// Antenna/element layout of a node; users are single-element.
    pub fn array(&self, node: usize) -> ArrayGeometry {
        match self.kind(node) {
            NodeKind::Bs => self.bs.array.clone(),
            NodeKind::Irs(j) => self.irs[j - 1].array.clone(),
            NodeKind::User(_) => ArrayGeometry::point(),
        }
    }

    pub fn elements(&self, node: usize) -> usize {
        match self.kind(node) {
            NodeKind::Bs => self.bs.array.len(),
            NodeKind::Irs(j) => self.irs[j - 1].elements(),
            NodeKind::User(_) => 1,
        }
    }

    pub fn node_label(&self, node: usize) -> String {
        match self.kind(node) {
            NodeKind::Bs => "BS".into(),
            NodeKind::Irs(j) => format!("IRS {j}"),
            NodeKind::User(k) => format!("user {}", k + 1),
        }
    }

    /// Nominal distance between reference points.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.position(i).distance(self.position(j))
    }

    pub fn has_geometric_los(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.position(i), self.position(j));
        !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    /// Whether `p` lies strictly in front of IRS `j` (node id).
    pub fn half_space_ok(&self, j: usize, p: Vec3) -> bool {
        let irs = self.irs(j);
        irs.normal.dot(p - irs.position) > 0.0
    }

    /// Reflection conditions without the blockage check: outward distance
    /// ordering, half-space reflection at each IRS endpoint and the user's
    /// effective region. Paths built from these links form the full path sets.
    pub fn reflection_admissible(&self, i: usize, j: usize, user: Option<usize>) -> bool {
        if i == j || j >= self.node_count() || i >= self.node_count() {
            return false;
        }
        match (self.kind(i), self.kind(j)) {
            (NodeKind::User(_), _) | (_, NodeKind::Bs) => return false,
            (_, NodeKind::User(k)) => {
                if user.is_some_and(|u| u != k) {
                    return false;
                }
                if let NodeKind::Irs(a) = self.kind(i) {
                    if self.effective_regions[k].binary_search(&a).is_err() {
                        return false;
                    }
                }
            }
            (_, NodeKind::Irs(b)) => {
                if let Some(k) = user {
                    if self.effective_regions[k].binary_search(&b).is_err() {
                        return false;
                    }
                }
                if !(self.distance(0, j) > self.distance(0, i)) {
                    return false;
                }
            }
        }
        if self.is_irs(i) && !self.half_space_ok(i, self.position(j)) {
            return false;
        }
        if self.is_irs(j) && !self.half_space_ok(j, self.position(i)) {
            return false;
        }
        true
    }

    /// Binary LoS indicator u_{i,j}, optionally restricted to a user's region.
    pub fn los_indicator(&self, i: usize, j: usize, user: Option<usize>) -> bool {
        self.reflection_admissible(i, j, user) && self.has_geometric_los(i, j)
    }

    /// LoS graph of one user: vertices `{0} ∪ D_k ∪ {J+1+k}`, edges with u = 1.
    /// The direct BS-user link is not an edge.
    pub fn build_los_graph(&self, user: usize) -> LosGraph {
        self.build_graph(user, true)
    }

    /// Graph of all reflection-admissible links of a user, blocked or not.
    pub fn build_reflection_graph(&self, user: usize) -> LosGraph {
        self.build_graph(user, false)
    }

    fn build_graph(&self, user: usize, require_los: bool) -> LosGraph {
        let user_node = self.user_node(user);
        let mut vertices = Vec::with_capacity(self.effective_regions[user].len() + 2);
        vertices.push(0);
        vertices.extend(self.effective_regions[user].iter().copied());
        vertices.push(user_node);
        let mut adjacency = BTreeMap::new();
        for &i in &vertices[..vertices.len() - 1] {
            let mut out = Vec::new();
            for &j in &vertices[1..] {
                if i == 0 && j == user_node {
                    continue;
                }
                let ok = if require_los {
                    self.los_indicator(i, j, Some(user))
                } else {
                    self.reflection_admissible(i, j, Some(user))
                };
                if ok {
                    out.push(Edge { to: j, distance: self.distance(i, j) });
                }
            }
            adjacency.insert(i, out);
        }
        LosGraph { num_irs: self.irs.len(), user, user_node, vertices, adjacency }
    }
}

fn check_point(field: &str, p: Vec3) -> Result<(), SceneError> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "coordinates must be finite"))
    }
}

fn unit(field: &str, v: Vec3) -> Result<Vec3, SceneError> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(invalid(field, format!("must be a unit vector (norm {n})")));
    }
    Ok(v * (1.0 / n))
}

fn positive(field: &str, x: f64) -> Result<f64, SceneError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(field, "must be positive"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    pub distance: f64,
}

/// Directed graph of effective LoS links for one user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LosGraph {
    pub num_irs: usize,
    pub user: usize,
    pub user_node: usize,
    /// BS, the user's IRSs in ascending order, then the user.
    pub vertices: Vec<usize>,
    adjacency: BTreeMap<usize, Vec<Edge>>,
}

impl LosGraph {
    /// Builds a graph from explicit edges, e.g. for synthetic routing instances.
    /// Vertices are `0..=num_irs` plus the user node `num_irs + 1 + user`.
    pub fn from_edges(num_irs: usize, user: usize, edges: &[(usize, usize, f64)]) -> Self {
        let user_node = num_irs + 1 + user;
        let mut vertices: Vec<usize> = (0..=num_irs).collect();
        vertices.push(user_node);
        let mut adjacency: BTreeMap<usize, Vec<Edge>> = vertices.iter().map(|&v| (v, Vec::new())).collect();
        for &(i, j, d) in edges {
            adjacency.entry(i).or_default().push(Edge { to: j, distance: d });
        }
        for out in adjacency.values_mut() {
            out.sort_by_key(|e| e.to);
            out.dedup_by_key(|e| e.to);
        }
        Self { num_irs, user, user_node, vertices, adjacency }
    }

    /// Outgoing edges of `v`, sorted by target id.
    pub fn successors(&self, v: usize) -> &[Edge] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.successors(i).iter().any(|e| e.to == j)
    }

    pub fn edge_distance(&self, i: usize, j: usize) -> Option<f64> {
        self.successors(i).iter().find(|e| e.to == j).map(|e| e.distance)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().flat_map(|(&i, out)| out.iter().map(move |e| (i, e.to, e.distance)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum()
    }

    pub fn is_irs(&self, v: usize) -> bool {
        v >= 1 && v <= self.num_irs
    }

    /// Kahn's algorithm; `None` if the graph has a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree: BTreeMap<usize, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for (_, j, _) in self.edges() {
            *indegree.entry(j).or_default() += 1;
        }
        let mut ready: Vec<usize> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut order = Vec::with_capacity(indegree.len());
        while let Some(v) = ready.pop() {
            order.push(v);
            for e in self.successors(v) {
                let d = indegree.get_mut(&e.to).expect("edge target is a vertex");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.to);
                }
            }
        }
        (order.len() == indegree.len()).then_some(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn irs_cfg(p: [f64; 3], n: [f64; 3], m0: usize) -> IrsConfig {
        IrsConfig { position: Some(p.into()), pointing_normal: Some(n.into()), m0: Some(m0), ..Default::default() }
    }

    fn chain() -> SceneConfig {
        SceneConfig {
            bs: Some(BsConfig { position: Some(Vec3::new(0.0, 0.0, 0.0)), antennas: Some(4), ..Default::default() }),
            irs: vec![irs_cfg([10.0, 0.0, 0.0], [0.0, 1.0, 0.0], 2)],
            users: vec![Vec3::new(20.0, 0.0, 0.0)],
            ..Default::default()
        }
    }

    #[test]
    fn chain_distances() {
        let mut cfg = chain();
        // collinear nodes sit in the IRS plane; tilt the normal so both are in front
        cfg.irs[0].position = Some(Vec3::new(10.0, 1.0, 0.0));
        cfg.irs[0].pointing_normal = Some(Vec3::new(0.0, -1.0, 0.0));
        let s = Scene::from_config(&cfg).unwrap();
        assert!((s.distance(0, 1) - 101.0f64.sqrt()).abs() < 1e-12);
        let s = Scene::from_config(&chain()).unwrap();
        assert_eq!(s.distance(0, 1), 10.0);
        assert_eq!(s.distance(1, 2), 10.0);
    }

    #[test]
    fn missing_normal_is_validation_error() {
        let mut cfg = chain();
        cfg.irs[0].pointing_normal = None;
        assert_eq!(
            Scene::from_config(&cfg).unwrap_err(),
            SceneError::MissingField("irs[0].pointing_normal".into())
        );
    }

    #[test]
    fn node_inside_obstacle_rejected() {
        let mut cfg = chain();
        cfg.obstacles.push(Aabb::from_corners(Vec3::new(19.0, -1.0, -1.0), Vec3::new(21.0, 1.0, 1.0)));
        assert!(matches!(Scene::from_config(&cfg), Err(SceneError::NodeInsideObstacle { .. })));
    }

    #[test]
    fn non_unit_normal_rejected() {
        let mut cfg = chain();
        cfg.irs[0].pointing_normal = Some(Vec3::new(0.0, 2.0, 0.0));
        assert!(matches!(Scene::from_config(&cfg), Err(SceneError::Invalid { .. })));
    }

    #[test]
    fn half_space_boundary_is_outside() {
        let s = Scene::from_config(&chain()).unwrap();
        // IRS at (10,0,0) facing +y
        assert!(s.half_space_ok(1, Vec3::new(10.0, 5.0, 0.0)));
        assert!(!s.half_space_ok(1, Vec3::new(3.0, 0.0, 0.0)));
        assert!(!s.half_space_ok(1, Vec3::new(10.0, -1.0, 0.0)));
    }

    fn three_node() -> Scene {
        let mut cfg = chain();
        cfg.irs[0].position = Some(Vec3::new(10.0, 5.0, 0.0));
        cfg.irs[0].pointing_normal = Some(Vec3::new(0.0, -1.0, 0.0));
        Scene::from_config(&cfg).unwrap()
    }

    #[test]
    fn chain_graph_has_two_edges() {
        let s = three_node();
        let g = s.build_los_graph(0);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
        assert!(g.topological_order().is_some());
    }

    #[test]
    fn fully_blocked_graph_is_empty() {
        let mut cfg = chain();
        cfg.irs[0].position = Some(Vec3::new(10.0, 5.0, 0.0));
        cfg.irs[0].pointing_normal = Some(Vec3::new(0.0, -1.0, 0.0));
        // walls around the IRS
        cfg.obstacles.push(Aabb::from_corners(Vec3::new(5.0, 2.0, -5.0), Vec3::new(15.0, 3.0, 5.0)));
        let s = Scene::from_config(&cfg).unwrap();
        assert_eq!(s.build_los_graph(0).edge_count(), 0);
        // still admissible for the full path set
        assert_eq!(s.build_reflection_graph(0).edge_count(), 2);
    }

    #[test]
    fn inward_and_back_to_back_hops_rejected() {
        let cfg = SceneConfig {
            bs: Some(BsConfig { position: Some(Vec3::new(0.0, 0.0, 0.0)), antennas: Some(1), ..Default::default() }),
            irs: vec![
                irs_cfg([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 2),
                irs_cfg([10.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 2),
                irs_cfg([10.0, 4.0, 0.0], [0.0, -1.0, 0.0], 2),
                irs_cfg([4.0, 4.0, 0.0], [1.0, 0.0, 0.0], 2),
            ],
            users: vec![Vec3::new(12.0, -3.0, 0.0)],
            ..Default::default()
        };
        let s = Scene::from_config(&cfg).unwrap();
        // BS -> IRS 1 facing the BS
        assert!(s.los_indicator(0, 1, Some(0)));
        // IRS 3 -> IRS 4 goes inward (d_{0,4} < d_{0,3})
        assert!(s.distance(0, 4) < s.distance(0, 3));
        assert!(!s.los_indicator(3, 4, Some(0)));
        // IRS 1 and IRS 2 both face -x: IRS 2 is behind IRS 1's surface
        assert!(!s.los_indicator(1, 2, Some(0)));
        // repeated evaluation is stable
        assert_eq!(s.los_indicator(0, 1, Some(0)), s.los_indicator(0, 1, Some(0)));
    }

    #[test]
    fn effective_region_restricts_user_edges() {
        let mut cfg = chain();
        cfg.irs[0].position = Some(Vec3::new(10.0, 5.0, 0.0));
        cfg.irs[0].pointing_normal = Some(Vec3::new(0.0, -1.0, 0.0));
        cfg.effective_regions = Some(vec![vec![]]);
        let s = Scene::from_config(&cfg).unwrap();
        assert!(!s.los_indicator(1, 2, Some(0)));
        assert_eq!(s.build_los_graph(0).edge_count(), 0);
    }

    #[test]
    fn array_axes_are_orthonormal() {
        let a = ArrayGeometry::facing(Vec3::new(0.6, 0.8, 0.0), 3, 2, 0.25);
        let n = Vec3::new(0.6, 0.8, 0.0);
        assert!(a.h_axis.dot(n).abs() < 1e-12 && a.v_axis.dot(n).abs() < 1e-12);
        assert!(a.h_axis.dot(a.v_axis).abs() < 1e-12);
        assert!((a.v_axis.norm() - 1.0).abs() < 1e-12);
        let up = ArrayGeometry::facing(Vec3::new(0.0, 0.0, 1.0), 2, 2, 0.25);
        assert!((up.h_axis.norm() - 1.0).abs() < 1e-12);
    }
}
