//! Cooperative passive beamforming, BS beams and linear receivers.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::channel::{PhaseConfig, RankOne};
use crate::linalg::{cis, l1_norm, numerical_rank, phase, pinv, solve};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeamError {
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("a reflection path needs at least two LoS hops, got {0}")]
    PathTooShort(usize),
    #[error("hop {0} has no LoS rank-one decomposition")]
    MissingLos(usize),
    #[error("hop {hop} has length {found}, expected {expected}")]
    DimensionMismatch { hop: usize, expected: usize, found: usize },
}

/// Phases plus per-user BS beams and the resulting performance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSolution {
    pub phases: PhaseConfig,
    #[serde(with = "crate::linalg::serde_cvectors")]
    pub bs_beams: Vec<CVector>,
    /// Per-user `|w^H h|²`.
    pub achieved_gains: Vec<f64>,
    pub sinrs: Vec<f64>,
}

/// `e^{-j∠v}` elementwise; zero entries get phase 0.
pub fn conj_phase(v: &CVector) -> CVector {
    v.map(|z| if z == C64::new(0.0, 0.0) { C64::new(1.0, 0.0) } else { cis(-phase(z)) })
}

/// Optimal (φ1, φ2) for `h = ρ (v1^T φ1)(v2^T φ2)`.
pub fn optimal_double_reflection_phases(v1: &CVector, v2: &CVector) -> (CVector, CVector) {
    (conj_phase(v1), conj_phase(v2))
}

/// `|ρ|² ‖v1‖₁² ‖v2‖₁²`, the optimum of the factored double-reflection channel.
pub fn double_reflection_gain(rho: C64, v1: &CVector, v2: &CVector) -> f64 {
    rho.norm_sqr() * l1_norm(v1).powi(2) * l1_norm(v2).powi(2)
}

/// Per-IRS phases aligning every hop of a pure-LoS reflection path.
///
/// `hops` holds the rank-one LoS terms `[Q_{0,a_1}, S_{a_1,a_2}, ..., g_{a_n,k}]`
/// (`n + 1` entries). IRS `a_i` gets `θ_m = e^{-j∠(conj(r_m) l_m)}` where `r`
/// is the receive-side vector of its incoming hop and `l` the transmit-side
/// vector of its outgoing hop, making each inner product real and maximal.
pub fn multi_hop_phases(hops: &[RankOne]) -> Result<Vec<CVector>, BeamError> {
    if hops.len() < 2 {
        return Err(BeamError::PathTooShort(hops.len()));
    }
    hops.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (r, l) = (&w[0].right, &w[1].left);
            if r.len() != l.len() {
                return Err(BeamError::DimensionMismatch { hop: i + 1, expected: r.len(), found: l.len() });
            }
            Ok(conj_phase(&r.conjugate().component_mul(l)))
        })
        .collect()
}

/// MRT toward a BS-side array response, `w = q / ‖q‖`.
pub fn bs_mrt(q: &CVector) -> Result<CVector, BeamError> {
    let n = q.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(BeamError::ZeroVector);
    }
    Ok(q.unscale(n))
}

/// `M^{2n} N_B β^{n+1} ∏ d_i^{-2}` for an `n`-reflection LoS path.
pub fn closed_form_path_gain(n: usize, m: usize, n_b: usize, beta: f64, distances: &[f64]) -> f64 {
    debug_assert_eq!(distances.len(), n + 1);
    let dist: f64 = distances.iter().map(|d| d.powi(-2)).product();
    (m as f64).powi(2 * n as i32) * n_b as f64 * beta.powi(n as i32 + 1) * dist
}

/// Same as [`closed_form_path_gain`] with per-IRS element counts.
pub fn closed_form_path_gain_hetero(elements: &[usize], n_b: usize, beta: f64, distances: &[f64]) -> f64 {
    debug_assert_eq!(distances.len(), elements.len() + 1);
    let m: f64 = elements.iter().map(|&m| (m as f64).powi(2)).product();
    let dist: f64 = distances.iter().map(|d| d.powi(-2)).product();
    m * n_b as f64 * beta.powi(elements.len() as i32 + 1) * dist
}

/// Path gain with a direct link combined coherently:
/// `‖f‖² + G + 2 M^n β^{(n+1)/2} ∏ d^{-1} |q̃^H f|`, with `q̃` the unit-modulus
/// BS array response toward the first IRS.
pub fn path_gain_with_direct(
    n: usize,
    m: usize,
    beta: f64,
    distances: &[f64],
    f: &CVector,
    q_tilde: &CVector,
) -> f64 {
    let amp = (m as f64).powi(n as i32) * beta.powf((n as f64 + 1.0) / 2.0) * distances.iter().map(|d| 1.0 / d).product::<f64>();
    f.norm_squared() + amp * amp * q_tilde.len() as f64 + 2.0 * amp * q_tilde.dotc(f).norm()
}

/// Common rotation `ψ` for the path channel so that `f + e^{jψ} h_p` adds
/// coherently, together with the MRT beam and gain `‖f + e^{jψ} h_p‖²`.
pub fn combine_with_direct(f: &CVector, h_path: &CVector) -> (f64, CVector, f64) {
    let psi = -phase(f.dotc(h_path));
    let h = f + h_path * cis(psi);
    let gain = h.norm_squared();
    let w = bs_mrt(&h).unwrap_or_else(|_| CVector::zeros(h.len()));
    (psi, w, gain)
}

/// θ = ∠(a_s / a_d) so that `e^{jθ} a_s + e^{j2θ} a_d` has magnitude `|a_s| + |a_d|`.
pub fn common_phase_combine(a_s: C64, a_d: C64) -> f64 {
    if a_d == C64::new(0.0, 0.0) {
        return 0.0;
    }
    phase(a_s / a_d)
}

/// Links of the double-IRS system for `K` users (one column per user).
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleIrsLinks {
    /// Direct channels, `N_B x K`.
    pub f: Option<CMatrix>,
    /// BS to IRS 1, `N_B x M1`.
    pub q1: CMatrix,
    /// BS to IRS 2, `N_B x M2`.
    pub q2: Option<CMatrix>,
    /// IRS 1 to IRS 2, `M1 x M2`.
    pub s12: CMatrix,
    /// IRS 1 to users, `M1 x K`.
    pub g1: Option<CMatrix>,
    /// IRS 2 to users, `M2 x K`.
    pub g2: CMatrix,
}

impl DoubleIrsLinks {
    pub fn users(&self) -> usize {
        self.g2.ncols()
    }

    /// `H = F + Q1 Φ1 G1 + Q2 Φ2 G2 + Q1 Φ1 S Φ2 G2`.
    pub fn effective(&self, phi1: &CVector, phi2: &CVector) -> CMatrix {
        let p2g2 = diag_mul(phi2, &self.g2);
        let mut inner = &self.s12 * &p2g2;
        if let Some(g1) = &self.g1 {
            inner += g1;
        }
        let mut h = &self.q1 * diag_mul(phi1, &inner);
        if let Some(q2) = &self.q2 {
            h += q2 * p2g2;
        }
        if let Some(f) = &self.f {
            h += f;
        }
        h
    }
}

/// `diag(d) m`.
pub fn diag_mul(d: &CVector, m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        row *= d[r];
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AoResult {
    pub w: CVector,
    pub phi1: CVector,
    pub phi2: CVector,
    pub gain: f64,
    /// `‖h‖²` after MRT at the start and after every iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// One coordinate-ascent pass over `x` for the objective `|c + Σ_m x_m a_m|`.
fn ascend(x: &mut CVector, a: &CVector, c: C64) {
    let mut total = c + x.dot(a);
    for m in 0..x.len() {
        let rest = total - x[m] * a[m];
        x[m] = if a[m] == C64::new(0.0, 0.0) { x[m] } else { cis(phase(rest) - phase(a[m])) };
        total = rest + x[m] * a[m];
    }
}

/// Alternating optimization of BS MRT and the two IRS phase vectors for user
/// 0 of `links`. Passive updates are exact per-element coordinate ascent.
pub fn ao_joint_beamforming(
    links: &DoubleIrsLinks,
    init: Option<(CVector, CVector)>,
    tol: f64,
    max_iters: usize,
) -> AoResult {
    let col = |m: &CMatrix| m.column(0).into_owned();
    let g2 = col(&links.g2);
    let g1 = links.g1.as_ref().map(col);
    let f = links.f.as_ref().map(col);
    let (m1, m2) = (links.q1.ncols(), links.g2.nrows());
    let (mut phi1, mut phi2) = init.unwrap_or_else(|| {
        (CVector::from_element(m1, C64::new(1.0, 0.0)), CVector::from_element(m2, C64::new(1.0, 0.0)))
    });
    let channel = |p1: &CVector, p2: &CVector| {
        let p2g2 = g2.component_mul(p2);
        let mut inner = &links.s12 * &p2g2;
        if let Some(g1) = &g1 {
            inner += g1;
        }
        let mut h = &links.q1 * inner.component_mul(p1);
        if let Some(q2) = &links.q2 {
            h += q2 * p2g2;
        }
        if let Some(f) = &f {
            h += f;
        }
        h
    };
    let mut h = channel(&phi1, &phi2);
    let mut history = vec![h.norm_squared()];
    let mut converged = false;
    for _ in 0..max_iters {
        let w = bs_mrt(&h).unwrap_or_else(|_| CVector::from_element(h.len(), C64::new(1.0, 0.0)));
        // (w^H Q1)^T
        let wq1 = (links.q1.adjoint() * &w).conjugate();
        // φ1: w^H h = c + Σ φ1_m a_m
        let s_p2g2 = &links.s12 * g2.component_mul(&phi2);
        let mut inner = s_p2g2.clone();
        if let Some(g1) = &g1 {
            inner += g1;
        }
        let a = wq1.component_mul(&inner);
        let mut c = C64::new(0.0, 0.0);
        if let Some(f) = &f {
            c += w.dotc(f);
        }
        if let Some(q2) = &links.q2 {
            c += w.dotc(&(q2 * g2.component_mul(&phi2)));
        }
        ascend(&mut phi1, &a, c);
        // φ2: w^H h = c' + Σ φ2_m b_m
        let mut coef = links.s12.transpose() * wq1.component_mul(&phi1);
        if let Some(q2) = &links.q2 {
            coef += (q2.adjoint() * &w).conjugate();
        }
        let b = coef.component_mul(&g2);
        let mut c2 = C64::new(0.0, 0.0);
        if let Some(f) = &f {
            c2 += w.dotc(f);
        }
        if let Some(g1) = &g1 {
            c2 += wq1.component_mul(&phi1).dot(g1);
        }
        ascend(&mut phi2, &b, c2);
        h = channel(&phi1, &phi2);
        let gain = h.norm_squared();
        let prev = *history.last().expect("history starts non-empty");
        history.push(gain);
        if gain - prev <= tol * prev.abs() {
            converged = true;
            break;
        }
    }
    let gain = h.norm_squared();
    let w = bs_mrt(&h).unwrap_or_else(|_| CVector::from_element(h.len(), C64::new(1.0, 0.0)));
    AoResult { w, phi1, phi2, gain, history, converged }
}

/// Per-element coordinate ascent of `‖H‖_F²` over one IRS, where
/// `H = A + B diag(φ) C` (`B` is `N x M`, `C` is `M x K`).
pub fn ascend_frobenius(a: &CMatrix, b: &CMatrix, c: &CMatrix, phi: &mut CVector, sweeps: usize) {
    let mut h = a + b * diag_mul(phi, c);
    for _ in 0..sweeps {
        for m in 0..phi.len() {
            // H = R + φ_m b_m c_m^T ; ‖H‖² = const + 2 Re(φ_m tr(c_m^* b_m^H R)) + |..|²
            let bm = b.column(m);
            let cm = c.row(m);
            let outer = bm * cm;
            let rest = &h - &outer * phi[m];
            let t = (outer.adjoint() * &rest).trace();
            let new = if t == C64::new(0.0, 0.0) { phi[m] } else { cis(phase(t)) };
            h = rest + outer * new;
            phi[m] = new;
        }
    }
}

/// Linear receive beamformer family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Receiver {
    Mrt,
    Zf,
    Mmse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverOutput {
    /// One receive beam per user (columns of `H` order).
    pub beams: Vec<CVector>,
    pub sinrs: Vec<f64>,
    /// ZF only: `rank(H) < K`, so interference cannot be nulled.
    pub rank_deficient: bool,
}

/// Uplink receive beams for `H` (`N_B x K`) with per-user power `p` and noise `noise`.
pub fn linear_receivers(h: &CMatrix, kind: Receiver, p: f64, noise: f64) -> ReceiverOutput {
    let (n_b, k) = h.shape();
    let mut rank_deficient = false;
    let beams: Vec<CVector> = match kind {
        Receiver::Mrt => (0..k).map(|i| bs_mrt(&h.column(i).into_owned()).unwrap_or_else(|_| CVector::zeros(n_b))).collect(),
        Receiver::Zf => {
            let (pi, rank) = pinv(h);
            rank_deficient = rank < k;
            (0..k).map(|i| pi.row(i).adjoint()).collect()
        }
        Receiver::Mmse => {
            let a = h * h.adjoint() * C64::new(p, 0.0) + CMatrix::identity(n_b, n_b) * C64::new(noise, 0.0);
            (0..k)
                .map(|i| solve(&a, &h.column(i).into_owned()).unwrap_or_else(|| CVector::zeros(n_b)))
                .collect()
        }
    };
    let sinrs = uplink_sinrs(h, &beams, p, noise);
    ReceiverOutput { beams, sinrs, rank_deficient }
}

/// `SINR_k = p|w_k^H h_k|² / (p Σ_{j≠k} |w_k^H h_j|² + σ²‖w_k‖²)`.
pub fn uplink_sinrs(h: &CMatrix, beams: &[CVector], p: f64, noise: f64) -> Vec<f64> {
    beams
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut sig = 0.0;
            let mut interf = 0.0;
            for j in 0..h.ncols() {
                let v = w.dotc(&h.column(j)).norm_sqr() * p;
                if j == k {
                    sig = v;
                } else {
                    interf += v;
                }
            }
            let den = interf + noise * w.norm_squared();
            if den > 0.0 {
                sig / den
            } else if sig > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank_g2: usize,
    pub rank_q02: usize,
    pub rank_single: usize,
    pub rank_double: usize,
    /// `rank_double - rank_single ≥ min(rank_g2, rank_q02)`.
    pub bound_holds: bool,
}

/// Numerical ranks behind the double- versus single-IRS rank comparison.
pub fn channel_rank_gain_check(g2: &CMatrix, q02: &CMatrix, h_single: &CMatrix, h_double: &CMatrix) -> RankReport {
    let rank_g2 = numerical_rank(g2);
    let rank_q02 = numerical_rank(q02);
    let rank_single = numerical_rank(h_single);
    let rank_double = numerical_rank(h_double);
    let bound_holds = rank_double as isize - rank_single as isize >= rank_g2.min(rank_q02) as isize;
    RankReport { rank_g2, rank_q02, rank_single, rank_double, bound_holds }
}
