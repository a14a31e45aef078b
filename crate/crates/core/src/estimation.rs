//! Training overhead of double-IRS channel estimation, the cascaded channel
//! forms it relies on, and least-squares estimators for the SISO cascade.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;

use crate::linalg::{dft_matrix, kron, least_squares, phase};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("training matrix has rank {rank}, {needed} unknowns need full column rank")]
    RankDeficient { rank: usize, needed: usize },
    #[error("{observations} observations for {patterns} training patterns")]
    LengthMismatch { observations: usize, patterns: usize },
    #[error("pattern {index} has {found} entries, expected {expected}")]
    PatternDimension { index: usize, expected: usize, found: usize },
    #[error("the {0} reflection must stay fixed during its training phase")]
    ReferenceNotFixed(&'static str),
    #[error("reference observation is zero; the scale cannot be resolved")]
    ZeroReference,
    #[error("rank-one model residual {residual:e} exceeds {tolerance:e}")]
    NotRankOne { residual: f64, tolerance: f64 },
    #[error("reference channel entry {index} is {magnitude:e}, too small to divide by")]
    NearZeroReference { index: usize, magnitude: f64 },
}

/// Pilots for the double-IRS single-user MISO cascade: `2M + max(M, ⌈M²/N_B⌉)`.
pub fn overhead_double_irs_single_user(m: u64, n_b: u64) -> u64 {
    2 * m + m.max((m * m).div_ceil(n_b.max(1)))
}

/// Extra pilots for users `2..=K` given user 1 as reference:
/// `max(K-1, ⌈2(K-1)M/N_B⌉)`, zero for a single user.
pub fn overhead_multi_user_extra(m: u64, n_b: u64, k: u64) -> u64 {
    if k <= 1 {
        return 0;
    }
    (k - 1).max((2 * (k - 1) * m).div_ceil(n_b.max(1)))
}

/// Pilots to identify the general SISO double-reflection cascade: `M²`.
pub fn overhead_benchmark_siso_general(m: u64) -> u64 {
    m * m
}

/// Benchmark for `K` users estimated one after another: `K M²`.
pub fn overhead_benchmark_multi_user(m: u64, k: u64) -> u64 {
    k * overhead_benchmark_siso_general(m)
}

/// `diag(q) S diag(g)`: the SISO cascade BS-IRS 1-IRS 2-user with no phase
/// shifts applied, so that `h = φ1^T S⃗ φ2`.
pub fn siso_cascade(q: &CVector, s: &CMatrix, g: &CVector) -> CMatrix {
    CMatrix::from_fn(s.nrows(), s.ncols(), |a, b| q[a] * s[(a, b)] * g[b])
}

/// `φ1^T S⃗ φ2`.
pub fn siso_observation(cascade: &CMatrix, phi1: &CVector, phi2: &CVector) -> C64 {
    (phi1.transpose() * cascade * phi2)[0]
}

/// `M²` reflection pairs `(F_a, F_b)` from the rows of the `M`-point DFT,
/// ordered with `a` fastest. Their regressors are orthogonal.
pub fn dft_training_pairs(m: usize) -> Vec<(CVector, CVector)> {
    let f = dft_matrix(m);
    let mut out = Vec::with_capacity(m * m);
    for b in 0..m {
        for a in 0..m {
            out.push((f.row(a).transpose(), f.row(b).transpose()));
        }
    }
    out
}

/// Least-squares estimate of `S⃗` from `y_t = (φ2_t ⊗ φ1_t)^T vec(S⃗) + n_t`
/// (column-major `vec`).
pub fn ls_estimate_cascaded_siso(
    pairs: &[(CVector, CVector)],
    y: &CVector,
) -> Result<CMatrix, EstimationError> {
    if pairs.len() != y.len() {
        return Err(EstimationError::LengthMismatch { observations: y.len(), patterns: pairs.len() });
    }
    let m = pairs.first().map_or(0, |p| p.0.len());
    for (index, (p1, p2)) in pairs.iter().enumerate() {
        for p in [p1, p2] {
            if p.len() != m {
                return Err(EstimationError::PatternDimension { index, expected: m, found: p.len() });
            }
        }
    }
    let needed = m * m;
    if pairs.len() < needed || needed == 0 {
        let rank = if needed == 0 { 0 } else { pairs.len().min(needed) };
        return Err(EstimationError::RankDeficient { rank, needed });
    }
    let mut a = CMatrix::zeros(pairs.len(), needed);
    for (t, (p1, p2)) in pairs.iter().enumerate() {
        a.row_mut(t).copy_from(&kron(p2, p1).transpose());
    }
    let x = least_squares(&a, y).map_err(|rank| EstimationError::RankDeficient { rank, needed })?;
    Ok(CMatrix::from_column_slice(m, m, x.as_slice()))
}

/// Signature vectors of a rank-one double-reflection SISO channel,
/// `h = (v1^T φ1)(v2^T φ2)`, fixed up to the product scale; `v1[0]` is real
/// and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoupledEstimate {
    pub v1: CVector,
    pub v2: CVector,
}

impl DecoupledEstimate {
    pub fn channel(&self, phi1: &CVector, phi2: &CVector) -> C64 {
        self.v1.dot(phi1) * self.v2.dot(phi2)
    }
}

/// One decoupled training phase: the other IRS holds `fixed` while this one
/// sweeps `patterns`.
pub struct DecoupledPhase<'a> {
    pub fixed: &'a CVector,
    pub patterns: &'a [CVector],
    pub y: &'a CVector,
}

fn ls_linear(patterns: &[CVector], y: &CVector) -> Result<CVector, EstimationError> {
    if patterns.len() != y.len() {
        return Err(EstimationError::LengthMismatch { observations: y.len(), patterns: patterns.len() });
    }
    let m = patterns.first().map_or(0, |p| p.len());
    if patterns.len() < m || m == 0 {
        return Err(EstimationError::RankDeficient { rank: patterns.len().min(m), needed: m });
    }
    let mut a = CMatrix::zeros(patterns.len(), m);
    for (t, p) in patterns.iter().enumerate() {
        if p.len() != m {
            return Err(EstimationError::PatternDimension { index: t, expected: m, found: p.len() });
        }
        a.row_mut(t).copy_from(&p.transpose());
    }
    least_squares(&a, y).map_err(|rank| EstimationError::RankDeficient { rank, needed: m })
}

/// Decoupled estimation under a LoS (rank-one) inter-IRS link: `M` pilots
/// sweep IRS 1 with IRS 2 fixed, `M` more sweep IRS 2 with IRS 1 fixed. The
/// factorization is then checked on held-out observations `validation`;
/// relative residual above `tolerance` means the channel is not rank one.
pub fn ls_estimate_los_decoupled(
    irs1: DecoupledPhase,
    irs2: DecoupledPhase,
    validation: &[(CVector, CVector, C64)],
    tolerance: f64,
) -> Result<DecoupledEstimate, EstimationError> {
    // u1 = (v2^T φ2_ref) v1 and u2 = (v1^T φ1_ref) v2
    let u1 = ls_linear(irs1.patterns, irs1.y)?;
    let u2 = ls_linear(irs2.patterns, irs2.y)?;
    let scale = u1.dot(irs2.fixed);
    if scale.norm() <= f64::MIN_POSITIVE {
        return Err(EstimationError::ZeroReference);
    }
    let mut v1 = u1 / scale;
    let mut v2 = u2;
    let rot = crate::linalg::cis(-phase(v1[0]));
    v1 *= rot;
    v2 /= rot;
    let est = DecoupledEstimate { v1, v2 };
    if !validation.is_empty() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (p1, p2, y) in validation {
            num += (est.channel(p1, p2) - y).norm_sqr();
            den += y.norm_sqr();
        }
        let residual = (num / den.max(f64::MIN_POSITIVE)).sqrt();
        if !(residual <= tolerance) {
            return Err(EstimationError::NotRankOne { residual, tolerance });
        }
    }
    Ok(est)
}

/// `‖est - truth‖_F² / ‖truth‖_F²`.
pub fn nmse(est: &CMatrix, truth: &CMatrix) -> f64 {
    (est - truth).norm_squared() / truth.norm_squared()
}

/// Double-IRS MISO channel of one user in cascaded form:
/// `h = f + R1 φ1 + R2 φ2 + Σ_m R1 diag(a_m) φ1 φ2_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadedChannel {
    pub f: CVector,
    /// `H_{0,1} diag(g_1)`.
    pub r1: CMatrix,
    /// `H_{0,2} diag(g_2)`.
    pub r2: CMatrix,
    /// `a_m = diag(g_1)^{-1} s̄_m`, where `s̄_m` is column `m` of `S_{1,2} diag(g_2)`.
    pub a: Vec<CVector>,
}

/// Entries of a reference channel smaller than this (relative to its largest)
/// are refused as divisors.
pub const REFERENCE_FLOOR: f64 = 1e-12;

fn checked_inverse(g: &CVector) -> Result<CVector, EstimationError> {
    let max = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (index, z) in g.iter().enumerate() {
        if z.norm() <= REFERENCE_FLOOR * max || max == 0.0 {
            return Err(EstimationError::NearZeroReference { index, magnitude: z.norm() });
        }
    }
    Ok(g.map(|z| C64::new(1.0, 0.0) / z))
}

/// `H diag(g)`.
pub fn single_reflection_cascade(h: &CMatrix, g: &CVector) -> CMatrix {
    let mut r = h.clone();
    for (c, mut col) in r.column_iter_mut().enumerate() {
        col *= g[c];
    }
    r
}

/// `S̃_m = H_{0,1} diag(s̄_m)` for every element `m` of IRS 2.
pub fn double_reflection_cascades(h01: &CMatrix, s12: &CMatrix, g2: &CVector) -> Vec<CMatrix> {
    (0..s12.ncols())
        .map(|m| single_reflection_cascade(h01, &(s12.column(m) * g2[m])))
        .collect()
}

/// `diag(g_ref)^{-1} g`: a user's scaling vector relative to the reference user.
pub fn user_scaling(g_ref: &CVector, g: &CVector) -> Result<CVector, EstimationError> {
    Ok(checked_inverse(g_ref)?.component_mul(g))
}

impl CascadedChannel {
    /// From the separate links (`h01`, `h02`: `N_B x M`; `s12`: `M x M`).
    pub fn from_links(
        f: &CVector,
        h01: &CMatrix,
        h02: &CMatrix,
        s12: &CMatrix,
        g1: &CVector,
        g2: &CVector,
    ) -> Result<Self, EstimationError> {
        let inv = checked_inverse(g1)?;
        let a = (0..s12.ncols()).map(|m| inv.component_mul(&(s12.column(m) * g2[m]))).collect();
        Ok(Self {
            f: f.clone(),
            r1: single_reflection_cascade(h01, g1),
            r2: single_reflection_cascade(h02, g2),
            a,
        })
    }

    /// `R1 diag(a_m)`.
    pub fn double_reflection(&self, m: usize) -> CMatrix {
        single_reflection_cascade(&self.r1, &self.a[m])
    }

    pub fn channel(&self, phi1: &CVector, phi2: &CVector) -> CVector {
        let mut h = &self.f + &self.r1 * phi1 + &self.r2 * phi2;
        for (m, am) in self.a.iter().enumerate() {
            h += &self.r1 * am.component_mul(phi1) * phi2[m];
        }
        h
    }
}
