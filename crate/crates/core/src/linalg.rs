//! Small complex linear-algebra helpers on top of nalgebra.

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::{CMatrix, CVector, C64};

/// Relative singular-value threshold below which a direction counts as null.
pub const RANK_TOL: f64 = 1e-9;

/// `e^{jx}`.
pub fn cis(x: f64) -> C64 {
    C64::new(x.cos(), x.sin())
}

/// Phase of `z`, with 0 for an exact zero.
pub fn phase(z: C64) -> f64 {
    if z == C64::new(0.0, 0.0) {
        0.0
    } else {
        z.im.atan2(z.re)
    }
}

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Number of singular values at least `RANK_TOL` times the largest.
pub fn numerical_rank(m: &CMatrix) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&x| x >= RANK_TOL * max).count(),
        _ => 0,
    }
}

/// Moore-Penrose pseudo-inverse with the relative rank threshold, and the rank.
pub fn pinv(m: &CMatrix) -> (CMatrix, usize) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMatrix::zeros(c, r), 0);
    }
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = CMatrix::zeros(c, r);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if max > 0.0 && s >= RANK_TOL * max {
            rank += 1;
            out += v_t.row(i).adjoint() * u.column(i).adjoint() * C64::new(1.0 / s, 0.0);
        }
    }
    (out, rank)
}

/// Solves the square system `a x = b` by LU; `None` if singular.
pub fn solve(a: &CMatrix, b: &CVector) -> Option<CVector> {
    a.clone().lu().solve(b)
}

/// Least-squares solution of `a x ≈ y`. Fails with the numerical rank when
/// `a` has fewer than full column rank.
pub fn least_squares(a: &CMatrix, y: &CVector) -> Result<CVector, usize> {
    let (p, rank) = pinv(a);
    if rank < a.ncols() {
        return Err(rank);
    }
    Ok(p * y)
}

/// Kronecker product of two column vectors, `a ⊗ b`.
pub fn kron(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i * b.len() + k] = x * y;
        }
    }
    out
}

/// `n x n` DFT matrix with entries `e^{-j2π r c / n}` (no scaling).
pub fn dft_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| cis(-2.0 * PI * ((r * c) % n.max(1)) as f64 / n as f64))
}

/// `‖v‖₁` for a complex vector.
pub fn l1_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Relative error `|a - b| / max(|b|, tiny)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Serde adapter: a matrix as a list of rows of `[re, im]` pairs.
pub mod serde_cmatrix {
    use alloc::vec::Vec;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CMatrix, C64};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        (m.nrows(), m.ncols(), rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let (nrows, ncols, rows): (usize, usize, Vec<Vec<[f64; 2]>>) = Deserialize::deserialize(d)?;
        if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("matrix rows do not match the declared shape"));
        }
        Ok(CMatrix::from_fn(nrows, ncols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
    }
}

/// Serde adapter: a column vector as a list of `[re, im]` pairs.
pub mod serde_cvector {
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CVector, C64};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let v: Vec<[f64; 2]> = Deserialize::deserialize(d)?;
        Ok(CVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1]))))
    }
}

/// Serde adapter for `Vec<CVector>`.
pub mod serde_cvectors {
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::{CVector, C64};

    pub fn serialize<S: Serializer>(v: &[CVector], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Vec<[f64; 2]>> = v.iter().map(|x| x.iter().map(|z| [z.re, z.im]).collect()).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVector>, D::Error> {
        let v: Vec<Vec<[f64; 2]>> = Deserialize::deserialize(d)?;
        Ok(v.iter().map(|x| CVector::from_iterator(x.len(), x.iter().map(|p| C64::new(p[0], p[1])))).collect())
    }
}

/// Serde adapter for a complex scalar as `[re, im]`.
pub mod serde_c64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im]: [f64; 2] = Deserialize::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_rank_one() {
        let v = CVector::from_vec(alloc::vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let m = &v * v.adjoint();
        let (p, r) = pinv(&m);
        assert_eq!(r, 1);
        let back = &m * &p * &m;
        assert!((back - &m).norm() < 1e-12);
    }

    #[test]
    fn least_squares_detects_deficiency() {
        let a = CMatrix::from_element(3, 2, C64::new(1.0, 0.0));
        let y = CVector::from_element(3, C64::new(1.0, 0.0));
        assert_eq!(least_squares(&a, &y), Err(1));
    }

    #[test]
    fn dft_columns_orthogonal() {
        let f = dft_matrix(5);
        let g = f.adjoint() * &f;
        for r in 0..5 {
            for c in 0..5 {
                let want = if r == c { 5.0 } else { 0.0 };
                assert!((g[(r, c)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_of_zero_is_zero() {
        assert_eq!(phase(C64::new(0.0, 0.0)), 0.0);
        assert!((phase(C64::new(0.0, 2.0)) - PI / 2.0).abs() < 1e-15);
    }
}
