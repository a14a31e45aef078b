#![allow(dead_code)]

use irs_core::geometry::Vec3;
use irs_core::scene::{BsConfig, IrsConfig, Propagation, Scene, SceneConfig};
use irs_core::{CMatrix, CVector, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn unit(v: Vec3) -> Vec3 {
    v * (1.0 / v.norm())
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| cgauss(rng))
}

pub fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| cgauss(rng))
}

pub fn rand_phases(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
}

/// BS at the origin, IRSs along a zig-zag moving away from it, each facing
/// the bisector of its neighbours, then one user.
pub fn chain(rng: &mut ChaCha8Rng, n: usize, n_b: usize, elements: [usize; 2], kappa_db: Option<f64>) -> Scene {
    let bs = Vec3::new(0.0, 0.0, 0.0);
    let mut pts = Vec::new();
    for i in 0..=n {
        let x = 6.0 * (i + 1) as f64 + rng.gen_range(-1.0..1.0);
        let y = if i % 2 == 0 { 3.0 } else { -3.0 } + rng.gen_range(-1.0..1.0);
        pts.push(Vec3::new(x, y, rng.gen_range(-0.5..0.5)));
    }
    let mut irs = Vec::new();
    for i in 0..n {
        let prev = if i == 0 { bs } else { pts[i - 1] };
        let normal = unit(unit(prev - pts[i]) + unit(pts[i + 1] - pts[i]));
        irs.push(IrsConfig { position: Some(pts[i]), pointing_normal: Some(normal), elements: Some(elements), ..Default::default() });
    }
    let cfg = SceneConfig {
        bs: Some(BsConfig { position: Some(bs), antennas: Some(n_b), boresight: Some(unit(pts[0] - bs)), ..Default::default() }),
        irs,
        users: vec![pts[n]],
        constants: Propagation { kappa_db, ..Default::default() },
        ..Default::default()
    };
    Scene::from_config(&cfg).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
