mod common;

use std::f64::consts::PI;

use common::*;
use irs_core::beamforming::*;
use irs_core::channel::{synth_link, ChannelSet, RankOne};
use irs_core::linalg::numerical_rank;
use irs_core::routing::path_los_hops;
use irs_core::{CMatrix, CVector, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `max |c^T φ|` over `φ_m` on a `q`-point phase grid, by enumeration.
fn grid_best(c: &CVector, q: usize) -> f64 {
    let n = c.len();
    let mut idx = vec![0usize; n];
    let mut best: f64 = 0.0;
    loop {
        let s: C64 = (0..n).map(|m| c[m] * C64::from_polar(1.0, 2.0 * PI * idx[m] as f64 / q as f64)).sum();
        best = best.max(s.norm());
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < q {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn double_reflection_closed_form_against_phase_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = 16;
    let floor = (PI / q as f64).cos().powi(4);
    for _ in 0..20 {
        let (v1, v2) = (rand_vec(&mut rng, 4), rand_vec(&mut rng, 4));
        let rho = cgauss(&mut rng);
        let closed = double_reflection_gain(rho, &v1, &v2);
        let grid = rho.norm_sqr() * (grid_best(&v1, q) * grid_best(&v2, q)).powi(2);
        assert!(grid <= closed * (1.0 + 1e-12));
        assert!(grid >= closed * floor);
        let (p1, p2) = optimal_double_reflection_phases(&v1, &v2);
        let h = rho * v1.dot(&p1) * v2.dot(&p2);
        assert!(rel(h.norm_sqr(), closed) < 1e-12);
    }
}

fn chain_hops(rng: &mut ChaCha8Rng, n: usize, n_b: usize, el: [usize; 2]) -> (Vec<RankOne>, CMatrix) {
    let scene = chain(rng, n, n_b, el, None);
    let mut ch = ChannelSet::empty(0);
    for i in 0..=n {
        ch.insert(synth_link(&scene, i, i + 1, 0).unwrap());
    }
    let path: Vec<usize> = (1..=n).collect();
    let hops = path_los_hops(&ch, &path, scene.user_node(0)).unwrap();
    let q = ch.link(0, 1).unwrap().matrix.clone();
    (hops, q)
}

/// `h = L_0 Φ_1 L_1 ... Φ_n L_n` as a BS-side vector.
fn compose(hops: &[RankOne], phases: &[CVector]) -> CVector {
    let mut x = hops.last().unwrap().matrix().column(0).into_owned();
    for (i, h) in hops.iter().enumerate().rev().skip(1) {
        x = h.matrix() * x.component_mul(&phases[i]);
    }
    x
}

#[test]
fn multi_hop_n2_agrees_with_factored_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let (hops, _) = chain_hops(&mut rng, 2, 4, [3, 2]);
        let p = multi_hop_phases(&hops).unwrap();
        // v1 = conj(r_Q) ⊙ l_S, v2 = conj(r_S) ⊙ l_g
        let v1 = hops[0].right.conjugate().component_mul(&hops[1].left);
        let v2 = hops[1].right.conjugate().component_mul(&hops[2].left);
        let (o1, o2) = optimal_double_reflection_phases(&v1, &v2);
        for (a, b) in [(&p[0], &o1), (&p[1], &o2)] {
            let r = a[0] / b[0];
            assert!(a.iter().zip(b.iter()).all(|(x, y)| (x / y - r).norm() < 1e-12));
        }
    }
}

#[test]
fn multi_hop_n3_against_phase_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = 8;
    let floor = (PI / q as f64).cos().powi(6);
    for _ in 0..5 {
        let (hops, _) = chain_hops(&mut rng, 3, 2, [2, 1]);
        let p = multi_hop_phases(&hops).unwrap();
        let h = compose(&hops, &p);
        let w = bs_mrt(&hops[0].left).unwrap();
        let got = w.dotc(&h).norm_sqr();
        // per-IRS factor c_i^T θ_i with c_i = conj(r_in) ⊙ l_out
        let mut grid = w.dotc(&hops[0].left).norm_sqr() * hops.iter().map(|h| h.gain.norm_sqr()).product::<f64>();
        for i in 0..3 {
            grid *= grid_best(&hops[i].right.conjugate().component_mul(&hops[i + 1].left), q).powi(2);
        }
        assert!(grid <= got * (1.0 + 1e-12), "{grid} > {got}");
        assert!(grid >= got * floor);
    }
}

#[test]
fn direct_link_combining() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let (f, hp) = (rand_vec(&mut rng, 5), rand_vec(&mut rng, 5));
        let (psi, w, gain) = combine_with_direct(&f, &hp);
        let best = (0..3600)
            .map(|i| (&f + &hp * C64::from_polar(1.0, i as f64 * PI / 1800.0)).norm_squared())
            .fold(0.0, f64::max);
        assert!(gain >= best * (1.0 - 1e-12));
        assert!(rel(gain, (&f + &hp * C64::from_polar(1.0, psi)).norm_squared()) < 1e-12);
        assert!(rel(w.norm(), 1.0) < 1e-12);

        let (a_s, a_d) = (cgauss(&mut rng), cgauss(&mut rng));
        let t = common_phase_combine(a_s, a_d);
        let v = C64::from_polar(1.0, t) * a_s + C64::from_polar(1.0, 2.0 * t) * a_d;
        assert!((v.norm() - (a_s.norm() + a_d.norm())).abs() < 1e-12);
    }
}

fn random_links(rng: &mut ChaCha8Rng, n_b: usize, m: usize, k: usize) -> DoubleIrsLinks {
    DoubleIrsLinks {
        f: Some(rand_mat(rng, n_b, k) * C64::new(0.1, 0.0)),
        q1: rand_mat(rng, n_b, m),
        q2: Some(rand_mat(rng, n_b, m)),
        s12: rand_mat(rng, m, m),
        g1: Some(rand_mat(rng, m, k)),
        g2: rand_mat(rng, m, k),
    }
}

#[test]
fn ao_is_monotone_and_beats_random_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let links = random_links(&mut rng, 2, 2, 1);
        let r = ao_joint_beamforming(&links, None, 1e-12, 500);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(r.phi1.iter().chain(r.phi2.iter()).all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let sampled = (0..10_000)
            .map(|_| links.effective(&rand_phases(&mut rng, 2), &rand_phases(&mut rng, 2)).norm_squared())
            .fold(0.0, f64::max);
        assert!(r.gain >= sampled * (1.0 - 1e-9), "{} < {}", r.gain, sampled);
        assert!(rel(r.gain, links.effective(&r.phi1, &r.phi2).norm_squared()) < 1e-12);
    }
}

#[test]
fn ao_reaches_closed_form_under_pure_los() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let (hops, _) = chain_hops(&mut rng, 2, 4, [4, 3]);
        let links = DoubleIrsLinks {
            f: None,
            q1: hops[0].matrix(),
            q2: None,
            s12: hops[1].matrix(),
            g1: None,
            g2: hops[2].matrix(),
        };
        let r = ao_joint_beamforming(&links, None, 1e-14, 1000);
        let v1 = hops[0].right.conjugate().component_mul(&hops[1].left);
        let v2 = hops[1].right.conjugate().component_mul(&hops[2].left);
        let rho = hops[0].gain * hops[1].gain * hops[2].gain;
        let closed = double_reflection_gain(rho, &v1, &v2) * hops[0].left.norm_squared();
        assert!(rel(r.gain, closed) < 1e-6, "{} vs {closed}", r.gain);
    }
}

#[test]
fn frobenius_ascent_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (a, b, c) = (rand_mat(&mut rng, 4, 3), rand_mat(&mut rng, 4, 6), rand_mat(&mut rng, 6, 3));
        let mut phi = rand_phases(&mut rng, 6);
        let mut prev = (&a + &b * diag_mul(&phi, &c)).norm_squared();
        for _ in 0..4 {
            ascend_frobenius(&a, &b, &c, &mut phi, 1);
            let now = (&a + &b * diag_mul(&phi, &c)).norm_squared();
            assert!(now >= prev * (1.0 - 1e-12));
            prev = now;
        }
        assert!(phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }
}

#[test]
fn scaling_channels_keeps_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let links = random_links(&mut rng, 3, 3, 1);
    let c = 1e-4;
    // every term of H scaled by c
    let uniform = DoubleIrsLinks {
        f: links.f.as_ref().map(|m| m * C64::new(c, 0.0)),
        q1: &links.q1 * C64::new(c, 0.0),
        q2: links.q2.as_ref().map(|m| m * C64::new(c, 0.0)),
        s12: links.s12.clone(),
        g1: links.g1.clone(),
        g2: links.g2.clone(),
    };
    let (a, b) = (ao_joint_beamforming(&links, None, 1e-12, 200), ao_joint_beamforming(&uniform, None, 1e-12, 200));
    assert!(rel(b.gain, a.gain * c * c) < 1e-9);
    let same_up_to_phase = |x: &CVector, y: &CVector| {
        let r = x[0] / y[0];
        x.iter().zip(y.iter()).all(|(p, q)| (p / q - r).norm() < 1e-9)
    };
    assert!(same_up_to_phase(&a.phi1, &b.phi1) && same_up_to_phase(&a.phi2, &b.phi2));

    let h = rand_mat(&mut rng, 6, 3);
    let hs = &h * C64::new(c, 0.0);
    for kind in [Receiver::Zf, Receiver::Mrt] {
        let (x, y) = (linear_receivers(&h, kind, 1.0, 0.1), linear_receivers(&hs, kind, 1.0, 0.1));
        for (u, v) in x.beams.iter().zip(&y.beams) {
            assert!((u.dotc(v).norm() / (u.norm() * v.norm()) - 1.0).abs() < 1e-9);
        }
    }
    let (x, y) = (linear_receivers(&h, Receiver::Mmse, 1.0, 0.1), linear_receivers(&hs, Receiver::Mmse, 1.0, 0.1 * c * c));
    for (u, v) in x.beams.iter().zip(&y.beams) {
        assert!((u.dotc(v).norm() / (u.norm() * v.norm()) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn rank_deficient_baseline_versus_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // rank-one BS-IRS link makes Q Φ G rank one whatever G is
    let (a, b) = (rand_vec(&mut rng, 6), rand_vec(&mut rng, 8));
    let q = &a * b.adjoint();
    let g = rand_mat(&mut rng, 8, 4);
    let h_single = &q * diag_mul(&rand_phases(&mut rng, 8), &g);
    assert_eq!(numerical_rank(&h_single), 1);
    let q02 = rand_mat(&mut rng, 6, 8);
    // rank-two G2 keeps rank_single + min(ranks) within K
    let g2 = rand_mat(&mut rng, 8, 2) * rand_mat(&mut rng, 2, 4);
    let h_double = &h_single + &q02 * diag_mul(&rand_phases(&mut rng, 8), &g2);
    let r = channel_rank_gain_check(&g2, &q02, &h_single, &h_double);
    assert_eq!((r.rank_single, r.rank_g2, r.rank_double), (1, 2, 3));
    assert!(r.bound_holds);
    let zf = linear_receivers(&h_single, Receiver::Zf, 1.0, 1e-3);
    assert!(zf.rank_deficient);
    let full = &h_double + rand_mat(&mut rng, 6, 8) * diag_mul(&rand_phases(&mut rng, 8), &rand_mat(&mut rng, 8, 4));
    assert!(!linear_receivers(&full, Receiver::Zf, 1.0, 1e-3).rank_deficient);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mmse_sinr_dominates_zf_and_mrt(seed in any::<u64>(), p_db in -20.0..30.0f64, rank_one in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = if rank_one {
            let (a, b) = (rand_vec(&mut rng, 5), rand_vec(&mut rng, 3));
            &a * b.adjoint() + rand_mat(&mut rng, 5, 3) * C64::new(1e-3, 0.0)
        } else {
            rand_mat(&mut rng, 5, 3)
        };
        let p = 10f64.powf(p_db / 10.0);
        let noise = rng.gen_range(0.01..1.0);
        let mmse = linear_receivers(&h, Receiver::Mmse, p, noise);
        for kind in [Receiver::Zf, Receiver::Mrt] {
            let other = linear_receivers(&h, kind, p, noise);
            for (a, b) in mmse.sinrs.iter().zip(&other.sinrs) {
                prop_assert!(*a >= b * (1.0 - 1e-9), "{:?}: {} < {}", kind, a, b);
            }
        }
    }

    #[test]
    fn zf_nulls_interference_at_full_rank(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rand_mat(&mut rng, 6, 4);
        let out = linear_receivers(&h, Receiver::Zf, 1.0, 1.0);
        for (k, w) in out.beams.iter().enumerate() {
            for j in 0..4 {
                let v = w.dotc(&h.column(j).into_owned()).norm();
                if j == k { prop_assert!((v - 1.0).abs() < 1e-9) } else { prop_assert!(v < 1e-9) }
            }
        }
    }

    #[test]
    fn conj_phase_is_unit_and_aligns(seed in any::<u64>(), n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = rand_vec(&mut rng, n);
        let p = conj_phase(&v);
        prop_assert!(p.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        prop_assert!((v.dot(&p).re - v.iter().map(|z| z.norm()).sum::<f64>()).abs() < 1e-12);
    }
}
