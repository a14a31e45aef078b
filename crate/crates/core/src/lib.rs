//! Simulation and optimization primitives for wireless networks assisted by
//! multiple passive intelligent reflecting surfaces (IRSs).
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! - [`scene`]: node geometry, blockage, half-space reflection and the
//!   per-user line-of-sight graph.
//! - [`channel`]: planar array responses, Rician link synthesis and the
//!   composition of single-, double- and multi-reflection channels.
//! - [`beamforming`]: closed-form cooperative passive beamforming, BS
//!   MRT/ZF/MMSE and alternating optimization for the double-IRS link.
//! - [`routing`]: single-user beam routing as a shortest-path problem and
//!   multi-user max-min routing under path-separation constraints.
//! - [`training`]: DFT codebooks, exhaustive and sequential beam search and
//!   the distributed beam-training-table protocol.
//! - [`estimation`]: training overhead formulas and least-squares estimators
//!   for the cascaded double-IRS SISO channel.
//!
//! Node numbering follows one convention everywhere: node `0` is the BS,
//! nodes `1..=J` are the IRSs and node `J + 1 + k` is user `k` (0-based).

#![no_std]

extern crate alloc;

pub mod beamforming;
pub mod channel;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod routing;
pub mod scene;
pub mod training;
pub mod units;

pub use nalgebra::Complex;

/// Complex baseband sample.
pub type C64 = Complex<f64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use beamforming::BeamSolution;
pub use channel::{ChannelSet, LinkChannel, PhaseConfig, RankOne};
pub use routing::{ReflectionPath, RoutingSolution};
pub use scene::{LosGraph, Scene, SceneConfig};
pub use training::{BeamTrainingTable, Codebook, GlobalBtt};
