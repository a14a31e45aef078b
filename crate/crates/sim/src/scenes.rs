//! Scene files: loading, validation and the parameter overrides the
//! experiments sweep over.

use std::path::Path;

use irs_core::scene::{Scene, SceneConfig};

use crate::SimError;

/// Double-IRS layout: IRS 1 next to a single-antenna BS, IRS 2 next to the user.
pub const FIG4: &str = include_str!("../scenarios/fig4.json");
/// The same layout with a 40-antenna BS, five users and a blocked BS-IRS 2 link.
pub const FIG7: &str = include_str!("../scenarios/fig7.json");
/// Indoor network with eight IRSs and two users whose direct links are blocked.
pub const FIG9: &str = include_str!("../scenarios/fig9.json");

pub fn parse(text: &str) -> Result<SceneConfig, SimError> {
    Ok(serde_json::from_str(text)?)
}

pub fn load(path: &Path) -> Result<SceneConfig, SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SimError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// Reads `path` if given, else parses the built-in default.
pub fn load_or(path: Option<&Path>, default: &str) -> Result<SceneConfig, SimError> {
    match path {
        Some(p) => load(p),
        None => parse(default),
    }
}

pub fn build(config: &SceneConfig) -> Result<Scene, SimError> {
    Ok(Scene::from_config(config)?)
}

/// Every IRS resized to `m0 x m0`.
pub fn with_m0(config: &SceneConfig, m0: usize) -> SceneConfig {
    with_elements(config, [m0, m0])
}

/// Every IRS resized to `[horizontal, vertical]` elements.
pub fn with_elements(config: &SceneConfig, elements: [usize; 2]) -> SceneConfig {
    let mut c = config.clone();
    for irs in &mut c.irs {
        irs.elements = Some(elements);
        irs.m0 = None;
    }
    c
}

pub fn with_kappa(config: &SceneConfig, kappa_db: Option<f64>) -> SceneConfig {
    let mut c = config.clone();
    c.constants.kappa_db = kappa_db;
    c
}

pub fn with_bs_antennas(config: &SceneConfig, n_b: usize) -> SceneConfig {
    let mut c = config.clone();
    if let Some(bs) = c.bs.as_mut() {
        bs.antennas = Some(n_b);
        bs.layout = None;
    }
    c
}
