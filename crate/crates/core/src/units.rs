//! Decibel conversions.

#[allow(unused_imports)] // f64 math under no_std; inherent once std is linked
use num_traits::Float;

pub fn db_to_linear(db: f64) -> f64 {
    Float::powf(10.0, db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Shannon rate in bps/Hz for a linear SNR/SINR.
pub fn rate_bps_hz(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}
