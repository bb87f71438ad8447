#![allow(dead_code)]

use std::path::PathBuf;

use toric_mirror_core::model::{load_model, ModelFile};

pub const FIXTURES: [&str; 5] = ["p1", "p2", "p1xp1", "f1", "f2"];

/// Euler's constant to double precision, as published.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> ModelFile {
    load_model(&fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// `2 K_0(x)` from the ascending series
/// `K_0(x) = -(log(x/2) + γ) I_0(x) + Σ_k (x²/4)^k H_k / (k!)²`.
pub fn two_k0(x: f64) -> f64 {
    let y = x * x / 4.0;
    let (mut term, mut harmonic, mut i0, mut rest) = (1.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..300 {
        if k > 0 {
            term *= y / (k * k) as f64;
            harmonic += 1.0 / k as f64;
        }
        i0 += term;
        rest += term * harmonic;
        if term < 1e-300 {
            break;
        }
    }
    2.0 * (-((x / 2.0).ln() + EULER_GAMMA) * i0 + rest)
}

/// The positive-cycle period of `P^1` at `(q, z)` by the Bessel oracle.
pub fn p1_period(q: f64, z: f64) -> f64 {
    two_k0(2.0 * q.sqrt() / z)
}
