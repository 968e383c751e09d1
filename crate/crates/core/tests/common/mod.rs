#![allow(dead_code)]

use ks_core::state::{PathSpinState, SpinVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-like random normalized state on the given modes (complex Gaussian
/// coordinates, then normalized).
pub fn random_state<R: Rng>(rng: &mut R, modes: &[&str]) -> PathSpinState<f64> {
    let mut g = || {
        Complex::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    };
    let branches: Vec<(&str, SpinVector<f64>)> = modes.iter().map(|m| (*m, SpinVector::new(g(), g()))).collect();
    PathSpinState::new(branches).expect("gaussian vectors are nonzero")
}
