//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar backing amplitudes and probabilities: `f32` or `f64`.
///
/// The tolerances are per precision. The `f64` values are the ones the
/// acceptance suite is pinned to; `f32` gets looser ones scaled to its epsilon.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance for algebraic identities (hermiticity, eigenrelations, unitarity).
    const ALGEBRA_TOL: Self;
    /// Tolerance for end-to-end propagated quantities (norms, probabilities).
    const PROPAGATION_TOL: Self;
    /// Branches whose squared norm falls below this are treated as absent.
    const PRUNE_TOL: Self;
    /// Probabilities below this are exact zeros for sampling and support tests.
    const SUPPORT_TOL: Self;

    /// Converts an `f64` literal. Never fails for finite input.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const ALGEBRA_TOL: Self = 1e-12;
    const PROPAGATION_TOL: Self = 1e-9;
    const PRUNE_TOL: Self = 1e-12;
    const SUPPORT_TOL: Self = 1e-12;
}

impl Real for f32 {
    const ALGEBRA_TOL: Self = 1e-5;
    const PROPAGATION_TOL: Self = 1e-4;
    const PRUNE_TOL: Self = 1e-12;
    const SUPPORT_TOL: Self = 1e-6;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(f64::lit(0.5), 0.5);
        assert_eq!(f32::lit(0.25), 0.25f32);
        assert_eq!(f32::lit(0.5).to_f64_lossy(), 0.5);
    }

    #[test]
    fn f32_tolerances_are_looser() {
        assert!(f64::from(f32::ALGEBRA_TOL) > f64::ALGEBRA_TOL);
        assert!(f64::from(f32::SUPPORT_TOL) > f64::SUPPORT_TOL);
    }
}
