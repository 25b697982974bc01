//! Finite-scale slow-entropy invariants of zero-entropy dynamical systems.
//!
//! The crate measures how orbit complexity grows below exponential speed:
//! separated-set counts under Bowen and Hamming metrics, separation
//! frequencies and their amorphic growth, and scale-calibrated entropies.
//! The model systems are irrational rotations, an interval-circle skew
//! product built from plateau drifts, the affine torus skew, and shifts over
//! Toeplitz-type, regular and rotation-coded binary sequences.
//!
//! Geometry is generic over the floating scalar ([`scalar::Scalar`]); the
//! aliases below fix the default double-precision instantiation.  Toeplitz
//! structure and densities are exact (big-integer rationals), and symbolic
//! orbit metrics are evaluated in integer units, so the inequalities the
//! test suites check are decided without rounding.

pub mod error;
pub mod estimation;
pub mod metrics;
pub mod scalar;
pub mod separation;
pub mod systems;
pub mod toeplitz;

pub use error::{Error, Result};
pub use scalar::{circle_distance, mod_one, Scalar};

/// Default scalar for the concrete aliases.
pub type Real = f64;

pub type PhasePoint64 = systems::PhasePoint<f64>;
pub type SystemSpec64 = systems::SystemSpec<f64>;
pub type PhasePoint32 = systems::PhasePoint<f32>;
pub type SystemSpec32 = systems::SystemSpec<f32>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{bowen, hamming, Trajectory};
    use crate::systems::{golden_mean, PhasePoint, SystemSpec};

    #[test]
    fn single_precision_lane_works() {
        let rho = golden_mean::<f32>();
        assert!((rho - 0.618_034).abs() < 1e-5);
        let sys = SystemSpec::torus_skew(rho).unwrap();
        let a = Trajectory::generate(&sys, &PhasePoint::torus(0.0_f32, 0.0).unwrap(), 128).unwrap();
        let b = Trajectory::generate(&sys, &PhasePoint::torus(0.0_f32, 0.5).unwrap(), 128).unwrap();
        let d = bowen(&a, &b).unwrap();
        assert!((d - 0.5).abs() < 1e-5);
        assert!(hamming(&a, &b).unwrap() <= d);

        let skew = SystemSpec32::default_skew_product();
        let p = PhasePoint::interval_circle(0.14_f32, 0.0).unwrap();
        let stepped = skew.step(&p).unwrap();
        match stepped {
            PhasePoint::IntervalCircle { x, .. } => {
                assert_eq!(x, 0.14_f32 + 2.0_f32.powi(-13));
            }
            _ => panic!("wrong kind"),
        }
    }
}
