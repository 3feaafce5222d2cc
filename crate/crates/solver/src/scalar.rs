use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the solver and the models are generic over.
///
/// Tolerances scale with the machine epsilon of the type so that `f32`
/// instances stay solvable, if less accurately.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only on a non-representable value.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute primal feasibility tolerance used inside the simplex.
    fn primal_tol() -> Self;

    /// Reduced-cost tolerance.
    fn dual_tol() -> Self;

    /// Smallest pivot magnitude accepted in the ratio test.
    fn pivot_tol() -> Self;

    /// Distance to the nearest integer under which a value counts as integral.
    fn integrality_tol() -> Self;

    /// Absolute violation allowed on reported solutions.
    fn feasibility_tol() -> Self;
}

impl Scalar for f64 {
    fn primal_tol() -> Self {
        1e-9
    }
    fn dual_tol() -> Self {
        1e-9
    }
    fn pivot_tol() -> Self {
        1e-9
    }
    fn integrality_tol() -> Self {
        1e-6
    }
    fn feasibility_tol() -> Self {
        1e-7
    }
}

impl Scalar for f32 {
    fn primal_tol() -> Self {
        1e-4
    }
    fn dual_tol() -> Self {
        1e-4
    }
    fn pivot_tol() -> Self {
        1e-5
    }
    fn integrality_tol() -> Self {
        1e-3
    }
    fn feasibility_tol() -> Self {
        1e-2
    }
}
