//! Scalar abstractions.
//!
//! The quantum engine is written against [`Real`], implemented for `f32` and
//! `f64`. Closed-form utility algebra only needs field operations and an
//! ordering, so it is written against [`UtilityScalar`], which exact rational
//! types such as `num_rational::Ratio<i64>` also satisfy.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Floating point type backing density matrices and probabilities.
pub trait Real:
    'static + Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + Send + Sync
{
    /// Allowed deviation of a trace from one, and of eigenvalues below zero.
    fn trace_tol() -> Self;
    /// Allowed entrywise deviation from Hermiticity.
    fn hermitian_tol() -> Self;
    /// Probability below which a measurement outcome is treated as impossible.
    fn null_probability() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f64 {
    fn trace_tol() -> Self {
        1e-10
    }
    fn hermitian_tol() -> Self {
        1e-12
    }
    fn null_probability() -> Self {
        1e-14
    }
}

impl Real for f32 {
    fn trace_tol() -> Self {
        1e-5
    }
    fn hermitian_tol() -> Self {
        1e-6
    }
    fn null_probability() -> Self {
        1e-7
    }
}

/// Number type for payoff arithmetic.
pub trait UtilityScalar: Num + Copy + PartialOrd + FromPrimitive + Debug {
    #[inline]
    fn lit(x: i64) -> Self {
        Self::from_i64(x).expect("small integer representable")
    }
}

impl<T> UtilityScalar for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug {}
