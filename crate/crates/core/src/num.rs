//! Scalar abstraction shared by every numeric routine in the crate.

use clarabel::algebra::FloatT;

/// Floating point scalar the planner can run on (`f32` or `f64`).
///
/// Beyond the arithmetic bounds inherited from the conic solver's float
/// trait, each precision carries the comparison tolerances the algorithms
/// use, so the same code can be instantiated at either width.
pub trait Real: FloatT + Copy + std::str::FromStr {
    /// Absolute window inside which two decoding-mode rates count as tied.
    fn tie_tol() -> Self;
    /// Allowed backslide when checking that an objective trace is non-decreasing.
    fn monotone_tol() -> Self;
    /// Slack granted when comparing a GU rate against its requirement.
    fn feas_tol() -> Self;
    /// Relative shrink applied to convex constraints handed to the conic solver.
    fn solver_margin() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        // every f64 literal is representable (possibly rounded) in f32/f64
        Self::from_f64(x).unwrap()
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tie_tol() -> Self {
        1e-12
    }
    fn monotone_tol() -> Self {
        1e-9
    }
    fn feas_tol() -> Self {
        1e-9
    }
    fn solver_margin() -> Self {
        1e-6
    }
}

impl Real for f32 {
    fn tie_tol() -> Self {
        1e-6
    }
    fn monotone_tol() -> Self {
        1e-4
    }
    fn feas_tol() -> Self {
        1e-5
    }
    fn solver_margin() -> Self {
        1e-3
    }
}

/// `log2(1 + x)` evaluated through `ln_1p` so tiny SINRs keep full precision.
#[inline]
pub fn log2_1p<F: Real>(x: F) -> F {
    x.ln_1p() / F::LN_2()
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}
