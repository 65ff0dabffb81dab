//! Scalar abstraction shared by every module.

use nalgebra::{Complex, RealField};
use num_traits::{FloatConst, ToPrimitive};

/// Real scalar the model is generic over: `f32` or `f64`.
///
/// Tolerances in this crate are written as `f64` literals and converted through
/// [`Real::tolerance`], which floors them at a precision the type can actually
/// resolve.
pub trait Real: RealField + Copy + FloatConst + ToPrimitive + Send + Sync + 'static {
    /// Smallest tolerance worth comparing against for this precision.
    const TOLERANCE_FLOOR: f64;

    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn tolerance(t: f64) -> Self {
        Self::lit(t.max(Self::TOLERANCE_FLOOR))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const TOLERANCE_FLOOR: f64 = 1e-5;
}

impl Real for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;
}

pub type C<T> = Complex<T>;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    if theta > -pi && theta <= pi {
        return theta;
    }
    let mut r = theta % two_pi;
    if r > pi {
        r -= two_pi;
    } else if r <= -pi {
        r += two_pi;
    }
    r
}
