//! Scalar abstraction shared by the signal-processing and learning code.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar every numeric path in this crate is generic over.
///
/// Implemented for `f32` and `f64`. The crate-root type aliases and the
/// command-line tools pin `f64`; `f32` exists for callers that trade
/// precision for footprint.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant (rounding if necessary).
    ///
    /// Panics on NaN propagation only if the source value is NaN, which the
    /// crate never feeds it.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Widens to `f64` for reporting and rendering.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_constants() {
        assert_eq!(f64::of(0.97), 0.97);
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(0.25f32.as_f64(), 0.25);
    }

    #[test]
    fn f32_conversion_rounds() {
        let x = f32::of(0.1);
        assert!((x.as_f64() - 0.1).abs() < 1e-7);
    }
}
