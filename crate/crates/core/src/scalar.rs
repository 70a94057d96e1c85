use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar for game data: chance probabilities, payoffs, matrix
/// entries and realization weights. Implemented for `f32`, `f64` and exact
/// rationals.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer conversion") / Self::from_i64(den).expect("integer conversion")
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating-point scalar for the optimization side (logs, projections).
pub trait Real: Scalar + Float + Copy {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("float conversion")
    }
}

impl<T> Real for T where T: Scalar + Float + Copy {}

/// `num / den` in any scalar type.
pub fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

/// Converts between scalar types through `f64`.
pub(crate) fn convert<S: Scalar, T: Real>(s: &S) -> T {
    T::lit(s.as_f64())
}
