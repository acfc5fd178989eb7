use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Scalar type the numeric core is generic over.
///
/// Everything in this crate that does arithmetic is written against this
/// trait; `f32` and `f64` are the provided instances. The CLI and the
/// built-in corpus work at `f64` (see the aliases at the crate root).
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Convert an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// View as `f64` for diagnostics and report emission.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
