//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Open01, Poisson, StandardNormal};

/// Floating point scalar: `f32` or `f64`.
///
/// Besides arithmetic, the trait exposes the handful of random variates the
/// samplers need, so sampling code stays generic without dragging
/// `rand_distr` trait bounds through every signature.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    type BetaDist: Distribution<Self> + Clone + Debug + Send + Sync;

    /// Lossy conversion of an `f64` constant.
    fn c(x: f64) -> Self;

    fn of(n: usize) -> Self {
        Self::c(n as f64)
    }

    fn as_f64(self) -> f64;

    /// `None` when either shape parameter is not strictly positive.
    fn beta_distribution(a: Self, b: Self) -> Option<Self::BetaDist>;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Self;

    fn poisson<R: Rng + ?Sized>(lambda: Self, rng: &mut R) -> u64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            type BetaDist = Beta<$t>;

            #[inline]
            fn c(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            fn beta_distribution(a: Self, b: Self) -> Option<Self::BetaDist> {
                Beta::new(a, b).ok()
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Open01.sample(rng)
            }

            fn gamma<R: Rng + ?Sized>(shape: Self, scale: Self, rng: &mut R) -> Self {
                Gamma::new(shape, scale)
                    .expect("gamma parameters validated by caller")
                    .sample(rng)
            }

            fn poisson<R: Rng + ?Sized>(lambda: Self, rng: &mut R) -> u64 {
                if lambda <= 0.0 {
                    return 0;
                }
                let draw: $t = Poisson::new(lambda)
                    .expect("poisson rate validated by caller")
                    .sample(rng);
                draw as u64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
