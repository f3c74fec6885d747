//! Exact scalars and truncated Laurent series.

pub mod coeff;
pub mod monomial;
pub mod rational;
pub mod series;
pub mod special;

pub use coeff::{Coeff, TPoly};
pub use monomial::FracMonomial;
pub use rational::{frac, q, Rational};
pub use series::{SeriesElement, SeriesRing, INF};
pub use special::{
    exp_linear, inv_varsigma, pochhammer, pochhammer_recip, s_fn, s_power, varsigma,
};

/// Product of two series over the same variables.
pub fn series_mul<C: Coeff>(a: &SeriesElement<C>, b: &SeriesElement<C>) -> crate::Result<SeriesElement<C>> {
    a.try_mul(b)
}
