//! Exact inference for the two-children family of probability puzzles.
//!
//! A parent's utterance ("I have a son born on a Tuesday") is only evidence
//! once the procedure that produced it is fixed. This crate models such
//! procedures as statement-emission kernels over an enumerable space of
//! families and conditions on the emitted statement by exact enumeration.
//!
//! The math is generic over a [`Weight`] scalar. Exact answers use
//! [`Rational`]; `f64` works too when an approximate figure is enough.
//!
//! ```
//! use ambiprob::{scenarios, Day, Rational, WorldConfig};
//!
//! let cfg = WorldConfig::new(7, 2).unwrap();
//! let scenario = scenarios::bc_tc::<Rational>(&cfg, Day::TUESDAY).unwrap();
//! let report = scenario.evaluate().unwrap();
//! assert_eq!(report.posterior, Rational::new(13.into(), 27.into()));
//! ```

pub mod dsl;
pub mod engine;
pub mod model;
pub mod montecarlo;
pub mod scenarios;

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub use engine::{
    marginal, posterior, statement_mass, validate_kernel, EngineError, Marginal, PosteriorReport,
    ProtocolKernel, Statement, Violation,
};
pub use model::{
    count_families, enumerate_families, eval_query, restrict_prior, uniform_prior, Child, Day,
    Family, ModelError, PriorDistribution, QueryPredicate, Sex, WorldConfig,
};
pub use scenarios::{Scenario, ScenarioError};

/// Scalar used for probabilities and weights.
///
/// Anything with field-like arithmetic and an ordering qualifies. The
/// exact instantiation is [`Rational`]; `f64` and `f32` give approximate
/// results through the same code paths.
pub trait Weight: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug {
    fn from_ratio(numer: u64, denom: u64) -> Self {
        Self::from_u64(numer).expect("numerator representable")
            / Self::from_u64(denom).expect("denominator representable")
    }
}

impl<T> Weight for T where T: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// Arbitrary-precision fraction, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

pub type ExactPrior = PriorDistribution<Rational>;
pub type ExactKernel = ProtocolKernel<Rational>;
pub type ExactReport = PosteriorReport<Rational>;
pub type ExactScenario = Scenario<Rational>;

pub type FloatKernel = ProtocolKernel<f64>;
pub type FloatScenario = Scenario<f64>;

/// Renders a rational as `num/den`, always with an explicit denominator.
pub fn fraction(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Shorthand for building small exact fractions.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Nearest `f64`, for display only.
pub fn approx(value: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}
