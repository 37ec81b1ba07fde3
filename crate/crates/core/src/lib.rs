//! Characteristic function of the symmetric Markov random flight in `ℝᵐ`,
//! `m >= 3`: exact series coefficients, two numerical series evaluators, the
//! closed-form Laplace transform, a Monte Carlo simulator and mixed-moment
//! series.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod coeffs;
pub mod error;
pub mod exactpoly;
pub mod moments;
pub mod simulate;
pub mod specfun;
pub mod validate;

pub use charfn::{CfEvaluation, EvalPoint, Representation, SeriesEvaluator};
pub use coeffs::{CoefficientTable, Dimension, FlightParams, SeriesKind};
pub use error::{Error, Result};
pub use exactpoly::{BivariatePoly, LambdaPoly};
pub use moments::{MomentSeries, MomentTerm};
pub use simulate::{CfEstimate, McConfig, McEstimate};
pub use specfun::Rational;
pub use validate::{CompareConfig, CompareReport};
