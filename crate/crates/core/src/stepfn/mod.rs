//! Exact rational scalars, right-constant step functions and continuous
//! piecewise-linear functions of time.

mod pwl;
mod rational;
mod step;

pub use pwl::PiecewiseLinear;
pub use rational::{
    decimal_string, format_q, parse_q, q, qf, ratio, rational_gcd, to_f64, ParseRationalError, Q,
};
pub use step::StepFunction;

/// Serde adapters that encode rationals as `"p/q"` strings.
pub mod serde_q {
    pub use super::rational::serde_impl::{opt, vec};
    pub use super::rational::serde_impl::{deserialize, serialize};
}

use thiserror::Error;

/// Structural errors when building piecewise functions from raw data.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepFnError {
    #[error("breakpoints and values differ in length ({breakpoints} vs {values})")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("breakpoints not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("piecewise-linear function discontinuous at breakpoint {index}")]
    Discontinuous { index: usize },
    #[error("piecewise-linear function needs at least one breakpoint")]
    Empty,
}

/// `∫_a^b g(θ)·f(θ) dθ` for a continuous piecewise-linear `g` and a step function `f`.
pub fn integral_of_product(g: &PiecewiseLinear, f: &StepFunction, a: &Q, b: &Q) -> Q {
    if a >= b {
        return Q::from_integer(0.into());
    }
    let mut cuts: Vec<Q> = vec![a.clone(), b.clone()];
    cuts.extend(g.breakpoints().iter().filter(|t| *t > a && *t < b).cloned());
    cuts.extend(f.breakpoints().iter().filter(|t| *t > a && *t < b).cloned());
    cuts.sort();
    cuts.dedup();
    let half = ratio(1, 2);
    let mut acc = q(0);
    for w in cuts.windows(2) {
        let (l, r) = (&w[0], &w[1]);
        let c = f.eval(l);
        if c == q(0) {
            continue;
        }
        let mean = (g.eval(l) + g.eval(r)) * &half;
        acc += c * mean * (r - l);
    }
    acc
}
