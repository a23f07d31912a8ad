use super::rational::{q, serde_impl, Q};
use super::{PiecewiseLinear, StepFnError};
use num::Zero;
use serde::{Deserialize, Serialize};

/// Right-constant step function: zero before the first breakpoint, `values[i]`
/// on `[b_i, b_{i+1})`, and the last value on `[b_last, ∞)`.
///
/// Always stored in canonical form: no two consecutive equal values and no
/// leading zero piece.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct StepFunction {
    bps: Vec<Q>,
    vals: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct RawStep {
    #[serde(with = "serde_impl::vec")]
    breakpoints: Vec<Q>,
    #[serde(with = "serde_impl::vec")]
    values: Vec<Q>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = StepFnError;
    fn try_from(r: RawStep) -> Result<Self, StepFnError> {
        StepFunction::new(r.breakpoints, r.values)
    }
}

impl From<StepFunction> for RawStep {
    fn from(f: StepFunction) -> Self {
        RawStep {
            breakpoints: f.bps,
            values: f.vals,
        }
    }
}

impl StepFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(breakpoints: Vec<Q>, values: Vec<Q>) -> Result<Self, StepFnError> {
        if breakpoints.len() != values.len() {
            return Err(StepFnError::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if let Some(i) = (1..breakpoints.len()).find(|&i| breakpoints[i] <= breakpoints[i - 1]) {
            return Err(StepFnError::NotIncreasing { index: i });
        }
        Ok(Self::canonical(breakpoints, values))
    }

    /// `value · 1_[a, b)`.
    pub fn indicator(a: Q, b: Q, value: Q) -> Self {
        assert!(a < b, "empty indicator interval");
        Self::canonical(vec![a, b], vec![value, q(0)])
    }

    /// Builds from `(start, value)` pieces sorted by strictly increasing start.
    pub fn from_pieces<I: IntoIterator<Item = (Q, Q)>>(pieces: I) -> Self {
        let (bps, vals): (Vec<Q>, Vec<Q>) = pieces.into_iter().unzip();
        debug_assert!(bps.windows(2).all(|w| w[0] < w[1]));
        Self::canonical(bps, vals)
    }

    fn canonical(bps: Vec<Q>, vals: Vec<Q>) -> Self {
        let mut out_b: Vec<Q> = Vec::with_capacity(bps.len());
        let mut out_v: Vec<Q> = Vec::with_capacity(vals.len());
        for (b, v) in bps.into_iter().zip(vals) {
            let same = match out_v.last() {
                Some(p) => *p == v,
                None => v.is_zero(),
            };
            if same {
                continue;
            }
            out_b.push(b);
            out_v.push(v);
        }
        Self {
            bps: out_b,
            vals: out_v,
        }
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.bps
    }

    pub fn values(&self) -> &[Q] {
        &self.vals
    }

    pub fn is_zero(&self) -> bool {
        self.bps.is_empty()
    }

    /// First breakpoint, i.e. the start of the (possibly) nonzero domain.
    pub fn left_bound(&self) -> Option<&Q> {
        self.bps.first()
    }

    /// Value after the last breakpoint.
    pub fn tail_value(&self) -> Q {
        self.vals.last().cloned().unwrap_or_else(|| q(0))
    }

    /// End of the support, when the tail is zero.
    pub fn support_end(&self) -> Option<Q> {
        match self.vals.last() {
            None => Some(q(0)),
            Some(v) if v.is_zero() => self.bps.last().cloned(),
            Some(_) => None,
        }
    }

    /// Right-continuous evaluation `f(t)`.
    pub fn eval(&self, t: &Q) -> Q {
        let i = self.bps.partition_point(|b| b <= t);
        if i == 0 {
            q(0)
        } else {
            self.vals[i - 1].clone()
        }
    }

    /// Left limit `f(t−)`.
    pub fn eval_left(&self, t: &Q) -> Q {
        let i = self.bps.partition_point(|b| b < t);
        if i == 0 {
            q(0)
        } else {
            self.vals[i - 1].clone()
        }
    }

    /// Smallest breakpoint strictly after `t`.
    pub fn next_breakpoint_after(&self, t: &Q) -> Option<&Q> {
        let i = self.bps.partition_point(|b| b <= t);
        self.bps.get(i)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.vals.iter().all(|v| v >= &q(0))
    }

    pub fn max_value(&self) -> Q {
        self.vals.iter().fold(q(0), |m, v| if *v > m { v.clone() } else { m })
    }

    pub fn min_value(&self) -> Q {
        self.vals.iter().fold(q(0), |m, v| if *v < m { v.clone() } else { m })
    }

    /// Antiderivative anchored at zero before the first breakpoint.
    pub fn integrate(&self) -> PiecewiseLinear {
        if self.bps.is_empty() {
            return PiecewiseLinear::constant(q(0));
        }
        let mut vals = Vec::with_capacity(self.bps.len());
        let mut acc = q(0);
        for i in 0..self.bps.len() {
            if i > 0 {
                acc += &self.vals[i - 1] * (&self.bps[i] - &self.bps[i - 1]);
            }
            vals.push(acc.clone());
        }
        PiecewiseLinear::from_parts(self.bps.clone(), vals, self.vals.clone())
            .expect("well-formed antiderivative")
    }

    /// `∫_a^b f`, signed (negative when `b < a`).
    pub fn integral(&self, a: &Q, b: &Q) -> Q {
        if a > b {
            return -self.integral(b, a);
        }
        let mut acc = q(0);
        let mut cur = a.clone();
        let mut val = self.eval(a);
        let start = self.bps.partition_point(|x| x <= a);
        for (i, bp) in self.bps.iter().enumerate().skip(start) {
            if bp >= b {
                break;
            }
            acc += &val * (bp - &cur);
            cur = bp.clone();
            val = self.vals[i].clone();
        }
        acc + val * (b - cur)
    }

    /// `∫ θ·f(θ) dθ` over the whole line; `None` if the tail is nonzero.
    pub fn moment(&self) -> Option<Q> {
        if !self.tail_value().is_zero() {
            return None;
        }
        let half = super::ratio(1, 2);
        let mut acc = q(0);
        for i in 0..self.bps.len().saturating_sub(1) {
            let (a, b) = (&self.bps[i], &self.bps[i + 1]);
            acc += &self.vals[i] * (b * b - a * a) * &half;
        }
        Some(acc)
    }

    /// `g(θ) = f(θ − d)`.
    pub fn shift(&self, d: &Q) -> Self {
        Self {
            bps: self.bps.iter().map(|b| b + d).collect(),
            vals: self.vals.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::canonical(self.bps.clone(), self.vals.iter().map(|v| v * c).collect())
    }

    /// Pointwise combination via the merged breakpoint set.
    pub fn combine(&self, other: &Self, op: impl Fn(&Q, &Q) -> Q) -> Self {
        let mut pts: Vec<Q> = self.bps.iter().chain(other.bps.iter()).cloned().collect();
        pts.sort();
        pts.dedup();
        let vals = pts.iter().map(|t| op(&self.eval(t), &other.eval(t))).collect();
        Self::canonical(pts, vals)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// Sum of many step functions in one sweep over their value jumps.
    pub fn sum<'a, I: IntoIterator<Item = &'a StepFunction>>(fs: I) -> Self {
        Self::signed_sum(fs.into_iter().map(|f| (f, false)))
    }

    /// `Σ ±f_i`, where the flag marks terms that are subtracted.
    pub fn signed_sum<'a, I: IntoIterator<Item = (&'a StepFunction, bool)>>(fs: I) -> Self {
        let mut jumps: Vec<(Q, Q)> = Vec::new();
        for (f, neg) in fs {
            let mut prev = q(0);
            for (b, v) in f.bps.iter().zip(&f.vals) {
                let d = v - &prev;
                jumps.push((b.clone(), if neg { -d } else { d }));
                prev = v.clone();
            }
        }
        jumps.sort_by(|a, b| a.0.cmp(&b.0));
        let mut bps: Vec<Q> = Vec::new();
        let mut vals: Vec<Q> = Vec::new();
        let mut acc = q(0);
        for (b, d) in jumps {
            acc += d;
            if bps.last() == Some(&b) {
                *vals.last_mut().expect("paired") = acc.clone();
            } else {
                bps.push(b);
                vals.push(acc.clone());
            }
        }
        Self::canonical(bps, vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::ratio;

    #[test]
    fn canonical_drops_leading_zero_and_merges() {
        let f = StepFunction::new(vec![q(0), q(1), q(2), q(3)], vec![q(0), q(2), q(2), q(0)]).unwrap();
        assert_eq!(f.breakpoints(), &[q(1), q(3)]);
        assert_eq!(f.values(), &[q(2), q(0)]);
    }

    #[test]
    fn eval_is_right_continuous() {
        let f = StepFunction::indicator(q(0), q(1), q(3));
        assert_eq!(f.eval(&q(0)), q(3));
        assert_eq!(f.eval(&q(1)), q(0));
        assert_eq!(f.eval_left(&q(1)), q(3));
        assert_eq!(f.eval(&ratio(-1, 2)), q(0));
    }

    #[test]
    fn moment_of_centered_pulse() {
        let f = StepFunction::indicator(ratio(9, 2), ratio(11, 2), q(1));
        assert_eq!(f.moment(), Some(q(5)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(StepFunction::new(vec![q(1), q(1)], vec![q(1), q(0)]).is_err());
        assert!(StepFunction::new(vec![q(1)], vec![]).is_err());
    }
}
