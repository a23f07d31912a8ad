use super::rational::{q, serde_impl, Q};
use super::{StepFnError, StepFunction};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Continuous piecewise-linear function. Constant (`values[0]`) before the
/// first breakpoint, `values[i] + slopes[i]·(θ − b_i)` on `[b_i, b_{i+1})`,
/// and the last piece extends to `+∞` with the last slope.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPwl", into = "RawPwl")]
pub struct PiecewiseLinear {
    bps: Vec<Q>,
    vals: Vec<Q>,
    slopes: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct RawPwl {
    #[serde(with = "serde_impl::vec")]
    breakpoints: Vec<Q>,
    #[serde(with = "serde_impl::vec")]
    values: Vec<Q>,
    #[serde(with = "serde_impl::vec")]
    slopes: Vec<Q>,
}

impl TryFrom<RawPwl> for PiecewiseLinear {
    type Error = StepFnError;
    fn try_from(r: RawPwl) -> Result<Self, StepFnError> {
        PiecewiseLinear::from_parts(r.breakpoints, r.values, r.slopes)
    }
}

impl From<PiecewiseLinear> for RawPwl {
    fn from(f: PiecewiseLinear) -> Self {
        RawPwl {
            breakpoints: f.bps,
            values: f.vals,
            slopes: f.slopes,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Combine {
    Add,
    Sub,
    Min,
    Max,
}

impl PiecewiseLinear {
    pub fn constant(c: Q) -> Self {
        Self {
            bps: vec![q(0)],
            vals: vec![c],
            slopes: vec![q(0)],
        }
    }

    /// Builds from breakpoints, values at the breakpoints and one slope per piece.
    /// Continuity is enforced: each value must match the previous piece's endpoint.
    pub fn from_parts(bps: Vec<Q>, vals: Vec<Q>, slopes: Vec<Q>) -> Result<Self, StepFnError> {
        if bps.is_empty() {
            return Err(StepFnError::Empty);
        }
        if bps.len() != vals.len() || bps.len() != slopes.len() {
            return Err(StepFnError::LengthMismatch {
                breakpoints: bps.len(),
                values: vals.len().min(slopes.len()),
            });
        }
        if let Some(i) = (1..bps.len()).find(|&i| bps[i] <= bps[i - 1]) {
            return Err(StepFnError::NotIncreasing { index: i });
        }
        for i in 1..bps.len() {
            let expect = &vals[i - 1] + &slopes[i - 1] * (&bps[i] - &bps[i - 1]);
            if expect != vals[i] {
                return Err(StepFnError::Discontinuous { index: i });
            }
        }
        Ok(Self::canonical(bps, vals, slopes))
    }

    /// Interpolates `(t_i, y_i)` points (strictly increasing `t`), constant before
    /// the first point, with `tail_slope` after the last.
    pub fn from_points(points: &[(Q, Q)], tail_slope: Q) -> Self {
        assert!(!points.is_empty());
        let n = points.len();
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n - 1 {
            let (t0, y0) = &points[i];
            let (t1, y1) = &points[i + 1];
            assert!(t0 < t1, "points must be strictly increasing");
            slopes.push((y1 - y0) / (t1 - t0));
        }
        slopes.push(tail_slope);
        let (bps, vals) = points.iter().cloned().unzip();
        Self::canonical(bps, vals, slopes)
    }

    fn canonical(bps: Vec<Q>, vals: Vec<Q>, slopes: Vec<Q>) -> Self {
        let mut b: Vec<Q> = Vec::with_capacity(bps.len());
        let mut v: Vec<Q> = Vec::with_capacity(bps.len());
        let mut s: Vec<Q> = Vec::with_capacity(bps.len());
        for ((bi, vi), si) in bps.into_iter().zip(vals).zip(slopes) {
            let redundant = match s.last() {
                Some(prev) => *prev == si,
                None => false,
            };
            if redundant {
                continue;
            }
            // A flat first piece merges with the constant prefix.
            if s.len() == 1 && s[0].is_zero() {
                b.clear();
                v.clear();
                s.clear();
            }
            b.push(bi);
            v.push(vi);
            s.push(si);
        }
        if b.len() == 1 && s[0].is_zero() {
            b[0] = q(0);
        }
        Self {
            bps: b,
            vals: v,
            slopes: s,
        }
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.bps
    }

    pub fn values(&self) -> &[Q] {
        &self.vals
    }

    pub fn slopes(&self) -> &[Q] {
        &self.slopes
    }

    fn piece(&self, t: &Q) -> Option<usize> {
        let i = self.bps.partition_point(|b| b <= t);
        if i == 0 {
            None
        } else {
            Some(i - 1)
        }
    }

    pub fn eval(&self, t: &Q) -> Q {
        match self.piece(t) {
            None => self.vals[0].clone(),
            Some(i) => &self.vals[i] + &self.slopes[i] * (t - &self.bps[i]),
        }
    }

    /// Right derivative at `t`.
    pub fn slope_right(&self, t: &Q) -> Q {
        match self.piece(t) {
            None => q(0),
            Some(i) => self.slopes[i].clone(),
        }
    }

    /// Smallest breakpoint strictly after `t`.
    pub fn next_breakpoint_after(&self, t: &Q) -> Option<&Q> {
        let i = self.bps.partition_point(|b| b <= t);
        self.bps.get(i)
    }

    /// Right derivative as a step function.
    pub fn derivative(&self) -> StepFunction {
        StepFunction::from_pieces(self.bps.iter().cloned().zip(self.slopes.iter().cloned()))
    }

    /// `g(θ) = f(θ − d)`.
    pub fn shift(&self, d: &Q) -> Self {
        Self::canonical(
            self.bps.iter().map(|b| b + d).collect(),
            self.vals.clone(),
            self.slopes.clone(),
        )
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::canonical(
            self.bps.clone(),
            self.vals.iter().map(|v| v * c).collect(),
            self.slopes.iter().map(|s| s * c).collect(),
        )
    }

    pub fn add_constant(&self, c: &Q) -> Self {
        Self {
            bps: self.bps.clone(),
            vals: self.vals.iter().map(|v| v + c).collect(),
            slopes: self.slopes.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, Combine::Add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, Combine::Sub)
    }

    pub fn min(&self, other: &Self) -> Self {
        self.combine(other, Combine::Min)
    }

    pub fn max(&self, other: &Self) -> Self {
        self.combine(other, Combine::Max)
    }

    /// Exact pointwise combination. For `Min`/`Max` every crossing point of the
    /// operands becomes a breakpoint.
    pub fn combine(&self, other: &Self, kind: Combine) -> Self {
        let mut pts: Vec<Q> = self.bps.iter().chain(other.bps.iter()).cloned().collect();
        pts.sort();
        pts.dedup();
        if matches!(kind, Combine::Min | Combine::Max) {
            let mut crossings = Vec::new();
            for (i, p) in pts.iter().enumerate() {
                let d = self.eval(p) - other.eval(p);
                let ds = self.slope_right(p) - other.slope_right(p);
                if d.is_zero() || ds.is_zero() || d.is_positive() == ds.is_positive() {
                    continue;
                }
                let root = p - &d / &ds;
                if pts.get(i + 1).is_none_or(|next| root < *next) {
                    crossings.push(root);
                }
            }
            pts.extend(crossings);
            pts.sort();
            pts.dedup();
        }
        let mut vals = Vec::with_capacity(pts.len());
        let mut slopes = Vec::with_capacity(pts.len());
        for p in &pts {
            let (a, b) = (self.eval(p), other.eval(p));
            let (sa, sb) = (self.slope_right(p), other.slope_right(p));
            let (v, s) = match kind {
                Combine::Add => (a + b, sa + sb),
                Combine::Sub => (a - b, sa - sb),
                Combine::Min | Combine::Max => {
                    let want_less = kind == Combine::Min;
                    let pick_a = match a.cmp(&b) {
                        Ordering::Less => want_less,
                        Ordering::Greater => !want_less,
                        Ordering::Equal => (sa <= sb) == want_less,
                    };
                    if pick_a {
                        (a, sa)
                    } else {
                        (b, sb)
                    }
                }
            };
            vals.push(v);
            slopes.push(s);
        }
        Self::canonical(pts, vals, slopes)
    }

    /// `∫_a^b f` for `a ≤ b`.
    pub fn integral(&self, a: &Q, b: &Q) -> Q {
        if a >= b {
            return q(0);
        }
        let mut cuts = vec![a.clone()];
        cuts.extend(self.bps.iter().filter(|t| *t > a && *t < b).cloned());
        cuts.push(b.clone());
        let half = super::ratio(1, 2);
        cuts.windows(2)
            .map(|w| (self.eval(&w[0]) + self.eval(&w[1])) * (&w[1] - &w[0]) * &half)
            .fold(q(0), |acc, x| acc + x)
    }

    /// Smallest `θ ≥ t0` (and `≤ until`, if given) with `f(θ) = 0`.
    pub fn first_root_at_or_after(&self, t0: &Q, until: Option<&Q>) -> Option<Q> {
        let within = |t: &Q| until.is_none_or(|u| t <= u);
        let mut cur = t0.clone();
        loop {
            if !within(&cur) {
                return None;
            }
            let v = self.eval(&cur);
            if v.is_zero() {
                return Some(cur);
            }
            let s = self.slope_right(&cur);
            let next = self.next_breakpoint_after(&cur).cloned();
            if !s.is_zero() && v.is_positive() != s.is_positive() {
                let root = &cur - &v / &s;
                if next.as_ref().is_none_or(|n| root < *n) {
                    return if within(&root) { Some(root) } else { None };
                }
            }
            {
                let n = next?;
                cur = n
            }
        }
    }

    /// Minimum value on `[a, b]`.
    pub fn min_on(&self, a: &Q, b: &Q) -> Q {
        self.bps
            .iter()
            .filter(|t| *t > a && *t < b)
            .map(|t| self.eval(t))
            .chain([self.eval(a), self.eval(b)])
            .min()
            .expect("nonempty")
    }

    /// True if nondecreasing on `[a, ∞)` (or on `[a, b]` when `b` is given).
    pub fn is_nondecreasing_from(&self, a: &Q, b: Option<&Q>) -> bool {
        self.slopes_on(a, b).all(|s| !s.is_negative())
    }

    pub fn is_nonincreasing_from(&self, a: &Q, b: Option<&Q>) -> bool {
        self.slopes_on(a, b).all(|s| !s.is_positive())
    }

    fn slopes_on<'a>(&'a self, a: &'a Q, b: Option<&'a Q>) -> impl Iterator<Item = &'a Q> {
        (0..self.bps.len()).filter_map(move |i| {
            let end_ok = self.bps.get(i + 1).is_none_or(|n| n > a);
            let start_ok = b.is_none_or(|b| self.bps[i] < *b);
            (end_ok && start_ok).then_some(&self.slopes[i])
        })
    }
}
