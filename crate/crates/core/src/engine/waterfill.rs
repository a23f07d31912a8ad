use crate::stepfn::{q, Q};
use num::{Signed, Zero};

/// One active out-edge as seen by the water-filling step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub nu: Q,
    /// Current queue length `q_e(θ)`.
    pub queue: Q,
    /// Right derivative `ℓ'_w` of the head's label.
    pub head_deriv: Q,
}

impl Candidate {
    pub fn new(nu: Q, queue: Q, head_deriv: Q) -> Self {
        Self { nu, queue, head_deriv }
    }

    fn queued(&self) -> bool {
        self.queue.is_positive()
    }

    /// `g_e(x)`: right derivative of `ℓ_w + c_e` under inflow rate `x`.
    pub fn growth(&self, x: &Q) -> Q {
        let excess = (x - &self.nu) / &self.nu;
        if self.queued() || excess.is_positive() {
            &self.head_deriv + excess
        } else {
            self.head_deriv.clone()
        }
    }

    /// Level at which the edge starts taking flow.
    fn threshold(&self) -> Q {
        if self.queued() {
            &self.head_deriv - q(1)
        } else {
            self.head_deriv.clone()
        }
    }

    /// Largest inflow with growth at most `level`.
    fn upper_at(&self, level: &Q) -> Q {
        let th = self.threshold();
        if *level < th {
            return q(0);
        }
        &self.nu * (level - &self.head_deriv + q(1))
    }

    /// Smallest inflow with growth equal to `level` (flat edges may take zero).
    fn lower_at(&self, level: &Q) -> Q {
        if !self.queued() && *level == self.head_deriv {
            q(0)
        } else {
            self.upper_at(level)
        }
    }
}

/// Splits `b ≥ 0` over the candidates so that all used edges share the same
/// growth `λ` and unused edges have growth at least `λ` at zero; `λ` is minimal.
/// Edges tied on a flat stretch share the remainder in proportion to capacity.
pub fn water_fill(b: &Q, cands: &[Candidate]) -> (Vec<Q>, Q) {
    assert!(!b.is_negative(), "negative budget");
    if cands.is_empty() {
        assert!(b.is_zero(), "positive budget without candidates");
        return (Vec::new(), q(0));
    }
    if b.is_zero() {
        let level = cands.iter().map(|c| c.growth(&q(0))).min().expect("nonempty");
        return (vec![q(0); cands.len()], level);
    }
    let total = |level: &Q| cands.iter().fold(q(0), |s, c| s + c.upper_at(level));
    let mut ths: Vec<Q> = cands.iter().map(Candidate::threshold).collect();
    ths.sort();
    ths.dedup();
    let mut level = None;
    let mut prev: Option<(Q, Q)> = None;
    for th in &ths {
        let at = total(th);
        if let Some((pl, pv)) = &prev {
            // Linear between thresholds: slope is the capacity of edges already in use.
            let slope: Q = cands
                .iter()
                .filter(|c| c.threshold() <= *pl)
                .fold(q(0), |s, c| s + &c.nu);
            if slope.is_positive() {
                let cand = pl + (b - pv) / &slope;
                if cand < *th {
                    level = Some(cand);
                    break;
                }
            }
        }
        if at >= *b {
            level = Some(th.clone());
            break;
        }
        prev = Some((th.clone(), at));
    }
    let level = level.unwrap_or_else(|| {
        let (pl, pv) = prev.expect("at least one threshold");
        let slope = cands.iter().fold(q(0), |s, c| s + &c.nu);
        pl + (b - pv) / slope
    });
    let mut x: Vec<Q> = cands.iter().map(|c| c.lower_at(&level)).collect();
    let assigned = x.iter().fold(q(0), |s, v| s + v);
    let rest = b - assigned;
    if rest.is_positive() {
        let tied: Vec<usize> = (0..cands.len())
            .filter(|&i| !cands[i].queued() && cands[i].head_deriv == level)
            .collect();
        let cap: Q = tied.iter().fold(q(0), |s, &i| s + &cands[i].nu);
        for &i in &tied {
            x[i] = &rest * &cands[i].nu / &cap;
        }
    }
    (x, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(nu: i64) -> Candidate {
        Candidate::new(q(nu), q(0), q(0))
    }

    #[test]
    fn splits_in_proportion_on_tie() {
        let (x, level) = water_fill(&q(3), &[flat(1), flat(2)]);
        assert_eq!(x, vec![q(1), q(2)]);
        assert_eq!(level, q(0));
    }

    #[test]
    fn single_edge_builds_queue() {
        let (x, level) = water_fill(&q(4), &[flat(1)]);
        assert_eq!(x, vec![q(4)]);
        assert_eq!(level, q(3));
    }

    #[test]
    fn zero_budget_reports_min_growth() {
        let c = [Candidate::new(q(1), q(2), q(0)), flat(1)];
        let (x, level) = water_fill(&q(0), &c);
        assert_eq!(x, vec![q(0), q(0)]);
        assert_eq!(level, q(-1));
    }
}
