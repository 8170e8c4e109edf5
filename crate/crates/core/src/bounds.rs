//! Pointwise bounds on ordered joint laws: the minimal law `L`, the
//! comonotone upper bound, Rogers' law `P`, and the support of `L` for
//! continuous marginals.

use crate::distcore::{JointCdf, OrderedMarginalPair};
use crate::error::{Error, Result};
use crate::numeric::{golden_min, linspace};

const INF_GRID: usize = 4_097;
const ROGERS_GRID: usize = 1_025;
const SUPPORT_GRID: usize = 257;

/// `inf { H(s) : lo <= s <= hi }`.
pub fn inf_h(pair: &OrderedMarginalPair, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return pair.h(lo);
    }
    if pair.profile().is_unimodal {
        return pair.h(lo).min(pair.h(hi));
    }
    let mut best = pair.h(lo).min(pair.h(hi));
    let (gl, gh) = pair.grid_bounds();
    if hi <= gl || lo >= gh {
        return best;
    }
    let (a, b) = (lo.max(gl), hi.min(gh));
    for x in pair.atoms() {
        if x >= lo && x <= hi {
            best = best.min(pair.h(x));
        }
    }
    let xs = linspace(a, b, INF_GRID);
    let hs: Vec<f64> = xs.iter().map(|&x| pair.h(x)).collect();
    for k in 0..xs.len() {
        best = best.min(hs[k]);
        let left = k == 0 || hs[k - 1] >= hs[k];
        let right = k + 1 == xs.len() || hs[k + 1] >= hs[k];
        if left && right && pair.is_continuous() {
            let l = xs[k.saturating_sub(1)];
            let r = xs[(k + 1).min(xs.len() - 1)];
            best = best.min(golden_min(|x| pair.h(x), l, r, 1e-12).1);
        }
    }
    best
}

/// The minimal law `L(x1, x2) = F2(x2) - inf_{[x2, x1]} H` for `x1 > x2`,
/// `F1(x1)` otherwise.
#[derive(Debug, Clone)]
pub struct LowerBound {
    pair: OrderedMarginalPair,
}

pub fn lower_bound_l(pair: &OrderedMarginalPair) -> LowerBound {
    LowerBound { pair: pair.clone() }
}

impl LowerBound {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let p = &self.pair;
        if x1 <= x2 {
            return p.f1().eval(x1);
        }
        crate::clamp_prob(p.f2().eval(x2) - inf_h(p, x2, x1))
    }
}

impl JointCdf for LowerBound {
    fn cdf(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }
}

/// Comonotone law `min{F1(x1), F2(x2)}`.
#[derive(Debug, Clone)]
pub struct UpperBound {
    pair: OrderedMarginalPair,
}

pub fn upper_bound(pair: &OrderedMarginalPair) -> UpperBound {
    UpperBound { pair: pair.clone() }
}

impl UpperBound {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.pair.f1().eval(x1).min(self.pair.f2().eval(x2))
    }
}

impl JointCdf for UpperBound {
    fn cdf(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }
}

/// Rogers' law `sup_{v <= x2} [F2(v) - inf_{[v, x1]} H]` for `x1 > x2`,
/// evaluated over a 1,025-point grid in `v` that always includes `v = x2`.
#[derive(Debug, Clone)]
pub struct RogersP {
    pair: OrderedMarginalPair,
}

pub fn rogers_p(pair: &OrderedMarginalPair) -> RogersP {
    RogersP { pair: pair.clone() }
}

impl RogersP {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let p = &self.pair;
        if x1 <= x2 {
            return p.f1().eval(x1);
        }
        let tail = inf_h(p, x2, x1);
        let mut best = p.f2().eval(x2) - tail;
        let lo = p.grid_bounds().0;
        if lo < x2 {
            let mut vs = linspace(lo, x2, ROGERS_GRID);
            vs.extend(p.atoms().into_iter().filter(|&a| a > lo && a < x2));
            vs.sort_by(|a, b| a.total_cmp(b));
            // suffix minimum of H over [v_k, x1]
            let mut m = tail;
            for &v in vs.iter().rev() {
                m = m.min(p.h(v));
                best = best.max(p.f2().eval(v) - m);
            }
        }
        crate::clamp_prob(best).min(p.f1().eval(x1).min(p.f2().eval(x2)))
    }
}

impl JointCdf for RogersP {
    fn cdf(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }
}

/// Whether `(x1, x2)` lies in the support of `L`, for continuous marginals.
///
/// Off the diagonal this needs `H(x1) = H(x2)` within `eps` with `H` larger
/// in between, or `H` no smaller in between and strictly smaller just
/// outside. On the diagonal it needs `x` in both supports but not in the
/// exceptional boundary set `T`.
pub fn support_contains(pair: &OrderedMarginalPair, x1: f64, x2: f64, eps: f64) -> Result<bool> {
    if !pair.is_continuous() {
        return Err(Error::UnsupportedForDiscrete("support_contains"));
    }
    if x1 < x2 {
        return Ok(false);
    }
    let (gl, gh) = pair.grid_bounds();
    let probe = 1e-6 * (gh - gl).max(f64::MIN_POSITIVE);
    let (f1, f2) = (pair.f1(), pair.f2());
    if x1 == x2 {
        let x = x1;
        let in_s1 = f1.eval(x + probe) - f1.eval(x - probe) > 0.0;
        let in_s2 = f2.eval(x + probe) - f2.eval(x - probe) > 0.0;
        let in_t = f1.eval(x + probe) == f1.eval(x) && f2.eval(x) == f2.eval(x - probe);
        return Ok(in_s1 && in_s2 && !in_t);
    }
    let (h1, h2) = (pair.h(x1), pair.h(x2));
    if (h1 - h2).abs() > eps {
        return Ok(false);
    }
    let level = h1.max(h2);
    let inner: Vec<f64> = (1..SUPPORT_GRID)
        .map(|k| pair.h(x2 + (x1 - x2) * k as f64 / SUPPORT_GRID as f64))
        .collect();
    let min_inner = inner.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_inner < level - eps {
        return Ok(false);
    }
    if min_inner > level {
        return Ok(true);
    }
    Ok(pair.h(x2 - probe) < level - eps && pair.h(x1 + probe) < level - eps)
}
