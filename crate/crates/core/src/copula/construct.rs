use crate::distcore::{Cdf, JointCdf, OrderedMarginalPair, UnivariateCdf};
use crate::error::{Error, Result};
use crate::numeric::linspace;

use super::diagonal::DiagonalSection;
use super::families::Copula;

/// Grid size for checking `C̃(G(x), G(x)) = F1(x)`.
pub const COMPATIBILITY_GRID: usize = 4_097;
const COMPATIBILITY_TOL: f64 = 1e-9;
const SYMMETRY_POINTS: usize = 65;

/// A jump of `G` at an atom: the open interval `(lo, hi)` is missing from the
/// range of `G`; `d_lo` and `d_hi` are the values of `D` at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeGap {
    pub lo: f64,
    pub hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
}

/// `D = F1 ∘ G⁻` on the closure of the range of `G`.
#[derive(Debug, Clone)]
pub struct PartialDiagonal {
    pair: OrderedMarginalPair,
    gaps: Vec<RangeGap>,
}

pub fn diagonal_from_marginals(pair: &OrderedMarginalPair) -> PartialDiagonal {
    let mut gaps = Vec::new();
    for a in pair.atoms() {
        let f1l = pair.f1().eval_left(a);
        let lo = 0.5 * (f1l + pair.f2().eval_left(a));
        let hi = pair.g_eval(a);
        if hi > lo {
            gaps.push(RangeGap { lo, hi, d_lo: f1l, d_hi: pair.f1().eval(a) });
        }
    }
    PartialDiagonal { pair: pair.clone(), gaps }
}

impl PartialDiagonal {
    pub fn gaps(&self) -> &[RangeGap] {
        &self.gaps
    }

    pub fn pair(&self) -> &OrderedMarginalPair {
        &self.pair
    }

    fn gap_containing(&self, t: f64) -> Option<&RangeGap> {
        let k = self.gaps.partition_point(|g| g.hi <= t);
        self.gaps.get(k).filter(|g| g.lo < t && t < g.hi)
    }

    /// `D(t)`, or `None` when `t` falls in a gap of the range of `G`.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if self.gap_containing(t).is_some() {
            return None;
        }
        Some(self.eval_on_range(t))
    }

    fn eval_on_range(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        if let Some(g) = self.gaps.iter().find(|g| g.lo == t) {
            return g.d_lo;
        }
        let x = self.pair.g().quantile(t);
        self.pair.f1().eval(x)
    }
}

/// The diagonal obtained from an ordered pair: `D` on the range of `G`,
/// bridged across each gap by `max{D(x⁻), D(x⁺) - 2(x⁺ - x)}`.
#[derive(Debug, Clone)]
pub struct MarginalDiagonal {
    partial: PartialDiagonal,
}

impl MarginalDiagonal {
    pub(crate) fn eval(&self, t: f64) -> f64 {
        match self.partial.gap_containing(t) {
            Some(g) => g.d_lo.max(g.d_hi - 2.0 * (g.hi - t)),
            None => self.partial.eval_on_range(t),
        }
    }

    /// `f1 / g` at `G⁻(t)` where densities exist.
    pub(crate) fn derivative(&self, t: f64) -> Option<f64> {
        if let Some(g) = self.partial.gap_containing(t) {
            return Some(if g.d_hi - 2.0 * (g.hi - t) > g.d_lo { 2.0 } else { 0.0 });
        }
        let pair = &self.partial.pair;
        if !pair.has_densities() || t <= 0.0 || t >= 1.0 {
            return None;
        }
        let x = pair.g().quantile(t);
        let g = pair.g_density(x)?;
        let f1 = pair.f1().density(x)?;
        (g > 0.0).then(|| (f1 / g).clamp(0.0, 2.0))
    }
}

pub fn extend_diagonal(partial: &PartialDiagonal) -> DiagonalSection {
    DiagonalSection::from_marginal(MarginalDiagonal { partial: partial.clone() })
}

impl DiagonalSection {
    /// `δ_G` for an ordered pair.
    pub fn from_pair(pair: &OrderedMarginalPair) -> DiagonalSection {
        extend_diagonal(&diagonal_from_marginals(pair))
    }
}

/// `F2(x) = 2 δ⁻(x+) - x` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct DiagonalCompanion {
    delta: DiagonalSection,
}

impl DiagonalCompanion {
    pub fn new(delta: DiagonalSection) -> Self {
        DiagonalCompanion { delta }
    }
}

impl UnivariateCdf for DiagonalCompanion {
    fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        (2.0 * self.delta.inverse_right(x) - x).clamp(0.0, 1.0)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn density(&self, x: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Some(0.0);
        }
        let d = self.delta.derivative(self.delta.inverse_right(x));
        Some(if d > 0.0 { 2.0 / d - 1.0 } else { f64::INFINITY })
    }
}

/// Uniform `F1` on `[0, 1]` with its companion `F2 = 2δ⁻(x+) - x`, so that
/// `F1 ∘ G⁻ = δ`.
pub fn marginals_from_diagonal(delta: &DiagonalSection) -> (Cdf, Cdf) {
    let f1 = Cdf::Uniform { a: 0.0, b: 1.0 };
    let f2 = Cdf::custom(DiagonalCompanion::new(delta.clone()));
    (f1, f2)
}

/// Joint law of an ordered pair built from a symmetric copula `C̃`:
/// `F1(x1)` for `x1 <= x2`, else `2 C̃(G(x1), G(x2)) - F1(x2)`.
#[derive(Debug, Clone)]
pub struct OrderedJointLaw {
    pair: OrderedMarginalPair,
    ctilde: Copula,
}

pub fn ordered_joint_cdf(pair: &OrderedMarginalPair, ctilde: Copula) -> Result<OrderedJointLaw> {
    let (lo, hi) = pair.grid_bounds();
    let mut xs = linspace(lo, hi, COMPATIBILITY_GRID);
    xs.extend(pair.atoms());
    let mut worst = (0.0f64, f64::NAN);
    for &x in &xs {
        let t = pair.g_eval(x);
        let err = (ctilde.diagonal(t) - pair.f1().eval(x)).abs();
        if err > worst.0 {
            worst = (err, x);
        }
    }
    if !ctilde.is_symmetric() {
        let step = (COMPATIBILITY_GRID - 1) / (SYMMETRY_POINTS - 1);
        let ts: Vec<(f64, f64)> = xs.iter().step_by(step).map(|&x| (x, pair.g_eval(x))).collect();
        for &(x, u) in &ts {
            for &(_, v) in &ts {
                let err = (ctilde.eval(u, v) - ctilde.eval(v, u)).abs();
                if err > worst.0 {
                    worst = (err, x);
                }
            }
        }
    }
    if worst.0 > COMPATIBILITY_TOL {
        return Err(Error::IncompatibleCopula { worst: worst.0, at: worst.1 });
    }
    Ok(OrderedJointLaw { pair: pair.clone(), ctilde })
}

impl OrderedJointLaw {
    pub fn pair(&self) -> &OrderedMarginalPair {
        &self.pair
    }

    pub fn ctilde(&self) -> &Copula {
        &self.ctilde
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        if x1 <= x2 {
            return self.pair.f1().eval(x1);
        }
        let v = 2.0 * self.ctilde.eval(self.pair.g_eval(x1), self.pair.g_eval(x2)) - self.pair.f1().eval(x2);
        crate::clamp_prob(v)
    }
}

impl JointCdf for OrderedJointLaw {
    fn cdf(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }
}
