use crate::error::{invalid, Error, Result};
use crate::numeric::{first_true, golden_max, linspace};

use super::cdf::Cdf;

/// Default number of grid points for dominance and unimodality scans.
pub const DOMINANCE_GRID: usize = 10_001;

const DOMINANCE_TOL: f64 = 1e-12;
// Differences of H smaller than this count as flat.
const FLAT_TOL: f64 = 1e-14;

/// Shape of the gap function `H = F2 - F1` on the joint support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodalProfile {
    pub is_unimodal: bool,
    /// Leftmost maximiser of `H` when unimodal.
    pub r: Option<f64>,
}

/// Marginals `F1 <= F2` together with `G = (F1 + F2)/2` and `H = F2 - F1`.
#[derive(Debug, Clone)]
pub struct OrderedMarginalPair {
    f1: Cdf,
    f2: Cdf,
    g: Cdf,
    profile: UnimodalProfile,
    grid_size: usize,
}

/// Validate `F1 <= F2` on `grid_size` points spanning the union of the
/// truncated supports plus every atom.
pub fn make_ordered_pair(f1: Cdf, f2: Cdf, grid_size: usize) -> Result<OrderedMarginalPair> {
    if grid_size < 2 {
        return Err(invalid("dominance grid needs at least two points"));
    }
    let (l1, h1) = f1.grid_bounds();
    let (l2, h2) = f2.grid_bounds();
    let (lo, hi) = (l1.min(l2), h1.max(h2));
    let mut points = linspace(lo, hi, grid_size);
    for (a, _) in f1.atoms().into_iter().chain(f2.atoms()) {
        points.push(a);
    }
    for &x in &points {
        let (a, b) = (f1.eval(x), f2.eval(x));
        if a > b + DOMINANCE_TOL {
            return Err(Error::NotStochasticallyOrdered { x, f1: a, f2: b });
        }
    }
    let g = Cdf::mixture(0.5, f1.clone(), f2.clone())?;
    let mut pair = OrderedMarginalPair {
        f1,
        f2,
        g,
        profile: UnimodalProfile { is_unimodal: false, r: None },
        grid_size,
    };
    pair.profile = pair.scan_unimodality();
    Ok(pair)
}

/// Unimodality of `H`, as computed when the pair was built.
pub fn unimodal_profile(pair: &OrderedMarginalPair) -> UnimodalProfile {
    pair.profile
}

impl OrderedMarginalPair {
    /// Build with the default 10,001-point dominance grid.
    pub fn new(f1: Cdf, f2: Cdf) -> Result<Self> {
        make_ordered_pair(f1, f2, DOMINANCE_GRID)
    }

    pub fn f1(&self) -> &Cdf {
        &self.f1
    }

    pub fn f2(&self) -> &Cdf {
        &self.f2
    }

    /// The mixture cdf `G`.
    pub fn g(&self) -> &Cdf {
        &self.g
    }

    pub fn profile(&self) -> UnimodalProfile {
        self.profile
    }

    /// `G(x) = (F1(x) + F2(x)) / 2`.
    pub fn g_eval(&self, x: f64) -> f64 {
        0.5 * (self.f1.eval(x) + self.f2.eval(x))
    }

    /// Density of `G`, when both marginals have one.
    pub fn g_density(&self, x: f64) -> Option<f64> {
        Some(0.5 * (self.f1.density(x)? + self.f2.density(x)?))
    }

    /// `H(x) = F2(x) - F1(x)`, clamped at zero.
    pub fn h(&self, x: f64) -> f64 {
        (self.f2.eval(x) - self.f1.eval(x)).max(0.0)
    }

    /// `H'(x) = f2(x) - f1(x)` where densities exist.
    pub fn h_density(&self, x: f64) -> Option<f64> {
        Some(self.f2.density(x)? - self.f1.density(x)?)
    }

    pub fn is_continuous(&self) -> bool {
        self.f1.is_continuous() && self.f2.is_continuous()
    }

    pub fn has_densities(&self) -> bool {
        self.is_continuous() && self.f1.density(0.0).is_some() && self.f2.density(0.0).is_some()
    }

    /// Union of the two supports.
    pub fn support(&self) -> (f64, f64) {
        let (l1, h1) = self.f1.support();
        let (l2, h2) = self.f2.support();
        (l1.min(l2), h1.max(h2))
    }

    /// Union of the truncated supports.
    pub fn grid_bounds(&self) -> (f64, f64) {
        let (l1, h1) = self.f1.grid_bounds();
        let (l2, h2) = self.f2.grid_bounds();
        (l1.min(l2), h1.max(h2))
    }

    /// Common support interval, if both marginals share one (within a
    /// relative `1e-12`).
    pub fn common_support(&self) -> Option<(f64, f64)> {
        let (l1, h1) = self.f1.support();
        let (l2, h2) = self.f2.support();
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        (close(l1, l2) && close(h1, h2)).then_some((l1.min(l2), h1.max(h2)))
    }

    /// Every atom of either marginal, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.f1.atoms().into_iter().chain(self.f2.atoms()).map(|p| p.0).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    fn scan_unimodality(&self) -> UnimodalProfile {
        let (lo, hi) = self.grid_bounds();
        let xs = linspace(lo, hi, DOMINANCE_GRID);
        let hs: Vec<f64> = xs.iter().map(|&x| self.h(x)).collect();
        let mut descending = false;
        for w in hs.windows(2) {
            let d = w[1] - w[0];
            if d < -FLAT_TOL {
                descending = true;
            } else if d > FLAT_TOL && descending {
                return UnimodalProfile { is_unimodal: false, r: None };
            }
        }
        let max = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k = hs.iter().position(|&v| v >= max - FLAT_TOL).unwrap_or(0);
        if k + 1 < hs.len() && hs[k + 1] >= max - FLAT_TOL {
            // flat at the top: leftmost maximiser on the grid
            return UnimodalProfile { is_unimodal: true, r: Some(xs[k]) };
        }
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(xs.len() - 1)];
        let r = if self.has_densities() {
            // H' changes sign from + to - at the mode
            first_true(|x| self.h_density(x).unwrap_or(0.0) <= 0.0, a, b, 1e-14)
        } else {
            golden_max(|x| self.h(x), a, b, 1e-10).0
        };
        UnimodalProfile { is_unimodal: true, r: Some(r) }
    }
}
