use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::numeric::golden_min;

use super::diagonal::{ArchimedeanGenerator, DiagonalSection};

/// Absolute accuracy of the Bertino infimum.
const BERTINO_TOL: f64 = 1e-13;
const BERTINO_MAX_EVALS: usize = 4_000;

#[derive(Clone)]
pub struct FnCopula(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl fmt::Debug for FnCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnCopula(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaFamily {
    FhUpper,
    FhLower,
    Independence,
    Archimedean,
    Bertino,
    DiagonalUpper,
    Mixture,
    Custom,
}

/// A bivariate cdf on `[0, 1]²` with uniform margins.
#[derive(Debug, Clone)]
pub enum Copula {
    /// `min(u, v)`.
    FhUpper,
    /// `max(u + v - 1, 0)`.
    FhLower,
    Independence,
    Archimedean(Arc<dyn ArchimedeanGenerator>),
    /// Smallest copula with the given diagonal section.
    Bertino(DiagonalSection),
    /// `min(u, v, (δ(u) + δ(v)) / 2)`, the largest symmetric copula with
    /// diagonal `δ`.
    DiagonalUpper(DiagonalSection),
    /// `w * a + (1 - w) * b`.
    Mixture { w: f64, a: Arc<Copula>, b: Arc<Copula> },
    Custom(FnCopula),
}

pub fn archimedean_copula(gen: Arc<dyn ArchimedeanGenerator>) -> Copula {
    Copula::Archimedean(gen)
}

/// `δ(t) = ψ(2 ψ⁻(t))`.
pub fn archimedean_diagonal(gen: Arc<dyn ArchimedeanGenerator>) -> Result<DiagonalSection> {
    DiagonalSection::archimedean(gen)
}

pub fn bertino(delta: DiagonalSection) -> Copula {
    Copula::Bertino(delta)
}

impl Copula {
    pub fn mixture(w: f64, a: Copula, b: Copula) -> Result<Copula> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("mixture weight must lie in [0,1], got {w}")));
        }
        Ok(Copula::Mixture { w, a: Arc::new(a), b: Arc::new(b) })
    }

    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Copula {
        Copula::Custom(FnCopula(Arc::new(f)))
    }

    pub fn family(&self) -> CopulaFamily {
        match self {
            Copula::FhUpper => CopulaFamily::FhUpper,
            Copula::FhLower => CopulaFamily::FhLower,
            Copula::Independence => CopulaFamily::Independence,
            Copula::Archimedean(_) => CopulaFamily::Archimedean,
            Copula::Bertino(_) => CopulaFamily::Bertino,
            Copula::DiagonalUpper(_) => CopulaFamily::DiagonalUpper,
            Copula::Mixture { .. } => CopulaFamily::Mixture,
            Copula::Custom(_) => CopulaFamily::Custom,
        }
    }

    /// Whether `C(u, v) = C(v, u)` holds by construction.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Copula::Custom(_) => false,
            Copula::Mixture { a, b, .. } => a.is_symmetric() && b.is_symmetric(),
            _ => true,
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);
        match self {
            Copula::FhUpper => u.min(v),
            Copula::FhLower => (u + v - 1.0).max(0.0),
            Copula::Independence => u * v,
            Copula::Archimedean(g) => {
                if u == 0.0 || v == 0.0 {
                    return 0.0;
                }
                g.psi(g.psi_inverse(u) + g.psi_inverse(v)).clamp(0.0, u.min(v))
            }
            Copula::Bertino(d) => bertino_eval(d, u, v),
            Copula::DiagonalUpper(d) => u.min(v).min(0.5 * (d.eval(u) + d.eval(v))),
            Copula::Mixture { w, a, b } => w * a.eval(u, v) + (1.0 - w) * b.eval(u, v),
            Copula::Custom(f) => (f.0)(u, v),
        }
    }

    /// `C(t, t)`.
    pub fn diagonal(&self, t: f64) -> f64 {
        self.eval(t, t)
    }
}

fn bertino_eval(d: &DiagonalSection, u: f64, v: f64) -> f64 {
    let (m, hi) = if u <= v { (u, v) } else { (v, u) };
    if m == hi {
        return d.eval(m);
    }
    // t - δ(t) vanishes off the decomposition intervals, so the infimum is 0
    // unless [m, hi] sits inside one of them
    let inside = d.intervals().iter().any(|&(a, b)| a < m && hi < b);
    if !inside {
        return m;
    }
    (m - lipschitz_min(|t| d.gap(t), m, hi)).max(0.0)
}

struct Cell {
    lower: f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // smallest lower bound first
        other.lower.total_cmp(&self.lower)
    }
}

fn cell(a: f64, fa: f64, b: f64, fb: f64) -> Cell {
    Cell { lower: 0.5 * (fa + fb - (b - a)), a, fa, b, fb }
}

/// Minimum of a 1-Lipschitz function on `[a, b]` by best-first
/// branch-and-bound (Piyavskii bounds).
pub(crate) fn lipschitz_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (mut best, mut best_x) = if fa <= fb { (fa, a) } else { (fb, b) };
    let mut heap = BinaryHeap::new();
    heap.push(cell(a, fa, b, fb));
    let mut evals = 2;
    while let Some(c) = heap.pop() {
        if c.lower >= best - BERTINO_TOL {
            return best;
        }
        if evals >= BERTINO_MAX_EVALS {
            break;
        }
        let m = 0.5 * (c.a + c.b);
        if m <= c.a || m >= c.b {
            continue;
        }
        let fm = f(m);
        evals += 1;
        if fm < best {
            best = fm;
            best_x = m;
        }
        heap.push(cell(c.a, c.fa, m, fm));
        heap.push(cell(m, fm, c.b, c.fb));
    }
    // smooth interior minima exhaust the Lipschitz bounds; polish locally
    let w = 1e-3 * (b - a);
    let (_, polished) = golden_min(&f, (best_x - w).max(a), (best_x + w).min(b), 1e-14);
    best.min(polished)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Gumbel;

    #[test]
    fn bertino_of_comonotone_is_upper() {
        let b = bertino(DiagonalSection::comonotone());
        for &(u, v) in &[(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)] {
            assert_eq!(b.eval(u, v), u.min(v));
        }
    }

    #[test]
    fn bertino_of_frechet_lower_is_lower() {
        let b = bertino(DiagonalSection::frechet_lower());
        for &(u, v) in &[(0.2, 0.7), (0.9, 0.4), (0.3, 0.3), (0.6, 0.65)] {
            assert!((b.eval(u, v) - (u + v - 1.0f64).max(0.0)).abs() < 1e-12, "{u} {v}");
        }
    }

    #[test]
    fn bertino_diagonal_identity() {
        let b = bertino(DiagonalSection::gumbel(3.0).unwrap());
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((b.eval(t, t) - t.powf(2f64.powf(1.0 / 3.0))).abs() < 1e-10);
        }
    }

    #[test]
    fn bertino_independence_diagonal_closed_form() {
        // t - t² is unimodal, so the infimum sits at an end point
        let b = bertino(DiagonalSection::power(2.0).unwrap());
        for &(u, v) in &[(0.1f64, 0.3), (0.2, 0.95), (0.6, 0.7)] {
            let gap = (u - u * u).min(v - v * v);
            assert!((b.eval(u, v) - (u - gap)).abs() < 1e-12);
        }
    }

    #[test]
    fn gumbel_theta_one_is_independence() {
        let c = archimedean_copula(Arc::new(Gumbel::new(1.0).unwrap()));
        assert!((c.eval(0.3, 0.6) - 0.18).abs() < 1e-15);
        assert_eq!(c.eval(0.0, 0.6), 0.0);
        assert!((c.eval(1.0, 0.6) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_min_finds_interior_minimum() {
        let m = lipschitz_min(|t| (t - 0.37).abs() * 0.5 + 0.1, 0.0, 1.0);
        assert!((m - 0.1).abs() < 1e-12);
        let flat = lipschitz_min(|_| 0.25, 0.0, 1.0);
        assert_eq!(flat, 0.25);
    }
}
