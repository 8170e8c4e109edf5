use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::numeric::{first_true, last_true, linspace};

use super::construct::MarginalDiagonal;

const SLACK: f64 = 1e-12;
/// Grid used to split `{t : δ(t) < t}` into intervals.
const DECOMPOSITION_GRID: usize = 16_385;
const GAP_ZERO: f64 = 1e-13;
const FD_STEP: f64 = 1e-6;

/// Archimedean generator: decreasing convex `ψ : [0, ∞) → [0, 1]` with
/// `ψ(0) = 1` and `ψ(∞) = 0`.
pub trait ArchimedeanGenerator: Send + Sync + fmt::Debug {
    fn psi(&self, t: f64) -> f64;
    /// Generalized inverse; `+inf` at 0.
    fn psi_inverse(&self, u: f64) -> f64;
}

/// Gumbel generator `ψ(t) = exp(-t^{1/θ})`, `θ >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gumbel {
    theta: f64,
}

impl Gumbel {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(invalid(format!("Gumbel theta must be >= 1, got {theta}")));
        }
        Ok(Gumbel { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Exponent `2^{1/θ}` of the diagonal `t ↦ t^{2^{1/θ}}`.
    pub fn diagonal_exponent(&self) -> f64 {
        2f64.powf(1.0 / self.theta)
    }
}

impl ArchimedeanGenerator for Gumbel {
    fn psi(&self, t: f64) -> f64 {
        (-t.powf(1.0 / self.theta)).exp()
    }

    fn psi_inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return f64::INFINITY;
        }
        if u >= 1.0 {
            return 0.0;
        }
        (-u.ln()).powf(self.theta)
    }
}

#[derive(Clone)]
pub struct FnDiagonal(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for FnDiagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnDiagonal(..)")
    }
}

#[derive(Debug, Clone)]
pub enum DiagonalKind {
    /// `δ(t) = t`.
    Comonotone,
    /// `δ(t) = t^k`, `1 <= k <= 2`.
    Power(f64),
    /// Diagonal of the Gumbel copula, `t^{2^{1/θ}}`.
    Gumbel(f64),
    /// `max(2t - 1, 0)`.
    FrechetLower,
    Archimedean(Arc<dyn ArchimedeanGenerator>),
    /// Piecewise-linear interpolation of `(t, δ)` nodes.
    Table { t: Vec<f64>, d: Vec<f64> },
    /// `F1 ∘ G⁻` of an ordered pair, extended across the gaps in the range of
    /// `G`.
    Marginal(Arc<MarginalDiagonal>),
    Function(FnDiagonal),
}

/// A validated diagonal section with its decomposition into open intervals
/// where `δ(t) < t`.
#[derive(Debug, Clone)]
pub struct DiagonalSection {
    kind: DiagonalKind,
    intervals: Vec<(f64, f64)>,
}

impl DiagonalSection {
    pub fn comonotone() -> Self {
        DiagonalSection { kind: DiagonalKind::Comonotone, intervals: Vec::new() }
    }

    pub fn power(k: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&k) {
            return Err(invalid(format!("t^k is a diagonal section only for 1 <= k <= 2, got {k}")));
        }
        if k == 1.0 {
            return Ok(Self::comonotone());
        }
        Ok(DiagonalSection { kind: DiagonalKind::Power(k), intervals: vec![(0.0, 1.0)] })
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Gumbel::new(theta)?;
        Ok(DiagonalSection { kind: DiagonalKind::Gumbel(theta), intervals: vec![(0.0, 1.0)] })
    }

    pub fn frechet_lower() -> Self {
        DiagonalSection { kind: DiagonalKind::FrechetLower, intervals: vec![(0.0, 1.0)] }
    }

    pub fn archimedean(gen: Arc<dyn ArchimedeanGenerator>) -> Result<Self> {
        Self::checked(DiagonalKind::Archimedean(gen))
    }

    /// Piecewise-linear diagonal through `(t[i], d[i])`; `t` must start at 0,
    /// end at 1 and increase strictly.
    pub fn table(t: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != d.len() {
            return Err(invalid("diagonal table needs matching t and delta columns of length >= 2"));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 || t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("diagonal table t must increase strictly from 0 to 1"));
        }
        Self::checked(DiagonalKind::Table { t, d })
    }

    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::checked(DiagonalKind::Function(FnDiagonal(Arc::new(f))))
    }

    pub(crate) fn from_marginal(m: MarginalDiagonal) -> Self {
        let mut s = DiagonalSection { kind: DiagonalKind::Marginal(Arc::new(m)), intervals: Vec::new() };
        s.intervals = s.decompose();
        s
    }

    fn checked(kind: DiagonalKind) -> Result<Self> {
        let mut s = DiagonalSection { kind, intervals: Vec::new() };
        let report = validate_diagonal(|t| s.eval(t), 4097);
        if !report.passed() {
            return Err(invalid(format!("not a diagonal section: {}", report.summary())));
        }
        s.intervals = s.decompose();
        Ok(s)
    }

    pub fn kind(&self) -> &DiagonalKind {
        &self.kind
    }

    /// Disjoint open intervals `(α_j, β_j)` whose union is `{t : δ(t) < t}`.
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match &self.kind {
            DiagonalKind::Comonotone => t,
            DiagonalKind::Power(k) => t.powf(*k),
            DiagonalKind::Gumbel(theta) => t.powf(2f64.powf(1.0 / theta)),
            DiagonalKind::FrechetLower => (2.0 * t - 1.0).max(0.0),
            DiagonalKind::Archimedean(g) => g.psi(2.0 * g.psi_inverse(t)),
            DiagonalKind::Table { t: ts, d } => {
                let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let (t0, t1, d0, d1) = (ts[k - 1], ts[k], d[k - 1], d[k]);
                d0 + (d1 - d0) * (t - t0) / (t1 - t0)
            }
            DiagonalKind::Marginal(m) => m.eval(t),
            DiagonalKind::Function(f) => (f.0)(t),
        }
    }

    /// `t - δ(t)`.
    pub fn gap(&self, t: f64) -> f64 {
        (t - self.eval(t)).max(0.0)
    }

    /// `δ'(t)`: closed form where available, otherwise a central difference
    /// (one-sided within `1e-6` of the ends).
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            DiagonalKind::Comonotone => 1.0,
            DiagonalKind::Power(k) => k * t.powf(k - 1.0),
            DiagonalKind::Gumbel(theta) => {
                let a = 2f64.powf(1.0 / theta);
                a * t.powf(a - 1.0)
            }
            DiagonalKind::FrechetLower => {
                if t < 0.5 {
                    0.0
                } else {
                    2.0
                }
            }
            DiagonalKind::Table { t: ts, d } => {
                let k = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                (d[k] - d[k - 1]) / (ts[k] - ts[k - 1])
            }
            DiagonalKind::Marginal(m) => m.derivative(t).unwrap_or_else(|| self.finite_difference(t)),
            _ => self.finite_difference(t),
        }
    }

    fn finite_difference(&self, t: f64) -> f64 {
        let h = FD_STEP;
        if t < h {
            (self.eval(t + h) - self.eval(t)) / h
        } else if t > 1.0 - h {
            (self.eval(t) - self.eval(t - h)) / h
        } else {
            (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
        }
    }

    /// Right limit of the generalized inverse, `δ⁻(x+) = sup{t : δ(t) <= x}`,
    /// with `δ⁻(1+) = 1`.
    pub fn inverse_right(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        if x < 0.0 {
            return 0.0;
        }
        match &self.kind {
            DiagonalKind::Comonotone => x,
            DiagonalKind::Power(k) => x.powf(1.0 / k),
            DiagonalKind::Gumbel(theta) => x.powf(2f64.powf(-1.0 / theta)),
            DiagonalKind::FrechetLower => 0.5 * (x + 1.0),
            _ => last_true(|t| self.eval(t) <= x, 0.0, 1.0, 0.0),
        }
    }

    fn decompose(&self) -> Vec<(f64, f64)> {
        let ts = linspace(0.0, 1.0, DECOMPOSITION_GRID);
        let positive: Vec<bool> = ts.iter().map(|&t| self.gap(t) > GAP_ZERO).collect();
        let mut out = Vec::new();
        let mut k = 0;
        while k < ts.len() {
            if !positive[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k < ts.len() && positive[k] {
                k += 1;
            }
            let alpha = if start == 0 {
                0.0
            } else {
                first_true(|t| self.gap(t) > GAP_ZERO, ts[start - 1], ts[start], 1e-12)
            };
            let beta = if k == ts.len() {
                1.0
            } else {
                last_true(|t| self.gap(t) > GAP_ZERO, ts[k - 1], ts[k], 1e-12)
            };
            let alpha = if alpha <= 1e-9 { 0.0 } else { alpha };
            let beta = if beta >= 1.0 - 1e-9 { 1.0 } else { beta };
            out.push((alpha, beta));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalProperty {
    /// `δ(0) = 0`, `δ(1) = 1`.
    D1,
    /// Monotone increasing.
    D2,
    /// 2-Lipschitz.
    D3,
    /// `δ(t) <= t`.
    D4,
    /// Values inside `[0, 1]`.
    Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalViolation {
    pub property: DiagonalProperty,
    pub t: f64,
    pub s: Option<f64>,
    /// Amount by which the inequality fails.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagonalReport {
    /// Worst witness for each failed property.
    pub violations: Vec<DiagonalViolation>,
}

impl DiagonalReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&self, p: DiagonalProperty) -> Option<&DiagonalViolation> {
        self.violations.iter().find(|v| v.property == p)
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            return "pass".into();
        }
        self.violations
            .iter()
            .map(|v| match v.s {
                Some(s) => format!("{:?} at t={} s={} (excess {:.3e})", v.property, v.t, s, v.excess),
                None => format!("{:?} at t={} (excess {:.3e})", v.property, v.t, v.excess),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn record(&mut self, v: DiagonalViolation) {
        match self.violations.iter_mut().find(|w| w.property == v.property) {
            Some(w) if v.excess > w.excess => *w = v,
            Some(_) => {}
            None => self.violations.push(v),
        }
    }
}

/// Check D1 exactly and D2-D4 on a grid of `grid_size` points, with D3 also
/// spot-checked on 1000 seeded random pairs.
pub fn validate_diagonal<F: Fn(f64) -> f64>(delta: F, grid_size: usize) -> DiagonalReport {
    let mut report = DiagonalReport::default();
    let (d0, d1) = (delta(0.0), delta(1.0));
    if d0 != 0.0 || d1 != 1.0 {
        let (t, excess) = if d0 != 0.0 { (0.0, d0.abs()) } else { (1.0, (d1 - 1.0).abs()) };
        report.record(DiagonalViolation { property: DiagonalProperty::D1, t, s: None, excess });
    }
    let ts = linspace(0.0, 1.0, grid_size.max(2));
    let ds: Vec<f64> = ts.iter().map(|&t| delta(t)).collect();
    for (i, (&t, &d)) in ts.iter().zip(&ds).enumerate() {
        if !(-SLACK..=1.0 + SLACK).contains(&d) || d.is_nan() {
            let excess = if d.is_nan() { f64::INFINITY } else { (d - d.clamp(0.0, 1.0)).abs() };
            report.record(DiagonalViolation { property: DiagonalProperty::Range, t, s: None, excess });
        }
        if d > t + SLACK {
            report.record(DiagonalViolation { property: DiagonalProperty::D4, t, s: None, excess: d - t });
        }
        if i > 0 {
            let (s, ds_prev) = (ts[i - 1], ds[i - 1]);
            if d < ds_prev - SLACK {
                report.record(DiagonalViolation {
                    property: DiagonalProperty::D2,
                    t,
                    s: Some(s),
                    excess: ds_prev - d,
                });
            }
            let lip = (d - ds_prev).abs() - 2.0 * (t - s);
            if lip > SLACK {
                report.record(DiagonalViolation { property: DiagonalProperty::D3, t, s: Some(s), excess: lip });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6469_6167);
    for _ in 0..1000 {
        let t: f64 = rng.random();
        let s: f64 = rng.random();
        let lip = (delta(t) - delta(s)).abs() - 2.0 * (t - s).abs();
        if lip > SLACK {
            report.record(DiagonalViolation { property: DiagonalProperty::D3, t, s: Some(s), excess: lip });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_and_comonotone_pass() {
        assert!(validate_diagonal(|t| t * t, 10_001).passed());
        assert!(validate_diagonal(|t| t, 10_001).passed());
    }

    #[test]
    fn cube_fails_lipschitz_near_one() {
        let r = validate_diagonal(|t| t * t * t, 10_001);
        assert!(!r.passed());
        let v = r.violation(DiagonalProperty::D3).expect("D3 witness");
        assert!(v.t > 0.8, "witness {v:?}");
        assert!(r.violation(DiagonalProperty::D4).is_none());
    }

    #[test]
    fn d1_and_d4_failures() {
        let r = validate_diagonal(|t| (t + 0.1).min(1.0), 101);
        assert!(r.violation(DiagonalProperty::D1).is_some());
        assert!(r.violation(DiagonalProperty::D4).is_some());
        let r = validate_diagonal(|t| if t > 0.5 { t - 0.3 } else { t * 0.5 }, 101);
        assert!(r.violation(DiagonalProperty::D2).is_some());
    }

    #[test]
    fn gumbel_diagonal_exponent() {
        let d = DiagonalSection::gumbel(2.0).unwrap();
        for &t in &[0.1, 0.4, 0.9] {
            assert!((d.eval(t) - t.powf(2f64.sqrt())).abs() < 1e-15);
        }
        let gen = Arc::new(Gumbel::new(2.0).unwrap());
        let a = DiagonalSection::archimedean(gen).unwrap();
        for &t in &[0.1, 0.4, 0.9] {
            assert!((a.eval(t) - d.eval(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn decomposition_of_touching_table() {
        let d = DiagonalSection::table(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.0, 0.0, 0.5, 0.5, 1.0]).unwrap();
        let iv = d.intervals();
        assert_eq!(iv.len(), 2);
        assert_eq!(iv[0].0, 0.0);
        assert!((iv[0].1 - 0.5).abs() < 1e-11);
        assert!((iv[1].0 - 0.5).abs() < 1e-11);
        assert_eq!(iv[1].1, 1.0);
        assert!(DiagonalSection::comonotone().intervals().is_empty());
    }

    #[test]
    fn inverse_right_handles_flats() {
        let d = DiagonalSection::frechet_lower();
        assert_eq!(d.inverse_right(0.0), 0.5);
        let t = DiagonalSection::table(vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert!((t.inverse_right(0.0) - 0.5).abs() < 1e-15);
        assert!((t.inverse_right(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(t.inverse_right(1.0), 1.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(DiagonalSection::power(3.0).is_err());
        assert!(DiagonalSection::gumbel(0.5).is_err());
        assert!(DiagonalSection::from_fn(|t| t * t * t).is_err());
        assert!(DiagonalSection::table(vec![0.0, 1.0], vec![0.0, 0.9]).is_err());
    }
}
