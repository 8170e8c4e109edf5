use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::numeric::first_true;
use crate::numeric::special::{normal_cdf, normal_pdf, normal_quantile};

/// Tail mass cut off when an infinite support is truncated for grids and
/// quadrature.
pub const TAIL_EPS: f64 = 1e-10;

/// A user-supplied continuous (or not) distribution function.
///
/// Only `eval` and `support` are required; the generalized inverse falls back
/// to bisection.
pub trait UnivariateCdf: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> f64;

    /// Closed support `(lo, hi)`; endpoints may be infinite.
    fn support(&self) -> (f64, f64);

    fn density(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Closed-form generalized inverse, if known.
    fn quantile(&self, _t: f64) -> Option<f64> {
        None
    }

    fn is_continuous(&self) -> bool {
        true
    }
}

/// Atoms of a step cdf with their running totals.
#[derive(Debug, Clone, PartialEq)]
pub struct Steps {
    atoms: Vec<f64>,
    masses: Vec<f64>,
    cum: Vec<f64>,
}

impl Steps {
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn eval(&self, x: f64) -> f64 {
        // number of atoms <= x
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    fn eval_left(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a < x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    fn quantile(&self, t: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < t);
        self.atoms.get(k).copied().unwrap_or(f64::INFINITY)
    }
}

/// A one-dimensional distribution function.
#[derive(Debug, Clone)]
pub enum Cdf {
    Uniform { a: f64, b: f64 },
    /// `x^alpha` on `[0, 1]`.
    Power { alpha: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Normal restricted to `[lo, hi]`.
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Discrete(Steps),
    /// Right-continuous empirical cdf with jumps `k/n` at the distinct values.
    Empirical(Steps),
    /// `w * a + (1 - w) * b`.
    Mixture { w: f64, a: Arc<Cdf>, b: Arc<Cdf> },
    /// `2 sqrt(F) - F`, the companion of `F` when the exchangeable pair behind
    /// an ordered pair is independent.
    SqrtCompanion(Arc<Cdf>),
    Custom(Arc<dyn UnivariateCdf>),
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl Cdf {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let (a, b) = (finite("a", a)?, finite("b", b)?);
        if a >= b {
            return Err(invalid(format!("uniform needs a < b, got [{a}, {b}]")));
        }
        Ok(Cdf::Uniform { a, b })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("power exponent must be positive, got {alpha}")));
        }
        Ok(Cdf::Power { alpha })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let (mu, sigma) = (finite("mu", mu)?, finite("sigma", sigma)?);
        if sigma <= 0.0 {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Cdf::Normal { mu, sigma })
    }

    pub fn truncated_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        let (mu, sigma) = (finite("mu", mu)?, finite("sigma", sigma)?);
        let (lo, hi) = (finite("lo", lo)?, finite("hi", hi)?);
        if sigma <= 0.0 || lo >= hi {
            return Err(invalid("truncated normal needs sigma > 0 and lo < hi"));
        }
        Ok(Cdf::TruncatedNormal { mu, sigma, lo, hi })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        Ok(Cdf::Exponential { rate })
    }

    pub fn discrete(atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != masses.len() {
            return Err(invalid("discrete needs equally many atoms and masses, at least one"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(invalid("atoms must be finite"));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("atoms must be strictly increasing"));
        }
        if masses.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
            return Err(invalid("masses must lie in [0, 1]"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("masses sum to {total}, not 1")));
        }
        let mut run = 0.0;
        let mut cum: Vec<f64> = masses
            .iter()
            .map(|m| {
                run += m;
                run.min(1.0)
            })
            .collect();
        *cum.last_mut().unwrap() = 1.0;
        Ok(Cdf::Discrete(Steps { atoms, masses, cum }))
    }

    /// Empirical cdf of `sample`; tied values are merged into one atom.
    pub fn empirical(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(invalid("empirical sample is empty"));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(invalid("empirical sample contains non-finite values"));
        }
        sample.sort_by(|a, b| a.total_cmp(b));
        let n = sample.len();
        let mut atoms = Vec::new();
        let mut cum = Vec::new();
        let mut masses = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && sample[j] == sample[i] {
                j += 1;
            }
            atoms.push(sample[i]);
            masses.push((j - i) as f64 / n as f64);
            cum.push(j as f64 / n as f64);
            i = j;
        }
        Ok(Cdf::Empirical(Steps { atoms, masses, cum }))
    }

    pub fn mixture(w: f64, a: Cdf, b: Cdf) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("mixture weight {w} outside [0, 1]")));
        }
        Ok(Cdf::Mixture { w, a: Arc::new(a), b: Arc::new(b) })
    }

    pub fn sqrt_companion(base: Cdf) -> Self {
        Cdf::SqrtCompanion(Arc::new(base))
    }

    pub fn custom(inner: impl UnivariateCdf + 'static) -> Self {
        Cdf::Custom(Arc::new(inner))
    }

    /// `F(x)`. Accepts `±inf`; a NaN argument yields NaN.
    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self {
            Cdf::Uniform { a, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Cdf::Power { alpha } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    x.powf(*alpha)
                }
            }
            Cdf::Normal { mu, sigma } => normal_cdf((x - mu) / sigma),
            Cdf::TruncatedNormal { mu, sigma, lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    let pl = normal_cdf((lo - mu) / sigma);
                    let ph = normal_cdf((hi - mu) / sigma);
                    ((normal_cdf((x - mu) / sigma) - pl) / (ph - pl)).clamp(0.0, 1.0)
                }
            }
            Cdf::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Cdf::Discrete(s) | Cdf::Empirical(s) => s.eval(x),
            Cdf::Mixture { w, a, b } => w * a.eval(x) + (1.0 - w) * b.eval(x),
            Cdf::SqrtCompanion(base) => {
                let f = base.eval(x);
                (2.0 * f.sqrt() - f).clamp(0.0, 1.0)
            }
            Cdf::Custom(c) => c.eval(x).clamp(0.0, 1.0),
        }
    }

    /// `F(x)` with the argument checked.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(invalid("cdf argument is NaN"));
        }
        Ok(self.eval(x))
    }

    /// Left limit `F(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self {
            Cdf::Discrete(s) | Cdf::Empirical(s) => s.eval_left(x),
            Cdf::Mixture { w, a, b } => w * a.eval_left(x) + (1.0 - w) * b.eval_left(x),
            Cdf::SqrtCompanion(base) => {
                let f = base.eval_left(x);
                (2.0 * f.sqrt() - f).clamp(0.0, 1.0)
            }
            _ if self.is_continuous() => self.eval(x),
            _ => {
                // Generic fallback: approach from the left.
                let h = f64::EPSILON * x.abs().max(1.0) * 16.0;
                self.eval(x - h)
            }
        }
    }

    /// Generalized inverse `inf{x : F(x) >= t}` with `inf ∅ = +inf`.
    /// Returns NaN for `t` outside `[0, 1]`.
    pub fn quantile(&self, t: f64) -> f64 {
        if !(0.0..=1.0).contains(&t) {
            return f64::NAN;
        }
        if t == 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            Cdf::Uniform { a, b } => {
                if t == 1.0 {
                    *b
                } else {
                    a + t * (b - a)
                }
            }
            Cdf::Power { alpha } => {
                if t == 1.0 {
                    1.0
                } else {
                    t.powf(1.0 / alpha)
                }
            }
            Cdf::Normal { mu, sigma } => mu + sigma * normal_quantile(t),
            Cdf::TruncatedNormal { mu, sigma, lo, hi } => {
                if t == 1.0 {
                    return *hi;
                }
                let pl = normal_cdf((lo - mu) / sigma);
                let ph = normal_cdf((hi - mu) / sigma);
                (mu + sigma * normal_quantile(pl + t * (ph - pl))).clamp(*lo, *hi)
            }
            Cdf::Exponential { rate } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    -(-t).ln_1p() / rate
                }
            }
            Cdf::Discrete(s) | Cdf::Empirical(s) => s.quantile(t),
            Cdf::SqrtCompanion(base) => {
                let s = 1.0 - (1.0 - t).sqrt();
                base.quantile((s * s).clamp(0.0, 1.0))
            }
            Cdf::Custom(c) => match c.quantile(t) {
                Some(q) => q,
                None => self.bisect_quantile(t),
            },
            Cdf::Mixture { .. } => self.bisect_quantile(t),
        }
    }

    /// Generalized inverse with the argument checked.
    pub fn try_quantile(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("probability {t} outside [0, 1]")));
        }
        Ok(self.quantile(t))
    }

    fn bisect_quantile(&self, t: f64) -> f64 {
        let (slo, shi) = self.support();
        let mut lo = if slo.is_finite() { slo } else { -1.0 };
        let mut hi = if shi.is_finite() { shi } else { 1.0 };
        if self.eval(lo) >= t {
            if slo.is_finite() {
                return slo;
            }
            let mut step = 1.0;
            while self.eval(lo) >= t && lo > -1e300 {
                hi = lo;
                lo -= step;
                step *= 2.0;
            }
        }
        if self.eval(hi) < t {
            if shi.is_finite() {
                return f64::INFINITY;
            }
            let mut step = 1.0;
            while self.eval(hi) < t && hi < 1e300 {
                lo = hi;
                hi += step;
                step *= 2.0;
            }
            if self.eval(hi) < t {
                return f64::INFINITY;
            }
        }
        first_true(|x| self.eval(x) >= t, lo, hi, 0.0)
    }

    /// Lebesgue density where the distribution is absolutely continuous.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Cdf::Uniform { a, b } => Some(if x >= *a && x <= *b { 1.0 / (b - a) } else { 0.0 }),
            Cdf::Power { alpha } => Some(if x > 0.0 && x <= 1.0 {
                alpha * x.powf(alpha - 1.0)
            } else {
                0.0
            }),
            Cdf::Normal { mu, sigma } => Some(normal_pdf((x - mu) / sigma) / sigma),
            Cdf::TruncatedNormal { mu, sigma, lo, hi } => Some(if x >= *lo && x <= *hi {
                let pl = normal_cdf((lo - mu) / sigma);
                let ph = normal_cdf((hi - mu) / sigma);
                normal_pdf((x - mu) / sigma) / (sigma * (ph - pl))
            } else {
                0.0
            }),
            Cdf::Exponential { rate } => Some(if x >= 0.0 { rate * (-rate * x).exp() } else { 0.0 }),
            Cdf::Discrete(_) | Cdf::Empirical(_) => None,
            Cdf::Mixture { w, a, b } => Some(w * a.density(x)? + (1.0 - w) * b.density(x)?),
            Cdf::SqrtCompanion(base) => {
                let f = base.eval(x);
                let d = base.density(x)?;
                if f <= 0.0 {
                    // limit of f (1/sqrt(F) - 1) depends on the base; report
                    // the one-sided value from just inside the support
                    return Some(if d == 0.0 { 0.0 } else { f64::INFINITY });
                }
                Some(d * (1.0 / f.sqrt() - 1.0))
            }
            Cdf::Custom(c) => c.density(x),
        }
    }

    /// Closed support `(lo, hi)`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Cdf::Uniform { a, b } => (*a, *b),
            Cdf::Power { .. } => (0.0, 1.0),
            Cdf::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Cdf::TruncatedNormal { lo, hi, .. } => (*lo, *hi),
            Cdf::Exponential { .. } => (0.0, f64::INFINITY),
            Cdf::Discrete(s) | Cdf::Empirical(s) => {
                // atoms with zero mass at the ends do not belong to the support
                let first = s.masses.iter().position(|&m| m > 0.0).unwrap_or(0);
                let last = s.masses.iter().rposition(|&m| m > 0.0).unwrap_or(0);
                (s.atoms[first], s.atoms[last])
            }
            Cdf::Mixture { w, a, b } => {
                if *w == 1.0 {
                    a.support()
                } else if *w == 0.0 {
                    b.support()
                } else {
                    let (al, ah) = a.support();
                    let (bl, bh) = b.support();
                    (al.min(bl), ah.max(bh))
                }
            }
            Cdf::SqrtCompanion(base) => base.support(),
            Cdf::Custom(c) => c.support(),
        }
    }

    /// Support with infinite ends replaced by the `TAIL_EPS` and
    /// `1 - TAIL_EPS` quantiles.
    pub fn grid_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        let lo = if lo.is_finite() { lo } else { self.quantile(TAIL_EPS) };
        let hi = if hi.is_finite() { hi } else { self.quantile(1.0 - TAIL_EPS) };
        (lo, hi)
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            Cdf::Discrete(_) | Cdf::Empirical(_) => false,
            Cdf::Mixture { w, a, b } => {
                (*w == 0.0 || a.is_continuous()) && (*w == 1.0 || b.is_continuous())
            }
            Cdf::SqrtCompanion(base) => base.is_continuous(),
            Cdf::Custom(c) => c.is_continuous(),
            _ => true,
        }
    }

    /// Points of discontinuity with their jump sizes, sorted by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Cdf::Discrete(s) | Cdf::Empirical(s) => s
                .atoms
                .iter()
                .zip(&s.masses)
                .filter(|(_, &m)| m > 0.0)
                .map(|(&a, &m)| (a, m))
                .collect(),
            Cdf::Mixture { w, a, b } => {
                let mut pts: Vec<f64> = a.atoms().into_iter().chain(b.atoms()).map(|p| p.0).collect();
                pts.sort_by(|x, y| x.total_cmp(y));
                pts.dedup();
                let _ = w;
                pts.into_iter()
                    .map(|x| (x, self.eval(x) - self.eval_left(x)))
                    .filter(|p| p.1 > 0.0)
                    .collect()
            }
            Cdf::SqrtCompanion(base) => base
                .atoms()
                .into_iter()
                .map(|(x, _)| (x, self.eval(x) - self.eval_left(x)))
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Cdf::uniform(0.0, 1.0).unwrap().eval(0.3), 0.3);
        assert_eq!(Cdf::power(2.0).unwrap().eval(0.5), 0.25);
        let d = Cdf::discrete(vec![0.0, 1.0], vec![0.2, 0.8]).unwrap();
        assert_eq!(d.eval(0.0), 0.2);
        assert_eq!(d.eval(-0.1), 0.0);
        assert_eq!(d.eval(1.0), 1.0);
        assert_eq!(d.eval_left(1.0), 0.2);
    }

    #[test]
    fn nan_argument_rejected() {
        let u = Cdf::uniform(0.0, 1.0).unwrap();
        assert!(u.try_eval(f64::NAN).is_err());
        assert_eq!(u.try_eval(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(u.try_eval(f64::NEG_INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(Cdf::uniform(0.0, 1.0).unwrap().quantile(0.7), 0.7);
        let d = Cdf::discrete(vec![0.0, 1.0], vec![0.2, 0.8]).unwrap();
        assert_eq!(d.quantile(0.5), 1.0);
        assert_eq!(d.quantile(0.2), 0.0);
        assert!((Cdf::power(2.0).unwrap().quantile(0.25) - 0.5).abs() < 1e-15);
        assert!(d.try_quantile(1.5).is_err());
        assert!(d.try_quantile(-0.1).is_err());
        assert_eq!(d.quantile(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn bad_parameters() {
        assert!(Cdf::uniform(1.0, 1.0).is_err());
        assert!(Cdf::power(0.0).is_err());
        assert!(Cdf::normal(0.0, -1.0).is_err());
        assert!(Cdf::exponential(0.0).is_err());
        assert!(Cdf::discrete(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Cdf::discrete(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(Cdf::empirical(vec![]).is_err());
    }

    #[test]
    fn empirical_merges_ties() {
        let e = Cdf::empirical(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.eval(1.0), 0.25);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(1.999), 0.25);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.atoms(), vec![(1.0, 0.25), (2.0, 0.5), (3.0, 0.25)]);
    }

    #[test]
    fn mixture_quantile_by_bisection() {
        let g = Cdf::mixture(0.5, Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()).unwrap();
        // G(x) = (x^2 + x)/2 = 0.375 at x = 0.5
        assert!((g.quantile(0.375) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normal_tail_truncation() {
        let n = Cdf::normal(0.0, 1.0).unwrap();
        let (lo, hi) = n.grid_bounds();
        assert!((n.eval(lo) - TAIL_EPS).abs() < 1e-20);
        // 1 - TAIL_EPS carries a relative error of about 1e-7 in the upper tail
        assert!((lo + hi).abs() < 1e-7, "{lo} {hi}");
    }

    #[test]
    fn sqrt_companion_inverse() {
        let c = Cdf::sqrt_companion(Cdf::uniform(0.0, 1.0).unwrap());
        for &t in &[0.1, 0.5, 0.9] {
            let x = c.quantile(t);
            assert!((c.eval(x) - t).abs() < 1e-14);
        }
    }
}
