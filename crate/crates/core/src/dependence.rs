//! Kendall's tau and Spearman's rho: sample estimators and the minima over
//! all joint laws of an ordered pair.

use crate::distcore::OrderedMarginalPair;
use crate::error::{invalid, Error, Result};
use crate::numeric::{first_true, linspace, Quadrature};

const RELATION_GRID: usize = 1_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceReport {
    pub tau_min: f64,
    /// Absent when the unimodality hypotheses fail.
    pub rho_min: Option<f64>,
    pub r: Option<f64>,
    pub quadrature_error_estimate: f64,
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("need at least two pairs, got {n}")));
    }
    Ok(())
}

/// Number of tied pairs `Σ t(t-1)/2` over runs of equal keys in a sorted
/// sequence.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        prev = Some(v);
    }
    total + run * (run + 1) / 2
}

/// Sort `v` in place, returning the number of inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau_sample(x1: &[f64], x2: &[f64]) -> Result<f64> {
    let n = x1.len();
    if x2.len() != n {
        return Err(invalid("columns differ in length"));
    }
    check_len(n)?;
    if x1.iter().chain(x2).any(|v| v.is_nan()) {
        return Err(invalid("NaN in sample"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x1[a].total_cmp(&x1[b]).then(x2[a].total_cmp(&x2[b])));
    let t1 = tied_pairs(idx.iter().map(|&i| x1[i].to_bits()));
    let t12 = tied_pairs(idx.iter().map(|&i| (x1[i].to_bits(), x2[i].to_bits())));
    let mut ys: Vec<f64> = idx.iter().map(|&i| x2[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let t2 = tied_pairs(ys.iter().map(|v| v.to_bits()));
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let s = n0 as f64 - t1 as f64 - t2 as f64 + t12 as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - t1) as f64 * (n0 - t2) as f64).sqrt();
    if denom == 0.0 {
        return Err(invalid("a column is constant"));
    }
    Ok((s / denom).clamp(-1.0, 1.0))
}

fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho as the Pearson correlation of mid-ranks.
pub fn spearman_rho_sample(x1: &[f64], x2: &[f64]) -> Result<f64> {
    let n = x1.len();
    if x2.len() != n {
        return Err(invalid("columns differ in length"));
    }
    check_len(n)?;
    let (r1, r2) = (mid_ranks(x1), mid_ranks(x2));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in r1.iter().zip(&r2) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(invalid("a column is constant"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn require_continuous(pair: &OrderedMarginalPair, what: &'static str) -> Result<()> {
    if pair.is_continuous() {
        Ok(())
    } else {
        Err(Error::UnsupportedForDiscrete(what))
    }
}

fn tau_integral(pair: &OrderedMarginalPair) -> Result<(f64, f64)> {
    require_continuous(pair, "min_kendall_tau")?;
    let (f1, f2) = (pair.f1(), pair.f2());
    let q = Quadrature::default().integrate(|u| f1.eval(f2.quantile(u)), 0.0, 1.0);
    Ok(((4.0 * q.value - 1.0).clamp(-1.0, 1.0), 4.0 * q.error))
}

/// `τ_min = 4 ∫₀¹ F1(F2⁻(u)) du - 1`.
pub fn min_kendall_tau(pair: &OrderedMarginalPair) -> Result<f64> {
    tau_integral(pair).map(|t| t.0)
}

/// Checked hypotheses for the reflection map `t(s)`.
pub(crate) struct Reflection<'a> {
    pair: &'a OrderedMarginalPair,
    pub(crate) r: f64,
    xl: f64,
}

impl<'a> Reflection<'a> {
    pub(crate) fn new(pair: &'a OrderedMarginalPair) -> Result<Self> {
        let p = pair.profile();
        let r = match (p.is_unimodal, p.r) {
            (true, Some(r)) => r,
            _ => return Err(Error::Unsupported("H is not unimodal".into())),
        };
        let xl = pair.grid_bounds().0;
        Ok(Reflection { pair, r, xl })
    }

    pub(crate) fn t(&self, s: f64) -> f64 {
        if s <= self.r {
            return s;
        }
        let level = self.pair.h(s);
        first_true(|t| self.pair.h(t) >= level, self.xl, self.r, 0.0)
    }
}

/// The point `t(s) <= r` with `H(t(s)) = H(s)`, for `s >= r`.
pub fn solve_t(pair: &OrderedMarginalPair, s: f64) -> Result<f64> {
    require_continuous(pair, "solve_t")?;
    let refl = Reflection::new(pair)?;
    if s < refl.r {
        return Err(invalid(format!("s = {s} lies left of the mode r = {}", refl.r)));
    }
    Ok(refl.t(s))
}

/// Reject pairs that are not continuous with a common support interval and
/// a strictly unimodal `H`; returns the mode `r`.
pub(crate) fn reflection_hypotheses(pair: &OrderedMarginalPair, what: &'static str) -> Result<f64> {
    require_continuous(pair, what)?;
    if pair.common_support().is_none() {
        return Err(Error::Unsupported("marginals do not share a support interval".into()));
    }
    let refl = Reflection::new(pair)?;
    let r = refl.r;
    if pair.h(r) <= 0.0 {
        return Err(Error::Unsupported("H vanishes identically".into()));
    }
    let (lo, hi) = pair.grid_bounds();
    let xs = linspace(lo, hi, pair.grid_size());
    for w in xs.windows(2) {
        let (a, b) = (pair.h(w[0]), pair.h(w[1]));
        if a == b && a > 1e-12 {
            return Err(Error::Unsupported(format!("H is flat near x = {}", w[0])));
        }
    }
    Ok(r)
}

/// `ρ_min = 12 (I1 + I2 + I3) - 3`, each term integrated in probability
/// scale.
pub fn min_spearman_rho(pair: &OrderedMarginalPair) -> Result<f64> {
    rho_with_error(pair).map(|v| v.0)
}

fn rho_with_error(pair: &OrderedMarginalPair) -> Result<(f64, f64)> {
    reflection_hypotheses(pair, "min_spearman_rho")?;
    let refl = Reflection::new(pair)?;
    let (f1, f2) = (pair.f1(), pair.f2());
    let (a1, a2) = (f1.eval(refl.r), f2.eval(refl.r));
    let quad = Quadrature::default();
    let i1 = quad.integrate(|u| u * f2.eval(f1.quantile(u)), 0.0, a1);
    let i2 = quad.integrate(|u| u * f2.eval(refl.t(f1.quantile(u))), a1, 1.0);
    let i3 = quad.integrate(
        |w| {
            let s = f2.quantile(w);
            f1.eval(s) * (w - f2.eval(refl.t(s)))
        },
        a2,
        1.0,
    );
    let rho = 12.0 * (i1.value + i2.value + i3.value) - 3.0;
    Ok((rho.clamp(-1.0, 1.0), 12.0 * (i1.error + i2.error + i3.error)))
}

/// `-1/3`, after checking `F2 = 2 sqrt(F1) - F1` within `1e-9` on a grid.
pub fn min_tau_independent_v(pair: &OrderedMarginalPair) -> Result<f64> {
    let (lo, hi) = pair.grid_bounds();
    for x in linspace(lo, hi, RELATION_GRID) {
        let a = pair.f1().eval(x);
        let want = 2.0 * a.sqrt() - a;
        if (pair.f2().eval(x) - want).abs() > 1e-9 {
            return Err(invalid(format!("F2 differs from 2 sqrt(F1) - F1 at x = {x}")));
        }
    }
    if pair.h(pair.profile().r.unwrap_or(lo)) <= 0.0 {
        return Err(invalid("F2 equals F1"));
    }
    Ok(-1.0 / 3.0)
}

/// Minimal tau, and minimal rho when the pair meets its hypotheses.
pub fn dependence_report(pair: &OrderedMarginalPair) -> Result<DependenceReport> {
    let (tau_min, tau_err) = tau_integral(pair)?;
    let (rho_min, rho_err) = match rho_with_error(pair) {
        Ok((v, e)) => (Some(v), e),
        Err(Error::Unsupported(_)) => (None, 0.0),
        Err(e) => return Err(e),
    };
    Ok(DependenceReport { tau_min, rho_min, r: pair.profile().r, quadrature_error_estimate: tau_err + rho_err })
}
