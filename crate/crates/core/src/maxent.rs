//! Maximum-entropy joint laws of ordered pairs.
//!
//! Within each block `(a, b)` where `H > 0` the maximizing density is
//!
//! ```text
//! f(x1, x2) = f1(x1) f2(x2) / sqrt(H(x1) H(x2)) * exp(-(Φ(x1) - Φ(x2))),   Φ' = g / H,
//! ```
//!
//! and it vanishes across blocks. The conditional law of `X1` given `X2 = x2`
//! then has cdf `1 - sqrt(H(x1)/H(x2)) exp(-(Φ(x1) - Φ(x2)))`, which the
//! sampler inverts directly.

use crate::copula::DiagonalSection;
use crate::distcore::OrderedMarginalPair;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{gauss_kronrod15, integrate_2d, linspace, Quadrature};

const TABLE_NODES: usize = 1_025;
/// Geometric refinement steps of the table toward each block end.
const ENDPOINT_LEVELS: usize = 60;
/// Exponent beyond which `exp(-x)` underflows to zero.
const UNDERFLOW: f64 = 745.0;

fn tight() -> Quadrature {
    Quadrature::with_abs_tol(1e-13).rel(1e-13)
}

fn require_densities(pair: &OrderedMarginalPair) -> Result<()> {
    if !pair.is_continuous() {
        return Err(Error::Unsupported("maximum entropy needs absolutely continuous marginals".into()));
    }
    if !pair.has_densities() {
        return Err(Error::Unsupported("maximum entropy needs marginal densities".into()));
    }
    Ok(())
}

/// `-∫ log H dG`, or `None` when the integral diverges.
///
/// Divergence is judged by two refinements of the adaptive estimate: the
/// value must be finite, below `1e12`, and stable to `1e-6` relative.
pub fn entropy_integral(pair: &OrderedMarginalPair) -> Result<Option<f64>> {
    if !pair.is_continuous() {
        return Err(Error::Unsupported("entropy condition needs continuous marginals".into()));
    }
    let (lo, hi) = pair.grid_bounds();
    if linspace(lo, hi, pair.grid_size()).iter().all(|&x| pair.h(x) <= 0.0) {
        return Ok(None);
    }
    let g = pair.g();
    let integrand = |u: f64| -pair.h(g.quantile(u)).ln();
    let coarse = Quadrature::with_abs_tol(1e-6).depth(30).integrate(integrand, 0.0, 1.0);
    let fine = Quadrature::with_abs_tol(1e-9).depth(40).integrate(integrand, 0.0, 1.0);
    let stable = (coarse.value - fine.value).abs() <= 1e-6 * fine.value.abs().max(1.0);
    if fine.value.is_finite() && fine.value.abs() < 1e12 && stable {
        Ok(Some(fine.value))
    } else {
        Ok(None)
    }
}

/// Whether `-∫ log H dG` is finite.
pub fn entropy_condition(pair: &OrderedMarginalPair) -> Result<bool> {
    Ok(entropy_integral(pair)?.is_some())
}

/// The maximum-entropy copula density for a diagonal section, summed over
/// the intervals where `δ(t) < t`.
#[derive(Debug, Clone)]
pub struct CopulaDensity {
    delta: DiagonalSection,
}

/// Density for a diagonal with `δ(t) < t` on all of `(0, 1)`.
pub fn cbar_density(delta: &DiagonalSection) -> Result<CopulaDensity> {
    match delta.intervals() {
        [(a, b)] if *a == 0.0 && *b == 1.0 => Ok(CopulaDensity { delta: delta.clone() }),
        [] => Err(Error::WrongBranch(0.5)),
        iv => {
            let t = iv.iter().flat_map(|&(a, b)| [a, b]).find(|&t| t > 0.0 && t < 1.0).unwrap_or(0.5);
            Err(Error::WrongBranch(t))
        }
    }
}

/// Density for any diagonal; zero off the blocks `(α_j, β_j)²`.
pub fn c_density_general(delta: &DiagonalSection) -> CopulaDensity {
    CopulaDensity { delta: delta.clone() }
}

impl CopulaDensity {
    pub fn delta(&self) -> &DiagonalSection {
        &self.delta
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let d = &self.delta;
        if !d.intervals().iter().any(|&(lo, hi)| lo < a && b < hi) {
            return 0.0;
        }
        let (ga, gb) = (d.gap(a), d.gap(b));
        if ga <= 0.0 || gb <= 0.0 {
            return 0.0;
        }
        let integral = if a == b { 0.0 } else { tight().integrate(|s| 1.0 / d.gap(s), a, b).value };
        if 0.5 * integral > UNDERFLOW {
            return 0.0;
        }
        let num = d.derivative(b) * (2.0 - d.derivative(a));
        (num / (4.0 * (ga * gb).sqrt()) * (-0.5 * integral).exp()).max(0.0)
    }
}

/// A density supported on the triangle `{lo <= x2 <= x1 <= hi}`.
pub trait JointDensity: Sync {
    fn density(&self, x1: f64, x2: f64) -> f64;

    /// Disjoint ranges `(lo, hi)`; the density lives on the union of the
    /// triangles they span.
    fn blocks(&self) -> Vec<(f64, f64)>;
}

/// `-∫∫ f log f` over the triangles of `d`, with `0 log 0 = 0`.
pub fn differential_entropy<D: JointDensity>(d: &D) -> Result<f64> {
    let outer = Quadrature::with_abs_tol(1e-10).depth(30).exec(Execution::default());
    let inner = Quadrature::with_abs_tol(1e-10).depth(30);
    let mut total = 0.0;
    for (lo, hi) in d.blocks() {
        let r = integrate_2d(
            |x1, x2| {
                let f = d.density(x1, x2);
                if f > 0.0 {
                    -f * f.ln()
                } else {
                    0.0
                }
            },
            lo,
            hi,
            |_| lo,
            |x1| x1,
            outer,
            inner,
        );
        if !r.value.is_finite() || (!r.converged && r.error > 1e-6) {
            return Err(Error::EntropyUndefined(format!(
                "adaptive refinement did not settle on [{lo}, {hi}] (estimate {}, error {:.2e})",
                r.value, r.error
            )));
        }
        total += r.value;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
struct Block {
    /// Ends where `H` vanishes (or the support ends).
    lo: f64,
    hi: f64,
    /// Copula-scale interval `(G(lo), G(hi))`.
    u_lo: f64,
    u_hi: f64,
    nodes: Vec<f64>,
    /// `Φ` at the nodes, zero at the middle node.
    phi: Vec<f64>,
    /// `log H / 2 - Φ` at the nodes, decreasing.
    q: Vec<f64>,
}

/// The maximum-entropy joint density of an ordered pair.
#[derive(Debug, Clone)]
pub struct MaxEntDensity {
    pair: OrderedMarginalPair,
    delta: DiagonalSection,
    blocks: Vec<Block>,
}

pub fn maxent_joint_density(pair: &OrderedMarginalPair) -> Result<MaxEntDensity> {
    require_densities(pair)?;
    if pair.common_support().is_none() {
        return Err(Error::Unsupported("marginal supports differ".into()));
    }
    if !entropy_condition(pair)? {
        return Err(Error::NoMaxent);
    }
    let delta = DiagonalSection::from_pair(pair);
    let (s_lo, s_hi) = pair.support();
    let g = pair.g();
    let blocks = delta
        .intervals()
        .iter()
        .map(|&(a, b)| {
            let lo = if a == 0.0 { s_lo } else { g.quantile(a) };
            let hi = if b == 1.0 { s_hi } else { g.quantile(b) };
            build_block(pair, lo, hi, a, b)
        })
        .collect();
    Ok(MaxEntDensity { pair: pair.clone(), delta, blocks })
}

fn ratio(pair: &OrderedMarginalPair, x: f64) -> f64 {
    let h = pair.h(x);
    if h <= 0.0 {
        return f64::INFINITY;
    }
    pair.g_density(x).unwrap_or(0.0) / h
}

fn build_block(pair: &OrderedMarginalPair, lo: f64, hi: f64, u_lo: f64, u_hi: f64) -> Block {
    let g = pair.g();
    let n = TABLE_NODES - 1;
    let cos: Vec<f64> = (1..n)
        .map(|k| u_lo + (u_hi - u_lo) * 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect();
    // Halve the distance to each end repeatedly, so every table interval is
    // no longer than its distance to the singular ends of g / H.
    let (first, last) = (cos[0], cos[cos.len() - 1]);
    let head = (1..=ENDPOINT_LEVELS).rev().map(|j| u_lo + (first - u_lo) * 0.5f64.powi(j as i32));
    let tail = (1..=ENDPOINT_LEVELS).map(|j| u_hi - (u_hi - last) * 0.5f64.powi(j as i32));
    let mut nodes: Vec<f64> = head
        .chain(cos)
        .chain(tail)
        .map(|u| g.quantile(u))
        .filter(|&x| x.is_finite() && x > lo && x < hi && pair.h(x) > 0.0)
        .collect();
    nodes.dedup();
    let mid = nodes.len() / 2;
    let pieces = Execution::default().map_indexed(nodes.len().saturating_sub(1), |k| {
        tight().integrate(|s| ratio(pair, s), nodes[k], nodes[k + 1]).value
    });
    let mut phi = vec![0.0; nodes.len()];
    for k in mid + 1..nodes.len() {
        phi[k] = phi[k - 1] + pieces[k - 1];
    }
    for k in (0..mid).rev() {
        phi[k] = phi[k + 1] - pieces[k];
    }
    let q = nodes.iter().zip(&phi).map(|(&x, &p)| 0.5 * pair.h(x).ln() - p).collect();
    Block { lo, hi, u_lo, u_hi, nodes, phi, q }
}

impl Block {
    fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    fn phi(&self, pair: &OrderedMarginalPair, x: f64) -> f64 {
        let nodes = &self.nodes;
        if nodes.is_empty() {
            return 0.0;
        }
        let k = nodes.partition_point(|&n| n <= x);
        let f = |s: f64| ratio(pair, s);
        if k == 0 {
            self.phi[0] - tight().integrate(f, x, nodes[0]).value
        } else if k == nodes.len() {
            self.phi[k - 1] + tight().integrate(f, nodes[k - 1], x).value
        } else {
            self.phi[k - 1] + gauss_kronrod15(f, nodes[k - 1], x)
        }
    }

    fn q(&self, pair: &OrderedMarginalPair, x: f64) -> f64 {
        0.5 * pair.h(x).ln() - self.phi(pair, x)
    }
}

impl MaxEntDensity {
    pub fn pair(&self) -> &OrderedMarginalPair {
        &self.pair
    }

    /// The diagonal `δ_G` of the pair.
    pub fn delta(&self) -> &DiagonalSection {
        &self.delta
    }

    /// The decomposition of `{t : δ(t) < t}`.
    pub fn intervals(&self) -> &[(f64, f64)] {
        self.delta.intervals()
    }

    fn block(&self, x: f64) -> Option<&Block> {
        self.blocks.iter().find(|b| b.contains(x))
    }

    /// Joint density at `(x1, x2)`; zero unless `x1 >= x2` in a common block.
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        if x1 < x2 {
            return 0.0;
        }
        let Some(b) = self.block(x2).filter(|b| b.contains(x1)) else {
            return 0.0;
        };
        let p = &self.pair;
        let (h1, h2) = (p.h(x1), p.h(x2));
        if h1 <= 0.0 || h2 <= 0.0 {
            return 0.0;
        }
        let d1 = p.f1().density(x1).unwrap_or(0.0);
        let d2 = p.f2().density(x2).unwrap_or(0.0);
        let e = if x1 == x2 { 0.0 } else { b.phi(p, x1) - b.phi(p, x2) };
        d1 * d2 / (h1 * h2).sqrt() * (-e).exp()
    }

    /// The same density through the copula route `2 c_D(G(x1), G(x2)) g(x1) g(x2)`.
    pub fn eval_via_copula(&self, x1: f64, x2: f64) -> f64 {
        if x1 < x2 {
            return 0.0;
        }
        let p = &self.pair;
        let c = c_density_general(&self.delta).eval(p.g_eval(x1), p.g_eval(x2));
        2.0 * c * p.g_density(x1).unwrap_or(0.0) * p.g_density(x2).unwrap_or(0.0)
    }

    /// `P(X1 <= x1 | X2 = x2)`.
    pub fn conditional_cdf(&self, x1: f64, x2: f64) -> f64 {
        if x1 < x2 {
            return 0.0;
        }
        let Some(b) = self.block(x2) else {
            return 1.0;
        };
        if x1 >= b.hi {
            return 1.0;
        }
        let p = &self.pair;
        let tail = (b.q(p, x1) - b.q(p, x2)).exp();
        (1.0 - tail).clamp(0.0, 1.0)
    }

    /// Solve `P(X1 <= x1 | X2 = x2) = v` for `x1`.
    pub fn conditional_quantile(&self, x2: f64, v: f64) -> f64 {
        self.survival_quantile(x2, 1.0 - v)
    }

    /// Solve `P(X1 > x1 | X2 = x2) = s` for `x1`.
    pub fn survival_quantile(&self, x2: f64, s: f64) -> f64 {
        let Some(b) = self.block(x2) else {
            return x2;
        };
        if s >= 1.0 {
            return x2;
        }
        if s <= 0.0 {
            return b.hi;
        }
        let p = &self.pair;
        let target = b.q(p, x2) + s.ln();
        // bracket [lo, hi] with q(lo) >= target > q(hi)
        let k = b.q.partition_point(|&q| q >= target);
        let mut lo = if k == 0 { x2 } else { b.nodes[k - 1].max(x2) };
        let mut hi = if k < b.nodes.len() { b.nodes[k] } else { b.hi };
        if hi <= lo {
            return lo;
        }
        let scale = b.hi.abs().max(b.lo.abs()).max(1.0);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let qx = b.q(p, x);
            let r = qx - target;
            if r.abs() < 1e-13 {
                break;
            }
            if r > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
            // q' = -f1 / H
            let slope = -p.f1().density(x).unwrap_or(0.0) / p.h(x);
            let newton = x - r / slope;
            x = if slope < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        x
    }

    /// Map two uniforms to a draw: `X2 = F2⁻(u)`, and `X1` with conditional
    /// survival probability `v`.
    pub fn transform(&self, u: f64, v: f64) -> (f64, f64) {
        let x2 = self.pair.f2().quantile(u);
        let x1 = self.survival_quantile(x2, v).max(x2);
        (x1, x2)
    }

    /// `∫ f(x1, x2) dx2`, which should equal `f1(x1)`.
    pub fn marginal_x1(&self, x1: f64) -> f64 {
        match self.block(x1) {
            Some(b) => Quadrature::with_abs_tol(1e-11).integrate(|x2| self.eval(x1, x2), b.lo, x1).value,
            None => 0.0,
        }
    }

    /// `∫ f(x1, x2) dx1`, which should equal `f2(x2)`.
    pub fn marginal_x2(&self, x2: f64) -> f64 {
        match self.block(x2) {
            Some(b) => Quadrature::with_abs_tol(1e-11).integrate(|x1| self.eval(x1, x2), x2, b.hi).value,
            None => 0.0,
        }
    }

    fn finite_blocks(&self) -> Vec<(f64, f64)> {
        let (gl, gh) = self.pair.grid_bounds();
        self.blocks.iter().map(|b| (b.lo.max(gl), b.hi.min(gh))).collect()
    }

    /// Total mass, by 2-D quadrature over the triangles.
    pub fn total_mass(&self) -> f64 {
        let outer = Quadrature::with_abs_tol(1e-10).depth(30).exec(Execution::default());
        let inner = Quadrature::with_abs_tol(1e-10).depth(30);
        self.finite_blocks()
            .into_iter()
            .map(|(lo, hi)| integrate_2d(|a, b| self.eval(a, b), lo, hi, |_| lo, |x| x, outer, inner).value)
            .sum()
    }

    /// Entropy of the copula density, `-∫∫ c log c`, computed in copula
    /// scale.
    fn copula_entropy(&self) -> Result<f64> {
        let p = &self.pair;
        let g = p.g();
        let outer = Quadrature::with_abs_tol(1e-10).depth(30).exec(Execution::default());
        let inner = Quadrature::with_abs_tol(1e-10).depth(30);
        let mut total = 0.0;
        for b in &self.blocks {
            let r = integrate_2d(
                |u, v| {
                    let (x1, x2) = (g.quantile(u), g.quantile(v));
                    let gg = p.g_density(x1).unwrap_or(0.0) * p.g_density(x2).unwrap_or(0.0);
                    if gg <= 0.0 {
                        return 0.0;
                    }
                    let c = self.eval(x1, x2) / (2.0 * gg);
                    if c > 0.0 {
                        -2.0 * c * c.ln()
                    } else {
                        0.0
                    }
                },
                b.u_lo,
                b.u_hi,
                |_| b.u_lo,
                |u| u,
                outer,
                inner,
            );
            if !r.value.is_finite() || (!r.converged && r.error > 1e-6) {
                return Err(Error::EntropyUndefined("copula entropy integral did not settle".into()));
            }
            total += r.value;
        }
        Ok(total)
    }

    /// Entropy by direct quadrature of `-f log f` and by the decomposition
    /// `ent(c) - log 2 - 2 ∫ g log g`.
    pub fn entropy(&self) -> Result<EntropyReport> {
        let direct = differential_entropy(self)?;
        let p = &self.pair;
        let (gl, gh) = p.grid_bounds();
        let glog = Quadrature::with_abs_tol(1e-11).integrate(
            |x| match p.g_density(x) {
                Some(v) if v > 0.0 => v * v.ln(),
                _ => 0.0,
            },
            gl,
            gh,
        );
        let decomposition = self.copula_entropy()? - std::f64::consts::LN_2 - 2.0 * glog.value;
        Ok(EntropyReport { direct, decomposition })
    }
}

impl JointDensity for MaxEntDensity {
    fn density(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }

    fn blocks(&self) -> Vec<(f64, f64)> {
        self.finite_blocks()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// `-∫∫ f log f`.
    pub direct: f64,
    /// Copula entropy minus `log 2` minus twice the entropy term of `g`.
    pub decomposition: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::Cdf;

    fn example61() -> OrderedMarginalPair {
        OrderedMarginalPair::new(Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn condition_examples() {
        assert!(entropy_condition(&example61()).unwrap());
        let e = OrderedMarginalPair::new(Cdf::exponential(1.0).unwrap(), Cdf::exponential(2.0).unwrap()).unwrap();
        assert!(entropy_condition(&e).unwrap());
        let u = Cdf::uniform(0.0, 1.0).unwrap();
        let same = OrderedMarginalPair::new(u.clone(), u).unwrap();
        assert!(!entropy_condition(&same).unwrap());
        assert_eq!(maxent_joint_density(&same).unwrap_err(), Error::NoMaxent);
    }

    #[test]
    fn independence_diagonal_gives_unit_density() {
        let c = cbar_density(&DiagonalSection::power(2.0).unwrap()).unwrap();
        for &(u, v) in &[(0.5, 0.5), (0.1, 0.8), (0.9, 0.3), (0.01, 0.02)] {
            assert!((c.eval(u, v) - 1.0).abs() < 1e-9, "{u} {v} {}", c.eval(u, v));
        }
    }

    #[test]
    fn wrong_branch_and_blocks() {
        assert_eq!(cbar_density(&DiagonalSection::comonotone()).unwrap_err().name(), "wrong-branch");
        let d = DiagonalSection::table(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.0, 0.0, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(cbar_density(&d).unwrap_err().name(), "wrong-branch");
        let c = c_density_general(&d);
        assert_eq!(c.eval(0.3, 0.7), 0.0);
        assert!(c.eval(0.6, 0.8) > 0.0);
        assert!(c.eval(0.1, 0.4) > 0.0);
        // flat pieces of δ carry no mass
        assert_eq!(c.eval(0.6, 0.7), 0.0);
        assert_eq!(c_density_general(&DiagonalSection::comonotone()).eval(0.3, 0.4), 0.0);
    }

    #[test]
    fn example61_density() {
        let m = maxent_joint_density(&example61()).unwrap();
        assert!((m.eval(0.5, 0.25) - 1.0 / 0.5625).abs() < 1e-9);
        assert_eq!(m.eval(0.25, 0.5), 0.0);
        let via = m.eval_via_copula(0.5, 0.25);
        assert!((via - 1.0 / 0.5625).abs() < 1e-6, "{via}");
    }

    #[test]
    fn example61_conditional_sampler() {
        let m = maxent_joint_density(&example61()).unwrap();
        let (x1, x2) = m.transform(0.25, 0.25);
        assert_eq!(x2, 0.25);
        assert!((x1 - 0.625).abs() < 1e-10, "{x1}");
        for &(u, v) in &[(0.1, 0.9), (0.7, 0.3), (0.95, 0.99)] {
            let (x1, x2) = m.transform(u, v);
            assert!((x1 - (1.0 - v.sqrt() * (1.0 - u))).abs() < 1e-9);
            assert!(x1 >= x2);
        }
    }

    #[test]
    fn triangle_uniform_entropy() {
        struct Flat;
        impl JointDensity for Flat {
            fn density(&self, _: f64, _: f64) -> f64 {
                2.0
            }
            fn blocks(&self) -> Vec<(f64, f64)> {
                vec![(0.0, 1.0)]
            }
        }
        assert!((differential_entropy(&Flat).unwrap() + std::f64::consts::LN_2).abs() < 1e-12);
    }
}
