//! Exact samplers for the comonotone, minimal and maximum-entropy laws, the
//! exchangeable-pair representation, and the multivariate order-statistics
//! formula.

mod order_stats;
mod rng;

pub use order_stats::{
    multivariate_minlevel_prob, verify_order_statistics_representation, OrderStatsReport,
};
pub use rng::{open_uniform, RngStream, CHUNK};

use rand::RngCore;

use crate::dependence::{reflection_hypotheses, Reflection};
use crate::distcore::OrderedMarginalPair;
use crate::error::Result;
use crate::exec::Execution;
use crate::maxent::{maxent_joint_density, MaxEntDensity};
use crate::numeric::last_true;

/// Draws `(x1[i], x2[i])` with `x1[i] >= x2[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SamplePairs {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl SamplePairs {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Self {
        let (x1, x2) = pairs.into_iter().unzip();
        SamplePairs { x1, x2 }
    }

    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x1.iter().copied().zip(self.x2.iter().copied())
    }

    pub fn is_ordered(&self) -> bool {
        self.iter().all(|(a, b)| a >= b)
    }
}

/// `X1 = F1⁻(U)`, `X2 = F2⁻(U)` for one uniform `U`.
pub fn sample_comonotone(pair: &OrderedMarginalPair, rng: RngStream, n: usize) -> SamplePairs {
    sample_comonotone_with(pair, rng, n, Execution::default())
}

pub fn sample_comonotone_with(pair: &OrderedMarginalPair, rng: RngStream, n: usize, exec: Execution) -> SamplePairs {
    SamplePairs::from_pairs(rng.generate(n, exec, |r| comonotone_point(pair, open_uniform(r))))
}

/// The comonotone draw for a given uniform.
pub fn comonotone_point(pair: &OrderedMarginalPair, u: f64) -> (f64, f64) {
    let x2 = pair.f2().quantile(u);
    let x1 = pair.f1().quantile(u).max(x2);
    (x1, x2)
}

/// Inverse-transform sampler for the minimal law `L` of a pair with
/// strictly unimodal `H`.
#[derive(Debug, Clone)]
pub struct LSampler {
    pair: OrderedMarginalPair,
    r: f64,
    a1: f64,
    a2: f64,
    hr: f64,
    xu: f64,
}

impl LSampler {
    pub fn new(pair: &OrderedMarginalPair) -> Result<Self> {
        let r = reflection_hypotheses(pair, "sample_l_unimodal")?;
        let (a1, a2) = (pair.f1().eval(r), pair.f2().eval(r));
        Ok(LSampler { pair: pair.clone(), r, a1, a2, hr: pair.h(r), xu: pair.grid_bounds().1 })
    }

    /// Masses of the lower diagonal, off-diagonal and upper diagonal pieces.
    pub fn piece_masses(&self) -> (f64, f64, f64) {
        (self.a1, self.hr, 1.0 - self.a2)
    }

    pub fn mode(&self) -> f64 {
        self.r
    }

    /// Map one uniform to a draw from `L`.
    pub fn point(&self, u: f64) -> (f64, f64) {
        let p = &self.pair;
        if u <= self.a1 {
            let s = p.f1().quantile(u);
            return (s, s);
        }
        if u >= self.a2 {
            let s = p.f2().quantile(u);
            return (s, s);
        }
        let level = self.hr - (u - self.a1);
        let s = last_true(|s| p.h(s) >= level, self.r, self.xu, 0.0);
        let t = Reflection::new(p).map(|refl| refl.t(s)).unwrap_or(self.r);
        (s, t.min(s))
    }
}

/// Draws from `L` by its three pieces: the diagonal below `r`, the
/// off-diagonal branch `(s, t(s))`, and the diagonal above `r`.
pub fn sample_l_unimodal(pair: &OrderedMarginalPair, rng: RngStream, n: usize) -> Result<SamplePairs> {
    sample_l_unimodal_with(pair, rng, n, Execution::default())
}

pub fn sample_l_unimodal_with(
    pair: &OrderedMarginalPair,
    rng: RngStream,
    n: usize,
    exec: Execution,
) -> Result<SamplePairs> {
    let sampler = LSampler::new(pair)?;
    Ok(SamplePairs::from_pairs(rng.generate(n, exec, |r| sampler.point(open_uniform(r)))))
}

/// `X2 = F2⁻(U)`, then `X1` by inverting the conditional law of the
/// maximum-entropy density.
pub fn sample_maxent(pair: &OrderedMarginalPair, rng: RngStream, n: usize) -> Result<SamplePairs> {
    let density = maxent_joint_density(pair)?;
    Ok(sample_maxent_from(&density, rng, n, Execution::default()))
}

pub fn sample_maxent_from(density: &MaxEntDensity, rng: RngStream, n: usize, exec: Execution) -> SamplePairs {
    SamplePairs::from_pairs(rng.generate(n, exec, |r| {
        let u = open_uniform(r);
        let v = open_uniform(r);
        density.transform(u, v)
    }))
}

/// Randomly permute each pair, giving an exchangeable `(V1, V2)` whose
/// maximum and minimum are the input.
pub fn exchangeable_pair(samples: &SamplePairs, rng: RngStream) -> (Vec<f64>, Vec<f64>) {
    let coins = rng.generate(samples.len(), Execution::default(), |r| r.next_u32() & 1 == 1);
    samples
        .iter()
        .zip(coins)
        .map(|((a, b), swap)| if swap { (b, a) } else { (a, b) })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::Cdf;

    fn example61() -> OrderedMarginalPair {
        OrderedMarginalPair::new(Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn l_sampler_mapping() {
        let s = LSampler::new(&example61()).unwrap();
        let (a, b) = s.point(0.16);
        assert!((a - 0.4).abs() < 1e-15 && (b - 0.4).abs() < 1e-15);
        let (a, b) = s.point(0.3125);
        assert!((a - 0.75).abs() < 1e-12 && (b - 0.25).abs() < 1e-12, "{a} {b}");
        assert_eq!(s.point(0.7), (0.7, 0.7));
        let (m1, m2, m3) = s.piece_masses();
        assert!((m1 + m2 + m3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comonotone_mapping() {
        assert_eq!(comonotone_point(&example61(), 0.25), (0.5, 0.25));
        let u = Cdf::uniform(0.0, 1.0).unwrap();
        let same = OrderedMarginalPair::new(u.clone(), u).unwrap();
        let s = sample_comonotone(&same, RngStream::new(3), 1000);
        assert!(s.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn l_sampler_rejects_identical() {
        let u = Cdf::uniform(0.0, 1.0).unwrap();
        let same = OrderedMarginalPair::new(u.clone(), u).unwrap();
        assert_eq!(sample_l_unimodal(&same, RngStream::new(1), 10).unwrap_err().name(), "unsupported");
    }

    #[test]
    fn exchangeable_recovers_order() {
        let s = sample_comonotone(&example61(), RngStream::new(5), 5000);
        let (v1, v2) = exchangeable_pair(&s, RngStream::new(6));
        for (i, (a, b)) in s.iter().enumerate() {
            assert_eq!(v1[i].max(v2[i]), a);
            assert_eq!(v1[i].min(v2[i]), b);
        }
        let swapped = v1.iter().zip(&s.x1).filter(|(v, x)| v != x).count();
        assert!((swapped as f64 / 5000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn samplers_are_deterministic() {
        let p = example61();
        let a = sample_l_unimodal(&p, RngStream::new(9), 3000).unwrap();
        let b = sample_l_unimodal_with(&p, RngStream::new(9), 3000, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.is_ordered());
    }
}
