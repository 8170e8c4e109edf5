use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::distcore::Cdf;
use crate::error::{invalid, Result};
use crate::numeric::special::binomial;

const MAX_N: usize = 4;
const MAX_ATOMS: usize = 6;

/// `P(V_1 <= x, ..., V_j <= x) = C(n, j)⁻¹ Σ_{ℓ=1}^{n-j+1} C(n-ℓ, j-1) F_ℓ(x)`
/// for cdfs ordered `F_1 <= ... <= F_n`.
pub fn multivariate_minlevel_prob(cdfs: &[Cdf], j: usize, x: f64) -> Result<f64> {
    let n = cdfs.len();
    if j == 0 || j > n {
        return Err(invalid(format!("level j = {j} outside 1..={n}")));
    }
    let (n64, j64) = (n as u64, j as u64);
    let sum: f64 = (1..=n - j + 1)
        .map(|l| binomial(n64 - l as u64, j64 - 1) * cdfs[l - 1].eval(x))
        .sum();
    Ok(crate::clamp_prob(sum / binomial(n64, j64)))
}

fn choose(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite probability")
}

/// Outcome of the exact order-statistics check.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatsReport {
    pub n: usize,
    /// Largest `|P(V_(i) <= z) - F_i(z)|` over `i` and atoms `z`, with
    /// `P(V_(i) <= z)` recovered from the level probabilities by inclusion-exclusion.
    pub max_deviation: f64,
    /// Largest gap between the level probabilities of the exchangeable law
    /// and the closed-form levels.
    pub level_deviation: f64,
    /// First violated constraint `(i or j, z)`, if any.
    pub counterexample: Option<(usize, f64)>,
    /// Law of `(X_1, ..., X_n)` as atom tuples with exact probabilities.
    pub joint: Vec<(Vec<f64>, BigRational)>,
}

impl OrderStatsReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Exact `P(X = tuple)`.
    pub fn joint_probability(&self, tuple: &[f64]) -> BigRational {
        self.joint
            .iter()
            .filter(|(t, _)| t.as_slice() == tuple)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

/// Brute-force check of the order-statistics representation for discrete
/// marginals `F_1 <= ... <= F_n` (`n <= 4`, at most six atoms each) in exact
/// rational arithmetic.
///
/// Builds the comonotone coupling `X_i = F_i⁻(U)`, symmetrizes it over all
/// permutations into an exchangeable `V`, and checks both the level
/// probabilities of `V` and the marginals of its order statistics.
pub fn verify_order_statistics_representation(cdfs: &[Cdf]) -> Result<OrderStatsReport> {
    let n = cdfs.len();
    if !(1..=MAX_N).contains(&n) {
        return Err(invalid(format!("need 1..={MAX_N} marginals, got {n}")));
    }
    let mut atoms: Vec<f64> = Vec::new();
    for f in cdfs {
        if f.is_continuous() {
            return Err(invalid("order-statistics check needs discrete marginals"));
        }
        let a = f.atoms();
        if a.len() > MAX_ATOMS {
            return Err(invalid(format!("at most {MAX_ATOMS} atoms per marginal, got {}", a.len())));
        }
        atoms.extend(a.into_iter().map(|p| p.0));
    }
    atoms.sort_by(|a, b| a.total_cmp(b));
    atoms.dedup();
    // cum[i][k] = F_i(atoms[k])
    let cum: Vec<Vec<BigRational>> = cdfs.iter().map(|f| atoms.iter().map(|&z| rat(f.eval(z))).collect()).collect();
    for i in 1..n {
        for k in 0..atoms.len() {
            if cum[i - 1][k] > cum[i][k] {
                return Err(invalid(format!("F_{} exceeds F_{} at {}", i, i + 1, atoms[k])));
            }
        }
    }
    let mut breaks: Vec<BigRational> = cum.iter().flatten().cloned().collect();
    breaks.push(BigRational::zero());
    breaks.sort();
    breaks.dedup();
    let quantile = |i: usize, u: &BigRational| -> usize {
        cum[i].iter().position(|c| c >= u).unwrap_or(atoms.len() - 1)
    };
    // comonotone law of atom-index tuples
    let mut joint: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for w in breaks.windows(2) {
        let tuple: Vec<usize> = (0..n).map(|i| quantile(i, &w[1])).collect();
        *joint.entry(tuple).or_insert_with(BigRational::zero) += &w[1] - &w[0];
    }
    // symmetrize over permutations
    let perms = permutations(n);
    let share = BigRational::new(BigInt::one(), BigInt::from(perms.len()));
    let mut v_law: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for (t, p) in &joint {
        for perm in &perms {
            let v: Vec<usize> = perm.iter().map(|&k| t[k]).collect();
            *v_law.entry(v).or_insert_with(BigRational::zero) += p * &share;
        }
    }
    let mut report = OrderStatsReport {
        n,
        max_deviation: 0.0,
        level_deviation: 0.0,
        counterexample: None,
        joint: joint
            .iter()
            .map(|(t, p)| (t.iter().map(|&k| atoms[k]).collect(), p.clone()))
            .collect(),
    };
    for (k, &z) in atoms.iter().enumerate() {
        // level[j] = P(V_1..V_j <= z)
        let mut level = vec![BigRational::one(); n + 1];
        for j in 1..=n {
            let emp: BigRational = v_law
                .iter()
                .filter(|(v, _)| v[..j].iter().all(|&a| a <= k))
                .fold(BigRational::zero(), |acc, (_, p)| acc + p);
            let formula = (1..=n - j + 1)
                .fold(BigRational::zero(), |acc, l| acc + BigRational::from(choose(n - l, j - 1)) * &cum[l - 1][k])
                / BigRational::from(choose(n, j));
            let dev = (&emp - &formula).abs().to_f64().unwrap_or(f64::INFINITY);
            report.level_deviation = report.level_deviation.max(dev);
            if dev != 0.0 && report.counterexample.is_none() {
                report.counterexample = Some((j, z));
            }
            level[j] = emp;
        }
        for i in 1..=n {
            let lo = n - i + 1;
            let mut p = BigRational::zero();
            for j in lo..=n {
                let term = BigRational::from(choose(j - 1, n - i) * choose(n, j)) * &level[j];
                if (j - lo).is_multiple_of(2) {
                    p += term;
                } else {
                    p -= term;
                }
            }
            let dev = (&p - &cum[i - 1][k]).abs().to_f64().unwrap_or(f64::INFINITY);
            report.max_deviation = report.max_deviation.max(dev);
            if dev != 0.0 && report.counterexample.is_none() {
                report.counterexample = Some((i, z));
            }
        }
    }
    Ok(report)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli(p0: f64) -> Cdf {
        Cdf::discrete(vec![0.0, 1.0], vec![p0, 1.0 - p0]).unwrap()
    }

    #[test]
    fn level_formula_small_cases() {
        let fs = vec![Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()];
        let x = 0.3;
        assert!((multivariate_minlevel_prob(&fs, 1, x).unwrap() - 0.5 * (0.09 + 0.3)).abs() < 1e-15);
        assert!((multivariate_minlevel_prob(&fs, 2, x).unwrap() - 0.09).abs() < 1e-15);
        let three = vec![Cdf::power(3.0).unwrap(), Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()];
        let want = (2.0 * 0.027 + 0.09) / 3.0;
        assert!((multivariate_minlevel_prob(&three, 2, x).unwrap() - want).abs() < 1e-15);
        assert!(multivariate_minlevel_prob(&three, 0, x).is_err());
        assert!(multivariate_minlevel_prob(&three, 4, x).is_err());
    }

    #[test]
    fn bernoulli_pair_identity() {
        let (p, q) = (0.2, 0.6);
        let r = verify_order_statistics_representation(&[bernoulli(p), bernoulli(q)]).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.joint_probability(&[1.0, 0.0]), rat(q) - rat(p));
    }

    #[test]
    fn identical_and_ordered_triples() {
        let f = Cdf::discrete(vec![0.0, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
        let r = verify_order_statistics_representation(&[f.clone(), f.clone(), f]).unwrap();
        assert!(r.passed());
        assert!(r.joint.iter().all(|(t, _)| t[0] == t[1] && t[1] == t[2]));
        let r = verify_order_statistics_representation(&[bernoulli(0.1), bernoulli(0.3), bernoulli(0.5)]).unwrap();
        assert!(r.passed() && r.max_deviation < 1e-12 && r.level_deviation < 1e-12);
    }

    #[test]
    fn unordered_rejected() {
        assert!(verify_order_statistics_representation(&[bernoulli(0.6), bernoulli(0.2)]).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
    }
}
