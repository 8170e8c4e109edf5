use ordered_copulas::bounds::{lower_bound_l, support_contains};
use ordered_copulas::copula::{bertino, diagonal_from_marginals, extend_diagonal, ordered_joint_cdf, DiagonalSection};
use ordered_copulas::dependence::{min_kendall_tau, min_spearman_rho, solve_t, spearman_rho_sample};
use ordered_copulas::distcore::{rectangle_mass, Cdf, OrderedMarginalPair, UnivariateCdf};
use ordered_copulas::maxent::{cbar_density, maxent_joint_density, MaxEntDensity};
use ordered_copulas::numeric::{linspace, Quadrature};
use ordered_copulas::sampling::{exchangeable_pair, sample_l_unimodal, sample_maxent, RngStream};

fn example61() -> OrderedMarginalPair {
    OrderedMarginalPair::new(Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()).unwrap()
}

#[test]
fn l_is_the_ordered_law_of_the_extended_bertino_copula() {
    let pair = example61();
    let l = lower_bound_l(&pair);
    let delta = extend_diagonal(&diagonal_from_marginals(&pair));
    let law = ordered_joint_cdf(&pair, bertino(delta)).unwrap();
    let grid = linspace(0.0, 1.0, 101);
    let mut worst = 0.0f64;
    for &x1 in &grid {
        for &x2 in &grid {
            worst = worst.max((l.eval(x1, x2) - law.eval(x1, x2)).abs());
        }
    }
    assert!(worst <= 1e-8, "worst gap {worst:e}");
}

#[test]
fn support_of_l_carries_the_mass() {
    let pair = example61();
    let l = lower_bound_l(&pair);
    let eps = 1e-3;
    let mass = |x1: f64, x2: f64| rectangle_mass(&l, x1 - eps, x1 + eps, x2 - eps, x2 + eps).unwrap();
    for (x1, x2) in [(0.3, 0.3), (0.45, 0.45), (0.8, 0.8), (0.8, 0.2), (0.6, 0.4), (0.95, 0.05)] {
        assert!(support_contains(&pair, x1, x2, 1e-9).unwrap(), "({x1}, {x2})");
        assert!(mass(x1, x2) > 1e-6, "({x1}, {x2}) mass {}", mass(x1, x2));
    }
    for (x1, x2) in [(0.7, 0.5), (0.9, 0.3), (0.4, 0.2), (0.75, 0.3)] {
        assert!(!support_contains(&pair, x1, x2, 1e-9).unwrap(), "({x1}, {x2})");
        assert!(mass(x1, x2) <= 1e-12, "({x1}, {x2}) mass {}", mass(x1, x2));
    }
    assert!(!support_contains(&pair, 0.2, 0.4, 1e-9).unwrap());
}

#[test]
fn reflection_points_share_the_level() {
    let pair = example61();
    for s in linspace(0.5, 1.0, 41) {
        let t = solve_t(&pair, s).unwrap();
        assert!((pair.h(t) - pair.h(s)).abs() <= 1e-10);
        assert!((t - (1.0 - s)).abs() <= 1e-9, "s={s} t={t}");
        if s > 0.5 {
            assert!(t < s);
        }
    }
    assert!(solve_t(&pair, 0.2).is_err());
}

/// `F ∘ φ⁻¹` for `φ(x) = x³ + x`.
#[derive(Debug)]
struct Cubed(Cdf);

fn phi(x: f64) -> f64 {
    x * x * x + x
}

fn phi_inv(y: f64) -> f64 {
    let d = (0.25 * y * y + 1.0 / 27.0).sqrt();
    (0.5 * y + d).cbrt() + (0.5 * y - d).cbrt()
}

impl UnivariateCdf for Cubed {
    fn eval(&self, y: f64) -> f64 {
        self.0.eval(phi_inv(y))
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.0.support();
        (phi(lo), phi(hi))
    }

    fn quantile(&self, t: f64) -> Option<f64> {
        Some(phi(self.0.quantile(t)))
    }
}

#[test]
fn tau_and_rho_are_invariant_under_increasing_maps() {
    let pair = example61();
    let moved = OrderedMarginalPair::new(
        Cdf::custom(Cubed(Cdf::power(2.0).unwrap())),
        Cdf::custom(Cubed(Cdf::uniform(0.0, 1.0).unwrap())),
    )
    .unwrap();
    let (a, b) = (min_kendall_tau(&pair).unwrap(), min_kendall_tau(&moved).unwrap());
    assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    let (a, b) = (min_spearman_rho(&pair).unwrap(), min_spearman_rho(&moved).unwrap());
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
}

#[test]
fn spearman_of_l_draws_matches_the_minimum() {
    let pair = example61();
    let s = sample_l_unimodal(&pair, RngStream::new(77), 1_000_000).unwrap();
    let (x1, x2): (Vec<f64>, Vec<f64>) = s.iter().unzip();
    let rho = spearman_rho_sample(&x1, &x2).unwrap();
    let want = min_spearman_rho(&pair).unwrap();
    assert!((rho - want).abs() <= 0.005, "{rho} vs {want}");
}

#[test]
fn exchangeable_swap_is_fair() {
    let s = sample_maxent(&example61(), RngStream::new(5), 20_000).unwrap();
    let (v1, _) = exchangeable_pair(&s, RngStream::new(6));
    let swapped = s.iter().zip(&v1).filter(|((a, _), v)| *v != a).count() as f64;
    let n = s.len() as f64;
    assert!((swapped - 0.5 * n).abs() <= 3.0 * (0.25 * n).sqrt(), "{swapped}");
}

#[test]
fn cbar_has_uniform_margins() {
    let delta = DiagonalSection::from_pair(&example61());
    let c = cbar_density(&delta).unwrap();
    let quad = Quadrature::with_abs_tol(1e-9);
    for u in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let m = quad.integrate(|v| c.eval(u, v), 0.0, u).value + quad.integrate(|v| c.eval(u, v), u, 1.0).value;
        assert!((m - 1.0).abs() <= 1e-5, "u={u}: {m}");
    }
}

/// `-∫∫ g log g` over the square `[a, a + 2h] x [b, b + 2h]` for the
/// maximum-entropy density plus a checkerboard of height `eps`.
fn square_entropy(f: &MaxEntDensity, a: f64, b: f64, h: f64, eps: f64) -> f64 {
    let quad = Quadrature::with_abs_tol(1e-12);
    let mut total = 0.0;
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let sign = if i == j { 1.0 } else { -1.0 };
        let (x0, y0) = (a + i as f64 * h, b + j as f64 * h);
        total += quad
            .integrate(
                |x| {
                    quad.integrate(
                        |y| {
                            let g = f.eval(x, y) + sign * eps;
                            if g > 0.0 {
                                -g * g.ln()
                            } else {
                                0.0
                            }
                        },
                        y0,
                        y0 + h,
                    )
                    .value
                },
                x0,
                x0 + h,
            )
            .value;
    }
    total
}

#[test]
fn maxent_beats_perturbations_with_the_same_marginals() {
    let f = maxent_joint_density(&example61()).unwrap();
    let h = 0.05;
    for (a, b) in [(0.5, 0.1), (0.8, 0.3), (0.6, 0.45), (0.85, 0.05), (0.3, 0.1)] {
        let floor = linspace(a, a + 2.0 * h, 9)
            .into_iter()
            .flat_map(|x| linspace(b, b + 2.0 * h, 9).into_iter().map(move |y| (x, y)))
            .map(|(x, y)| f.eval(x, y))
            .fold(f64::INFINITY, f64::min);
        assert!(floor > 0.0, "square at ({a}, {b}) leaves the support");
        let eps = 0.5 * floor;
        let base = square_entropy(&f, a, b, h, 0.0);
        let moved = square_entropy(&f, a, b, h, eps);
        assert!(moved < base, "({a}, {b}): {moved} >= {base}");
    }
}

#[test]
fn maxent_integrates_to_one() {
    let f = maxent_joint_density(&example61()).unwrap();
    assert!((f.total_mass() - 1.0).abs() <= 1e-8, "{}", f.total_mass());
}
