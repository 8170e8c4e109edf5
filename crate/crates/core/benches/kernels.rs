use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ordered_copulas::bounds::rogers_p;
use ordered_copulas::distcore::{Cdf, OrderedMarginalPair};
use ordered_copulas::maxent::maxent_joint_density;
use ordered_copulas::numeric::{integrate_2d, linspace, Quadrature};
use ordered_copulas::sampling::{sample_l_unimodal_with, sample_maxent_from, RngStream};
use ordered_copulas::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn example61() -> OrderedMarginalPair {
    OrderedMarginalPair::new(Cdf::power(2.0).unwrap(), Cdf::uniform(0.0, 1.0).unwrap()).unwrap()
}

fn samplers(c: &mut Criterion) {
    let pair = example61();
    let density = maxent_joint_density(&pair).unwrap();
    let mut g = c.benchmark_group("sample");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new("L", name), |b| {
            b.iter(|| sample_l_unimodal_with(&pair, RngStream::new(1), black_box(100_000), exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("maxent", name), |b| {
            b.iter(|| sample_maxent_from(&density, RngStream::new(1), black_box(10_000), exec))
        });
    }
    g.finish();
}

fn lattices(c: &mut Criterion) {
    let p = rogers_p(&example61());
    let xs = linspace(0.0, 1.0, 101);
    let mut g = c.benchmark_group("rogers_lattice_101");
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| {
            b.iter(|| exec.map_indexed(xs.len() * xs.len(), |k| p.eval(xs[k / xs.len()], xs[k % xs.len()])))
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let density = maxent_joint_density(&example61()).unwrap();
    let mut g = c.benchmark_group("entropy_integral");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| {
            b.iter(|| {
                integrate_2d(
                    |x1, x2| {
                        let f = density.eval(x1, x2);
                        if f > 0.0 {
                            -f * f.ln()
                        } else {
                            0.0
                        }
                    },
                    0.0,
                    1.0,
                    |_| 0.0,
                    |x1| x1,
                    Quadrature::with_abs_tol(1e-8).exec(exec),
                    Quadrature::with_abs_tol(1e-8),
                )
            })
        });
    }
    g.finish();
}

criterion_group!(benches, samplers, lattices, quadrature);
criterion_main!(benches);
