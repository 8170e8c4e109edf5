//! Adaptive Gauss-Kronrod (7/15) quadrature.

use crate::exec::Execution;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-panel `|Kronrod - Gauss|` estimates.
    pub error: f64,
    /// False when some panel hit the depth limit before meeting its tolerance.
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Panels are never split below `(b - a) / 2^max_depth`.
    pub max_depth: u32,
    /// Stop splitting once this many integrand evaluations were spent.
    pub max_evals: usize,
    pub exec: Execution,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_depth: 40,
            max_evals: 150_000,
            exec: Execution::Sequential,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    k: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Quadrature { abs_tol, ..Default::default() }
    }

    pub fn rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn depth(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Globally adaptive: the panel with the largest error estimate is split
    /// until the summed estimate meets the tolerance.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> QuadResult
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        if a == b {
            return QuadResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
        }
        if b < a {
            let r = self.integrate(f, b, a);
            return QuadResult { value: -r.value, ..r };
        }
        let make = |a: f64, b: f64, depth: u32| {
            let (k, g) = panel(&f, a, b, self.exec);
            let mut err = (k - g).abs();
            if err <= 50.0 * f64::EPSILON * k.abs() {
                err = 0.0;
            }
            Panel { a, b, k, err, depth }
        };
        let mut heap = std::collections::BinaryHeap::new();
        // Panels that cannot be split further.
        let (mut done_value, mut done_error) = (0.0, 0.0);
        let mut converged = true;
        let first = make(a, b, 0);
        let (mut value, mut error) = (first.k, first.err);
        heap.push(first);
        let mut evaluations = 15;
        let mut stalls = 0;
        loop {
            let tol = self.abs_tol.max(self.rel_tol * (value + done_value).abs());
            if error <= tol {
                break;
            }
            let Some(worst) = heap.pop() else {
                break;
            };
            let mid = 0.5 * (worst.a + worst.b);
            if worst.depth >= self.max_depth || mid <= worst.a || mid >= worst.b {
                if worst.err > 0.0 {
                    converged = false;
                }
                value -= worst.k;
                error -= worst.err;
                done_value += worst.k;
                done_error += worst.err;
                continue;
            }
            if evaluations + 30 > self.max_evals {
                heap.push(worst);
                converged = false;
                break;
            }
            let l = make(worst.a, mid, worst.depth + 1);
            let r = make(mid, worst.b, worst.depth + 1);
            evaluations += 30;
            // Splits that neither move the estimate nor shrink its error mean
            // the integrand's rounding noise dominates; after a few the
            // estimate is as good as it gets.
            if l.err + r.err >= 0.99 * worst.err && (l.k + r.k - worst.k).abs() <= 1e-5 * (l.k + r.k).abs() {
                stalls += 1;
            }
            value += l.k + r.k - worst.k;
            error += l.err + r.err - worst.err;
            heap.push(l);
            heap.push(r);
            if stalls >= 6 {
                break;
            }
        }
        // Re-sum to shed the drift of the running totals.
        let (mut v, mut e) = (done_value, done_error);
        for p in &heap {
            v += p.k;
            e += p.err;
        }
        QuadResult { value: v, error: e, converged, evaluations }
    }
}

/// Kronrod and Gauss estimates on one panel.
fn panel<F>(f: &F, a: f64, b: f64, exec: Execution) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let node = |i: usize| -> f64 {
        // i in 0..15: 0..7 are c - h*x, 7 is the centre, 8..15 are c + h*x.
        let x = match i {
            0..=6 => c - h * XGK[i],
            7 => c,
            _ => c + h * XGK[14 - i],
        };
        f(x)
    };
    let vals: Vec<f64> = match exec {
        Execution::Sequential => (0..15).map(node).collect(),
        Execution::Parallel => exec.map_indexed(15, node),
    };
    let mut k = WGK[7] * vals[7];
    let mut g = WG[3] * vals[7];
    for j in 0..7 {
        let pair = vals[j] + vals[14 - j];
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, g * h)
}

/// One 15-point Kronrod rule on `[a, b]`, without adaptation.
pub fn gauss_kronrod15<F>(f: F, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    panel(&f, a, b, Execution::Sequential).0
}

/// Integrate `f` over `[a, b]` with absolute tolerance `tol` and default depth.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> QuadResult
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    Quadrature::with_abs_tol(tol).integrate(f, a, b)
}

/// Iterated integral `∫_a^b ∫_{lo(x)}^{hi(x)} f(x, y) dy dx`.
///
/// The outer panels are evaluated with `outer.exec`; the inner integrals are
/// always sequential.
pub fn integrate_2d<F, L, U>(
    f: F,
    a: f64,
    b: f64,
    lo: L,
    hi: U,
    outer: Quadrature,
    inner: Quadrature,
) -> QuadResult
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
    L: Fn(f64) -> f64 + Sync + Send,
    U: Fn(f64) -> f64 + Sync + Send,
{
    let inner = Quadrature { exec: Execution::Sequential, ..inner };
    let converged = std::sync::atomic::AtomicBool::new(true);
    let r = outer.integrate(
        |x| {
            let r = inner.integrate(|y| f(x, y), lo(x), hi(x));
            if !r.converged {
                converged.store(false, std::sync::atomic::Ordering::Relaxed);
            }
            r.value
        },
        a,
        b,
    );
    QuadResult {
        converged: r.converged && converged.load(std::sync::atomic::Ordering::Relaxed),
        ..r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn log_singularity() {
        // ∫_0^1 -ln x dx = 1
        let r = integrate(|x| -x.ln(), 0.0, 1.0, 1e-10);
        assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10);
        assert!((r.value - 2.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn reversed_limits_negate() {
        let a = integrate(|x| x.exp(), 0.0, 1.0, 1e-12).value;
        let b = integrate(|x| x.exp(), 1.0, 0.0, 1e-12).value;
        assert_eq!(a, -b);
    }

    #[test]
    fn triangle_area() {
        let q = Quadrature::with_abs_tol(1e-12);
        let r = integrate_2d(|_, _| 1.0, 0.0, 1.0, |_| 0.0, |x| x, q, q);
        assert!((r.value - 0.5).abs() < 1e-13);
    }

    #[test]
    fn parallel_panels_match_sequential() {
        let f = |x: f64| (3.0 * x).sin() / (1.0 + x * x);
        let s = Quadrature::with_abs_tol(1e-12).integrate(f, -2.0, 5.0);
        let p = Quadrature::with_abs_tol(1e-12).exec(Execution::Parallel).integrate(f, -2.0, 5.0);
        assert_eq!(s.value, p.value);
    }
}
