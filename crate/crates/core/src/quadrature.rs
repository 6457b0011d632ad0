//! Quadrature building blocks: Gauss–Legendre rules, an adaptive
//! integrator with node-doubling error control, and piecewise Chebyshev
//! interpolation.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes ascend.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tolerances and budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
    /// Gauss–Legendre order used on each subinterval.
    pub order: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_evals: 200_000,
            order: 15,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over [a, b] with optional interior break
/// points. Each piece is integrated with an `order`-point Gauss rule and with
/// the same rule on both halves; the difference is the error estimate, and the
/// piece with the largest estimate is bisected until the total estimate meets
/// the tolerance or the evaluation budget runs out.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &AdaptiveConfig,
) -> Integral {
    let rule = GaussLegendre::new(cfg.order);
    let mut points = vec![a];
    for &p in breaks {
        if p > a && p < b {
            points.push(p);
        }
    }
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut evals = 0usize;
    let mut heap = BinaryHeap::new();
    let whole = |lo: f64, hi: f64, f: &mut F, evals: &mut usize| {
        *evals += rule.len();
        rule.integrate(lo, hi, &mut *f)
    };
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let coarse = whole(lo, hi, &mut f, &mut evals);
        let l = whole(lo, mid, &mut f, &mut evals);
        let r = whole(mid, hi, &mut f, &mut evals);
        heap.push(Piece {
            a: lo,
            b: mid,
            value: l,
            error: 0.5 * (l + r - coarse).abs(),
        });
        heap.push(Piece {
            a: mid,
            b: hi,
            value: r,
            error: 0.5 * (l + r - coarse).abs(),
        });
    }

    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.error));
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= tol || !err.is_finite() {
            return Integral {
                value: sum_pieces(&heap),
                error: err,
                evals,
                converged: err.is_finite(),
            };
        }
        if evals + 2 * rule.len() > cfg.max_evals {
            return Integral {
                value: sum_pieces(&heap),
                error: err,
                evals,
                converged: false,
            };
        }
        let worst = heap.pop().expect("adaptive heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be bisected; freeze it.
            heap.push(Piece { error: 0.0, ..worst });
            continue;
        }
        let l = whole(worst.a, mid, &mut f, &mut evals);
        let r = whole(mid, worst.b, &mut f, &mut evals);
        let e = 0.5 * (l + r - worst.value).abs();
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: l,
            error: e,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: r,
            error: e,
        });
    }
}

/// Sums piece values in a fixed order (by left endpoint) so results do not
/// depend on heap layout.
fn sum_pieces(heap: &BinaryHeap<Piece>) -> f64 {
    let mut v: Vec<(f64, f64)> = heap.iter().map(|p| (p.a, p.value)).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    v.iter().map(|p| p.1).sum()
}

/// Interpolant on Chebyshev points of the first kind over [a, b].
#[derive(Debug, Clone)]
pub struct ChebyshevPanel {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebyshevPanel {
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let x = -((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * x
            })
            .collect()
    }

    /// Builds the interpolant from values at `ChebyshevPanel::nodes(a, b, n)`.
    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        let nodes = Self::nodes(a, b, n);
        let bary = (0..n)
            .map(|k| {
                let th = (2 * k + 1) as f64 * PI / (2 * n) as f64;
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * th.sin()
            })
            .collect();
        Self {
            a,
            b,
            nodes,
            values,
            bary,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((xk, fk), wk) in self.nodes.iter().zip(&self.values).zip(&self.bary) {
            let d = x - xk;
            if d == 0.0 {
                return *fk;
            }
            let c = wk / d;
            num += c * fk;
            den += c;
        }
        num / den
    }
}

/// Piecewise Chebyshev interpolant over consecutive panels.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    breaks: Vec<f64>,
    panels: Vec<ChebyshevPanel>,
}

impl PiecewiseChebyshev {
    /// Samples `f` on `n` Chebyshev points per panel.
    pub fn build<F: FnMut(f64) -> f64>(breaks: &[f64], n: usize, mut f: F) -> Self {
        let panels = breaks
            .windows(2)
            .map(|w| {
                let vals = ChebyshevPanel::nodes(w[0], w[1], n)
                    .into_iter()
                    .map(&mut f)
                    .collect();
                ChebyshevPanel::from_values(w[0], w[1], vals)
            })
            .collect();
        Self {
            breaks: breaks.to_vec(),
            panels,
        }
    }

    pub fn from_panels(panels: Vec<ChebyshevPanel>) -> Self {
        let mut breaks: Vec<f64> = panels.iter().map(|p| p.a).collect();
        if let Some(p) = panels.last() {
            breaks.push(p.b);
        }
        Self { breaks, panels }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    /// Evaluates the interpolant; returns 0 outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        let idx = match self.breaks.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i.min(self.panels.len() - 1),
            Err(i) => i - 1,
        };
        self.panels[idx].eval(x)
    }
}

/// Composite Gauss–Legendre nodes and weights on the given
/// panel breaks.
pub fn composite_gauss(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(order);
    let mut x = Vec::with_capacity(order * breaks.len());
    let mut w = Vec::with_capacity(order * breaks.len());
    for p in breaks.windows(2) {
        for (xi, wi) in rule.mapped(p[0], p[1]) {
            x.push(xi);
            w.push(wi);
        }
    }
    (x, w)
}

/// Evenly spaced break points.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 10, 15, 33] {
            let g = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let v = g.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((v - exact).abs() < 1e-14, "n={n} deg={deg}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_legendre_nodes_ascend_and_weights_sum_to_two() {
        let g = GaussLegendre::new(24);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, &[], &AdaptiveConfig::default());
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let cfg = AdaptiveConfig {
            max_evals: 100,
            ..AdaptiveConfig::default()
        };
        let r = integrate_adaptive(|x| (1.0 / x).sin(), 1e-6, 1.0, &[], &cfg);
        assert!(!r.converged);
    }

    #[test]
    fn chebyshev_interpolates_smooth_function() {
        let p = PiecewiseChebyshev::build(&[0.0, 1.0, 2.5], 20, |x| (3.0 * x).cos());
        for i in 0..50 {
            let x = 2.5 * i as f64 / 49.0;
            assert!((p.eval(x) - (3.0 * x).cos()).abs() < 1e-13);
        }
        assert_eq!(p.eval(3.0), 0.0);
    }
}
