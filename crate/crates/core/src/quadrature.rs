//! Gauss–Legendre rules and composite panel quadrature.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
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
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Mapped nodes and scaled weights on [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
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

/// Breakpoints of a mesh on [a, b] that is geometrically graded toward both ends:
/// panel widths grow by `ratio` from `h_min` until they reach `h_max`.
pub fn graded_breakpoints(a: f64, b: f64, h_min: f64, h_max: f64, ratio: f64) -> Vec<f64> {
    assert!(b > a && h_min > 0.0 && h_max >= h_min && ratio >= 1.0);
    let len = b - a;
    // one-sided ramp
    let mut ramp = vec![0.0];
    let mut h = h_min;
    while ramp.last().unwrap() + h < 0.5 * len && h < h_max {
        let next = ramp.last().unwrap() + h;
        ramp.push(next);
        h *= ratio;
    }
    let left_end = *ramp.last().unwrap();
    let middle = len - 2.0 * left_end;
    let n_mid = (middle / h_max).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = ramp.iter().map(|r| a + r).collect();
    for k in 1..n_mid {
        pts.push(a + left_end + middle * k as f64 / n_mid as f64);
    }
    for r in ramp.iter().rev() {
        pts.push(b - r);
    }
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    pts
}
