//! Gauss–Legendre rules and compensated summation.
//!
//! Every integral in the crate funnels through [`QuadRule`]; sums over
//! nodes use [`NeumaierSum`] so the result does not depend on how a
//! reduction was split.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of a one-dimensional quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// `n`-point Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("Gauss-Legendre rule needs at least one node"));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::config("Gauss-Legendre interval must be finite"));
        }
        let (x, w) = legendre_nodes(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Ok(Self {
            nodes: x.iter().map(|xi| mid + half * xi).collect(),
            weights: w.iter().map(|wi| half * wi).collect(),
        })
    }

    /// Composite rule: `panels` equal sub-intervals of `[a, b]`, each with an
    /// `order`-point Gauss–Legendre rule.
    pub fn composite(panels: usize, order: usize, a: f64, b: f64) -> Result<Self> {
        if panels == 0 {
            return Err(Error::config("composite rule needs at least one panel"));
        }
        let (x, w) = legendre_nodes(order.max(1));
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * x.len());
        let mut weights = Vec::with_capacity(panels * x.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }
}

/// Time-integration rule on `[0, t]` (or `[t, 0]` for negative `t`) built
/// from `n` total nodes split into panels of 16.
pub fn time_rule(t: f64, n: usize) -> QuadRule {
    let order = n.clamp(1, 16);
    let panels = n.div_ceil(order).max(1);
    let (a, b) = if t >= 0.0 { (0.0, t) } else { (t, 0.0) };
    QuadRule::composite(panels, order, a, b).expect("panels and order are positive")
}

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, Newton iteration on
/// the three-term recurrence.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// `(cos(θt) − 1)/θ²`, switching to its Taylor form for `|θ| < threshold`.
pub fn cos_minus_one_over_sq(theta: f64, t: f64, threshold: f64) -> f64 {
    if theta.abs() < threshold {
        let t2 = t * t;
        -0.5 * t2 + t2 * t2 * theta * theta / 24.0
    } else {
        ((theta * t).cos() - 1.0) / (theta * theta)
    }
}

/// `sin(θt)/θ` with its limit `t` at `θ = 0`.
pub fn sin_over(theta: f64, t: f64) -> f64 {
    let z = theta * t;
    if z.abs() < 1e-4 {
        let z2 = z * z;
        t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        z.sin() / theta
    }
}

/// `(1 − cos(θt))/θ` with its limit `0` at `θ = 0`.
pub fn one_minus_cos_over(theta: f64, t: f64) -> f64 {
    let z = theta * t;
    if z.abs() < 1e-4 {
        let z2 = z * z;
        t * (0.5 * z - z * z2 / 24.0)
    } else {
        (1.0 - z.cos()) / theta
    }
}
