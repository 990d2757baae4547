//! Photon momentum space: the quadrature grid, transverse phase-space
//! points and the linear maps acting on them (helicity, circular
//! polarization projectors, free evolution and the symplectic rotation).
//!
//! A phase point stores one pair `(q, p)` of real 3-vectors per grid node.
//! Read as a complex field it is `q + i p`; the real scalar product is
//! `Σ_n w_n (q_n·q'_n + p_n·p'_n)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{NeumaierSum, QuadRule};

pub type Vec3 = Vector3<f64>;
pub type CVec3 = Vector3<Complex64>;

/// Shape of the ultraviolet cutoff profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffKind {
    /// `A exp(−r²/(2Λ²))`.
    Gaussian,
    /// `A exp(1 − 1/(1 − (r/2Λ)²))` on `r < 2Λ`, zero beyond.
    CompactBump,
}

impl CutoffKind {
    pub fn name(self) -> &'static str {
        match self {
            CutoffKind::Gaussian => "gaussian",
            CutoffKind::CompactBump => "compact-bump",
        }
    }
}

impl std::str::FromStr for CutoffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(CutoffKind::Gaussian),
            "compact-bump" | "bump" => Ok(CutoffKind::CompactBump),
            other => Err(Error::config(format!(
                "unknown cutoff kind '{other}' (expected gaussian or compact-bump)"
            ))),
        }
    }
}

/// Radial ultraviolet cutoff χ(r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCutoff {
    pub kind: CutoffKind,
    pub scale: f64,
    pub amplitude: f64,
}

impl Default for RadialCutoff {
    fn default() -> Self {
        Self::gaussian(1.0)
    }
}

impl RadialCutoff {
    pub fn gaussian(scale: f64) -> Self {
        Self {
            kind: CutoffKind::Gaussian,
            scale,
            amplitude: 1.0,
        }
    }

    pub fn compact_bump(scale: f64) -> Self {
        Self {
            kind: CutoffKind::CompactBump,
            scale,
            amplitude: 1.0,
        }
    }

    /// The decoupled limit χ ≡ 0.
    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::gaussian(1.0)
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::config("cutoff scale must be positive"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config("cutoff amplitude must be non-negative"));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.kind {
            CutoffKind::Gaussian => {
                let s = r / self.scale;
                self.amplitude * (-0.5 * s * s).exp()
            }
            CutoffKind::CompactBump => {
                let s = r / (2.0 * self.scale);
                if s >= 1.0 {
                    0.0
                } else {
                    self.amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
        }
    }

    /// Radius beyond which χ is negligible (8Λ for the Gaussian, the support
    /// edge for the bump).
    pub fn natural_max_r(&self) -> f64 {
        match self.kind {
            CutoffKind::Gaussian => 8.0 * self.scale,
            CutoffKind::CompactBump => 2.0 * self.scale,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} scale={} amplitude={}",
            self.kind.name(),
            self.scale,
            self.amplitude
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSpec {
    pub n_radial: usize,
    pub max_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularSpec {
    pub n_polar: usize,
    pub n_azimuth: usize,
}

/// Quadrature discretization of momentum space with a transverse frame at
/// every node. The origin is never a node.
pub struct KGrid {
    nodes: Vec<Vec3>,
    radii: Vec<f64>,
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
    frames: Vec<[Vec3; 2]>,
    label: String,
}

impl fmt::Debug for KGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KGrid")
            .field("nodes", &self.nodes.len())
            .field("label", &self.label)
            .finish()
    }
}

impl KGrid {
    /// Product grid: Gauss–Legendre in `|k|` on `[0, max_r]`, Gauss–Legendre
    /// in `cos θ`, uniform trapezoid in φ.
    pub fn build(radial: RadialSpec, angular: AngularSpec) -> Result<Arc<Self>> {
        if radial.n_radial < 2 {
            return Err(Error::config(format!(
                "n_radial = {} but the radial Gauss-Legendre rule needs at least 2 nodes",
                radial.n_radial
            )));
        }
        if !(radial.max_r > 0.0 && radial.max_r.is_finite()) {
            return Err(Error::config("max_r must be positive"));
        }
        if angular.n_polar < 1 || angular.n_azimuth < 1 {
            return Err(Error::config("angular node counts must be at least 1"));
        }
        let rad = QuadRule::gauss_legendre(radial.n_radial, 0.0, radial.max_r)?;
        let pol = QuadRule::gauss_legendre(angular.n_polar, -1.0, 1.0)?;
        let dphi = 2.0 * PI / angular.n_azimuth as f64;

        let n_ang = angular.n_polar * angular.n_azimuth;
        let mut dirs = Vec::with_capacity(n_ang);
        let mut ang_w = Vec::with_capacity(n_ang);
        for (ct, wt) in pol.nodes.iter().zip(&pol.weights) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for b in 0..angular.n_azimuth {
                let phi = dphi * (b as f64 + 0.5);
                dirs.push(Vec3::new(st * phi.cos(), st * phi.sin(), *ct));
                ang_w.push(wt * dphi);
            }
        }

        let mut nodes = Vec::with_capacity(rad.len() * n_ang);
        let mut weights = Vec::with_capacity(rad.len() * n_ang);
        for (r, wr) in rad.nodes.iter().zip(&rad.weights) {
            for (d, wa) in dirs.iter().zip(&ang_w) {
                nodes.push(d * *r);
                weights.push(wr * r * r * wa);
            }
        }
        let label = format!(
            "product n_radial={} max_r={} n_polar={} n_azimuth={}",
            radial.n_radial, radial.max_r, angular.n_polar, angular.n_azimuth
        );
        Self::from_parts(nodes, weights, label)
    }

    /// Grid from explicit nodes and weights (used for few-mode oracle runs).
    pub fn custom(nodes: Vec<Vec3>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if nodes.len() != weights.len() {
            return Err(Error::config("custom grid: node and weight counts differ"));
        }
        if nodes.is_empty() {
            return Err(Error::config("custom grid: no nodes"));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::config("custom grid: weights must be positive"));
        }
        let label = format!("custom nodes={}", nodes.len());
        Self::from_parts(nodes, weights, label)
    }

    fn from_parts(nodes: Vec<Vec3>, weights: Vec<f64>, label: String) -> Result<Arc<Self>> {
        let mut radii = Vec::with_capacity(nodes.len());
        let mut dirs = Vec::with_capacity(nodes.len());
        let mut frames = Vec::with_capacity(nodes.len());
        for k in &nodes {
            let r = k.norm();
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config("grid nodes must be finite and nonzero"));
            }
            let d = k / r;
            radii.push(r);
            frames.push(transverse_frame(&d));
            dirs.push(d);
        }
        Ok(Arc::new(Self {
            nodes,
            radii,
            dirs,
            weights,
            frames,
            label,
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, n: usize) -> &Vec3 {
        &self.nodes[n]
    }

    pub fn radius(&self, n: usize) -> f64 {
        self.radii[n]
    }

    pub fn dir(&self, n: usize) -> &Vec3 {
        &self.dirs[n]
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    pub fn frame(&self, n: usize) -> &[Vec3; 2] {
        &self.frames[n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Σ_n w_n f(k_n)`.
    pub fn integrate(&self, mut f: impl FnMut(&Vec3) -> f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (k, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(k));
        }
        acc.value()
    }
}

/// Orthonormal pair orthogonal to `d` with `e1 × e2 = d`, built by
/// Gram–Schmidt from the Cartesian axis along which `d` is smallest.
pub fn transverse_frame(d: &Vec3) -> [Vec3; 2] {
    let a = d.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        0
    } else if a.y <= a.z {
        1
    } else {
        2
    };
    let mut e = Vec3::zeros();
    e[axis] = 1.0;
    let e1 = (e - d * d.dot(&e)).normalize();
    let e2 = d.cross(&e1);
    [e1, e2]
}

/// Circular polarization sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

/// Unit complex polarization vector spanning `E±(k)` in the frame
/// `(e1, e2)`: `(e1 ∓ i e2)/√2`.
pub fn helicity_vector(frame: &[Vec3; 2], h: Helicity) -> CVec3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e1 = frame[0].map(|x| Complex64::new(x * s, 0.0));
    let e2 = frame[1].map(|x| Complex64::new(0.0, -h.sign() * x * s));
    e1 + e2
}

/// A point of the transverse phase space `H²` sampled on a grid.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    grid: Arc<KGrid>,
    q: Vec<Vec3>,
    p: Vec<Vec3>,
}

impl PhasePoint {
    pub fn zeros(grid: &Arc<KGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            q: vec![Vec3::zeros(); grid.len()],
            p: vec![Vec3::zeros(); grid.len()],
        }
    }

    /// Builds a point node by node; the longitudinal part of whatever `f`
    /// returns is projected out.
    pub fn from_fn(grid: &Arc<KGrid>, mut f: impl FnMut(usize, &Vec3) -> (Vec3, Vec3)) -> Self {
        let mut out = Self::zeros(grid);
        for n in 0..grid.len() {
            let (q, p) = f(n, grid.node(n));
            let d = grid.dir(n);
            out.q[n] = q - d * d.dot(&q);
            out.p[n] = p - d * d.dot(&p);
        }
        out
    }

    /// Builds a point from complex node values `z_n = q_n + i p_n`.
    pub fn from_complex(grid: &Arc<KGrid>, mut f: impl FnMut(usize, &Vec3) -> CVec3) -> Self {
        Self::from_fn(grid, |n, k| {
            let z = f(n, k);
            (z.map(|c| c.re), z.map(|c| c.im))
        })
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn q(&self, n: usize) -> &Vec3 {
        &self.q[n]
    }

    pub fn p(&self, n: usize) -> &Vec3 {
        &self.p[n]
    }

    pub fn complex(&self, n: usize) -> CVec3 {
        self.q[n].zip_map(&self.p[n], Complex64::new)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn same_grid(&self, other: &PhasePoint) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    fn check_grid(&self, other: &PhasePoint) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Indices of nodes with a nonzero amplitude.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&n| self.q[n] != Vec3::zeros() || self.p[n] != Vec3::zeros())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| *v == Vec3::zeros())
    }

    /// Real scalar product `X·Y`.
    pub fn inner(&self, other: &PhasePoint) -> Result<f64> {
        self.check_grid(other)?;
        let w = self.grid.weights();
        let mut acc = NeumaierSum::default();
        for n in 0..self.len() {
            acc.add(w[n] * (self.q[n].dot(&other.q[n]) + self.p[n].dot(&other.p[n])));
        }
        Ok(acc.value())
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).expect("same grid")
    }

    /// Largest `|k̂·q|`, `|k̂·p|` over all nodes.
    pub fn transversality_defect(&self) -> f64 {
        (0..self.len())
            .map(|n| {
                let d = self.grid.dir(n);
                d.dot(&self.q[n]).abs().max(d.dot(&self.p[n]).abs())
            })
            .fold(0.0, f64::max)
    }

    fn map_nodes(&self, mut f: impl FnMut(usize, &Vec3, &Vec3) -> (Vec3, Vec3)) -> Self {
        let mut q = Vec::with_capacity(self.len());
        let mut p = Vec::with_capacity(self.len());
        for n in 0..self.len() {
            let (a, b) = f(n, &self.q[n], &self.p[n]);
            q.push(a);
            p.push(b);
        }
        Self {
            grid: Arc::clone(&self.grid),
            q,
            p,
        }
    }

    /// Helicity operator `J(q, p) = (k̂×q, k̂×p)`.
    pub fn helicity(&self) -> Self {
        self.map_nodes(|n, q, p| {
            let d = self.grid.dir(n);
            (d.cross(q), d.cross(p))
        })
    }

    /// Projector onto the circular polarization `E±`:
    /// `Π±(q, p) = ½(q ± k̂×p, p ∓ k̂×q)`.
    pub fn polar_project(&self, h: Helicity) -> Self {
        let s = h.sign();
        self.map_nodes(|n, q, p| {
            let d = self.grid.dir(n);
            ((q + d.cross(p) * s) * 0.5, (p - d.cross(q) * s) * 0.5)
        })
    }

    /// `(Π₊ − Π₋)X = (k̂×p, −k̂×q)`.
    pub fn polarization_difference(&self) -> Self {
        self.map_nodes(|n, q, p| {
            let d = self.grid.dir(n);
            (d.cross(p), -d.cross(q))
        })
    }

    /// Free evolution `(χ_t X)(k) = e^{−it|k|} X(k)`.
    pub fn free_evolve(&self, t: f64) -> Self {
        self.map_nodes(|n, q, p| {
            let (s, c) = (t * self.grid.radius(n)).sin_cos();
            (q * c + p * s, p * c - q * s)
        })
    }

    /// `F(q, p) = (−p, q)`, i.e. multiplication by `i`.
    pub fn fmap(&self) -> Self {
        self.map_nodes(|_, q, p| (-p, *q))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_nodes(|_, q, p| (q * c, p * c))
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &PhasePoint, b: f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.map_nodes(|n, q, p| (q * a + other.q[n] * b, p * a + other.p[n] * b)))
    }

    pub fn add(&self, other: &PhasePoint) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &PhasePoint) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Largest per-component absolute difference.
    pub fn max_abs_diff(&self, other: &PhasePoint) -> Result<f64> {
        self.check_grid(other)?;
        Ok((0..self.len())
            .map(|n| (self.q[n] - other.q[n]).amax().max((self.p[n] - other.p[n]).amax()))
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().chain(&self.p).map(|v| v.amax()).fold(0.0, f64::max)
    }
}
