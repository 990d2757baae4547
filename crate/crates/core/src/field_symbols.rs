//! Magnetic and electric field coefficients `B_{jx}`, `E_{jx} = J B_{jx}`,
//! their free and polarized-free symbols, the mode correlator and the
//! quadratic form `Q_t`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mode_space::{KGrid, PhasePoint, RadialCutoff, Vec3};
use crate::quadrature::{time_rule, NeumaierSum, QuadRule};

/// `(2π)^{-3}`.
pub const INV_TWO_PI_CUBED: f64 = 1.0 / (8.0 * PI * PI * PI);

/// Cartesian axis index, `0, 1, 2` for `e_1, e_2, e_3`.
pub type Axis = usize;

pub fn unit(j: Axis) -> Vec3 {
    let mut e = Vec3::zeros();
    e[j] = 1.0;
    e
}

fn check_axis(j: Axis) -> Result<()> {
    if j < 3 {
        Ok(())
    } else {
        Err(Error::domain(format!("axis index {j} out of range (0..3)")))
    }
}

/// N spin-1/2 particles at fixed positions in a constant external field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub positions: Vec<Vec3>,
    pub b_ext: Vec3,
}

impl SpinSystem {
    pub fn new(positions: Vec<Vec3>, b_ext: Vec3) -> Result<Self> {
        let sys = Self { positions, b_ext };
        sys.validate()?;
        Ok(sys)
    }

    /// One particle at the origin in `B_ext = (0, 0, |B|)`.
    pub fn single_at_origin(bmag: f64) -> Self {
        Self {
            positions: vec![Vec3::zeros()],
            b_ext: Vec3::new(0.0, 0.0, bmag),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::config("spin system needs at least one particle"));
        }
        if self.positions.iter().any(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(Error::config("particle positions must be finite"));
        }
        if !self.b_ext.iter().all(|c| c.is_finite()) {
            return Err(Error::config("external field must be finite"));
        }
        Ok(())
    }

    pub fn n_particles(&self) -> usize {
        self.positions.len()
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.positions.len()
    }
}

/// Radial profile factor `χ(|k|)|k|^{1/2}(2π)^{-3/2}` shared by all
/// field coefficients.
pub fn field_profile(cutoff: &RadialCutoff, r: f64) -> f64 {
    cutoff.eval(r) * r.sqrt() * INV_TWO_PI_CUBED.sqrt()
}

/// Magnetic coefficient
/// `B_{jx}(k) = iχ(|k|)|k|^{1/2}(2π)^{-3/2} e^{−ik·x} (k×e_j)/|k|`.
pub fn bmode(j: Axis, x: &Vec3, grid: &Arc<KGrid>, cutoff: &RadialCutoff) -> Result<PhasePoint> {
    check_axis(j)?;
    let ej = unit(j);
    Ok(PhasePoint::from_fn(grid, |n, k| {
        let c = field_profile(cutoff, grid.radius(n));
        let u = grid.dir(n).cross(&ej);
        let (s, co) = k.dot(x).sin_cos();
        (u * (c * s), u * (c * co))
    }))
}

/// Electric coefficient `E_{jx} = J B_{jx}`.
pub fn emode(j: Axis, x: &Vec3, grid: &Arc<KGrid>, cutoff: &RadialCutoff) -> Result<PhasePoint> {
    Ok(bmode(j, x, grid, cutoff)?.helicity())
}

/// `B_j^free(x, t, X) = B_{jx}·χ_t(X)` by pullback.
pub fn b_free(j: Axis, x: &Vec3, t: f64, xp: &PhasePoint, cutoff: &RadialCutoff) -> Result<f64> {
    bmode(j, x, xp.grid(), cutoff)?.inner(&xp.free_evolve(t))
}

/// `E_j^free(x, t, X) = E_{jx}·χ_t(X)` by pullback.
pub fn e_free(j: Axis, x: &Vec3, t: f64, xp: &PhasePoint, cutoff: &RadialCutoff) -> Result<f64> {
    emode(j, x, xp.grid(), cutoff)?.inner(&xp.free_evolve(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Magnetic,
    Electric,
}

/// `((Π₊ − Π₋) C_{jx})·χ_t(X)` with `C` the magnetic or electric coefficient.
pub fn pol_free(
    kind: FieldKind,
    j: Axis,
    x: &Vec3,
    t: f64,
    xp: &PhasePoint,
    cutoff: &RadialCutoff,
) -> Result<f64> {
    let coef = match kind {
        FieldKind::Magnetic => bmode(j, x, xp.grid(), cutoff)?,
        FieldKind::Electric => emode(j, x, xp.grid(), cutoff)?,
    };
    coef.polarization_difference().inner(&xp.free_evolve(t))
}

struct SampleNode {
    wc: f64,
    r: f64,
    k: Vec3,
    q: Vec3,
    p: Vec3,
    q_x_d: Vec3,
    p_x_d: Vec3,
}

/// Evaluates the free fields of a fixed phase point through the explicit
/// `cos(k·x − t|k|)`, `sin(k·x − t|k|)` integrals, visiting only the
/// support of the point. This is the fast path used by the time steppers.
pub struct FreeField {
    nodes: Vec<SampleNode>,
}

impl FreeField {
    pub fn new(xp: &PhasePoint, cutoff: &RadialCutoff) -> Self {
        let g = xp.grid();
        let nodes = xp
            .support()
            .into_iter()
            .map(|n| {
                let d = g.dir(n);
                let (q, p) = (*xp.q(n), *xp.p(n));
                SampleNode {
                    wc: g.weight(n) * field_profile(cutoff, g.radius(n)),
                    r: g.radius(n),
                    k: *g.node(n),
                    q,
                    p,
                    q_x_d: q.cross(d),
                    p_x_d: p.cross(d),
                }
            })
            .collect();
        Self { nodes }
    }

    pub fn is_zero(&self) -> bool {
        self.nodes.is_empty()
    }

    fn accumulate(&self, x: &Vec3, t: f64, f: impl Fn(&SampleNode, f64, f64) -> Vec3) -> Vec3 {
        let mut acc = [NeumaierSum::default(); 3];
        for nd in &self.nodes {
            let (s, c) = (nd.k.dot(x) - t * nd.r).sin_cos();
            let v = f(nd, s, c);
            for i in 0..3 {
                acc[i].add(v[i]);
            }
        }
        Vec3::new(acc[0].value(), acc[1].value(), acc[2].value())
    }

    /// `B^free(x, t, X)`.
    pub fn b(&self, x: &Vec3, t: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| (nd.q_x_d * s + nd.p_x_d * c) * nd.wc)
    }

    /// `E^free(x, t, X)`.
    pub fn e(&self, x: &Vec3, t: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| -(nd.q * s + nd.p * c) * nd.wc)
    }

    /// Exact `∂_t B^free(x, t, X)`.
    pub fn db_dt(&self, x: &Vec3, t: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| -(nd.q_x_d * c - nd.p_x_d * s) * (nd.wc * nd.r))
    }

    /// Exact `∂_t E^free(x, t, X)`.
    pub fn de_dt(&self, x: &Vec3, t: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| (nd.q * c - nd.p * s) * (nd.wc * nd.r))
    }

    /// `E^{pol,free}(x, t, X)`, using `(Π₊ − Π₋)E_{jx} = i B_{jx}`.
    pub fn e_pol(&self, x: &Vec3, t: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| (-nd.q_x_d * c + nd.p_x_d * s) * nd.wc)
    }

    /// Polarized-state form of the time derivative,
    /// `∓ ∫ χ|k|^{3/2}(2π)^{-3/2} [sin θ q_j + cos θ p_j]` for `X ∈ E±`.
    pub fn db_dt_polarized(&self, x: &Vec3, t: f64, sign: f64) -> Vec3 {
        self.accumulate(x, t, |nd, s, c| -(nd.q * s + nd.p * c) * (sign * nd.wc * nd.r))
    }
}

/// One-dimensional radial quadrature paired with the cutoff, for the
/// rotation-invariant reductions `∫_{R³} f(|k|) dk = 4π∫ r² f(r) dr`.
#[derive(Debug, Clone)]
pub struct RadialModel {
    pub cutoff: RadialCutoff,
    pub rule: QuadRule,
}

impl RadialModel {
    pub fn new(cutoff: RadialCutoff, rule: QuadRule) -> Self {
        Self { cutoff, rule }
    }

    /// Composite rule with 32 panels of 16 points on `[0, max_r]`.
    pub fn with_defaults(cutoff: RadialCutoff) -> Self {
        let max_r = cutoff.natural_max_r();
        Self::new(cutoff, QuadRule::composite(32, 16, 0.0, max_r).expect("valid rule"))
    }

    /// `Σ_i w_i 4π r_i² |χ(r_i)|² f(r_i)`, i.e. `∫_{R³}|χ|² f(|k|) dk`.
    pub fn integrate_sq(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.rule.integrate(|r| {
            let c = self.cutoff.eval(r);
            4.0 * PI * r * r * c * c * f(r)
        })
    }
}

/// `B_{m,x,t}·B_{n,x,s}`: zero for `m ≠ n`, otherwise
/// `(2/3)(2π)^{-3}∫|χ|²|k| cos(|k|(t − s)) dk` (independent of `x`).
pub fn mode_correlator(m: Axis, n: Axis, t: f64, s: f64, radial: &RadialModel) -> Result<f64> {
    check_axis(m)?;
    check_axis(n)?;
    if m != n {
        return Ok(0.0);
    }
    let tau = t - s;
    Ok(2.0 / 3.0 * INV_TWO_PI_CUBED * radial.integrate_sq(|r| r * (r * tau).cos()))
}

/// `Q_t(V) = 2^N |t| Σ_λ Σ_j ∫ |B_j^free(x_λ, s, V)|² ds`, the s-integral
/// taken over `[0, t]` or `[t, 0]` so that the result is non-negative.
pub fn qt_form(v: &PhasePoint, t: f64, sys: &SpinSystem, cutoff: &RadialCutoff, n_time: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let field = FreeField::new(v, cutoff);
    if field.is_zero() {
        return 0.0;
    }
    let rule = time_rule(t, n_time);
    let mut total = NeumaierSum::default();
    for x in &sys.positions {
        total.add(rule.integrate(|s| field.b(x, s).norm_squared()));
    }
    (sys.spin_dim() as f64) * t.abs() * total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_space::{AngularSpec, Helicity, RadialSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Arc<KGrid> {
        KGrid::build(
            RadialSpec { n_radial: 40, max_r: 8.0 },
            AngularSpec { n_polar: 20, n_azimuth: 40 },
        )
        .unwrap()
    }

    fn coarse() -> Arc<KGrid> {
        KGrid::build(
            RadialSpec { n_radial: 8, max_r: 6.0 },
            AngularSpec { n_polar: 4, n_azimuth: 8 },
        )
        .unwrap()
    }

    fn random_point(g: &Arc<KGrid>, seed: u64) -> PhasePoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PhasePoint::from_fn(g, |_, k| {
            let env = (-0.5 * k.norm_squared()).exp();
            let mut v = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * env;
            (v(), v())
        })
    }

    #[test]
    fn bmode_is_transverse_and_purely_imaginary_at_origin() {
        let g = coarse();
        let chi = RadialCutoff::default();
        for j in 0..3 {
            let b = bmode(j, &Vec3::new(0.3, -0.2, 0.7), &g, &chi).unwrap();
            assert!(b.transversality_defect() < 1e-13);
            let b0 = bmode(j, &Vec3::zeros(), &g, &chi).unwrap();
            for n in 0..g.len() {
                assert_eq!(b0.q(n).amax(), 0.0);
                let expect = g.dir(n).cross(&unit(j)) * field_profile(&chi, g.radius(n));
                assert!((b0.p(n) - expect).amax() < 1e-15);
            }
        }
        assert!(bmode(3, &Vec3::zeros(), &g, &chi).is_err());
    }

    #[test]
    fn distinct_axes_are_orthogonal() {
        let g = grid();
        let chi = RadialCutoff::default();
        let b1 = bmode(0, &Vec3::zeros(), &g, &chi).unwrap();
        let b2 = bmode(1, &Vec3::zeros(), &g, &chi).unwrap();
        assert!(b1.inner(&b2).unwrap().abs() < 1e-10);
    }

    #[test]
    fn emode_properties() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let x = Vec3::new(0.1, 0.2, -0.3);
        for j in 0..3 {
            let b = bmode(j, &x, &g, &chi).unwrap();
            let e = emode(j, &x, &g, &chi).unwrap();
            assert!(e.helicity().max_abs_diff(&b.scaled(-1.0)).unwrap() < 1e-15);
            assert!((e.norm_sq() - b.norm_sq()).abs() < 1e-12);
            assert!(e.transversality_defect() < 1e-13);
        }
    }

    #[test]
    fn free_symbols_two_paths_agree() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let xp = random_point(&g, 3);
        let field = FreeField::new(&xp, &chi);
        let x = Vec3::new(0.4, -0.1, 0.25);
        for &t in &[0.0, 0.7, -1.3, 4.0] {
            let bv = field.b(&x, t);
            let ev = field.e(&x, t);
            let ep = field.e_pol(&x, t);
            for j in 0..3 {
                let b = b_free(j, &x, t, &xp, &chi).unwrap();
                let e = e_free(j, &x, t, &xp, &chi).unwrap();
                let epol = pol_free(FieldKind::Electric, j, &x, t, &xp, &chi).unwrap();
                assert!((b - bv[j]).abs() < 1e-12, "B t={t} j={j}");
                assert!((e - ev[j]).abs() < 1e-12, "E t={t} j={j}");
                assert!((epol - ep[j]).abs() < 1e-12, "Epol t={t} j={j}");
            }
        }
        let zero = PhasePoint::zeros(&g);
        assert_eq!(b_free(0, &x, 1.0, &zero, &chi).unwrap(), 0.0);
        assert_eq!(e_free(1, &x, 1.0, &zero, &chi).unwrap(), 0.0);
        assert_eq!(pol_free(FieldKind::Magnetic, 2, &x, 1.0, &zero, &chi).unwrap(), 0.0);
        let b0 = b_free(1, &x, 0.0, &xp, &chi).unwrap();
        assert!((b0 - bmode(1, &x, &g, &chi).unwrap().inner(&xp).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn free_fields_satisfy_vacuum_maxwell() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let field = FreeField::new(&random_point(&g, 4), &chi);
        let x = Vec3::new(0.2, 0.1, -0.3);
        let t = 0.8;
        let h = 1e-4;
        let dt_b = (field.b(&x, t + h) - field.b(&x, t - h)) / (2.0 * h);
        let dt_e = (field.e(&x, t + h) - field.e(&x, t - h)) / (2.0 * h);
        let curl = |f: &dyn Fn(&Vec3) -> Vec3| {
            let d = |i: usize| {
                let e = unit(i) * h;
                (f(&(x + e)) - f(&(x - e))) / (2.0 * h)
            };
            let (dx, dy, dz) = (d(0), d(1), d(2));
            Vec3::new(dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0])
        };
        let curl_e = curl(&|y| field.e(y, t));
        let curl_b = curl(&|y| field.b(y, t));
        assert!((dt_b + curl_e).amax() < 1e-6, "{}", (dt_b + curl_e).amax());
        assert!((dt_e - curl_b).amax() < 1e-6);
        assert!((dt_b - field.db_dt(&x, t)).amax() < 1e-7);
        assert!((dt_e - field.de_dt(&x, t)).amax() < 1e-7);
    }

    #[test]
    fn polarized_symbols_follow_support() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let x = random_point(&g, 5);
        let xp = x.polar_project(Helicity::Plus);
        let xm = x.polar_project(Helicity::Minus);
        let pos = Vec3::new(0.1, 0.0, 0.2);
        for j in 0..3 {
            let a = pol_free(FieldKind::Electric, j, &pos, 0.6, &xp, &chi).unwrap();
            let b = e_free(j, &pos, 0.6, &xp, &chi).unwrap();
            assert!((a - b).abs() < 1e-12);
            let a = pol_free(FieldKind::Electric, j, &pos, 0.6, &xm, &chi).unwrap();
            let b = e_free(j, &pos, 0.6, &xm, &chi).unwrap();
            assert!((a + b).abs() < 1e-12);
            let whole = pol_free(FieldKind::Magnetic, j, &pos, 0.6, &x, &chi).unwrap();
            let split = pol_free(FieldKind::Magnetic, j, &pos, 0.6, &xp.add(&xm).unwrap(), &chi).unwrap();
            assert!((whole - split).abs() < 1e-12);
        }
    }

    #[test]
    fn correlator_radial_vs_grid() {
        let g = grid();
        let chi = RadialCutoff::default();
        let radial = RadialModel::new(chi, QuadRule::gauss_legendre(40, 0.0, 8.0).unwrap());
        let b = bmode(0, &Vec3::zeros(), &g, &chi).unwrap();
        for &tau in &[0.0, 0.5, 1.3] {
            let grid_val = b.free_evolve(-tau).inner(&b).unwrap();
            let radial_val = mode_correlator(0, 0, tau, 0.0, &radial).unwrap();
            assert!((grid_val - radial_val).abs() < 1e-9, "tau={tau}: {grid_val} vs {radial_val}");
            let back = mode_correlator(0, 0, 0.0, tau, &radial).unwrap();
            assert!((back - radial_val).abs() < 1e-15);
        }
        assert_eq!(mode_correlator(0, 2, 0.3, 0.1, &radial).unwrap(), 0.0);
        // t = s for the Gaussian cutoff: ∫ r³ e^{-r²} dr = 1/2
        let t0 = mode_correlator(1, 1, 0.4, 0.4, &radial).unwrap();
        let analytic = 2.0 / 3.0 * INV_TWO_PI_CUBED * 4.0 * PI * 0.5;
        assert!((t0 - analytic).abs() < 1e-12);
    }

    #[test]
    fn qt_form_basic_properties() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let sys = SpinSystem::new(vec![Vec3::zeros(), Vec3::new(0.5, 0.0, 0.0)], Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let v = random_point(&g, 6);
        assert_eq!(qt_form(&PhasePoint::zeros(&g), 1.0, &sys, &chi, 64), 0.0);
        assert_eq!(qt_form(&v, 0.0, &sys, &chi, 64), 0.0);
        let q1 = qt_form(&v, 1.5, &sys, &chi, 64);
        let q2 = qt_form(&v.scaled(2.0), 1.5, &sys, &chi, 64);
        assert!(q1 > 0.0);
        assert!((q2 - 4.0 * q1).abs() < 1e-12 * q2);
        assert!(qt_form(&v, -1.5, &sys, &chi, 64) > 0.0);
    }

    #[test]
    fn symbols_are_linear() {
        let g = coarse();
        let chi = RadialCutoff::default();
        let a = random_point(&g, 11);
        let b = random_point(&g, 12);
        let sum = a.lin_comb(0.7, &b, -1.9).unwrap();
        let x = Vec3::new(0.1, 0.3, 0.0);
        for j in 0..3 {
            let lhs = b_free(j, &x, 0.9, &sum, &chi).unwrap();
            let rhs = 0.7 * b_free(j, &x, 0.9, &a, &chi).unwrap() - 1.9 * b_free(j, &x, 0.9, &b, &chi).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
