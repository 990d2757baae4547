//! Leading-order spin dynamics.
//!
//! The order-zero spin symbol of particle λ is a rotated Pauli triple,
//! `S^{[λ,0]}_m(t) = Σ_n R_λ(t)_{mn} σ_n^{[λ]}`, where `R_λ` solves
//! `dR/dt = 2[Ω_λ(t)]_× R`, `R(0) = I`, with `Ω_λ(t) = B_ext + B^free(x_λ, t, X)`.
//! Integration is classical RK4 on a fixed step that is shortened to land
//! exactly on every requested sample time.

use nalgebra::{Matrix3, SVD};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field_symbols::{FreeField, SpinSystem};
use crate::mode_space::{PhasePoint, RadialCutoff, Vec3};
use crate::spin::{pauli_at, SpinSymbol};

/// Steps between polar-decomposition re-orthogonalizations.
pub const REORTHO_INTERVAL: usize = 1000;

/// Per-particle rotation matrices at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationState {
    pub t: f64,
    pub rotations: Vec<Matrix3<f64>>,
}

impl RotationState {
    pub fn identity(n: usize) -> Self {
        Self {
            t: 0.0,
            rotations: vec![Matrix3::identity(); n],
        }
    }

    /// `max_λ max(|RᵀR − I|, |det R − 1|)`.
    pub fn orthogonality_defect(&self) -> f64 {
        self.rotations.iter().map(orthogonality_defect).fold(0.0, f64::max)
    }
}

fn orthogonality_defect(r: &Matrix3<f64>) -> f64 {
    let gram = (r.transpose() * r - Matrix3::identity()).amax();
    gram.max((r.determinant() - 1.0).abs())
}

/// Sampled rotation trajectory plus the largest orthogonality drift seen
/// before any correction was applied.
#[derive(Debug, Clone)]
pub struct RotationTrajectory {
    pub samples: Vec<RotationState>,
    pub max_drift: f64,
}

impl RotationTrajectory {
    pub fn last(&self) -> &RotationState {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

fn cross_matrix(w: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn polar_orthogonalize(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = SVD::new(*r, true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    u * vt
}

fn validate_times(times: &[f64], dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::config("sample times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("sample times must be non-decreasing"));
    }
    Ok(())
}

/// Integrates one particle's rotation, returning samples at `times`.
fn evolve_rotation(
    omega: impl Fn(f64) -> Vec3,
    times: &[f64],
    dt: f64,
) -> (Vec<Matrix3<f64>>, f64) {
    let rhs = |t: f64, r: &Matrix3<f64>| cross_matrix(&omega(t)) * r * 2.0;
    let mut r = Matrix3::identity();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut max_drift: f64 = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let h = dt.min(target - t);
            let k1 = rhs(t, &r);
            let k2 = rhs(t + 0.5 * h, &(r + k1 * (0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &(r + k2 * (0.5 * h)));
            let k4 = rhs(t + h, &(r + k3 * h));
            r += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            // land exactly on the target to avoid a sliver step
            t = if target - (t + h) < 1e-14 * target.max(1.0) { target } else { t + h };
            steps += 1;
            if steps.is_multiple_of(REORTHO_INTERVAL) {
                max_drift = max_drift.max(orthogonality_defect(&r));
                r = polar_orthogonalize(&r);
            }
        }
        max_drift = max_drift.max(orthogonality_defect(&r));
        out.push(r);
    }
    (out, max_drift)
}

/// Rotations `R_λ(t)` for every particle at the sample `times`.
pub fn bloch_evolve(
    sys: &SpinSystem,
    xp: &PhasePoint,
    cutoff: &RadialCutoff,
    times: &[f64],
    dt: f64,
) -> Result<RotationTrajectory> {
    sys.validate()?;
    validate_times(times, dt)?;
    let field = FreeField::new(xp, cutoff);
    let per_particle: Vec<(Vec<Matrix3<f64>>, f64)> = sys
        .positions
        .par_iter()
        .map(|x| {
            let omega = |t: f64| sys.b_ext + field.b(x, t);
            evolve_rotation(omega, times, dt)
        })
        .collect();
    let max_drift = per_particle.iter().map(|p| p.1).fold(0.0, f64::max);
    let samples = times
        .iter()
        .enumerate()
        .map(|(i, &t)| RotationState {
            t,
            rotations: per_particle.iter().map(|p| p.0[i]).collect(),
        })
        .collect();
    Ok(RotationTrajectory { samples, max_drift })
}

/// Closed-form rotation for `X = 0`, `B_ext = (0, 0, |B|)`: a turn about z by
/// `2|B|t`.
pub fn z_rotation(bmag: f64, t: f64) -> Matrix3<f64> {
    let (s, c) = (2.0 * bmag * t).sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Order-zero spin symbol of particle `lambda`:
/// component `m` is `Σ_n (R_λ)_{mn} σ_n^{[λ]}`.
pub fn spin_symbol0(rot: &RotationState, lambda: usize) -> Result<SpinSymbol> {
    let n = rot.rotations.len();
    let r = rot.rotations.get(lambda).ok_or_else(|| {
        Error::domain(format!("particle index {lambda} out of range for {n} particles"))
    })?;
    let sig = [
        pauli_at(0, lambda, n)?,
        pauli_at(1, lambda, n)?,
        pauli_at(2, lambda, n)?,
    ];
    let mut sym = SpinSymbol::zeros(1 << n, lambda, rot.t, 0);
    for m in 0..3 {
        for k in 0..3 {
            sym.components[m] += &sig[k] * Complex64::new(r[(m, k)], 0.0);
        }
    }
    Ok(sym)
}

/// Classical Bloch vectors `dS_λ/dt = 2(B_ext + B^free(x_λ, t, X)) × S_λ`.
pub fn bloch_vector(
    sys: &SpinSystem,
    xp: &PhasePoint,
    cutoff: &RadialCutoff,
    s0: &[Vec3],
    times: &[f64],
    dt: f64,
) -> Result<Vec<Vec<Vec3>>> {
    sys.validate()?;
    validate_times(times, dt)?;
    if s0.len() != sys.n_particles() {
        return Err(Error::config("one initial Bloch vector per particle is required"));
    }
    if s0.iter().any(|s| !s.iter().all(|c| c.is_finite())) {
        return Err(Error::config("initial Bloch vectors must be finite"));
    }
    let field = FreeField::new(xp, cutoff);
    let per_particle: Vec<Vec<Vec3>> = sys
        .positions
        .par_iter()
        .zip(s0.par_iter())
        .map(|(x, s_init)| {
            let rhs = |t: f64, s: &Vec3| (sys.b_ext + field.b(x, t)).cross(s) * 2.0;
            let mut s = *s_init;
            let mut t = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &target in times {
                while t < target {
                    let h = dt.min(target - t);
                    let k1 = rhs(t, &s);
                    let k2 = rhs(t + 0.5 * h, &(s + k1 * (0.5 * h)));
                    let k3 = rhs(t + 0.5 * h, &(s + k2 * (0.5 * h)));
                    let k4 = rhs(t + h, &(s + k3 * h));
                    s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                    t = if target - (t + h) < 1e-14 * target.max(1.0) { target } else { t + h };
                }
                out.push(s);
            }
            out
        })
        .collect();
    Ok((0..times.len())
        .map(|i| per_particle.iter().map(|p| p[i]).collect())
        .collect())
}

/// Uniform sample times `0, T/(n−1), …, T`.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![t_final],
        _ => (0..n).map(|i| t_final * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_space::{AngularSpec, KGrid, RadialSpec};
    use crate::spin::{pauli, spin_state, CMatrix};
    use std::f64::consts::PI;

    fn zero_point() -> PhasePoint {
        let g = KGrid::build(RadialSpec { n_radial: 4, max_r: 4.0 }, AngularSpec { n_polar: 2, n_azimuth: 3 }).unwrap();
        PhasePoint::zeros(&g)
    }

    fn driven_point() -> PhasePoint {
        let g = KGrid::build(RadialSpec { n_radial: 6, max_r: 5.0 }, AngularSpec { n_polar: 3, n_azimuth: 4 }).unwrap();
        PhasePoint::from_fn(&g, |n, k| {
            let [e1, e2] = g.frame(n);
            (e1 * (3.0 * (-0.5 * k.norm_squared()).exp()), e2 * (1.5 * k.x).sin())
        })
    }

    #[test]
    fn free_precession_matches_closed_form() {
        let sys = SpinSystem::single_at_origin(1.0);
        let times = uniform_times(10.0, 11);
        let traj = bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &times, 1e-3).unwrap();
        for s in &traj.samples {
            let err = (s.rotations[0] - z_rotation(1.0, s.t)).amax();
            assert!(err < 1e-10, "t={} err={err}", s.t);
        }
        assert!(traj.max_drift < 1e-9);
    }

    #[test]
    fn half_turn() {
        let b = 0.8;
        let sys = SpinSystem::single_at_origin(b);
        let traj = bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &[PI / (2.0 * b)], 1e-3).unwrap();
        let r = traj.last().rotations[0];
        assert!((r * Vec3::x() + Vec3::x()).amax() < 1e-10);
        assert!((r * Vec3::z() - Vec3::z()).amax() < 1e-10);
    }

    #[test]
    fn no_field_no_motion() {
        let sys = SpinSystem::new(vec![Vec3::zeros()], Vec3::zeros()).unwrap();
        let traj = bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &[0.5, 3.0], 0.01).unwrap();
        for s in &traj.samples {
            assert!((s.rotations[0] - Matrix3::identity()).amax() < 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_step() {
        let sys = SpinSystem::single_at_origin(1.0);
        assert!(matches!(
            bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &[1.0], 0.0),
            Err(Error::Config(_))
        ));
        assert!(bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &[1.0, 0.5], 0.1).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let sys = SpinSystem::single_at_origin(1.0);
        let err = |dt: f64| {
            let times = uniform_times(5.0, 26);
            let traj = bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &times, dt).unwrap();
            traj.samples
                .iter()
                .map(|s| (s.rotations[0] - z_rotation(1.0, s.t)).amax())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.05) / err(0.025);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn driven_rotations_stay_orthogonal() {
        let sys = SpinSystem::new(vec![Vec3::zeros(), Vec3::new(0.3, -0.2, 0.1)], Vec3::new(0.1, 0.0, 1.0)).unwrap();
        let times = uniform_times(4.0, 9);
        let traj = bloch_evolve(&sys, &driven_point(), &RadialCutoff::default(), &times, 1e-3).unwrap();
        for s in &traj.samples {
            assert!(s.orthogonality_defect() < 1e-9);
        }
        assert!(traj.max_drift < 1e-9);
        // the drive actually does something
        assert!((traj.last().rotations[0] - traj.last().rotations[1]).amax() > 1e-3);
    }

    #[test]
    fn spin_symbol_properties() {
        let sym = spin_symbol0(&RotationState::identity(1), 0).unwrap();
        for m in 0..3 {
            assert!((&sym.components[m] - pauli(m)).norm() < 1e-15);
        }
        let sys = SpinSystem::new(vec![Vec3::zeros(), Vec3::new(0.3, -0.2, 0.1)], Vec3::new(0.1, 0.0, 1.0)).unwrap();
        let traj = bloch_evolve(&sys, &driven_point(), &RadialCutoff::default(), &[2.5], 1e-3).unwrap();
        for lambda in 0..2 {
            let sym = spin_symbol0(traj.last(), lambda).unwrap();
            assert!(sym.hermiticity_defect() < 1e-13);
            for m in 0..3 {
                let a = &sym.components[m];
                assert!((a * a - CMatrix::identity(4, 4)).norm() < 1e-9);
                assert!(a.trace().norm() < 1e-14);
            }
        }
        assert!(spin_symbol0(traj.last(), 2).is_err());
    }

    #[test]
    fn sigma3_expectation_stays_one_without_drive() {
        let sys = SpinSystem::single_at_origin(1.3);
        let a = spin_state(&[1.0, 0.0], &[]).unwrap();
        let traj = bloch_evolve(&sys, &zero_point(), &RadialCutoff::default(), &uniform_times(3.0, 7), 1e-3).unwrap();
        for s in &traj.samples {
            let e = spin_symbol0(s, 0).unwrap().expectation(&a);
            assert!((e[2].re - 1.0).abs() < 1e-12 && e[2].im.abs() < 1e-15);
        }
    }

    #[test]
    fn bloch_vector_cases() {
        let sys = SpinSystem::single_at_origin(1.0);
        let x0 = zero_point();
        let times = uniform_times(6.0, 13);
        let up = bloch_vector(&sys, &x0, &RadialCutoff::default(), &[Vec3::z()], &times, 1e-3).unwrap();
        assert!(up.iter().all(|s| (s[0] - Vec3::z()).amax() < 1e-15));
        let xs = bloch_vector(&sys, &x0, &RadialCutoff::default(), &[Vec3::x()], &times, 1e-3).unwrap();
        for (s, t) in xs.iter().zip(&times) {
            let expect = Vec3::new((2.0 * t).cos(), (2.0 * t).sin(), 0.0);
            assert!((s[0] - expect).amax() < 1e-10);
        }
        let sys2 = SpinSystem::new(vec![Vec3::zeros()], Vec3::new(0.2, 0.0, 0.7)).unwrap();
        let s0 = Vec3::new(0.3, -0.4, 1.2);
        let dr = bloch_vector(&sys2, &driven_point(), &RadialCutoff::default(), &[s0], &times, 1e-3).unwrap();
        assert!(dr.iter().all(|s| (s[0].norm() - s0.norm()).abs() < 1e-10));
    }
}
