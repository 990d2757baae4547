//! Coherent-state overlaps and the transition-probability bound.

use crate::error::{Error, Result};
use crate::field_symbols::{qt_form, SpinSystem};
use crate::mode_space::{PhasePoint, RadialCutoff};
use crate::spin::CVector;

/// `|⟨e^{itH/ħ}(Ψ_X⊗a), Ψ_Z⊗b⟩|` is bounded for this query.
#[derive(Debug, Clone)]
pub struct TransitionQuery {
    pub x: PhasePoint,
    pub z: PhasePoint,
    pub t: f64,
    pub hbar: f64,
    pub a: CVector,
    pub b: CVector,
}

impl TransitionQuery {
    pub fn validate(&self, sys: &SpinSystem) -> Result<()> {
        if !(self.hbar > 0.0) {
            return Err(Error::domain(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !self.t.is_finite() {
            return Err(Error::domain("time must be finite"));
        }
        if !self.x.same_grid(&self.z) {
            return Err(Error::GridMismatch);
        }
        for (name, v) in [("a", &self.a), ("b", &self.b)] {
            if v.len() != sys.spin_dim() {
                return Err(Error::config(format!("spin state {name} has dimension {}, expected {}", v.len(), sys.spin_dim())));
            }
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::config(format!("spin state {name} must have unit norm")));
            }
        }
        Ok(())
    }

    /// `D = X − χ_{−t} Z`.
    pub fn displacement(&self) -> Result<PhasePoint> {
        self.x.sub(&self.z.free_evolve(-self.t))
    }
}

/// `e^{−|X−Z|²/4ħ}`, the modulus of `⟨Ψ_X, Ψ_Z⟩`.
pub fn coherent_overlap(x: &PhasePoint, z: &PhasePoint, hbar: f64) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
    }
    Ok((-x.sub(z)?.norm_sq() / (4.0 * hbar)).exp())
}

/// Bound from a displacement `D`: `e^{½ Q_t(F D)^{1/2}} e^{−|D|²/4ħ}`.
pub fn bound_from_displacement(d: &PhasePoint, t: f64, hbar: f64, sys: &SpinSystem, cutoff: &RadialCutoff, n_time: usize) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
    }
    let q = qt_form(&d.fmap(), t, sys, cutoff, n_time);
    Ok((0.5 * q.sqrt() - d.norm_sq() / (4.0 * hbar)).exp())
}

pub fn transition_bound(q: &TransitionQuery, sys: &SpinSystem, cutoff: &RadialCutoff, n_time: usize) -> Result<f64> {
    q.validate(sys)?;
    bound_from_displacement(&q.displacement()?, q.t, q.hbar, sys, cutoff, n_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_space::{AngularSpec, KGrid, RadialSpec, Vec3};
    use crate::spin::spin_state;
    use std::sync::Arc;

    fn grid() -> Arc<KGrid> {
        KGrid::build(RadialSpec { n_radial: 6, max_r: 4.0 }, AngularSpec { n_polar: 4, n_azimuth: 6 }).unwrap()
    }

    fn point(g: &Arc<KGrid>, s: f64) -> PhasePoint {
        PhasePoint::from_fn(g, |n, k| (g.frame(n)[0] * (s * k.y), g.frame(n)[1] * (0.3 + s * k.z)))
    }

    fn query(x: PhasePoint, z: PhasePoint, t: f64, hbar: f64) -> TransitionQuery {
        let a = spin_state(&[1.0, 0.0], &[]).unwrap();
        TransitionQuery { x, z, t, hbar, a: a.clone(), b: a }
    }

    #[test]
    fn overlap_basics() {
        let g = grid();
        let x = point(&g, 0.2);
        assert_eq!(coherent_overlap(&x, &x, 0.1).unwrap(), 1.0);
        let mut last = 1.0;
        for s in [0.25, 0.3, 0.5] {
            let v = coherent_overlap(&x, &point(&g, s), 0.1).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(matches!(coherent_overlap(&x, &x, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn bound_is_one_on_the_free_trajectory() {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let x = point(&g, 0.4);
        for t in [0.0, 0.7, 3.0, -1.2] {
            let q = query(x.clone(), x.free_evolve(t), t, 0.05);
            assert_eq!(transition_bound(&q, &sys, &RadialCutoff::default(), 64).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_time_is_the_overlap() {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let (x, z) = (point(&g, 0.4), point(&g, 0.1));
        let q = query(x.clone(), z.clone(), 0.0, 0.2);
        let b = transition_bound(&q, &sys, &RadialCutoff::default(), 64).unwrap();
        assert!((b - coherent_overlap(&x, &z, 0.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn depends_only_on_the_displacement() {
        let g = grid();
        let sys = SpinSystem::new(vec![Vec3::zeros(), Vec3::new(0.5, 0.0, 0.0)], Vec3::z()).unwrap();
        let chi = RadialCutoff::default();
        let t = 1.3;
        let (x1, z1) = (point(&g, 0.4), point(&g, -0.2));
        let d = x1.sub(&z1.free_evolve(-t)).unwrap();
        let x2 = point(&g, 0.9);
        let z2 = x2.sub(&d).unwrap().free_evolve(t);
        let mk = |x: PhasePoint, z: PhasePoint| {
            let a = spin_state(&[1.0, 0.0, 0.0, 0.0], &[]).unwrap();
            TransitionQuery { x, z, t, hbar: 0.3, a: a.clone(), b: a }
        };
        let b1 = transition_bound(&mk(x1, z1), &sys, &chi, 64).unwrap();
        let b2 = transition_bound(&mk(x2, z2), &sys, &chi, 64).unwrap();
        assert!((b1 - b2).abs() < 1e-12 * b1.max(1.0));
    }

    #[test]
    fn vanishes_as_hbar_shrinks() {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let d = point(&g, 0.3).scaled(0.05);
        let chi = RadialCutoff::default();
        let cap = (0.5 * qt_form(&d.fmap(), 2.0, &sys, &chi, 64).sqrt()).exp();
        let vals: Vec<f64> = [1.0, 0.1, 0.001]
            .iter()
            .map(|&h| bound_from_displacement(&d, 2.0, h, &sys, &chi, 64).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0 && v <= cap), "{vals:?} {cap}");
        assert!(vals[2] < vals[1] && vals[1] < vals[0] && vals[2] < 1e-6);
    }

    #[test]
    fn rejects_bad_queries() {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let x = point(&g, 0.1);
        let mut q = query(x.clone(), x.clone(), 1.0, -0.1);
        assert!(matches!(transition_bound(&q, &sys, &RadialCutoff::default(), 64), Err(Error::Domain(_))));
        q.hbar = 0.1;
        q.a = CVector::from_element(2, num_complex::Complex64::new(1.0, 0.0));
        assert!(matches!(transition_bound(&q, &sys, &RadialCutoff::default(), 64), Err(Error::Config(_))));
        let other = point(&grid(), 0.1);
        let q = query(x, other, 1.0, 0.1);
        assert!(matches!(transition_bound(&q, &sys, &RadialCutoff::default(), 64), Err(Error::GridMismatch)));
    }
}
