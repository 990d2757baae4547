use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use qedbloch::bloch_core::bloch_evolve;
use qedbloch::field_symbols::{qt_form, SpinSystem};
use qedbloch::fock_oracle::{coherent_vector, FockBasis, Propagator, SparseMatrix};
use qedbloch::mode_space::{AngularSpec, KGrid, PhasePoint, RadialCutoff, RadialSpec, Vec3};
use qedbloch::radiative::Spectrum;
use qedbloch::transition::{bound_from_displacement, coherent_overlap};

fn grid() -> Arc<KGrid> {
    KGrid::build(RadialSpec { n_radial: 5, max_r: 4.0 }, AngularSpec { n_polar: 3, n_azimuth: 4 }).unwrap()
}

fn point(g: &Arc<KGrid>, c: &[f64]) -> PhasePoint {
    PhasePoint::from_fn(g, |n, k| {
        let [e1, e2] = g.frame(n);
        let env = (-0.3 * k.norm_squared()).exp();
        (
            (e1 * (c[0] + c[1] * k.x) + e2 * c[2]) * env,
            (e1 * c[3] + e2 * (c[4] + c[5] * k.y)) * env,
        )
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_evolution_is_an_isometric_group(c in coeffs(), s in -5.0..5.0f64, t in -5.0..5.0f64) {
        let g = grid();
        let x = point(&g, &c);
        let xs = x.free_evolve(s);
        prop_assert!((xs.norm_sq() - x.norm_sq()).abs() < 1e-12);
        prop_assert!(xs.free_evolve(t).max_abs_diff(&x.free_evolve(s + t)).unwrap() < 1e-12);
        prop_assert!(xs.free_evolve(-s).max_abs_diff(&x).unwrap() < 1e-12);
    }

    #[test]
    fn inner_product_is_bilinear(c1 in coeffs(), c2 in coeffs(), a in -3.0..3.0f64) {
        let g = grid();
        let (x, y) = (point(&g, &c1), point(&g, &c2));
        let lhs = x.lin_comb(a, &y, 1.0).unwrap().inner(&y).unwrap();
        let rhs = a * x.inner(&y).unwrap() + y.norm_sq();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        prop_assert!((x.inner(&y).unwrap() - y.inner(&x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn qt_form_is_quadratic_and_nonnegative(c in coeffs(), k in -3.0..3.0f64, t in -2.0..2.0f64) {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let chi = RadialCutoff::default();
        let v = point(&g, &c);
        let q = qt_form(&v, t, &sys, &chi, 32);
        prop_assert!(q >= 0.0);
        let qk = qt_form(&v.scaled(k), t, &sys, &chi, 32);
        prop_assert!((qk - k * k * q).abs() <= 1e-10 * (1.0 + q));
    }

    #[test]
    fn bloch_rotations_stay_orthogonal(bx in -1.0..1.0f64, bz in -1.0..1.0f64, t in 0.0..5.0f64) {
        let g = grid();
        let sys = SpinSystem::new(vec![Vec3::zeros()], Vec3::new(bx, 0.3, bz)).unwrap();
        let traj = bloch_evolve(&sys, &point(&g, &[0.2, 0.1, -0.3, 0.0, 0.4, 0.1]), &RadialCutoff::default(), &[t], 1e-3).unwrap();
        prop_assert!(traj.last().orthogonality_defect() < 1e-9);
    }

    #[test]
    fn correction_is_never_positive(omega in 0.1..6.0f64, w11 in 0.0..2.0f64, w22 in 0.0..2.0f64, t in 0.0..10.0f64, b in 0.1..3.0f64) {
        let f = qedbloch::mode_space::CVec3::new(Complex64::new(w11.sqrt(), 0.0), Complex64::new(0.0, w22.sqrt()), Complex64::new(0.0, 0.0));
        let s = Spectrum::from_modes([(omega, 1.0, f)]);
        prop_assert!(s.s1_third(t, b) <= 1e-15);
    }

    #[test]
    fn coherent_overlap_is_symmetric_and_bounded(c1 in coeffs(), c2 in coeffs(), h in 0.01..2.0f64) {
        let g = grid();
        let (x, y) = (point(&g, &c1), point(&g, &c2));
        let o = coherent_overlap(&x, &y, h).unwrap();
        prop_assert!(o > 0.0 || x.sub(&y).unwrap().norm_sq() / h > 1000.0);
        prop_assert!(o <= 1.0);
        prop_assert_eq!(o, coherent_overlap(&y, &x, h).unwrap());
    }

    #[test]
    fn bound_never_exceeds_its_growth_factor(c in coeffs(), t in -3.0..3.0f64, h in 0.01..1.0f64) {
        let g = grid();
        let sys = SpinSystem::single_at_origin(1.0);
        let chi = RadialCutoff::default();
        let d = point(&g, &c).scaled(0.1);
        let cap = (0.5 * qt_form(&d.fmap(), t, &sys, &chi, 32).sqrt()).exp();
        let b = bound_from_displacement(&d, t, h, &sys, &chi, 32).unwrap();
        prop_assert!(b >= 0.0 && b <= cap * (1.0 + 1e-15));
    }

    #[test]
    fn coherent_truncation_never_grows_with_cutoff(re in -2.0..2.0f64, im in -2.0..2.0f64, n in 1usize..15) {
        let alpha = [Complex64::new(re, im)];
        let m = |n| coherent_vector(&alpha, &FockBasis::new(1, n, 1, 1000).unwrap()).unwrap().truncation_mass;
        prop_assert!(m(n + 1) <= m(n) + 1e-15);
    }
}

#[test]
fn propagation_of_a_diagonal_generator_is_a_phase() {
    let k = SparseMatrix::from_diagonal(&[0.5, -1.0, 2.0]);
    let p = Propagator::new(&k).unwrap();
    let psi = qedbloch::spin::CVector::from_element(3, Complex64::new(1.0 / 3f64.sqrt(), 0.0));
    let out = p.apply(&psi, 0.8);
    for (i, e) in [0.5, -1.0, 2.0].iter().enumerate() {
        assert!((out[i] - psi[i] * Complex64::from_polar(1.0, -0.8 * e)).norm() < 1e-14);
    }
}
