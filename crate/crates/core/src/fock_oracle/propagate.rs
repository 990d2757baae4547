use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{CMatrix, CVector};

use super::operators::SparseMatrix;

/// Largest dimension diagonalized densely; larger problems use the
/// Chebyshev expansion.
pub const DENSE_LIMIT: usize = 2000;

/// Truncation tolerance of the Chebyshev series.
pub const CHEBYSHEV_TOL: f64 = 1e-12;

/// `e^{−itK}` for a Hermitian generator `K` (here `H/ħ`).
#[derive(Debug, Clone)]
pub enum Propagator {
    Dense { vectors: CMatrix, values: DVector<f64> },
    Chebyshev { op: SparseMatrix, center: f64, half_width: f64 },
}

impl Propagator {
    pub fn new(k: &SparseMatrix) -> Result<Self> {
        if k.dim() <= DENSE_LIMIT {
            Self::dense(k)
        } else {
            Ok(Self::chebyshev(k))
        }
    }

    pub fn dense(k: &SparseMatrix) -> Result<Self> {
        let eig = SymmetricEigen::try_new(k.to_dense(), 1e-14, 0).ok_or_else(|| {
            Error::numeric("fock_oracle", format!("eigensolver did not converge for dimension {}", k.dim()))
        })?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("fock_oracle", "eigensolver returned non-finite values"));
        }
        Ok(Propagator::Dense { vectors: eig.eigenvectors, values: eig.eigenvalues })
    }

    pub fn chebyshev(k: &SparseMatrix) -> Self {
        let (lo, hi) = k.spectral_bounds();
        let half_width = (0.5 * (hi - lo)).max(1e-300);
        Propagator::Chebyshev { op: k.clone(), center: 0.5 * (hi + lo), half_width }
    }

    pub fn eigenvalues(&self) -> Option<&DVector<f64>> {
        match self {
            Propagator::Dense { values, .. } => Some(values),
            Propagator::Chebyshev { .. } => None,
        }
    }

    /// `e^{−itK} ψ`.
    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        match self {
            Propagator::Dense { vectors, values } => {
                let mut c = vectors.ad_mul(psi);
                for (ci, e) in c.iter_mut().zip(values.iter()) {
                    *ci *= Complex64::from_polar(1.0, -t * e);
                }
                vectors * c
            }
            Propagator::Chebyshev { op, center, half_width } => chebyshev_apply(op, *center, *half_width, psi, t),
        }
    }
}

/// Bessel functions `J_0..J_{n}` of real argument by Miller's backward
/// recurrence normalized with `J_0 + 2Σ J_{2k} = 1`.
fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    let start = (n + 20 + (x.abs() as usize) * 2) | 1;
    let mut vals = vec![0.0; start + 2];
    let (mut jp1, mut j) = (0.0, 1e-300);
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        vals[k - 1] = j;
        if j.abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    let norm: f64 = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(n + 1);
    vals.iter().map(|v| v / norm).collect()
}

fn chebyshev_apply(op: &SparseMatrix, center: f64, half: f64, psi: &CVector, t: f64) -> CVector {
    let x = t * half;
    let n_terms = (x.abs() * 1.5) as usize + 40;
    let bessel = bessel_j_sequence(x.abs(), n_terms);
    let scaled = |v: &CVector| (op.mul_vec(v) - v * Complex64::new(center, 0.0)) / Complex64::new(half, 0.0);
    // e^{−iτA} = Σ (2 − δ_k0)(−i)^k J_k(τ) T_k(A) for τ ≥ 0; negative τ conjugates the phase
    let minus_i = if x >= 0.0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
    let mut t_prev = psi.clone();
    let mut t_cur = scaled(psi);
    let mut out = psi * Complex64::new(bessel[0], 0.0);
    let mut phase = minus_i;
    out += &t_cur * (phase * 2.0 * bessel[1]);
    for k in 2..=n_terms {
        let t_next = scaled(&t_cur) * Complex64::new(2.0, 0.0) - &t_prev;
        phase *= minus_i;
        out += &t_next * (phase * 2.0 * bessel[k]);
        if bessel[k].abs() < CHEBYSHEV_TOL && k as f64 > x.abs() {
            break;
        }
        t_prev = t_cur;
        t_cur = t_next;
    }
    out * Complex64::from_polar(1.0, -t * center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_symbols::SpinSystem;
    use crate::fock_oracle::basis::FockBasis;
    use crate::fock_oracle::modes::{DiscreteModeSet, HelicityPick, PolarizationChoice};
    use crate::fock_oracle::operators::assemble_hamiltonian;
    use crate::mode_space::{KGrid, RadialCutoff, Vec3};

    fn system() -> SparseMatrix {
        let g = KGrid::custom(vec![Vec3::new(1.0, 0.4, 0.0), Vec3::new(0.0, 1.5, 0.3)], vec![300.0, 200.0]).unwrap();
        let sys = SpinSystem::new(vec![Vec3::zeros()], Vec3::new(0.1, 0.0, 0.8)).unwrap();
        let modes = DiscreteModeSet::all_nodes(&g, PolarizationChoice::Helicity(HelicityPick::Both), &sys, &RadialCutoff::default()).unwrap();
        let basis = FockBasis::new(modes.len(), 5, 1, 20_000).unwrap();
        assemble_hamiltonian(&basis, &modes, &sys, 0.2).unwrap()
    }

    fn start(dim: usize) -> CVector {
        let v = CVector::from_fn(dim, |i, _| Complex64::new(1.0 / (1.0 + i as f64), (i as f64 * 0.3).sin()));
        let n = v.norm();
        v / Complex64::new(n, 0.0)
    }

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(2.5, 5);
        // reference values of J_0..J_3 at 2.5
        let expect = [-0.048_383_776_468_197_92, 0.497_094_102_464_274_1, 0.446_059_058_439_617_24, 0.216_600_391_039_113_58];
        for k in 0..4 {
            assert!((j[k] - expect[k]).abs() < 1e-13, "J_{k}");
        }
    }

    #[test]
    fn dense_propagation_is_unitary_and_reversible() {
        let k = system();
        let p = Propagator::dense(&k).unwrap();
        let psi = start(k.dim());
        assert!((p.apply(&psi, 0.0) - &psi).norm() < 1e-13);
        let fwd = p.apply(&psi, 2.3);
        assert!((fwd.norm() - 1.0).abs() < 1e-12);
        assert!((p.apply(&fwd, -2.3) - &psi).norm() < 1e-11);
        let kd = k.to_dense();
        let e0 = psi.dotc(&(&kd * &psi)).re;
        let e1 = fwd.dotc(&(&kd * &fwd)).re;
        assert!((e0 - e1).abs() < 1e-11);
    }

    #[test]
    fn chebyshev_matches_dense() {
        let k = system();
        let psi = start(k.dim());
        let (d, c) = (Propagator::dense(&k).unwrap(), Propagator::chebyshev(&k));
        for t in [0.0, 0.7, -1.9, 6.0] {
            assert!((d.apply(&psi, t) - c.apply(&psi, t)).norm() < 1e-10, "t={t}");
        }
    }
}
