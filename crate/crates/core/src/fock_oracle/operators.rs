use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field_symbols::SpinSystem;
use crate::spin::{pauli_at, CMatrix, CVector};

use super::basis::FockBasis;
use super::modes::DiscreteModeSet;

/// Compressed-row sparse complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

/// Accumulates `(row, col) += value` entries before compression.
#[derive(Debug, Default)]
struct Triplets {
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl Triplets {
    fn add(&mut self, r: usize, c: usize, v: Complex64) {
        if v != Complex64::new(0.0, 0.0) {
            *self.entries.entry((r, c)).or_default() += v;
        }
    }

    fn build(self, dim: usize) -> SparseMatrix {
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        for ((r, c), v) in self.entries {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { dim, row_ptr, cols, vals }
    }
}

impl SparseMatrix {
    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut t = Triplets::default();
        for (i, &v) in d.iter().enumerate() {
            t.add(i, i, Complex64::new(v, 0.0));
        }
        t.build(d.len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            out[r] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// Largest `|A_rc − conj(A_cr)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum of a Hermitian matrix.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim {
            let mut diag = 0.0;
            let mut radius = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    diag += self.vals[k].re;
                } else {
                    radius += self.vals[k].norm();
                }
            }
            lo = lo.min(diag - radius);
            hi = hi.max(diag + radius);
        }
        if self.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Diagonal part, as a vector.
    pub fn diagonal(&self) -> DVector<Complex64> {
        let mut d = DVector::zeros(self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d[r] += self.vals[k];
                }
            }
        }
        d
    }
}

/// Emits the nonzero entries of `Σ_i (c_i a_i + d_i a_i†)` on the occupation
/// part of the basis, as `(row_occ, col_occ, value)`.
fn ladder_entries(
    basis: &FockBasis,
    annihilate: &[Complex64],
    create: &[Complex64],
    mut emit: impl FnMut(usize, usize, Complex64),
) {
    for col in 0..basis.n_occupations() {
        let occ = basis.occupation(col).to_vec();
        for i in 0..basis.n_modes() {
            let n = occ[i];
            if n > 0 && annihilate[i] != Complex64::new(0.0, 0.0) {
                let mut lower = occ.clone();
                lower[i] -= 1;
                let row = basis.occupation_index(&lower).expect("lower shell is in the basis");
                emit(row, col, annihilate[i] * (n as f64).sqrt());
            }
            if create[i] != Complex64::new(0.0, 0.0) {
                let mut upper = occ.clone();
                upper[i] += 1;
                if let Some(row) = basis.occupation_index(&upper) {
                    emit(row, col, create[i] * ((n + 1) as f64).sqrt());
                }
            }
        }
    }
}

fn check_system(basis: &FockBasis, modes: &DiscreteModeSet, sys: &SpinSystem) -> Result<()> {
    if basis.n_modes() != modes.len() {
        return Err(Error::config("basis and mode set disagree on the mode count"));
    }
    if basis.n_spins() != sys.n_particles() || modes.n_particles() != sys.n_particles() {
        return Err(Error::config("basis, mode set and spin system disagree on the particle count"));
    }
    Ok(())
}

/// Coefficients `(√(ħ/2)√w_i f̄_i, √(ħ/2)√w_i f_i)` of `a_i` and `a_i†` in `Φ_S(f)`.
fn segal_coefficients(modes: &DiscreteModeSet, f: &[Complex64], hbar: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let s = (hbar / 2.0).sqrt();
    let ann = modes.modes().iter().zip(f).map(|(md, fi)| fi.conj() * (s * md.weight.sqrt())).collect();
    let cre = modes.modes().iter().zip(f).map(|(md, fi)| *fi * (s * md.weight.sqrt())).collect();
    (ann, cre)
}

/// Adds `(field operator on occupations) ⊗ spin_op` to `acc`.
fn add_field_times_spin(acc: &mut Triplets, basis: &FockBasis, ann: &[Complex64], cre: &[Complex64], spin_op: &CMatrix, scale: Complex64) {
    let sd = basis.spin_dim();
    ladder_entries(basis, ann, cre, |r, c, v| {
        for si in 0..sd {
            for sj in 0..sd {
                let s = spin_op[(si, sj)];
                if s != Complex64::new(0.0, 0.0) {
                    acc.add(basis.full_index(r, si), basis.full_index(c, sj), v * s * scale);
                }
            }
        }
    });
}

/// `(diagonal occupation weight) ⊗ spin_op` for every occupation.
fn add_diag_times_spin(acc: &mut Triplets, basis: &FockBasis, weight: impl Fn(&[u32]) -> f64, spin_op: &CMatrix) {
    let sd = basis.spin_dim();
    for occ in 0..basis.n_occupations() {
        let w = weight(basis.occupation(occ));
        for si in 0..sd {
            for sj in 0..sd {
                let s = spin_op[(si, sj)];
                if s != Complex64::new(0.0, 0.0) && w != 0.0 {
                    acc.add(basis.full_index(occ, si), basis.full_index(occ, sj), s * w);
                }
            }
        }
    }
}

/// `H/ħ = Σ ω_i a_i†a_i + Σ_λ Σ_m (B_m^ext + Φ_S(f_{λ,m})) σ_m^{[λ]}`, with
/// `Φ_S(f) = √(ħ/2) Σ √w_i (f̄_i a_i + f_i a_i†)`. Working with `H/ħ` keeps
/// the propagator `e^{−itH/ħ}` free of explicit ħ factors.
pub fn assemble_hamiltonian(
    basis: &FockBasis,
    modes: &DiscreteModeSet,
    sys: &SpinSystem,
    hbar: f64,
) -> Result<SparseMatrix> {
    check_hbar(hbar)?;
    check_system(basis, modes, sys)?;
    let n = sys.n_particles();
    let mut acc = Triplets::default();
    let omegas: Vec<f64> = modes.modes().iter().map(|m| m.omega).collect();
    let eye = CMatrix::identity(basis.spin_dim(), basis.spin_dim());
    add_diag_times_spin(&mut acc, basis, |occ| occ.iter().zip(&omegas).map(|(&k, w)| k as f64 * w).sum(), &eye);
    for lambda in 0..n {
        for m in 0..3 {
            let sigma = pauli_at(m, lambda, n)?;
            let b = sys.b_ext[m];
            add_diag_times_spin(&mut acc, basis, |_| b, &sigma);
            let (ann, cre) = segal_coefficients(modes, modes.coupling(lambda, m), hbar);
            add_field_times_spin(&mut acc, basis, &ann, &cre, &sigma, Complex64::new(1.0, 0.0));
        }
    }
    Ok(acc.build(basis.dim()))
}

/// `d⟨N⟩/dt` operator `i[H/ħ, N] = i Σ_λ Σ_m σ_m^{[λ]} √(ħ/2) Σ √w_i (f̄_i a_i − f_i a_i†)`.
pub fn rate_operator(basis: &FockBasis, modes: &DiscreteModeSet, sys: &SpinSystem, hbar: f64) -> Result<SparseMatrix> {
    check_hbar(hbar)?;
    check_system(basis, modes, sys)?;
    let n = sys.n_particles();
    let mut acc = Triplets::default();
    for lambda in 0..n {
        for m in 0..3 {
            let sigma = pauli_at(m, lambda, n)?;
            let (ann, cre) = segal_coefficients(modes, modes.coupling(lambda, m), hbar);
            let cre: Vec<Complex64> = cre.into_iter().map(|c| -c).collect();
            add_field_times_spin(&mut acc, basis, &ann, &cre, &sigma, Complex64::i());
        }
    }
    Ok(acc.build(basis.dim()))
}

/// Total photon number `Σ a_i†a_i ⊗ I`.
pub fn number_operator(basis: &FockBasis) -> SparseMatrix {
    let mut acc = Triplets::default();
    let eye = CMatrix::identity(basis.spin_dim(), basis.spin_dim());
    add_diag_times_spin(&mut acc, basis, |occ| occ.iter().map(|&k| k as f64).sum(), &eye);
    acc.build(basis.dim())
}

/// `I ⊗ σ_m^{[λ]}`.
pub fn spin_operator(basis: &FockBasis, lambda: usize, m: usize) -> Result<SparseMatrix> {
    let sigma = pauli_at(m, lambda, basis.n_spins())?;
    let mut acc = Triplets::default();
    add_diag_times_spin(&mut acc, basis, |_| 1.0, &sigma);
    Ok(acc.build(basis.dim()))
}

/// `Φ_S(f) ⊗ I` for mode components `f`.
pub fn segal_field(basis: &FockBasis, modes: &DiscreteModeSet, f: &[Complex64], hbar: f64) -> Result<SparseMatrix> {
    check_hbar(hbar)?;
    if f.len() != modes.len() || basis.n_modes() != modes.len() {
        return Err(Error::config("one coefficient per mode is required"));
    }
    let (ann, cre) = segal_coefficients(modes, f, hbar);
    let mut acc = Triplets::default();
    let eye = CMatrix::identity(basis.spin_dim(), basis.spin_dim());
    add_field_times_spin(&mut acc, basis, &ann, &cre, &eye, Complex64::new(1.0, 0.0));
    Ok(acc.build(basis.dim()))
}

/// Photon parity `e^{iπN} ⊗ σ₃^{[0]}` (single spin).
pub fn parity_operator(basis: &FockBasis) -> Result<SparseMatrix> {
    let sigma = pauli_at(2, 0, basis.n_spins())?;
    let mut acc = Triplets::default();
    add_diag_times_spin(
        &mut acc,
        basis,
        |occ| if occ.iter().map(|&k| k as u64).sum::<u64>() % 2 == 0 { 1.0 } else { -1.0 },
        &sigma,
    );
    Ok(acc.build(basis.dim()))
}

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::domain(format!("ħ must be positive, got {hbar}")));
    }
    Ok(())
}
