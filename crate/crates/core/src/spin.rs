//! Pauli matrices on `(C²)^{⊗N}` and operator-valued spin symbols.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-site Pauli matrix, `m ∈ {0, 1, 2}` for σ₁, σ₂, σ₃.
pub fn pauli(m: usize) -> CMatrix {
    match m {
        0 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index {m} out of range"),
    }
}

/// `σ_m^{[λ]} = I ⊗ … ⊗ σ_m ⊗ … ⊗ I` with σ_m in slot `lambda` (0-based;
/// slot 0 is the most significant factor).
pub fn pauli_at(m: usize, lambda: usize, n_particles: usize) -> Result<CMatrix> {
    if lambda >= n_particles {
        return Err(Error::domain(format!(
            "particle index {lambda} out of range for {n_particles} particles"
        )));
    }
    if m >= 3 {
        return Err(Error::domain(format!("Pauli index {m} out of range")));
    }
    let mut out = CMatrix::identity(1, 1);
    for slot in 0..n_particles {
        let factor = if slot == lambda {
            pauli(m)
        } else {
            CMatrix::identity(2, 2)
        };
        out = out.kronecker(&factor);
    }
    Ok(out)
}

/// Operator-valued 3-vector on spin space, e.g. a spin or field symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSymbol {
    pub components: [CMatrix; 3],
    pub particle: usize,
    pub t: f64,
    pub order: usize,
}

impl SpinSymbol {
    pub fn zeros(dim: usize, particle: usize, t: f64, order: usize) -> Self {
        Self {
            components: std::array::from_fn(|_| CMatrix::zeros(dim, dim)),
            particle,
            t,
            order,
        }
    }

    pub fn dim(&self) -> usize {
        self.components[0].nrows()
    }

    /// Largest `|A − A†|` entry over the three components.
    pub fn hermiticity_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|a| (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// `⟨a, A_m a⟩` for each component.
    pub fn expectation(&self, a: &CVector) -> [Complex64; 3] {
        std::array::from_fn(|m| a.dotc(&(&self.components[m] * a)))
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|a| a.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

/// Unit spin state from real and imaginary parts, normalized.
pub fn spin_state(re: &[f64], im: &[f64]) -> Result<CVector> {
    if re.is_empty() || (!im.is_empty() && im.len() != re.len()) {
        return Err(Error::config("spin state: inconsistent component counts"));
    }
    if !re.len().is_power_of_two() || re.len() < 2 {
        return Err(Error::config("spin state dimension must be 2^N"));
    }
    let v = CVector::from_iterator(
        re.len(),
        re.iter()
            .enumerate()
            .map(|(i, r)| Complex64::new(*r, im.get(i).copied().unwrap_or(0.0))),
    );
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::config("spin state must be nonzero"));
    }
    Ok(v / Complex64::new(n, 0.0))
}
