//! Exact reference dynamics on a truncated Fock ⊗ spin space.
//!
//! A finite [`DiscreteModeSet`] replaces the photon continuum, the
//! Hamiltonian is assembled as a sparse matrix, and states are propagated
//! exactly. Comparisons with the asymptotic formulas use the spectrum of the
//! same mode set, so only the ħ-expansion is being tested.

pub mod basis;
pub mod modes;
pub mod operators;
pub mod propagate;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

pub use basis::{FockBasis, DEFAULT_DIM_LIMIT};
pub use modes::{weight_for_strength, DiscreteModeSet, HelicityPick, LinearPick, Mode, PolarizationChoice};
pub use operators::{
    assemble_hamiltonian, number_operator, parity_operator, rate_operator, segal_field, spin_operator,
    SparseMatrix,
};
pub use propagate::Propagator;

use crate::error::{Error, Result};
use crate::field_symbols::SpinSystem;
use crate::mode_space::PhasePoint;
use crate::spin::{CMatrix, CVector};
use operators::check_hbar;

/// What to do when a coherent state loses norm to the occupancy cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Truncation masses above this are reported as warnings.
    pub warn_above: f64,
    /// Turn warnings into errors.
    pub hard_fail: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { warn_above: 1e-6, hard_fail: false }
    }
}

/// Occupation-space part of `Ψ_{X,ħ}`, renormalized after truncation.
#[derive(Debug, Clone)]
pub struct CoherentState {
    pub vector: CVector,
    /// `1 − (retained norm)²` of the exact coherent state.
    pub truncation_mass: f64,
}

/// `α_i = √w_i (ε_i*·X(k_i))/√(2ħ)`.
pub fn coherent_amplitudes(modes: &DiscreteModeSet, x: &PhasePoint, hbar: f64) -> Result<Vec<Complex64>> {
    check_hbar(hbar)?;
    let c = modes.components(x)?;
    let s = 1.0 / (2.0 * hbar).sqrt();
    Ok(modes.modes().iter().zip(c).map(|(md, ci)| ci * (md.weight.sqrt() * s)).collect())
}

/// Coherent state with amplitudes `α`, truncated to the basis.
pub fn coherent_vector(alpha: &[Complex64], basis: &FockBasis) -> Result<CoherentState> {
    if alpha.len() != basis.n_modes() {
        return Err(Error::config("one coherent amplitude per mode is required"));
    }
    let total: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    let mut v = CVector::zeros(basis.n_occupations());
    for i in 0..basis.n_occupations() {
        // amplitude e^{−|α|²/2} Π α^n/√n!, built in log form for large n
        let mut amp = Complex64::new((-0.5 * total).exp(), 0.0);
        for (a, &n) in alpha.iter().zip(basis.occupation(i)) {
            for k in 1..=n {
                amp *= a / (k as f64).sqrt();
            }
        }
        v[i] = amp;
    }
    let kept = v.norm_squared();
    if !(kept > 0.0) {
        return Err(Error::numeric(
            "fock_oracle",
            format!("coherent state with mean photon number {total:.3e} has no weight below n_max = {}", basis.n_max()),
        ));
    }
    let truncation_mass = (1.0 - kept).max(0.0);
    Ok(CoherentState { vector: v / Complex64::new(kept.sqrt(), 0.0), truncation_mass })
}

/// `M_ij = ⟨Ψ⊗e_i, A (Ψ⊗e_j)⟩` for an occupation-space state `Ψ`.
pub fn wick_symbol(a: &SparseMatrix, psi: &CVector, basis: &FockBasis) -> Result<CMatrix> {
    if a.dim() != basis.dim() || psi.len() != basis.n_occupations() {
        return Err(Error::config("operator, state and basis dimensions disagree"));
    }
    let sd = basis.spin_dim();
    let columns: Vec<CVector> = (0..sd)
        .map(|j| {
            let mut e = CVector::zeros(sd);
            e[j] = Complex64::new(1.0, 0.0);
            a.mul_vec(&psi.kronecker(&e))
        })
        .collect();
    Ok(DMatrix::from_fn(sd, sd, |i, j| {
        let mut e = CVector::zeros(sd);
        e[i] = Complex64::new(1.0, 0.0);
        psi.kronecker(&e).dotc(&columns[j])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `σ_m^{[λ]}`, axes 0-based.
    Spin { particle: usize, axis: usize },
    /// Total photon number.
    Number,
    /// `d⟨N⟩/dt` operator `i[H/ħ, N]`.
    NumberRate,
}

impl Observable {
    pub fn label(&self) -> String {
        match self {
            Observable::Spin { particle, axis } => format!("spin[{particle}].sigma{}", axis + 1),
            Observable::Number => "number".into(),
            Observable::NumberRate => "number_rate".into(),
        }
    }
}

/// Expectation trajectory with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub observable: Observable,
    pub hbar: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation_mass: f64,
    /// Largest population found in the top occupancy shell.
    pub edge_population: f64,
    /// Largest `|‖ψ(t)‖ − 1|`.
    pub norm_drift: f64,
    pub warnings: Vec<String>,
}

impl OracleResult {
    pub fn flagged(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// A spin system coupled to a finite mode set, ready to propagate.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub modes: DiscreteModeSet,
    pub sys: SpinSystem,
    pub basis: FockBasis,
    pub policy: TruncationPolicy,
}

impl Oracle {
    pub fn new(modes: DiscreteModeSet, sys: SpinSystem, n_max: usize, dim_limit: usize) -> Result<Self> {
        if modes.n_particles() != sys.n_particles() {
            return Err(Error::config("mode set was built for a different spin system"));
        }
        let basis = FockBasis::new(modes.len(), n_max, sys.n_particles(), dim_limit)?;
        Ok(Self { modes, sys, basis, policy: TruncationPolicy::default() })
    }

    /// `H/ħ`.
    pub fn hamiltonian(&self, hbar: f64) -> Result<SparseMatrix> {
        assemble_hamiltonian(&self.basis, &self.modes, &self.sys, hbar)
    }

    pub fn operator(&self, obs: Observable, hbar: f64) -> Result<SparseMatrix> {
        match obs {
            Observable::Spin { particle, axis } => spin_operator(&self.basis, particle, axis),
            Observable::Number => Ok(number_operator(&self.basis)),
            Observable::NumberRate => rate_operator(&self.basis, &self.modes, &self.sys, hbar),
        }
    }

    pub fn coherent(&self, x: &PhasePoint, hbar: f64) -> Result<CoherentState> {
        let alpha = coherent_amplitudes(&self.modes, x, hbar)?;
        let state = coherent_vector(&alpha, &self.basis)?;
        if self.policy.hard_fail && state.truncation_mass > self.policy.warn_above {
            return Err(Error::numeric(
                "fock_oracle",
                format!("truncation mass {:.3e} exceeds {:.1e}; raise n_max", state.truncation_mass, self.policy.warn_above),
            ));
        }
        Ok(state)
    }

    fn check_spin_state(&self, a: &CVector) -> Result<()> {
        if a.len() != self.basis.spin_dim() {
            return Err(Error::config("spin state dimension does not match the spin system"));
        }
        if (a.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::config("spin state must have unit norm"));
        }
        Ok(())
    }

    /// `Ψ_{X,ħ} ⊗ a` and its truncation mass.
    pub fn initial_state(&self, x: &PhasePoint, a: &CVector, hbar: f64) -> Result<(CVector, f64)> {
        self.check_spin_state(a)?;
        let c = self.coherent(x, hbar)?;
        Ok((c.vector.kronecker(a), c.truncation_mass))
    }

    fn edge_population(&self, psi: &CVector) -> f64 {
        let sd = self.basis.spin_dim();
        (0..self.basis.n_occupations())
            .filter(|&i| self.basis.total(i) == self.basis.n_max())
            .map(|i| (0..sd).map(|s| psi[self.basis.full_index(i, s)].norm_sqr()).sum::<f64>())
            .sum()
    }

    /// `⟨e^{−itH/ħ}(Ψ_X⊗a), A e^{−itH/ħ}(Ψ_X⊗a)⟩` on the sample times.
    pub fn observe(&self, obs: Observable, x: &PhasePoint, a: &CVector, hbar: f64, times: &[f64]) -> Result<OracleResult> {
        let (psi0, mass) = self.initial_state(x, a, hbar)?;
        let prop = Propagator::new(&self.hamiltonian(hbar)?)?;
        let op = self.operator(obs, hbar)?;
        let mut values = Vec::with_capacity(times.len());
        let mut edge: f64 = 0.0;
        let mut drift: f64 = 0.0;
        for &t in times {
            let psi = prop.apply(&psi0, t);
            drift = drift.max((psi.norm() - 1.0).abs());
            edge = edge.max(self.edge_population(&psi));
            values.push(psi.dotc(&op.mul_vec(&psi)).re);
        }
        let mut warnings = Vec::new();
        if mass > self.policy.warn_above {
            warnings.push(format!("initial truncation mass {mass:.3e}"));
        }
        if edge > self.policy.warn_above {
            warnings.push(format!("top-shell population reached {edge:.3e}"));
        }
        if drift > 1e-10 {
            warnings.push(format!("norm drift {drift:.3e}"));
        }
        Ok(OracleResult {
            observable: obs,
            hbar,
            times: times.to_vec(),
            values,
            truncation_mass: mass,
            edge_population: edge,
            norm_drift: drift,
            warnings,
        })
    }

    /// `⟨e^{∓itH/ħ}(Ψ_X⊗a), Ψ_Z⊗b⟩`; `forward = true` is `e^{−itH/ħ}`.
    #[allow(clippy::too_many_arguments)]
    pub fn transition_amplitude(
        &self,
        x: &PhasePoint,
        a: &CVector,
        z: &PhasePoint,
        b: &CVector,
        hbar: f64,
        t: f64,
        forward: bool,
    ) -> Result<Complex64> {
        let (psi, _) = self.initial_state(x, a, hbar)?;
        let (phi, _) = self.initial_state(z, b, hbar)?;
        let prop = Propagator::new(&self.hamiltonian(hbar)?)?;
        let evolved = prop.apply(&psi, if forward { t } else { -t });
        Ok(phi.dotc(&evolved))
    }

    /// Expectation at a single time for each ħ, fitted by a polynomial in ħ.
    #[allow(clippy::too_many_arguments)]
    pub fn hbar_sweep(
        &self,
        obs: Observable,
        x: &PhasePoint,
        a: &CVector,
        t: f64,
        hbars: &[f64],
        degree: usize,
        reference: Option<f64>,
    ) -> Result<(SweepFit, Vec<OracleResult>)> {
        let runs = hbars
            .par_iter()
            .map(|&h| self.observe(obs, x, a, h, &[t]))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = runs.iter().map(|r| r.values[0]).collect();
        let mut fit = fit_hbar_series(hbars, &values, degree, reference)?;
        for r in &runs {
            if r.truncation_mass > 1e-8 {
                fit.warnings.push(format!("ħ = {}: truncation mass {:.3e}", r.hbar, r.truncation_mass));
            }
        }
        Ok((fit, runs))
    }
}

/// Polynomial fit `value(ħ) ≈ Σ_j c_j ħ^j`.
#[derive(Debug, Clone)]
pub struct SweepFit {
    pub hbars: Vec<f64>,
    pub values: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// Root-mean-square fit residual.
    pub residual: f64,
    /// Ratio of extreme singular values of the design matrix.
    pub condition: f64,
    /// Slope of `ln|value − c₀_ref|` against `ln ħ`, when a reference is given.
    pub order: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepFit {
    pub fn flagged(&self) -> bool {
        !self.warnings.is_empty()
    }
}

pub fn fit_hbar_series(hbars: &[f64], values: &[f64], degree: usize, reference: Option<f64>) -> Result<SweepFit> {
    if hbars.len() != values.len() {
        return Err(Error::config("one value per ħ is required"));
    }
    if hbars.len() < 3 || hbars.len() < degree + 1 {
        return Err(Error::config("an ħ sweep needs at least 3 values and more values than the fit degree"));
    }
    for &h in hbars {
        check_hbar(h)?;
    }
    let design = DMatrix::from_fn(hbars.len(), degree + 1, |i, j| hbars[i].powi(j as i32));
    let rhs = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let coeffs = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::numeric("fock_oracle", format!("least-squares fit failed: {e}")))?;
    let resid = (&design * &coeffs - &rhs).norm() / (hbars.len() as f64).sqrt();
    let order = reference.map(|c0| {
        let dev: Vec<f64> = values.iter().map(|v| (v - c0).abs()).collect();
        crate::photon_number::log_log_slope(hbars, &dev)
    });
    let mut warnings = Vec::new();
    if !(condition < 1e12) {
        warnings.push(format!("ill-conditioned fit (condition {condition:.2e})"));
    }
    Ok(SweepFit {
        hbars: hbars.to_vec(),
        values: values.to_vec(),
        coefficients: coeffs.iter().copied().collect(),
        residual: resid,
        condition,
        order,
        warnings,
    })
}
