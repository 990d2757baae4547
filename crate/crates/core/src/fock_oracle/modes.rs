use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field_symbols::{field_profile, unit, SpinSystem};
use crate::mode_space::{helicity_vector, CVec3, Helicity, KGrid, PhasePoint, RadialCutoff, Vec3};
use crate::radiative::Spectrum;

/// Which transverse polarizations of each selected node become modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationChoice {
    /// Frame vector `e1`, `e2`, or both.
    Linear(LinearPick),
    /// `ε± = (e1 ∓ i e2)/√2`, or both.
    Helicity(HelicityPick),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearPick {
    First,
    Second,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelicityPick {
    Plus,
    Minus,
    Both,
}

impl PolarizationChoice {
    pub fn name(self) -> &'static str {
        use HelicityPick as H;
        use LinearPick as L;
        match self {
            PolarizationChoice::Linear(L::First) => "e1",
            PolarizationChoice::Linear(L::Second) => "e2",
            PolarizationChoice::Linear(L::Both) => "linear",
            PolarizationChoice::Helicity(H::Plus) => "plus",
            PolarizationChoice::Helicity(H::Minus) => "minus",
            PolarizationChoice::Helicity(H::Both) => "helicity",
        }
    }

    fn vectors(self, frame: &[Vec3; 2]) -> Vec<CVec3> {
        let real = |v: &Vec3| v.map(|c| Complex64::new(c, 0.0));
        match self {
            PolarizationChoice::Linear(LinearPick::First) => vec![real(&frame[0])],
            PolarizationChoice::Linear(LinearPick::Second) => vec![real(&frame[1])],
            PolarizationChoice::Linear(LinearPick::Both) => vec![real(&frame[0]), real(&frame[1])],
            PolarizationChoice::Helicity(HelicityPick::Plus) => vec![helicity_vector(frame, Helicity::Plus)],
            PolarizationChoice::Helicity(HelicityPick::Minus) => vec![helicity_vector(frame, Helicity::Minus)],
            PolarizationChoice::Helicity(HelicityPick::Both) => vec![
                helicity_vector(frame, Helicity::Plus),
                helicity_vector(frame, Helicity::Minus),
            ],
        }
    }
}

impl std::str::FromStr for PolarizationChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use HelicityPick as H;
        use LinearPick as L;
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "e1" | "linear1" => PolarizationChoice::Linear(L::First),
            "e2" | "linear2" => PolarizationChoice::Linear(L::Second),
            "linear" | "both" => PolarizationChoice::Linear(L::Both),
            "plus" | "+" => PolarizationChoice::Helicity(H::Plus),
            "minus" | "-" => PolarizationChoice::Helicity(H::Minus),
            "helicity" => PolarizationChoice::Helicity(H::Both),
            other => {
                return Err(Error::config(format!(
                    "unknown polarization choice '{other}' (e1, e2, linear, plus, minus, helicity)"
                )))
            }
        })
    }
}

/// One oscillator: grid node, unit polarization, frequency `|k|`, weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub node: usize,
    pub polarization: CVec3,
    pub omega: f64,
    pub weight: f64,
}

/// Finite set of field modes with the couplings
/// `f[λ][m][i] = ε_i* · B_{m, x_λ}(k_i)`.
#[derive(Debug, Clone)]
pub struct DiscreteModeSet {
    grid: Arc<KGrid>,
    cutoff: RadialCutoff,
    modes: Vec<Mode>,
    couplings: Vec<[Vec<Complex64>; 3]>,
}

/// `B_{m,x}(k) = iχ(|k|)|k|^{1/2}(2π)^{-3/2} e^{−ik·x} k̂×e_m`.
fn field_coefficient(grid: &KGrid, cutoff: &RadialCutoff, n: usize, m: usize, x: &Vec3) -> CVec3 {
    let amp = field_profile(cutoff, grid.radius(n));
    let phase = Complex64::i() * Complex64::from_polar(amp, -grid.node(n).dot(x));
    grid.dir(n).cross(&unit(m)).map(|c| phase * c)
}

impl DiscreteModeSet {
    pub fn new(
        grid: &Arc<KGrid>,
        nodes: &[usize],
        choice: PolarizationChoice,
        sys: &SpinSystem,
        cutoff: &RadialCutoff,
    ) -> Result<Self> {
        sys.validate()?;
        cutoff.validate()?;
        let mut modes = Vec::new();
        for &n in nodes {
            if n >= grid.len() {
                return Err(Error::config(format!("mode node {n} out of range for a grid of {} nodes", grid.len())));
            }
            let omega = grid.radius(n);
            if !(omega > 0.0) {
                return Err(Error::config(format!("mode node {n} has zero frequency")));
            }
            for eps in choice.vectors(grid.frame(n)) {
                modes.push(Mode { node: n, polarization: eps, omega, weight: grid.weight(n) });
            }
        }
        if modes.is_empty() {
            return Err(Error::config("mode set is empty"));
        }
        let couplings = sys
            .positions
            .iter()
            .map(|x| {
                std::array::from_fn(|m| {
                    modes
                        .iter()
                        .map(|md| md.polarization.dotc(&field_coefficient(grid, cutoff, md.node, m, x)))
                        .collect()
                })
            })
            .collect();
        Ok(Self { grid: grid.clone(), cutoff: *cutoff, modes, couplings })
    }

    /// Every node of the grid, with the given polarizations.
    pub fn all_nodes(
        grid: &Arc<KGrid>,
        choice: PolarizationChoice,
        sys: &SpinSystem,
        cutoff: &RadialCutoff,
    ) -> Result<Self> {
        let nodes: Vec<usize> = (0..grid.len()).collect();
        Self::new(grid, &nodes, choice, sys, cutoff)
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn cutoff(&self) -> &RadialCutoff {
        &self.cutoff
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn n_particles(&self) -> usize {
        self.couplings.len()
    }

    /// `ε_i* · B_{m, x_λ}(k_i)` for every mode `i`.
    pub fn coupling(&self, lambda: usize, m: usize) -> &[Complex64] {
        &self.couplings[lambda][m]
    }

    /// `ε_i* · X(k_i)` with `X = q + ip`.
    pub fn components(&self, x: &PhasePoint) -> Result<Vec<Complex64>> {
        if !Arc::ptr_eq(x.grid(), &self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self.modes.iter().map(|md| md.polarization.dotc(&x.complex(md.node))).collect())
    }

    /// Phase point carrying the given mode components, zero elsewhere.
    pub fn phase_point(&self, components: &[Complex64]) -> Result<PhasePoint> {
        if components.len() != self.modes.len() {
            return Err(Error::config("one component per mode is required"));
        }
        let mut per_node = vec![CVec3::zeros(); self.grid.len()];
        for (md, c) in self.modes.iter().zip(components) {
            per_node[md.node] += md.polarization * *c;
        }
        Ok(PhasePoint::from_complex(&self.grid, |n, _| per_node[n]))
    }

    /// Spectral measure of the couplings of particle `lambda`, the input of
    /// the order-ħ formulas specialized to this mode set.
    pub fn spectrum(&self, lambda: usize) -> Spectrum {
        Spectrum::from_modes(self.modes.iter().enumerate().map(|(i, md)| {
            let f = CVec3::new(self.couplings[lambda][0][i], self.couplings[lambda][1][i], self.couplings[lambda][2][i]);
            (md.omega, md.weight, f)
        }))
    }

    /// `Σ_i w_i |f_i|²` for one coupling row, the discrete `|B_{m,x}|²`.
    pub fn coupling_norm_sq(&self, lambda: usize, m: usize) -> f64 {
        self.modes
            .iter()
            .zip(&self.couplings[lambda][m])
            .map(|(md, f)| md.weight * f.norm_sqr())
            .sum()
    }
}

/// Weight that places `W = w|χ(r)|² r (2π)^{-3} = target` for a mode of
/// frequency `r`, useful for building single-mode benchmarks of a given strength.
pub fn weight_for_strength(cutoff: &RadialCutoff, r: f64, target: f64) -> f64 {
    let c = field_profile(cutoff, r);
    target / (c * c)
}
