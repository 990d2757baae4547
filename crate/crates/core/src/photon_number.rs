//! Leading-order photon-number rate, narrowband polarized states and the
//! energy-balance bracket.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch_core::{bloch_evolve, RotationState};
use crate::error::{Error, Result};
use crate::field_symbols::{FreeField, SpinSystem};
use crate::mode_space::{Helicity, KGrid, PhasePoint, RadialCutoff, Vec3};
use crate::spin::{pauli_at, CMatrix, CVector};

/// Sign in `dN/dt = ∓ Σ E^free·S` for a `Π±`-supported state: `Π₊` takes the
/// minus sign.
pub fn polarization_rate_sign(h: Helicity) -> f64 {
    -h.sign()
}

/// Radial shape of a narrowband state on `[ν − ε, ν + ε]`, in the scaled
/// variable `s = (|k| − ν)/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadialProfile {
    /// Raised cosine `(1 + cos πs)/2`; its mean frequency is exactly `ν`.
    #[default]
    Symmetric,
    /// Raised cosine times `(1 + s)`; mean frequency `ν + (1/3 − 2/π²)ε`.
    Skewed,
}

impl RadialProfile {
    fn shape(self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let base = 0.5 * (1.0 + (PI * s).cos());
        match self {
            RadialProfile::Symmetric => base,
            RadialProfile::Skewed => base * (1.0 + s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RadialProfile::Symmetric => "symmetric",
            RadialProfile::Skewed => "skewed",
        }
    }
}

impl std::str::FromStr for RadialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" => Ok(RadialProfile::Symmetric),
            "skewed" => Ok(RadialProfile::Skewed),
            other => Err(Error::config(format!(
                "unknown narrowband profile '{other}' (expected symmetric or skewed)"
            ))),
        }
    }
}

/// Directional weight of a narrowband state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularProfile {
    Uniform,
    /// `exp(−(1 − k̂·axis)/width²)`.
    Cone { axis: Vec3, width: f64 },
}

impl AngularProfile {
    fn weight(&self, d: &Vec3) -> f64 {
        match self {
            AngularProfile::Uniform => 1.0,
            AngularProfile::Cone { axis, width } => {
                (-(1.0 - d.dot(&axis.normalize())) / (width * width)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrowbandSpec {
    pub nu: f64,
    pub eps: f64,
    pub sign: Helicity,
    pub profile: RadialProfile,
    pub angular: AngularProfile,
    /// The polarization is `Π_sign` applied to `(u_⊥, 0)` at each node.
    pub reference: Vec3,
    /// Overall scale; the radial shape is normalized to unit integral in `|k|`.
    pub amplitude: f64,
}

impl NarrowbandSpec {
    pub fn new(nu: f64, eps: f64, sign: Helicity) -> Self {
        Self {
            nu,
            eps,
            sign,
            profile: RadialProfile::Symmetric,
            angular: AngularProfile::Cone { axis: Vec3::z(), width: 0.5 },
            reference: Vec3::x(),
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config(format!("narrowband half-width must be positive, got {}", self.eps)));
        }
        if !(self.nu - self.eps > 0.0 && self.nu.is_finite()) {
            return Err(Error::config(format!(
                "narrowband shell [{}, {}] must lie in |k| > 0",
                self.nu - self.eps,
                self.nu + self.eps
            )));
        }
        if !self.amplitude.is_finite() || self.reference.norm() == 0.0 {
            return Err(Error::config("narrowband amplitude must be finite and the reference vector nonzero"));
        }
        if let AngularProfile::Cone { axis, width } = self.angular {
            if axis.norm() == 0.0 || !(width > 0.0) {
                return Err(Error::config("cone profile needs a nonzero axis and positive width"));
            }
        }
        Ok(())
    }
}

/// Builds a `Π_sign`-polarized state supported in the shell `||k| − ν| < ε`.
pub fn make_narrowband(spec: &NarrowbandSpec, grid: &Arc<KGrid>) -> Result<PhasePoint> {
    spec.validate()?;
    let radii: Vec<f64> = {
        let mut r: Vec<f64> = (0..grid.len()).map(|n| grid.radius(n)).collect();
        r.sort_by(f64::total_cmp);
        r.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        r
    };
    let inside = radii.iter().filter(|r| (*r - spec.nu).abs() < spec.eps).count();
    if inside < 3 {
        let max_r = radii.last().copied().unwrap_or(0.0);
        let hint = (2.0 * max_r / spec.eps).ceil() as usize;
        return Err(Error::config(format!(
            "narrowband shell |k| in ({}, {}) holds {inside} radial nodes, need at least 3; \
             raise n_radial to about {hint}",
            spec.nu - spec.eps,
            spec.nu + spec.eps
        )));
    }
    let u = spec.reference;
    let sgn = spec.sign.sign();
    let x = PhasePoint::from_fn(grid, |n, _| {
        let r = grid.radius(n);
        let d = grid.dir(n);
        let g = spec.profile.shape((r - spec.nu) / spec.eps) / spec.eps;
        if g == 0.0 {
            return (Vec3::zeros(), Vec3::zeros());
        }
        let a = spec.amplitude * g * spec.angular.weight(d);
        let q = (u - d * u.dot(d)) * a;
        // Π±(q, 0) = ½(q, ∓ k̂×q)
        (q * 0.5, d.cross(&q) * (-0.5 * sgn))
    });
    if x.is_zero() {
        return Err(Error::config("narrowband state vanishes on this grid; check the angular profile"));
    }
    Ok(x)
}

fn check_rotation(rot: &RotationState, sys: &SpinSystem) -> Result<()> {
    if rot.rotations.len() != sys.n_particles() {
        return Err(Error::config("rotation state and spin system disagree on particle count"));
    }
    Ok(())
}

/// `Σ_λ Σ_j v_λ,j S_j^{[λ,0]}` for per-particle vectors `v_λ`.
fn contract_with_spin(vectors: &[Vec3], rot: &RotationState) -> Result<CMatrix> {
    let n = rot.rotations.len();
    let mut out = CMatrix::zeros(1 << n, 1 << n);
    for (lambda, (v, r)) in vectors.iter().zip(&rot.rotations).enumerate() {
        // Σ_j v_j Σ_m R_jm σ_m = Σ_m (Rᵀv)_m σ_m
        let c = r.transpose() * v;
        for m in 0..3 {
            out += pauli_at(m, lambda, n)? * Complex64::new(c[m], 0.0);
        }
    }
    Ok(out)
}

/// Operator-valued leading photon-number rate
/// `N⁰(t, X) = −Σ_λ Σ_j E_j^{pol,free}(x_λ, t, X) S_j^{[λ,0]}(t, X)`.
pub fn n0_rate(
    t: f64,
    xp: &PhasePoint,
    sys: &SpinSystem,
    rot: &RotationState,
    cutoff: &RadialCutoff,
) -> Result<CMatrix> {
    check_rotation(rot, sys)?;
    let field = FreeField::new(xp, cutoff);
    let e: Vec<Vec3> = sys.positions.iter().map(|x| -field.e_pol(x, t)).collect();
    contract_with_spin(&e, rot)
}

/// The polarized form `∓ Σ_λ E^free(x_λ, t, X)·S^{[λ,0]}` for `X ∈ E±`.
pub fn n0_rate_polarized(
    t: f64,
    xp: &PhasePoint,
    h: Helicity,
    sys: &SpinSystem,
    rot: &RotationState,
    cutoff: &RadialCutoff,
) -> Result<CMatrix> {
    check_rotation(rot, sys)?;
    let field = FreeField::new(xp, cutoff);
    let sgn = polarization_rate_sign(h);
    let e: Vec<Vec3> = sys.positions.iter().map(|x| field.e(x, t) * sgn).collect();
    contract_with_spin(&e, rot)
}

/// `⟨a, A a⟩`, real part; the operators here are Hermitian.
pub fn sandwich(a: &CVector, op: &CMatrix) -> Complex64 {
    a.dotc(&(op * a))
}

/// `max_j |∂_t B_j^free ∓ ν E_j^free|` with the exact polarized derivative.
pub fn field_time_derivative_check(
    x: &Vec3,
    t: f64,
    xp: &PhasePoint,
    h: Helicity,
    nu: f64,
    cutoff: &RadialCutoff,
) -> f64 {
    let field = FreeField::new(xp, cutoff);
    let d = field.db_dt_polarized(x, t, h.sign()) - field.e(x, t) * (h.sign() * nu);
    d.amax()
}

/// Magnitude of `d/dt[N + ν⁻¹ Σ_λ S^{[λ,0]}·(B_ext + B^free(x_λ))]` in the spin
/// state `a`, with `dN/dt` from [`n0_rate`] and the bracket differentiated by
/// central differences of step `dt`. Trajectories use RK4 step `ode_dt`.
#[allow(clippy::too_many_arguments)]
pub fn energy_balance_residual(
    sys: &SpinSystem,
    xp: &PhasePoint,
    cutoff: &RadialCutoff,
    a: &CVector,
    nu: f64,
    t: f64,
    dt: f64,
    ode_dt: f64,
) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::config("energy balance needs a positive centre frequency"));
    }
    if !(dt > 0.0) || t - dt < 0.0 {
        return Err(Error::config("energy balance needs 0 < dt <= t"));
    }
    if a.len() != sys.spin_dim() {
        return Err(Error::config("spin state dimension does not match the spin system"));
    }
    let traj = bloch_evolve(sys, xp, cutoff, &[t - dt, t, t + dt], ode_dt)?;
    let field = FreeField::new(xp, cutoff);
    let bracket = |rot: &RotationState| -> Result<f64> {
        let v: Vec<Vec3> = sys.positions.iter().map(|x| sys.b_ext + field.b(x, rot.t)).collect();
        Ok(sandwich(a, &contract_with_spin(&v, rot)?).re / nu)
    };
    let d_bracket = (bracket(&traj.samples[2])? - bracket(&traj.samples[0])?) / (2.0 * dt);
    let rate = sandwich(a, &n0_rate(t, xp, sys, &traj.samples[1], cutoff)?).re;
    Ok((rate + d_bracket).abs())
}

/// Rate samples in a fixed spin state with their running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub times: Vec<f64>,
    pub rate: Vec<f64>,
    pub cumulative: Vec<f64>,
}

pub fn rate_series(
    sys: &SpinSystem,
    xp: &PhasePoint,
    cutoff: &RadialCutoff,
    a: &CVector,
    times: &[f64],
    ode_dt: f64,
) -> Result<RateSeries> {
    if a.len() != sys.spin_dim() {
        return Err(Error::config("spin state dimension does not match the spin system"));
    }
    let traj = bloch_evolve(sys, xp, cutoff, times, ode_dt)?;
    let rate = traj
        .samples
        .par_iter()
        .map(|rot| Ok(sandwich(a, &n0_rate(rot.t, xp, sys, rot, cutoff)?).re))
        .collect::<Result<Vec<f64>>>()?;
    let cumulative = cumulative_trapezoid(times, &rate);
    Ok(RateSeries { times: times.to_vec(), rate, cumulative })
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for i in 0..x.len().min(y.len()) {
        if i > 0 {
            acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
