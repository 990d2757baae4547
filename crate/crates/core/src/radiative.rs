//! Order-ħ corrections for a single spin at the origin in a constant field
//! `B_ext = (0, 0, |B|)` with the field in the vacuum coherent state (`X = 0`).
//!
//! The time-dependent quantities (Φ₀, Φ₃, F, ⟨S₃¹⟩) are evaluated over a
//! [`Spectrum`]: a list of frequencies `ω_i` with Hermitian weights
//! `W_i[m][n] = w_i conj(f_m) f_n`, where `f_m` is the polarization component
//! of the field coefficient `B_{m,0}` at that mode. The continuum model is the
//! isotropic spectrum built from the radial rule; a finite mode set yields a
//! discrete spectrum, which is what the truncated Fock oracle sees.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bloch_core::RotationState;
use crate::error::{Error, Result};
use crate::field_symbols::{
    bmode, field_profile, mode_correlator, Axis, FreeField, RadialModel, SpinSystem,
    INV_TWO_PI_CUBED,
};
use crate::mode_space::{CVec3, KGrid, PhasePoint, RadialCutoff, Vec3};
use crate::quadrature::{cos_minus_one_over_sq, csum, sin_over, time_rule, NeumaierSum};
use crate::spin::{pauli, pauli_at, CMatrix, SpinSymbol};

/// Below this `|ω − 2|B||` the resonant factor switches to its Taylor form.
pub const RESONANCE_THRESHOLD: f64 = 1e-4;

/// Default number of time nodes for s-integrals.
pub const DEFAULT_TIME_NODES: usize = 64;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Composite rule on `[0, t]` with at least `base` nodes and enough panels to
/// resolve oscillations up to angular frequency `freq`.
fn oscillatory_rule(t: f64, freq: f64, base: usize) -> crate::quadrature::QuadRule {
    let panels = ((t.abs() * freq) / 3.0).ceil() as usize;
    time_rule(t, base.max(16 * panels))
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

fn dsinc(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        -z / 3.0 + z * z2 / 30.0
    } else {
        (z * z.cos() - z.sin()) / (z * z)
    }
}

/// `ρ(x) = (2π)^{-3}∫|χ|² cos(k·x) dk`.
pub fn rho(x: &Vec3, radial: &RadialModel) -> f64 {
    let d = x.norm();
    INV_TWO_PI_CUBED * radial.integrate_sq(|r| sinc(r * d))
}

/// `∇ρ(x)`, differentiated under the radial integral.
pub fn grad_rho(x: &Vec3, radial: &RadialModel) -> Vec3 {
    let d = x.norm();
    if d == 0.0 {
        return Vec3::zeros();
    }
    let dr = INV_TWO_PI_CUBED * radial.integrate_sq(|r| r * dsinc(r * d));
    x * (dr / d)
}

/// `∫₀^t e^{iθτ} dτ`.
fn exp_integral(theta: f64, t: f64) -> Complex64 {
    let z = theta * t;
    if z.abs() < 1e-4 {
        t * Complex64::new(1.0 - z * z / 6.0, 0.5 * z)
    } else {
        Complex64::new(z.sin(), 1.0 - z.cos()) / theta
    }
}

/// `∫₀^t sin(r(t − s)) e^{−iωs} ds`.
fn sine_kernel(r: f64, t: f64, omega: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -omega * t);
    let diff = exp_integral(omega + r, t) - exp_integral(omega - r, t);
    phase * diff / Complex64::new(0.0, 2.0)
}

fn integrate_complex(radial: &RadialModel, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let re = radial.integrate_sq(|r| f(r).re);
    let im = radial.integrate_sq(|r| f(r).im);
    Complex64::new(re, im)
}

/// `u(x, t, ω) = (2π)^{-3}∫∫ |χ|² cos(k·x) sin(|k|(t − s))/|k| e^{−iωs} dk ds`
/// with the s-integral done in closed form.
pub fn u_kernel(x: &Vec3, t: f64, omega: f64, radial: &RadialModel) -> Result<Complex64> {
    check_time(t)?;
    let d = x.norm();
    Ok(INV_TWO_PI_CUBED
        * integrate_complex(radial, |r| {
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                sine_kernel(r, t, omega) * (sinc(r * d) / r)
            }
        }))
}

/// `Δu(0, t, ω) = −(2π)^{-3}∫∫|χ|²|k| sin(|k|(t − s)) e^{−iωs} dk ds`.
pub fn laplacian_u_origin(t: f64, omega: f64, radial: &RadialModel) -> Result<Complex64> {
    check_time(t)?;
    Ok(-INV_TWO_PI_CUBED * integrate_complex(radial, |r| sine_kernel(r, t, omega) * r))
}

/// First-order field at the origin as an operator on C²:
/// component `i` is `Σ_n c_{n,i} σ_n`.
pub fn b1_field_origin(t: f64, bmag: f64, radial: &RadialModel) -> Result<SpinSymbol> {
    let lu = laplacian_u_origin(t, 2.0 * bmag, radial)?;
    let lu0 = laplacian_u_origin(t, 0.0, radial)?;
    let k = 2.0 / 3.0;
    let coeffs = [
        Vec3::new(lu.re, -lu.im, 0.0) * k,
        Vec3::new(lu.im, lu.re, 0.0) * k,
        Vec3::new(0.0, 0.0, lu0.re) * k,
    ];
    Ok(symbol_from_coefficients(&coeffs, t, 1))
}

fn symbol_from_coefficients(coeffs: &[Vec3; 3], t: f64, order: usize) -> SpinSymbol {
    let mut sym = SpinSymbol::zeros(2, 0, t, order);
    for (n, c) in coeffs.iter().enumerate() {
        let s = pauli(n);
        for i in 0..3 {
            sym.components[i] += &s * Complex64::new(c[i], 0.0);
        }
    }
    sym
}

/// Order-one current density `J¹ = Σ_λ S^{[λ,0]} × ∇ρ(x − x_λ)` expanded on
/// the Pauli basis: `sigma[λ][n]` is the vector coefficient of `σ_n^{[λ]}`.
/// There is no identity part.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentJ1 {
    pub t: f64,
    pub sigma: Vec<[Vec3; 3]>,
}

impl CurrentJ1 {
    /// The operator-valued 3-vector on `(C²)^{⊗N}`.
    pub fn to_symbol(&self) -> Result<SpinSymbol> {
        let n = self.sigma.len();
        let mut sym = SpinSymbol::zeros(1 << n, 0, self.t, 1);
        for (lambda, coeffs) in self.sigma.iter().enumerate() {
            for (m, c) in coeffs.iter().enumerate() {
                let s = pauli_at(m, lambda, n)?;
                for i in 0..3 {
                    sym.components[i] += &s * Complex64::new(c[i], 0.0);
                }
            }
        }
        Ok(sym)
    }
}

pub fn current_j1(
    x: &Vec3,
    rot: &RotationState,
    sys: &SpinSystem,
    radial: &RadialModel,
) -> Result<CurrentJ1> {
    if rot.rotations.len() != sys.n_particles() {
        return Err(Error::config("rotation state and spin system disagree on particle count"));
    }
    let sigma = sys
        .positions
        .iter()
        .zip(&rot.rotations)
        .map(|(xl, r)| {
            let g = grad_rho(&(x - xl), radial);
            std::array::from_fn(|n| r.column(n).into_owned().cross(&g))
        })
        .collect();
    Ok(CurrentJ1 { t: rot.t, sigma })
}

/// One spectral line: frequency and the 3×3 weight `W[m][n] = w conj(f_m) f_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLine {
    pub omega: f64,
    pub w: Matrix3<Complex64>,
}

impl SpectralLine {
    /// `W₁₁ + W₂₂`.
    fn transverse(&self) -> f64 {
        self.w[(0, 0)].re + self.w[(1, 1)].re
    }

    /// `Im W₁₂`.
    fn chiral(&self) -> f64 {
        self.w[(0, 1)].im
    }
}

/// Spectral measure of the field coefficients `B_{m,0}` seen by a spin at the
/// origin, so that `B_{m,0,t}·B_{n,0,s} = Re Σ W_mn e^{iω(t−s)}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    lines: Vec<SpectralLine>,
}

impl Spectrum {
    /// Continuum model: `W = (2/3)(2π)^{-3}·4πr²|χ|²·r·w_r δ_mn` at `ω = r`.
    pub fn isotropic(radial: &RadialModel) -> Self {
        let lines = radial
            .rule
            .nodes
            .iter()
            .zip(&radial.rule.weights)
            .map(|(&r, &w)| {
                let c = radial.cutoff.eval(r);
                let a = 2.0 / 3.0 * INV_TWO_PI_CUBED * 4.0 * PI * r * r * c * c * r * w;
                SpectralLine { omega: r, w: Matrix3::identity() * Complex64::new(a, 0.0) }
            })
            .collect();
        Self { lines }
    }

    /// Three-dimensional grid, both transverse polarizations at every node:
    /// `W_mn = w (2π)^{-3}|χ|² r (δ_mn − k̂_m k̂_n)`.
    pub fn from_grid(grid: &KGrid, cutoff: &RadialCutoff) -> Self {
        let lines = (0..grid.len())
            .map(|n| {
                let r = grid.radius(n);
                let f = field_profile(cutoff, r);
                let d = grid.dir(n);
                let proj = Matrix3::identity() - d * d.transpose();
                SpectralLine {
                    omega: r,
                    w: proj.map(|v| Complex64::new(grid.weight(n) * f * f * v, 0.0)),
                }
            })
            .collect();
        Self { lines }
    }

    /// Discrete modes given as `(ω, weight, f)` with `f_m = ε*·B_{m,0}(k)`.
    pub fn from_modes(modes: impl IntoIterator<Item = (f64, f64, CVec3)>) -> Self {
        let lines = modes
            .into_iter()
            .map(|(omega, w, f)| SpectralLine {
                omega,
                w: Matrix3::from_fn(|m, n| f[m].conj() * f[n] * w),
            })
            .collect();
        Self { lines }
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn omega_max(&self) -> f64 {
        self.lines.iter().map(|l| l.omega.abs()).fold(0.0, f64::max)
    }

    /// `Γ_mn(τ) = Σ W_mn e^{iωτ}`.
    pub fn correlator(&self, m: Axis, n: Axis, tau: f64) -> Complex64 {
        let re = csum(self.lines.iter().map(|l| (l.w[(m, n)] * Complex64::from_polar(1.0, l.omega * tau)).re));
        let im = csum(self.lines.iter().map(|l| (l.w[(m, n)] * Complex64::from_polar(1.0, l.omega * tau)).im));
        Complex64::new(re, im)
    }

    /// Φ₀ and Φ₃ with the τ-integrals in closed form.
    pub fn phi(&self, t: f64, bmag: f64) -> (f64, f64) {
        let b = 2.0 * bmag;
        let mut p0 = NeumaierSum::default();
        let mut p3 = NeumaierSum::default();
        for l in &self.lines {
            let (lo, hi) = (sin_over(l.omega - b, t), sin_over(l.omega + b, t));
            let ss = 0.5 * (lo - hi);
            let cc = 0.5 * (lo + hi);
            let (a, c) = (l.transverse(), l.chiral());
            p0.add(-(a * ss - 2.0 * c * cc));
            p3.add(-(a * cc - 2.0 * c * ss));
        }
        (p0.value(), p3.value())
    }

    /// Φ₀ and Φ₃ with the τ-integrals done by quadrature.
    pub fn phi_numeric(&self, t: f64, bmag: f64, n_time: usize) -> (f64, f64) {
        let b = 2.0 * bmag;
        let rule = oscillatory_rule(t, self.omega_max() + b.abs(), n_time);
        let mut p0 = NeumaierSum::default();
        let mut p3 = NeumaierSum::default();
        for l in &self.lines {
            let ss = rule.integrate(|tau| (l.omega * tau).sin() * (b * tau).sin());
            let cc = rule.integrate(|tau| (l.omega * tau).cos() * (b * tau).cos());
            let (a, c) = (l.transverse(), l.chiral());
            p0.add(-(a * ss - 2.0 * c * cc));
            p3.add(-(a * cc - 2.0 * c * ss));
        }
        (p0.value(), p3.value())
    }

    /// `⟨S₃¹(t, 0)a, a⟩ = 2Σ (W₁₁ + W₂₂ − 2 Im W₁₂)(cos(Δt) − 1)/Δ²`,
    /// `Δ = ω − 2|B|`.
    pub fn s1_third(&self, t: f64, bmag: f64) -> f64 {
        let b = 2.0 * bmag;
        2.0 * csum(self.lines.iter().map(|l| {
            (l.transverse() - 2.0 * l.chiral())
                * cos_minus_one_over_sq(l.omega - b, t, RESONANCE_THRESHOLD)
        }))
    }

    /// `F^{[0]}_3(t)` and `F^{[3]}_3(t)`, i.e. `2∫₀^t Φ_j`.
    pub fn f_coefficients(&self, t: f64, bmag: f64, n_time: usize) -> (f64, f64) {
        let rule = oscillatory_rule(t, self.omega_max() + 2.0 * bmag.abs(), n_time);
        let vals: Vec<(f64, f64)> = rule.nodes.iter().map(|&s| self.phi(s, bmag)).collect();
        let f0 = csum(rule.weights.iter().zip(&vals).map(|(w, v)| w * v.0));
        let f3 = csum(rule.weights.iter().zip(&vals).map(|(w, v)| w * v.1));
        (2.0 * f0, 2.0 * f3)
    }
}

/// Φ₀, Φ₃, F³ and ⟨S₃¹⟩ sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionSeries {
    pub lambda: f64,
    pub bmag: f64,
    pub times: Vec<f64>,
    pub phi0: Vec<f64>,
    pub phi3: Vec<f64>,
    pub f3z: Vec<f64>,
    pub s1z: Vec<f64>,
}

/// Continuum model at `x = 0`: radial rule, its isotropic spectrum and the
/// time-node budget for numeric s-integrals.
#[derive(Debug, Clone)]
pub struct RadiativeModel {
    pub radial: RadialModel,
    pub spectrum: Spectrum,
    pub n_time: usize,
}

impl RadiativeModel {
    pub fn new(radial: RadialModel, n_time: usize) -> Result<Self> {
        radial.cutoff.validate()?;
        if n_time == 0 {
            return Err(Error::config("time node count must be positive"));
        }
        let spectrum = Spectrum::isotropic(&radial);
        Ok(Self { radial, spectrum, n_time })
    }

    pub fn with_defaults(cutoff: RadialCutoff) -> Result<Self> {
        Self::new(RadialModel::with_defaults(cutoff), DEFAULT_TIME_NODES)
    }

    pub fn phi0(&self, t: f64, bmag: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.spectrum.phi(t, bmag).0)
    }

    pub fn phi3(&self, t: f64, bmag: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.spectrum.phi(t, bmag).1)
    }

    /// Φ₀ through the Laplacian of `u`.
    pub fn phi0_from_laplacian(&self, t: f64, bmag: f64) -> Result<f64> {
        let lu = laplacian_u_origin(t, 2.0 * bmag, &self.radial)?;
        let (s, c) = (2.0 * bmag * t).sin_cos();
        Ok(4.0 / 3.0 * (c * lu.im + s * lu.re))
    }

    /// Φ₃ as `−2∫₀^t cos(2|B|(t − s)) B_{1,0,t}·B_{1,0,s} ds`.
    pub fn phi3_from_correlator(&self, t: f64, bmag: f64) -> Result<f64> {
        check_time(t)?;
        let b = 2.0 * bmag;
        let rule = oscillatory_rule(t, self.spectrum.omega_max() + b.abs(), self.n_time);
        let mut acc = NeumaierSum::default();
        for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc.add(w * (b * (t - s)).cos() * mode_correlator(0, 0, t, s, &self.radial)?);
        }
        Ok(-2.0 * acc.value())
    }

    pub fn s1_third(&self, t: f64, bmag: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.spectrum.s1_third(t, bmag))
    }

    /// `(F⁰, F³)`, both along z.
    pub fn f_coefficients(&self, t: f64, bmag: f64) -> Result<(Vec3, Vec3)> {
        check_time(t)?;
        let (f0, f3) = self.spectrum.f_coefficients(t, bmag, self.n_time);
        Ok((Vec3::new(0.0, 0.0, f0), Vec3::new(0.0, 0.0, f3)))
    }

    pub fn series(&self, times: &[f64], bmag: f64) -> Result<CorrectionSeries> {
        for &t in times {
            check_time(t)?;
        }
        let rows: Vec<(f64, f64, f64, f64)> = times
            .par_iter()
            .map(|&t| {
                let (p0, p3) = self.spectrum.phi(t, bmag);
                let (_, f3) = self.spectrum.f_coefficients(t, bmag, self.n_time);
                (p0, p3, f3, self.spectrum.s1_third(t, bmag))
            })
            .collect();
        Ok(CorrectionSeries {
            lambda: self.radial.cutoff.scale,
            bmag,
            times: times.to_vec(),
            phi0: rows.iter().map(|r| r.0).collect(),
            phi3: rows.iter().map(|r| r.1).collect(),
            f3z: rows.iter().map(|r| r.2).collect(),
            s1z: rows.iter().map(|r| r.3).collect(),
        })
    }
}

/// `∫₀^t Rot_z(2|B|(t − s)) K(s) ds`, the solution of
/// `dH/dt = 2B_ext × H + K`, `H(0) = 0`.
pub fn rotation_convolution(t: f64, bmag: f64, n_time: usize, k: impl Fn(f64) -> Vec3) -> Vec3 {
    if t == 0.0 {
        return Vec3::zeros();
    }
    let rule = time_rule(t, n_time);
    let mut acc = [NeumaierSum::default(); 3];
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = k(s);
        let (sn, cs) = (2.0 * bmag * (t - s)).sin_cos();
        let h = Vec3::new(cs * v.x - sn * v.y, sn * v.x + cs * v.y, v.z);
        for i in 0..3 {
            acc[i].add(w * h[i]);
        }
    }
    Vec3::new(acc[0].value(), acc[1].value(), acc[2].value())
}

/// The differential of the leading spin symbol at `X = 0` and its source,
/// evaluated on a momentum grid: `K^{[j]}(t, V)`, `H^{[j]}(t, V)` and the
/// contracted coefficient `G^{[j]}(t)`. Axes `j` are 0-based.
#[derive(Debug, Clone)]
pub struct KernelPipeline {
    pub grid: Arc<KGrid>,
    pub cutoff: RadialCutoff,
    pub bmag: f64,
    pub n_time: usize,
    bmodes: [PhasePoint; 3],
}

impl KernelPipeline {
    pub fn new(grid: &Arc<KGrid>, cutoff: RadialCutoff, bmag: f64, n_time: usize) -> Result<Self> {
        cutoff.validate()?;
        let origin = Vec3::zeros();
        let bmodes = [
            bmode(0, &origin, grid, &cutoff)?,
            bmode(1, &origin, grid, &cutoff)?,
            bmode(2, &origin, grid, &cutoff)?,
        ];
        Ok(Self { grid: grid.clone(), cutoff, bmag, n_time, bmodes })
    }

    /// Column `j` of the closed-form rotation at `X = 0`.
    fn s0_column(&self, j: Axis, t: f64) -> Vec3 {
        crate::bloch_core::z_rotation(self.bmag, t).column(j).into_owned()
    }

    /// `K^{[j]}(t, V) = 2 B^free(0, t, V) × (column j of R(t))`.
    pub fn k_kernel(&self, j: Axis, t: f64, v: &PhasePoint) -> Result<Vec3> {
        check_axis(j)?;
        let b = FreeField::new(v, &self.cutoff).b(&Vec3::zeros(), t);
        Ok(b.cross(&self.s0_column(j, t)) * 2.0)
    }

    /// `K^{[3]}(t, V) = 2(B_{2,0,t}·V, −B_{1,0,t}·V, 0)`.
    pub fn k3_kernel(&self, t: f64, v: &PhasePoint) -> Result<Vec3> {
        self.k_kernel(2, t, v)
    }

    pub fn h_kernel(&self, j: Axis, t: f64, v: &PhasePoint) -> Result<Vec3> {
        check_axis(j)?;
        check_time(t)?;
        let field = FreeField::new(v, &self.cutoff);
        let origin = Vec3::zeros();
        Ok(rotation_convolution(t, self.bmag, self.n_time, |s| {
            field.b(&origin, s).cross(&self.s0_column(j, s)) * 2.0
        }))
    }

    /// `B_{m,0,t} = χ_{−t} B_{m,0}`.
    pub fn evolved_bmode(&self, m: Axis, t: f64) -> PhasePoint {
        self.bmodes[m].free_evolve(-t)
    }

    /// `G^{[j]}(t) = ½(H₃(B₂ₜ) − H₂(B₃ₜ), H₁(B₃ₜ) − H₃(B₁ₜ), H₂(B₁ₜ) − H₁(B₂ₜ))`.
    pub fn g_coefficient(&self, j: Axis, t: f64) -> Result<Vec3> {
        check_axis(j)?;
        check_time(t)?;
        let h: Vec<Vec3> = (0..3)
            .map(|m| self.h_kernel(j, t, &self.evolved_bmode(m, t)))
            .collect::<Result<_>>()?;
        Ok(Vec3::new(
            h[1].z - h[2].y,
            h[2].x - h[0].z,
            h[0].y - h[1].x,
        ) * 0.5)
    }

    pub fn g3_coefficient(&self, t: f64) -> Result<Vec3> {
        self.g_coefficient(2, t)
    }
}

fn check_axis(j: Axis) -> Result<()> {
    if j >= 3 {
        return Err(Error::domain(format!("axis index {j} out of range")));
    }
    Ok(())
}

/// Expectation `⟨B¹ a, a⟩` components for the spin state `a`.
pub fn symbol_expectation(sym: &SpinSymbol, a: &crate::spin::CVector) -> Vec3 {
    let e = sym.expectation(a);
    Vec3::new(e[0].re, e[1].re, e[2].re)
}

/// The identity coefficient of an operator on C²: `tr(A)/2`.
pub fn identity_part(a: &CMatrix) -> Complex64 {
    a.trace() / Complex64::new(a.nrows() as f64, 0.0)
}
