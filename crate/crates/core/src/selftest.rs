//! End-to-end checks shared by the acceptance tests and the `selftest`
//! command. Each criterion returns a report instead of panicking so that a
//! caller can print every result.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bloch_core::{bloch_evolve, spin_symbol0, uniform_times};
use crate::error::Result;
use crate::field_symbols::SpinSystem;
use crate::fock_oracle::{
    weight_for_strength, DiscreteModeSet, HelicityPick, LinearPick, Observable, Oracle, PolarizationChoice,
    DEFAULT_DIM_LIMIT,
};
use crate::mode_space::{AngularSpec, Helicity, KGrid, PhasePoint, RadialCutoff, RadialSpec, Vec3};
use crate::photon_number::{
    energy_balance_residual, log_log_slope, make_narrowband, n0_rate, sandwich, NarrowbandSpec, RadialProfile,
};
use crate::radiative::{rho, u_kernel, KernelPipeline, RadiativeModel};
use crate::spin::{pauli, spin_state, CVector};
use crate::transition::{transition_bound, TransitionQuery};

/// Seed of the random transition queries.
pub const TRANSITION_SEED: u64 = 7;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} C{} {}: {} [{:.2}s, budget {}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

/// `(id, title, runtime budget in seconds)`.
pub const CRITERIA: [(usize, &str, u64); 8] = [
    (1, "leading-order exactness", 1),
    (2, "radiative identity chain", 30),
    (3, "sign and shape of the correction", 30),
    (4, "wave-equation residual", 30),
    (5, "oracle hbar-convergence", 120),
    (6, "photon number", 120),
    (7, "transition bound", 60),
    (8, "energy balance", 120),
];

pub fn run_criterion(id: usize) -> Option<CriterionReport> {
    run_criterion_seeded(id, TRANSITION_SEED)
}

/// As [`run_criterion`], drawing the random transition queries from `seed`.
pub fn run_criterion_seeded(id: usize, seed: u64) -> Option<CriterionReport> {
    let &(id, title, budget) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = match id {
        1 => leading_order(),
        2 => identity_chain(),
        3 => correction_shape(),
        4 => wave_equation(),
        5 => oracle_convergence(),
        6 => photon_number(),
        7 => transition(seed),
        _ => energy_balance(),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (passed, mut summary) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_time = elapsed <= budget;
    if !in_time {
        summary.push_str("; over the runtime budget");
    }
    Some(CriterionReport { id, title, passed: passed && in_time, summary, elapsed, budget })
}

pub fn run_all() -> Vec<CriterionReport> {
    run_all_seeded(TRANSITION_SEED)
}

pub fn run_all_seeded(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion_seeded(c.0, seed)).collect()
}

fn leading_order() -> Result<(bool, String)> {
    let g = KGrid::build(RadialSpec { n_radial: 4, max_r: 4.0 }, AngularSpec { n_polar: 2, n_azimuth: 3 })?;
    let sys = SpinSystem::single_at_origin(1.0);
    let times = uniform_times(10.0, 201);
    let traj = bloch_evolve(&sys, &PhasePoint::zeros(&g), &RadialCutoff::default(), &times, 1e-3)?;
    let mut err: f64 = 0.0;
    for rot in &traj.samples {
        let s = spin_symbol0(rot, 0)?;
        let (c, sn) = ((2.0 * rot.t).cos(), (2.0 * rot.t).sin());
        let expect = pauli(0) * Complex64::new(c, 0.0) - pauli(1) * Complex64::new(sn, 0.0);
        err = err.max((&s.components[0] - expect).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok((err < 1e-10, format!("max error {err:.2e} over t in [0, 10]")))
}

fn identity_chain() -> Result<(bool, String)> {
    let m = RadiativeModel::with_defaults(RadialCutoff::default())?;
    let bmag = 1.0;
    let mut chain: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let (f0, f3) = m.f_coefficients(t, bmag)?;
        chain = chain.max((m.s1_third(t, bmag)? - (f0.z + f3.z)).abs());
    }
    let mut dual: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let (a0, a3) = m.spectrum.phi(t, bmag);
        let (n0, n3) = m.spectrum.phi_numeric(t, bmag, m.n_time);
        dual = dual.max((a0 - n0).abs()).max((a3 - n3).abs());
    }
    let g = KGrid::build(RadialSpec { n_radial: 40, max_r: 8.0 }, AngularSpec { n_polar: 20, n_azimuth: 40 })?;
    let p = KernelPipeline::new(&g, RadialCutoff::default(), bmag, m.n_time)?;
    let mut g3: f64 = 0.0;
    for t in [0.5, 1.5] {
        let v = p.g3_coefficient(t)?;
        g3 = g3.max(v.x.abs()).max(v.y.abs()).max((v.z - m.phi3(t, bmag)?).abs());
    }
    Ok((
        chain < 1e-8 && dual < 1e-9 && g3 < 1e-9,
        format!("primitive {chain:.2e}, dual path {dual:.2e}, g3 vs phi3 {g3:.2e}"),
    ))
}

fn correction_shape() -> Result<(bool, String)> {
    let m = RadiativeModel::with_defaults(RadialCutoff::default())?;
    let at_zero = m.s1_third(0.0, 1.0)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=400 {
        worst = worst.max(m.s1_third(0.05 * i as f64, 1.0)?);
    }
    let ts: Vec<f64> = (0..10).map(|i| 1e-3 * 10f64.powf(i as f64 / 9.0)).collect();
    let vals = ts.iter().map(|&t| m.s1_third(t, 1.0).map(|v| -v)).collect::<Result<Vec<f64>>>()?;
    let slope = log_log_slope(&ts, &vals);
    Ok((
        at_zero == 0.0 && worst < 0.0 && (slope - 2.0).abs() <= 0.05,
        format!("s1(0) = {at_zero}, max over (0, 20] = {worst:.3e}, short-time exponent {slope:.4}"),
    ))
}

fn wave_equation() -> Result<(bool, String)> {
    let m = RadiativeModel::with_defaults(RadialCutoff::default())?;
    let r = &m.radial;
    let h = 1e-3;
    let samples = [
        (Vec3::zeros(), 1.0, 2.0),
        (Vec3::new(0.3, -0.2, 0.1), 0.7, 0.5),
        (Vec3::new(0.5, 0.5, 0.0), 2.0, 2.0),
        (Vec3::new(0.0, 0.0, 1.0), 1.5, 0.0),
    ];
    let mut resid: f64 = 0.0;
    for (x, t, w) in samples {
        let u = |y: &Vec3, s: f64| u_kernel(y, s, w, r);
        let u0 = u(&x, t)?;
        let dtt = (u(&x, t + h)? - u0 * 2.0 + u(&x, t - h)?) / (h * h);
        let mut lap = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            lap += (u(&(x + e), t)? - u0 * 2.0 + u(&(x - e), t)?) / (h * h);
        }
        let src = Complex64::from_polar(1.0, -w * t) * rho(&x, r);
        resid = resid.max((dtt - lap - src).norm());
    }
    let mut initial: f64 = 0.0;
    let mut slope: f64 = 0.0;
    let dt = 1e-7;
    for (x, _, w) in samples {
        initial = initial.max(u_kernel(&x, 0.0, w, r)?.norm());
        slope = slope.max(u_kernel(&x, dt, w, r)?.norm() / dt);
    }
    Ok((
        resid < 1e-5 && initial == 0.0 && slope < 1e-6,
        format!("max residual {resid:.2e}, |u(t=0)| = {initial}, |u(dt)|/dt = {slope:.1e}"),
    ))
}

/// One resonant mode at `k = (2|B|, 0, 0)` with `W = 0.5` and `|B| = 1`.
fn resonant_mode(choice: PolarizationChoice) -> Result<(Arc<KGrid>, DiscreteModeSet, SpinSystem)> {
    let chi = RadialCutoff::default();
    let w = weight_for_strength(&chi, 2.0, 0.5);
    let g = KGrid::custom(vec![Vec3::new(2.0, 0.0, 0.0)], vec![w])?;
    let sys = SpinSystem::single_at_origin(1.0);
    let modes = DiscreteModeSet::new(&g, &[0], choice, &sys, &chi)?;
    Ok((g, modes, sys))
}

const HBARS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn oracle_convergence() -> Result<(bool, String)> {
    let (g, modes, sys) = resonant_mode(PolarizationChoice::Linear(LinearPick::Second))?;
    let t = 1.0;
    let predicted = modes.spectrum(0).s1_third(t, 1.0);
    let oracle = Oracle::new(modes, sys, 16, DEFAULT_DIM_LIMIT)?;
    let up = spin_state(&[1.0, 0.0], &[])?;
    let obs = Observable::Spin { particle: 0, axis: 2 };
    let (fit, _) = oracle.hbar_sweep(obs, &PhasePoint::zeros(&g), &up, t, &HBARS, 2, Some(1.0))?;
    let p = fit.order.unwrap_or(f64::NAN);
    let c1 = fit.coefficients[1];
    let rel = (c1 - predicted).abs() / predicted.abs();
    Ok((
        (0.9..=1.1).contains(&p) && c1 < 0.0 && rel <= 0.1 && !fit.flagged(),
        format!("order {p:.4}, c0 {:.6}, c1 {c1:.5} vs predicted {predicted:.5} ({:.2}%)", fit.coefficients[0], 100.0 * rel),
    ))
}

fn photon_number() -> Result<(bool, String)> {
    let (g, modes, sys) = resonant_mode(PolarizationChoice::Helicity(HelicityPick::Plus))?;
    let chi = *modes.cutoff();
    // |X|² = 0.2 on the helicity-+ line
    let z = Complex64::new((0.2 / g.weight(0)).sqrt(), 0.0);
    let x = modes.phase_point(&[z])?;
    let a = spin_state(&[1.0, 0.0], &[0.0, 0.5])?;
    let oracle = Oracle::new(modes, sys.clone(), 40, DEFAULT_DIM_LIMIT)?;
    let mut number_err: f64 = 0.0;
    for hbar in HBARS {
        let r = oracle.observe(Observable::Number, &x, &a, hbar, &[0.0])?;
        number_err = number_err.max((r.values[0] - x.norm_sq() / (2.0 * hbar)).abs());
    }
    let t = 1.0;
    let traj = bloch_evolve(&sys, &x, &chi, &[t], 1e-3)?;
    let predicted = sandwich(&a, &n0_rate(t, &x, &sys, traj.last(), &chi)?).re;
    let (fit, _) = oracle.hbar_sweep(Observable::NumberRate, &x, &a, t, &HBARS, 2, None)?;
    let c0 = fit.coefficients[0];
    let rel = (c0 - predicted).abs() / predicted.abs();
    Ok((
        number_err < 1e-8 && rel <= 0.05 && !fit.flagged(),
        format!(
            "<N> error {number_err:.1e}, rate c0 {c0:.6} vs n0_rate {predicted:.6} ({:.1e} relative)",
            rel
        ),
    ))
}

fn random_spin(rng: &mut ChaCha8Rng) -> Result<CVector> {
    let mut v = || rng.random_range(-1.0..1.0);
    spin_state(&[v(), v()], &[v(), v()])
}

/// Over the seeded queries: counts of `e^{−itH/ħ}` amplitudes within the
/// bound, `e^{+itH/ħ}` amplitudes within the bound and within the bound at
/// `−t`, whether the bound is 1 at `Z = χ_t X`, and the largest forward excess.
pub fn transition_survey(n: usize, seed: u64) -> Result<(usize, usize, usize, bool, f64)> {
    let (_, modes, sys) = resonant_mode(PolarizationChoice::Linear(LinearPick::Second))?;
    let chi = *modes.cutoff();
    let scale = 1.0 / modes.modes()[0].weight.sqrt();
    let oracle = Oracle::new(modes.clone(), sys.clone(), 30, DEFAULT_DIM_LIMIT)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut fwd, mut bwd, mut bwd_rev, mut unit) = (0, 0, 0, true);
    let mut worst_fwd = f64::NEG_INFINITY;
    for _ in 0..n {
        let mut c = || Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)) * scale;
        let (cx, cz) = (c(), c());
        let t = rng.random_range(0.0..2.0);
        let hbar = rng.random_range(0.05..0.5);
        let (a, b) = (random_spin(&mut rng)?, random_spin(&mut rng)?);
        let (x, z) = (modes.phase_point(&[cx])?, modes.phase_point(&[cz])?);
        let q = TransitionQuery { x: x.clone(), z: z.clone(), t, hbar, a: a.clone(), b: b.clone() };
        let bound = transition_bound(&q, &sys, &chi, 64)?;
        let reversed = transition_bound(&TransitionQuery { t: -t, ..q.clone() }, &sys, &chi, 64)?;
        let f = oracle.transition_amplitude(&x, &a, &z, &b, hbar, t, true)?.norm();
        let bk = oracle.transition_amplitude(&x, &a, &z, &b, hbar, t, false)?.norm();
        worst_fwd = worst_fwd.max(f - bound);
        fwd += (f <= bound + 1e-6) as usize;
        bwd += (bk <= bound + 1e-6) as usize;
        bwd_rev += (bk <= reversed + 1e-6) as usize;
        let on = TransitionQuery { z: x.free_evolve(t), ..q };
        unit &= transition_bound(&on, &sys, &chi, 64)? == 1.0;
    }
    Ok((fwd, bwd, bwd_rev, unit, worst_fwd))
}

fn transition(seed: u64) -> Result<(bool, String)> {
    let n = 20;
    let (fwd, bwd, bwd_rev, unit, worst) = transition_survey(n, seed)?;
    // e^{−itH/ħ} is the direction the bound controls; e^{+itH/ħ} is
    // controlled by the same bound at −t.
    Ok((
        fwd == n && bwd_rev == n && unit,
        format!(
            "e^(-itH/h): {fwd}/{n} within bound (max excess {worst:.2e}); e^(+itH/h): {bwd}/{n} within the stated bound, \
             {bwd_rev}/{n} within the bound at -t; bound at Z = chi_t X is 1: {unit}"
        ),
    ))
}

/// Energy-balance residuals for the skewed narrowband profile.
pub fn energy_balance_series(eps: &[f64]) -> Result<Vec<f64>> {
    let g = KGrid::build(RadialSpec { n_radial: 200, max_r: 2.0 }, AngularSpec { n_polar: 8, n_azimuth: 8 })?;
    let chi = RadialCutoff::default();
    let sys = SpinSystem::single_at_origin(0.5);
    let a = spin_state(&[0.8, 0.6], &[])?;
    eps.iter()
        .map(|&e| {
            let spec = NarrowbandSpec { profile: RadialProfile::Skewed, ..NarrowbandSpec::new(1.0, e, Helicity::Plus) };
            let x = make_narrowband(&spec, &g)?;
            energy_balance_residual(&sys, &x, &chi, &a, 1.0, 0.5, 1e-3, 1e-4)
        })
        .collect()
}

fn energy_balance() -> Result<(bool, String)> {
    let eps = [0.2, 0.1, 0.05];
    let r = energy_balance_series(&eps)?;
    let slope = log_log_slope(&eps, &r);
    Ok((
        (0.7..=1.3).contains(&slope),
        format!("residuals {:.3e}, {:.3e}, {:.3e}; slope {slope:.3}", r[0], r[1], r[2]),
    ))
}
