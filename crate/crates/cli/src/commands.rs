use std::sync::Arc;

use serde_json::{json, Value};

use qedbloch::bloch_core::{bloch_evolve, spin_symbol0, uniform_times};
use qedbloch::field_symbols::{RadialModel, SpinSystem};
use qedbloch::fock_oracle::{weight_for_strength, DiscreteModeSet, Observable, Oracle};
use qedbloch::mode_space::{KGrid, PhasePoint, Vec3};
use qedbloch::photon_number::{make_narrowband, n0_rate, rate_series, sandwich, AngularProfile, NarrowbandSpec};
use qedbloch::radiative::{symbol_expectation, RadiativeModel};
use qedbloch::selftest::run_all_seeded;
use qedbloch::spin::{spin_state, CVector};
use qedbloch::transition::{transition_bound, TransitionQuery};

use crate::config::{FieldKind, RunConfig};
use crate::output::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bloch,
    Correction,
    PhotonRate,
    Bound,
    Oracle,
    Sweep,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bloch => "bloch",
            Command::Correction => "correction",
            Command::PhotonRate => "photon-rate",
            Command::Bound => "bound",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }
}

/// Everything a command produces; the caller decides where it goes.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Extra provenance lines for the CSV header.
    pub notes: Vec<String>,
    pub summary: Value,
    /// Human-readable result lines for stdout.
    pub report: Vec<String>,
    /// Set when an invariant the command checks did not hold.
    pub violation: Option<String>,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Bloch => bloch(cfg),
        Command::Correction => correction(cfg),
        Command::PhotonRate => photon_rate(cfg),
        Command::Bound => bound(cfg),
        Command::Oracle => oracle(cfg),
        Command::Sweep => sweep(cfg),
        Command::Selftest => selftest(cfg),
    }
}

fn system(cfg: &RunConfig) -> Result<SpinSystem, CliError> {
    Ok(SpinSystem::new(cfg.system.positions.clone(), cfg.system.b_ext)?)
}

fn spin(cfg: &RunConfig) -> Result<CVector, CliError> {
    Ok(spin_state(&cfg.system.spin_re, &cfg.system.spin_im)?)
}

fn times(cfg: &RunConfig) -> Vec<f64> {
    uniform_times(cfg.time.t_final, cfg.time.samples)
}

/// The continuum grid and the initial field on it.
fn field(cfg: &RunConfig) -> Result<(Arc<KGrid>, PhasePoint), CliError> {
    let grid = KGrid::build(cfg.radial, cfg.angular)?;
    let xp = match cfg.field.kind {
        FieldKind::Zero => PhasePoint::zeros(&grid),
        FieldKind::Narrowband => {
            let f = &cfg.field;
            let spec = NarrowbandSpec {
                profile: f.profile,
                amplitude: f.amplitude,
                angular: AngularProfile::Cone { axis: Vec3::z(), width: f.cone_width },
                ..NarrowbandSpec::new(f.nu, f.eps, f.helicity)
            };
            make_narrowband(&spec, &grid)?
        }
    };
    Ok((grid, xp))
}

fn bloch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = system(cfg)?;
    let a = spin(cfg)?;
    let (_, xp) = field(cfg)?;
    let ts = times(cfg);
    let traj = bloch_evolve(&sys, &xp, &cfg.cutoff, &ts, cfg.time.dt)?;
    let mut cols = vec!["t".to_string()];
    for l in 0..sys.n_particles() {
        for m in 1..=3 {
            cols.push(format!("s{l}_{m}"));
        }
    }
    let mut table = Table { columns: cols, rows: Vec::new() };
    let mut defect: f64 = 0.0;
    for rot in &traj.samples {
        defect = defect.max(rot.orthogonality_defect());
        let mut row = vec![rot.t];
        for l in 0..sys.n_particles() {
            let s = symbol_expectation(&spin_symbol0(rot, l)?, &a);
            row.extend([s.x, s.y, s.z]);
        }
        table.push(row);
    }
    let violation = (defect > 1e-8).then(|| format!("rotation orthogonality defect {defect:.2e}"));
    Ok(Outcome {
        report: vec![format!("{} samples, orthogonality defect {defect:.2e}, max drift {:.2e}", ts.len(), traj.max_drift)],
        summary: json!({ "samples": ts.len(), "orthogonality_defect": defect, "max_drift": traj.max_drift }),
        table,
        notes: vec![],
        violation,
    })
}

fn correction(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = cfg.system.b_ext;
    if cfg.system.positions.len() != 1 || cfg.field.kind != FieldKind::Zero || b.x != 0.0 || b.y != 0.0 || b.z <= 0.0 {
        return Err(CliError::Config(
            "the first-order correction is available for one spin, X = 0 and b_ext = (0, 0, |B|) with |B| > 0".into(),
        ));
    }
    let model = RadiativeModel::new(RadialModel::with_defaults(cfg.cutoff), cfg.time.n_time)?;
    let series = model.series(&times(cfg), b.z)?;
    let mut table = Table::new(&["t", "phi0", "phi3", "f3_z", "s1_z"]);
    for i in 0..series.times.len() {
        table.push(vec![series.times[i], series.phi0[i], series.phi3[i], series.f3z[i], series.s1z[i]]);
    }
    let max = series.s1z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at_zero = series.times.iter().zip(&series.s1z).find(|(t, _)| **t == 0.0).map(|(_, s)| *s);
    let violation = if at_zero.is_some_and(|s| s != 0.0) {
        Some(format!("s1_z(0) = {} is not zero", at_zero.unwrap_or_default()))
    } else if series.times.iter().zip(&series.s1z).any(|(t, s)| *t > 0.0 && *s > 0.0) {
        Some(format!("s1_z is positive somewhere (max {max:e})"))
    } else {
        None
    };
    Ok(Outcome {
        report: vec![format!("{} samples, max s1_z = {max:e}", series.times.len())],
        summary: json!({ "bmag": b.z, "samples": series.times.len(), "max_s1_z": max }),
        table,
        notes: vec![],
        violation,
    })
}

fn photon_rate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = system(cfg)?;
    let a = spin(cfg)?;
    let (_, xp) = field(cfg)?;
    let s = rate_series(&sys, &xp, &cfg.cutoff, &a, &times(cfg), cfg.time.dt)?;
    let mut table = Table::new(&["t", "rate", "cumulative"]);
    for i in 0..s.times.len() {
        table.push(vec![s.times[i], s.rate[i], s.cumulative[i]]);
    }
    let total = s.cumulative.last().copied().unwrap_or(0.0);
    Ok(Outcome {
        report: vec![format!("|X|^2 = {:e}, integrated rate {total:e}", xp.norm_sq())],
        summary: json!({ "x_norm_sq": xp.norm_sq(), "integrated_rate": total }),
        table,
        notes: vec![],
        violation: None,
    })
}

/// The oracle's mode set: one node per `[oracle] modes` entry, weighted to
/// the configured coupling strength.
fn oracle_system(cfg: &RunConfig) -> Result<Oracle, CliError> {
    let o = &cfg.oracle;
    let weights: Vec<f64> = o.modes.iter().map(|k| weight_for_strength(&cfg.cutoff, k.norm(), o.strength)).collect();
    let grid = KGrid::custom(o.modes.clone(), weights)?;
    let sys = system(cfg)?;
    let modes = DiscreteModeSet::all_nodes(&grid, o.polarization, &sys, &cfg.cutoff)?;
    Ok(Oracle::new(modes, sys, o.n_max, o.dim_limit)?)
}

fn oracle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = oracle_system(cfg)?;
    let a = spin(cfg)?;
    let x = sys.modes.phase_point(&cfg.oracle.amplitudes.resolve(sys.modes.len())?)?;
    let r = sys.observe(cfg.oracle.observable, &x, &a, cfg.oracle.hbar, &times(cfg))?;
    let mut table = Table::new(&["t", &r.observable.label()]);
    for (t, v) in r.times.iter().zip(&r.values) {
        table.push(vec![*t, *v]);
    }
    Ok(Outcome {
        report: vec![format!(
            "dimension {}, truncation mass {:.2e}, top-shell population {:.2e}",
            sys.basis.dim(),
            r.truncation_mass,
            r.edge_population
        )]
        .into_iter()
        .chain(r.warnings.iter().map(|w| format!("warning: {w}")))
        .collect(),
        summary: json!({
            "observable": r.observable.label(),
            "hbar": r.hbar,
            "dimension": sys.basis.dim(),
            "truncation_mass": r.truncation_mass,
            "edge_population": r.edge_population,
            "norm_drift": r.norm_drift,
            "warnings": r.warnings,
        }),
        table,
        notes: vec![format!("hilbert dimension = {}", sys.basis.dim())],
        violation: (r.norm_drift > 1e-10).then(|| format!("norm drift {:.2e}", r.norm_drift)),
    })
}

/// Leading and first-order predictions for a sweep, where available.
fn predictions(cfg: &RunConfig, sys: &Oracle, x: &PhasePoint, a: &CVector) -> Result<(Option<f64>, Option<f64>), CliError> {
    let t = cfg.sweep.t;
    if t < 0.0 {
        return Ok((None, None));
    }
    let traj = bloch_evolve(&sys.sys, x, sys.modes.cutoff(), &[t], cfg.time.dt)?;
    Ok(match cfg.oracle.observable {
        Observable::Spin { particle, axis } => {
            let c0 = symbol_expectation(&spin_symbol0(traj.last(), particle)?, a)[axis];
            let b = sys.sys.b_ext;
            let up = a.len() == 2 && (a[0].norm() - 1.0).abs() < 1e-12;
            let c1 = (axis == 2 && x.is_zero() && up && b.x == 0.0 && b.y == 0.0 && b.z > 0.0)
                .then(|| sys.modes.spectrum(0).s1_third(t, b.z));
            (Some(c0), c1)
        }
        Observable::NumberRate => (Some(sandwich(a, &n0_rate(t, x, &sys.sys, traj.last(), sys.modes.cutoff())?).re), None),
        Observable::Number => (None, None),
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = oracle_system(cfg)?;
    let a = spin(cfg)?;
    let x = sys.modes.phase_point(&cfg.oracle.amplitudes.resolve(sys.modes.len())?)?;
    let (c0_pred, c1_pred) = predictions(cfg, &sys, &x, &a)?;
    let (fit, runs) = sys.hbar_sweep(cfg.oracle.observable, &x, &a, cfg.sweep.t, &cfg.sweep.hbars, cfg.sweep.degree, c0_pred)?;
    let mut table = Table::new(&["hbar", "value", "truncation_mass"]);
    for r in &runs {
        table.push(vec![r.hbar, r.values[0], r.truncation_mass]);
    }
    let mut report = vec![format!("coefficients {:?}", fit.coefficients)];
    if let Some(p) = c0_pred {
        report.push(format!("leading-order prediction {p:e}"));
    }
    if let Some(p) = c1_pred {
        report.push(format!("first-order prediction {p:e}"));
    }
    if let Some(p) = fit.order {
        report.push(format!("order estimate {p:.4}"));
    }
    report.extend(fit.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome {
        summary: json!({
            "observable": cfg.oracle.observable.label(),
            "t": cfg.sweep.t,
            "coefficients": fit.coefficients,
            "residual": fit.residual,
            "condition": fit.condition,
            "order": fit.order,
            "c0_prediction": c0_pred,
            "c1_prediction": c1_pred,
            "warnings": fit.warnings,
        }),
        report,
        table,
        notes: vec![format!("fit degree = {}", cfg.sweep.degree)],
        violation: None,
    })
}

fn bound(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = oracle_system(cfg)?;
    let b = &cfg.bound;
    let n = sys.modes.len();
    let x = sys.modes.phase_point(&cfg.bound_x()?.resolve(n)?)?;
    let z = match &b.z {
        None => x.free_evolve(b.t),
        Some(amp) => sys.modes.phase_point(&amp.resolve(n)?)?,
    };
    let a = spin(cfg)?;
    let q = TransitionQuery { x: x.clone(), z: z.clone(), t: b.t, hbar: b.hbar, a: a.clone(), b: a.clone() };
    let value = transition_bound(&q, &sys.sys, sys.modes.cutoff(), cfg.time.n_time)?;
    let mut report = vec![format!("bound = {value:?}")];
    let mut row = vec![b.t, b.hbar, value];
    let mut columns = vec!["t", "hbar", "bound"];
    let mut summary = json!({ "t": b.t, "hbar": b.hbar, "bound": value });
    let mut violation = None;
    if b.oracle {
        let fwd = sys.transition_amplitude(&x, &a, &z, &a, b.hbar, b.t, true)?.norm();
        let bwd = sys.transition_amplitude(&x, &a, &z, &a, b.hbar, b.t, false)?.norm();
        report.push(format!("oracle |amplitude|: e^(-itH/h) {fwd:?}, e^(+itH/h) {bwd:?}"));
        columns.extend(["amplitude_forward", "amplitude_backward"]);
        row.extend([fwd, bwd]);
        summary["amplitude_forward"] = json!(fwd);
        summary["amplitude_backward"] = json!(bwd);
        if fwd > value + 1e-6 {
            violation = Some(format!("oracle amplitude {fwd:e} exceeds the bound {value:e}"));
        }
    }
    let mut table = Table::new(&columns);
    table.push(row);
    Ok(Outcome { table, notes: vec![], summary, report, violation })
}

fn selftest(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let reports = run_all_seeded(cfg.seed);
    let mut table = Table::new(&["criterion", "passed"]);
    for r in &reports {
        table.push(vec![r.id as f64, if r.passed { 1.0 } else { 0.0 }]);
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("C{}", r.id)).collect();
    Ok(Outcome {
        report: reports.iter().map(|r| r.line()).collect(),
        summary: Value::Array(
            reports
                .iter()
                .map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed, "summary": r.summary, "seconds": r.elapsed.as_secs_f64() }))
                .collect(),
        ),
        table,
        notes: vec![format!("transition seed = {}", cfg.seed)],
        violation: (!failed.is_empty()).then(|| format!("failed criteria: {}", failed.join(", "))),
    })
}
