//! Run configuration.
//!
//! The format is line oriented: `[section]` headers, `key = value` pairs,
//! comma-separated arrays, `;` between list items and `#` comments. A value
//! whose trailing comment is exactly `# default` is read back as defaulted,
//! which lets [`RunConfig::serialize`] round-trip provenance.
//!
//! Any key can be overridden from the environment as
//! `QEDBLOCH_<SECTION>_<KEY>`, e.g. `QEDBLOCH_ORACLE_N_MAX=20`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use qedbloch::fock_oracle::{Observable, PolarizationChoice};
use qedbloch::mode_space::{AngularSpec, CutoffKind, Helicity, RadialCutoff, RadialSpec, Vec3};
use qedbloch::photon_number::RadialProfile;

use crate::CliError;

pub const ENV_PREFIX: &str = "QEDBLOCH_";

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Env,
    Cli,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Env => "env",
            Source::Cli => "cli",
        }
    }
}

/// `(section, key, default)`; `None` marks a key without a default.
const SCHEMA: &[(&str, &str, Option<&str>)] = &[
    ("run", "seed", Some("7")),
    ("cutoff", "kind", Some("gaussian")),
    ("cutoff", "scale", Some("1")),
    ("cutoff", "amplitude", Some("1")),
    ("grid", "n_radial", Some("40")),
    ("grid", "max_r", Some("auto")),
    ("grid", "n_polar", Some("20")),
    ("grid", "n_azimuth", Some("40")),
    ("system", "positions", Some("0,0,0")),
    ("system", "b_ext", Some("0,0,1")),
    ("system", "spin_re", Some("1,0")),
    ("system", "spin_im", Some("0,0")),
    ("time", "t_final", Some("10")),
    ("time", "samples", Some("101")),
    ("time", "dt", Some("0.001")),
    ("time", "n_time", Some("64")),
    ("field", "kind", Some("zero")),
    ("field", "nu", Some("1")),
    ("field", "eps", Some("0.1")),
    ("field", "helicity", Some("plus")),
    ("field", "profile", Some("skewed")),
    ("field", "amplitude", Some("1")),
    ("field", "cone_width", Some("0.5")),
    ("oracle", "modes", Some("2,0,0")),
    ("oracle", "strength", Some("0.5")),
    ("oracle", "polarization", Some("e2")),
    ("oracle", "n_max", Some("16")),
    ("oracle", "dim_limit", Some("20000")),
    ("oracle", "hbar", Some("0.1")),
    ("oracle", "observable", Some("sigma3")),
    ("oracle", "particle", Some("0")),
    ("oracle", "amplitudes", Some("zero")),
    ("sweep", "hbars", Some("0.2,0.1,0.05,0.025")),
    ("sweep", "t", Some("1")),
    ("sweep", "degree", Some("2")),
    ("bound", "t", Some("1")),
    ("bound", "hbar", Some("0.1")),
    ("bound", "x", None),
    ("bound", "z", Some("trajectory")),
    ("bound", "oracle", Some("true")),
];

fn sections() -> Vec<&'static str> {
    let mut out: Vec<&str> = Vec::new();
    for (s, _, _) in SCHEMA {
        if !out.contains(s) {
            out.push(s);
        }
    }
    out
}

fn nearest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(word, c), c))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, c)| c)
}

fn unknown_key(section: &str, key: &str) -> CliError {
    let hint = nearest(key, SCHEMA.iter().filter(|e| e.0 == section).map(|e| e.1))
        .map(|k| format!("; did you mean '{k}'?"))
        .unwrap_or_default();
    CliError::Config(format!("unknown key '{key}' in [{section}]{hint}"))
}

fn unknown_section(section: &str) -> CliError {
    let hint = nearest(section, sections()).map(|s| format!("; did you mean [{s}]?")).unwrap_or_default();
    CliError::Config(format!("unknown section [{section}]{hint}"))
}

fn known(section: &str, key: &str) -> Result<(), CliError> {
    if !sections().contains(&section) {
        return Err(unknown_section(section));
    }
    if !SCHEMA.iter().any(|e| e.0 == section && e.1 == key) {
        return Err(unknown_key(section, key));
    }
    Ok(())
}

type RawValues = BTreeMap<(String, String), (String, Source)>;

fn parse_document(text: &str) -> Result<RawValues, CliError> {
    let mut out = RawValues::new();
    let mut section: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let (body, comment) = match line.find('#') {
            Some(i) => (&line[..i], Some(line[i + 1..].trim())),
            None => (line, None),
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let at = || format!("line {}", lineno + 1);
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| CliError::Config(format!("{}: unterminated section header", at())))?
                .trim();
            if !sections().contains(&name) {
                return Err(unknown_section(name));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}: expected 'key = value'", at())))?;
        let sec = section
            .clone()
            .ok_or_else(|| CliError::Config(format!("{}: key outside of any section", at())))?;
        let key = key.trim();
        known(&sec, key)?;
        let source = if comment == Some("default") { Source::Default } else { Source::File };
        if out.insert((sec.clone(), key.to_string()), (value.trim().to_string(), source)).is_some() {
            return Err(CliError::Config(format!("{}: duplicate key '{key}' in [{sec}]", at())));
        }
    }
    Ok(out)
}

fn apply_env(raw: &mut RawValues, env: impl IntoIterator<Item = (String, String)>) -> Result<(), CliError> {
    for (name, value) in env {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        let rest = rest.to_ascii_lowercase();
        let (section, key) = rest
            .split_once('_')
            .ok_or_else(|| CliError::Config(format!("environment override {name} must be {ENV_PREFIX}<SECTION>_<KEY>")))?;
        known(section, key)?;
        raw.insert((section.to_string(), key.to_string()), (value.trim().to_string(), Source::Env));
    }
    Ok(())
}

fn fill_defaults(raw: &mut RawValues) {
    for (s, k, d) in SCHEMA {
        if let Some(d) = d {
            raw.entry((s.to_string(), k.to_string())).or_insert_with(|| (d.to_string(), Source::Default));
        }
    }
}

struct Reader<'a> {
    raw: &'a RawValues,
}

impl Reader<'_> {
    fn str(&self, s: &str, k: &str) -> Result<&str, CliError> {
        self.raw
            .get(&(s.to_string(), k.to_string()))
            .map(|v| v.0.as_str())
            .ok_or_else(|| CliError::Config(format!("missing required key '{k}' in [{s}]")))
    }

    fn opt(&self, s: &str, k: &str) -> Option<&str> {
        self.raw.get(&(s.to_string(), k.to_string())).map(|v| v.0.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, k: &str) -> Result<T, CliError> {
        let v = self.str(s, k)?;
        v.parse().map_err(|_| CliError::Config(format!("[{s}] {k} = '{v}' is not a valid value")))
    }

    fn floats(&self, s: &str, k: &str) -> Result<Vec<f64>, CliError> {
        parse_floats(self.str(s, k)?).map_err(|e| CliError::Config(format!("[{s}] {k}: {e}")))
    }

    fn vec3(&self, s: &str, k: &str) -> Result<Vec3, CliError> {
        parse_vec3(self.str(s, k)?).map_err(|e| CliError::Config(format!("[{s}] {k}: {e}")))
    }

    fn vec3_list(&self, s: &str, k: &str) -> Result<Vec<Vec3>, CliError> {
        self.str(s, k)?
            .split(';')
            .map(|item| parse_vec3(item).map_err(|e| CliError::Config(format!("[{s}] {k}: {e}"))))
            .collect()
    }
}

fn parse_floats(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", x.trim())))
        .collect()
}

fn parse_vec3(v: &str) -> Result<Vec3, String> {
    let f = parse_floats(v)?;
    if f.len() != 3 {
        return Err(format!("expected three components, got '{}'", v.trim()));
    }
    Ok(Vec3::new(f[0], f[1], f[2]))
}

/// Complex amplitudes `re,im; re,im; ...`, or `zero`.
#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Zero,
    Values(Vec<Complex64>),
}

impl Amplitudes {
    fn parse(v: &str) -> Result<Self, String> {
        if v.trim() == "zero" {
            return Ok(Amplitudes::Zero);
        }
        v.split(';')
            .map(|item| {
                let f = parse_floats(item)?;
                match f.as_slice() {
                    [re, im] => Ok(Complex64::new(*re, *im)),
                    [re] => Ok(Complex64::new(*re, 0.0)),
                    _ => Err(format!("expected 're,im', got '{}'", item.trim())),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Amplitudes::Values)
    }

    pub fn resolve(&self, n: usize) -> Result<Vec<Complex64>, CliError> {
        match self {
            Amplitudes::Zero => Ok(vec![Complex64::new(0.0, 0.0); n]),
            Amplitudes::Values(v) if v.len() == n => Ok(v.clone()),
            Amplitudes::Values(v) => {
                Err(CliError::Config(format!("{} amplitudes given for a mode set of {n} modes", v.len())))
            }
        }
    }

    fn render(&self) -> String {
        match self {
            Amplitudes::Zero => "zero".into(),
            Amplitudes::Values(v) => v.iter().map(|c| format!("{:?},{:?}", c.re, c.im)).collect::<Vec<_>>().join("; "),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Zero,
    Narrowband,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub kind: FieldKind,
    pub nu: f64,
    pub eps: f64,
    pub helicity: Helicity,
    pub profile: RadialProfile,
    pub amplitude: f64,
    pub cone_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub positions: Vec<Vec3>,
    pub b_ext: Vec3,
    pub spin_re: Vec<f64>,
    pub spin_im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_final: f64,
    pub samples: usize,
    pub dt: f64,
    pub n_time: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub modes: Vec<Vec3>,
    pub strength: f64,
    pub polarization: PolarizationChoice,
    pub n_max: usize,
    pub dim_limit: usize,
    pub hbar: f64,
    pub particle: usize,
    pub observable: Observable,
    pub amplitudes: Amplitudes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub hbars: Vec<f64>,
    pub t: f64,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub t: f64,
    pub hbar: f64,
    pub x: Option<Amplitudes>,
    /// `None` places `Z` on the free trajectory `χ_t X`.
    pub z: Option<Amplitudes>,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub cutoff: RadialCutoff,
    pub radial: RadialSpec,
    /// `None` uses the natural extent of the cutoff.
    pub max_r: Option<f64>,
    pub angular: AngularSpec,
    pub system: SystemConfig,
    pub time: TimeConfig,
    pub field: FieldConfig,
    pub oracle: OracleConfig,
    pub sweep: SweepConfig,
    pub bound: BoundConfig,
    pub provenance: BTreeMap<String, Source>,
}

fn observable_name(o: Observable) -> String {
    match o {
        Observable::Spin { axis, .. } => format!("sigma{}", axis + 1),
        Observable::Number => "number".into(),
        Observable::NumberRate => "number_rate".into(),
    }
}

fn parse_observable(v: &str, particle: usize) -> Result<Observable, CliError> {
    Ok(match v {
        "sigma1" => Observable::Spin { particle, axis: 0 },
        "sigma2" => Observable::Spin { particle, axis: 1 },
        "sigma3" => Observable::Spin { particle, axis: 2 },
        "number" => Observable::Number,
        "number_rate" => Observable::NumberRate,
        other => {
            return Err(CliError::Config(format!(
                "[oracle] observable = '{other}' (expected sigma1, sigma2, sigma3, number or number_rate)"
            )))
        }
    })
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn count(name: &str, v: usize) -> Result<usize, CliError> {
    if v > 0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be at least 1")))
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn v3(v: &Vec3) -> String {
    format!("{:?},{:?},{:?}", v.x, v.y, v.z)
}

impl RunConfig {
    /// Parses a document without environment overrides.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::parse_with_env(text, std::iter::empty())
    }

    pub fn parse_with_env(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let mut raw = parse_document(text)?;
        apply_env(&mut raw, env)?;
        fill_defaults(&mut raw);
        Self::from_raw(&raw)
    }

    fn from_raw(raw: &RawValues) -> Result<Self, CliError> {
        let r = Reader { raw };
        let cutoff = RadialCutoff {
            kind: r.parse::<CutoffKind>("cutoff", "kind")?,
            scale: positive("[cutoff] scale", r.parse("cutoff", "scale")?)?,
            amplitude: r.parse("cutoff", "amplitude")?,
        };
        cutoff.validate().map_err(CliError::from)?;
        let max_r = match r.str("grid", "max_r")? {
            "auto" => None,
            _ => Some(positive("[grid] max_r", r.parse("grid", "max_r")?)?),
        };
        let radial = RadialSpec {
            n_radial: count("[grid] n_radial", r.parse("grid", "n_radial")?)?,
            max_r: max_r.unwrap_or_else(|| cutoff.natural_max_r()),
        };
        let angular = AngularSpec {
            n_polar: count("[grid] n_polar", r.parse("grid", "n_polar")?)?,
            n_azimuth: count("[grid] n_azimuth", r.parse("grid", "n_azimuth")?)?,
        };
        let system = SystemConfig {
            positions: r.vec3_list("system", "positions")?,
            b_ext: r.vec3("system", "b_ext")?,
            spin_re: r.floats("system", "spin_re")?,
            spin_im: r.floats("system", "spin_im")?,
        };
        let dim = 1usize << system.positions.len().min(20);
        if system.spin_re.len() != dim || system.spin_im.len() != dim {
            return Err(CliError::Config(format!(
                "[system] spin_re and spin_im need {dim} components for {} spins",
                system.positions.len()
            )));
        }
        let time = TimeConfig {
            t_final: r.parse("time", "t_final")?,
            samples: count("[time] samples", r.parse("time", "samples")?)?,
            dt: positive("[time] dt", r.parse("time", "dt")?)?,
            n_time: count("[time] n_time", r.parse("time", "n_time")?)?,
        };
        if !(time.t_final >= 0.0) {
            return Err(CliError::Config("[time] t_final must be non-negative".into()));
        }
        let field = FieldConfig {
            kind: match r.str("field", "kind")? {
                "zero" => FieldKind::Zero,
                "narrowband" => FieldKind::Narrowband,
                other => return Err(CliError::Config(format!("[field] kind = '{other}' (expected zero or narrowband)"))),
            },
            nu: positive("[field] nu", r.parse("field", "nu")?)?,
            eps: positive("[field] eps", r.parse("field", "eps")?)?,
            helicity: match r.str("field", "helicity")? {
                "plus" => Helicity::Plus,
                "minus" => Helicity::Minus,
                other => return Err(CliError::Config(format!("[field] helicity = '{other}' (expected plus or minus)"))),
            },
            profile: r.parse::<RadialProfile>("field", "profile")?,
            amplitude: r.parse("field", "amplitude")?,
            cone_width: positive("[field] cone_width", r.parse("field", "cone_width")?)?,
        };
        let particle: usize = r.parse("oracle", "particle")?;
        if particle >= system.positions.len() {
            return Err(CliError::Config(format!("[oracle] particle {particle} out of range")));
        }
        let oracle = OracleConfig {
            modes: r.vec3_list("oracle", "modes")?,
            strength: positive("[oracle] strength", r.parse("oracle", "strength")?)?,
            polarization: r.parse::<PolarizationChoice>("oracle", "polarization")?,
            n_max: r.parse("oracle", "n_max")?,
            dim_limit: r.parse("oracle", "dim_limit")?,
            hbar: positive("[oracle] hbar", r.parse("oracle", "hbar")?)?,
            particle,
            observable: parse_observable(r.str("oracle", "observable")?, particle)?,
            amplitudes: Amplitudes::parse(r.str("oracle", "amplitudes")?)
                .map_err(|e| CliError::Config(format!("[oracle] amplitudes: {e}")))?,
        };
        let sweep = SweepConfig {
            hbars: r.floats("sweep", "hbars")?,
            t: r.parse("sweep", "t")?,
            degree: r.parse("sweep", "degree")?,
        };
        for &h in &sweep.hbars {
            positive("[sweep] hbars entries", h)?;
        }
        let amps = |k: &str| -> Result<Option<Amplitudes>, CliError> {
            match r.opt("bound", k) {
                None | Some("trajectory") => Ok(None),
                Some(v) => Amplitudes::parse(v).map(Some).map_err(|e| CliError::Config(format!("[bound] {k}: {e}"))),
            }
        };
        let bound = BoundConfig {
            t: r.parse("bound", "t")?,
            hbar: positive("[bound] hbar", r.parse("bound", "hbar")?)?,
            x: amps("x")?,
            z: amps("z")?,
            oracle: r.parse("bound", "oracle")?,
        };
        let provenance = raw.iter().map(|((s, k), (_, src))| (format!("{s}.{k}"), *src)).collect();
        Ok(Self {
            seed: r.parse("run", "seed")?,
            cutoff,
            radial,
            max_r,
            angular,
            system,
            time,
            field,
            oracle,
            sweep,
            bound,
            provenance,
        })
    }

    pub fn source(&self, section: &str, key: &str) -> Option<Source> {
        self.provenance.get(&format!("{section}.{key}")).copied()
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.provenance.insert("run.seed".into(), Source::Cli);
    }

    /// `[bound] x`, which has no default.
    pub fn bound_x(&self) -> Result<&Amplitudes, CliError> {
        self.bound.x.as_ref().ok_or_else(|| CliError::Config("missing required key 'x' in [bound]".into()))
    }

    fn value(&self, section: &str, key: &str) -> Option<String> {
        let o = &self.oracle;
        Some(match (section, key) {
            ("run", "seed") => self.seed.to_string(),
            ("cutoff", "kind") => self.cutoff.kind.name().into(),
            ("cutoff", "scale") => format!("{:?}", self.cutoff.scale),
            ("cutoff", "amplitude") => format!("{:?}", self.cutoff.amplitude),
            ("grid", "n_radial") => self.radial.n_radial.to_string(),
            ("grid", "max_r") => self.max_r.map_or("auto".into(), |v| format!("{v:?}")),
            ("grid", "n_polar") => self.angular.n_polar.to_string(),
            ("grid", "n_azimuth") => self.angular.n_azimuth.to_string(),
            ("system", "positions") => self.system.positions.iter().map(v3).collect::<Vec<_>>().join("; "),
            ("system", "b_ext") => v3(&self.system.b_ext),
            ("system", "spin_re") => list(&self.system.spin_re),
            ("system", "spin_im") => list(&self.system.spin_im),
            ("time", "t_final") => format!("{:?}", self.time.t_final),
            ("time", "samples") => self.time.samples.to_string(),
            ("time", "dt") => format!("{:?}", self.time.dt),
            ("time", "n_time") => self.time.n_time.to_string(),
            ("field", "kind") => match self.field.kind {
                FieldKind::Zero => "zero".into(),
                FieldKind::Narrowband => "narrowband".into(),
            },
            ("field", "nu") => format!("{:?}", self.field.nu),
            ("field", "eps") => format!("{:?}", self.field.eps),
            ("field", "helicity") => match self.field.helicity {
                Helicity::Plus => "plus".into(),
                Helicity::Minus => "minus".into(),
            },
            ("field", "profile") => self.field.profile.name().into(),
            ("field", "amplitude") => format!("{:?}", self.field.amplitude),
            ("field", "cone_width") => format!("{:?}", self.field.cone_width),
            ("oracle", "modes") => o.modes.iter().map(v3).collect::<Vec<_>>().join("; "),
            ("oracle", "strength") => format!("{:?}", o.strength),
            ("oracle", "polarization") => o.polarization.name().into(),
            ("oracle", "n_max") => o.n_max.to_string(),
            ("oracle", "dim_limit") => o.dim_limit.to_string(),
            ("oracle", "hbar") => format!("{:?}", o.hbar),
            ("oracle", "observable") => observable_name(o.observable),
            ("oracle", "particle") => o.particle.to_string(),
            ("oracle", "amplitudes") => o.amplitudes.render(),
            ("sweep", "hbars") => list(&self.sweep.hbars),
            ("sweep", "t") => format!("{:?}", self.sweep.t),
            ("sweep", "degree") => self.sweep.degree.to_string(),
            ("bound", "t") => format!("{:?}", self.bound.t),
            ("bound", "hbar") => format!("{:?}", self.bound.hbar),
            ("bound", "x") => self.bound.x.as_ref()?.render(),
            ("bound", "z") => self.bound.z.as_ref().map_or("trajectory".into(), |a| a.render()),
            ("bound", "oracle") => self.bound.oracle.to_string(),
            _ => return None,
        })
    }

    /// Canonical document; defaulted values carry a `# default` marker.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for section in sections() {
            let _ = writeln!(out, "[{section}]");
            for (_, key, _) in SCHEMA.iter().filter(|e| e.0 == section) {
                let Some(value) = self.value(section, key) else { continue };
                let marker = match self.source(section, key) {
                    Some(Source::Default) => "  # default",
                    _ => "",
                };
                let _ = writeln!(out, "{key} = {value}{marker}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.cutoff, RadialCutoff::gaussian(1.0));
        assert_eq!(c.source("cutoff", "kind"), Some(Source::Default));
        assert_eq!(c.source("cutoff", "scale"), Some(Source::Default));
        assert_eq!(c.radial.max_r, 8.0);
        assert!(c.bound.x.is_none());
        assert!(matches!(c.bound_x(), Err(CliError::Config(m)) if m.contains("'x'")));
    }

    #[test]
    fn empty_cutoff_section_is_defaulted() {
        let c = RunConfig::parse("[cutoff]\n").unwrap();
        assert_eq!(c.cutoff, RadialCutoff::gaussian(1.0));
        assert!(c.serialize().contains("kind = gaussian  # default"));
    }

    #[test]
    fn unknown_keys_suggest_neighbours() {
        let err = RunConfig::parse("[grid]\nn_radail = 10\n").unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("n_radial")), "{err}");
        let err = RunConfig::parse("[orcale]\n").unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("[oracle]")), "{err}");
    }

    #[test]
    fn negative_hbar_is_rejected() {
        assert!(RunConfig::parse("[oracle]\nhbar = -0.1\n").is_err());
        assert!(RunConfig::parse("[sweep]\nhbars = 0.1, -0.05, 0.02\n").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "[cutoff]\nscale = 1.5\n[system]\npositions = 0,0,0; 0.5,0,0\nspin_re = 1,0,0,0\nspin_im = 0,0,0,0\n\
                    [bound]\nx = 0.1,0.2\nz = 0.3,-0.1\n";
        let a = RunConfig::parse(text).unwrap();
        let b = RunConfig::parse(&a.serialize()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
        assert_eq!(b.source("cutoff", "scale"), Some(Source::File));
        assert_eq!(b.source("cutoff", "kind"), Some(Source::Default));
    }

    #[test]
    fn environment_overrides() {
        let env = vec![("QEDBLOCH_ORACLE_N_MAX".to_string(), "24".to_string()), ("PATH".into(), "/bin".into())];
        let c = RunConfig::parse_with_env("", env).unwrap();
        assert_eq!(c.oracle.n_max, 24);
        assert_eq!(c.source("oracle", "n_max"), Some(Source::Env));
        let bad = vec![("QEDBLOCH_ORACLE_NMAX".to_string(), "24".to_string())];
        assert!(matches!(RunConfig::parse_with_env("", bad), Err(CliError::Config(m)) if m.contains("n_max")));
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        assert!(RunConfig::parse("[time]\ndt = 0.1\ndt = 0.2\n").is_err());
        assert!(RunConfig::parse("dt = 0.1\n").is_err());
        assert!(RunConfig::parse("[time]\ndt 0.1\n").is_err());
        assert!(RunConfig::parse("[time]\ndt = fast\n").is_err());
    }
}
