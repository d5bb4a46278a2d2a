//! `key = value` run configuration.
//!
//! ```text
//! # one super-threshold front
//! [run]
//! mode = quench
//! [model]
//! N = 1000
//! alpha = 0.015625
//! v = 4
//! ```
//!
//! Section headers are optional; when present, a key must sit in its own
//! section. `N`, `alpha`, `v` and `tau_q` take comma-separated lists in scan
//! and predict mode. Numbers are plain decimals.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::analytic::LZConfig;
use crate::dynamics::{IntegratorConfig, Method, DEFAULT_DRIFT_TOLERANCE, DEFAULT_DT, DEFAULT_RK4_DT};
use crate::error::{Error, Result};
use crate::model::DEFAULT_MARGIN;
use crate::observables::DEFAULT_R_CAL;

/// Smallest saturation margin accepted from a config.
pub const MIN_MARGIN: f64 = 5.0;

const KEYS: &[(&str, &str)] = &[
    ("mode", "run"),
    ("jobs", "run"),
    ("out", "output"),
    ("N", "model"),
    ("profile", "model"),
    ("alpha", "model"),
    ("v", "model"),
    ("n_c", "model"),
    ("tau_q", "model"),
    ("g", "model"),
    ("g_start", "model"),
    ("g_end", "model"),
    ("margin", "integrator"),
    ("dt", "integrator"),
    ("method", "integrator"),
    ("checkpoint_stride", "integrator"),
    ("drift_tolerance", "integrator"),
    ("lambda", "analytic"),
    ("k_grid", "analytic"),
    ("n_ref", "observables"),
    ("r_cal", "observables"),
    ("snapshot_front", "observables"),
];

const LIST_KEYS: &[&str] = &["N", "alpha", "v", "tau_q"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Static,
    Quench,
    Scan,
    Predict,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "static" => Ok(Mode::Static),
            "quench" => Ok(Mode::Quench),
            "scan" => Ok(Mode::Scan),
            "predict" => Ok(Mode::Predict),
            _ => Err(format!("unknown mode '{s}' (static | quench | scan | predict)")),
        }
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Quench => "quench",
            Mode::Scan => "scan",
            Mode::Predict => "predict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Uniform,
    Ramp,
    StaticFront,
    MovingFront,
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(ProfileKind::Uniform),
            "ramp" => Ok(ProfileKind::Ramp),
            "static_front" => Ok(ProfileKind::StaticFront),
            "moving_front" => Ok(ProfileKind::MovingFront),
            _ => Err(format!("unknown profile '{s}' (uniform | ramp | static_front | moving_front)")),
        }
    }
}

/// Parameter grid; every mode carries one, single-valued outside scan/predict.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub n_sites: Vec<usize>,
    pub alpha: Vec<f64>,
    pub v: Vec<f64>,
    pub tau_q: Vec<f64>,
}

/// One grid point; fields that do not apply to the profile are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n_sites: Option<usize>,
    pub alpha: Option<f64>,
    pub v: Option<f64>,
    pub tau_q: Option<f64>,
}

impl GridPoint {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.n_sites {
            parts.push(format!("N={n}"));
        }
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(v) = self.v {
            parts.push(format!("v={v}"));
        }
        if let Some(t) = self.tau_q {
            parts.push(format!("tau_q={t}"));
        }
        parts.join(" ")
    }
}

impl ScanSpec {
    /// Cross product in `N`, `alpha`, `v`, `tau_q` order, last index fastest.
    /// Empty lists stand for "not part of this grid".
    pub fn points(&self) -> Vec<GridPoint> {
        fn axis<T: Copy>(xs: &[T]) -> Vec<Option<T>> {
            if xs.is_empty() {
                vec![None]
            } else {
                xs.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &n_sites in &axis(&self.n_sites) {
            for &alpha in &axis(&self.alpha) {
                for &v in &axis(&self.v) {
                    for &tau_q in &axis(&self.tau_q) {
                        out.push(GridPoint { n_sites, alpha, v, tau_q });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub profile: ProfileKind,
    pub grid: ScanSpec,
    pub n_c: Option<f64>,
    pub g: Option<f64>,
    pub g_start: f64,
    pub g_end: f64,
    pub margin: f64,
    pub integrator: IntegratorConfig,
    pub lz: LZConfig,
    pub n_ref: Option<usize>,
    pub r_cal: usize,
    pub snapshot_front: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    /// Grid axes this mode and profile read.
    pub fn grid_axes(&self) -> &'static [&'static str] {
        match (self.mode, self.profile) {
            (Mode::Predict, _) => &["alpha", "v"],
            (_, ProfileKind::MovingFront) => &["N", "alpha", "v"],
            (_, ProfileKind::Ramp) => &["N", "tau_q"],
            (_, ProfileKind::StaticFront) => &["N", "alpha"],
            (_, ProfileKind::Uniform) => &["N"],
        }
    }

    /// Grid points over [`RunConfig::grid_axes`]; empty if any of them is.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let empty = |axis: &str| match axis {
            "N" => g.n_sites.is_empty(),
            "alpha" => g.alpha.is_empty(),
            "v" => g.v.is_empty(),
            _ => g.tau_q.is_empty(),
        };
        if self.grid_axes().iter().any(|a| empty(a)) {
            return Vec::new();
        }
        g.points()
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_value<T: FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value.parse().map_err(|_| err(e.line, format!("cannot parse '{}' for {key}", e.value)))
}

fn parse_float(key: &str, line: usize, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && s.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) => Ok(x),
        _ => Err(err(line, format!("'{s}' for {key} is not a decimal number"))),
    }
}

/// Parse and fully validate a config; `mode` may come from the command line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_mode(text, None)
}

pub fn parse_config_with_mode(text: &str, mode_override: Option<Mode>) -> Result<RunConfig> {
    let mut entries: HashMap<&'static str, Entry> = HashMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("malformed section header '{content}'")))?
                .trim();
            if !KEYS.iter().any(|&(_, s)| s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| err(line, format!("expected key = value, got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let &(known, home) =
            KEYS.iter().find(|&&(k, _)| k == key).ok_or_else(|| err(line, format!("unknown key '{key}'")))?;
        if let Some(s) = &section {
            if s != home {
                return Err(err(line, format!("key '{key}' belongs in [{home}], not [{s}]")));
            }
        }
        if value.is_empty() {
            return Err(err(line, format!("empty value for {key}")));
        }
        if let Some(prev) = entries.insert(known, Entry { line, value: value.to_string() }) {
            return Err(err(line, format!("duplicate key '{key}' (first set on line {})", prev.line)));
        }
    }
    build(&entries, mode_override)
}

fn build(entries: &HashMap<&'static str, Entry>, mode_override: Option<Mode>) -> Result<RunConfig> {
    let scalar = |key: &str| -> Result<Option<f64>> {
        entries.get(key).map(|e| parse_float(key, e.line, &e.value)).transpose()
    };
    let integer = |key: &str| -> Result<Option<usize>> {
        entries.get(key).map(|e| parse_value::<usize>(key, e)).transpose()
    };
    let list_f = |key: &str| -> Result<Vec<f64>> {
        match entries.get(key) {
            None => Ok(Vec::new()),
            Some(e) => e.value.split(',').map(|s| parse_float(key, e.line, s.trim())).collect(),
        }
    };

    let mode = match (entries.get("mode"), mode_override) {
        (Some(e), Some(m)) => {
            let from_file: Mode = e.value.parse().map_err(|m: String| err(e.line, m))?;
            if from_file != m {
                return Err(err(e.line, format!("mode {} conflicts with requested {}", e.value, m.name())));
            }
            m
        }
        (Some(e), None) => e.value.parse().map_err(|m: String| err(e.line, m))?,
        (None, Some(m)) => m,
        (None, None) => return Err(err(0, "missing required key 'mode'")),
    };
    let profile = match entries.get("profile") {
        Some(e) => e.value.parse().map_err(|m: String| err(e.line, m))?,
        None => match mode {
            Mode::Static => ProfileKind::StaticFront,
            _ => ProfileKind::MovingFront,
        },
    };

    let n_sites: Vec<usize> = match entries.get("N") {
        None => Vec::new(),
        Some(e) => e
            .value
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| err(e.line, format!("cannot parse '{}' for N", s.trim()))))
            .collect::<Result<_>>()?,
    };
    let grid = ScanSpec { n_sites, alpha: list_f("alpha")?, v: list_f("v")?, tau_q: list_f("tau_q")? };

    let multi = matches!(mode, Mode::Scan | Mode::Predict);
    for key in LIST_KEYS {
        if let Some(e) = entries.get(key) {
            let count = e.value.split(',').count();
            if !multi && count > 1 {
                return Err(err(e.line, format!("{key} takes a single value in {} mode", mode.name())));
            }
        }
    }


    let method = match entries.get("method") {
        Some(e) => e.value.parse::<Method>().map_err(|x| err(e.line, x.to_string()))?,
        None => Method::Splitting,
    };
    let default_dt = if method == Method::Rk4 { DEFAULT_RK4_DT } else { DEFAULT_DT };
    let integrator = IntegratorConfig {
        dt: scalar("dt")?.unwrap_or(default_dt),
        method,
        checkpoint_stride: integer("checkpoint_stride")?,
        drift_tolerance: scalar("drift_tolerance")?.unwrap_or(DEFAULT_DRIFT_TOLERANCE),
    };
    let lz = LZConfig {
        lambda: scalar("lambda")?.unwrap_or(LZConfig::default().lambda),
        k_grid: integer("k_grid")?.unwrap_or(LZConfig::default().k_grid),
    };

    let config = RunConfig {
        mode,
        profile,
        grid,
        n_c: scalar("n_c")?,
        g: scalar("g")?,
        g_start: scalar("g_start")?.unwrap_or(2.0),
        g_end: scalar("g_end")?.unwrap_or(0.0),
        margin: scalar("margin")?.unwrap_or(DEFAULT_MARGIN),
        integrator,
        lz,
        n_ref: integer("n_ref")?,
        r_cal: integer("r_cal")?.unwrap_or(DEFAULT_R_CAL),
        snapshot_front: scalar("snapshot_front")?,
        out: entries.get("out").map(|e| PathBuf::from(&e.value)),
        jobs: integer("jobs")?.unwrap_or(1),
    };
    validate(&config, entries)?;
    Ok(config)
}

fn validate(c: &RunConfig, entries: &HashMap<&'static str, Entry>) -> Result<()> {
    let line = |key: &str| entries.get(key).map_or(0, |e| e.line);
    let check = |ok: bool, key: &str, msg: String| if ok { Ok(()) } else { Err(err(line(key), msg)) };

    let axes = c.grid_axes();
    for key in axes {
        if !entries.contains_key(key) {
            return Err(err(0, format!("missing required key '{key}' for {} mode", c.mode.name())));
        }
    }
    for key in LIST_KEYS {
        if entries.contains_key(key) {
            check(axes.contains(key), key, format!("{key} does not apply to this run"))?;
        }
    }

    for &n in &c.grid.n_sites {
        check(n >= 2, "N", format!("N = {n} must be at least 2"))?;
    }
    for &a in &c.grid.alpha {
        check(a > 0.0, "alpha", format!("alpha = {a} must be positive"))?;
    }
    for &v in &c.grid.v {
        check(v >= 0.0, "v", format!("v = {v} must be non-negative"))?;
        if c.mode != Mode::Predict && c.profile == ProfileKind::MovingFront {
            check(v > 0.0, "v", "a quench needs a moving front (v > 0)".into())?;
        }
    }
    for &t in &c.grid.tau_q {
        check(t > 0.0, "tau_q", format!("tau_q = {t} must be positive"))?;
    }
    check(c.jobs >= 1, "jobs", "jobs must be at least 1".into())?;
    check(c.margin >= MIN_MARGIN, "margin", format!("margin = {} must be at least {MIN_MARGIN}", c.margin))?;
    check(c.r_cal >= 1, "r_cal", "r_cal must be at least 1".into())?;
    c.lz.validate().map_err(|e| err(line("lambda").max(line("k_grid")), e.to_string()))?;

    let max_field = match c.profile {
        ProfileKind::Uniform => c.g.unwrap_or(0.0).abs(),
        ProfileKind::Ramp => c.g_start.abs().max(c.g_end.abs()),
        _ => 2.0,
    };
    c.integrator
        .validate(max_field)
        .map_err(|e| err(line("dt").max(line("checkpoint_stride")).max(line("drift_tolerance")), e.to_string()))?;
    if c.profile == ProfileKind::Ramp {
        check(
            c.g_start > c.g_end && c.g_end >= 0.0,
            "g_start",
            format!("ramp needs g_start > g_end >= 0, got {} -> {}", c.g_start, c.g_end),
        )?;
    }
    if c.snapshot_front.is_some() {
        check(
            c.mode == Mode::Quench && c.profile == ProfileKind::MovingFront,
            "snapshot_front",
            "snapshot_front needs a moving-front quench".into(),
        )?;
    }
    if c.integrator.checkpoint_stride.is_some() {
        check(c.mode == Mode::Quench, "checkpoint_stride", "checkpoints are recorded in quench mode only".into())?;
    }
    if c.mode == Mode::Static {
        check(
            matches!(c.profile, ProfileKind::StaticFront | ProfileKind::Uniform),
            "profile",
            "static mode needs a static_front or uniform profile".into(),
        )?;
    }
    if matches!(c.mode, Mode::Quench | Mode::Scan) {
        check(
            matches!(c.profile, ProfileKind::MovingFront | ProfileKind::Ramp),
            "profile",
            format!("{} mode needs a moving_front or ramp profile", c.mode.name()),
        )?;
    }
    for (key, ok) in [
        ("n_c", c.profile == ProfileKind::StaticFront),
        ("g", c.profile == ProfileKind::Uniform),
        ("g_start", c.profile == ProfileKind::Ramp),
        ("g_end", c.profile == ProfileKind::Ramp),
    ] {
        if entries.contains_key(key) {
            check(ok, key, format!("{key} does not apply to this profile"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_predict_config() {
        let c = parse_config("mode=predict\nalpha=0.015625\nv=4").unwrap();
        assert_eq!(c.mode, Mode::Predict);
        assert_eq!(c.grid.alpha, vec![0.015625]);
        assert_eq!(c.grid.v, vec![4.0]);
        assert_eq!(c.margin, 10.0);
        assert_eq!(c.lz.lambda, 1.0);
        assert_eq!(c.jobs, 1);
        assert_eq!(c.integrator.dt, DEFAULT_DT);
        assert_eq!(c.integrator.method, Method::Splitting);
    }

    #[test]
    fn rk4_gets_its_own_default_step() {
        let c = parse_config("mode=quench\nN=10\nalpha=0.1\nv=3\nmethod=rk4").unwrap();
        assert_eq!(c.integrator.dt, DEFAULT_RK4_DT);
    }

    #[test]
    fn missing_key_is_named() {
        let e = parse_config("mode=quench").unwrap_err().to_string();
        assert!(e.contains("'N'") || e.contains("'alpha'"), "{e}");
        let e = parse_config("mode=quench\nN=100\nv=3").unwrap_err().to_string();
        assert!(e.contains("'alpha'"), "{e}");
        assert!(parse_config("N=4").unwrap_err().to_string().contains("'mode'"));
    }

    #[test]
    fn exponent_literals_rejected() {
        let e = parse_config("mode=predict\nalpha=2^-6\nv=4").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        assert!(parse_config("mode=predict\nalpha=inf\nv=4").is_err());
        assert!(parse_config("mode=predict\nalpha=1.5e-2\nv=4").is_ok());
    }

    #[test]
    fn unknown_and_misplaced_keys_rejected() {
        let e = parse_config("mode=predict\nalpha=0.1\nv=4\nspeed=3").unwrap_err();
        assert!(matches!(e, Error::Config { line: 4, .. }));
        let e = parse_config("[model]\nmode=predict").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        assert!(parse_config("[plots]\nmode=predict").is_err());
        assert!(parse_config("mode=predict\nmode=scan").is_err());
        assert!(parse_config("mode predict").is_err());
    }

    #[test]
    fn sections_and_comments() {
        let text = "# header\n[run]\nmode = scan   # sweep\njobs = 2\n[model]\nN = 40, 80\nalpha = 0.03125\nv = 3,4,6\n\n[output]\nout = a.csv\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.grid.n_sites, vec![40, 80]);
        assert_eq!(c.grid.v, vec![3.0, 4.0, 6.0]);
        assert_eq!(c.jobs, 2);
        assert_eq!(c.out, Some(PathBuf::from("a.csv")));
        let pts = c.grid.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], GridPoint { n_sites: Some(40), alpha: Some(0.03125), v: Some(4.0), tau_q: None });
        assert_eq!(pts[3].n_sites, Some(80));
    }

    #[test]
    fn lists_only_where_allowed() {
        assert!(parse_config("mode=quench\nN=10\nalpha=0.1\nv=3,4").is_err());
        assert!(parse_config("mode=scan\nN=10\nalpha=0.1\nv=3,4\ntau_q=5").is_err());
        assert!(parse_config("mode=scan\nprofile=ramp\nN=10\ntau_q=4,8").is_ok());
        assert!(parse_config("mode=scan\nN=10\nalpha=0.1\nv=").is_err());
    }

    #[test]
    fn validation() {
        assert!(parse_config("mode=quench\nN=10\nalpha=0.1\nv=0").is_err());
        assert!(parse_config("mode=quench\nN=1\nalpha=0.1\nv=3").is_err());
        assert!(parse_config("mode=quench\nN=10\nalpha=0.1\nv=3\nmargin=2").is_err());
        assert!(parse_config("mode=quench\nN=10\nalpha=0.1\nv=3\ndt=0.1").is_err());
        assert!(parse_config("mode=quench\nN=10\nalpha=0.1\nv=3\njobs=0").is_err());
        assert!(parse_config("mode=static\nN=10\nalpha=0.1\nn_c=5").is_ok());
        assert!(parse_config("mode=static\nN=10\nalpha=0.1\ng=5").is_err());
        assert!(parse_config("mode=quench\nprofile=static_front\nN=10\nalpha=0.1").is_err());
        assert!(parse_config("mode=predict\nalpha=0.1\nv=1,3").is_ok());
    }

    #[test]
    fn mode_override() {
        let c = parse_config_with_mode("N=10\nalpha=0.1\nv=3", Some(Mode::Quench)).unwrap();
        assert_eq!(c.mode, Mode::Quench);
        assert!(parse_config_with_mode("mode=scan\nN=10\nalpha=0.1\nv=3", Some(Mode::Quench)).is_err());
    }
}
