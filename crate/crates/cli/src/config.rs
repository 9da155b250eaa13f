//! Flat INI-style run configuration.
//!
//! Sections [run], [model], [picard], [certify], [sweep]; keys lowercase
//! snake_case; "#" starts a comment. Unknown sections or keys are errors
//! (fail-closed), and a parsed configuration serializes back to a canonical
//! form that parses to the same value.

use crate::CliError;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Zero,
    Eigenmode(usize),
    RandomSmooth,
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Zero,
    Eigenmode(usize),
    RandomSmooth,
    Burst { t0: f64, t1: f64, amp: f64 },
    File(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr {
    Auto,
    Value(f64),
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [run]
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub omega: AutoOr,
    pub epsilon: AutoOr,
    pub scheme: String,
    pub z0: StateSpec,
    pub z0_amp: f64,
    pub u1: SignalSpec,
    pub u1_amp: f64,
    pub snapshots: usize,
    // [model]
    pub model_name: String,
    pub n: usize,
    pub feedback: bool,
    // [picard]
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    // [certify]
    pub certify_ensemble: usize,
    pub certify_samples: usize,
    pub certify_p: Option<f64>,
    // [sweep]
    pub sweep_command: Option<String>,
    /// (section.key, values) in file order.
    pub sweep_axes: Vec<(String, Vec<String>)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dt: 1e-3,
            t_final: 5.0,
            seed: 0,
            omega: AutoOr::Auto,
            epsilon: AutoOr::Auto,
            scheme: "implicit_euler".into(),
            z0: StateSpec::Zero,
            z0_amp: 1.0,
            u1: SignalSpec::Zero,
            u1_amp: 1.0,
            snapshots: 5,
            model_name: String::new(),
            n: 128,
            feedback: true,
            picard_tol: 1e-9,
            picard_max_iter: 30,
            certify_ensemble: 100,
            certify_samples: 10_000,
            certify_p: None,
            sweep_command: None,
            sweep_axes: Vec::new(),
        }
    }
}

const MODELS: [&str; 4] = ["burgers_h1", "burgers_l2", "schrodinger", "wave"];
const RUN_KEYS: [&str; 11] = [
    "dt", "t_final", "seed", "omega", "epsilon", "scheme", "z0", "z0_amp", "u1", "u1_amp",
    "snapshots",
];
const MODEL_KEYS: [&str; 3] = ["name", "n", "feedback"];
const PICARD_KEYS: [&str; 2] = ["tol", "max_iter"];
const CERTIFY_KEYS: [&str; 3] = ["ensemble", "samples", "p"];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut model_seen = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if !["run", "model", "picard", "certify", "sweep"].contains(&section.as_str()) {
                return Err(config_err(format!("line {}: unknown section [{section}]", lineno + 1)));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(format!("line {}: expected key = value", lineno + 1)));
        };
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(config_err(format!("line {}: key outside any section", lineno + 1)));
        }
        apply_key(&mut cfg, &section, key, value, lineno + 1)?;
        if section == "model" && key == "name" {
            model_seen = true;
        }
    }

    if !model_seen {
        return Err(config_err("missing [model] name"));
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn apply_key(
    cfg: &mut RunConfig,
    section: &str,
    key: &str,
    value: &str,
    lineno: usize,
) -> Result<(), CliError> {
    let err = |msg: String| config_err(format!("line {lineno}: {msg}"));
    match (section, key) {
        ("run", "dt") => cfg.dt = parse_f64(value).map_err(err)?,
        ("run", "t_final") => cfg.t_final = parse_f64(value).map_err(err)?,
        ("run", "seed") => {
            cfg.seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?
        }
        ("run", "omega") => cfg.omega = parse_auto(value).map_err(err)?,
        ("run", "epsilon") => cfg.epsilon = parse_auto(value).map_err(err)?,
        ("run", "scheme") => {
            if !["implicit_euler", "crank_nicolson"].contains(&value) {
                return Err(err(format!("unknown scheme {value:?}")));
            }
            cfg.scheme = value.to_string();
        }
        ("run", "z0") => cfg.z0 = parse_state_spec(value).map_err(err)?,
        ("run", "z0_amp") => cfg.z0_amp = parse_f64(value).map_err(err)?,
        ("run", "u1") => cfg.u1 = parse_signal_spec(value).map_err(err)?,
        ("run", "u1_amp") => cfg.u1_amp = parse_f64(value).map_err(err)?,
        ("run", "snapshots") => {
            cfg.snapshots = value.parse().map_err(|_| err(format!("bad snapshots {value:?}")))?
        }
        ("model", "name") => {
            if !MODELS.contains(&value) {
                return Err(err(format!("unknown model {value:?}")));
            }
            cfg.model_name = value.to_string();
        }
        ("model", "n") => cfg.n = value.parse().map_err(|_| err(format!("bad n {value:?}")))?,
        ("model", "feedback") => match value {
            "on" => cfg.feedback = true,
            "off" => cfg.feedback = false,
            _ => return Err(err(format!("feedback must be on or off, got {value:?}"))),
        },
        ("picard", "tol") => cfg.picard_tol = parse_f64(value).map_err(err)?,
        ("picard", "max_iter") => {
            cfg.picard_max_iter =
                value.parse().map_err(|_| err(format!("bad max_iter {value:?}")))?
        }
        ("certify", "ensemble") => {
            cfg.certify_ensemble =
                value.parse().map_err(|_| err(format!("bad ensemble {value:?}")))?
        }
        ("certify", "samples") => {
            cfg.certify_samples =
                value.parse().map_err(|_| err(format!("bad samples {value:?}")))?
        }
        ("certify", "p") => cfg.certify_p = Some(parse_f64(value).map_err(err)?),
        ("sweep", "command") => {
            if !["simulate", "picard", "certify"].contains(&value) {
                return Err(err(format!("sweep command must name a subcommand, got {value:?}")));
            }
            cfg.sweep_command = Some(value.to_string());
        }
        ("sweep", axis) => {
            let (sec, k) = axis
                .split_once('.')
                .ok_or_else(|| err(format!("sweep key {axis:?} must be section.key")))?;
            let known = match sec {
                "run" => RUN_KEYS.contains(&k),
                "model" => MODEL_KEYS.contains(&k),
                "picard" => PICARD_KEYS.contains(&k),
                "certify" => CERTIFY_KEYS.contains(&k),
                _ => false,
            };
            if !known {
                return Err(err(format!("sweep axis {axis:?} does not name a known key")));
            }
            let values: Vec<String> =
                value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(err(format!("sweep axis {axis:?} has no values")));
            }
            cfg.sweep_axes.push((axis.to_string(), values));
        }
        _ => {
            return Err(err(format!("unknown key {key:?} in section [{section}]")));
        }
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if !(cfg.dt > 0.0) {
        return Err(config_err(format!("dt = {} must be positive", cfg.dt)));
    }
    if !(cfg.t_final > 0.0) {
        return Err(config_err(format!("t_final = {} must be positive", cfg.t_final)));
    }
    if cfg.n < 1 {
        return Err(config_err("n must be at least 1"));
    }
    if let Some(p) = cfg.certify_p {
        if !(p > 0.0 && p < 1.0) {
            return Err(config_err(format!("p = {p} must lie in (0,1)")));
        }
    }
    Ok(())
}

fn parse_f64(value: &str) -> Result<f64, String> {
    value.parse::<f64>().map_err(|_| format!("bad number {value:?}"))
}

fn parse_auto(value: &str) -> Result<AutoOr, String> {
    match value {
        "auto" => Ok(AutoOr::Auto),
        "inf" => Ok(AutoOr::Inf),
        _ => Ok(AutoOr::Value(parse_f64(value)?)),
    }
}

fn parse_state_spec(value: &str) -> Result<StateSpec, String> {
    if value == "zero" {
        return Ok(StateSpec::Zero);
    }
    if value == "random-smooth" {
        return Ok(StateSpec::RandomSmooth);
    }
    if let Some(k) = value.strip_prefix("eigenmode:") {
        return Ok(StateSpec::Eigenmode(
            k.trim().parse().map_err(|_| format!("bad eigenmode index {k:?}"))?,
        ));
    }
    if let Some(path) = value.strip_prefix("file:") {
        return Ok(StateSpec::File(path.trim().to_string()));
    }
    Err(format!("unknown state spec {value:?}"))
}

fn parse_signal_spec(value: &str) -> Result<SignalSpec, String> {
    if value == "zero" {
        return Ok(SignalSpec::Zero);
    }
    if value == "random-smooth" {
        return Ok(SignalSpec::RandomSmooth);
    }
    if let Some(k) = value.strip_prefix("eigenmode:") {
        return Ok(SignalSpec::Eigenmode(
            k.trim().parse().map_err(|_| format!("bad eigenmode index {k:?}"))?,
        ));
    }
    if let Some(args) = value.strip_prefix("burst:") {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("burst needs t0,t1,amp, got {args:?}"));
        }
        return Ok(SignalSpec::Burst {
            t0: parse_f64(parts[0])?,
            t1: parse_f64(parts[1])?,
            amp: parse_f64(parts[2])?,
        });
    }
    if let Some(path) = value.strip_prefix("file:") {
        return Ok(SignalSpec::File(path.trim().to_string()));
    }
    Err(format!("unknown signal spec {value:?}"))
}

fn fmt_auto(v: AutoOr) -> String {
    match v {
        AutoOr::Auto => "auto".into(),
        AutoOr::Inf => "inf".into(),
        AutoOr::Value(x) => crate::csvout::fmt_f64(x),
    }
}

fn fmt_state_spec(s: &StateSpec) -> String {
    match s {
        StateSpec::Zero => "zero".into(),
        StateSpec::Eigenmode(k) => format!("eigenmode:{k}"),
        StateSpec::RandomSmooth => "random-smooth".into(),
        StateSpec::File(p) => format!("file:{p}"),
    }
}

fn fmt_signal_spec(s: &SignalSpec) -> String {
    match s {
        SignalSpec::Zero => "zero".into(),
        SignalSpec::Eigenmode(k) => format!("eigenmode:{k}"),
        SignalSpec::RandomSmooth => "random-smooth".into(),
        SignalSpec::Burst { t0, t1, amp } => format!(
            "burst:{},{},{}",
            crate::csvout::fmt_f64(*t0),
            crate::csvout::fmt_f64(*t1),
            crate::csvout::fmt_f64(*amp)
        ),
        SignalSpec::File(p) => format!("file:{p}"),
    }
}

/// Canonical serialization; `parse(serialize(cfg))` reproduces `cfg`.
pub fn serialize(cfg: &RunConfig) -> String {
    let f = crate::csvout::fmt_f64;
    let mut out = String::new();
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "dt = {}", f(cfg.dt));
    let _ = writeln!(out, "t_final = {}", f(cfg.t_final));
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "omega = {}", fmt_auto(cfg.omega));
    let _ = writeln!(out, "epsilon = {}", fmt_auto(cfg.epsilon));
    let _ = writeln!(out, "scheme = {}", cfg.scheme);
    let _ = writeln!(out, "z0 = {}", fmt_state_spec(&cfg.z0));
    let _ = writeln!(out, "z0_amp = {}", f(cfg.z0_amp));
    let _ = writeln!(out, "u1 = {}", fmt_signal_spec(&cfg.u1));
    let _ = writeln!(out, "u1_amp = {}", f(cfg.u1_amp));
    let _ = writeln!(out, "snapshots = {}", cfg.snapshots);
    let _ = writeln!(out, "[model]");
    let _ = writeln!(out, "name = {}", cfg.model_name);
    let _ = writeln!(out, "n = {}", cfg.n);
    let _ = writeln!(out, "feedback = {}", if cfg.feedback { "on" } else { "off" });
    let _ = writeln!(out, "[picard]");
    let _ = writeln!(out, "tol = {}", f(cfg.picard_tol));
    let _ = writeln!(out, "max_iter = {}", cfg.picard_max_iter);
    let _ = writeln!(out, "[certify]");
    let _ = writeln!(out, "ensemble = {}", cfg.certify_ensemble);
    let _ = writeln!(out, "samples = {}", cfg.certify_samples);
    if let Some(p) = cfg.certify_p {
        let _ = writeln!(out, "p = {}", f(p));
    }
    if cfg.sweep_command.is_some() || !cfg.sweep_axes.is_empty() {
        let _ = writeln!(out, "[sweep]");
        if let Some(cmd) = &cfg.sweep_command {
            let _ = writeln!(out, "command = {cmd}");
        }
        for (axis, values) in &cfg.sweep_axes {
            let _ = writeln!(out, "{axis} = {}", values.join(","));
        }
    }
    out
}

/// Apply one sweep-axis assignment to a base config.
pub fn apply_override(cfg: &mut RunConfig, axis: &str, value: &str) -> Result<(), CliError> {
    let (section, key) = axis
        .split_once('.')
        .ok_or_else(|| config_err(format!("sweep axis {axis:?} must be section.key")))?;
    apply_key(cfg, section, key, value, 0)?;
    validate(cfg)
}

/// Deterministic cartesian product of the sweep axes, in file order.
pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<BTreeMap<String, String>>, CliError> {
    if cfg.sweep_axes.is_empty() {
        return Err(config_err("sweep requires at least one axis in [sweep]"));
    }
    let mut points: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for (axis, values) in &cfg.sweep_axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for point in &points {
            for value in values {
                let mut p = point.clone();
                p.insert(axis.clone(), value.clone());
                next.push(p);
            }
        }
        points = next;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nname = burgers_l2\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.model_name, "burgers_l2");
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.omega, AutoOr::Auto);
    }

    #[test]
    fn unknown_key_is_fatal() {
        let text = "[model]\nname = wave\ncolour = blue\n";
        assert!(parse(text).is_err());
        let text = "[run]\nwrong_key = 1\n[model]\nname = wave\n";
        assert!(parse(text).is_err());
        let text = "[nonsense]\nx = 1\n[model]\nname = wave\n";
        assert!(parse(text).is_err());
    }

    #[test]
    fn comments_and_specs() {
        let text = "\
[run]
dt = 1e-2      # coarse
z0 = eigenmode:2
u1 = burst:0.5,1.5,0.1
epsilon = inf
[model]
name = schrodinger
n = 64
";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.dt, 1e-2);
        assert_eq!(cfg.z0, StateSpec::Eigenmode(2));
        assert_eq!(cfg.u1, SignalSpec::Burst { t0: 0.5, t1: 1.5, amp: 0.1 });
        assert_eq!(cfg.epsilon, AutoOr::Inf);
    }

    #[test]
    fn roundtrip_parse_serialize_parse() {
        let text = "\
[run]
dt = 2.5e-3
t_final = 1.25
seed = 9001
omega = 0.75
epsilon = auto
scheme = crank_nicolson
z0 = random-smooth
z0_amp = 0.125
u1 = eigenmode:3
u1_amp = 2.0
snapshots = 7
[model]
name = wave
n = 96
feedback = off
[picard]
tol = 1e-8
max_iter = 40
[certify]
ensemble = 32
samples = 500
p = 0.75
[sweep]
command = simulate
model.n = 32,64
run.dt = 1e-2,5e-3
";
        let cfg = parse(text).unwrap();
        let cfg2 = parse(&serialize(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn sweep_points_cartesian_order() {
        let text = "\
[model]
name = burgers_h1
[sweep]
command = simulate
model.n = 8,16
run.dt = 0.1,0.2
";
        let cfg = parse(text).unwrap();
        let points = sweep_points(&cfg).unwrap();
        assert_eq!(points.len(), 4);
        assert_eq!(points[0]["model.n"], "8");
        assert_eq!(points[0]["run.dt"], "0.1");
        assert_eq!(points[1]["run.dt"], "0.2");
        assert_eq!(points[3]["model.n"], "16");
    }

    #[test]
    fn sweep_axis_must_reference_known_key() {
        let text = "[model]\nname = wave\n[sweep]\nmodel.colour = a,b\n";
        assert!(parse(text).is_err());
    }
}
