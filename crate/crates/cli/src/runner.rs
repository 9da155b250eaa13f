//! Model construction and data builders shared by the subcommands.

use crate::config::{AutoOr, RunConfig, SignalSpec, StateSpec};
use crate::csvout::{fmt_f64, CsvWriter, Field};
use crate::CliError;
use isslab_core::grid::{GridFunction, ProductState, State};
use isslab_core::linsys::step_count;
use isslab_core::models::{self, Scheme, SystemModel};
use isslab_core::rng::Rng;
use isslab_core::sample;
use isslab_core::scalar::Scalar;
use isslab_core::signal::InputSignal;
use num_complex::Complex64;
use std::path::Path;

pub enum AnyModel {
    Real(SystemModel<f64>),
    Complex(SystemModel<Complex64>),
}

macro_rules! with_model {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            $crate::runner::AnyModel::Real($m) => $body,
            $crate::runner::AnyModel::Complex($m) => $body,
        }
    };
}
pub(crate) use with_model;

pub fn build_model(cfg: &RunConfig) -> Result<AnyModel, CliError> {
    let n = cfg.n;
    let mut any = match cfg.model_name.as_str() {
        "burgers_h1" => AnyModel::Real(models::burgers_h1(n).map_err(core_err)?),
        "burgers_l2" => AnyModel::Real(models::burgers_l2(n).map_err(core_err)?),
        "schrodinger" => AnyModel::Complex(models::schrodinger(n).map_err(core_err)?),
        "wave" => AnyModel::Real(models::wave(n).map_err(core_err)?),
        other => return Err(CliError::Config(format!("unknown model {other:?}"))),
    };
    with_model!(&mut any, m => {
        if !cfg.feedback {
            *m = m.linearized();
        }
        if let Some(p) = cfg.certify_p {
            m.constants.p = p;
        }
    });
    Ok(any)
}

pub fn core_err(e: isslab_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn scheme_of(cfg: &RunConfig) -> Scheme {
    match cfg.scheme.as_str() {
        "crank_nicolson" => Scheme::CrankNicolson,
        _ => Scheme::ImplicitEuler,
    }
}

pub fn resolve_omega<S: Scalar>(model: &SystemModel<S>, cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.omega {
        AutoOr::Auto => Ok(model.constants.omega_max / 2.0),
        AutoOr::Value(v) => Ok(v),
        AutoOr::Inf => Err(CliError::Config("omega = inf is not meaningful".into())),
    }
}

pub fn build_initial_state<S: Scalar>(
    model: &SystemModel<S>,
    cfg: &RunConfig,
    rng: &mut Rng,
) -> Result<State<S>, CliError> {
    let n = model.n();
    let state = match &cfg.z0 {
        StateSpec::Zero => model.zero_state(),
        StateSpec::Eigenmode(k) => {
            if *k < 1 || *k > n {
                return Err(CliError::Config(format!("eigenmode {k} outside 1..{n}")));
            }
            model.eigenmode_state(*k)
        }
        StateSpec::RandomSmooth => {
            if model.is_product() {
                State::Pair(ProductState {
                    phi: sample::random_grid(n, rng, true),
                    psi: sample::random_grid(n, rng, true),
                })
            } else {
                State::Single(sample::random_grid(n, rng, true))
            }
        }
        StateSpec::File(path) => read_state_file(model, Path::new(path))?,
    };
    Ok(state.scaled_re(cfg.z0_amp))
}

pub fn build_input_signal<S: Scalar>(
    model: &SystemModel<S>,
    cfg: &RunConfig,
    rng: &mut Rng,
) -> Result<Option<InputSignal<S>>, CliError> {
    let n = model.n();
    let count = step_count(cfg.t_final, cfg.dt) + 1;
    let constant_profile = |profile: GridFunction<S>| -> Result<InputSignal<S>, CliError> {
        InputSignal::new(vec![profile; count], cfg.dt).map_err(core_err)
    };
    let signal = match &cfg.u1 {
        SignalSpec::Zero => return Ok(None),
        SignalSpec::Eigenmode(k) => {
            if *k < 1 || *k > n {
                return Err(CliError::Config(format!("eigenmode {k} outside 1..{n}")));
            }
            constant_profile(GridFunction::sine_mode(n, *k).scaled_re(cfg.u1_amp))?
        }
        SignalSpec::RandomSmooth => {
            constant_profile(sample::random_grid(n, rng, true).scaled_re(cfg.u1_amp))?
        }
        SignalSpec::Burst { t0, t1, amp } => {
            let profile = sample::random_grid::<S>(n, rng, true).scaled_re(amp * cfg.u1_amp);
            let samples = (0..count)
                .map(|j| {
                    let t = j as f64 * cfg.dt;
                    if (*t0..=*t1).contains(&t) {
                        profile.clone()
                    } else {
                        GridFunction::zeros(n)
                    }
                })
                .collect();
            InputSignal::new(samples, cfg.dt).map_err(core_err)?
        }
        SignalSpec::File(path) => {
            let profile = match read_state_file(model, Path::new(path))? {
                State::Single(g) => g,
                State::Pair(p) => p.psi, // wave forcing acts on the velocity
            };
            constant_profile(profile.scaled_re(cfg.u1_amp))?
        }
    };
    Ok(Some(signal))
}

/// Snapshot column layout per model: `x,value` (real), `x,value,value_imag`
/// (complex), `x,value,value_psi` (wave).
pub fn write_state_file<S: Scalar>(
    model: &SystemModel<S>,
    state: &State<S>,
    path: &Path,
) -> Result<(), CliError> {
    let h = model.h();
    match state {
        State::Single(g) => {
            if S::IS_COMPLEX {
                let mut w = CsvWriter::create(path, &["x", "value", "value_imag"])?;
                for (i, v) in g.values().iter().enumerate() {
                    w.row(&[
                        Field::F((i + 1) as f64 * h),
                        Field::F(v.re()),
                        Field::F(v.im()),
                    ])?;
                }
                w.finish()
            } else {
                let mut w = CsvWriter::create(path, &["x", "value"])?;
                for (i, v) in g.values().iter().enumerate() {
                    w.row(&[Field::F((i + 1) as f64 * h), Field::F(v.re())])?;
                }
                w.finish()
            }
        }
        State::Pair(p) => {
            let mut w = CsvWriter::create(path, &["x", "value", "value_psi"])?;
            for i in 0..p.len() {
                w.row(&[
                    Field::F((i + 1) as f64 * h),
                    Field::F(p.phi.values()[i].re()),
                    Field::F(p.psi.values()[i].re()),
                ])?;
            }
            w.finish()
        }
    }
}

pub fn read_state_file<S: Scalar>(
    model: &SystemModel<S>,
    path: &Path,
) -> Result<State<S>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue; // header
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(CliError::Config(format!(
                "{}: line {} has {} columns",
                path.display(),
                i + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{}: bad number {s:?}", path.display())))
        };
        first.push(parse(cols[1])?);
        second.push(if cols.len() > 2 { parse(cols[2])? } else { 0.0 });
    }
    if first.len() != model.n() {
        return Err(CliError::Config(format!(
            "{}: {} rows for a model with n = {}",
            path.display(),
            first.len(),
            model.n()
        )));
    }
    let state = if model.is_product() {
        State::Pair(ProductState {
            phi: GridFunction::new(first.into_iter().map(S::from_re).collect())
                .map_err(core_err)?,
            psi: GridFunction::new(second.into_iter().map(S::from_re).collect())
                .map_err(core_err)?,
        })
    } else {
        State::Single(
            GridFunction::new(
                first
                    .into_iter()
                    .zip(second)
                    .map(|(re, im)| S::from_parts(re, im))
                    .collect(),
            )
            .map_err(core_err)?,
        )
    };
    Ok(state)
}

pub fn write_trajectory_csv<S: Scalar>(
    traj: &isslab_core::linsys::Trajectory<S>,
    path: &Path,
) -> Result<(), CliError> {
    let mut w = CsvWriter::create(path, &["t", "x_norm", "y_norm", "energy", "blowup_flag"])?;
    for j in 0..traj.len() {
        let blow = traj.blowup_step == Some(j);
        w.row(&[
            Field::F(traj.times[j]),
            Field::F(traj.x_norms[j]),
            Field::F(traj.y_norms[j]),
            Field::F(traj.energy(j)),
            Field::B(blow),
        ])?;
    }
    w.finish()
}

/// Evenly spaced snapshot indices including both endpoints.
pub fn snapshot_indices(len: usize, snapshots: usize) -> Vec<usize> {
    if len == 0 || snapshots == 0 {
        return Vec::new();
    }
    if snapshots == 1 || len == 1 {
        return vec![len - 1];
    }
    let mut idx: Vec<usize> = (0..snapshots)
        .map(|i| (i as f64 * (len - 1) as f64 / (snapshots - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

pub fn write_config_echo(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    std::fs::write(out.join("config_resolved.ini"), crate::config::serialize(cfg))
        .map_err(|e| CliError::Config(format!("write config echo: {e}")))
}

pub fn summary_writer(path: &Path) -> Result<CsvWriter, CliError> {
    CsvWriter::create(path, &["key", "value"])
}

pub fn summary_f(w: &mut CsvWriter, key: &str, value: f64) -> Result<(), CliError> {
    w.row(&[Field::S(key.into()), Field::S(fmt_f64(value))])
}

pub fn summary_s(w: &mut CsvWriter, key: &str, value: impl Into<String>) -> Result<(), CliError> {
    w.row(&[Field::S(key.into()), Field::S(value.into())])
}
