//! The four subcommands. Each is a pure function of (config, seed): rerunning
//! with the same inputs produces byte-identical output files.

use crate::config::{self, AutoOr, RunConfig};
use crate::csvout::{CsvWriter, Field};
use crate::runner::{self, with_model};
use crate::CliError;
use isslab_core::certify::{self, CertifyOptions};
use isslab_core::models::{self, SystemModel};
use isslab_core::picard::{self, PicardConfig, PicardStatus};
use isslab_core::rng::Rng;
use isslab_core::scalar::Scalar;
use std::fs;
use std::path::Path;

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    prepare_out(out)?;
    let any = runner::build_model(cfg)?;
    with_model!(&any, m => simulate_impl(m, cfg, out))
}

fn simulate_impl<S: Scalar>(
    model: &SystemModel<S>,
    cfg: &RunConfig,
    out: &Path,
) -> Result<i32, CliError> {
    let mut rng = Rng::new(cfg.seed);
    let z0 = runner::build_initial_state(model, cfg, &mut rng)?;
    let u1 = runner::build_input_signal(model, cfg, &mut rng)?;

    let traj = models::simulate_semilinear(model, &z0, u1.as_ref(), cfg.t_final, cfg.dt)
        .map_err(runner::core_err)?;

    runner::write_trajectory_csv(&traj, &out.join("trajectory.csv"))?;
    for j in runner::snapshot_indices(traj.len(), cfg.snapshots) {
        runner::write_state_file(model, &traj.states[j], &out.join(format!("state_{j}.csv")))?;
    }
    runner::write_config_echo(cfg, out)?;
    // completed runs exit 0, including detected blow-up: locality of the
    // stability estimates is data
    Ok(0)
}

pub fn cmd_picard(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    prepare_out(out)?;
    let any = runner::build_model(cfg)?;
    with_model!(&any, m => picard_impl(m, cfg, out))
}

fn picard_impl<S: Scalar>(
    model: &SystemModel<S>,
    cfg: &RunConfig,
    out: &Path,
) -> Result<i32, CliError> {
    let mut rng = Rng::new(cfg.seed);
    let omega = runner::resolve_omega(model, cfg)?;

    let (epsilon, epsilon_source, formula_epsilon) = match cfg.epsilon {
        AutoOr::Value(v) => (v, "config", None),
        AutoOr::Inf => {
            return Err(CliError::Config("picard needs a finite epsilon".into()));
        }
        AutoOr::Auto => {
            let search = picard::find_epsilon(model, omega, cfg.t_final, cfg.dt, &mut rng)
                .map_err(runner::core_err)?;
            (search.epsilon, "auto", Some(search.formula_epsilon))
        }
    };

    let z0 = runner::build_initial_state(model, cfg, &mut rng)?;
    let u1 = runner::build_input_signal(model, cfg, &mut rng)?;
    let picard_cfg = PicardConfig {
        omega,
        epsilon,
        tol: cfg.picard_tol,
        max_iter: cfg.picard_max_iter,
    };
    let result = picard::picard_solve(model, &z0, u1.as_ref(), &picard_cfg, cfg.t_final, cfg.dt)
        .map_err(runner::core_err)?;

    let mut w = CsvWriter::create(
        &out.join("picard.csv"),
        &["iteration", "increment_weighted_norm", "contraction_ratio", "in_ball"],
    )?;
    for (k, &inc) in result.increments.iter().enumerate() {
        let ratio = if k == 0 { 0.0 } else { result.contraction_ratios[k - 1] };
        w.row(&[
            Field::U((k + 1) as u64),
            Field::F(inc),
            Field::F(ratio),
            Field::B(result.in_ball[k]),
        ])?;
    }
    w.finish()?;

    runner::write_trajectory_csv(&result.trajectory, &out.join("trajectory.csv"))?;

    let mut s = runner::summary_writer(&out.join("summary.csv"))?;
    runner::summary_s(&mut s, "status", format!("{:?}", result.status))?;
    runner::summary_s(&mut s, "iterations", result.iterations.to_string())?;
    runner::summary_f(&mut s, "omega", omega)?;
    runner::summary_f(&mut s, "epsilon", epsilon)?;
    runner::summary_s(&mut s, "epsilon_source", epsilon_source)?;
    if let Some(fe) = formula_epsilon {
        runner::summary_f(&mut s, "formula_epsilon", fe)?;
    }
    runner::summary_f(&mut s, "residual", result.residual)?;
    runner::summary_f(&mut s, "envelope_constant", result.envelope_constant)?;
    s.finish()?;
    runner::write_config_echo(cfg, out)?;

    match result.status {
        PicardStatus::Converged => Ok(0),
        _ => Ok(4),
    }
}

pub fn cmd_certify(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    prepare_out(out)?;
    let any = runner::build_model(cfg)?;
    with_model!(&any, m => certify_impl(m, cfg, out))
}

fn certify_impl<S: Scalar>(
    model: &SystemModel<S>,
    cfg: &RunConfig,
    out: &Path,
) -> Result<i32, CliError> {
    let mut rng = Rng::new(cfg.seed);
    let mut model = model.clone();
    model.calibrate_bilinear_constant(cfg.certify_samples, &mut rng);
    let omega = runner::resolve_omega(&model, cfg)?;

    let epsilon = match cfg.epsilon {
        AutoOr::Value(v) => v,
        AutoOr::Inf => f64::INFINITY,
        AutoOr::Auto => {
            picard::find_epsilon(&model, omega, cfg.t_final, cfg.dt, &mut rng)
                .map_err(runner::core_err)?
                .epsilon
        }
    };

    let cert = certify::certify_iss(
        &model,
        omega,
        epsilon,
        cfg.certify_ensemble,
        cfg.t_final,
        cfg.dt,
        &mut rng,
        &CertifyOptions::default(),
    )
    .map_err(runner::core_err)?;

    let mut w = CsvWriter::create(
        &out.join("certificate.csv"),
        &["nu", "c_proof", "c_empirical", "worst_margin", "ensemble", "violated"],
    )?;
    w.row(&[
        Field::F(cert.nu),
        Field::F(cert.c_proof),
        Field::F(cert.c_empirical),
        Field::F(cert.worst_margin),
        Field::U(cert.ensemble_size as u64),
        Field::B(cert.violated),
    ])?;
    w.finish()?;

    // time-major row order, then run id
    let mut w = CsvWriter::create(&out.join("margins.csv"), &["run_id", "t", "lhs", "rhs", "margin"])?;
    let max_len = cert.margins.iter().map(|m| m.lhs.len()).max().unwrap_or(0);
    for j in 0..max_len {
        for m in &cert.margins {
            if j < m.lhs.len() {
                w.row(&[
                    Field::U(m.run_id as u64),
                    Field::F(j as f64 * cert.dt),
                    Field::F(m.lhs[j]),
                    Field::F(m.rhs[j]),
                    Field::F(m.rhs[j] - m.lhs[j]),
                ])?;
            }
        }
    }
    w.finish()?;

    let mut s = runner::summary_writer(&out.join("summary.csv"))?;
    runner::summary_f(&mut s, "omega", cert.omega)?;
    runner::summary_f(&mut s, "epsilon", cert.epsilon)?;
    runner::summary_f(&mut s, "nu", cert.nu)?;
    runner::summary_f(&mut s, "c_proof", cert.c_proof)?;
    runner::summary_f(&mut s, "c_empirical", cert.c_empirical)?;
    runner::summary_f(&mut s, "worst_margin", cert.worst_margin)?;
    runner::summary_f(&mut s, "tolerance", cert.tolerance)?;
    runner::summary_s(&mut s, "violated", if cert.violated { "1" } else { "0" })?;
    runner::summary_s(&mut s, "blowups", cert.blowups.len().to_string())?;
    if let Some(fit) = &cert.dissipation {
        runner::summary_f(&mut s, "m1", fit.m1)?;
        runner::summary_f(&mut s, "m2", fit.m2)?;
        runner::summary_f(&mut s, "mu", fit.mu)?;
        runner::summary_f(&mut s, "delta", fit.delta)?;
    }
    if let Some(fit) = &cert.energy_fit {
        runner::summary_f(&mut s, "energy_eps", fit.eps_energy)?;
        runner::summary_f(&mut s, "d1", fit.d1)?;
        runner::summary_f(&mut s, "d2", fit.d2)?;
        runner::summary_f(&mut s, "equivalence_lower", fit.equivalence.0)?;
    }
    if let Some(k) = model.constants.k_bilinear {
        runner::summary_f(&mut s, "k_bilinear", k)?;
    }
    s.finish()?;
    runner::write_config_echo(cfg, out)?;

    Ok(if cert.violated { 3 } else { 0 })
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<i32, CliError> {
    prepare_out(out)?;
    let command = cfg
        .sweep_command
        .clone()
        .ok_or_else(|| CliError::Config("sweep requires command = ... in [sweep]".into()))?;
    let points = config::sweep_points(cfg)?;
    let axes: Vec<String> = cfg.sweep_axes.iter().map(|(a, _)| a.clone()).collect();

    let run_point = |(idx, overrides): (usize, &std::collections::BTreeMap<String, String>)| -> (usize, i32) {
        let exit = (|| -> Result<i32, CliError> {
            let mut point_cfg = cfg.clone();
            point_cfg.sweep_command = None;
            point_cfg.sweep_axes.clear();
            for (axis, value) in overrides {
                config::apply_override(&mut point_cfg, axis, value)?;
            }
            let dir = out.join(format!("point_{idx:04}"));
            match command.as_str() {
                "simulate" => cmd_simulate(&point_cfg, &dir),
                "picard" => cmd_picard(&point_cfg, &dir),
                "certify" => cmd_certify(&point_cfg, &dir),
                other => Err(CliError::Config(format!("unknown sweep command {other:?}"))),
            }
        })();
        (idx, exit.unwrap_or_else(|e| e.exit_code()))
    };

    let indexed: Vec<(usize, &std::collections::BTreeMap<String, String>)> =
        points.iter().enumerate().collect();
    let results: Vec<(usize, i32)> = match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| {
                use rayon::prelude::*;
                indexed.par_iter().map(|p| run_point(*p)).collect()
            })
        }
        None => {
            use rayon::prelude::*;
            indexed.par_iter().map(|p| run_point(*p)).collect()
        }
    };

    let mut header: Vec<&str> = vec!["point"];
    header.extend(axes.iter().map(String::as_str));
    header.push("exit_code");
    let mut w = CsvWriter::create(&out.join("sweep_summary.csv"), &header)?;
    for (idx, point) in points.iter().enumerate() {
        let exit = results.iter().find(|(i, _)| *i == idx).map(|(_, c)| *c).unwrap_or(2);
        let mut row = vec![Field::U(idx as u64)];
        for axis in &axes {
            row.push(Field::S(point[axis].clone()));
        }
        row.push(Field::U(exit as u64));
        w.row(&row)?;
    }
    w.finish()?;

    Ok(results.iter().map(|(_, c)| *c).max().unwrap_or(0))
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))
}
