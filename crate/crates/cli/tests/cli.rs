//! End-to-end command tests through the binary: exit codes, file layout, and
//! rerun determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn isslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isslab"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isslab_cli_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn simulate_zero_data_writes_zero_norms() {
    let dir = tmpdir("simzero");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 0.2\nz0 = zero\nu1 = zero\n[model]\nname = burgers_h1\nn = 16\n",
    );
    let out = dir.join("out");
    let status = isslab().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let body = read(&out.join("trajectory.csv"));
    for line in body.lines().skip(1) {
        let x_norm: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x_norm, 0.0);
    }
}

#[test]
fn simulate_eigenmode_linear_decay_matches_recurrence() {
    let dir = tmpdir("simdecay");
    let n = 32usize;
    let dt = 1e-3;
    let cfg = write_config(
        &dir,
        "run.ini",
        &format!(
            "[run]\ndt = {dt}\nt_final = 0.5\nz0 = eigenmode:1\nu1 = zero\n\
             [model]\nname = burgers_l2\nn = {n}\nfeedback = off\n"
        ),
    );
    let out = dir.join("out");
    assert_eq!(
        isslab().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap().code(),
        Some(0)
    );
    let h = 1.0 / (n + 1) as f64;
    let lam1 = -2.0 / (h * h) * (1.0 - (std::f64::consts::PI * h).cos());
    let factor = 1.0 / (1.0 - dt * lam1);
    let body = read(&out.join("trajectory.csv"));
    let mut expect = None;
    for line in body.lines().skip(1) {
        let x_norm: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        match expect {
            None => expect = Some(x_norm),
            Some(e) => {
                let want = e * factor;
                assert!((x_norm - want).abs() <= 1e-10 * want, "{x_norm} vs {want}");
                expect = Some(want);
            }
        }
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tmpdir("cfgerr");
    // unknown key
    let bad = write_config(&dir, "bad.ini", "[model]\nname = wave\nzzz = 1\n");
    let st = isslab().args(["simulate", "--config"]).arg(&bad).arg("--out").arg(dir.join("o1")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    // unknown model
    let bad = write_config(&dir, "bad2.ini", "[model]\nname = heat\n");
    let st = isslab().args(["simulate", "--config"]).arg(&bad).arg("--out").arg(dir.join("o2")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    // unreadable config
    let st = isslab()
        .args(["simulate", "--config"])
        .arg(dir.join("missing.ini"))
        .arg("--out")
        .arg(dir.join("o3"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn picard_zero_data_single_iteration() {
    let dir = tmpdir("piczero");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 0.5\nomega = 1.0\nepsilon = 0.1\nz0 = zero\nu1 = zero\n\
         [model]\nname = burgers_l2\nn = 16\n",
    );
    let out = dir.join("out");
    let st = isslab().args(["picard", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let picard = read(&out.join("picard.csv"));
    let rows: Vec<&str> = picard.lines().collect();
    assert_eq!(rows.len(), 2, "one iteration: {picard}");
    let inc: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(inc, 0.0);
}

#[test]
fn picard_divergent_run_exits_4_with_logs() {
    let dir = tmpdir("picdiv");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 2.0\nomega = 1.0\nepsilon = 1e6\nz0 = eigenmode:1\nz0_amp = 300.0\nu1 = zero\n\
         [model]\nname = burgers_h1\nn = 32\n[picard]\ntol = 1e-10\nmax_iter = 20\n",
    );
    let out = dir.join("out");
    let st = isslab().args(["picard", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(4));
    let picard = read(&out.join("picard.csv"));
    assert!(picard.lines().count() > 2, "partial logs retained: {picard}");
    let increments: Vec<f64> = picard
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(increments.windows(2).any(|w| w[1] > w[0]), "growing increments visible");
}

#[test]
fn certify_linear_model_not_violated() {
    let dir = tmpdir("certlin");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 1.0\nomega = 1.0\nepsilon = 0.1\nseed = 2\n\
         [model]\nname = schrodinger\nn = 24\nfeedback = off\n\
         [certify]\nensemble = 8\nsamples = 500\n",
    );
    let out = dir.join("out");
    let st = isslab().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let cert = read(&out.join("certificate.csv"));
    let row = cert.lines().nth(1).unwrap();
    let violated = row.split(',').nth(5).unwrap();
    assert_eq!(violated, "0");
}

#[test]
fn certify_global_burgers_l2_moderate_amplitude() {
    let dir = tmpdir("certglob");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 2e-3\nt_final = 1.0\nomega = auto\nepsilon = inf\nseed = 4\n\
         [model]\nname = burgers_l2\nn = 48\n[certify]\nensemble = 6\nsamples = 500\n",
    );
    let out = dir.join("out");
    let st = isslab().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0), "global certificate must not be violated");
    let cert = read(&out.join("certificate.csv"));
    assert!(cert.lines().nth(1).unwrap().ends_with(",0"));
    // a model without the exact cancellation rejects the inf sentinel
    let bad = write_config(
        &dir,
        "bad.ini",
        "[run]\nepsilon = inf\n[model]\nname = burgers_h1\nn = 16\n[certify]\nensemble = 2\nsamples = 100\n",
    );
    let st = isslab().args(["certify", "--config"]).arg(&bad).arg("--out").arg(dir.join("o2")).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn sweep_runs_points_and_writes_summary() {
    let dir = tmpdir("sweep");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 0.2\nz0 = eigenmode:1\nz0_amp = 0.1\n\
         [model]\nname = burgers_l2\nn = 16\n\
         [sweep]\ncommand = simulate\nmodel.n = 8,16\nrun.dt = 1e-2,5e-3\n",
    );
    let out = dir.join("out");
    let st = isslab()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--jobs", "2"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let summary = read(&out.join("sweep_summary.csv"));
    assert_eq!(summary.lines().count(), 5, "{summary}");
    assert!(summary.lines().next().unwrap().starts_with("point,model.n,run.dt,exit_code"));
    for idx in 0..4 {
        assert!(out.join(format!("point_{idx:04}")).join("trajectory.csv").exists());
    }
}

#[test]
fn seed_override_and_rerun_determinism() {
    let dir = tmpdir("determ");
    let cfg = write_config(
        &dir,
        "run.ini",
        "[run]\ndt = 1e-2\nt_final = 0.5\nseed = 1\nz0 = random-smooth\nz0_amp = 0.1\nu1 = burst:0.1,0.3,0.05\n\
         [model]\nname = wave\nn = 24\n",
    );
    let (a, b, c) = (dir.join("a"), dir.join("b"), dir.join("c"));
    for out in [&a, &b] {
        let st = isslab()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .args(["--seed", "99"])
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
    }
    let st = isslab().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&c).status().unwrap();
    assert_eq!(st.code(), Some(0));

    assert_eq!(read(&a.join("trajectory.csv")), read(&b.join("trajectory.csv")));
    // the explicit --seed overrides the config seed
    assert_ne!(read(&a.join("trajectory.csv")), read(&c.join("trajectory.csv")));
}

#[test]
fn state_file_roundtrip_as_initial_condition() {
    let dir = tmpdir("statefile");
    let cfg = write_config(
        &dir,
        "gen.ini",
        "[run]\ndt = 1e-2\nt_final = 0.2\nseed = 5\nz0 = random-smooth\nz0_amp = 0.2\nsnapshots = 1\n\
         [model]\nname = burgers_l2\nn = 12\n",
    );
    let gen_out = dir.join("gen");
    assert_eq!(
        isslab().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&gen_out).status().unwrap().code(),
        Some(0)
    );
    // final snapshot becomes the next run's initial state
    let snap = gen_out.join("state_20.csv");
    assert!(snap.exists());
    let cfg2 = write_config(
        &dir,
        "cont.ini",
        &format!(
            "[run]\ndt = 1e-2\nt_final = 0.1\nz0 = file:{}\n[model]\nname = burgers_l2\nn = 12\n",
            snap.display()
        ),
    );
    let out2 = dir.join("cont");
    assert_eq!(
        isslab().args(["simulate", "--config"]).arg(&cfg2).arg("--out").arg(&out2).status().unwrap().code(),
        Some(0)
    );
    // the continued run starts at the generated snapshot's norm
    let gen_traj = read(&gen_out.join("trajectory.csv"));
    let cont_traj = read(&out2.join("trajectory.csv"));
    let last_gen: f64 = gen_traj.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let first_cont: f64 =
        cont_traj.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last_gen - first_cont).abs() <= 1e-12 * last_gen.max(1e-12));
}
