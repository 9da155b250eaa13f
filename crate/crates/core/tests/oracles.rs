//! Independent-oracle checks: dense linear algebra (nalgebra) and dense
//! quadrature validate the closed-form spectra, the tridiagonal solves, the
//! stepping recurrences, and the discrete norms.

use isslab_core::grid::{GridFunction, State};
use isslab_core::linsys::LinearSim;
use isslab_core::models::{self, Scheme};
use isslab_core::norms::{self, NormKind, SineBasis};
use isslab_core::operators::{self, dirichlet_laplacian};
use isslab_core::rng::Rng;
use isslab_core::sample;
use nalgebra::{DMatrix, DVector};

fn dense_laplacian(n: usize) -> DMatrix<f64> {
    let h = 1.0 / (n + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * inv_h2
        } else if i.abs_diff(j) == 1 {
            inv_h2
        } else {
            0.0
        }
    })
}

#[test]
fn spectrum_matches_dense_eigensolver() {
    for n in [1usize, 2, 3, 15, 63] {
        let spec = operators::spectrum(&dirichlet_laplacian(n).unwrap(), n).unwrap();
        let dense = dense_laplacian(n).symmetric_eigen();
        let mut dense_vals: Vec<f64> = dense.eigenvalues.iter().cloned().collect();
        dense_vals.sort_by(|a, b| a.total_cmp(b));
        for (got, want) in spec.eigenvalues.iter().zip(&dense_vals) {
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "n = {n}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn thomas_solve_matches_dense_lu() {
    let mut rng = Rng::new(41);
    let n = 24;
    let op = dirichlet_laplacian(n).unwrap();
    let dense = dense_laplacian(n);
    for alpha in [0.0, 0.3, 7.0, 250.0] {
        let rhs_vals: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
        let rhs = GridFunction::new(rhs_vals.clone()).unwrap();
        let x = operators::solve_shifted(&op, alpha, &rhs).unwrap();
        let a = DMatrix::identity(n, n) * alpha - &dense;
        let x_dense = a.lu().solve(&DVector::from_vec(rhs_vals)).unwrap();
        for (xi, di) in x.values().iter().zip(x_dense.iter()) {
            assert!((xi - di).abs() <= 1e-10 * di.abs().max(1e-12));
        }
    }
}

#[test]
fn implicit_euler_trajectory_matches_dense_recurrence() {
    // unrolled dense recurrence z_{j+1} = (I - dt A)^{-1}(z_j + dt u_j)
    let n = 8;
    let dt = 0.02;
    let t_final = 0.5;
    let m = models::burgers_l2(n).unwrap();
    let sim = LinearSim::new(&m, dt, Scheme::ImplicitEuler).unwrap();
    let mut rng = Rng::new(7);

    let z0 = sample::random_state(&m, &mut rng, 1.0);
    let u1 = sample::build_signal(&m, sample::SignalShape::RandomSmooth, dt, t_final, &mut rng);
    let traj = sim.simulate(&z0, Some(&u1), None, t_final).unwrap();

    let a = dense_laplacian(n);
    let step_matrix = (DMatrix::identity(n, n) - a * dt).try_inverse().unwrap();
    let mut z = DVector::from_vec(z0.as_single().unwrap().values().to_vec());
    for j in 0..traj.len() - 1 {
        let u = DVector::from_vec(u1.sample(j).values().to_vec());
        z = &step_matrix * (&z + u * dt);
        for (a, b) in traj.states[j + 1].as_single().unwrap().values().iter().zip(z.iter()) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-12), "step {j}");
        }
    }
}

#[test]
fn crank_nicolson_trajectory_matches_dense_recurrence() {
    let n = 8;
    let dt = 0.02;
    let t_final = 0.4;
    let m = models::burgers_l2(n).unwrap();
    let sim = LinearSim::new(&m, dt, Scheme::CrankNicolson).unwrap();
    let mut rng = Rng::new(19);

    let z0 = sample::random_state(&m, &mut rng, 1.0);
    let u1 = sample::build_signal(&m, sample::SignalShape::RandomSmooth, dt, t_final, &mut rng);
    let traj = sim.simulate(&z0, Some(&u1), None, t_final).unwrap();

    let a = dense_laplacian(n);
    let implicit = (DMatrix::identity(n, n) - &a * (dt / 2.0)).try_inverse().unwrap();
    let explicit = DMatrix::identity(n, n) + &a * (dt / 2.0);
    let mut z = DVector::from_vec(z0.as_single().unwrap().values().to_vec());
    for j in 0..traj.len() - 1 {
        let u = DVector::from_vec(u1.sample(j).values().to_vec());
        z = &implicit * (&explicit * &z + u * dt);
        for (a, b) in traj.states[j + 1].as_single().unwrap().values().iter().zip(z.iter()) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-12), "step {j}");
        }
    }
}

#[test]
fn wave_step_matches_dense_block_recurrence() {
    // the phi-elimination step must agree with the dense 2n x 2n solve
    let n = 6;
    let dt = 0.05;
    let m = models::wave(n).unwrap();
    let mut rng = Rng::new(3);
    let z0 = sample::random_state(&m, &mut rng, 1.0);

    let lap = dense_laplacian(n);
    let mut a_block = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        a_block[(i, n + i)] = 1.0; // phi' = psi
        a_block[(n + i, n + i)] = -1.0; // damping
        for j in 0..n {
            a_block[(n + i, j)] = lap[(i, j)];
        }
    }

    for omega in [0.0, 0.2] {
        let sim = LinearSim::new(&m, dt, Scheme::ImplicitEuler).unwrap();
        let traj = sim.simulate_shifted(omega, &z0, None, None, dt).unwrap();
        let stepped = traj.states[1].as_pair().unwrap();

        let shifted = &a_block + DMatrix::identity(2 * n, 2 * n) * omega;
        let step_matrix =
            (DMatrix::identity(2 * n, 2 * n) - shifted * dt).try_inverse().unwrap();
        let p0 = z0.as_pair().unwrap();
        let mut z = DVector::zeros(2 * n);
        for i in 0..n {
            z[i] = p0.phi.values()[i];
            z[n + i] = p0.psi.values()[i];
        }
        let z1 = &step_matrix * z;
        for i in 0..n {
            assert!((stepped.phi.values()[i] - z1[i]).abs() <= 1e-11 * z1[i].abs().max(1e-12));
            assert!(
                (stepped.psi.values()[i] - z1[n + i]).abs() <= 1e-11 * z1[n + i].abs().max(1e-12)
            );
        }
    }
}

#[test]
fn sine_mode_norms_match_dense_quadrature() {
    // Simpson quadrature at 4096 panels as the dense oracle
    let simpson = |f: &dyn Fn(f64) -> f64| -> f64 {
        let m = 4096;
        let h = 1.0 / m as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    };

    for (n, k) in [(64usize, 1usize), (64, 3), (256, 5)] {
        let pi_k = k as f64 * std::f64::consts::PI;
        let f = GridFunction::<f64>::sine_mode(n, k);
        let l2 = norms::norm(&State::Single(f.clone()), NormKind::L2).unwrap();
        let l2_oracle = simpson(&|x: f64| (pi_k * x).sin().powi(2)).sqrt();
        assert!((l2 - l2_oracle).abs() <= 1e-10, "L2 n={n} k={k}: {l2} vs {l2_oracle}");
        assert!((l2_oracle - 0.5f64.sqrt()).abs() < 1e-12);

        let h10 = norms::norm(&State::Single(f), NormKind::H10).unwrap();
        let h10_oracle = simpson(&|x: f64| (pi_k * (pi_k * x).cos()).powi(2)).sqrt();
        // second-order consistency of the difference quotient
        let h = 1.0 / (n + 1) as f64;
        let tol = 4.0 * (pi_k * h).powi(2) * h10_oracle;
        assert!((h10 - h10_oracle).abs() <= tol, "H10 n={n} k={k}: {h10} vs {h10_oracle}");
    }
}

#[test]
fn hminus1_matches_dense_inverse_route() {
    let n = 48;
    let basis = SineBasis::new(n);
    let mut rng = Rng::new(23);
    let f_vals: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
    let f = GridFunction::new(f_vals.clone()).unwrap();

    // |f|_{H-1}^2 = <(-A)^{-1} f, f>_{L2} through a dense solve
    let a = -dense_laplacian(n);
    let g = a.lu().solve(&DVector::from_vec(f_vals.clone())).unwrap();
    let h = 1.0 / (n + 1) as f64;
    let dense: f64 = (h
        * g.iter()
            .zip(&f_vals)
            .map(|(gi, fi)| gi * fi)
            .sum::<f64>())
    .sqrt();

    assert!((basis.hminus1_norm(&f) - dense).abs() <= 1e-10 * dense);
}

#[test]
fn sampled_dissipation_quotients_stay_below_exact_w_a() {
    let n = 32;
    let mut rng = Rng::new(9);
    macro_rules! check {
        ($m:expr) => {
            let m = $m;
            let w = operators::estimate_w_a(&m, 200, &mut rng);
            assert_eq!(w, m.exact_w_a());
            for _ in 0..200 {
                let z = sample::random_state(&m, &mut rng, 1.0);
                let q = m.dissipation_quotient(&z).unwrap();
                assert!(q <= w + 1e-9 * (1.0 + w.abs()), "{}: {q} > {w}", m.name);
            }
        };
    }
    check!(models::burgers_h1(n).unwrap());
    check!(models::burgers_l2(n).unwrap());
    check!(models::schrodinger(n).unwrap());
    check!(models::wave(n).unwrap());

    // the Burgers dissipation constant is the discrete lambda_1, close to pi^2
    let m = models::burgers_l2(63).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((m.exact_w_a() + pi2).abs() < 1e-3 * pi2);
}

#[test]
fn eigenmode_rayleigh_quotient_is_exact_eigenvalue() {
    let n = 20;
    let m = models::burgers_l2(n).unwrap();
    let z = m.eigenmode_state(1);
    let q = m.dissipation_quotient(&z).unwrap();
    assert!((q - m.exact_w_a()).abs() <= 1e-10 * m.exact_w_a().abs());
}
