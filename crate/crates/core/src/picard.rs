//! Constructive fixed-point solution of the closed loop: iterate
//! G(u2) = N(z, y) on the ball of radius epsilon in the weighted input space,
//! observe the contraction, and return the closed-loop trajectory.
//!
//! The infinite horizon is truncated to [0, t_final]; choosing t_final with
//! e^(-omega t_final) <= 1e-6 keeps tail contributions below certification
//! tolerances.

use crate::error::{Error, Result};
use crate::grid::State;
use crate::linsys::{step_count, LinearSim, Trajectory};
use crate::models::{Scheme, SystemModel};
use crate::rng::Rng;
use crate::sample;
use crate::scalar::Scalar;
use crate::signal::InputSignal;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct PicardConfig {
    /// Exponential weight; must lie in (0, omega_max) of the model.
    pub omega: f64,
    /// Smallness radius for |z0|_X + |u1|_{L2_omega} and for the iterate ball.
    pub epsilon: f64,
    /// Stopping tolerance on the weighted increment norm.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardStatus {
    Converged,
    /// Weighted increments grew for three consecutive iterations.
    Diverged,
    /// An iterate left the radius-epsilon ball.
    EscapedBall,
    MaxIterExhausted,
}

#[derive(Debug, Clone)]
pub struct PicardResult<S: Scalar> {
    pub status: PicardStatus,
    /// The feedback signal at termination (the fixed point on convergence).
    pub u2_star: InputSignal<S>,
    /// Closed-loop trajectory driven by `u2_star`.
    pub trajectory: Trajectory<S>,
    pub iterations: usize,
    /// Weighted increment norm per iteration.
    pub increments: Vec<f64>,
    /// increments[k] / increments[k-1], from the second iteration on.
    pub contraction_ratios: Vec<f64>,
    /// Ball membership of each iterate.
    pub in_ball: Vec<bool>,
    /// |e^(omega .)(u2_star - N(z, y))|_{L2(0,T)} recomputed after the run.
    pub residual: f64,
    /// Observed envelope constant: max_j e^(omega t_j) |z(t_j)|_X / epsilon.
    pub envelope_constant: f64,
}

impl<S: Scalar> PicardResult<S> {
    pub fn converged(&self) -> bool {
        self.status == PicardStatus::Converged
    }

    /// All contraction ratios observed after the second iteration below one.
    pub fn ratios_eventually_below_one(&self) -> bool {
        self.contraction_ratios.iter().skip(1).all(|&r| r < 1.0)
    }
}

/// Iterate u2 <- N(z, y) where (z, y) solves the linear system driven by u2,
/// starting from u2 = 0.
pub fn picard_solve<S: Scalar>(
    model: &SystemModel<S>,
    z0: &State<S>,
    u1: Option<&InputSignal<S>>,
    cfg: &PicardConfig,
    t_final: f64,
    dt: f64,
) -> Result<PicardResult<S>> {
    validate_omega(model, cfg.omega)?;
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::InvalidParameter(format!(
            "tol = {}, max_iter = {}",
            cfg.tol, cfg.max_iter
        )));
    }
    let u_norm = |g: &crate::grid::GridFunction<S>| model.u_norm(g);
    let smallness = model.x_norm(z0)
        + match u1 {
            Some(u) => u.weighted_l2_norm(cfg.omega, u.t_final(), u_norm)?,
            None => 0.0,
        };
    if smallness > cfg.epsilon * (1.0 + 1e-9) {
        return Err(Error::SmallnessViolated { got: smallness, epsilon: cfg.epsilon });
    }

    let sim = LinearSim::new(model, dt, Scheme::ImplicitEuler)?;
    let steps = step_count(t_final, dt);
    let mut u2 = InputSignal::<S>::zeros(model.n(), dt, steps + 1)?;

    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut in_ball = Vec::new();
    let mut consecutive_growth = 0usize;
    let mut status = PicardStatus::MaxIterExhausted;
    let mut iterations = 0usize;

    for _k in 1..=cfg.max_iter {
        iterations += 1;
        let traj = sim.simulate(z0, u1, Some(&u2), t_final)?;
        let u2_next = feedback_signal(model, &traj, dt)?;

        let increment =
            u2_next.sub(&u2)?.weighted_l2_norm(cfg.omega, t_final, u_norm)?;
        if let Some(&prev) = increments.last() {
            ratios.push(if prev > 0.0 { increment / prev } else { 0.0 });
            if increment > prev {
                consecutive_growth += 1;
            } else {
                consecutive_growth = 0;
            }
        }
        increments.push(increment);

        let ball_norm = u2_next.weighted_l2_norm(cfg.omega, t_final, u_norm)?;
        let inside = ball_norm <= cfg.epsilon * (1.0 + 1e-9);
        in_ball.push(inside);

        u2 = u2_next;

        if !inside {
            status = PicardStatus::EscapedBall;
            break;
        }
        if increment <= cfg.tol {
            status = PicardStatus::Converged;
            break;
        }
        if consecutive_growth >= 3 {
            status = PicardStatus::Diverged;
            break;
        }
    }

    // Final trajectory consistent with the returned signal, and the
    // independently recomputed fixed-point residual.
    let trajectory = sim.simulate(z0, u1, Some(&u2), t_final)?;
    let residual = feedback_signal(model, &trajectory, dt)?
        .sub(&u2)?
        .weighted_l2_norm(cfg.omega, t_final, u_norm)?;

    let envelope_constant = if cfg.epsilon > 0.0 {
        trajectory
            .times
            .iter()
            .zip(&trajectory.x_norms)
            .map(|(&t, &x)| (cfg.omega * t).exp() * x / cfg.epsilon)
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    Ok(PicardResult {
        status,
        u2_star: u2,
        trajectory,
        iterations,
        increments,
        contraction_ratios: ratios,
        in_ball,
        residual,
        envelope_constant,
    })
}

/// N(z_j, C z_j) sampled along a trajectory (C is the identity).
fn feedback_signal<S: Scalar>(
    model: &SystemModel<S>,
    traj: &Trajectory<S>,
    dt: f64,
) -> Result<InputSignal<S>> {
    let samples = traj.states.iter().map(|z| model.eval_n(z, z)).collect();
    InputSignal::new(samples, dt)
}

fn validate_omega<S: Scalar>(model: &SystemModel<S>, omega: f64) -> Result<()> {
    let omega_max = model.constants.omega_max;
    if !(omega > 0.0 && omega < omega_max) {
        return Err(Error::OmegaOutOfRange { omega, omega_max, model: model.name });
    }
    Ok(())
}

/// Result of the empirical smallness-radius search.
#[derive(Debug, Clone)]
pub struct EpsilonSearch {
    /// Largest radius in the geometric grid for which the whole ensemble
    /// contracted. An empirical certificate, not a proof.
    pub epsilon: f64,
    /// Diagnostic radius assembled from the proof chain,
    /// 1 / (4 K |C| k1^(2-p) k2^p); its sharpness is unknown.
    pub formula_epsilon: f64,
    /// (candidate, accepted) in the order tried.
    pub tried: Vec<(f64, bool)>,
    pub ensemble: usize,
}

const EPSILON_TOP: f64 = 1.0;
const EPSILON_GRID_DEPTH: usize = 24;
const EPSILON_ENSEMBLE: usize = 20;

/// Largest epsilon in the geometric grid {2^-m} for which `picard_solve`
/// converges with eventual contraction ratios < 1 on a fixed ensemble of
/// (z0, u1) pairs scaled to the candidate radius.
pub fn find_epsilon<S: Scalar>(
    model: &SystemModel<S>,
    omega: f64,
    t_final: f64,
    dt: f64,
    rng: &mut Rng,
) -> Result<EpsilonSearch> {
    validate_omega(model, omega)?;

    let formula_epsilon = epsilon_formula(model, omega, t_final, dt, rng)?;

    let mut tried = Vec::new();
    for m in 0..=EPSILON_GRID_DEPTH {
        let candidate = EPSILON_TOP * 0.5f64.powi(m as i32);
        let member_seed = rng.next_u64();
        let ok_flags: Vec<bool> = (0..EPSILON_ENSEMBLE)
            .into_par_iter()
            .map(|member| {
                let mut member_rng = Rng::for_member(member_seed, member as u64);
                ensemble_member_contracts(model, omega, candidate, t_final, dt, member, &mut member_rng)
            })
            .collect();
        let accepted = ok_flags.iter().all(|&b| b);
        tried.push((candidate, accepted));
        if accepted {
            return Ok(EpsilonSearch {
                epsilon: candidate,
                formula_epsilon,
                tried,
                ensemble: EPSILON_ENSEMBLE,
            });
        }
    }
    Err(Error::EpsilonSearchFailed {
        smallest: EPSILON_TOP * 0.5f64.powi(EPSILON_GRID_DEPTH as i32),
    })
}

/// Draw a (z0, u1) pair by the ensemble shape enumeration and scale it onto
/// the smallness sphere |z0|_X + |u1|_{L2_omega} = 0.999 epsilon.
pub fn scaled_small_data<S: Scalar>(
    model: &SystemModel<S>,
    omega: f64,
    epsilon: f64,
    t_final: f64,
    dt: f64,
    member: usize,
    rng: &mut Rng,
) -> (State<S>, Option<InputSignal<S>>) {
    let (state_shape, signal_shape) = sample::ensemble_shapes(member, rng);
    let z0_raw = sample::build_state(model, state_shape, rng);
    let u1_raw = sample::build_signal(model, signal_shape, dt, t_final, rng);

    let u_norm = |g: &crate::grid::GridFunction<S>| model.u_norm(g);
    let z0_norm = model.x_norm(&z0_raw);
    let u1_norm = u1_raw
        .weighted_l2_norm(omega, u1_raw.t_final(), u_norm)
        .unwrap_or(0.0);
    let total = z0_norm + u1_norm;
    if total == 0.0 {
        return (model.zero_state(), None);
    }
    let scale = 0.999 * epsilon / total;
    let z0 = z0_raw.scaled_re(scale);
    let u1 = if u1_norm > 0.0 {
        let samples: Vec<_> = u1_raw.samples().iter().map(|s| s.scaled_re(scale)).collect();
        Some(InputSignal::new(samples, dt).expect("scaled signal"))
    } else {
        None
    };
    (z0, u1)
}

fn ensemble_member_contracts<S: Scalar>(
    model: &SystemModel<S>,
    omega: f64,
    epsilon: f64,
    t_final: f64,
    dt: f64,
    member: usize,
    rng: &mut Rng,
) -> bool {
    let (z0, u1) = scaled_small_data(model, omega, epsilon, t_final, dt, member, rng);
    let cfg = PicardConfig {
        omega,
        epsilon,
        tol: (1e-8 * epsilon).max(1e-14),
        max_iter: 30,
    };
    match picard_solve(model, &z0, u1.as_ref(), &cfg, t_final, dt) {
        Ok(res) => {
            res.converged() && res.ratios_eventually_below_one() && res.in_ball.iter().all(|&b| b)
        }
        Err(_) => false,
    }
}

/// The proof-chain diagnostic radius: with |e^(w.) N(z,y)| <= K |C| k1^(2-p)
/// k2^p (2 eps)^2 required <= eps, any eps below 1/(4 K |C| k1^(2-p) k2^p)
/// closes the ball.
fn epsilon_formula<S: Scalar>(
    model: &SystemModel<S>,
    omega: f64,
    t_final: f64,
    dt: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let p = model.constants.p;
    let k_bilinear = match model.constants.k_bilinear {
        Some(k) => k,
        None => 1.1 * crate::certify::estimate_bilinear_k(model, p, 2000, rng),
    };
    // k1 for the shifted system, k2 for the original, both over a small
    // ensemble.
    let sim = LinearSim::new(model, dt, Scheme::ImplicitEuler)?;
    let (_, k2) = sim.wellposedness_constants(t_final, 6, rng)?;
    let k1_shifted = shifted_state_constant(model, omega, t_final, dt, rng)?;
    let denom = 4.0 * k_bilinear * model.constants.c_norm * k1_shifted.powf(2.0 - p) * k2.powf(p);
    Ok(if denom > 0.0 { 1.0 / denom } else { f64::INFINITY })
}

fn shifted_state_constant<S: Scalar>(
    model: &SystemModel<S>,
    omega: f64,
    t_final: f64,
    dt: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let sim = LinearSim::new(model, dt, Scheme::ImplicitEuler)?;
    let mut k1 = 0.0f64;
    for member in 0..6 {
        let (state_shape, signal_shape) = sample::ensemble_shapes(member, rng);
        let z0 = sample::build_state(model, state_shape, rng);
        let u1 = sample::build_signal(model, signal_shape, dt, t_final, rng);
        let traj = sim.simulate_shifted(omega, &z0, Some(&u1), None, t_final)?;
        let u_norm = |g: &crate::grid::GridFunction<S>| model.u_norm(g);
        let u_norms = u1.sample_norms(u_norm);
        let z0_norm = model.x_norm(&z0);
        let mut u_sq = 0.0;
        for j in 0..traj.len() {
            if j < u_norms.len() {
                u_sq += u_norms[j] * u_norms[j] * dt;
            }
            let denom = z0_norm + u_sq.sqrt();
            if denom > 1e-12 {
                k1 = k1.max(traj.x_norms[j] / denom);
            }
        }
    }
    Ok(k1.max(1e-6))
}
