//! The associated linear system: variation-of-constants stepping, the
//! exponentially shifted variant, and empirical well-posedness constants.
//!
//! The discrete input map is recovered by simulating with zero initial state,
//! the discrete output map by simulating with zero inputs; in finite
//! dimensions both are automatically bounded, and their empirical norms are
//! what [`LinearSim::wellposedness_constants`] reports.

use crate::error::{Error, Result};
use crate::grid::State;
use crate::models::{Scheme, SystemModel};
use crate::rng::Rng;
use crate::sample;
use crate::scalar::Scalar;
use crate::signal::InputSignal;

/// Number of steps covering [0, t_final]: ceil(t_final/dt) with rounding slack.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    ((t_final / dt) - 1e-9).ceil().max(0.0) as usize
}

/// Validate that a signal matches the model grid and covers the horizon.
pub fn check_signal<S: Scalar>(
    model: &SystemModel<S>,
    u: Option<&InputSignal<S>>,
    t_final: f64,
    dt: f64,
) -> Result<()> {
    let Some(u) = u else { return Ok(()) };
    if u.grid_len() != model.n() {
        return Err(Error::GridMismatch(format!(
            "signal on {} points, model on {}",
            u.grid_len(),
            model.n()
        )));
    }
    if (u.dt() - dt).abs() > 1e-12 * dt {
        return Err(Error::GridMismatch(format!(
            "signal step {} vs simulation step {}",
            u.dt(),
            dt
        )));
    }
    if u.len() < step_count(t_final, dt) {
        return Err(Error::GridMismatch(format!(
            "signal has {} samples, horizon needs {}",
            u.len(),
            step_count(t_final, dt)
        )));
    }
    Ok(())
}

/// Time series of states with per-step X-norms and output norms (C is the
/// identity for all shipped models, so outputs are the states measured in the
/// Y-norm).
#[derive(Debug, Clone)]
pub struct Trajectory<S: Scalar> {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<State<S>>,
    pub x_norms: Vec<f64>,
    pub y_norms: Vec<f64>,
    /// Step index at which blow-up was detected; the stored data end there.
    pub blowup_step: Option<usize>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn with_capacity(dt: f64, cap: usize) -> Self {
        Trajectory {
            dt,
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            x_norms: Vec::with_capacity(cap),
            y_norms: Vec::with_capacity(cap),
            blowup_step: None,
        }
    }

    pub fn push(&mut self, model: &SystemModel<S>, state: State<S>) {
        let j = self.states.len();
        self.times.push(j as f64 * self.dt);
        self.x_norms.push(model.x_norm(&state));
        self.y_norms.push(model.y_norm(&state));
        self.states.push(state);
    }

    pub fn mark_blowup(&mut self, step: usize) {
        self.blowup_step = Some(step);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> &State<S> {
        self.states.last().expect("trajectory is never empty")
    }

    /// |z(t_j)|_X^2; the Lyapunov candidate and the CSV energy column.
    pub fn energy(&self, j: usize) -> f64 {
        self.x_norms[j] * self.x_norms[j]
    }

    pub fn sup_x_norm(&self) -> f64 {
        self.x_norms.iter().cloned().fold(0.0, f64::max)
    }
}

/// A linear simulation configuration: the model reference, the time step, and
/// the scheme. The bilinear feedback of the model is ignored here; u2 enters
/// as an explicit signal.
#[derive(Debug, Clone, Copy)]
pub struct LinearSim<'a, S: Scalar> {
    pub model: &'a SystemModel<S>,
    pub dt: f64,
    pub scheme: Scheme,
}

impl<'a, S: Scalar> LinearSim<'a, S> {
    pub fn new(model: &'a SystemModel<S>, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        Ok(LinearSim { model, dt, scheme })
    }

    /// Simulate dz/dt = A z + B1 u1 + B2 u2 over [0, t_final].
    pub fn simulate(
        &self,
        z0: &State<S>,
        u1: Option<&InputSignal<S>>,
        u2: Option<&InputSignal<S>>,
        t_final: f64,
    ) -> Result<Trajectory<S>> {
        self.run(0.0, z0, u1, u2, t_final)
    }

    /// Simulate the shifted system dx/dt = (A + omega I) x + forcing, with
    /// input signals that already carry the e^(omega t) factor. The returned
    /// trajectory matches e^(omega t_j) times the unshifted one to scheme
    /// order.
    pub fn simulate_shifted(
        &self,
        omega: f64,
        z0: &State<S>,
        u1_shifted: Option<&InputSignal<S>>,
        u2_shifted: Option<&InputSignal<S>>,
        t_final: f64,
    ) -> Result<Trajectory<S>> {
        if omega < 0.0 {
            return Err(Error::InvalidParameter(format!("omega = {omega} must be >= 0")));
        }
        let omega_max = self.model.constants.omega_max;
        if omega > 0.0 && omega >= omega_max {
            return Err(Error::ShiftDestabilizes { omega, margin: omega - omega_max });
        }
        self.run(omega, z0, u1_shifted, u2_shifted, t_final)
    }

    fn run(
        &self,
        omega: f64,
        z0: &State<S>,
        u1: Option<&InputSignal<S>>,
        u2: Option<&InputSignal<S>>,
        t_final: f64,
    ) -> Result<Trajectory<S>> {
        check_signal(self.model, u1, t_final, self.dt)?;
        check_signal(self.model, u2, t_final, self.dt)?;
        if z0.grid_len() != self.model.n() {
            return Err(Error::GridMismatch(format!(
                "initial state on {} points, model on {}",
                z0.grid_len(),
                self.model.n()
            )));
        }
        let steps = step_count(t_final, self.dt);
        let mut traj = Trajectory::with_capacity(self.dt, steps + 1);
        let mut z = z0.clone();
        traj.push(self.model, z.clone());
        for j in 0..steps {
            let mut forcing = self.model.zero_state();
            if let Some(u) = u1 {
                forcing = forcing.add_scaled(1.0, &self.model.inject_input(u.sample(j)))?;
            }
            if let Some(u) = u2 {
                forcing = forcing.add_scaled(1.0, &self.model.inject_input(u.sample(j)))?;
            }
            z = self.model.step(self.scheme, self.dt, omega, &z, &forcing)?;
            traj.push(self.model, z.clone());
        }
        Ok(traj)
    }

    /// Empirical well-posedness constants over a sampled ensemble:
    /// k1 bounds |x(t)|_X and k2 bounds |y|_{L2(0,t;Y)}, both against
    /// |x0|_X + |u1|_{L2(0,t;U)} + |u2|_{L2(0,t;U)}.
    pub fn wellposedness_constants(
        &self,
        t_final: f64,
        ensemble: usize,
        rng: &mut Rng,
    ) -> Result<(f64, f64)> {
        if self.model.constants.omega_max <= 0.0 {
            return Err(Error::InvalidParameter(
                "wellposedness constants need an exponentially stable generator".into(),
            ));
        }
        let mut k1 = 0.0f64;
        let mut k2 = 0.0f64;
        for member in 0..ensemble.max(1) {
            let (state_shape, signal_shape) = sample::ensemble_shapes(member, rng);
            let z0 = sample::build_state(self.model, state_shape, rng);
            let u1 = sample::build_signal(self.model, signal_shape, self.dt, t_final, rng);
            let (_, u2_shape) = sample::ensemble_shapes(member + 1, rng);
            let u2 = sample::build_signal(self.model, u2_shape, self.dt, t_final, rng);

            let traj = self.simulate(&z0, Some(&u1), Some(&u2), t_final)?;
            let u1_norms = u1.sample_norms(|g| self.model.u_norm(g));
            let u2_norms = u2.sample_norms(|g| self.model.u_norm(g));
            let z0_norm = self.model.x_norm(&z0);

            let mut u1_sq = 0.0;
            let mut u2_sq = 0.0;
            let mut y_sq = 0.0;
            for j in 0..traj.len() {
                if j < u1_norms.len() {
                    u1_sq += u1_norms[j] * u1_norms[j] * self.dt;
                    u2_sq += u2_norms[j] * u2_norms[j] * self.dt;
                }
                y_sq += traj.y_norms[j] * traj.y_norms[j] * self.dt;
                let denom = z0_norm + u1_sq.sqrt() + u2_sq.sqrt();
                if denom > 1e-12 {
                    k1 = k1.max(traj.x_norms[j] / denom);
                    k2 = k2.max(y_sq.sqrt() / denom);
                }
            }
        }
        Ok((k1, k2))
    }
}
