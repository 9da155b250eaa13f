//! Deterministic samplers for states and input signals.
//!
//! Ensemble shapes are fixed by enumeration (eigenmode / random-smooth /
//! burst / exponentially decaying) so that certificates are comparable across
//! models and reproducible from a seed.

use crate::grid::{GridFunction, ProductState, State};
use crate::models::SystemModel;
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::signal::InputSignal;
use std::f64::consts::PI;

/// Random grid function: a spectrally decaying sine combination (smooth) or
/// independent entries (rough). Complex fields get independent real and
/// imaginary parts.
pub fn random_grid<S: Scalar>(n: usize, rng: &mut Rng, smooth: bool) -> GridFunction<S> {
    let mut vals = vec![S::ZERO; n];
    let draw = |rng: &mut Rng| -> S {
        if S::IS_COMPLEX {
            let re = rng.symmetric();
            let im = rng.symmetric();
            S::from_parts(re, im)
        } else {
            S::from_re(rng.symmetric())
        }
    };
    if smooth {
        let h = 1.0 / (n + 1) as f64;
        let k_max = n.min(10);
        for k in 1..=k_max {
            let a = draw(rng).scale(1.0 / (k * k) as f64);
            for (i, v) in vals.iter_mut().enumerate() {
                let s = (k as f64 * PI * (i + 1) as f64 * h).sin();
                *v = *v + a.scale(s);
            }
        }
    } else {
        for v in vals.iter_mut() {
            *v = draw(rng);
        }
    }
    GridFunction::new(vals).expect("sampler produced non-finite values")
}

/// Random model state (smooth with probability ~3/4, rough otherwise), not
/// normalized.
pub fn random_state<S: Scalar>(model: &SystemModel<S>, rng: &mut Rng, amplitude: f64) -> State<S> {
    let smooth = rng.next_f64() < 0.75;
    let n = model.n();
    let state = if model.is_product() {
        State::Pair(ProductState {
            phi: random_grid::<S>(n, rng, smooth),
            psi: random_grid::<S>(n, rng, smooth),
        })
    } else {
        State::Single(random_grid::<S>(n, rng, smooth))
    };
    state.scaled_re(amplitude)
}

/// Random state rescaled to a target X-norm.
pub fn random_state_with_norm<S: Scalar>(
    model: &SystemModel<S>,
    rng: &mut Rng,
    target: f64,
) -> State<S> {
    loop {
        let z = random_state(model, rng, 1.0);
        let nx = model.x_norm(&z);
        if nx > 1e-12 {
            return z.scaled_re(target / nx);
        }
    }
}

/// Initial-state shapes for certification ensembles.
#[derive(Debug, Clone, Copy)]
pub enum StateShape {
    Eigenmode(usize),
    RandomSmooth,
}

/// Input-signal shapes: spatial profile times a temporal envelope.
#[derive(Debug, Clone, Copy)]
pub enum SignalShape {
    Zero,
    /// Constant-in-time eigenmode profile.
    Eigenmode(usize),
    /// Smooth random profile, constant in time.
    RandomSmooth,
    /// Smooth random profile on the time window [t0, t1].
    Burst { t0: f64, t1: f64 },
    /// Smooth random profile with envelope e^(-rate t).
    ExpDecay { rate: f64 },
}

pub fn build_state<S: Scalar>(model: &SystemModel<S>, shape: StateShape, rng: &mut Rng) -> State<S> {
    match shape {
        StateShape::Eigenmode(k) => model.eigenmode_state(k),
        StateShape::RandomSmooth => random_state(model, rng, 1.0),
    }
}

pub fn build_signal<S: Scalar>(
    model: &SystemModel<S>,
    shape: SignalShape,
    dt: f64,
    t_final: f64,
    rng: &mut Rng,
) -> InputSignal<S> {
    let n = model.n();
    let count = crate::linsys::step_count(t_final, dt) + 1;
    let profile: GridFunction<S> = match shape {
        SignalShape::Zero => GridFunction::zeros(n),
        SignalShape::Eigenmode(k) => GridFunction::sine_mode(n, k),
        _ => random_grid::<S>(n, rng, true),
    };
    let envelope = |t: f64| -> f64 {
        match shape {
            SignalShape::Zero | SignalShape::Eigenmode(_) | SignalShape::RandomSmooth => 1.0,
            SignalShape::Burst { t0, t1 } => {
                if (t0..=t1).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            SignalShape::ExpDecay { rate } => (-rate * t).exp(),
        }
    };
    let samples = (0..count)
        .map(|j| profile.scaled_re(envelope(j as f64 * dt)))
        .collect();
    InputSignal::new(samples, dt).expect("signal construction")
}

/// The four-way ensemble enumeration used by certification and epsilon
/// search: member index selects the (state shape, signal shape) combination.
pub fn ensemble_shapes(index: usize, rng: &mut Rng) -> (StateShape, SignalShape) {
    let state = match index % 2 {
        0 => StateShape::Eigenmode(1 + index % 3),
        _ => StateShape::RandomSmooth,
    };
    let signal = match index % 4 {
        0 => SignalShape::Zero,
        1 => SignalShape::Eigenmode(1 + index % 2),
        2 => {
            let t0 = rng.uniform(0.0, 1.0);
            SignalShape::Burst { t0, t1: t0 + rng.uniform(0.2, 1.0) }
        }
        _ => SignalShape::ExpDecay { rate: rng.uniform(0.5, 2.0) },
    };
    (state, signal)
}
