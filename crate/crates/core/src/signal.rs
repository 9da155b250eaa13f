//! Uniformly sampled input signals and their weighted-in-time norms.
//!
//! Time quadrature is the fixed left-endpoint rectangle rule, first-order
//! accurate and consistent with the explicit input treatment of the steppers.
//! A weighted norm up to time t sums every sample with t_j <= t.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::Scalar;

/// A control signal u(t_j) = samples[j], t_j = j * dt.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal<S: Scalar> {
    samples: Vec<GridFunction<S>>,
    dt: f64,
}

impl<S: Scalar> InputSignal<S> {
    pub fn new(samples: Vec<GridFunction<S>>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        if samples.is_empty() {
            return Err(Error::LengthTooSmall { got: 0, min: 1 });
        }
        let n = samples[0].len();
        if samples.iter().any(|s| s.len() != n) {
            return Err(Error::GridMismatch("signal samples on different grids".into()));
        }
        Ok(InputSignal { samples, dt })
    }

    pub fn zeros(n: usize, dt: f64, count: usize) -> Result<Self> {
        Self::new((0..count.max(1)).map(|_| GridFunction::zeros(n)).collect(), dt)
    }

    /// Sample f(t, x) on the space-time grid.
    pub fn from_fn(n: usize, dt: f64, count: usize, f: impl Fn(f64, f64) -> S) -> Result<Self> {
        let samples = (0..count.max(1))
            .map(|j| {
                let t = j as f64 * dt;
                GridFunction::from_fn(n, |x| f(t, x))
            })
            .collect();
        Self::new(samples, dt)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid_len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn sample(&self, j: usize) -> &GridFunction<S> {
        &self.samples[j]
    }

    pub fn samples(&self) -> &[GridFunction<S>] {
        &self.samples
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() || self.dt != other.dt {
            return Err(Error::GridMismatch("signal shapes differ".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Self::new(samples, self.dt)
    }

    /// Samples multiplied by e^(omega t_j), as fed to the shifted system.
    pub fn exp_weighted(&self, omega: f64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, s)| s.scaled_re((omega * j as f64 * self.dt).exp()))
            .collect();
        InputSignal { samples, dt: self.dt }
    }

    /// Per-sample norms under the given U-norm.
    pub fn sample_norms(&self, u_norm: impl Fn(&GridFunction<S>) -> f64) -> Vec<f64> {
        self.samples.iter().map(u_norm).collect()
    }

    /// ( sum_{t_j <= t} e^(2 omega t_j) |u_j|_U^2 dt )^(1/2); omega = 0 is the
    /// plain L2(0,t;U) norm.
    pub fn weighted_l2_norm(
        &self,
        omega: f64,
        t: f64,
        u_norm: impl Fn(&GridFunction<S>) -> f64,
    ) -> Result<f64> {
        let norms = self.sample_norms(u_norm);
        weighted_l2_from_norms(&norms, self.dt, omega, t)
    }

    /// Rectangle-rule L^p(0,t;U) norm, p in [2, inf]; p = inf is the sample max.
    pub fn lp_norm(
        &self,
        p: f64,
        t: f64,
        u_norm: impl Fn(&GridFunction<S>) -> f64,
    ) -> Result<f64> {
        let norms = self.sample_norms(u_norm);
        lp_from_norms(&norms, self.dt, p, t)
    }
}

/// Last sample index with t_j <= t (tolerating rounding at the endpoint).
pub fn cutoff_index(count: usize, dt: f64, t: f64, t_final: f64) -> Result<usize> {
    if !(0.0..=t_final * (1.0 + 1e-12) + dt * 1e-9).contains(&t) {
        return Err(Error::TimeOutOfRange { t, t_final });
    }
    Ok(((t / dt + 1e-9).floor() as usize).min(count - 1))
}

pub fn weighted_l2_from_norms(norms: &[f64], dt: f64, omega: f64, t: f64) -> Result<f64> {
    let t_final = dt * (norms.len() - 1) as f64;
    let last = cutoff_index(norms.len(), dt, t, t_final)?;
    let mut acc = 0.0;
    for (j, &nj) in norms.iter().enumerate().take(last + 1) {
        acc += (2.0 * omega * j as f64 * dt).exp() * nj * nj * dt;
    }
    Ok(acc.sqrt())
}

pub fn lp_from_norms(norms: &[f64], dt: f64, p: f64, t: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 2")));
    }
    let t_final = dt * (norms.len() - 1) as f64;
    let last = cutoff_index(norms.len(), dt, t, t_final)?;
    if p.is_infinite() {
        return Ok(norms[..=last].iter().fold(0.0f64, |m, &x| m.max(x)));
    }
    let acc: f64 = norms[..=last].iter().map(|&nj| nj.powf(p) * dt).sum();
    Ok(acc.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::l2_norm;

    fn unit_norm_signal(count: usize, dt: f64) -> InputSignal<f64> {
        // constant-in-time profile with |u_j|_{L2} = 1
        let n = 16;
        let g = GridFunction::<f64>::sine_mode(n, 1);
        let scale = 1.0 / l2_norm(&g);
        InputSignal::new(vec![g.scaled_re(scale); count], dt).unwrap()
    }

    #[test]
    fn zero_signal_zero_norm() {
        let u = InputSignal::<f64>::zeros(8, 0.1, 11).unwrap();
        assert_eq!(u.weighted_l2_norm(2.0, 1.0, l2_norm).unwrap(), 0.0);
    }

    #[test]
    fn constant_unit_integrand() {
        let u = unit_norm_signal(101, 0.01);
        let got = u.weighted_l2_norm(0.0, 1.0, l2_norm).unwrap();
        // rectangle rule of integral of 1 over [0,1], 101 samples kept
        assert!((got - (1.01f64).sqrt()).abs() < 1e-12);
        assert!((got - 1.0).abs() < 0.01);
    }

    #[test]
    fn exponential_weight_closed_form() {
        // integral of e^{2s} over [0,1] = (e^2 - 1)/2, sqrt ~ 1.7873
        let dt = 1e-4;
        let u = unit_norm_signal(10_001, dt);
        let got = u.weighted_l2_norm(1.0, 1.0, l2_norm).unwrap();
        let want = ((std::f64::consts::E.powi(2) - 1.0) / 2.0).sqrt();
        assert!((got - want).abs() < 10.0 * dt, "{got} vs {want}");
    }

    #[test]
    fn monotone_in_t_and_omega() {
        let mut rng = crate::rng::Rng::new(21);
        let n = 8;
        let samples: Vec<GridFunction<f64>> = (0..40)
            .map(|_| {
                GridFunction::new((0..n).map(|_| rng.symmetric()).collect::<Vec<_>>()).unwrap()
            })
            .collect();
        let u = InputSignal::new(samples, 0.05).unwrap();
        let mut prev = 0.0;
        for j in 0..40 {
            let t = j as f64 * 0.05;
            let cur = u.weighted_l2_norm(0.7, t, l2_norm).unwrap();
            assert!(cur >= prev - 1e-15);
            prev = cur;
            let lo = u.weighted_l2_norm(0.2, t, l2_norm).unwrap();
            assert!(cur >= lo - 1e-15);
        }
    }

    #[test]
    fn out_of_range_time_rejected() {
        let u = InputSignal::<f64>::zeros(4, 0.1, 5).unwrap();
        assert!(u.weighted_l2_norm(0.0, 1.0, l2_norm).is_err());
        assert!(u.weighted_l2_norm(0.0, -0.1, l2_norm).is_err());
    }

    #[test]
    fn lp_norm_edges() {
        let u = unit_norm_signal(101, 0.01);
        let linf = u.lp_norm(f64::INFINITY, 1.0, l2_norm).unwrap();
        assert!((linf - 1.0).abs() < 1e-12);
        let l2 = u.lp_norm(2.0, 1.0, l2_norm).unwrap();
        let wl2 = u.weighted_l2_norm(0.0, 1.0, l2_norm).unwrap();
        assert!((l2 - wl2).abs() < 1e-12);
        assert!(u.lp_norm(1.5, 1.0, l2_norm).is_err());
    }
}
