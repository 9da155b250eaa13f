//! Grid functions on the uniform 1D Dirichlet grid.
//!
//! A [`GridFunction`] stores interior values only; the boundary values at
//! x = 0 and x = 1 are implicit zeros. With n interior points the spacing is
//! h = 1/(n+1) and the nodes are x_i = i*h, i = 1..n.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real- or complex-valued function sampled on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    /// Wrap interior values; rejects empty or non-finite data.
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::LengthTooSmall { got: 0, min: 1 });
        }
        if !values.iter().all(|v| v.is_finite_value()) {
            return Err(Error::NonFinite("GridFunction::new"));
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(n: usize) -> Self {
        GridFunction { values: vec![S::ZERO; n] }
    }

    /// Sample `f` at the interior nodes x_i = i/(n+1).
    pub fn from_fn(n: usize, f: impl Fn(f64) -> S) -> Self {
        let h = 1.0 / (n + 1) as f64;
        GridFunction { values: (1..=n).map(|i| f(i as f64 * h)).collect() }
    }

    /// The k-th discrete sine mode sin(k pi x_i), k = 1..n.
    pub fn sine_mode(n: usize, k: usize) -> Self {
        let h = 1.0 / (n + 1) as f64;
        GridFunction {
            values: (1..=n)
                .map(|i| S::from_re((k as f64 * std::f64::consts::PI * i as f64 * h).sin()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing h = 1/(n+1); h*(n+1) = 1 holds by construction.
    pub fn h(&self) -> f64 {
        1.0 / (self.values.len() + 1) as f64
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite_value())
    }

    pub fn scaled(&self, s: S) -> Self {
        GridFunction { values: self.values.iter().map(|&v| v * s).collect() }
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        GridFunction { values: self.values.iter().map(|&v| v.scale(s)).collect() }
    }

    /// self + alpha * other
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b.scale(alpha))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch(format!(
                "lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// First-order state (position component phi, velocity component psi) for the
/// wave model.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState<S: Scalar> {
    pub phi: GridFunction<S>,
    pub psi: GridFunction<S>,
}

impl<S: Scalar> ProductState<S> {
    pub fn new(phi: GridFunction<S>, psi: GridFunction<S>) -> Result<Self> {
        if phi.len() != psi.len() {
            return Err(Error::GridMismatch(format!(
                "phi has {} points, psi has {}",
                phi.len(),
                psi.len()
            )));
        }
        Ok(ProductState { phi, psi })
    }

    pub fn zeros(n: usize) -> Self {
        ProductState { phi: GridFunction::zeros(n), psi: GridFunction::zeros(n) }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// A model state: a single grid function or a (phi, psi) pair.
#[derive(Debug, Clone, PartialEq)]
pub enum State<S: Scalar> {
    Single(GridFunction<S>),
    Pair(ProductState<S>),
}

impl<S: Scalar> State<S> {
    pub fn grid_len(&self) -> usize {
        match self {
            State::Single(g) => g.len(),
            State::Pair(p) => p.len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            State::Single(g) => g.is_finite(),
            State::Pair(p) => p.phi.is_finite() && p.psi.is_finite(),
        }
    }

    pub fn as_single(&self) -> Result<&GridFunction<S>> {
        match self {
            State::Single(g) => Ok(g),
            State::Pair(_) => Err(Error::GridMismatch("expected single-component state".into())),
        }
    }

    pub fn as_pair(&self) -> Result<&ProductState<S>> {
        match self {
            State::Pair(p) => Ok(p),
            State::Single(_) => Err(Error::GridMismatch("expected product state".into())),
        }
    }

    pub fn zero_like(&self) -> Self {
        match self {
            State::Single(g) => State::Single(GridFunction::zeros(g.len())),
            State::Pair(p) => State::Pair(ProductState::zeros(p.len())),
        }
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        match self {
            State::Single(g) => State::Single(g.scaled_re(s)),
            State::Pair(p) => State::Pair(ProductState {
                phi: p.phi.scaled_re(s),
                psi: p.psi.scaled_re(s),
            }),
        }
    }

    /// self + alpha * other
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        match (self, other) {
            (State::Single(a), State::Single(b)) => Ok(State::Single(a.add_scaled(alpha, b)?)),
            (State::Pair(a), State::Pair(b)) => Ok(State::Pair(ProductState {
                phi: a.phi.add_scaled(alpha, &b.phi)?,
                psi: a.psi.add_scaled(alpha, &b.psi)?,
            })),
            _ => Err(Error::GridMismatch("mixed single/product states".into())),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_count_is_one() {
        for n in [1usize, 2, 7, 63, 256] {
            let g = GridFunction::<f64>::zeros(n);
            assert!((g.h() * (n + 1) as f64 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(GridFunction::new(vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(GridFunction::new(Vec::<f64>::new()).is_err());
    }

    #[test]
    fn product_state_requires_equal_lengths() {
        let phi = GridFunction::<f64>::zeros(4);
        let psi = GridFunction::<f64>::zeros(5);
        assert!(ProductState::new(phi, psi).is_err());
    }

    #[test]
    fn state_arithmetic() {
        let a = State::Single(GridFunction::from_fn(5, |x| x));
        let b = State::Single(GridFunction::from_fn(5, |x| 2.0 * x));
        let c = a.add_scaled(0.5, &b).unwrap();
        let g = c.as_single().unwrap();
        for (i, v) in g.values().iter().enumerate() {
            let x = (i + 1) as f64 / 6.0;
            assert!((v - 2.0 * x).abs() < 1e-15);
        }
    }
}
