//! Tridiagonal operators on the Dirichlet grid: the discrete Laplacian,
//! shifted Thomas solves, and closed-form spectra.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::models::SystemModel;
use crate::rng::Rng;
use crate::scalar::Scalar;
use std::f64::consts::PI;

/// Real tridiagonal operator; `sub` and `sup` have length n-1.
///
/// Complex generators (e.g. i*L for the Schrödinger model) are represented as
/// a complex scalar multiple of a real operator at the call sites that need
/// them; see [`solve_scaled_shifted`].
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagOperator {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagOperator {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::LengthTooSmall { got: 0, min: 1 });
        }
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::GridMismatch(format!(
                "tridiagonal bands: sub {}, diag {}, sup {}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(TridiagOperator { sub, diag, sup })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// Returns (off, diag) when the stencil is constant along the bands.
    pub fn constant_stencil(&self) -> Option<(f64, f64)> {
        let d = self.diag[0];
        if !self.diag.iter().all(|&x| x == d) {
            return None;
        }
        if self.n() == 1 {
            return Some((0.0, d));
        }
        let c = self.sub[0];
        if self.sub.iter().all(|&x| x == c) && self.sup.iter().all(|&x| x == c) {
            Some((c, d))
        } else {
            None
        }
    }

    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        let n = self.n();
        assert_eq!(v.len(), n, "operator size {} vs vector {}", n, v.len());
        (0..n)
            .map(|i| {
                let mut acc = v[i].scale(self.diag[i]);
                if i > 0 {
                    acc = acc + v[i - 1].scale(self.sub[i - 1]);
                }
                if i + 1 < n {
                    acc = acc + v[i + 1].scale(self.sup[i]);
                }
                acc
            })
            .collect()
    }

    pub fn apply_grid<S: Scalar>(&self, f: &GridFunction<S>) -> GridFunction<S> {
        GridFunction::new(self.apply(f.values())).expect("operator produced non-finite values")
    }
}

/// The discrete Dirichlet Laplacian (1/h^2) tridiag(1, -2, 1) on n interior
/// points, h = 1/(n+1).
pub fn dirichlet_laplacian(n: usize) -> Result<TridiagOperator> {
    if n == 0 {
        return Err(Error::LengthTooSmall { got: 0, min: 1 });
    }
    let h = 1.0 / (n + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    TridiagOperator::new(
        vec![inv_h2; n - 1],
        vec![-2.0 * inv_h2; n],
        vec![inv_h2; n - 1],
    )
}

/// Solve (alpha I - beta op) x = rhs by the Thomas algorithm, O(n).
///
/// `beta` scales the real operator into the scalar field, which covers the
/// complex generators i*L and (dt/2)-weighted Crank-Nicolson systems with a
/// single code path.
pub fn solve_scaled_shifted<S: Scalar>(
    alpha: S,
    beta: S,
    op: &TridiagOperator,
    rhs: &[S],
) -> Result<Vec<S>> {
    let n = op.n();
    assert_eq!(rhs.len(), n, "operator size {} vs rhs {}", n, rhs.len());
    let scale = alpha.abs()
        + beta.abs()
            * op.diag
                .iter()
                .chain(&op.sub)
                .chain(&op.sup)
                .fold(0.0f64, |m, &x| m.max(x.abs()));
    let threshold = 1e-14 * scale;

    let main = |i: usize| alpha - beta * S::from_re(op.diag[i]);
    let lower = |i: usize| -(beta * S::from_re(op.sub[i]));
    let upper = |i: usize| -(beta * S::from_re(op.sup[i]));

    let mut c_prime = vec![S::ZERO; n];
    let mut d_prime = vec![S::ZERO; n];

    let mut denom = main(0);
    if denom.abs() <= threshold {
        return Err(Error::NearSingular { pivot: denom.abs(), threshold, row: 0 });
    }
    if n > 1 {
        c_prime[0] = upper(0) / denom;
    }
    d_prime[0] = rhs[0] / denom;

    for i in 1..n {
        denom = main(i) - lower(i - 1) * c_prime[i - 1];
        if denom.abs() <= threshold {
            return Err(Error::NearSingular { pivot: denom.abs(), threshold, row: i });
        }
        if i + 1 < n {
            c_prime[i] = upper(i) / denom;
        }
        d_prime[i] = (rhs[i] - lower(i - 1) * d_prime[i - 1]) / denom;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c_prime[i] * next;
    }
    if !x.iter().all(|v| v.is_finite_value()) {
        return Err(Error::NonFinite("solve_scaled_shifted"));
    }
    Ok(x)
}

/// Solve (alpha I - op) x = rhs.
pub fn solve_shifted<S: Scalar>(
    op: &TridiagOperator,
    alpha: S,
    rhs: &GridFunction<S>,
) -> Result<GridFunction<S>> {
    let x = solve_scaled_shifted(alpha, S::ONE, op, rhs.values())?;
    GridFunction::new(x)
}

/// Eigenvalues (ascending) and optionally the matching eigenvectors,
/// normalized in the h-weighted L2 inner product.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

/// Closed-form spectrum of a constant-stencil symmetric tridiagonal operator:
/// lambda_k = d + 2c cos(k pi h) with eigenvectors sin(k pi x_i). Dense
/// eigensolvers stay in the test suite; non-constant stencils are rejected.
pub fn spectrum(op: &TridiagOperator, n_modes: usize) -> Result<Spectrum> {
    if !op.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    let (c, d) = op.constant_stencil().ok_or(Error::NonUniformStencil)?;
    let n = op.n();
    let h = 1.0 / (n + 1) as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut pairs: Vec<(f64, usize)> = (1..=n)
        .map(|k| (d + 2.0 * c * (k as f64 * PI * h).cos(), k))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(n_modes.min(n));

    let eigenvalues = pairs.iter().map(|&(lam, _)| lam).collect();
    let eigenvectors = pairs
        .iter()
        .map(|&(_, k)| {
            (1..=n)
                .map(|i| sqrt2 * (k as f64 * PI * i as f64 * h).sin())
                .collect()
        })
        .collect();
    Ok(Spectrum { eigenvalues, eigenvectors: Some(eigenvectors) })
}

/// Smallest eigenvalue of -L on n interior points (the discrete Poincare
/// constant is 1/sqrt of this).
pub fn lambda_1(n: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    2.0 / (h * h) * (1.0 - (PI * h).cos())
}

/// Dissipation constant of the model's generator: the supremum of the
/// Rayleigh-type quotient Re<A z, z>_X / |z|_X^2 (self-adjoint path) or
/// Re<L z, z>_X / |z|_X^2 (bounded-part path). All shipped models are
/// diagonalizable on the grid, so the exact value is returned; the sampled
/// maximum is still taken and is guaranteed not to exceed it.
pub fn estimate_w_a<S: Scalar>(model: &SystemModel<S>, samples: usize, rng: &mut Rng) -> f64 {
    let exact = model.exact_w_a();
    let mut sampled = f64::NEG_INFINITY;
    for _ in 0..samples.max(1) {
        let z = crate::sample::random_state(model, rng, 1.0);
        if let Some(q) = model.dissipation_quotient(&z) {
            sampled = sampled.max(q);
        }
    }
    debug_assert!(
        sampled <= exact + 1e-9 * (1.0 + exact.abs()),
        "sampled quotient {sampled} exceeds exact bound {exact}"
    );
    exact
}
