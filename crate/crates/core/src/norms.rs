//! Discrete Sobolev norms and inner products on the Dirichlet grid.
//!
//! The discrete realizations are chosen so that the summation-by-parts
//! identity `|f|_{H10}^2 = <-L f, f>_{L2}` holds exactly (L the discrete
//! Dirichlet Laplacian), and the H^{-1} norm is evaluated in the sine
//! eigenbasis of -L so that the duality `|f|_{H-1} = sup <f,g>/|g|_{H10}`
//! is exact on the grid.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, ProductState, State};
use crate::scalar::Scalar;
use std::f64::consts::PI;

/// Which norm a space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// (h * sum |f_i|^2)^(1/2)
    L2,
    /// Forward differences over the zero-padded vector.
    H10,
    /// L2 norm of the discrete Dirichlet Laplacian applied to f.
    H2capH10,
    /// Norm of (-L)^(-1/2) f via the sine eigenbasis.
    Hminus1,
    /// (|phi|_{H10}^2 + |psi|_{L2}^2)^(1/2) on product states.
    ProductH10xL2,
}

/// Apply the discrete Dirichlet Laplacian stencil (f_{i-1} - 2 f_i + f_{i+1})/h^2
/// with implicit zero boundary values.
pub fn laplacian_apply<S: Scalar>(values: &[S], h: f64) -> Vec<S> {
    let n = values.len();
    let inv_h2 = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            let left = if i > 0 { values[i - 1] } else { S::ZERO };
            let right = if i + 1 < n { values[i + 1] } else { S::ZERO };
            (left - values[i].scale(2.0) + right).scale(inv_h2)
        })
        .collect()
}

pub fn l2_norm<S: Scalar>(f: &GridFunction<S>) -> f64 {
    let h = f.h();
    (h * f.values().iter().map(|v| v.abs_sq()).sum::<f64>()).sqrt()
}

/// <a, b>_{L2} = h * sum a_i conj(b_i); linear in the first argument.
pub fn l2_inner<S: Scalar>(a: &GridFunction<S>, b: &GridFunction<S>) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::ZERO;
    for (&x, &y) in a.values().iter().zip(b.values()) {
        acc = acc + x.mul_conj(y);
    }
    acc.scale(a.h())
}

pub fn h10_norm<S: Scalar>(f: &GridFunction<S>) -> f64 {
    let n = f.len();
    let v = f.values();
    let mut acc = v[0].abs_sq(); // (f_1 - 0)^2
    for i in 0..n - 1 {
        acc += (v[i + 1] - v[i]).abs_sq();
    }
    acc += v[n - 1].abs_sq(); // (0 - f_n)^2
    (acc / f.h()).sqrt()
}

/// <a, b>_{H10}; equals <-L a, b>_{L2} exactly in exact arithmetic.
pub fn h10_inner<S: Scalar>(a: &GridFunction<S>, b: &GridFunction<S>) -> S {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let (va, vb) = (a.values(), b.values());
    let mut acc = va[0].mul_conj(vb[0]);
    for i in 0..n - 1 {
        acc = acc + (va[i + 1] - va[i]).mul_conj(vb[i + 1] - vb[i]);
    }
    acc = acc + va[n - 1].mul_conj(vb[n - 1]);
    acc.scale(1.0 / a.h())
}

pub fn h2h10_norm<S: Scalar>(f: &GridFunction<S>) -> f64 {
    let h = f.h();
    let lap = laplacian_apply(f.values(), h);
    (h * lap.iter().map(|v| v.abs_sq()).sum::<f64>()).sqrt()
}

pub fn product_norm<S: Scalar>(p: &ProductState<S>) -> f64 {
    let a = h10_norm(&p.phi);
    let b = l2_norm(&p.psi);
    (a * a + b * b).sqrt()
}

/// Re(<phi_a, phi_b>_{H10} + <psi_a, psi_b>_{L2})
pub fn product_inner_re<S: Scalar>(a: &ProductState<S>, b: &ProductState<S>) -> f64 {
    h10_inner(&a.phi, &b.phi).re() + l2_inner(&a.psi, &b.psi).re()
}

/// Sine eigenbasis of the negative discrete Dirichlet Laplacian on n interior
/// points: modes phi_k(i) = sqrt(2) sin(k pi x_i) with eigenvalues
/// lambda_k = (2/h^2)(1 - cos(k pi h)), orthonormal in the h-weighted L2
/// inner product.
#[derive(Debug, Clone)]
pub struct SineBasis {
    n: usize,
    h: f64,
    /// k-major, flattened n x n: modes[k*n + i] = sqrt(2) sin((k+1) pi x_{i+1})
    modes: Vec<f64>,
    /// Eigenvalues of -L, ascending in k (all positive).
    eigenvalues: Vec<f64>,
}

impl SineBasis {
    pub fn new(n: usize) -> Self {
        let h = 1.0 / (n + 1) as f64;
        let mut modes = Vec::with_capacity(n * n);
        let sqrt2 = std::f64::consts::SQRT_2;
        for k in 1..=n {
            for i in 1..=n {
                modes.push(sqrt2 * (k as f64 * PI * i as f64 * h).sin());
            }
        }
        let eigenvalues = (1..=n)
            .map(|k| 2.0 / (h * h) * (1.0 - (k as f64 * PI * h).cos()))
            .collect();
        SineBasis { n, h, modes, eigenvalues }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Eigenvalues of -L, positive, increasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Coefficients c_k = h * sum_i f_i phi_k(i).
    pub fn coefficients<S: Scalar>(&self, f: &GridFunction<S>) -> Vec<S> {
        assert_eq!(f.len(), self.n, "basis size mismatch");
        let v = f.values();
        (0..self.n)
            .map(|k| {
                let row = &self.modes[k * self.n..(k + 1) * self.n];
                let mut acc = S::ZERO;
                for (&fi, &mi) in v.iter().zip(row) {
                    acc = acc + fi.scale(mi);
                }
                acc.scale(self.h)
            })
            .collect()
    }

    /// Solve -L g = f exactly in the eigenbasis.
    pub fn solve_poisson<S: Scalar>(&self, f: &GridFunction<S>) -> GridFunction<S> {
        let coeffs = self.coefficients(f);
        let mut out = vec![S::ZERO; self.n];
        for (k, (&c, &lam)) in coeffs.iter().zip(&self.eigenvalues).enumerate() {
            let ck = c.scale(1.0 / lam);
            let row = &self.modes[k * self.n..(k + 1) * self.n];
            for (o, &mi) in out.iter_mut().zip(row) {
                *o = *o + ck.scale(mi);
            }
        }
        GridFunction::new(out).expect("poisson solve produced non-finite values")
    }

    pub fn hminus1_norm<S: Scalar>(&self, f: &GridFunction<S>) -> f64 {
        self.coefficients(f)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &lam)| c.abs_sq() / lam)
            .sum::<f64>()
            .sqrt()
    }

    /// <a, b>_{H-1} = sum c_k(a) conj(c_k(b)) / lambda_k.
    pub fn hminus1_inner<S: Scalar>(&self, a: &GridFunction<S>, b: &GridFunction<S>) -> S {
        let ca = self.coefficients(a);
        let cb = self.coefficients(b);
        let mut acc = S::ZERO;
        for k in 0..self.n {
            acc = acc + ca[k].mul_conj(cb[k]).scale(1.0 / self.eigenvalues[k]);
        }
        acc
    }
}

/// Evaluate `kind` on `f`. For `Hminus1` a sine basis is built on the fly;
/// hot paths should hold a [`SineBasis`] and call [`norm_with_basis`].
pub fn norm<S: Scalar>(f: &State<S>, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Hminus1 => {
            let g = single(f, kind)?;
            check_min_len(g.len(), kind)?;
            Ok(SineBasis::new(g.len()).hminus1_norm(g))
        }
        _ => norm_with_basis(f, kind, None),
    }
}

pub fn norm_with_basis<S: Scalar>(
    f: &State<S>,
    kind: NormKind,
    basis: Option<&SineBasis>,
) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(l2_norm(single(f, kind)?)),
        NormKind::H10 => {
            let g = single(f, kind)?;
            check_min_len(g.len(), kind)?;
            Ok(h10_norm(g))
        }
        NormKind::H2capH10 => {
            let g = single(f, kind)?;
            check_min_len(g.len(), kind)?;
            Ok(h2h10_norm(g))
        }
        NormKind::Hminus1 => {
            let g = single(f, kind)?;
            check_min_len(g.len(), kind)?;
            let basis = basis.ok_or_else(|| {
                Error::InvalidParameter("Hminus1 norm needs a sine basis".into())
            })?;
            Ok(basis.hminus1_norm(g))
        }
        NormKind::ProductH10xL2 => match f {
            State::Pair(p) => {
                check_min_len(p.len(), kind)?;
                Ok(product_norm(p))
            }
            State::Single(_) => {
                Err(Error::NormKindMismatch { kind, state: "single-component state" })
            }
        },
    }
}

fn single<S: Scalar>(f: &State<S>, kind: NormKind) -> Result<&GridFunction<S>> {
    match f {
        State::Single(g) => Ok(g),
        State::Pair(_) => Err(Error::NormKindMismatch { kind, state: "product state" }),
    }
}

fn check_min_len(len: usize, _kind: NormKind) -> Result<()> {
    if len < 2 {
        return Err(Error::LengthTooSmall { got: len, min: 2 });
    }
    Ok(())
}
