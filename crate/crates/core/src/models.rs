//! Concrete system models: Burgers on H¹₀, Burgers on L², Schrödinger on
//! complex H¹₀, and the damped semilinear wave system, plus the direct IMEX
//! closed-loop integrator.
//!
//! Every model is the tuple (A, B1, B2, C, N) together with the three norms
//! (state X, output Y, input U) and its constants. All shipped models have
//! B1 = B2 and C = identity; the spaces differ only through their norms.
//!
//! A 3D incompressible-fluid instance of the same feedback structure (Stokes
//! operator, convective bilinearity behind a divergence-free projection) is
//! deliberately not instantiated on this 1D grid; for reference, its growth
//! bound holds with exponent p = 4/5.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, ProductState, State};
use crate::linsys::Trajectory;
use crate::norms::{
    self, h10_inner, h10_norm, h2h10_norm, l2_inner, l2_norm, product_inner_re, NormKind,
    SineBasis,
};
use crate::operators::{dirichlet_laplacian, lambda_1, solve_scaled_shifted, TridiagOperator};
use crate::scalar::Scalar;
use crate::signal::InputSignal;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    BurgersH1,
    BurgersL2,
    Schrodinger,
    Wave,
}

/// Which structural assumption the stability analysis of a model rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionPath {
    /// A self-adjoint and strictly negative.
    SelfAdjoint,
    /// A = A0 + L with A0 skew-adjoint and L bounded, strictly dissipative.
    BoundedPerturbation,
    /// Neither: certified through the modified energy of the wave system.
    ModifiedEnergy,
}

#[derive(Debug, Clone, Copy)]
pub struct ModelConstants {
    /// Growth-bound constant K of the bilinear estimate
    /// |N(z,y)|_U <= K |z|_X |y|_X^(1-p) |y|_Y^p. Calibrated empirically; the
    /// shipped value carries a 10% safety factor over the sampled maximum so
    /// that fresh samples do not violate the bound.
    pub k_bilinear: Option<f64>,
    /// Exponent p in (0,1) of the growth bound.
    pub p: f64,
    /// Dissipation constant: sup of the Rayleigh quotient of A (or of the
    /// bounded part L). Zero for the wave model, whose damping block is
    /// negative but not strictly negative.
    pub w_a: f64,
    /// Supremum of admissible exponential weights omega. Equals |w_a| where
    /// the quotient is strict; for the wave model it is the spectral abscissa
    /// magnitude 1/2 of the damped generator.
    pub omega_max: f64,
    /// Operator norm of B1* = B2* (as a map X_{1/2} -> U resp. X -> U).
    pub b_adjoint_norm: f64,
    /// |C| in L(X).
    pub c_norm: f64,
    /// |C| as a map X_{1/2} -> Y (resp. X -> Y on the bounded path).
    pub c_half_norm: f64,
}

/// A discrete instantiation of the bilinear feedback system.
#[derive(Debug, Clone)]
pub struct SystemModel<S: Scalar> {
    pub name: &'static str,
    pub kind: ModelKind,
    n: usize,
    h: f64,
    pub x_kind: NormKind,
    pub y_kind: NormKind,
    pub u_kind: NormKind,
    pub constants: ModelConstants,
    /// Generator for single-component models: A = diff_coeff * L + id_coeff * I
    /// with L the Dirichlet Laplacian. Unused for the wave block generator.
    diff_coeff: S,
    id_coeff: S,
    laplacian: TridiagOperator,
    basis: Arc<SineBasis>,
    nonlinearity_active: bool,
    bounded_part_active: bool,
}

/// Burgers on X = H¹₀ with Y = H² ∩ H¹₀, U = L²; N(z,y) = -z dy/dx.
pub fn burgers_h1(n: usize) -> Result<SystemModel<f64>> {
    if n < 4 {
        return Err(Error::LengthTooSmall { got: n, min: 4 });
    }
    let lam1 = lambda_1(n);
    Ok(SystemModel {
        name: "burgers_h1",
        kind: ModelKind::BurgersH1,
        n,
        h: 1.0 / (n + 1) as f64,
        x_kind: NormKind::H10,
        y_kind: NormKind::H2capH10,
        u_kind: NormKind::L2,
        constants: ModelConstants {
            k_bilinear: None,
            p: 0.5,
            w_a: -lam1,
            omega_max: lam1,
            b_adjoint_norm: 1.0,
            c_norm: 1.0,
            c_half_norm: 1.0,
        },
        diff_coeff: 1.0,
        id_coeff: 0.0,
        laplacian: dirichlet_laplacian(n)?,
        basis: Arc::new(SineBasis::new(n)),
        nonlinearity_active: true,
        bounded_part_active: false,
    })
}

/// Burgers on X = L² with Y = H¹₀, U = H⁻¹; the convective feedback is
/// discretized in the energy-conserving split form
/// N(z,y) = -(1/3)(D_c(z y) + z D_c y), which makes <N(z,z), z>_{L2} vanish
/// exactly on the grid.
pub fn burgers_l2(n: usize) -> Result<SystemModel<f64>> {
    if n < 2 {
        return Err(Error::LengthTooSmall { got: n, min: 2 });
    }
    let lam1 = lambda_1(n);
    Ok(SystemModel {
        name: "burgers_l2",
        kind: ModelKind::BurgersL2,
        n,
        h: 1.0 / (n + 1) as f64,
        x_kind: NormKind::L2,
        y_kind: NormKind::H10,
        u_kind: NormKind::Hminus1,
        constants: ModelConstants {
            k_bilinear: None,
            p: 0.75,
            w_a: -lam1,
            omega_max: lam1,
            b_adjoint_norm: 1.0,
            c_norm: 1.0,
            c_half_norm: 1.0,
        },
        diff_coeff: 1.0,
        id_coeff: 0.0,
        laplacian: dirichlet_laplacian(n)?,
        basis: Arc::new(SineBasis::new(n)),
        nonlinearity_active: true,
        bounded_part_active: false,
    })
}

/// Schrödinger on complex H¹₀: A = i L - I, U1 = U2 = Y = X, B = C = I,
/// N(z,y) = z y pointwise.
pub fn schrodinger(n: usize) -> Result<SystemModel<Complex64>> {
    if n < 2 {
        return Err(Error::LengthTooSmall { got: n, min: 2 });
    }
    Ok(SystemModel {
        name: "schrodinger",
        kind: ModelKind::Schrodinger,
        n,
        h: 1.0 / (n + 1) as f64,
        x_kind: NormKind::H10,
        y_kind: NormKind::H10,
        u_kind: NormKind::H10,
        constants: ModelConstants {
            k_bilinear: None,
            p: 0.5,
            w_a: -1.0,
            omega_max: 1.0,
            b_adjoint_norm: 1.0,
            c_norm: 1.0,
            c_half_norm: 1.0,
        },
        diff_coeff: Complex64::new(0.0, 1.0),
        id_coeff: Complex64::new(-1.0, 0.0),
        laplacian: dirichlet_laplacian(n)?,
        basis: Arc::new(SineBasis::new(n)),
        nonlinearity_active: true,
        bounded_part_active: true,
    })
}

/// Damped wave system on X = H¹₀ x L²: first-order state (phi, psi) with
/// phi' = psi, psi' = L phi - psi + u1 + u2, forcing injected into psi, and
/// N((phi1,psi1),(phi2,psi2)) = phi1 phi2 so that the closed loop carries the
/// +phi^2 forcing of the first-order formulation.
pub fn wave(n: usize) -> Result<SystemModel<f64>> {
    if n < 2 {
        return Err(Error::LengthTooSmall { got: n, min: 2 });
    }
    Ok(SystemModel {
        name: "wave",
        kind: ModelKind::Wave,
        n,
        h: 1.0 / (n + 1) as f64,
        x_kind: NormKind::ProductH10xL2,
        y_kind: NormKind::ProductH10xL2,
        u_kind: NormKind::L2,
        constants: ModelConstants {
            k_bilinear: None,
            p: 0.5,
            // The damping block K satisfies Re<Kz,z> = -|psi|^2 <= 0 only;
            // the quotient supremum is attained at psi = 0.
            w_a: 0.0,
            // Each spatial mode contributes eigenvalues s^2 + s + lambda_k = 0
            // with Re s = -1/2 for 4 lambda_k > 1, which holds for every mode.
            omega_max: 0.5,
            b_adjoint_norm: 1.0,
            c_norm: 1.0,
            c_half_norm: 1.0,
        },
        diff_coeff: 1.0,
        id_coeff: 0.0,
        laplacian: dirichlet_laplacian(n)?,
        basis: Arc::new(SineBasis::new(n)),
        nonlinearity_active: true,
        bounded_part_active: true,
    })
}

impl<S: Scalar> SystemModel<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    pub fn laplacian(&self) -> &TridiagOperator {
        &self.laplacian
    }

    pub fn is_product(&self) -> bool {
        self.kind == ModelKind::Wave
    }

    pub fn nonlinearity_active(&self) -> bool {
        self.nonlinearity_active
    }

    pub fn assumption_path(&self) -> AssumptionPath {
        match self.kind {
            ModelKind::BurgersH1 | ModelKind::BurgersL2 => AssumptionPath::SelfAdjoint,
            ModelKind::Schrodinger => AssumptionPath::BoundedPerturbation,
            ModelKind::Wave => AssumptionPath::ModifiedEnergy,
        }
    }

    /// The feedback pairing <N(z,Cz), B2* z> of this model vanishes
    /// identically, so its dissipation inequality holds without a smallness
    /// ball.
    pub fn has_global_cancellation(&self) -> bool {
        self.kind == ModelKind::BurgersL2
    }

    /// Copy with the bilinear feedback switched off (the associated linear
    /// system).
    pub fn linearized(&self) -> Self {
        let mut m = self.clone();
        m.nonlinearity_active = false;
        m
    }

    /// Copy with the bounded generator part removed (Schrödinger without the
    /// -I term; the wave model keeps its damping).
    pub fn without_bounded_part(&self) -> Self {
        let mut m = self.clone();
        if m.kind == ModelKind::Schrodinger {
            m.bounded_part_active = false;
            m.id_coeff = S::ZERO;
            m.constants.w_a = 0.0;
            m.constants.omega_max = 0.0;
        }
        m
    }

    pub fn zero_state(&self) -> State<S> {
        if self.is_product() {
            State::Pair(ProductState::zeros(self.n))
        } else {
            State::Single(GridFunction::zeros(self.n))
        }
    }

    /// First discrete sine mode(s) as an initial state; for the wave model the
    /// position component carries the mode and the velocity starts at rest.
    pub fn eigenmode_state(&self, k: usize) -> State<S> {
        let mode = GridFunction::sine_mode(self.n, k);
        if self.is_product() {
            State::Pair(ProductState { phi: mode, psi: GridFunction::zeros(self.n) })
        } else {
            State::Single(mode)
        }
    }

    pub fn x_norm(&self, z: &State<S>) -> f64 {
        norms::norm_with_basis(z, self.x_kind, Some(&self.basis)).expect("state/model mismatch")
    }

    pub fn y_norm(&self, y: &State<S>) -> f64 {
        norms::norm_with_basis(y, self.y_kind, Some(&self.basis)).expect("state/model mismatch")
    }

    pub fn u_norm(&self, u: &GridFunction<S>) -> f64 {
        match self.u_kind {
            NormKind::L2 => l2_norm(u),
            NormKind::H10 => h10_norm(u),
            NormKind::Hminus1 => self.basis.hminus1_norm(u),
            NormKind::H2capH10 => h2h10_norm(u),
            NormKind::ProductH10xL2 => unreachable!("inputs are single grid functions"),
        }
    }

    /// Re <a, b>_X.
    pub fn x_inner_re(&self, a: &State<S>, b: &State<S>) -> f64 {
        match (self.x_kind, a, b) {
            (NormKind::L2, State::Single(a), State::Single(b)) => l2_inner(a, b).re(),
            (NormKind::H10, State::Single(a), State::Single(b)) => h10_inner(a, b).re(),
            (NormKind::ProductH10xL2, State::Pair(a), State::Pair(b)) => product_inner_re(a, b),
            _ => panic!("state/model mismatch in x_inner_re"),
        }
    }

    /// <a, b>_U for U-valued grid functions.
    pub fn u_inner(&self, a: &GridFunction<S>, b: &GridFunction<S>) -> S {
        match self.u_kind {
            NormKind::L2 => l2_inner(a, b),
            NormKind::H10 => h10_inner(a, b),
            NormKind::Hminus1 => self.basis.hminus1_inner(a, b),
            _ => unreachable!("inputs are single grid functions"),
        }
    }

    /// B1 u = B2 u: identity injection, into the velocity component for the
    /// wave model.
    pub fn inject_input(&self, u: &GridFunction<S>) -> State<S> {
        assert_eq!(u.len(), self.n, "input grid mismatch");
        if self.is_product() {
            State::Pair(ProductState { phi: GridFunction::zeros(self.n), psi: u.clone() })
        } else {
            State::Single(u.clone())
        }
    }

    /// B1* z = B2* z with respect to the X- and U-inner products:
    /// -L z for the Burgers pair, the identity for Schrödinger, and the
    /// velocity component for the wave model.
    pub fn b_adjoint(&self, z: &State<S>) -> GridFunction<S> {
        match self.kind {
            ModelKind::BurgersH1 | ModelKind::BurgersL2 => {
                let g = z.as_single().expect("single state");
                self.laplacian.apply_grid(g).scaled_re(-1.0)
            }
            ModelKind::Schrodinger => z.as_single().expect("single state").clone(),
            ModelKind::Wave => z.as_pair().expect("product state").psi.clone(),
        }
    }

    /// Apply the full generator A (including any bounded part).
    pub fn apply_generator(&self, z: &State<S>) -> State<S> {
        match z {
            State::Single(g) => {
                let lap = self.laplacian.apply_grid(g);
                let vals = lap
                    .values()
                    .iter()
                    .zip(g.values())
                    .map(|(&lv, &gv)| lv * self.diff_coeff + gv * self.id_coeff)
                    .collect();
                State::Single(GridFunction::new(vals).expect("generator blow-up"))
            }
            State::Pair(p) => {
                let lap_phi = self.laplacian.apply_grid(&p.phi);
                let psi_dot = lap_phi.sub(&p.psi).expect("grid mismatch");
                State::Pair(ProductState { phi: p.psi.clone(), psi: psi_dot })
            }
        }
    }

    /// Rayleigh-type quotient feeding the dissipation constant: Re<Az,z>/|z|^2
    /// on the self-adjoint path, Re<Lz,z>/|z|^2 on the bounded paths. None for
    /// the zero state.
    pub fn dissipation_quotient(&self, z: &State<S>) -> Option<f64> {
        let nx = self.x_norm(z);
        if nx == 0.0 {
            return None;
        }
        let num = match self.kind {
            ModelKind::BurgersH1 | ModelKind::BurgersL2 => {
                self.x_inner_re(&self.apply_generator(z), z)
            }
            ModelKind::Schrodinger => {
                if self.bounded_part_active {
                    // L = -I
                    -self.x_norm(z).powi(2)
                } else {
                    0.0
                }
            }
            ModelKind::Wave => {
                // K = diag(0, -I): Re<Kz,z>_X = -|psi|^2
                let p = z.as_pair().expect("product state");
                -l2_norm(&p.psi).powi(2)
            }
        };
        Some(num / (nx * nx))
    }

    /// Exact dissipation constant (all shipped generators diagonalize on the
    /// grid).
    pub fn exact_w_a(&self) -> f64 {
        self.constants.w_a
    }

    /// The bilinear feedback map N: X x Y -> U2. A linearized model is the
    /// N = 0 double: its map returns zero for every argument.
    pub fn eval_n(&self, z: &State<S>, y: &State<S>) -> GridFunction<S> {
        if !self.nonlinearity_active {
            return GridFunction::zeros(self.n);
        }
        match self.kind {
            ModelKind::BurgersH1 => {
                let (z, y) = (z.as_single().unwrap(), y.as_single().unwrap());
                let dy = central_difference(y);
                let vals = z
                    .values()
                    .iter()
                    .zip(dy.values())
                    .map(|(&zi, &di)| -(zi * di))
                    .collect();
                GridFunction::new(vals).expect("N(z,y) non-finite")
            }
            ModelKind::BurgersL2 => {
                let (z, y) = (z.as_single().unwrap(), y.as_single().unwrap());
                let zy = GridFunction::new(
                    z.values().iter().zip(y.values()).map(|(&a, &b)| a * b).collect(),
                )
                .expect("product non-finite");
                let d_zy = central_difference(&zy);
                let dy = central_difference(y);
                let vals = d_zy
                    .values()
                    .iter()
                    .zip(z.values().iter().zip(dy.values()))
                    .map(|(&dzy, (&zi, &dyi))| -(dzy + zi * dyi).scale(1.0 / 3.0))
                    .collect();
                GridFunction::new(vals).expect("N(z,y) non-finite")
            }
            ModelKind::Schrodinger => {
                let (z, y) = (z.as_single().unwrap(), y.as_single().unwrap());
                let vals = z.values().iter().zip(y.values()).map(|(&a, &b)| a * b).collect();
                GridFunction::new(vals).expect("N(z,y) non-finite")
            }
            ModelKind::Wave => {
                let (z, y) = (z.as_pair().unwrap(), y.as_pair().unwrap());
                let vals = z
                    .phi
                    .values()
                    .iter()
                    .zip(y.phi.values())
                    .map(|(&a, &b)| a * b)
                    .collect();
                GridFunction::new(vals).expect("N(z,y) non-finite")
            }
        }
    }

    /// <N(z, Cz), B2* z>_{U2}; the quantity bounded by the dissipation
    /// inequality. C is the identity for every shipped model.
    pub fn feedback_pairing(&self, z: &State<S>) -> S {
        let n_val = self.eval_n(z, z);
        let b2 = self.b_adjoint(z);
        self.u_inner(&n_val, &b2)
    }

    /// One implicit step of the omega-shifted generator:
    /// (I - dt (A + omega I)) z' = z + dt f  (implicit Euler), or the
    /// trapezoidal split on A + omega I with the same explicit forcing
    /// (Crank-Nicolson). The wave block system is reduced to a single
    /// tridiagonal solve in the velocity component.
    pub fn step(
        &self,
        scheme: Scheme,
        dt: f64,
        omega: f64,
        z: &State<S>,
        forcing: &State<S>,
    ) -> Result<State<S>> {
        match z {
            State::Single(g) => {
                let f = forcing.as_single()?;
                let shifted_id = self.id_coeff + S::from_re(omega);
                let (alpha, beta, rhs) = match scheme {
                    Scheme::ImplicitEuler => {
                        let alpha = S::ONE - shifted_id.scale(dt);
                        let beta = self.diff_coeff.scale(dt);
                        let rhs: Vec<S> = g
                            .values()
                            .iter()
                            .zip(f.values())
                            .map(|(&zi, &fi)| zi + fi.scale(dt))
                            .collect();
                        (alpha, beta, rhs)
                    }
                    Scheme::CrankNicolson => {
                        let k = 0.5 * dt;
                        let alpha = S::ONE - shifted_id.scale(k);
                        let beta = self.diff_coeff.scale(k);
                        let lap = self.laplacian.apply(g.values());
                        let rhs: Vec<S> = g
                            .values()
                            .iter()
                            .zip(lap.iter().zip(f.values()))
                            .map(|(&zi, (&li, &fi))| {
                                zi + (li * self.diff_coeff + zi * shifted_id).scale(k)
                                    + fi.scale(dt)
                            })
                            .collect();
                        (alpha, beta, rhs)
                    }
                };
                let x = solve_scaled_shifted(alpha, beta, &self.laplacian, &rhs)?;
                Ok(State::Single(GridFunction::new(x)?))
            }
            State::Pair(p) => {
                let f = forcing.as_pair()?;
                let k = match scheme {
                    Scheme::ImplicitEuler => dt,
                    Scheme::CrankNicolson => 0.5 * dt,
                };
                let a = 1.0 - k * omega;
                if a <= 0.0 {
                    return Err(Error::ShiftDestabilizes { omega, margin: a });
                }
                let (r_phi, r_psi): (GridFunction<S>, GridFunction<S>) = match scheme {
                    Scheme::ImplicitEuler => {
                        (p.phi.add_scaled(dt, &f.phi)?, p.psi.add_scaled(dt, &f.psi)?)
                    }
                    Scheme::CrankNicolson => {
                        // r = (I + k (A + omega I)) z + dt f
                        let lap_phi = self.laplacian.apply_grid(&p.phi);
                        let r_phi = p
                            .phi
                            .scaled_re(1.0 + k * omega)
                            .add_scaled(k, &p.psi)?
                            .add_scaled(dt, &f.phi)?;
                        let r_psi = lap_phi
                            .scaled_re(k)
                            .add_scaled(1.0 + k * omega - k, &p.psi)?
                            .add_scaled(dt, &f.psi)?;
                        (r_phi, r_psi)
                    }
                };
                // Eliminate phi': [ (a+k) I - (k^2/a) L ] psi' = r_psi + (k/a) L r_phi
                let lap_r_phi = self.laplacian.apply_grid(&r_phi);
                let rhs = r_psi.add_scaled(k / a, &lap_r_phi)?;
                let psi_next = solve_scaled_shifted(
                    S::from_re(a + k),
                    S::from_re(k * k / a),
                    &self.laplacian,
                    rhs.values(),
                )?;
                let psi_next = GridFunction::new(psi_next)?;
                let phi_next = r_phi.add_scaled(k, &psi_next)?.scaled_re(1.0 / a);
                Ok(State::Pair(ProductState { phi: phi_next, psi: psi_next }))
            }
        }
    }

    /// Calibrate the bilinear constant K: empirical maximum of the growth
    /// ratio over `samples` pairs, inflated by 10% so that independently drawn
    /// verification samples stay below the bound.
    pub fn calibrate_bilinear_constant(&mut self, samples: usize, rng: &mut crate::rng::Rng) {
        let raw = crate::certify::estimate_bilinear_k(self, self.constants.p, samples, rng);
        self.constants.k_bilinear = Some(1.1 * raw);
    }

    pub fn bilinear_constant(&self) -> Result<f64> {
        self.constants.k_bilinear.ok_or_else(|| {
            Error::InvalidParameter("bilinear constant not calibrated".into())
        })
    }
}

/// Time-stepping scheme for the implicit linear part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

/// Central difference with implicit zero boundary values:
/// (D_c y)_i = (y_{i+1} - y_{i-1}) / (2h).
pub fn central_difference<S: Scalar>(y: &GridFunction<S>) -> GridFunction<S> {
    let n = y.len();
    let v = y.values();
    let half_inv_h = 0.5 / y.h();
    let vals = (0..n)
        .map(|i| {
            let left = if i > 0 { v[i - 1] } else { S::ZERO };
            let right = if i + 1 < n { v[i + 1] } else { S::ZERO };
            (right - left).scale(half_inv_h)
        })
        .collect();
    GridFunction::new(vals).expect("central difference non-finite")
}

/// Direct closed-loop integration with the linearly implicit IMEX step
/// z_{j+1} = (I - dt A)^{-1} (z_j + dt (B1 u1_j + B2 N(z_j, C z_j))).
///
/// Blow-up is data, not failure: when the state norm exceeds 10^6 times the
/// initial data scale the trajectory is returned truncated with the step
/// index recorded.
pub fn simulate_semilinear<S: Scalar>(
    model: &SystemModel<S>,
    z0: &State<S>,
    u1: Option<&InputSignal<S>>,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory<S>> {
    crate::linsys::check_signal(model, u1, t_final, dt)?;
    let steps = crate::linsys::step_count(t_final, dt);

    let data_scale = {
        let mut s = model.x_norm(z0);
        if let Some(u) = u1 {
            for sample in u.samples() {
                s = s.max(model.u_norm(sample));
            }
        }
        s.max(1e-14)
    };
    let threshold = 1e6 * data_scale;

    let mut traj = Trajectory::with_capacity(dt, steps + 1);
    let mut z = z0.clone();
    traj.push(model, z.clone());

    for j in 0..steps {
        let mut forcing = model.zero_state();
        if let Some(u) = u1 {
            forcing = forcing.add_scaled(1.0, &model.inject_input(u.sample(j)))?;
        }
        if model.nonlinearity_active() {
            let n_val = model.eval_n(&z, &z);
            forcing = forcing.add_scaled(1.0, &model.inject_input(&n_val))?;
        }
        let next = model.step(Scheme::ImplicitEuler, dt, 0.0, &z, &forcing)?;
        if !next.is_finite() {
            traj.mark_blowup(j + 1);
            return Ok(traj);
        }
        let nx = model.x_norm(&next);
        traj.push(model, next.clone());
        if nx > threshold {
            traj.mark_blowup(j + 1);
            return Ok(traj);
        }
        z = next;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn burgers_h1_hand_stencil() {
        // z = (1,1,1), y = x(1-x) on n = 3, h = 1/4:
        // D_c y = (1/2, 0, -1/2), N = -z .* D_c y = (-1/2, 0, 1/2)
        let m = burgers_h1(4).unwrap(); // constructor floor is 4; build case by hand below
        let _ = m;
        let y = GridFunction::<f64>::from_fn(3, |x| x * (1.0 - x));
        let dy = central_difference(&y);
        let expect = [0.5, 0.0, -0.5];
        for (a, b) in dy.values().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn burgers_h1_n_against_hand_expansion() {
        let m = burgers_h1(4).unwrap();
        let z = State::Single(GridFunction::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap());
        let y_g = GridFunction::<f64>::from_fn(4, |x| x * (1.0 - x));
        let y = State::Single(y_g.clone());
        let n_val = m.eval_n(&z, &y);
        let dy = central_difference(&y_g);
        for (got, d) in n_val.values().iter().zip(dy.values()) {
            assert!((got + d).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_zero_arguments() {
        let m = burgers_h1(8).unwrap();
        let z = m.zero_state();
        let y = State::Single(GridFunction::from_fn(8, |x| x));
        assert!(m.eval_n(&z, &y).values().iter().all(|&v| v == 0.0));
        assert!(m.eval_n(&y, &z).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn burgers_l2_exact_cancellation() {
        let m = burgers_l2(64).unwrap();
        let mut rng = Rng::new(17);
        for _ in 0..1000 {
            let z = crate::sample::random_state(&m, &mut rng, 1.0);
            let g = z.as_single().unwrap();
            let n_val = m.eval_n(&z, &z);
            let pairing = l2_inner(&n_val, g).abs();
            let cube = l2_norm(g).powi(3);
            assert!(pairing <= 1e-12 * cube.max(1e-30), "pairing {pairing} vs {cube}");
        }
    }

    #[test]
    fn burgers_l2_split_form_matches_expansion() {
        // brute-force expansion of -(1/3)[D_c(zy) + z D_c y] at n = 4
        let m = burgers_l2(4).unwrap();
        let z_vals = [2.0, -1.0, 3.0, 1.0];
        let y_vals = [1.0, 4.0, -2.0, 2.0];
        let h = 0.2;
        let z = State::Single(GridFunction::new(z_vals.to_vec()).unwrap());
        let y = State::Single(GridFunction::new(y_vals.to_vec()).unwrap());
        let got = m.eval_n(&z, &y);
        let pad = |v: &[f64], i: i64| -> f64 {
            if (0..4).contains(&i) {
                v[i as usize]
            } else {
                0.0
            }
        };
        for i in 0..4i64 {
            let d_zy = (pad(&z_vals, i + 1) * pad(&y_vals, i + 1)
                - pad(&z_vals, i - 1) * pad(&y_vals, i - 1))
                / (2.0 * h);
            let d_y = (pad(&y_vals, i + 1) - pad(&y_vals, i - 1)) / (2.0 * h);
            let want = -(d_zy + z_vals[i as usize] * d_y) / 3.0;
            assert!((got.values()[i as usize] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn schrodinger_skew_part_is_energy_neutral() {
        let m = schrodinger(32).unwrap().without_bounded_part();
        let mut rng = Rng::new(4);
        for _ in 0..50 {
            let z = crate::sample::random_state(&m, &mut rng, 1.0);
            let az = m.apply_generator(&z);
            let re = m.x_inner_re(&az, &z);
            let scale = m.x_norm(&z) * m.x_norm(&az);
            assert!(re.abs() <= 1e-12 * scale.max(1e-30), "Re<A0 z, z> = {re}");
        }
    }

    #[test]
    fn schrodinger_pointwise_product() {
        let n = 5;
        let m = schrodinger(n).unwrap();
        let mut e1 = vec![Complex64::new(0.0, 0.0); n];
        e1[0] = Complex64::new(1.0, 1.0);
        let mut e1b = vec![Complex64::new(0.0, 0.0); n];
        e1b[0] = Complex64::new(1.0, -1.0);
        let z = State::Single(GridFunction::new(e1).unwrap());
        let y = State::Single(GridFunction::new(e1b).unwrap());
        let prod = m.eval_n(&z, &y);
        assert!((prod.values()[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(prod.values()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn schrodinger_w_a_is_minus_one() {
        let m = schrodinger(16).unwrap();
        assert_eq!(m.exact_w_a(), -1.0);
        let mut rng = Rng::new(2);
        let z = crate::sample::random_state(&m, &mut rng, 1.0);
        let q = m.dissipation_quotient(&z).unwrap();
        assert!((q + 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_block_generator() {
        let n = 16;
        let m = wave(n).unwrap();
        let phi = GridFunction::<f64>::sine_mode(n, 2);
        let z = State::Pair(ProductState { phi: phi.clone(), psi: GridFunction::zeros(n) });
        let az = m.apply_generator(&z);
        let p = az.as_pair().unwrap();
        assert!(p.phi.values().iter().all(|&v| v == 0.0));
        let lap = m.laplacian().apply_grid(&phi);
        for (a, b) in p.psi.values().iter().zip(lap.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wave_damping_quotient_nonpositive() {
        let m = wave(12).unwrap();
        let mut rng = Rng::new(6);
        for _ in 0..50 {
            let z = crate::sample::random_state(&m, &mut rng, 1.0);
            let q = m.dissipation_quotient(&z).unwrap();
            assert!(q <= 1e-15);
            let p = z.as_pair().unwrap();
            let want = -l2_norm(&p.psi).powi(2) / m.x_norm(&z).powi(2);
            assert!((q - want).abs() < 1e-12);
        }
        // attains zero at psi = 0
        let z = m.eigenmode_state(1);
        assert_eq!(m.dissipation_quotient(&z).unwrap(), 0.0);
    }

    #[test]
    fn wave_nonlinearity_zero_position() {
        let n = 8;
        let m = wave(n).unwrap();
        let z = State::Pair(ProductState {
            phi: GridFunction::zeros(n),
            psi: GridFunction::from_fn(n, |x| x),
        });
        let y = m.eigenmode_state(1);
        assert!(m.eval_n(&z, &y).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_identity_all_models() {
        // <B u, z>_X = <u, B* z>_U, exactly on the grid
        let mut rng = Rng::new(33);
        let n = 24;

        let real_models = [burgers_h1(n).unwrap(), burgers_l2(n).unwrap(), wave(n).unwrap()];
        for m in &real_models {
            for _ in 0..20 {
                let u = crate::sample::random_grid::<f64>(n, &mut rng, true);
                let z = crate::sample::random_state(m, &mut rng, 1.0);
                let lhs = m.x_inner_re(&m.inject_input(&u), &z);
                let rhs = m.u_inner(&u, &m.b_adjoint(&z)).re();
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs()).max(1e-12),
                    "{}: {lhs} vs {rhs}",
                    m.name
                );
            }
        }

        let m = schrodinger(n).unwrap();
        for _ in 0..20 {
            let u = crate::sample::random_grid::<Complex64>(n, &mut rng, true);
            let z = crate::sample::random_state(&m, &mut rng, 1.0);
            let lhs = m.x_inner_re(&m.inject_input(&u), &z);
            let rhs = m.u_inner(&u, &m.b_adjoint(&z)).re();
            assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs()).max(1e-12));
        }
    }

    #[test]
    fn semilinear_zero_data_stays_zero() {
        let m = burgers_l2(16).unwrap();
        let traj = simulate_semilinear(&m, &m.zero_state(), None, 0.5, 0.01).unwrap();
        assert!(traj.x_norms.iter().all(|&v| v == 0.0));
        assert!(traj.blowup_step.is_none());
    }

    #[test]
    fn burgers_l2_moderate_data_decays_monotonically() {
        let m = burgers_l2(64).unwrap();
        let z0 = State::Single(GridFunction::<f64>::sine_mode(64, 1));
        let traj = simulate_semilinear(&m, &z0, None, 2.0, 1e-3).unwrap();
        assert!(traj.blowup_step.is_none());
        for w in traj.x_norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn blowup_reported_not_crashed() {
        // Burgers H1 with large data blows up in finite time under the +N loop
        let n = 48;
        let m = burgers_h1(n).unwrap();
        let z0 = State::Single(GridFunction::<f64>::sine_mode(n, 1).scaled_re(-500.0));
        let traj = simulate_semilinear(&m, &z0, None, 5.0, 1e-3).unwrap();
        if let Some(step) = traj.blowup_step {
            assert!(step > 0);
            assert_eq!(traj.states.len(), traj.x_norms.len());
        }
        // either blows up or at least grows strongly beyond the linear decay
        let grew = traj.blowup_step.is_some()
            || traj.x_norms.iter().cloned().fold(0.0f64, f64::max)
                > 2.0 * traj.x_norms[0];
        assert!(grew, "expected nonlinear growth for oversized data");
    }
}
