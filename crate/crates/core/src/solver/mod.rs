//! Numerical solution of the full master equation.
//!
//! The steady state is searched in the smallest subspace of vectorized
//! operators that is invariant under `L` and contains `|g,0⟩⟨g,0|`; for the
//! engines here this holds the populations plus the lasing coherences, about
//! five (three-level) or six (four-level) entries per Fock level instead of
//! `total_dim²`.

mod reduce;
mod wigner;

pub use reduce::{expectation, partial_trace_atom, photon_distribution, TRUNCATION_WARNING};
pub use wigner::{wigner, wigner_at, WignerField, WignerGrid};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::DensityMatrix;
use crate::liouvillian::Liouvillian;
use crate::sparse::CsrMatrix;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest `dt · max_rate` accepted by the integrator.
pub const MAX_STEP_PRODUCT: f64 = 0.1;
/// Acceptance bound on ‖L[ρ]‖∞ for a steady state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SteadyStateMethod {
    /// Direct solve with one balance equation replaced by the trace.
    #[default]
    NullSpace,
    /// Integration from `|g,0⟩⟨g,0|` until the state stops changing.
    TimeEvolution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    pub method: SteadyStateMethod,
    /// Stop time evolution once ‖dρ/dt‖∞ falls below this.
    pub derivative_tol: f64,
    /// Time budget for time evolution, in units of 1/κ.
    pub max_time: f64,
    /// Fixed RK4 step; defaults to 0.09 / max_rate.
    pub dt: Option<f64>,
    /// Reduced problems larger than this skip the dense solve.
    pub dense_limit: usize,
    pub exec: Execution,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            method: SteadyStateMethod::NullSpace,
            derivative_tol: 1e-10,
            max_time: 2000.0,
            dt: None,
            dense_limit: 3000,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub state: DensityMatrix,
    /// ‖L[ρ]‖∞.
    pub residual: f64,
    pub method: SteadyStateMethod,
}

/// Indices of the invariant subspace generated by `|0⟩⟨0|` (vector index 0).
pub fn reachable_subspace(l: &Liouvillian) -> Vec<usize> {
    l.matrix().reachable_from(&[0])
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    steady_state_with(l, &SteadyStateOptions::default())
}

/// Steady state by the requested method. A null-space solve that is too large
/// or misses the residual bound falls back to time evolution.
pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    let subset = reachable_subspace(l);
    let restricted = l.matrix().restrict(&subset);
    if opts.method == SteadyStateMethod::NullSpace {
        if subset.len() <= opts.dense_limit {
            match null_space_solve(l, &subset, &restricted) {
                Ok(r) if r.residual < STEADY_RESIDUAL_TOL => return Ok(r),
                Ok(r) => log::warn!("null-space residual {:e}; falling back to time evolution", r.residual),
                Err(e) => log::warn!("null-space solve failed ({e}); falling back to time evolution"),
            }
        } else {
            log::info!("reduced problem has {} unknowns; using time evolution", subset.len());
        }
    }
    time_evolution_solve(l, &subset, &restricted, opts)
}

fn null_space_solve(l: &Liouvillian, subset: &[usize], restricted: &CsrMatrix) -> Result<SteadyStateResult> {
    let d = l.state_dim();
    let k = subset.len();
    let mut m: DMatrix<C64> = restricted.to_dense();
    // subset[0] == 0 is the |0⟩⟨0| population; its balance row is redundant
    for (col, &idx) in subset.iter().enumerate() {
        m[(0, col)] = if idx / d == idx % d { C64::new(1.0, 0.0) } else { ZERO };
    }
    let mut rhs = DVector::from_element(k, ZERO);
    rhs[0] = C64::new(1.0, 0.0);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("trace-constrained Liouvillian is singular".into()))?;
    finish(l, subset, x.as_slice(), SteadyStateMethod::NullSpace)
}

fn time_evolution_solve(
    l: &Liouvillian,
    subset: &[usize],
    restricted: &CsrMatrix,
    opts: &SteadyStateOptions,
) -> Result<SteadyStateResult> {
    let max_rate = restricted.norm_inf();
    let dt = match opts.dt {
        Some(dt) => check_step(dt, max_rate)?,
        None if max_rate > 0.0 => 0.9 * MAX_STEP_PRODUCT / max_rate,
        None => 1.0,
    };
    let mut x = vec![ZERO; subset.len()];
    x[0] = C64::new(1.0, 0.0);
    let mut rk = Rk4::new(subset.len());
    let max_steps = (opts.max_time / dt).ceil() as usize;
    let mut best = f64::INFINITY;
    let mut deriv = vec![ZERO; subset.len()];
    let mut step = 0;
    loop {
        if step % 100 == 0 {
            restricted.mul_vec_into(&x, &mut deriv, opts.exec);
            let norm = deriv.iter().map(|v| v.norm()).fold(0.0, f64::max);
            best = best.min(norm);
            if norm < opts.derivative_tol {
                break;
            }
        }
        if step >= max_steps {
            return Err(Error::NotConverged { iterations: step, best_residual: best });
        }
        rk.step(restricted, &mut x, dt, opts.exec);
        step += 1;
    }
    let r = finish(l, subset, &x, SteadyStateMethod::TimeEvolution)?;
    if r.residual >= STEADY_RESIDUAL_TOL {
        return Err(Error::NotConverged { iterations: step, best_residual: r.residual });
    }
    Ok(r)
}

fn finish(l: &Liouvillian, subset: &[usize], x: &[C64], method: SteadyStateMethod) -> Result<SteadyStateResult> {
    let d = l.state_dim();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for (&idx, &v) in subset.iter().zip(x) {
        m[(idx / d, idx % d)] = v;
    }
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace();
    if !(tr.re > 0.0) {
        return Err(Error::Degenerate(format!("steady state has trace {tr}")));
    }
    let state = DensityMatrix::from_matrix_unchecked(m / tr);
    let residual = l.residual(&state)?;
    Ok(SteadyStateResult { state, residual, method })
}

fn check_step(dt: f64, max_rate: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be finite and > 0, got {dt}")));
    }
    let product = dt * max_rate;
    if product >= MAX_STEP_PRODUCT {
        return Err(Error::StepTooLarge { product });
    }
    Ok(dt)
}

struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k: std::array::from_fn(|_| vec![ZERO; n]),
            tmp: vec![ZERO; n],
        }
    }

    fn step(&mut self, m: &CsrMatrix, x: &mut [C64], h: f64, exec: Execution) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        m.mul_vec_into(x, k1, exec);
        axpy_into(tmp, x, 0.5 * h, k1);
        m.mul_vec_into(tmp, k2, exec);
        axpy_into(tmp, x, 0.5 * h, k2);
        m.mul_vec_into(tmp, k3, exec);
        axpy_into(tmp, x, h, k3);
        m.mul_vec_into(tmp, k4, exec);
        let c = h / 6.0;
        for i in 0..x.len() {
            x[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn axpy_into(out: &mut [C64], x: &[C64], a: f64, y: &[C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Integrates dρ/dt = L[ρ] with classical RK4 from `rho0` to `t_final`.
/// The step is shortened so that an integer number of steps lands on
/// `t_final`; `dt · max_rate` must stay below [`MAX_STEP_PRODUCT`].
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    evolve_with(l, rho0, t_final, dt, Execution::default())
}

pub fn evolve_with(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, dt: f64, exec: Execution) -> Result<DensityMatrix> {
    if rho0.dim() != l.state_dim() {
        return Err(Error::DimensionMismatch { expected: l.state_dim(), actual: rho0.dim() });
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final", format!("must be finite and >= 0, got {t_final}")));
    }
    check_step(dt, l.max_rate())?;
    let steps = (t_final / dt).ceil() as usize;
    let mut x = rho0.to_vec();
    if steps > 0 {
        let h = t_final / steps as f64;
        let mut rk = Rk4::new(x.len());
        for _ in 0..steps {
            rk.step(l.matrix(), &mut x, h, exec);
        }
    }
    Ok(DensityMatrix::from_vec(l.state_dim(), &x))
}
