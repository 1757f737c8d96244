//! Lindblad master equation as a sparse superoperator.
//!
//! In the interaction picture at exact resonance
//!
//! ```text
//! dρ/dt = i[ρ, V] + Σ_k r_k (L_k ρ L_k† − ½{L_k† L_k, ρ}),   V = g(σ⁺a + σ⁻a†)
//! ```
//!
//! The density matrix is vectorized row-major (`ρ[i, j]` at `i * d + j`), so
//! `(Xρ)` contributes `X[i, k]` at `(i·d + j, k·d + j)` and `(ρY)` contributes
//! `Y[k, j]` at `(i·d + j, i·d + k)`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{build_atom_operators, build_cavity_operators, DensityMatrix, HilbertSpace, Operator};
use crate::models::{EngineKind, EngineModel};
use crate::sparse::CsrMatrix;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Dissipator {
    jump: Operator,
    rate: f64,
}

impl Dissipator {
    pub fn new(jump: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("rate", format!("must be finite and >= 0, got {rate}")));
        }
        Ok(Dissipator { jump, rate })
    }

    pub fn jump(&self) -> &Operator {
        &self.jump
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Schrödinger-picture action on a dense matrix.
    pub fn apply(&self, rho: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
        let l = self.jump.matrix();
        let ldl = l.adjoint() * l;
        let half = C64::new(0.5, 0.0);
        (l * rho * l.adjoint() - (&ldl * rho + rho * &ldl) * half) * C64::new(self.rate, 0.0)
    }

    /// Heisenberg-picture (adjoint) action `r (L† X L − ½{L†L, X})`.
    pub fn apply_adjoint(&self, x: &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
        let l = self.jump.matrix();
        let ldl = l.adjoint() * l;
        let half = C64::new(0.5, 0.0);
        (l.adjoint() * x * l - (&ldl * x + x * &ldl) * half) * C64::new(self.rate, 0.0)
    }
}

/// Generator `L` with `d vec(ρ)/dt = L vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    state_dim: usize,
    matrix: CsrMatrix,
}

impl Liouvillian {
    /// Assembles `i[ρ, H] + Σ D_k[ρ]` for a Hermitian coupling `H`.
    pub fn from_parts(hamiltonian: &Operator, dissipators: &[Dissipator]) -> Result<Self> {
        let d = hamiltonian.dim();
        for diss in dissipators {
            if diss.jump.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: diss.jump.dim(),
                });
            }
        }
        let i = C64::new(0.0, 1.0);
        let mut triplets = Vec::new();
        let h_nz = hamiltonian.nonzeros();
        push_left(&mut triplets, d, &h_nz, -i);
        push_right(&mut triplets, d, &h_nz, i);

        for diss in dissipators.iter().filter(|x| x.rate > 0.0) {
            let r = C64::new(diss.rate, 0.0);
            let l_nz = diss.jump.nonzeros();
            for &(a, k, c1) in &l_nz {
                for &(b, l, c2) in &l_nz {
                    triplets.push((a * d + b, k * d + l, r * c1 * c2.conj()));
                }
            }
            let ldl = &diss.jump.adjoint() * &diss.jump;
            let n_nz = ldl.nonzeros();
            push_left(&mut triplets, d, &n_nz, -0.5 * r);
            push_right(&mut triplets, d, &n_nz, -0.5 * r);
        }

        Ok(Liouvillian {
            state_dim: d,
            matrix: CsrMatrix::from_triplets(d * d, d * d, triplets),
        })
    }

    /// Wraps an already assembled superoperator.
    pub fn from_csr(state_dim: usize, matrix: CsrMatrix) -> Result<Self> {
        if matrix.nrows() != state_dim * state_dim || matrix.ncols() != state_dim * state_dim {
            return Err(Error::DimensionMismatch {
                expected: state_dim * state_dim,
                actual: matrix.nrows(),
            });
        }
        Ok(Liouvillian { state_dim, matrix })
    }

    /// Dimension of the density matrices it acts on.
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Superoperator dimension, `state_dim²`.
    pub fn dim(&self) -> usize {
        self.state_dim * self.state_dim
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Upper bound on the magnitude of any eigenvalue.
    pub fn max_rate(&self) -> f64 {
        self.matrix.norm_inf()
    }

    pub fn apply_vec(&self, v: &[C64], exec: Execution) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.matrix.mul_vec_into(v, &mut out, exec);
        out
    }

    /// `L[ρ]` as a (not normalized) matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<nalgebra::DMatrix<C64>> {
        if rho.dim() != self.state_dim {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim,
                actual: rho.dim(),
            });
        }
        let out = self.apply_vec(&rho.to_vec(), Execution::default());
        Ok(nalgebra::DMatrix::from_row_slice(self.state_dim, self.state_dim, &out))
    }

    /// ∞-norm of `L[ρ]`.
    pub fn residual(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.apply(rho)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

fn push_left(t: &mut Vec<(usize, usize, C64)>, d: usize, nz: &[(usize, usize, C64)], s: C64) {
    for &(i, k, v) in nz {
        for j in 0..d {
            t.push((i * d + j, k * d + j, s * v));
        }
    }
}

fn push_right(t: &mut Vec<(usize, usize, C64)>, d: usize, nz: &[(usize, usize, C64)], s: C64) {
    for &(k, j, v) in nz {
        for i in 0..d {
            t.push((i * d + j, i * d + k, s * v));
        }
    }
}

/// Jaynes–Cummings coupling `V = g(σ⁺a + σ⁻a†)`.
pub fn coupling(model: &EngineModel, space: &HilbertSpace) -> Operator {
    let (a, a_dag) = build_cavity_operators(space);
    let ops = build_atom_operators(space);
    let sigma_plus = ops.sigma_plus();
    let v = &(&sigma_plus * &a) + &(&ops.sigma_minus * &a_dag);
    v.scale(C64::new(model.g(), 0.0))
}

/// Bath and cavity jump channels of the engine.
pub fn dissipators(model: &EngineModel, space: &HilbertSpace) -> Result<Vec<Dissipator>> {
    let (a, _) = build_cavity_operators(space);
    let ops = build_atom_operators(space);
    let mut out = vec![
        Dissipator::new(ops.tau_h_plus(), model.hot().up_rate())?,
        Dissipator::new(ops.tau_h_minus.clone(), model.hot().down_rate())?,
        Dissipator::new(ops.tau_c_plus(), model.cold().up_rate())?,
        Dissipator::new(ops.tau_c_minus.clone(), model.cold().down_rate())?,
    ];
    if let Some(anc) = model.ancilla() {
        let tau_a = ops.tau_a_minus()?;
        out.push(Dissipator::new(tau_a.adjoint(), anc.up_rate())?);
        out.push(Dissipator::new(tau_a.clone(), anc.down_rate())?);
    }
    out.push(Dissipator::new(a, model.kappa())?);
    Ok(out)
}

/// Full master-equation generator for `model` on `space`.
pub fn build_liouvillian(model: &EngineModel, space: &HilbertSpace) -> Result<Liouvillian> {
    let expected = model.kind().atom_dim();
    if space.atom_dim() != expected {
        return Err(Error::ModelMismatch(format!(
            "{:?} model needs a {expected}-level space, got {}",
            model.kind(),
            space.atom_dim()
        )));
    }
    debug_assert!(model.kind() == EngineKind::ThreeLevel || model.ancilla().is_some());
    let v = coupling(model, space);
    Liouvillian::from_parts(&v, &dissipators(model, space)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::AtomLevel;
    use crate::models::{presets, BathSpec};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = &m * m.adjoint();
        let tr = h.trace();
        DensityMatrix::from_matrix_unchecked(h / tr)
    }

    fn dense_rhs(model: &EngineModel, space: &HilbertSpace, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let v = coupling(model, space);
        let i = C64::new(0.0, 1.0);
        let mut out = (rho * v.matrix() - v.matrix() * rho) * i;
        for d in dissipators(model, space).unwrap() {
            out += d.apply(rho);
        }
        out
    }

    #[test]
    fn sparse_matches_dense_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in [presets::three_level_reference(0.8), presets::four_level_reference(0.3)] {
            let space = HilbertSpace::with_n_max(model.kind().atom_dim(), 4).unwrap();
            let l = build_liouvillian(&model, &space).unwrap();
            let rho = random_state(space.total_dim(), &mut rng);
            let diff = l.apply(&rho).unwrap() - dense_rhs(&model, &space, rho.matrix());
            assert!(diff.iter().all(|v| v.norm() < 1e-11));
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = presets::three_level_reference(1.3);
        let space = HilbertSpace::with_n_max(3, 6).unwrap();
        let l = build_liouvillian(&model, &space).unwrap();
        for _ in 0..100 {
            let rho = random_state(space.total_dim(), &mut rng);
            let out = l.apply(&rho).unwrap();
            assert!(out.trace().norm() < 1e-10);
            let herm = DensityMatrix::from_matrix_unchecked(out).hermiticity_error();
            assert!(herm < 1e-12, "{herm}");
        }
    }

    #[test]
    fn adjoint_dissipator_kills_identity() {
        let model = presets::four_level_reference(2.0);
        let space = HilbertSpace::with_n_max(4, 5).unwrap();
        let id = DMatrix::identity(space.total_dim(), space.total_dim());
        for d in dissipators(&model, &space).unwrap() {
            assert!(d.apply_adjoint(&id).iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn pure_decay_fixes_ground_vacuum() {
        let zero = BathSpec::new(32.0, 0.0).unwrap();
        let model = EngineModel::three_level(zero, zero, 0.0, 1.0).unwrap();
        let space = HilbertSpace::with_n_max(3, 5).unwrap();
        let l = build_liouvillian(&model, &space).unwrap();
        let ground = DensityMatrix::ground(&space);
        assert_eq!(l.residual(&ground).unwrap(), 0.0);
        let excited = DensityMatrix::basis_state(&space, AtomLevel::E2, 3).unwrap();
        assert!(l.residual(&excited).unwrap() > 1.0);
    }

    #[test]
    fn rejects_mismatches() {
        let model = presets::three_level_reference(1.0);
        let space4 = HilbertSpace::with_n_max(4, 3).unwrap();
        assert!(matches!(build_liouvillian(&model, &space4), Err(Error::ModelMismatch(_))));
        assert!(Dissipator::new(Operator::identity(2), -1.0).is_err());
        let bad = Dissipator::new(Operator::identity(3), 1.0).unwrap();
        assert!(Liouvillian::from_parts(&Operator::identity(2), &[bad]).is_err());
    }

    #[test]
    fn nonzeros_scale_with_dimension() {
        let model = presets::three_level_reference(1.0);
        let space = HilbertSpace::with_n_max(3, 10).unwrap();
        let l = build_liouvillian(&model, &space).unwrap();
        let per_col = l.matrix().nnz() as f64 / l.dim() as f64;
        assert!(per_col < space.total_dim() as f64, "{per_col}");
    }
}
