//! Composite atom ⊗ Fock space, operators on it, and density matrices.
//!
//! Basis ordering is atom-major: the state |α, n⟩ has index `α * fock_dim + n`,
//! with atom levels ordered g, e₁, e₂(, e₃).

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    Ground,
    E1,
    E2,
    E3,
}

impl AtomLevel {
    pub fn index(self) -> usize {
        match self {
            AtomLevel::Ground => 0,
            AtomLevel::E1 => 1,
            AtomLevel::E2 => 2,
            AtomLevel::E3 => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AtomLevel::Ground => "|g>",
            AtomLevel::E1 => "|e1>",
            AtomLevel::E2 => "|e2>",
            AtomLevel::E3 => "|e3>",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    atom_dim: usize,
    fock_dim: usize,
}

impl HilbertSpace {
    pub fn new(atom_dim: usize, fock_dim: usize) -> Result<Self> {
        if atom_dim != 3 && atom_dim != 4 {
            return Err(Error::param("atom_dim", format!("must be 3 or 4, got {atom_dim}")));
        }
        if fock_dim < 2 {
            return Err(Error::param("fock_dim", format!("must be >= 2, got {fock_dim}")));
        }
        Ok(HilbertSpace { atom_dim, fock_dim })
    }

    /// Space holding photon numbers `0..=n_max`.
    pub fn with_n_max(atom_dim: usize, n_max: usize) -> Result<Self> {
        Self::new(atom_dim, n_max + 1)
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn n_max(&self) -> usize {
        self.fock_dim - 1
    }

    pub fn total_dim(&self) -> usize {
        self.atom_dim * self.fock_dim
    }

    pub fn index(&self, level: AtomLevel, n: usize) -> usize {
        debug_assert!(level.index() < self.atom_dim && n < self.fock_dim);
        level.index() * self.fock_dim + n
    }

    pub fn has_level(&self, level: AtomLevel) -> bool {
        level.index() < self.atom_dim
    }

    /// Embeds an atom-factor matrix as `A ⊗ 1_fock`.
    pub fn embed_atom(&self, atom: &DMatrix<C64>) -> Result<Operator> {
        if atom.nrows() != self.atom_dim || atom.ncols() != self.atom_dim {
            return Err(Error::DimensionMismatch {
                expected: self.atom_dim,
                actual: atom.nrows(),
            });
        }
        let f = self.fock_dim;
        let mut m = DMatrix::zeros(self.total_dim(), self.total_dim());
        for a in 0..self.atom_dim {
            for b in 0..self.atom_dim {
                let v = atom[(a, b)];
                if v != ZERO {
                    for n in 0..f {
                        m[(a * f + n, b * f + n)] = v;
                    }
                }
            }
        }
        Ok(Operator::from_matrix(m))
    }

    /// Embeds a Fock-factor matrix as `1_atom ⊗ C`.
    pub fn embed_cavity(&self, cavity: &DMatrix<C64>) -> Result<Operator> {
        if cavity.nrows() != self.fock_dim || cavity.ncols() != self.fock_dim {
            return Err(Error::DimensionMismatch {
                expected: self.fock_dim,
                actual: cavity.nrows(),
            });
        }
        let f = self.fock_dim;
        let mut m = DMatrix::zeros(self.total_dim(), self.total_dim());
        for a in 0..self.atom_dim {
            for i in 0..f {
                for j in 0..f {
                    m[(a * f + i, a * f + j)] = cavity[(i, j)];
                }
            }
        }
        Ok(Operator::from_matrix(m))
    }
}

/// Square complex matrix on the composite space (or on one factor).
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    /// Panics if `mat` is not square.
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        assert!(mat.is_square(), "operator must be square");
        Operator { mat }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator { mat: &self.mat * s }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.mat)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= 1e-12
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.mat.iter().all(|v| v.norm() <= tol)
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = self.mat[(i, j)];
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Annihilation and creation operators `(a, a†)` on the composite space.
pub fn build_cavity_operators(space: &HilbertSpace) -> (Operator, Operator) {
    let f = space.fock_dim();
    let mut a = DMatrix::zeros(f, f);
    for n in 1..f {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a = space.embed_cavity(&a).expect("fock factor matches space");
    let a_dag = a.adjoint();
    (a, a_dag)
}

/// Atom transition |lower⟩⟨upper| embedded on the composite space.
pub fn atom_transition(space: &HilbertSpace, lower: AtomLevel, upper: AtomLevel) -> Result<Operator> {
    for level in [lower, upper] {
        if !space.has_level(level) {
            return Err(Error::UnsupportedOperator {
                atom_dim: space.atom_dim(),
                what: level.name(),
            });
        }
    }
    let mut m = DMatrix::zeros(space.atom_dim(), space.atom_dim());
    m[(lower.index(), upper.index())] = ONE;
    space.embed_atom(&m)
}

/// Projector |level⟩⟨level| on the composite space.
pub fn atom_projector(space: &HilbertSpace, level: AtomLevel) -> Result<Operator> {
    atom_transition(space, level, level)
}

/// Atomic transition, projector and inversion operators.
///
/// The hot bath drives |g⟩↔|e₂⟩ on a three-level atom and |g⟩↔|e₃⟩ on a
/// four-level atom; the ancilla transition |e₂⟩↔|e₃⟩ only exists on the
/// latter.
#[derive(Clone, Debug)]
pub struct AtomOperators {
    pub tau_h_minus: Operator,
    pub tau_c_minus: Operator,
    pub sigma_minus: Operator,
    pub sigma_z: Operator,
    pub n_g: Operator,
    pub n_1: Operator,
    pub n_2: Operator,
    n_3: Option<Operator>,
    tau_a_minus: Option<Operator>,
}

impl AtomOperators {
    pub fn tau_h_plus(&self) -> Operator {
        self.tau_h_minus.adjoint()
    }

    pub fn tau_c_plus(&self) -> Operator {
        self.tau_c_minus.adjoint()
    }

    pub fn sigma_plus(&self) -> Operator {
        self.sigma_minus.adjoint()
    }

    pub fn n_3(&self) -> Result<&Operator> {
        self.n_3.as_ref().ok_or(Error::UnsupportedOperator {
            atom_dim: 3,
            what: "N_3",
        })
    }

    pub fn tau_a_minus(&self) -> Result<&Operator> {
        self.tau_a_minus.as_ref().ok_or(Error::UnsupportedOperator {
            atom_dim: 3,
            what: "tau_a",
        })
    }

    pub fn projectors(&self) -> Vec<&Operator> {
        let mut out = vec![&self.n_g, &self.n_1, &self.n_2];
        out.extend(self.n_3.as_ref());
        out
    }
}

pub fn build_atom_operators(space: &HilbertSpace) -> AtomOperators {
    use AtomLevel::*;
    let four = space.atom_dim() == 4;
    let t = |lo, hi| atom_transition(space, lo, hi).expect("level exists");
    let hot_upper = if four { E3 } else { E2 };
    let n_1 = t(E1, E1);
    let n_2 = t(E2, E2);
    AtomOperators {
        tau_h_minus: t(Ground, hot_upper),
        tau_c_minus: t(Ground, E1),
        sigma_minus: t(E1, E2),
        sigma_z: &n_2 - &n_1,
        n_g: t(Ground, Ground),
        n_1,
        n_2,
        n_3: four.then(|| t(E3, E3)),
        tau_a_minus: four.then(|| t(E2, E3)),
    }
}

/// Density matrix on some Hilbert space (composite or reduced).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

/// Tolerances for [`DensityMatrix::check`].
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        let rho = DensityMatrix::from_matrix_unchecked(mat);
        rho.check()?;
        Ok(rho)
    }

    pub fn from_matrix_unchecked(mat: DMatrix<C64>) -> Self {
        assert!(mat.is_square(), "density matrix must be square");
        DensityMatrix { mat }
    }

    /// Pure basis state |level, n⟩⟨level, n|.
    pub fn basis_state(space: &HilbertSpace, level: AtomLevel, n: usize) -> Result<Self> {
        if !space.has_level(level) || n >= space.fock_dim() {
            return Err(Error::param("basis_state", "level or photon number outside the space"));
        }
        let d = space.total_dim();
        let mut m = DMatrix::zeros(d, d);
        let k = space.index(level, n);
        m[(k, k)] = ONE;
        Ok(DensityMatrix { mat: m })
    }

    /// |g⟩⟨g| ⊗ |0⟩⟨0|.
    pub fn ground(space: &HilbertSpace) -> Self {
        Self::basis_state(space, AtomLevel::Ground, 0).expect("ground state exists")
    }

    /// `atom ⊗ cavity`.
    pub fn product(atom: &DMatrix<C64>, cavity: &DMatrix<C64>) -> Self {
        DensityMatrix {
            mat: atom.kronecker(cavity),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.mat)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::param("rho", format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::param("rho", format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::param("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Row-major vectorization: entry (i, j) lands at `i * dim + j`.
    pub fn to_vec(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                v.push(self.mat[(i, j)]);
            }
        }
        v
    }

    pub fn from_vec(dim: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), dim * dim);
        DensityMatrix {
            mat: DMatrix::from_row_slice(dim, dim, v),
        }
    }
}
