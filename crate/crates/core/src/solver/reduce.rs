use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HilbertSpace, Operator};
use crate::photonstats::PhotonDistribution;
use crate::C64;

/// Tail probability at which a numerical photon distribution is flagged.
pub const TRUNCATION_WARNING: f64 = 1e-6;

/// Cavity state tr_atom ρ.
pub fn partial_trace_atom(rho: &DensityMatrix, space: &HilbertSpace) -> Result<DensityMatrix> {
    if rho.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), actual: rho.dim() });
    }
    let f = space.fock_dim();
    let m = rho.matrix();
    let reduced = DMatrix::from_fn(f, f, |i, j| (0..space.atom_dim()).map(|a| m[(a * f + i, a * f + j)]).sum());
    Ok(DensityMatrix::from_matrix_unchecked(reduced))
}

/// P_n = Σ_α ρ_{αn,αn}, renormalized. Logs a warning when the last Fock
/// level holds at least [`TRUNCATION_WARNING`] probability.
pub fn photon_distribution(rho: &DensityMatrix, space: &HilbertSpace) -> Result<PhotonDistribution> {
    let cavity = partial_trace_atom(rho, space)?;
    let diag: Vec<f64> = (0..space.fock_dim()).map(|n| cavity.matrix()[(n, n)].re.max(0.0)).collect();
    let dist = PhotonDistribution::from_weights(diag)?;
    if dist.tail() >= TRUNCATION_WARNING {
        log::warn!(
            "photon distribution tail P_{} = {:e} exceeds {:e}; increase n_max",
            space.n_max(),
            dist.tail(),
            TRUNCATION_WARNING
        );
    }
    Ok(dist)
}

/// tr(ρO).
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), actual: op.dim() });
    }
    let (r, o) = (rho.matrix(), op.matrix());
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += r[(i, j)] * o[(j, i)];
        }
    }
    Ok(acc)
}
