//! Matrix-product states in right-isometric form.
//!
//! Site tensors always carry axes `(physical, left bond, right bond)`. Bond
//! matrices `Ξ` are general (not necessarily diagonal) matrices; `Ξ^[m]` sits
//! on the bond immediately to the left of site `m`.

mod finite;
mod io;
mod isometry;
mod uniform;

pub use finite::FiniteMps;
pub use io::{read_checkpoint, write_checkpoint, Checkpoint};
pub use isometry::IsometryReport;
pub use uniform::UniformMps;

use crate::error::{input_err, shape_err, Result};
use crate::linalg::{matmul, singular_values, ComplexTensor, C64};

/// Read-only queries shared by uniform and finite states.
pub trait MatrixProductState {
    /// Local Hilbert space dimension.
    fn phys_dim(&self) -> usize;

    /// Number of sites (unit cell length for uniform states).
    fn num_sites(&self) -> usize;

    /// Number of bonds on which Schmidt values can be queried.
    fn num_bonds(&self) -> usize;

    /// `⟨ψ|op|ψ⟩` for a single-site operator acting on `site`.
    fn expectation_local(&self, op: &ComplexTensor, site: usize) -> Result<C64>;

    /// Schmidt values across `bond`, descending.
    fn schmidt_values(&self, bond: usize) -> Result<Vec<f64>>;

    fn check_isometric(&self, tol: f64) -> IsometryReport;

    /// Maximum bond dimension over all bonds.
    fn max_bond_dim(&self) -> usize;

    /// `⟨op⟩` on every site.
    fn expectation_profile(&self, op: &ComplexTensor) -> Result<Vec<C64>> {
        (0..self.num_sites()).map(|s| self.expectation_local(op, s)).collect()
    }

    /// Von Neumann entropy `-Σ Λ² ln Λ²` across `bond`.
    fn entanglement_entropy(&self, bond: usize) -> Result<f64> {
        Ok(entropy_from_schmidt(&self.schmidt_values(bond)?))
    }
}

/// `-Σ λ² ln λ²` with `0 ln 0 = 0`.
pub fn entropy_from_schmidt(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Normalized product-state site tensor `(d, 1, 1)`.
pub(crate) fn product_site(d: usize, local: &[C64]) -> Result<ComplexTensor> {
    if local.len() != d {
        return Err(shape_err!("local vector has {} entries, expected d = {d}", local.len()));
    }
    let norm = local.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(input_err!("local vector must have non-zero finite norm"));
    }
    ComplexTensor::new(vec![d, 1, 1], local.iter().map(|z| z / norm).collect())
}

pub(crate) fn check_site(t: &ComplexTensor, d: usize) -> Result<(usize, usize)> {
    if t.rank() != 3 || t.shape()[0] != d {
        return Err(shape_err!("site tensor must be (d = {d}, left, right), got {:?}", t.shape()));
    }
    Ok((t.shape()[1], t.shape()[2]))
}

/// `Σ_{iβ} B^i_{αβ} conj(B^i_{α'β})` for a site tensor `(d, l, r)`.
pub(crate) fn right_gram(site: &ComplexTensor) -> ComplexTensor {
    let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
    let grouped = site
        .permute(&[1, 0, 2])
        .and_then(|t| t.reshape(&[l, d * r]))
        .expect("rank-3 site");
    crate::linalg::matmul_adj_rhs(&grouped, &grouped).expect("shapes agree")
}

/// `Σ_{iα} conj(A^i_{αβ}) A^i_{αβ'}` for a site tensor `(d, l, r)`.
pub(crate) fn left_gram(site: &ComplexTensor) -> ComplexTensor {
    let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
    let grouped = site.clone().reshape(&[d * l, r]).expect("rank-3 site");
    crate::linalg::matmul_adj_lhs(&grouped, &grouped).expect("shapes agree")
}

/// Deviation of `m` from the identity, as the largest entry modulus.
pub(crate) fn identity_defect(m: &ComplexTensor) -> f64 {
    m.max_abs_diff(&ComplexTensor::identity(m.nrows()))
}

/// `⟨op⟩ = tr(op · M M†)` where `M^i = Ξ · B^i` and the right environment is
/// the identity.
pub(crate) fn local_expectation(xi: &ComplexTensor, site: &ComplexTensor, op: &ComplexTensor) -> Result<C64> {
    let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
    if op.shape() != [d, d] {
        return Err(shape_err!("operator must be {d}×{d}, got {:?}", op.shape()));
    }
    let grouped = site.permute(&[1, 0, 2])?.reshape(&[l, d * r])?;
    let m = matmul(xi, &grouped)?;
    let a = xi.nrows();
    // (a, d, r) -> (d, a·r)
    let per_phys = m.reshape(&[a, d, r])?.permute(&[1, 0, 2])?.reshape(&[d, a * r])?;
    let rho = crate::linalg::matmul_adj_rhs(&per_phys, &per_phys)?;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += op.data()[i * d + j] * rho.data()[j * d + i];
        }
    }
    Ok(acc)
}

pub(crate) fn bond_schmidt_values(xi: &ComplexTensor) -> Result<Vec<f64>> {
    singular_values(xi)
}
