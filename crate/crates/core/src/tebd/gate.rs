use crate::error::{input_err, shape_err, Result};
use crate::linalg::{expm_hermitian, matmul_adj_lhs, ComplexTensor};

const UNITARITY_TOL: f64 = 1e-10;

/// Unitary acting on two neighbouring sites.
///
/// Stored as its `d² × d²` matrix `G` with rows indexing the outgoing pair
/// `(i, j)` and columns the incoming pair `(i', j')`, both grouped as
/// `i · d + j` with `i` on the left site:
/// `θ̃^{ij} = Σ_{i'j'} G_{(ij),(i'j')} θ^{i'j'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteGate {
    d: usize,
    matrix: ComplexTensor,
}

impl TwoSiteGate {
    /// Wraps a `d² × d²` unitary.
    pub fn from_matrix(d: usize, matrix: ComplexTensor) -> Result<Self> {
        if matrix.shape() != [d * d, d * d] {
            return Err(shape_err!("gate for d = {d} must be {0}×{0}, got {1:?}", d * d, matrix.shape()));
        }
        let gate = Self { d, matrix };
        let defect = gate.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(input_err!("gate is not unitary: max |U†U − 1| = {defect:e}"));
        }
        Ok(gate)
    }

    /// `exp(-i dt h)` for a Hermitian bond Hamiltonian `h`.
    pub fn from_hamiltonian(d: usize, h: &ComplexTensor, dt: f64) -> Result<Self> {
        if h.shape() != [d * d, d * d] {
            return Err(shape_err!("bond Hamiltonian for d = {d} must be {0}×{0}, got {1:?}", d * d, h.shape()));
        }
        Self::from_matrix(d, expm_hermitian(h, dt)?)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d,
            matrix: ComplexTensor::identity(d * d),
        }
    }

    pub fn phys_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexTensor {
        &self.matrix
    }

    /// Rank-4 view with axes `(i', j', i, j)`.
    pub fn as_tensor(&self) -> ComplexTensor {
        let d = self.d;
        self.matrix
            .clone()
            .reshape(&[d, d, d, d])
            .and_then(|t| t.permute(&[2, 3, 0, 1]))
            .expect("d² × d² gate")
    }

    pub fn unitarity_defect(&self) -> f64 {
        let g = matmul_adj_lhs(&self.matrix, &self.matrix).expect("square");
        g.max_abs_diff(&ComplexTensor::identity(g.nrows()))
    }
}
