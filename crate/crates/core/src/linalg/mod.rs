//! Dense complex tensors and the matrix factorizations the truncation schemes
//! are assembled from.

mod decomp;
mod tensor;

pub use decomp::{eigh, expm_hermitian, lq_reduced, qr_reduced, singular_values, svd};
pub use tensor::{contract, matmul, matmul_adj_lhs, matmul_adj_rhs, matmul_batched_left, ComplexTensor};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
