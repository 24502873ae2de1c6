//! Random test and benchmark inputs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{qr_reduced, ComplexTensor, C64};
use crate::mps::FiniteMps;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexTensor {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexTensor::from_fn(&[rows, cols], |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`), from the
/// Q factor of a Gaussian matrix.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexTensor {
    assert!(rows >= cols, "isometry needs rows >= cols");
    qr_reduced(&ginibre(rng, rows, cols)).expect("finite gaussian input").0
}

/// Haar-distributed unitary (gauge-fixed QR of a Gaussian matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexTensor {
    isometry(rng, n, n)
}

/// Random Hermitian matrix `(G + G†) / 2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexTensor {
    let g = ginibre(rng, n, n);
    g.add(&g.adjoint()).expect("square").scale_real(0.5)
}

/// Right-isometric site tensor with axes `(d, left, right)`:
/// `Σ_{iβ} B^i_{αβ} conj(B^i_{α'β}) = δ_{αα'}`. Requires `left ≤ d · right`.
pub fn right_isometric_site<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    left: usize,
    right: usize,
) -> ComplexTensor {
    // rows of a (left × d·right) matrix with grouping (j, β)
    let rows = isometry(rng, d * right, left).adjoint();
    rows.reshape(&[left, d, right])
        .and_then(|t| t.permute(&[1, 0, 2]))
        .expect("consistent shapes")
}

/// Random normalized open chain of `n` sites with bond dimensions capped at
/// `chi`, center on bond 0 and all sites right-isometric.
pub fn finite_mps<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize, chi: usize) -> Result<FiniteMps> {
    let dims: Vec<usize> = (0..=n)
        .map(|b| {
            let exp = b.min(n - b) as u32;
            d.checked_pow(exp).unwrap_or(usize::MAX).min(chi.max(1))
        })
        .collect();
    let sites = (0..n).map(|k| right_isometric_site(rng, d, dims[k], dims[k + 1])).collect();
    FiniteMps::from_parts(sites, 0, ComplexTensor::identity(1))
}
