use faer::Side;

use super::tensor::{matmul_adj_rhs, ComplexTensor};
use super::C64;
use crate::error::{input_err, shape_err, Error, Result};

fn check_matrix(m: &ComplexTensor) -> Result<()> {
    if m.rank() != 2 {
        return Err(shape_err!("expected a matrix, got shape {:?}", m.shape()));
    }
    if !m.is_finite() {
        return Err(input_err!("matrix has non-finite entries"));
    }
    Ok(())
}

/// Reduced QR, `m = q r` with `q` of shape `p × k`, `k = min(p, q)`.
///
/// The diagonal of `r` is made real and non-negative, which fixes the phase
/// freedom of each column of `q` and makes the output a deterministic function
/// of the input.
pub fn qr_reduced(m: &ComplexTensor) -> Result<(ComplexTensor, ComplexTensor)> {
    check_matrix(m)?;
    let qr = m.as_mat().qr();
    let mut q = ComplexTensor::from_mat(qr.compute_thin_Q().as_ref());
    let mut r = ComplexTensor::from_mat(qr.thin_R());
    let (rows, k) = (q.nrows(), q.ncols());
    let cols = r.ncols();
    for j in 0..k {
        let diag = r.data()[j * cols + j];
        let a = diag.norm();
        if a == 0.0 {
            continue;
        }
        let phase = diag / a;
        {
            let qd = q.data_mut();
            for i in 0..rows {
                qd[i * k + j] *= phase;
            }
        }
        let rd = r.data_mut();
        let phase_c = phase.conj();
        for x in &mut rd[j * cols..(j + 1) * cols] {
            *x *= phase_c;
        }
        // exact real diagonal
        rd[j * cols + j] = C64::new(a, 0.0);
    }
    Ok((q, r))
}

/// Reduced LQ, `m = l q` with `q` of shape `k × q` having orthonormal rows.
///
/// Computed as the conjugate-transpose dual of [`qr_reduced`] on `m†`, so the
/// diagonal of `l` is real and non-negative.
pub fn lq_reduced(m: &ComplexTensor) -> Result<(ComplexTensor, ComplexTensor)> {
    check_matrix(m)?;
    let (q, r) = qr_reduced(&m.adjoint())?;
    Ok((r.adjoint(), q.adjoint()))
}

/// Thin singular value decomposition `m = u · diag(s) · vdag`.
///
/// Singular values are non-negative and sorted descending.
pub fn svd(m: &ComplexTensor) -> Result<(ComplexTensor, Vec<f64>, ComplexTensor)> {
    check_matrix(m)?;
    let dec = m
        .as_mat()
        .thin_svd()
        .map_err(|e| Error::Numeric(format!("svd did not converge: {e:?}")))?;
    let u = ComplexTensor::from_mat(dec.U());
    let s: Vec<f64> = dec.S().column_vector().iter().map(|z| z.re).collect();
    let vdag = ComplexTensor::from_mat(dec.V()).adjoint();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("svd produced non-finite singular values".into()));
    }
    Ok((u, s, vdag))
}

/// Singular values only, descending.
pub fn singular_values(m: &ComplexTensor) -> Result<Vec<f64>> {
    check_matrix(m)?;
    m.as_mat()
        .singular_values()
        .map_err(|e| Error::Numeric(format!("svd did not converge: {e:?}")))
}

const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Returns `(w, v)` with `h · v[:, k] = w[k] · v[:, k]`. The input is
/// symmetrized before factorization; it must be Hermitian to within
/// `1e-10 · ‖h‖`.
pub fn eigh(h: &ComplexTensor) -> Result<(Vec<f64>, ComplexTensor)> {
    check_matrix(h)?;
    let n = h.nrows();
    if h.ncols() != n {
        return Err(shape_err!("eigh needs a square matrix, got {:?}", h.shape()));
    }
    let hd = h.adjoint();
    let asym = h.sub(&hd)?.norm();
    if asym > HERMITIAN_TOL * h.norm() {
        return Err(input_err!("matrix is not hermitian: ‖h − h†‖ = {asym:e}"));
    }
    let sym = h.add(&hd)?.scale_real(0.5);
    let dec = sym
        .as_mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigh did not converge: {e:?}")))?;
    let ascending: Vec<f64> = dec.S().column_vector().iter().map(|z| z.re).collect();
    let vecs = dec.U();
    let w: Vec<f64> = ascending.iter().rev().copied().collect();
    let v = ComplexTensor::from_fn(&[n, n], |ix| vecs[(ix[0], n - 1 - ix[1])]);
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("eigh produced non-finite eigenvalues".into()));
    }
    Ok((w, v))
}

/// `exp(-i t h)` for Hermitian `h`, via its spectral decomposition.
pub fn expm_hermitian(h: &ComplexTensor, t: f64) -> Result<ComplexTensor> {
    let (w, v) = eigh(h)?;
    let n = w.len();
    let phases: Vec<C64> = w.iter().map(|&x| C64::from_polar(1.0, -t * x)).collect();
    let scaled = ComplexTensor::from_fn(&[n, n], |ix| v.get(ix) * phases[ix[1]]);
    matmul_adj_rhs(&scaled, &v)
}
