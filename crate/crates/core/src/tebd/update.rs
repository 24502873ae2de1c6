//! Two-site update kernels.
//!
//! Every kernel receives the bond matrix `Ξ` left of site `m` (shape `a × l`),
//! the right-isometric site tensors `B^[m]` `(d, l, c)` and `B^[n]` `(d, c, r)`
//! and a gate, and returns new tensors for both sites plus the bond matrix
//! between them.
//!
//! Working layout: the gate-applied block without `Ξ` is
//! `θ'_{(α i),(j δ)} = Σ G_{(ij),(i'j')} B^[m]i'_{αγ} B^[n]j'_{γδ}` and the
//! evolved wavefunction is `θ̃ = Ξ θ'`, both as row-major matrices whose rows
//! group `(α, i)` and columns group `(j, δ)`.

use super::gate::TwoSiteGate;
use super::policy::{Scheme, TruncationPolicy, TruncationReport};
use crate::error::{input_err, shape_err, Result};
use crate::linalg::{
    eigh, lq_reduced, matmul, matmul_adj_lhs, matmul_adj_rhs, matmul_batched_left, qr_reduced, svd, ComplexTensor,
};

/// How the updated tensor on the left site is returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftForm {
    /// Right-isometric `B̃^[m] = θ' · B̃^[n]†`, formed by contraction against
    /// the new right tensor instead of inverting `Ξ` (uniform states).
    Hastings,
    /// Left-isometric `A^[m]` with the new bond matrix acting as an
    /// orthogonality center, `θ̃ ≈ A^[m] · Ξ̃ · B̃^[n]` (finite chains).
    Isometric,
}

/// Result of a two-site update.
#[derive(Clone, Debug)]
pub struct TwoSiteUpdate {
    /// `B̃^[m]` or `A^[m]` depending on [`LeftForm`], axes `(d, ·, ·)`.
    pub left: ComplexTensor,
    /// `Ξ̃^[n]`, the matrix on the bond between the two sites.
    pub bond: ComplexTensor,
    /// Right-isometric `B̃^[n]`, axes `(d, χ̃, r)`.
    pub right: ComplexTensor,
    pub report: TruncationReport,
}

/// Gate-applied two-site block, in both `θ'` and `θ̃ = Ξ θ'` forms.
pub struct EvolvedBlock {
    pub d: usize,
    /// Rows of `Ξ` (left dimension of `θ̃`).
    pub a: usize,
    /// Left bond of `B^[m]`.
    pub l: usize,
    /// Bond between the sites before the update.
    pub c: usize,
    /// Right bond of `B^[n]`.
    pub r: usize,
    /// `θ'`, shape `(l·d) × (d·r)`.
    pub theta_bare: ComplexTensor,
    /// `θ̃`, shape `(a·d) × (d·r)`.
    pub theta: ComplexTensor,
    /// `B^[n]` grouped as `c × (d·r)`.
    pub right_grouped: ComplexTensor,
}

impl EvolvedBlock {
    pub fn new(xi: &ComplexTensor, bm: &ComplexTensor, bn: &ComplexTensor, gate: &TwoSiteGate) -> Result<Self> {
        let d = gate.phys_dim();
        if bm.rank() != 3 || bn.rank() != 3 || bm.shape()[0] != d || bn.shape()[0] != d {
            return Err(shape_err!(
                "site tensors {:?}, {:?} incompatible with gate for d = {d}",
                bm.shape(),
                bn.shape()
            ));
        }
        let (l, c, r) = (bm.shape()[1], bm.shape()[2], bn.shape()[2]);
        if bn.shape()[1] != c {
            return Err(shape_err!("bond mismatch between {:?} and {:?}", bm.shape(), bn.shape()));
        }
        if xi.rank() != 2 || xi.ncols() != l {
            return Err(shape_err!("bond matrix {:?} does not match left bond {l}", xi.shape()));
        }
        let a = xi.nrows();
        let left_grouped = bm.permute(&[1, 0, 2])?.reshape(&[l * d, c])?;
        let right_grouped = bn.permute(&[1, 0, 2])?.reshape(&[c, d * r])?;
        // (α, i', j', δ); each α-slab is a (d², r) matrix the gate acts on
        let product = matmul(&left_grouped, &right_grouped)?;
        let theta_bare = matmul_batched_left(gate.matrix(), &product, l)?.reshape(&[l * d, d * r])?;
        let theta = matmul(xi, &theta_bare.clone().reshape(&[l, d * d * r])?)?.reshape(&[a * d, d * r])?;
        Ok(Self {
            d,
            a,
            l,
            c,
            r,
            theta_bare,
            theta,
            right_grouped,
        })
    }

    /// `B̃^[m] = θ' · right†` with `right` grouped as `k × (d·r)`; returns `(d, l, k)`.
    fn hastings_left(&self, right: &ComplexTensor) -> Result<ComplexTensor> {
        let k = right.nrows();
        matmul_adj_rhs(&self.theta_bare, right)?
            .reshape(&[self.l, self.d, k])?
            .permute(&[1, 0, 2])
    }

    /// `(a·d) × k` isometry to a `(d, a, k)` site tensor.
    fn left_site(&self, q: ComplexTensor) -> Result<ComplexTensor> {
        let k = q.ncols();
        q.reshape(&[self.a, self.d, k])?.permute(&[1, 0, 2])
    }

    /// `k × (d·r)` row-isometry to a `(d, k, r)` site tensor.
    fn right_site(&self, rows: ComplexTensor) -> Result<ComplexTensor> {
        let k = rows.nrows();
        rows.reshape(&[k, self.d, self.r])?.permute(&[1, 0, 2])
    }
}

/// `‖θ̃ − left · center · right‖²_F / ‖θ̃‖²_F`.
pub fn truncation_error_explicit(
    theta: &ComplexTensor,
    left: &ComplexTensor,
    center: &ComplexTensor,
    right: &ComplexTensor,
) -> Result<f64> {
    let approx = matmul(left, &matmul(center, right)?)?;
    let total = theta.norm_sqr();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(theta.sub(&approx)?.norm_sqr() / total)
}

fn normalized(m: ComplexTensor, policy: &TruncationPolicy) -> ComplexTensor {
    let n = m.norm();
    if policy.renormalize && n > 0.0 {
        m.scale_real(1.0 / n)
    } else {
        m
    }
}

fn kept_diag(s: &[f64], policy: &TruncationPolicy) -> ComplexTensor {
    let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    if policy.renormalize && n > 0.0 {
        ComplexTensor::from_diag(&s.iter().map(|x| x / n).collect::<Vec<_>>())
    } else {
        ComplexTensor::from_diag(s)
    }
}

/// Rows `0..k` of `rows` rotated by the first `k` columns of `v`: `v[:, :k]† · rows`.
fn rotate_rows(v: &ComplexTensor, k: usize, rows: &ComplexTensor) -> Result<ComplexTensor> {
    matmul_adj_lhs(&v.take_cols(k)?, rows)
}

/// SVD truncation of the evolved block.
pub fn apply_gate_svd(
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    let block = EvolvedBlock::new(xi, bm, bn, gate)?;
    let (u, s, vdag) = svd(&block.theta)?;
    let total: f64 = s.iter().map(|x| x * x).sum();
    let k = policy.kept_count(&s, total);
    let discarded: f64 = s[k..].iter().map(|x| x * x).sum();
    let right_rows = vdag.take_rows(k)?;
    let bond = kept_diag(&s[..k], policy);
    let left = match form {
        LeftForm::Hastings => block.hastings_left(&right_rows)?,
        LeftForm::Isometric => block.left_site(u.take_cols(k)?)?,
    };
    Ok(TwoSiteUpdate {
        left,
        bond,
        right: block.right_site(right_rows)?,
        report: TruncationReport {
            scheme: Scheme::Svd,
            chi_before: block.c,
            chi_expanded: s.len(),
            chi_after: k,
            eps_trunc: if total > 0.0 { discarded / total } else { 0.0 },
            discarded_weight: discarded,
        },
    })
}

/// Truncation from the eigendecomposition `θ̃†θ̃ = V S² V†`; the left singular
/// vectors are never computed.
pub fn apply_gate_eig(
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    let block = EvolvedBlock::new(xi, bm, bn, gate)?;
    let gram = matmul_adj_lhs(&block.theta, &block.theta)?;
    let (w, v) = eigh(&gram)?;
    let rank = block.theta.nrows().min(block.theta.ncols());
    // analytically PSD: clip round-off negatives before the square root
    let s: Vec<f64> = w.iter().take(rank).map(|&x| x.max(0.0).sqrt()).collect();
    let total: f64 = s.iter().map(|x| x * x).sum();
    let k = policy.kept_count(&s, total);
    let discarded: f64 = s[k..].iter().map(|x| x * x).sum();
    let right_rows = rotate_rows(&v, k, &ComplexTensor::identity(v.nrows()))?;
    let bond_diag = kept_diag(&s[..k], policy);
    let (left, bond) = match form {
        LeftForm::Hastings => (block.hastings_left(&right_rows)?, bond_diag),
        LeftForm::Isometric => {
            let projected = matmul_adj_rhs(&block.theta, &right_rows)?;
            let (q, r) = qr_reduced(&projected)?;
            (block.left_site(q)?, normalized(r, policy))
        }
    };
    Ok(TwoSiteUpdate {
        left,
        bond,
        right: block.right_site(right_rows)?,
        report: TruncationReport {
            scheme: Scheme::Eig,
            chi_before: block.c,
            chi_expanded: s.len(),
            chi_after: k,
            eps_trunc: if total > 0.0 { discarded / total } else { 0.0 },
            discarded_weight: discarded,
        },
    })
}

/// One alternating QR/LQ pass seeded by `seed` (`η × (d·r)`).
///
/// Returns `(Q^[m], L, Q^[n])` with `θ̃ ≈ Q^[m] L Q^[n]`.
fn qr_lq_pass(
    theta: &ComplexTensor,
    seed: &ComplexTensor,
    sweeps: usize,
) -> Result<(ComplexTensor, ComplexTensor, ComplexTensor)> {
    let mut guess = seed.clone();
    let mut out = None;
    for _ in 0..sweeps {
        // (i) project onto the current right guess, orthonormalize
        let x = matmul_adj_rhs(theta, &guess)?;
        let (q_left, _r) = qr_reduced(&x)?;
        // (ii) project onto the new left isometry, orthonormalize from the right
        let y = matmul_adj_lhs(&q_left, theta)?;
        let (l, q_right) = lq_reduced(&y)?;
        guess = q_right.clone();
        out = Some((q_left, l, q_right));
    }
    Ok(out.expect("at least one sweep"))
}

/// QR-based truncation seeded with the old right tensor.
///
/// The bond keeps its dimension unless `policy.qr_growth` is set, in which
/// case the seed is the first `η = min(chi_max, d·χ)` rows of `θ̃`.
pub fn apply_gate_qr(
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    let block = EvolvedBlock::new(xi, bm, bn, gate)?;
    let eta = (policy.chi_max.min(block.d * block.c)).min(block.theta.nrows());
    let seed = if policy.qr_growth && eta > block.c {
        block.theta.take_rows(eta)?
    } else {
        block.right_grouped.clone()
    };
    let (q_left, l, q_right) = qr_lq_pass(&block.theta, &seed, policy.qr_sweeps)?;
    let eps = truncation_error_explicit(&block.theta, &q_left, &l, &q_right)?;
    let total = block.theta.norm_sqr();
    let chi_after = q_right.nrows();
    let left = match form {
        LeftForm::Hastings => block.hastings_left(&q_right)?,
        LeftForm::Isometric => block.left_site(q_left)?,
    };
    Ok(TwoSiteUpdate {
        left,
        bond: normalized(l, policy),
        right: block.right_site(q_right)?,
        report: TruncationReport {
            scheme: Scheme::Qr,
            chi_before: block.c,
            chi_expanded: seed.nrows(),
            chi_after,
            eps_trunc: eps,
            discarded_weight: eps * total,
        },
    })
}

/// QR-based truncation with controlled bond expansion, using the policy's
/// expansion rule for `η`.
pub fn apply_gate_qr_cbe(
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    let block = EvolvedBlock::new(xi, bm, bn, gate)?;
    let eta = policy
        .expanded_dim(block.c, block.d)
        .min(block.d * block.a)
        .min(block.d * block.r);
    cbe_from_block(&block, eta, policy, form)
}

/// [`apply_gate_qr_cbe`] at an explicit expansion width `η ≤ d·χ`.
pub fn apply_gate_qr_cbe_with_width(
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    eta: usize,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    let block = EvolvedBlock::new(xi, bm, bn, gate)?;
    if eta == 0 || eta > block.d * block.c {
        return Err(input_err!("expansion width η = {eta} outside 1..={}", block.d * block.c));
    }
    cbe_from_block(&block, eta, policy, form)
}

fn cbe_from_block(block: &EvolvedBlock, eta: usize, policy: &TruncationPolicy, form: LeftForm) -> Result<TwoSiteUpdate> {
    // (i) first η rows of the (α, i) leg pair as the initial guess
    let seed = block.theta.take_rows(eta.min(block.theta.nrows()))?;
    // (ii)-(iii)
    let (q_left, l, q_right) = qr_lq_pass(&block.theta, &seed, policy.qr_sweeps)?;
    // (iv) L†L = W S² W†
    let (w, v) = eigh(&matmul_adj_lhs(&l, &l)?)?;
    let s: Vec<f64> = w.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let spectrum_weight: f64 = s.iter().map(|x| x * x).sum();
    let k = policy.kept_count(&s, spectrum_weight);
    // (v) absorb the kept rotation into the right isometry
    let right_rows = rotate_rows(&v, k, &q_right)?;
    let center = matmul(&l, &v.take_cols(k)?)?;
    let eps = truncation_error_explicit(&block.theta, &q_left, &center, &right_rows)?;
    let total = block.theta.norm_sqr();
    let (left, bond) = match form {
        LeftForm::Hastings => (block.hastings_left(&right_rows)?, kept_diag(&s[..k], policy)),
        LeftForm::Isometric => {
            let (q2, r2) = qr_reduced(&center)?;
            (block.left_site(matmul(&q_left, &q2)?)?, normalized(r2, policy))
        }
    };
    Ok(TwoSiteUpdate {
        left,
        bond,
        right: block.right_site(right_rows)?,
        report: TruncationReport {
            scheme: Scheme::QrCbe,
            chi_before: block.c,
            chi_expanded: seed.nrows(),
            chi_after: k,
            eps_trunc: eps,
            discarded_weight: eps * total,
        },
    })
}

/// Dispatches to the kernel for `scheme`.
pub fn apply_gate(
    scheme: Scheme,
    xi: &ComplexTensor,
    bm: &ComplexTensor,
    bn: &ComplexTensor,
    gate: &TwoSiteGate,
    policy: &TruncationPolicy,
    form: LeftForm,
) -> Result<TwoSiteUpdate> {
    match scheme {
        Scheme::Svd => apply_gate_svd(xi, bm, bn, gate, policy, form),
        Scheme::Eig => apply_gate_eig(xi, bm, bn, gate, policy, form),
        Scheme::Qr => apply_gate_qr(xi, bm, bn, gate, policy, form),
        Scheme::QrCbe => apply_gate_qr_cbe(xi, bm, bn, gate, policy, form),
    }
}
