//! The `d`-state quantum clock chain
//! `H = −Σ (Z_n Z†_{n+1} + h.c.) − g Σ (X_n + X†_n)`.

mod ed;

pub use ed::{ed_evolve, ed_observables, EdObservables, ED_MAX_DIM};

use std::f64::consts::PI;

use crate::error::{input_err, Result};
use crate::linalg::{contract, ComplexTensor, C64};

/// `(Z, X)` with `Z = diag(ω^k)`, `X_{k, k+1 mod d} = 1` and `ω = e^{2πi/d}`.
pub fn clock_operators(d: usize) -> Result<(ComplexTensor, ComplexTensor)> {
    if d < 2 {
        return Err(input_err!("clock model needs d ≥ 2, got {d}"));
    }
    let z = ComplexTensor::from_diag_complex(&(0..d).map(|k| omega_pow(d, k as i64)).collect::<Vec<_>>());
    let x = ComplexTensor::from_fn(&[d, d], |ix| {
        if ix[1] == (ix[0] + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok((z, x))
}

/// `ω^k`.
pub(crate) fn omega_pow(d: usize, k: i64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Where a bond sits on an open chain, which fixes the weight of the onsite terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BondPosition {
    /// Both onsite terms carried with weight 1/2 (also the uniform chain).
    Bulk,
    /// Left site is the chain edge: its onsite term has weight 1.
    LeftEdge,
    /// Right site is the chain edge.
    RightEdge,
    /// Two-site chain: both onsite terms with weight 1.
    Whole,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockModel {
    d: usize,
    g: f64,
}

impl ClockModel {
    pub fn new(d: usize, g: f64) -> Result<Self> {
        if d < 2 {
            return Err(input_err!("clock model needs d ≥ 2, got {d}"));
        }
        if !g.is_finite() {
            return Err(input_err!("coupling g must be finite"));
        }
        Ok(Self { d, g })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn operators(&self) -> (ComplexTensor, ComplexTensor) {
        clock_operators(self.d).expect("d ≥ 2 checked at construction")
    }

    /// `d² × d²` bond term, rows and columns grouped `i·d + j`.
    pub fn bond_hamiltonian(&self, position: BondPosition) -> ComplexTensor {
        let d = self.d;
        let (z, x) = self.operators();
        let id = ComplexTensor::identity(d);
        let zz = kron(&z, &z.adjoint());
        let coupling = zz.add(&zz.adjoint()).expect("same shape");
        let onsite = x.add(&x.adjoint()).expect("same shape");
        let (wl, wr) = match position {
            BondPosition::Bulk => (0.5, 0.5),
            BondPosition::LeftEdge => (1.0, 0.5),
            BondPosition::RightEdge => (0.5, 1.0),
            BondPosition::Whole => (1.0, 1.0),
        };
        let field = kron(&onsite, &id)
            .scale_real(wl)
            .add(&kron(&id, &onsite).scale_real(wr))
            .expect("same shape");
        coupling.add(&field.scale_real(self.g)).expect("same shape").scale_real(-1.0)
    }

    /// Bond terms of an open chain of `n ≥ 2` sites, bond `b` joining sites `b`, `b + 1`.
    pub fn chain_bond_hamiltonians(&self, n: usize) -> Result<Vec<ComplexTensor>> {
        if n < 2 {
            return Err(input_err!("open chain needs at least two sites, got {n}"));
        }
        Ok((0..n - 1)
            .map(|b| {
                let pos = match (b == 0, b == n - 2) {
                    (true, true) => BondPosition::Whole,
                    (true, false) => BondPosition::LeftEdge,
                    (false, true) => BondPosition::RightEdge,
                    (false, false) => BondPosition::Bulk,
                };
                self.bond_hamiltonian(pos)
            })
            .collect())
    }

    /// Dense Hamiltonian of an open chain, site 0 the most significant digit.
    pub fn chain_hamiltonian(&self, n: usize) -> Result<ComplexTensor> {
        let dim = checked_dim(self.d, n)?;
        let mut h = ComplexTensor::zeros(&[dim, dim]);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        for col in 0..dim {
            e[col] = C64::new(1.0, 0.0);
            let out = self.apply_chain_hamiltonian(n, &e);
            e[col] = C64::new(0.0, 0.0);
            for (row, v) in out.into_iter().enumerate() {
                h.data_mut()[row * dim + col] = v;
            }
        }
        Ok(h)
    }

    /// `H ψ` for an open chain of `n` sites without forming `H`.
    pub fn apply_chain_hamiltonian(&self, n: usize, psi: &[C64]) -> Vec<C64> {
        let d = self.d;
        let dim = psi.len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        let stride = |site: usize| d.pow((n - 1 - site) as u32);
        for (idx, o) in out.iter_mut().enumerate() {
            let digit = |site: usize| (idx / stride(site)) % d;
            // Z_n Z†_{n+1} + h.c. is diagonal: 2 cos(2π(k_n − k_{n+1})/d)
            let mut diag = 0.0;
            for s in 0..n.saturating_sub(1) {
                diag += 2.0 * omega_pow(d, digit(s) as i64 - digit(s + 1) as i64).re;
            }
            let mut acc = psi[idx] * (-diag);
            for s in 0..n {
                let k = digit(s);
                let st = stride(s);
                // (X ψ)_k = ψ_{k+1}, (X† ψ)_k = ψ_{k−1}
                let up = idx - k * st + ((k + 1) % d) * st;
                let down = idx - k * st + ((k + d - 1) % d) * st;
                acc -= (psi[up] + psi[down]) * self.g;
            }
            *o = acc;
        }
        out
    }
}

fn kron(a: &ComplexTensor, b: &ComplexTensor) -> ComplexTensor {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    contract(a, b, &[])
        .and_then(|t| t.permute(&[0, 2, 1, 3]))
        .and_then(|t| t.reshape(&[ra * rb, ca * cb]))
        .expect("matrix operands")
}

pub(crate) fn checked_dim(d: usize, n: usize) -> Result<usize> {
    d.checked_pow(n as u32)
        .ok_or_else(|| input_err!("Hilbert space dimension {d}^{n} overflows"))
}
