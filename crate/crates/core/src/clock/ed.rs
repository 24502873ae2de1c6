use super::{checked_dim, clock_operators, ClockModel};
use crate::error::{input_err, Error, Result};
use crate::linalg::{expm_hermitian, matmul, singular_values, ComplexTensor, C64};
use crate::mps::entropy_from_schmidt;

/// Largest Hilbert space the exact oracle accepts.
pub const ED_MAX_DIM: usize = 1 << 14;

/// Above this dimension the propagator is applied matrix-free.
const DENSE_MAX_DIM: usize = 1 << 10;

const TAYLOR_TOL: f64 = 1e-17;
const TAYLOR_MAX_TERMS: usize = 60;

/// Evolves `psi0` on an open clock chain of `n` sites to time `t`.
///
/// Small spaces use the exact spectral propagator. Larger ones take
/// `⌈t / dt_exact⌉` Taylor substeps of `H ψ` carried to machine precision.
pub fn ed_evolve(d: usize, n: usize, g: f64, psi0: &[C64], t: f64, dt_exact: f64) -> Result<Vec<C64>> {
    let model = ClockModel::new(d, g)?;
    let dim = checked_dim(d, n).map_err(|_| capacity(d, n))?;
    if dim > ED_MAX_DIM {
        return Err(capacity(d, n));
    }
    if psi0.len() != dim {
        return Err(input_err!("state has {} amplitudes, expected {dim}", psi0.len()));
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    if dim <= DENSE_MAX_DIM {
        let u = expm_hermitian(&model.chain_hamiltonian(n)?, t)?;
        let psi = ComplexTensor::matrix(dim, 1, psi0.to_vec())?;
        return Ok(matmul(&u, &psi)?.into_data());
    }
    if !(dt_exact > 0.0) {
        return Err(input_err!("dt_exact must be positive"));
    }
    Ok(taylor_evolve(&model, n, psi0, t, dt_exact))
}

fn taylor_evolve(model: &ClockModel, n: usize, psi0: &[C64], t: f64, dt_exact: f64) -> Vec<C64> {
    let steps = (t.abs() / dt_exact).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut psi = psi0.to_vec();
    for _ in 0..steps {
        psi = taylor_step(model, n, &psi, h);
    }
    psi
}

/// `exp(-i h H) ψ` by its Taylor series.
fn taylor_step(model: &ClockModel, n: usize, psi: &[C64], h: f64) -> Vec<C64> {
    let mut out = psi.to_vec();
    let mut term = psi.to_vec();
    for k in 1..=TAYLOR_MAX_TERMS {
        let coeff = C64::new(0.0, -h / k as f64);
        term = model.apply_chain_hamiltonian(n, &term).into_iter().map(|x| x * coeff).collect();
        let mut norm = 0.0;
        for (o, x) in out.iter_mut().zip(&term) {
            *o += x;
            norm += x.norm_sqr();
        }
        if norm.sqrt() < TAYLOR_TOL {
            break;
        }
    }
    out
}

fn capacity(d: usize, n: usize) -> Error {
    Error::Capacity(format!("{d}^{n} exceeds the exact-diagonalization limit of {ED_MAX_DIM}"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdObservables {
    /// `⟨Z_n⟩` for every site.
    pub z: Vec<C64>,
    /// Von Neumann entropy of the half-chain cut after site `⌊n/2⌋ − 1`.
    pub entropy: f64,
    pub schmidt: Vec<f64>,
}

/// Local `⟨Z⟩` profile and half-chain Schmidt spectrum of a state vector.
pub fn ed_observables(psi: &[C64], d: usize, n: usize) -> Result<EdObservables> {
    let dim = checked_dim(d, n)?;
    if psi.len() != dim {
        return Err(input_err!("state has {} amplitudes, expected {dim}", psi.len()));
    }
    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(input_err!("state is not normalized: ⟨ψ|ψ⟩ = {norm}"));
    }
    let (z, _) = clock_operators(d)?;
    let z_diag: Vec<C64> = (0..d).map(|k| z.get(&[k, k])).collect();
    let mut profile = vec![C64::new(0.0, 0.0); n];
    for (idx, amp) in psi.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut rest = idx;
        for site in (0..n).rev() {
            profile[site] += z_diag[rest % d] * p;
            rest /= d;
        }
    }
    let left = d.pow((n / 2) as u32);
    let schmidt = singular_values(&ComplexTensor::matrix(left, dim / left, psi.to_vec())?)?;
    Ok(EdObservables {
        z: profile,
        entropy: entropy_from_schmidt(&schmidt),
        schmidt,
    })
}
