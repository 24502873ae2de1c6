//! Independent reference implementations used only by unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{ComplexTensor, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Triple-loop matrix product.
pub fn naive_matmul(a: &ComplexTensor, b: &ComplexTensor) -> ComplexTensor {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows());
    let mut out = vec![C64::new(0.0, 0.0); n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                out[i * m + j] += a.data()[i * k + l] * b.data()[l * m + j];
            }
        }
    }
    ComplexTensor::matrix(n, m, out).unwrap()
}

/// `m† m` by explicit loops.
pub fn gram(m: &ComplexTensor) -> ComplexTensor {
    naive_matmul(&m.adjoint(), m)
}

/// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi rotations
/// on its real symmetric embedding `[[A, −B], [B, A]]` (each eigenvalue
/// appears twice there).
pub fn jacobi_eigenvalues(h: &ComplexTensor) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(&[i, j]);
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut w: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    w.sort_by(|x, y| y.partial_cmp(x).unwrap());
    w.into_iter().step_by(2).collect()
}

/// Singular values from the Jacobi spectrum of `m† m`.
pub fn oracle_singular_values(m: &ComplexTensor) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    jacobi_eigenvalues(&gram(m))
        .into_iter()
        .take(k)
        .map(|x| x.max(0.0).sqrt())
        .collect()
}

/// `Σ_{k<terms} (−i t h)^k / k!`.
pub fn taylor_expm(h: &ComplexTensor, t: f64, terms: usize) -> ComplexTensor {
    let n = h.nrows();
    let mut out = ComplexTensor::identity(n);
    let mut term = ComplexTensor::identity(n);
    for k in 1..terms {
        term = naive_matmul(&term, h).scale(C64::new(0.0, -t / k as f64));
        out = out.add(&term).unwrap();
    }
    out
}

/// `⟨ψ| O_site |ψ⟩` on a dense state, site 0 most significant.
pub fn statevector_expectation(psi: &[C64], d: usize, n: usize, op: &ComplexTensor, site: usize) -> C64 {
    let stride = d.pow((n - 1 - site) as u32);
    let mut acc = C64::new(0.0, 0.0);
    for (idx, amp) in psi.iter().enumerate() {
        let k = (idx / stride) % d;
        for kp in 0..d {
            let o = op.get(&[k, kp]);
            if o == C64::new(0.0, 0.0) {
                continue;
            }
            let jdx = idx - k * stride + kp * stride;
            acc += amp.conj() * o * psi[jdx];
        }
    }
    acc
}
