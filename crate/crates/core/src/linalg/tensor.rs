use faer::linalg::matmul::matmul as faer_matmul;
use faer::traits::Conjugate;
use faer::{Accum, MatMut, MatRef};

use super::C64;
use crate::error::{input_err, shape_err, Result};

/// Dense rank-`n` array of complex doubles.
///
/// Entries are stored row-major: the last axis varies fastest. Grouping legs
/// `(a, b) -> a * dim(b) + b` is therefore a pure [`reshape`](Self::reshape),
/// and every leg regrouping in the update kernels relies on that.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn volume(shape: &[usize]) -> usize {
    shape.iter().product()
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(shape_err!("all dimensions must be positive, got {shape:?}"));
        }
        if volume(&shape) != data.len() {
            return Err(shape_err!(
                "shape {shape:?} needs {} entries, got {}",
                volume(&shape),
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        assert!(shape.iter().all(|&n| n > 0), "zero-sized axis in {shape:?}");
        Self {
            shape: shape.to_vec(),
            data: vec![C64::new(0.0, 0.0); volume(shape)],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut out = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for slot in out.data.iter_mut() {
            *slot = f(&idx);
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        out
    }

    /// Rank-2 tensor from row-major entries.
    pub fn matrix(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    /// Rank-2 tensor from real row-major entries.
    pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::matrix(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(&[n, n], |ix| {
            if ix[0] == ix[1] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_diag(values: &[f64]) -> Self {
        Self::from_diag_complex(&values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn from_diag_complex(values: &[C64]) -> Self {
        let n = values.len();
        let mut out = Self::zeros(&[n, n]);
        for (k, v) in values.iter().enumerate() {
            out.data[k * n + k] = *v;
        }
        out
    }

    pub fn vector(data: Vec<C64>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        assert_eq!(idx.len(), self.rank(), "index rank mismatch");
        let mut off = 0;
        for (k, (&i, &n)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(i < n, "index {i} out of range on axis {k}");
            off = off * n + i;
        }
        self.data[off]
    }

    pub fn nrows(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[0]
    }

    pub fn ncols(&self) -> usize {
        debug_assert_eq!(self.rank(), 2);
        self.shape[1]
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if shape.contains(&0) || volume(shape) != self.data.len() {
            return Err(shape_err!("cannot reshape {:?} into {shape:?}", self.shape));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Reorders axes: axis `k` of the result is axis `axes[k]` of `self`.
    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if axes.len() != r {
            return Err(shape_err!("permutation {axes:?} has wrong length for rank {r}"));
        }
        for &a in axes {
            if a >= r || seen[a] {
                return Err(shape_err!("{axes:?} is not a permutation of 0..{r}"));
            }
            seen[a] = true;
        }
        if axes.iter().enumerate().all(|(k, &a)| k == a) {
            return Ok(self.clone());
        }
        let in_strides = row_major_strides(&self.shape);
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let strides: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();

        let inner = out_shape[r - 1];
        let inner_stride = strides[r - 1];
        let mut out = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; r];
        let mut offset = 0usize;
        for _ in 0..self.data.len() / inner {
            if inner_stride == 1 {
                out.extend_from_slice(&self.data[offset..offset + inner]);
            } else {
                out.extend((0..inner).map(|k| self.data[offset + k * inner_stride]));
            }
            let mut ax = r - 1;
            while ax > 0 {
                ax -= 1;
                idx[ax] += 1;
                offset += strides[ax];
                if idx[ax] < out_shape[ax] {
                    break;
                }
                offset -= strides[ax] * out_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self {
            shape: out_shape,
            data: out,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose of a matrix.
    pub fn adjoint(&self) -> Self {
        assert_eq!(self.rank(), 2, "adjoint needs a matrix");
        let mut t = self.permute(&[1, 0]).expect("rank-2 transpose");
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(shape_err!("shape {:?} vs {:?}", self.shape, other.shape));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// First `n` rows of a matrix.
    pub fn take_rows(&self, n: usize) -> Result<Self> {
        if self.rank() != 2 || n == 0 || n > self.shape[0] {
            return Err(shape_err!("cannot take {n} rows of {:?}", self.shape));
        }
        let cols = self.shape[1];
        Self::matrix(n, cols, self.data[..n * cols].to_vec())
    }

    /// First `n` columns of a matrix.
    pub fn take_cols(&self, n: usize) -> Result<Self> {
        if self.rank() != 2 || n == 0 || n > self.shape[1] {
            return Err(shape_err!("cannot take {n} columns of {:?}", self.shape));
        }
        let cols = self.shape[1];
        let data = self
            .data
            .chunks_exact(cols)
            .flat_map(|row| row[..n].iter().copied())
            .collect();
        Self::matrix(self.shape[0], n, data)
    }

    pub(crate) fn as_mat(&self) -> MatRef<'_, C64> {
        assert_eq!(self.rank(), 2, "expected a matrix, got shape {:?}", self.shape);
        MatRef::from_row_major_slice(&self.data, self.shape[0], self.shape[1])
    }

    pub(crate) fn from_mat(m: MatRef<'_, C64>) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self {
            shape: vec![rows, cols],
            data,
        }
    }
}

fn gemm<L, R>(out: &mut [C64], rows: usize, cols: usize, lhs: MatRef<'_, L>, rhs: MatRef<'_, R>)
where
    L: Conjugate<Canonical = C64>,
    R: Conjugate<Canonical = C64>,
{
    let dst = MatMut::from_row_major_slice_mut(out, rows, cols);
    faer_matmul(
        dst,
        Accum::Replace,
        lhs,
        rhs,
        C64::new(1.0, 0.0),
        faer::get_global_parallelism(),
    );
}

/// Matrix product `a · b`.
pub fn matmul(a: &ComplexTensor, b: &ComplexTensor) -> Result<ComplexTensor> {
    check_matrices(a, b)?;
    if a.ncols() != b.nrows() {
        return Err(shape_err!("matmul {:?} x {:?}", a.shape, b.shape));
    }
    let (m, n) = (a.nrows(), b.ncols());
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    gemm(&mut out, m, n, a.as_mat(), b.as_mat());
    ComplexTensor::matrix(m, n, out)
}

/// `a · b†` without materializing the adjoint.
pub fn matmul_adj_rhs(a: &ComplexTensor, b: &ComplexTensor) -> Result<ComplexTensor> {
    check_matrices(a, b)?;
    if a.ncols() != b.ncols() {
        return Err(shape_err!("matmul_adj_rhs {:?} x {:?}†", a.shape, b.shape));
    }
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    gemm(&mut out, m, n, a.as_mat(), b.as_mat().adjoint());
    ComplexTensor::matrix(m, n, out)
}

/// `a† · b` without materializing the adjoint.
pub fn matmul_adj_lhs(a: &ComplexTensor, b: &ComplexTensor) -> Result<ComplexTensor> {
    check_matrices(a, b)?;
    if a.nrows() != b.nrows() {
        return Err(shape_err!("matmul_adj_lhs {:?}† x {:?}", a.shape, b.shape));
    }
    let (m, n) = (a.ncols(), b.ncols());
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    gemm(&mut out, m, n, a.as_mat().adjoint(), b.as_mat());
    ComplexTensor::matrix(m, n, out)
}

fn check_matrices(a: &ComplexTensor, b: &ComplexTensor) -> Result<()> {
    if a.rank() != 2 || b.rank() != 2 {
        return Err(shape_err!("expected matrices, got {:?} and {:?}", a.shape, b.shape));
    }
    Ok(())
}

/// Sums over each pair `(axis of a, axis of b)` in `axes`.
///
/// The result carries the free axes of `a` in order, followed by the free axes
/// of `b`. An empty `axes` gives the outer product.
pub fn contract(a: &ComplexTensor, b: &ComplexTensor, axes: &[(usize, usize)]) -> Result<ComplexTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(i, j) in axes {
        if i >= a.rank() || j >= b.rank() {
            return Err(shape_err!("contraction axes {axes:?} out of range"));
        }
        if used_a[i] || used_b[j] {
            return Err(input_err!("axis repeated in {axes:?}"));
        }
        if a.shape[i] != b.shape[j] {
            return Err(shape_err!(
                "axis {i} of {:?} does not match axis {j} of {:?}",
                a.shape,
                b.shape
            ));
        }
        used_a[i] = true;
        used_b[j] = true;
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&k| !used_a[k]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&k| !used_b[k]).collect();

    let perm_a: Vec<usize> = free_a.iter().copied().chain(axes.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = axes.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();

    let rows: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let inner: usize = axes.iter().map(|p| a.shape[p.0]).product();
    let cols: usize = free_b.iter().map(|&k| b.shape[k]).product();

    let am = a.permute(&perm_a)?.reshape(&[rows, inner])?;
    let bm = b.permute(&perm_b)?.reshape(&[inner, cols])?;
    let out = matmul(&am, &bm)?;

    let out_shape: Vec<usize> = free_a
        .iter()
        .map(|&k| a.shape[k])
        .chain(free_b.iter().map(|&k| b.shape[k]))
        .collect();
    if out_shape.is_empty() {
        return Ok(ComplexTensor {
            shape: vec![],
            data: out.data,
        });
    }
    out.reshape(&out_shape)
}

/// Left-multiplies `g` (`m × k`) onto each of `blocks` consecutive row-major
/// `k × n` slabs stored in `x`, returning a `(blocks, m, n)` tensor.
pub fn matmul_batched_left(g: &ComplexTensor, x: &ComplexTensor, blocks: usize) -> Result<ComplexTensor> {
    if g.rank() != 2 || blocks == 0 {
        return Err(shape_err!("batched product needs a matrix and at least one block"));
    }
    let (m, k) = (g.nrows(), g.ncols());
    if !x.len().is_multiple_of(blocks * k) {
        return Err(shape_err!("{} entries do not split into {blocks} slabs of {k} rows", x.len()));
    }
    let n = x.len() / (blocks * k);
    let mut out = vec![C64::new(0.0, 0.0); blocks * m * n];
    let gm = g.as_mat();
    for (src, dst) in x.data.chunks_exact(k * n).zip(out.chunks_exact_mut(m * n)) {
        gemm(dst, m, n, gm, MatRef::from_row_major_slice(src, k, n));
    }
    ComplexTensor::new(vec![blocks, m, n], out)
}
