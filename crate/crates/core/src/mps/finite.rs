use super::{
    bond_schmidt_values, check_site, identity_defect, left_gram, local_expectation, product_site, right_gram,
    IsometryReport, MatrixProductState,
};
use crate::error::{shape_err, Result};
use crate::linalg::{lq_reduced, matmul, qr_reduced, ComplexTensor, C64};

/// Open-boundary MPS with an explicit orthogonality center.
///
/// Bond `b` sits between sites `b - 1` and `b`; bonds `0` and `N` are the
/// trivial boundary legs. Sites left of `center` are left-isometric, sites at
/// or right of it are right-isometric, and the state norm is carried by the
/// `center_matrix` on bond `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMps {
    d: usize,
    sites: Vec<ComplexTensor>,
    center: usize,
    center_matrix: ComplexTensor,
}

impl FiniteMps {
    pub fn from_parts(sites: Vec<ComplexTensor>, center: usize, center_matrix: ComplexTensor) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(shape_err!("finite chain needs at least one site"));
        }
        if center > n {
            return Err(shape_err!("center bond {center} outside 0..={n}"));
        }
        let d = sites[0].shape().first().copied().unwrap_or(0);
        let mut dims = Vec::with_capacity(n);
        for (k, s) in sites.iter().enumerate() {
            let (l, r) = check_site(s, d)?;
            if k > 0 && dims[k - 1] != l && k != center {
                return Err(shape_err!("bond {k}: site {} has right dim {} but site {k} has left dim {l}", k - 1, dims[k - 1]));
            }
            dims.push(r);
        }
        if sites[0].shape()[1] != 1 && center != 0 {
            return Err(shape_err!("left boundary bond must have dimension 1"));
        }
        if sites[n - 1].shape()[2] != 1 && center != n {
            return Err(shape_err!("right boundary bond must have dimension 1"));
        }
        let rows = if center == 0 { 1 } else { sites[center - 1].shape()[2] };
        let cols = if center == n { 1 } else { sites[center].shape()[1] };
        if center_matrix.shape() != [rows, cols] {
            return Err(shape_err!(
                "center matrix on bond {center} must be {rows}×{cols}, got {:?}",
                center_matrix.shape()
            ));
        }
        Ok(Self {
            d,
            sites,
            center,
            center_matrix,
        })
    }

    /// `N` sites in the same normalized local state, center on bond 0.
    pub fn product_state(d: usize, length: usize, local: &[C64]) -> Result<Self> {
        if length == 0 {
            return Err(shape_err!("finite chain needs at least one site"));
        }
        let site = product_site(d, local)?;
        Self::from_parts(vec![site; length], 0, ComplexTensor::identity(1))
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn center_matrix(&self) -> &ComplexTensor {
        &self.center_matrix
    }

    pub fn sites(&self) -> &[ComplexTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &ComplexTensor {
        &self.sites[k]
    }

    pub fn into_parts(self) -> (Vec<ComplexTensor>, usize, ComplexTensor) {
        (self.sites, self.center, self.center_matrix)
    }

    /// Dimension of bond `b` as seen from the site to its right (or the left
    /// site for `b = N`).
    pub fn bond_dim(&self, b: usize) -> usize {
        if b == self.center {
            let s = self.center_matrix.shape();
            s[0].max(s[1])
        } else if b < self.sites.len() {
            self.sites[b].shape()[1]
        } else {
            self.sites[b - 1].shape()[2]
        }
    }

    /// Moves the orthogonality center to bond `target` by successive QR (going
    /// right) or LQ (going left) factorizations. The represented vector is
    /// unchanged.
    pub fn move_center(&self, target: usize) -> Result<Self> {
        let mut out = self.clone();
        out.move_center_in_place(target)?;
        Ok(out)
    }

    pub(crate) fn move_center_in_place(&mut self, target: usize) -> Result<()> {
        if target > self.sites.len() {
            return Err(shape_err!("center bond {target} outside 0..={}", self.sites.len()));
        }
        while self.center < target {
            self.shift_right()?;
        }
        while self.center > target {
            self.shift_left()?;
        }
        Ok(())
    }

    fn shift_right(&mut self) -> Result<()> {
        let c = self.center;
        let site = &self.sites[c];
        let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
        let rows = self.center_matrix.nrows();
        let grouped = site.permute(&[1, 0, 2])?.reshape(&[l, d * r])?;
        // (rows, d, r) -> (d, rows, r) -> ((i, α), r)
        let m = matmul(&self.center_matrix, &grouped)?
            .reshape(&[rows, d, r])?
            .permute(&[1, 0, 2])?
            .reshape(&[d * rows, r])?;
        let (q, rf) = qr_reduced(&m)?;
        let k = q.ncols();
        self.sites[c] = q.reshape(&[d, rows, k])?;
        self.center_matrix = rf;
        self.center = c + 1;
        Ok(())
    }

    fn shift_left(&mut self) -> Result<()> {
        let c = self.center;
        let site = &self.sites[c - 1];
        let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
        let cols = self.center_matrix.ncols();
        // ((i, α), r) · C -> (d, l, cols) -> (l, (i, β))
        let m = matmul(&site.clone().reshape(&[d * l, r])?, &self.center_matrix)?
            .reshape(&[d, l, cols])?
            .permute(&[1, 0, 2])?
            .reshape(&[l, d * cols])?;
        let (lf, q) = lq_reduced(&m)?;
        let k = q.nrows();
        self.sites[c - 1] = q.reshape(&[k, d, cols])?.permute(&[1, 0, 2])?;
        self.center_matrix = lf;
        self.center = c - 1;
        Ok(())
    }

    /// Installs an isometric two-site update on sites `b`, `b + 1`; the center
    /// must sit on bond `b` and moves to bond `b + 1`.
    pub(crate) fn set_pair(&mut self, b: usize, left: ComplexTensor, center: ComplexTensor, right: ComplexTensor) {
        debug_assert_eq!(self.center, b);
        self.sites[b] = left;
        self.sites[b + 1] = right;
        self.center_matrix = center;
        self.center = b + 1;
    }

    /// Dense state vector; site 0 is the most significant digit.
    pub fn to_statevector(&self) -> Result<Vec<C64>> {
        let n = self.sites.len();
        // left-to-right: accumulate (basis, bond) with the center matrix inserted
        let mut acc = ComplexTensor::identity(1);
        for k in 0..n {
            if k == self.center {
                acc = matmul(&acc, &self.center_matrix)?;
            }
            let site = &self.sites[k];
            let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
            let grouped = site.permute(&[1, 0, 2])?.reshape(&[l, d * r])?;
            let rows = acc.nrows();
            acc = matmul(&acc, &grouped)?.reshape(&[rows * d, r])?;
        }
        if self.center == n {
            acc = matmul(&acc, &self.center_matrix)?;
        }
        Ok(acc.into_data())
    }
}

impl MatrixProductState for FiniteMps {
    fn phys_dim(&self) -> usize {
        self.d
    }

    fn num_sites(&self) -> usize {
        self.sites.len()
    }

    fn num_bonds(&self) -> usize {
        self.sites.len() + 1
    }

    fn expectation_local(&self, op: &ComplexTensor, site: usize) -> Result<C64> {
        if site >= self.sites.len() {
            return Err(shape_err!("site {site} outside chain of {}", self.sites.len()));
        }
        let moved;
        let state = if self.center == site {
            self
        } else {
            moved = self.move_center(site)?;
            &moved
        };
        local_expectation(&state.center_matrix, &state.sites[site], op)
    }

    fn expectation_profile(&self, op: &ComplexTensor) -> Result<Vec<C64>> {
        let mut state = self.move_center(0)?;
        let mut out = Vec::with_capacity(self.sites.len());
        for s in 0..self.sites.len() {
            state.move_center_in_place(s)?;
            out.push(local_expectation(&state.center_matrix, &state.sites[s], op)?);
        }
        Ok(out)
    }

    fn schmidt_values(&self, bond: usize) -> Result<Vec<f64>> {
        if bond == self.center {
            return bond_schmidt_values(&self.center_matrix);
        }
        bond_schmidt_values(&self.move_center(bond)?.center_matrix)
    }

    fn check_isometric(&self, tol: f64) -> IsometryReport {
        let site_defects = self
            .sites
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k < self.center {
                    identity_defect(&left_gram(s))
                } else {
                    identity_defect(&right_gram(s))
                }
            })
            .collect();
        IsometryReport {
            tol,
            site_defects,
            fixed_point_defects: vec![],
            translation_defects: vec![],
            norm_defects: vec![(self.center_matrix.norm_sqr() - 1.0).abs()],
        }
    }

    fn max_bond_dim(&self) -> usize {
        (0..=self.sites.len()).map(|b| self.bond_dim(b)).max().unwrap_or(1)
    }
}
