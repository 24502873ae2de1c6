use super::{
    bond_schmidt_values, check_site, identity_defect, local_expectation, product_site, right_gram, IsometryReport,
    MatrixProductState,
};
use crate::error::{shape_err, Result};
use crate::linalg::{matmul, matmul_adj_lhs, ComplexTensor, C64};

/// Translation-invariant infinite MPS described by one unit cell.
///
/// Holds `L` right-isometric site tensors `B^[m]` and `L` bond matrices
/// `Ξ^[m]`, where `Ξ^[m]` sits on the bond left of site `m` and has unit
/// Frobenius norm. The state across that bond reads
/// `|ψ⟩ = Σ |α⟩_left Ξ_{αβ} |β⟩_right`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformMps {
    d: usize,
    sites: Vec<ComplexTensor>,
    bonds: Vec<ComplexTensor>,
}

impl UniformMps {
    /// Assembles a unit cell, checking that all bond dimensions line up.
    pub fn from_parts(sites: Vec<ComplexTensor>, bonds: Vec<ComplexTensor>) -> Result<Self> {
        let n = sites.len();
        if n == 0 || bonds.len() != n {
            return Err(shape_err!("need L ≥ 1 sites and L bond matrices, got {} and {}", n, bonds.len()));
        }
        let d = sites[0].shape().first().copied().unwrap_or(0);
        for m in 0..n {
            let (l, r) = check_site(&sites[m], d)?;
            let (l_next, _) = check_site(&sites[(m + 1) % n], d)?;
            if r != l_next {
                return Err(shape_err!("right bond of site {m} ({r}) != left bond of site {} ({l_next})", (m + 1) % n));
            }
            let xi = &bonds[m];
            if xi.rank() != 2 || xi.ncols() != l {
                return Err(shape_err!("Ξ^[{m}] has shape {:?}, expected (·, {l})", xi.shape()));
            }
        }
        Ok(Self { d, sites, bonds })
    }

    /// All sites in the same normalized local state; every bond has dimension 1.
    pub fn product_state(d: usize, cell_len: usize, local: &[C64]) -> Result<Self> {
        if cell_len == 0 {
            return Err(shape_err!("unit cell must contain at least one site"));
        }
        let site = product_site(d, local)?;
        let one = ComplexTensor::identity(1);
        Self::from_parts(vec![site; cell_len], vec![one; cell_len])
    }

    pub fn unit_cell_len(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, m: usize) -> &ComplexTensor {
        &self.sites[m % self.sites.len()]
    }

    /// `Ξ^[m]`, on the bond left of site `m`.
    pub fn bond(&self, m: usize) -> &ComplexTensor {
        &self.bonds[m % self.bonds.len()]
    }

    pub fn sites(&self) -> &[ComplexTensor] {
        &self.sites
    }

    pub fn bonds(&self) -> &[ComplexTensor] {
        &self.bonds
    }

    /// Dimension of the bond left of site `m`.
    pub fn bond_dim(&self, m: usize) -> usize {
        self.site(m).shape()[1]
    }

    pub fn into_parts(self) -> (Vec<ComplexTensor>, Vec<ComplexTensor>) {
        (self.sites, self.bonds)
    }

    /// Replaces the pair update on sites `m`, `m + 1 mod L` and the bond between them.
    pub(crate) fn set_pair(&mut self, m: usize, left: ComplexTensor, bond: ComplexTensor, right: ComplexTensor) {
        let n = (m + 1) % self.sites.len();
        self.sites[m] = left;
        self.bonds[n] = bond;
        self.sites[n] = right;
    }

    /// Left environment `Ξ†Ξ` transported through site `m`:
    /// `Σ_i B^i† E B^i`.
    fn transfer_left(env: &ComplexTensor, site: &ComplexTensor) -> Result<ComplexTensor> {
        let (d, l, r) = (site.shape()[0], site.shape()[1], site.shape()[2]);
        let grouped = site.permute(&[1, 0, 2])?.reshape(&[l, d * r])?;
        let eb = matmul(env, &grouped)?.reshape(&[l * d, r])?;
        let b = grouped.reshape(&[l * d, r])?;
        matmul_adj_lhs(&b, &eb)
    }
}

impl MatrixProductState for UniformMps {
    fn phys_dim(&self) -> usize {
        self.d
    }

    fn num_sites(&self) -> usize {
        self.sites.len()
    }

    fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    fn expectation_local(&self, op: &ComplexTensor, site: usize) -> Result<C64> {
        if site >= self.sites.len() {
            return Err(shape_err!("site {site} outside unit cell of {}", self.sites.len()));
        }
        local_expectation(&self.bonds[site], &self.sites[site], op)
    }

    fn schmidt_values(&self, bond: usize) -> Result<Vec<f64>> {
        if bond >= self.bonds.len() {
            return Err(shape_err!("bond {bond} outside unit cell of {}", self.bonds.len()));
        }
        bond_schmidt_values(&self.bonds[bond])
    }

    fn check_isometric(&self, tol: f64) -> IsometryReport {
        let n = self.sites.len();
        let site_defects: Vec<f64> = self.sites.iter().map(|b| identity_defect(&right_gram(b))).collect();
        let norm_defects: Vec<f64> = self.bonds.iter().map(|x| (x.norm_sqr() - 1.0).abs()).collect();

        let envs: Vec<ComplexTensor> = self.bonds.iter().map(|x| matmul_adj_lhs(x, x).expect("square product")).collect();
        let mut translation_defects = Vec::with_capacity(n);
        let mut fixed_point_defects = Vec::with_capacity(n);
        for m in 0..n {
            let next = Self::transfer_left(&envs[m], &self.sites[m]);
            let defect = match next {
                Ok(e) if e.shape() == envs[(m + 1) % n].shape() => e.max_abs_diff(&envs[(m + 1) % n]),
                _ => f64::INFINITY,
            };
            translation_defects.push(defect);

            let mut env = envs[m].clone();
            let mut ok = true;
            for k in 0..n {
                match Self::transfer_left(&env, &self.sites[(m + k) % n]) {
                    Ok(e) => env = e,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            fixed_point_defects.push(if ok && env.shape() == envs[m].shape() {
                env.max_abs_diff(&envs[m])
            } else {
                f64::INFINITY
            });
        }
        IsometryReport {
            tol,
            site_defects,
            fixed_point_defects,
            translation_defects,
            norm_defects,
        }
    }

    fn max_bond_dim(&self) -> usize {
        (0..self.sites.len()).map(|m| self.bond_dim(m)).max().unwrap_or(1)
    }
}
