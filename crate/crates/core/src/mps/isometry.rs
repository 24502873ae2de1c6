/// Gauge-condition defects of an MPS.
///
/// For uniform states with right environment `ρ = 1` and left environment
/// `E^[m] = Ξ^[m]† Ξ^[m]`:
///
/// - `site_defects[m]`: `max |Σ_{iβ} B^i_{αβ} conj(B^i_{α'β}) − δ_{αα'}|`
///   (for finite chains, the left-isometry defect is used left of the center);
/// - `translation_defects[m]`: `max |Σ_i B^[m]i† E^[m] B^[m]i − E^[m+1]|`;
/// - `fixed_point_defects[m]`: the same after transporting `E^[m]` around the
///   whole unit cell, i.e. how far it is from a left fixed point;
/// - `norm_defects[m]`: `|‖Ξ^[m]‖² − 1|`.
///
/// Finite chains report no translation or fixed-point defects.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    pub tol: f64,
    pub site_defects: Vec<f64>,
    pub translation_defects: Vec<f64>,
    pub fixed_point_defects: Vec<f64>,
    pub norm_defects: Vec<f64>,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

impl IsometryReport {
    pub fn max_isometry_defect(&self) -> f64 {
        max_of(&self.site_defects)
    }

    pub fn max_translation_defect(&self) -> f64 {
        max_of(&self.translation_defects)
    }

    pub fn max_left_eigenvector_defect(&self) -> f64 {
        max_of(&self.fixed_point_defects)
    }

    pub fn max_norm_defect(&self) -> f64 {
        max_of(&self.norm_defects)
    }

    /// Largest of all recorded defects.
    pub fn max_defect(&self) -> f64 {
        self.max_isometry_defect()
            .max(self.max_translation_defect())
            .max(self.max_left_eigenvector_defect())
            .max(self.max_norm_defect())
    }

    pub fn passed(&self) -> bool {
        self.max_defect() <= self.tol
    }
}
