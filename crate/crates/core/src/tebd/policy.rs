use std::fmt;
use std::str::FromStr;

use crate::error::{input_err, Error, Result};

/// Which decomposition performs the two-site truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Thin SVD of the evolved block.
    Svd,
    /// Eigendecomposition of `θ̃†θ̃`; the left singular vectors are never formed.
    Eig,
    /// One QR and one LQ decomposition seeded with the old right tensor.
    Qr,
    /// QR scheme on an expanded bond, then truncation by the spectrum of `L†L`.
    QrCbe,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Svd, Scheme::Eig, Scheme::Qr, Scheme::QrCbe];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Svd => "svd",
            Scheme::Eig => "eig",
            Scheme::Qr => "qr",
            Scheme::QrCbe => "qr_cbe",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Scheme::Svd),
            "eig" => Ok(Scheme::Eig),
            "qr" => Ok(Scheme::Qr),
            "qr_cbe" | "qr-cbe" => Ok(Scheme::QrCbe),
            other => Err(input_err!("unknown scheme {other:?} (expected svd, eig, qr or qr_cbe)")),
        }
    }
}

/// Truncation controls shared by all schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Hard cap on the kept bond dimension.
    pub chi_max: usize,
    /// Normalized Schmidt values below this are discarded.
    pub sv_cutoff: f64,
    /// Optional bound on the discarded relative weight; the smallest bond
    /// dimension meeting it is kept (still subject to `chi_max`).
    pub target_eps: Option<f64>,
    /// Absolute part of the expansion `Δχ = max(abs, ⌈rel · χ⌉)`.
    pub delta_chi_abs: usize,
    /// Relative part of the expansion.
    pub delta_chi_rel: f64,
    /// Optional cap on the expanded dimension `η`.
    pub chi_max_expansion: Option<usize>,
    /// Plain QR scheme: seed with an `η = min(chi_max, dχ)` slice of the
    /// evolved block instead of the old right tensor, so the bond can grow.
    /// Off by default, in which case the bond dimension is preserved.
    pub qr_growth: bool,
    /// Number of alternating QR/LQ passes; one suffices for near-identity gates.
    pub qr_sweeps: usize,
    /// Rescale the new bond matrix to unit norm after each gate.
    pub renormalize: bool,
}

impl TruncationPolicy {
    pub fn new(chi_max: usize) -> Self {
        Self {
            chi_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_max < 1 {
            return Err(input_err!("chi_max must be at least 1"));
        }
        if !(self.sv_cutoff >= 0.0) {
            return Err(input_err!("sv_cutoff must be non-negative"));
        }
        if !(self.delta_chi_rel >= 0.0) || !self.delta_chi_rel.is_finite() {
            return Err(input_err!("delta_chi_rel must be a non-negative number"));
        }
        if self.qr_sweeps == 0 {
            return Err(input_err!("qr_sweeps must be at least 1"));
        }
        if let Some(eps) = self.target_eps {
            if !(eps >= 0.0) {
                return Err(input_err!("target_eps must be non-negative"));
            }
        }
        Ok(())
    }

    /// `η = min(d·χ, chi_max_expansion, χ + max(Δχ_abs, ⌈Δχ_rel · χ⌉))`.
    pub fn expanded_dim(&self, chi: usize, d: usize) -> usize {
        let delta = self.delta_chi_abs.max((self.delta_chi_rel * chi as f64).ceil() as usize);
        let mut eta = (chi + delta).min(d * chi);
        if let Some(cap) = self.chi_max_expansion {
            eta = eta.min(cap.max(1));
        }
        eta.max(1)
    }

    /// Number of values to keep from a descending spectrum `s`.
    ///
    /// `total` is the squared norm the spectrum is measured against. Ties at
    /// the cut keep the lower index.
    pub fn kept_count(&self, s: &[f64], total: f64) -> usize {
        if s.is_empty() {
            return 0;
        }
        let norm = total.sqrt();
        let above = if norm > 0.0 {
            s.iter().take_while(|&&x| x / norm >= self.sv_cutoff).count()
        } else {
            1
        };
        let mut keep = above.min(self.chi_max).min(s.len());
        if let (Some(target), true) = (self.target_eps, total > 0.0) {
            let mut kept_weight = 0.0;
            for (k, &x) in s.iter().enumerate().take(keep) {
                kept_weight += x * x;
                if (total - kept_weight) / total <= target {
                    keep = k + 1;
                    break;
                }
            }
        }
        keep.max(1)
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            chi_max: 256,
            sv_cutoff: 1e-14,
            target_eps: None,
            delta_chi_abs: 100,
            delta_chi_rel: 0.1,
            chi_max_expansion: None,
            qr_growth: false,
            qr_sweeps: 1,
            renormalize: true,
        }
    }
}

/// Outcome of one two-site update.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationReport {
    pub scheme: Scheme,
    /// Bond dimension between the two sites before the update.
    pub chi_before: usize,
    /// Width at which the decomposition was carried out (`η`).
    pub chi_expanded: usize,
    /// Bond dimension after truncation (`χ̃`).
    pub chi_after: usize,
    /// `‖θ̃ − θ̃_approx‖² / ‖θ̃‖²`.
    pub eps_trunc: f64,
    /// `‖θ̃ − θ̃_approx‖²`, before any renormalization.
    pub discarded_weight: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_rule() {
        let p = TruncationPolicy::default();
        assert_eq!(p.expanded_dim(1, 5), 5);
        assert_eq!(p.expanded_dim(64, 5), 164);
        assert_eq!(p.expanded_dim(2000, 5), 2200);
        assert_eq!(p.expanded_dim(10, 3), 30);
        let capped = TruncationPolicy {
            chi_max_expansion: Some(120),
            ..p
        };
        assert_eq!(capped.expanded_dim(64, 5), 120);
        let bench = TruncationPolicy {
            delta_chi_abs: 0,
            delta_chi_rel: 0.1,
            ..TruncationPolicy::default()
        };
        assert_eq!(bench.expanded_dim(64, 20), 71);
    }

    #[test]
    fn cutoff_and_cap() {
        let p = TruncationPolicy {
            sv_cutoff: 0.1,
            ..TruncationPolicy::new(3)
        };
        let s = [0.9, 0.4, 0.15, 0.05, 0.01];
        let total: f64 = s.iter().map(|x| x * x).sum();
        assert_eq!(p.kept_count(&s, total), 3);
        let tight = TruncationPolicy {
            sv_cutoff: 0.3,
            ..TruncationPolicy::new(10)
        };
        assert_eq!(tight.kept_count(&s, total), 2);
    }

    #[test]
    fn ties_at_cut_keep_lower_index() {
        let p = TruncationPolicy::new(2);
        assert_eq!(p.kept_count(&[0.5, 0.5, 0.5, 0.5], 1.0), 2);
    }

    #[test]
    fn target_error() {
        let p = TruncationPolicy {
            target_eps: Some(0.05),
            ..TruncationPolicy::new(10)
        };
        let s = [0.8f64.sqrt(), 0.16f64.sqrt(), 0.04f64.sqrt()];
        assert_eq!(p.kept_count(&s, 1.0), 2);
    }

    #[test]
    fn degenerate_spectrum_keeps_one() {
        let p = TruncationPolicy::default();
        assert_eq!(p.kept_count(&[0.0, 0.0], 0.0), 1);
        assert_eq!(p.kept_count(&[], 0.0), 0);
    }

    #[test]
    fn validation() {
        assert!(TruncationPolicy::default().validate().is_ok());
        assert!(TruncationPolicy::new(0).validate().is_err());
        let bad = TruncationPolicy {
            delta_chi_rel: -0.1,
            ..TruncationPolicy::default()
        };
        assert!(bad.validate().is_err());
        let bad = TruncationPolicy {
            sv_cutoff: f64::NAN,
            ..TruncationPolicy::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("qr-cbe".parse::<Scheme>().unwrap(), Scheme::QrCbe);
        assert!("lanczos".parse::<Scheme>().is_err());
    }
}
