//! Single-gate timing benchmark.
//!
//! Each cell draws a normalized bond matrix, two right-isometric site tensors
//! of bond dimension `χ` (QR of complex Gaussian matrices) and a random
//! two-site unitary, then times the full update back to `χ̃ = χ`. Input
//! generation stays outside the timed region.

use std::path::Path;
use std::time::Instant;

use qrtebd::random::{ginibre, right_isometric_site, unitary};
use qrtebd::tebd::{apply_gate, LeftForm, Scheme, TruncationPolicy, TwoSiteGate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Default guard on the estimated working set of one gate application.
pub const DEFAULT_MEMORY_BUDGET: usize = 4 << 30;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub d: usize,
    pub chi: usize,
    pub scheme: Scheme,
    pub repetitions: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub d_list: Vec<usize>,
    pub chi_list: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub repetitions: usize,
    pub memory_budget: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            d_list: vec![5, 8, 11, 14, 17, 20],
            chi_list: vec![64],
            schemes: vec![Scheme::Svd, Scheme::Qr, Scheme::QrCbe],
            repetitions: 10,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            seed: 0,
        }
    }
}

/// Bytes held by a handful of `d²χ²` complex work arrays.
pub fn working_set_bytes(d: usize, chi: usize) -> Option<usize> {
    let block = d.checked_mul(chi)?.checked_pow(2)?;
    block.checked_mul(16 * 6)
}

/// Policy used for every scheme: keep exactly `χ`, expand CBE by `0.1 χ`.
pub fn bench_policy(chi: usize) -> TruncationPolicy {
    TruncationPolicy {
        sv_cutoff: 0.0,
        delta_chi_abs: 0,
        delta_chi_rel: 0.1,
        qr_growth: false,
        ..TruncationPolicy::new(chi)
    }
}

/// Times one `(d, χ, scheme)` cell.
pub fn bench_cell(
    d: usize,
    chi: usize,
    scheme: Scheme,
    repetitions: usize,
    memory_budget: usize,
    seed: u64,
) -> CliResult<BenchRecord> {
    if d < 2 || chi < 1 {
        return Err(CliError::Validation(format!("need d ≥ 2 and χ ≥ 1, got d = {d}, χ = {chi}")));
    }
    if repetitions < 3 {
        return Err(CliError::Validation(format!("need at least 3 repetitions, got {repetitions}")));
    }
    match working_set_bytes(d, chi) {
        Some(b) if b <= memory_budget => {}
        _ => {
            return Err(CliError::Capacity(format!(
                "d = {d}, χ = {chi}: working set exceeds the memory budget of {memory_budget} bytes"
            )))
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = ginibre(&mut rng, chi, chi);
    let xi = xi.scale_real(1.0 / xi.norm());
    let bm = right_isometric_site(&mut rng, d, chi, chi);
    let bn = right_isometric_site(&mut rng, d, chi, chi);
    let gate = TwoSiteGate::from_matrix(d, unitary(&mut rng, d * d))?;
    let policy = bench_policy(chi);

    let mut times = Vec::with_capacity(repetitions);
    for rep in 0..=repetitions {
        let start = Instant::now();
        let out = apply_gate(scheme, &xi, &bm, &bn, &gate, &policy, LeftForm::Hastings)?;
        let elapsed = start.elapsed().as_secs_f64();
        std::hint::black_box(&out);
        if rep > 0 {
            times.push(elapsed);
        }
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BenchRecord {
        d,
        chi,
        scheme,
        repetitions,
        mean_s: mean,
        std_s: var.sqrt(),
    })
}

/// Runs every cell of the grid in order.
pub fn run_gate_bench(cfg: &BenchConfig) -> CliResult<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &chi in &cfg.chi_list {
        for &d in &cfg.d_list {
            for &scheme in &cfg.schemes {
                out.push(bench_cell(d, chi, scheme, cfg.repetitions, cfg.memory_budget, cfg.seed)?);
            }
        }
    }
    Ok(out)
}

pub fn write_bench_csv(path: &Path, records: &[BenchRecord]) -> CliResult<()> {
    let err = |e: csv::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["d", "chi", "scheme", "repetitions", "mean_s", "std_s"]).map_err(err)?;
    for r in records {
        w.write_record([
            r.d.to_string(),
            r.chi.to_string(),
            r.scheme.to_string(),
            r.repetitions.to_string(),
            crate::quench::num(r.mean_s),
            crate::quench::num(r.std_s),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(&path.display().to_string(), e))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of mean time against `d` for each `(χ, scheme)` with at least two points.
pub fn slopes_in_d(records: &[BenchRecord]) -> Vec<(usize, Scheme, f64)> {
    let mut keys: Vec<(usize, Scheme)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.chi, r.scheme)) {
            keys.push((r.chi, r.scheme));
        }
    }
    keys.into_iter()
        .filter_map(|(chi, scheme)| {
            let cell: Vec<&BenchRecord> = records.iter().filter(|r| r.chi == chi && r.scheme == scheme).collect();
            let x: Vec<f64> = cell.iter().map(|r| r.d as f64).collect();
            let y: Vec<f64> = cell.iter().map(|r| r.mean_s).collect();
            loglog_slope(&x, &y).map(|s| (chi, scheme, s))
        })
        .collect()
}
