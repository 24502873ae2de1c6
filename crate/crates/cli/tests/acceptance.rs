//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported but do not fail the run unless
//! `ACCEPTANCE_STRICT=1` is set.

use std::process::Command;
use std::time::Instant;

use qrtebd::mps::UniformMps;
use qrtebd::random::{right_isometric_site, unitary};
use qrtebd::tebd::{
    apply_gate_qr, apply_gate_svd, tebd_step, truncation_error_explicit, LeftForm, Scheme, TruncationPolicy,
    TwoSiteGate,
};
use qrtebd::clock::{BondPosition, ClockModel};
use qrtebd::{ComplexTensor, C64};
use qrtebd_cli::bench::{run_gate_bench, slopes_in_d, BenchConfig};
use qrtebd_cli::verify::{ed_deviation, finite_config, row_deviation, run_with_invariants, uniform_config, InvariantTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome {
        passed,
        summary,
        details: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// independent oracles

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `Ξ · G · (B^[m] B^[n])` grouped `(α i) × (j δ)`, by explicit loops.
fn evolved_block(xi: &ComplexTensor, gate: &ComplexTensor, bm: &ComplexTensor, bn: &ComplexTensor) -> ComplexTensor {
    let (d, l, cc, r) = (bm.shape()[0], bm.shape()[1], bm.shape()[2], bn.shape()[2]);
    let a = xi.nrows();
    let mut pair = vec![C64::new(0.0, 0.0); l * d * d * r];
    for be in 0..l {
        for i in 0..d {
            for j in 0..d {
                for de in 0..r {
                    let mut acc = C64::new(0.0, 0.0);
                    for ga in 0..cc {
                        acc += bm.get(&[i, be, ga]) * bn.get(&[j, ga, de]);
                    }
                    pair[((be * d + i) * d + j) * r + de] = acc;
                }
            }
        }
    }
    let mut gated = vec![C64::new(0.0, 0.0); l * d * d * r];
    for be in 0..l {
        for ij in 0..d * d {
            for kl in 0..d * d {
                let g = gate.get(&[ij, kl]);
                for de in 0..r {
                    gated[(be * d * d + ij) * r + de] += g * pair[(be * d * d + kl) * r + de];
                }
            }
        }
    }
    ComplexTensor::from_fn(&[a * d, d * r], |ix| {
        let (al, i) = (ix[0] / d, ix[0] % d);
        let mut acc = C64::new(0.0, 0.0);
        for be in 0..l {
            acc += xi.get(&[al, be]) * gated[(be * d + i) * d * r + ix[1]];
        }
        acc
    })
}

/// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi rotations
/// on the real symmetric embedding `[[A, −B], [B, A]]`.
fn jacobi_eigenvalues(h: &ComplexTensor) -> Vec<f64> {
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
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(1e-300);
    for _ in 0..60 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| i * m + j))
            .map(|k| a[k] * a[k])
            .sum();
        if off < 1e-32 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (x, y) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = cs * x - sn * y;
                    a[k * m + q] = sn * x + cs * y;
                }
                for k in 0..m {
                    let (x, y) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = cs * x - sn * y;
                    a[q * m + k] = sn * x + cs * y;
                }
            }
        }
    }
    let mut w: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    w.sort_by(|x, y| y.total_cmp(x));
    w.into_iter().step_by(2).collect()
}

/// Squared singular values of `m`, descending.
fn squared_singular_values(m: &ComplexTensor) -> Vec<f64> {
    let gram = if m.nrows() <= m.ncols() {
        ComplexTensor::from_fn(&[m.nrows(), m.nrows()], |ix| {
            (0..m.ncols()).map(|k| m.get(&[ix[0], k]) * m.get(&[ix[1], k]).conj()).sum()
        })
    } else {
        ComplexTensor::from_fn(&[m.ncols(), m.ncols()], |ix| {
            (0..m.nrows()).map(|k| m.get(&[k, ix[0]]).conj() * m.get(&[k, ix[1]])).sum()
        })
    };
    jacobi_eigenvalues(&gram).into_iter().map(|x| x.max(0.0)).collect()
}

/// `U diag(s) V` with `s_k ∝ e^{−k/3}` and Haar-random `U`, `V`, unit norm.
fn decaying_bond(rng: &mut ChaCha8Rng, chi: usize) -> ComplexTensor {
    let s: Vec<f64> = (0..chi).map(|k| (-(k as f64) / 3.0).exp()).collect();
    let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u = unitary(rng, chi);
    let v = unitary(rng, chi);
    ComplexTensor::from_fn(&[chi, chi], |ix| {
        (0..chi).map(|k| u.get(&[ix[0], k]) * c(s[k] / n) * v.get(&[k, ix[1]])).sum()
    })
}

/// `(d, a, k)` site tensor to its `(a·d) × k` matrix.
fn left_matrix(t: &ComplexTensor) -> ComplexTensor {
    let (d, a, k) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    t.permute(&[1, 0, 2]).unwrap().reshape(&[a * d, k]).unwrap()
}

/// `(d, k, r)` site tensor to its `k × (d·r)` matrix.
fn right_matrix(t: &ComplexTensor) -> ComplexTensor {
    let (d, k, r) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    t.permute(&[1, 0, 2]).unwrap().reshape(&[k, d * r]).unwrap()
}

// ---------------------------------------------------------------------------
// criteria

fn criterion_1(trace: &InvariantTrace) -> Outcome {
    let base = finite_config(2, 8, 2.0, 0.05, 1.0, 256);
    let mut fine = base.clone();
    fine.evolution.dt = 0.025;
    let err = ed_deviation(&base, &trace.rows).unwrap();
    let mut fine_rows: Vec<_> = run_with_invariants(&fine, true).unwrap().rows.into_iter().skip(1).step_by(2).collect();
    for (r, coarse) in fine_rows.iter_mut().zip(&trace.rows) {
        r.t = coarse.t;
    }
    let err_fine = ed_deviation(&base, &fine_rows).unwrap();
    let ratio = err / err_fine;
    let passed = err <= 5e-4 && (3.0..=5.0).contains(&ratio);
    outcome(
        passed,
        format!(
            "ED equivalence d=2 L=8: max |ΔZ| = {err:.3e} (≤ 5e-4), halving dt shrinks it by {ratio:.3} (in [3, 5])"
        ),
    )
}

fn criterion_2(runs: &[(Scheme, InvariantTrace)]) -> Outcome {
    let reference = &runs[0].1.rows;
    let max_eps = runs
        .iter()
        .flat_map(|(_, t)| t.rows.iter().map(|r| r.max_eps_trunc))
        .fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (scheme, trace) in &runs[1..] {
        let (dz, ds) = row_deviation(reference, &trace.rows);
        worst = worst.max(dz).max(ds);
        details.push(format!("{scheme} vs svd: Re⟨Z⟩ {dz:.2e}, entropy {ds:.2e}"));
    }
    let chi: Vec<usize> = runs.iter().map(|(_, t)| t.rows.last().unwrap().max_chi).collect();
    details.push(format!("final χ per scheme (svd, eig, qr, qr_cbe): {chi:?}"));
    let lengths_match = runs.iter().all(|(_, t)| t.rows.len() == reference.len());
    let mut o = outcome(
        worst <= 1e-8 && max_eps <= 1e-10 && lengths_match,
        format!("scheme agreement d=5 χ=128 to t=1: max deviation {worst:.3e} (≤ 1e-8), max eps_trunc {max_eps:.3e} (≤ 1e-10)"),
    );
    o.details = details;
    o
}

fn criterion_3() -> Outcome {
    let cfg = BenchConfig::default();
    let records = run_gate_bench(&cfg).unwrap();
    let slopes = slopes_in_d(&records);
    let slope = |s: Scheme| slopes.iter().find(|x| x.1 == s).map(|x| x.2).unwrap_or(f64::NAN);
    let (svd, qr, cbe) = (slope(Scheme::Svd), slope(Scheme::Qr), slope(Scheme::QrCbe));
    let quadratic = |x: f64| (1.7..=2.5).contains(&x);
    let mut o = outcome(
        quadratic(qr) && quadratic(cbe) && (2.5..=3.5).contains(&svd),
        format!("scaling in d at χ=64: slope qr {qr:.3}, qr_cbe {cbe:.3} (in [1.7, 2.5]), svd {svd:.3} (in [2.5, 3.5])"),
    );
    o.details = records
        .iter()
        .map(|r| format!("d={:<2} {:<6} mean {:.3e} s ± {:.1e}", r.d, r.scheme, r.mean_s, r.std_s))
        .collect();
    o
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (d, chi) = (3, 16);
    let model = ClockModel::new(d, 2.0).unwrap();
    let h = model.bond_hamiltonian(BondPosition::Bulk);
    let exact = TruncationPolicy {
        sv_cutoff: 0.0,
        renormalize: false,
        ..TruncationPolicy::new(8)
    };
    let (mut worst_diff, mut worst_ratio) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let xi = decaying_bond(&mut rng, chi);
        let bm = right_isometric_site(&mut rng, d, chi, chi);
        let bn = right_isometric_site(&mut rng, d, chi, chi);

        // explicit error of SVD-truncated factors against the discarded weight
        let random_gate = TwoSiteGate::from_matrix(d, unitary(&mut rng, d * d)).unwrap();
        let theta = evolved_block(&xi, random_gate.matrix(), &bm, &bn);
        let out = apply_gate_svd(&xi, &bm, &bn, &random_gate, &exact, LeftForm::Isometric).unwrap();
        let explicit =
            truncation_error_explicit(&theta, &left_matrix(&out.left), &out.bond, &right_matrix(&out.right)).unwrap();
        let s2 = squared_singular_values(&theta);
        let total: f64 = s2.iter().sum();
        let discarded: f64 = s2[out.report.chi_after..].iter().sum();
        worst_diff = worst_diff.max((explicit - discarded / total).abs());

        // QR against the SVD optimum at equal rank
        let dt = if trial % 2 == 0 { 0.05 } else { 0.01 };
        let gate = TwoSiteGate::from_hamiltonian(d, &h, dt).unwrap();
        let qr = apply_gate_qr(&xi, &bm, &bn, &gate, &TruncationPolicy::new(chi), LeftForm::Hastings).unwrap();
        let s2 = squared_singular_values(&evolved_block(&xi, gate.matrix(), &bm, &bn));
        let total: f64 = s2.iter().sum();
        let optimum = s2[qr.report.chi_after..].iter().sum::<f64>() / total;
        worst_ratio = worst_ratio.max(qr.report.eps_trunc / optimum);
    }
    outcome(
        worst_diff <= 1e-12 && worst_ratio <= 2.0,
        format!(
            "truncation error on 100 instances d=3 χ=16: explicit vs discarded weight {worst_diff:.2e} (≤ 1e-12), \
             QR / SVD optimum ≤ {worst_ratio:.3} (≤ 2)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 5;
    let model = ClockModel::new(d, 2.0).unwrap();
    let h = model.bond_hamiltonian(BondPosition::Bulk);
    let sched = qrtebd::tebd::trotter_schedule(&h, d, 0.05, 2).unwrap();
    let mut up = vec![C64::new(0.0, 0.0); d];
    up[0] = c(1.0);
    let mut state = UniformMps::product_state(d, 2, &up).unwrap();
    for _ in 0..6 {
        state = tebd_step(&state, &sched, Scheme::Svd, &TruncationPolicy::new(64)).unwrap().0;
    }
    // scramble the gauge: Ξ_m → X_m Ξ_m V_m, B^[m] → V_m† B^[m] V_{m+1}
    let (sites, bonds) = state.into_parts();
    let v: Vec<ComplexTensor> = bonds.iter().map(|x| unitary(&mut rng, x.ncols())).collect();
    let x: Vec<ComplexTensor> = bonds.iter().map(|b| unitary(&mut rng, b.nrows())).collect();
    let mul = |a: &ComplexTensor, b: &ComplexTensor| qrtebd::linalg::matmul(a, b).unwrap();
    let bonds: Vec<ComplexTensor> = (0..2).map(|m| mul(&mul(&x[m], &bonds[m]), &v[m])).collect();
    let sites: Vec<ComplexTensor> = (0..2)
        .map(|m| {
            let (l, r) = (sites[m].shape()[1], sites[m].shape()[2]);
            let next = &v[(m + 1) % 2];
            ComplexTensor::from_fn(&[d, l, r], |ix| {
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..l {
                    for q in 0..r {
                        acc += v[m].get(&[p, ix[1]]).conj() * sites[m].get(&[ix[0], p, q]) * next.get(&[q, ix[2]]);
                    }
                }
                acc
            })
        })
        .collect();
    let scrambled = UniformMps::from_parts(sites, bonds).unwrap();
    let off_before = max_off_diagonal(&scrambled);

    let (after, records) = tebd_step(&scrambled, &sched, Scheme::QrCbe, &TruncationPolicy::new(512)).unwrap();
    let max_eps = records.iter().map(|r| r.report.eps_trunc).fold(0.0, f64::max);
    let off = max_off_diagonal(&after);
    let mut ordered = true;
    for xi in after.bonds() {
        let diag: Vec<C64> = (0..xi.nrows().min(xi.ncols())).map(|k| xi.get(&[k, k])).collect();
        ordered &= diag.iter().all(|z| z.re >= 0.0 && z.im.abs() <= 1e-10);
        ordered &= diag.windows(2).all(|w| w[0].re >= w[1].re);
    }
    outcome(
        off <= 1e-10 && ordered,
        format!(
            "canonical form after one QR+CBE step: max off-diagonal |Ξ| {off:.2e} (≤ 1e-10, was {off_before:.2e}), \
             diagonal descending and non-negative: {ordered}, max eps_trunc {max_eps:.1e}"
        ),
    )
}

fn max_off_diagonal(state: &UniformMps) -> f64 {
    let mut worst = 0.0f64;
    for xi in state.bonds() {
        for i in 0..xi.nrows() {
            for j in 0..xi.ncols() {
                if i != j {
                    worst = worst.max(xi.get(&[i, j]).norm());
                }
            }
        }
    }
    worst
}

fn criterion_6(finite: &InvariantTrace, uniform: &[(Scheme, InvariantTrace)]) -> Outcome {
    let uniform_iso = uniform.iter().map(|(_, t)| t.max_isometry_defect).fold(0.0, f64::max);
    let uniform_transfer = uniform.iter().map(|(_, t)| t.max_transfer_defect).fold(0.0, f64::max);
    let norm = uniform
        .iter()
        .map(|(_, t)| t.max_norm_defect)
        .fold(finite.max_norm_defect, f64::max);
    let verify = Command::new(env!("CARGO_BIN_EXE_qrtebd")).arg("verify").output().expect("verify runs");
    let verify_ok = verify.status.success();
    let iso = finite.max_isometry_defect.max(uniform_iso);
    let mut o = outcome(
        iso <= 1e-10 && norm <= 1e-10 && verify_ok,
        format!(
            "invariants after every layer of criteria 1-2: isometry defect {iso:.2e} (≤ 1e-10), \
             |ΣΛ² − 1| {norm:.2e} (≤ 1e-10), verify exit status {}",
            verify.status.code().unwrap_or(-1)
        ),
    );
    o.details.push(format!("finite chain isometry defect {:.2e}", finite.max_isometry_defect));
    for (scheme, t) in uniform {
        o.details.push(format!(
            "uniform {scheme}: site isometry {:.2e}, Ξ-weighted transfer {:.2e}",
            t.max_isometry_defect, t.max_transfer_defect
        ));
    }
    o.details.push(format!("largest Ξ-weighted transfer defect {uniform_transfer:.2e}"));
    o
}

fn criterion_7() -> Outcome {
    let mut cfg = uniform_config(5, 2.0, 0.05, 4.0, 256, Scheme::QrCbe);
    cfg.truncation.delta_chi_abs = 100;
    cfg.truncation.delta_chi_rel = 0.1;
    cfg.truncation.sv_cutoff = 1e-14;
    let rows = qrtebd_cli::quench::simulate(&cfg).unwrap();
    let early = rows.iter().filter(|r| r.t <= 1.5 + 1e-9).map(|r| r.max_eps_trunc).fold(0.0, f64::max);
    let late = rows.iter().filter(|r| r.t > 3.5 + 1e-9).map(|r| r.max_eps_trunc).fold(0.0, f64::max);
    let horizon = rows.iter().position(|r| r.max_eps_trunc > 1e-5).unwrap_or(rows.len());
    let mut drop = 0.0f64;
    for w in rows[..horizon].windows(2) {
        for (a, b) in w[0].entropy.iter().zip(&w[1].entropy) {
            drop = drop.max(a - b);
        }
    }
    let passed = early <= 1e-5 && late >= 1e3 * early && drop <= 1e-9;
    let t_horizon = rows.get(horizon).map(|r| r.t).unwrap_or(f64::INFINITY);
    let mut o = outcome(
        passed,
        format!(
            "quench d=5 χ=256 QR+CBE: eps_trunc up to t=1.5 {early:.2e} (≤ 1e-5), after t=3.5 {late:.2e} \
             (≥ 1e3 × early), largest entropy decrease before t={t_horizon} is {drop:.1e} (≤ 1e-9)"
        ),
    );
    for r in rows.iter().filter(|r| r.step % 10 == 0) {
        o.details.push(format!(
            "t={:.2} χ={} eps={:.2e} S={:.4} wall={:.0}s",
            r.t, r.max_chi, r.max_eps_trunc, r.entropy[0], r.wall_s
        ));
    }
    o
}

fn report(n: usize, started: Instant, o: &Outcome) {
    let tag = if o.passed { "PASS" } else { "FAIL" };
    println!("{tag} criterion {n}: {} [{:.1} s]", o.summary, started.elapsed().as_secs_f64());
    for line in &o.details {
        println!("    {line}");
    }
}

fn main() {
    let mut results = Vec::new();

    let t = Instant::now();
    let finite = run_with_invariants(&finite_config(2, 8, 2.0, 0.05, 1.0, 256), true).unwrap();
    let o = criterion_1(&finite);
    report(1, t, &o);
    results.push(o.passed);

    let t = Instant::now();
    let uniform: Vec<(Scheme, InvariantTrace)> = Scheme::ALL
        .iter()
        .map(|&s| (s, run_with_invariants(&uniform_config(5, 2.0, 0.05, 1.0, 128, s), true).unwrap()))
        .collect();
    let o = criterion_2(&uniform);
    report(2, t, &o);
    results.push(o.passed);

    let criteria: [(usize, Box<dyn Fn() -> Outcome>); 3] =
        [(3, Box::new(criterion_3)), (4, Box::new(criterion_4)), (5, Box::new(criterion_5))];
    for (n, f) in criteria {
        let t = Instant::now();
        let o = f();
        report(n, t, &o);
        results.push(o.passed);
    }

    let t = Instant::now();
    let o = criterion_6(&finite, &uniform);
    report(6, t, &o);
    results.push(o.passed);

    let t = Instant::now();
    let o = criterion_7();
    report(7, t, &o);
    results.push(o.passed);

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
