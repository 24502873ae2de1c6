use proptest::prelude::*;
use qrtebd::clock::{ed_evolve, ed_observables, ClockModel};
use qrtebd::mps::{FiniteMps, MatrixProductState};
use qrtebd::tebd::{tebd_step, trotter_schedule_bonds, Scheme, TruncationPolicy};
use qrtebd::C64;

fn up(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn unrestricted() -> TruncationPolicy {
    TruncationPolicy {
        qr_growth: true,
        ..TruncationPolicy::new(1024)
    }
}

/// Runs `steps` Trotter steps and returns the largest `|⟨Z⟩ − ⟨Z⟩_ED|` seen.
fn max_ed_error(d: usize, n: usize, g: f64, dt: f64, steps: usize, scheme: Scheme) -> f64 {
    let model = ClockModel::new(d, g).unwrap();
    let (z, _) = model.operators();
    let sched = trotter_schedule_bonds(&model.chain_bond_hamiltonians(n).unwrap(), d, dt, 2).unwrap();
    let mut mps = FiniteMps::product_state(d, n, &up(d)).unwrap();
    let mut psi = mps.to_statevector().unwrap();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        mps = tebd_step(&mps, &sched, scheme, &unrestricted()).unwrap().0;
        psi = ed_evolve(d, n, g, &psi, dt, dt).unwrap();
        let exact = ed_observables(&psi, d, n).unwrap();
        for (a, b) in mps.expectation_profile(&z).unwrap().iter().zip(&exact.z) {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

#[test]
fn every_scheme_tracks_exact_dynamics() {
    for scheme in Scheme::ALL {
        let err = max_ed_error(2, 6, 2.0, 0.01, 30, scheme);
        // second-order splitting error at dt = 0.01 is ~1e-4 on this chain
        assert!(err < 2e-4, "{scheme}: {err}");
    }
}

#[test]
fn splitting_error_is_second_order_for_d3() {
    let coarse = max_ed_error(3, 4, 1.0, 0.04, 5, Scheme::Svd);
    let fine = max_ed_error(3, 4, 1.0, 0.02, 10, Scheme::Svd);
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "{coarse} / {fine} = {ratio}");
}

#[test]
fn half_chain_spectrum_matches_statevector() {
    let (d, n, g) = (2, 8, 2.0);
    let model = ClockModel::new(d, g).unwrap();
    let sched = trotter_schedule_bonds(&model.chain_bond_hamiltonians(n).unwrap(), d, 0.05, 2).unwrap();
    let mut mps = FiniteMps::product_state(d, n, &up(d)).unwrap();
    for _ in 0..10 {
        mps = tebd_step(&mps, &sched, Scheme::QrCbe, &unrestricted()).unwrap().0;
    }
    let exact = ed_observables(&mps.to_statevector().unwrap(), d, n).unwrap();
    let s = mps.schmidt_values(n / 2).unwrap();
    for (k, x) in exact.schmidt.iter().enumerate() {
        let y = s.get(k).copied().unwrap_or(0.0);
        assert!((x - y).abs() < 1e-10, "{k}: {x} vs {y}");
    }
    assert!((mps.entanglement_entropy(n / 2).unwrap() - exact.entropy).abs() < 1e-10);
}

#[test]
fn capped_bond_dimension_is_respected() {
    let (d, n) = (3, 8);
    let model = ClockModel::new(d, 2.0).unwrap();
    let sched = trotter_schedule_bonds(&model.chain_bond_hamiltonians(n).unwrap(), d, 0.1, 2).unwrap();
    for scheme in Scheme::ALL {
        let policy = TruncationPolicy {
            qr_growth: true,
            ..TruncationPolicy::new(6)
        };
        let mut mps = FiniteMps::product_state(d, n, &up(d)).unwrap();
        for _ in 0..5 {
            let (next, records) = tebd_step(&mps, &sched, scheme, &policy).unwrap();
            assert!(records.iter().all(|r| r.report.chi_after <= 6), "{scheme}");
            mps = next;
        }
        assert_eq!(mps.max_bond_dim(), 6, "{scheme}");
        assert!(mps.check_isometric(1e-10).passed(), "{scheme}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn untruncated_steps_keep_gauge_and_norm(
        d in 2usize..4,
        n in 3usize..6,
        g in 0.0f64..3.0,
        dt in 0.01f64..0.2,
        k in 0usize..4,
    ) {
        let scheme = Scheme::ALL[k];
        let model = ClockModel::new(d, g).unwrap();
        let sched = trotter_schedule_bonds(&model.chain_bond_hamiltonians(n).unwrap(), d, dt, 2).unwrap();
        let mut mps = FiniteMps::product_state(d, n, &up(d)).unwrap();
        for _ in 0..3 {
            mps = tebd_step(&mps, &sched, scheme, &unrestricted()).unwrap().0;
        }
        prop_assert!(mps.check_isometric(1e-10).passed());
        for b in 1..n {
            let w: f64 = mps.schmidt_values(b).unwrap().iter().map(|s| s * s).sum();
            prop_assert!((w - 1.0).abs() < 1e-10);
        }
    }
}
