use subchan::*;

fn eq24(eta: f64) -> f64 {
    0.5 + eta / 6.0 + eta.sqrt() / 3.0
}

#[test]
fn larger_ansatz_never_beats_lowest_pair() {
    for eta in [0.1, 0.5, 0.9] {
        let ch = amplitude_damping(eta, 12).unwrap();
        let mut best = Vec::new();
        for levels in [vec![0, 1], vec![0, 1, 2], vec![0, 1, 2, 3]] {
            let r = optimize_encoding(&ch, &levels, 8, 42).unwrap();
            best.push(r.best_fidelity);
        }
        assert!(best[1] <= best[0] + 1e-6 && best[2] <= best[1] + 1e-6, "eta={eta}: {best:?}");
        assert!(best[2] <= eq24(eta) + 1e-6);
    }
}

#[test]
fn returned_encodings_are_feasible_and_honest() {
    for (ch, levels) in [
        (amplitude_damping(0.4, 10).unwrap(), vec![0, 1, 2]),
        (phase_damping(0.6, 10, None).unwrap(), vec![1, 3, 4]),
        (depolarizing(0.7, 6).unwrap(), vec![0, 2, 5]),
    ] {
        let r = optimize_encoding(&ch, &levels, 6, 7).unwrap();
        let b = r.best_encoding.basis();
        assert!((b[0].norm() - 1.0).abs() <= 1e-10 && (b[1].norm() - 1.0).abs() <= 1e-10);
        assert!(b[0].inner(&b[1]).norm() <= 1e-10);
        let quad = average_fidelity_quadrature(&ch, &r.best_encoding, 16, 16).unwrap().value;
        assert!(r.best_fidelity <= quad + 1e-9);
        let closed = average_fidelity_closed(&ch, &r.best_encoding).unwrap().value;
        assert!((r.best_fidelity - closed).abs() <= 1e-10);
        assert_eq!(r.restarts_run, 6);
        assert_eq!(r.history.len(), 6);
    }
}

#[test]
fn phase_damping_optimum_is_a_contiguous_pair() {
    let ch = phase_damping(0.5, 10, None).unwrap();
    let r = optimize_encoding(&ch, &[2, 3, 4], 10, 1).unwrap();
    assert!((r.best_fidelity - (2.0 / 3.0 + 0.5 / 3.0)).abs() <= 1e-6, "{}", r.best_fidelity);
}

#[test]
fn seed_and_thread_count_do_not_matter_for_replay() {
    let ch = amplitude_damping(0.3, 8).unwrap();
    let a = optimize_encoding(&ch, &[0, 1, 2], 5, 99).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| optimize_encoding(&ch, &[0, 1, 2], 5, 99).unwrap());
    assert_eq!(a.history, b.history);
    assert_eq!(a.best_fidelity.to_bits(), b.best_fidelity.to_bits());
    let c = optimize_encoding(&ch, &[0, 1, 2], 5, 100).unwrap();
    assert_ne!(a.history, c.history);
}

#[test]
fn sweep_ties_are_reported_in_order() {
    let ch = phase_damping(0.5, 12, None).unwrap();
    let sweep = contiguous_pair_sweep(&ch, 9).unwrap();
    assert_eq!(sweep.top_ties, (0..9).map(|k| (k, k + 1)).collect::<Vec<_>>());
    for w in sweep.rows.windows(2) {
        assert!(w[0].fidelity >= w[1].fidelity - 1e-9);
    }
}
