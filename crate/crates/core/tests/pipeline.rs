use dicke_core::qfi::GeneratorAxis;
use dicke_core::scaling::{
    collapse_transform, compute_record, scan_sizes_at_critical, sweep_lambda, two_atom_fit, RecordOptions,
    SweepRecord,
};
use dicke_core::thermo::qfi_atomic_limit;
use dicke_core::ModelParams;

fn unit(n: usize) -> ModelParams {
    ModelParams::new(1.0, 1.0, 0.0, n).unwrap()
}

fn record(n: usize, lambda: f64, axis: GeneratorAxis) -> SweepRecord {
    compute_record(&unit(n).with_lambda(lambda), &RecordOptions { axis, ..Default::default() }).unwrap()
}

#[test]
fn twenty_atom_sweep_rises_toward_four() {
    let grid: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let records = sweep_lambda(&unit(20), &grid, 20, &RecordOptions::default()).unwrap();
    assert_eq!(records[0].f_q_two_atom, 0.0);
    for pair in records.windows(2) {
        assert!(pair[1].f_q_two_atom > pair[0].f_q_two_atom, "{:?}", pair);
    }
    let last = records.last().unwrap().f_q_two_atom;
    assert!(last > 3.4 && last < 4.0, "{last}");
}

#[test]
fn atomic_qfi_examples() {
    assert!((record(10, 0.0, GeneratorAxis::X).f_a_scaled - 1.0).abs() < 1e-12);
    assert!(record(10, 0.0, GeneratorAxis::Z).f_a_scaled.abs() < 1e-12);
    let critical = record(256, 0.5, GeneratorAxis::X).f_a_scaled;
    let limit = qfi_atomic_limit(&unit(256).with_lambda(0.5)).unwrap();
    assert!((limit - 2f64.sqrt()).abs() < 1e-12);
    assert!((critical - limit).abs() < 0.1 * limit, "{critical}");
}

#[test]
fn critical_scan_trends() {
    let records = scan_sizes_at_critical(&unit(2), &[32, 64, 128, 256, 512], &RecordOptions::default()).unwrap();
    let limit = qfi_atomic_limit(&unit(2).with_lambda(0.5)).unwrap();
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert!(b.f_q_two_atom < a.f_q_two_atom);
        assert!(limit - b.f_a_scaled < limit - a.f_a_scaled);
        assert!(b.jz2_scaled > a.jz2_scaled && b.jz2_scaled < 0.25);
    }
    assert!(records.iter().all(|r| r.gap > 0.0 && !r.degenerate_flag));
}

#[test]
fn exponent_is_stable_when_dropping_smallest_size() {
    let records =
        scan_sizes_at_critical(&unit(2), &[64, 128, 256, 512, 1024, 2048], &RecordOptions::default()).unwrap();
    let all = two_atom_fit(&records).unwrap();
    let trimmed = two_atom_fit(&records[1..]).unwrap();
    let shift = (all.exponent - trimmed.exponent).abs();
    println!("exponent {:.4} -> {:.4} without N = 64", all.exponent, trimmed.exponent);
    assert!(shift < 0.02, "exponent moved by {shift}");
}

#[test]
fn collapse_agrees_across_sizes() {
    let lc = 0.5;
    for x in [0.25f64, 0.5, 1.0] {
        let ys: Vec<f64> = [64usize, 512]
            .iter()
            .map(|&n| {
                let lambda = lc + (x / n as f64).powf(2.0 / 3.0);
                let c = collapse_transform(&[record(n, lambda, GeneratorAxis::X)], lc);
                assert!((c.points[0].x - x).abs() < 1e-9);
                c.points[0].y
            })
            .collect();
        assert!((ys[0] - ys[1]).abs() < 0.1 * ys[1], "x = {x}: {ys:?}");
    }

    let grid: Vec<f64> = (0..=8).map(|i| 0.45 + 0.0125 * i as f64).collect();
    let records = sweep_lambda(&unit(64), &grid, 64, &RecordOptions::default()).unwrap();
    let c = collapse_transform(&records, lc);
    assert_eq!(c.skipped, 5);
    for pair in c.points.windows(2) {
        assert!(pair[1].x > pair[0].x && pair[1].y > pair[0].y);
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sweep_lambda(&unit(12), &grid, 12, &RecordOptions::default()).unwrap())
    };
    let a = format!("{:?}", run(1));
    let b = format!("{:?}", run(3));
    let c = format!("{:?}", run(1));
    assert_eq!(a, b);
    assert_eq!(a, c);
}
