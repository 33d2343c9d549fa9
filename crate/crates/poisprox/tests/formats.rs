use poisprox::io::{load_counts, load_image, save_counts, save_image};
use poisprox::trace::{read_trace, write_trace};
use poisprox_core::objective::{ExtendedReal, Infeasibility};
use poisprox_core::solvers::{SolverTrace, TraceRecord};
use poisprox_core::{CountMap, ImageGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn image_round_trip_is_exact(
        w in 1usize..9, h in 1usize..9,
        seed in proptest::collection::vec(-1e6f64..1e6, 81),
        exp in -30i32..30,
    ) {
        let px: Vec<f64> = seed[..w * h].iter().map(|v| v * 10f64.powi(exp)).collect();
        let img = ImageGrid::new(w, h, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("img.txt");
        save_image(&img, &p).unwrap();
        prop_assert_eq!(load_image(&p).unwrap(), img);
    }

    #[test]
    fn counts_round_trip_is_exact(w in 1usize..9, h in 1usize..9, seed in proptest::collection::vec(0u64..1_000_000, 81)) {
        let counts = CountMap::new(w, h, seed[..w * h].to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("counts.txt");
        save_counts(&counts, &p).unwrap();
        prop_assert_eq!(load_counts(&p).unwrap(), counts);
    }
}

#[test]
fn trace_round_trip_keeps_infinities_and_missing_mae() {
    let rec = |iter, objective, mae| TraceRecord {
        iter,
        objective,
        fidelity: objective,
        penalty: 1.5,
        pos_violation: 0.25,
        mae,
        elapsed_s: 0.125 * iter as f64,
    };
    let trace = SolverTrace {
        records: vec![
            rec(0, ExtendedReal::Infinite(Infeasibility::Unrecorded), None),
            rec(1, ExtendedReal::Finite(-12.75), Some(3.0)),
            rec(2, ExtendedReal::Finite(-13.0), None),
        ],
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    write_trace(&trace, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.contains("\n0,inf,inf,1.5,0.25,,0\n"), "{text}");
    assert_eq!(read_trace(&p).unwrap(), trace);
}

#[test]
fn malformed_trace_rows_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    std::fs::write(
        &p,
        "iter,objective,fidelity,penalty,pos_violation,mae,elapsed_s\n0,1,1,0,0,,0\n1,abc,1,0,0,,0\n",
    )
    .unwrap();
    let err = read_trace(&p).unwrap_err().to_string();
    assert!(
        err.contains("data row 2") && err.contains("objective"),
        "{err}"
    );
}
