//! The space-time FEM solution against the finite-difference reference.

use habitat::fem::{run, FemOptions};
use habitat::oracle::{step_solver, OracleOptions};
use habitat::recipes;

#[test]
fn periodic_shift_example_agrees_with_reference() {
    let mut s = recipes::bundled("ex4-4").unwrap();
    s.horizon = 2.0;
    let times = [0.5, 1.0, 2.0];
    let u = run(&s, 80, 48, &FemOptions::default()).unwrap();
    let o = step_solver(
        &s,
        &OracleOptions {
            checkpoints: times.to_vec(),
            ..Default::default()
        },
    )
    .unwrap();
    for &t in &times {
        let fem = u.slice_l2(t).unwrap();
        let tp = o.trace.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs())).unwrap();
        let reference = tp.log_l2_u.exp();
        let rel = (fem - reference).abs() / reference;
        assert!(rel < 0.02, "t = {t}: fem {fem} vs reference {reference}");
    }
}

#[test]
fn undershoot_is_small() {
    let mut s = recipes::bundled("ex4-4").unwrap();
    s.horizon = 2.0;
    let u = run(&s, 60, 32, &FemOptions::default()).unwrap();
    let under = u.undershoot();
    assert!(under <= 0.01, "{under}");
}
