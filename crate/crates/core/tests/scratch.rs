use alpha2_dynamo::branch::{
    critical_c, default_im_tol, detect_transitions, match_branches, sweep, AffineOperator,
    TransitionKind,
};
use alpha2_dynamo::operator::{AlphaProfile, BoundaryCondition, RadialGrid};
use std::time::Instant;

#[test]
fn explore_criterion8_timing() {
    let start = Instant::now();
    let grid = RadialGrid::uniform(96);
    let profile = AlphaProfile::benchmark_quartic(1.0);
    let op = AffineOperator::from_dynamo(&profile, 1, &grid, BoundaryCondition::Physical).unwrap();
    let count = 400;
    let cs: Vec<f64> = (0..count)
        .map(|i| i as f64 * 20.0 / (count - 1) as f64)
        .collect();
    let res = sweep(&op, &cs).unwrap();
    println!("sweep took {:?}", start.elapsed());
    assert!(res.failed.is_empty());

    let t1 = Instant::now();
    let branches = match_branches(&res, 18).unwrap();
    let im_tol = default_im_tol(&op, 20.0);
    let events = detect_transitions(&branches, im_tol);
    println!("match+detect took {:?}", t1.elapsed());
    let r2c: Vec<_> = events
        .iter()
        .filter(|e| e.kind == TransitionKind::RealToComplex)
        .collect();
    println!("events: {} total, {} R2C", events.len(), r2c.len());
    for e in &r2c {
        println!(
            "  R2C [{:.4},{:.4}] lambda {:.4} branches {:?} multi {}",
            e.c_low, e.c_high, e.lambda_star.re, e.branch_ids, e.multi_branch
        );
    }

    let t2 = Instant::now();
    let cp = critical_c(&op, 0.0, 20.0, im_tol).unwrap();
    println!(
        "critical took {:?}: C_c = {:.8}, onset {:?}, lambda = {}",
        t2.elapsed(),
        cp.c,
        cp.onset,
        cp.lambda
    );
    println!("total {:?}", start.elapsed());
}
