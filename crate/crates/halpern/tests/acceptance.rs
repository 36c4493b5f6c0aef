//! End-to-end acceptance checks. Each test prints one `ACCEPTANCE k: PASS/FAIL`
//! line and then asserts, so the verdict is visible either way.

// index-coupled recursions read better with explicit indices
#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use halpern::engine::{self, MannArray};
use halpern::operators::{self, NormKind};
use halpern::rng::SplitMix64;
use halpern::schedules::{self, Rho};
use halpern::transport;
use halpern::{affine, analysis};

fn rho(v: f64) -> Rho {
    Rho::new(v).unwrap()
}

fn verdict(k: usize, what: &str, failures: &[String], t0: Instant) {
    let ms = t0.elapsed().as_millis();
    if failures.is_empty() {
        println!("ACCEPTANCE {k}: PASS - {what} ({ms} ms)");
    } else {
        println!("ACCEPTANCE {k}: FAIL - {what} ({ms} ms)");
        for f in failures {
            println!("  {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {k} failed: {failures:?}");
}

#[test]
fn acceptance_1_optimal_recursion_at_rho_one() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let rows = schedules::m_opt_schedule(rho(1.0), 10_000);
    if (rows[1].bound - 0.75).abs() > 1e-15 {
        failures.push(format!("R*_1 = {}, want 0.75", rows[1].bound));
    }
    if (rows[2].bound - 0.609375).abs() > 1e-15 {
        failures.push(format!("R*_2 = {}, want 0.609375", rows[2].bound));
    }
    for n in 0..10_000usize {
        let want = rows[n].bound - rows[n].bound * rows[n].bound / 4.0;
        if (rows[n + 1].bound - want).abs() > 1e-12 {
            failures.push(format!(
                "R_(n+1) = R_n - R_n^2/4 off at n={n}: {} vs {want}",
                rows[n + 1].bound
            ));
            break;
        }
    }
    verdict(1, "optimal bound recursion at rho=1", &failures, t0);
}

#[test]
fn acceptance_2_minimal_displacement_limit() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    for p in [1.5f64, 2.0] {
        let rows = schedules::m_opt_schedule(rho(p), 10_000);
        let r_lim = 1.0 - 1.0 / p;
        for n in 0..=10_000usize {
            let gap = (rows[n].bound - r_lim).abs();
            let envelope = 4.0 / p / (n as f64 + 3.0);
            if gap > envelope {
                failures.push(format!(
                    "rho={p}, n={n}: |R*_n - (1-1/rho)| = {gap} > {envelope}"
                ));
                break;
            }
        }
    }
    if let Err(e) = analysis::logistic_sandwich(10_000) {
        failures.push(format!("logistic sandwich: {e}"));
    }
    verdict(2, "bounds approach the minimal displacement", &failures, t0);
}

#[test]
fn acceptance_3_tightness_certificate() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut rng = SplitMix64::new(2024);
    'outer: for p in [0.7f64, 1.0, 1.3] {
        for trial in 0..20 {
            let betas = transport::random_betas(&mut rng, 10);
            let pi = MannArray::halpern(&betas).unwrap();
            let table = transport::ot_bounds(rho(p), &pi, 10).unwrap();
            let inst = transport::build_adversarial_instance(&table, 1.0).unwrap();
            let report = transport::verify_tightness(&inst, &table);
            if !report.all_pass() {
                let worst = report.failures()[0];
                failures.push(format!(
                    "rho={p}, trial={trial}: {} lhs={} rhs={}",
                    worst.what, worst.lhs, worst.rhs
                ));
                break 'outer;
            }
        }
    }
    verdict(3, "adversarial instance attains every bound", &failures, t0);
}

#[test]
fn acceptance_4_oracle_equivalence() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut rng = SplitMix64::new(4096);
    for trial in 0..100 {
        let p = [0.7, 1.0, 1.3][trial % 3];
        let betas = transport::random_betas(&mut rng, 12);
        let rec = schedules::halpern_recursive_bounds(rho(p), &betas).unwrap();
        let pi = MannArray::halpern(&betas).unwrap();
        let table = transport::ot_bounds(rho(p), &pi, 12).unwrap();
        for n in 0..=12usize {
            if (table.r[n] - rec[n].bound).abs() > 1e-12 {
                failures.push(format!(
                    "trial={trial}, rho={p}, n={n}: transport {} vs recursion {}",
                    table.r[n], rec[n].bound
                ));
            }
        }
    }
    // closed-form minimizers against a million-point grid
    let grid_min = |f: &dyn Fn(f64) -> f64| -> (f64, f64) {
        let mut best = (0.0f64, f64::INFINITY);
        for k in 0..=1_000_000usize {
            let b = k as f64 / 1e6;
            let v = f(b);
            if v < best.1 {
                best = (b, v);
            }
        }
        best
    };
    for p in [0.7f64, 1.0, 1.3, 2.0] {
        for r in [0.0f64, 0.25, 0.5, 0.75, 1.0] {
            let (gb, gv) = grid_min(&|b| 1.0 - b + p * b * b + p * b * (r - 1.0));
            if (schedules::b_opt(rho(p), r) - gb).abs() > 2e-6
                || (schedules::v_opt(rho(p), r) - gv).abs() > 1e-11
            {
                failures.push(format!("opt quadratic mismatch at rho={p}, r={r}"));
            }
            let rf = r * (1.0 + p);
            let (gb, gv) =
                grid_min(&|b| (1.0 + p) - (1.0 + 3.0 * p) * b + 2.0 * p * b * b + p * b * rf);
            if (schedules::b_flat(rho(p), rf) - gb).abs() > 2e-6
                || (schedules::v_flat(rho(p), rf) - gv).abs() > 1e-11
            {
                failures.push(format!("flat quadratic mismatch at rho={p}, r={rf}"));
            }
        }
    }
    verdict(4, "transport and grid oracles agree", &failures, t0);
}

#[test]
fn acceptance_5_ratio_bounded_by_e_squared() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut max_q = 0.0f64;
    for k in 1..=500usize {
        let p = k as f64 / 501.0;
        let q = analysis::q_table(p, 500).unwrap();
        let qi = analysis::q_inf(p).unwrap();
        for &v in &q {
            max_q = max_q.max(v);
        }
        max_q = max_q.max(qi);
    }
    if max_q > analysis::E2 + 1e-9 {
        failures.push(format!("max Q = {max_q} exceeds e^2"));
    }
    let seqs = analysis::rho_z_sequences(30).unwrap();
    for n in 0..=30usize {
        let qi = analysis::q_inf(seqs.rho[n]).unwrap();
        let pw = ((n as f64 + 1.0) * (-seqs.eps[n]).ln_1p()).exp();
        if (qi * pw - 1.0).abs() > 1e-12 {
            failures.push(format!("Q_inf(rho_{n}) * rho^(n+1) = {}", qi * pw));
        }
    }
    let long = analysis::rho_z_sequences(1_000_000).unwrap();
    let mut prev = long.pow_n(1);
    for n in 2..=1_000_000usize {
        let v = long.pow_n(n);
        if v >= prev {
            failures.push(format!("rho_n^n not decreasing at n={n}"));
            break;
        }
        prev = v;
    }
    let e_m2 = (-2.0f64).exp();
    if (prev - e_m2).abs() > 1e-3 {
        failures.push(format!("rho_n^n at n=10^6 is {prev}, limit {e_m2}"));
    }
    verdict(5, "normed-vs-Hilbert ratio stays below e^2", &failures, t0);
}

#[test]
fn acceptance_6_affine_exactness() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut rng = SplitMix64::new(66);
    for trial in 0..50 {
        let p = 0.3 + 0.7 * rng.next_f64();
        let n = 1 + (rng.next_u64() % 50) as usize;
        let mut betas = vec![0.0];
        for _ in 1..=n {
            betas.push(rng.next_f64());
        }
        let l = affine::affine_residual_bound(p, &betas, n);
        let op = operators::l1_right_shift(p, n + 3).unwrap();
        let mut x0 = vec![0.0; n + 3];
        x0[0] = 1.0;
        let trace = engine::halpern_run(&op, &x0, &betas, n).unwrap();
        if (trace.steps[n].residual - l).abs() > 1e-12 {
            failures.push(format!(
                "trial={trial}: shift residual {} vs L_n {l}",
                trace.steps[n].residual
            ));
        }
    }
    // sign-vector instance attains L_n in the sup norm
    for p in [0.9f64, 1.3] {
        let n = 12;
        let mut betas = vec![0.0];
        let mut r = SplitMix64::new(67);
        for _ in 1..=n {
            betas.push(r.next_f64());
        }
        let l = affine::affine_residual_bound(p, &betas, n);
        let op = operators::sign_instance_operator(p, n).unwrap();
        let x0 = operators::sign_init_x0(p, &betas, n);
        let trace = engine::halpern_run(&op, &x0, &betas, n).unwrap();
        if (trace.steps[n].residual - l).abs() > 1e-12 * (1.0 + l) {
            failures.push(format!(
                "sign instance at rho={p}: residual {} vs L_n {l}",
                trace.steps[n].residual
            ));
        }
    }
    for k in 1..=60usize {
        let p = 0.05 * k as f64;
        if (p - 1.0).abs() < 1e-9 {
            continue;
        }
        match affine::affine_n0(p) {
            Ok(_) => {}
            Err(e) => failures.push(format!("n0 disagreement at rho={p}: {e}")),
        }
        for n in [2usize, 7, 20] {
            let ls = affine::l_star(p, n).unwrap();
            let bf = affine::l_star_bruteforce(p, n);
            if (ls - bf).abs() > 1e-12 * (1.0 + ls.abs()) {
                failures.push(format!("l_star mismatch at rho={p}, n={n}: {ls} vs {bf}"));
            }
        }
    }
    let s2 = std::f64::consts::SQRT_2;
    for (p, want_zero) in [
        (0.41, true),
        (0.42, false),
        (s2 - 1.0 - 1e-6, true),
        (s2 - 1.0 + 1e-6, false),
        (2.41, false),
        (2.42, true),
        (s2 + 1.0 - 1e-6, false),
        (s2 + 1.0 + 1e-6, true),
    ] {
        let n0 = affine::affine_n0(p).unwrap();
        if (n0 == 0) != want_zero {
            failures.push(format!("n0 boundary at rho={p}: n0={n0}"));
        }
    }
    verdict(6, "affine residual bound is exact and minimized", &failures, t0);
}

#[test]
fn acceptance_7_adaptive_sandwich() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut cases: Vec<(String, _, Vec<f64>)> = Vec::new();
    for theta in [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4] {
        cases.push((
            format!("rotation(0.98, {theta:.4})"),
            operators::rotation_contraction(0.98, theta).unwrap(),
            vec![1.0, 0.0],
        ));
    }
    let mut rng = SplitMix64::new(7);
    cases.push((
        "cyclic_shift(1.5, 10)".into(),
        operators::cyclic_shift(1.5, 10, NormKind::LInf).unwrap(),
        rng.vector_sym(10),
    ));
    for (name, op, x0) in &cases {
        // the run hard-errors on any violated sandwich inequality
        match engine::ada_halpern_run(op, x0, 2000) {
            Err(e) => failures.push(format!("{name}: {e}")),
            Ok(trace) => {
                for s in &trace.steps[1..] {
                    let bound = s.bound.unwrap();
                    if s.residual > s.kappa_hat * bound * (1.0 + 1e-9) {
                        failures.push(format!(
                            "{name}, n={}: residual {} > kappa_hat R_n {}",
                            s.n,
                            s.residual,
                            s.kappa_hat * bound
                        ));
                        break;
                    }
                }
            }
        }
    }
    verdict(7, "adaptive run satisfies the sandwich", &failures, t0);
}

#[test]
fn acceptance_8_flat_consistency_and_convergence() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let m = schedules::m_opt_schedule(rho(1.0), 200);
    let f = schedules::flat_schedule(rho(1.0), 200);
    for n in 0..=200usize {
        if (f[n].bound - 2.0 * m[n].bound).abs() > 1e-12 || (f[n].beta - m[n].beta).abs() > 1e-12 {
            failures.push(format!("rho=1, n={n}: flat != 2 x m-opt"));
            break;
        }
    }
    let op = operators::cyclic_shift(2.0, 5, NormKind::LInf).unwrap();
    let mut rng = SplitMix64::new(88);
    for trial in 0..100 {
        let x0 = rng.vector_sym(5);
        match engine::flat_convergence_check(&op, &x0, 500) {
            Err(e) => failures.push(format!("trial={trial}: {e}")),
            Ok(report) => {
                if !report.all_pass() {
                    let worst = report
                        .checks
                        .iter()
                        .find(|c| !c.pass)
                        .unwrap();
                    failures.push(format!(
                        "trial={trial}, n={}: {} lhs={} rhs={}",
                        worst.n, worst.what, worst.lhs, worst.rhs
                    ));
                }
            }
        }
        if !failures.is_empty() {
            break;
        }
    }
    verdict(8, "flat family consistency and convergence", &failures, t0);
}

#[test]
fn acceptance_9_figure_properties() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    // anchored optimal schedule beats plain iteration on the near-isometric
    // rotation by step 50
    let op = operators::rotation_contraction(0.98, std::f64::consts::FRAC_PI_2).unwrap();
    let x0 = [1.0, 0.0];
    let betas = schedules::betas_of(&schedules::m_opt_schedule(rho(0.98), 50));
    let m_opt = engine::halpern_run(&op, &x0, &betas, 50).unwrap();
    let bp = engine::banach_picard_run(&op, &x0, 50).unwrap();
    if m_opt.steps[50].residual >= bp.steps[50].residual {
        failures.push(format!(
            "rotation at n=50: m-opt {} vs bp {}",
            m_opt.steps[50].residual, bp.steps[50].residual
        ));
    }
    // seed-averaged flat-vs-plain gap on the high-dimensional shift
    let op = operators::cyclic_shift(0.98, 100, NormKind::LInf).unwrap();
    let flat_betas = schedules::betas_of(&schedules::flat_schedule(rho(0.98), 200));
    let mut flat_sum = 0.0;
    let mut bp_sum = 0.0;
    for seed in 0..10u64 {
        let mut rng = SplitMix64::new(seed);
        let x0 = rng.vector_sym(100);
        flat_sum += engine::halpern_run(&op, &x0, &flat_betas, 200).unwrap().steps[200].residual;
        bp_sum += engine::banach_picard_run(&op, &x0, 200).unwrap().steps[200].residual;
    }
    if flat_sum > 0.1 * bp_sum {
        failures.push(format!(
            "flat mean residual {} not below 0.1 x plain {}",
            flat_sum / 10.0,
            bp_sum / 10.0
        ));
    }
    // constant-residual trace on the threshold map
    let grid = 64;
    let op = operators::goebel_map(2.0, grid).unwrap();
    let w = operators::goebel_witness_x0(grid, 50).unwrap();
    let trace = engine::banach_picard_run(&op, &w, 50).unwrap();
    for s in &trace.steps {
        if (s.residual - 0.5).abs() > 1e-14 {
            failures.push(format!("threshold map residual at n={}: {}", s.n, s.residual));
            break;
        }
    }
    verdict(9, "figure-level properties reproduce", &failures, t0);
}
