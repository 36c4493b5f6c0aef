//! Self-verification suites: each suite re-derives a family of guarantees by
//! an independent route and records one JSONL line per check.

use serde::Serialize;

use crate::engine::{self, MannArray};
use crate::error::Result;
use crate::operators::{self, NormKind};
use crate::rng::SplitMix64;
use crate::schedules::{self, Rho};
use crate::transport;
use crate::{affine, analysis};

/// One verification record; serialized as a JSONL line.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn close(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> CheckRecord {
        let abs_diff = (lhs - rhs).abs();
        CheckRecord {
            check: check.into(),
            lhs,
            rhs,
            abs_diff,
            pass: abs_diff <= tol,
        }
    }

    fn le(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> CheckRecord {
        CheckRecord {
            check: check.into(),
            lhs,
            rhs,
            abs_diff: (lhs - rhs).max(0.0),
            pass: lhs <= rhs + tol,
        }
    }

    fn ran(check: impl Into<String>, outcome: &Result<()>) -> CheckRecord {
        CheckRecord {
            check: check.into(),
            lhs: 0.0,
            rhs: 0.0,
            abs_diff: 0.0,
            pass: outcome.is_ok(),
        }
    }
}

pub fn to_jsonl(records: &[CheckRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

pub const SUITES: [&str; 5] = ["schedules", "transport", "affine", "analysis", "engine"];

/// Run one suite ("all" concatenates every suite).
pub fn run_suite(name: &str) -> Result<Vec<CheckRecord>> {
    match name {
        "schedules" => suite_schedules(),
        "transport" => suite_transport(),
        "affine" => suite_affine(),
        "analysis" => suite_analysis(),
        "engine" => suite_engine(),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        other => Err(crate::error::Error::Config(format!(
            "unknown verify suite '{other}' (expected one of {SUITES:?} or 'all')"
        ))),
    }
}

/// Targeted tightness certificate: the optimal schedule at one (rho, N).
pub fn transport_at(rho: f64, n: usize) -> Result<Vec<CheckRecord>> {
    let r = Rho::new(rho)?;
    let betas = schedules::betas_of(&schedules::m_opt_schedule(r, n));
    let rec = schedules::halpern_recursive_bounds(r, &betas)?;
    let pi = MannArray::halpern(&betas)?;
    let table = transport::ot_bounds(r, &pi, n)?;
    let mut out = Vec::new();
    let worst = (0..=n)
        .map(|k| (table.r[k] - rec[k].bound).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckRecord::close(
        format!("ot bound = recursion for the optimal schedule (rho={rho}, N={n})"),
        worst,
        0.0,
        1e-12,
    ));
    let inst = transport::build_adversarial_instance(&table, 1.0)?;
    let report = transport::verify_tightness(&inst, &table);
    let worst_gap = report
        .checks
        .iter()
        .map(|c| (c.lhs - c.rhs).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckRecord {
        check: format!("tightness certificate (rho={rho}, N={n})"),
        lhs: worst_gap,
        rhs: 0.0,
        abs_diff: worst_gap,
        pass: report.all_pass(),
    });
    Ok(out)
}

fn grid_min_quadratic(f: impl Fn(f64) -> f64, points: usize) -> (f64, f64) {
    let mut best_b = 0.0;
    let mut best_v = f64::INFINITY;
    for k in 0..=points {
        let b = k as f64 / points as f64;
        let v = f(b);
        if v < best_v {
            best_v = v;
            best_b = b;
        }
    }
    (best_b, best_v)
}

fn suite_schedules() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let one = Rho::new(1.0)?;
    let rows = schedules::m_opt_schedule(one, 3);
    for (n, want) in [(1usize, 0.75f64), (2, 0.609375)] {
        out.push(CheckRecord::close(
            format!("m_opt bound at rho=1, n={n}"),
            rows[n].bound,
            want,
            1e-15,
        ));
    }
    let rec = schedules::halpern_recursive_bounds(one, &[0.0, 0.5, 2.0 / 3.0])?;
    for (n, want) in [(0usize, 1.0f64), (1, 0.75), (2, 11.0 / 18.0)] {
        out.push(CheckRecord::close(
            format!("recursive bound example n={n}"),
            rec[n].bound,
            want,
            1e-15,
        ));
    }
    // the closed-form minimizers against a fine grid scan of their quadratics
    for &p in &[0.6, 1.0, 1.7, 2.5] {
        let rho = Rho::new(p)?;
        for k in 0..=20usize {
            let r = k as f64 / 20.0;
            let (gb, gv) = grid_min_quadratic(
                |b| 1.0 - b + p * b * b + p * b * (r - 1.0),
                100_000,
            );
            out.push(CheckRecord::close(
                format!("b_opt vs grid at rho={p}, r={r}"),
                schedules::b_opt(rho, r),
                gb,
                2e-5,
            ));
            out.push(CheckRecord::close(
                format!("v_opt vs grid at rho={p}, r={r}"),
                schedules::v_opt(rho, r),
                gv,
                1e-9,
            ));
            let rf = r * (1.0 + p);
            let (gb, gv) = grid_min_quadratic(
                |b| (1.0 + p) - (1.0 + 3.0 * p) * b + 2.0 * p * b * b + p * b * rf,
                100_000,
            );
            out.push(CheckRecord::close(
                format!("b_flat vs grid at rho={p}, r={rf}"),
                schedules::b_flat(rho, rf),
                gb,
                2e-5,
            ));
            out.push(CheckRecord::close(
                format!("v_flat vs grid at rho={p}, r={rf}"),
                schedules::v_flat(rho, rf),
                gv,
                1e-9,
            ));
        }
    }
    // rho=1: the flat family collapses onto twice the optimal bounds
    let m = schedules::m_opt_schedule(one, 200);
    let f = schedules::flat_schedule(one, 200);
    let mut worst = 0.0f64;
    for n in 0..=200usize {
        worst = worst.max((f[n].bound - 2.0 * m[n].bound).abs());
        worst = worst.max((f[n].beta - m[n].beta).abs());
    }
    out.push(CheckRecord::close(
        "flat = 2 x m-opt at rho=1 (n <= 200)",
        worst,
        0.0,
        1e-12,
    ));
    Ok(out)
}

fn suite_transport() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let mut rng = SplitMix64::new(101);
    for &p in &[0.7, 1.0, 1.3] {
        let rho = Rho::new(p)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let betas = transport::random_betas(&mut rng, 10);
            let rec = schedules::halpern_recursive_bounds(rho, &betas)?;
            let pi = MannArray::halpern(&betas)?;
            let table = transport::ot_bounds(rho, &pi, 10)?;
            for n in 0..=10usize {
                worst = worst.max((table.r[n] - rec[n].bound).abs());
            }
        }
        out.push(CheckRecord::close(
            format!("ot bound = recursion at rho={p} (10 sequences, N=10)"),
            worst,
            0.0,
            1e-12,
        ));
        let betas = transport::random_betas(&mut rng, 8);
        let pi = MannArray::halpern(&betas)?;
        let table = transport::ot_bounds(rho, &pi, 8)?;
        let inst = transport::build_adversarial_instance(&table, 1.0)?;
        let report = transport::verify_tightness(&inst, &table);
        let worst_gap = report
            .checks
            .iter()
            .map(|c| (c.lhs - c.rhs).abs())
            .fold(0.0f64, f64::max);
        out.push(CheckRecord {
            check: format!("tightness certificate at rho={p} (N=8)"),
            lhs: worst_gap,
            rhs: 0.0,
            abs_diff: worst_gap,
            pass: report.all_pass(),
        });
    }
    let pi = MannArray::uniform(6)?;
    let table = transport::ot_bounds(Rho::new(0.7)?, &pi, 6)?;
    let inst = transport::build_adversarial_instance(&table, 2.0)?;
    let report = transport::verify_tightness(&inst, &table);
    out.push(CheckRecord {
        check: "tightness on uniform Mann rows (rho=0.7, N=6)".into(),
        lhs: 0.0,
        rhs: 0.0,
        abs_diff: 0.0,
        pass: report.all_pass(),
    });
    Ok(out)
}

fn suite_affine() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let mut rng = SplitMix64::new(103);
    // exact residual identity on the truncated shift
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = 0.3 + 0.7 * rng.next_f64();
        let n = 3 + (rng.next_u64() % 20) as usize;
        let mut betas = vec![0.0];
        for _ in 1..=n {
            betas.push(rng.next_f64());
        }
        let l = affine::affine_residual_bound(p, &betas, n);
        let op = operators::l1_right_shift(p, n + 3)?;
        let mut x0 = vec![0.0; n + 3];
        x0[0] = 1.0;
        let t = engine::halpern_run(&op, &x0, &betas, n)?;
        worst = worst.max((t.steps[n].residual - l).abs());
    }
    out.push(CheckRecord::close(
        "shift residual equals L_n (10 random schedules)",
        worst,
        0.0,
        1e-12,
    ));
    // closed forms vs scan / brute force across a rho grid
    for k in 1..=40usize {
        let p = 0.05 * k as f64;
        if (p - 1.0).abs() < 1e-9 {
            continue;
        }
        let n0 = match affine::affine_n0(p) {
            Ok(v) => v,
            Err(e) => {
                out.push(CheckRecord {
                    check: format!("n0 scan/closed-form agreement at rho={p}: {e}"),
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    abs_diff: f64::NAN,
                    pass: false,
                });
                continue;
            }
        };
        out.push(CheckRecord::ran(
            format!("n0 scan = closed form at rho={p} (n0={n0})"),
            &Ok(()),
        ));
        for n in [3usize, 10, 25] {
            let ls = affine::l_star(p, n)?;
            let bf = affine::l_star_bruteforce(p, n);
            out.push(CheckRecord::close(
                format!("l_star = brute force at rho={p}, n={n}"),
                ls,
                bf,
                1e-12 * (1.0 + ls.abs()),
            ));
        }
    }
    // threshold straddles
    for (p, want_zero) in [
        (0.41f64, true),
        (0.42, false),
        (2.41, false),
        (2.42, true),
    ] {
        let n0 = affine::affine_n0(p)?;
        out.push(CheckRecord {
            check: format!("n0 = 0 boundary at rho={p}"),
            lhs: n0 as f64,
            rhs: if want_zero { 0.0 } else { 1.0 },
            abs_diff: 0.0,
            pass: (n0 == 0) == want_zero,
        });
    }
    Ok(out)
}

fn suite_analysis() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    // bound ratio stays below e^2 on a desk-scale grid
    let mut worst_q = 0.0f64;
    for k in 1..=100usize {
        let rho = k as f64 / 101.0;
        let q = analysis::q_table(rho, 100)?;
        let qi = analysis::q_inf(rho)?;
        for &v in &q {
            worst_q = worst_q.max(v);
        }
        worst_q = worst_q.max(qi);
    }
    out.push(CheckRecord::le(
        "max Q over grid <= e^2 (100 rhos, n <= 100)",
        worst_q,
        analysis::E2,
        1e-9,
    ));
    // threshold identity Q_inf(rho_n) rho_n^{n+1} = 1
    let seqs = analysis::rho_z_sequences(30)?;
    let mut worst = 0.0f64;
    for n in 0..=30usize {
        let qi = analysis::q_inf(seqs.rho[n])?;
        let pw = ((n as f64 + 1.0) * (-seqs.eps[n]).ln_1p()).exp();
        worst = worst.max((qi * pw - 1.0).abs());
    }
    out.push(CheckRecord::close(
        "Q_inf(rho_n) rho_n^(n+1) = 1 (n <= 30)",
        worst,
        0.0,
        1e-12,
    ));
    // logistic sandwich holds through n = 10^4 (hard-errors otherwise)
    out.push(CheckRecord::ran(
        "logistic sandwich for n <= 10^4",
        &analysis::logistic_sandwich(10_000).map(|_| ()),
    ));
    // speedup certificates
    for &rho in &[0.3, 0.6, 0.9, 0.99] {
        out.push(CheckRecord::ran(
            format!("speedup certificate at rho={rho}"),
            &analysis::speedup_certificate(rho).map(|_| ()),
        ));
    }
    Ok(out)
}

fn suite_engine() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    // adaptive runs hard-error on any sandwich violation
    let rot = operators::rotation_contraction(0.98, std::f64::consts::FRAC_PI_2)?;
    out.push(CheckRecord::ran(
        "ada sandwich on rotation(0.98, pi/2), n <= 2000",
        &engine::ada_halpern_run(&rot, &[1.0, 0.0], 2000).map(|_| ()),
    ));
    let shift = operators::cyclic_shift(1.5, 10, NormKind::LInf)?;
    let mut rng = SplitMix64::new(107);
    let x0 = rng.vector_sym(10);
    out.push(CheckRecord::ran(
        "ada sandwich on cyclic_shift(1.5, 10), n <= 2000",
        &engine::ada_halpern_run(&shift, &x0, 2000).map(|_| ()),
    ));
    // constant-residual witness trace on the threshold map
    let grid = 64;
    let op = operators::goebel_map(2.0, grid)?;
    let w = operators::goebel_witness_x0(grid, 40)?;
    let t = engine::banach_picard_run(&op, &w, 40)?;
    let worst = t
        .steps
        .iter()
        .map(|s| (s.residual - 0.5).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckRecord::close(
        "threshold map residual constant at 1 - 1/rho",
        worst,
        0.0,
        1e-14,
    ));
    // Mann two-atom encoding reproduces Halpern bitwise
    let op = operators::cyclic_shift(1.2, 6, NormKind::LInf)?;
    let x0 = rng.vector_sym(6);
    let betas = transport::random_betas(&mut rng, 30);
    let h = engine::halpern_run(&op, &x0, &betas, 30)?;
    let m = engine::mann_run(&op, &x0, &MannArray::halpern(&betas)?, 30)?;
    let bitwise = h
        .steps
        .iter()
        .zip(&m.steps)
        .all(|(a, b)| a.residual == b.residual);
    out.push(CheckRecord {
        check: "Mann/Halpern bitwise equivalence".into(),
        lhs: 0.0,
        rhs: 0.0,
        abs_diff: 0.0,
        pass: bitwise,
    });
    // worst-case residual bounds hold with the observed orbit constant
    let rows = schedules::m_opt_schedule(Rho::new(1.5)?, 150);
    let betas = schedules::betas_of(&rows);
    let x0s = {
        let mut r = SplitMix64::new(109);
        r.vector_sym(10)
    };
    let t = engine::halpern_run(&shift, &x0s, &betas, 150)?;
    let kappa = engine::observed_orbit_bound(&shift, &x0s, &betas, 150)?;
    let report = engine::check_bounds(&t, engine::BoundFamily::Orbit(&rows), kappa);
    out.push(CheckRecord {
        check: "m-opt residual bounds with observed kappa (rho=1.5)".into(),
        lhs: report.worst().map(|c| c.lhs - c.rhs).unwrap_or(0.0),
        rhs: 0.0,
        abs_diff: 0.0,
        pass: report.all_pass(),
    });
    Ok(out)
}
