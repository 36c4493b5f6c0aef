//! Schedule and bound recursions for Halpern iterations.
//!
//! The minimax-optimal schedule picks `beta_n` to minimize the tight residual
//! bound `R_n` one step at a time; the flat variant minimizes the bound on the
//! distance to the anchored fixed point instead. Both are driven by simple
//! one-dimensional quadratic minimizations with closed-form solutions.

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Lipschitz constant of the operator class; positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho(f64);

impl Rho {
    pub fn new(value: f64) -> Result<Rho> {
        if value > 0.0 && value.is_finite() {
            Ok(Rho(value))
        } else {
            Err(Error::InvalidRho(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One step of a schedule: the step weight, the bound value at that step, and
/// (for bound recursions) the auxiliary sequences that generate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub n: usize,
    pub beta: f64,
    pub bound: f64,
    pub aux: RowAux,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowAux {
    None,
    /// Recursion for general Halpern bounds: (d_n, c_n).
    Recursive { d: f64, c: f64 },
}

/// Per-step output of the flat bound recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatBoundRow {
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub d_flat: f64,
    pub r_flat: f64,
}

/// Named schedule families.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    MOpt,
    Ada,
    FlatOpt,
    Affine,
    BanachPicard,
    FixedSequence(Vec<f64>),
}

impl ScheduleKind {
    pub fn parse(s: &str) -> Result<ScheduleKind> {
        let t = s.trim();
        match t {
            "m-opt" | "mopt" => Ok(ScheduleKind::MOpt),
            "ada" => Ok(ScheduleKind::Ada),
            "flat-opt" | "flat" => Ok(ScheduleKind::FlatOpt),
            "affine" | "aff" => Ok(ScheduleKind::Affine),
            "banach-picard" | "bp" => Ok(ScheduleKind::BanachPicard),
            _ => {
                if let Some(rest) = t.strip_prefix("fixed:") {
                    let betas: Vec<f64> = rest
                        .split(',')
                        .map(|p| {
                            p.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::Config(format!("bad beta '{p}': {e}")))
                        })
                        .collect::<Result<_>>()?;
                    for (i, &b) in betas.iter().enumerate() {
                        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
                            return Err(Error::BetaOutOfRange { index: i, value: b });
                        }
                    }
                    Ok(ScheduleKind::FixedSequence(betas))
                } else {
                    Err(Error::Config(format!("unknown schedule kind '{t}'")))
                }
            }
        }
    }
}

/// Unconstrained minimizer of the one-step bound quadratic:
/// `beta(r) = (1/rho + 1 - r) / 2`.
pub fn beta_unconstrained(rho: Rho, r: f64) -> f64 {
    0.5 * (1.0 / rho.get() + 1.0 - r)
}

/// Optimal step weight `B(r) = min{1, beta(r)}`.
pub fn b_opt(rho: Rho, r: f64) -> f64 {
    beta_unconstrained(rho, r).min(1.0)
}

/// Optimal one-step bound map `V(r)`: quadratic branch when the minimizer is
/// interior, linear branch `rho * r` when it clamps at 1.
pub fn v_opt(rho: Rho, r: f64) -> f64 {
    let p = rho.get();
    if r >= 1.0 / p - 1.0 {
        let b = beta_unconstrained(rho, r);
        1.0 - p * b * b
    } else {
        p * r
    }
}

/// Fixed point of `V`: `r_rho = max{0, 1 - 1/rho}`.
pub fn r_limit(rho: Rho) -> f64 {
    (1.0 - 1.0 / rho.get()).max(0.0)
}

/// Minimax-optimal schedule: `R_0 = 1`, `beta_n = B(R_{n-1})`, `R_n = V(R_{n-1})`.
pub fn m_opt_schedule(rho: Rho, n_max: usize) -> Vec<ScheduleRow> {
    let mut rows = Vec::with_capacity(n_max + 1);
    rows.push(ScheduleRow {
        n: 0,
        beta: 0.0,
        bound: 1.0,
        aux: RowAux::None,
    });
    let mut r = 1.0;
    for n in 1..=n_max {
        let beta = b_opt(rho, r);
        r = v_opt(rho, r);
        rows.push(ScheduleRow {
            n,
            beta,
            bound: r,
            aux: RowAux::None,
        });
    }
    rows
}

/// Tight residual bounds for an arbitrary beta sequence:
/// `d_n = |beta_{n-1} - beta_n| + min{beta_{n-1}, beta_n} c_{n-1}`,
/// `c_n = min{1, rho d_n}`, `R_n = 1 - beta_n (1 - c_n)`.
pub fn halpern_recursive_bounds(rho: Rho, betas: &[f64]) -> Result<Vec<ScheduleRow>> {
    for (i, &b) in betas.iter().enumerate() {
        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
            return Err(Error::BetaOutOfRange { index: i, value: b });
        }
    }
    if let Some(&b0) = betas.first() {
        if b0 != 0.0 {
            return Err(Error::BetaStartNonZero(b0));
        }
    }
    let p = rho.get();
    let mut rows = Vec::with_capacity(betas.len());
    let mut prev_beta = 0.0;
    let mut prev_c = 0.0;
    for (n, &beta) in betas.iter().enumerate() {
        let (d, c, r) = if n == 0 {
            (0.0, 0.0, 1.0)
        } else {
            let d = (prev_beta - beta).abs() + prev_beta.min(beta) * prev_c;
            let c = (p * d).min(1.0);
            (d, c, 1.0 - beta * (1.0 - c))
        };
        rows.push(ScheduleRow {
            n,
            beta,
            bound: r,
            aux: RowAux::Recursive { d, c },
        });
        prev_beta = beta;
        prev_c = c;
    }
    Ok(rows)
}

/// Unconstrained minimizer of the flat one-step quadratic:
/// `(1/rho + 3 - r) / 4`.
pub fn flat_beta_unconstrained(rho: Rho, r: f64) -> f64 {
    (1.0 / rho.get() + 3.0 - r) / 4.0
}

/// Flat step weight with its three branches.
pub fn b_flat(rho: Rho, r: f64) -> f64 {
    let p = rho.get();
    if r <= 1.0 / p - 1.0 {
        1.0
    } else if r < 1.0 / p + 3.0 {
        flat_beta_unconstrained(rho, r)
    } else {
        0.0
    }
}

/// Flat one-step bound map with its three branches.
pub fn v_flat(rho: Rho, r: f64) -> f64 {
    let p = rho.get();
    if r <= 1.0 / p - 1.0 {
        p * r
    } else if r < 1.0 / p + 3.0 {
        let b = flat_beta_unconstrained(rho, r);
        (1.0 + p) - 2.0 * p * b * b
    } else {
        1.0 + p
    }
}

/// Limits of the flat recursion: the fixed point `r_flat` of `v_flat` and the
/// limiting step weight `beta_flat`.
pub fn flat_limits(rho: Rho) -> (f64, f64) {
    let p = rho.get();
    let s1 = SQRT_2 + 1.0;
    if p < 1.0 {
        (0.0, 1.0)
    } else if p <= s1 {
        // beta grouped as ((1 - p) + sqrt(2)) so the rho = 1 case is exact
        (s1 * s1 * (1.0 - 1.0 / p), ((1.0 - p) + SQRT_2) / (p * SQRT_2))
    } else {
        (1.0 + p, 0.0)
    }
}

/// Flat-optimal schedule: `R_0 = 1 + rho`, `beta_n = B_flat(R_{n-1})`,
/// `R_n = V_flat(R_{n-1})`.
pub fn flat_schedule(rho: Rho, n_max: usize) -> Vec<ScheduleRow> {
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut r = 1.0 + rho.get();
    rows.push(ScheduleRow {
        n: 0,
        beta: 0.0,
        bound: r,
        aux: RowAux::None,
    });
    for n in 1..=n_max {
        let beta = b_flat(rho, r);
        r = v_flat(rho, r);
        rows.push(ScheduleRow {
            n,
            beta,
            bound: r,
            aux: RowAux::None,
        });
    }
    rows
}

/// Flat bounds for an arbitrary non-decreasing beta sequence. Emits the four
/// sequences `(mu_n, nu_n, d_flat_n, R_flat_n)` and checks that the unfolded
/// recursion agrees with the collapsed one-line recursion.
pub fn flat_general_bounds(rho: Rho, betas: &[f64], _delta0: f64) -> Result<Vec<FlatBoundRow>> {
    for (i, &b) in betas.iter().enumerate() {
        if !(0.0..=1.0).contains(&b) || !b.is_finite() {
            return Err(Error::BetaOutOfRange { index: i, value: b });
        }
        if i > 0 && b < betas[i - 1] {
            return Err(Error::BetaNotMonotone { index: i });
        }
    }
    if let Some(&b0) = betas.first() {
        if b0 != 0.0 {
            return Err(Error::BetaStartNonZero(b0));
        }
    }
    let p = rho.get();
    let mut rows: Vec<FlatBoundRow> = Vec::with_capacity(betas.len());
    let mut mu = 1.0;
    let mut nu = 1.0 + p;
    let mut d = 0.0;
    let mut prev_beta = 0.0;
    let mut prev_nu = nu;
    let mut prev_r = 1.0 + p;
    for (n, &beta) in betas.iter().enumerate() {
        if n > 0 {
            mu = 1.0 - beta + p * beta * mu;
            let new_nu = 1.0 + p * mu;
            d = (beta - prev_beta) * prev_nu + p * prev_beta * d;
            nu = new_nu;
        }
        let r = if n == 0 {
            1.0 + p
        } else {
            (1.0 - beta) * nu + p * beta * d
        };
        if n > 0 {
            // collapsed recursion must agree with the unfolded definition
            let collapsed =
                (1.0 + p) - (1.0 + 3.0 * p) * beta + 2.0 * p * beta * beta + p * beta * prev_r;
            debug_assert!(
                (collapsed - r).abs() <= 1e-9 * (1.0 + r.abs()),
                "flat recursion mismatch at n={n}: {collapsed} vs {r}"
            );
        }
        rows.push(FlatBoundRow {
            n,
            mu,
            nu,
            d_flat: d,
            r_flat: r,
        });
        prev_beta = beta;
        prev_nu = nu;
        prev_r = r;
    }
    Ok(rows)
}

/// Betas of a schedule as a plain vector indexed by step.
pub fn betas_of(rows: &[ScheduleRow]) -> Vec<f64> {
    rows.iter().map(|r| r.beta).collect()
}

/// Bounds of a schedule as a plain vector indexed by step.
pub fn bounds_of(rows: &[ScheduleRow]) -> Vec<f64> {
    rows.iter().map(|r| r.bound).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rho(v: f64) -> Rho {
        Rho::new(v).unwrap()
    }

    /// Grid minimizer of the one-step residual quadratic
    /// `1 - b + rho b^2 + rho b (r - 1)` over b in [0,1].
    fn grid_min_opt(p: f64, r: f64, points: usize) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=points {
            let b = k as f64 / points as f64;
            let v = 1.0 - b + p * b * b + p * b * (r - 1.0);
            if v < best.0 {
                best = (v, b);
            }
        }
        (best.1, best.0)
    }

    /// Grid minimizer of the flat one-step quadratic
    /// `(1 + rho) - (1 + 3 rho) b + 2 rho b^2 + rho b r` over b in [0,1].
    fn grid_min_flat(p: f64, r: f64, points: usize) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=points {
            let b = k as f64 / points as f64;
            let v = (1.0 + p) - (1.0 + 3.0 * p) * b + 2.0 * p * b * b + p * b * r;
            if v < best.0 {
                best = (v, b);
            }
        }
        (best.1, best.0)
    }

    #[test]
    fn beta_unconstrained_values() {
        assert_eq!(beta_unconstrained(rho(1.0), 1.0), 0.5);
        assert_eq!(beta_unconstrained(rho(2.0), 1.0), 0.25);
        assert_eq!(beta_unconstrained(rho(1.0), 0.0), 1.0);
    }

    #[test]
    fn b_opt_values() {
        assert_eq!(b_opt(rho(0.4), 1.0), 1.0);
        assert_eq!(b_opt(rho(1.0), 1.0), 0.5);
        // interior minimizer at rho=1.5, r=1/3; grid oracle confirms 2/3
        let b = b_opt(rho(1.5), 1.0 / 3.0);
        assert!((b - 2.0 / 3.0).abs() < 1e-15);
        let (gb, _) = grid_min_opt(1.5, 1.0 / 3.0, 1_000_000);
        assert!((b - gb).abs() <= 1e-6);
    }

    #[test]
    fn v_opt_values() {
        assert!((v_opt(rho(1.0), 1.0) - 0.75).abs() < 1e-15);
        assert!((v_opt(rho(1.5), 1.0 / 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((v_opt(rho(0.5), 0.8) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn r_limit_values() {
        assert_eq!(r_limit(rho(0.75)), 0.0);
        assert!((r_limit(rho(1.5)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r_limit(rho(1.0)), 0.0);
    }

    #[test]
    fn fixed_point_characterization() {
        for k in 1..=200 {
            let p = 3.0 * k as f64 / 200.0;
            let rl = r_limit(rho(p));
            assert!((v_opt(rho(p), rl) - rl).abs() <= 1e-12, "rho={p}");
            let (rf, bf) = flat_limits(rho(p));
            assert!((v_flat(rho(p), rf) - rf).abs() <= 1e-10, "rho={p}");
            assert!((b_flat(rho(p), rf) - bf).abs() <= 1e-10, "rho={p}");
        }
    }

    #[test]
    fn m_opt_rho_one() {
        let rows = m_opt_schedule(rho(1.0), 3);
        let betas = betas_of(&rows);
        assert_eq!(betas[0], 0.0);
        assert!((betas[1] - 0.5).abs() < 1e-15);
        assert!((betas[2] - 0.625).abs() < 1e-15);
        assert!((betas[3] - 89.0 / 128.0).abs() < 1e-15);
        let bounds = bounds_of(&rows);
        assert_eq!(bounds[0], 1.0);
        assert!((bounds[1] - 0.75).abs() < 1e-15);
        assert!((bounds[2] - 39.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn m_opt_small_rho_is_banach_picard() {
        let rows = m_opt_schedule(rho(0.4), 2);
        assert_eq!(betas_of(&rows), vec![0.0, 1.0, 1.0]);
        let b = bounds_of(&rows);
        assert!((b[1] - 0.4).abs() < 1e-15 && (b[2] - 0.16).abs() < 1e-15);
    }

    #[test]
    fn m_opt_limit() {
        let rows = m_opt_schedule(rho(1.5), 5000);
        assert!((rows[5000].bound - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn m_opt_monotone() {
        for &p in &[0.6, 0.98, 1.0, 1.5, 2.4] {
            let rows = m_opt_schedule(rho(p), 300);
            for w in rows.windows(2) {
                assert!(w[1].bound < w[0].bound, "bound not decreasing at rho={p}");
                assert!(w[1].beta >= w[0].beta, "beta not monotone at rho={p}");
            }
        }
    }

    #[test]
    fn m_opt_alternative_beta_recursion() {
        for &p in &[0.6, 0.98, 1.0, 1.5, 2.4] {
            let rows = m_opt_schedule(rho(p), 400);
            let mut beta = 0.0;
            for n in 1..=400 {
                beta = ((1.0 + (p * beta) * (p * beta)) / (2.0 * p)).min(1.0);
                assert!(
                    (rows[n].beta - beta).abs() <= 1e-12,
                    "rho={p} n={n}: {} vs {beta}",
                    rows[n].beta
                );
            }
        }
    }

    #[test]
    fn recursive_bounds_hand_unrolled() {
        let rows = halpern_recursive_bounds(rho(1.0), &[0.0, 0.5, 2.0 / 3.0]).unwrap();
        let (d1, c1) = match rows[1].aux {
            RowAux::Recursive { d, c } => (d, c),
            _ => unreachable!(),
        };
        assert!((d1 - 0.5).abs() < 1e-15 && (c1 - 0.5).abs() < 1e-15);
        assert!((rows[1].bound - 0.75).abs() < 1e-15);
        let (d2, _) = match rows[2].aux {
            RowAux::Recursive { d, c } => (d, c),
            _ => unreachable!(),
        };
        assert!((d2 - 5.0 / 12.0).abs() < 1e-15);
        assert!((rows[2].bound - 11.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn recursive_bounds_zero_betas() {
        let rows = halpern_recursive_bounds(rho(2.3), &[0.0, 0.0, 0.0]).unwrap();
        assert!(rows.iter().all(|r| r.bound == 1.0));
    }

    #[test]
    fn recursive_bounds_match_m_opt() {
        for &p in &[0.7, 1.0, 1.8] {
            let rows = m_opt_schedule(rho(p), 100);
            let rec = halpern_recursive_bounds(rho(p), &betas_of(&rows)).unwrap();
            for n in 0..=100 {
                assert!((rows[n].bound - rec[n].bound).abs() <= 1e-12, "rho={p} n={n}");
            }
        }
    }

    #[test]
    fn recursive_bounds_rejects_bad_beta() {
        assert!(halpern_recursive_bounds(rho(1.0), &[0.0, 1.5]).is_err());
        assert!(halpern_recursive_bounds(rho(1.0), &[0.1, 0.5]).is_err());
    }

    #[test]
    fn flat_pointwise_values() {
        assert_eq!(flat_beta_unconstrained(rho(1.0), 2.0), 0.5);
        assert_eq!(flat_beta_unconstrained(rho(1.0), 4.0), 0.0);
        assert_eq!(flat_beta_unconstrained(rho(1.0), 0.0), 1.0);
        assert_eq!(b_flat(rho(3.0), 4.0), 0.0);
        assert_eq!(b_flat(rho(0.3), 1.3), 1.0);
        assert_eq!(b_flat(rho(1.0), 2.0), 0.5);
        assert!((v_flat(rho(1.0), 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(v_flat(rho(3.0), 5.0), 4.0);
        assert!((v_flat(rho(0.5), 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn flat_limits_values() {
        let (r1, b1) = flat_limits(rho(1.0));
        assert_eq!((r1, b1), (0.0, 1.0));
        let (r2, b2) = flat_limits(rho(2.0));
        assert!((r2 - (3.0 + 2.0 * SQRT_2) / 2.0).abs() < 1e-12);
        assert!((b2 - (SQRT_2 - 1.0) / (2.0 * SQRT_2)).abs() < 1e-12);
        // iterating v_flat from 1+rho converges to the same limit
        let mut r = 3.0;
        for _ in 0..20000 {
            r = v_flat(rho(2.0), r);
        }
        assert!((r - r2).abs() < 1e-8);
        let (r3, b3) = flat_limits(rho(3.0));
        assert_eq!((r3, b3), (4.0, 0.0));
    }

    #[test]
    fn flat_schedule_rho_one() {
        let rows = flat_schedule(rho(1.0), 2);
        let b = bounds_of(&rows);
        assert_eq!(b[0], 2.0);
        assert!((b[1] - 1.5).abs() < 1e-15);
        assert!((b[2] - 39.0 / 32.0).abs() < 1e-15);
        assert!((rows[1].beta - 0.5).abs() < 1e-15);
        assert!((rows[2].beta - 0.625).abs() < 1e-15);
    }

    #[test]
    fn flat_schedule_small_rho() {
        let rows = flat_schedule(rho(0.3), 3);
        assert!(rows[1..].iter().all(|r| r.beta == 1.0));
        let b = bounds_of(&rows);
        for (got, want) in b.iter().zip([1.3, 0.39, 0.117, 0.0351]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_schedule_large_rho() {
        let rows = flat_schedule(rho(3.0), 5);
        assert!(rows[1..].iter().all(|r| r.beta == 0.0));
        assert!(rows.iter().all(|r| r.bound == 4.0));
    }

    #[test]
    fn flat_equals_twice_m_opt_at_rho_one() {
        let flat = flat_schedule(rho(1.0), 200);
        let mopt = m_opt_schedule(rho(1.0), 200);
        for n in 0..=200 {
            assert!((flat[n].bound - 2.0 * mopt[n].bound).abs() <= 1e-12, "n={n}");
            assert!((flat[n].beta - mopt[n].beta).abs() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn flat_general_bounds_base_and_step() {
        let rows = flat_general_bounds(rho(1.0), &[0.0], 1.0).unwrap();
        assert_eq!((rows[0].mu, rows[0].nu, rows[0].r_flat), (1.0, 2.0, 2.0));
        let rows = flat_general_bounds(rho(1.0), &[0.0, 0.5], 1.0).unwrap();
        assert!((rows[1].r_flat - 1.5).abs() < 1e-15);
        // collapsed recursion agreement instance
        let rows = flat_general_bounds(rho(2.0), &[0.0, 0.1, 0.1], 1.0).unwrap();
        let mut prev = rows[0].r_flat;
        for row in &rows[1..] {
            let beta = 0.1;
            let collapsed = 3.0 - 7.0 * beta + 4.0 * beta * beta + 2.0 * beta * prev;
            assert!((collapsed - row.r_flat).abs() <= 1e-12);
            prev = row.r_flat;
        }
    }

    #[test]
    fn flat_general_bounds_rejects_non_monotone() {
        assert!(flat_general_bounds(rho(1.0), &[0.0, 0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn flat_general_matches_flat_schedule() {
        for &p in &[0.8, 1.0, 1.7, 2.5] {
            let sched = flat_schedule(rho(p), 80);
            let rows = flat_general_bounds(rho(p), &betas_of(&sched), 1.0).unwrap();
            for n in 0..=80 {
                assert!(
                    (rows[n].r_flat - sched[n].bound).abs() <= 1e-10,
                    "rho={p} n={n}: {} vs {}",
                    rows[n].r_flat,
                    sched[n].bound
                );
            }
        }
    }

    #[test]
    fn v_opt_below_identity_above_limit() {
        for &p in &[0.5, 0.9, 1.0, 1.4, 2.2] {
            let rl = r_limit(rho(p));
            for k in 0..=1000 {
                let r = rl + (1.0 - rl) * k as f64 / 1000.0;
                let v = v_opt(rho(p), r);
                if (r - rl).abs() > 1e-9 {
                    assert!(v < r + 1e-12, "rho={p} r={r}");
                } else {
                    assert!((v - r).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn schedule_kind_parsing() {
        assert_eq!(ScheduleKind::parse("m-opt").unwrap(), ScheduleKind::MOpt);
        assert_eq!(ScheduleKind::parse("bp").unwrap(), ScheduleKind::BanachPicard);
        assert_eq!(
            ScheduleKind::parse("fixed:0,0.5,0.8").unwrap(),
            ScheduleKind::FixedSequence(vec![0.0, 0.5, 0.8])
        );
        assert!(ScheduleKind::parse("fixed:0,2.0").is_err());
        assert!(ScheduleKind::parse("nope").is_err());
    }

    proptest! {
        #[test]
        fn grid_oracle_v_b_opt(p in 0.05f64..3.0, r in 0.0f64..1.0) {
            let rh = rho(p);
            let (gb, gv) = grid_min_opt(p, r, 10_000);
            prop_assert!((v_opt(rh, r) - gv).abs() <= 1e-7);
            prop_assert!((b_opt(rh, r) - gb).abs() <= 2e-4);
        }

        #[test]
        fn grid_oracle_flat(p in 0.05f64..3.0, r in 0.0f64..4.0) {
            let rh = rho(p);
            if r <= 1.0 / p + 3.0 {
                let (gb, gv) = grid_min_flat(p, r, 10_000);
                prop_assert!((v_flat(rh, r) - gv).abs() <= 1e-7);
                prop_assert!((b_flat(rh, r) - gb).abs() <= 2e-4);
            }
        }
    }
}
