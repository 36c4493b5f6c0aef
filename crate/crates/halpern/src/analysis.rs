//! Derived quantities around the optimal contractive schedule: the transition
//! index n0 where the anchored phase hands over to pure Banach-Picard steps,
//! the Hilbert-versus-normed comparison ratios Q_n and Q_inf, the threshold
//! sequences (z_n, rho_n), the logistic error envelope, and the minimal
//! displacement bound for expansive maps.

use crate::error::{Error, Result};
use crate::schedules::{self, Rho};

/// e^2 to 20 significant digits.
#[allow(clippy::excessive_precision)]
pub const E2: f64 = 7.3890560989306502272;

/// Comparison table row: the normed-space bound R*_n against the classical
/// Hilbert-space rate, at one (rho, n) pair. `n = None` marks the n -> inf
/// limit.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonRow {
    pub rho: f64,
    pub n: Option<usize>,
    pub q: f64,
    pub pr: f64,
    pub r_star: f64,
}

fn require_contractive(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::RhoOutOfRange {
            rho,
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// Hilbert-space worst-case residual bound for the classical anchored
/// schedule: delta0 rho^n (1 - rho^2) / (1 - rho^{n+1}).
pub fn pr_bound(rho: f64, n: usize, delta0: f64) -> Result<f64> {
    require_contractive(rho)?;
    let rho_n = rho.powi(n.min(i32::MAX as usize) as i32);
    let one_minus_rho_np1 = 1.0 - rho_n * rho;
    Ok(delta0 * rho_n * (1.0 - rho * rho) / one_minus_rho_np1)
}

/// Smallest n with R*_n <= 1/rho - 1, i.e. where the optimal contractive
/// schedule enters its geometric tail. Computed by direct scan of the
/// recursion and cross-checked against the bracketing rho_n thresholds
/// (n0 = n exactly when rho lies in (rho_{n-1}, rho_n]); disagreement is a
/// hard error.
pub fn n0_transition(rho: f64) -> Result<usize> {
    require_contractive(rho)?;
    let target = 1.0 / rho - 1.0;
    let r = Rho::new(rho)?;
    let cap = (8.0 / (1.0 - rho)).ceil() as usize + 16;
    // bracket by the threshold sequence (rho_{-1} := 0); the slacks in both
    // comparisons only matter when rho sits on a threshold up to rounding
    let mut eps = 0.5;
    let mut bracket = None;
    for n in 0..=cap {
        if rho <= 1.0 - eps + 1e-15 {
            bracket = Some(n);
            break;
        }
        eps -= eps * eps / 2.0;
    }
    let bracket = bracket.ok_or(Error::N0Undefined)?;
    // direct scan of the bound recursion, recording its margin at the
    // bracketed index
    let mut bound = 1.0;
    let mut scan = None;
    let mut margin_at_bracket = f64::INFINITY;
    for n in 0..=cap {
        if n == bracket {
            margin_at_bracket = (bound - target).abs();
        }
        if bound <= target + 1e-13 * target {
            scan = Some(n);
            margin_at_bracket = margin_at_bracket.min((bound - target).abs());
            break;
        }
        bound = schedules::v_opt(r, bound);
    }
    let scan = scan.ok_or(Error::N0Undefined)?;
    if scan != bracket {
        // near the crossing the recursion's step size shrinks to
        // O((1-rho)^2) while its accumulated rounding grows linearly in n, so
        // for rho close to 1 the crossing index is ill-conditioned. The two
        // computations still agree when the recursion value at the bracketed
        // index sits within its worst-case rounding envelope of the
        // threshold; anything beyond that is a real disagreement.
        let noise = 4e-15 * (scan.max(bracket) as f64 + 1.0);
        if margin_at_bracket > noise {
            return Err(Error::N0Mismatch {
                rho,
                scan,
                closed_form: bracket,
            });
        }
    }
    Ok(bracket)
}

fn r_star_at(rho: f64, n: usize) -> f64 {
    let rows = schedules::m_opt_schedule(Rho::new(rho).unwrap(), n);
    rows[n].bound
}

/// Ratio of the optimal normed-space bound to the Hilbert-space rate,
/// Q_n = (1 - rho^{n+1}) / (1 - rho) * R*_n / rho^n. For n >= n0 the factor
/// R*_n / rho^n is constant, so it is evaluated at min(n, n0) to avoid
/// underflow of both numerator and denominator.
pub fn q_n(rho: f64, n: usize) -> Result<f64> {
    require_contractive(rho)?;
    let n0 = n0_transition(rho)?;
    let m = n.min(n0);
    let ln_rho = (rho - 1.0).ln_1p();
    let ratio = r_star_at(rho, m) / (m as f64 * ln_rho).exp();
    let one_minus_rho_np1 = -((n as f64 + 1.0) * ln_rho).exp_m1();
    Ok(one_minus_rho_np1 / (1.0 - rho) * ratio)
}

/// Q_n over 0..=n_max with the schedule computed once.
pub fn q_table(rho: f64, n_max: usize) -> Result<Vec<f64>> {
    require_contractive(rho)?;
    let n0 = n0_transition(rho)?;
    let rows = schedules::m_opt_schedule(Rho::new(rho)?, n0.min(n_max));
    let ln_rho = (rho - 1.0).ln_1p();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let m = n.min(n0);
        let ratio = rows[m].bound / (m as f64 * ln_rho).exp();
        let one_minus_rho_np1 = -((n as f64 + 1.0) * ln_rho).exp_m1();
        out.push(one_minus_rho_np1 / (1.0 - rho) * ratio);
    }
    Ok(out)
}

/// Limit ratio Q_inf = R*_{n0} / ((1 - rho) rho^{n0}).
pub fn q_inf(rho: f64) -> Result<f64> {
    require_contractive(rho)?;
    let n0 = n0_transition(rho)?;
    let ln_rho = (rho - 1.0).ln_1p();
    Ok(r_star_at(rho, n0) / ((1.0 - rho) * (n0 as f64 * ln_rho).exp()))
}

/// Threshold sequences z_{n+1} = (1 + z_n)^2 / 4 with z_0 = 0 and
/// rho_{n+1} = (1 + rho_n^2) / 2 with rho_0 = 1/2. Both are driven by the
/// single recursion eps' = eps - eps^2/2 through rho = 1 - eps, z = 1 - 2 eps,
/// which keeps the identity rho_n = (1 + z_n)/2 exact.
#[derive(Debug, Clone)]
pub struct RhoZ {
    pub z: Vec<f64>,
    pub rho: Vec<f64>,
    pub eps: Vec<f64>,
}

impl RhoZ {
    /// rho_n^n, evaluated in log space to survive large n.
    pub fn pow_n(&self, n: usize) -> f64 {
        ((n as f64) * (-self.eps[n]).ln_1p()).exp()
    }
}

pub fn rho_z_sequences(n_max: usize) -> Result<RhoZ> {
    let mut eps = Vec::with_capacity(n_max + 1);
    let mut e = 0.5f64;
    for _ in 0..=n_max {
        eps.push(e);
        e -= e * e / 2.0;
    }
    let rho: Vec<f64> = eps.iter().map(|&e| 1.0 - e).collect();
    let z: Vec<f64> = eps.iter().map(|&e| 1.0 - 2.0 * e).collect();
    for n in 0..=n_max {
        if (rho[n] - (1.0 + z[n]) / 2.0).abs() > 1e-14 {
            return Err(Error::Analysis(format!(
                "rho_n = (1+z_n)/2 identity broken at n = {n}"
            )));
        }
    }
    Ok(RhoZ { z, rho, eps })
}

/// One row of the logistic envelope: the iterate and its two-sided bounds.
#[derive(Debug, Clone, Copy)]
pub struct SandwichRow {
    pub e: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Logistic iteration e_n = e_{n-1}(1 - e_{n-1}) with e_0 = 1/4, together
/// with the envelope 1/((n+3) + ln(n+3)) <= e_n <= 1/(n+3), asserted at every
/// step.
pub fn logistic_sandwich(n_max: usize) -> Result<Vec<SandwichRow>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut e = 0.25f64;
    for n in 0..=n_max {
        let t = n as f64 + 3.0;
        let lower = 1.0 / (t + t.ln());
        let upper = 1.0 / t;
        if !(lower <= e && e <= upper) {
            return Err(Error::Analysis(format!(
                "logistic sandwich violated at n = {n}: {lower} <= {e} <= {upper}"
            )));
        }
        out.push(SandwichRow { e, lower, upper });
        e *= 1.0 - e;
    }
    Ok(out)
}

/// Minimal displacement bound for a rho-Lipschitz self-map of a convex set
/// with the given diameter: diam (1 - 1/rho).
pub fn minimal_displacement(rho: f64, diam: f64) -> Result<f64> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::RhoOutOfRange {
            rho,
            range: "[1, inf)",
        });
    }
    if diam.is_nan() || diam <= 0.0 {
        return Err(Error::Analysis(format!("diameter must be positive, got {diam}")));
    }
    Ok(diam * (1.0 - 1.0 / rho))
}

/// Certified asymptotic speedup of the optimal schedule over plain
/// Banach-Picard: the limit ratio rho^n / R*_n together with its two proved
/// lower bounds, both asserted.
#[derive(Debug, Clone, Copy)]
pub struct SpeedupReport {
    pub rho: f64,
    pub n0: usize,
    /// rho^{n0} / R*_{n0}, the limit of rho^n / R*_n
    pub ratio: f64,
    /// rho^{n0 + 1} / (1 - rho)
    pub ratio_lower: f64,
    /// rho e^{-2}, a lower bound on rho^{n0}
    pub rho_n0_lower: f64,
}

pub fn speedup_certificate(rho: f64) -> Result<SpeedupReport> {
    require_contractive(rho)?;
    let n0 = n0_transition(rho)?;
    let ln_rho = (rho - 1.0).ln_1p();
    let rho_n0 = (n0 as f64 * ln_rho).exp();
    let ratio = rho_n0 / r_star_at(rho, n0);
    let ratio_lower = rho_n0 * rho / (1.0 - rho);
    let rho_n0_lower = rho / E2;
    if ratio < ratio_lower * (1.0 - 1e-12) {
        return Err(Error::Analysis(format!(
            "speedup ratio {ratio} below its certified bound {ratio_lower} at rho = {rho}"
        )));
    }
    if rho_n0 < rho_n0_lower * (1.0 - 1e-12) {
        return Err(Error::Analysis(format!(
            "rho^n0 = {rho_n0} below rho e^-2 = {rho_n0_lower} at rho = {rho}"
        )));
    }
    Ok(SpeedupReport {
        rho,
        n0,
        ratio,
        ratio_lower,
        rho_n0_lower,
    })
}

/// Comparison row at one (rho, n); n = None gives the limit quantities.
pub fn comparison_row(rho: f64, n: Option<usize>) -> Result<ComparisonRow> {
    require_contractive(rho)?;
    match n {
        Some(n) => Ok(ComparisonRow {
            rho,
            n: Some(n),
            q: q_n(rho, n)?,
            pr: pr_bound(rho, n, 1.0)?,
            r_star: r_star_at(rho, n.min(n0_transition(rho)?)),
            // r_star reported at the capped index to stay representable
        }),
        None => {
            let n0 = n0_transition(rho)?;
            Ok(ComparisonRow {
                rho,
                n: None,
                q: q_inf(rho)?,
                pr: 0.0,
                r_star: r_star_at(rho, n0),
            })
        }
    }
}
