//! Residual bounds for affine maps and the optimal affine schedule.
//!
//! For `Tx = Ax + b` with `||A|| <= rho` the residual of a Halpern run is
//! bounded by `L_n(beta)`, a weighted l1 norm of the second differences of
//! the tail products of the step weights. Minimizing `L_n` gives the
//! `beta_i = i/(i+1)` schedule up to an optimal horizon `n0`, after which the
//! contractive case switches to plain Picard steps and the expansive case
//! freezes the iterate.

use crate::error::{Error, Result};

/// Tail products `B_i^n = prod_{j=i}^n beta_j`, with the conventions
/// `B_i^n = 0` for i <= 0 and `B_i^n = 1` for i > n.
pub struct BetaProducts {
    /// products[i] = B_i^n for i = 1..=n
    products: Vec<f64>,
    n: usize,
}

impl BetaProducts {
    /// `betas[j]` is beta_j; entries through index n must exist.
    pub fn new(betas: &[f64], n: usize) -> BetaProducts {
        let mut products = vec![0.0; n + 1];
        let mut acc = 1.0;
        for i in (1..=n).rev() {
            acc *= betas[i];
            products[i] = acc;
        }
        BetaProducts { products, n }
    }

    pub fn b(&self, i: isize) -> f64 {
        if i <= 0 {
            0.0
        } else if i as usize > self.n {
            1.0
        } else {
            self.products[i as usize]
        }
    }
}

/// The affine residual bound
/// `L_n(beta) = sum_{i=0}^{n+1} |B_{i+1}^n - 2 B_i^n + B_{i-1}^n| rho^{n+1-i}`.
pub fn affine_residual_bound(rho: f64, betas: &[f64], n: usize) -> f64 {
    let bp = BetaProducts::new(betas, n);
    let mut total = 0.0;
    for i in 0..=(n + 1) as isize {
        let coeff = (bp.b(i + 1) - 2.0 * bp.b(i) + bp.b(i - 1)).abs();
        total += coeff * rho.powi((n + 1) as i32 - i as i32);
    }
    total
}

/// Principal branch of the Lambert W function, `w e^w = x` for `x >= -1/e`.
/// Halley iteration from a branch-appropriate initial guess.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let inv_e = (-1.0f64).exp();
    if x < -inv_e - 1e-15 {
        return Err(Error::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x > std::f64::consts::E {
        // asymptotic: ln x - ln ln x
        let l = x.ln();
        l - l.ln()
    } else if x > -0.25 {
        // series around 0: x - x^2 + (3/2) x^3
        x * (1.0 - x * (1.0 - 1.5 * x))
    } else {
        // near the branch point: w ~ -1 + sqrt(2(ex+1))
        -1.0 + (2.0 * (std::f64::consts::E * x + 1.0).max(0.0)).sqrt()
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn n0_scan_condition(rho: f64, k: usize) -> bool {
    let kf = k as f64;
    let lhs = (1.0 + rho.powi(k as i32 + 1)) / (kf + 1.0);
    let rhs = if rho < 1.0 {
        rho * (1.0 + rho.powi(k as i32)) / kf
    } else {
        (1.0 + rho.powi(k as i32)) / kf
    };
    lhs <= rhs
}

fn n0_by_scan(rho: f64) -> usize {
    let mut k = 1;
    while n0_scan_condition(rho, k) {
        k += 1;
        if k > 10_000_000 {
            break;
        }
    }
    k - 1
}

fn n0_by_lambert(rho: f64) -> Result<usize> {
    let ln_rho = rho.ln();
    let arg = (ln_rho / (rho - 1.0)) * rho.powf(1.0 / (1.0 - rho));
    let w = lambert_w0(arg)?;
    let t = if rho < 1.0 {
        rho / (1.0 - rho) - w / ln_rho
    } else {
        1.0 / (rho - 1.0) + w / ln_rho
    };
    // when t sits within rounding distance of an integer, resolve the floor
    // by the defining inequality (ties stay inside the max)
    let nearest = t.round();
    let candidate = if (t - nearest).abs() < 1e-9 {
        let k = nearest as usize;
        if k >= 1 && n0_scan_condition(rho, k) {
            k
        } else {
            k.saturating_sub(1)
        }
    } else {
        t.floor().max(0.0) as usize
    };
    Ok(candidate)
}

/// Optimal horizon `n0` for the affine schedule, by direct scan of the
/// defining inequality. The Lambert-W closed form is evaluated as well and
/// must agree; disagreement is a hard error.
pub fn affine_n0(rho: f64) -> Result<usize> {
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::InvalidRho(rho));
    }
    if rho == 1.0 {
        return Err(Error::N0Undefined);
    }
    let scan = n0_by_scan(rho);
    let closed_form = n0_by_lambert(rho)?;
    if scan != closed_form {
        return Err(Error::N0Mismatch {
            rho,
            scan,
            closed_form,
        });
    }
    Ok(scan)
}

/// Optimal affine residual bound `L*_n`, closed form.
///
/// rho = 1 is the limit schedule `beta_i = i/(i+1)` with `L*_n = 2/(n+1)`.
pub fn l_star(rho: f64, n: usize) -> Result<f64> {
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::InvalidRho(rho));
    }
    if rho == 1.0 {
        return Ok(2.0 / (n as f64 + 1.0));
    }
    let n0 = affine_n0(rho)?;
    let head = |k: usize| (1.0 + rho.powi(k as i32 + 1)) / (k as f64 + 1.0);
    Ok(if n <= n0 {
        head(n)
    } else if rho < 1.0 {
        head(n0) * rho.powi((n - n0) as i32)
    } else {
        head(n0)
    })
}

/// Brute-force minimum of `L_n` over the extreme points of the schedule
/// polytope: k+1 equal atoms placed at the leading (rho < 1) or trailing
/// (rho > 1) positions, k = 0..n.
pub fn l_star_bruteforce(rho: f64, n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let head = (1.0 + rho.powi(k as i32 + 1)) / (k as f64 + 1.0);
        let v = if rho < 1.0 {
            rho.powi((n - k) as i32) * head
        } else {
            head
        };
        best = best.min(v);
    }
    best
}

/// One step of the affine-optimal schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AffStep {
    Beta(f64),
    Freeze,
}

/// The affine-optimal schedule: `beta_n = n/(n+1)` while the one-step test
/// holds, then plain Picard steps (rho < 1) or frozen steps (rho > 1).
/// `steps[0]` is the conventional beta_0 = 0.
pub fn aff_schedule(rho: f64, n_max: usize) -> Result<Vec<AffStep>> {
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::InvalidRho(rho));
    }
    let mut steps = Vec::with_capacity(n_max + 1);
    steps.push(AffStep::Beta(0.0));
    let mut in_head = true;
    for n in 1..=n_max {
        let nf = n as f64;
        let lhs = (1.0 + rho.powi(n as i32 + 1)) / (nf + 1.0);
        let rhs = rho.min(1.0) * (1.0 + rho.powi(n as i32)) / nf;
        if in_head && lhs <= rhs {
            steps.push(AffStep::Beta(nf / (nf + 1.0)));
        } else {
            in_head = false;
            if rho < 1.0 {
                steps.push(AffStep::Beta(1.0));
            } else if rho > 1.0 {
                steps.push(AffStep::Freeze);
            } else {
                // rho = 1: the test always holds; unreachable
                steps.push(AffStep::Beta(nf / (nf + 1.0)));
            }
        }
    }
    Ok(steps)
}

/// Betas actually used by a run of the affine schedule through step n, for
/// evaluating `L_n`. Frozen steps repeat the previous iterate, which in
/// tail-product terms is beta = product-preserving; they are not valid inputs
/// to `affine_residual_bound`, so this returns None once a freeze occurred.
pub fn aff_betas_if_unfrozen(steps: &[AffStep]) -> Option<Vec<f64>> {
    steps
        .iter()
        .map(|s| match s {
            AffStep::Beta(b) => Some(*b),
            AffStep::Freeze => None,
        })
        .collect()
}
