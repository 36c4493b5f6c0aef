//! Deterministic iteration runs with per-step traces and bound checking.
//!
//! The floating-point order of operations of the Halpern step is fixed as
//! `(1 - beta) * x0[k] + beta * t[k]` so runs are bitwise reproducible and the
//! Mann encoding with two-atom rows reproduces the same arithmetic.

use crate::error::{Error, Result};
use crate::operators::OperatorSpec;
use crate::schedules::{self, FlatBoundRow, Rho, ScheduleRow};

/// Schedule vocabulary understood by the runner: a plain step weight or a
/// frozen step that copies the previous iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleStep {
    Beta(f64),
    Freeze,
}

/// One recorded step of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub n: usize,
    pub beta_used: f64,
    pub residual: f64,
    pub kappa_hat: f64,
    pub dist_to_x0: f64,
    pub dist_to_fixed_point: Option<f64>,
    /// Distance from the anchor to the current image, ||x0 - T x^n||.
    pub anchor_image_dist: f64,
    /// Online bound value when the run computes one (adaptive R_n).
    pub bound: Option<f64>,
}

/// Full record of a run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub delta0: Option<f64>,
    pub kappa0: Option<f64>,
    /// Set when the run terminated at step 0 because x0 was already fixed.
    pub converged: bool,
}

impl IterationTrace {
    pub fn residuals(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.residual).collect()
    }

    /// CSV serialization: `n,beta,residual,kappa_hat,dist_x0,dist_fp,bound`,
    /// 17 significant decimal digits, empty fields when unavailable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,beta,residual,kappa_hat,dist_x0,dist_fp,bound\n");
        for s in &self.steps {
            let fp = s
                .dist_to_fixed_point
                .map_or(String::new(), |v| format!("{v:.16e}"));
            let bd = s.bound.map_or(String::new(), |v| format!("{v:.16e}"));
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                s.n, s.beta_used, s.residual, s.kappa_hat, s.dist_to_x0, fp, bd
            ));
        }
        out
    }
}

struct RunState<'a> {
    op: &'a OperatorSpec,
    x0: Vec<f64>,
    x: Vec<f64>,
    tx: Vec<f64>,
    kappa_hat: f64,
    trace: IterationTrace,
}

impl<'a> RunState<'a> {
    fn start(op: &'a OperatorSpec, x0: &[f64]) -> Result<RunState<'a>> {
        if !op.in_domain(x0) {
            return Err(Error::DomainViolation { step: 0 });
        }
        let tx = op.eval(x0)?;
        let residual = op.norm.dist(x0, &tx);
        let kappa_hat = residual;
        let dist_fp = op.fixed_point.as_ref().map(|fp| op.norm.dist(x0, fp));
        let trace = IterationTrace {
            steps: vec![TraceStep {
                n: 0,
                beta_used: 0.0,
                residual,
                kappa_hat,
                dist_to_x0: 0.0,
                dist_to_fixed_point: dist_fp,
                anchor_image_dist: residual,
                bound: None,
            }],
            delta0: dist_fp,
            kappa0: None,
            converged: false,
        };
        Ok(RunState {
            op,
            x0: x0.to_vec(),
            x: x0.to_vec(),
            tx,
            kappa_hat,
            trace,
        })
    }

    /// Advance one step; returns (||T x^n - T x^{n-1}||, recorded step).
    fn step(&mut self, n: usize, step: ScheduleStep) -> Result<(f64, TraceStep)> {
        let new_x = match step {
            ScheduleStep::Freeze => self.x.clone(),
            ScheduleStep::Beta(beta) => {
                let coeff0 = 1.0 - beta;
                self.x0
                    .iter()
                    .zip(&self.tx)
                    .map(|(a, t)| coeff0 * a + beta * t)
                    .collect()
            }
        };
        if !self.op.in_domain(&new_x) {
            return Err(Error::DomainViolation { step: n });
        }
        let new_tx = self.op.eval(&new_x)?;
        let image_step = self.op.norm.dist(&new_tx, &self.tx);
        self.x = new_x;
        self.tx = new_tx;
        let residual = self.op.norm.dist(&self.x, &self.tx);
        let anchor_image_dist = self.op.norm.dist(&self.x0, &self.tx);
        self.kappa_hat = self.kappa_hat.max(anchor_image_dist);
        let rec = TraceStep {
            n,
            beta_used: match step {
                ScheduleStep::Beta(b) => b,
                ScheduleStep::Freeze => f64::NAN,
            },
            residual,
            kappa_hat: self.kappa_hat,
            dist_to_x0: self.op.norm.dist(&self.x, &self.x0),
            dist_to_fixed_point: self
                .op
                .fixed_point
                .as_ref()
                .map(|fp| self.op.norm.dist(&self.x, fp)),
            anchor_image_dist,
            bound: None,
        };
        self.trace.steps.push(rec);
        Ok((image_step, rec))
    }
}

/// Run the iteration under an explicit step schedule (betas and freezes).
/// `steps[n]` drives step n for n = 1..=n_max; index 0 is ignored.
pub fn schedule_run(
    op: &OperatorSpec,
    x0: &[f64],
    steps: &[ScheduleStep],
    n_max: usize,
) -> Result<IterationTrace> {
    if steps.len() < n_max + 1 {
        return Err(Error::Config(format!(
            "schedule has {} entries, need {}",
            steps.len(),
            n_max + 1
        )));
    }
    for (i, s) in steps.iter().enumerate().take(n_max + 1).skip(1) {
        if let ScheduleStep::Beta(b) = s {
            if !(0.0..=1.0).contains(b) || !b.is_finite() {
                return Err(Error::BetaOutOfRange { index: i, value: *b });
            }
        }
    }
    let mut st = RunState::start(op, x0)?;
    for n in 1..=n_max {
        st.step(n, steps[n])?;
    }
    Ok(st.trace)
}

/// Halpern run `x^n = (1 - beta_n) x^0 + beta_n T x^{n-1}`.
/// `betas[n]` is used at step n for n = 1..=n_max.
pub fn halpern_run(
    op: &OperatorSpec,
    x0: &[f64],
    betas: &[f64],
    n_max: usize,
) -> Result<IterationTrace> {
    let steps: Vec<ScheduleStep> = betas.iter().map(|&b| ScheduleStep::Beta(b)).collect();
    schedule_run(op, x0, &steps, n_max)
}

/// Banach-Picard run (betas identically 1) with the geometric residual
/// decrease checked online.
pub fn banach_picard_run(op: &OperatorSpec, x0: &[f64], n_max: usize) -> Result<IterationTrace> {
    let trace = halpern_run(op, x0, &vec![1.0; n_max + 1], n_max)?;
    let p = op.rho.get();
    for w in trace.steps.windows(2) {
        if w[1].residual > p * w[0].residual * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::GeometricDecreaseViolated {
                step: w[1].n,
                current: w[1].residual,
                previous: w[0].residual,
            });
        }
    }
    Ok(trace)
}

/// Adaptive Halpern run: the bound recursion is driven by observed orbit
/// quantities instead of the worst case. Each step is verified against the
/// theoretical sandwich; violations are hard errors. R_n is never clamped.
pub fn ada_halpern_run(op: &OperatorSpec, x0: &[f64], n_max: usize) -> Result<IterationTrace> {
    let rho = op.rho;
    let mut st = RunState::start(op, x0)?;
    if st.kappa_hat == 0.0 {
        return Ok(IterationTrace {
            steps: Vec::new(),
            delta0: st.trace.delta0,
            kappa0: Some(0.0),
            converged: true,
        });
    }
    st.trace.steps[0].bound = Some(1.0);
    let r_star = schedules::m_opt_schedule(rho, n_max);
    let rl = schedules::r_limit(rho);
    let mut r_prev = 1.0;
    let mut beta_prev = 0.0;
    for n in 1..=n_max {
        let beta = schedules::b_opt(rho, r_prev);
        let (image_step, _) = st.step(n, ScheduleStep::Beta(beta))?;
        let r_n = 1.0 - beta + beta * image_step / st.kappa_hat;
        let last = st.trace.steps.last_mut().unwrap();
        last.bound = Some(r_n);
        let residual = last.residual;
        let v = schedules::v_opt(rho, r_prev);
        if beta < beta_prev - 1e-15 {
            return Err(Error::AdaSandwichViolated {
                step: n,
                detail: format!("beta decreased: {beta} < {beta_prev}"),
            });
        }
        if r_n < rl - 1e-12 || r_n > v * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::AdaSandwichViolated {
                step: n,
                detail: format!("R_n = {r_n} outside [{rl}, V(R_prev) = {v}]"),
            });
        }
        if v > r_star[n].bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::AdaSandwichViolated {
                step: n,
                detail: format!("V(R_prev) = {v} exceeds worst case {}", r_star[n].bound),
            });
        }
        if residual > st.kappa_hat * r_n * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::AdaSandwichViolated {
                step: n,
                detail: format!(
                    "residual {residual} exceeds kappa_hat * R_n = {}",
                    st.kappa_hat * r_n
                ),
            });
        }
        r_prev = r_n;
        beta_prev = beta;
    }
    Ok(st.trace)
}

/// Triangular array of Mann averaging weights.
#[derive(Debug, Clone)]
pub struct MannArray {
    rows: Vec<Vec<f64>>,
}

impl MannArray {
    /// Validates row sums, non-negativity, and a positive trailing weight.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<MannArray> {
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::InvalidMannArray(format!(
                    "row {n} has {} entries, expected {}",
                    row.len(),
                    n + 1
                )));
            }
            if row.iter().any(|&w| w < 0.0 || !w.is_finite()) {
                return Err(Error::InvalidMannArray(format!("row {n} has negative weight")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMannArray(format!("row {n} sums to {sum}")));
            }
            if row[n] <= 0.0 {
                return Err(Error::InvalidMannArray(format!(
                    "row {n} has non-positive trailing weight"
                )));
            }
        }
        Ok(MannArray { rows })
    }

    /// Halpern encoding: row n is (1 - beta_n) at index 0 and beta_n at index n.
    /// Requires beta_n > 0 for n >= 1 so the trailing weight stays positive.
    pub fn halpern(betas: &[f64]) -> Result<MannArray> {
        let mut rows = Vec::with_capacity(betas.len());
        rows.push(vec![1.0]);
        for (n, &b) in betas.iter().enumerate().skip(1) {
            let mut row = vec![0.0; n + 1];
            row[0] = 1.0 - b;
            row[n] = b;
            rows.push(row);
        }
        MannArray::new(rows)
    }

    /// Point-mass rows: row n puts all weight at index n (Banach-Picard).
    pub fn point_mass(n_max: usize) -> Result<MannArray> {
        let rows = (0..=n_max)
            .map(|n| {
                let mut row = vec![0.0; n + 1];
                row[n] = 1.0;
                row
            })
            .collect();
        MannArray::new(rows)
    }

    /// Uniform rows: row n averages all n+1 available points equally.
    pub fn uniform(n_max: usize) -> Result<MannArray> {
        let rows = (0..=n_max)
            .map(|n| vec![1.0 / (n as f64 + 1.0); n + 1])
            .collect();
        MannArray::new(rows)
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// General Mann run `x^n = sum_i pi^n_i T x^{i-1}` with `T x^{-1} = x^0`.
/// All images `T x^i` are cached.
pub fn mann_run(
    op: &OperatorSpec,
    x0: &[f64],
    pi: &MannArray,
    n_max: usize,
) -> Result<IterationTrace> {
    if pi.len() < n_max + 1 {
        return Err(Error::InvalidMannArray(format!(
            "array has {} rows, need {}",
            pi.len(),
            n_max + 1
        )));
    }
    if !op.in_domain(x0) {
        return Err(Error::DomainViolation { step: 0 });
    }
    // images[i] = T x^{i-1}; images[0] = x^0 by convention
    let mut images: Vec<Vec<f64>> = vec![x0.to_vec()];
    let dim = op.dim;
    let mut trace = IterationTrace {
        steps: Vec::new(),
        delta0: op.fixed_point.as_ref().map(|fp| op.norm.dist(x0, fp)),
        kappa0: None,
        converged: false,
    };
    let mut kappa_hat = 0.0f64;
    for n in 0..=n_max {
        let row = pi.row(n);
        let mut x = vec![0.0; dim];
        // skip zero weights so the two-atom encoding reproduces the Halpern
        // arithmetic bitwise
        for (i, &w) in row.iter().enumerate() {
            if w != 0.0 {
                for k in 0..dim {
                    x[k] += w * images[i][k];
                }
            }
        }
        if n == 0 {
            x = x0.to_vec();
        }
        if !op.in_domain(&x) {
            return Err(Error::DomainViolation { step: n });
        }
        let tx = op.eval(&x)?;
        let residual = op.norm.dist(&x, &tx);
        let anchor_image_dist = op.norm.dist(x0, &tx);
        kappa_hat = kappa_hat.max(anchor_image_dist);
        trace.steps.push(TraceStep {
            n,
            beta_used: if n == 0 { 0.0 } else { row[n] },
            residual,
            kappa_hat,
            dist_to_x0: op.norm.dist(&x, x0),
            dist_to_fixed_point: op.fixed_point.as_ref().map(|fp| op.norm.dist(&x, fp)),
            anchor_image_dist,
            bound: None,
        });
        images.push(tx);
    }
    Ok(trace)
}

/// Orbit bound observed over a Halpern run: max over all pairs of images
/// `T x^i` (with `T x^{-1} = x^0`) of their distance. This is the smallest
/// constant kappa for which the boundedness condition holds on the orbit.
pub fn observed_orbit_bound(
    op: &OperatorSpec,
    x0: &[f64],
    betas: &[f64],
    n_max: usize,
) -> Result<f64> {
    let mut images: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for n in 0..=n_max {
        let tx = op.eval(&x)?;
        images.push(tx.clone());
        if n < n_max {
            let beta = betas[n + 1];
            x = x0
                .iter()
                .zip(&tx)
                .map(|(a, t)| (1.0 - beta) * a + beta * t)
                .collect();
        }
    }
    let mut kappa = 0.0f64;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            kappa = kappa.max(op.norm.dist(&images[i], &images[j]));
        }
    }
    Ok(kappa)
}

/// Bound family used by [`check_bounds`].
pub enum BoundFamily<'a> {
    /// Residual bounds: residual_n <= scale * bound_n.
    Orbit(&'a [ScheduleRow]),
    /// Flat bounds: residual, distance-to-fixed-point, and anchor-image
    /// inequalities against (mu, nu, R_flat) with scale = delta0.
    Flat(&'a [FlatBoundRow]),
}

/// One checked inequality.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub n: usize,
    pub what: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Report of a bound-checking pass; never errors, only records.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn worst(&self) -> Option<&BoundCheck> {
        self.checks
            .iter()
            .max_by(|a, b| (a.lhs - a.rhs).total_cmp(&(b.lhs - b.rhs)))
    }
}

/// Check a trace against a bound family with the stated scale (kappa for the
/// orbit family, delta0 for the flat family).
pub fn check_bounds(trace: &IterationTrace, family: BoundFamily, scale: f64) -> BoundReport {
    let tol = 1e-9;
    let mut checks = Vec::new();
    match family {
        BoundFamily::Orbit(rows) => {
            for (s, row) in trace.steps.iter().zip(rows) {
                let rhs = scale * row.bound;
                checks.push(BoundCheck {
                    n: s.n,
                    what: "residual <= kappa * R_n",
                    lhs: s.residual,
                    rhs,
                    pass: s.residual <= rhs * (1.0 + tol) + 1e-15,
                });
            }
        }
        BoundFamily::Flat(rows) => {
            for (s, row) in trace.steps.iter().zip(rows) {
                let rhs = scale * row.r_flat;
                checks.push(BoundCheck {
                    n: s.n,
                    what: "residual <= delta0 * R_flat_n",
                    lhs: s.residual,
                    rhs,
                    pass: s.residual <= rhs * (1.0 + tol) + 1e-15,
                });
                if let Some(dfp) = s.dist_to_fixed_point {
                    let rhs = scale * row.mu;
                    checks.push(BoundCheck {
                        n: s.n,
                        what: "dist_fp <= delta0 * mu_n",
                        lhs: dfp,
                        rhs,
                        pass: dfp <= rhs * (1.0 + tol) + 1e-15,
                    });
                    let rhs = scale * row.nu;
                    checks.push(BoundCheck {
                        n: s.n,
                        what: "anchor_image <= delta0 * nu_n",
                        lhs: s.anchor_image_dist,
                        rhs,
                        pass: s.anchor_image_dist <= rhs * (1.0 + tol) + 1e-15,
                    });
                }
            }
        }
    }
    BoundReport { checks }
}

/// Report of the flat convergence envelope check.
#[derive(Debug, Clone)]
pub struct FlatConvergenceReport {
    pub x_flat: Vec<f64>,
    pub delta0: f64,
    pub anchor_gap: f64,
    pub anchor_gap_bound: f64,
    pub checks: Vec<BoundCheck>,
}

impl FlatConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// For expansive rho in (1, sqrt(2)+1): the flat-optimal iterates converge to
/// the anchored point x_flat (fixed point of `x -> (1-beta_flat) x0 +
/// beta_flat T x`) at the envelope rate `(n+1) L^n` with `L = rho beta_flat`.
pub fn flat_convergence_check(
    op: &OperatorSpec,
    x0: &[f64],
    n_max: usize,
) -> Result<FlatConvergenceReport> {
    let p = op.rho.get();
    if !(p > 1.0 && p < schedules::SQRT_2 + 1.0) {
        return Err(Error::RhoOutOfRange {
            rho: p,
            range: "(1, sqrt(2)+1)",
        });
    }
    let fp = op.fixed_point.as_ref().ok_or(Error::Config(
        "flat_convergence_check needs a known fixed point".into(),
    ))?;
    let delta0 = op.norm.dist(x0, fp);
    let (_, beta_flat) = schedules::flat_limits(op.rho);
    let l = p * beta_flat;
    // x_flat by Banach iteration of the anchored contraction
    let mut x_flat = x0.to_vec();
    for _ in 0..100_000 {
        let tx = op.eval(&x_flat)?;
        let next: Vec<f64> = x0
            .iter()
            .zip(&tx)
            .map(|(a, t)| (1.0 - beta_flat) * a + beta_flat * t)
            .collect();
        let step = op.norm.dist(&next, &x_flat);
        x_flat = next;
        if step < 1e-13 {
            break;
        }
    }
    let anchor_gap = op.norm.dist(x0, &x_flat);
    let anchor_gap_bound = (schedules::SQRT_2 + 1.0) * delta0 / p;
    let sched = schedules::flat_schedule(op.rho, n_max);
    let trace = halpern_run(op, x0, &schedules::betas_of(&sched), n_max)?;
    let mut checks = Vec::new();
    let mut envelope = anchor_gap; // (n+1) L^n at n = 0
    for (n, s) in trace.steps.iter().enumerate() {
        if n > 0 {
            envelope = anchor_gap * (n as f64 + 1.0) * l.powi(n as i32);
        }
        // distance from iterate to x_flat
        let dist = {
            let x_n = reconstruct_iterate(op, x0, &schedules::betas_of(&sched), n)?;
            op.norm.dist(&x_n, &x_flat)
        };
        checks.push(BoundCheck {
            n: s.n,
            what: "||x_n - x_flat|| <= ||x0 - x_flat|| (n+1) L^n",
            lhs: dist,
            rhs: envelope,
            pass: dist <= envelope * (1.0 + 1e-9) + 1e-12,
        });
    }
    checks.push(BoundCheck {
        n: 0,
        what: "||x0 - x_flat|| <= (sqrt(2)+1) delta0 / rho",
        lhs: anchor_gap,
        rhs: anchor_gap_bound,
        pass: anchor_gap <= anchor_gap_bound * (1.0 + 1e-9) + 1e-12,
    });
    Ok(FlatConvergenceReport {
        x_flat,
        delta0,
        anchor_gap,
        anchor_gap_bound,
        checks,
    })
}

/// Recompute the iterate at step n (traces store scalars only).
fn reconstruct_iterate(
    op: &OperatorSpec,
    x0: &[f64],
    betas: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    for (k, &beta) in betas.iter().enumerate().take(n + 1).skip(1) {
        let _ = k;
        let tx = op.eval(&x)?;
        x = x0
            .iter()
            .zip(&tx)
            .map(|(a, t)| (1.0 - beta) * a + beta * t)
            .collect();
    }
    Ok(x)
}

/// Convert a Rho and schedule kind into runnable steps for n = 0..=n_max.
pub fn steps_for_kind(
    kind: &schedules::ScheduleKind,
    rho: Rho,
    n_max: usize,
) -> Result<Vec<ScheduleStep>> {
    use schedules::ScheduleKind::*;
    Ok(match kind {
        MOpt => schedules::betas_of(&schedules::m_opt_schedule(rho, n_max))
            .into_iter()
            .map(ScheduleStep::Beta)
            .collect(),
        FlatOpt => schedules::betas_of(&schedules::flat_schedule(rho, n_max))
            .into_iter()
            .map(ScheduleStep::Beta)
            .collect(),
        BanachPicard => vec![ScheduleStep::Beta(1.0); n_max + 1],
        Affine => crate::affine::aff_schedule(rho.get(), n_max)?
            .into_iter()
            .map(|s| match s {
                crate::affine::AffStep::Beta(b) => ScheduleStep::Beta(b),
                crate::affine::AffStep::Freeze => ScheduleStep::Freeze,
            })
            .collect(),
        FixedSequence(betas) => {
            if betas.len() < n_max + 1 {
                return Err(Error::Config(format!(
                    "fixed schedule has {} betas, need {}",
                    betas.len(),
                    n_max + 1
                )));
            }
            betas.iter().map(|&b| ScheduleStep::Beta(b)).collect()
        }
        Ada => {
            return Err(Error::Config(
                "ada schedule is data-driven; use ada_halpern_run".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        cyclic_shift, goebel_map, goebel_witness_x0, l1_right_shift, rotation_contraction,
    };
    use crate::rng::SplitMix64;

    fn rho(v: f64) -> Rho {
        Rho::new(v).unwrap()
    }

    #[test]
    fn betas_one_equals_banach_picard() {
        let op = rotation_contraction(0.98, 1.0).unwrap();
        let h = halpern_run(&op, &[1.0, 0.0], &vec![1.0; 51], 50).unwrap();
        let b = banach_picard_run(&op, &[1.0, 0.0], 50).unwrap();
        for (x, y) in h.steps.iter().zip(&b.steps) {
            assert_eq!(x.residual, y.residual);
        }
    }

    #[test]
    fn betas_zero_keeps_anchor() {
        let op = rotation_contraction(0.9, 0.7).unwrap();
        let t = halpern_run(&op, &[1.0, 0.5], &[0.0; 21], 20).unwrap();
        let r0 = t.steps[0].residual;
        for s in &t.steps {
            assert_eq!(s.residual, r0);
            assert_eq!(s.dist_to_x0, 0.0);
        }
    }

    #[test]
    fn goebel_constant_residual() {
        let op = goebel_map(2.0, 101).unwrap();
        let x0 = goebel_witness_x0(101, 50).unwrap();
        let t = banach_picard_run(&op, &x0, 50).unwrap();
        for s in &t.steps {
            assert!((s.residual - 0.5).abs() <= 1e-14, "n={}: {}", s.n, s.residual);
        }
    }

    #[test]
    fn bp_geometric_decrease() {
        let op = rotation_contraction(0.98, std::f64::consts::FRAC_PI_2).unwrap();
        let t = banach_picard_run(&op, &[1.0, 0.0], 200).unwrap();
        let r0 = t.steps[0].residual;
        for s in &t.steps {
            assert!(s.residual <= 0.98f64.powi(s.n as i32) * r0 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn bp_isometry_constant_residual() {
        let op = cyclic_shift(1.0, 4, crate::operators::NormKind::LInf).unwrap();
        let t = banach_picard_run(&op, &[0.0, 1.0, 0.0, 0.0], 20).unwrap();
        let r0 = t.steps[0].residual;
        for s in &t.steps {
            assert!((s.residual - r0).abs() < 1e-12);
        }
    }

    #[test]
    fn ada_sandwich_rotation() {
        let op = rotation_contraction(0.98, std::f64::consts::FRAC_PI_2).unwrap();
        let t = ada_halpern_run(&op, &[1.0, 0.0], 2000).unwrap();
        assert_eq!(t.steps.len(), 2001);
        // run itself hard-errors on violations; re-verify the residual bound
        for s in &t.steps[1..] {
            assert!(s.residual <= s.kappa_hat * s.bound.unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn ada_switches_earlier_than_m_opt() {
        let op = rotation_contraction(0.98, std::f64::consts::FRAC_PI_4).unwrap();
        let t = ada_halpern_run(&op, &[1.0, 0.0], 2000).unwrap();
        let ada_switch = t.steps.iter().skip(1).find(|s| s.beta_used >= 1.0).map(|s| s.n);
        let rows = schedules::m_opt_schedule(rho(0.98), 2000);
        let mopt_switch = rows.iter().skip(1).find(|r| r.beta >= 1.0).map(|r| r.n);
        let (a, m) = (ada_switch.unwrap(), mopt_switch.unwrap());
        assert!(a < m, "ada switch {a} not earlier than m-opt {m}");
    }

    #[test]
    fn ada_converged_at_start() {
        let op = rotation_contraction(0.9, 0.3).unwrap();
        let t = ada_halpern_run(&op, &[0.0, 0.0], 100).unwrap();
        assert!(t.converged);
        assert!(t.steps.is_empty());
    }

    #[test]
    fn mann_halpern_bitwise_equivalence() {
        let op = cyclic_shift(1.2, 6, crate::operators::NormKind::LInf).unwrap();
        let mut rng = SplitMix64::new(9);
        let x0 = rng.vector_sym(6);
        let mut betas = vec![0.0];
        for _ in 1..=40 {
            betas.push(0.05 + 0.95 * rng.next_f64());
        }
        let h = halpern_run(&op, &x0, &betas, 40).unwrap();
        let pi = MannArray::halpern(&betas).unwrap();
        let m = mann_run(&op, &x0, &pi, 40).unwrap();
        for (a, b) in h.steps.iter().zip(&m.steps) {
            assert_eq!(a.residual, b.residual, "bitwise mismatch at n={}", a.n);
        }
    }

    #[test]
    fn mann_point_mass_is_banach_picard() {
        let op = rotation_contraction(0.95, 0.8).unwrap();
        let pi = MannArray::point_mass(30).unwrap();
        let m = mann_run(&op, &[1.0, 0.0], &pi, 30).unwrap();
        let b = banach_picard_run(&op, &[1.0, 0.0], 30).unwrap();
        for (x, y) in m.steps.iter().zip(&b.steps) {
            assert!((x.residual - y.residual).abs() < 1e-15);
        }
    }

    #[test]
    fn orbit_bound_realism() {
        let op = rotation_contraction(0.98, 1.3).unwrap();
        let t = halpern_run(
            &op,
            &[1.0, 0.0],
            &schedules::betas_of(&schedules::m_opt_schedule(rho(0.98), 300)),
            300,
        )
        .unwrap();
        let delta0 = t.delta0.unwrap();
        let last = t.steps.last().unwrap();
        assert!(last.kappa_hat <= (1.0 + 0.98) * delta0 + 1e-9);
    }

    #[test]
    fn check_bounds_m_opt_expansive() {
        let op = cyclic_shift(1.5, 10, crate::operators::NormKind::LInf).unwrap();
        let mut rng = SplitMix64::new(12);
        let x0 = rng.vector_sym(10);
        let rows = schedules::m_opt_schedule(rho(1.5), 120);
        let betas = schedules::betas_of(&rows);
        let t = halpern_run(&op, &x0, &betas, 120).unwrap();
        let kappa = observed_orbit_bound(&op, &x0, &betas, 120).unwrap();
        let report = check_bounds(&t, BoundFamily::Orbit(&rows), kappa);
        assert!(report.all_pass(), "worst: {:?}", report.worst());
    }

    #[test]
    fn check_bounds_flat_family() {
        let op = l1_right_shift(0.8, 102).unwrap();
        let mut x0 = vec![0.0; 102];
        x0[0] = 1.0;
        let sched = schedules::flat_schedule(rho(0.8), 100);
        let betas = schedules::betas_of(&sched);
        let rows = schedules::flat_general_bounds(rho(0.8), &betas, 1.0).unwrap();
        let t = halpern_run(&op, &x0, &betas, 100).unwrap();
        let report = check_bounds(&t, BoundFamily::Flat(&rows), 1.0);
        assert!(report.all_pass(), "worst: {:?}", report.worst());
    }

    #[test]
    fn flat_convergence_on_cyclic_shift() {
        let op = cyclic_shift(2.0, 5, crate::operators::NormKind::LInf).unwrap();
        let mut rng = SplitMix64::new(21);
        let x0 = rng.vector_sym(5);
        let report = flat_convergence_check(&op, &x0, 500).unwrap();
        assert!(report.all_pass());
        assert!(report.anchor_gap <= report.anchor_gap_bound * (1.0 + 1e-9));
    }

    #[test]
    fn flat_convergence_rejects_out_of_range() {
        let op = cyclic_shift(0.9, 4, crate::operators::NormKind::LInf).unwrap();
        assert!(flat_convergence_check(&op, &[1.0, 0.0, 0.0, 0.0], 10).is_err());
    }

    #[test]
    fn csv_format() {
        let op = rotation_contraction(0.98, 1.0).unwrap();
        let t = halpern_run(&op, &[1.0, 0.0], &[0.0, 0.5], 1).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,beta,residual,kappa_hat,dist_x0,dist_fp,bound"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[0], "0");
        assert!(row[6].is_empty());
    }

    #[test]
    fn domain_violation_reported() {
        let op = goebel_map(2.0, 11).unwrap();
        let bad = vec![0.5; 11];
        match halpern_run(&op, &bad, &[0.0, 0.5], 1) {
            Err(Error::DomainViolation { step: 0 }) => {}
            other => panic!("expected domain violation, got {other:?}"),
        }
    }
}
