//! Normed-space abstraction and concrete test maps.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::schedules::Rho;

/// Norm used to measure residuals and distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    LInf,
    L1,
    L2,
}

impl NormKind {
    pub fn parse(s: &str) -> Result<NormKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linf" | "inf" | "sup" => Ok(NormKind::LInf),
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            other => Err(Error::Config(format!("unknown norm '{other}'"))),
        }
    }

    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormKind::LInf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.eval(&diff)
    }
}

type EvalFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type DomainFn = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;
type SampleFn = Box<dyn Fn(&mut SplitMix64) -> Vec<f64> + Send + Sync>;

/// A concrete rho-Lipschitz map on a finite-dimensional normed space.
pub struct OperatorSpec {
    pub name: String,
    pub dim: usize,
    pub rho: Rho,
    pub norm: NormKind,
    eval: EvalFn,
    pub fixed_point: Option<Vec<f64>>,
    domain_check: Option<DomainFn>,
    sample_domain: Option<SampleFn>,
}

impl OperatorSpec {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.eval)(x))
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.domain_check.as_ref().is_none_or(|f| f(x))
    }

    /// A random point in the operator's domain.
    pub fn sample_domain(&self, rng: &mut SplitMix64) -> Vec<f64> {
        match &self.sample_domain {
            Some(f) => f(rng),
            None => rng.vector_sym(self.dim),
        }
    }

    /// Statistical audit of the declared Lipschitz constant: samples `pairs`
    /// point pairs from the domain and checks the ratio. Failure is a hard
    /// error signalling a misconfigured rho.
    pub fn lipschitz_audit(&self, pairs: usize, seed: u64) -> Result<()> {
        let mut rng = SplitMix64::new(seed);
        let p = self.rho.get();
        for _ in 0..pairs {
            let x = self.sample_domain(&mut rng);
            let y = self.sample_domain(&mut rng);
            let lhs = self.norm.dist(&self.eval(&x)?, &self.eval(&y)?);
            let rhs = p * self.norm.dist(&x, &y);
            if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::LipschitzAuditFailed { lhs, rhs, rho: p });
            }
        }
        if let Some(fp) = &self.fixed_point {
            let res = self.norm.dist(&self.eval(fp)?, fp);
            if res > 1e-9 {
                return Err(Error::LipschitzAuditFailed {
                    lhs: res,
                    rhs: 0.0,
                    rho: p,
                });
            }
        }
        Ok(())
    }
}

/// Rotation by `theta` combined with a contraction, normalized so the map is
/// exactly rho-Lipschitz in the sup norm:
/// `T x = rho * Rot(theta) x / (|cos theta| + |sin theta|)`.
pub fn rotation_contraction(rho_v: f64, theta: f64) -> Result<OperatorSpec> {
    let rho = Rho::new(rho_v)?;
    if !(0.0..=1.0).contains(&rho_v) {
        return Err(Error::RhoOutOfRange {
            rho: rho_v,
            range: "(0, 1]",
        });
    }
    let (s, c) = theta.sin_cos();
    let z = c.abs() + s.abs();
    let a = [[c / z, -s / z], [s / z, c / z]];
    Ok(OperatorSpec {
        name: format!("rotation_contraction(rho={rho_v}, theta={theta})"),
        dim: 2,
        rho,
        norm: NormKind::LInf,
        eval: Box::new(move |x| {
            vec![
                rho_v * (a[0][0] * x[0] + a[0][1] * x[1]),
                rho_v * (a[1][0] * x[0] + a[1][1] * x[1]),
            ]
        }),
        fixed_point: Some(vec![0.0, 0.0]),
        domain_check: None,
        sample_domain: None,
    })
}

/// Scaled cyclic shift `T(x_1, ..., x_d) = rho (x_d, x_1, ..., x_{d-1})`;
/// exactly rho-Lipschitz in any permutation-invariant norm.
pub fn cyclic_shift(rho_v: f64, d: usize, norm: NormKind) -> Result<OperatorSpec> {
    let rho = Rho::new(rho_v)?;
    if d < 2 {
        return Err(Error::BadDimension { min: 2, got: d });
    }
    Ok(OperatorSpec {
        name: format!("cyclic_shift(rho={rho_v}, d={d})"),
        dim: d,
        rho,
        norm,
        eval: Box::new(move |x| {
            let mut out = Vec::with_capacity(d);
            out.push(rho_v * x[d - 1]);
            for i in 0..d - 1 {
                out.push(rho_v * x[i]);
            }
            out
        }),
        fixed_point: Some(vec![0.0; d]),
        domain_check: None,
        sample_domain: None,
    })
}

/// Goebel's expansive map on grid samples of continuous functions on [0,1]
/// with `0 = x(0) <= x(t) <= x(1) = 1`:
/// `Tx(t) = rho * max{x(t) - 1 + 1/rho, 0}`.
///
/// Every point of the domain has residual exactly `1 - 1/rho` in function
/// space; the domain sampler pins one grid value to the kink `1 - 1/rho` so
/// the grid sup norm reproduces the function-space value exactly.
pub fn goebel_map(rho_v: f64, grid: usize) -> Result<OperatorSpec> {
    let rho = Rho::new(rho_v)?;
    if rho_v <= 1.0 {
        return Err(Error::RhoOutOfRange {
            rho: rho_v,
            range: "(1, inf)",
        });
    }
    if grid < 2 {
        return Err(Error::BadDimension { min: 2, got: grid });
    }
    let thresh = 1.0 - 1.0 / rho_v;
    Ok(OperatorSpec {
        name: format!("goebel_map(rho={rho_v}, grid={grid})"),
        dim: grid,
        rho,
        norm: NormKind::LInf,
        eval: Box::new(move |x| x.iter().map(|&v| rho_v * (v - thresh).max(0.0)).collect()),
        fixed_point: None,
        domain_check: Some(Box::new(move |x| {
            x[0] == 0.0
                && x[grid - 1] == 1.0
                && x.iter().all(|&v| (0.0..=1.0).contains(&v))
        })),
        sample_domain: Some(Box::new(move |rng| {
            let mut x: Vec<f64> = (0..grid).map(|_| rng.next_f64()).collect();
            x[0] = 0.0;
            x[grid - 1] = 1.0;
            // pin an interior sample to the kink where the residual peaks
            x[grid / 2] = thresh;
            x
        })),
    })
}

/// Initial point for which the Banach-Picard orbit of [`goebel_map`] at rho=2
/// keeps the grid residual exactly at `1 - 1/rho = 1/2` for `n_max` steps.
///
/// Coordinate k starts at the dyadic value `1 - 2^{-(k+1)}`; the doubling map
/// sends it to the kink value 1/2 exactly at step k (all arithmetic exact in
/// binary64), so at every step one coordinate sits on the kink.
pub fn goebel_witness_x0(grid: usize, n_max: usize) -> Result<Vec<f64>> {
    // coordinate 0 is pinned to 0, the last to 1; dyadic exactness caps the
    // number of distinct witnesses at 52
    if n_max + 2 > grid || n_max > 52 {
        return Err(Error::BadDimension {
            min: n_max + 2,
            got: grid.min(52),
        });
    }
    let mut x = vec![0.0; grid];
    for k in 0..=n_max {
        x[k + 1] = 1.0 - (0.5f64).powi(k as i32 + 1);
    }
    x[grid - 1] = 1.0;
    Ok(x)
}

/// Scaled right-shift on l1, truncated to `trunc` coordinates:
/// `T(x_0, x_1, ...) = rho (0, x_0, x_1, ...)`.
pub fn l1_right_shift(rho_v: f64, trunc: usize) -> Result<OperatorSpec> {
    let rho = Rho::new(rho_v)?;
    if trunc < 2 {
        return Err(Error::BadDimension { min: 2, got: trunc });
    }
    Ok(OperatorSpec {
        name: format!("l1_right_shift(rho={rho_v}, trunc={trunc})"),
        dim: trunc,
        rho,
        norm: NormKind::L1,
        eval: Box::new(move |x| {
            let mut out = Vec::with_capacity(trunc);
            out.push(0.0);
            for i in 0..trunc - 1 {
                out.push(rho_v * x[i]);
            }
            out
        }),
        fixed_point: Some(vec![0.0; trunc]),
        domain_check: None,
        sample_domain: None,
    })
}

/// Exact operator norm of a dense matrix for the sup and l1 norms.
fn matrix_norm(a: &[Vec<f64>], norm: NormKind) -> Option<f64> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    match norm {
        NormKind::LInf => Some(
            a.iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        ),
        NormKind::L1 => Some(
            (0..cols)
                .map(|j| (0..rows).map(|i| a[i][j].abs()).sum::<f64>())
                .fold(0.0, f64::max),
        ),
        NormKind::L2 => None,
    }
}

/// Dense Gaussian elimination with partial pivoting; solves `M y = b`.
fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut y = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= m[row][k] * y[k];
        }
        y[row] = acc / m[row][row];
    }
    Some(y)
}

/// General affine map `Tx = Ax + b`. The fixed point is solved from
/// `(I - A) x = b` when the system is non-singular. For the sup and l1 norms
/// the declared rho is audited against the exact operator norm of A.
pub fn affine_operator(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    rho_v: f64,
    norm: NormKind,
) -> Result<OperatorSpec> {
    let rho = Rho::new(rho_v)?;
    let dim = b.len();
    if a.len() != dim || a.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.len(),
        });
    }
    if let Some(op_norm) = matrix_norm(&a, norm) {
        if op_norm > rho_v * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::LipschitzAuditFailed {
                lhs: op_norm,
                rhs: rho_v,
                rho: rho_v,
            });
        }
    }
    let mut i_minus_a = a.clone();
    for (i, row) in i_minus_a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = f64::from(i == j) - *v;
        }
    }
    let fixed_point = solve_dense(i_minus_a, b.clone());
    let (a_mat, b_vec) = (a, b);
    Ok(OperatorSpec {
        name: format!("affine(dim={dim})"),
        dim,
        rho,
        norm,
        eval: Box::new(move |x| {
            (0..dim)
                .map(|i| {
                    let mut acc = b_vec[i];
                    for j in 0..dim {
                        acc += a_mat[i][j] * x[j];
                    }
                    acc
                })
                .collect()
        }),
        fixed_point,
        domain_check: None,
        sample_domain: None,
    })
}

/// The cyclic map of dimension n+2 used by the sign-vector tightness instance:
/// `T(x_0, ..., x_{n+1}) = rho (x_{n+1}, x_0, ..., x_n)`.
pub fn sign_instance_operator(rho_v: f64, n: usize) -> Result<OperatorSpec> {
    cyclic_shift(rho_v, n + 2, NormKind::LInf)
}

/// Initial point attaining the affine residual bound `L_n(beta)` at step n for
/// the cyclic map of dimension n+2: signs of the second difference of the
/// tail products of beta, with `x0_0 = -1`, `x0_{n+1} = 1`, sign(0) = +1.
pub fn sign_init_x0(_rho_v: f64, betas: &[f64], n: usize) -> Vec<f64> {
    let bp = crate::affine::BetaProducts::new(betas, n);
    let mut x = vec![0.0; n + 2];
    x[0] = -1.0;
    x[n + 1] = 1.0;
    for i in 1..=n {
        let second_diff = -bp.b(i as isize + 1) + 2.0 * bp.b(i as isize) - bp.b(i as isize - 1);
        x[i] = if second_diff >= 0.0 { 1.0 } else { -1.0 };
    }
    x
}
