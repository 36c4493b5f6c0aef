//! Nested optimal-transport bounds for general Mann iterations and the
//! adversarial instance certifying their tightness.
//!
//! Distances between averaging distributions are defined recursively: the
//! cost of coupling rows m and n is an exact transportation problem whose
//! ground cost is the (clamped) distance table of earlier rows. Dual
//! potentials of each cell are single Kantorovich potentials u with
//! |u_i - u_j| <= cost and u tight on the support of the optimal plan; the
//! adversarial instance places these potentials as coordinates of points in a
//! sup-norm cube so that every bound is attained with equality.

use crate::engine::MannArray;
use crate::error::{Error, Result};
use crate::schedules::Rho;

/// Distance and clamped-distance tables plus residual bounds.
/// Index 0 of the matrices corresponds to row -1 of the iteration.
#[derive(Debug, Clone)]
pub struct BoundTable {
    pub rho: f64,
    pub n: usize,
    /// d[(m+1)][(n+1)] for -1 <= m, n <= N
    pub d: Vec<Vec<f64>>,
    /// c = min{1, rho d}, same indexing
    pub c: Vec<Vec<f64>>,
    /// R[n] = sum_i pi^n_i c_{i-1,n}
    pub r: Vec<f64>,
    /// solutions[m][n] for 0 <= m <= n <= N
    pub solutions: Vec<Vec<Option<TransportSolution>>>,
    pub pi: Vec<Vec<f64>>,
}

impl BoundTable {
    pub fn dist(&self, m: isize, n: isize) -> f64 {
        self.d[(m + 1) as usize][(n + 1) as usize]
    }

    pub fn clamped(&self, m: isize, n: isize) -> f64 {
        self.c[(m + 1) as usize][(n + 1) as usize]
    }
}

/// Exact solution of one transportation cell.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// plan[i][j]: mass moved from atom i of the first marginal to atom j of
    /// the second
    pub plan: Vec<Vec<f64>>,
    /// single Kantorovich potential, one entry per atom index
    pub duals: Vec<f64>,
    pub value: f64,
}

/// Transportation simplex on dense marginals (zero atoms are dropped before
/// solving). Returns the optimal plan over the full index range.
fn transportation_simplex(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let sum_a: f64 = a.iter().sum();
    let sum_b: f64 = b.iter().sum();
    if (sum_a - sum_b).abs() > 1e-12 {
        return Err(Error::InfeasibleMarginals((sum_a - sum_b).abs()));
    }
    let rows: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 1e-15).collect();
    let cols: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 1e-15).collect();
    let mut full = vec![vec![0.0; b.len()]; a.len()];
    if rows.is_empty() || cols.is_empty() {
        return Ok(full);
    }
    let p = rows.len();
    let q = cols.len();
    let c: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost[i][j]).collect())
        .collect();
    let mut ra: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
    let mut rb: Vec<f64> = cols.iter().map(|&j| b[j]).collect();

    // northwest-corner initial basis: exactly p+q-1 basic cells
    let mut z = vec![vec![0.0; q]; p];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(p + q - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let t = ra[i].min(rb[j]);
        z[i][j] = t;
        basis.push((i, j));
        ra[i] -= t;
        rb[j] -= t;
        if i == p - 1 && j == q - 1 {
            break;
        }
        if ra[i] <= rb[j] && i < p - 1 {
            i += 1;
        } else if j < q - 1 {
            j += 1;
        } else {
            i += 1;
        }
    }

    let mut in_basis = vec![vec![false; q]; p];
    for &(bi, bj) in &basis {
        in_basis[bi][bj] = true;
    }

    for _pivot in 0..20_000 {
        // potentials from the basis tree: alpha_i + beta_j = c_ij on basis
        let mut alpha = vec![f64::NAN; p];
        let mut beta = vec![f64::NAN; q];
        alpha[0] = 0.0;
        let mut changed = true;
        while changed {
            changed = false;
            for &(bi, bj) in &basis {
                if alpha[bi].is_nan() && !beta[bj].is_nan() {
                    alpha[bi] = c[bi][bj] - beta[bj];
                    changed = true;
                } else if beta[bj].is_nan() && !alpha[bi].is_nan() {
                    beta[bj] = c[bi][bj] - alpha[bi];
                    changed = true;
                }
            }
        }
        if alpha.iter().any(|v| v.is_nan()) || beta.iter().any(|v| v.is_nan()) {
            return Err(Error::SimplexStalled);
        }

        // Bland's rule: first cell (lexicographic) with negative reduced cost
        let mut entering = None;
        'outer: for ei in 0..p {
            for ej in 0..q {
                if !in_basis[ei][ej] && c[ei][ej] - alpha[ei] - beta[ej] < -1e-12 {
                    entering = Some((ei, ej));
                    break 'outer;
                }
            }
        }
        let (ei, ej) = match entering {
            None => break,
            Some(e) => e,
        };

        // unique alternating cycle in basis + entering cell: depth-first
        // search over the bipartite basis graph from row ei to column ej
        let cycle = find_cycle(&basis, p, q, ei, ej).ok_or(Error::SimplexStalled)?;
        // cycle alternates (row,col) cells starting with the entering cell at
        // a plus position; minus positions are the odd ones
        let mut theta = f64::INFINITY;
        let mut leave = None;
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            if k % 2 == 1 && z[ci][cj] <= theta {
                theta = z[ci][cj];
                leave = Some((ci, cj));
            }
        }
        let (li, lj) = leave.ok_or(Error::SimplexStalled)?;
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                z[ci][cj] += theta;
            } else {
                z[ci][cj] -= theta;
            }
        }
        z[li][lj] = 0.0;
        in_basis[li][lj] = false;
        in_basis[ei][ej] = true;
        basis.retain(|&cell| cell != (li, lj));
        basis.push((ei, ej));
    }

    for (ri, &i) in rows.iter().enumerate() {
        for (rj, &j) in cols.iter().enumerate() {
            if z[ri][rj] > 0.0 {
                full[i][j] = z[ri][rj];
            }
        }
    }
    Ok(full)
}

/// The unique cycle formed by the basis spanning tree plus the entering cell
/// (ei, ej), returned as a cell sequence starting at (ei, ej) and alternating
/// row-shared / column-shared adjacencies.
fn find_cycle(
    basis: &[(usize, usize)],
    p: usize,
    q: usize,
    ei: usize,
    ej: usize,
) -> Option<Vec<(usize, usize)>> {
    // nodes: rows 0..p, cols p..p+q; edges: basic cells
    let mut adj: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); p + q];
    for &(i, j) in basis {
        adj[i].push((p + j, (i, j)));
        adj[p + j].push((i, (i, j)));
    }
    // path from column node ej to row node ei through the tree
    let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; p + q];
    let mut visited = vec![false; p + q];
    let start = p + ej;
    let goal = ei;
    let mut stack = vec![start];
    visited[start] = true;
    while let Some(u) = stack.pop() {
        if u == goal {
            break;
        }
        for &(v, cell) in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                parent[v] = Some((u, cell));
                stack.push(v);
            }
        }
    }
    if !visited[goal] {
        return None;
    }
    let mut cells = vec![(ei, ej)];
    let mut node = goal;
    while node != start {
        let (prev, cell) = parent[node]?;
        cells.push(cell);
        node = prev;
    }
    Some(cells)
}

/// Single Kantorovich potential for an optimal plan: u_i - u_j <= cost_ij for
/// all pairs, with equality on the support of the plan (complementary
/// slackness). Built by Bellman-Ford over the constraint graph; a negative
/// cycle would contradict optimality of the plan.
fn potentials_from_plan(plan: &[Vec<f64>], cost: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = cost.len();
    let mut u = vec![0.0; n];
    for _ in 0..=n {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                // feasibility u_i - u_j <= cost_ij  <=>  u_i <= u_j + cost_ij
                if u[i] > u[j] + cost[i][j] + 1e-15 {
                    u[i] = u[j] + cost[i][j];
                    changed = true;
                }
                // support tightness u_i - u_j >= cost_ij
                if plan[i][j] > 1e-14 && u[j] > u[i] - cost[i][j] + 1e-15 {
                    u[j] = u[i] - cost[i][j];
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(u);
        }
    }
    Err(Error::DualInfeasible {
        m: -1,
        n: -1,
        slack: f64::NAN,
    })
}

/// Exact optimal transport between two atomic distributions on the same index
/// set, with diagonal pre-fixing: mass staying in place is coupled first at
/// zero cost, then the residual problem is solved by the transportation
/// simplex. Dual potentials are normalized so min u = 0.
pub fn solve_transport(pi_m: &[f64], pi_n: &[f64], cost: &[Vec<f64>]) -> Result<TransportSolution> {
    let size = pi_m.len().max(pi_n.len());
    let mut a = vec![0.0; size];
    let mut b = vec![0.0; size];
    a[..pi_m.len()].copy_from_slice(pi_m);
    b[..pi_n.len()].copy_from_slice(pi_n);
    let sum_a: f64 = a.iter().sum();
    let sum_b: f64 = b.iter().sum();
    if (sum_a - sum_b).abs() > 1e-12 {
        return Err(Error::InfeasibleMarginals((sum_a - sum_b).abs()));
    }
    // diagonal pre-fixing
    let mut plan = vec![vec![0.0; size]; size];
    let mut ra = a.clone();
    let mut rb = b.clone();
    for i in 0..size {
        let t = ra[i].min(rb[i]);
        if t > 0.0 {
            plan[i][i] = t;
            ra[i] -= t;
            rb[i] -= t;
        }
    }
    let residual = transportation_simplex(&ra, &rb, cost)?;
    for i in 0..size {
        for j in 0..size {
            plan[i][j] += residual[i][j];
        }
    }
    let value: f64 = (0..size)
        .map(|i| (0..size).map(|j| plan[i][j] * cost[i][j]).sum::<f64>())
        .sum();
    let mut duals = potentials_from_plan(&plan, cost)?;
    let min_u = duals.iter().cloned().fold(f64::INFINITY, f64::min);
    for u in &mut duals {
        *u -= min_u;
    }
    // duality gap audit
    let dual_value: f64 = (0..size).map(|i| duals[i] * (a[i] - b[i])).sum();
    if (value - dual_value).abs() > 1e-10 {
        return Err(Error::DualInfeasible {
            m: -1,
            n: -1,
            slack: (value - dual_value).abs(),
        });
    }
    Ok(TransportSolution { plan, duals, value })
}

/// Build the full nested bound table for a Mann array through row N.
pub fn ot_bounds(rho: Rho, pi: &MannArray, n_cap: usize) -> Result<BoundTable> {
    let p = rho.get();
    if pi.len() < n_cap + 1 {
        return Err(Error::InvalidMannArray(format!(
            "array has {} rows, need {}",
            pi.len(),
            n_cap + 1
        )));
    }
    let size = n_cap + 2; // index shift: slot k holds row k-1
    let mut d = vec![vec![0.0; size]; size];
    let mut c = vec![vec![0.0; size]; size];
    for k in 1..size {
        d[0][k] = 1.0 / p;
        d[k][0] = 1.0 / p;
        c[0][k] = 1.0;
        c[k][0] = 1.0;
    }
    let mut solutions: Vec<Vec<Option<TransportSolution>>> =
        vec![(0..=n_cap).map(|_| None).collect(); n_cap + 1];
    // cost for cell (m,n): cost[i][j] = c_{i-1,j-1}, available because all
    // earlier rows are complete when we reach (m,n) in increasing n
    for n in 0..=n_cap {
        for m in 0..=n {
            if m == n {
                // identical marginals: zero distance, identity plan
                let atoms = n + 1;
                let row = pi.row(n);
                let mut plan = vec![vec![0.0; atoms]; atoms];
                for (i, &w) in row.iter().enumerate() {
                    plan[i][i] = w;
                }
                solutions[m][n] = Some(TransportSolution {
                    plan,
                    duals: vec![0.0; atoms],
                    value: 0.0,
                });
                continue;
            }
            let atoms = n + 1;
            let mut pm = vec![0.0; atoms];
            pm[..m + 1].copy_from_slice(pi.row(m));
            let pn = pi.row(n).to_vec();
            let cost: Vec<Vec<f64>> = (0..atoms)
                .map(|i| (0..atoms).map(|j| c[i][j]).collect())
                .collect();
            let sol = solve_transport(&pm, &pn, &cost)?;
            d[m + 1][n + 1] = sol.value;
            d[n + 1][m + 1] = sol.value;
            let cl = (p * sol.value).min(1.0);
            c[m + 1][n + 1] = cl;
            c[n + 1][m + 1] = cl;
            solutions[m][n] = Some(sol);
        }
    }
    let mut r = vec![0.0; n_cap + 1];
    for n in 0..=n_cap {
        r[n] = pi
            .row(n)
            .iter()
            .enumerate()
            .map(|(i, &w)| w * c[i][n + 1])
            .sum();
    }
    let pi_rows: Vec<Vec<f64>> = (0..=n_cap).map(|k| pi.row(k).to_vec()).collect();
    let table = BoundTable {
        rho: p,
        n: n_cap,
        d,
        c,
        r,
        solutions,
        pi: pi_rows,
    };
    validate_table(&table)?;
    Ok(table)
}

/// Metric axioms and clamp consistency for a computed table.
fn validate_table(t: &BoundTable) -> Result<()> {
    let size = t.n + 2;
    for i in 0..size {
        if t.d[i][i].abs() > 1e-12 {
            return Err(Error::DualInfeasible {
                m: i as isize - 1,
                n: i as isize - 1,
                slack: t.d[i][i],
            });
        }
        for j in 0..size {
            if (t.d[i][j] - t.d[j][i]).abs() > 1e-12 {
                return Err(Error::DualInfeasible {
                    m: i as isize - 1,
                    n: j as isize - 1,
                    slack: (t.d[i][j] - t.d[j][i]).abs(),
                });
            }
            let want = (t.rho * t.d[i][j]).min(1.0);
            if (t.c[i][j] - want).abs() > 1e-12 {
                return Err(Error::DualInfeasible {
                    m: i as isize - 1,
                    n: j as isize - 1,
                    slack: (t.c[i][j] - want).abs(),
                });
            }
            for k in 0..size {
                if t.d[i][j] > t.d[i][k] + t.d[k][j] + 1e-9 {
                    return Err(Error::DualInfeasible {
                        m: i as isize - 1,
                        n: j as isize - 1,
                        slack: t.d[i][j] - t.d[i][k] - t.d[k][j],
                    });
                }
                if t.c[i][j] > t.c[i][k] + t.c[k][j] + 1e-9 {
                    return Err(Error::DualInfeasible {
                        m: i as isize - 1,
                        n: j as isize - 1,
                        slack: t.c[i][j] - t.c[i][k] - t.c[k][j],
                    });
                }
            }
        }
    }
    Ok(())
}

/// Worst-case instance in the sup-norm cube over the pair set
/// Q_N = {(m,n): -1 <= m <= n <= N}. The orbit points y^0..y^{N+1} realize
/// every bound of the table with equality; the implied map is T x^k = y^{k+1}
/// on the orbit only.
#[derive(Debug, Clone)]
pub struct AdversarialInstance {
    pub index_set: Vec<(isize, isize)>,
    /// y[k] for k = 0..=N+1, each of length |Q_N|, entries scaled by kappa
    pub y: Vec<Vec<f64>>,
    /// x[k] = sum_i pi^k_i y^i for k = 0..=N
    pub x: Vec<Vec<f64>>,
    pub rho: f64,
    pub kappa: f64,
}

/// Construct the adversarial instance from a completed bound table.
pub fn build_adversarial_instance(table: &BoundTable, kappa: f64) -> Result<AdversarialInstance> {
    let n_cap = table.n;
    let mut index_set: Vec<(isize, isize)> = Vec::new();
    for m in -1..=(n_cap as isize) {
        for n in m..=(n_cap as isize) {
            index_set.push((m, n));
        }
    }
    let coords = index_set.len();
    let points = n_cap + 2; // y^0 .. y^{N+1}
    let mut y = vec![vec![0.0; coords]; points];
    for (ci, &(m, n)) in index_set.iter().enumerate() {
        if m == -1 {
            // first-row coordinates: y^k = c_{k-1, n}
            for (k, yk) in y.iter_mut().enumerate() {
                yk[ci] = table.clamped(k as isize - 1, n);
            }
        } else {
            let sol = table.solutions[m as usize][n as usize]
                .as_ref()
                .ok_or(Error::DualInfeasible { m, n, slack: 0.0 })?;
            // duals cover atoms 0..=n; extend to all orbit indices by the
            // smallest Lipschitz extension, then shift so the minimum is 0
            let mut u = vec![0.0; points];
            u[..sol.duals.len()].copy_from_slice(&sol.duals);
            for k in (n as usize + 1)..points {
                let mut best = f64::INFINITY;
                for (i, &ui) in sol.duals.iter().enumerate() {
                    best = best.min(ui + table.clamped(i as isize - 1, k as isize - 1));
                }
                u[k] = best;
            }
            let min_u = u.iter().cloned().fold(f64::INFINITY, f64::min);
            for (k, yk) in y.iter_mut().enumerate() {
                yk[ci] = u[k] - min_u;
            }
        }
    }
    for yk in &mut y {
        for v in yk.iter_mut() {
            *v *= kappa;
        }
    }
    let mut x = Vec::with_capacity(n_cap + 1);
    for k in 0..=n_cap {
        let row = &table.pi[k];
        let mut xk = vec![0.0; coords];
        for (i, &w) in row.iter().enumerate() {
            if w != 0.0 {
                for (ci, v) in xk.iter_mut().enumerate() {
                    *v += w * y[i][ci];
                }
            }
        }
        x.push(xk);
    }
    Ok(AdversarialInstance {
        index_set,
        y,
        x,
        rho: table.rho,
        kappa,
    })
}

/// One checked equality or inequality of the tightness certificate.
#[derive(Debug, Clone)]
pub struct TightnessCheck {
    pub what: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Report of [`verify_tightness`].
#[derive(Debug, Clone)]
pub struct TightnessReport {
    pub checks: Vec<TightnessCheck>,
}

impl TightnessReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&TightnessCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Verify that the adversarial instance attains the table's bounds:
/// iterate distances equal kappa d_{m,n}, residuals equal kappa R_n, image
/// distances equal kappa c_{m,n} (hence the orbit map is rho-Lipschitz), and
/// the orbit stays within kappa of the anchor image.
pub fn verify_tightness(inst: &AdversarialInstance, table: &BoundTable) -> TightnessReport {
    let tol = 1e-9;
    let n_cap = table.n;
    let kappa = inst.kappa;
    let mut checks = Vec::new();
    for m in 0..=n_cap {
        for n in m..=n_cap {
            let lhs = sup_dist(&inst.x[m], &inst.x[n]);
            let rhs = kappa * table.dist(m as isize, n as isize);
            checks.push(TightnessCheck {
                what: format!("||x^{m} - x^{n}|| = kappa d_{{{m},{n}}}"),
                lhs,
                rhs,
                pass: (lhs - rhs).abs() <= tol,
            });
        }
    }
    for n in 0..=n_cap {
        let lhs = sup_dist(&inst.x[n], &inst.y[n + 1]);
        let rhs = kappa * table.r[n];
        checks.push(TightnessCheck {
            what: format!("||x^{n} - Tx^{n}|| = kappa R_{n}"),
            lhs,
            rhs,
            pass: (lhs - rhs).abs() <= tol,
        });
    }
    for m in -1..=(n_cap as isize) {
        for n in m..=(n_cap as isize) {
            let ym = &inst.y[(m + 1) as usize];
            let yn = &inst.y[(n + 1) as usize];
            let lhs = sup_dist(ym, yn);
            let rhs = kappa * table.clamped(m, n);
            checks.push(TightnessCheck {
                what: format!("||y^{} - y^{}|| = kappa c_{{{m},{n}}}", m + 1, n + 1),
                lhs,
                rhs,
                pass: (lhs - rhs).abs() <= tol,
            });
            if m >= 0 {
                // orbit Lipschitz continuity against the realized distances
                let xd = sup_dist(&inst.x[m as usize], &inst.x[n as usize]);
                checks.push(TightnessCheck {
                    what: format!("||Tx^{m} - Tx^{n}|| <= rho ||x^{m} - x^{n}||"),
                    lhs,
                    rhs: inst.rho * xd,
                    pass: lhs <= inst.rho * xd * (1.0 + tol) + 1e-12,
                });
            }
        }
    }
    for n in 0..=n_cap {
        let lhs = sup_dist(&inst.y[0], &inst.y[n + 1]);
        checks.push(TightnessCheck {
            what: format!("||y^0 - y^{}|| = kappa", n + 1),
            lhs,
            rhs: kappa,
            pass: (lhs - kappa).abs() <= tol,
        });
    }
    TightnessReport { checks }
}

/// Random beta sequence with strictly positive entries after index 0.
pub fn random_betas(rng: &mut crate::rng::SplitMix64, n_max: usize) -> Vec<f64> {
    let mut betas = vec![0.0];
    for _ in 1..=n_max {
        betas.push(0.05 + 0.95 * rng.next_f64());
    }
    betas
}
