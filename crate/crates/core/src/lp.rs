//! Linear programs in the form
//!
//! ```text
//! minimize  cᵀx   subject to  A x = b,  0 ≤ x ≤ u
//! ```
//!
//! and a dense two-phase revised simplex that solves them. Problems here are
//! small in rows (at most a few hundred behavior entries) and wide in columns
//! (one per deterministic strategy), so the basis inverse is kept explicitly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense LP, stored column-major so strategies can be appended as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    n_rows: usize,
    objective: Vec<f64>,
    upper: Vec<f64>,
    columns: Vec<f64>,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(rhs: Vec<f64>) -> Self {
        Self { n_rows: rhs.len(), objective: vec![], upper: vec![], columns: vec![], rhs }
    }

    /// Appends a variable with lower bound 0 and returns its index.
    pub fn add_column(&mut self, cost: f64, upper: f64, column: &[f64]) -> Result<usize> {
        if column.len() != self.n_rows {
            return Err(Error::ShapeMismatch(format!(
                "column has {} entries, problem has {} rows",
                column.len(),
                self.n_rows
            )));
        }
        if upper.is_nan() || upper < 0.0 {
            return Err(Error::InvalidArgument(format!("upper bound {upper} must be >= 0")));
        }
        self.objective.push(cost);
        self.upper.push(upper);
        self.columns.extend_from_slice(column);
        Ok(self.objective.len() - 1)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `max_i |(A x - b)_i|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (r, a) in ax.iter_mut().zip(self.column(j)) {
                    *r += a * xj;
                }
            }
        }
        ax.iter().zip(&self.rhs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Row multipliers `y` with reduced costs `c_j - yᵀA_j ≥ 0` at optimality.
    pub duals: Vec<f64>,
    /// Structural variables in the final basis.
    pub basis: Vec<usize>,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, m: usize) -> Self {
        Self { status, objective: f64::NAN, primal: vec![0.0; n], duals: vec![0.0; m], basis: vec![] }
    }
}

pub trait LpSolver: Sync {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

/// Two-phase revised simplex with an explicit dense basis inverse, Harris
/// ratio test, and a switch to Bland's rule while the objective stalls.
#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-7,
            max_iterations: 50_000,
            refactor_every: 50,
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        Tableau::build(problem, self).run()
    }
}

/// Primal-dual interior-point backend on top of clarabel. It is robust on
/// the highly degenerate strategy LPs, but returns a point in the relative
/// interior of the optimal face, so `basis` lists the support
/// (`x_j > support_tol`) rather than a simplex basis.
#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub tol: f64,
    pub support_tol: f64,
    pub max_iterations: u32,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self { tol: 1e-10, support_tol: 1e-9, max_iterations: 200 }
    }
}

impl LpSolver for InteriorPoint {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        use clarabel::algebra::CscMatrix;
        use clarabel::solver::{
            DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT,
        };

        let (m, n) = (problem.n_rows, problem.n_cols());
        let bounded: Vec<usize> = (0..n).filter(|&j| problem.upper[j].is_finite()).collect();
        // Rows: equalities, then -x <= 0, then x_j <= u_j for bounded j.
        let rows = m + n + bounded.len();
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = vec![];
        let mut nzval = vec![];
        let mut bound_row = m + n;
        colptr.push(0);
        for j in 0..n {
            for (i, &v) in problem.column(j).iter().enumerate() {
                if v != 0.0 {
                    rowval.push(i);
                    nzval.push(v);
                }
            }
            rowval.push(m + j);
            nzval.push(-1.0);
            if problem.upper[j].is_finite() {
                rowval.push(bound_row);
                nzval.push(1.0);
                bound_row += 1;
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(rows, n, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((n, n));
        let mut b = problem.rhs.clone();
        b.extend(std::iter::repeat_n(0.0, n));
        b.extend(bounded.iter().map(|&j| problem.upper[j]));
        let cones = [ZeroConeT(m), NonnegativeConeT(n + bounded.len())];
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_gap_abs(self.tol)
            .tol_gap_rel(self.tol)
            .tol_feas(self.tol)
            .max_iter(self.max_iterations)
            .build()
            .map_err(|e| Error::Solver(format!("{e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &problem.objective, &a, &b, &cones, settings)
            .map_err(|e| Error::Solver(e.to_string()))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => LpStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => LpStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => LpStatus::Unbounded,
            other => return Err(Error::Solver(format!("interior-point status {other:?}"))),
        };
        if status != LpStatus::Optimal {
            return Ok(LpSolution::without_point(status, n, m));
        }
        let primal: Vec<f64> = sol.x.iter().zip(&problem.upper).map(|(x, u)| x.clamp(0.0, *u)).collect();
        // Stationarity reads c + Aᵀz = (bound multipliers), so y = -z.
        let duals = sol.z[..m].iter().map(|z| -z).collect();
        let basis = (0..n).filter(|&j| primal[j] > self.support_tol).collect();
        let objective = primal.iter().zip(&problem.objective).map(|(x, c)| x * c).sum();
        Ok(LpSolution { status, objective, primal, duals, basis })
    }
}

const DEGENERATE_STALL: usize = 50;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Tableau<'a> {
    opts: &'a DenseSimplex,
    m: usize,
    /// structural columns
    n_struct: usize,
    /// structural + bound slacks; artificials follow
    n_real: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    cost: Vec<f64>,
    flipped: Vec<bool>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl<'a> Tableau<'a> {
    fn build(p: &LpProblem, opts: &'a DenseSimplex) -> Self {
        let bounded: Vec<usize> = (0..p.n_cols()).filter(|&j| p.upper[j].is_finite()).collect();
        let m = p.n_rows + bounded.len();
        let n_struct = p.n_cols();
        let n_real = n_struct + bounded.len();
        let n_total = n_real + m;
        let mut a = vec![0.0; n_total * m];
        let mut b = vec![0.0; m];
        b[..p.n_rows].copy_from_slice(&p.rhs);
        for j in 0..n_struct {
            a[j * m..j * m + p.n_rows].copy_from_slice(p.column(j));
        }
        for (k, &j) in bounded.iter().enumerate() {
            let row = p.n_rows + k;
            a[j * m + row] = 1.0;
            a[(n_struct + k) * m + row] = 1.0;
            b[row] = p.upper[j];
        }
        let mut flipped = vec![false; m];
        for i in 0..m {
            if b[i] < 0.0 {
                flipped[i] = true;
                b[i] = -b[i];
                for j in 0..n_real {
                    a[j * m + i] = -a[j * m + i];
                }
            }
        }
        for i in 0..m {
            a[(n_real + i) * m + i] = 1.0;
        }
        let mut cost = vec![0.0; n_total];
        cost[..n_struct].copy_from_slice(&p.objective);
        let basis: Vec<usize> = (n_real..n_total).collect();
        let mut in_basis = vec![false; n_total];
        basis.iter().for_each(|&j| in_basis[j] = true);
        let mut binv = vec![0.0; m * m];
        (0..m).for_each(|i| binv[i * m + i] = 1.0);
        let xb = b.clone();
        Self {
            opts,
            m,
            n_struct,
            n_real,
            a,
            b,
            cost,
            flipped,
            basis,
            in_basis,
            binv,
            xb,
            pivots_since_refactor: 0,
            iterations: 0,
        }
    }

    fn n_total(&self) -> usize {
        self.n_real + self.m
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.a[j * self.m..(j + 1) * self.m]
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_real
    }

    fn phase_cost(&self, phase: Phase, j: usize) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(j) {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if self.is_artificial(j) {
                    0.0
                } else {
                    self.cost[j]
                }
            }
        }
    }

    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let c = self.phase_cost(phase, j);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, r) in y.iter_mut().zip(row) {
                    *yk += c * r;
                }
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.col(j);
        (0..m).map(|i| self.binv[i * m..(i + 1) * m].iter().zip(col).map(|(r, a)| r * a).sum()).collect()
    }

    fn objective(&self, phase: Phase) -> f64 {
        self.basis.iter().zip(&self.xb).map(|(&j, x)| self.phase_cost(phase, j) * x).sum()
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[self.basis[k] * m + i]);
        let inv = bmat.try_inverse().ok_or_else(|| Error::Solver("basis matrix became singular".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        self.xb = (0..m).map(|i| self.binv[i * m..(i + 1) * m].iter().zip(&self.b).map(|(r, b)| r * b).sum()).collect();
        for x in &mut self.xb {
            if *x < 0.0 && *x > -self.opts.feasibility_tol {
                *x = 0.0;
            }
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64], step: f64) {
        let m = self.m;
        for (x, wi) in self.xb.iter_mut().zip(w) {
            *x -= step * wi;
        }
        self.xb[r] = step;
        let pr = w[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        row_r.iter_mut().for_each(|v| *v /= pr);
        for (i, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let wi = if i < r { w[i] } else { w[i + 1] };
            if wi != 0.0 {
                row.iter_mut().zip(row_r.iter()).for_each(|(v, rv)| *v -= wi * rv);
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.pivots_since_refactor += 1;
    }

    /// Entering variable by Dantzig pricing, or the lowest eligible index under Bland.
    fn price(&self, phase: Phase, y: &[f64], bland: bool) -> Option<usize> {
        let tol = self.opts.optimality_tol;
        let limit = if phase == Phase::One { self.n_total() } else { self.n_real };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..limit {
            if self.in_basis[j] {
                continue;
            }
            let d = self.phase_cost(phase, j) - y.iter().zip(self.col(j)).map(|(a, b)| a * b).sum::<f64>();
            if d < -tol {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Leaving row via a two-pass Harris test; `None` means unbounded.
    fn ratio_test(&self, phase: Phase, w: &[f64], bland: bool) -> Option<(usize, f64)> {
        let ptol = self.opts.pivot_tol;
        let ftol = self.opts.feasibility_tol;
        // Artificials kept in the basis for redundant rows must stay at zero.
        if phase == Phase::Two {
            if let Some(r) = (0..self.m).find(|&i| self.is_artificial(self.basis[i]) && w[i].abs() > ptol) {
                return Some((r, 0.0));
            }
        }
        let mut bound = f64::INFINITY;
        for (wi, xi) in w.iter().zip(&self.xb) {
            if *wi > ptol {
                bound = bound.min((xi.max(0.0) + ftol) / wi);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..self.m {
            if w[i] <= ptol {
                continue;
            }
            let t = self.xb[i].max(0.0) / w[i];
            if t > bound {
                continue;
            }
            let better = match pick {
                None => true,
                Some((k, _)) if bland => {
                    let tk = self.xb[k].max(0.0) / w[k];
                    t < tk || (t == tk && self.basis[i] < self.basis[k])
                }
                Some((k, _)) => w[i] > w[k],
            };
            if better {
                pick = Some((i, t));
            }
        }
        pick
    }

    fn iterate(&mut self, phase: Phase) -> Result<LpStatus> {
        let mut stall = 0usize;
        let mut last_obj = self.objective(phase);
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::Solver(format!("iteration limit {} reached", self.opts.max_iterations)));
            }
            if self.pivots_since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = stall > DEGENERATE_STALL;
            let y = self.duals(phase);
            let Some(q) = self.price(phase, &y, bland) else {
                if self.pivots_since_refactor > 0 {
                    // Confirm optimality on a fresh factorization.
                    self.refactor()?;
                    let y = self.duals(phase);
                    if self.price(phase, &y, false).is_some() {
                        continue;
                    }
                }
                return Ok(LpStatus::Optimal);
            };
            let w = self.ftran(q);
            let Some((r, step)) = self.ratio_test(phase, &w, bland) else {
                return Ok(LpStatus::Unbounded);
            };
            self.pivot(r, q, &w, step);
            self.iterations += 1;
            let obj = self.objective(phase);
            if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
    }

    /// Pivots zero-valued artificials out of the basis where some real column allows it.
    fn expel_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n_real {
                if self.in_basis[j] {
                    continue;
                }
                let v: f64 = row.iter().zip(self.col(j)).map(|(a, b)| a * b).sum();
                if v.abs() > 1e-5 && best.is_none_or(|(_, bv)| v.abs() > bv.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let w = self.ftran(j);
                self.pivot(r, j, &w, self.xb[r] / w[r]);
            }
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let n = self.n_struct;
        let n_rows_user = self.m - (self.n_real - self.n_struct);
        if self.m == 0 {
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: 0.0,
                primal: vec![0.0; n],
                duals: vec![],
                basis: vec![],
            });
        }
        self.iterate(Phase::One)?;
        let scale = 1.0 + self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let infeasibility = self.objective(Phase::One);
        if infeasibility > 1e-8 * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n, n_rows_user));
        }
        self.expel_artificials();
        self.refactor()?;
        if self.iterate(Phase::Two)? == LpStatus::Unbounded {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, n, n_rows_user));
        }
        self.refactor()?;
        let worst = self.xb.iter().fold(0.0f64, |m, &x| m.min(x));
        if worst < -1e-7 * scale {
            return Err(Error::Solver(format!("final basis is infeasible by {:e}", -worst)));
        }
        let mut primal = vec![0.0; n];
        let mut basis = vec![];
        for (&j, &x) in self.basis.iter().zip(&self.xb) {
            if j < n {
                primal[j] = x.max(0.0);
                basis.push(j);
            }
        }
        basis.sort_unstable();
        let y = self.duals(Phase::Two);
        let duals = (0..n_rows_user).map(|i| if self.flipped[i] { -y[i] } else { y[i] }).collect();
        let objective = primal.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        Ok(LpSolution { status: LpStatus::Optimal, objective, primal, duals, basis })
    }
}
