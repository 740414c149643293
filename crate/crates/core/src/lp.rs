//! Bounded-variable revised simplex over a dense explicit basis inverse.
//!
//! Every row `i` carries a logical variable `s_i` with `a_i x - s_i = 0`, so
//! row senses become bounds on `s_i`. The basis survives model edits and is
//! reused by the next [`LpModel::solve`].

use thiserror::Error;

pub const FEAS_TOL: f64 = 1e-7;
pub const OPT_TOL: f64 = 1e-7;
pub const INT_TOL: f64 = 1e-6;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("column {col}: lower bound {lower} exceeds upper bound {upper}")]
    BoundCrossing { col: usize, lower: f64, upper: f64 },
    #[error("unknown column {0}")]
    UnknownColumn(usize),
    #[error("unknown row {0}")]
    UnknownRow(usize),
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Sensitivity of the objective to each row's right-hand side: `<= 0`
    /// for `Le` rows and `>= 0` for `Ge` rows at optimality.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub row_activity: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone)]
struct Column {
    cost: f64,
    lower: f64,
    upper: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct RowDef {
    sense: Sense,
    rhs: f64,
}

impl RowDef {
    fn logical_bounds(&self) -> (f64, f64) {
        match self.sense {
            Sense::Le => (f64::NEG_INFINITY, self.rhs),
            Sense::Ge => (self.rhs, f64::INFINITY),
            Sense::Eq => (self.rhs, self.rhs),
        }
    }
}

/// Minimization LP with bounded columns and `<=`/`>=`/`=` rows.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    cols: Vec<Column>,
    rows: Vec<RowDef>,
    col_state: Vec<VarState>,
    row_state: Vec<VarState>,
    /// Basic variable per basis position: `j < n` structural, `n + i` logical
    /// of row `i` (encoded against the column count at store time).
    head: Vec<BasicVar>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasicVar {
    Col(usize),
    Row(usize),
}

fn check_finite(v: f64) -> Result<(), LpError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(LpError::NonFinite(v))
    }
}

fn nonbasic_state(lower: f64, upper: f64) -> VarState {
    if lower.is_finite() {
        VarState::AtLower
    } else if upper.is_finite() {
        VarState::AtUpper
    } else {
        VarState::Free
    }
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_column(
        &mut self,
        cost: f64,
        lower: f64,
        upper: f64,
        entries: &[(usize, f64)],
    ) -> Result<usize, LpError> {
        check_finite(cost)?;
        let col = self.cols.len();
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(LpError::BoundCrossing { col, lower, upper });
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for &(r, v) in entries {
            if r >= self.rows.len() {
                return Err(LpError::UnknownRow(r));
            }
            check_finite(v)?;
            match merged.iter_mut().find(|e| e.0 == r) {
                Some(e) => e.1 += v,
                None => merged.push((r, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.cols.push(Column {
            cost,
            lower,
            upper,
            entries: merged,
        });
        self.col_state.push(nonbasic_state(lower, upper));
        Ok(col)
    }

    pub fn add_row(&mut self, coefs: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<usize, LpError> {
        check_finite(rhs)?;
        for &(j, v) in coefs {
            if j >= self.cols.len() {
                return Err(LpError::UnknownColumn(j));
            }
            check_finite(v)?;
        }
        let row = self.rows.len();
        for &(j, v) in coefs {
            if v == 0.0 {
                continue;
            }
            let entries = &mut self.cols[j].entries;
            match entries.iter_mut().find(|e| e.0 == row) {
                Some(e) => e.1 += v,
                None => entries.push((row, v)),
            }
        }
        self.rows.push(RowDef { sense, rhs });
        self.row_state.push(VarState::Basic);
        self.head.push(BasicVar::Row(row));
        Ok(row)
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        let c = self.cols.get_mut(col).ok_or(LpError::UnknownColumn(col))?;
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(LpError::BoundCrossing { col, lower, upper });
        }
        c.lower = lower;
        c.upper = upper;
        Ok(())
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.cols[col].lower, self.cols[col].upper)
    }

    pub fn cost(&self, col: usize) -> f64 {
        self.cols[col].cost
    }

    pub fn column_entries(&self, col: usize) -> &[(usize, f64)] {
        &self.cols[col].entries
    }

    pub fn row_sense(&self, row: usize) -> Sense {
        self.rows[row].sense
    }

    pub fn row_rhs(&self, row: usize) -> f64 {
        self.rows[row].rhs
    }

    /// Forgets the stored basis; the next solve starts from all logicals.
    pub fn reset_basis(&mut self) {
        for (j, c) in self.cols.iter().enumerate() {
            self.col_state[j] = nonbasic_state(c.lower, c.upper);
        }
        self.row_state.iter_mut().for_each(|s| *s = VarState::Basic);
        self.head = (0..self.rows.len()).map(BasicVar::Row).collect();
    }

    pub fn solve_cold(&mut self) -> LpSolution {
        self.reset_basis();
        self.solve()
    }

    /// Solves from the stored basis.
    pub fn solve(&mut self) -> LpSolution {
        let mut simplex = Simplex::load(self);
        let status = simplex.run();
        let out = simplex.finish(status);
        simplex.store(self);
        out
    }
}

struct Simplex {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Sparse columns of the structurals; logicals are `-e_i`.
    entries: Vec<Vec<(usize, f64)>>,
    state: Vec<VarState>,
    head: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    iterations: usize,
}

impl Simplex {
    fn load(model: &LpModel) -> Self {
        let n = model.cols.len();
        let m = model.rows.len();
        let mut cost = Vec::with_capacity(n + m);
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut entries = Vec::with_capacity(n);
        for c in &model.cols {
            cost.push(c.cost);
            lower.push(c.lower);
            upper.push(c.upper);
            entries.push(c.entries.clone());
        }
        for r in &model.rows {
            let (l, u) = r.logical_bounds();
            cost.push(0.0);
            lower.push(l);
            upper.push(u);
        }
        let mut state: Vec<VarState> = model.col_state.iter().chain(&model.row_state).copied().collect();
        let head: Vec<usize> = model
            .head
            .iter()
            .map(|b| match *b {
                BasicVar::Col(j) => j,
                BasicVar::Row(i) => n + i,
            })
            .collect();
        let basic_count = state.iter().filter(|&&s| s == VarState::Basic).count();
        let consistent = head.len() == m && basic_count == m && head.iter().all(|&k| state[k] == VarState::Basic);
        let mut sx = Simplex {
            n,
            m,
            cost,
            lower,
            upper,
            entries,
            state: Vec::new(),
            head: Vec::new(),
            x: vec![0.0; n + m],
            binv: Vec::new(),
            iterations: 0,
        };
        if consistent {
            for (k, st) in state.iter_mut().enumerate() {
                if *st != VarState::Basic {
                    *st = sx.normalized_state(k, *st);
                }
            }
            sx.state = state;
            sx.head = head;
            if !sx.refactor() {
                sx.cold();
            }
        } else {
            sx.cold();
        }
        sx.reset_nonbasic_values();
        sx.compute_basics();
        sx
    }

    fn normalized_state(&self, k: usize, s: VarState) -> VarState {
        let (l, u) = (self.lower[k], self.upper[k]);
        match s {
            VarState::AtLower if l.is_finite() => VarState::AtLower,
            VarState::AtUpper if u.is_finite() => VarState::AtUpper,
            _ => nonbasic_state(l, u),
        }
    }

    fn cold(&mut self) {
        let (n, m) = (self.n, self.m);
        self.state = (0..n + m)
            .map(|k| {
                if k >= n {
                    VarState::Basic
                } else {
                    nonbasic_state(self.lower[k], self.upper[k])
                }
            })
            .collect();
        self.head = (n..n + m).collect();
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
    }

    fn reset_nonbasic_values(&mut self) {
        for k in 0..self.n + self.m {
            self.x[k] = match self.state[k] {
                VarState::AtLower => self.lower[k],
                VarState::AtUpper => self.upper[k],
                VarState::Free => 0.0,
                VarState::Basic => self.x[k],
            };
        }
    }

    fn for_column(&self, k: usize, mut f: impl FnMut(usize, f64)) {
        if k < self.n {
            for &(r, v) in &self.entries[k] {
                f(r, v);
            }
        } else {
            f(k - self.n, -1.0);
        }
    }

    /// Gauss-Jordan inversion of the basis matrix; false if singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (pos, &k) in self.head.iter().enumerate() {
            self.for_column(k, |r, v| b[r * m + pos] = v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = b[col * m + col].abs();
            for r in col + 1..m {
                let v = b[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < SINGULAR_TOL {
                return false;
            }
            if piv != col {
                for c in 0..m {
                    b.swap(col * m + c, piv * m + c);
                    inv.swap(col * m + c, piv * m + c);
                }
            }
            let d = b[col * m + col];
            for c in 0..m {
                b[col * m + c] /= d;
                inv[col * m + c] /= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for c in 0..m {
                    b[r * m + c] -= f * b[col * m + c];
                    inv[r * m + c] -= f * inv[col * m + c];
                }
            }
        }
        self.binv = inv;
        true
    }

    fn compute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for k in 0..self.n + m {
            if self.state[k] == VarState::Basic || self.x[k] == 0.0 {
                continue;
            }
            let xk = self.x[k];
            self.for_column(k, |r, v| rhs[r] -= v * xk);
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let val: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.head[pos]] = val;
        }
    }

    fn infeasibility(&self, k: usize) -> f64 {
        let x = self.x[k];
        if x < self.lower[k] - FEAS_TOL {
            self.lower[k] - x
        } else if x > self.upper[k] + FEAS_TOL {
            x - self.upper[k]
        } else {
            0.0
        }
    }

    fn column_dot(&self, k: usize, y: &[f64]) -> f64 {
        if k < self.n {
            self.entries[k].iter().map(|&(r, v)| v * y[r]).sum()
        } else {
            -y[k - self.n]
        }
    }

    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        self.for_column(k, |r, v| {
            for (pos, o) in out.iter_mut().enumerate() {
                *o += self.binv[pos * m + r] * v;
            }
        });
        out
    }

    fn duals(&self, basic_cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &c) in basic_cost.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for (yi, b) in y.iter_mut().zip(row) {
                *yi += c * b;
            }
        }
        y
    }

    fn run(&mut self) -> LpStatus {
        let (n, m) = (self.n, self.m);
        let max_iter = 20_000 + 100 * (n + m);
        let degenerate_limit = 10 * (n + m);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut since_refactor = 0usize;
        let mut confirmations = 0usize;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }
            if since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return LpStatus::NumericalFailure;
                }
                self.compute_basics();
                since_refactor = 0;
            }
            let phase_one = self.head.iter().any(|&k| self.infeasibility(k) > 0.0);
            let basic_cost: Vec<f64> = self
                .head
                .iter()
                .map(|&k| {
                    if phase_one {
                        if self.x[k] < self.lower[k] - FEAS_TOL {
                            -1.0
                        } else if self.x[k] > self.upper[k] + FEAS_TOL {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.cost[k]
                    }
                })
                .collect();
            let y = self.duals(&basic_cost);
            let mut entering: Option<(usize, f64)> = None;
            for k in 0..n + m {
                let st = self.state[k];
                if st == VarState::Basic || self.lower[k] == self.upper[k] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost[k] };
                let d = c - self.column_dot(k, &y);
                let up = d < -OPT_TOL && matches!(st, VarState::AtLower | VarState::Free);
                let down = d > OPT_TOL && matches!(st, VarState::AtUpper | VarState::Free);
                if !(up || down) {
                    continue;
                }
                if bland {
                    entering = Some((k, d));
                    break;
                }
                if entering.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                    entering = Some((k, d));
                }
            }
            let Some((j, dj)) = entering else {
                if since_refactor > 0 && confirmations < 3 {
                    confirmations += 1;
                    if !self.refactor() {
                        return LpStatus::NumericalFailure;
                    }
                    self.compute_basics();
                    since_refactor = 0;
                    continue;
                }
                return if phase_one {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };
            let dir = if dj < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(j);
            let flip = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, f64, f64)> = None;
            for (pos, &a) in alpha.iter().enumerate() {
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let k = self.head[pos];
                let rate = -dir * a;
                let (x, l, u) = (self.x[k], self.lower[k], self.upper[k]);
                // infeasible basics block at the bound they violate
                let target = if rate < 0.0 {
                    if x > u + FEAS_TOL {
                        Some(u)
                    } else if x >= l - FEAS_TOL && l.is_finite() {
                        Some(l)
                    } else {
                        None
                    }
                } else if x < l - FEAS_TOL {
                    Some(l)
                } else if x <= u + FEAS_TOL && u.is_finite() {
                    Some(u)
                } else {
                    None
                };
                let Some(bound) = target else { continue };
                let ratio = ((bound - x) / rate).max(0.0);
                let better = match leave {
                    None => ratio < flip,
                    Some((lp, _, lr)) => {
                        ratio < lr - 1e-12
                            || (ratio <= lr + 1e-12
                                && if bland {
                                    k < self.head[lp]
                                } else {
                                    a.abs() > alpha[lp].abs()
                                })
                    }
                };
                if better {
                    leave = Some((pos, bound, ratio));
                }
            }
            let theta = leave.map_or(flip, |l| l.2);
            if !theta.is_finite() {
                return if phase_one {
                    LpStatus::NumericalFailure
                } else {
                    LpStatus::Unbounded
                };
            }
            self.iterations += 1;
            confirmations = 0;
            if theta < 1e-12 {
                degenerate += 1;
                if degenerate > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.x[j] += dir * theta;
            for (pos, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let k = self.head[pos];
                    self.x[k] -= dir * a * theta;
                }
            }
            match leave {
                None => {
                    // bound flip
                    self.state[j] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
                }
                Some((pos, bound, _)) => {
                    let k = self.head[pos];
                    self.x[k] = bound;
                    self.state[k] = if bound == self.lower[k] {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.state[j] = VarState::Basic;
                    self.head[pos] = j;
                    let piv = alpha[pos];
                    let (lo, hi) = (pos * m, (pos + 1) * m);
                    for c in lo..hi {
                        self.binv[c] /= piv;
                    }
                    let pivot_row: Vec<f64> = self.binv[lo..hi].to_vec();
                    for (r, &a) in alpha.iter().enumerate() {
                        if r == pos || a == 0.0 {
                            continue;
                        }
                        let row = &mut self.binv[r * m..(r + 1) * m];
                        for (b, p) in row.iter_mut().zip(&pivot_row) {
                            *b -= a * p;
                        }
                    }
                    since_refactor += 1;
                }
            }
        }
    }

    fn finish(&mut self, status: LpStatus) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let basic_cost: Vec<f64> = self.head.iter().map(|&k| self.cost[k]).collect();
        let y = self.duals(&basic_cost);
        let mut reduced = vec![0.0; n];
        for (j, r) in reduced.iter_mut().enumerate() {
            if self.state[j] != VarState::Basic {
                *r = self.cost[j] - self.column_dot(j, &y);
            }
        }
        let primal: Vec<f64> = self.x[..n].to_vec();
        let objective = primal.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        LpSolution {
            status,
            objective,
            primal,
            duals: y,
            reduced_costs: reduced,
            row_activity: self.x[n..n + m].to_vec(),
            iterations: self.iterations,
        }
    }

    fn store(&self, model: &mut LpModel) {
        let n = self.n;
        model.col_state = self.state[..n].to_vec();
        model.row_state = self.state[n..].to_vec();
        model.head = self
            .head
            .iter()
            .map(|&k| if k < n { BasicVar::Col(k) } else { BasicVar::Row(k - n) })
            .collect();
    }
}
