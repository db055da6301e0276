//! Exhaustive reference solver: enumerates one option per group and settles
//! the network arcs of each selection with a max-flow feasibility check.

use std::collections::VecDeque;
use std::time::Instant;

use super::{SolveOutcome, SolveStats, SolveStatus, TOL};
use crate::milp::{Family, MilpModel, Sense, VarKind};

pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} selections exceed the enumeration cap of {1}")]
    TooLarge(u128, u128),
    #[error("model shape not supported by the oracle: {0}")]
    Unsupported(String),
}

/// Max flow by Dinic's algorithm on integer capacities.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn edge(&mut self, a: usize, b: usize, c: i64) -> usize {
        let id = self.to.len();
        self.head[a].push(id);
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(id + 1);
        self.to.push(a);
        self.cap.push(0);
        id
    }

    fn levels(&self, s: usize) -> Vec<i32> {
        let mut lvl = vec![-1; self.head.len()];
        lvl[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && lvl[v] < 0 {
                    lvl[v] = lvl[u] + 1;
                    q.push_back(v);
                }
            }
        }
        lvl
    }

    fn push(&mut self, u: usize, t: usize, f: i64, lvl: &[i32], it: &mut [usize]) -> i64 {
        if u == t {
            return f;
        }
        while it[u] < self.head[u].len() {
            let e = self.head[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && lvl[v] == lvl[u] + 1 {
                let d = self.push(v, t, f.min(self.cap[e]), lvl, it);
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let lvl = self.levels(s);
            if lvl[t] < 0 {
                return total;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let f = self.push(s, t, i64::MAX, &lvl, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }
}

/// Free network variable: leaves `tail` row, enters `head` row (or the
/// overflow sink when `None`).
struct FreeArc {
    var: usize,
    tail: usize,
    head: Option<usize>,
}

struct Shape {
    /// Flow rows as constraint indices.
    flow_rows: Vec<usize>,
    /// Per flow row: its option terms.
    flow_opt: Vec<Vec<(usize, f64)>>,
    free: Vec<FreeArc>,
    /// Continuous `(var, row)` absorbing the rest of an equality row.
    fillers: Vec<(usize, usize)>,
    /// Rows with nonnegative option terms that cap partial selections.
    caps: Vec<usize>,
    /// Option-only rows fully checked at leaves.
    checks: Vec<usize>,
}

fn analyse(model: &MilpModel) -> Result<Shape, OracleError> {
    let n = model.variables.len();
    let mut is_option = vec![false; n];
    for &v in model.groups.iter().flatten() {
        if is_option[v] {
            return Err(OracleError::Unsupported(format!("{} is in two groups", model.variables[v].name)));
        }
        is_option[v] = true;
    }
    let mut col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(v, k) in &c.terms {
            col[v].push((i, k));
        }
    }

    let mut row_of = vec![usize::MAX; model.constraints.len()];
    let mut flow_rows = Vec::new();
    for (i, c) in model.constraints.iter().enumerate() {
        if c.family == Family::FlowBalance {
            if c.sense == Sense::Ge {
                return Err(OracleError::Unsupported(format!("{} is a >= flow row", c.name)));
            }
            row_of[i] = flow_rows.len();
            flow_rows.push(i);
        }
    }

    let mut free = Vec::new();
    let mut fillers = Vec::new();
    let mut filled = vec![false; model.constraints.len()];
    for v in (0..n).filter(|&v| !is_option[v]) {
        let var = &model.variables[v];
        let name = &var.name;
        match var.kind {
            VarKind::Binary => {
                if model.objective[v] != 0.0 {
                    return Err(OracleError::Unsupported(format!("{name} has a cost")));
                }
                let mut tail = None;
                let mut head = None;
                for &(i, k) in &col[v] {
                    let r = row_of[i];
                    if r == usize::MAX {
                        return Err(OracleError::Unsupported(format!("{name} outside flow rows")));
                    }
                    match k {
                        k if k == 1.0 && tail.is_none() => tail = Some(r),
                        k if k == -1.0 && head.is_none() => head = Some(r),
                        _ => return Err(OracleError::Unsupported(format!("{name} is not a network arc"))),
                    }
                }
                let Some(tail) = tail else {
                    return Err(OracleError::Unsupported(format!("{name} has no tail")));
                };
                free.push(FreeArc { var: v, tail, head });
            }
            VarKind::Continuous => match col[v].as_slice() {
                &[(i, k)] if k == 1.0 && model.constraints[i].sense == Sense::Eq && !filled[i] => {
                    filled[i] = true;
                    fillers.push((v, i));
                }
                _ => return Err(OracleError::Unsupported(format!("{name} is not a slack"))),
            },
        }
    }

    let mut flow_opt = vec![Vec::new(); flow_rows.len()];
    let mut caps = Vec::new();
    let mut checks = Vec::new();
    for (i, c) in model.constraints.iter().enumerate() {
        if c.family == Family::FlowBalance {
            flow_opt[row_of[i]] = c.terms.iter().copied().filter(|&(v, _)| is_option[v]).collect();
            continue;
        }
        if c.family == Family::UniqueDecision {
            continue;
        }
        let nonneg = c.terms.iter().all(|&(v, k)| !is_option[v] || k >= 0.0);
        if nonneg && (c.sense == Sense::Le || filled[i]) {
            caps.push(i);
        }
        if !filled[i] {
            checks.push(i);
        }
    }
    Ok(Shape {
        flow_rows,
        flow_opt,
        free,
        fillers,
        caps,
        checks,
    })
}

struct Enum<'a> {
    model: &'a MilpModel,
    shape: Shape,
    /// Per group: its options sorted as listed.
    x: Vec<f64>,
    /// Partial option activity per constraint.
    act: Vec<f64>,
    suffix_min: Vec<f64>,
    col: Vec<Vec<(usize, f64)>>,
    best: Option<(f64, Vec<f64>)>,
    leaves: usize,
}

impl Enum<'_> {
    fn dfs(&mut self, g: usize, cost: f64) {
        let model = self.model;
        if let Some((b, _)) = &self.best {
            if cost + self.suffix_min[g] >= b - TOL * b.abs().max(1.0) {
                return;
            }
        }
        if g == model.groups.len() {
            self.leaf(cost);
            return;
        }
        for &v in &model.groups[g] {
            self.x[v] = 1.0;
            for &(i, k) in &self.col[v] {
                self.act[i] += k;
            }
            let ok = self.shape.caps.iter().all(|&i| self.act[i] <= model.constraints[i].rhs + TOL);
            if ok {
                self.dfs(g + 1, cost + model.objective[v]);
            }
            for &(i, k) in &self.col[v] {
                self.act[i] -= k;
            }
            self.x[v] = 0.0;
        }
    }

    fn leaf(&mut self, cost: f64) {
        self.leaves += 1;
        let model = self.model;
        for &i in &self.shape.checks {
            if !model.constraints[i].satisfied(&self.x, TOL) {
                return;
            }
        }
        let mut x = self.x.clone();
        let mut cost = cost;
        for &(u, i) in &self.shape.fillers {
            let val = model.constraints[i].rhs - self.act[i];
            if val < -TOL || val > model.variables[u].upper + TOL {
                return;
            }
            let val = val.max(0.0);
            x[u] = val;
            cost += model.objective[u] * val;
        }
        if let Some((b, _)) = &self.best {
            if cost >= b - TOL * b.abs().max(1.0) {
                return;
            }
        }
        if !self.route(&mut x) {
            return;
        }
        self.best = Some((cost, x));
    }

    /// Sets the free arcs of `x` when the option flows can be balanced.
    fn route(&self, x: &mut [f64]) -> bool {
        let sh = &self.shape;
        let rows = sh.flow_rows.len();
        let (s, t, k) = (rows, rows + 1, rows + 2);
        let mut g = Dinic::new(rows + 3);
        let mut supply = 0i64;
        let mut net = 0i64;
        for (r, &ci) in sh.flow_rows.iter().enumerate() {
            let c = &self.model.constraints[ci];
            let opt: f64 = sh.flow_opt[r].iter().map(|&(v, k)| k * x[v]).sum();
            let e = (c.rhs - opt).round() as i64;
            net += e;
            if e > 0 {
                supply += e;
                g.edge(s, r, e);
            } else if e < 0 {
                g.edge(r, k, -e);
            }
            if c.sense == Sense::Le {
                g.edge(r, t, i64::MAX / 4);
            }
        }
        if net < 0 {
            return false;
        }
        g.edge(t, k, net);
        let ids: Vec<usize> = sh
            .free
            .iter()
            .map(|a| g.edge(a.tail, a.head.unwrap_or(t), 1))
            .collect();
        if g.max_flow(s, k) != supply {
            return false;
        }
        for (a, id) in sh.free.iter().zip(ids) {
            x[a.var] = if g.cap[id] == 0 { 1.0 } else { 0.0 };
        }
        true
    }
}

/// Optimal solution by enumeration, or an error when the model is too big
/// or not of the recovery shape. Ties keep the first selection found in
/// group order.
pub fn enumerate_oracle(model: &MilpModel, cap: u128) -> Result<SolveOutcome, OracleError> {
    let started = Instant::now();
    let size = model.selections();
    if size > cap {
        return Err(OracleError::TooLarge(size, cap));
    }
    let shape = analyse(model)?;
    let n = model.variables.len();
    let mut col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(v, k) in &c.terms {
            col[v].push((i, k));
        }
    }
    let mut suffix_min = vec![0.0; model.groups.len() + 1];
    for g in (0..model.groups.len()).rev() {
        let m = model.groups[g]
            .iter()
            .map(|&v| model.objective[v])
            .fold(f64::INFINITY, f64::min);
        suffix_min[g] = suffix_min[g + 1] + m;
    }
    // A negative slack cost would make the option bound unsafe.
    if shape.fillers.iter().any(|&(u, _)| model.objective[u] < 0.0) {
        suffix_min.iter_mut().for_each(|m| *m = f64::NEG_INFINITY);
    }
    let mut e = Enum {
        model,
        shape,
        x: vec![0.0; n],
        act: vec![0.0; model.constraints.len()],
        suffix_min,
        col,
        best: None,
        leaves: 0,
    };
    e.dfs(0, 0.0);
    let stats = SolveStats {
        nodes: e.leaves,
        lp_solves: 0,
        wall: started.elapsed(),
    };
    Ok(match e.best {
        Some((obj, x)) => SolveOutcome {
            status: SolveStatus::Optimal,
            assignment: x,
            objective: obj,
            bound: obj,
            stats,
        },
        None => {
            let mut out = SolveOutcome::failed(SolveStatus::Infeasible, stats.wall);
            out.stats = stats;
            out
        }
    })
}
