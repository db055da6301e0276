//! Best-first branch and bound on LP relaxations solved by `microlp`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, Error as LpError, LinearExpr, OptimizationDirection, Problem, Solution};

use super::{gap_closed, SolveLimits, SolveOutcome, SolveStats, SolveStatus, TOL};
use crate::milp::{MilpModel, Sense, VarKind};
use crate::space::OptionKind;

/// Solutions kept on open nodes before falling back to re-solving from
/// bounds.
const KEEP_SOLUTIONS: usize = 256;

struct Node {
    bound: f64,
    seq: usize,
    fixes: Vec<(usize, f64)>,
    values: Vec<f64>,
    sol: Option<Solution>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    in_group: Vec<bool>,
    deadline: Option<Instant>,
    stats: SolveStats,
    incumbent: Option<(f64, Vec<f64>)>,
    vars: Vec<microlp::Variable>,
}

enum Lp {
    Solved(Solution),
    Infeasible,
    OutOfTime,
}

impl<'a> Search<'a> {
    fn problem(&self, fixes: &[(usize, f64)]) -> (Problem, Vec<microlp::Variable>) {
        let m = self.model;
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let mut lo = vec![0.0; m.variables.len()];
        let mut hi: Vec<f64> = m.variables.iter().map(|v| v.upper).collect();
        for &(v, x) in fixes {
            lo[v] = x;
            hi[v] = x;
        }
        let vars: Vec<_> = (0..m.variables.len())
            .map(|v| p.add_var(m.objective[v], (lo[v], hi[v])))
            .collect();
        for c in &m.constraints {
            if c.terms.is_empty() {
                continue;
            }
            let mut e = LinearExpr::empty();
            for &(v, k) in &c.terms {
                e.add(vars[v], k);
            }
            let op = match c.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Eq => ComparisonOp::Eq,
                Sense::Ge => ComparisonOp::Ge,
            };
            p.add_constraint(e, op, c.rhs);
        }
        if let Some(d) = self.deadline {
            p.set_time_limit(d.saturating_duration_since(Instant::now()).max(Duration::from_millis(1)));
        }
        (p, vars)
    }

    fn outcome(&mut self, r: Result<microlp::SolveOutcome, LpError>) -> Lp {
        self.stats.lp_solves += 1;
        match r {
            Ok(o) => match o.into_solution() {
                Ok(s) => Lp::Solved(s),
                Err(_) => Lp::OutOfTime,
            },
            Err(LpError::Infeasible) => Lp::Infeasible,
            Err(e) => {
                log::debug!("lp error: {e:?}");
                Lp::Infeasible
            }
        }
    }

    fn solve_fresh(&mut self, fixes: &[(usize, f64)]) -> Lp {
        let (p, _) = self.problem(fixes);
        let r = p.solve();
        self.outcome(r)
    }

    fn values(&self, s: &Solution) -> Vec<f64> {
        (0..self.model.variables.len())
            .map(|v| s.var_value_raw(self.vars[v]))
            .collect()
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Most fractional binary, group variables first; `None` when integral.
    fn branch_var(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(bool, f64, usize)> = None;
        for (v, var) in self.model.variables.iter().enumerate() {
            if var.kind != VarKind::Binary {
                continue;
            }
            let f = x[v] - x[v].floor();
            let frac = f.min(1.0 - f);
            if frac <= TOL {
                continue;
            }
            let key = (self.in_group[v], frac, v);
            let better = match best {
                None => true,
                Some((g, b, _)) => (key.0 && !g) || (key.0 == g && frac > b + 1e-12),
            };
            if better {
                best = Some(key);
            }
        }
        best.map(|(_, _, v)| v)
    }

    fn offer(&mut self, obj: f64, x: Vec<f64>) {
        if self.incumbent.as_ref().is_none_or(|(best, _)| obj < best - TOL * best.abs().max(1.0)) {
            self.incumbent = Some((obj, x));
        }
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((b, _)) => b - TOL * b.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    /// Fixes `fixes`, then dives on the largest fractional group variable.
    fn dive(&mut self, fixes: Vec<(usize, f64)>) {
        let mut fixes = fixes;
        let Lp::Solved(mut sol) = self.solve_fresh(&fixes) else { return };
        for _ in 0..4 * self.model.variables.len().max(1) {
            if self.out_of_time() {
                return;
            }
            let x = self.values(&sol);
            let Some(v) = self.pick_dive(&x) else {
                let obj = sol.objective();
                self.offer(obj, round_binaries(self.model, x));
                return;
            };
            let keep = sol.clone();
            let r = sol.fix_var(self.vars[v], 1.0);
            match self.outcome(r) {
                Lp::Solved(s) => {
                    fixes.push((v, 1.0));
                    sol = s;
                }
                Lp::OutOfTime => return,
                Lp::Infeasible => {
                    let r = keep.fix_var(self.vars[v], 0.0);
                    match self.outcome(r) {
                        Lp::Solved(s) => {
                            fixes.push((v, 0.0));
                            sol = s;
                        }
                        _ => return,
                    }
                }
            }
        }
    }

    fn pick_dive(&self, x: &[f64]) -> Option<usize> {
        let frac = |v: usize| (x[v] - x[v].round()).abs() > TOL;
        let grouped = (0..x.len())
            .filter(|&v| self.in_group[v] && frac(v))
            .max_by(|&a, &b| x[a].total_cmp(&x[b]).then(b.cmp(&a)));
        grouped.or_else(|| self.branch_var(x))
    }
}

fn round_binaries(model: &MilpModel, mut x: Vec<f64>) -> Vec<f64> {
    for (v, var) in model.variables.iter().enumerate() {
        if var.kind == VarKind::Binary {
            x[v] = x[v].round();
        }
    }
    x
}

/// Warm-start fixes on group variables, if any.
fn warm_fixes(model: &MilpModel) -> Vec<(usize, f64)> {
    model
        .groups
        .iter()
        .flatten()
        .filter_map(|&v| model.warm_start[v].map(|x| (v, x)))
        .collect()
}

/// Canceled and failing options set to one, when the model knows them.
fn slack_fixes(model: &MilpModel) -> Option<Vec<(usize, f64)>> {
    let meta = model.meta.as_ref()?;
    let mut fixes = Vec::new();
    for (_, opts) in &meta.groups {
        let slack = opts
            .iter()
            .find(|(k, _)| matches!(k, OptionKind::Canceled | OptionKind::FailingMaintenance))?;
        for &(_, v) in opts {
            fixes.push((v, if v == slack.1 { 1.0 } else { 0.0 }));
        }
    }
    Some(fixes)
}

pub fn solve_builtin(model: &MilpModel, limits: &SolveLimits) -> SolveOutcome {
    let started = Instant::now();
    let mut in_group = vec![false; model.variables.len()];
    for &v in model.groups.iter().flatten() {
        in_group[v] = true;
    }
    let mut s = Search {
        model,
        in_group,
        deadline: limits.time.map(|t| started + t),
        stats: SolveStats::default(),
        incumbent: None,
        vars: Vec::new(),
    };

    let (root_problem, vars) = s.problem(&[]);
    s.vars = vars;
    let r = root_problem.solve();
    let root = match s.outcome(r) {
        Lp::Solved(sol) => sol,
        Lp::Infeasible => return SolveOutcome::failed(SolveStatus::Infeasible, started.elapsed()),
        Lp::OutOfTime => {
            if let Some(f) = slack_fixes(model) {
                s.deadline = None;
                s.dive(f);
            }
            return finish(s, f64::NEG_INFINITY, started, true);
        }
    };
    let root_bound = root.objective();

    // Starting incumbents: the warm start, then a dive from the root.
    let warm = warm_fixes(model);
    if !warm.is_empty() {
        s.dive(warm);
    }
    let root_x = s.values(&root);
    if s.branch_var(&root_x).is_none() {
        let x = round_binaries(model, root_x.clone());
        s.offer(root.objective(), x);
    } else if s.incumbent.is_none() {
        s.dive(Vec::new());
    }
    if s.incumbent.is_none() {
        if let Some(f) = slack_fixes(model) {
            s.dive(f);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    if root_bound < s.cutoff() && s.branch_var(&root_x).is_some() {
        heap.push(Node {
            bound: root_bound,
            seq,
            fixes: Vec::new(),
            values: root_x,
            sol: Some(root),
        });
        seq += 1;
    }

    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        s.stats.nodes += 1;
        if node.bound >= s.cutoff() {
            continue;
        }
        if let Some((inc, _)) = &s.incumbent {
            if gap_closed(*inc, node.bound, limits.gap) {
                heap.push(node);
                break;
            }
        }
        if s.out_of_time() {
            heap.push(node);
            timed_out = true;
            break;
        }
        let Some(v) = s.branch_var(&node.values) else { continue };
        let base = match node.sol {
            Some(sol) => Some(sol),
            None => match s.solve_fresh(&node.fixes) {
                Lp::Solved(sol) => Some(sol),
                _ => None,
            },
        };
        let Some(base) = base else { continue };
        for val in [1.0, 0.0] {
            let r = base.clone().fix_var(s.vars[v], val);
            let sol = match s.outcome(r) {
                Lp::Solved(sol) => sol,
                Lp::Infeasible => continue,
                Lp::OutOfTime => {
                    timed_out = true;
                    continue;
                }
            };
            let obj = sol.objective();
            if obj >= s.cutoff() {
                continue;
            }
            let x = s.values(&sol);
            let mut fixes = node.fixes.clone();
            fixes.push((v, val));
            if s.branch_var(&x).is_none() {
                s.offer(obj, round_binaries(model, x));
                continue;
            }
            let keep = heap.len() < KEEP_SOLUTIONS;
            heap.push(Node {
                bound: obj,
                seq,
                fixes,
                values: x,
                sol: keep.then_some(sol),
            });
            seq += 1;
        }
        if timed_out {
            break;
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    finish(s, open_bound.max(root_bound), started, timed_out)
}

fn finish(s: Search<'_>, open_bound: f64, started: Instant, timed_out: bool) -> SolveOutcome {
    let mut stats = s.stats;
    stats.wall = started.elapsed();
    match s.incumbent {
        Some((obj, x)) => {
            let bound = open_bound.min(obj);
            let status = if !timed_out || gap_closed(obj, bound, 0.0) {
                SolveStatus::Optimal
            } else {
                SolveStatus::FeasibleTimeLimit
            };
            SolveOutcome {
                status,
                assignment: x,
                objective: obj,
                bound: if status == SolveStatus::Optimal { obj } else { bound },
                stats,
            }
        }
        None => {
            let mut out = SolveOutcome::failed(
                if timed_out { SolveStatus::Error } else { SolveStatus::Infeasible },
                stats.wall,
            );
            out.stats = stats;
            out
        }
    }
}
