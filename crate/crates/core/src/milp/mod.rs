//! Solver-agnostic mixed-integer model of one time-space network.
//!
//! Variable names: `x_<entity>_<ordinal>` for the option with that ordinal in
//! its entity's choice group (entity ids with characters outside
//! `[A-Za-z0-9_]` replaced by `_`), `gnd_<arc>`, `emb_<arc>`, `dis_<arc>` and
//! `snk_<arc>` for free network arcs, `u_<slot>` for slot nonuse. Constraint
//! names carry their family: `bal_` flow balance, `one_` unique decision,
//! `slot_` slot capacity, `duty_` crew flight time.

use std::fmt;

use crate::space::{Entity, OptionKind};

mod encode;
mod lp_format;

pub use encode::{encode, warm_start_from, EncodeError, WarmStartReport};
pub use lp_format::{export_model, read_model, LpParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    FlowBalance,
    UniqueDecision,
    SlotCapacity,
    CrewDuty,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::FlowBalance,
        Family::UniqueDecision,
        Family::SlotCapacity,
        Family::CrewDuty,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::FlowBalance => "flow-balance",
            Family::UniqueDecision => "unique-decision",
            Family::SlotCapacity => "slot-capacity",
            Family::CrewDuty => "crew-duty",
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            Family::FlowBalance => "bal_",
            Family::UniqueDecision => "one_",
            Family::SlotCapacity => "slot_",
            Family::CrewDuty => "duty_",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| name.starts_with(f.prefix()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    /// `(variable, coefficient)`, variables ascending and distinct.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => a <= self.rhs + tol,
            Sense::Eq => (a - self.rhs).abs() <= tol,
            Sense::Ge => a >= self.rhs - tol,
        }
    }
}

/// What each decision variable means, kept when the model comes from an
/// encoding rather than from text.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMeta {
    /// Per choice group: entity and the option kind of each variable.
    pub groups: Vec<(Entity, Vec<(OptionKind, usize)>)>,
    /// `(slot, nonuse variable)`.
    pub slot_vars: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    /// Minimized; one coefficient per variable.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Variables of each unique-decision constraint, in constraint order.
    pub groups: Vec<Vec<usize>>,
    pub warm_start: Vec<Option<f64>>,
    /// Objective of the warm start when it fixes every group.
    pub incumbent_bound: Option<f64>,
    pub meta: Option<EncodingMeta>,
}

impl MilpModel {
    pub fn new(variables: Vec<Variable>, objective: Vec<f64>, constraints: Vec<Constraint>) -> Self {
        let n = variables.len();
        let groups = constraints
            .iter()
            .filter(|c| c.family == Family::UniqueDecision)
            .map(|c| c.terms.iter().map(|&(v, _)| v).collect())
            .collect();
        Self {
            variables,
            objective,
            constraints,
            groups,
            warm_start: vec![None; n],
            incumbent_bound: None,
            meta: None,
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Names of constraints violated beyond `tol`, plus bound or integrality
    /// violations.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out: Vec<String> = self
            .constraints
            .iter()
            .filter(|c| !c.satisfied(values, tol))
            .map(|c| c.name.clone())
            .collect();
        for (v, var) in self.variables.iter().enumerate() {
            let x = values[v];
            if x < -tol || x > var.upper + tol || (var.kind == VarKind::Binary && (x - x.round()).abs() > tol) {
                out.push(var.name.clone());
            }
        }
        out
    }

    pub fn count(&self, family: Family) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Product of group sizes, saturating.
    pub fn selections(&self) -> u128 {
        self.groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.len() as u128))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}
