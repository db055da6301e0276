use std::collections::{BTreeMap, HashSet};

use super::{Constraint, EncodingMeta, Family, MilpModel, Sense, VarKind, Variable};
use crate::model::{DisruptedState, FlightDisposition, MaintenanceDisposition, RecoverySchedule};
use crate::space::{cost_of, Choice, Entity, OptionKind, OptionRef};
use crate::tsn::{ArcKind, ArcVar, Balance, TimeSpaceNetwork};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("choice group of {0} has no options")]
    EmptyGroup(String),
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn entity_id(state: &DisruptedState, e: Entity) -> &str {
    match e {
        Entity::Flight(f) => &state.instance.flights[f].id,
        Entity::Maintenance(m) => &state.instance.maintenances[m].id,
    }
}

/// Unique, LP-safe names from ids.
struct Names(HashSet<String>);

impl Names {
    fn take(&mut self, base: String) -> String {
        let mut name = base.clone();
        let mut k = 1;
        while !self.0.insert(name.clone()) {
            name = format!("{base}_{k}");
            k += 1;
        }
        name
    }
}

fn row(name: String, family: Family, terms: BTreeMap<usize, f64>, sense: Sense, rhs: f64) -> Constraint {
    Constraint {
        name,
        family,
        terms: terms.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        sense,
        rhs,
    }
}

/// Flow balance per node, one decision per group, slot capacity with nonuse,
/// crew flight time; objective is the summed choice costs.
pub fn encode(tsn: &TimeSpaceNetwork, state: &DisruptedState) -> Result<MilpModel, EncodeError> {
    let inst = &state.instance;
    let space = &tsn.space;
    let mut names = Names(HashSet::new());
    let mut variables = Vec::new();
    let mut objective = Vec::new();

    // Option variables.
    let mut option_var: Vec<Vec<usize>> = Vec::with_capacity(space.groups.len());
    let mut meta_groups = Vec::with_capacity(space.groups.len());
    let mut group_names = Vec::with_capacity(space.groups.len());
    for g in &space.groups {
        let id = entity_id(state, g.entity);
        if g.options.is_empty() {
            return Err(EncodeError::EmptyGroup(id.to_string()));
        }
        let base = names.take(sanitize(id));
        let mut vars = Vec::with_capacity(g.options.len());
        let mut kinds = Vec::with_capacity(g.options.len());
        for (k, o) in g.options.iter().enumerate() {
            let v = variables.len();
            variables.push(Variable {
                name: format!("x_{base}_{k}"),
                kind: VarKind::Binary,
                upper: 1.0,
            });
            objective.push(cost_of(&Choice::Option(g.entity, &o.kind), state).coefficient);
            vars.push(v);
            kinds.push((o.kind, v));
        }
        option_var.push(vars);
        meta_groups.push((g.entity, kinds));
        group_names.push(base);
    }
    let var_of = |r: OptionRef| option_var[r.group][r.option];

    // Free arc variables.
    let mut arc_var: Vec<Option<usize>> = vec![None; tsn.arcs.len()];
    for (i, a) in tsn.arcs.iter().enumerate() {
        if a.var != ArcVar::Free {
            continue;
        }
        let prefix = match a.kind {
            ArcKind::Ground => "gnd",
            ArcKind::Embark => "emb",
            ArcKind::Disembark => "dis",
            ArcKind::Sink => "snk",
            other => other.as_str(),
        };
        arc_var[i] = Some(variables.len());
        variables.push(Variable {
            name: format!("{prefix}_{i}"),
            kind: VarKind::Binary,
            upper: 1.0,
        });
        objective.push(0.0);
    }

    // Slot nonuse variables.
    let mut slot_vars = Vec::new();
    for sc in &space.slot_choices {
        let v = variables.len();
        variables.push(Variable {
            name: format!("u_{}", sanitize(&inst.slots[sc.slot].id)),
            kind: VarKind::Continuous,
            upper: f64::INFINITY,
        });
        objective.push(cost_of(&Choice::Slot(sc), state).coefficient);
        slot_vars.push((sc.slot, v));
    }

    let mut constraints = Vec::new();

    // (1) Flow balance: outflow - inflow against the fixed inflow.
    let n = tsn.nodes.len();
    let mut terms: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut fixed_in = vec![0.0; n];
    for (i, a) in tsn.arcs.iter().enumerate() {
        let v = match a.var {
            ArcVar::Option(r) => var_of(r),
            ArcVar::Free => arc_var[i].unwrap(),
            ArcVar::Fixed => {
                fixed_in[a.to] += 1.0;
                continue;
            }
        };
        if a.kind == ArcKind::Sink {
            // Sink arcs end in the failure row of their maintenance.
            *terms[a.from].entry(v).or_default() += 1.0;
            continue;
        }
        *terms[a.from].entry(v).or_default() += 1.0;
        *terms[a.to].entry(v).or_default() -= 1.0;
    }
    for (i, node) in tsn.nodes.iter().enumerate() {
        if i == tsn.void || node.balance == Balance::Unconstrained {
            continue;
        }
        let t = std::mem::take(&mut terms[i]);
        if t.values().all(|&c| c == 0.0) {
            continue;
        }
        let sense = if node.balance == Balance::Strict { Sense::Eq } else { Sense::Le };
        constraints.push(row(format!("bal_{i}"), Family::FlowBalance, t, sense, fixed_in[i]));
    }
    // Failing a maintenance drains exactly one of its sink arcs.
    for (m, sinks) in tsn.sinks.iter().enumerate() {
        let g = space.maintenance_group[m];
        let Some(fail) = space.groups[g].position(&OptionKind::FailingMaintenance) else { continue };
        let mut t = BTreeMap::new();
        t.insert(option_var[g][fail], 1.0);
        for &s in sinks {
            *t.entry(arc_var[s].unwrap()).or_default() -= 1.0;
        }
        constraints.push(row(format!("bal_fail_{}", group_names[g]), Family::FlowBalance, t, Sense::Eq, 0.0));
    }

    // (2) One decision per group.
    for (g, vars) in option_var.iter().enumerate() {
        let t = vars.iter().map(|&v| (v, 1.0)).collect();
        constraints.push(row(format!("one_{}", group_names[g]), Family::UniqueDecision, t, Sense::Eq, 1.0));
    }

    // (3) Slot capacity with nonuse.
    for (sc, &(s, u)) in space.slot_choices.iter().zip(&slot_vars) {
        let mut t: BTreeMap<usize, f64> = sc.members.iter().map(|&r| (var_of(r), 1.0)).collect();
        t.insert(u, 1.0);
        let cap = state.effective_slot_capacity(s) as f64;
        constraints.push(row(
            format!("slot_{}", sanitize(&inst.slots[s].id)),
            Family::SlotCapacity,
            t,
            Sense::Eq,
            cap,
        ));
    }

    // (4) Crew flight time over the remaining limit.
    let mut duty: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); inst.crew_groups.len()];
    for r in space.option_refs() {
        let g = &space.groups[r.group];
        if let (Entity::Flight(f), OptionKind::Scheduled { crew, .. }) = (g.entity, g.options[r.option].kind) {
            duty[crew].insert(var_of(r), inst.flights[f].duration as f64);
        }
    }
    for (c, t) in duty.into_iter().enumerate() {
        let cg = &inst.crew_groups[c];
        let rhs = (cg.flight_time_limit - state.crew_flown[c]).max(0) as f64;
        constraints.push(row(format!("duty_{}", sanitize(&cg.id)), Family::CrewDuty, t, Sense::Le, rhs));
    }

    let mut model = MilpModel::new(variables, objective, constraints);
    model.meta = Some(EncodingMeta {
        groups: meta_groups,
        slot_vars,
    });
    Ok(model)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WarmStartReport {
    pub fixed_groups: usize,
    /// Entities whose disposition has no matching option.
    pub missing: Vec<String>,
}

/// Sets the decision variables matching `schedule`'s dispositions to 1 and
/// the rest of each such group to 0. Slot nonuse follows when all members
/// are known; network arcs stay open.
pub fn warm_start_from(
    model: &MilpModel,
    state: &DisruptedState,
    schedule: &RecoverySchedule,
) -> (MilpModel, WarmStartReport) {
    let mut out = model.clone();
    out.warm_start = vec![None; model.variables.len()];
    out.incumbent_bound = None;
    let mut report = WarmStartReport::default();
    let Some(meta) = &model.meta else { return (out, report) };
    let empty = schedule.flights.is_empty() && schedule.maintenances.is_empty();
    if empty {
        return (out, report);
    }
    for (entity, opts) in &meta.groups {
        let kind = match *entity {
            Entity::Flight(f) => match schedule.flights.get(f) {
                Some(&FlightDisposition::Scheduled {
                    departure,
                    aircraft,
                    crew,
                }) => Some(OptionKind::Scheduled {
                    departure,
                    aircraft,
                    crew,
                }),
                Some(FlightDisposition::Canceled) => Some(OptionKind::Canceled),
                None => None,
            },
            Entity::Maintenance(m) => match schedule.maintenances.get(m) {
                Some(&MaintenanceDisposition::Succeeded { airport, start }) => {
                    Some(OptionKind::SucceedingMaintenance { airport, start })
                }
                Some(MaintenanceDisposition::Failed) => Some(OptionKind::FailingMaintenance),
                None => None,
            },
        };
        match kind.and_then(|k| opts.iter().find(|(o, _)| *o == k)) {
            Some(&(_, hit)) => {
                for &(_, v) in opts {
                    out.warm_start[v] = Some(if v == hit { 1.0 } else { 0.0 });
                }
                report.fixed_groups += 1;
            }
            None => report.missing.push(entity_id(state, *entity).to_string()),
        }
    }
    for &(_, u) in &meta.slot_vars {
        let c = model
            .constraints
            .iter()
            .find(|c| c.family == Family::SlotCapacity && c.terms.iter().any(|&(v, _)| v == u))
            .expect("slot row");
        let mut used = 0.0;
        let mut known = true;
        for &(v, coef) in &c.terms {
            if v == u {
                continue;
            }
            match out.warm_start[v] {
                Some(x) => used += coef * x,
                None => known = false,
            }
        }
        if known {
            out.warm_start[u] = Some(c.rhs - used);
        }
    }
    if report.missing.is_empty() {
        let values: Vec<f64> = out.warm_start.iter().map(|v| v.unwrap_or(0.0)).collect();
        out.incumbent_bound = Some(out.objective_value(&values));
    }
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;
    use crate::model::*;
    use crate::space::{build_initial_space, SpaceConfig};
    use crate::tsn::build_tsn;

    fn example_model() -> (DisruptedState, TimeSpaceNetwork, MilpModel) {
        let state = apply_disruptions(&example_instance()).unwrap();
        let space = build_initial_space(&state, &SpaceConfig::default());
        let tsn = build_tsn(&space, &state).unwrap();
        let model = encode(&tsn, &state).unwrap();
        (state, tsn, model)
    }

    #[test]
    fn family_counts_match_the_network() {
        let (state, tsn, model) = example_model();
        assert_eq!(model.count(Family::UniqueDecision), tsn.space.groups.len());
        assert_eq!(model.count(Family::SlotCapacity), tsn.space.slot_choices.len());
        assert_eq!(model.count(Family::CrewDuty), state.instance.crew_groups.len());
        for c in &model.constraints {
            assert!(c.terms.iter().all(|&(v, _)| v < model.variables.len()));
            assert_eq!(Family::from_name(&c.name), Some(c.family));
        }
    }

    #[test]
    fn all_slack_assignment_is_feasible() {
        let (_, tsn, model) = example_model();
        let mut x = vec![0.0; model.variables.len()];
        let meta = model.meta.as_ref().unwrap();
        for (_, opts) in &meta.groups {
            for &(k, v) in opts {
                if matches!(k, OptionKind::Canceled | OptionKind::FailingMaintenance) {
                    x[v] = 1.0;
                }
            }
        }
        // A failed maintenance grounds its aircraft at the input node.
        for sinks in &tsn.sinks {
            let first = sinks
                .iter()
                .copied()
                .find(|&s| tsn.arcs.iter().any(|a| a.kind == ArcKind::Input && a.to == tsn.arcs[s].from))
                .unwrap();
            x[model.var_index(&format!("snk_{first}")).unwrap()] = 1.0;
        }
        for &(_, u) in &meta.slot_vars {
            let c = model.constraints.iter().find(|c| c.terms.iter().any(|&(v, _)| v == u)).unwrap();
            x[u] = c.rhs;
        }
        assert_eq!(model.violations(&x, 1e-9), Vec::<String>::new());
    }

    #[test]
    fn warm_start_from_baseline_and_empty() {
        let (state, _, model) = example_model();
        let (ws, report) = warm_start_from(&model, &state, &state.baseline);
        let meta = model.meta.as_ref().unwrap();
        // Every open flight keeps an as-planned option where legal.
        for (entity, opts) in &meta.groups {
            if let Entity::Flight(f) = entity {
                let d = state.baseline.flights[*f];
                if let Some(&(_, v)) = opts.iter().find(|(k, _)| match (k, d) {
                    (OptionKind::Scheduled { departure, .. }, FlightDisposition::Scheduled { departure: t, .. }) => *departure == t,
                    _ => false,
                }) {
                    assert_eq!(ws.warm_start[v], Some(1.0));
                }
            }
        }
        assert!(report.fixed_groups > 0);
        let (empty, r) = warm_start_from(&model, &state, &RecoverySchedule::default());
        assert!(empty.warm_start.iter().all(Option::is_none));
        assert_eq!(r.fixed_groups, 0);
    }

    #[test]
    fn slot_nonuse_arithmetic() {
        // Capacity 1 with one departure leaves no nonuse; capacity 3 with two leaves one.
        for (cap, members, nonuse) in [(1.0, 1.0, 0.0), (3.0, 2.0, 1.0)] {
            let mut vars: Vec<Variable> = (0..members as usize)
                .map(|i| Variable {
                    name: format!("x_{i}"),
                    kind: VarKind::Binary,
                    upper: 1.0,
                })
                .collect();
            vars.push(Variable {
                name: "u_s".into(),
                kind: VarKind::Continuous,
                upper: f64::INFINITY,
            });
            let u = vars.len() - 1;
            let terms: Vec<(usize, f64)> = (0..vars.len()).map(|v| (v, 1.0)).collect();
            let c = Constraint {
                name: "slot_s".into(),
                family: Family::SlotCapacity,
                terms,
                sense: Sense::Eq,
                rhs: cap,
            };
            let mut x = vec![1.0; vars.len()];
            x[u] = cap - members;
            assert_eq!(x[u], nonuse);
            assert!(c.satisfied(&x, 0.0));
        }
    }
}
