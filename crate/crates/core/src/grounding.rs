//! Instantiation of action schemas over problem objects.
//!
//! Every ground annotation instance is mapped to a realization variable by
//! its canonical key `schema/kind/literal/class`. Instances with equal keys
//! share the variable. Variables are numbered in key order and fluents in
//! proposition order, so grounding is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::BigRational;

use crate::model::{
    validate_domain, ActionSchema, AnnotationKind, Atom, Diagnostic, IncompleteDomain, Plan, ProblemSpec, Proposition,
    Scope, Severity,
};
use crate::semantics::{EffectiveAction, State};

pub type FluentId = usize;
pub type VarId = usize;
pub type ActionId = usize;

/// Which ground instances share a realization variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BindingClass {
    Schema,
    /// Printed constraint text of a `:when` annotation.
    When(String),
    /// `(parameter, object)` pairs for the `:depends` parameters, in the
    /// order the annotation lists them.
    Depends(Vec<(String, String)>),
}

impl fmt::Display for BindingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingClass::Schema => Ok(()),
            BindingClass::When(c) => write!(f, "when {c}"),
            BindingClass::Depends(pairs) => {
                f.write_str("depends")?;
                for (v, o) in pairs {
                    write!(f, " ?{v}={o}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationVariable {
    pub id: VarId,
    pub schema: String,
    pub kind: AnnotationKind,
    /// Lifted literal as written in the schema.
    pub literal: Atom,
    pub weight: BigRational,
    pub class: BindingClass,
    /// `schema/kind/literal/class`; ids follow the order of these keys.
    pub key: String,
}

fn variable_key(schema: &str, kind: AnnotationKind, literal: &Atom, class: &BindingClass) -> String {
    format!("{schema}/{}/{literal}/{class}", kind.as_str())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    /// Sorted, duplicate-free.
    pub pre: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
    /// Possible items with the variable deciding each; sorted.
    pub poss_pre: Vec<(FluentId, VarId)>,
    pub poss_add: Vec<(FluentId, VarId)>,
    pub poss_del: Vec<(FluentId, VarId)>,
}

impl GroundAction {
    pub fn possible(&self, kind: AnnotationKind) -> &[(FluentId, VarId)] {
        match kind {
            AnnotationKind::Pre => &self.poss_pre,
            AnnotationKind::Add => &self.poss_add,
            AnnotationKind::Del => &self.poss_del,
        }
    }

    /// Distinct variables attached to this action, ascending.
    pub fn vars(&self) -> Vec<VarId> {
        let set: BTreeSet<VarId> =
            self.poss_pre.iter().chain(&self.poss_add).chain(&self.poss_del).map(|&(_, v)| v).collect();
        set.into_iter().collect()
    }

    pub fn effective(&self, realized: impl Fn(VarId) -> bool) -> EffectiveAction {
        let pick = |certain: &[FluentId], poss: &[(FluentId, VarId)]| {
            let mut out: Vec<FluentId> = certain.to_vec();
            out.extend(poss.iter().filter(|&&(_, v)| realized(v)).map(|&(f, _)| f));
            out.sort_unstable();
            out.dedup();
            out
        };
        EffectiveAction {
            pre: pick(&self.pre, &self.poss_pre),
            add: pick(&self.add, &self.poss_add),
            del: pick(&self.del, &self.poss_del),
        }
    }

    /// Applies the action in place; returns false, leaving the state
    /// untouched, when an effective precondition is missing.
    pub fn apply_with(&self, state: &mut State, realized: impl Fn(VarId) -> bool) -> bool {
        let pre_ok = self.pre.iter().all(|&f| state.contains(f))
            && self.poss_pre.iter().all(|&(f, v)| !realized(v) || state.contains(f));
        if !pre_ok {
            return false;
        }
        for &f in &self.add {
            state.insert(f);
        }
        for &(f, v) in &self.poss_add {
            if realized(v) {
                state.insert(f);
            }
        }
        for &f in &self.del {
            state.remove(f);
        }
        for &(f, v) in &self.poss_del {
            if realized(v) {
                state.remove(f);
            }
        }
        true
    }
}

/// Ground instance of an incomplete planning problem.
#[derive(Clone, Debug)]
pub struct GroundModel {
    pub domain: IncompleteDomain,
    pub problem: ProblemSpec,
    /// Sorted ground propositions; a [`FluentId`] indexes this list.
    pub fluents: Vec<Proposition>,
    fluent_index: HashMap<Proposition, FluentId>,
    pub actions: Vec<GroundAction>,
    action_index: HashMap<(String, Vec<String>), ActionId>,
    pub vars: Vec<RealizationVariable>,
    pub init: State,
    /// Sorted goal fluents.
    pub goal: Vec<FluentId>,
    pub rho: Option<BigRational>,
    pub warnings: Vec<Diagnostic>,
}

impl GroundModel {
    pub fn fluent(&self, p: &Proposition) -> Option<FluentId> {
        self.fluent_index.get(p).copied()
    }

    pub fn action_by_name(&self, name: &str, args: &[&str]) -> Option<ActionId> {
        let key = (name.to_string(), args.iter().map(|a| a.to_string()).collect());
        self.action_index.get(&key).copied()
    }

    pub fn action_label(&self, a: ActionId) -> String {
        let act = &self.actions[a];
        let mut s = format!("({}", act.schema);
        for arg in &act.args {
            s.push(' ');
            s.push_str(arg);
        }
        s.push(')');
        s
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn goal_holds(&self, state: &State) -> bool {
        state.satisfies(&self.goal)
    }

    /// Plan with named steps for a list of action ids.
    pub fn to_plan(&self, steps: &[ActionId]) -> Plan {
        Plan::new(
            steps
                .iter()
                .map(|&a| crate::model::PlanStep {
                    name: self.actions[a].schema.clone(),
                    args: self.actions[a].args.clone(),
                })
                .collect(),
        )
    }

    /// Rebuilds the model keeping only `keep` actions; variables that no
    /// kept action references are dropped and the rest renumbered in order.
    pub fn restrict_actions(&self, keep: &[ActionId]) -> GroundModel {
        let mut used = vec![false; self.vars.len()];
        for &a in keep {
            for v in self.actions[a].vars() {
                used[v] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.vars.len()];
        let mut vars = Vec::new();
        for (old, var) in self.vars.iter().enumerate() {
            if used[old] {
                remap[old] = vars.len();
                vars.push(RealizationVariable { id: vars.len(), ..var.clone() });
            }
        }
        let fix = |xs: &[(FluentId, VarId)]| xs.iter().map(|&(f, v)| (f, remap[v])).collect::<Vec<_>>();
        let actions: Vec<GroundAction> = keep
            .iter()
            .map(|&a| {
                let act = &self.actions[a];
                GroundAction {
                    poss_pre: fix(&act.poss_pre),
                    poss_add: fix(&act.poss_add),
                    poss_del: fix(&act.poss_del),
                    ..act.clone()
                }
            })
            .collect();
        let action_index = index_actions(&actions);
        GroundModel { actions, action_index, vars, ..self.clone() }
    }
}

fn index_actions(actions: &[GroundAction]) -> HashMap<(String, Vec<String>), ActionId> {
    actions.iter().enumerate().map(|(i, a)| ((a.schema.clone(), a.args.clone()), i)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("invalid domain:\n{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    InvalidDomain(Vec<Diagnostic>),
    #[error("problem is for domain `{problem}`, not `{domain}`")]
    DomainMismatch { domain: String, problem: String },
    #[error("object `{0}` is declared more than once")]
    DuplicateObject(String),
    #[error("object `{object}` has undeclared type `{ty}`")]
    UnknownType { object: String, ty: String },
    #[error("{context}: object `{object}` of type `{actual}` used where `{expected}` is expected")]
    WrongType { context: String, object: String, actual: String, expected: String },
    #[error("{context}: undeclared object `{object}`")]
    UndeclaredObject { context: String, object: String },
}

/// Grounds every schema over the domain constants and problem objects.
///
/// Fails on an invalid domain; an annotation whose `:when` constraint no
/// binding satisfies is dropped with a warning.
pub fn ground(domain: &IncompleteDomain, problem: &ProblemSpec) -> Result<GroundModel, GroundError> {
    let diags = validate_domain(domain);
    let errors: Vec<Diagnostic> = diags.iter().filter(|d| d.is_error()).cloned().collect();
    if !errors.is_empty() {
        return Err(GroundError::InvalidDomain(errors));
    }
    let mut warnings: Vec<Diagnostic> = diags;
    if problem.domain != domain.name {
        return Err(GroundError::DomainMismatch { domain: domain.name.clone(), problem: problem.domain.clone() });
    }

    // object name -> type, constants first
    let mut object_types: BTreeMap<&str, &str> = BTreeMap::new();
    let mut objects: Vec<(&str, &str)> = Vec::new();
    for o in domain.constants.iter().chain(&problem.objects) {
        if !domain.has_type(&o.ty) {
            return Err(GroundError::UnknownType { object: o.name.clone(), ty: o.ty.clone() });
        }
        if object_types.insert(&o.name, &o.ty).is_some() {
            return Err(GroundError::DuplicateObject(o.name.clone()));
        }
        objects.push((&o.name, &o.ty));
    }
    objects.sort();

    for (context, props) in [("init", &problem.init), ("goal", &problem.goal)] {
        for p in props {
            check_proposition(domain, &object_types, context, p)?;
        }
    }
    for a in &domain.actions {
        for ann in &a.annotations {
            if let Scope::When(c) = &ann.scope {
                for term in &c.0 {
                    for obj in term.constants() {
                        if !object_types.contains_key(obj) {
                            return Err(GroundError::UndeclaredObject {
                                context: format!("action `{}`, constraint {term}", a.name),
                                object: obj.to_string(),
                            });
                        }
                    }
                }
            }
        }
    }

    struct Raw {
        schema: String,
        args: Vec<String>,
        pre: BTreeSet<Proposition>,
        add: BTreeSet<Proposition>,
        del: BTreeSet<Proposition>,
        poss: Vec<(AnnotationKind, Proposition, usize)>,
    }

    // canonical key -> (variable template, referenced)
    let mut var_templates: BTreeMap<String, RealizationVariable> = BTreeMap::new();
    let mut var_keys: Vec<String> = Vec::new();
    let mut raws: Vec<Raw> = Vec::new();
    let mut fluent_set: BTreeSet<Proposition> = BTreeSet::new();
    fluent_set.extend(problem.init.iter().cloned());
    fluent_set.extend(problem.goal.iter().cloned());

    for schema in &domain.actions {
        let mut when_used = vec![false; schema.annotations.len()];
        for args in bindings(domain, schema, &objects) {
            let binding: HashMap<&str, &str> =
                schema.params.iter().map(|p| p.name.as_str()).zip(args.iter().map(String::as_str)).collect();
            let g = |atoms: &BTreeSet<Atom>| -> BTreeSet<Proposition> {
                atoms.iter().map(|a| a.ground(&binding).expect("validated atom")).collect()
            };
            let mut raw = Raw {
                schema: schema.name.clone(),
                args: args.clone(),
                pre: g(&schema.pre),
                add: g(&schema.add),
                del: g(&schema.del),
                poss: Vec::new(),
            };
            for (i, ann) in schema.annotations.iter().enumerate() {
                let class = match &ann.scope {
                    Scope::Schema => BindingClass::Schema,
                    Scope::When(c) => {
                        if !c.holds(&binding).expect("validated constraint") {
                            continue;
                        }
                        when_used[i] = true;
                        BindingClass::When(c.to_string())
                    }
                    Scope::Depends(vs) => BindingClass::Depends(
                        vs.iter().map(|v| (v.clone(), binding[v.as_str()].to_string())).collect(),
                    ),
                };
                let prop = ann.literal.ground(&binding).expect("validated atom");
                // a possible item that grounds onto a certain one of the same kind is certain
                let certain = match ann.kind {
                    AnnotationKind::Pre => &raw.pre,
                    AnnotationKind::Add => &raw.add,
                    AnnotationKind::Del => &raw.del,
                };
                if certain.contains(&prop) {
                    continue;
                }
                let key = variable_key(&schema.name, ann.kind, &ann.literal, &class);
                if !var_templates.contains_key(&key) {
                    var_templates.insert(
                        key.clone(),
                        RealizationVariable {
                            id: 0,
                            schema: schema.name.clone(),
                            kind: ann.kind,
                            literal: ann.literal.clone(),
                            weight: ann.weight.clone(),
                            class,
                            key: key.clone(),
                        },
                    );
                }
                var_keys.push(key);
                raw.poss.push((ann.kind, prop, var_keys.len() - 1));
            }
            fluent_set.extend(raw.pre.iter().chain(&raw.add).chain(&raw.del).cloned());
            fluent_set.extend(raw.poss.iter().map(|(_, p, _)| p.clone()));
            raws.push(raw);
        }
        for (i, ann) in schema.annotations.iter().enumerate() {
            if let Scope::When(c) = &ann.scope {
                if !when_used[i] {
                    warnings.push(Diagnostic {
                        severity: Severity::Warning,
                        subject: format!("action `{}`", schema.name),
                        message: format!("constraint {c} holds for no ground instance; annotation {} is vacuous", ann.literal),
                    });
                }
            }
        }
    }

    let fluents: Vec<Proposition> = fluent_set.into_iter().collect();
    let fluent_index: HashMap<Proposition, FluentId> =
        fluents.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let var_ids: HashMap<&str, VarId> = var_templates.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let vars: Vec<RealizationVariable> = var_templates
        .values()
        .enumerate()
        .map(|(i, v)| RealizationVariable { id: i, ..v.clone() })
        .collect();

    let ids = |set: &BTreeSet<Proposition>| -> Vec<FluentId> {
        let mut v: Vec<FluentId> = set.iter().map(|p| fluent_index[p]).collect();
        v.sort_unstable();
        v
    };
    let actions: Vec<GroundAction> = raws
        .iter()
        .map(|r| {
            let mut poss: [Vec<(FluentId, VarId)>; 3] = Default::default();
            for (kind, prop, k) in &r.poss {
                let slot = match kind {
                    AnnotationKind::Pre => 0,
                    AnnotationKind::Add => 1,
                    AnnotationKind::Del => 2,
                };
                poss[slot].push((fluent_index[prop], var_ids[var_keys[*k].as_str()]));
            }
            for p in &mut poss {
                p.sort_unstable();
                p.dedup();
            }
            let [poss_pre, poss_add, poss_del] = poss;
            GroundAction {
                schema: r.schema.clone(),
                args: r.args.clone(),
                pre: ids(&r.pre),
                add: ids(&r.add),
                del: ids(&r.del),
                poss_pre,
                poss_add,
                poss_del,
            }
        })
        .collect();

    let init = State::from_fluents(fluents.len(), problem.init.iter().map(|p| fluent_index[p]));
    let goal = ids(&problem.goal);
    let action_index = index_actions(&actions);
    let model = GroundModel {
        domain: domain.clone(),
        problem: problem.clone(),
        fluents,
        fluent_index,
        actions,
        action_index,
        vars,
        init,
        goal,
        rho: problem.rho.clone(),
        warnings,
    };
    let all: Vec<ActionId> = (0..model.actions.len()).collect();
    Ok(model.restrict_actions(&all))
}

fn check_proposition(
    domain: &IncompleteDomain,
    types: &BTreeMap<&str, &str>,
    context: &str,
    p: &Proposition,
) -> Result<(), GroundError> {
    let Some(decl) = domain.predicate(&p.predicate) else {
        return Err(GroundError::UndeclaredObject { context: format!("{context} {p}"), object: p.predicate.clone() });
    };
    for (arg, param) in p.args.iter().zip(&decl.params) {
        let Some(ty) = types.get(arg.as_str()) else {
            return Err(GroundError::UndeclaredObject { context: format!("{context} {p}"), object: arg.clone() });
        };
        if !domain.is_subtype(ty, &param.ty) {
            return Err(GroundError::WrongType {
                context: format!("{context} {p}"),
                object: arg.clone(),
                actual: ty.to_string(),
                expected: param.ty.clone(),
            });
        }
    }
    Ok(())
}

/// Typed cartesian product of parameter values, in lexicographic order.
fn bindings(domain: &IncompleteDomain, schema: &ActionSchema, objects: &[(&str, &str)]) -> Vec<Vec<String>> {
    let candidates: Vec<Vec<&str>> = schema
        .params
        .iter()
        .map(|p| objects.iter().filter(|(_, ty)| domain.is_subtype(ty, &p.ty)).map(|(n, _)| *n).collect())
        .collect();
    let mut out = vec![Vec::new()];
    for cands in &candidates {
        let mut next = Vec::with_capacity(out.len() * cands.len());
        for prefix in &out {
            for c in cands {
                let mut v: Vec<String> = prefix.clone();
                v.push(c.to_string());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Plan whose steps are indices into [`GroundModel::actions`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ResolvedPlan {
    pub steps: Vec<ActionId>,
}

impl ResolvedPlan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        ResolvedPlan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("step {index} {step}: unknown action `{name}`{}", suggest(.suggestions))]
    UnknownAction { index: usize, step: String, name: String, suggestions: Vec<String> },
    #[error("step {index} {step}: wrong number of arguments; expected {expected}")]
    WrongArity { index: usize, step: String, expected: String },
    #[error("step {index} {step}: no such ground instance")]
    NoSuchInstance { index: usize, step: String },
}

fn suggest(names: &[String]) -> String {
    if names.is_empty() {
        String::new()
    } else {
        format!("; did you mean {}?", names.iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(" or "))
    }
}

/// Binds every step of `plan` to a ground action of `model`.
pub fn resolve_plan(plan: &Plan, model: &GroundModel) -> Result<ResolvedPlan, ResolveError> {
    let mut steps = Vec::with_capacity(plan.len());
    for (i, step) in plan.steps.iter().enumerate() {
        let index = i + 1;
        if let Some(&a) = model.action_index.get(&(step.name.clone(), step.args.clone())) {
            steps.push(a);
            continue;
        }
        let Some(schema) = model.domain.action(&step.name) else {
            let mut scored: Vec<(f64, &str)> = model
                .domain
                .actions
                .iter()
                .map(|a| (strsim::normalized_levenshtein(&a.name, &step.name), a.name.as_str()))
                .filter(|(s, _)| *s >= 0.5)
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
            return Err(ResolveError::UnknownAction {
                index,
                step: step.to_string(),
                name: step.name.clone(),
                suggestions: scored.into_iter().take(3).map(|(_, n)| n.to_string()).collect(),
            });
        };
        if schema.params.len() != step.args.len() {
            return Err(ResolveError::WrongArity {
                index,
                step: step.to_string(),
                expected: format!("{}/{}", schema.name, schema.params.len()),
            });
        }
        return Err(ResolveError::NoSuchInstance { index, step: step.to_string() });
    }
    Ok(ResolvedPlan { steps })
}

/// Drops ground actions that can never apply in any completion.
///
/// Reachability is computed delete-relaxed in the generous completion
/// (possible adds realized, possible preconditions not). Every completion's
/// effective preconditions contain the generous ones and its effective adds
/// are contained in them, so its relaxed reachable set is a subset of the
/// generous one; an action whose certain preconditions are not generously
/// reachable is a no-op in every completion. See `docs/pruning.md`.
pub fn prune_unreachable(model: &GroundModel) -> GroundModel {
    let generous = crate::semantics::generous_completion(model);
    let task = crate::relaxed::RelaxedTask::new(model, |v| generous.is_realized(v));
    let reach = task.reachable(&model.init);
    let keep: Vec<ActionId> =
        (0..model.actions.len()).filter(|&a| model.actions[a].pre.iter().all(|&f| reach.contains(f))).collect();
    model.restrict_actions(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, parse_plan, parse_problem};

    const GRIPPER: &str = r#"
(define (domain gripper)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room) (at ?b - ball ?r - room) (free ?g - gripper)
               (carry ?b - ball ?g - gripper) (light ?b - ball) (dirty ?b - ball))
  (:action pick-up
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :poss-precondition (light ?b)
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g)))
    :poss-effect (dirty ?b)))
"#;
    const GRIPPER_P: &str = r#"
(define (problem g2) (:domain gripper)
  (:objects rooma - room b1 b2 - ball left - gripper)
  (:init (at-robby rooma) (at b1 rooma) (at b2 rooma) (free left) (light b1))
  (:goal (and (carry b1 left))))
"#;

    fn model(domain: &str) -> GroundModel {
        let d = parse_domain(domain).unwrap();
        let p = parse_problem(GRIPPER_P, &d).unwrap();
        ground(&d, &p).unwrap()
    }

    #[test]
    fn schema_scope_shares_variables() {
        let m = model(GRIPPER);
        assert_eq!(m.actions.len(), 2);
        assert_eq!(m.vars.len(), 2);
        let light = m.vars.iter().position(|v| v.kind == AnnotationKind::Pre).unwrap();
        assert!(m.actions.iter().all(|a| a.poss_pre.len() == 1 && a.poss_pre[0].1 == light));
    }

    #[test]
    fn depends_scope_splits_by_ball() {
        let m = model(&GRIPPER.replace(":poss-precondition (light ?b)", ":poss-precondition (:depends (?b) (light ?b))"));
        assert_eq!(m.vars.len(), 3);
        assert_ne!(m.actions[0].poss_pre[0].1, m.actions[1].poss_pre[0].1);
        assert_eq!(m.actions[0].poss_add[0].1, m.actions[1].poss_add[0].1);
    }

    #[test]
    fn when_scope_filters_instances() {
        let m = model(&GRIPPER.replace(":poss-precondition (light ?b)", ":poss-precondition (:when (= ?b b1) (light ?b))"));
        assert_eq!(m.vars.len(), 2);
        let b1 = m.action_by_name("pick-up", &["b1", "rooma", "left"]).unwrap();
        let b2 = m.action_by_name("pick-up", &["b2", "rooma", "left"]).unwrap();
        assert_eq!(m.actions[b1].poss_pre.len(), 1);
        assert!(m.actions[b2].poss_pre.is_empty());
    }

    #[test]
    fn vacuous_when_warns_and_drops_variable() {
        let d = parse_domain(&GRIPPER.replace(":poss-precondition (light ?b)", ":poss-precondition (:when (= ?r rooma) (light ?b))"))
            .unwrap();
        let p = parse_problem(&GRIPPER_P.replace("rooma - room", "rooma roomb - room"), &d).unwrap();
        let m = ground(&d, &p).unwrap();
        assert_eq!(m.vars.len(), 2);

        let d = parse_domain(&GRIPPER.replace(":poss-precondition (light ?b)", ":poss-precondition (:when (= ?b b9) (light ?b))"))
            .unwrap();
        let p = parse_problem(GRIPPER_P, &d).unwrap();
        assert!(matches!(ground(&d, &p), Err(GroundError::UndeclaredObject { .. })));
    }

    #[test]
    fn unsatisfiable_when_is_vacuous() {
        let d = parse_domain(&GRIPPER.replace(
            ":poss-precondition (light ?b)",
            ":poss-precondition (:when (and (= ?b b1) (= ?b b2)) (light ?b))",
        ))
        .unwrap();
        let p = parse_problem(GRIPPER_P, &d).unwrap();
        let m = ground(&d, &p).unwrap();
        assert_eq!(m.vars.len(), 1);
        assert!(m.warnings.iter().any(|w| w.message.contains("vacuous")));
    }

    #[test]
    fn variable_ids_are_deterministic() {
        let a = model(GRIPPER);
        let b = model(GRIPPER);
        let keys = |m: &GroundModel| m.vars.iter().map(|v| v.key.clone()).collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&b));
        let mut sorted = keys(&a);
        sorted.sort();
        assert_eq!(keys(&a), sorted);
        assert_eq!(a.fluents, b.fluents);
    }

    #[test]
    fn resolve_errors() {
        let m = model(GRIPPER);
        let ok = resolve_plan(&parse_plan("(pick-up b1 rooma left)").unwrap(), &m).unwrap();
        assert_eq!(ok.len(), 1);

        let err = resolve_plan(&parse_plan("(pick-upp b1 rooma left)").unwrap(), &m).unwrap_err();
        assert!(matches!(&err, ResolveError::UnknownAction { suggestions, .. } if suggestions == &["pick-up"]));
        assert!(err.to_string().contains("did you mean `pick-up`"));

        let err = resolve_plan(&parse_plan("(pick-up b1)").unwrap(), &m).unwrap_err();
        assert!(err.to_string().contains("pick-up/3"));

        let err = resolve_plan(&parse_plan("(pick-up b3 rooma left)").unwrap(), &m).unwrap_err();
        assert!(matches!(err, ResolveError::NoSuchInstance { index: 1, .. }));
    }

    #[test]
    fn certain_overrides_grounded_possible_duplicate() {
        let d = parse_domain(
            "(define (domain d) (:types t) (:predicates (p ?x - t) (q ?x - t))
               (:action a :parameters (?x ?y - t) :precondition (p ?x) :poss-precondition (p ?y) :effect (q ?x)))",
        )
        .unwrap();
        let p = parse_problem("(define (problem q) (:domain d) (:objects o1 o2 - t) (:init) (:goal (q o1)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let same = m.action_by_name("a", &["o1", "o1"]).unwrap();
        let diff = m.action_by_name("a", &["o1", "o2"]).unwrap();
        assert!(m.actions[same].poss_pre.is_empty());
        assert_eq!(m.actions[diff].poss_pre.len(), 1);
    }

    #[test]
    fn pruning_drops_dead_actions() {
        let d = parse_domain(
            "(define (domain d) (:predicates (p) (q) (r) (never))
               (:action good :parameters () :precondition (p) :effect (q))
               (:action dead :parameters () :precondition (never) :effect (r) :poss-effect (p)))",
        )
        .unwrap();
        let p = parse_problem("(define (problem q) (:domain d) (:init (p)) (:goal (q)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        assert_eq!(m.vars.len(), 1);
        let pruned = prune_unreachable(&m);
        assert_eq!(pruned.actions.len(), 1);
        assert_eq!(pruned.actions[0].schema, "good");
        assert!(pruned.vars.is_empty());
    }
}
