//! Conformant probabilistic planning: compilation of an incomplete-domain
//! problem, belief-state execution and the robustness equivalence check.
//!
//! Fluent layout of a compiled problem: ids `0..n` are the base fluents of
//! the ground model; realization variable `j` owns the hidden pair
//! `n + 2j` (realized) and `n + 2j + 1` (unrealized). Hidden fluents are
//! never added or deleted.

mod ppddl;

use std::collections::BTreeMap;

use num::{BigRational, One, Zero};
use rayon::prelude::*;

use crate::grounding::{FluentId, GroundModel, ResolvedPlan, VarId};
use crate::model::{IncompleteDomain, ProblemSpec};
use crate::robustness::{assess_exact, ExactOptions};
use crate::semantics::{check_cap, completion_probability, CapExceeded, Completion, State};

pub use ppddl::serialize_ppddl;

/// Largest number of variables one compiled action may depend on.
pub const DEFAULT_ACTION_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub prob: BigRational,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalEffect {
    /// Sorted fluents that must all hold.
    pub cond: Vec<FluentId>,
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CppAction {
    pub name: String,
    pub pre: Vec<FluentId>,
    pub effects: Vec<ConditionalEffect>,
    /// For compiled actions: realized hidden fluents of the attached
    /// variables. Effect `i` is the one whose condition fixes variable
    /// `selector[j]` realized iff bit `j` of `i` is set.
    pub selector: Option<Vec<FluentId>>,
}

/// Distribution over states; every listed probability is positive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Belief(pub BTreeMap<State, BigRational>);

impl Belief {
    pub fn singleton(state: State) -> Self {
        Belief(BTreeMap::from([(state, BigRational::one())]))
    }

    pub fn support(&self) -> usize {
        self.0.len()
    }

    pub fn mass(&self) -> BigRational {
        self.0.values().cloned().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, &BigRational)> {
        self.0.iter()
    }
}

#[derive(Clone, Debug)]
pub struct CppProblem {
    pub name: String,
    pub domain: IncompleteDomain,
    pub problem: ProblemSpec,
    /// Names of all fluents, base then hidden pairs.
    pub fluent_names: Vec<String>,
    pub num_base: usize,
    pub num_vars: usize,
    /// Realization weight of each variable.
    pub weights: Vec<BigRational>,
    pub actions: Vec<CppAction>,
    pub init: Belief,
    pub goal: Vec<FluentId>,
    pub rho: Option<BigRational>,
}

impl CppProblem {
    pub fn realized_fluent(&self, var: VarId) -> FluentId {
        self.num_base + 2 * var
    }

    pub fn unrealized_fluent(&self, var: VarId) -> FluentId {
        self.num_base + 2 * var + 1
    }

    /// Realization encoded by the hidden fluents of a support state.
    pub fn completion_of(&self, state: &State) -> Completion {
        Completion::from_fn(self.num_vars, |v| state.contains(self.realized_fluent(v)))
    }

    /// The base-fluent part of a compiled state.
    pub fn base_state(&self, state: &State) -> State {
        state.truncated(self.num_base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("action {action} depends on {n} realization variables; at most {cap} are compiled (2^{n} conditional effects)")]
    ActionCap { action: String, n: usize, cap: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct CompileOptions {
    pub cap: usize,
    pub action_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { cap: crate::semantics::DEFAULT_ENUMERATION_CAP, action_cap: DEFAULT_ACTION_CAP }
    }
}

fn hidden_name(model: &GroundModel, var: VarId, realized: bool) -> String {
    let v = &model.vars[var];
    let mut name = format!("{}h{var}-{}-{}-{}", if realized { "" } else { "n" }, v.kind.as_str(), v.schema, v.literal.predicate);
    name.retain(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    name
}

/// Compiles the ground model to a CPP problem whose goal probability after
/// any plan equals that plan's robustness.
///
/// Each action `a` with attached variables `V` becomes an action with no
/// precondition and one effect per assignment `s` of `V`. The condition of
/// that effect is `Pre(a)`, the possible preconditions realized under `s`,
/// and one hidden literal per variable of `V` fixing its value; its single
/// outcome adds `Add(a)` and the realized possible adds, deletes `Del(a)`
/// and the realized possible deletes. The initial belief holds one state per
/// completion with that completion's probability.
pub fn compile(model: &GroundModel, rho: Option<BigRational>, opts: CompileOptions) -> Result<CppProblem, CompileError> {
    let k = model.vars.len();
    check_cap(k, opts.cap)?;
    let n = model.fluents.len();
    let realized_f = |v: VarId| n + 2 * v;
    let unrealized_f = |v: VarId| n + 2 * v + 1;

    let mut actions = Vec::with_capacity(model.actions.len());
    for (id, a) in model.actions.iter().enumerate() {
        let vars = a.vars();
        if vars.len() > opts.action_cap {
            return Err(CompileError::ActionCap { action: model.action_label(id), n: vars.len(), cap: opts.action_cap });
        }
        let mut effects = Vec::with_capacity(1 << vars.len());
        for bits in 0u64..1 << vars.len() {
            let realized = |v: VarId| {
                let j = vars.binary_search(&v).expect("attached variable");
                (bits >> j) & 1 == 1
            };
            let eff = a.effective(realized);
            let mut cond = eff.pre;
            for (j, &v) in vars.iter().enumerate() {
                cond.push(if (bits >> j) & 1 == 1 { realized_f(v) } else { unrealized_f(v) });
            }
            cond.sort_unstable();
            effects.push(ConditionalEffect {
                cond,
                outcomes: vec![Outcome { prob: BigRational::one(), add: eff.add, del: eff.del }],
            });
        }
        actions.push(CppAction {
            name: model.action_label(id),
            pre: Vec::new(),
            effects,
            selector: Some(vars.iter().map(|&v| realized_f(v)).collect()),
        });
    }

    let total = n + 2 * k;
    let init: BTreeMap<State, BigRational> = (0..1u64 << k)
        .into_par_iter()
        .map(|i| {
            let c = Completion::from_index(k, i);
            let mut s = State::from_fluents(total, model.init.iter());
            for v in 0..k {
                s.insert(if c.is_realized(v) { realized_f(v) } else { unrealized_f(v) });
            }
            (s, completion_probability(model, &c))
        })
        .collect();

    let mut fluent_names: Vec<String> = model.fluents.iter().map(ToString::to_string).collect();
    for v in 0..k {
        fluent_names.push(format!("({})", hidden_name(model, v, true)));
        fluent_names.push(format!("({})", hidden_name(model, v, false)));
    }

    Ok(CppProblem {
        name: model.problem.name.clone(),
        domain: model.domain.clone(),
        problem: model.problem.clone(),
        fluent_names,
        num_base: n,
        num_vars: k,
        weights: model.vars.iter().map(|v| v.weight.clone()).collect(),
        actions,
        init: Belief(init),
        goal: model.goal.clone(),
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("action {0} is not applicable in every state of the belief")]
    Inapplicable(String),
    #[error("action {0} has more than one effect whose condition holds in one state")]
    OverlappingEffects(String),
}

fn effect_for<'a>(action: &'a CppAction, state: &State) -> Result<Option<&'a ConditionalEffect>, ApplyError> {
    if let Some(selector) = &action.selector {
        let idx = selector.iter().enumerate().fold(0usize, |acc, (j, &f)| acc | (usize::from(state.contains(f)) << j));
        let eff = &action.effects[idx];
        return Ok(state.satisfies(&eff.cond).then_some(eff));
    }
    let mut found = None;
    for eff in &action.effects {
        if state.satisfies(&eff.cond) {
            if found.is_some() {
                return Err(ApplyError::OverlappingEffects(action.name.clone()));
            }
            found = Some(eff);
        }
    }
    Ok(found)
}

/// Belief after executing `action`: every support state is pushed through
/// the effect whose condition it satisfies, or kept when none does.
pub fn apply_cpp(action: &CppAction, belief: &Belief) -> Result<Belief, ApplyError> {
    if belief.0.keys().any(|s| !s.satisfies(&action.pre)) {
        return Err(ApplyError::Inapplicable(action.name.clone()));
    }
    let parts: Vec<Vec<(State, BigRational)>> = belief
        .0
        .par_iter()
        .map(|(s, p)| {
            Ok(match effect_for(action, s)? {
                None => vec![(s.clone(), p.clone())],
                Some(eff) => eff
                    .outcomes
                    .iter()
                    .map(|o| {
                        let mut next = s.clone();
                        for &f in &o.add {
                            next.insert(f);
                        }
                        for &f in &o.del {
                            next.remove(f);
                        }
                        (next, p * &o.prob)
                    })
                    .collect(),
            })
        })
        .collect::<Result<_, ApplyError>>()?;
    let mut out: BTreeMap<State, BigRational> = BTreeMap::new();
    for (s, p) in parts.into_iter().flatten() {
        if p.is_zero() {
            continue;
        }
        *out.entry(s).or_insert_with(BigRational::zero) += p;
    }
    Ok(Belief(out))
}

/// Executes a plan over ground action ids, which are also compiled action
/// ids, from the initial belief.
pub fn execute(cpp: &CppProblem, plan: &ResolvedPlan) -> Result<Vec<Belief>, ApplyError> {
    let mut out = vec![cpp.init.clone()];
    for &a in &plan.steps {
        let next = apply_cpp(&cpp.actions[a], out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Mass of the support states containing every goal fluent.
pub fn goal_probability(belief: &Belief, goal: &[FluentId]) -> BigRational {
    belief.0.iter().filter(|(s, _)| s.satisfies(goal)).map(|(_, p)| p.clone()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem1Report {
    /// Robustness by enumeration of completions.
    pub lhs: BigRational,
    /// Goal probability of the compiled plan.
    pub rhs: BigRational,
    pub equal: bool,
    pub rho: Option<BigRational>,
    /// `lhs >= rho` and `rhs >= rho`, when a threshold is given.
    pub verdicts: Option<(bool, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
}

/// Computes robustness natively and the goal probability of the compiled
/// plan, and compares them for exact equality.
pub fn check_theorem1(
    model: &GroundModel,
    plan: &ResolvedPlan,
    rho: Option<BigRational>,
    opts: CompileOptions,
) -> Result<Theorem1Report, VerifyError> {
    let lhs = assess_exact(model, plan, ExactOptions { cap: opts.cap, ledger: false })?
        .value
        .expect("exact mode has a value");
    let cpp = compile(model, rho.clone(), opts)?;
    let beliefs = execute(&cpp, plan)?;
    let rhs = goal_probability(beliefs.last().expect("nonempty"), &cpp.goal);
    let verdicts = rho.as_ref().map(|r| (&lhs >= r, &rhs >= r));
    Ok(Theorem1Report { equal: lhs == rhs, lhs, rhs, rho, verdicts })
}
