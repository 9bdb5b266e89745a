//! Delete relaxation of a ground model under one fixed completion.
//!
//! Deletes are ignored, so only possible preconditions and possible adds
//! influence a relaxed task.

use std::collections::VecDeque;

use crate::grounding::{ActionId, FluentId, GroundModel, VarId};
use crate::model::AnnotationKind;
use crate::semantics::State;

/// Effective preconditions and adds of every action, with a fluent to
/// consumer index for counter-based propagation.
#[derive(Clone, Debug)]
pub struct RelaxedTask {
    num_fluents: usize,
    pre: Vec<Vec<FluentId>>,
    add: Vec<Vec<FluentId>>,
    consumers: Vec<Vec<ActionId>>,
}

/// Variables that can change the delete relaxation: possible preconditions
/// and possible adds, ascending.
pub fn relaxation_vars(model: &GroundModel) -> Vec<VarId> {
    model.vars.iter().filter(|v| v.kind != AnnotationKind::Del).map(|v| v.id).collect()
}

impl RelaxedTask {
    pub fn new(model: &GroundModel, realized: impl Fn(VarId) -> bool) -> Self {
        let n = model.fluents.len();
        let mut pre = Vec::with_capacity(model.actions.len());
        let mut add = Vec::with_capacity(model.actions.len());
        let mut consumers = vec![Vec::new(); n];
        for (id, a) in model.actions.iter().enumerate() {
            let eff = a.effective(&realized);
            for &f in &eff.pre {
                consumers[f].push(id);
            }
            pre.push(eff.pre);
            add.push(eff.add);
        }
        RelaxedTask { num_fluents: n, pre, add, consumers }
    }

    /// Facts reachable from `state` when deletes are ignored.
    pub fn reachable(&self, state: &State) -> State {
        self.explore(state, None).0
    }

    /// Whether every goal fluent is relaxed reachable from `state`.
    pub fn goal_reachable(&self, state: &State, goal: &[FluentId]) -> bool {
        if state.satisfies(goal) {
            return true;
        }
        let (reached, _) = self.explore(state, Some(goal));
        reached.satisfies(goal)
    }

    /// Breadth-first counter propagation. `level` of a fact is the layer it
    /// first appears in and `supporter` the action that first added it;
    /// actions fire in nondecreasing layer order. Stops early once `goal`
    /// holds.
    fn explore(&self, state: &State, goal: Option<&[FluentId]>) -> (State, Vec<Option<ActionId>>) {
        let mut reached = state.clone();
        let mut supporter: Vec<Option<ActionId>> = vec![None; self.num_fluents];
        let mut missing: Vec<usize> = self.pre.iter().map(Vec::len).collect();
        let mut queue: VecDeque<FluentId> = state.iter().collect();

        let mut fire = |a: ActionId, reached: &mut State, queue: &mut VecDeque<FluentId>| {
            for &f in &self.add[a] {
                if !reached.contains(f) {
                    reached.insert(f);
                    supporter[f] = Some(a);
                    queue.push_back(f);
                }
            }
        };

        for a in 0..self.pre.len() {
            if missing[a] == 0 {
                fire(a, &mut reached, &mut queue);
            }
        }
        while let Some(f) = queue.pop_front() {
            if let Some(g) = goal {
                if reached.satisfies(g) {
                    break;
                }
            }
            for &a in &self.consumers[f] {
                missing[a] -= 1;
                if missing[a] == 0 {
                    fire(a, &mut reached, &mut queue);
                }
            }
        }
        (reached, supporter)
    }

    /// FF-style relaxed plan from `state` to `goal`: the first achiever of
    /// every needed fact, chained backwards through preconditions. `None`
    /// when the goal is not relaxed reachable. Returned in ascending id
    /// order, duplicate-free.
    pub fn relaxed_plan(&self, state: &State, goal: &[FluentId]) -> Option<Vec<ActionId>> {
        let (reached, supporter) = self.explore(state, Some(goal));
        if !reached.satisfies(goal) {
            return None;
        }
        let mut chosen = vec![false; self.pre.len()];
        let mut needed = vec![false; self.num_fluents];
        let mut stack: Vec<FluentId> = goal.to_vec();
        while let Some(f) = stack.pop() {
            if needed[f] || state.contains(f) {
                continue;
            }
            needed[f] = true;
            let a = supporter[f].expect("reached fact outside the start state has a supporter");
            if !chosen[a] {
                chosen[a] = true;
                stack.extend(self.pre[a].iter().copied());
            }
        }
        Some((0..chosen.len()).filter(|&a| chosen[a]).collect())
    }
}
