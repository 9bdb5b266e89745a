//! Best-first search over vectors of per-completion states.
//!
//! Node `v` holds one interned state per completion (completion index `i`
//! follows binary counting over the variables). Probability masses are
//! integers over the common denominator of all weights.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::rc::Rc;
use std::time::Instant;

use num::bigint::BigUint;
use num::{BigRational, Zero};
use rayon::prelude::*;

use super::Budget;
use crate::grounding::{ActionId, GroundModel, VarId};
use crate::relaxed::{relaxation_vars, RelaxedTask};
use crate::semantics::{big_mass_table, State};

/// Smallest mass that meets a robustness target.
pub(crate) fn threshold_mass(denom: &BigUint, target: &BigRational, strict: bool) -> BigUint {
    let scaled = target * BigRational::from_integer(denom.clone().into());
    let floor = scaled.floor().to_integer().to_biguint().unwrap_or_else(BigUint::zero);
    if strict || !scaled.is_integer() {
        floor + 1u32
    } else {
        floor
    }
}

pub(crate) enum SearchResult {
    Found { steps: Vec<ActionId> },
    Exhausted,
    Budget,
}

pub(crate) struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
}

type Vector = Rc<[u32]>;

struct Record {
    parent: Option<usize>,
    action: Option<ActionId>,
    vector: Vector,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct OpenKey {
    h: usize,
    achieved: Reverse<BigUint>,
    g: usize,
    seq: u64,
    node: usize,
}

struct Evaluation {
    achieved: BigUint,
    h: usize,
}

pub(crate) struct Search<'m> {
    model: &'m GroundModel,
    k: usize,
    masses: Vec<BigUint>,
    pub denom: BigUint,
    /// Per completion: bits of the variables that matter to the relaxation.
    relax_key: Vec<u64>,
    relax_vars: Vec<VarId>,
    tasks: HashMap<u64, RelaxedTask>,
    /// Action ids in label order, the successor generation order.
    order: Vec<ActionId>,
    action_vars: Vec<Vec<VarId>>,
    states: Vec<State>,
    goal_flags: Vec<bool>,
    interned: HashMap<State, u32>,
    transitions: HashMap<(u32, ActionId, u64), u32>,
    relaxed_plans: HashMap<(u32, u64), Option<Rc<[ActionId]>>>,
}

fn pack(index: u64, vars: &[VarId]) -> u64 {
    vars.iter().enumerate().fold(0, |acc, (j, &v)| acc | (((index >> v) & 1) << j))
}

impl<'m> Search<'m> {
    pub fn new(model: &'m GroundModel) -> Self {
        let k = model.vars.len();
        let all: Vec<VarId> = (0..k).collect();
        let table = big_mass_table(model, &all);
        let masses: Vec<BigUint> = (0..1u64 << k).map(|i| table.mass_of(i)).collect();
        let relax_vars = relaxation_vars(model);
        let relax_key = (0..1u64 << k).map(|i| pack(i, &relax_vars)).collect();
        let mut order: Vec<ActionId> = (0..model.actions.len()).collect();
        order.sort_by_cached_key(|&a| model.action_label(a));
        let action_vars = model.actions.iter().map(|a| a.vars()).collect();
        Search {
            model,
            k,
            masses,
            denom: table.denom,
            relax_key,
            relax_vars,
            tasks: HashMap::new(),
            order,
            action_vars,
            states: Vec::new(),
            goal_flags: Vec::new(),
            interned: HashMap::new(),
            transitions: HashMap::new(),
            relaxed_plans: HashMap::new(),
        }
    }

    fn intern(&mut self, s: State) -> u32 {
        if let Some(&id) = self.interned.get(&s) {
            return id;
        }
        let id = self.states.len() as u32;
        self.goal_flags.push(self.model.goal_holds(&s));
        self.states.push(s.clone());
        self.interned.insert(s, id);
        id
    }

    fn root(&mut self) -> Vector {
        let id = self.intern(self.model.init.clone());
        vec![id; 1 << self.k].into()
    }

    fn successor(&mut self, vector: &Vector, a: ActionId) -> Vector {
        let mut out = Vec::with_capacity(vector.len());
        for (i, &sid) in vector.iter().enumerate() {
            let bits = pack(i as u64, &self.action_vars[a]);
            let key = (sid, a, bits);
            let next = match self.transitions.get(&key) {
                Some(&n) => n,
                None => {
                    let mut s = self.states[sid as usize].clone();
                    let vars = &self.action_vars[a];
                    self.model.actions[a].apply_with(&mut s, |v| {
                        let j = vars.binary_search(&v).expect("attached variable");
                        (bits >> j) & 1 == 1
                    });
                    let n = self.intern(s);
                    self.transitions.insert(key, n);
                    n
                }
            };
            out.push(next);
        }
        out.into()
    }

    /// Fills the relaxed-plan cache for every `(state, relaxation key)` pair
    /// in `pairs`, computing missing entries in parallel.
    fn ensure_relaxed(&mut self, pairs: &[(u32, u64)]) {
        let missing: Vec<(u32, u64)> = pairs.iter().filter(|p| !self.relaxed_plans.contains_key(p)).copied().collect();
        if missing.is_empty() {
            return;
        }
        let mut keys: Vec<u64> = missing.iter().map(|&(_, k)| k).filter(|k| !self.tasks.contains_key(k)).collect();
        keys.sort_unstable();
        keys.dedup();
        let model = self.model;
        let relax_vars = &self.relax_vars;
        let built: Vec<(u64, RelaxedTask)> = keys
            .par_iter()
            .map(|&key| {
                let task = RelaxedTask::new(model, |v| {
                    let j = relax_vars.binary_search(&v);
                    matches!(j, Ok(j) if (key >> j) & 1 == 1)
                });
                (key, task)
            })
            .collect();
        self.tasks.extend(built);
        let tasks = &self.tasks;
        let states = &self.states;
        let goal = &model.goal;
        let plans: Vec<((u32, u64), Option<Rc<[ActionId]>>)> = missing
            .par_iter()
            .map(|&(sid, key)| ((sid, key), tasks[&key].relaxed_plan(&states[sid as usize], goal)))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(k, p)| (k, p.map(Rc::from)))
            .collect();
        self.relaxed_plans.extend(plans);
    }

    /// `None` when the node cannot reach `need` (it is pruned).
    fn evaluate(&mut self, vector: &Vector, need: &BigUint) -> Option<Evaluation> {
        let mut groups: HashMap<(u32, u64), BigUint> = HashMap::new();
        let mut achieved = BigUint::zero();
        for (i, &sid) in vector.iter().enumerate() {
            if self.goal_flags[sid as usize] {
                achieved += &self.masses[i];
            } else {
                *groups.entry((sid, self.relax_key[i])).or_insert_with(BigUint::zero) += &self.masses[i];
            }
        }
        if &achieved >= need {
            return Some(Evaluation { achieved, h: 0 });
        }
        let mut pairs: Vec<(u32, u64)> = groups.keys().copied().collect();
        pairs.sort_unstable();
        self.ensure_relaxed(&pairs);

        let mut potential = achieved.clone();
        let mut candidates: Vec<(usize, Reverse<&BigUint>, (u32, u64), Rc<[ActionId]>)> = Vec::new();
        for p in &pairs {
            if let Some(plan) = &self.relaxed_plans[p] {
                let mass = &groups[p];
                potential += mass;
                candidates.push((plan.len(), Reverse(mass), *p, plan.clone()));
            }
        }
        if &potential < need {
            return None;
        }
        candidates.sort();
        let mut covered = achieved.clone();
        let mut union: HashSet<ActionId> = HashSet::new();
        for (_, Reverse(mass), _, plan) in candidates {
            if &covered >= need {
                break;
            }
            covered += mass;
            union.extend(plan.iter().copied());
        }
        Some(Evaluation { achieved, h: union.len() })
    }

    /// Searches for a plan whose mass reaches `need`.
    pub fn run(&mut self, need: &BigUint, budget: &Budget, start: Instant, stats: &mut SearchStats) -> SearchResult {
        let root = self.root();
        let Some(eval) = self.evaluate(&root, need) else {
            return SearchResult::Exhausted;
        };
        if &eval.achieved >= need {
            return SearchResult::Found { steps: Vec::new() };
        }
        let mut records = vec![Record { parent: None, action: None, vector: root.clone() }];
        let mut seen: HashSet<Vector> = HashSet::from([root]);
        let mut open = BinaryHeap::new();
        let mut seq = 0u64;
        open.push(Reverse(OpenKey { h: eval.h, achieved: Reverse(eval.achieved), g: 0, seq, node: 0 }));

        while let Some(Reverse(top)) = open.pop() {
            if stats.expanded >= budget.nodes || start.elapsed().as_secs_f64() >= budget.seconds {
                return SearchResult::Budget;
            }
            stats.expanded += 1;
            let vector = records[top.node].vector.clone();
            for idx in 0..self.order.len() {
                let a = self.order[idx];
                let child = self.successor(&vector, a);
                if seen.contains(&child) {
                    continue;
                }
                seen.insert(child.clone());
                stats.generated += 1;
                let Some(eval) = self.evaluate(&child, need) else {
                    continue;
                };
                records.push(Record { parent: Some(top.node), action: Some(a), vector: child });
                let node = records.len() - 1;
                if &eval.achieved >= need {
                    let mut steps = Vec::new();
                    let mut cur = node;
                    while let Some(p) = records[cur].parent {
                        steps.push(records[cur].action.expect("non-root has an action"));
                        cur = p;
                    }
                    steps.reverse();
                    return SearchResult::Found { steps };
                }
                seq += 1;
                open.push(Reverse(OpenKey { h: eval.h, achieved: Reverse(eval.achieved), g: top.g + 1, seq, node }));
            }
        }
        SearchResult::Exhausted
    }
}
