//! Execution of ground actions under one completion of the incomplete model,
//! and enumeration of completions with their probabilities.
//!
//! Applying an action whose effective preconditions do not hold leaves the
//! state unchanged, so projection is a total function.

use std::fmt;

use fixedbitset::FixedBitSet;
use num::bigint::BigUint;
use num::{BigInt, BigRational, Num, One, ToPrimitive};
use rayon::prelude::*;

use crate::grounding::{FluentId, GroundAction, GroundModel, ResolvedPlan, VarId};

/// Largest K enumerated exactly unless a caller raises it.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Hard ceiling imposed by the `u64` completion indices used internally.
pub const MAX_ENUMERATION_CAP: usize = 62;

/// Closed-world set of ground propositions, indexed by [`FluentId`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(FixedBitSet);

impl State {
    pub fn empty(num_fluents: usize) -> Self {
        State(FixedBitSet::with_capacity(num_fluents))
    }

    pub fn from_fluents(num_fluents: usize, fluents: impl IntoIterator<Item = FluentId>) -> Self {
        let mut s = State::empty(num_fluents);
        for f in fluents {
            s.insert(f);
        }
        s
    }

    pub fn contains(&self, f: FluentId) -> bool {
        self.0.contains(f)
    }

    pub fn insert(&mut self, f: FluentId) {
        self.0.insert(f);
    }

    pub fn remove(&mut self, f: FluentId) {
        self.0.set(f, false);
    }

    pub fn satisfies(&self, fluents: &[FluentId]) -> bool {
        fluents.iter().all(|&f| self.0.contains(f))
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.0.ones()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    /// Keeps only fluents below `limit`, shrinking the capacity to it.
    pub fn truncated(&self, limit: usize) -> State {
        State::from_fluents(limit, self.iter().take_while(|&f| f < limit))
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

/// Total assignment of realization variables; one complete domain model.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Completion(FixedBitSet);

impl Completion {
    /// Every annotation unrealized.
    pub fn none(num_vars: usize) -> Self {
        Completion(FixedBitSet::with_capacity(num_vars))
    }

    /// Every annotation realized.
    pub fn all(num_vars: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(num_vars);
        bits.insert_range(..);
        Completion(bits)
    }

    /// Bit `j` of `index` decides variable `j`.
    pub fn from_index(num_vars: usize, index: u64) -> Self {
        let mut c = Completion::none(num_vars);
        for j in 0..num_vars {
            if (index >> j) & 1 == 1 {
                c.0.insert(j);
            }
        }
        c
    }

    pub fn from_fn(num_vars: usize, mut realized: impl FnMut(VarId) -> bool) -> Self {
        let mut c = Completion::none(num_vars);
        for j in 0..num_vars {
            if realized(j) {
                c.0.insert(j);
            }
        }
        c
    }

    /// Inverse of [`Completion::from_index`]; `None` past 64 variables.
    pub fn index(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(self.0.ones().fold(0u64, |acc, j| acc | (1 << j)))
    }

    pub fn is_realized(&self, var: VarId) -> bool {
        self.0.contains(var)
    }

    pub fn set(&mut self, var: VarId, realized: bool) {
        self.0.set(var, realized);
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn realized(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.ones()
    }
}

impl fmt::Debug for Completion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.0.len()).map(|j| if self.0.contains(j) { 'T' } else { 'F' }).collect();
        write!(f, "Completion({bits})")
    }
}

impl fmt::Display for Completion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.0.len() {
            f.write_str(if self.0.contains(j) { "T" } else { "F" })?;
        }
        Ok(())
    }
}

/// The generous completion: every possible add realized, no possible
/// precondition or delete realized. Every completion's delete-relaxed
/// reachable facts are a subset of this one's.
pub fn generous_completion(model: &GroundModel) -> Completion {
    Completion::from_fn(model.vars.len(), |v| model.vars[v].kind == crate::model::AnnotationKind::Add)
}

/// Preconditions and effects of a ground action in one completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveAction {
    pub pre: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
}

impl EffectiveAction {
    pub fn apply(&self, state: &State) -> State {
        let mut next = state.clone();
        self.apply_in_place(&mut next);
        next
    }

    /// Returns whether the preconditions held.
    pub fn apply_in_place(&self, state: &mut State) -> bool {
        if !state.satisfies(&self.pre) {
            return false;
        }
        for &f in &self.add {
            state.insert(f);
        }
        for &f in &self.del {
            state.remove(f);
        }
        true
    }
}

pub fn effective_action(action: &GroundAction, completion: &Completion) -> EffectiveAction {
    action.effective(|v| completion.is_realized(v))
}

/// One STRIPS step under `completion`; an unmet precondition is a no-op.
pub fn apply(action: &GroundAction, state: &State, completion: &Completion) -> State {
    let mut next = state.clone();
    action.apply_with(&mut next, |v| completion.is_realized(v));
    next
}

/// Trajectory `[s0 = init, s1, ..., sn]` of a plan under one completion.
pub fn project(model: &GroundModel, plan: &ResolvedPlan, init: &State, completion: &Completion) -> Vec<State> {
    let mut out = Vec::with_capacity(plan.len() + 1);
    let mut cur = init.clone();
    out.push(cur.clone());
    for &a in &plan.steps {
        model.actions[a].apply_with(&mut cur, |v| completion.is_realized(v));
        out.push(cur.clone());
    }
    out
}

/// Product of `w` over realized and `1 - w` over unrealized variables.
pub fn completion_probability(model: &GroundModel, completion: &Completion) -> BigRational {
    let mut p = BigRational::one();
    for (j, var) in model.vars.iter().enumerate() {
        if completion.is_realized(j) {
            p *= &var.weight;
        } else {
            p *= BigRational::one() - &var.weight;
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{k} realization variables exceed the enumeration cap of {cap}; use sampling instead")]
pub struct CapExceeded {
    pub k: usize,
    pub cap: usize,
}

pub(crate) fn check_cap(k: usize, cap: usize) -> Result<(), CapExceeded> {
    if k > cap.min(MAX_ENUMERATION_CAP) {
        Err(CapExceeded { k, cap })
    } else {
        Ok(())
    }
}

/// All `2^K` completions in binary counting order with exact probabilities.
pub fn enumerate_completions(model: &GroundModel, cap: usize) -> Result<Completions<'_>, CapExceeded> {
    check_cap(model.vars.len(), cap)?;
    Ok(Completions { model, next: 0, end: 1u64 << model.vars.len() })
}

/// Iterator over completions; [`Completions::split`] hands out disjoint
/// index ranges for parallel folds.
#[derive(Clone, Debug)]
pub struct Completions<'a> {
    model: &'a GroundModel,
    next: u64,
    end: u64,
}

impl Completions<'_> {
    pub fn split(self, parts: u64) -> Vec<Self> {
        let parts = parts.max(1);
        let len = self.end - self.next;
        let step = len.div_ceil(parts).max(1);
        (0..parts)
            .map(|i| {
                let lo = (self.next + i * step).min(self.end);
                let hi = (lo + step).min(self.end);
                Completions { model: self.model, next: lo, end: hi }
            })
            .filter(|c| c.next < c.end)
            .collect()
    }
}

impl Iterator for Completions<'_> {
    type Item = (Completion, BigRational);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let c = Completion::from_index(self.model.vars.len(), self.next);
        self.next += 1;
        let p = completion_probability(self.model, &c);
        Some((c, p))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

/// Unsigned integers used for probability mass scaled by a common
/// denominator.
pub(crate) trait Mass: Num + Clone + Send + Sync + for<'a> std::ops::AddAssign<&'a Self> + Into<BigInt> {}

impl Mass for u128 {}
impl Mass for BigUint {}

/// Per-variable numerators over the product of the weight denominators of
/// a variable subset: the probability of subset assignment `i` is
/// `mass_of(i) / denom`, and the masses of all assignments sum to `denom`.
pub(crate) struct MassTable<T> {
    pub realized: Vec<T>,
    pub unrealized: Vec<T>,
    pub denom: T,
}

impl<T: Mass> MassTable<T> {
    pub fn mass_of(&self, mut index: u64) -> T {
        let mut m = T::one();
        for j in 0..self.realized.len() {
            m = if index & 1 == 1 { m * self.realized[j].clone() } else { m * self.unrealized[j].clone() };
            index >>= 1;
        }
        m
    }

    pub fn to_rational(&self, mass: T) -> BigRational {
        BigRational::new(mass.into(), self.denom.clone().into())
    }

    fn count(&self, model: &GroundModel, vars: &[VarId], success: &(dyn Fn(&Completion) -> bool + Sync)) -> (BigRational, u64) {
        let n = vars.len();
        let total = 1u64 << n;
        let chunk = 1u64 << n.saturating_sub(6).min(16);
        let (mass, hits) = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut mass = T::zero();
                let mut hits = 0u64;
                for i in c * chunk..((c + 1) * chunk).min(total) {
                    let comp = subset_completion(model.vars.len(), vars, i);
                    if success(&comp) {
                        mass += &self.mass_of(i);
                        hits += 1;
                    }
                }
                (mass, hits)
            })
            .reduce(|| (T::zero(), 0), |(mut m1, h1), (m2, h2)| {
                m1 += &m2;
                (m1, h1 + h2)
            });
        (self.to_rational(mass), hits)
    }
}

/// Completion with bit `j` of `index` deciding `vars[j]` and every other
/// variable unrealized.
pub fn subset_completion(num_vars: usize, vars: &[VarId], index: u64) -> Completion {
    let mut c = Completion::none(num_vars);
    for (j, &v) in vars.iter().enumerate() {
        if (index >> j) & 1 == 1 {
            c.set(v, true);
        }
    }
    c
}

pub(crate) enum Masses {
    Small(MassTable<u128>),
    Big(MassTable<BigUint>),
}

/// Integer mass table over `vars` with arbitrary precision.
pub(crate) fn big_mass_table(model: &GroundModel, vars: &[VarId]) -> MassTable<BigUint> {
    let mut denom = BigUint::one();
    let mut realized = Vec::with_capacity(vars.len());
    let mut unrealized = Vec::with_capacity(vars.len());
    for &v in vars {
        let w = &model.vars[v].weight;
        let d = w.denom().to_biguint().expect("positive denominator");
        let n = w.numer().to_biguint().expect("weight in (0,1)");
        unrealized.push(&d - &n);
        realized.push(n);
        denom *= d;
    }
    MassTable { realized, unrealized, denom }
}

impl Masses {
    pub fn new(model: &GroundModel, vars: &[VarId]) -> Masses {
        let big = big_mass_table(model, vars);
        let small = (|| {
            Some(MassTable {
                denom: big.denom.to_u128()?,
                realized: big.realized.iter().map(ToPrimitive::to_u128).collect::<Option<Vec<_>>>()?,
                unrealized: big.unrealized.iter().map(ToPrimitive::to_u128).collect::<Option<Vec<_>>>()?,
            })
        })();
        match small {
            Some(t) => Masses::Small(t),
            None => Masses::Big(big),
        }
    }
}

/// Exact probability that `success` holds, enumerating the assignments of
/// `vars` in parallel. `success` must not depend on any other variable;
/// those are marginalized out and passed as unrealized. Also returns how
/// many of the `2^|vars|` assignments succeed.
pub fn weighted_count(
    model: &GroundModel,
    vars: &[VarId],
    cap: usize,
    success: impl Fn(&Completion) -> bool + Sync,
) -> Result<(BigRational, u64), CapExceeded> {
    check_cap(vars.len(), cap)?;
    Ok(match Masses::new(model, vars) {
        Masses::Small(t) => t.count(model, vars, &success),
        Masses::Big(t) => t.count(model, vars, &success),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::ground;
    use crate::parser::{parse_domain, parse_problem};

    const FIG1: &str = "(define (domain fig1) (:predicates (p1) (p2) (p3))
      (:action a1 :parameters () :poss-precondition (p1) :effect (and (p2) (p3)))
      (:action a2 :parameters () :precondition (p2) :poss-effect (and (p3) (not (p1)))))";
    const FIG1_P: &str = "(define (problem f) (:domain fig1) (:init (p2)) (:goal (p3)))";

    fn fig1() -> GroundModel {
        let d = parse_domain(FIG1).unwrap();
        let p = parse_problem(FIG1_P, &d).unwrap();
        ground(&d, &p).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn fluent(m: &GroundModel, name: &str) -> FluentId {
        m.fluent(&crate::model::Proposition::new::<&str>(name, [])).unwrap()
    }

    fn var(m: &GroundModel, schema: &str, kind: crate::model::AnnotationKind) -> VarId {
        m.vars.iter().position(|v| v.schema == schema && v.kind == kind).unwrap()
    }

    #[test]
    fn effective_a1_without_p1() {
        let m = fig1();
        let c = Completion::none(m.vars.len());
        let a1 = m.action_by_name("a1", &[]).unwrap();
        let eff = effective_action(&m.actions[a1], &c);
        assert!(eff.pre.is_empty());
        let mut add = vec![fluent(&m, "p2"), fluent(&m, "p3")];
        add.sort();
        assert_eq!(eff.add, add);
        assert!(eff.del.is_empty());
    }

    #[test]
    fn unmet_precondition_is_noop() {
        use crate::model::AnnotationKind::*;
        let m = fig1();
        let a1 = m.action_by_name("a1", &[]).unwrap();
        let mut c = Completion::none(m.vars.len());
        c.set(var(&m, "a1", Pre), true);
        assert_eq!(apply(&m.actions[a1], &m.init, &c), m.init);

        let c = Completion::none(m.vars.len());
        let next = apply(&m.actions[a1], &m.init, &c);
        assert_eq!(next, State::from_fluents(m.fluents.len(), [fluent(&m, "p2"), fluent(&m, "p3")]));
        assert_eq!(apply(&m.actions[a1], &next, &c), next);
    }

    #[test]
    fn projection_of_fig1_rows() {
        use crate::model::AnnotationKind::*;
        let m = fig1();
        let plan = ResolvedPlan { steps: vec![m.action_by_name("a1", &[]).unwrap(), m.action_by_name("a2", &[]).unwrap()] };
        let p3 = fluent(&m, "p3");

        let all_false = Completion::none(m.vars.len());
        let traj = project(&m, &plan, &m.init, &all_false);
        assert_eq!(traj.len(), 3);
        assert!(traj[2].contains(p3));

        let mut c = Completion::none(m.vars.len());
        c.set(var(&m, "a1", Pre), true);
        let traj = project(&m, &plan, &m.init, &c);
        assert_eq!(traj[2], m.init);
        assert!(!traj[2].contains(p3));

        assert_eq!(project(&m, &ResolvedPlan::default(), &m.init, &c), vec![m.init.clone()]);
    }

    #[test]
    fn probabilities_of_fig1() {
        let m = fig1();
        let all: Vec<_> = enumerate_completions(&m, DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|(_, p)| *p == ratio(1, 8)));
        let total: BigRational = all.iter().map(|(_, p)| p.clone()).sum();
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn weighted_probability() {
        use crate::model::AnnotationKind::*;
        let d = parse_domain(&FIG1.replace("(p1) :effect", "(:weight 0.9 (p1)) :effect")).unwrap();
        let p = parse_problem(FIG1_P, &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let mut c = Completion::none(m.vars.len());
        c.set(var(&m, "a1", Pre), true);
        assert_eq!(completion_probability(&m, &c), ratio(9, 40));
    }

    #[test]
    fn cap_is_enforced() {
        let m = fig1();
        let err = enumerate_completions(&m, 2).unwrap_err();
        assert_eq!(err, CapExceeded { k: 3, cap: 2 });
        assert!(err.to_string().contains("sampling"));
    }

    #[test]
    fn split_covers_every_index_once() {
        let m = fig1();
        let parts = enumerate_completions(&m, 24).unwrap().split(3);
        let idx: Vec<u64> = parts.into_iter().flatten().map(|(c, _)| c.index().unwrap()).collect();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn completion_index_round_trip() {
        for i in [0u64, 1, 5, 0b1011] {
            assert_eq!(Completion::from_index(4, i).index(), Some(i));
        }
    }

    #[test]
    fn mass_table_matches_rational_product() {
        let d = parse_domain(&FIG1.replace("(p1) :effect", "(:weight 0.9 (p1)) :effect")).unwrap();
        let p = parse_problem(FIG1_P, &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let all: Vec<VarId> = (0..m.vars.len()).collect();
        let Masses::Small(t) = Masses::new(&m, &all) else { panic!("small weights") };
        for (c, p) in enumerate_completions(&m, 24).unwrap() {
            let i = c.index().unwrap();
            assert_eq!(t.to_rational(t.mass_of(i)), p);
        }
    }
}

#[cfg(test)]
mod count_tests {
    use super::*;
    use crate::grounding::ground;
    use crate::parser::{parse_domain, parse_problem};

    #[test]
    fn weighted_count_marginalizes_other_variables() {
        let d = parse_domain(
            "(define (domain d) (:predicates (p) (q))
              (:action a :parameters () :poss-precondition (:weight 3/4 (p)) :poss-effect (:weight 0.1 (q))))",
        )
        .unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:init) (:goal (q)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let add = m.vars.iter().position(|v| v.kind == crate::model::AnnotationKind::Add).unwrap();
        let (r, hits) = weighted_count(&m, &[add], 24, |c| c.is_realized(add)).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 10.into()));
        assert_eq!(hits, 1);
        let all: Vec<VarId> = (0..m.vars.len()).collect();
        let (r, hits) = weighted_count(&m, &all, 24, |c| c.is_realized(add)).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 10.into()));
        assert_eq!(hits, 2);
        assert!(weighted_count(&m, &all, 1, |_| true).is_err());
    }
}
