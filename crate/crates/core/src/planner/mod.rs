//! Synthesis of plans whose robustness meets a threshold, and of maximally
//! robust plans by a sequence of increasing thresholds.
//!
//! Search runs on the model with generously unreachable actions pruned.
//! A node is discarded when the mass of completions in which the goal is
//! still delete-relaxed reachable cannot meet the target. Every returned
//! plan is re-assessed exactly on the unpruned model. The soundness
//! argument is in `docs/pruning.md`.

mod search;

use std::fmt;
use std::time::Instant;

use num::{BigRational, One, Zero};

use crate::grounding::{prune_unreachable, ActionId, GroundModel, ResolvedPlan};
use crate::model::Plan;
use crate::relaxed::RelaxedTask;
use crate::robustness::{assess_exact, try_robustness_upper_bound, ExactOptions, RobustnessReport};
use crate::semantics::{check_cap, completion_probability, generous_completion, CapExceeded, Completion, State};
use search::{threshold_mass, Search, SearchResult, SearchStats};

/// Wall-clock and expansion limits for one synthesis call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub seconds: f64,
    pub nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { seconds: 60.0, nodes: 1_000_000 }
    }
}

impl Budget {
    pub fn is_zero(&self) -> bool {
        self.seconds <= 0.0 || self.nodes == 0
    }
}

/// Why no plan meets the threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// The relaxed reachability bound is below the threshold.
    BoundBelowThreshold { bound: BigRational },
    /// Search with sound pruning and duplicate detection visited every
    /// reachable state vector without meeting the threshold.
    SearchExhausted { bound: BigRational, expanded: u64 },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::BoundBelowThreshold { bound } => write!(f, "robustness upper bound {bound} is below the threshold"),
            Certificate::SearchExhausted { bound, expanded } => {
                write!(f, "exhaustive search ({expanded} expansions, bound {bound}) found no plan")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Plan { plan: Plan, steps: ResolvedPlan, report: RobustnessReport },
    Infeasible(Certificate),
    BudgetExhausted,
}

impl Outcome {
    /// `plan`, `⊥` or `--`.
    pub fn verdict(&self) -> &'static str {
        match self {
            Outcome::Plan { .. } => "plan",
            Outcome::Infeasible(_) => "⊥",
            Outcome::BudgetExhausted => "--",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub outcome: Outcome,
    pub bound: BigRational,
    pub expanded: u64,
    pub generated: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidRho(BigRational),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("internal error: plan {plan} has robustness {robustness}, below the target {target}")]
    Unverified { plan: String, robustness: BigRational, target: BigRational },
}

/// Planner over one ground model; caches the pruned model and the bound.
pub struct Planner<'m> {
    model: &'m GroundModel,
    pruned: GroundModel,
    cap: usize,
    bound: BigRational,
}

impl<'m> Planner<'m> {
    pub fn new(model: &'m GroundModel, cap: usize) -> Result<Self, PlanError> {
        let pruned = prune_unreachable(model);
        check_cap(pruned.vars.len(), cap)?;
        let bound = try_robustness_upper_bound(&pruned, cap)?;
        Ok(Planner { model, pruned, cap, bound })
    }

    pub fn bound(&self) -> &BigRational {
        &self.bound
    }

    pub fn pruned(&self) -> &GroundModel {
        &self.pruned
    }

    /// Maps pruned ids to the original model and assesses exactly there.
    fn verify(&self, steps: &[ActionId], target: &BigRational, strict: bool) -> Result<(Plan, ResolvedPlan, RobustnessReport), PlanError> {
        let plan = self.pruned.to_plan(steps);
        let resolved = crate::grounding::resolve_plan(&plan, self.model).expect("pruned actions exist in the full model");
        let report = assess_exact(self.model, &resolved, ExactOptions { cap: self.cap, ledger: false })?;
        let r = report.value.clone().expect("exact value");
        if r < *target || (strict && r == *target) {
            let text = plan.steps.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            return Err(PlanError::Unverified { plan: text, robustness: r, target: target.clone() });
        }
        Ok((plan, resolved, report))
    }

    /// Finds a plan with robustness at least `rho`.
    pub fn synthesize(&self, rho: &BigRational, budget: Budget) -> Result<Synthesis, PlanError> {
        if *rho <= BigRational::zero() || *rho > BigRational::one() {
            return Err(PlanError::InvalidRho(rho.clone()));
        }
        let start = Instant::now();
        let mut stats = SearchStats { expanded: 0, generated: 0 };
        let outcome = if budget.is_zero() {
            Outcome::BudgetExhausted
        } else if *rho > self.bound {
            Outcome::Infeasible(Certificate::BoundBelowThreshold { bound: self.bound.clone() })
        } else {
            let mut search = Search::new(&self.pruned);
            let need = threshold_mass(&search.denom, rho, false);
            match search.run(&need, &budget, start, &mut stats) {
                SearchResult::Found { steps } => {
                    let (plan, steps, report) = self.verify(&steps, rho, false)?;
                    Outcome::Plan { plan, steps, report }
                }
                SearchResult::Exhausted => Outcome::Infeasible(Certificate::SearchExhausted {
                    bound: self.bound.clone(),
                    expanded: stats.expanded,
                }),
                SearchResult::Budget => Outcome::BudgetExhausted,
            }
        };
        Ok(Synthesis {
            outcome,
            bound: self.bound.clone(),
            expanded: stats.expanded,
            generated: stats.generated,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Raises the target past each new incumbent until no better plan
    /// exists or the budget, shared by all rounds, runs out.
    pub fn synthesize_max(&self, budget: Budget) -> Result<MaxResult, PlanError> {
        let start = Instant::now();
        let mut stats = SearchStats { expanded: 0, generated: 0 };
        let mut best: Option<(Plan, ResolvedPlan, BigRational)> = None;
        let mut incumbents = Vec::new();
        let mut optimal = false;
        let mut search = Search::new(&self.pruned);
        if !budget.is_zero() {
            loop {
                let current = best.as_ref().map_or_else(BigRational::zero, |b| b.2.clone());
                if best.is_some() && current >= self.bound {
                    optimal = true;
                    break;
                }
                let need = threshold_mass(&search.denom, &current, true);
                match search.run(&need, &budget, start, &mut stats) {
                    SearchResult::Found { steps } => {
                        let (plan, resolved, report) = self.verify(&steps, &current, true)?;
                        let r = report.value.expect("exact value");
                        incumbents.push(r.clone());
                        best = Some((plan, resolved, r));
                    }
                    SearchResult::Exhausted => {
                        optimal = true;
                        break;
                    }
                    SearchResult::Budget => break,
                }
            }
        }
        let robustness = best.as_ref().map_or_else(BigRational::zero, |b| b.2.clone());
        Ok(MaxResult {
            plan: best.map(|(p, r, _)| (p, r)),
            robustness,
            bound: self.bound.clone(),
            optimal,
            incumbents,
            expanded: stats.expanded,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// Result of the increasing-threshold sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxResult {
    pub plan: Option<(Plan, ResolvedPlan)>,
    /// Robustness of `plan`, or 0 without one.
    pub robustness: BigRational,
    pub bound: BigRational,
    /// No plan is more robust than `plan`.
    pub optimal: bool,
    /// Robustness of each successive incumbent, strictly increasing.
    pub incumbents: Vec<BigRational>,
    pub expanded: u64,
    pub seconds: f64,
}

/// [`Planner::synthesize`] with default enumeration cap.
pub fn synthesize(model: &GroundModel, rho: &BigRational, budget: Budget) -> Result<Synthesis, PlanError> {
    Planner::new(model, crate::semantics::DEFAULT_ENUMERATION_CAP)?.synthesize(rho, budget)
}

/// [`Planner::synthesize_max`] with default enumeration cap.
pub fn synthesize_max(model: &GroundModel, budget: Budget) -> Result<MaxResult, PlanError> {
    Planner::new(model, crate::semantics::DEFAULT_ENUMERATION_CAP)?.synthesize_max(budget)
}

/// One threshold of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub rho: BigRational,
    pub synthesis: Synthesis,
}

impl SweepCell {
    /// `length/seconds`, `⊥` or `--`.
    pub fn label(&self) -> String {
        match &self.synthesis.outcome {
            Outcome::Plan { plan, .. } => format!("{}/{:.2}", plan.len(), self.synthesis.seconds),
            other => other.verdict().to_string(),
        }
    }
}

/// Synthesizes for every threshold, each with its own budget.
pub fn sweep(model: &GroundModel, rhos: &[BigRational], budget: Budget, cap: usize) -> Result<Vec<SweepCell>, PlanError> {
    let planner = Planner::new(model, cap)?;
    rhos.iter()
        .map(|rho| Ok(SweepCell { rho: rho.clone(), synthesis: planner.synthesize(rho, budget)? }))
        .collect()
}

/// Per-completion states of a plan prefix, indexed by completion index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub states: Vec<State>,
    /// Mass of completions whose state satisfies the goal.
    pub achieved: BigRational,
    /// Mass of completions whose goal is still delete-relaxed reachable.
    pub potential: BigRational,
    pub prefix: Vec<ActionId>,
}

impl SearchNode {
    pub fn root(model: &GroundModel, cap: usize) -> Result<Self, CapExceeded> {
        check_cap(model.vars.len(), cap)?;
        let states = vec![model.init.clone(); 1 << model.vars.len()];
        Ok(Self::from_states(model, states, Vec::new()))
    }

    pub fn child(&self, model: &GroundModel, action: ActionId) -> Self {
        let k = model.vars.len();
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let c = Completion::from_index(k, i as u64);
                let mut next = s.clone();
                model.actions[action].apply_with(&mut next, |v| c.is_realized(v));
                next
            })
            .collect();
        let mut prefix = self.prefix.clone();
        prefix.push(action);
        Self::from_states(model, states, prefix)
    }

    fn from_states(model: &GroundModel, states: Vec<State>, prefix: Vec<ActionId>) -> Self {
        let k = model.vars.len();
        let mut achieved = BigRational::zero();
        let mut potential = BigRational::zero();
        for (i, s) in states.iter().enumerate() {
            let c = Completion::from_index(k, i as u64);
            let p = completion_probability(model, &c);
            if model.goal_holds(s) {
                achieved += &p;
                potential += p;
            } else if RelaxedTask::new(model, |v| c.is_realized(v)).goal_reachable(s, &model.goal) {
                potential += p;
            }
        }
        SearchNode { states, achieved, potential, prefix }
    }
}

/// Relaxed-plan length from the node's state in the generous completion,
/// or `None` when the goal is unreachable there.
pub fn heuristic(model: &GroundModel, node: &SearchNode) -> Option<usize> {
    let generous = generous_completion(model);
    let idx = generous.index().expect("enumerable completion") as usize;
    let task = RelaxedTask::new(model, |v| generous.is_realized(v));
    task.relaxed_plan(&node.states[idx], &model.goal).map(|p| p.len())
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

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fig1_threshold() {
        let m = fig1();
        let s = synthesize(&m, &r(7, 10), Budget::default()).unwrap();
        let Outcome::Plan { report, plan, .. } = &s.outcome else { panic!("expected a plan, got {:?}", s.outcome) };
        assert!(report.value.clone().unwrap() >= r(7, 10));
        assert_eq!(plan.len(), 2);
    }

    #[test]
    fn fig1_infeasible_above_bound() {
        let m = fig1();
        let s = synthesize(&m, &r(4, 5), Budget::default()).unwrap();
        assert_eq!(s.outcome, Outcome::Infeasible(Certificate::BoundBelowThreshold { bound: r(3, 4) }));
    }

    #[test]
    fn fig1_max() {
        let m = fig1();
        let res = synthesize_max(&m, Budget::default()).unwrap();
        assert_eq!(res.robustness, r(3, 4));
        assert!(res.optimal);
        assert!(res.incumbents.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_budget() {
        let m = fig1();
        let s = synthesize(&m, &r(1, 2), Budget { seconds: 0.0, nodes: 0 }).unwrap();
        assert_eq!(s.outcome, Outcome::BudgetExhausted);
    }

    #[test]
    fn invalid_rho() {
        let m = fig1();
        assert!(matches!(synthesize(&m, &BigRational::zero(), Budget::default()), Err(PlanError::InvalidRho(_))));
        assert!(synthesize(&m, &r(3, 2), Budget::default()).is_err());
    }

    #[test]
    fn fig1_nodes_and_heuristic() {
        let m = fig1();
        let root = SearchNode::root(&m, 24).unwrap();
        assert_eq!(root.achieved, BigRational::zero());
        assert_eq!(root.potential, r(3, 4));
        // a1 alone achieves p3 in the generous relaxation
        assert_eq!(heuristic(&m, &root), Some(1));
        let a1 = m.action_by_name("a1", &[]).unwrap();
        let a2 = m.action_by_name("a2", &[]).unwrap();
        let n = root.child(&m, a1).child(&m, a2);
        assert_eq!(n.achieved, r(3, 4));
        assert_eq!(heuristic(&m, &n), Some(0));
    }

    #[test]
    fn unreachable_goal_has_zero_bound() {
        let d = parse_domain(FIG1).unwrap();
        let p = parse_problem("(define (problem f) (:domain fig1) (:init (p2)) (:goal (p1)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let res = synthesize_max(&m, Budget::default()).unwrap();
        assert!(res.plan.is_none());
        assert_eq!(res.bound, BigRational::zero());
        assert_eq!(res.robustness, BigRational::zero());
    }
}
