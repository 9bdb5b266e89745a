//! Plan robustness: the probability mass of the completions under which a
//! plan reaches the goal.
//!
//! Exact assessment enumerates only the variables attached to actions of the
//! plan; every other variable cannot affect the outcome and sums out to 1.

use num::{BigRational, One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::grounding::{GroundModel, ResolvedPlan, VarId};
use crate::relaxed::{relaxation_vars, RelaxedTask};
use crate::semantics::{
    check_cap, completion_probability, weighted_count, CapExceeded, Completion, DEFAULT_ENUMERATION_CAP,
    MAX_ENUMERATION_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        }
    }
}

/// Outcome of the plan under one completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub completion: Completion,
    pub probability: BigRational,
    pub success: bool,
    /// 1-based index of the first step whose preconditions were unmet.
    pub first_noop_step: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessReport {
    pub mode: Mode,
    /// Exact robustness; `None` in sampled mode.
    pub value: Option<BigRational>,
    /// Exact value as a float, or the sample mean.
    pub estimate: f64,
    /// Sampled mode: `|estimate - R| <= half_width` with probability at
    /// least `confidence`.
    pub half_width: Option<f64>,
    pub confidence: Option<f64>,
    /// Succeeding assignments or samples out of `total`.
    pub successes: u64,
    pub total: u64,
    /// Variables enumerated or sampled; the rest were marginalized.
    pub decided_vars: Vec<VarId>,
    pub ledger: Option<Vec<LedgerEntry>>,
}

/// Variables that can influence the outcome of `plan`, ascending.
pub fn plan_vars(model: &GroundModel, plan: &ResolvedPlan) -> Vec<VarId> {
    let mut used = vec![false; model.vars.len()];
    for &a in &plan.steps {
        for v in model.actions[a].vars() {
            used[v] = true;
        }
    }
    (0..used.len()).filter(|&v| used[v]).collect()
}

/// Executes `plan` from the initial state under `realized`; returns whether
/// the goal holds at the end and the first step that was a no-op.
pub fn run_plan(model: &GroundModel, plan: &ResolvedPlan, realized: impl Fn(VarId) -> bool) -> (bool, Option<usize>) {
    let mut state = model.init.clone();
    let mut first_noop = None;
    for (i, &a) in plan.steps.iter().enumerate() {
        if !model.actions[a].apply_with(&mut state, &realized) && first_noop.is_none() {
            first_noop = Some(i + 1);
        }
    }
    (model.goal_holds(&state), first_noop)
}

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    pub cap: usize,
    /// Record every one of the `2^K` completions; then all variables are
    /// enumerated, not only those the plan touches.
    pub ledger: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { cap: DEFAULT_ENUMERATION_CAP, ledger: false }
    }
}

/// Exact robustness by enumeration.
pub fn assess_exact(model: &GroundModel, plan: &ResolvedPlan, opts: ExactOptions) -> Result<RobustnessReport, CapExceeded> {
    let vars: Vec<VarId> = if opts.ledger { (0..model.vars.len()).collect() } else { plan_vars(model, plan) };
    let (value, successes) = weighted_count(model, &vars, opts.cap, |c| run_plan(model, plan, |v| c.is_realized(v)).0)?;
    let ledger = opts.ledger.then(|| {
        (0..1u64 << vars.len())
            .into_par_iter()
            .map(|i| {
                let completion = Completion::from_index(model.vars.len(), i);
                let (success, first_noop_step) = run_plan(model, plan, |v| completion.is_realized(v));
                let probability = completion_probability(model, &completion);
                LedgerEntry { completion, probability, success, first_noop_step }
            })
            .collect()
    });
    Ok(RobustnessReport {
        mode: Mode::Exact,
        estimate: value.to_f64().unwrap_or(f64::NAN),
        value: Some(value),
        half_width: None,
        confidence: None,
        successes,
        total: 1u64 << vars.len(),
        decided_vars: vars,
        ledger,
    })
}

/// Hoeffding sample size `ceil(ln(2/delta) / (2 epsilon^2))`.
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> u64 {
    ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
}

/// Exact Bernoulli draw with success probability `w`.
fn bernoulli(rng: &mut ChaCha8Rng, w: &BigRational) -> bool {
    match (w.numer().to_u64(), w.denom().to_u64()) {
        (Some(n), Some(d)) => rng.gen_range(0..d) < n,
        _ => rng.gen::<f64>() < w.to_f64().unwrap_or(0.5),
    }
}

/// Monte-Carlo robustness estimate from i.i.d. completions.
///
/// Sample `i` draws its variables from a ChaCha stream keyed by
/// `(seed, i)`, so the report is identical for any thread count.
pub fn assess_sampled(
    model: &GroundModel,
    plan: &ResolvedPlan,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<RobustnessReport, SampleError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SampleError::Epsilon(epsilon));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SampleError::Delta(delta));
    }
    let n = hoeffding_samples(epsilon, delta);
    let vars = plan_vars(model, plan);
    let successes: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut c = Completion::none(model.vars.len());
            for &v in &vars {
                c.set(v, bernoulli(&mut rng, &model.vars[v].weight));
            }
            u64::from(run_plan(model, plan, |v| c.is_realized(v)).0)
        })
        .sum();
    Ok(RobustnessReport {
        mode: Mode::Sampled,
        value: None,
        estimate: successes as f64 / n as f64,
        half_width: Some(epsilon),
        confidence: Some(1.0 - delta),
        successes,
        total: n,
        decided_vars: vars,
        ledger: None,
    })
}

/// True iff the plan reaches the goal in at least one completion.
pub fn is_valid(model: &GroundModel, plan: &ResolvedPlan, cap: usize) -> Result<bool, CapExceeded> {
    let vars = plan_vars(model, plan);
    check_cap(vars.len(), cap)?;
    Ok((0..1u64 << vars.len()).into_par_iter().any(|i| {
        let c = crate::semantics::subset_completion(model.vars.len(), &vars, i);
        run_plan(model, plan, |v| c.is_realized(v)).0
    }))
}

/// Mass of the completions in which the goal is delete-relaxed reachable
/// from the initial state; no plan is more robust.
///
/// A plan that succeeds in a completion only applies actions whose effective
/// preconditions hold, and the facts it produces are relaxed reachable in
/// that completion. Possible deletes cannot change relaxed reachability and
/// are marginalized.
pub fn try_robustness_upper_bound(model: &GroundModel, cap: usize) -> Result<BigRational, CapExceeded> {
    if model.goal_holds(&model.init) {
        return Ok(BigRational::one());
    }
    let vars = relaxation_vars(model);
    let (bound, _) = weighted_count(model, &vars, cap.min(MAX_ENUMERATION_CAP), |c| {
        RelaxedTask::new(model, |v| c.is_realized(v)).goal_reachable(&model.init, &model.goal)
    })?;
    Ok(bound)
}

/// [`try_robustness_upper_bound`], falling back to the trivial bound 1 when
/// too many variables would need enumerating.
pub fn robustness_upper_bound(model: &GroundModel, cap: usize) -> BigRational {
    try_robustness_upper_bound(model, cap).unwrap_or_else(|_| BigRational::one())
}

/// Whether `bound` proves that no plan reaches `rho`.
pub fn bound_refutes(bound: &BigRational, rho: &BigRational) -> bool {
    rho > bound
}
