use std::fs;
use std::path::Path;
use std::time::Instant;

use num::{BigRational, One};
use serde_json::{json, Value};

use rkit_core::cpp::{check_theorem1, compile, serialize_ppddl, CompileOptions};
use rkit_core::fixtures::mini_logistics_problem;
use rkit_core::grounding::{ground, resolve_plan, GroundModel, ResolvedPlan};
use rkit_core::inject::inject;
use rkit_core::model::{IncompleteDomain, Plan, ProblemSpec};
use rkit_core::parser::{
    format_rational, parse_domain, parse_plan, parse_problem, rational_to_f64, serialize_domain, serialize_plan,
    serialize_problem, ParseError,
};
use rkit_core::planner::{sweep, Budget, Outcome, Planner};
use rkit_core::robustness::{assess_exact, assess_sampled, plan_vars, ExactOptions, RobustnessReport};

use crate::report::{Input, RunReport};
use crate::{BudgetArgs, Command, ModelArgs};

/// A failed run and its exit code: 2 for unreadable or malformed input,
/// 3 for input that parses but does not make sense.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { code: 2, message }
    }

    fn semantic(e: impl std::fmt::Display) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Ground(_) => "ground",
        Command::Assess(_) => "assess",
        Command::Compile(_) => "compile",
        Command::Verify(_) => "verify",
        Command::Plan(_) => "plan",
        Command::Inject(_) => "inject",
        Command::Sweep(_) => "sweep",
    }
}

/// Runs one subcommand and returns its exit code.
pub fn run(cmd: &Command, report: &mut RunReport) -> Result<u8, Failure> {
    let start = Instant::now();
    let code = match cmd {
        Command::Ground(a) => cmd_ground(a, report),
        Command::Assess(a) => cmd_assess(a, report),
        Command::Compile(a) => cmd_compile(a, report),
        Command::Verify(a) => cmd_verify(a, report),
        Command::Plan(a) => cmd_plan(a, report),
        Command::Inject(a) => cmd_inject(a, report),
        Command::Sweep(a) => cmd_sweep(a, report),
    };
    report.metrics.seconds = start.elapsed().as_secs_f64();
    code
}

fn read(role: &str, path: &Path, report: &mut RunReport) -> Result<String, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure { code: 2, message: format!("cannot read {} {}: {e}", role, path.display()) })?;
    report.inputs.push(Input::new(role, Some(path), &text));
    Ok(text)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { code: 2, message: format!("cannot write {}: {e}", path.display()) })
}

fn load_domain(path: &Path, report: &mut RunReport) -> Result<IncompleteDomain, Failure> {
    let text = read("domain", path, report)?;
    Ok(parse_domain(&text).map_err(|e| e.with_file(path))?)
}

fn load_problem(path: &Path, domain: &IncompleteDomain, report: &mut RunReport) -> Result<ProblemSpec, Failure> {
    let text = read("problem", path, report)?;
    Ok(parse_problem(&text, domain).map_err(|e| e.with_file(path))?)
}

fn load_model(args: &ModelArgs, report: &mut RunReport) -> Result<GroundModel, Failure> {
    let d = load_domain(&args.domain, report)?;
    let p = load_problem(&args.problem, &d, report)?;
    let model = ground(&d, &p).map_err(Failure::semantic)?;
    for w in &model.warnings {
        eprintln!("{w}");
    }
    report.metrics.k = Some(model.vars.len());
    Ok(model)
}

fn load_plan(path: &Path, model: &GroundModel, report: &mut RunReport) -> Result<(Plan, ResolvedPlan), Failure> {
    let text = read("plan", path, report)?;
    let plan = parse_plan(&text).map_err(|e| e.with_file(path))?;
    let resolved = resolve_plan(&plan, model).map_err(Failure::semantic)?;
    Ok((plan, resolved))
}

fn rational(r: &BigRational) -> Value {
    json!(r.to_string())
}

fn set_r(report: &mut RunReport, r: &BigRational) {
    report.metrics.r = Some(r.to_string());
    report.metrics.r_decimal = Some(rational_to_f64(r));
}

fn budget(b: &BudgetArgs) -> Budget {
    Budget { seconds: b.budget_secs, nodes: b.node_cap }
}

fn cmd_ground(a: &ModelArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let m = load_model(a, report)?;
    let label = |f: usize| m.fluents[f].to_string();
    let poss = |items: &[(usize, usize)]| -> Vec<Value> {
        items.iter().map(|&(f, v)| json!({ "fluent": label(f), "var": v })).collect()
    };
    let actions: Vec<Value> = (0..m.actions.len())
        .map(|i| {
            let act = &m.actions[i];
            json!({
                "label": m.action_label(i),
                "pre": act.pre.iter().map(|&f| label(f)).collect::<Vec<_>>(),
                "add": act.add.iter().map(|&f| label(f)).collect::<Vec<_>>(),
                "del": act.del.iter().map(|&f| label(f)).collect::<Vec<_>>(),
                "poss_pre": poss(&act.poss_pre),
                "poss_add": poss(&act.poss_add),
                "poss_del": poss(&act.poss_del),
            })
        })
        .collect();
    let vars: Vec<Value> = m
        .vars
        .iter()
        .map(|v| {
            json!({
                "id": v.id,
                "key": v.key,
                "schema": v.schema,
                "kind": v.kind.as_str(),
                "literal": v.literal.to_string(),
                "weight": rational(&v.weight),
            })
        })
        .collect();
    report.verdict = "ok".into();
    report.details = json!({
        "fluents": m.fluents.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "init": m.init.iter().map(label).collect::<Vec<_>>(),
        "goal": m.goal.iter().map(|&f| label(f)).collect::<Vec<_>>(),
        "rho": m.rho.as_ref().map(rational),
        "actions": actions,
        "vars": vars,
        "warnings": m.warnings.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    Ok(0)
}

fn robustness_details(m: &GroundModel, r: &RobustnessReport) -> Value {
    let ledger = r.ledger.as_ref().map(|entries| {
        entries
            .iter()
            .map(|e| {
                json!({
                    "completion": e.completion.to_string(),
                    "probability": rational(&e.probability),
                    "success": e.success,
                    "first_noop_step": e.first_noop_step,
                })
            })
            .collect::<Vec<_>>()
    });
    json!({
        "mode": r.mode.as_str(),
        "value": r.value.as_ref().map(rational),
        "estimate": r.estimate,
        "half_width": r.half_width,
        "confidence": r.confidence,
        "successes": r.successes,
        "total": r.total,
        "decided_vars": r.decided_vars.iter().map(|&v| m.vars[v].key.clone()).collect::<Vec<_>>(),
        "ledger": ledger,
    })
}

fn cmd_assess(a: &crate::AssessArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let m = load_model(&a.model, report)?;
    let (_, plan) = load_plan(&a.plan, &m, report)?;
    let relevant = if a.ledger { m.vars.len() } else { plan_vars(&m, &plan).len() };
    let exact = !a.sampled && relevant <= a.cap;
    let r = if exact {
        assess_exact(&m, &plan, ExactOptions { cap: a.cap, ledger: a.ledger }).map_err(Failure::semantic)?
    } else {
        if a.ledger {
            return Err(Failure::semantic(format!("a ledger needs exact enumeration of {relevant} variables, above the cap {}", a.cap)));
        }
        assess_sampled(&m, &plan, a.epsilon, a.delta, a.seed).map_err(Failure::semantic)?
    };
    match &r.value {
        Some(v) => set_r(report, v),
        None => report.metrics.r_decimal = Some(r.estimate),
    }
    let rho = a.rho.clone().or_else(|| m.rho.clone());
    report.verdict = match &rho {
        Some(rho) => {
            let meets = match &r.value {
                Some(v) => v >= rho,
                None => r.estimate >= rational_to_f64(rho),
            };
            if meets { "meets" } else { "below" }.into()
        }
        None => r.mode.as_str().into(),
    };
    let mut details = robustness_details(&m, &r);
    details["rho"] = json!(rho.as_ref().map(rational));
    details["seed"] = if exact { Value::Null } else { json!(a.seed) };
    report.details = details;
    Ok(0)
}

fn cmd_compile(a: &crate::CompileArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let m = load_model(&a.model, report)?;
    let rho = a.rho.clone().or_else(|| m.rho.clone());
    let cpp = compile(&m, rho, CompileOptions { cap: a.cap, action_cap: a.action_cap }).map_err(Failure::semantic)?;
    let path = a.out.clone().unwrap_or_else(|| format!("{}.ppddl", m.problem.name).into());
    write(&path, &serialize_ppddl(&cpp))?;
    report.verdict = "compiled".into();
    report.details = json!({
        "output": path.display().to_string(),
        "actions": cpp.actions.len(),
        "conditional_effects": cpp.actions.iter().map(|x| x.effects.len()).sum::<usize>(),
        "hidden_fluents": cpp.fluent_names.len() - cpp.num_base,
        "initial_support": cpp.init.support(),
        "rho": cpp.rho.as_ref().map(rational),
    });
    Ok(0)
}

fn cmd_verify(a: &crate::VerifyArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let m = load_model(&a.model, report)?;
    let (_, plan) = load_plan(&a.plan, &m, report)?;
    let rho = a.rho.clone().or_else(|| m.rho.clone());
    let t = check_theorem1(&m, &plan, rho, CompileOptions { cap: a.cap, action_cap: a.action_cap })
        .map_err(Failure::semantic)?;
    set_r(report, &t.lhs);
    report.verdict = if t.equal { "equal" } else { "unequal" }.into();
    report.details = json!({
        "robustness": rational(&t.lhs),
        "goal_probability": rational(&t.rhs),
        "equal": t.equal,
        "rho": t.rho.as_ref().map(rational),
        "robustness_meets_rho": t.verdicts.map(|v| v.0),
        "goal_probability_meets_rho": t.verdicts.map(|v| v.1),
    });
    Ok(if t.equal { 0 } else { 1 })
}

fn steps_json(plan: &Plan) -> Vec<String> {
    plan.steps.iter().map(ToString::to_string).collect()
}

fn cmd_plan(a: &crate::PlanArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let m = load_model(&a.model, report)?;
    let planner = Planner::new(&m, a.budget.cap).map_err(Failure::semantic)?;
    let budget = budget(&a.budget);
    let mut details = json!({
        "seed": a.seed,
        "budget_secs": a.budget.budget_secs,
        "node_cap": a.budget.node_cap,
        "bound": rational(planner.bound()),
        "pruned_actions": planner.pruned().actions.len(),
    });
    let (plan, code) = if a.max {
        let r = planner.synthesize_max(budget).map_err(Failure::semantic)?;
        report.metrics.nodes = Some(r.expanded);
        details["optimal"] = json!(r.optimal);
        details["incumbents"] = json!(r.incumbents.iter().map(ToString::to_string).collect::<Vec<_>>());
        let (verdict, code) = match (&r.plan, r.optimal) {
            (Some(_), _) => ("plan", 0),
            (None, true) => ("⊥", 0),
            (None, false) => ("--", 1),
        };
        report.verdict = verdict.into();
        if r.plan.is_some() {
            set_r(report, &r.robustness);
        }
        (r.plan.map(|p| p.0), code)
    } else {
        let rho = a
            .rho
            .clone()
            .or_else(|| m.rho.clone())
            .ok_or_else(|| Failure::semantic("no threshold: pass --rho, --max, or give the problem a :rho"))?;
        details["rho"] = rational(&rho);
        let s = planner.synthesize(&rho, budget).map_err(Failure::semantic)?;
        report.metrics.nodes = Some(s.expanded);
        details["generated"] = json!(s.generated);
        report.verdict = s.outcome.verdict().into();
        match s.outcome {
            Outcome::Plan { plan, report: r, .. } => {
                set_r(report, r.value.as_ref().expect("exact"));
                (Some(plan), 0)
            }
            Outcome::Infeasible(cert) => {
                details["certificate"] = json!(cert.to_string());
                (None, 0)
            }
            Outcome::BudgetExhausted => (None, 1),
        }
    };
    if let Some(plan) = &plan {
        details["plan"] = json!(steps_json(plan));
        details["length"] = json!(plan.len());
        if let Some(out) = &a.out {
            write(out, &serialize_plan(plan))?;
            details["output"] = json!(out.display().to_string());
        }
    }
    report.details = details;
    Ok(code)
}

fn cmd_inject(a: &crate::InjectArgs, report: &mut RunReport) -> Result<u8, Failure> {
    let d = load_domain(&a.domain, report)?;
    let p = load_problem(&a.problem, &d, report)?;
    let (d2, p2) = inject(&d, &p, a.m, a.seed).map_err(Failure::semantic)?;
    write(&a.out_domain, &serialize_domain(&d2))?;
    write(&a.out_problem, &serialize_problem(&p2))?;
    let added: Vec<String> = d2.predicates[d.predicates.len()..].iter().map(|p| p.name.clone()).collect();
    report.verdict = "injected".into();
    report.details = json!({
        "m": a.m,
        "seed": a.seed,
        "added": added,
        "out_domain": a.out_domain.display().to_string(),
        "out_problem": a.out_problem.display().to_string(),
    });
    Ok(0)
}

fn default_rhos() -> Vec<BigRational> {
    (1..=9).map(|i| BigRational::new(i.into(), 10.into())).collect()
}

fn cmd_sweep(a: &crate::SweepArgs, report: &mut RunReport) -> Result<u8, Failure> {
    if a.problems.is_empty() && a.m_range.is_none() {
        return Err(Failure::usage("sweep needs problem files or --m-range".into()));
    }
    let rhos = if a.rhos.is_empty() { default_rhos() } else { a.rhos.clone() };
    if let Some(bad) = rhos.iter().find(|r| **r <= num::zero() || **r > BigRational::one()) {
        return Err(Failure::semantic(format!("threshold must lie in (0, 1], got {bad}")));
    }
    let d = load_domain(&a.domain, report)?;
    let mut sources: Vec<(String, ProblemSpec)> = Vec::new();
    for path in &a.problems {
        let p = load_problem(path, &d, report)?;
        sources.push((p.name.clone(), p));
    }
    if let Some((lo, hi)) = a.m_range {
        for m in lo..=hi {
            let text = mini_logistics_problem(m);
            report.inputs.push(Input::new(&format!("problem m={m}"), None, &text));
            let p = parse_problem(&text, &d)?;
            sources.push((format!("m={m}"), p));
        }
    }
    let budget = budget(&a.budget);
    let mut rows = Vec::new();
    let mut csv = String::from("problem");
    for r in &rhos {
        csv.push(',');
        csv.push_str(&format_rational(r));
    }
    csv.push('\n');
    let mut nodes = 0;
    for (label, p) in &sources {
        let model = ground(&d, p).map_err(Failure::semantic)?;
        let cells = sweep(&model, &rhos, budget, a.budget.cap).map_err(Failure::semantic)?;
        csv.push_str(label);
        let mut cell_json = Vec::new();
        for c in &cells {
            csv.push(',');
            csv.push_str(&c.label());
            nodes += c.synthesis.expanded;
            let (length, r) = match &c.synthesis.outcome {
                Outcome::Plan { plan, report, .. } => (Some(plan.len()), report.value.as_ref().map(rational)),
                _ => (None, None),
            };
            cell_json.push(json!({
                "rho": rational(&c.rho),
                "label": c.label(),
                "verdict": c.synthesis.outcome.verdict(),
                "length": length,
                "R": r,
                "seconds": c.synthesis.seconds,
                "expanded": c.synthesis.expanded,
            }));
        }
        csv.push('\n');
        let bound = cells.first().map(|c| rational(&c.synthesis.bound));
        rows.push(json!({ "problem": label, "K": model.vars.len(), "bound": bound, "cells": cell_json }));
    }
    if let Some(path) = &a.csv {
        write(path, &csv)?;
    }
    report.metrics.nodes = Some(nodes);
    report.verdict = "table".into();
    report.details = json!({
        "rhos": rhos.iter().map(format_rational).collect::<Vec<_>>(),
        "rows": rows,
        "csv": csv,
    });
    Ok(0)
}
