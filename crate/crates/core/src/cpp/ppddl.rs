use std::fmt::Write as _;

use super::CppProblem;
use crate::grounding::FluentId;
use crate::parser::format_rational;

fn and(items: Vec<&str>) -> String {
    if items.is_empty() {
        "(and)".to_string()
    } else {
        format!("(and {})", items.join(" "))
    }
}

fn typed(items: &[(&str, &str)]) -> String {
    items.iter().map(|(n, t)| format!("{n} - {t}")).collect::<Vec<_>>().join(" ")
}

fn action_name(label: &str) -> String {
    label.trim_matches(|c| c == '(' || c == ')').replace(' ', "_")
}

/// PPDDL text for a compiled problem: the domain followed by the problem.
///
/// Every compiled action becomes a parameterless action whose effect is a
/// conjunction of `(when <cond> <effect>)` clauses. Each hidden pair is
/// initialized by `(probabilistic w (h) 1-w (nh))`, and the threshold is
/// written as `(:goal-probability rho)`. Output is deterministic.
pub fn serialize_ppddl(cpp: &CppProblem) -> String {
    let name = |f: FluentId| cpp.fluent_names[f].as_str();
    let mut out = String::new();
    let dom = format!("{}-cpp", cpp.domain.name);

    let _ = writeln!(out, "(define (domain {dom})");
    out.push_str("  (:requirements :strips :typing :conditional-effects :probabilistic-effects)\n");
    if !cpp.domain.types.is_empty() {
        let types: Vec<(&str, &str)> = cpp.domain.types.iter().map(|t| (t.name.as_str(), t.ty.as_str())).collect();
        let _ = writeln!(out, "  (:types {})", typed(&types));
    }
    let objects: Vec<(&str, &str)> = cpp
        .domain
        .constants
        .iter()
        .chain(&cpp.problem.objects)
        .map(|o| (o.name.as_str(), o.ty.as_str()))
        .collect();
    if !objects.is_empty() {
        let _ = writeln!(out, "  (:constants {})", typed(&objects));
    }
    out.push_str("  (:predicates");
    for p in &cpp.domain.predicates {
        let params: Vec<String> = p.params.iter().map(|x| format!("?{} - {}", x.name, x.ty)).collect();
        if params.is_empty() {
            let _ = write!(out, "\n    ({})", p.name);
        } else {
            let _ = write!(out, "\n    ({} {})", p.name, params.join(" "));
        }
    }
    for f in cpp.num_base..cpp.fluent_names.len() {
        let _ = write!(out, "\n    {}", name(f));
    }
    out.push(')');

    for a in &cpp.actions {
        let _ = write!(out, "\n\n  (:action {}\n    :parameters ()", action_name(&a.name));
        if !a.pre.is_empty() {
            let _ = write!(out, "\n    :precondition {}", and(a.pre.iter().map(|&f| name(f)).collect()));
        }
        out.push_str("\n    :effect (and");
        for e in &a.effects {
            let cond = and(e.cond.iter().map(|&f| name(f)).collect());
            let body = match e.outcomes.as_slice() {
                [single] if single.prob == num::One::one() => outcome(cpp, &single.add, &single.del),
                outcomes => {
                    let mut s = String::from("(probabilistic");
                    for o in outcomes {
                        let _ = write!(s, " {} {}", format_rational(&o.prob), outcome(cpp, &o.add, &o.del));
                    }
                    s.push(')');
                    s
                }
            };
            let _ = write!(out, "\n      (when {cond}\n        {body})");
        }
        out.push_str("))");
    }
    out.push_str(")\n\n");

    let _ = writeln!(out, "(define (problem {}-cpp)", cpp.name);
    let _ = writeln!(out, "  (:domain {dom})");
    out.push_str("  (:init");
    for f in cpp.problem.init.iter() {
        let _ = write!(out, "\n    {f}");
    }
    for v in 0..cpp.num_vars {
        let w = &cpp.weights[v];
        let _ = write!(
            out,
            "\n    (probabilistic {} {} {} {})",
            format_rational(w),
            name(cpp.realized_fluent(v)),
            format_rational(&(num::BigRational::from_integer(1.into()) - w)),
            name(cpp.unrealized_fluent(v)),
        );
    }
    out.push_str(")\n");
    let _ = write!(out, "  (:goal {})", and(cpp.goal.iter().map(|&f| name(f)).collect()));
    if let Some(rho) = &cpp.rho {
        let _ = write!(out, "\n  (:goal-probability {})", format_rational(rho));
    }
    out.push_str(")\n");
    out
}

/// Adds that are also deleted are left out: deletes win in this crate's
/// semantics, while PDDL applies adds last.
fn outcome(cpp: &CppProblem, add: &[FluentId], del: &[FluentId]) -> String {
    let mut parts: Vec<String> =
        add.iter().filter(|f| !del.contains(f)).map(|&f| cpp.fluent_names[f].clone()).collect();
    parts.extend(del.iter().map(|&f| format!("(not {})", cpp.fluent_names[f])));
    and(parts.iter().map(String::as_str).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{compile, CompileOptions};
    use super::*;
    use crate::grounding::ground;
    use crate::parser::{parse_domain, parse_problem};

    #[test]
    fn fig1_export() {
        let d = parse_domain(
            "(define (domain fig1) (:predicates (p1) (p2) (p3))
              (:action a1 :parameters () :poss-precondition (p1) :effect (and (p2) (p3)))
              (:action a2 :parameters () :precondition (p2) :poss-effect (and (p3) (not (p1)))))",
        )
        .unwrap();
        let p = parse_problem("(define (problem f) (:domain fig1) (:init (p2)) (:goal (p3)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let cpp = compile(&m, Some(num::BigRational::new(3.into(), 4.into())), CompileOptions::default()).unwrap();
        let text = serialize_ppddl(&cpp);
        assert_eq!(text.matches("(probabilistic 0.5").count(), 3);
        assert_eq!(text.matches("(when ").count(), 6);
        assert!(text.contains("(:goal-probability 0.75)"));
        assert!(text.contains("(:action a1\n"));
        assert_eq!(text, serialize_ppddl(&cpp));
    }

    #[test]
    fn no_annotations_no_probabilistic_init() {
        let d = parse_domain("(define (domain d) (:predicates (p) (q)) (:action a :parameters () :precondition (p) :effect (q)))")
            .unwrap();
        let p = parse_problem("(define (problem x) (:domain d) (:init (p)) (:goal (q)))", &d).unwrap();
        let m = ground(&d, &p).unwrap();
        let text = serialize_ppddl(&compile(&m, None, CompileOptions::default()).unwrap());
        assert!(!text.contains("probabilistic "));
        assert!(!text.contains(":goal-probability"));
    }
}
