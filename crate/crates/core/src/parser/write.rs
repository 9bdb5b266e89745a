use std::fmt::Write as _;

use num::BigRational;

use super::format_rational;
use crate::model::{
    default_weight, Annotation, AnnotationKind, IncompleteDomain, Plan, ProblemSpec, Scope, TypedName,
};

fn typed_list(items: &[TypedName], var: bool) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut j = i;
        while j < items.len() && &items[j].ty == ty {
            if !out.is_empty() {
                out.push(' ');
            }
            if var {
                out.push('?');
            }
            out.push_str(&items[j].name);
            j += 1;
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
    out
}

fn entry(ann: &Annotation) -> String {
    let mut s = match ann.kind {
        AnnotationKind::Del => format!("(not {})", ann.literal),
        _ => ann.literal.to_string(),
    };
    if ann.weight != default_weight() {
        s = format!("(:weight {} {s})", weight(&ann.weight));
    }
    match &ann.scope {
        Scope::Schema => s,
        Scope::When(c) => format!("(:when {c} {s})"),
        Scope::Depends(vars) => {
            let vars: Vec<String> = vars.iter().map(|v| format!("?{v}")).collect();
            format!("(:depends ({}) {s})", vars.join(" "))
        }
    }
}

fn weight(w: &BigRational) -> String {
    format_rational(w)
}

fn and<I: IntoIterator<Item = String>>(items: I) -> String {
    let parts: Vec<String> = items.into_iter().collect();
    if parts.is_empty() {
        "(and)".to_string()
    } else {
        format!("(and {})", parts.join(" "))
    }
}

/// Canonical text for a domain. Annotations with the default weight of 1/2
/// are written without a `:weight` marker.
pub fn serialize_domain(domain: &IncompleteDomain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);
    if !domain.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", domain.requirements.join(" "));
    }
    if !domain.types.is_empty() {
        let _ = writeln!(out, "  (:types {})", typed_list(&domain.types, false));
    }
    if !domain.constants.is_empty() {
        let _ = writeln!(out, "  (:constants {})", typed_list(&domain.constants, false));
    }
    out.push_str("  (:predicates");
    for p in &domain.predicates {
        if p.params.is_empty() {
            let _ = write!(out, "\n    ({})", p.name);
        } else {
            let _ = write!(out, "\n    ({} {})", p.name, typed_list(&p.params, true));
        }
    }
    out.push(')');

    for a in &domain.actions {
        let _ = write!(out, "\n\n  (:action {}", a.name);
        let _ = write!(out, "\n    :parameters ({})", typed_list(&a.params, true));
        let _ = write!(out, "\n    :precondition {}", and(a.pre.iter().map(ToString::to_string)));
        let pre: Vec<String> = a.possible(AnnotationKind::Pre).map(entry).collect();
        if !pre.is_empty() {
            let _ = write!(out, "\n    :poss-precondition {}", and(pre));
        }
        let effects = a
            .add
            .iter()
            .map(ToString::to_string)
            .chain(a.del.iter().map(|d| format!("(not {d})")));
        let _ = write!(out, "\n    :effect {}", and(effects));
        let poss_eff: Vec<String> = a.annotations.iter().filter(|x| x.kind != AnnotationKind::Pre).map(entry).collect();
        if !poss_eff.is_empty() {
            let _ = write!(out, "\n    :poss-effect {}", and(poss_eff));
        }
        out.push(')');
    }
    out.push_str(")\n");
    out
}

pub fn serialize_problem(problem: &ProblemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain);
    if !problem.objects.is_empty() {
        let _ = writeln!(out, "  (:objects {})", typed_list(&problem.objects, false));
    }
    out.push_str("  (:init");
    for p in &problem.init {
        let _ = write!(out, "\n    {p}");
    }
    out.push_str(")\n");
    let _ = write!(out, "  (:goal {})", and(problem.goal.iter().map(ToString::to_string)));
    if let Some(rho) = &problem.rho {
        let _ = write!(out, "\n  (:rho {})", format_rational(rho));
    }
    out.push_str(")\n");
    out
}

pub fn serialize_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for step in &plan.steps {
        let _ = writeln!(out, "{step}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, parse_plan, parse_problem};

    const DOMAIN: &str = r#"
(define (domain d)
  (:types ball room)
  (:constants b1 - ball)
  (:predicates (at ?b - ball ?r - room) (light ?b - ball) (dirty ?b - ball) (free))
  (:action pick
    :parameters (?b - ball ?r - room)
    :precondition (at ?b ?r)
    :poss-precondition (and (:weight 0.9 (light ?b)) (:when (= ?b b1) (free)))
    :effect (not (at ?b ?r))
    :poss-effect (and (:depends (?r) (dirty ?b)) (not (free)) (:weight 1/3 (not (light ?b))))))
"#;

    #[test]
    fn domain_round_trip() {
        let d = parse_domain(DOMAIN).unwrap();
        let text = serialize_domain(&d);
        let again = parse_domain(&text).unwrap();
        assert_eq!(d, again);
        assert_eq!(serialize_domain(&again), text);
    }

    #[test]
    fn default_weight_has_no_marker() {
        let d = parse_domain(DOMAIN).unwrap();
        let text = serialize_domain(&d);
        assert!(text.contains("(:weight 0.9 (light ?b))"));
        assert!(text.contains("(:weight 1/3 (not (light ?b)))"));
        assert!(text.contains("(:depends (?r) (dirty ?b))"));
        assert!(!text.contains("0.5"));
    }

    #[test]
    fn problem_and_plan_round_trip() {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain d) (:objects r1 r2 - room) (:init (at b1 r1)) (:goal (and)) (:rho 0.25))",
            &d,
        )
        .unwrap();
        assert_eq!(parse_problem(&serialize_problem(&p), &d).unwrap(), p);
        let plan = parse_plan("(pick b1 r1)\n(pick b1 r2)\n").unwrap();
        assert_eq!(serialize_plan(&plan), "(pick b1 r1)\n(pick b1 r2)\n");
    }
}
