use std::collections::{BTreeSet, HashMap};

use num::{BigRational, One, Zero};

use super::domain::{
    conjuncts, define_name, expect_list, expect_name, expect_symbol, parse_lifted_atom, parse_typed_list,
    single_define, NameKind,
};
use super::sexpr::{read_all, SExpr};
use super::{parse_rational, ParseError};
use crate::model::{IncompleteDomain, ProblemSpec, Proposition, Term};

/// Parses a problem against its domain, resolving predicates and objects.
pub fn parse_problem(text: &str, domain: &IncompleteDomain) -> Result<ProblemSpec, ParseError> {
    let exprs = read_all(text)?;
    let body = single_define(&exprs, "problem")?;
    let name = define_name(body, "problem")?;

    let mut problem = ProblemSpec {
        name,
        domain: domain.name.clone(),
        objects: Vec::new(),
        init: BTreeSet::new(),
        goal: BTreeSet::new(),
        rho: None,
    };
    let mut init_exprs: Vec<&SExpr> = Vec::new();
    let mut goal_exprs: Vec<&SExpr> = Vec::new();

    for section in &body[2..] {
        let items = expect_list(section, "problem section")?;
        match section.head() {
            Some(":domain") => {
                let [_, d] = items else {
                    return Err(ParseError::syntax("expected `(:domain <name>)`", section.span()));
                };
                let d = expect_name(d, "domain name")?;
                if d != domain.name {
                    return Err(ParseError::semantic(
                        format!("problem is for domain `{d}`, not `{}`", domain.name),
                        section.span(),
                    ));
                }
            }
            Some(":objects") => problem.objects.extend(parse_typed_list(&items[1..], NameKind::Name)?),
            Some(":init") => init_exprs.extend(&items[1..]),
            Some(":goal") => {
                let [_, g] = items else {
                    return Err(ParseError::syntax("expected `(:goal <formula>)`", section.span()));
                };
                goal_exprs.extend(conjuncts(g)?);
            }
            Some(":rho") => {
                let [_, r] = items else {
                    return Err(ParseError::syntax("expected `(:rho <value>)`", section.span()));
                };
                let text = expect_symbol(r, "threshold")?;
                let rho = parse_rational(text)
                    .ok_or_else(|| ParseError::syntax(format!("invalid threshold `{text}`"), r.span()))?;
                if rho <= BigRational::zero() || rho > BigRational::one() {
                    return Err(ParseError::semantic("`:rho` must lie in (0, 1]", r.span()));
                }
                problem.rho = Some(rho);
            }
            Some(":metric") | Some(":requirements") => {}
            Some(other) => {
                return Err(ParseError::syntax(format!("unknown problem section `{other}`"), section.span()));
            }
            None => return Err(ParseError::syntax("expected a section keyword", section.span())),
        }
    }

    let mut types: HashMap<&str, &str> = HashMap::new();
    for c in &domain.constants {
        types.insert(&c.name, &c.ty);
    }
    for o in &problem.objects {
        if !domain.has_type(&o.ty) {
            return Err(ParseError::semantic(
                format!("object `{}` has undeclared type `{}`", o.name, o.ty),
                &body[1].span().clone(),
            ));
        }
        types.insert(&o.name, &o.ty);
    }

    let resolve = |e: &SExpr| -> Result<Proposition, ParseError> {
        if e.head() == Some("not") {
            return Err(ParseError::syntax("negative literals are not supported here", e.span()));
        }
        let atom = parse_lifted_atom(e)?;
        let decl = domain
            .predicate(&atom.predicate)
            .ok_or_else(|| ParseError::semantic(format!("unknown predicate `{}`", atom.predicate), e.span()))?;
        if decl.arity() != atom.args.len() {
            return Err(ParseError::semantic(
                format!("arity mismatch: `{}` takes {} argument(s)", atom.predicate, decl.arity()),
                e.span(),
            ));
        }
        let mut args = Vec::with_capacity(atom.args.len());
        for (t, param) in atom.args.iter().zip(&decl.params) {
            let Term::Const(c) = t else {
                return Err(ParseError::syntax("variables are not allowed in problem files", e.span()));
            };
            let ty = types
                .get(c.as_str())
                .ok_or_else(|| ParseError::semantic(format!("undeclared object `{c}`"), e.span()))?;
            if !domain.is_subtype(ty, &param.ty) {
                return Err(ParseError::semantic(
                    format!("object `{c}` of type `{ty}` used where `{}` is expected", param.ty),
                    e.span(),
                ));
            }
            args.push(c.clone());
        }
        Ok(Proposition { predicate: atom.predicate, args })
    };

    for e in init_exprs {
        problem.init.insert(resolve(e)?);
    }
    for e in goal_exprs {
        problem.goal.insert(resolve(e)?);
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_domain, ParseErrorKind};

    const FIG1: &str = r#"
(define (domain fig1)
  (:predicates (p1) (p2) (p3))
  (:action a1 :parameters () :poss-precondition (p1) :effect (and (p2) (p3)))
  (:action a2 :parameters () :precondition (p2) :poss-effect (and (p3) (not (p1)))))
"#;

    #[test]
    fn fig1_problem() {
        let d = parse_domain(FIG1).unwrap();
        let p = parse_problem(
            "(define (problem fig1-p) (:domain fig1) (:init (p2)) (:goal (p3)))",
            &d,
        )
        .unwrap();
        assert_eq!(p.init, BTreeSet::from([Proposition::new::<&str>("p2", [])]));
        assert_eq!(p.goal, BTreeSet::from([Proposition::new::<&str>("p3", [])]));
        assert_eq!(p.rho, None);
    }

    #[test]
    fn empty_init_and_rho() {
        let d = parse_domain(FIG1).unwrap();
        let p = parse_problem("(define (problem x) (:domain fig1) (:init) (:goal (and (p3))) (:rho 0.6))", &d).unwrap();
        assert!(p.init.is_empty());
        assert_eq!(p.rho, Some(BigRational::new(3.into(), 5.into())));
    }

    #[test]
    fn undeclared_goal_predicate_is_semantic() {
        let d = parse_domain(FIG1).unwrap();
        let err = parse_problem("(define (problem x) (:domain fig1) (:init) (:goal (p9)))", &d).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Semantic);
        assert!(err.message.contains("unknown predicate"));
    }

    #[test]
    fn wrong_domain_or_bad_rho() {
        let d = parse_domain(FIG1).unwrap();
        assert!(parse_problem("(define (problem x) (:domain other) (:init) (:goal (p3)))", &d).is_err());
        assert!(parse_problem("(define (problem x) (:domain fig1) (:goal (p3)) (:rho 1.5))", &d).is_err());
        assert!(parse_problem("(define (problem x) (:domain fig1) (:goal (p3)) (:rho 0))", &d).is_err());
    }
}
