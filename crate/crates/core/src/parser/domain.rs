use num::BigRational;

use super::sexpr::{read_all, SExpr, SourceSpan};
use super::{parse_rational, ParseError};
use crate::model::{
    ActionSchema, Annotation, AnnotationKind, Atom, Constraint, ConstraintTerm, IncompleteDomain, PredicateDecl,
    Scope, Term, TypedName, OBJECT_TYPE,
};

/// Parses an incomplete domain. Missing annotation weights become 1/2.
///
/// Name resolution (predicates, arities, parameters, constants) is checked
/// here; weight bounds and certain/possible overlap are left to
/// [`crate::model::validate_domain`].
pub fn parse_domain(text: &str) -> Result<IncompleteDomain, ParseError> {
    let exprs = read_all(text)?;
    let body = single_define(&exprs, "domain")?;
    let name = define_name(body, "domain")?;

    let mut domain = IncompleteDomain {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };

    // Declarations first so that action bodies can be resolved regardless
    // of section order.
    let mut action_exprs = Vec::new();
    for section in &body[2..] {
        let items = expect_list(section, "domain section")?;
        match section.head() {
            Some(":requirements") => {
                for r in &items[1..] {
                    domain.requirements.push(expect_symbol(r, "requirement")?.to_string());
                }
            }
            Some(":types") => {
                domain.types = parse_typed_list(&items[1..], NameKind::Name)?;
            }
            Some(":constants") => {
                domain.constants = parse_typed_list(&items[1..], NameKind::Name)?;
            }
            Some(":predicates") => {
                for p in &items[1..] {
                    let pitems = expect_list(p, "predicate declaration")?;
                    let pname = pitems
                        .first()
                        .ok_or_else(|| ParseError::syntax("empty predicate declaration", p.span()))
                        .and_then(|s| expect_name(s, "predicate name"))?;
                    let params = parse_typed_list(&pitems[1..], NameKind::Variable)?;
                    domain.predicates.push(PredicateDecl { name: pname.to_string(), params });
                }
            }
            Some(":action") => action_exprs.push(section),
            Some(":functions") | Some(":durative-action") | Some(":derived") => {
                return Err(ParseError::syntax(
                    format!("unsupported section `{}`", section.head().unwrap_or_default()),
                    section.span(),
                ))
            }
            Some(other) => {
                return Err(ParseError::syntax(format!("unknown domain section `{other}`"), section.span()));
            }
            None => return Err(ParseError::syntax("expected a section keyword", section.span())),
        }
    }

    for t in &domain.types {
        if !domain.has_type(&t.ty) {
            return Err(ParseError::semantic(
                format!("type `{}` has undeclared parent `{}`", t.name, t.ty),
                &SourceSpan::default(),
            ));
        }
    }

    for a in action_exprs {
        let action = parse_action(a, &domain)?;
        domain.actions.push(action);
    }
    Ok(domain)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum NameKind {
    Variable,
    Name,
}

pub(super) fn single_define<'a>(exprs: &'a [SExpr], what: &str) -> Result<&'a [SExpr], ParseError> {
    let first = match exprs {
        [only] => only,
        [] => return Err(ParseError::syntax(format!("empty input, expected a {what} definition"), &SourceSpan::new(1, 1))),
        [_, extra, ..] => {
            return Err(ParseError::syntax("unexpected text after the definition", extra.span()));
        }
    };
    if first.head() != Some("define") {
        return Err(ParseError::syntax("expected `(define ...)`", first.span()));
    }
    let body = first.as_list().unwrap_or_default();
    if body.len() < 2 {
        return Err(ParseError::syntax(format!("missing `({what} <name>)`"), first.span()));
    }
    Ok(body)
}

pub(super) fn define_name(body: &[SExpr], what: &str) -> Result<String, ParseError> {
    let header = &body[1];
    match header.as_list() {
        Some([kw, name]) if kw.as_symbol() == Some(what) => Ok(expect_name(name, "name")?.to_string()),
        _ => Err(ParseError::syntax(format!("expected `({what} <name>)`"), header.span())),
    }
}

pub(super) fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], ParseError> {
    e.as_list().ok_or_else(|| ParseError::syntax(format!("expected a list for {what}"), e.span()))
}

pub(super) fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_symbol().ok_or_else(|| ParseError::syntax(format!("expected a symbol for {what}"), e.span()))
}

/// A plain name: not a variable, keyword or list.
pub(super) fn expect_name<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    let s = expect_symbol(e, what)?;
    if s.starts_with('?') || s.starts_with(':') || s == "-" {
        return Err(ParseError::syntax(format!("`{s}` is not a valid {what}"), e.span()));
    }
    Ok(s)
}

fn expect_variable<'a>(e: &'a SExpr) -> Result<&'a str, ParseError> {
    let s = expect_symbol(e, "variable")?;
    match s.strip_prefix('?') {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(ParseError::syntax(format!("expected a `?variable`, found `{s}`"), e.span())),
    }
}

/// `a b - t c - u d` → [(a,t), (b,t), (c,u), (d,object)].
pub(super) fn parse_typed_list(items: &[SExpr], kind: NameKind) -> Result<Vec<TypedName>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_symbol() == Some("-") {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| ParseError::syntax("missing type after `-`", item.span()))?;
            if ty.head() == Some("either") {
                return Err(ParseError::syntax("`either` types are not supported", ty.span()));
            }
            let ty = expect_name(ty, "type name")?;
            if pending.is_empty() {
                return Err(ParseError::syntax("type annotation without names", item.span()));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
            i += 2;
            continue;
        }
        let name = match kind {
            NameKind::Variable => expect_variable(item)?,
            NameKind::Name => expect_name(item, "name")?,
        };
        pending.push(name.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, OBJECT_TYPE)));
    Ok(out)
}

/// Parses `(pred t1 ...)` with variables and constants as arguments.
pub(super) fn parse_lifted_atom(e: &SExpr) -> Result<Atom, ParseError> {
    let items = expect_list(e, "atom")?;
    let pred = items
        .first()
        .ok_or_else(|| ParseError::syntax("empty atom", e.span()))
        .and_then(|p| expect_name(p, "predicate"))?;
    if matches!(pred, "and" | "or" | "not" | "imply" | "forall" | "exists" | "when" | "=") {
        return Err(ParseError::syntax(format!("expected an atom, found `{pred}` formula"), e.span()));
    }
    let args = items[1..]
        .iter()
        .map(|a| {
            let s = expect_symbol(a, "argument")?;
            match s.strip_prefix('?') {
                Some(v) if !v.is_empty() => Ok(Term::Var(v.to_string())),
                Some(_) => Err(ParseError::syntax("empty variable name", a.span())),
                None => Ok(Term::Const(expect_name(a, "constant")?.to_string())),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(pred, args))
}

struct ActionScope<'a> {
    domain: &'a IncompleteDomain,
    action: &'a str,
    params: &'a [TypedName],
}

impl ActionScope<'_> {
    fn has_param(&self, v: &str) -> bool {
        self.params.iter().any(|p| p.name == v)
    }

    fn check_param(&self, v: &str, span: &SourceSpan) -> Result<(), ParseError> {
        if self.has_param(v) {
            Ok(())
        } else {
            Err(ParseError::semantic(format!("unbound variable ?{v} in action `{}`", self.action), span))
        }
    }

    fn resolve_atom(&self, e: &SExpr) -> Result<Atom, ParseError> {
        let atom = parse_lifted_atom(e)?;
        let decl = self
            .domain
            .predicate(&atom.predicate)
            .ok_or_else(|| ParseError::semantic(format!("unknown predicate `{}`", atom.predicate), e.span()))?;
        if decl.arity() != atom.args.len() {
            return Err(ParseError::semantic(
                format!(
                    "arity mismatch: `{}` takes {} argument(s), found {}",
                    atom.predicate,
                    decl.arity(),
                    atom.args.len()
                ),
                e.span(),
            ));
        }
        for t in &atom.args {
            match t {
                Term::Var(v) => self.check_param(v, e.span())?,
                Term::Const(c) => {
                    if !self.domain.constants.iter().any(|k| &k.name == c) {
                        return Err(ParseError::semantic(format!("undeclared constant `{c}`"), e.span()));
                    }
                }
            }
        }
        Ok(atom)
    }
}

fn parse_action(e: &SExpr, domain: &IncompleteDomain) -> Result<ActionSchema, ParseError> {
    let items = expect_list(e, "action")?;
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::syntax("missing action name", e.span()))
        .and_then(|n| expect_name(n, "action name"))?;

    let mut params = Vec::new();
    let mut fields: Vec<(&str, &SExpr)> = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = expect_symbol(&items[i], "action field")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| ParseError::syntax(format!("missing value for `{key}`"), items[i].span()))?;
        match key {
            ":parameters" => params = parse_typed_list(expect_list(value, "parameters")?, NameKind::Variable)?,
            ":precondition" | ":effect" | ":poss-precondition" | ":poss-effect" => {
                if fields.iter().any(|(k, _)| *k == key) {
                    return Err(ParseError::syntax(format!("duplicate `{key}`"), items[i].span()));
                }
                fields.push((key, value));
            }
            other => {
                return Err(ParseError::syntax(format!("unknown action field `{other}`"), items[i].span()));
            }
        }
        i += 2;
    }

    let scope = ActionScope { domain, action: name, params: &params };
    let mut action = ActionSchema::new(name, params.clone());
    for (key, value) in fields.iter().copied() {
        match key {
            ":precondition" => {
                for g in conjuncts(value)? {
                    if g.head() == Some("not") {
                        return Err(ParseError::syntax("negative preconditions are not supported", g.span()));
                    }
                    action.pre.insert(scope.resolve_atom(g)?);
                }
            }
            ":effect" => {
                for lit in conjuncts(value)? {
                    match lit.head() {
                        Some("not") => action.del.insert(scope.resolve_atom(negated(lit)?)?),
                        Some("when") | Some("forall") | Some("probabilistic") | Some("increase") => {
                            return Err(ParseError::syntax(
                                format!("`{}` effects are not supported", lit.head().unwrap_or_default()),
                                lit.span(),
                            ));
                        }
                        _ => action.add.insert(scope.resolve_atom(lit)?),
                    };
                }
            }
            _ => {}
        }
    }
    // Possible preconditions precede possible effects in the stored order.
    for (key, value) in fields.iter().copied() {
        if key == ":poss-precondition" {
            for entry in conjuncts(value)? {
                action.annotations.push(parse_entry(entry, &scope, EntrySlot::Precondition)?.finish());
            }
        }
    }
    for (key, value) in fields.iter().copied() {
        if key == ":poss-effect" {
            for entry in conjuncts(value)? {
                action.annotations.push(parse_entry(entry, &scope, EntrySlot::Effect)?.finish());
            }
        }
    }
    Ok(action)
}

/// Flattens `(and x y)`, `()` or a single item into a list of items.
pub(super) fn conjuncts(e: &SExpr) -> Result<Vec<&SExpr>, ParseError> {
    let items = expect_list(e, "formula")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if e.head() == Some("and") {
        let mut out = Vec::new();
        for item in &items[1..] {
            out.extend(conjuncts(item)?);
        }
        Ok(out)
    } else {
        Ok(vec![e])
    }
}

fn negated(e: &SExpr) -> Result<&SExpr, ParseError> {
    match e.as_list() {
        Some([_, inner]) => Ok(inner),
        _ => Err(ParseError::syntax("`not` takes exactly one atom", e.span())),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EntrySlot {
    Precondition,
    Effect,
}

struct EntryBuilder {
    literal: Atom,
    kind: AnnotationKind,
    weight: Option<BigRational>,
    scope: Option<Scope>,
}

impl EntryBuilder {
    fn finish(self) -> Annotation {
        Annotation::new(self.literal, self.kind, self.weight, self.scope.unwrap_or(Scope::Schema))
    }
}

fn parse_entry(e: &SExpr, scope: &ActionScope<'_>, slot: EntrySlot) -> Result<EntryBuilder, ParseError> {
    let items = expect_list(e, "annotation entry")?;
    match e.head() {
        Some(":weight") => {
            let [_, w, inner] = items else {
                return Err(ParseError::syntax("expected `(:weight <w> <entry>)`", e.span()));
            };
            let wtext = expect_symbol(w, "weight")?;
            let weight = parse_rational(wtext)
                .ok_or_else(|| ParseError::syntax(format!("invalid weight `{wtext}`"), w.span()))?;
            let mut b = parse_entry(inner, scope, slot)?;
            if b.weight.is_some() {
                return Err(ParseError::syntax("weight given twice", e.span()));
            }
            b.weight = Some(weight);
            Ok(b)
        }
        Some(":when") => {
            let [_, c, inner] = items else {
                return Err(ParseError::syntax("expected `(:when <constraint> <entry>)`", e.span()));
            };
            let constraint = parse_constraint(c, scope)?;
            let mut b = parse_entry(inner, scope, slot)?;
            if b.scope.is_some() {
                return Err(ParseError::syntax("an entry takes at most one `:when`/`:depends` scope", e.span()));
            }
            b.scope = Some(Scope::When(constraint));
            Ok(b)
        }
        Some(":depends") => {
            let [_, vars, inner] = items else {
                return Err(ParseError::syntax("expected `(:depends (?v ...) <entry>)`", e.span()));
            };
            let mut names = Vec::new();
            for v in expect_list(vars, "`:depends` variables")? {
                let name = expect_variable(v)?;
                scope.check_param(name, v.span())?;
                if !names.iter().any(|n| n == name) {
                    names.push(name.to_string());
                }
            }
            let mut b = parse_entry(inner, scope, slot)?;
            if b.scope.is_some() {
                return Err(ParseError::syntax("an entry takes at most one `:when`/`:depends` scope", e.span()));
            }
            b.scope = Some(Scope::Depends(names));
            Ok(b)
        }
        Some(":tandem") | Some(":correlated") => Err(ParseError::semantic(
            "correlated annotations across schemas are not supported",
            e.span(),
        )),
        Some("not") => {
            if slot == EntrySlot::Precondition {
                return Err(ParseError::syntax("negative possible preconditions are not supported", e.span()));
            }
            Ok(EntryBuilder {
                literal: scope.resolve_atom(negated(e)?)?,
                kind: AnnotationKind::Del,
                weight: None,
                scope: None,
            })
        }
        Some(kw) if kw.starts_with(':') => {
            Err(ParseError::syntax(format!("unknown annotation modifier `{kw}`"), e.span()))
        }
        _ => Ok(EntryBuilder {
            literal: scope.resolve_atom(e)?,
            kind: match slot {
                EntrySlot::Precondition => AnnotationKind::Pre,
                EntrySlot::Effect => AnnotationKind::Add,
            },
            weight: None,
            scope: None,
        }),
    }
}

fn parse_constraint(e: &SExpr, scope: &ActionScope<'_>) -> Result<Constraint, ParseError> {
    let mut terms = Vec::new();
    for c in conjuncts(e)? {
        terms.push(parse_constraint_term(c, scope, false)?);
    }
    if terms.is_empty() {
        return Err(ParseError::syntax("empty `:when` constraint", e.span()));
    }
    Ok(Constraint(terms))
}

fn parse_constraint_term(e: &SExpr, scope: &ActionScope<'_>, negate: bool) -> Result<ConstraintTerm, ParseError> {
    let items = expect_list(e, "constraint")?;
    match e.head() {
        Some("not") if !negate => parse_constraint_term(negated(e)?, scope, true),
        Some("=") => {
            let [_, v, c] = items else {
                return Err(ParseError::syntax("expected `(= ?var constant)`", e.span()));
            };
            let var = expect_variable(v)?;
            scope.check_param(var, v.span())?;
            let value = expect_name(c, "constant")?.to_string();
            Ok(if negate {
                ConstraintTerm::Neq(var.to_string(), value)
            } else {
                ConstraintTerm::Eq(var.to_string(), value)
            })
        }
        Some("in") => {
            if items.len() < 3 {
                return Err(ParseError::syntax("expected `(in ?var c1 c2 ...)`", e.span()));
            }
            let var = expect_variable(&items[1])?;
            scope.check_param(var, items[1].span())?;
            let mut set: Vec<String> = Vec::new();
            for c in &items[2..] {
                let c = expect_name(c, "constant")?;
                if !set.iter().any(|s| s == c) {
                    set.push(c.to_string());
                }
            }
            Ok(if negate {
                ConstraintTerm::NotIn(var.to_string(), set)
            } else {
                ConstraintTerm::In(var.to_string(), set)
            })
        }
        _ => Err(ParseError::syntax(
            "constraints are conjunctions of `(= ?v c)`, `(in ?v c ...)` and their negations",
            e.span(),
        )),
    }
}
