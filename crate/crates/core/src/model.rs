//! Core domain types for incomplete STRIPS models.
//!
//! Everything here is an immutable value once constructed. Lifted atoms use
//! [`Term`] arguments; ground propositions use plain object names.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num::{BigInt, BigRational, One, Zero};

/// Root of the type hierarchy; untyped names get this type.
pub const OBJECT_TYPE: &str = "object";

/// Argument of a lifted atom: a schema parameter or a constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Parameter name, stored without the leading `?`.
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

/// Lifted atom `(pred t1 ... tn)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    /// Substitutes parameters; `None` if a variable is unbound.
    pub fn ground(&self, binding: &HashMap<&str, &str>) -> Option<Proposition> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => binding.get(v.as_str()).map(|c| c.to_string()),
                Term::Const(c) => Some(c.clone()),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Proposition { predicate: self.predicate.clone(), args })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Ground proposition over constants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proposition {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Proposition {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Proposition {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A name with its declared type (`?b - ball`, `b1 - ball`, `ball - object`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName { name: name.into(), ty: ty.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnnotationKind {
    Pre,
    Add,
    Del,
}

impl AnnotationKind {
    pub const ALL: [AnnotationKind; 3] = [AnnotationKind::Pre, AnnotationKind::Add, AnnotationKind::Del];

    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Pre => "pre",
            AnnotationKind::Add => "add",
            AnnotationKind::Del => "del",
        }
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One conjunct of a `:when` constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintTerm {
    Eq(String, String),
    Neq(String, String),
    In(String, Vec<String>),
    NotIn(String, Vec<String>),
}

impl ConstraintTerm {
    pub fn var(&self) -> &str {
        match self {
            ConstraintTerm::Eq(v, _)
            | ConstraintTerm::Neq(v, _)
            | ConstraintTerm::In(v, _)
            | ConstraintTerm::NotIn(v, _) => v,
        }
    }

    pub fn constants(&self) -> Vec<&str> {
        match self {
            ConstraintTerm::Eq(_, c) | ConstraintTerm::Neq(_, c) => vec![c.as_str()],
            ConstraintTerm::In(_, cs) | ConstraintTerm::NotIn(_, cs) => cs.iter().map(String::as_str).collect(),
        }
    }

    fn holds(&self, binding: &HashMap<&str, &str>) -> Option<bool> {
        let value = *binding.get(self.var())?;
        Some(match self {
            ConstraintTerm::Eq(_, c) => value == c,
            ConstraintTerm::Neq(_, c) => value != c,
            ConstraintTerm::In(_, cs) => cs.iter().any(|c| c == value),
            ConstraintTerm::NotIn(_, cs) => cs.iter().all(|c| c != value),
        })
    }
}

impl fmt::Display for ConstraintTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintTerm::Eq(v, c) => write!(f, "(= ?{v} {c})"),
            ConstraintTerm::Neq(v, c) => write!(f, "(not (= ?{v} {c}))"),
            ConstraintTerm::In(v, cs) => write!(f, "(in ?{v} {})", cs.join(" ")),
            ConstraintTerm::NotIn(v, cs) => write!(f, "(not (in ?{v} {}))", cs.join(" ")),
        }
    }
}

/// Conjunction of [`ConstraintTerm`]s over schema parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Constraint(pub Vec<ConstraintTerm>);

impl Constraint {
    /// `None` when the binding does not cover every constrained variable.
    pub fn holds(&self, binding: &HashMap<&str, &str>) -> Option<bool> {
        let mut all = true;
        for t in &self.0 {
            all &= t.holds(binding)?;
        }
        Some(all)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [single] => write!(f, "{single}"),
            terms => {
                f.write_str("(and")?;
                for t in terms {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// How ground instances of one annotation share realization variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    /// One variable for every instance of the schema.
    Schema,
    /// Only instances whose binding satisfies the constraint carry the
    /// annotation; they all share one variable.
    When(Constraint),
    /// One variable per distinct assignment of the listed parameters.
    Depends(Vec<String>),
}

/// A possible precondition, add or delete effect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub literal: Atom,
    pub kind: AnnotationKind,
    pub weight: BigRational,
    pub scope: Scope,
}

impl Annotation {
    /// Builds an annotation, materializing a missing weight as 1/2.
    pub fn new(literal: Atom, kind: AnnotationKind, weight: Option<BigRational>, scope: Scope) -> Self {
        Annotation { literal, kind, weight: weight.unwrap_or_else(default_weight), scope }
    }
}

/// Weight assumed for annotations that do not state one.
pub fn default_weight() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: BTreeSet<Atom>,
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
    /// Possible preconditions and effects in source order.
    pub annotations: Vec<Annotation>,
}

impl ActionSchema {
    pub fn new(name: impl Into<String>, params: Vec<TypedName>) -> Self {
        ActionSchema {
            name: name.into(),
            params,
            pre: BTreeSet::new(),
            add: BTreeSet::new(),
            del: BTreeSet::new(),
            annotations: Vec::new(),
        }
    }

    pub fn possible(&self, kind: AnnotationKind) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(move |a| a.kind == kind)
    }

    pub fn certain(&self, kind: AnnotationKind) -> &BTreeSet<Atom> {
        match kind {
            AnnotationKind::Pre => &self.pre,
            AnnotationKind::Add => &self.add,
            AnnotationKind::Del => &self.del,
        }
    }

    pub fn has_param(&self, var: &str) -> bool {
        self.params.iter().any(|p| p.name == var)
    }
}

/// Lifted incomplete domain: types, constants, predicates and schemas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompleteDomain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent, in declaration order.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl IncompleteDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == OBJECT_TYPE || self.types.iter().any(|t| t.name == ty)
    }

    /// Parent of a declared type; `object` has none.
    pub fn parent_type(&self, ty: &str) -> Option<&str> {
        if ty == OBJECT_TYPE {
            return None;
        }
        self.types.iter().find(|t| t.name == ty).map(|t| t.ty.as_str())
    }

    /// True when `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = Some(ty);
        let mut hops = 0;
        while let Some(t) = cur {
            if t == ancestor {
                return true;
            }
            hops += 1;
            if hops > self.types.len() + 1 {
                return false;
            }
            cur = self.parent_type(t);
        }
        false
    }

    pub fn annotation_count(&self) -> usize {
        self.actions.iter().map(|a| a.annotations.len()).sum()
    }
}

/// Planning problem over an incomplete domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: BTreeSet<Proposition>,
    pub goal: BTreeSet<Proposition>,
    /// Robustness threshold, when the file carries one.
    pub rho: Option<BigRational>,
}

/// One step of an unresolved plan, `(name arg1 ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        PlanStep { name: name.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A violated model invariant, attributed to the item it concerns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    fn error(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, subject: subject.into(), message: message.into() }
    }

    fn warning(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, subject: subject.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.subject, self.message)
    }
}

/// Checks every model invariant and returns the violations found.
///
/// Errors break grounding or semantics; warnings flag legal but suspicious
/// models (a literal that is both a possible add and a possible delete of
/// the same schema).
pub fn validate_domain(domain: &IncompleteDomain) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut seen_types = HashSet::new();
    for t in &domain.types {
        if t.name == OBJECT_TYPE {
            continue;
        }
        if !seen_types.insert(t.name.as_str()) {
            out.push(Diagnostic::error(format!("type {}", t.name), "declared twice"));
        }
        if !domain.has_type(&t.ty) {
            out.push(Diagnostic::error(format!("type {}", t.name), format!("unknown parent type `{}`", t.ty)));
        } else if domain.is_subtype(&t.ty, &t.name) {
            out.push(Diagnostic::error(format!("type {}", t.name), "cyclic type hierarchy"));
        }
    }

    for c in &domain.constants {
        if !domain.has_type(&c.ty) {
            out.push(Diagnostic::error(format!("constant {}", c.name), format!("unknown type `{}`", c.ty)));
        }
    }

    let mut seen_preds = HashSet::new();
    for p in &domain.predicates {
        if !seen_preds.insert(p.name.as_str()) {
            out.push(Diagnostic::error(format!("predicate {}", p.name), "declared twice"));
        }
        for param in &p.params {
            if !domain.has_type(&param.ty) {
                out.push(Diagnostic::error(
                    format!("predicate {}", p.name),
                    format!("unknown type `{}`", param.ty),
                ));
            }
        }
    }

    let constants: HashSet<&str> = domain.constants.iter().map(|c| c.name.as_str()).collect();
    let mut seen_actions = HashSet::new();
    for action in &domain.actions {
        let subject = format!("action {}", action.name);
        if !seen_actions.insert(action.name.as_str()) {
            out.push(Diagnostic::error(&subject, "declared twice"));
        }
        let mut seen_params = HashSet::new();
        for p in &action.params {
            if !seen_params.insert(p.name.as_str()) {
                out.push(Diagnostic::error(&subject, format!("parameter ?{} declared twice", p.name)));
            }
            if !domain.has_type(&p.ty) {
                out.push(Diagnostic::error(&subject, format!("parameter ?{} has unknown type `{}`", p.name, p.ty)));
            }
        }

        let check_atom = |atom: &Atom, out: &mut Vec<Diagnostic>| {
            match domain.predicate(&atom.predicate) {
                None => out.push(Diagnostic::error(&subject, format!("unknown predicate in {atom}"))),
                Some(decl) if decl.arity() != atom.args.len() => out.push(Diagnostic::error(
                    &subject,
                    format!("arity mismatch in {atom}: `{}` takes {}", decl.name, decl.arity()),
                )),
                Some(_) => {}
            }
            for t in &atom.args {
                match t {
                    Term::Var(v) if !action.has_param(v) => {
                        out.push(Diagnostic::error(&subject, format!("unbound variable ?{v} in {atom}")))
                    }
                    Term::Const(c) if !constants.contains(c.as_str()) => {
                        out.push(Diagnostic::error(&subject, format!("undeclared constant `{c}` in {atom}")))
                    }
                    _ => {}
                }
            }
        };

        for kind in AnnotationKind::ALL {
            for atom in action.certain(kind) {
                check_atom(atom, &mut out);
            }
        }

        let mut seen_ann = Vec::new();
        for ann in &action.annotations {
            check_atom(&ann.literal, &mut out);
            if ann.weight <= BigRational::zero() || ann.weight >= BigRational::one() {
                out.push(Diagnostic::error(
                    &subject,
                    format!("weight out of open interval (0,1): {} on {} {}", ann.weight, ann.kind, ann.literal),
                ));
            }
            if action.certain(ann.kind).contains(&ann.literal) {
                out.push(Diagnostic::error(
                    &subject,
                    format!("certain/possible overlap: {} is both a certain and a possible {}", ann.literal, ann.kind),
                ));
            }
            match &ann.scope {
                Scope::Schema => {}
                Scope::When(c) => {
                    for t in &c.0 {
                        if !action.has_param(t.var()) {
                            out.push(Diagnostic::error(
                                &subject,
                                format!("`:when` constrains unknown parameter ?{}", t.var()),
                            ));
                        }
                    }
                }
                Scope::Depends(vars) => {
                    for v in vars {
                        if !action.has_param(v) {
                            out.push(Diagnostic::error(&subject, format!("`:depends` names unknown parameter ?{v}")));
                        }
                    }
                }
            }
            let key = (&ann.literal, ann.kind, &ann.scope);
            if seen_ann.contains(&key) {
                out.push(Diagnostic::error(
                    &subject,
                    format!("duplicate possible {} annotation on {}", ann.kind, ann.literal),
                ));
            } else {
                seen_ann.push(key);
            }
        }

        for add in action.possible(AnnotationKind::Add) {
            if action.possible(AnnotationKind::Del).any(|d| d.literal == add.literal) {
                out.push(Diagnostic::warning(
                    &subject,
                    format!("{} is both a possible add and a possible delete", add.literal),
                ));
            }
        }
    }

    out
}

/// True when [`validate_domain`] reports no errors (warnings allowed).
pub fn is_well_formed(domain: &IncompleteDomain) -> bool {
    validate_domain(domain).iter().all(|d| !d.is_error())
}
