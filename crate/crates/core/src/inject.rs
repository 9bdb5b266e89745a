//! Random incompleteness injection into a complete domain.
//!
//! Fresh 0-ary propositions, all true initially, are attached to action
//! schemas as possible preconditions or effects, and some as certain adds
//! or deletes. No fresh proposition becomes a certain precondition or part
//! of the goal, so in the completion with no possible precondition realized
//! every original plan behaves exactly as before.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Annotation, AnnotationKind, Atom, IncompleteDomain, PredicateDecl, ProblemSpec, Proposition, Scope};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InjectError {
    #[error("at least one proposition must be injected, got {0}")]
    TooFew(usize),
    #[error("domain has no actions to annotate")]
    NoActions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    None,
    PossPre,
    PossAdd,
    PossDel,
    Add,
    Del,
}

/// Relative frequencies of the roles a fresh proposition takes in one
/// schema.
const ROLES: [(Role, u32); 6] =
    [(Role::None, 4), (Role::PossPre, 2), (Role::PossAdd, 1), (Role::PossDel, 1), (Role::Add, 1), (Role::Del, 1)];

fn draw(rng: &mut ChaCha8Rng) -> Role {
    let total: u32 = ROLES.iter().map(|r| r.1).sum();
    let mut x = rng.gen_range(0..total);
    for (role, w) in ROLES {
        if x < w {
            return role;
        }
        x -= w;
    }
    unreachable!("draw below total weight")
}

fn fresh_name(domain: &IncompleteDomain, k: usize) -> String {
    let mut name = format!("inj{k}");
    while domain.predicate(&name).is_some() {
        name.push('_');
    }
    name
}

/// Adds `m` fresh propositions to the domain and makes them true in the
/// problem's initial state. Deterministic given `seed`.
pub fn inject(
    domain: &IncompleteDomain,
    problem: &ProblemSpec,
    m: usize,
    seed: u64,
) -> Result<(IncompleteDomain, ProblemSpec), InjectError> {
    if m < 1 {
        return Err(InjectError::TooFew(m));
    }
    if domain.actions.is_empty() {
        return Err(InjectError::NoActions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = domain.clone();
    let mut p = problem.clone();
    for k in 0..m {
        let name = fresh_name(&d, k + 1);
        d.predicates.push(PredicateDecl { name: name.clone(), params: Vec::new() });
        p.init.insert(Proposition::new::<&str>(name.clone(), []));
        let atom = Atom::new(name, Vec::new());

        let mut roles: Vec<Role> = (0..d.actions.len()).map(|_| draw(&mut rng)).collect();
        let annotated = |r: &Role| matches!(r, Role::PossPre | Role::PossAdd | Role::PossDel);
        if !roles.iter().any(annotated) {
            let i = rng.gen_range(0..roles.len());
            roles[i] = Role::PossPre;
        }
        for (action, role) in d.actions.iter_mut().zip(roles) {
            let poss = |kind| Annotation::new(atom.clone(), kind, None, Scope::Schema);
            match role {
                Role::None => {}
                Role::PossPre => action.annotations.insert(0, poss(AnnotationKind::Pre)),
                Role::PossAdd => action.annotations.push(poss(AnnotationKind::Add)),
                Role::PossDel => action.annotations.push(poss(AnnotationKind::Del)),
                Role::Add => {
                    action.add.insert(atom.clone());
                }
                Role::Del => {
                    action.del.insert(atom.clone());
                }
            }
        }
    }
    // keep possible preconditions ahead of effects, the order the parser produces
    for a in &mut d.actions {
        a.annotations.sort_by_key(|x| x.kind != AnnotationKind::Pre);
    }
    Ok((d, p))
}
