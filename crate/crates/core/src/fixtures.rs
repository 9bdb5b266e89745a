//! Bundled example models.

use std::fmt::Write as _;

use crate::grounding::{ground, GroundError, GroundModel};
use crate::parser::{parse_domain, parse_problem, ParseError};

pub const FIG1_DOMAIN: &str = include_str!("../fixtures/fig1.ipddl");
pub const FIG1_WEIGHTED_DOMAIN: &str = include_str!("../fixtures/fig1-weighted.ipddl");
pub const FIG1_PROBLEM: &str = include_str!("../fixtures/fig1.ipprob");
pub const FIG1_PLAN: &str = include_str!("../fixtures/fig1.plan");

pub const GRIPPER_DOMAIN: &str = include_str!("../fixtures/gripper.ipddl");
pub const GRIPPER_PROBLEM: &str = include_str!("../fixtures/gripper.ipprob");
pub const GRIPPER_PLAN: &str = include_str!("../fixtures/gripper.plan");

pub const MINI_LOGISTICS_DOMAIN: &str = include_str!("../fixtures/mini-logistics.ipddl");

pub const TOY_DOMAIN: &str = include_str!("../fixtures/toy.ipddl");
pub const TOY_PROBLEM: &str = include_str!("../fixtures/toy.ipprob");
pub const TOY_PLAN: &str = include_str!("../fixtures/toy.plan");

/// Weight with which the robots of one manufacturer fail to load.
pub const FAULT_WEIGHT: (i64, i64) = (7, 10);

/// Mini-logistics problem with `m` robots, one per manufacturer. The most
/// robust plan loads with every robot, which succeeds with probability
/// `1 - 0.7^m`.
pub fn mini_logistics_problem(m: usize) -> String {
    let robots: Vec<String> = (1..=m).map(|j| format!("r{j}")).collect();
    let makers: Vec<String> = (1..=m).map(|j| format!("m{j}")).collect();
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem mini-logistics-m{m})");
    out.push_str("  (:domain mini-logistics)\n");
    let _ = writeln!(
        out,
        "  (:objects airport downtown - location {} - robot {} - manufacturer c1 - container t1 - truck)",
        robots.join(" "),
        makers.join(" ")
    );
    out.push_str("  (:init\n    (road airport downtown) (road downtown airport)\n");
    out.push_str("    (truck-at t1 downtown) (container-at c1 downtown)");
    for j in 1..=m {
        let _ = write!(out, "\n    (robot-at r{j} airport) (made-by r{j} m{j})");
    }
    out.push_str(")\n  (:goal (container-at c1 airport)))\n");
    out
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

/// Parses and grounds a domain and problem text.
pub fn load(domain: &str, problem: &str) -> Result<GroundModel, FixtureError> {
    let d = parse_domain(domain)?;
    let p = parse_problem(problem, &d)?;
    Ok(ground(&d, &p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_problems_match_generator() {
        let shipped = [
            include_str!("../fixtures/mini-logistics-m1.ipprob"),
            include_str!("../fixtures/mini-logistics-m2.ipprob"),
            include_str!("../fixtures/mini-logistics-m3.ipprob"),
        ];
        for (i, text) in shipped.iter().enumerate() {
            assert_eq!(*text, mini_logistics_problem(i + 1));
        }
    }

    #[test]
    fn all_fixtures_ground() {
        load(FIG1_DOMAIN, FIG1_PROBLEM).unwrap();
        load(FIG1_WEIGHTED_DOMAIN, FIG1_PROBLEM).unwrap();
        load(GRIPPER_DOMAIN, GRIPPER_PROBLEM).unwrap();
        load(TOY_DOMAIN, TOY_PROBLEM).unwrap();
        for m in 1..=3 {
            let model = load(MINI_LOGISTICS_DOMAIN, &mini_logistics_problem(m)).unwrap();
            assert_eq!(model.vars.len(), m);
        }
    }
}
