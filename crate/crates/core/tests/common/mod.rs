//! Random micro-instances over 0-ary propositions and a brute-force oracle
//! that shares no code with the library: states are bit masks, completions
//! are bit masks over a flat list of annotations, and probabilities are
//! products of the listed weights.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use num::{BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rkit_core::fixtures::load;
use rkit_core::grounding::{GroundModel, ResolvedPlan};

pub const WEIGHTS: [(i64, i64); 4] = [(1, 4), (1, 2), (3, 4), (9, 10)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Pre,
    Add,
    Del,
}

#[derive(Clone, Debug)]
pub struct Poss {
    pub kind: Kind,
    pub prop: usize,
    pub weight: (i64, i64),
}

#[derive(Clone, Debug, Default)]
pub struct MicroAction {
    pub pre: u32,
    pub add: u32,
    pub del: u32,
    pub poss: Vec<Poss>,
}

#[derive(Clone, Debug)]
pub struct Micro {
    pub n: usize,
    pub actions: Vec<MicroAction>,
    pub init: u32,
    pub goal: u32,
}

fn ratio((n, d): (i64, i64)) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn lit(p: usize) -> String {
    format!("(p{p})")
}

impl Micro {
    pub fn random(rng: &mut ChaCha8Rng, max_props: usize, max_actions: usize, max_k: usize) -> Self {
        let n = rng.gen_range(2..=max_props);
        let m = rng.gen_range(1..=max_actions);
        let k_budget = rng.gen_range(0..=max_k);
        let mut k = 0;
        let mut actions = Vec::with_capacity(m);
        for _ in 0..m {
            let mut a = MicroAction::default();
            for p in 0..n {
                let bit = 1u32 << p;
                let poss = |a: &mut MicroAction, kind, k: &mut usize, rng: &mut ChaCha8Rng| {
                    if *k < k_budget {
                        *k += 1;
                        a.poss.push(Poss { kind, prop: p, weight: *WEIGHTS.choose(rng).unwrap() });
                    }
                };
                match rng.gen_range(0..6) {
                    0 | 1 => a.pre |= bit,
                    2 => poss(&mut a, Kind::Pre, &mut k, rng),
                    _ => {}
                }
                match rng.gen_range(0..10) {
                    0 | 1 => a.add |= bit,
                    2 | 3 => a.del |= bit,
                    4 => poss(&mut a, Kind::Add, &mut k, rng),
                    5 => poss(&mut a, Kind::Del, &mut k, rng),
                    6 => {
                        a.add |= bit;
                        poss(&mut a, Kind::Del, &mut k, rng);
                    }
                    7 => {
                        poss(&mut a, Kind::Add, &mut k, rng);
                        poss(&mut a, Kind::Del, &mut k, rng);
                    }
                    _ => {}
                }
            }
            actions.push(a);
        }
        let mask = (1u32 << n) - 1;
        let init = rng.gen::<u32>() & mask;
        let mut goal = rng.gen::<u32>() & mask & !init;
        if goal == 0 {
            goal = 1 << rng.gen_range(0..n);
        }
        Micro { n, actions, init, goal }
    }

    pub fn k(&self) -> usize {
        self.actions.iter().map(|a| a.poss.len()).sum()
    }

    /// Annotation weights in the oracle's variable order (action by action).
    pub fn weights(&self) -> Vec<BigRational> {
        self.actions.iter().flat_map(|a| a.poss.iter().map(|p| ratio(p.weight))).collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.actions.len());
        let mut acc = 0;
        for a in &self.actions {
            out.push(acc);
            acc += a.poss.len();
        }
        out
    }

    pub fn domain_text(&self) -> String {
        let mut s = String::from("(define (domain micro)\n  (:predicates");
        for p in 0..self.n {
            let _ = write!(s, " {}", lit(p));
        }
        s.push(')');
        for (i, a) in self.actions.iter().enumerate() {
            let _ = write!(s, "\n  (:action a{i} :parameters ()");
            let pre: Vec<String> = (0..self.n).filter(|p| a.pre >> p & 1 == 1).map(lit).collect();
            let _ = write!(s, "\n    :precondition (and {})", pre.join(" "));
            let entry = |x: &Poss| {
                let (n, d) = x.weight;
                let body = if x.kind == Kind::Del { format!("(not {})", lit(x.prop)) } else { lit(x.prop) };
                format!("(:weight {n}/{d} {body})")
            };
            let pp: Vec<String> = a.poss.iter().filter(|x| x.kind == Kind::Pre).map(entry).collect();
            if !pp.is_empty() {
                let _ = write!(s, "\n    :poss-precondition (and {})", pp.join(" "));
            }
            let mut eff: Vec<String> = (0..self.n).filter(|p| a.add >> p & 1 == 1).map(lit).collect();
            eff.extend((0..self.n).filter(|p| a.del >> p & 1 == 1).map(|p| format!("(not {})", lit(p))));
            let _ = write!(s, "\n    :effect (and {})", eff.join(" "));
            let pe: Vec<String> = a.poss.iter().filter(|x| x.kind != Kind::Pre).map(entry).collect();
            if !pe.is_empty() {
                let _ = write!(s, "\n    :poss-effect (and {})", pe.join(" "));
            }
            s.push(')');
        }
        s.push_str(")\n");
        s
    }

    pub fn problem_text(&self) -> String {
        let atoms = |mask: u32| (0..self.n).filter(|p| mask >> p & 1 == 1).map(lit).collect::<Vec<_>>().join(" ");
        format!(
            "(define (problem micro-p) (:domain micro) (:init {}) (:goal (and {})))\n",
            atoms(self.init),
            atoms(self.goal)
        )
    }

    pub fn ground(&self) -> GroundModel {
        load(&self.domain_text(), &self.problem_text()).expect("micro instance grounds")
    }

    pub fn resolve(&self, model: &GroundModel, plan: &[usize]) -> ResolvedPlan {
        ResolvedPlan::new(plan.iter().map(|i| model.action_by_name(&format!("a{i}"), &[]).expect("action")).collect())
    }

    /// Successor of `s` under action `i` when the annotations of `i` are
    /// realized according to `bits` (bit j for the action's j-th annotation).
    pub fn step(&self, i: usize, s: u32, bits: u64) -> u32 {
        let a = &self.actions[i];
        let on = |j: usize, kind| a.poss[j].kind == kind && bits >> j & 1 == 1;
        let mut pre = a.pre;
        let mut add = a.add;
        let mut del = a.del;
        for (j, x) in a.poss.iter().enumerate() {
            let bit = 1u32 << x.prop;
            if on(j, Kind::Pre) {
                pre |= bit;
            }
            if on(j, Kind::Add) {
                add |= bit;
            }
            if on(j, Kind::Del) {
                del |= bit;
            }
        }
        if s & pre != pre {
            return s;
        }
        (s | add) & !del
    }

    /// Probability of completion `c` (bit j realizes oracle variable j).
    pub fn probability(&self, c: u64) -> BigRational {
        let mut p = BigRational::one();
        for (j, w) in self.weights().iter().enumerate() {
            p *= if c >> j & 1 == 1 { w.clone() } else { BigRational::one() - w };
        }
        p
    }

    fn local(&self, offsets: &[usize], i: usize, c: u64) -> u64 {
        (c >> offsets[i]) & ((1u64 << self.actions[i].poss.len()) - 1)
    }

    pub fn run(&self, plan: &[usize], c: u64) -> u32 {
        let offsets = self.offsets();
        plan.iter().fold(self.init, |s, &i| self.step(i, s, self.local(&offsets, i, c)))
    }

    /// Robustness by enumerating every completion.
    pub fn robustness(&self, plan: &[usize]) -> BigRational {
        (0..1u64 << self.k())
            .filter(|&c| self.run(plan, c) & self.goal == self.goal)
            .map(|c| self.probability(c))
            .sum()
    }

    /// Largest robustness of any plan, by breadth-first search over vectors
    /// of per-completion states. `None` when more than `limit` vectors are
    /// reachable.
    pub fn max_robustness(&self, limit: usize) -> Option<(BigRational, Vec<usize>)> {
        let k = self.k();
        let offsets = self.offsets();
        let probs: Vec<BigRational> = (0..1u64 << k).map(|c| self.probability(c)).collect();
        let value = |v: &[u32]| -> BigRational {
            v.iter().zip(&probs).filter(|(s, _)| **s & self.goal == self.goal).map(|(_, p)| p.clone()).sum()
        };
        let root = vec![self.init; 1 << k];
        let mut best = (value(&root), Vec::new());
        let mut seen = HashSet::from([root.clone()]);
        let mut queue = VecDeque::from([(root, Vec::new())]);
        while let Some((v, plan)) = queue.pop_front() {
            for i in 0..self.actions.len() {
                let next: Vec<u32> =
                    v.iter().enumerate().map(|(c, &s)| self.step(i, s, self.local(&offsets, i, c as u64))).collect();
                if !seen.insert(next.clone()) {
                    continue;
                }
                if seen.len() > limit {
                    return None;
                }
                let mut p = plan.clone();
                p.push(i);
                let r = value(&next);
                if r > best.0 {
                    best = (r, p.clone());
                }
                queue.push_back((next, p));
            }
        }
        Some(best)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plan(rng: &mut ChaCha8Rng, micro: &Micro, max_len: usize) -> Vec<usize> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..micro.actions.len())).collect()
}

pub fn zero() -> BigRational {
    BigRational::zero()
}
