//! Exhaustive stable-model enumeration via the Gelfond–Lifschitz reduct.
//! Exponential by design; this is the reference the goal-directed solver is
//! tested against.

use std::collections::{BTreeSet, HashMap};

use crate::ground::GroundProgram;
use crate::model::{complement, BodyElement, Literal};

pub const DEFAULT_UNIVERSE_BOUND: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableModel {
    pub atoms: BTreeSet<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("atom universe has {size} literals; the brute-force bound is {bound}")]
pub struct UniverseTooLarge {
    pub size: usize,
    pub bound: usize,
}

/// Rule over literal indices, as bitmasks.
struct MaskRule {
    head: Option<usize>,
    pos: u64,
    naf: u64,
}

struct Compiled {
    literals: Vec<Literal>,
    rules: Vec<MaskRule>,
    /// Pairs of masks for `a` / `-a`.
    classical: Vec<u64>,
}

fn compile(g: &GroundProgram) -> Compiled {
    let literals: Vec<Literal> = g.atom_universe.iter().cloned().collect();
    let idx: HashMap<&Literal, usize> = literals.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let bit = |l: &Literal| 1u64 << idx[l];
    let rules = g
        .rules
        .iter()
        .map(|r| {
            let mut pos = 0;
            let mut naf = 0;
            for e in &r.body {
                match e {
                    BodyElement::Pos(l) => pos |= bit(l),
                    BodyElement::Naf(l) => naf |= bit(l),
                    BodyElement::Builtin(_) => unreachable!("ground programs carry no builtins"),
                }
            }
            MaskRule { head: r.head.as_ref().map(|h| idx[h]), pos, naf }
        })
        .collect();
    let classical = literals
        .iter()
        .filter(|l| !l.strong_neg)
        .filter_map(|l| idx.get(&complement(l)).map(|&j| bit(l) | (1 << j)))
        .collect();
    Compiled { literals, rules, classical }
}

impl Compiled {
    fn least_model_of_reduct(&self, s: u64) -> u64 {
        let mut m = 0u64;
        loop {
            let mut next = m;
            for r in &self.rules {
                if let Some(h) = r.head {
                    if r.naf & s == 0 && r.pos & !next == 0 {
                        next |= 1 << h;
                    }
                }
            }
            if next == m {
                return m;
            }
            m = next;
        }
    }

    fn is_stable(&self, s: u64) -> bool {
        if self.classical.iter().any(|&pair| pair & !s == 0) {
            return false;
        }
        let violated = self.rules.iter().any(|r| r.head.is_none() && r.pos & !s == 0 && r.naf & s == 0);
        !violated && self.least_model_of_reduct(s) == s
    }

    fn to_set(&self, s: u64) -> BTreeSet<Literal> {
        (0..self.literals.len()).filter(|i| s >> i & 1 == 1).map(|i| self.literals[i].clone()).collect()
    }
}

pub fn enumerate_stable_models_bruteforce(g: &GroundProgram) -> Result<BTreeSet<StableModel>, UniverseTooLarge> {
    enumerate_with_bound(g, DEFAULT_UNIVERSE_BOUND)
}

pub fn enumerate_with_bound(g: &GroundProgram, bound: usize) -> Result<BTreeSet<StableModel>, UniverseTooLarge> {
    let n = g.atom_universe.len();
    if n > bound || n >= 64 {
        return Err(UniverseTooLarge { size: n, bound });
    }
    let c = compile(g);
    Ok((0..1u64 << n).filter(|&s| c.is_stable(s)).map(|s| StableModel { atoms: c.to_set(s) }).collect())
}

/// Whether `s` is a stable model of `g`. Literals outside the universe make
/// the answer `false`, since no stable model can contain them.
pub fn check_stable(g: &GroundProgram, s: &BTreeSet<Literal>) -> bool {
    if s.iter().any(|l| !g.atom_universe.contains(l)) {
        return false;
    }
    if s.iter().any(|l| !l.strong_neg && s.contains(&complement(l))) {
        return false;
    }
    let sat = |body: &[BodyElement], m: &BTreeSet<Literal>| {
        body.iter().all(|e| match e {
            BodyElement::Pos(l) => m.contains(l),
            BodyElement::Naf(l) => !s.contains(l),
            BodyElement::Builtin(_) => true,
        })
    };
    if g.rules.iter().any(|r| r.head.is_none() && sat(&r.body, s)) {
        return false;
    }
    let mut m = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in &g.rules {
            if let Some(h) = &r.head {
                if !m.contains(h) && sat(&r.body, &m) {
                    m.insert(h.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    &m == s
}
