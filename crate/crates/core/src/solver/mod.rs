//! Goal-directed query evaluation under the stable model semantics.
//!
//! The search is a propositional, coinductive SLD-style procedure over a
//! ground program. Its state is a single table of hypotheses (the CHS):
//! each literal is either assumed true, assumed false, or untouched.
//!
//! * `a` fails if `not a` is assumed, succeeds if `a` is already proved,
//!   and when `a` is still being proved (a loop) succeeds only if the loop
//!   passes through at least one negation.
//! * `not a` fails if `a` is assumed, succeeds if `not a` already is
//!   (coinductively), and otherwise every rule for `a` must be refuted by
//!   falsifying one of its body elements.
//!
//! Once the query holds, the remaining global constraints are checked: every
//! headless rule, every rule whose head sits on an odd loop over negation,
//! and `:- a, -a` for every classical pair. The reported answer is the set
//! of hypotheses that supported the query itself.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::ground::GroundProgram;
use crate::model::{complement, Binding, BodyElement, Literal, Term};
use crate::parser::Query;

pub use oracle::{check_stable, enumerate_stable_models_bruteforce, StableModel, UniverseTooLarge};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;
const SEARCH_STACK_BYTES: usize = 1 << 29;

/// A partial answer set: the literals proved true and those proved
/// unprovable (rendered with `not`), plus the bindings of query variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAnswerSet {
    pub bindings: Binding,
    pub positive: BTreeSet<Literal>,
    pub nafs: BTreeSet<Literal>,
}

impl fmt::Display for PartialAnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> =
            self.positive.iter().map(ToString::to_string).chain(self.nafs.iter().map(|l| format!("not {l}"))).collect();
        write!(f, "{{ {} }}", items.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("step budget of {0} resolution steps exhausted")]
    ResourceLimit(u64),
    #[error("query variable `{0}` does not occur in a positive goal")]
    UnsafeQuery(String),
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Maximum number of answers; `None` means all.
    pub limit: Option<usize>,
    pub step_budget: u64,
    /// Keep only the first answer found for each instantiation of the query.
    pub first_per_binding: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { limit: Some(10), step_budget: DEFAULT_STEP_BUDGET, first_per_binding: false }
    }
}

impl SolveOptions {
    pub fn unlimited() -> Self {
        SolveOptions { limit: None, ..SolveOptions::default() }
    }
}

type LitId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Goal {
    /// Prove the literal.
    Pos(LitId),
    /// Prove the literal unprovable.
    Neg(LitId),
}

impl Goal {
    fn opposite(self) -> Goal {
        match self {
            Goal::Pos(l) => Goal::Neg(l),
            Goal::Neg(l) => Goal::Pos(l),
        }
    }
}

struct CRule {
    head: Option<LitId>,
    body: Vec<Goal>,
}

enum Check {
    /// `head or not body` (a constraint when there is no head).
    Rule(usize),
    /// `:- a, -a`.
    Pair(LitId, LitId),
}

/// The ground program over dense literal ids.
pub struct Compiled {
    lits: Vec<Literal>,
    index: HashMap<Literal, LitId>,
    rules: Vec<CRule>,
    by_head: Vec<Vec<usize>>,
    complement: Vec<Option<LitId>>,
    checks: Vec<Check>,
}

impl Compiled {
    pub fn new(g: &GroundProgram) -> Compiled {
        let lits: Vec<Literal> = g.atom_universe.iter().cloned().collect();
        let index: HashMap<Literal, LitId> = lits.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let mut by_head = vec![Vec::new(); lits.len()];
        let rules: Vec<CRule> = g
            .rules
            .iter()
            .enumerate()
            .map(|(ri, r)| {
                let head = r.head.as_ref().map(|h| index[h]);
                if let Some(h) = head {
                    by_head[h].push(ri);
                }
                let body = r
                    .body
                    .iter()
                    .filter_map(|e| match e {
                        BodyElement::Pos(l) => Some(Goal::Pos(index[l])),
                        BodyElement::Naf(l) => Some(Goal::Neg(index[l])),
                        BodyElement::Builtin(_) => None,
                    })
                    .collect();
                CRule { head, body }
            })
            .collect();
        let complement: Vec<Option<LitId>> = lits.iter().map(|l| index.get(&complement(l)).copied()).collect();

        let odd = odd_loop_heads(lits.len(), &rules);
        let mut checks: Vec<Check> = rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.head.is_none_or(|h| odd[h]))
            .map(|(i, _)| Check::Rule(i))
            .collect();
        for (i, c) in complement.iter().enumerate() {
            if let Some(j) = *c {
                if !lits[i].strong_neg {
                    checks.push(Check::Pair(i, j));
                }
            }
        }
        Compiled { lits, index, rules, by_head, complement, checks }
    }
}

/// Literals that depend on themselves through an odd number of negations.
fn odd_loop_heads(n: usize, rules: &[CRule]) -> Vec<bool> {
    let mut g = DiGraph::<(), ()>::with_capacity(2 * n, 0);
    let nodes: Vec<_> = (0..2 * n).map(|_| g.add_node(())).collect();
    for r in rules {
        let Some(h) = r.head else { continue };
        for b in &r.body {
            for parity in 0..2 {
                let (target, flip) = match *b {
                    Goal::Pos(l) => (l, 0),
                    Goal::Neg(l) => (l, 1),
                };
                g.add_edge(nodes[2 * h + parity], nodes[2 * target + (parity ^ flip)], ());
            }
        }
    }
    let mut odd = vec![false; n];
    for scc in tarjan_scc(&g) {
        let members: HashSet<usize> = scc.iter().map(|ix| ix.index()).collect();
        for &m in &members {
            if m % 2 == 0 && members.contains(&(m + 1)) {
                odd[m / 2] = true;
            }
        }
    }
    odd
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flow {
    /// Keep backtracking for further solutions.
    Continue,
    /// Enough solutions; unwind.
    Stop,
    /// Step budget exhausted; unwind.
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Hyp {
    True,
    False,
}

type Cont<'k, 'p> = &'k mut dyn FnMut(&mut Search<'p>) -> Flow;

/// An open goal on the proof stack.
struct Frame {
    /// Negative goals among the open goals up to and including this one.
    negs: usize,
    /// Positive literals this goal's derivation has used so far.
    uses: Vec<LitId>,
}

struct Search<'p> {
    prog: &'p Compiled,
    chs: Vec<Option<Hyp>>,
    /// Stack index of an in-progress positive goal, per literal.
    open_pos: Vec<Option<usize>>,
    /// For proved literals: the open positive goals their derivation
    /// rests on. A literal may not end up resting on itself.
    support: Vec<Vec<LitId>>,
    frames: Vec<Frame>,
    steps: u64,
    budget: u64,
}

impl<'p> Search<'p> {
    fn new(prog: &'p Compiled, budget: u64) -> Self {
        let n = prog.lits.len();
        Search {
            prog,
            chs: vec![None; n],
            open_pos: vec![None; n],
            support: vec![Vec::new(); n],
            frames: Vec::new(),
            steps: 0,
            budget,
        }
    }

    fn push_frame(&mut self, negative: bool) {
        let prev = self.frames.last().map_or(0, |f| f.negs);
        self.frames.push(Frame { negs: prev + negative as usize, uses: Vec::new() });
    }

    fn negs_above(&self, depth: usize) -> usize {
        self.frames.last().map_or(0, |f| f.negs) - self.frames[depth].negs
    }

    /// Records a positive success with the caller, runs `k`, then undoes it.
    fn used(&mut self, a: LitId, k: Cont<'_, 'p>) -> Flow {
        let Some(top) = self.frames.last_mut() else { return k(self) };
        top.uses.push(a);
        let flow = k(self);
        if let Some(top) = self.frames.last_mut() {
            top.uses.pop();
        }
        flow
    }

    /// The open positive goals reachable from `uses` through proved literals.
    fn resolve(&self, uses: &[LitId]) -> Vec<LitId> {
        let mut seen = HashSet::new();
        let mut todo: Vec<LitId> = uses.to_vec();
        let mut out = Vec::new();
        while let Some(y) = todo.pop() {
            if !seen.insert(y) {
                continue;
            }
            if self.open_pos[y].is_some() {
                out.push(y);
            } else {
                todo.extend(&self.support[y]);
            }
        }
        out
    }

    fn prove(&mut self, goal: Goal, k: Cont<'_, 'p>) -> Flow {
        self.steps += 1;
        if self.steps > self.budget {
            return Flow::Abort;
        }
        match goal {
            Goal::Pos(a) => self.prove_pos(a, k),
            Goal::Neg(a) => self.prove_neg(a, k),
        }
    }

    fn prove_all(&mut self, goals: &[Goal], k: Cont<'_, 'p>) -> Flow {
        match goals.split_first() {
            None => k(self),
            Some((&g, rest)) => self.prove(g, &mut |s| s.prove_all(rest, k)),
        }
    }

    fn prove_pos(&mut self, a: LitId, k: Cont<'_, 'p>) -> Flow {
        match self.chs[a] {
            Some(Hyp::False) => return Flow::Continue,
            Some(Hyp::True) => {
                return match self.open_pos[a] {
                    // a positive loop: no support
                    Some(depth) if self.negs_above(depth) == 0 => Flow::Continue,
                    _ => self.used(a, k),
                };
            }
            None => {}
        }
        if let Some(c) = self.prog.complement[a] {
            if self.chs[c] == Some(Hyp::True) {
                return Flow::Continue;
            }
        }
        let prog = self.prog;
        self.chs[a] = Some(Hyp::True);
        self.open_pos[a] = Some(self.frames.len());
        self.push_frame(false);
        let mut flow = Flow::Continue;
        for &ri in &prog.by_head[a] {
            flow = self.prove_all(&prog.rules[ri].body, &mut |s| {
                let rests_on = s.resolve(&s.frames.last().expect("own frame").uses);
                if rests_on.contains(&a) {
                    return Flow::Continue;
                }
                let depth = s.open_pos[a].take();
                let frame = s.frames.pop();
                let old = std::mem::replace(&mut s.support[a], rests_on);
                let f = s.used(a, k);
                s.support[a] = old;
                s.frames.extend(frame);
                s.open_pos[a] = depth;
                f
            });
            if flow != Flow::Continue {
                break;
            }
        }
        self.frames.pop();
        self.open_pos[a] = None;
        self.chs[a] = None;
        flow
    }

    fn prove_neg(&mut self, a: LitId, k: Cont<'_, 'p>) -> Flow {
        match self.chs[a] {
            Some(Hyp::True) => return Flow::Continue,
            Some(Hyp::False) => return k(self),
            None => {}
        }
        let prog = self.prog;
        self.chs[a] = Some(Hyp::False);
        self.push_frame(true);
        let flow = self.refute_rules(&prog.by_head[a], &mut |s| {
            let frame = s.frames.pop();
            let f = k(s);
            s.frames.extend(frame);
            f
        });
        self.frames.pop();
        self.chs[a] = None;
        flow
    }

    /// Whether `g` already holds under the current hypotheses.
    fn holds(&self, g: Goal) -> bool {
        match g {
            Goal::Pos(l) => self.chs[l] == Some(Hyp::True) && self.open_pos[l].is_none(),
            Goal::Neg(l) => self.chs[l] == Some(Hyp::False),
        }
    }

    fn refute_rules(&mut self, rules: &[usize], k: Cont<'_, 'p>) -> Flow {
        let Some((&ri, rest)) = rules.split_first() else { return k(self) };
        self.refute_body(&self.prog.rules[ri].body, &mut |s| s.refute_rules(rest, k))
    }

    /// Falsifies one element of `body`; an element that is already false
    /// is taken as the only choice.
    fn refute_body(&mut self, body: &[Goal], k: Cont<'_, 'p>) -> Flow {
        if body.iter().any(|&g| self.holds(g.opposite())) {
            return k(self);
        }
        for &g in body {
            let flow = self.prove(g.opposite(), k);
            if flow != Flow::Continue {
                return flow;
            }
        }
        Flow::Continue
    }

    fn check(&mut self, i: usize, k: Cont<'_, 'p>) -> Flow {
        let prog = self.prog;
        let Some(c) = prog.checks.get(i) else { return k(self) };
        let next = &mut |s: &mut Search<'p>| s.check(i + 1, k);
        match *c {
            Check::Rule(ri) => {
                let rule = &prog.rules[ri];
                if let Some(h) = rule.head {
                    let flow = self.prove(Goal::Pos(h), next);
                    if flow != Flow::Continue {
                        return flow;
                    }
                }
                self.refute_body(&rule.body, next)
            }
            Check::Pair(a, b) => self.refute_body(&[Goal::Pos(a), Goal::Pos(b)], next),
        }
    }

    fn snapshot(&self, bindings: &Binding) -> PartialAnswerSet {
        let mut positive = BTreeSet::new();
        let mut nafs = BTreeSet::new();
        for (i, h) in self.chs.iter().enumerate() {
            match h {
                Some(Hyp::True) => {
                    positive.insert(self.prog.lits[i].clone());
                }
                Some(Hyp::False) => {
                    nafs.insert(self.prog.lits[i].clone());
                }
                None => {}
            }
        }
        PartialAnswerSet { bindings: bindings.clone(), positive, nafs }
    }
}

/// A ground instance of the query.
struct Instance {
    bindings: Binding,
    goals: Vec<Goal>,
}

fn unify(pattern: &Literal, ground: &Literal, binding: &Binding) -> Option<Binding> {
    if pattern.strong_neg != ground.strong_neg
        || pattern.atom.predicate != ground.atom.predicate
        || pattern.atom.args.len() != ground.atom.args.len()
    {
        return None;
    }
    let mut b = binding.clone();
    for (p, g) in pattern.atom.args.iter().zip(&ground.atom.args) {
        match p {
            Term::Var(v) => match b.get(v) {
                Some(t) if t != g => return None,
                Some(_) => {}
                None => {
                    b.insert(v.clone(), g.clone());
                }
            },
            t if t != g => return None,
            _ => {}
        }
    }
    Some(b)
}

fn instances(prog: &Compiled, q: &Query) -> Result<Vec<Instance>, SolveError> {
    let mut partial = vec![Binding::new()];
    for e in &q.goals {
        if let BodyElement::Pos(l) = e {
            let mut next = Vec::new();
            for b in &partial {
                for g in &prog.lits {
                    if let Some(nb) = unify(l, g, b) {
                        next.push(nb);
                    }
                }
            }
            partial = next;
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    'bindings: for b in partial {
        if !seen.insert(b.clone()) {
            continue;
        }
        let mut goals = Vec::new();
        for e in &q.goals {
            match e {
                BodyElement::Pos(l) => goals.push(Goal::Pos(prog.index[&l.substitute(&b)])),
                BodyElement::Naf(l) => {
                    let g = l.substitute(&b);
                    if !g.is_ground() {
                        let var = g.atom.args.iter().find(|t| !t.is_ground()).map(ToString::to_string);
                        return Err(SolveError::UnsafeQuery(var.unwrap_or_default()));
                    }
                    // an atom outside the universe is trivially unprovable
                    if let Some(&id) = prog.index.get(&g) {
                        goals.push(Goal::Neg(id));
                    }
                }
                BodyElement::Builtin(bi) => {
                    let num = |t: &Term| match t {
                        Term::Var(v) => b.get(v).and_then(Term::as_number),
                        t => t.as_number(),
                    };
                    match (num(&bi.lhs), num(&bi.rhs)) {
                        (Some(l), Some(r)) if bi.op.eval(l, r) => {}
                        _ => continue 'bindings,
                    }
                }
            }
        }
        out.push(Instance { bindings: b, goals });
    }
    Ok(out)
}

/// Answers `q` against `g`. Answers are deduplicated and produced in a
/// deterministic order: query instances in literal order, then depth-first
/// over rule order.
pub fn solve(g: &GroundProgram, q: &Query, opts: &SolveOptions) -> Result<Vec<PartialAnswerSet>, SolveError> {
    solve_compiled(&Compiled::new(g), q, opts)
}

pub fn solve_compiled(prog: &Compiled, q: &Query, opts: &SolveOptions) -> Result<Vec<PartialAnswerSet>, SolveError> {
    Ok(solve_witnessed(prog, q, opts)?.into_iter().map(|w| w.answer).collect())
}

/// An answer together with the hypothesis set as it stood once the global
/// consistency checks succeeded. The answer is what the query's
/// justification needs; the witness adds whatever the checks committed to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witnessed {
    pub answer: PartialAnswerSet,
    pub witness: PartialAnswerSet,
}

pub fn solve_witnessed(prog: &Compiled, q: &Query, opts: &SolveOptions) -> Result<Vec<Witnessed>, SolveError> {
    for e in &q.goals {
        if let BodyElement::Builtin(b) = e {
            let vars_ok = [&b.lhs, &b.rhs].iter().all(|t| match t {
                Term::Var(v) => q.goals.iter().any(|e| {
                    matches!(e, BodyElement::Pos(l) if l.atom.args.iter().any(|a| a == &Term::Var(v.clone())))
                }),
                _ => true,
            });
            if !vars_ok {
                return Err(SolveError::UnsafeQuery(b.to_string()));
            }
        }
    }
    let insts = instances(prog, q)?;
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(SEARCH_STACK_BYTES)
            .spawn_scoped(scope, || run(prog, &insts, opts))
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    })
}

fn run(prog: &Compiled, insts: &[Instance], opts: &SolveOptions) -> Result<Vec<Witnessed>, SolveError> {
    let mut out: Vec<Witnessed> = Vec::new();
    let mut seen: HashSet<PartialAnswerSet> = HashSet::new();
    let mut steps = 0u64;
    let full = |n: usize| opts.limit.is_some_and(|l| n >= l);
    if full(0) {
        return Ok(out);
    }
    for inst in insts {
        let mut search = Search::new(prog, opts.budget_left(steps));
        let flow = search.prove_all(&inst.goals, &mut |s| {
            let candidate = s.snapshot(&inst.bindings);
            let mut witness = None;
            let f = s.check(0, &mut |s| {
                witness = Some(s.snapshot(&inst.bindings));
                Flow::Stop
            });
            if f == Flow::Abort {
                return Flow::Abort;
            }
            if let Some(witness) = witness.filter(|_| seen.insert(candidate.clone())) {
                out.push(Witnessed { answer: candidate, witness });
                if full(out.len()) || opts.first_per_binding {
                    return Flow::Stop;
                }
            }
            Flow::Continue
        });
        steps += search.steps;
        if flow == Flow::Abort {
            return Err(SolveError::ResourceLimit(opts.step_budget));
        }
        if full(out.len()) {
            break;
        }
    }
    Ok(out)
}

impl SolveOptions {
    fn budget_left(&self, used: u64) -> u64 {
        self.step_budget.saturating_sub(used)
    }
}

/// Groups answers by their bindings, preserving first-seen order.
pub fn group_by_bindings(answers: &[PartialAnswerSet]) -> Vec<(Binding, Vec<&PartialAnswerSet>)> {
    let mut order: Vec<Binding> = Vec::new();
    let mut groups: BTreeMap<Binding, Vec<&PartialAnswerSet>> = BTreeMap::new();
    for a in answers {
        if !groups.contains_key(&a.bindings) {
            order.push(a.bindings.clone());
        }
        groups.entry(a.bindings.clone()).or_default().push(a);
    }
    order.into_iter().map(|b| {
        let v = groups.remove(&b).unwrap_or_default();
        (b, v)
    }).collect()
}
