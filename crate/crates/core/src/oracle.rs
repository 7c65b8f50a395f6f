//! Brute-force reference implementations for testing.
//!
//! Everything here re-derives from scratch each round by scanning whole
//! fact sets: no indexes, no annotations, no shared evaluation code with the
//! engine beyond unification of a single atom.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::rewriting_of;
use crate::error::HeightError;
use crate::incremental::{Checkpoint, Observer, StateView};
use crate::program::{equality_axioms, replacement_position, Program, Rule};
use crate::store::FactSet;
use crate::term::{Atom, Constant, Substitution, Term, Triple, Var, SAME_AS};

/// Every substitution that maps all of `body` into `facts`.
pub fn body_matches(facts: &[Triple], body: &[Atom], var_count: usize) -> Vec<Substitution> {
    let mut partial = vec![Substitution::with_capacity(var_count)];
    for atom in body {
        let mut next = Vec::new();
        for sigma in &partial {
            for f in facts {
                let mut s = sigma.clone();
                if atom.unify_into(f, &mut s) {
                    next.push(s);
                }
            }
        }
        partial = next;
    }
    let mut seen = HashSet::new();
    partial.retain(|s| seen.insert(s.clone()));
    partial
}

/// One naive round: every head derivable from `facts` in one step.
fn round(facts: &[Triple], rules: &[Rule]) -> Vec<Triple> {
    let mut out = Vec::new();
    for r in rules {
        for sigma in body_matches(facts, r.body(), r.var_count()) {
            out.push(r.head_fact(&sigma));
        }
    }
    out
}

/// The closure of `base ∩ allowed` under `rules`, keeping only derived
/// facts that satisfy `allowed`. Returns the facts grouped by the round in
/// which they first appeared.
fn closure_rounds(base: &FactSet, rules: &[Rule], allowed: &dyn Fn(&Triple) -> bool) -> Vec<Vec<Triple>> {
    let mut all: Vec<Triple> = base.iter().filter(|t| allowed(t)).collect();
    let mut seen: FactSet = all.iter().copied().collect();
    let mut rounds = vec![all.clone()];
    loop {
        let mut fresh = Vec::new();
        for t in round(&all, rules) {
            if allowed(&t) && seen.add(t) {
                fresh.push(t);
            }
        }
        if fresh.is_empty() {
            return rounds;
        }
        all.extend(fresh.iter().copied());
        rounds.push(fresh);
    }
}

fn with_axioms(program: &Program) -> Vec<Rule> {
    program.union(&equality_axioms()).rules().to_vec()
}

/// `(Π ∪ Π≈)^∞(E)` by naive iteration.
pub fn naive_fixpoint(explicit: &FactSet, program: &Program) -> FactSet {
    restricted_fixpoint(explicit, program, |_| true)
}

/// Facts with a derivation from `base` w.r.t. `Π ∪ Π≈` in which every node
/// satisfies `allowed`.
pub fn restricted_fixpoint(base: &FactSet, program: &Program, allowed: impl Fn(&Triple) -> bool) -> FactSet {
    closure_rounds(base, &with_axioms(program), &allowed).into_iter().flatten().collect()
}

/// Height of the shallowest derivation tree for `fact`.
pub fn height_of(fact: &Triple, explicit: &FactSet, program: &Program) -> Result<usize, HeightError> {
    heights(explicit, program).get(fact).copied().ok_or(HeightError::Underivable)
}

/// The height of every derivable fact.
pub fn heights(explicit: &FactSet, program: &Program) -> HashMap<Triple, usize> {
    let rounds = closure_rounds(explicit, &with_axioms(program), &|_| true);
    rounds.iter().enumerate().flat_map(|(h, r)| r.iter().map(move |t| (*t, h))).collect()
}

/// A derivation tree: leaves carry explicit facts, inner nodes the rule and
/// substitution whose body instances are the children.
#[derive(Clone, Debug)]
pub struct DerivationTree {
    pub fact: Triple,
    pub step: Option<(Rule, Substitution)>,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// Checks that the tree derives `root` from `explicit` using `rules`,
    /// and that no replacement step rewrites a constant into itself.
    pub fn check(&self, root: &Triple, explicit: &FactSet, rules: &[Rule]) -> Result<(), String> {
        if self.fact != *root {
            return Err(format!("root is labelled {} instead of {root}", self.fact));
        }
        self.check_node(explicit, rules)
    }

    fn check_node(&self, explicit: &FactSet, rules: &[Rule]) -> Result<(), String> {
        let Some((rule, sigma)) = &self.step else {
            return if explicit.contains(&self.fact) {
                Ok(())
            } else {
                Err(format!("leaf {} is not explicit", self.fact))
            };
        };
        if !rules.contains(rule) {
            return Err(format!("unknown rule {rule}"));
        }
        if rule.head_fact(sigma) != self.fact {
            return Err(format!("head of {rule} does not give {}", self.fact));
        }
        let body: Vec<Triple> = rule.body_facts(sigma).collect();
        let labels: Vec<Triple> = self.children.iter().map(|c| c.fact).collect();
        if body != labels {
            return Err(format!("children of {} do not match the body of {rule}", self.fact));
        }
        if replacement_position(rule).is_some() {
            let eq = body[1];
            if eq.s == eq.o {
                return Err(format!("self-replacement at {}", self.fact));
            }
        }
        self.children.iter().try_for_each(|c| c.check_node(explicit, rules))
    }
}

/// A shallowest derivation tree for `fact`, or `None` if it is underivable.
pub fn derivation_tree(fact: &Triple, explicit: &FactSet, program: &Program) -> Option<DerivationTree> {
    let rules = with_axioms(program);
    let rounds = closure_rounds(explicit, &rules, &|_| true);
    let height = |t: &Triple| rounds.iter().position(|r| r.contains(t));
    build(fact, &rules, &rounds, &height)
}

fn build(
    fact: &Triple,
    rules: &[Rule],
    rounds: &[Vec<Triple>],
    height: &dyn Fn(&Triple) -> Option<usize>,
) -> Option<DerivationTree> {
    let h = height(fact)?;
    if h == 0 {
        return Some(DerivationTree { fact: *fact, step: None, children: Vec::new() });
    }
    let below: Vec<Triple> = rounds[..h].iter().flatten().copied().collect();
    for r in rules {
        for sigma in body_matches(&below, r.body(), r.var_count()) {
            if r.head_fact(&sigma) != *fact {
                continue;
            }
            let children: Option<Vec<_>> = r.body_facts(&sigma).map(|b| build(&b, rules, rounds, height)).collect();
            return Some(DerivationTree { fact: *fact, step: Some((r.clone(), sigma)), children: children? });
        }
    }
    None
}

/// A small random dataset, program and deletion set.
#[derive(Clone, Debug)]
pub struct Instance {
    pub explicit: FactSet,
    pub program: Program,
    pub deletions: Vec<Triple>,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceParams {
    pub max_constants: u32,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_facts: usize,
    /// Probability that a fact or rule head is an equality.
    pub equality_rate: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams { max_constants: 8, max_rules: 4, max_body: 3, max_facts: 20, equality_rate: 0.25 }
    }
}

/// Draws a random instance. Constants are `1..=n`; the first two or three
/// serve as predicates. Deletes a uniformly random fraction of the facts.
pub fn random_instance(rng: &mut impl Rng, params: &InstanceParams) -> Instance {
    let n = rng.gen_range(3..=params.max_constants.max(3));
    let preds: Vec<Constant> = (1..=rng.gen_range(2..=3u32)).map(Constant).collect();
    let individual = |rng: &mut dyn rand::RngCore| Constant(rng.gen_range(1..=n));

    let mut explicit = FactSet::new();
    for _ in 0..rng.gen_range(1..=params.max_facts) {
        let p = if rng.gen_bool(params.equality_rate) { SAME_AS } else { *preds.choose(rng).unwrap() };
        explicit.add(Triple::new(individual(rng), p, individual(rng)));
    }

    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..=params.max_rules) {
        let vars = [Var(0), Var(1), Var(2)];
        let term = |rng: &mut dyn rand::RngCore| -> Term {
            if rng.gen_bool(0.1) {
                Constant(rng.gen_range(1..=n)).into()
            } else {
                (*vars.choose(rng).unwrap()).into()
            }
        };
        let body: Vec<Atom> = (0..rng.gen_range(1..=params.max_body))
            .map(|_| {
                let p: Term = if rng.gen_bool(0.08) {
                    (*vars.choose(rng).unwrap()).into()
                } else if rng.gen_bool(0.1) {
                    SAME_AS.into()
                } else {
                    (*preds.choose(rng).unwrap()).into()
                };
                Atom { s: term(rng), p, o: term(rng) }
            })
            .collect();
        let body_vars: Vec<Var> = {
            let mut v: Vec<Var> = body.iter().flat_map(|a| a.vars()).collect();
            v.sort();
            v.dedup();
            v
        };
        let head_term = |rng: &mut dyn rand::RngCore| -> Term {
            match body_vars.choose(rng) {
                Some(v) if !rng.gen_bool(0.1) => (*v).into(),
                _ => Constant(rng.gen_range(1..=n)).into(),
            }
        };
        let p: Term = if rng.gen_bool(params.equality_rate) { SAME_AS.into() } else { (*preds.choose(rng).unwrap()).into() };
        let head = Atom { s: head_term(rng), p, o: head_term(rng) };
        if let Ok(r) = Rule::new(head, body) {
            rules.push(r);
        }
    }

    let mut facts: Vec<Triple> = explicit.iter().collect();
    facts.shuffle(rng);
    let keep = (facts.len() as f64 * rng.gen_range(0.0..=1.0)).round() as usize;
    let deletions = facts.into_iter().take(keep).collect();
    Instance { explicit, program: Program::new(rules), deletions }
}

impl Instance {
    /// The explicit facts left after the deletion.
    pub fn remaining(&self) -> FactSet {
        self.explicit.iter().filter(|t| !self.deletions.contains(t)).collect()
    }
}

/// How often each property was checked by a [`ClaimChecker`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClaimCounts {
    /// Forward closure represents the restricted fixpoint `L`.
    pub saturate: usize,
    /// Proved facts are exactly the checked part of the new materialisation.
    pub status: usize,
    /// Disproved facts represent nothing in the new materialisation.
    pub disproved: usize,
    /// Every fact taken from the doubtful set was checked.
    pub doubtful_checked: usize,
    /// Every removed fact and every fact touched by a split class is doubtful.
    pub doubt_complete: usize,
}

/// An update observer that compares the working sets against brute-force
/// recomputations of the old and new materialisations.
pub struct ClaimChecker {
    program: Program,
    old: FactSet,
    new: FactSet,
    extracted: Vec<Triple>,
    pub counts: ClaimCounts,
    pub violations: Vec<String>,
}

impl ClaimChecker {
    pub fn new(explicit: &FactSet, deletions: &[Triple], program: &Program) -> Self {
        let remaining: FactSet = explicit.iter().filter(|t| !deletions.contains(t)).collect();
        ClaimChecker {
            program: program.clone(),
            old: naive_fixpoint(explicit, program),
            new: naive_fixpoint(&remaining, program),
            extracted: Vec::new(),
            counts: ClaimCounts::default(),
            violations: Vec::new(),
        }
    }

    fn fail(&mut self, what: &str, detail: String) {
        if self.violations.len() < 20 {
            self.violations.push(format!("{what}: {detail}"));
        }
    }

    fn bound(&self, view: &StateView<'_>) -> u32 {
        self.old.iter().flat_map(|t| t.terms()).map(|c| c.0 + 1).max().unwrap_or(1).max(view.pi.len() as u32)
    }

    fn check_saturate(&mut self, view: &StateView<'_>) {
        self.counts.saturate += 1;
        let st = view.state;
        let mut base: FactSet = view.explicit.iter().collect();
        for t in view.explicit.iter() {
            base.extend(t.voc().map(Triple::reflexive));
        }
        let l = restricted_fixpoint(&base, &self.program, |t| st.checked.contains(&view.pi.normalize(t)));
        let (gamma_l, _) = rewriting_of(&l);
        for c in (0..self.bound(view)).map(Constant) {
            if st.gamma.rep(c) != gamma_l.rep(c) {
                self.fail("saturate", format!("γ({c}) = {} but min [L] = {}", st.gamma.rep(c), gamma_l.rep(c)));
            }
        }
        let image: FactSet = l.iter().map(|t| st.gamma.normalize(&t)).collect();
        let proved: FactSet = st.proved_current().collect();
        if image != proved {
            self.fail("saturate", format!("P \\ P̄ has {} facts but γ(L) has {}", proved.len(), image.len()));
        }
    }

    fn check_status(&mut self, view: &StateView<'_>) {
        self.counts.status += 1;
        let st = view.state;
        let mut represented = FactSet::new();
        for t in st.proved_current() {
            represented.extend(st.gamma.expand(&t));
        }
        let checked_new: FactSet = self.new.iter().filter(|t| st.checked.contains(&view.pi.normalize(t))).collect();
        if represented != checked_new {
            self.fail("status", format!("{} facts proved, {} checked facts hold", represented.len(), checked_new.len()));
        }
        let (gamma_c, _) = rewriting_of(&checked_new);
        for c in (0..self.bound(view)).map(Constant) {
            if st.gamma.rep(c) != gamma_c.rep(c) {
                self.fail("status", format!("γ({c}) = {} but the checked class minimum is {}", st.gamma.rep(c), gamma_c.rep(c)));
            }
        }
        self.counts.disproved += 1;
        for t in st.disproved.iter() {
            if let Some(g) = view.pi.expand(&t).find(|g| self.new.contains(g)) {
                self.fail("disproved", format!("{t} is disproved but {g} still holds"));
            }
        }
        self.counts.doubtful_checked += 1;
        let unchecked: Vec<Triple> = self.extracted.iter().copied().filter(|t| !st.checked.contains(t)).collect();
        for t in unchecked {
            self.fail("doubtful", format!("{t} was processed without being checked"));
        }
    }

    fn check_doubt_complete(&mut self, view: &StateView<'_>) {
        self.counts.doubt_complete += 1;
        let st = view.state;
        for t in st.doubtful.iter() {
            if !st.checked.contains(&t) {
                self.fail("doubtful", format!("{t} is doubtful but unchecked"));
            }
        }
        let gone: Vec<Triple> = self.old.iter().filter(|t| !self.new.contains(t)).collect();
        for f in gone {
            if !st.doubtful.contains(&view.pi.normalize(&f)) {
                self.fail("doubt", format!("{f} no longer holds but π of it is not doubtful"));
            }
            if f.p == SAME_AS && f.s != f.o {
                let c = view.pi.rep(f.s);
                for g in view.facts.mentioning(c) {
                    if view.pi.expand(&g).any(|h| !self.new.contains(&h)) && !st.doubtful.contains(&g) {
                        self.fail("doubt", format!("{g} mentions the split class of {c} but is not doubtful"));
                    }
                }
            }
        }
    }
}

impl Observer for ClaimChecker {
    fn checkpoint(&mut self, at: Checkpoint, view: &StateView<'_>) {
        match at {
            Checkpoint::AfterSaturate => self.check_saturate(view),
            Checkpoint::AfterCheck(f) => {
                self.extracted.push(f);
                self.check_status(view);
            }
            Checkpoint::EndOfIteration => self.check_status(view),
            Checkpoint::BeforePropagate => {
                self.check_status(view);
                self.check_doubt_complete(view);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const A: Constant = Constant(1);
    const R: Constant = Constant(2);
    const B: Constant = Constant(3);
    const S: Constant = Constant(4);

    #[test]
    fn empty_program_adds_only_reflexivity() {
        let e: FactSet = [Triple::new(A, R, B)].into_iter().collect();
        assert_eq!(naive_fixpoint(&e, &Program::default()).len(), 5);
    }

    #[test]
    fn unrestricted_closure_is_the_fixpoint() {
        let e: FactSet = [Triple::new(A, R, B), Triple::same_as(A, B)].into_iter().collect();
        assert_eq!(restricted_fixpoint(&e, &Program::default(), |_| true), naive_fixpoint(&e, &Program::default()));
    }

    #[test]
    fn heights() {
        let r = Rule::new(Atom::new(Var(0), S, Var(1)), vec![Atom::new(Var(0), R, Var(1))]).unwrap();
        let p = Program::new([r]);
        let e: FactSet = [Triple::new(A, R, B)].into_iter().collect();
        assert_eq!(height_of(&Triple::new(A, R, B), &e, &p).unwrap(), 0);
        assert_eq!(height_of(&Triple::new(A, S, B), &e, &p).unwrap(), 1);
        assert!(height_of(&Triple::new(B, S, A), &e, &p).is_err());
    }

    #[test]
    fn trees_exist_and_check_for_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = InstanceParams { max_facts: 10, max_constants: 5, ..Default::default() };
        for _ in 0..20 {
            let inst = random_instance(&mut rng, &params);
            let rules = with_axioms(&inst.program);
            for f in naive_fixpoint(&inst.explicit, &inst.program).iter() {
                let tree = derivation_tree(&f, &inst.explicit, &inst.program).expect("derivable");
                tree.check(&f, &inst.explicit, &rules).unwrap();
                assert_eq!(tree.height(), height_of(&f, &inst.explicit, &inst.program).unwrap());
            }
        }
    }

    #[test]
    fn random_rules_are_safe_and_deletions_explicit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let inst = random_instance(&mut rng, &InstanceParams::default());
            assert!(inst.deletions.iter().all(|t| inst.explicit.contains(t)));
            assert!(inst.program.len() <= 4);
        }
    }
}
