//! Initial materialisation, with equality either axiomatised or rewritten.

use std::collections::HashMap;

use serde::Serialize;

use crate::equality::RepMap;
use crate::incremental::{self, Firing, Site, Trace};
use crate::program::{equality_axioms, Program};
use crate::rules::{evaluate, evaluate_all, AnnotatedQuery};
use crate::store::{FactSet, View};
use crate::term::{Atom, Constant, Substitution, Triple, SAME_AS};

/// Derivation counts by the site that performed them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DerivationCounter {
    /// Facts marked doubtful during deletion propagation.
    pub doubtful: u64,
    /// Recursive provability checks during backward chaining.
    pub backward: u64,
    /// Facts derived during forward chaining under rewriting.
    pub forward: u64,
    /// Rule applications during semi-naive axiomatised materialisation.
    pub seminaive: u64,
}

impl DerivationCounter {
    pub fn total(&self) -> u64 {
        self.doubtful + self.backward + self.forward + self.seminaive
    }
}

/// An r-materialisation `(π, I)` together with the explicit facts and the
/// program it was computed from.
#[derive(Clone, Debug)]
pub struct RStore {
    pub(crate) pi: RepMap,
    pub(crate) facts: FactSet,
    pub(crate) explicit: FactSet,
    explicit_voc: Vec<u32>,
    pub(crate) program: Program,
    pub(crate) counter: DerivationCounter,
}

impl RStore {
    pub(crate) fn empty(explicit: FactSet, program: Program) -> RStore {
        let mut rs = RStore {
            pi: RepMap::identity(),
            facts: FactSet::indexed(),
            explicit: FactSet::new(),
            explicit_voc: Vec::new(),
            program,
            counter: DerivationCounter::default(),
        };
        for t in explicit.iter() {
            rs.add_explicit(t);
        }
        let n = rs.constant_bound();
        rs.pi.ensure_len(n);
        rs
    }

    /// Reassembles a store from previously computed parts, e.g. a snapshot.
    /// The parts are trusted to form an r-materialisation.
    pub fn from_parts(pi: RepMap, facts: impl IntoIterator<Item = Triple>, explicit: FactSet, program: Program) -> RStore {
        let mut rs = RStore::empty(explicit, program);
        for t in facts {
            rs.facts.add(t);
        }
        rs.pi = pi;
        let n = rs.constant_bound();
        rs.pi.ensure_len(n);
        rs
    }

    pub fn pi(&self) -> &RepMap {
        &self.pi
    }

    /// The normalised facts `I`.
    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    /// The explicit facts `E`.
    pub fn explicit(&self) -> &FactSet {
        &self.explicit
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Derivations performed by the materialisation that produced this store.
    pub fn counter(&self) -> DerivationCounter {
        self.counter
    }

    /// Whether `c` occurs in some explicit fact.
    pub fn in_explicit_voc(&self, c: Constant) -> bool {
        self.explicit_voc.get(c.index()).is_some_and(|n| *n > 0)
    }

    pub(crate) fn add_explicit(&mut self, t: Triple) -> bool {
        if !self.explicit.add(t) {
            return false;
        }
        for c in t.voc() {
            if self.explicit_voc.len() <= c.index() {
                self.explicit_voc.resize(c.index() + 1, 0);
            }
            self.explicit_voc[c.index()] += 1;
        }
        true
    }

    pub(crate) fn remove_explicit(&mut self, t: &Triple) -> bool {
        if !self.explicit.delete(t) {
            return false;
        }
        for c in t.voc() {
            self.explicit_voc[c.index()] -= 1;
        }
        true
    }

    /// One past the largest constant id mentioned anywhere in the store.
    pub fn constant_bound(&self) -> usize {
        let facts = self.explicit.iter().chain(self.facts.iter()).flat_map(|t| t.terms());
        let rules = self.program.voc();
        facts.chain(rules).map(|c| c.index() + 1).max().unwrap_or(1).max(self.pi.len())
    }

    /// `I^π`: every fact the store represents.
    pub fn expand_all(&self) -> FactSet {
        let mut out = FactSet::new();
        for t in self.facts.iter() {
            out.extend(self.pi.expand(&t));
        }
        out
    }

    /// Checks that every fact in `I` is normal and `π` is well formed.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.pi.check_invariants()?;
        for t in self.facts.iter() {
            if !self.pi.is_normal(&t) {
                return Err(format!("{t} is not normal"));
            }
            for c in t.voc() {
                if !self.facts.contains(&Triple::reflexive(c)) {
                    return Err(format!("missing reflexivity fact for {c}"));
                }
            }
        }
        Ok(())
    }

    /// Adds explicit facts and continues the materialisation from the
    /// current state instead of starting over.
    pub fn insert(&mut self, facts: &[Triple]) {
        incremental::insert(self, facts);
    }

    /// The answers `pattern` has over the materialisation `I^π`, one
    /// substitution per answer. Unknown constants simply match nothing.
    pub fn answer_pattern(&self, pattern: &Atom) -> Vec<Substitution> {
        let normal = pattern.map_consts(|c| self.pi.rep(c));
        let q = AnnotatedQuery::plain(std::slice::from_ref(&normal));
        let mut vars: Vec<_> = pattern.vars().collect();
        vars.sort();
        vars.dedup();
        let mut out = Vec::new();
        for tau in evaluate_all(View::all(&self.facts), &q, &[], &Substitution::new()) {
            let mut partial = vec![Substitution::new()];
            for &v in &vars {
                let class = self.pi.class_of(tau.get(v).expect("pattern variable bound"));
                partial = partial
                    .into_iter()
                    .flat_map(|s| {
                        class.iter().map(move |c| {
                            let mut s = s.clone();
                            s.bind(v, c);
                            s
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }
}

/// The r-materialisation `(π, I)` of `explicit` w.r.t. `program`.
pub fn rmaterialise(explicit: &FactSet, program: &Program) -> RStore {
    incremental::materialise(explicit, program, None)
}

/// [`rmaterialise`] recording the rule firings it performs.
pub fn rmaterialise_traced(explicit: &FactSet, program: &Program) -> (RStore, Trace) {
    let mut trace = Trace::default();
    let rs = incremental::materialise(explicit, program, Some(&mut trace));
    (rs, trace)
}

/// A materialisation under axiomatised equality: `J = (Π ∪ Π≈)^∞(E)`.
#[derive(Clone, Debug)]
pub struct AxiomStore {
    pub(crate) facts: FactSet,
    pub(crate) explicit: FactSet,
    pub(crate) program: Program,
    pub(crate) counter: DerivationCounter,
}

impl AxiomStore {
    pub fn materialise(explicit: &FactSet, program: &Program) -> AxiomStore {
        Self::materialise_inner(explicit, program, None)
    }

    pub fn materialise_traced(explicit: &FactSet, program: &Program) -> (AxiomStore, Trace) {
        let mut trace = Trace::default();
        let store = Self::materialise_inner(explicit, program, Some(&mut trace));
        (store, trace)
    }

    fn materialise_inner(explicit: &FactSet, program: &Program, mut trace: Option<&mut Trace>) -> AxiomStore {
        let full = program.union(&equality_axioms());
        let mut facts = FactSet::indexed();
        facts.extend(explicit.iter());
        let mut counter = DerivationCounter::default();
        let mut cursor = facts.cursor();
        let mut derived = Vec::new();
        while let Some(f) = cursor.next(&facts) {
            let processed = View::prefix(&facts, cursor.position());
            for m in full.match_body(&f) {
                let rule = full.rule(m.rule);
                evaluate(processed, m.query, &[f], &m.sigma, &mut |tau| {
                    derived.push(rule.head_fact(tau));
                    if let Some(trace) = trace.as_deref_mut() {
                        trace.firings.push(Firing { site: Site::Seminaive, rule: rule.clone(), tau: tau.trimmed() });
                    }
                });
            }
            counter.seminaive += derived.len() as u64;
            for t in derived.drain(..) {
                facts.add(t);
            }
        }
        AxiomStore { facts, explicit: explicit.iter().collect(), program: program.clone(), counter }
    }

    /// Reassembles a store from a saved `J`; trusted to be a materialisation.
    pub fn from_parts(facts: impl IntoIterator<Item = Triple>, explicit: FactSet, program: Program) -> AxiomStore {
        let mut j = FactSet::indexed();
        j.extend(facts);
        AxiomStore { facts: j, explicit, program, counter: DerivationCounter::default() }
    }

    pub fn facts(&self) -> &FactSet {
        &self.facts
    }

    pub fn explicit(&self) -> &FactSet {
        &self.explicit
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn counter(&self) -> DerivationCounter {
        self.counter
    }
}

/// `(Π ∪ Π≈)^∞(E)`, computed semi-naively.
pub fn materialise_axiomatised(explicit: &FactSet, program: &Program) -> FactSet {
    AxiomStore::materialise(explicit, program).facts
}

/// The rewriting `(π, I)` of a dataset: `π(c)` is the least constant
/// connected to `c` through equalities in `facts`, and `I = π(facts)`.
pub fn rewriting_of(facts: &FactSet) -> (RepMap, FactSet) {
    let bound = facts.iter().flat_map(|t| t.terms()).map(|c| c.index() + 1).max().unwrap_or(1);
    let mut parent: Vec<usize> = (0..bound).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for t in facts.iter().filter(|t| t.p == SAME_AS) {
        let (a, b) = (find(&mut parent, t.s.index()), find(&mut parent, t.o.index()));
        if a != b {
            // union by minimum keeps the root the least id
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
        }
    }
    let mut min_of: HashMap<usize, usize> = HashMap::new();
    for x in 0..bound {
        let r = find(&mut parent, x);
        let e = min_of.entry(r).or_insert(x);
        *e = (*e).min(x);
    }
    let mut updates = Vec::new();
    for x in 0..bound {
        let r = find(&mut parent, x);
        let m = min_of[&r];
        if m != x {
            updates.push((Constant(x as u32), Constant(m as u32)));
        }
    }
    let mut pi = RepMap::with_len(bound);
    pi.reassign(&updates);
    let mut i = FactSet::new();
    i.extend(facts.iter().map(|t| pi.normalize(&t)));
    (pi, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Var;

    const A: Constant = Constant(1);
    const R: Constant = Constant(2);
    const B: Constant = Constant(3);

    #[test]
    fn axiomatised_closure_of_a_single_fact() {
        let e: FactSet = [Triple::new(A, R, B)].into_iter().collect();
        let j = materialise_axiomatised(&e, &Program::default());
        let expected: FactSet = [
            Triple::new(A, R, B),
            Triple::reflexive(A),
            Triple::reflexive(R),
            Triple::reflexive(B),
            Triple::reflexive(SAME_AS),
        ]
        .into_iter()
        .collect();
        assert_eq!(j, expected);
    }

    #[test]
    fn empty_input_gives_empty_rmaterialisation() {
        let rs = rmaterialise(&FactSet::new(), &Program::default());
        assert!(rs.facts().is_empty());
        assert!(rs.pi().is_identity());
    }

    #[test]
    fn rewriting_of_two_element_class() {
        let u: FactSet = [
            Triple::same_as(A, B),
            Triple::same_as(B, A),
            Triple::reflexive(A),
            Triple::reflexive(B),
            Triple::reflexive(SAME_AS),
        ]
        .into_iter()
        .collect();
        let (pi, i) = rewriting_of(&u);
        assert_eq!(pi.rep(B), A);
        assert_eq!(i, [Triple::reflexive(A), Triple::reflexive(SAME_AS)].into_iter().collect());
    }

    #[test]
    fn rewriting_without_equalities_is_identity() {
        let u: FactSet = [Triple::new(A, R, B)].into_iter().collect();
        let (pi, i) = rewriting_of(&u);
        assert!(pi.is_identity());
        assert_eq!(i, u);
    }

    #[test]
    fn answers_expand_through_classes() {
        let e: FactSet = [Triple::new(A, R, B), Triple::same_as(B, Constant(4))].into_iter().collect();
        let rs = rmaterialise(&e, &Program::default());
        let got = rs.answer_pattern(&Atom::new(Var(0), R, Var(1)));
        assert_eq!(got.len(), 2);
        assert!(rs.answer_pattern(&Atom::new(Var(0), Constant(9), Var(1))).is_empty());
        // repeated variable: ⟨?x, ≈, ?x⟩ answers each constant once
        let refl = rs.answer_pattern(&Atom::new(Var(0), SAME_AS, Var(0)));
        assert_eq!(refl.len(), 5);
    }
}
