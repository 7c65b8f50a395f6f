//! Datalog rules and programs.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::rules::AnnotatedQuery;
use crate::term::{Atom, Constant, Substitution, Term, Triple, Var, SAME_AS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule body is empty")]
    EmptyBody,
    #[error("head variable {0} does not occur in the body")]
    Unsafe(String),
}

/// `head ← body₁ ∧ … ∧ bodyₙ`. Variables are numbered densely; names are
/// kept only for display and do not take part in equality.
#[derive(Clone, Debug)]
pub struct Rule {
    head: Atom,
    body: Vec<Atom>,
    var_names: Arc<[String]>,
}

impl Rule {
    /// Builds a safe rule. Variables must be numbered `0..n` for some `n`.
    pub fn new(head: Atom, body: Vec<Atom>) -> Result<Rule, RuleError> {
        let n = head.vars().chain(body.iter().flat_map(Atom::vars)).map(|v| v.index() + 1).max().unwrap_or(0);
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        Rule::with_names(head, body, names)
    }

    pub fn with_names(head: Atom, body: Vec<Atom>, var_names: Vec<String>) -> Result<Rule, RuleError> {
        if body.is_empty() {
            return Err(RuleError::EmptyBody);
        }
        for v in head.vars() {
            if !body.iter().any(|b| b.vars().any(|w| w == v)) {
                let name = var_names.get(v.index()).cloned().unwrap_or_else(|| format!("v{}", v.0));
                return Err(RuleError::Unsafe(name));
            }
        }
        Ok(Rule { head, body, var_names: var_names.into() })
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.var_names[v.index()]
    }

    pub fn constants(&self) -> impl Iterator<Item = Constant> + '_ {
        std::iter::once(&self.head).chain(self.body.iter()).flat_map(Atom::constants)
    }

    /// Constants of the rule, each once, in order of first occurrence.
    pub fn voc(&self) -> Vec<Constant> {
        let mut out = Vec::new();
        for c in self.constants() {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Applies `sigma` to head and body; bound variables become constants.
    /// The result keeps the original numbering, so it may not be safe to
    /// rebuild through [`Rule::new`] and is returned as atoms.
    pub fn apply(&self, sigma: &Substitution) -> (Atom, Vec<Atom>) {
        (self.head.apply(sigma), self.body.iter().map(|b| b.apply(sigma)).collect())
    }

    pub fn map_consts(&self, f: impl Fn(Constant) -> Constant) -> Rule {
        Rule {
            head: self.head.map_consts(&f),
            body: self.body.iter().map(|b| b.map_consts(&f)).collect(),
            var_names: self.var_names.clone(),
        }
    }

    /// The fact derived by a substitution binding every body variable.
    pub fn head_fact(&self, tau: &Substitution) -> Triple {
        self.head.instantiate(tau).expect("safe rule head is ground under a body match")
    }

    /// The body facts under a substitution binding every body variable.
    pub fn body_facts<'a>(&'a self, tau: &'a Substitution) -> impl Iterator<Item = Triple> + 'a {
        self.body.iter().map(move |b| b.instantiate(tau).expect("body match grounds every atom"))
    }

    pub fn derives_equality(&self) -> bool {
        self.head.p == Term::Const(SAME_AS)
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Rule {}

impl Hash for Rule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.head.hash(state);
        self.body.hash(state);
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |t: Term| match t {
            Term::Const(c) => c.to_string(),
            Term::Var(v) => format!("?{}", self.var_names[v.index()]),
        };
        let atom = |a: &Atom| format!("[{}, {}, {}]", term(a.s), term(a.p), term(a.o));
        write!(f, "{} :- ", atom(&self.head))?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&atom(b))?;
        }
        f.write_str(" .")
    }
}

/// Which rules have an atom (head or a body position) that may match a
/// fact with a given predicate.
#[derive(Clone, Debug, Default)]
struct PredicateIndex<K> {
    by_pred: HashMap<Constant, Vec<K>>,
    any_pred: Vec<K>,
}

impl<K: Copy + Ord> PredicateIndex<K> {
    fn insert(&mut self, atom: &Atom, key: K) {
        match atom.p {
            Term::Const(p) => self.by_pred.entry(p).or_default().push(key),
            Term::Var(_) => self.any_pred.push(key),
        }
    }

    fn candidates(&self, p: Constant) -> Vec<K> {
        let mut out: Vec<K> = self.by_pred.get(&p).map(|v| v.to_vec()).unwrap_or_default();
        out.extend_from_slice(&self.any_pred);
        out.sort_unstable();
        out
    }
}

/// A finite set of rules in a fixed order, with the annotated queries used
/// for body and head matching precomputed.
#[derive(Clone, Debug, Default)]
pub struct Program {
    rules: Vec<Rule>,
    pub(crate) body_queries: Vec<Vec<AnnotatedQuery>>,
    pub(crate) head_queries: Vec<AnnotatedQuery>,
    body_index: PredicateIndex<(u32, u32)>,
    head_index: PredicateIndex<u32>,
}

impl Program {
    /// Builds a program, dropping duplicate rules (first occurrence kept).
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> Program {
        let mut kept: Vec<Rule> = Vec::new();
        for r in rules {
            if !kept.contains(&r) {
                kept.push(r);
            }
        }
        let mut p = Program { rules: kept, ..Program::default() };
        p.reindex();
        p
    }

    fn reindex(&mut self) {
        self.body_queries.clear();
        self.head_queries.clear();
        self.body_index = PredicateIndex::default();
        self.head_index = PredicateIndex::default();
        for (ri, rule) in self.rules.iter().enumerate() {
            self.head_index.insert(rule.head(), ri as u32);
            self.head_queries.push(AnnotatedQuery::plain(rule.body()));
            let mut per_pos = Vec::with_capacity(rule.body().len());
            for (i, atom) in rule.body().iter().enumerate() {
                self.body_index.insert(atom, (ri as u32, i as u32));
                per_pos.push(AnnotatedQuery::seminaive(rule.body(), i));
            }
            self.body_queries.push(per_pos);
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, i: usize) -> &Rule {
        &self.rules[i]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn contains(&self, r: &Rule) -> bool {
        self.rules.contains(r)
    }

    pub fn voc(&self) -> Vec<Constant> {
        let mut out = Vec::new();
        for c in self.rules.iter().flat_map(Rule::constants) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// `f(Π)` as a set: every rule with its constants mapped, duplicates dropped.
    pub fn map_consts(&self, f: impl Fn(Constant) -> Constant) -> Program {
        Program::new(self.rules.iter().map(|r| r.map_consts(&f)))
    }

    pub fn union(&self, other: &Program) -> Program {
        Program::new(self.rules.iter().chain(other.rules.iter()).cloned())
    }

    /// Replaces every rule `r` with `f(r)` in place, keeping order. A rule
    /// whose image is already present is removed instead. Returns the
    /// positions (after the update) of rules that were replaced by a new rule.
    pub fn normalize_in_place(&mut self, f: impl Fn(Constant) -> Constant) -> Vec<usize> {
        let mut changed_any = false;
        let mut replaced = Vec::new();
        let mut i = 0;
        while i < self.rules.len() {
            let image = self.rules[i].map_consts(&f);
            if image == self.rules[i] {
                i += 1;
                continue;
            }
            changed_any = true;
            if self.rules.contains(&image) {
                self.rules.remove(i);
            } else {
                self.rules[i] = image;
                replaced.push(i);
                i += 1;
            }
        }
        if changed_any {
            self.reindex();
        }
        replaced
    }

    pub(crate) fn body_candidates(&self, p: Constant) -> Vec<(u32, u32)> {
        self.body_index.candidates(p)
    }

    pub(crate) fn head_candidates(&self, p: Constant) -> Vec<u32> {
        self.head_index.candidates(p)
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// The rules ≈1–≈4 axiomatising `owl:sameAs` as a congruence, with ≈4 split
/// into one rule per position.
pub fn equality_axioms() -> Program {
    let (x1, x2, x3, y) = (Var(0), Var(1), Var(2), Var(3));
    let names = || ["x1", "x2", "x3", "y"].map(String::from).to_vec();
    let same = Term::Const(SAME_AS);
    let fact = Atom::new(x1, x2, x3);
    let rules = vec![
        Rule::with_names(Atom::new(y, x2, x3), vec![fact, Atom { s: x1.into(), p: same, o: y.into() }], names()),
        Rule::with_names(Atom::new(x1, y, x3), vec![fact, Atom { s: x2.into(), p: same, o: y.into() }], names()),
        Rule::with_names(Atom::new(x1, x2, y), vec![fact, Atom { s: x3.into(), p: same, o: y.into() }], names()),
        Rule::with_names(Atom { s: x1.into(), p: same, o: x1.into() }, vec![fact], names()),
        Rule::with_names(Atom { s: x2.into(), p: same, o: x2.into() }, vec![fact], names()),
        Rule::with_names(Atom { s: x3.into(), p: same, o: x3.into() }, vec![fact], names()),
    ];
    Program::new(rules.into_iter().map(|r| r.expect("axioms are safe")))
}

/// Index of the replaced position (0, 1, 2) when `rule` is one of ≈1–≈3.
pub fn replacement_position(rule: &Rule) -> Option<usize> {
    let axioms = equality_axioms();
    axioms.rules()[..3].iter().position(|a| a == rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: Constant = Constant(1);
    const D: Constant = Constant(4);
    const C: Constant = Constant(3);

    fn edge(s: impl Into<Term>, o: impl Into<Term>) -> Atom {
        Atom::new(s, R, o)
    }

    #[test]
    fn rejects_empty_body_and_unsafe_head() {
        assert_eq!(Rule::new(edge(Var(0), Var(1)), vec![]), Err(RuleError::EmptyBody));
        assert!(matches!(Rule::new(edge(Var(0), Var(2)), vec![edge(Var(0), Var(1))]), Err(RuleError::Unsafe(_))));
    }

    #[test]
    fn duplicates_removed_on_construction() {
        let r = Rule::new(edge(Var(1), Var(0)), vec![edge(Var(0), Var(1))]).unwrap();
        let p = Program::new([r.clone(), r]);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn normalize_in_place_replaces_and_collapses() {
        let r1 = Rule::new(edge(Var(0), C), vec![edge(Var(0), D)]).unwrap();
        let r2 = Rule::new(edge(Var(0), C), vec![edge(Var(0), C)]).unwrap();
        let r3 = Rule::new(edge(Var(0), D), vec![edge(Var(0), Var(1))]).unwrap();
        let mut p = Program::new([r1, r2.clone(), r3]);
        let changed = p.normalize_in_place(|c| if c == D { C } else { c });
        // r1 collapses onto r2 and is dropped; r3 is rewritten.
        assert_eq!(p.len(), 2);
        assert_eq!(p.rule(0), &r2);
        assert_eq!(changed, vec![1]);
        assert_eq!(p.rule(1).head(), &edge(Var(0), C));
    }

    #[test]
    fn axioms_have_six_rules() {
        let ax = equality_axioms();
        assert_eq!(ax.len(), 6);
        assert_eq!(replacement_position(ax.rule(1)), Some(1));
        assert_eq!(replacement_position(ax.rule(4)), None);
        assert_eq!(ax.voc(), vec![SAME_AS]);
    }
}
