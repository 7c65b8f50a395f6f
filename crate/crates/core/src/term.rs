//! Constants, variables, triples, atoms and substitutions.

use std::fmt;

/// A dictionary-encoded constant. The numeric order of ids is the total
/// order on constants used to pick class representatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Constant(pub u32);

/// `owl:sameAs`, pinned to the smallest id.
pub const SAME_AS: Constant = Constant(0);

impl Constant {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == SAME_AS {
            f.write_str("≈")
        } else {
            write!(f, "#{}", self.0)
        }
    }
}

/// A rule-local variable; rules number their variables densely from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Constant),
    Var(Var),
}

impl Term {
    pub fn as_const(self) -> Option<Constant> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }

    pub fn as_var(self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    /// Resolves the term under `sigma`; unbound variables yield `None`.
    #[inline]
    pub fn resolve(self, sigma: &Substitution) -> Option<Constant> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(v) => sigma.get(v),
        }
    }

    pub fn map_const(self, f: impl Fn(Constant) -> Constant) -> Term {
        match self {
            Term::Const(c) => Term::Const(f(c)),
            v => v,
        }
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Const(c)
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

/// A ground RDF fact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Triple {
    pub s: Constant,
    pub p: Constant,
    pub o: Constant,
}

impl Triple {
    pub const fn new(s: Constant, p: Constant, o: Constant) -> Self {
        Triple { s, p, o }
    }

    /// `a ≈ b`, i.e. `⟨a, owl:sameAs, b⟩`.
    pub const fn same_as(a: Constant, b: Constant) -> Self {
        Triple::new(a, SAME_AS, b)
    }

    /// `c ≈ c`.
    pub const fn reflexive(c: Constant) -> Self {
        Triple::new(c, SAME_AS, c)
    }

    pub fn is_equality(&self) -> bool {
        self.p == SAME_AS
    }

    /// Returns `c` if this fact is `c ≈ c`.
    pub fn as_reflexive(&self) -> Option<Constant> {
        (self.p == SAME_AS && self.s == self.o).then_some(self.s)
    }

    pub fn terms(&self) -> [Constant; 3] {
        [self.s, self.p, self.o]
    }

    pub fn mentions(&self, c: Constant) -> bool {
        self.s == c || self.p == c || self.o == c
    }

    /// Distinct constants of the fact, in s, p, o order of first occurrence.
    pub fn voc(&self) -> impl Iterator<Item = Constant> {
        let [s, p, o] = self.terms();
        let p = (p != s).then_some(p);
        let o = (o != s && Some(o) != p).then_some(o);
        std::iter::once(s).chain(p).chain(o)
    }

    pub fn map(&self, f: impl Fn(Constant) -> Constant) -> Triple {
        Triple::new(f(self.s), f(self.p), f(self.o))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}, {}⟩", self.s, self.p, self.o)
    }
}

/// An RDF atom: a triple pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Atom {
    pub fn new(s: impl Into<Term>, p: impl Into<Term>, o: impl Into<Term>) -> Self {
        Atom { s: s.into(), p: p.into(), o: o.into() }
    }

    pub fn terms(&self) -> [Term; 3] {
        [self.s, self.p, self.o]
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        self.terms().into_iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = Constant> {
        self.terms().into_iter().filter_map(Term::as_const)
    }

    pub fn ground(triple: Triple) -> Self {
        Atom::new(triple.s, triple.p, triple.o)
    }

    /// The triple this atom denotes under `sigma`, if every variable is bound.
    #[inline]
    pub fn instantiate(&self, sigma: &Substitution) -> Option<Triple> {
        Some(Triple::new(self.s.resolve(sigma)?, self.p.resolve(sigma)?, self.o.resolve(sigma)?))
    }

    /// Replaces bound variables; unbound ones stay.
    pub fn apply(&self, sigma: &Substitution) -> Atom {
        let f = |t: Term| match t {
            Term::Var(v) => sigma.get(v).map(Term::Const).unwrap_or(t),
            c => c,
        };
        Atom { s: f(self.s), p: f(self.p), o: f(self.o) }
    }

    pub fn map_consts(&self, f: impl Fn(Constant) -> Constant) -> Atom {
        Atom { s: self.s.map_const(&f), p: self.p.map_const(&f), o: self.o.map_const(&f) }
    }

    /// Extends `sigma` so that this atom instantiates to `fact`. On failure
    /// `sigma` is left unchanged.
    pub fn unify_into(&self, fact: &Triple, sigma: &mut Substitution) -> bool {
        let mut bound = [Var(0); 3];
        let mut n = 0;
        for (term, value) in self.terms().into_iter().zip(fact.terms()) {
            let ok = match term {
                Term::Const(c) => c == value,
                Term::Var(v) => match sigma.get(v) {
                    Some(b) => b == value,
                    None => {
                        sigma.bind(v, value);
                        bound[n] = v;
                        n += 1;
                        true
                    }
                },
            };
            if !ok {
                for v in &bound[..n] {
                    sigma.unbind(*v);
                }
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |t: Term| match t {
            Term::Const(c) => c.to_string(),
            Term::Var(v) => format!("?{}", v.0),
        };
        write!(f, "[{}, {}, {}]", t(self.s), t(self.p), t(self.o))
    }
}

/// A partial map from rule variables to constants, stored densely by
/// variable index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    slots: Vec<Option<Constant>>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn with_capacity(vars: usize) -> Self {
        Substitution { slots: vec![None; vars] }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Constant)>) -> Self {
        let mut s = Substitution::new();
        for (v, c) in pairs {
            s.bind(v, c);
        }
        s
    }

    #[inline]
    pub fn get(&self, v: Var) -> Option<Constant> {
        self.slots.get(v.index()).copied().flatten()
    }

    #[inline]
    pub fn bind(&mut self, v: Var, c: Constant) {
        if self.slots.len() <= v.index() {
            self.slots.resize(v.index() + 1, None);
        }
        self.slots[v.index()] = Some(c);
    }

    #[inline]
    pub fn unbind(&mut self, v: Var) {
        if let Some(slot) = self.slots.get_mut(v.index()) {
            *slot = None;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Constant)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, c)| c.map(|c| (Var(i as u32), c)))
    }

    /// `self ∪ other`, with `other` winning on shared variables.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = self.clone();
        for (v, c) in other.iter() {
            out.bind(v, c);
        }
        out
    }

    pub fn map_consts(&self, f: impl Fn(Constant) -> Constant) -> Substitution {
        Substitution { slots: self.slots.iter().map(|c| c.map(&f)).collect() }
    }

    /// Canonical form with trailing unbound slots dropped, so that equal
    /// partial maps compare equal regardless of capacity.
    pub fn trimmed(&self) -> Substitution {
        let end = self.slots.iter().rposition(Option::is_some).map_or(0, |i| i + 1);
        Substitution { slots: self.slots[..end].to_vec() }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{} ↦ {}", v.0, c)?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Constant = Constant(1);
    const R: Constant = Constant(2);
    const B: Constant = Constant(3);

    #[test]
    fn apply_grounds_bound_variables() {
        let atom = Atom::new(Var(0), R, Var(1));
        let sigma = Substitution::from_pairs([(Var(0), A), (Var(1), B)]);
        assert_eq!(atom.apply(&sigma), Atom::new(A, R, B));
        assert_eq!(atom.instantiate(&sigma), Some(Triple::new(A, R, B)));
        assert_eq!(atom.apply(&Substitution::new()), atom);
        assert_eq!(atom.instantiate(&Substitution::new()), None);
    }

    #[test]
    fn voc_of_equality_contains_same_as() {
        let t = Triple::same_as(A, B);
        assert_eq!(t.voc().collect::<Vec<_>>(), vec![A, SAME_AS, B]);
        assert_eq!(Triple::reflexive(A).voc().collect::<Vec<_>>(), vec![A, SAME_AS]);
        assert_eq!(Triple::reflexive(SAME_AS).voc().count(), 1);
    }

    #[test]
    fn unify_rejects_repeated_variable_mismatch() {
        let atom = Atom::new(Var(0), R, Var(0));
        let mut s = Substitution::new();
        assert!(!atom.unify_into(&Triple::new(A, R, B), &mut s));
        assert!(s.is_empty());
        assert!(atom.unify_into(&Triple::new(A, R, A), &mut s));
        assert_eq!(s.get(Var(0)), Some(A));
    }

    #[test]
    fn trimmed_substitutions_compare_by_content() {
        let mut a = Substitution::with_capacity(4);
        a.bind(Var(1), B);
        let b = Substitution::from_pairs([(Var(1), B)]);
        assert_ne!(a, b);
        assert_eq!(a.trimmed(), b.trimmed());
    }
}
