//! Insertion-ordered fact sets with cursors and optional position indexes.
//!
//! A [`FactSet`] keeps its facts in an append-only sequence. Deleting a fact
//! leaves a tombstone in its slot, so positions are stable and a [`Cursor`]
//! sees every fact that is added behind it, including facts added while the
//! cursor is being advanced.

use std::collections::HashMap;

use crate::term::{Atom, Constant, Substitution, Term, Triple};

type Positions = Vec<u32>;

#[derive(Clone, Debug, Default)]
struct Indexes {
    s: HashMap<Constant, Positions>,
    p: HashMap<Constant, Positions>,
    o: HashMap<Constant, Positions>,
    sp: HashMap<(Constant, Constant), Positions>,
    po: HashMap<(Constant, Constant), Positions>,
    so: HashMap<(Constant, Constant), Positions>,
}

impl Indexes {
    fn insert(&mut self, t: Triple, pos: u32) {
        self.s.entry(t.s).or_default().push(pos);
        self.p.entry(t.p).or_default().push(pos);
        self.o.entry(t.o).or_default().push(pos);
        self.sp.entry((t.s, t.p)).or_default().push(pos);
        self.po.entry((t.p, t.o)).or_default().push(pos);
        self.so.entry((t.s, t.o)).or_default().push(pos);
    }
}

/// A set of triples with stable insertion order.
#[derive(Clone, Debug, Default)]
pub struct FactSet {
    slots: Vec<Option<Triple>>,
    positions: HashMap<Triple, u32>,
    index: Option<Box<Indexes>>,
}

impl FactSet {
    /// A set supporting membership and cursors; pattern lookups scan.
    pub fn new() -> Self {
        FactSet::default()
    }

    /// A set that also maintains subject/predicate/object indexes.
    pub fn indexed() -> Self {
        FactSet { index: Some(Box::default()), ..FactSet::default() }
    }

    pub fn is_indexed(&self) -> bool {
        self.index.is_some()
    }

    /// Adds `t`; returns true iff the set changed.
    pub fn add(&mut self, t: Triple) -> bool {
        if self.positions.contains_key(&t) {
            return false;
        }
        let pos = self.slots.len() as u32;
        self.slots.push(Some(t));
        self.positions.insert(t, pos);
        if let Some(ix) = self.index.as_deref_mut() {
            ix.insert(t, pos);
        }
        true
    }

    /// Removes `t`; returns true iff the set changed.
    pub fn delete(&mut self, t: &Triple) -> bool {
        match self.positions.remove(t) {
            Some(pos) => {
                self.slots[pos as usize] = None;
                true
            }
            None => false,
        }
    }

    #[inline]
    pub fn contains(&self, t: &Triple) -> bool {
        self.positions.contains_key(t)
    }

    /// Insertion position of a live fact.
    #[inline]
    pub fn position(&self, t: &Triple) -> Option<u32> {
        self.positions.get(t).copied()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Live facts in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.slots.iter().filter_map(|t| *t)
    }

    pub fn cursor(&self) -> Cursor {
        Cursor::default()
    }

    /// A cursor positioned after every fact currently in the set.
    pub fn cursor_at_end(&self) -> Cursor {
        Cursor { pos: self.slots.len() }
    }

    /// Live facts agreeing with the bound positions, in insertion order.
    pub fn lookup(
        &self,
        s: Option<Constant>,
        p: Option<Constant>,
        o: Option<Constant>,
    ) -> Box<dyn Iterator<Item = (u32, Triple)> + '_> {
        if let (Some(s), Some(p), Some(o)) = (s, p, o) {
            let t = Triple::new(s, p, o);
            return Box::new(self.position(&t).map(|pos| (pos, t)).into_iter());
        }
        let Some(ix) = self.index.as_deref() else {
            return Box::new(self.scan().filter(move |(_, t)| {
                unbound_or(s, t.s) && unbound_or(p, t.p) && unbound_or(o, t.o)
            }));
        };
        let list = match (s, p, o) {
            (None, None, None) => return Box::new(self.scan()),
            (Some(s), None, None) => ix.s.get(&s),
            (None, Some(p), None) => ix.p.get(&p),
            (None, None, Some(o)) => ix.o.get(&o),
            (Some(s), Some(p), None) => ix.sp.get(&(s, p)),
            (None, Some(p), Some(o)) => ix.po.get(&(p, o)),
            (Some(s), None, Some(o)) => ix.so.get(&(s, o)),
            (Some(_), Some(_), Some(_)) => unreachable!(),
        };
        match list {
            Some(list) => Box::new(
                list.iter().filter_map(move |&pos| self.slots[pos as usize].map(|t| (pos, t))),
            ),
            None => Box::new(std::iter::empty()),
        }
    }

    /// Live facts mentioning `c` in any position, each once.
    pub fn mentioning(&self, c: Constant) -> Vec<Triple> {
        let mut out: Vec<(u32, Triple)> = self
            .lookup(Some(c), None, None)
            .chain(self.lookup(None, Some(c), None).filter(|(_, t)| t.s != c))
            .chain(self.lookup(None, None, Some(c)).filter(|(_, t)| t.s != c && t.p != c))
            .collect();
        out.sort_unstable_by_key(|(pos, _)| *pos);
        out.into_iter().map(|(_, t)| t).collect()
    }

    /// Every extension of `sigma` grounding `pattern` into this set.
    pub fn match_pattern<'a>(
        &'a self,
        pattern: &'a Atom,
        sigma: &'a Substitution,
    ) -> impl Iterator<Item = Substitution> + 'a {
        let s = pattern.s.resolve(sigma);
        let p = pattern.p.resolve(sigma);
        let o = pattern.o.resolve(sigma);
        self.lookup(s, p, o).filter_map(move |(_, t)| {
            let mut tau = sigma.clone();
            pattern.unify_into(&t, &mut tau).then_some(tau)
        })
    }

    fn scan(&self) -> impl Iterator<Item = (u32, Triple)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, t)| t.map(|t| (i as u32, t)))
    }

    /// Sequence length including tombstones.
    pub(crate) fn extent(&self) -> usize {
        self.slots.len()
    }

    pub(crate) fn slot(&self, pos: usize) -> Option<Triple> {
        self.slots.get(pos).copied().flatten()
    }
}

fn unbound_or(slot: Option<Constant>, c: Constant) -> bool {
    slot.is_none_or(|x| x == c)
}

impl FromIterator<Triple> for FactSet {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut set = FactSet::new();
        set.extend(iter);
        set
    }
}

impl Extend<Triple> for FactSet {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.add(t);
        }
    }
}

impl PartialEq for FactSet {
    /// Set equality; insertion order is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|t| other.contains(&t))
    }
}

impl Eq for FactSet {}

/// A position in a [`FactSet`]'s insertion sequence. Returns each live fact
/// at most once and `None` exactly when it has reached the current end.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Cursor {
    pos: usize,
}

impl Cursor {
    pub fn next(&mut self, set: &FactSet) -> Option<Triple> {
        while self.pos < set.extent() {
            let t = set.slot(self.pos);
            self.pos += 1;
            if t.is_some() {
                return t;
            }
        }
        None
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

/// The set difference `[base \ minus]`, optionally restricted to the first
/// `limit` insertion positions of `base`.
#[derive(Clone, Copy)]
pub struct View<'a> {
    base: &'a FactSet,
    minus: Option<&'a FactSet>,
    limit: Option<u32>,
}

impl<'a> View<'a> {
    pub fn all(base: &'a FactSet) -> Self {
        View { base, minus: None, limit: None }
    }

    pub fn difference(base: &'a FactSet, minus: &'a FactSet) -> Self {
        View { base, minus: Some(minus), limit: None }
    }

    /// Facts of `base` inserted at positions `< limit`.
    pub fn prefix(base: &'a FactSet, limit: usize) -> Self {
        View { base, minus: None, limit: Some(limit as u32) }
    }

    #[inline]
    fn admits(&self, pos: u32, t: &Triple) -> bool {
        self.limit.is_none_or(|l| pos < l) && self.minus.is_none_or(|m| !m.contains(t))
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.base.position(t).is_some_and(|pos| self.admits(pos, t))
    }

    pub fn lookup(
        &self,
        s: Option<Constant>,
        p: Option<Constant>,
        o: Option<Constant>,
    ) -> impl Iterator<Item = Triple> + 'a {
        let view = *self;
        self.base.lookup(s, p, o).filter(move |(pos, t)| view.admits(*pos, t)).map(|(_, t)| t)
    }

    /// Candidates for `atom` given the constants bound by `sigma`.
    pub(crate) fn candidates(&self, atom: &Atom, sigma: &Substitution) -> impl Iterator<Item = Triple> + 'a {
        let r = |t: Term| t.resolve(sigma);
        self.lookup(r(atom.s), r(atom.p), r(atom.o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Var;
    use proptest::prelude::*;

    fn t(s: u32, p: u32, o: u32) -> Triple {
        Triple::new(Constant(s), Constant(p), Constant(o))
    }

    #[test]
    fn add_and_delete_report_change() {
        let mut x = FactSet::indexed();
        assert!(x.add(t(1, 2, 3)));
        assert!(!x.add(t(1, 2, 3)));
        assert_eq!(x.len(), 1);
        assert!(x.delete(&t(1, 2, 3)));
        assert!(!x.delete(&t(1, 2, 3)));
        assert!(!FactSet::new().delete(&t(1, 2, 3)));
        assert!(x.is_empty());
    }

    #[test]
    fn cursor_sees_facts_added_behind_it() {
        let mut x = FactSet::new();
        let mut c = x.cursor_at_end();
        assert_eq!(c.next(&x), None);
        x.add(t(1, 2, 3));
        assert_eq!(c.next(&x), Some(t(1, 2, 3)));
        assert_eq!(c.next(&x), None);
    }

    #[test]
    fn cursor_skips_tombstones_and_readded_facts_move_to_the_end() {
        let mut x: FactSet = [t(1, 1, 1), t(2, 2, 2), t(3, 3, 3)].into_iter().collect();
        x.delete(&t(2, 2, 2));
        x.add(t(2, 2, 2));
        let mut c = x.cursor();
        let seen: Vec<_> = std::iter::from_fn(|| c.next(&x)).collect();
        assert_eq!(seen, vec![t(1, 1, 1), t(3, 3, 3), t(2, 2, 2)]);
    }

    #[test]
    fn repeated_variable_pattern_filters() {
        let x: FactSet = [t(1, 2, 3)].into_iter().collect();
        let pat = Atom::new(Var(0), Constant(2), Var(0));
        assert_eq!(x.match_pattern(&pat, &Substitution::new()).count(), 0);
        let pat = Atom::new(Var(0), Constant(2), Var(1));
        let got: Vec<_> = x.match_pattern(&pat, &Substitution::new()).collect();
        assert_eq!(got, vec![Substitution::from_pairs([(Var(0), Constant(1)), (Var(1), Constant(3))])]);
    }

    #[test]
    fn mentioning_reports_each_fact_once() {
        let x: FactSet = [t(1, 1, 1), t(1, 2, 3), t(4, 1, 5), t(6, 7, 8)].into_iter().collect();
        let mut x2 = FactSet::indexed();
        x2.extend(x.iter());
        for set in [&x, &x2] {
            assert_eq!(set.mentioning(Constant(1)), vec![t(1, 1, 1), t(1, 2, 3), t(4, 1, 5)]);
        }
    }

    #[test]
    fn views_exclude_minus_and_respect_prefix() {
        let x: FactSet = [t(1, 2, 3), t(1, 2, 4), t(1, 2, 5)].into_iter().collect();
        let minus: FactSet = [t(1, 2, 4)].into_iter().collect();
        let v = View::difference(&x, &minus);
        assert_eq!(v.lookup(Some(Constant(1)), None, None).collect::<Vec<_>>(), vec![t(1, 2, 3), t(1, 2, 5)]);
        let v = View::prefix(&x, 2);
        assert!(v.contains(&t(1, 2, 4)));
        assert!(!v.contains(&t(1, 2, 5)));
    }

    fn arb_triple() -> impl Strategy<Value = Triple> {
        (0u32..4, 0u32..3, 0u32..4).prop_map(|(s, p, o)| t(s, p, o))
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            (0u32..4).prop_map(|c| Term::Const(Constant(c))),
            (0u32..3).prop_map(|v| Term::Var(Var(v))),
        ]
    }

    proptest! {
        // Index-served lookups agree with a linear scan filter.
        #[test]
        fn indexed_match_equals_scan(
            facts in proptest::collection::vec(arb_triple(), 0..20),
            deletions in proptest::collection::vec(arb_triple(), 0..5),
            (s, p, o) in (arb_term(), arb_term(), arb_term()),
        ) {
            let mut indexed = FactSet::indexed();
            let mut plain = FactSet::new();
            for f in &facts { indexed.add(*f); plain.add(*f); }
            for f in &deletions { indexed.delete(f); plain.delete(f); }
            let pat = Atom { s, p, o };
            let sigma = Substitution::new();
            let a: Vec<_> = indexed.match_pattern(&pat, &sigma).collect();
            let b: Vec<_> = plain.match_pattern(&pat, &sigma).collect();
            let oracle: Vec<_> = plain.iter().filter_map(|f| {
                let mut tau = Substitution::new();
                pat.unify_into(&f, &mut tau).then_some(tau)
            }).collect();
            prop_assert_eq!(&a, &oracle);
            prop_assert_eq!(&b, &oracle);
        }

        // A cursor run to exhaustion returns the set contents at that moment,
        // each once, in insertion order, whatever the interleaving of adds.
        #[test]
        fn cursor_returns_live_contents(ops in proptest::collection::vec((arb_triple(), any::<bool>()), 0..40)) {
            let mut x = FactSet::new();
            let mut c = x.cursor();
            let mut seen = Vec::new();
            for (f, read) in ops {
                x.add(f);
                if read {
                    if let Some(g) = c.next(&x) { seen.push(g); }
                }
            }
            while let Some(g) = c.next(&x) { seen.push(g); }
            prop_assert_eq!(seen, x.iter().collect::<Vec<_>>());
        }
    }
}
