//! Representative mappings for `owl:sameAs` rewriting.
//!
//! A [`RepMap`] maps every constant to the smallest member of its
//! equivalence class. The map is a flat array over dense ids with eager
//! path collapse on merge, so lookups are a single load; the reverse index
//! keeps each non-singleton class as a sorted member list.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dictionary::Dictionary;
use crate::program::Rule;
use crate::term::{Constant, Substitution, Triple};

#[derive(Clone, Debug, Default)]
pub struct RepMap {
    rep: Vec<Constant>,
    // members[c] is the sorted class of representative c when it has at
    // least two members; empty otherwise.
    members: Vec<Vec<Constant>>,
}

// Maps compare as functions: entries past the end are the identity.
impl PartialEq for RepMap {
    fn eq(&self, other: &Self) -> bool {
        (0..self.len().max(other.len())).all(|i| self.rep(Constant(i as u32)) == other.rep(Constant(i as u32)))
    }
}

impl Eq for RepMap {}

/// The members of a class, `c^π = {d | π(d) = c}`.
#[derive(Clone, Copy, Debug)]
pub enum Members<'a> {
    Empty,
    Single(Constant),
    Many(&'a [Constant]),
}

impl<'a> Members<'a> {
    pub fn len(&self) -> usize {
        match self {
            Members::Empty => 0,
            Members::Single(_) => 1,
            Members::Many(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Members::Empty)
    }

    pub fn contains(&self, c: Constant) -> bool {
        match self {
            Members::Empty => false,
            Members::Single(x) => *x == c,
            Members::Many(m) => m.binary_search(&c).is_ok(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Constant> + 'a {
        let (single, many): (Option<Constant>, &'a [Constant]) = match *self {
            Members::Empty => (None, &[]),
            Members::Single(c) => (Some(c), &[]),
            Members::Many(m) => (None, m),
        };
        single.into_iter().chain(many.iter().copied())
    }

    pub fn to_vec(&self) -> Vec<Constant> {
        self.iter().collect()
    }

    /// The i-th member in id order.
    pub fn get(&self, i: usize) -> Constant {
        match self {
            Members::Single(c) if i == 0 => *c,
            Members::Many(m) => m[i],
            _ => panic!("class member index out of range"),
        }
    }
}

impl RepMap {
    /// The identity mapping.
    pub fn identity() -> Self {
        RepMap::default()
    }

    /// The identity mapping with storage for ids `< n`.
    pub fn with_len(n: usize) -> Self {
        let mut m = RepMap::default();
        m.ensure_len(n);
        m
    }

    /// Grows storage so that ids `< n` are addressable; new ids map to
    /// themselves.
    pub fn ensure_len(&mut self, n: usize) {
        while self.rep.len() < n {
            let c = Constant(self.rep.len() as u32);
            self.rep.push(c);
            self.members.push(Vec::new());
        }
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    #[inline]
    pub fn rep(&self, c: Constant) -> Constant {
        self.rep.get(c.index()).copied().unwrap_or(c)
    }

    pub fn is_identity(&self) -> bool {
        self.rep.iter().enumerate().all(|(i, c)| c.index() == i)
    }

    #[inline]
    pub fn normalize(&self, t: &Triple) -> Triple {
        Triple::new(self.rep(t.s), self.rep(t.p), self.rep(t.o))
    }

    pub fn is_normal(&self, t: &Triple) -> bool {
        self.normalize(t) == *t
    }

    pub fn normalize_rule(&self, r: &Rule) -> Rule {
        r.map_consts(|c| self.rep(c))
    }

    pub fn normalize_substitution(&self, s: &Substitution) -> Substitution {
        s.map_consts(|c| self.rep(c))
    }

    /// `c^π`: every constant whose representative is `c`. Empty when `c`
    /// is not itself a representative.
    pub fn class_of(&self, c: Constant) -> Members<'_> {
        match self.members.get(c.index()) {
            Some(m) if !m.is_empty() => Members::Many(m),
            _ if self.rep(c) == c => Members::Single(c),
            _ => Members::Empty,
        }
    }

    /// Size of the class represented by `rep(c)`.
    pub fn class_size(&self, c: Constant) -> usize {
        self.class_of(self.rep(c)).len()
    }

    /// Representatives of non-singleton classes, ascending.
    pub fn merged_representatives(&self) -> impl Iterator<Item = Constant> + '_ {
        self.members.iter().enumerate().filter(|(_, m)| !m.is_empty()).map(|(i, _)| Constant(i as u32))
    }

    /// Makes `c` the representative of everything `d` currently represents.
    pub fn merge_into(&mut self, d: Constant, c: Constant) {
        assert!(c < d, "merge_into requires the target to precede the source");
        assert!(self.rep(c) == c && self.rep(d) == d, "merge_into requires representatives");
        self.ensure_len(d.index() + 1);
        let moved = std::mem::take(&mut self.members[d.index()]);
        let moved = if moved.is_empty() { vec![d] } else { moved };
        for &e in &moved {
            self.rep[e.index()] = c;
        }
        let mut target = std::mem::take(&mut self.members[c.index()]);
        if target.is_empty() {
            target.push(c);
        }
        target.extend_from_slice(&moved);
        target.sort_unstable();
        self.members[c.index()] = target;
    }

    /// Reassigns representatives in bulk. The caller guarantees the result
    /// is again idempotent and minimal; this is checked in debug builds.
    pub fn reassign(&mut self, updates: &[(Constant, Constant)]) {
        if updates.is_empty() {
            return;
        }
        let max = updates.iter().map(|(d, c)| d.max(c).index() + 1).max().unwrap_or(0);
        self.ensure_len(max);
        let mut groups: BTreeMap<Constant, Vec<Constant>> = BTreeMap::new();
        let moved: std::collections::HashSet<Constant> = updates.iter().map(|(d, _)| *d).collect();
        for &(d, new) in updates {
            groups.entry(self.rep(d)).or_default();
            groups.entry(new).or_default();
        }
        for (&key, list) in groups.iter_mut() {
            list.extend(self.class_of(key).iter().filter(|m| !moved.contains(m)));
        }
        for &(d, new) in updates {
            groups.get_mut(&new).expect("group created above").push(d);
            self.rep[d.index()] = new;
        }
        for (key, mut list) in groups {
            list.sort_unstable();
            list.dedup();
            self.members[key.index()] = if list.len() >= 2 { list } else { Vec::new() };
        }
        debug_assert!(self.check_invariants().is_ok(), "{:?}", self.check_invariants());
    }

    /// Replaces this map's entries with `other`'s.
    pub fn assign(&mut self, other: &RepMap) {
        self.rep.clone_from(&other.rep);
        self.members.clone_from(&other.members);
    }

    /// `F^π`: every triple whose normalisation equals that of `t`, streamed
    /// as the product of the three classes.
    pub fn expand(&self, t: &Triple) -> Expansion<'_> {
        let n = self.normalize(t);
        Expansion::new(self.class_of(n.s), self.class_of(n.p), self.class_of(n.o))
    }

    /// Number of triples in `expand(t)`.
    pub fn expansion_size(&self, t: &Triple) -> usize {
        let n = self.normalize(t);
        self.class_of(n.s).len() * self.class_of(n.p).len() * self.class_of(n.o).len()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, &r) in self.rep.iter().enumerate() {
            let c = Constant(i as u32);
            if self.rep(r) != r {
                return Err(format!("not idempotent at {c}"));
            }
            if r > c {
                return Err(format!("representative {r} of {c} is not minimal"));
            }
            if !self.class_of(r).contains(c) {
                return Err(format!("{c} missing from class of {r}"));
            }
        }
        for (i, m) in self.members.iter().enumerate() {
            let key = Constant(i as u32);
            if m.len() == 1 {
                return Err(format!("explicit singleton class at {key}"));
            }
            if !m.is_empty() && m[0] != key {
                return Err(format!("class of {key} does not start with its representative"));
            }
            if m.iter().any(|d| self.rep(*d) != key) || !m.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("class of {key} is inconsistent"));
            }
        }
        Ok(())
    }

    /// `member -> representative` lines for every non-trivial mapping, sorted.
    pub fn dump(&self, dict: &Dictionary) -> String {
        let mut lines: Vec<String> = self
            .rep
            .iter()
            .enumerate()
            .filter(|(i, c)| c.index() != *i)
            .map(|(i, c)| format!("{} -> {}", dict.render(Constant(i as u32)), dict.render(*c)))
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

/// Iterator over the class product behind [`RepMap::expand`].
pub struct Expansion<'a> {
    s: Members<'a>,
    p: Members<'a>,
    o: Members<'a>,
    idx: [usize; 3],
    done: bool,
}

impl<'a> Expansion<'a> {
    fn new(s: Members<'a>, p: Members<'a>, o: Members<'a>) -> Self {
        let done = s.is_empty() || p.is_empty() || o.is_empty();
        Expansion { s, p, o, idx: [0; 3], done }
    }
}

impl Iterator for Expansion<'_> {
    type Item = Triple;

    fn next(&mut self) -> Option<Triple> {
        if self.done {
            return None;
        }
        let [i, j, k] = self.idx;
        let t = Triple::new(self.s.get(i), self.p.get(j), self.o.get(k));
        self.idx[2] += 1;
        if self.idx[2] == self.o.len() {
            self.idx[2] = 0;
            self.idx[1] += 1;
            if self.idx[1] == self.p.len() {
                self.idx[1] = 0;
                self.idx[0] += 1;
                if self.idx[0] == self.s.len() {
                    self.done = true;
                }
            }
        }
        Some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::SAME_AS;
    use proptest::prelude::*;

    const A: Constant = Constant(1);
    const R: Constant = Constant(2);
    const B: Constant = Constant(3);
    const C: Constant = Constant(4);
    const D: Constant = Constant(5);

    /// `c ↦ a`, `d ↦ b`.
    fn bijective_pi() -> RepMap {
        let mut m = RepMap::with_len(6);
        m.merge_into(C, A);
        m.merge_into(D, B);
        m
    }

    #[test]
    fn normalize_maps_to_representatives() {
        let m = bijective_pi();
        assert_eq!(m.normalize(&Triple::new(C, R, D)), Triple::new(A, R, B));
        assert_eq!(RepMap::identity().normalize(&Triple::new(C, R, D)), Triple::new(C, R, D));
        let once = m.normalize(&Triple::new(C, R, D));
        assert_eq!(m.normalize(&once), once);
        assert_eq!(m.rep(SAME_AS), SAME_AS);
    }

    #[test]
    fn class_of_lists_members() {
        let m = bijective_pi();
        assert_eq!(m.class_of(A).to_vec(), vec![A, C]);
        assert_eq!(m.class_of(R).to_vec(), vec![R]);
        assert!(m.class_of(C).is_empty());
        assert_eq!(RepMap::identity().class_of(A).to_vec(), vec![A]);
    }

    #[test]
    fn expand_enumerates_the_class_product() {
        let m = bijective_pi();
        let got: Vec<_> = m.expand(&Triple::new(A, R, B)).collect();
        assert_eq!(
            got,
            vec![Triple::new(A, R, B), Triple::new(A, R, D), Triple::new(C, R, B), Triple::new(C, R, D)]
        );
        assert_eq!(m.expand(&Triple::new(C, R, D)).count(), 4);
        assert_eq!(RepMap::identity().expand(&Triple::new(A, R, B)).collect::<Vec<_>>(), vec![Triple::new(A, R, B)]);
    }

    #[test]
    fn chained_merges_collapse_paths() {
        let mut m = RepMap::with_len(6);
        m.merge_into(D, C);
        m.merge_into(C, A);
        assert_eq!(m.rep(D), A);
        assert_eq!(m.class_of(A).to_vec(), vec![A, C, D]);
        m.check_invariants().unwrap();
    }

    #[test]
    #[should_panic]
    fn merge_into_rejects_wrong_orientation() {
        RepMap::with_len(6).merge_into(A, C);
    }

    #[test]
    fn reassign_splits_classes() {
        let mut m = bijective_pi();
        m.reassign(&[(A, A), (C, C), (B, B), (D, D)]);
        assert!(m.is_identity());
        m.check_invariants().unwrap();
    }

    #[test]
    fn dump_lists_non_trivial_entries() {
        let mut dict = Dictionary::new();
        for s in [":a", ":R", ":b", ":c", ":d"] {
            dict.intern(s).unwrap();
        }
        assert_eq!(bijective_pi().dump(&dict), ":c -> :a\n:d -> :b\n");
    }

    proptest! {
        // Random merge sequences leave every constant mapped to the minimum
        // of its connected component in the merge graph.
        #[test]
        fn merges_match_component_minimum(pairs in proptest::collection::vec((0u32..12, 0u32..12), 0..20)) {
            let n = 12;
            let mut m = RepMap::with_len(n);
            // oracle: explicit components
            let mut comp: Vec<usize> = (0..n).collect();
            for (a, b) in pairs {
                let (a, b) = (Constant(a), Constant(b));
                let (ra, rb) = (m.rep(a), m.rep(b));
                if ra != rb {
                    m.merge_into(ra.max(rb), ra.min(rb));
                }
                let (ca, cb) = (comp[a.index()], comp[b.index()]);
                for x in comp.iter_mut() {
                    if *x == cb { *x = ca; }
                }
            }
            m.check_invariants().map_err(TestCaseError::fail)?;
            for i in 0..n {
                let min = (0..n).filter(|j| comp[*j] == comp[i]).min().unwrap();
                prop_assert_eq!(m.rep(Constant(i as u32)), Constant(min as u32));
            }
        }

        // Normalisation and expansion are adjoint.
        #[test]
        fn expansion_adjunction(pairs in proptest::collection::vec((0u32..6, 0u32..6), 0..6), t in (0u32..6, 0u32..6, 0u32..6)) {
            let mut m = RepMap::with_len(6);
            for (a, b) in pairs {
                let (ra, rb) = (m.rep(Constant(a)), m.rep(Constant(b)));
                if ra != rb { m.merge_into(ra.max(rb), ra.min(rb)); }
            }
            let g = Triple::new(Constant(t.0), Constant(t.1), Constant(t.2));
            let f = m.normalize(&g);
            let exp: Vec<_> = m.expand(&f).collect();
            prop_assert!(exp.contains(&g));
            prop_assert_eq!(exp.len(), m.expansion_size(&f));
            prop_assert_eq!(exp.len(), m.class_of(f.s).len() * m.class_of(f.p).len() * m.class_of(f.o).len());
            for h in exp {
                prop_assert_eq!(m.normalize(&h), f);
            }
        }
    }
}
