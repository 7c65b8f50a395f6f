//! Annotated queries, body/head matching and query evaluation.
//!
//! `match_body` pairs a fact with each rule body atom it instantiates and
//! returns the rest of the body as a query in which the atoms *before* the
//! matched one are annotated [`Annotation::Excluded`]. Evaluating such a
//! query with the probed fact as the excluded set means a substitution that
//! could be found from two body positions is reported only from the first.

use crate::program::{Program, Rule};
use crate::store::View;
use crate::term::{Atom, Substitution, Triple, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Annotation {
    Plain,
    /// The `≠` annotation: the atom must match outside the excluded set.
    Excluded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedQuery {
    atoms: Vec<(Atom, Annotation)>,
}

impl AnnotatedQuery {
    pub fn new(atoms: Vec<(Atom, Annotation)>) -> Self {
        AnnotatedQuery { atoms }
    }

    /// All atoms plain.
    pub fn plain(atoms: &[Atom]) -> Self {
        AnnotatedQuery { atoms: atoms.iter().map(|a| (*a, Annotation::Plain)).collect() }
    }

    /// `B₁^≠ ∧ … ∧ B_{i−1}^≠ ∧ B_{i+1} ∧ … ∧ Bₙ` for matched position `i`.
    pub fn seminaive(body: &[Atom], matched: usize) -> Self {
        let atoms = body
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != matched)
            .map(|(j, a)| (*a, if j < matched { Annotation::Excluded } else { Annotation::Plain }))
            .collect();
        AnnotatedQuery { atoms }
    }

    pub fn atoms(&self) -> &[(Atom, Annotation)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A fact matched against body atom `position` of rule `rule`.
#[derive(Clone, Debug)]
pub struct BodyMatch<'p> {
    pub rule: usize,
    pub position: usize,
    pub query: &'p AnnotatedQuery,
    pub sigma: Substitution,
}

/// A fact matched against the head of rule `rule`; `query` is the full body.
#[derive(Clone, Debug)]
pub struct HeadMatch<'p> {
    pub rule: usize,
    pub query: &'p AnnotatedQuery,
    pub sigma: Substitution,
}

impl Program {
    /// Every (rule, body position, σ) with `Bᵢσ = fact`, in rule order and
    /// then body-position order.
    pub fn match_body(&self, fact: &Triple) -> Vec<BodyMatch<'_>> {
        let mut out = Vec::new();
        for (ri, pos) in self.body_candidates(fact.p) {
            let (ri, pos) = (ri as usize, pos as usize);
            let rule = self.rule(ri);
            let mut sigma = Substitution::with_capacity(rule.var_count());
            if rule.body()[pos].unify_into(fact, &mut sigma) {
                out.push(BodyMatch { rule: ri, position: pos, query: &self.body_queries[ri][pos], sigma });
            }
        }
        out
    }

    /// Every (rule, σ) with `Hσ = fact`, in rule order.
    pub fn match_head(&self, fact: &Triple) -> Vec<HeadMatch<'_>> {
        let mut out = Vec::new();
        for ri in self.head_candidates(fact.p) {
            let ri = ri as usize;
            let rule = self.rule(ri);
            let mut sigma = Substitution::with_capacity(rule.var_count());
            if rule.head().unify_into(fact, &mut sigma) {
                out.push(HeadMatch { rule: ri, query: &self.head_queries[ri], sigma });
            }
        }
        out
    }
}

/// Calls `emit` with each smallest `τ ⊇ σ` such that every plain atom of
/// `query` instantiates into `view` and every excluded atom into
/// `view \ excluded`. Atoms are joined left to right.
pub fn evaluate(
    view: View<'_>,
    query: &AnnotatedQuery,
    excluded: &[Triple],
    sigma: &Substitution,
    emit: &mut dyn FnMut(&Substitution),
) {
    let mut tau = sigma.clone();
    join(view, query.atoms(), excluded, &mut tau, emit);
}

/// Collecting form of [`evaluate`].
pub fn evaluate_all(
    view: View<'_>,
    query: &AnnotatedQuery,
    excluded: &[Triple],
    sigma: &Substitution,
) -> Vec<Substitution> {
    let mut out = Vec::new();
    evaluate(view, query, excluded, sigma, &mut |tau| out.push(tau.clone()));
    out
}

fn join(
    view: View<'_>,
    atoms: &[(Atom, Annotation)],
    excluded: &[Triple],
    tau: &mut Substitution,
    emit: &mut dyn FnMut(&Substitution),
) {
    let Some(((atom, ann), rest)) = atoms.split_first() else {
        emit(tau);
        return;
    };
    let mut fresh = [Var(0); 3];
    let mut n = 0;
    for v in atom.vars() {
        if tau.get(v).is_none() && !fresh[..n].contains(&v) {
            fresh[n] = v;
            n += 1;
        }
    }
    for fact in view.candidates(atom, tau) {
        if *ann == Annotation::Excluded && excluded.contains(&fact) {
            continue;
        }
        if atom.unify_into(&fact, tau) {
            join(view, rest, excluded, tau, emit);
            for v in &fresh[..n] {
                tau.unbind(*v);
            }
        }
    }
}

/// Applies the rule to every instantiation of its body in `view`.
pub fn fire_all(view: View<'_>, rule: &Rule, emit: &mut dyn FnMut(&Substitution)) {
    let q = AnnotatedQuery::plain(rule.body());
    evaluate(view, &q, &[], &Substitution::with_capacity(rule.var_count()), emit);
}
