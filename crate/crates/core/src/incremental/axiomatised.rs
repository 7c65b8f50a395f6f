use std::time::Instant;

use crate::engine::{AxiomStore, DerivationCounter};
use crate::program::{equality_axioms, Program};
use crate::rules::evaluate;
use crate::store::{Cursor, FactSet, View};
use crate::term::Triple;

use super::{Firing, SetSizes, Site, Trace, UpdateOptions, UpdateReport};

/// Working sets of a deletion under axiomatised equality.
#[derive(Clone, Debug, Default)]
pub struct AxiomUpdateState {
    pub doubtful: FactSet,
    pub processed: FactSet,
    pub checked: FactSet,
    pub proved: FactSet,
    pub blocked: FactSet,
    pub visited: FactSet,
    pub disproved: FactSet,
}

struct Frame {
    fact: Triple,
    pending: Vec<Triple>,
    next: usize,
}

struct Machine<'a> {
    store: &'a mut AxiomStore,
    program: Program,
    st: AxiomUpdateState,
    counter: DerivationCounter,
    trace: Option<&'a mut Trace>,
    checked_cursor: Cursor,
    proved_cursor: Cursor,
    disproved_cursor: Cursor,
}

impl Machine<'_> {
    fn all_proved(&self, f: &Triple) -> bool {
        !self.st.disproved.contains(f) && self.st.proved.contains(f)
    }

    fn prove(&mut self, f: Triple) {
        self.counter.forward += 1;
        if self.st.checked.contains(&f) {
            self.st.proved.add(f);
        } else {
            self.st.blocked.add(f);
        }
    }

    fn saturate(&mut self) {
        while let Some(f) = self.checked_cursor.next(&self.st.checked) {
            if self.store.explicit.contains(&f) || self.st.blocked.contains(&f) {
                self.st.proved.add(f);
            }
        }
        while let Some(f) = self.proved_cursor.next(&self.st.proved) {
            if !self.st.visited.add(f) {
                continue;
            }
            let mut heads = Vec::new();
            let mut firings = Vec::new();
            let tracing = self.trace.is_some();
            let view = View::all(&self.st.visited);
            for m in self.program.match_body(&f) {
                let rule = self.program.rule(m.rule);
                evaluate(view, m.query, &[f], &m.sigma, &mut |tau| {
                    heads.push(rule.head_fact(tau));
                    if tracing {
                        firings.push(Firing { site: Site::Saturate, rule: rule.clone(), tau: tau.trimmed() });
                    }
                });
            }
            if let Some(t) = self.trace.as_deref_mut() {
                t.firings.extend(firings);
            }
            for h in heads {
                self.prove(h);
            }
        }
    }

    fn enter(&mut self, f: Triple) -> Option<Frame> {
        if !self.st.checked.add(f) {
            return None;
        }
        self.saturate();
        if self.all_proved(&f) {
            return None;
        }
        let mut pending = Vec::new();
        let view = View::difference(&self.store.facts, &self.st.disproved);
        for m in self.program.match_head(&f) {
            let rule = self.program.rule(m.rule);
            evaluate(view, m.query, &[], &m.sigma, &mut |tau| {
                let start = pending.len();
                for g in rule.body_facts(tau) {
                    if !pending[start..].contains(&g) {
                        pending.push(g);
                    }
                }
            });
        }
        Some(Frame { fact: f, pending, next: 0 })
    }

    fn unwind(&self, stack: &mut Vec<Frame>) {
        while let Some(top) = stack.last() {
            if self.all_proved(&top.fact) {
                stack.pop();
            } else {
                break;
            }
        }
    }

    fn check_provability(&mut self, root: Triple) {
        let Some(frame) = self.enter(root) else { return };
        let mut stack = vec![frame];
        while let Some(mut top) = stack.pop() {
            if top.next == top.pending.len() {
                self.unwind(&mut stack);
                continue;
            }
            let g = top.pending[top.next];
            top.next += 1;
            self.counter.backward += 1;
            stack.push(top);
            match self.enter(g) {
                Some(child) => stack.push(child),
                None => self.unwind(&mut stack),
            }
        }
    }

    fn run(&mut self, deletions: &[Triple]) -> usize {
        let mut deleted = 0;
        for f in deletions {
            if self.store.explicit.delete(f) {
                deleted += 1;
                self.st.doubtful.add(*f);
            }
        }
        let mut cursor = self.st.doubtful.cursor();
        while let Some(f) = cursor.next(&self.st.doubtful) {
            self.check_provability(f);
            while let Some(g) = self.disproved_cursor.next(&self.st.checked) {
                if !self.st.proved.contains(&g) {
                    self.st.disproved.add(g);
                }
            }
            if self.all_proved(&f) {
                continue;
            }
            let mut heads = Vec::new();
            let mut firings = Vec::new();
            let tracing = self.trace.is_some();
            let view = View::difference(&self.store.facts, &self.st.processed);
            for m in self.program.match_body(&f) {
                let rule = self.program.rule(m.rule);
                evaluate(view, m.query, &[f], &m.sigma, &mut |tau| {
                    heads.push(rule.head_fact(tau));
                    if tracing {
                        firings.push(Firing { site: Site::Doubt, rule: rule.clone(), tau: tau.trimmed() });
                    }
                });
            }
            if let Some(t) = self.trace.as_deref_mut() {
                t.firings.extend(firings);
            }
            self.counter.doubtful += heads.len() as u64;
            for h in heads {
                self.st.doubtful.add(h);
            }
            self.st.processed.add(f);
        }
        deleted
    }

    fn propagate_changes(&mut self) -> usize {
        let mut removed = 0;
        for f in self.st.doubtful.iter() {
            if !self.st.proved.contains(&f) && self.store.facts.delete(&f) {
                removed += 1;
            }
        }
        removed
    }
}

/// Deletes `deletions` from the explicit facts of `store` and updates the
/// materialisation in place, treating `owl:sameAs` as an ordinary predicate.
pub fn bf_delete_axiomatised(store: &mut AxiomStore, deletions: &[Triple]) -> UpdateReport {
    bf_delete_axiomatised_with(store, deletions, UpdateOptions::default())
}

pub fn bf_delete_axiomatised_with(store: &mut AxiomStore, deletions: &[Triple], options: UpdateOptions) -> UpdateReport {
    let start = Instant::now();
    let facts_before = store.facts.len();
    let mut trace = options.trace.then(Trace::default);
    let program = store.program.union(&equality_axioms());
    let mut m = Machine {
        store,
        program,
        st: AxiomUpdateState { visited: FactSet::indexed(), ..Default::default() },
        counter: DerivationCounter::default(),
        trace: trace.as_mut(),
        checked_cursor: Cursor::default(),
        proved_cursor: Cursor::default(),
        disproved_cursor: Cursor::default(),
    };
    let deleted = m.run(deletions);
    let removed = m.propagate_changes();
    let counter = m.counter;
    let st = &m.st;
    let sets = SetSizes {
        deleted_or_doubtful: st.doubtful.len(),
        processed: st.processed.len(),
        checked: st.checked.len(),
        proved: st.proved.len(),
        proved_replaced: 0,
        blocked: st.blocked.len(),
        visited: st.visited.len(),
        disproved: st.disproved.len(),
    };
    drop(m);
    UpdateReport {
        strategy: "bf-axiom".into(),
        requested: deletions.len(),
        deleted,
        facts_before,
        facts_after: store.facts.len(),
        added: 0,
        removed,
        derivations: counter,
        total_derivations: counter.total(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        sets,
        trace,
    }
}
