use std::collections::HashMap;
use std::time::Instant;

use crate::engine::{DerivationCounter, RStore};
use crate::equality::RepMap;
use crate::program::Program;
use crate::rules::{evaluate, fire_all};
use crate::store::{Cursor, FactSet, View};
use crate::term::{Triple, SAME_AS};

use super::observer::{Checkpoint, NoopObserver, Observer, StateView};
use super::{Firing, SetSizes, Site, Trace, UpdateOptions, UpdateReport};

/// Working sets of a deletion under rewriting.
#[derive(Clone, Debug)]
pub struct UpdateState {
    /// `D`: deleted and doubtful facts, all normal w.r.t. `π`.
    pub doubtful: FactSet,
    /// `O`: doubtful facts whose consequences were already propagated.
    pub processed: FactSet,
    /// `C`: facts whose provability was checked.
    pub checked: FactSet,
    /// `P`: proved facts.
    pub proved: FactSet,
    /// `P̄`: proved facts superseded by their normal form under `γ`.
    pub proved_replaced: FactSet,
    /// `Y`: facts derived forward whose class was not yet checked.
    pub blocked: FactSet,
    /// `V`: proved facts already used for forward chaining.
    pub visited: FactSet,
    /// `S`: checked facts shown to have no proof.
    pub disproved: FactSet,
    /// `γ`: the representative map induced by the proved facts.
    pub gamma: RepMap,
    /// `Γ`: the program normalised w.r.t. `γ`.
    pub gamma_program: Program,
    /// `π(Π)`.
    pub pi_program: Program,
}

impl UpdateState {
    fn new(pi: &RepMap, program: &Program, bound: usize) -> Self {
        let mut gamma = RepMap::with_len(bound);
        gamma.ensure_len(bound);
        UpdateState {
            doubtful: FactSet::new(),
            processed: FactSet::new(),
            checked: FactSet::new(),
            proved: FactSet::indexed(),
            proved_replaced: FactSet::new(),
            blocked: FactSet::new(),
            visited: FactSet::indexed(),
            disproved: FactSet::new(),
            gamma,
            gamma_program: program.clone(),
            pi_program: program.map_consts(|c| pi.rep(c)),
        }
    }

    /// Whether `t ∈ P \ P̄`.
    pub fn is_proved(&self, t: &Triple) -> bool {
        self.proved.contains(t) && !self.proved_replaced.contains(t)
    }

    /// `P \ P̄`.
    pub fn proved_current(&self) -> impl Iterator<Item = Triple> + '_ {
        self.proved.iter().filter(|t| !self.proved_replaced.contains(t))
    }

    fn sizes(&self) -> SetSizes {
        SetSizes {
            deleted_or_doubtful: self.doubtful.len(),
            processed: self.processed.len(),
            checked: self.checked.len(),
            proved: self.proved.len(),
            proved_replaced: self.proved_replaced.len(),
            blocked: self.blocked.len(),
            visited: self.visited.len(),
            disproved: self.disproved.len(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Forward chaining only; every derived fact is admitted.
    Materialise,
    Update,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Reflexive,
    Replacement,
    Rules,
    Done,
}

struct Frame {
    fact: Triple,
    phase: Phase,
    pending: Vec<Triple>,
    next: usize,
}

#[derive(Default)]
struct Intake {
    explicit: HashMap<Triple, Vec<Triple>>,
    blocked: HashMap<Triple, Vec<Triple>>,
}

struct Machine<'a> {
    rs: &'a mut RStore,
    st: UpdateState,
    mode: Mode,
    counter: DerivationCounter,
    trace: Option<&'a mut Trace>,
    observer: &'a mut dyn Observer,
    intake: Option<Intake>,
    checked_cursor: Cursor,
    proved_cursor: Cursor,
    disproved_cursor: Cursor,
}

fn notify(observer: &mut dyn Observer, rs: &RStore, st: &UpdateState, at: Checkpoint) {
    let view = StateView { pi: &rs.pi, facts: &rs.facts, explicit: &rs.explicit, program: &rs.program, state: st };
    observer.checkpoint(at, &view);
}

impl<'a> Machine<'a> {
    fn new(rs: &'a mut RStore, mode: Mode, trace: Option<&'a mut Trace>, observer: &'a mut dyn Observer) -> Self {
        let bound = rs.constant_bound();
        rs.pi.ensure_len(bound);
        let st = UpdateState::new(&rs.pi, &rs.program, bound);
        Machine {
            rs,
            st,
            mode,
            counter: DerivationCounter::default(),
            trace,
            observer,
            intake: None,
            checked_cursor: Cursor::default(),
            proved_cursor: Cursor::default(),
            disproved_cursor: Cursor::default(),
        }
    }

    fn all_proved(&self, f: &Triple) -> bool {
        !self.st.disproved.contains(f) && self.rs.pi.expand(f).all(|g| self.st.is_proved(&self.st.gamma.normalize(&g)))
    }

    fn all_disproved(&self, f: &Triple) -> bool {
        !self.rs.pi.expand(f).any(|g| self.st.is_proved(&self.st.gamma.normalize(&g)))
    }

    fn prove(&mut self, f: Triple) {
        self.counter.forward += 1;
        if self.mode == Mode::Materialise || self.st.checked.contains(&self.rs.pi.normalize(&f)) {
            self.st.proved.add(f);
        } else if self.st.blocked.add(f) {
            if let Some(intake) = &mut self.intake {
                intake.blocked.entry(self.rs.pi.normalize(&f)).or_default().push(f);
            }
        }
    }

    fn record(&mut self, site: Site, firings: impl IntoIterator<Item = Firing>) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.firings.extend(firings.into_iter().map(|f| Firing { site, ..f }));
        }
    }

    fn saturate(&mut self) {
        while let Some(f) = self.checked_cursor.next(&self.st.checked) {
            if let Some(c) = f.as_reflexive() {
                for d in self.rs.pi.class_of(c).iter() {
                    if self.rs.in_explicit_voc(d) {
                        let g = self.st.gamma.rep(d);
                        self.st.proved.add(Triple::reflexive(g));
                    }
                }
            }
            let mut sources = Vec::new();
            match &self.intake {
                Some(intake) => {
                    sources.extend(intake.explicit.get(&f).into_iter().flatten().copied());
                    sources.extend(intake.blocked.get(&f).into_iter().flatten().copied());
                }
                None => sources.extend(
                    self.rs.pi.expand(&f).filter(|g| self.rs.explicit.contains(g) || self.st.blocked.contains(g)),
                ),
            }
            for g in sources {
                let g = self.st.gamma.normalize(&g);
                self.st.proved.add(g);
            }
        }

        while let Some(f) = self.proved_cursor.next(&self.st.proved) {
            if self.st.proved_replaced.contains(&f) || !self.st.visited.add(f) {
                continue;
            }
            let g = self.st.gamma.normalize(&f);
            if f != g {
                self.st.proved_replaced.add(f);
                self.st.proved.add(g);
                if let Some(t) = self.trace.as_deref_mut() {
                    t.replacements.push((f, g));
                }
            } else if f.p == SAME_AS && f.s != f.o {
                self.rewrite(f);
            } else {
                for c in g.voc() {
                    self.prove(Triple::reflexive(c));
                }
                let mut heads = Vec::new();
                let mut firings = Vec::new();
                let tracing = self.trace.is_some();
                let st = &self.st;
                let view = View::difference(&st.visited, &st.proved_replaced);
                for m in st.gamma_program.match_body(&g) {
                    let rule = st.gamma_program.rule(m.rule);
                    evaluate(view, m.query, &[g], &m.sigma, &mut |tau| {
                        heads.push(rule.head_fact(tau));
                        if tracing {
                            firings.push(Firing { site: Site::Saturate, rule: rule.clone(), tau: tau.trimmed() });
                        }
                    });
                }
                self.record(Site::Saturate, firings);
                for h in heads {
                    self.prove(h);
                }
            }
        }
    }

    fn rewrite(&mut self, f: Triple) {
        let (c, d) = (f.s.min(f.o), f.s.max(f.o));
        self.st.gamma.merge_into(d, c);
        if let Some(t) = self.trace.as_deref_mut() {
            t.merges.push((d, c));
        }
        for h in self.st.proved.mentioning(d) {
            if self.st.proved_replaced.contains(&h) {
                continue;
            }
            let g = self.st.gamma.normalize(&h);
            self.st.proved_replaced.add(h);
            self.st.proved.add(g);
            if let Some(t) = self.trace.as_deref_mut() {
                t.replacements.push((h, g));
            }
        }
        let gamma = &self.st.gamma;
        let changed = self.st.gamma_program.normalize_in_place(|x| gamma.rep(x));
        for k in changed {
            let mut heads = Vec::new();
            let mut firings = Vec::new();
            let tracing = self.trace.is_some();
            let st = &self.st;
            let rule = st.gamma_program.rule(k);
            fire_all(View::difference(&st.visited, &st.proved_replaced), rule, &mut |tau| {
                heads.push(rule.head_fact(tau));
                if tracing {
                    firings.push(Firing { site: Site::Rewrite, rule: rule.clone(), tau: tau.trimmed() });
                }
            });
            self.record(Site::Rewrite, firings);
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
        notify(self.observer, self.rs, &self.st, Checkpoint::AfterSaturate);
        if self.all_proved(&f) {
            return None;
        }
        Some(Frame { fact: f, phase: Phase::Reflexive, pending: Vec::new(), next: 0 })
    }

    /// Candidates for the next recursive check of `frame`. The lists only
    /// depend on `I` and `S`, which do not change while a check runs.
    fn next_child(&self, frame: &mut Frame) -> Option<Triple> {
        loop {
            if frame.next < frame.pending.len() {
                frame.next += 1;
                return Some(frame.pending[frame.next - 1]);
            }
            frame.pending.clear();
            frame.next = 0;
            let f = frame.fact;
            let st = &self.st;
            match frame.phase {
                Phase::Reflexive => {
                    frame.phase = Phase::Replacement;
                    if let Some(c) = f.as_reflexive() {
                        frame.pending = self
                            .rs
                            .facts
                            .mentioning(c)
                            .into_iter()
                            .filter(|g| !st.disproved.contains(g))
                            .collect();
                    }
                }
                Phase::Replacement => {
                    frame.phase = Phase::Rules;
                    frame.pending = f
                        .voc()
                        .filter(|&c| self.rs.pi.class_size(c) > 1)
                        .map(Triple::reflexive)
                        .filter(|g| !st.disproved.contains(g))
                        .collect();
                }
                Phase::Rules => {
                    frame.phase = Phase::Done;
                    let view = View::difference(&self.rs.facts, &st.disproved);
                    let pending = &mut frame.pending;
                    for m in st.pi_program.match_head(&f) {
                        let rule = st.pi_program.rule(m.rule);
                        evaluate(view, m.query, &[], &m.sigma, &mut |tau| {
                            let start = pending.len();
                            for g in rule.body_facts(tau) {
                                if !pending[start..].contains(&g) {
                                    pending.push(g);
                                }
                            }
                        });
                    }
                }
                Phase::Done => return None,
            }
        }
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
            match self.next_child(&mut top) {
                Some(g) => {
                    self.counter.backward += 1;
                    stack.push(top);
                    match self.enter(g) {
                        Some(child) => stack.push(child),
                        None => self.unwind(&mut stack),
                    }
                }
                None => self.unwind(&mut stack),
            }
        }
    }

    fn propagate_doubt(&mut self, f: Triple) {
        if let Some(c) = f.as_reflexive() {
            if self.rs.pi.class_size(c) > 1 {
                for g in self.rs.facts.mentioning(c) {
                    if !self.st.processed.contains(&g) {
                        self.counter.doubtful += 1;
                        self.st.doubtful.add(g);
                    }
                }
            }
        }
        for c in f.voc() {
            self.counter.doubtful += 1;
            self.st.doubtful.add(Triple::reflexive(c));
        }
        let mut heads = Vec::new();
        let mut firings = Vec::new();
        let tracing = self.trace.is_some();
        let view = View::difference(&self.rs.facts, &self.st.processed);
        for m in self.st.pi_program.match_body(&f) {
            let rule = self.st.pi_program.rule(m.rule);
            evaluate(view, m.query, &[f], &m.sigma, &mut |tau| {
                heads.push(rule.head_fact(tau));
                if tracing {
                    firings.push(Firing { site: Site::Doubt, rule: rule.clone(), tau: tau.trimmed() });
                }
            });
        }
        self.record(Site::Doubt, firings);
        self.counter.doubtful += heads.len() as u64;
        for h in heads {
            self.st.doubtful.add(h);
        }
    }

    fn run_deletion(&mut self, deletions: &[Triple]) -> usize {
        let mut deleted = 0;
        for f in deletions {
            if self.rs.remove_explicit(f) {
                deleted += 1;
                let g = self.rs.pi.normalize(f);
                self.st.doubtful.add(g);
            }
        }
        if let Some(intake) = &mut self.intake {
            for e in self.rs.explicit.iter() {
                intake.explicit.entry(self.rs.pi.normalize(&e)).or_default().push(e);
            }
        }
        let mut cursor = self.st.doubtful.cursor();
        while let Some(f) = cursor.next(&self.st.doubtful) {
            self.check_provability(f);
            notify(self.observer, self.rs, &self.st, Checkpoint::AfterCheck(f));
            while let Some(g) = self.disproved_cursor.next(&self.st.checked) {
                if self.all_disproved(&g) {
                    self.st.disproved.add(g);
                }
            }
            if !self.all_proved(&f) {
                self.propagate_doubt(f);
                self.st.processed.add(f);
            }
            notify(self.observer, self.rs, &self.st, Checkpoint::EndOfIteration);
        }
        notify(self.observer, self.rs, &self.st, Checkpoint::BeforePropagate);
        deleted
    }

    /// Applies `γ` to `π` on checked classes and swaps the disproved facts
    /// for the proved ones. Returns `(added, removed)`.
    fn propagate_changes(&mut self) -> (usize, usize) {
        let mut updates = Vec::new();
        for f in self.st.checked.iter() {
            if let Some(c) = f.as_reflexive() {
                for d in self.rs.pi.class_of(c).iter() {
                    let g = self.st.gamma.rep(d);
                    if g != c {
                        updates.push((d, g));
                    }
                }
            }
        }
        self.rs.pi.reassign(&updates);
        let (mut added, mut removed) = (0, 0);
        for f in self.st.doubtful.iter() {
            if !self.st.is_proved(&f) && self.rs.facts.delete(&f) {
                removed += 1;
            }
        }
        for f in self.st.proved_current() {
            if self.rs.facts.add(self.rs.pi.normalize(&f)) {
                added += 1;
            }
        }
        (added, removed)
    }

    /// Forward closure from the current contents of `P`, then `π := γ` and
    /// `I := P \ P̄`.
    fn close_forward(&mut self) {
        self.saturate();
        self.rs.pi.assign(&self.st.gamma);
        let mut facts = FactSet::indexed();
        facts.extend(self.st.proved_current());
        self.rs.facts = facts;
    }
}

pub(crate) fn materialise(explicit: &FactSet, program: &Program, trace: Option<&mut Trace>) -> RStore {
    let mut rs = RStore::empty(explicit.iter().collect(), program.clone());
    let mut observer = NoopObserver;
    let mut m = Machine::new(&mut rs, Mode::Materialise, trace, &mut observer);
    m.st.proved.extend(explicit.iter());
    m.close_forward();
    let counter = m.counter;
    rs.counter = counter;
    rs
}

pub(crate) fn insert(rs: &mut RStore, facts: &[Triple]) {
    for f in facts {
        rs.add_explicit(*f);
    }
    let mut observer = NoopObserver;
    let mut m = Machine::new(rs, Mode::Materialise, None, &mut observer);
    m.st.gamma.assign(&m.rs.pi);
    let bound = m.rs.constant_bound();
    m.st.gamma.ensure_len(bound);
    let gamma = m.st.gamma.clone();
    m.st.gamma_program = m.st.pi_program.map_consts(|c| gamma.rep(c));
    m.st.proved.extend(m.rs.facts.iter());
    m.st.visited.extend(m.rs.facts.iter());
    m.proved_cursor = m.st.proved.cursor_at_end();
    for f in facts {
        let g = m.st.gamma.normalize(f);
        m.st.proved.add(g);
    }
    m.close_forward();
    let counter = m.counter;
    rs.counter.forward += counter.forward;
}

/// Deletes `deletions` from the explicit facts of `rs` and updates the
/// r-materialisation in place.
pub fn bf_delete(rs: &mut RStore, deletions: &[Triple]) -> UpdateReport {
    bf_delete_with(rs, deletions, UpdateOptions::default(), &mut NoopObserver)
}

pub fn bf_delete_with(
    rs: &mut RStore,
    deletions: &[Triple],
    options: UpdateOptions,
    observer: &mut dyn Observer,
) -> UpdateReport {
    let start = Instant::now();
    let facts_before = rs.facts.len();
    let mut trace = options.trace.then(Trace::default);
    let mut m = Machine::new(rs, Mode::Update, trace.as_mut(), observer);
    if options.bookkeeping {
        m.intake = Some(Intake::default());
    }
    let deleted = m.run_deletion(deletions);
    let (added, removed) = m.propagate_changes();
    let counter = m.counter;
    let sets = m.st.sizes();
    drop(m);
    UpdateReport {
        strategy: "bfeq".into(),
        requested: deletions.len(),
        deleted,
        facts_before,
        facts_after: rs.facts.len(),
        added,
        removed,
        derivations: counter,
        total_derivations: counter.total(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        sets,
        trace,
    }
}
