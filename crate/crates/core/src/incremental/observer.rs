use crate::equality::RepMap;
use crate::program::Program;
use crate::store::FactSet;
use crate::term::Triple;

use super::bfeq::UpdateState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Checkpoint {
    /// Right after the forward closure run at the start of a provability check.
    AfterSaturate,
    /// After a top-level provability check of the given fact returned.
    AfterCheck(Triple),
    /// At the end of an iteration of the main deletion loop.
    EndOfIteration,
    /// After the main loop, before `π` and `I` are updated.
    BeforePropagate,
}

/// Read-only access to an update in progress.
pub struct StateView<'a> {
    /// The representative map before the update.
    pub pi: &'a RepMap,
    /// The stored facts `I` before the update.
    pub facts: &'a FactSet,
    /// The explicit facts after the deletion.
    pub explicit: &'a FactSet,
    pub program: &'a Program,
    pub state: &'a UpdateState,
}

pub trait Observer {
    fn checkpoint(&mut self, at: Checkpoint, view: &StateView<'_>);
}

pub struct NoopObserver;

impl Observer for NoopObserver {
    fn checkpoint(&mut self, _: Checkpoint, _: &StateView<'_>) {}
}

impl<F: FnMut(Checkpoint, &StateView<'_>)> Observer for F {
    fn checkpoint(&mut self, at: Checkpoint, view: &StateView<'_>) {
        self(at, view)
    }
}
