//! Incremental deletion from materialisations.
//!
//! [`bf_delete`] updates an r-materialisation `(π, I)` in place after
//! removing explicit facts, combining backward chaining (to keep facts that
//! still have a proof) with forward chaining under a fresh representative
//! map `γ` (to work out how the affected classes split). The same forward
//! machinery computes initial r-materialisations.
//!
//! [`bf_delete_axiomatised`] is the baseline that treats `owl:sameAs` as an
//! ordinary predicate governed by the equality axioms.

mod axiomatised;
mod bfeq;
mod observer;

use std::collections::HashMap;

use serde::Serialize;

use crate::engine::DerivationCounter;
use crate::program::Rule;
use crate::term::{Constant, Substitution, Triple};

pub use axiomatised::{bf_delete_axiomatised, bf_delete_axiomatised_with, AxiomUpdateState};
pub(crate) use bfeq::{insert, materialise};
pub use bfeq::{bf_delete, bf_delete_with, UpdateState};
pub use observer::{Checkpoint, NoopObserver, Observer, StateView};

/// Where a rule instance was applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Site {
    /// Semi-naive evaluation under axiomatised equality.
    Seminaive,
    /// Forward chaining from a newly proved fact.
    Saturate,
    /// Re-evaluation of a rule rewritten by a merge.
    Rewrite,
    /// Propagation of doubt from a deleted or doubtful fact.
    Doubt,
}

/// One rule instance: the rule as it was at the time and the matching
/// substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Firing {
    pub site: Site,
    pub rule: Rule,
    pub tau: Substitution,
}

/// A log of the work performed by a materialisation or update.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub firings: Vec<Firing>,
    /// Facts replaced by their normal form, as `(from, to)`.
    pub replacements: Vec<(Triple, Triple)>,
    /// Class merges as `(absorbed, representative)`.
    pub merges: Vec<(Constant, Constant)>,
}

impl Trace {
    pub fn at(&self, site: Site) -> impl Iterator<Item = &Firing> {
        self.firings.iter().filter(move |f| f.site == site)
    }

    /// Firings among `sites` that occur more than once, with their counts.
    pub fn repeated(&self, sites: &[Site]) -> Vec<(Firing, usize)> {
        let mut seen: HashMap<(&Rule, &Substitution), usize> = HashMap::new();
        let mut first: Vec<&Firing> = Vec::new();
        for f in self.firings.iter().filter(|f| sites.contains(&f.site)) {
            let n = seen.entry((&f.rule, &f.tau)).or_insert(0);
            if *n == 0 {
                first.push(f);
            }
            *n += 1;
        }
        first
            .into_iter()
            .filter_map(|f| {
                let n = seen[&(&f.rule, &f.tau)];
                (n > 1).then(|| (f.clone(), n))
            })
            .collect()
    }
}

/// Tuning switches for an update.
#[derive(Clone, Copy, Debug, Default)]
pub struct UpdateOptions {
    /// Index explicit and forward-derived facts by representative so that
    /// proved classes pick them up without expanding the class.
    pub bookkeeping: bool,
    /// Record rule firings and replacements in the report.
    pub trace: bool,
}

/// Sizes of the working sets when an update finished.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SetSizes {
    pub deleted_or_doubtful: usize,
    pub processed: usize,
    pub checked: usize,
    pub proved: usize,
    pub proved_replaced: usize,
    pub blocked: usize,
    pub visited: usize,
    pub disproved: usize,
}

/// Outcome of one incremental update.
#[derive(Clone, Debug, Default, Serialize)]
pub struct UpdateReport {
    pub strategy: String,
    /// Number of facts asked to be deleted.
    pub requested: usize,
    /// Number of those that were explicit and got deleted.
    pub deleted: usize,
    pub facts_before: usize,
    pub facts_after: usize,
    pub added: usize,
    pub removed: usize,
    pub derivations: DerivationCounter,
    pub total_derivations: u64,
    pub wall_ms: f64,
    pub sets: SetSizes,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

impl UpdateReport {
    /// Net change in the number of stored facts.
    pub fn delta(&self) -> i64 {
        self.added as i64 - self.removed as i64
    }
}
