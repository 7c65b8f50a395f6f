//! Running several strategies on one workload and checking them against each
//! other and against the naive oracle.

use std::thread;

use anyhow::{ensure, Result};
use bfeq::oracle::naive_fixpoint;
use bfeq::{bf_delete, rmaterialise, FactSet, Triple, UpdateOptions, UpdateReport};

use crate::report::CsvRow;
use crate::strategy::{materialise, run, Dataset, Strategy};

#[derive(Debug)]
pub struct Outcome {
    pub strategy: Strategy,
    pub report: UpdateReport,
    pub row: CsvRow,
    /// The updated store with every class expanded.
    pub expanded: FactSet,
}

/// Materialises `dataset` once per strategy and applies `deletions`, each
/// strategy on its own thread and its own store. Outcomes keep the order of
/// `strategies`.
pub fn compare(dataset: &Dataset, strategies: &[Strategy], deletions: &[Triple], options: UpdateOptions) -> Vec<Outcome> {
    let explicit = dataset.explicit_set();
    thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&strategy| {
                let explicit = &explicit;
                scope.spawn(move || {
                    let (mut store, _) = materialise(&dataset.name, explicit, &dataset.program, strategy.mode());
                    let report = run(strategy, &mut store, deletions, options);
                    let row = CsvRow::new(&dataset.name, explicit.len(), dataset.program.len(), &report);
                    Outcome { strategy, report, row, expanded: store.expand_all() }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("strategy thread panicked")).collect()
    })
}

/// True when all outcomes hold the same expanded store.
pub fn agree(outcomes: &[Outcome]) -> bool {
    outcomes.windows(2).all(|w| w[0].expanded == w[1].expanded)
}

/// Checks B/F≈ on `dataset` against rematerialisation and the naive
/// fixpoint of the remaining facts.
pub fn verify(dataset: &Dataset, deletions: &[Triple]) -> Result<()> {
    let explicit = dataset.explicit_set();
    let mut rs = rmaterialise(&explicit, &dataset.program);
    bf_delete(&mut rs, deletions);
    let mut remaining = explicit;
    for t in deletions {
        remaining.delete(t);
    }
    let expected = rmaterialise(&remaining, &dataset.program);
    ensure!(rs.pi() == expected.pi(), "representatives differ from rematerialisation");
    ensure!(rs.facts() == expected.facts(), "stored facts differ from rematerialisation");
    let j = naive_fixpoint(&remaining, &dataset.program);
    ensure!(rs.expand_all() == j, "expanded store differs from the naive fixpoint");
    Ok(())
}
