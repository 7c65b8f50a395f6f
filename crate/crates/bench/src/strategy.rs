//! The four update strategies and the stores they run on.

use std::fmt;
use std::time::Instant;

use bfeq::incremental::{bf_delete_axiomatised_with, bf_delete_with, NoopObserver};
use bfeq::{
    rmaterialise, AxiomStore, DerivationCounter, Dictionary, FactSet, Program, RStore, Triple, UpdateOptions,
    UpdateReport,
};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Equality handled by rewriting to representatives.
    Rewrite,
    /// Equality axiomatised as ordinary rules.
    Axiom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Bfeq,
    BfAxiom,
    RematEq,
    RematAxiom,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Bfeq, Strategy::BfAxiom, Strategy::RematEq, Strategy::RematAxiom];

    pub fn mode(self) -> Mode {
        match self {
            Strategy::Bfeq | Strategy::RematEq => Mode::Rewrite,
            Strategy::BfAxiom | Strategy::RematAxiom => Mode::Axiom,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Bfeq => "bfeq",
            Strategy::BfAxiom => "bf-axiom",
            Strategy::RematEq => "remat-eq",
            Strategy::RematAxiom => "remat-axiom",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rewrite => "rewrite",
            Mode::Axiom => "axiom",
        })
    }
}

/// A parsed dataset. `explicit` keeps the input order, which random
/// deletion sets are drawn from.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub dict: Dictionary,
    pub explicit: Vec<Triple>,
    pub program: Program,
    pub rules_text: String,
}

impl Dataset {
    pub fn parse(name: &str, facts: &str, rules: &str) -> anyhow::Result<Dataset> {
        Self::parse_with(name, Dictionary::new(), facts, rules)
    }

    /// Parses against an existing dictionary, so known lexical forms keep their ids.
    pub fn parse_with(name: &str, mut dict: Dictionary, facts: &str, rules: &str) -> anyhow::Result<Dataset> {
        let parsed = bfeq::parse_facts(facts, &mut dict)?;
        let program = bfeq::parse_program(rules, &mut dict)?;
        let mut seen = FactSet::new();
        let explicit = parsed.into_iter().filter(|t| seen.add(*t)).collect();
        Ok(Dataset { name: name.to_string(), dict, explicit, program, rules_text: rules.to_string() })
    }

    pub fn explicit_set(&self) -> FactSet {
        self.explicit.iter().copied().collect()
    }

    /// The first `⌈fraction·|E|⌉` facts of a seeded shuffle of `E`.
    pub fn random_deletions(&self, fraction: f64, seed: u64) -> Vec<Triple> {
        self.random_sample((fraction * self.explicit.len() as f64).ceil() as usize, seed)
    }

    /// The first `k` facts of a seeded Fisher–Yates shuffle of `E`.
    pub fn random_sample(&self, k: usize, seed: u64) -> Vec<Triple> {
        let k = k.min(self.explicit.len());
        let mut facts = self.explicit.clone();
        let (chosen, _) = facts.partial_shuffle(&mut ChaCha8Rng::seed_from_u64(seed), k);
        chosen.to_vec()
    }
}

/// A materialised store in either mode.
#[derive(Clone, Debug)]
pub enum Store {
    Rewrite(RStore),
    Axiom(AxiomStore),
}

impl Store {
    pub fn mode(&self) -> Mode {
        match self {
            Store::Rewrite(_) => Mode::Rewrite,
            Store::Axiom(_) => Mode::Axiom,
        }
    }

    /// Stored facts: `I` under rewriting, `J` under axiomatisation.
    pub fn facts(&self) -> &FactSet {
        match self {
            Store::Rewrite(rs) => rs.facts(),
            Store::Axiom(s) => s.facts(),
        }
    }

    pub fn explicit(&self) -> &FactSet {
        match self {
            Store::Rewrite(rs) => rs.explicit(),
            Store::Axiom(s) => s.explicit(),
        }
    }

    pub fn program(&self) -> &Program {
        match self {
            Store::Rewrite(rs) => rs.program(),
            Store::Axiom(s) => s.program(),
        }
    }

    pub fn counter(&self) -> DerivationCounter {
        match self {
            Store::Rewrite(rs) => rs.counter(),
            Store::Axiom(s) => s.counter(),
        }
    }

    pub fn expand_all(&self) -> FactSet {
        match self {
            Store::Rewrite(rs) => rs.expand_all(),
            Store::Axiom(s) => s.facts().clone(),
        }
    }
}

/// Figures for an initial materialisation.
#[derive(Clone, Debug, Serialize)]
pub struct MaterialiseStats {
    pub dataset: String,
    pub mode: Mode,
    pub explicit: usize,
    pub rules: usize,
    pub facts: usize,
    pub derivations: DerivationCounter,
    pub total_derivations: u64,
    pub wall_ms: f64,
}

pub fn materialise(name: &str, explicit: &FactSet, program: &Program, mode: Mode) -> (Store, MaterialiseStats) {
    let start = Instant::now();
    let store = match mode {
        Mode::Rewrite => Store::Rewrite(rmaterialise(explicit, program)),
        Mode::Axiom => Store::Axiom(AxiomStore::materialise(explicit, program)),
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let derivations = store.counter();
    let stats = MaterialiseStats {
        dataset: name.to_string(),
        mode,
        explicit: explicit.len(),
        rules: program.len(),
        facts: store.facts().len(),
        derivations,
        total_derivations: derivations.total(),
        wall_ms,
    };
    (store, stats)
}

/// Runs `strategy` on `store`, replacing it with the updated store.
///
/// Panics if the store's mode does not suit the strategy; callers check
/// compatibility first.
pub fn run(strategy: Strategy, store: &mut Store, deletions: &[Triple], options: UpdateOptions) -> UpdateReport {
    assert_eq!(store.mode(), strategy.mode(), "{strategy} needs a {} store", strategy.mode());
    match (strategy, store) {
        (Strategy::Bfeq, Store::Rewrite(rs)) => bf_delete_with(rs, deletions, options, &mut NoopObserver),
        (Strategy::BfAxiom, Store::Axiom(s)) => bf_delete_axiomatised_with(s, deletions, options),
        (_, store) => rematerialise(strategy, store, deletions),
    }
}

fn rematerialise(strategy: Strategy, store: &mut Store, deletions: &[Triple]) -> UpdateReport {
    let start = Instant::now();
    let mut remaining = store.explicit().clone();
    let deleted = deletions.iter().filter(|t| remaining.delete(t)).count();
    let (fresh, _) = materialise("", &remaining, store.program(), strategy.mode());
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (old, new) = (store.facts(), fresh.facts());
    let report = UpdateReport {
        strategy: strategy.name().to_string(),
        requested: deletions.len(),
        deleted,
        facts_before: old.len(),
        facts_after: new.len(),
        added: new.iter().filter(|t| !old.contains(t)).count(),
        removed: old.iter().filter(|t| !new.contains(t)).count(),
        derivations: fresh.counter(),
        total_derivations: fresh.counter().total(),
        wall_ms,
        sets: Default::default(),
        trace: None,
    };
    *store = fresh;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    const FACTS: &str = ":a :R :b .\n:c :R :d .\n:a :R :d .\n";
    const RULES: &str = "[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .\n\
                         [?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .\n";

    #[test]
    fn random_deletions_are_a_seeded_prefix() {
        let ds = Dataset::parse("ex", FACTS, RULES).unwrap();
        let a = ds.random_deletions(0.5, 1);
        assert_eq!(a.len(), 2);
        assert_eq!(a, ds.random_deletions(0.5, 1));
        assert_eq!(ds.random_deletions(1.0, 3).len(), 3);
        assert!(a.iter().all(|t| ds.explicit.contains(t)));
    }

    #[test]
    fn duplicate_input_facts_collapse() {
        let ds = Dataset::parse("dup", ":a :R :b .\n:a :R :b .\n", "").unwrap();
        assert_eq!(ds.explicit.len(), 1);
    }

    #[test]
    fn every_strategy_reaches_the_same_store() {
        let ds = Dataset::parse("ex", FACTS, RULES).unwrap();
        let deletions = vec![ds.explicit[2]];
        let e = ds.explicit_set();
        let mut finals = Vec::new();
        for s in Strategy::ALL {
            let (mut store, _) = materialise(&ds.name, &e, &ds.program, s.mode());
            let report = run(s, &mut store, &deletions, UpdateOptions::default());
            assert_eq!(report.deleted, 1, "{s}");
            finals.push(store.expand_all());
        }
        assert!(finals.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    #[should_panic(expected = "needs a rewrite store")]
    fn mismatched_store_is_refused() {
        let ds = Dataset::parse("ex", FACTS, RULES).unwrap();
        let (mut store, _) = materialise(&ds.name, &ds.explicit_set(), &ds.program, Mode::Axiom);
        run(Strategy::Bfeq, &mut store, &[], UpdateOptions::default());
    }
}
