//! On-disk snapshots of a materialised store.
//!
//! A snapshot directory holds `dict.txt` (lexical forms in id order),
//! `explicit.nt` (E in input order), `rules.dl`, `store.nt` (stored facts,
//! sorted), `reps.txt` (non-trivial `member -> representative` pairs) and
//! `meta.json`.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use bfeq::{parse_facts, write_facts, AxiomStore, Constant, Dictionary, RStore, RepMap};
use serde::{Deserialize, Serialize};

use crate::strategy::{Dataset, Mode, Store};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Meta {
    dataset: String,
    mode: Mode,
    explicit: usize,
    facts: usize,
}

pub fn save(dir: &Path, dataset: &Dataset, store: &Store) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    let mut dict = String::new();
    for (_, lexical) in dataset.dict.entries() {
        dict.push_str(lexical);
        dict.push('\n');
    }
    write("dict.txt", dict)?;
    let explicit: Vec<_> = dataset.explicit.iter().filter(|t| store.explicit().contains(t)).collect();
    write("explicit.nt", write_facts(explicit, &dataset.dict))?;
    write("rules.dl", dataset.rules_text.clone())?;
    let mut lines: Vec<String> = store.facts().iter().map(|t| dataset.dict.render_triple(&t)).collect();
    lines.sort_unstable();
    write("store.nt", lines.iter().map(|l| format!("{l}\n")).collect())?;
    let reps = match store {
        Store::Rewrite(rs) => rs.pi().dump(&dataset.dict),
        Store::Axiom(_) => String::new(),
    };
    write("reps.txt", reps)?;
    let meta = Meta {
        dataset: dataset.name.clone(),
        mode: store.mode(),
        explicit: store.explicit().len(),
        facts: store.facts().len(),
    };
    write("meta.json", serde_json::to_string_pretty(&meta)? + "\n")
}

pub fn load(dir: &Path) -> Result<(Dataset, Store)> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
    };
    let meta: Meta = serde_json::from_str(&read("meta.json")?).context("parsing meta.json")?;
    let mut dict = Dictionary::new();
    for (i, line) in read("dict.txt")?.lines().enumerate() {
        let c = dict.intern(line).with_context(|| format!("dict.txt line {}", i + 1))?;
        ensure!(c.index() == i, "dict.txt line {} repeats an earlier entry", i + 1);
    }
    let dataset = Dataset::parse_with(&meta.dataset, dict, &read("explicit.nt")?, &read("rules.dl")?)?;
    let mut dict = dataset.dict.clone();
    let facts = parse_facts(&read("store.nt")?, &mut dict).context("parsing store.nt")?;
    ensure!(dict.len() == dataset.dict.len(), "store.nt mentions constants missing from dict.txt");
    let explicit = dataset.explicit_set();
    let store = match meta.mode {
        Mode::Rewrite => {
            let pi = parse_reps(&read("reps.txt")?, &dataset.dict)?;
            let rs = RStore::from_parts(pi, facts, explicit, dataset.program.clone());
            if let Err(e) = rs.check_invariants() {
                bail!("snapshot in {} is inconsistent: {e}", dir.display());
            }
            Store::Rewrite(rs)
        }
        Mode::Axiom => Store::Axiom(AxiomStore::from_parts(facts, explicit, dataset.program.clone())),
    };
    Ok((dataset, store))
}

fn parse_reps(text: &str, dict: &Dictionary) -> Result<RepMap> {
    let lookup = |lexical: &str, line: usize| {
        dict.lookup(lexical).with_context(|| format!("reps.txt line {line}: unknown constant {lexical}"))
    };
    let mut updates: Vec<(Constant, Constant)> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (member, rep) = line.rsplit_once(" -> ").with_context(|| format!("reps.txt line {}: missing ->", i + 1))?;
        let (member, rep) = (lookup(member, i + 1)?, lookup(rep, i + 1)?);
        ensure!(rep < member, "reps.txt line {}: representative must be the class minimum", i + 1);
        updates.push((member, rep));
    }
    let reps: std::collections::HashSet<Constant> = updates.iter().map(|(_, r)| *r).collect();
    ensure!(updates.iter().all(|(m, _)| !reps.contains(m)), "reps.txt maps a member to a non-representative");
    let mut pi = RepMap::with_len(dict.len());
    pi.reassign(&updates);
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::materialise;

    const FACTS: &str = ":a :R :b .\n:c :R :d .\n:a :R :d .\n";
    const RULES: &str = "[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .\n\
                         [?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .\n";

    #[test]
    fn snapshots_round_trip_in_both_modes() {
        let ds = Dataset::parse("ex", FACTS, RULES).unwrap();
        for mode in [Mode::Rewrite, Mode::Axiom] {
            let (store, _) = materialise(&ds.name, &ds.explicit_set(), &ds.program, mode);
            let dir = tempfile::tempdir().unwrap();
            save(dir.path(), &ds, &store).unwrap();
            let (ds2, loaded) = load(dir.path()).unwrap();
            assert_eq!(ds2.explicit, ds.explicit);
            assert_eq!(loaded.facts(), store.facts());
            assert_eq!(loaded.expand_all(), store.expand_all());
            if let (Store::Rewrite(a), Store::Rewrite(b)) = (&store, &loaded) {
                assert_eq!(a.pi(), b.pi());
            }
        }
    }

    #[test]
    fn non_minimal_representatives_are_rejected() {
        let mut dict = Dictionary::new();
        parse_facts(":a :R :b .", &mut dict).unwrap();
        assert!(parse_reps(":a -> :b\n", &dict).is_err());
        assert!(parse_reps(":b -> :zzz\n", &dict).is_err());
        assert_eq!(parse_reps(":b -> :a\n", &dict).unwrap().rep(dict.lookup(":b").unwrap()), dict.lookup(":a").unwrap());
    }
}
