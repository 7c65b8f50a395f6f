//! Synthetic datasets. Each generator emits a facts file and a matching rules
//! file as text, so generated data goes through the same parser as user data.

use std::fmt::Write;

use anyhow::{ensure, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const BIJECTIVE_RULES: &str = "\
[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .
[?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .
";

const CLIQUE_RULES: &str = "\
[?y, :sameTown, ?x] :- [?x, :sameTown, ?y] .
[?x, :sameTown, ?z] :- [?x, :sameTown, ?y], [?y, :sameTown, ?z] .
";

const CLIQUE_EQUALITY_RULE: &str = "[?x, owl:sameAs, ?y] :- [?x, :sameTown, ?y] .\n";

const CHAIN_RULES: &str = "[?x, :R, ?z] :- [?x, :R, ?y], [?y, :R, ?z] .\n";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "generator", rename_all = "lowercase")]
pub enum GenSpec {
    /// `blocks` copies of `a R b, c R d`; each block gets the bridging edge
    /// `a R d` with probability `bridge`, which merges `{a, c}` and `{b, d}`.
    Bijective { blocks: usize, bridge: f64 },
    /// `constants` people split into `groups` towns. Each town is connected
    /// by a random spanning path plus `extra_edges` random edges, and each
    /// person has a type fact. With `equality`, towns become sameAs classes.
    Clique { constants: usize, groups: usize, extra_edges: usize, equality: bool },
    /// An `R`-path over `length` nodes with a transitivity rule, plus
    /// `equalities` random explicit sameAs facts between path nodes.
    Chain { length: usize, equalities: usize },
}

/// Generated facts and rules in the text formats accepted by the parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub facts: String,
    pub rules: String,
}

impl GenSpec {
    pub fn name(&self) -> String {
        match self {
            GenSpec::Bijective { blocks, .. } => format!("bijective-{blocks}"),
            GenSpec::Clique { constants, groups, equality, .. } => {
                format!("clique-{constants}x{groups}{}", if *equality { "-eq" } else { "" })
            }
            GenSpec::Chain { length, .. } => format!("chain-{length}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GenSpec::Bijective { blocks, bridge } => {
                ensure!(blocks >= 1, "bijective needs at least one block");
                ensure!((0.0..=1.0).contains(&bridge), "bridge probability must lie in [0, 1]");
            }
            GenSpec::Clique { constants, groups, .. } => {
                ensure!(constants >= 1 && groups >= 1, "clique sizes must be at least 1");
                ensure!(groups <= constants, "cannot split {constants} constants into {groups} groups");
            }
            GenSpec::Chain { length, .. } => ensure!(length >= 1, "chain length must be at least 1"),
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<Generated> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut facts = String::new();
        let rules = match *self {
            GenSpec::Bijective { blocks, bridge } => {
                for i in 0..blocks {
                    let n = |base: &str| if blocks == 1 { format!(":{base}") } else { format!(":{base}{i}") };
                    let (a, b, c, d) = (n("a"), n("b"), n("c"), n("d"));
                    let _ = writeln!(facts, "{a} :R {b} .");
                    let _ = writeln!(facts, "{c} :R {d} .");
                    if rng.gen_bool(bridge) {
                        let _ = writeln!(facts, "{a} :R {d} .");
                    }
                }
                BIJECTIVE_RULES.to_string()
            }
            GenSpec::Clique { constants, groups, extra_edges, equality } => {
                for (g, members) in partition(constants, groups).into_iter().enumerate() {
                    let name = |i: usize| format!(":p{i}");
                    for &m in &members {
                        let _ = writeln!(facts, "{} rdf:type :Person .", name(m));
                        let _ = writeln!(facts, "{} :livesIn :town{g} .", name(m));
                    }
                    let mut path = members.clone();
                    path.shuffle(&mut rng);
                    for w in path.windows(2) {
                        let _ = writeln!(facts, "{} :sameTown {} .", name(w[0]), name(w[1]));
                    }
                    if members.len() > 1 {
                        for _ in 0..extra_edges {
                            let x = members[rng.gen_range(0..members.len())];
                            let y = members[rng.gen_range(0..members.len())];
                            let _ = writeln!(facts, "{} :sameTown {} .", name(x), name(y));
                        }
                    }
                }
                let mut rules = CLIQUE_RULES.to_string();
                if equality {
                    rules.push_str(CLIQUE_EQUALITY_RULE);
                }
                rules
            }
            GenSpec::Chain { length, equalities } => {
                for i in 1..length {
                    let _ = writeln!(facts, ":n{} :R :n{i} .", i - 1);
                }
                for _ in 0..equalities {
                    let x = rng.gen_range(0..length);
                    let y = rng.gen_range(0..length);
                    let _ = writeln!(facts, ":n{x} owl:sameAs :n{y} .");
                }
                CHAIN_RULES.to_string()
            }
        };
        Ok(Generated { facts, rules })
    }
}

/// Splits `0..n` into `k` contiguous groups whose sizes differ by at most one.
fn partition(n: usize, k: usize) -> Vec<Vec<usize>> {
    let (base, rem) = (n / k, n % k);
    let mut next = 0;
    (0..k)
        .map(|g| {
            let size = base + usize::from(g < rem);
            let group = (next..next + size).collect();
            next += size;
            group
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_everything_evenly() {
        let p = partition(10, 3);
        assert_eq!(p.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 3, 3]);
        assert_eq!(p.concat(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn single_bridged_block_is_the_textbook_example() {
        let g = GenSpec::Bijective { blocks: 1, bridge: 1.0 }.generate(0).unwrap();
        assert_eq!(g.facts, ":a :R :b .\n:c :R :d .\n:a :R :d .\n");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec::Clique { constants: 30, groups: 4, extra_edges: 3, equality: true };
        assert_eq!(spec.generate(7).unwrap(), spec.generate(7).unwrap());
        assert_ne!(spec.generate(7).unwrap().facts, spec.generate(8).unwrap().facts);
    }

    #[test]
    fn invalid_sizes_are_rejected() {
        assert!(GenSpec::Chain { length: 0, equalities: 0 }.generate(0).is_err());
        assert!(GenSpec::Clique { constants: 2, groups: 3, extra_edges: 0, equality: false }.generate(0).is_err());
        assert!(GenSpec::Bijective { blocks: 0, bridge: 0.5 }.generate(0).is_err());
    }
}
