//! Corpus-level augmentation: template variants (training set doubling)
//! and randomized reactant SMILES.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, stable_hash, DatasetRecord};
use crate::augment::{enumerate_variants, AugmentedTemplate, OpKind, VariantClass};
use crate::molgraph::{parse_smiles, randomized_smiles, Molecule};
use crate::rxn::{apply, parse_reaction, MatchMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugCorpusOptions {
    /// Variants enumerated per distinct template.
    pub variants_per_template: usize,
    pub ops: Vec<OpKind>,
}

impl Default for AugCorpusOptions {
    fn default() -> Self {
        AugCorpusOptions {
            variants_per_template: 32,
            ops: OpKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugCorpusStats {
    pub input: usize,
    pub augmented: usize,
    /// Records with no valid variant, emitted twice unchanged.
    pub duplicated: usize,
}

fn mode_for(variant: &AugmentedTemplate, reactants: usize) -> MatchMode {
    if variant.result.lhs.components.len() > 1 && reactants > 1 {
        MatchMode::Inter
    } else {
        MatchMode::Intra
    }
}

/// Products of `r` still produced by `variant`, if the variant is valid
/// for the record: no product lost for equal or wider variants, at least
/// one kept for narrower ones.
fn variant_products(r: &DatasetRecord, mols: &[Molecule], variant: &AugmentedTemplate) -> Option<Vec<String>> {
    let produced: BTreeSet<String> = apply(&variant.result, mols, mode_for(variant, mols.len()))
        .ok()?
        .into_iter()
        .map(|p| p.smiles)
        .collect();
    let kept: Vec<String> = r.products.iter().filter(|p| produced.contains(*p)).cloned().collect();
    let ok = match variant.class() {
        VariantClass::Equal | VariantClass::Superset => kept.len() == r.products.len(),
        VariantClass::Subset | VariantClass::Mixed => !kept.is_empty(),
    };
    ok.then_some(kept)
}

/// Every record followed by one copy carrying a template variant valid
/// for its reactants; output is exactly twice the input.
pub fn augment_corpus(
    records: &[DatasetRecord],
    seed: u64,
    opts: &AugCorpusOptions,
) -> (Vec<DatasetRecord>, AugCorpusStats) {
    let mut bases: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        bases.entry(r.template.as_str()).or_insert(r.template_id);
    }
    let pools: BTreeMap<&str, Vec<AugmentedTemplate>> = bases
        .par_iter()
        .map(|(&text, &id)| {
            let variants = match parse_reaction(text) {
                Ok(rxn) => enumerate_variants(
                    Some(id),
                    &rxn,
                    &opts.ops,
                    opts.variants_per_template,
                    derive_seed(seed, &[stable_hash(text)]),
                ),
                Err(_) => Vec::new(),
            };
            (text, variants)
        })
        .collect();
    let picked: Vec<Option<DatasetRecord>> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let pool = &pools[r.template.as_str()];
            let mols: Option<Vec<Molecule>> = r.reactants.iter().map(|s| parse_smiles(s).ok()).collect();
            let mols = mols?;
            let mut order: Vec<usize> = (0..pool.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1, i as u64])));
            order.into_iter().find_map(|k| {
                let v = &pool[k];
                variant_products(r, &mols, v).map(|products| DatasetRecord {
                    template: v.provenance_text.clone(),
                    products,
                    ..r.clone()
                })
            })
        })
        .collect();
    let mut stats = AugCorpusStats {
        input: records.len(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(records.len() * 2);
    for (r, aug) in records.iter().zip(picked) {
        out.push(r.clone());
        match aug {
            Some(a) => {
                stats.augmented += 1;
                out.push(a);
            }
            None => {
                stats.duplicated += 1;
                out.push(r.clone());
            }
        }
    }
    (out, stats)
}

/// Each record repeated `factor` times: the original first, then copies
/// whose reactants are randomized SMILES of the same molecules.
pub fn augment_inputs(records: &[DatasetRecord], factor: usize, seed: u64) -> Vec<DatasetRecord> {
    let mut out = Vec::with_capacity(records.len() * factor.max(1));
    for (i, r) in records.iter().enumerate() {
        out.push(r.clone());
        for k in 1..factor {
            let reactants = r
                .reactants
                .iter()
                .enumerate()
                .map(|(j, s)| match parse_smiles(s) {
                    Ok(m) => randomized_smiles(&m, derive_seed(seed, &[i as u64, k as u64, j as u64])),
                    Err(_) => s.clone(),
                })
                .collect();
            out.push(DatasetRecord { reactants, ..r.clone() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use crate::molgraph::write_canonical;
    use crate::rxn::BrsRegistry;

    fn rec(reactants: &[&str], id: usize, products: &[&str]) -> DatasetRecord {
        DatasetRecord {
            reactants: reactants.iter().map(|s| s.to_string()).collect(),
            template_id: id,
            template: BrsRegistry::builtin().get(id).unwrap().raw_text().to_string(),
            products: products.iter().map(|s| s.to_string()).collect(),
            split: Split::Train,
        }
    }

    #[test]
    fn doubling() {
        let records = vec![
            rec(&["CCO"], 2, &["C=CO", "CC=O"]),
            rec(&["CCC"], 5, &["C1CC1"]),
            rec(&["C", "O"], 1, &["CO"]),
        ];
        let (out, stats) = augment_corpus(&records, 9, &AugCorpusOptions::default());
        assert_eq!(out.len(), 6);
        assert_eq!(stats.augmented + stats.duplicated, 3);
        for pair in out.chunks(2) {
            assert_eq!(pair[0].reactants, pair[1].reactants);
            let rxn = parse_reaction(&pair[1].template).unwrap();
            let mols: Vec<Molecule> = pair[1].reactants.iter().map(|s| parse_smiles(s).unwrap()).collect();
            let mode = if rxn.lhs.components.len() > 1 { MatchMode::Inter } else { MatchMode::Intra };
            let got: BTreeSet<String> = apply(&rxn, &mols, mode).unwrap().into_iter().map(|p| p.smiles).collect();
            assert!(pair[1].products.iter().all(|p| got.contains(p)));
        }
    }

    #[test]
    fn record_without_variant_is_duplicated() {
        let mut r = rec(&["CC"], 2, &["C=C"]);
        r.template = "[C;h:1][C;h:2]>>[C:1]=[C:2]".into();
        let opts = AugCorpusOptions {
            ops: vec![OpKind::Combine],
            ..Default::default()
        };
        let (out, stats) = augment_corpus(&[r.clone()], 1, &opts);
        assert_eq!(out, vec![r.clone(), r]);
        assert_eq!(stats.duplicated, 1);
    }

    #[test]
    fn inputs_factor() {
        let records = vec![rec(&["Oc1ccccc1"], 11, &["c1ccccc1"]), rec(&["C", "O"], 1, &["CO"])];
        let out = augment_inputs(&records, 4, 3);
        assert_eq!(out.len(), 8);
        assert_eq!(augment_inputs(&records, 1, 3), records);
        for (k, r) in out.iter().enumerate() {
            let orig = &records[k / 4];
            for (a, b) in r.reactants.iter().zip(&orig.reactants) {
                assert_eq!(&write_canonical(&parse_smiles(a).unwrap()), b);
            }
            assert_eq!(r.products, orig.products);
        }
    }
}
