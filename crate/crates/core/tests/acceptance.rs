//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any fails. Run with `cargo test -p brs-core --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use brs_core::augment::{enumerate_variants, AugmentedTemplate, OpKind, VariantClass};
use brs_core::dataset::{
    augment_corpus, generate, write_corpus, AugCorpusOptions, Corpus, DatasetRecord, GenerationConfig, Split,
};
use brs_core::encode::{
    build_vocab, decode, decode_with, encode_records, read_encoded, write_encoded, InputMode, TokenType, Vocab, BOS,
    EOS, SEP,
};
use brs_core::evalkit::{evaluate_records, exact_match};
use brs_core::molgraph::{parse_smiles, randomized_smiles, write_canonical, Molecule};
use brs_core::rxn::{apply, inverse_of, parse_reaction, BrsRegistry, Direction, MatchMode, SmartsReaction, TABLE1};

const ORACLE_LIMIT: Duration = Duration::from_secs(30);
const ORACLE_MIN_CASES: usize = 200;
const ROUND_TRIP_MIN: usize = 500;
const ROUND_TRIP_PER_TEMPLATE: usize = 60;
const PAIR_1_11_SAMPLE: usize = 200;
const AUG_MOLECULES_PER_CLASS: usize = 100;
const AUG_VARIANTS_PER_TEMPLATE: usize = 12;
const CANON_LIMIT: Duration = Duration::from_secs(60);
const CANON_RANDOMIZED: u64 = 4;
const DATASET_LIMIT: Duration = Duration::from_secs(600);
const EVAL_TOLERANCE: f64 = 1e-12;
const SEED: u64 = 20240601;

const ORACLE: &str = include_str!("fixtures/apply_oracle.jsonl");
const POOL: &str = include_str!("fixtures/pool.tsv");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    let mut detail = detail;
    if !failures.is_empty() {
        detail.push_str(&format!("; {} failures, first: {}", failures.len(), failures[..failures.len().min(3)].join(" | ")));
    }
    Outcome {
        pass: failures.is_empty(),
        detail,
    }
}

fn canon(s: &str) -> String {
    write_canonical(&parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}")))
}

fn pool() -> Vec<Molecule> {
    POOL.lines()
        .filter(|l| !l.is_empty())
        .map(|l| parse_smiles(l.split('\t').next().unwrap()).unwrap())
        .collect()
}

fn products(r: &SmartsReaction, mols: &[Molecule], mode: MatchMode) -> BTreeSet<String> {
    apply(r, mols, mode)
        .map(|ps| ps.into_iter().map(|p| p.smiles).collect())
        .unwrap_or_default()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let registry = BrsRegistry::builtin();
    let mut failures = Vec::new();
    let mut covered = BTreeSet::new();
    let mut cases = 0;
    for line in ORACLE.lines() {
        let case: Value = serde_json::from_str(line).unwrap();
        let id = case["template"].as_u64().unwrap() as usize;
        let mode = if case["mode"] == "inter" { MatchMode::Inter } else { MatchMode::Intra };
        let mols: Vec<Molecule> = strings(&case["reactants"]).iter().map(|s| parse_smiles(s).unwrap()).collect();
        let expected: BTreeMap<String, BTreeSet<String>> = case["discarded"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(p, d)| (canon(p), strings(d).iter().map(|s| canon(s)).collect()))
            .collect();
        let got: BTreeMap<String, BTreeSet<String>> = apply(registry.get(id).unwrap(), &mols, mode)
            .unwrap()
            .into_iter()
            .map(|p| (p.smiles, p.discarded.into_iter().collect()))
            .collect();
        cases += 1;
        covered.insert(id);
        if got != expected {
            failures.push(format!("template {id} on {}", case["reactants"]));
        }
    }
    let elapsed = t.elapsed();
    if cases < ORACLE_MIN_CASES {
        failures.push(format!("only {cases} cases"));
    }
    if covered.len() != 20 {
        failures.push(format!("{} templates covered", covered.len()));
    }
    if elapsed >= ORACLE_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    outcome(&failures, format!("{cases} cases, {} templates, {elapsed:.2?}", covered.len()))
}

fn registry_sanity() -> Outcome {
    let mut failures = Vec::new();
    for (i, s) in TABLE1.iter().enumerate() {
        if let Err(e) = parse_reaction(s) {
            failures.push(format!("{}: {e}", i + 1));
        }
    }
    let registry = BrsRegistry::builtin();
    for k in 1..=20 {
        let expected = if k <= 10 { k + 10 } else { k - 10 };
        let dir = if k <= 10 { Direction::Forward } else { Direction::Reverse };
        if inverse_of(k) != Some(expected) || inverse_of(expected) != Some(k) || registry.direction(k) != Some(dir) {
            failures.push(format!("pairing of {k}"));
        }
    }
    if inverse_of(0).is_some() || inverse_of(21).is_some() {
        failures.push("pairing defined outside 1-20".into());
    }
    outcome(&failures, format!("{} templates, 10 inverse pairs", registry.len()))
}

fn round_trip(pool: &[Molecule]) -> Outcome {
    let registry = BrsRegistry::builtin();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SEED));
    let mut failures = Vec::new();
    let mut applications = 0;
    for k in 2..=10 {
        let fwd = registry.get(k).unwrap();
        let inv = registry.get(inverse_of(k).unwrap()).unwrap();
        let mut n = 0;
        for &i in &order {
            if n >= ROUND_TRIP_PER_TEMPLATE {
                break;
            }
            let m = &pool[i];
            let original = write_canonical(m);
            for p in apply(fwd, std::slice::from_ref(m), MatchMode::Intra).unwrap() {
                if n >= ROUND_TRIP_PER_TEMPLATE {
                    break;
                }
                n += 1;
                if !products(inv, std::slice::from_ref(&p.molecule), MatchMode::Intra).contains(&original) {
                    failures.push(format!("{k}: {original} -> {}", p.smiles));
                }
            }
        }
        applications += n;
    }
    if applications < ROUND_TRIP_MIN {
        failures.push(format!("only {applications} applications"));
    }

    let join = registry.get(1).unwrap();
    let cleave = registry.get(11).unwrap();
    let mut pairs = 0;
    let mut ring_internal = 0;
    for &i in &order {
        if pairs >= PAIR_1_11_SAMPLE {
            break;
        }
        let m = &pool[i];
        let original = write_canonical(m);
        for p in apply(cleave, std::slice::from_ref(m), MatchMode::Intra).unwrap() {
            if p.discarded.is_empty() {
                ring_internal += 1;
            }
            for g in &p.discarded {
                pairs += 1;
                let mols = [p.molecule.clone(), parse_smiles(g).unwrap()];
                if !products(join, &mols, MatchMode::Inter).contains(&original) {
                    failures.push(format!("1/11: {original} -> {} + {g}", p.smiles));
                }
            }
        }
    }
    let checked = applications + pairs;
    let passed = checked.saturating_sub(failures.len());
    outcome(
        &failures,
        format!(
            "{applications} applications of 2-10, {pairs} kept+discarded pairs for 1/11 ({ring_internal} in-ring cleavages without a fragment), {passed}/{checked} recovered ({:.1}%)",
            100.0 * passed as f64 / checked.max(1) as f64
        ),
    )
}

fn class_of(v: &AugmentedTemplate) -> Option<&'static str> {
    let kinds: HashSet<OpKind> = v.ops.iter().map(|o| o.kind()).collect();
    match v.class() {
        VariantClass::Equal => Some("permutation"),
        VariantClass::Subset if kinds.iter().all(|k| *k == OpKind::Specialize || matches!(k, OpKind::PermuteWithin | OpKind::PermuteBetween)) => {
            Some("specialization")
        }
        VariantClass::Subset => Some("combination"),
        VariantClass::Superset => Some("generalization"),
        VariantClass::Mixed => None,
    }
}

fn augmentation_semantics(pool: &[Molecule]) -> Outcome {
    let registry = BrsRegistry::builtin();
    let mut by_class: BTreeMap<&str, Vec<(usize, AugmentedTemplate)>> = BTreeMap::new();
    let mut mixed = 0;
    for (id, base) in registry.iter() {
        for v in enumerate_variants(Some(id), base, &OpKind::ALL, AUG_VARIANTS_PER_TEMPLATE, SEED + id as u64) {
            match class_of(&v) {
                Some(c) => by_class.entry(c).or_default().push((id, v)),
                None => mixed += 1,
            }
        }
    }
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut summary = Vec::new();
    for class in ["permutation", "specialization", "combination", "generalization"] {
        let variants = by_class.get(class).map(Vec::as_slice).unwrap_or_default();
        if variants.is_empty() {
            failures.push(format!("no {class} variants"));
            continue;
        }
        let sample: Vec<&Molecule> = pool.choose_multiple(&mut rng, AUG_MOLECULES_PER_CLASS).collect();
        let mut nonempty = 0;
        for (id, v) in variants {
            let base = registry.get(*id).unwrap();
            for m in &sample {
                let mols = std::slice::from_ref(*m);
                let b = products(base, mols, MatchMode::Intra);
                let p = products(&v.result, mols, MatchMode::Intra);
                let ok = match class {
                    "permutation" => p == b,
                    "generalization" => b.is_subset(&p),
                    _ => p.is_subset(&b),
                };
                checks += 1;
                nonempty += usize::from(!p.is_empty() || !b.is_empty());
                if !ok {
                    failures.push(format!("{class} {} on {}", v.provenance_text, write_canonical(m)));
                }
            }
        }
        summary.push(format!("{class} {} variants/{nonempty} non-empty", variants.len()));
    }
    outcome(&failures, format!("{checks} checks on {AUG_MOLECULES_PER_CLASS} molecules per class: {}; {mixed} mixed chains skipped", summary.join(", ")))
}

fn canonicalization(pool: &[Molecule]) -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (i, m) in pool.iter().enumerate() {
        let c = write_canonical(m);
        match parse_smiles(&c) {
            Ok(back) if write_canonical(&back) == c => {}
            _ => failures.push(format!("fixed point: {c}")),
        }
        let mut perm: Vec<usize> = (0..m.atom_count()).collect();
        perm.shuffle(&mut rng);
        if write_canonical(&m.permuted(&perm)) != c {
            failures.push(format!("relabeling: {c}"));
        }
        for k in 0..CANON_RANDOMIZED {
            let r = randomized_smiles(m, (i as u64) * CANON_RANDOMIZED + k + rng.random_range(0..1000));
            if parse_smiles(&r).map(|x| write_canonical(&x)).as_deref() != Ok(c.as_str()) {
                failures.push(format!("randomized: {c} via {r}"));
            }
        }
    }
    let elapsed = t.elapsed();
    if pool.len() < 10_000 {
        failures.push(format!("fixture has {} molecules", pool.len()));
    }
    if elapsed >= CANON_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    outcome(&failures, format!("{} molecules, {elapsed:.2?}", pool.len()))
}

fn desk_config(workers: usize) -> GenerationConfig {
    let mut cfg =
        GenerationConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/desk.toml")).unwrap();
    cfg.workers = workers;
    cfg
}

fn corpus_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn dataset_pipeline() -> (Outcome, Option<Corpus>) {
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut snapshots = Vec::new();
    let mut first = None;
    for (run, workers) in [1, 1, 4].into_iter().enumerate() {
        let corpus = match generate(&desk_config(workers)) {
            Ok(c) => c,
            Err(e) => return (outcome(&[e.to_string()], String::new()), None),
        };
        let dir = tmp.path().join(format!("run{run}"));
        write_corpus(&dir, &corpus).unwrap();
        snapshots.push((workers, corpus_bytes(&dir)));
        first.get_or_insert(corpus);
    }
    let corpus = first.unwrap();
    if snapshots[0].1 != snapshots[1].1 {
        failures.push("two runs differ".into());
    }
    if snapshots[0].1 != snapshots[2].1 {
        failures.push("workers 1 and 4 differ".into());
    }
    let sizes = (corpus.train.len(), corpus.valid.len(), corpus.test.len());
    if sizes != (2000, 200, 200) {
        failures.push(format!("split sizes {sizes:?}"));
    }
    let mut owner: BTreeMap<String, Split> = BTreeMap::new();
    let mut leaks = 0;
    for s in Split::ALL {
        for r in corpus.split(s) {
            if owner.insert(r.group_key(), s).is_some_and(|o| o != s) {
                leaks += 1;
            }
        }
    }
    if leaks > 0 {
        failures.push(format!("{leaks} group keys in more than one split"));
    }
    let (aug, stats) = augment_corpus(&corpus.train, SEED, &AugCorpusOptions::default());
    if aug.len() != 2 * corpus.train.len() {
        failures.push(format!("aug-corpus {} from {}", aug.len(), corpus.train.len()));
    }
    let elapsed = t.elapsed();
    if elapsed >= DATASET_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    let files: usize = snapshots[0].1.values().map(Vec::len).sum();
    (
        outcome(
            &failures,
            format!(
                "{sizes:?}, {} multi-product, {files} bytes x3 identical, aug {} -> {} ({} augmented, {} duplicated), {elapsed:.2?}",
                corpus.stats.multi_product_records,
                corpus.train.len(),
                aug.len(),
                stats.augmented,
                stats.duplicated
            ),
        ),
        Some(corpus),
    )
}

fn tokenizer(corpus: &Corpus) -> Outcome {
    let all: Vec<DatasetRecord> = Split::ALL.iter().flat_map(|s| corpus.split(*s).to_vec()).collect();
    let mut failures = Vec::new();
    let vocab = build_vocab(&all);
    let reversed: Vec<&DatasetRecord> = all.iter().rev().collect();
    if build_vocab(reversed) != vocab || Vocab::from_text(&vocab.to_text()).as_ref() != Ok(&vocab) {
        failures.push("vocab build not deterministic".into());
    }
    let mut strings_checked = 0;
    for mode in [InputMode::TemplateBased, InputMode::TemplateFree] {
        let (set, unknown) = encode_records(&all, &vocab, mode).unwrap();
        if unknown > 0 {
            failures.push(format!("{unknown} unknown characters"));
        }
        let mut expected_examples = 0;
        let mut ex = set.examples.iter();
        for r in &all {
            let mut input = r.reactants.join(" ");
            if mode == InputMode::TemplateBased {
                input.push(' ');
                input.push_str(&r.template);
            }
            for p in &r.products {
                expected_examples += 1;
                let Some(e) = ex.next() else { break };
                strings_checked += r.reactants.len() + 1 + usize::from(mode == InputMode::TemplateBased);
                if decode_with(&e.source, &vocab, " ").as_deref() != Ok(input.as_str()) {
                    failures.push(format!("input of {}", r.group_key()));
                }
                if decode(&e.target, &vocab).as_deref() != Ok(p.as_str()) {
                    failures.push(format!("target {p}"));
                }
                for seq in [&e.source, &e.target] {
                    let aligned = seq.ids.len() == seq.type_ids.len()
                        && seq.ids.iter().zip(&seq.type_ids).all(|(&id, &ty)| {
                            let special = matches!(id, SEP | BOS | EOS);
                            special == (ty == TokenType::Special as u8)
                        });
                    if !aligned {
                        failures.push(format!("type alignment in {}", r.group_key()));
                    }
                }
                let src_types: Vec<u8> = e.source.type_ids.iter().copied().filter(|&t| t != TokenType::Special as u8).collect();
                if src_types.windows(2).any(|w| w[0] > w[1]) || e.target.type_ids[1..e.target.len() - 1].iter().any(|&t| t != TokenType::Product as u8) {
                    failures.push(format!("segment order in {}", r.group_key()));
                }
            }
        }
        if expected_examples != set.examples.len() {
            failures.push("example count".into());
        }
        let tmp = tempfile::tempdir().unwrap();
        let prefix = tmp.path().join("desk");
        write_encoded(&prefix, &set).unwrap();
        if read_encoded(&prefix).ok().as_ref() != Some(&set) {
            failures.push("binary round trip".into());
        }
    }
    outcome(
        &failures,
        format!("{} records, {strings_checked} strings, vocab size {}", all.len(), vocab.len()),
    )
}

fn evaluation(corpus: &Corpus) -> Outcome {
    let records = &corpus.test;
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut preds = Vec::new();
    let mut expected_correct = 0usize;
    for (i, r) in records.iter().enumerate() {
        match i % 4 {
            0 => preds.push("not a molecule".to_string()),
            1 => preds.push("C".repeat(25)),
            _ => {
                let p = r.products.choose(&mut rng).unwrap();
                preds.push(p.clone());
                expected_correct += 1;
            }
        }
    }
    let report = evaluate_records(&preds, records).unwrap();
    let ratio = expected_correct as f64 / records.len() as f64;
    if report.correct != expected_correct || (report.accuracy - ratio).abs() > EVAL_TOLERANCE {
        failures.push(format!("{} correct, accuracy {}", report.correct, report.accuracy));
    }
    let sum: usize = report.per_template.values().map(|s| s.correct).sum();
    let total: usize = report.per_template.values().map(|s| s.total).sum();
    if (sum, total) != (report.correct, report.total)
        || report
            .per_template
            .values()
            .any(|s| (s.accuracy - s.correct as f64 / s.total as f64).abs() > EVAL_TOLERANCE)
    {
        failures.push("per-template totals".into());
    }
    let randomized: Vec<String> = preds
        .iter()
        .enumerate()
        .map(|(i, p)| match parse_smiles(p) {
            Ok(m) => randomized_smiles(&m, i as u64 + 1),
            Err(_) => p.clone(),
        })
        .collect();
    if evaluate_records(&randomized, records).unwrap() != report {
        failures.push("randomized predictions change the report".into());
    }
    let multi: Vec<&DatasetRecord> = records.iter().filter(|r| r.products.len() > 1).collect();
    for r in &multi {
        for p in &r.products {
            let m = parse_smiles(p).unwrap();
            if !exact_match(&randomized_smiles(&m, 3), &r.products).unwrap() {
                failures.push(format!("{p} not a member of its own reference set"));
            }
        }
        let mut larger = r.products.clone();
        larger.push("CC".repeat(13));
        if !exact_match(&r.products[0], &larger).unwrap() {
            failures.push("enlarged reference set lost a match".into());
        }
    }
    if multi.is_empty() {
        failures.push("no multi-reference records".into());
    }
    outcome(
        &failures,
        format!(
            "{}/{} correct = {:.6}, {} multi-reference records",
            report.correct, report.total, report.accuracy, multi.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let mut report = |name: &str, o: Outcome| {
        let line = format!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        println!("{line}");
        lines.push(o.pass);
    };
    let pool = pool();
    report("oracle equivalence", oracle_equivalence());
    report("registry sanity", registry_sanity());
    report("round-trip symmetry", round_trip(&pool));
    report("augmentation semantics", augmentation_semantics(&pool));
    report("canonicalization", canonicalization(&pool));
    let (o, corpus) = dataset_pipeline();
    report("dataset pipeline", o);
    match corpus {
        Some(c) => {
            report("tokenizer", tokenizer(&c));
            report("evaluation", evaluation(&c));
        }
        None => {
            report("tokenizer", outcome(&["no desk corpus".into()], String::new()));
            report("evaluation", outcome(&["no desk corpus".into()], String::new()));
        }
    }
    let failed = lines.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
