//! Seeded, worker-count-independent corpus generation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    derive_seed, filter_product, io_err, load_molecules, read_allowlist, read_lines, stable_hash, write_records,
    DatasetError, DatasetRecord, LoadStats, MoleculeSource, Split,
};
use crate::molgraph::{write_canonical, Molecule};
use crate::rxn::{apply, BrsRegistry, MatchMode, SmartsReaction};
use crate::smarts::{parse_smarts, PatternGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTargets {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitTargets {
    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    fn get(&self, s: Split) -> usize {
        match s {
            Split::Train => self.train,
            Split::Valid => self.valid,
            Split::Test => self.test,
        }
    }

    /// Targets shrunk proportionally to `n` records, remainder to train.
    fn scaled_to(&self, n: usize) -> SplitTargets {
        let total = self.total();
        if n >= total {
            return *self;
        }
        let valid = self.valid * n / total;
        let test = self.test * n / total;
        SplitTargets {
            train: n - valid - test,
            valid,
            test,
        }
    }
}

fn default_cap() -> usize {
    8
}
fn default_attempts() -> usize {
    20_000
}
fn default_batch() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub seed: u64,
    pub splits: SplitTargets,
    pub sources: Vec<MoleculeSource>,
    /// Registry file; the built-in 20 templates when absent.
    #[serde(default)]
    pub registry: Option<PathBuf>,
    /// Template ids to use; all registry ids when absent.
    #[serde(default)]
    pub templates: Option<Vec<usize>>,
    /// Fixed record counts for some template ids; the rest share the
    /// remaining target evenly.
    #[serde(default)]
    pub quotas: BTreeMap<String, usize>,
    /// SMARTS file of substructures a product must not contain.
    #[serde(default)]
    pub forbidden: Option<PathBuf>,
    /// Ring-system signature allowlist file.
    #[serde(default)]
    pub allowlist: Option<PathBuf>,
    /// Most products kept per record.
    #[serde(default = "default_cap")]
    pub product_cap: usize,
    /// Matching mode for templates with a single reactant component;
    /// multi-component templates always bind distinct molecules.
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "default_attempts")]
    pub max_attempts_per_template: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Worker threads, 0 for the rayon default. Does not affect output.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Intra,
    Inter,
}

impl From<ModeName> for MatchMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Intra => MatchMode::Intra,
            ModeName::Inter => MatchMode::Inter,
        }
    }
}

impl GenerationConfig {
    /// Read a TOML config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: GenerationConfig = toml::from_str(&text).map_err(|e| DatasetError::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut cfg.sources {
            fix(&mut s.path);
        }
        for p in [&mut cfg.registry, &mut cfg.forbidden, &mut cfg.allowlist, &mut cfg.out_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateStats {
    pub attempts: usize,
    pub no_match: usize,
    pub all_filtered: usize,
    pub duplicates: usize,
    pub products_filtered: usize,
    pub products_capped: usize,
    pub records: BTreeMap<Split, usize>,
    pub exhausted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub sources: BTreeMap<String, LoadStats>,
    pub molecules: usize,
    pub requested: usize,
    pub generated: usize,
    pub multi_product_records: usize,
    pub per_template: BTreeMap<usize, TemplateStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub train: Vec<DatasetRecord>,
    pub valid: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
    pub stats: GenerationStats,
}

impl Corpus {
    pub fn split(&self, s: Split) -> &[DatasetRecord] {
        match s {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }
}

struct Context<'a> {
    seed: u64,
    mols: &'a [Molecule],
    canon: &'a [String],
    forbidden: &'a [PatternGraph],
    allowlist: Option<&'a BTreeSet<String>>,
    cap: usize,
    mode: MatchMode,
}

enum Outcome {
    NoMatch,
    AllFiltered { filtered: usize },
    Record {
        reactants: Vec<String>,
        products: Vec<String>,
        filtered: usize,
        capped: bool,
    },
}

fn work_item(ctx: &Context, id: usize, rxn: &SmartsReaction, index: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.seed, &[id as u64, index as u64]));
    let components = rxn.lhs.components.len();
    let n = ctx.mols.len();
    if n < components {
        return Outcome::NoMatch;
    }
    let mut picks: Vec<usize> = if components > 1 {
        sample(&mut rng, n, components).into_vec()
    } else {
        vec![rng.random_range(0..n)]
    };
    picks.sort_by(|&a, &b| ctx.canon[a].cmp(&ctx.canon[b]).then(a.cmp(&b)));
    let reactants: Vec<Molecule> = picks.iter().map(|&i| ctx.mols[i].clone()).collect();
    let mode = if components > 1 { MatchMode::Inter } else { ctx.mode };
    let products = match apply(rxn, &reactants, mode) {
        Ok(p) if !p.is_empty() => p,
        _ => return Outcome::NoMatch,
    };
    let total = products.len();
    let mut kept: Vec<String> = products
        .into_iter()
        .filter(|p| filter_product(&p.molecule, ctx.forbidden, ctx.allowlist))
        .map(|p| p.smiles)
        .collect();
    let filtered = total - kept.len();
    if kept.is_empty() {
        return Outcome::AllFiltered { filtered };
    }
    let capped = kept.len() > ctx.cap;
    if capped {
        let mut idx = sample(&mut rng, kept.len(), ctx.cap).into_vec();
        idx.sort_unstable();
        kept = idx.into_iter().map(|i| kept[i].clone()).collect();
    }
    Outcome::Record {
        reactants: picks.iter().map(|&i| ctx.canon[i].clone()).collect(),
        products: kept,
        filtered,
        capped,
    }
}

struct TemplateState<'a> {
    id: usize,
    rxn: &'a SmartsReaction,
    next_index: usize,
    count: usize,
    quota: usize,
    fixed: bool,
    exhausted: bool,
    seen: HashSet<String>,
    stats: TemplateStats,
}

/// Draw work items for one template in parallel batches and merge them in
/// index order until the quota is met or attempts run out.
fn fill(ctx: &Context, st: &mut TemplateState, out: &mut Vec<DatasetRecord>, max_attempts: usize, batch: usize) {
    while st.count < st.quota && !st.exhausted {
        let start = st.next_index;
        let end = (start + batch).min(max_attempts);
        if start >= end {
            st.exhausted = true;
            break;
        }
        let results: Vec<Outcome> = (start..end)
            .into_par_iter()
            .map(|i| work_item(ctx, st.id, st.rxn, i))
            .collect();
        for (offset, outcome) in results.into_iter().enumerate() {
            if st.count >= st.quota {
                break;
            }
            st.next_index = start + offset + 1;
            st.stats.attempts += 1;
            match outcome {
                Outcome::NoMatch => st.stats.no_match += 1,
                Outcome::AllFiltered { filtered } => {
                    st.stats.all_filtered += 1;
                    st.stats.products_filtered += filtered;
                }
                Outcome::Record {
                    reactants,
                    products,
                    filtered,
                    capped,
                } => {
                    st.stats.products_filtered += filtered;
                    let key = super::group_key(&reactants, st.id);
                    if !st.seen.insert(key) {
                        st.stats.duplicates += 1;
                        continue;
                    }
                    st.stats.products_capped += capped as usize;
                    st.count += 1;
                    out.push(DatasetRecord {
                        reactants,
                        template_id: st.id,
                        template: st.rxn.raw_text().to_string(),
                        products,
                        split: Split::Train,
                    });
                }
            }
        }
        if st.next_index >= max_attempts && st.count < st.quota {
            st.exhausted = true;
        }
    }
}

/// Hash buckets proportional to the targets, then whole records moved
/// from over-full to under-full splits in hash order.
fn assign_splits(records: &mut [DatasetRecord], requested: SplitTargets) {
    let targets = requested.scaled_to(records.len());
    let modulus = requested.total().max(1) as u64;
    let hashes: Vec<u64> = records.iter().map(|r| stable_hash(&r.group_key())).collect();
    for (r, &h) in records.iter_mut().zip(&hashes) {
        let b = (h % modulus) as usize;
        r.split = if b < requested.train {
            Split::Train
        } else if b < requested.train + requested.valid {
            Split::Valid
        } else {
            Split::Test
        };
    }
    let mut pool: Vec<usize> = Vec::new();
    for s in Split::ALL {
        let mut members: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == s).collect();
        let want = targets.get(s);
        if members.len() > want {
            members.sort_by_key(|&i| (std::cmp::Reverse(hashes[i]), i));
            pool.extend_from_slice(&members[..members.len() - want]);
        }
    }
    pool.sort_by_key(|&i| (hashes[i], i));
    // settle pooled records: fill splits in order up to their targets
    let mut count: BTreeMap<Split, usize> = BTreeMap::new();
    let pooled: HashSet<usize> = pool.iter().copied().collect();
    for (i, r) in records.iter().enumerate() {
        if !pooled.contains(&i) {
            *count.entry(r.split).or_default() += 1;
        }
    }
    for i in pool {
        let s = Split::ALL
            .into_iter()
            .find(|&s| count.get(&s).copied().unwrap_or(0) < targets.get(s))
            .expect("targets sum to the record count");
        records[i].split = s;
        *count.entry(s).or_default() += 1;
    }
}

pub fn generate(cfg: &GenerationConfig) -> Result<Corpus, DatasetError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| DatasetError::Config(e.to_string()))?;
    pool.install(|| generate_inner(cfg))
}

fn generate_inner(cfg: &GenerationConfig) -> Result<Corpus, DatasetError> {
    let registry = match &cfg.registry {
        Some(p) => BrsRegistry::from_text(&fs::read_to_string(p).map_err(io_err(p))?)?,
        None => BrsRegistry::builtin(),
    };
    let ids: Vec<usize> = match &cfg.templates {
        Some(ids) => ids.clone(),
        None => registry.iter().map(|(id, _)| id).collect(),
    };
    let mut templates = Vec::new();
    for &id in &ids {
        let rxn = registry
            .get(id)
            .ok_or_else(|| DatasetError::Config(format!("unknown template id {id}")))?;
        templates.push((id, rxn));
    }
    let mut fixed: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &v) in &cfg.quotas {
        let id: usize = k
            .parse()
            .map_err(|_| DatasetError::Config(format!("quota key '{k}' is not a template id")))?;
        if !ids.contains(&id) {
            return Err(DatasetError::Config(format!("quota for unused template {id}")));
        }
        fixed.insert(id, v);
    }
    let forbidden: Vec<PatternGraph> = match &cfg.forbidden {
        Some(p) => read_lines(p)?
            .iter()
            .map(|s| parse_smarts(s))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let allowlist = cfg.allowlist.as_deref().map(read_allowlist).transpose()?;

    let mut stats = GenerationStats::default();
    let mut mols = Vec::new();
    for src in &cfg.sources {
        let (m, s) = load_molecules(src)?;
        info!("{}: kept {} skipped {}", src.name, s.kept, s.skipped());
        stats.sources.insert(src.name.clone(), s);
        mols.extend(m);
    }
    stats.molecules = mols.len();
    let canon: Vec<String> = mols.par_iter().map(write_canonical).collect();
    let ctx = Context {
        seed: cfg.seed,
        mols: &mols,
        canon: &canon,
        forbidden: &forbidden,
        allowlist: allowlist.as_ref(),
        cap: cfg.product_cap.max(1),
        mode: cfg.mode.into(),
    };

    let target = cfg.splits.total();
    stats.requested = target;
    let fixed_total: usize = fixed.values().sum();
    let flexible: Vec<usize> = ids.iter().copied().filter(|id| !fixed.contains_key(id)).collect();
    let flex_total = target.saturating_sub(fixed_total);
    let mut states: Vec<TemplateState> = templates
        .iter()
        .map(|&(id, rxn)| TemplateState {
            id,
            rxn,
            next_index: 0,
            count: 0,
            quota: fixed.get(&id).copied().unwrap_or(0),
            fixed: fixed.contains_key(&id),
            exhausted: false,
            seen: HashSet::new(),
            stats: TemplateStats::default(),
        })
        .collect();
    share(&mut states, flex_total, &flexible);

    let mut records = Vec::new();
    loop {
        for st in states.iter_mut() {
            fill(&ctx, st, &mut records, cfg.max_attempts_per_template, cfg.batch_size.max(1));
        }
        let deficit = target.saturating_sub(records.len());
        if deficit == 0 {
            break;
        }
        let receivers: Vec<usize> = states
            .iter()
            .filter(|s| !s.fixed && !s.exhausted)
            .map(|s| s.id)
            .collect();
        if receivers.is_empty() {
            warn!("sources exhausted: {} of {} records generated", records.len(), target);
            break;
        }
        share(&mut states, deficit, &receivers);
    }

    assign_splits(&mut records, cfg.splits);
    stats.generated = records.len();
    stats.multi_product_records = records.iter().filter(|r| r.products.len() > 1).count();
    for st in states {
        let mut ts = st.stats;
        ts.exhausted = st.exhausted;
        stats.per_template.insert(st.id, ts);
    }
    let mut corpus = Corpus {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
        stats,
    };
    for r in records {
        *corpus
            .stats
            .per_template
            .get_mut(&r.template_id)
            .expect("template has stats")
            .records
            .entry(r.split)
            .or_default() += 1;
        match r.split {
            Split::Train => corpus.train.push(r),
            Split::Valid => corpus.valid.push(r),
            Split::Test => corpus.test.push(r),
        }
    }
    Ok(corpus)
}

/// Add `amount` to the quotas of `receivers`, evenly, earlier ids first
/// for the remainder.
fn share(states: &mut [TemplateState], amount: usize, receivers: &[usize]) {
    if receivers.is_empty() {
        return;
    }
    let each = amount / receivers.len();
    let extra = amount % receivers.len();
    for (k, id) in receivers.iter().enumerate() {
        let st = states.iter_mut().find(|s| s.id == *id).expect("receiver exists");
        st.quota += each + usize::from(k < extra);
    }
}

/// `train.jsonl`, `valid.jsonl`, `test.jsonl` and `stats.json` in `dir`.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for s in Split::ALL {
        write_records(&dir.join(format!("{}.jsonl", s.name())), corpus.split(s))?;
    }
    let stats = serde_json::to_string_pretty(&corpus.stats).expect("stats serialize");
    let p = dir.join("stats.json");
    fs::write(&p, stats + "\n").map_err(io_err(&p))
}
