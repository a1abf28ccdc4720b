//! `brs`: command-line access to the toolkit. Results are JSON lines on
//! stdout, diagnostics go to stderr. Exit codes: 0 success, 1 usage
//! error, 2 data error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use brs_core::augment::{enumerate_variants, OpKind};
use brs_core::dataset::{
    augment_corpus, build_scaffold_allowlist, generate, load_molecules, read_records, write_allowlist,
    write_corpus, write_records, AugCorpusOptions, GenerationConfig, MoleculeSource,
};
use brs_core::encode::{build_vocab, encode_records, write_encoded, InputMode, Vocab};
use brs_core::evalkit::evaluate;
use brs_core::rxn::{apply, BrsRegistry, MatchMode};
use brs_core::smarts::{match_pattern, parse_smarts};
use brs_core::{parse_smiles, write_canonical, Molecule};

#[derive(Parser)]
#[command(name = "brs", version, about = "Reaction-template toolkit")]
struct Cli {
    /// Indented JSON instead of one object per line.
    #[arg(long, global = true)]
    pretty: bool,
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(multiple = false)]
struct ModeFlags {
    /// Pattern components may share one molecule (default).
    #[arg(long)]
    intra: bool,
    /// Each pattern component binds a different molecule.
    #[arg(long)]
    inter: bool,
}

impl ModeFlags {
    fn mode(&self) -> MatchMode {
        if self.inter {
            MatchMode::Inter
        } else {
            MatchMode::Intra
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Canonical SMILES of a molecule.
    Canon {
        #[arg(long)]
        smiles: String,
    },
    /// Embeddings of a SMARTS pattern.
    Match {
        #[arg(long)]
        smarts: String,
        /// One molecule, or several separated by commas.
        #[arg(long)]
        smiles: String,
        #[command(flatten)]
        mode: ModeFlags,
        /// Keep embeddings that differ only by pattern symmetry.
        #[arg(long)]
        all: bool,
    },
    /// Apply a reaction template.
    Apply {
        /// Registry id (1-20) or reaction SMARTS.
        #[arg(long)]
        template: String,
        #[arg(long, value_delimiter = ',', required = true)]
        reactants: Vec<String>,
        #[command(flatten)]
        mode: ModeFlags,
        /// Also report the removed fragments of each product.
        #[arg(long)]
        keep_discarded: bool,
    },
    /// Enumerate validated template variants.
    Augment {
        /// Registry id (1-20) or reaction SMARTS.
        #[arg(long)]
        template: String,
        /// Comma list of spec, gen, perm (or permw, permb) and comb.
        #[arg(long, default_value = "spec,gen,perm,comb")]
        ops: String,
        #[arg(long, default_value_t = 32)]
        max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate train/valid/test record files from a TOML config.
    GenDataset {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; output does not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair every record with a template-augmented copy.
    AugCorpus {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; records go to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        variants: usize,
    },
    /// Ring-system signatures of a molecule file.
    ScaffoldAllowlist {
        #[arg(long)]
        molecules: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode records into the binary training format.
    Tokenize {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// tb (template-based) or tf (template-free).
        #[arg(long)]
        mode: InputMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Character vocabulary of a record file.
    BuildVocab {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact-match accuracy of predictions against records.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        refs: PathBuf,
    },
}

fn emit(v: &Value, pretty: bool) -> Result<()> {
    let s = if pretty {
        serde_json::to_string_pretty(v)?
    } else {
        serde_json::to_string(v)?
    };
    let mut out = io::stdout().lock();
    writeln!(out, "{s}")?;
    Ok(())
}

fn molecules(smiles: &[String]) -> Result<Vec<Molecule>> {
    smiles
        .iter()
        .map(|s| parse_smiles(s).with_context(|| format!("invalid SMILES '{s}'")))
        .collect()
}

fn text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let pretty = cli.pretty;
    let registry = BrsRegistry::builtin();
    match cli.command {
        Command::Canon { smiles } => {
            let m = parse_smiles(&smiles).with_context(|| format!("invalid SMILES '{smiles}'"))?;
            emit(&json!({ "canonical": write_canonical(&m) }), pretty)
        }
        Command::Match { smarts, smiles, mode, all } => {
            let p = parse_smarts(&smarts).with_context(|| format!("invalid SMARTS '{smarts}'"))?;
            let mols = molecules(&smiles.split(',').map(str::to_string).collect::<Vec<_>>())?;
            let found = if all {
                brs_core::smarts::match_all(&p, &mols, mode.mode())
            } else {
                match_pattern(&p, &mols, mode.mode())
            };
            let matches: Vec<Value> = found
                .iter()
                .map(|e| {
                    if mols.len() == 1 {
                        json!(e.assignment.iter().map(|&(_, a)| a).collect::<Vec<_>>())
                    } else {
                        json!(e.assignment)
                    }
                })
                .collect();
            emit(&json!({ "count": matches.len(), "matches": matches }), pretty)
        }
        Command::Apply { template, reactants, mode, keep_discarded } => {
            let rxn = registry.resolve(&template)?;
            let products = apply(&rxn, &molecules(&reactants)?, mode.mode())?;
            let names: Vec<&str> = products.iter().map(|p| p.smiles.as_str()).collect();
            if keep_discarded {
                let discarded: BTreeMap<&str, &Vec<String>> =
                    products.iter().map(|p| (p.smiles.as_str(), &p.discarded)).collect();
                emit(&json!({ "products": names, "discarded": discarded }), pretty)
            } else {
                emit(&json!({ "products": names }), pretty)
            }
        }
        Command::Augment { template, ops, max, seed } => {
            let base_id = template.trim().parse::<usize>().ok();
            let rxn = registry.resolve(&template)?;
            let ops = OpKind::parse_list(&ops).map_err(Usage)?;
            for v in enumerate_variants(base_id, &rxn, &ops, max, seed) {
                emit(
                    &json!({
                        "base": v.base_id.unwrap_or(0),
                        "ops": v.signature(),
                        "class": v.class().name(),
                        "smarts": v.provenance_text,
                    }),
                    pretty,
                )?;
            }
            Ok(())
        }
        Command::GenDataset { config, workers, out } => {
            let mut cfg = GenerationConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if out.is_some() {
                cfg.out_dir = out;
            }
            let dir = cfg
                .out_dir
                .clone()
                .ok_or_else(|| Usage("no output directory: set out_dir or pass --out".into()))?;
            let corpus = generate(&cfg)?;
            write_corpus(&dir, &corpus)?;
            emit(
                &json!({
                    "out_dir": dir,
                    "train": corpus.train.len(),
                    "valid": corpus.valid.len(),
                    "test": corpus.test.len(),
                    "multi_product_records": corpus.stats.multi_product_records,
                }),
                pretty,
            )
        }
        Command::AugCorpus { input, seed, out, variants } => {
            let records = read_records(&input)?;
            let opts = AugCorpusOptions {
                variants_per_template: variants,
                ..AugCorpusOptions::default()
            };
            let (aug, stats) = augment_corpus(&records, seed, &opts);
            match out {
                Some(path) => {
                    write_records(&path, &aug)?;
                    emit(&serde_json::to_value(stats)?, pretty)
                }
                None => {
                    eprintln!("{}", serde_json::to_string(&stats)?);
                    for r in &aug {
                        emit(&serde_json::to_value(r)?, pretty)?;
                    }
                    Ok(())
                }
            }
        }
        Command::ScaffoldAllowlist { molecules, out } => {
            let (mols, stats) = load_molecules(&MoleculeSource::new("molecules", molecules))?;
            let sigs = build_scaffold_allowlist(&mols);
            write_allowlist(&out, &sigs)?;
            emit(&json!({ "molecules": stats.kept, "skipped": stats.skipped(), "signatures": sigs.len() }), pretty)
        }
        Command::Tokenize { records, vocab, mode, out } => {
            let v = Vocab::from_text(&text(&vocab)?)?;
            let recs = read_records(&records)?;
            let (set, unknown) = encode_records(&recs, &v, mode)?;
            if unknown > 0 {
                log::warn!("{unknown} characters outside the vocabulary mapped to <unk>");
            }
            write_encoded(&out, &set).with_context(|| format!("writing {}", out.display()))?;
            emit(
                &json!({ "records": recs.len(), "examples": set.examples.len(), "unknown": unknown }),
                pretty,
            )
        }
        Command::BuildVocab { records, out } => {
            let v = build_vocab(&read_records(&records)?);
            fs::write(&out, v.to_text()).with_context(|| format!("writing {}", out.display()))?;
            emit(&json!({ "vocab_size": v.len() }), pretty)
        }
        Command::Eval { pred, refs } => emit(&serde_json::to_value(evaluate(&pred, &refs)?)?, pretty),
    }
}

/// Invalid arguments detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    stderrlog::new()
        .verbosity(1 + cli.verbose as usize)
        .init()
        .expect("logger installs once");
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
