//! Corpus generation: molecule ingestion, seeded template application,
//! realism filters, leakage-free splits, template and SMILES augmentation.

mod corpus;
mod generate;
mod scaffold;
mod source;

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rxn::RxnError;
use crate::smarts::SmartsError;

pub use corpus::{augment_corpus, augment_inputs, AugCorpusOptions, AugCorpusStats};
pub use generate::{generate, write_corpus, Corpus, GenerationConfig, GenerationStats, SplitTargets};
pub use scaffold::{build_scaffold_allowlist, filter_product, read_allowlist, ring_signatures, write_allowlist};
pub use source::{load_molecules, LoadStats, MoleculeSource, DEFAULT_ALLOWLIST};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Reaction(#[from] RxnError),
    #[error(transparent)]
    Smarts(#[from] SmartsError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split '{s}'")),
        }
    }
}

/// One reactant-template input with every retained product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    /// Canonical SMILES, sorted.
    pub reactants: Vec<String>,
    pub template_id: usize,
    /// Reaction SMARTS, base or augmented.
    pub template: String,
    /// Canonical SMILES, sorted, non-empty.
    pub products: Vec<String>,
    pub split: Split,
}

impl DatasetRecord {
    /// Leakage unit: the reactant tuple and template id.
    pub fn group_key(&self) -> String {
        group_key(&self.reactants, self.template_id)
    }
}

pub fn group_key(reactants: &[String], template_id: usize) -> String {
    format!("{}|{}", template_id, reactants.join("."))
}

/// Stable 64-bit hash of a string (first eight bytes of SHA-256).
pub fn stable_hash(s: &str) -> u64 {
    let digest = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Independent stream seed for work item `parts` under `master`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut x = master;
    for &p in parts {
        x = splitmix64(x ^ splitmix64(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<(), DatasetError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Non-empty, non-comment lines of a text file.
pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_per_item() {
        let a = derive_seed(1, &[5, 0]);
        assert_ne!(a, derive_seed(1, &[5, 1]));
        assert_ne!(a, derive_seed(1, &[0, 5]));
        assert_ne!(a, derive_seed(2, &[5, 0]));
        assert_eq!(a, derive_seed(1, &[5, 0]));
    }

    #[test]
    fn record_json_shape() {
        let r = DatasetRecord {
            reactants: vec!["CCO".into()],
            template_id: 2,
            template: "t".into(),
            products: vec!["CC=O".into()],
            split: Split::Train,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"reactants":["CCO"],"template_id":2,"template":"t","products":["CC=O"],"split":"train"}"#
        );
        assert_eq!(serde_json::from_str::<DatasetRecord>(&s).unwrap(), r);
    }
}
