//! Molecule files: one SMILES per line, optional tab-separated id.

use std::fs;
use std::path::PathBuf;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{io_err, DatasetError};
use crate::molgraph::{element, parse_smiles, Molecule};

pub const DEFAULT_ALLOWLIST: [&str; 5] = ["C", "N", "O", "F", "S"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoleculeSource {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_allowlist")]
    pub element_allowlist: Vec<String>,
}

fn default_allowlist() -> Vec<String> {
    DEFAULT_ALLOWLIST.iter().map(|s| s.to_string()).collect()
}

impl MoleculeSource {
    pub fn new(name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        MoleculeSource {
            name: name.into(),
            path: path.into(),
            element_allowlist: default_allowlist(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub kept: usize,
    pub parse_failed: usize,
    pub disallowed: usize,
}

impl LoadStats {
    pub fn skipped(&self) -> usize {
        self.parse_failed + self.disallowed
    }
}

/// Parse every line; skip failures and molecules that are charged,
/// isotopic or contain an element outside the allowlist. Order is kept.
pub fn load_molecules(src: &MoleculeSource) -> Result<(Vec<Molecule>, LoadStats), DatasetError> {
    let text = fs::read_to_string(&src.path).map_err(io_err(&src.path))?;
    let allowed: Vec<u8> = src
        .element_allowlist
        .iter()
        .filter_map(|s| element::atomic_number(s))
        .collect();
    let mut stats = LoadStats::default();
    let mut out = Vec::new();
    for line in text.lines() {
        let smiles = line.split('\t').next().unwrap_or("").trim();
        if smiles.is_empty() {
            continue;
        }
        let Ok(mol) = parse_smiles(smiles) else {
            stats.parse_failed += 1;
            continue;
        };
        if mol.has_charge() || mol.has_isotope() || mol.atoms().iter().any(|a| !allowed.contains(&a.element)) {
            stats.disallowed += 1;
            continue;
        }
        stats.kept += 1;
        out.push(mol);
    }
    if stats.kept + stats.skipped() == 0 {
        warn!("{}: no molecules in {}", src.name, src.path.display());
    }
    Ok((out, stats))
}
