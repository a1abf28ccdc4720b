//! Probe molecules for the variant validity gate: chains, rings of size
//! 3 to 8, multiple bonds, heteroatoms and aromatics.

use std::sync::OnceLock;

use crate::molgraph::{parse_smiles, Molecule};

pub const PROBE_SMILES: [&str; 50] = [
    "CCO", "CC=O", "C=CC", "CC#N", "C#CC", "CC#CC", "CCN", "CCOC", "CC(C)O", "NCCO",
    "CCCC", "CCCCC", "CCCCCC", "CCCCCCC", "CCCCCCCC", "CCCCCCCCC", "C=CC=C", "OCCCCO", "CCNCC", "CCSCC",
    "FCCO", "CC(F)C", "CN=C", "OCC=CCO", "NCCCCN", "CCC(N)=O", "C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1",
    "C1CCCCCC1", "C1CCCCCCC1", "C1CCOC1", "C1CCNCC1", "C1=CCCC1", "CC1CC1", "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "Nc1ccccc1",
    "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "CCc1ccccc1", "OCc1ccccc1", "c1ccc2ccccc2c1", "N#Cc1ccccc1", "Cc1ccc(C)cc1", "CCCc1ccncc1",
];

/// Parsed probe set, built once.
pub fn probe_molecules() -> &'static [Molecule] {
    static PROBE: OnceLock<Vec<Molecule>> = OnceLock::new();
    PROBE.get_or_init(|| {
        PROBE_SMILES
            .iter()
            .map(|s| parse_smiles(s).expect("probe SMILES parses"))
            .collect()
    })
}
