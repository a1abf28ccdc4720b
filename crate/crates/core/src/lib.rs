//! Reaction-template toolkit: molecular graphs with SMILES I/O, a SMARTS
//! subset with a backtracking matcher, a graph-rewriting reaction engine
//! with the 20 generic BRS templates, template augmentation, corpus
//! generation, character-level encoding and exact-match evaluation.

pub mod augment;
pub mod dataset;
pub mod encode;
pub mod evalkit;
pub mod molgraph;
pub mod rxn;
pub mod smarts;

pub use molgraph::{parse_smiles, randomized_smiles, write_canonical, Molecule};
pub use rxn::{apply, parse_reaction, MatchMode, SmartsReaction};
pub use smarts::{parse_smarts, PatternGraph};
