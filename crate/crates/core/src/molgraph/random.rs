use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::writer::write_ranked;
use super::Molecule;

/// A valid, generally non-canonical SMILES for `mol`: the atom ranking that
/// drives the writer is a random permutation drawn from `seed`.
pub fn randomized_smiles(mol: &Molecule, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks: Vec<usize> = (0..mol.atom_count()).collect();
    ranks.shuffle(&mut rng);
    write_ranked(mol, &ranks).0
}
