"""Build the strained-polycycle fixture with RDKit.

Ring-closure templates (5-10) applied to pool molecules give bridged and
fused systems that random graphs rarely contain. Writes
tests/fixtures/polycycles.tsv: Kekule SMILES, RDKit canonical SMILES,
number of aromatic atoms, total hydrogen count.

    python make_polycycles.py [--n 3000] [--seed 11]
"""

import argparse
import random

from rdkit import Chem
from rdkit.Chem import rdMolDescriptors

from rdkit_oracle import FIXTURES, TEMPLATES, Template, load_pool, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default=str(FIXTURES / "polycycles.tsv"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    pool = [s for s in load_pool() if rdMolDescriptors.CalcNumRings(Chem.MolFromSmiles(s)) > 0]
    rng.shuffle(pool)
    templates = [Template(TEMPLATES[k - 1]) for k in range(5, 11)]
    seen = set()
    rows = []
    for smi in pool:
        if len(rows) >= args.n:
            break
        t = rng.choice(templates)
        for prod in run(t, [smi], "intra"):
            m = Chem.MolFromSmiles(prod)
            if m is None or prod in seen or rdMolDescriptors.CalcNumRings(m) < 2:
                continue
            seen.add(prod)
            k = Chem.Mol(m)
            try:
                Chem.Kekulize(k, clearAromaticFlags=True)
            except Exception:
                continue
            kek = Chem.MolToSmiles(k, kekuleSmiles=True)
            arom = sum(a.GetIsAromatic() for a in m.GetAtoms())
            hs = sum(a.GetTotalNumHs() for a in m.GetAtoms())
            rows.append(f"{kek}\t{prod}\t{arom}\t{hs}")
    with open(args.out, "w") as f:
        f.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} molecules to {args.out}")


if __name__ == "__main__":
    main()
