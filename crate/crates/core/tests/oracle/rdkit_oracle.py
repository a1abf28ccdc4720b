"""Reference implementation of template application on top of RDKit.

Writes tests/fixtures/apply_oracle.jsonl with one case per line:
{"template": id, "mode": "intra"|"inter", "reactants": [...],
 "products": [...], "discarded": {product: [...]}}

Procedure: match the reactant pattern on the aromatic molecules (all
atom maps, no uniquify), rewrite every Kekule structure, recompute H on
touched atoms, sanitize, and collect canonical SMILES.

    python rdkit_oracle.py [--seed 7] [--per-template 12]
"""

import argparse
import json
import random
import re
from pathlib import Path

from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")

HERE = Path(__file__).parent
FIXTURES = HERE.parent / "fixtures"

TEMPLATES = [
    line.strip()
    for line in (FIXTURES / "templates.txt").read_text().splitlines()
    if line.strip()
]

EXPLICIT = {"-": Chem.BondType.SINGLE, "=": Chem.BondType.DOUBLE, "#": Chem.BondType.TRIPLE}


def to_total_h(smarts):
    # lowercase h in RDKit is implicit-only and misses [nH]; use total H
    smarts = re.sub(r";h(\d)", r";H\1", smarts)
    return re.sub(r";h(?=[:\]])", ";!H0", smarts)


def h_constraint(atom_smarts):
    m = re.search(r"[;,\[]h(\d?)", atom_smarts)
    if not m:
        return None
    return int(m.group(1)) if m.group(1) else -1


class Template:
    def __init__(self, text):
        lhs, rhs = text.split(">>")
        self.lhs = Chem.MolFromSmarts(to_total_h(lhs))
        self.rhs = Chem.MolFromSmarts(rhs)
        self.lhs_by_map = {a.GetAtomMapNum(): a.GetIdx() for a in self.lhs.GetAtoms() if a.GetAtomMapNum()}
        self.rhs_map = {a.GetIdx(): a.GetAtomMapNum() for a in self.rhs.GetAtoms()}
        self.survives = {self.lhs_by_map[m] for m in self.rhs_map.values()}
        self.rhs_h = {}
        for a in self.rhs.GetAtoms():
            c = h_constraint(a.GetSmarts())
            if c is not None:
                self.rhs_h[self.lhs_by_map[a.GetAtomMapNum()]] = c
        self.components = Chem.GetMolFrags(self.lhs)

    def rhs_bond(self, la, lb):
        inv = {self.lhs_by_map[m]: r for r, m in self.rhs_map.items()}
        if la not in inv or lb not in inv:
            return None
        return self.rhs.GetBondBetweenAtoms(inv[la], inv[lb])


def kekule_structures(mol):
    """All Kekule assignments as lists of doubled aromatic bond indices."""
    arom = [b.GetIdx() for b in mol.GetBonds() if b.GetBondType() == Chem.BondType.AROMATIC]
    if not arom:
        return [[]]
    k = Chem.Mol(mol)
    Chem.Kekulize(k, clearAromaticFlags=False)
    needy = set()
    for bi in arom:
        b = k.GetBondWithIdx(bi)
        if b.GetBondType() == Chem.BondType.DOUBLE:
            needy.add(b.GetBeginAtomIdx())
            needy.add(b.GetEndAtomIdx())
    edges = [
        (bi, mol.GetBondWithIdx(bi).GetBeginAtomIdx(), mol.GetBondWithIdx(bi).GetEndAtomIdx())
        for bi in arom
    ]
    edges = [e for e in edges if e[1] in needy and e[2] in needy]
    out = []

    def rec(free, chosen):
        if not free:
            out.append(list(chosen))
            return
        u = min(free)
        for bi, a, b in edges:
            if u in (a, b):
                v = b if a == u else a
                if v in free:
                    chosen.append(bi)
                    rec(free - {u, v}, chosen)
                    chosen.pop()

    rec(frozenset(needy), [])
    return out


def build(kek, bonds, keep, touched):
    """Sanitized molecule on `keep` or None."""
    rw = Chem.RWMol()
    index = {}
    for i in keep:
        src = kek.GetAtomWithIdx(i)
        a = Chem.Atom(src.GetAtomicNum())
        a.SetFormalCharge(src.GetFormalCharge())
        if i in touched:
            a.SetNoImplicit(False)
            a.SetNumExplicitHs(0)
        else:
            a.SetNoImplicit(True)
            a.SetNumExplicitHs(src.GetTotalNumHs())
        index[i] = rw.AddAtom(a)
    for (a, b), order in bonds.items():
        if a in index and b in index:
            rw.AddBond(index[a], index[b], order)
    mol = rw.GetMol()
    try:
        Chem.SanitizeMol(mol)
    except Exception:
        return None, index
    if any(a.GetNumRadicalElectrons() for a in mol.GetAtoms()):
        return None, index
    return mol, index


def rewrite(t, kek, match):
    n = kek.GetNumAtoms()
    bonds = {}
    for b in kek.GetBonds():
        a, c = sorted((b.GetBeginAtomIdx(), b.GetEndAtomIdx()))
        bonds[(a, c)] = b.GetBondType()
    touched = set()
    changed = False
    inv = {m: l for l, m in t.lhs_by_map.items()}
    for rb in t.rhs.GetBonds():
        la = t.lhs_by_map[t.rhs_map[rb.GetBeginAtomIdx()]]
        lb = t.lhs_by_map[t.rhs_map[rb.GetEndAtomIdx()]]
        key = tuple(sorted((match[la], match[lb])))
        sym = rb.GetSmarts()
        lbond = t.lhs.GetBondBetweenAtoms(la, lb)
        pinned = lbond is not None and lbond.GetSmarts() in EXPLICIT
        if key in bonds:
            cur = bonds[key]
            if sym in EXPLICIT:
                target = EXPLICIT[sym]
            elif sym == "" and pinned:
                target = Chem.BondType.SINGLE
            else:
                target = cur
            if target != cur:
                bonds[key] = target
                touched.update(key)
                changed = True
        else:
            bonds[key] = EXPLICIT.get(sym, Chem.BondType.SINGLE)
            touched.update(key)
            changed = True
    for lb in t.lhs.GetBonds():
        la, lc = lb.GetBeginAtomIdx(), lb.GetEndAtomIdx()
        if t.rhs_bond(la, lc) is not None:
            continue
        key = tuple(sorted((match[la], match[lc])))
        del bonds[key]
        touched.update(key)
        changed = True
    gone = {match[l] for l in range(len(match)) if l not in t.survives}
    if gone:
        changed = True
    if not changed:
        return None
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in bonds:
        parent[find(a)] = find(b)
    kept_roots = {find(match[l]) for l in t.survives}
    kept = [i for i in range(n) if find(i) in kept_roots and i not in gone]
    dropped = [i for i in range(n) if find(i) not in kept_roots]
    for a, b in bonds:
        if (a in gone) != (b in gone):
            touched.update((a, b))
    gone_in_kept = any(find(g) in kept_roots for g in gone)
    mol, index = build(kek, bonds, kept, touched)
    if mol is None:
        return None
    for l, want in t.rhs_h.items():
        h = mol.GetAtomWithIdx(index[match[l]]).GetTotalNumHs()
        if (want == -1 and h < 1) or (want >= 0 and h != want):
            return None
    discarded = None
    if dropped and not gone_in_kept:
        dmol, _ = build(kek, bonds, dropped, touched)
        if dmol is None:
            return None
        discarded = Chem.MolToSmiles(dmol)
    return Chem.MolToSmiles(mol), discarded


def run(t, reactants, mode):
    mols = [Chem.MolFromSmiles(s) for s in reactants]
    combined = mols[0]
    for m in mols[1:]:
        combined = Chem.CombineMols(combined, m)
    owner = []
    for k, m in enumerate(mols):
        owner += [k] * m.GetNumAtoms()
    matches = combined.GetSubstructMatches(t.lhs, uniquify=False, maxMatches=100000)
    if mode == "inter":
        keep = []
        for mt in matches:
            used = [owner[mt[c[0]]] for c in t.components]
            if len(set(used)) == len(used):
                keep.append(mt)
        matches = keep
    structures = kekule_structures(combined)
    results = {}
    for mt in matches:
        for doubles in structures:
            kek = Chem.RWMol(combined)
            for b in kek.GetBonds():
                if b.GetBondType() == Chem.BondType.AROMATIC:
                    b.SetBondType(Chem.BondType.SINGLE)
                b.SetIsAromatic(False)
            for bi in doubles:
                kek.GetBondWithIdx(bi).SetBondType(Chem.BondType.DOUBLE)
            for a in kek.GetAtoms():
                a.SetIsAromatic(False)
            out = rewrite(t, kek, mt)
            if out is None:
                continue
            prod, disc = out
            results.setdefault(prod, set())
            if disc is not None:
                results[prod].add(disc)
    return {p: sorted(d) for p, d in sorted(results.items())}


def load_pool():
    rows = (FIXTURES / "pool.tsv").read_text().splitlines()
    return [r.split("\t")[0] for r in rows]


EXAMPLES = [
    (2, "intra", ["CCO"]),
    (5, "intra", ["CCC"]),
    (11, "intra", ["CO"]),
    (3, "intra", ["c1ccccc1"]),
    (1, "inter", ["C", "O"]),
    (1, "inter", ["c1ccccc1", "C"]),
    (11, "intra", ["Oc1ccccc1"]),
    (12, "intra", ["C=C"]),
    (13, "intra", ["CC#CC"]),
    (13, "intra", ["C#N"]),
    (14, "intra", ["CC#N"]),
    (15, "intra", ["C1=CC1"]),
    (16, "intra", ["c1ccc2c(c1)CC2"]),
    (5, "intra", ["C1CC1"]),
    (10, "intra", ["CCCCCCCC"]),
    (20, "intra", ["C1CCCCCCC1"]),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--per-template", type=int, default=12)
    ap.add_argument("--empty-per-template", type=int, default=2)
    ap.add_argument("--inter-pairs", type=int, default=12)
    ap.add_argument("--out", default=str(FIXTURES / "apply_oracle.jsonl"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    pool = load_pool()
    templates = [Template(s) for s in TEMPLATES]
    cases = []

    def add(tid, mode, reactants):
        res = run(templates[tid - 1], reactants, mode)
        cases.append({
            "template": tid,
            "mode": mode,
            "reactants": reactants,
            "products": list(res),
            "discarded": res,
        })
        return res

    for tid, mode, reactants in EXAMPLES:
        add(tid, mode, reactants)
    order = pool[:]
    rng.shuffle(order)
    for tid in range(1, 21):
        hits = empties = 0
        for smi in order:
            if hits >= args.per_template and empties >= args.empty_per_template:
                break
            res = run(templates[tid - 1], [smi], "intra")
            if res and hits < args.per_template:
                hits += 1
            elif not res and empties < args.empty_per_template:
                empties += 1
            else:
                continue
            cases.append({
                "template": tid,
                "mode": "intra",
                "reactants": [smi],
                "products": list(res),
                "discarded": res,
            })
        rng.shuffle(order)
    small = [s for s in pool if Chem.MolFromSmiles(s).GetNumAtoms() <= 5]
    for _ in range(args.inter_pairs):
        add(1, "inter", rng.sample(small, 2))
    with open(args.out, "w") as f:
        for c in cases:
            f.write(json.dumps(c, sort_keys=True) + "\n")
    print(f"wrote {len(cases)} cases to {args.out}")


if __name__ == "__main__":
    main()
