//! Ring perception: bridges, relevant cycles, SSSR and fused ring systems.

use super::Bond;

/// Simple-cycle enumeration budget (DFS steps per ring component). Beyond
/// it the component falls back to shortest-cycle candidates.
const CYCLE_SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    /// Atoms in ring order.
    pub atoms: Vec<usize>,
    /// Bond indices, sorted.
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RingInfo {
    relevant: Vec<Ring>,
    sssr: Vec<usize>,
    bond_in_ring: Vec<bool>,
    atom_in_ring: Vec<bool>,
    min_ring_size: Vec<u8>,
    sssr_membership: Vec<u8>,
}

impl RingInfo {
    pub(crate) fn compute(n: usize, bonds: &[Bond], adj: &[Vec<(usize, usize)>]) -> RingInfo {
        let bond_in_ring = non_bridges(n, bonds, adj);
        let mut atom_in_ring = vec![false; n];
        for (i, b) in bonds.iter().enumerate() {
            if bond_in_ring[i] {
                atom_in_ring[b.a] = true;
                atom_in_ring[b.b] = true;
            }
        }
        let mut relevant = Vec::new();
        let mut sssr = Vec::new();
        for comp in ring_components(n, adj, &bond_in_ring) {
            let cycles = enumerate_cycles(&comp, adj, &bond_in_ring).unwrap_or_else(|| {
                shortest_cycle_candidates(&comp, bonds, adj, &bond_in_ring)
            });
            let comp_bonds: Vec<usize> = (0..bonds.len())
                .filter(|&b| bond_in_ring[b] && comp.binary_search(&bonds[b].a).is_ok())
                .collect();
            let rank = comp_bonds.len() + 1 - comp.len();
            let (rel, basis) = select_cycles(cycles, bonds.len(), rank);
            let off = relevant.len();
            sssr.extend(basis.into_iter().map(|i| i + off));
            relevant.extend(rel);
        }
        let mut min_ring_size = vec![0u8; n];
        for r in &relevant {
            let len = r.len().min(255) as u8;
            for &a in &r.atoms {
                if min_ring_size[a] == 0 || min_ring_size[a] > len {
                    min_ring_size[a] = len;
                }
            }
        }
        let mut sssr_membership = vec![0u8; n];
        for &ri in &sssr {
            for &a in &relevant[ri].atoms {
                sssr_membership[a] = sssr_membership[a].saturating_add(1);
            }
        }
        RingInfo {
            relevant,
            sssr,
            bond_in_ring,
            atom_in_ring,
            min_ring_size,
            sssr_membership,
        }
    }

    /// All relevant cycles (cycles that are not sums of shorter cycles).
    /// Independent of atom numbering.
    pub fn relevant_cycles(&self) -> &[Ring] {
        &self.relevant
    }

    /// A smallest set of smallest rings.
    pub fn sssr(&self) -> Vec<&Ring> {
        self.sssr.iter().map(|&i| &self.relevant[i]).collect()
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_in_ring[bond]
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_in_ring[atom]
    }

    /// Size of the smallest ring through an atom, 0 for acyclic atoms.
    pub fn min_ring_size(&self, atom: usize) -> u8 {
        self.min_ring_size[atom]
    }

    /// Number of SSSR rings containing the atom.
    pub fn ring_count(&self, atom: usize) -> u8 {
        self.sssr_membership[atom]
    }

    /// Fused ring systems: relevant cycles grouped by shared bonds, each
    /// system given as indices into [`Self::relevant_cycles`]. Spiro-joined
    /// rings form separate systems.
    pub fn fused_systems(&self) -> Vec<Vec<usize>> {
        self.group_cycles(|a, b| shared_bonds(a, b) > 0)
    }

    /// Like [`Self::fused_systems`], but rings are joined only when they
    /// share exactly one bond, so bridged pairs stay apart.
    pub(crate) fn ortho_fused_systems(&self) -> Vec<Vec<usize>> {
        self.group_cycles(|a, b| shared_bonds(a, b) == 1)
    }

    fn group_cycles(&self, joined: impl Fn(&Ring, &Ring) -> bool) -> Vec<Vec<usize>> {
        let k = self.relevant.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if joined(&self.relevant[i], &self.relevant[j]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[rj] = ri;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; k];
        for i in 0..k {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }
}

pub(crate) fn shared_bonds(a: &Ring, b: &Ring) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.bonds.len() && j < b.bonds.len() {
        match a.bonds[i].cmp(&b.bonds[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Marks bonds that lie on at least one cycle (Tarjan bridge finding).
fn non_bridges(n: usize, bonds: &[Bond], adj: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut in_ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, parent bond, next adjacency slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&(u, pb, slot)) = stack.last() {
            if slot < adj[u].len() {
                let (v, b) = adj[u][slot];
                stack.last_mut().unwrap().2 += 1;
                if b == pb {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        in_ring[pb] = false;
                    }
                }
            }
        }
    }
    in_ring
}

/// Atom sets connected through ring bonds (each sorted).
fn ring_components(
    n: usize,
    adj: &[Vec<(usize, usize)>],
    in_ring: &[bool],
) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] || !adj[s].iter().any(|&(_, b)| in_ring[b]) {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, b) in &adj[u] {
                if in_ring[b] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn make_ring(atoms: Vec<usize>, adj: &[Vec<(usize, usize)>]) -> Ring {
    let k = atoms.len();
    let mut bonds: Vec<usize> = (0..k)
        .map(|i| {
            let (a, b) = (atoms[i], atoms[(i + 1) % k]);
            adj[a]
                .iter()
                .find(|(x, _)| *x == b)
                .map(|&(_, bi)| bi)
                .expect("consecutive ring atoms are bonded")
        })
        .collect();
    bonds.sort_unstable();
    Ring { atoms, bonds }
}

/// Every simple cycle in a ring component, or `None` if the search budget
/// is exhausted.
fn enumerate_cycles(
    comp: &[usize],
    adj: &[Vec<(usize, usize)>],
    in_ring: &[bool],
) -> Option<Vec<Ring>> {
    let mut cycles = Vec::new();
    let mut steps = 0usize;
    let n = adj.len();
    let mut on_path = vec![false; n];
    for &start in comp {
        let mut path = vec![start];
        on_path[start] = true;
        // stack of adjacency cursors parallel to `path`
        let mut cursor = vec![0usize];
        while let Some(&u) = path.last() {
            steps += 1;
            if steps > CYCLE_SEARCH_BUDGET {
                return None;
            }
            let c = cursor.last_mut().unwrap();
            if *c < adj[u].len() {
                let (v, b) = adj[u][*c];
                *c += 1;
                if !in_ring[b] || v < start {
                    continue;
                }
                if v == start {
                    if path.len() >= 3 && path[1] < path[path.len() - 1] {
                        cycles.push(make_ring(path.clone(), adj));
                    }
                    continue;
                }
                if on_path[v] {
                    continue;
                }
                on_path[v] = true;
                path.push(v);
                cursor.push(0);
            } else {
                on_path[u] = false;
                path.pop();
                cursor.pop();
            }
        }
    }
    Some(cycles)
}

/// For each ring bond, the shortest cycle through it. Always contains a
/// minimum cycle basis.
fn shortest_cycle_candidates(
    comp: &[usize],
    bonds: &[Bond],
    adj: &[Vec<(usize, usize)>],
    in_ring: &[bool],
) -> Vec<Ring> {
    let mut out: Vec<Ring> = Vec::new();
    for (bi, bond) in bonds.iter().enumerate() {
        if !in_ring[bi] || comp.binary_search(&bond.a).is_err() {
            continue;
        }
        // BFS from bond.a to bond.b avoiding bond bi
        let mut prev = vec![usize::MAX; adj.len()];
        prev[bond.a] = bond.a;
        let mut queue = std::collections::VecDeque::from([bond.a]);
        while let Some(u) = queue.pop_front() {
            if u == bond.b {
                break;
            }
            for &(v, b) in &adj[u] {
                if b == bi || !in_ring[b] || prev[v] != usize::MAX {
                    continue;
                }
                prev[v] = u;
                queue.push_back(v);
            }
        }
        if prev[bond.b] == usize::MAX {
            continue;
        }
        let mut atoms = vec![bond.b];
        let mut cur = bond.b;
        while cur != bond.a {
            cur = prev[cur];
            atoms.push(cur);
        }
        let ring = make_ring(atoms, adj);
        if !out.iter().any(|r| r.bonds == ring.bonds) {
            out.push(ring);
        }
    }
    out
}

/// Bit vector over bond indices.
#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn from_bonds(bonds: &[usize], nbonds: usize) -> BitRow {
        let mut v = vec![0u64; nbonds.div_ceil(64).max(1)];
        for &b in bonds {
            v[b / 64] |= 1 << (b % 64);
        }
        BitRow(v)
    }

    fn test(&self, bit: usize) -> bool {
        self.0[bit / 64] >> (bit % 64) & 1 == 1
    }

    fn xor(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= *b;
        }
    }

    fn lowest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

#[derive(Default, Clone)]
struct XorBasis {
    rows: Vec<(usize, BitRow)>,
}

impl XorBasis {
    fn reduce(&self, mut v: BitRow) -> BitRow {
        for (pivot, row) in &self.rows {
            if v.test(*pivot) {
                v.xor(row);
            }
        }
        v
    }

    fn independent(&self, v: &BitRow) -> bool {
        self.reduce(v.clone()).lowest().is_some()
    }

    fn insert(&mut self, v: BitRow) -> bool {
        let r = self.reduce(v);
        match r.lowest() {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

/// Returns the relevant cycles of a component and the indices (into that
/// list) of a smallest set of smallest rings.
fn select_cycles(mut cycles: Vec<Ring>, nbonds: usize, rank: usize) -> (Vec<Ring>, Vec<usize>) {
    cycles.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| sorted(&a.atoms).cmp(&sorted(&b.atoms)))
    });
    let rows: Vec<BitRow> = cycles
        .iter()
        .map(|c| BitRow::from_bonds(&c.bonds, nbonds))
        .collect();
    let mut shorter = XorBasis::default();
    let mut relevant = Vec::new();
    let mut relevant_rows = Vec::new();
    let mut i = 0;
    while i < cycles.len() {
        let len = cycles[i].len();
        let mut j = i;
        while j < cycles.len() && cycles[j].len() == len {
            j += 1;
        }
        for k in i..j {
            if shorter.independent(&rows[k]) {
                relevant.push(cycles[k].clone());
                relevant_rows.push(rows[k].clone());
            }
        }
        for row in rows.iter().take(j).skip(i) {
            shorter.insert(row.clone());
        }
        i = j;
    }
    let mut basis = XorBasis::default();
    let mut sssr = Vec::new();
    for (k, row) in relevant_rows.into_iter().enumerate() {
        if sssr.len() == rank {
            break;
        }
        if basis.insert(row) {
            sssr.push(k);
        }
    }
    (relevant, sssr)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

#[cfg(test)]
mod tests {
    use crate::molgraph::parse_smiles;

    #[test]
    fn naphthalene_has_two_relevant_rings() {
        let m = parse_smiles("c1ccc2ccccc2c1").unwrap();
        let r = m.rings();
        assert_eq!(r.relevant_cycles().len(), 2);
        assert!(r.relevant_cycles().iter().all(|c| c.len() == 6));
        assert_eq!(r.fused_systems().len(), 1);
    }

    #[test]
    fn spiro_rings_are_separate_systems() {
        let m = parse_smiles("C1CCC2(C1)CCC2").unwrap();
        assert_eq!(m.rings().relevant_cycles().len(), 2);
        assert_eq!(m.rings().fused_systems().len(), 2);
    }

    #[test]
    fn bicyclobutane_relevant_cycles() {
        // two triangles sharing an edge; the 4-cycle is a sum of them
        let m = parse_smiles("C1C2C1C2").unwrap();
        let lens: Vec<usize> = m.rings().relevant_cycles().iter().map(|c| c.len()).collect();
        assert_eq!(lens, vec![3, 3]);
    }

    #[test]
    fn cubane_sssr_has_five_rings() {
        let m = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        assert_eq!(m.rings().sssr().len(), 5);
        assert_eq!(m.rings().relevant_cycles().len(), 6);
    }

    #[test]
    fn bridges_are_not_ring_bonds() {
        let m = parse_smiles("C1CC1CC1CC1").unwrap();
        let ring_bonds = (0..m.bond_count()).filter(|&b| m.rings().bond_in_ring(b)).count();
        assert_eq!(ring_bonds, 6);
        assert_eq!(m.rings().min_ring_size(2), 3);
        assert_eq!(m.rings().min_ring_size(3), 0);
    }
}
