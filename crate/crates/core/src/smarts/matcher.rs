use super::{AtomPrim, BondPrim, Expr, Pattern, PatternBond};
use crate::molgraph::{BondOrder, Molecule};
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

/// Per-molecule data shared by every query against it: ring statistics,
/// valences and memoized recursive-pattern results.
pub struct MatchContext<'m> {
    mol: &'m Molecule,
    ring_count: Vec<u8>,
    smallest_ring: Vec<u8>,
    ring_bonds: Vec<u8>,
    valence: Vec<u8>,
    recursive: RefCell<HashMap<usize, Vec<bool>>>,
}

impl<'m> MatchContext<'m> {
    pub fn new(mol: &'m Molecule) -> Self {
        let n = mol.atom_count();
        let mut ring_count = vec![0u8; n];
        let mut smallest_ring = vec![0u8; n];
        for ring in mol.rings() {
            let size = ring.len().min(255) as u8;
            for &a in ring {
                ring_count[a] = ring_count[a].saturating_add(1);
                if smallest_ring[a] == 0 || size < smallest_ring[a] {
                    smallest_ring[a] = size;
                }
            }
        }
        let ring_bonds = (0..n)
            .map(|i| mol.neighbors(i).iter().filter(|&&(_, b)| mol.bond(b).in_ring).count() as u8)
            .collect();
        let valence = (0..n).map(|i| crate::molgraph::total_valence(mol, i)).collect();
        MatchContext { mol, ring_count, smallest_ring, ring_bonds, valence, recursive: RefCell::new(HashMap::new()) }
    }

    pub fn molecule(&self) -> &'m Molecule {
        self.mol
    }

    fn atom_matches(&self, expr: &Expr<AtomPrim>, i: usize) -> bool {
        let atom = self.mol.atom(i);
        expr.eval(&mut |p| match p {
            AtomPrim::True => true,
            AtomPrim::Aromatic => atom.aromatic,
            AtomPrim::Aliphatic => !atom.aromatic,
            AtomPrim::Element { z, aromatic } => atom.element.atomic_number() == *z && atom.aromatic == *aromatic,
            AtomPrim::AtomicNumber(z) => atom.element.atomic_number() == *z,
            AtomPrim::TotalH(h) => atom.hydrogens == *h,
            AtomPrim::Degree(d) => self.mol.degree(i) == *d as usize,
            AtomPrim::Connectivity(x) => self.mol.degree(i) + atom.hydrogens as usize == *x as usize,
            AtomPrim::Valence(v) => self.valence[i] == *v,
            AtomPrim::RingCount(None) => atom.in_ring,
            AtomPrim::RingCount(Some(n)) => self.ring_count[i] == *n,
            AtomPrim::RingSize(None) => atom.in_ring,
            AtomPrim::RingSize(Some(n)) => self.smallest_ring[i] == *n,
            AtomPrim::RingBonds(None) => self.ring_bonds[i] > 0,
            AtomPrim::RingBonds(Some(n)) => self.ring_bonds[i] == *n,
            AtomPrim::Charge(c) => atom.formal_charge == *c,
            // isotopes are never represented in parsed molecules
            AtomPrim::Isotope => false,
            AtomPrim::Recursive(sub) => self.recursive_hits(sub)[i],
        })
    }

    fn recursive_hits(&self, sub: &Pattern) -> Vec<bool> {
        if let Some(hits) = self.recursive.borrow().get(&sub.id) {
            return hits.clone();
        }
        let hits: Vec<bool> = (0..self.mol.atom_count()).map(|i| sub.matches_at_ctx(self, i)).collect();
        self.recursive.borrow_mut().insert(sub.id, hits.clone());
        hits
    }

    fn bond_matches(&self, pb: &PatternBond, bond: usize) -> bool {
        let b = self.mol.bond(bond);
        match &pb.expr {
            None => matches!(b.order, BondOrder::Single | BondOrder::Aromatic),
            Some(expr) => expr.eval(&mut |p| match p {
                BondPrim::Single => b.order == BondOrder::Single,
                BondPrim::Double => b.order == BondOrder::Double,
                BondPrim::Triple => b.order == BondOrder::Triple,
                BondPrim::Aromatic => b.order == BondOrder::Aromatic,
                BondPrim::Any => true,
                BondPrim::Ring => b.in_ring,
            }),
        }
    }
}

/// Visiting plan: pattern atoms in DFS order from atom 0; each step either
/// extends from an already-mapped parent or starts a new component.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    order: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    /// Bonds from each step back to earlier steps, excluding the parent bond.
    closures: Vec<Vec<(usize, usize)>>,
}

impl Plan {
    pub(crate) fn new(adjacency: &[Vec<(usize, usize)>]) -> Plan {
        let n = adjacency.len();
        let mut position = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut parent = Vec::with_capacity(n);
        for root in 0..n {
            if position[root] != usize::MAX {
                continue;
            }
            let mut stack = vec![(root, None)];
            while let Some((u, via)) = stack.pop() {
                if position[u] != usize::MAX {
                    continue;
                }
                position[u] = order.len();
                order.push(u);
                parent.push(via);
                for &(v, b) in adjacency[u].iter().rev() {
                    if position[v] == usize::MAX {
                        stack.push((v, Some((u, b))));
                    }
                }
            }
        }
        let closures = order
            .iter()
            .enumerate()
            .map(|(k, &u)| {
                let parent_bond = parent[k].map(|(_, b)| b);
                adjacency[u]
                    .iter()
                    .filter(|&&(v, b)| position[v] < k && Some(b) != parent_bond)
                    .map(|&(v, b)| (v, b))
                    .collect()
            })
            .collect();
        Plan { order, parent, closures }
    }
}

impl Pattern {
    /// Runs the search; `visit` returns false to stop early.
    fn search(&self, ctx: &MatchContext, anchor: Option<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let plan = &self.plan;
        let n = self.atoms.len();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; ctx.mol.atom_count()];
        let mut state = Search { pattern: self, ctx, plan, anchor, map: &mut map, used: &mut used, visit };
        state.extend(0);
    }

    pub(crate) fn matches_at_ctx(&self, ctx: &MatchContext, atom: usize) -> bool {
        let mut found = false;
        self.search(ctx, Some(atom), &mut |_| {
            found = true;
            false
        });
        found
    }

    /// True if the pattern matches with pattern atom 0 on `atom`.
    pub fn matches_at(&self, ctx: &MatchContext, atom: usize) -> bool {
        self.matches_at_ctx(ctx, atom)
    }

    pub fn has_match(&self, ctx: &MatchContext) -> bool {
        let mut found = false;
        self.search(ctx, None, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Matches as molecule atom lists indexed by pattern atom, deduplicated
    /// by the set of molecule atoms covered.
    pub fn unique_matches(&self, ctx: &MatchContext) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.search(ctx, None, &mut |m| {
            let mut key = m.to_vec();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(m.to_vec());
            }
            true
        });
        out
    }

    pub fn count_unique(&self, ctx: &MatchContext) -> usize {
        self.unique_matches(ctx).len()
    }

    pub fn matches(&self, mol: &Molecule) -> bool {
        self.has_match(&MatchContext::new(mol))
    }
}

struct Search<'a, 'c, 'm> {
    pattern: &'a Pattern,
    ctx: &'c MatchContext<'m>,
    plan: &'a Plan,
    anchor: Option<usize>,
    map: &'a mut Vec<usize>,
    used: &'a mut Vec<bool>,
    visit: &'a mut dyn FnMut(&[usize]) -> bool,
}

impl Search<'_, '_, '_> {
    /// Returns false once the visitor asked to stop.
    fn extend(&mut self, k: usize) -> bool {
        if k == self.plan.order.len() {
            return (self.visit)(self.map);
        }
        let p = self.plan.order[k];
        let candidates: Vec<usize> = match self.plan.parent[k] {
            Some((q, pb)) => self
                .ctx
                .mol
                .neighbors(self.map[q])
                .iter()
                .filter(|&&(_, b)| self.ctx.bond_matches(&self.pattern.bonds[pb], b))
                .map(|&(m, _)| m)
                .collect(),
            None => match self.anchor {
                Some(a) if k == 0 => vec![a],
                _ => (0..self.ctx.mol.atom_count()).collect(),
            },
        };
        for m in candidates {
            if self.used[m] || !self.ctx.atom_matches(&self.pattern.atoms[p], m) {
                continue;
            }
            let closes = self.plan.closures[k].iter().all(|&(q, pb)| {
                self.ctx
                    .mol
                    .bond_between(m, self.map[q])
                    .is_some_and(|b| self.ctx.bond_matches(&self.pattern.bonds[pb], b))
            });
            if !closes {
                continue;
            }
            self.map[p] = m;
            self.used[m] = true;
            let keep_going = self.extend(k + 1);
            self.used[m] = false;
            self.map[p] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn count(smarts: &str, smiles: &str) -> usize {
        let mol = parse_smiles(smiles).unwrap();
        Pattern::parse(smarts).unwrap().count_unique(&MatchContext::new(&mol))
    }

    #[test]
    fn element_and_aromatic_distinctions() {
        assert_eq!(count("C", "Cc1ccccc1"), 1);
        assert_eq!(count("c", "Cc1ccccc1"), 6);
        assert_eq!(count("[#6]", "Cc1ccccc1"), 7);
        assert_eq!(count("a", "c1ccncc1"), 6);
        assert_eq!(count("[n]", "c1ccncc1"), 1);
    }

    #[test]
    fn hydrogen_degree_and_valence() {
        assert_eq!(count("[CH3]", "CC(C)O"), 2);
        assert_eq!(count("[OH]", "CC(C)O"), 1);
        assert_eq!(count("[CD3]", "CC(C)O"), 1);
        assert_eq!(count("[CX4]", "CC(C)O"), 3);
        assert_eq!(count("[cv4]", "c1ccccc1"), 6);
        assert_eq!(count("[SX4v6]", "CS(=O)(=O)C"), 1);
    }

    #[test]
    fn ring_primitives() {
        assert_eq!(count("[R2]", "c1ccc2ccccc2c1"), 2);
        assert_eq!(count("[R]", "CC1CC1"), 3);
        assert_eq!(count("[R0]", "CC1CC1"), 1);
        assert_eq!(count("[r3]", "C1CC1CC1CCCC1"), 3);
        assert_eq!(count("[x3]", "c1ccc2ccccc2c1"), 2);
        assert_eq!(count("C@C", "CC1CC1"), 3);
        assert_eq!(count("C!@C", "CC1CC1"), 1);
    }

    #[test]
    fn bond_defaults_and_charges() {
        assert_eq!(count("CC", "C=CC"), 1);
        assert_eq!(count("C=C", "C=CC"), 1);
        assert_eq!(count("C~C", "C=CC"), 2);
        assert_eq!(count("cc", "c1ccccc1"), 6);
        assert_eq!(count("[N+](=O)[O-]", "C[N+](=O)[O-]"), 1);
        assert_eq!(count("[O-]", "C[N+](=O)[O-]"), 1);
        assert_eq!(count("[O;-0]", "C[N+](=O)[O-]"), 1);
    }

    #[test]
    fn recursive_and_anchored() {
        let mol = parse_smiles("CC(=O)OCC(=O)N").unwrap();
        let ctx = MatchContext::new(&mol);
        let p = Pattern::parse("[$(C=O);!$(C(=O)N)]").unwrap();
        assert_eq!(p.count_unique(&ctx), 1);
        let q = Pattern::parse("[O;!H0]C=O").unwrap();
        assert!(!q.has_match(&ctx));
        let r = Pattern::parse("[CH3]C").unwrap();
        assert!(r.matches_at(&ctx, 0));
        assert!(!r.matches_at(&ctx, 1));
    }

    #[test]
    fn ring_closure_patterns_and_components() {
        assert_eq!(count("c1ccccc1", "c1ccc2ccccc2c1"), 2);
        assert_eq!(count("C1CC1", "C1CC1"), 1);
        assert_eq!(count("F.F", "FC(F)F"), 3);
        assert_eq!(count("F.F.F.F", "FC(F)F"), 0);
    }

    #[test]
    fn isotopes_never_match() {
        assert_eq!(count("[13C]", "CCC"), 0);
    }
}
