//! SMILES emission from an atom-priority permutation. The traversal starts at
//! the highest-priority atom (lowest value) and visits neighbours in priority
//! order; the last unvisited neighbour continues the main chain.

use super::canon::canonical_ranks;
use super::valence::implied_hydrogens;
use super::{parse_smiles, BondOrder, Element, MolError, Molecule};
use rand::seq::SliceRandom;
use rand::Rng;

/// Cap applied to randomized SMILES during dataset preparation.
pub const DEFAULT_MAX_RANDOMIZED_LEN: usize = 215;

/// Writes a connected molecule. `priority[i]` is the visiting priority of
/// atom `i`; it must be a permutation of `0..n`.
pub fn write_smiles(mol: &Molecule, priority: &[usize]) -> Result<String, MolError> {
    let n = mol.atom_count();
    if priority.len() != n {
        return Err(MolError::InvalidOrder(format!("expected {n} priorities, got {}", priority.len())));
    }
    let mut seen = vec![false; n];
    for &p in priority {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(MolError::InvalidOrder(format!("{p} is out of range or repeated")));
        }
    }
    if !mol.is_connected() {
        return Err(MolError::Disconnected);
    }
    if n == 0 {
        return Ok(String::new());
    }
    Ok(Writer::new(mol, priority).write())
}

/// Canonical SMILES; components are written separately, sorted and joined by `.`.
pub fn canonical_smiles(mol: &Molecule) -> String {
    let components = mol.components();
    if components.len() <= 1 {
        return write_canonical_component(mol);
    }
    let mut parts: Vec<String> = components
        .iter()
        .map(|c| write_canonical_component(&mol.subgraph(c)))
        .collect();
    parts.sort();
    parts.join(".")
}

fn write_canonical_component(mol: &Molecule) -> String {
    let ranks = canonical_ranks(mol).ranks;
    Writer::new(mol, &ranks).write()
}

pub fn canonicalize(text: &str) -> Result<String, MolError> {
    parse_smiles(text).map(|m| canonical_smiles(&m))
}

/// A SMILES of the same molecule from a random traversal: start atom and
/// branch order follow a random priority permutation.
pub fn randomize_smiles<R: Rng + ?Sized>(mol: &Molecule, rng: &mut R) -> String {
    let mut components = mol.components();
    components.shuffle(rng);
    let parts: Vec<String> = components
        .iter()
        .map(|c| {
            let sub = if components.len() == 1 { mol.clone() } else { mol.subgraph(c) };
            let mut priority: Vec<usize> = (0..sub.atom_count()).collect();
            priority.shuffle(rng);
            Writer::new(&sub, &priority).write()
        })
        .collect();
    parts.join(".")
}

struct Writer<'a> {
    mol: &'a Molecule,
    priority: &'a [usize],
    children: Vec<Vec<(usize, usize)>>,
    openings: Vec<Vec<usize>>,
    closings: Vec<Vec<usize>>,
    digit_of_bond: Vec<Option<u32>>,
    digits_in_use: Vec<bool>,
    out: String,
}

impl<'a> Writer<'a> {
    fn new(mol: &'a Molecule, priority: &'a [usize]) -> Self {
        let n = mol.atom_count();
        Writer {
            mol,
            priority,
            children: vec![Vec::new(); n],
            openings: vec![Vec::new(); n],
            closings: vec![Vec::new(); n],
            digit_of_bond: vec![None; mol.bond_count()],
            digits_in_use: vec![false; 100],
            out: String::new(),
        }
    }

    fn sorted_neighbors(&self, atom: usize) -> Vec<(usize, usize)> {
        let mut nbrs = self.mol.neighbors(atom).to_vec();
        nbrs.sort_by_key(|&(v, _)| self.priority[v]);
        nbrs
    }

    fn write(mut self) -> String {
        let start = (0..self.mol.atom_count())
            .min_by_key(|&i| self.priority[i])
            .expect("nonempty molecule");
        self.plan(start);
        self.emit(start);
        self.out
    }

    /// Depth-first pass recording tree children and ring-closure bonds.
    fn plan(&mut self, start: usize) {
        let n = self.mol.atom_count();
        let mut visited = vec![false; n];
        let mut ring_seen = vec![false; self.mol.bond_count()];
        // (atom, entry bond, sorted neighbours, cursor)
        let mut stack = vec![(start, usize::MAX, self.sorted_neighbors(start), 0usize)];
        visited[start] = true;
        while let Some(top) = stack.last_mut() {
            let (u, via) = (top.0, top.1);
            let Some(&(v, b)) = top.2.get(top.3) else {
                stack.pop();
                continue;
            };
            top.3 += 1;
            if b == via {
                continue;
            }
            if visited[v] {
                if !ring_seen[b] {
                    ring_seen[b] = true;
                    self.openings[v].push(b);
                    self.closings[u].push(b);
                }
            } else {
                visited[v] = true;
                self.children[u].push((v, b));
                let nbrs = self.sorted_neighbors(v);
                stack.push((v, b, nbrs, 0));
            }
        }
    }

    fn emit(&mut self, start: usize) {
        enum Step {
            Atom(usize),
            Text(&'static str),
            Bond(usize),
        }
        let mut work = vec![Step::Atom(start)];
        while let Some(step) = work.pop() {
            match step {
                Step::Text(t) => self.out.push_str(t),
                Step::Bond(b) => {
                    let sym = bond_symbol(self.mol, b);
                    self.out.push_str(sym);
                }
                Step::Atom(u) => {
                    let text = atom_text(self.mol, u);
                    self.out.push_str(&text);
                    self.ring_digits(u);
                    let children = std::mem::take(&mut self.children[u]);
                    // pushed in reverse so the first child is emitted first
                    for (k, &(v, b)) in children.iter().enumerate().rev() {
                        let last = k + 1 == children.len();
                        if !last {
                            work.push(Step::Text(")"));
                        }
                        work.push(Step::Atom(v));
                        work.push(Step::Bond(b));
                        if !last {
                            work.push(Step::Text("("));
                        }
                    }
                }
            }
        }
    }

    fn ring_digits(&mut self, u: usize) {
        let openings = std::mem::take(&mut self.openings[u]);
        let closings = std::mem::take(&mut self.closings[u]);
        let mut opened = Vec::with_capacity(openings.len());
        for &b in &openings {
            let d = (1..100u32)
                .find(|&d| !self.digits_in_use[d as usize])
                .expect("fewer than 100 open ring bonds");
            self.digits_in_use[d as usize] = true;
            self.digit_of_bond[b] = Some(d);
            opened.push((b, d));
        }
        let mut closed: Vec<u32> = closings
            .iter()
            .map(|&b| self.digit_of_bond[b].expect("ring bond opened before closing"))
            .collect();
        closed.sort_unstable();
        for d in closed {
            push_digit(&mut self.out, d);
            self.digits_in_use[d as usize] = false;
        }
        for (b, d) in opened {
            self.out.push_str(bond_symbol(self.mol, b));
            push_digit(&mut self.out, d);
        }
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn bond_symbol(mol: &Molecule, b: usize) -> &'static str {
    let bond = mol.bond(b);
    let both_aromatic = mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic;
    match bond.order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn atom_text(mol: &Molecule, i: usize) -> String {
    let a = mol.atom(i);
    let symbol = a.element.symbol();
    let aromatic_organic = matches!(
        a.element,
        Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
    );
    let organic = a.element.is_organic_subset()
        && a.formal_charge == 0
        && (!a.aromatic || aromatic_organic)
        && implied_hydrogens(mol, i) == Some(a.hydrogens);
    let mut s = String::with_capacity(8);
    if !organic {
        s.push('[');
    }
    if a.aromatic {
        s.push_str(&symbol.to_ascii_lowercase());
    } else {
        s.push_str(symbol);
    }
    if organic {
        return s;
    }
    match a.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => {
            s.push('H');
            s.push_str(&h.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}
