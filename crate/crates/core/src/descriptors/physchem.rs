//! Atom-contribution logP and polar surface area, plus the structural counts.

use super::tables::DescriptorTables;
use super::DescriptorVector;
use crate::molgraph::{BondOrder, Element, Molecule};
use crate::smarts::MatchContext;

const H_MASS: f64 = 1.008;

pub fn descriptor_vector(mol: &Molecule, tables: &DescriptorTables) -> DescriptorVector {
    let ctx = MatchContext::new(mol);
    let mw = mol
        .atoms()
        .iter()
        .map(|a| a.element.mass() + a.hydrogens as f64 * H_MASS)
        .sum();
    let (logp, untyped_atoms) = crippen_logp(&ctx, tables);
    let hba = tables.hba.iter().map(|p| p.count_unique(&ctx) as u32).sum();
    let hbd = tables.hbd.count_unique(&ctx) as u32;
    let rotb = tables.rotatable.count_unique(&ctx) as u32;
    let alerts = tables.alerts.iter().filter(|p| p.has_match(&ctx)).count() as u32;

    // drop aliphatic ring atoms that touch a non-aromatic neighbour; the rings
    // left over are the aromatic ones
    let keep: Vec<usize> = (0..mol.atom_count())
        .filter(|&i| !tables.aliphatic_ring_attachment.matches_at(&ctx, i))
        .collect();
    let arom_rings = mol.subgraph(&keep).rings().len() as u32;

    DescriptorVector { mw, logp, hba, hbd, tpsa: tpsa(mol, tables), rotb, arom_rings, alerts, untyped_atoms }
}

/// First matching row wins for each heavy atom; hydrogens are typed by
/// their carrier and contribute once per attached H.
fn crippen_logp(ctx: &MatchContext, tables: &DescriptorTables) -> (f64, u32) {
    let mol = ctx.molecule();
    let mut logp = 0.0;
    let mut untyped = 0;
    for i in 0..mol.atom_count() {
        match tables.crippen_heavy.iter().find(|r| r.pattern.matches_at(ctx, i)) {
            Some(row) => logp += row.value,
            None => untyped += 1,
        }
        let h = mol.atom(i).hydrogens;
        if h > 0 {
            if let Some(row) = tables.crippen_h.iter().find(|r| r.pattern.matches_at(ctx, i)) {
                logp += row.value * h as f64;
            }
        }
    }
    (logp, untyped)
}

fn tpsa(mol: &Molecule, tables: &DescriptorTables) -> f64 {
    let mut total = 0.0;
    for (i, atom) in mol.atoms().iter().enumerate() {
        if atom.element != Element::N && atom.element != Element::O {
            continue;
        }
        let mut counts = [0u8; 6];
        for &(v, b) in mol.neighbors(i) {
            if !mol.atom(v).element.is_heavy() {
                counts[1] += 1;
                continue;
            }
            counts[0] += 1;
            counts[match mol.bond(b).order {
                BondOrder::Single => 2,
                BondOrder::Double => 3,
                BondOrder::Triple => 4,
                BondOrder::Aromatic => 5,
            }] += 1;
        }
        counts[1] += atom.hydrogens;
        let in_ring3 = mol.rings().iter().any(|r| r.len() == 3 && r.contains(&i));
        let z = atom.element.atomic_number();
        let row = tables.tpsa.iter().find(|r| {
            r.element == z
                && r.counts == counts
                && r.charge == atom.formal_charge
                && r.ring3.is_none_or(|flag| flag == in_ring3)
        });
        total += match row {
            Some(r) => r.value,
            None => tables
                .tpsa_fallback
                .iter()
                .find(|f| f.element == z)
                .map(|f| (f.base - f.per_neighbor * counts[0] as f64 + f.per_h * counts[1] as f64).max(0.0))
                .unwrap_or(0.0),
        };
    }
    total
}
