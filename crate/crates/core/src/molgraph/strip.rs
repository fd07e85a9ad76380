use super::{canonical_smiles, parse_smiles, write_smiles, MolError};

/// Removes stereo marks and keeps the component with the most heavy atoms
/// (ties go to the lexicographically smallest canonical form). The kept
/// component is written in input atom order, so already-clean input passes
/// through unchanged.
pub fn strip_stereo_and_components(text: &str) -> Result<String, MolError> {
    let cleaned = remove_stereo(text);
    if cleaned.split('.').all(str::is_empty) {
        return Err(MolError::EmptyAfterStrip);
    }
    let mol = parse_smiles(&cleaned)?;
    let components = mol.components();
    let best = if components.len() == 1 {
        mol
    } else {
        components
            .iter()
            .map(|c| {
                let sub = mol.subgraph(c);
                let canon = canonical_smiles(&sub);
                (sub, canon)
            })
            .min_by(|(a, ca), (b, cb)| b.heavy_atom_count().cmp(&a.heavy_atom_count()).then_with(|| ca.cmp(cb)))
            .map(|(sub, _)| sub)
            .ok_or(MolError::EmptyAfterStrip)?
    };
    if best.heavy_atom_count() == 0 {
        return Err(MolError::EmptyAfterStrip);
    }
    let identity: Vec<usize> = (0..best.atom_count()).collect();
    write_smiles(&best, &identity)
}

/// Drops `/`, `\` and bracket chirality (`@`, `@@`, `@TH1`, `@SP2`, ...).
fn remove_stereo(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_bracket = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        i += 1;
        match c {
            '/' | '\\' => {}
            '@' if in_bracket => {
                if chars.get(i) == Some(&'@') {
                    i += 1;
                }
                let class: String = chars[i..].iter().take(2).collect();
                let has_digit = chars.get(i + 2).is_some_and(char::is_ascii_digit);
                if has_digit && matches!(class.as_str(), "TH" | "AL" | "SP" | "TB" | "OH") {
                    i += 2;
                    while chars.get(i).is_some_and(char::is_ascii_digit) {
                        i += 1;
                    }
                }
            }
            _ => {
                in_bracket = match c {
                    '[' => true,
                    ']' => false,
                    _ => in_bracket,
                };
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_double_bond_stereo() {
        assert_eq!(strip_stereo_and_components("C/C=C\\C").unwrap(), "CC=CC");
    }

    #[test]
    fn keeps_largest_component() {
        assert_eq!(strip_stereo_and_components("CC(=O)O.[Na+]").unwrap(), "CC(=O)O");
        assert_eq!(strip_stereo_and_components("[Na+].CC(=O)[O-]").unwrap(), "CC(=O)[O-]");
    }

    #[test]
    fn removes_tetrahedral_marks() {
        assert_eq!(strip_stereo_and_components("C[C@H](N)C(=O)O").unwrap(), "CC(N)C(=O)O");
        assert_eq!(strip_stereo_and_components("C[C@@H](N)C(=O)O").unwrap(), "CC(N)C(=O)O");
        assert_eq!(strip_stereo_and_components("F[C@TH1](Cl)(Br)I").unwrap(), "FC(Cl)(Br)I");
        assert_eq!(strip_stereo_and_components("N[C@@]1(C)CCCC1").unwrap(), "NC1(C)CCCC1");
    }

    #[test]
    fn tie_goes_to_smallest_canonical_form() {
        let a = strip_stereo_and_components("CCO.CCN").unwrap();
        let b = strip_stereo_and_components("CCN.CCO").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, "CCN");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(strip_stereo_and_components("/"), Err(MolError::EmptyAfterStrip));
        assert_eq!(strip_stereo_and_components("[H+]"), Err(MolError::EmptyAfterStrip));
    }

    #[test]
    fn idempotent_on_examples() {
        for s in ["C/C=C\\C", "C[C@H](N)C(=O)O.Cl", "OC(=O)c1ccccc1O", "C1CC[C@@H]2CCCC[C@H]2C1"] {
            let once = strip_stereo_and_components(s).unwrap();
            assert_eq!(strip_stereo_and_components(&once).unwrap(), once);
        }
    }
}
