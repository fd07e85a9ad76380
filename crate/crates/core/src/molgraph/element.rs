//! Element table: symbols, average atomic masses and the default valence model.

use std::fmt;

const SYMBOLS: [&str; 93] = [
    "*", "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
    "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
    "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",
];

const MASSES: [f64; 93] = [
    0.0, 1.008, 4.003, 6.941, 9.012, 10.812, 12.011, 14.007, 15.999, 18.998, 20.180, 22.990,
    24.305, 26.982, 28.086, 30.974, 32.067, 35.453, 39.948, 39.098, 40.078, 44.956, 47.867,
    50.942, 51.996, 54.938, 55.845, 58.933, 58.693, 63.546, 65.39, 69.723, 72.61, 74.922, 78.96,
    79.904, 83.80, 85.468, 87.62, 88.906, 91.224, 92.906, 95.94, 98.0, 101.07, 102.906, 106.42,
    107.868, 112.411, 114.818, 118.71, 121.76, 127.6, 126.904, 131.29, 132.905, 137.327,
    138.906, 140.116, 140.908, 144.24, 145.0, 150.36, 151.964, 157.25, 158.925, 162.5, 164.93,
    167.26, 168.934, 173.04, 174.967, 178.49, 180.948, 183.84, 186.207, 190.23, 192.217,
    195.078, 196.967, 200.59, 204.383, 207.2, 208.98, 209.0, 210.0, 222.0, 223.0, 226.0, 227.0,
    232.038, 231.036, 238.029,
];

/// A chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        (1..SYMBOLS.len() as u8).contains(&z).then_some(Element(z))
    }

    /// Looks up a symbol with standard capitalisation ("Cl", not "cl").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .skip(1)
            .position(|s| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize]
    }

    pub fn mass(self) -> f64 {
        MASSES[self.0 as usize]
    }

    /// Members of the unbracketed SMILES organic subset.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may be written in lowercase (aromatic) form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }

    pub fn is_heavy(self) -> bool {
        self.0 > 1
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

fn default_valences_for(z: i32) -> Option<&'static [u8]> {
    Some(match z {
        1 => &[1],
        4 => &[2],
        5 => &[3],
        6 => &[4],
        7 => &[3],
        8 => &[2],
        9 => &[1],
        14 => &[4],
        15 => &[3, 5],
        16 => &[2, 4, 6],
        17 => &[1],
        33 => &[3, 5],
        34 => &[2, 4, 6],
        35 => &[1],
        53 => &[1, 3, 5],
        _ => return None,
    })
}

/// Allowed valences for an element carrying a formal charge.
///
/// Charged atoms take the valence list of their isoelectronic neutral
/// neighbour (N+ behaves like C, O- like F). `None` means the valence of
/// this element/charge is not checked.
pub fn allowed_valences(element: Element, charge: i8) -> Option<&'static [u8]> {
    let z = element.0 as i32;
    if charge == 0 {
        return default_valences_for(z);
    }
    match z {
        5 | 6 => default_valences_for(z - charge as i32).filter(|_| z - charge as i32 >= 5),
        7 | 8 | 15 | 16 | 33 | 34 | 9 | 17 | 35 | 53 => default_valences_for(z - charge as i32),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for z in 1..=92u8 {
            let e = Element::from_atomic_number(z).unwrap();
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("Xx"), None);
        assert_eq!(Element::from_symbol("cl"), None);
    }

    #[test]
    fn charged_valences_follow_isoelectronic_neighbour() {
        assert_eq!(allowed_valences(Element::N, 1), Some(&[4u8][..]));
        assert_eq!(allowed_valences(Element::O, -1), Some(&[1u8][..]));
        assert_eq!(allowed_valences(Element::C, -1), Some(&[3u8][..]));
        assert_eq!(allowed_valences(Element::B, -1), Some(&[4u8][..]));
        assert_eq!(allowed_valences(Element::C, 1), Some(&[3u8][..]));
        assert_eq!(allowed_valences(Element::from_symbol("Na").unwrap(), 1), None);
    }
}
