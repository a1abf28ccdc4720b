//! Periodic-table data used by the valence model and aromaticity perception.

const SYMBOLS: [&str; 119] = [
    "*", "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
    "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
    "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
    "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

pub const CARBON: u8 = 6;
pub const NITROGEN: u8 = 7;
pub const OXYGEN: u8 = 8;
pub const FLUORINE: u8 = 9;
pub const SULFUR: u8 = 16;

/// Element symbol for an atomic number; `*` for 0.
pub fn symbol(z: u8) -> &'static str {
    SYMBOLS.get(z as usize).copied().unwrap_or("?")
}

/// Atomic number of a capitalized element symbol.
pub fn atomic_number(sym: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|s| *s == sym)
        .filter(|&z| z > 0)
        .map(|z| z as u8)
}

/// Elements that may be written outside brackets.
pub fn is_organic_subset(z: u8) -> bool {
    matches!(z, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
}

/// Elements with a lowercase (aromatic) spelling.
pub fn has_aromatic_form(z: u8) -> bool {
    matches!(z, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
}

/// Allowed valences of a neutral element, smallest first. Empty means the
/// element has no valence model and hydrogen counts are taken as written.
fn neutral_valences(z: u8) -> &'static [u8] {
    match z {
        1 => &[1],
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
        52 => &[2, 4, 6],
        53 => &[1, 3, 5],
        _ => &[],
    }
}

/// Allowed valences for an element carrying a formal charge. Charged main
/// group atoms take the valences of their isoelectronic neighbour
/// (N+ behaves like C, O- like F, C- like N, ...).
pub fn valences(z: u8, charge: i8) -> &'static [u8] {
    if charge == 0 {
        return neutral_valences(z);
    }
    if neutral_valences(z).is_empty() {
        return &[];
    }
    let shifted = z as i16 - charge as i16;
    if !(1..=118).contains(&shifted) {
        return &[];
    }
    // stay within the same period so Na+ does not inherit neon's valence
    if period(z) != period(shifted as u8) {
        return &[];
    }
    neutral_valences(shifted as u8)
}

fn period(z: u8) -> u8 {
    match z {
        0..=2 => 1,
        3..=10 => 2,
        11..=18 => 3,
        19..=36 => 4,
        37..=54 => 5,
        55..=86 => 6,
        _ => 7,
    }
}

/// Valence electrons in the outer shell (main-group elements used by the
/// aromaticity model).
pub fn outer_electrons(z: u8) -> Option<u8> {
    match z {
        1 => Some(1),
        5 => Some(3),
        6 | 14 => Some(4),
        7 | 15 | 33 => Some(5),
        8 | 16 | 34 | 52 => Some(6),
        9 | 17 | 35 | 53 => Some(7),
        _ => None,
    }
}

/// Pauling electronegativity for the elements the aromaticity model cares
/// about.
pub fn electronegativity(z: u8) -> f32 {
    match z {
        1 => 2.20,
        5 => 2.04,
        6 => 2.55,
        7 => 3.04,
        8 => 3.44,
        9 => 3.98,
        14 => 1.90,
        15 => 2.19,
        16 => 2.58,
        17 => 3.16,
        33 => 2.18,
        34 => 2.55,
        35 => 2.96,
        52 => 2.10,
        53 => 2.66,
        _ => 1.5,
    }
}

/// Smallest allowed valence that accommodates `explicit` bond-order units.
/// Returns `None` when the explicit valence exceeds every allowed value.
pub fn fitting_valence(z: u8, charge: i8, explicit: u32) -> Option<u32> {
    valences(z, charge)
        .iter()
        .map(|&v| v as u32)
        .find(|&v| v >= explicit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_roundtrip() {
        for z in 1..=118u8 {
            assert_eq!(atomic_number(symbol(z)), Some(z));
        }
        assert_eq!(atomic_number("*"), None);
        assert_eq!(atomic_number("Xx"), None);
    }

    #[test]
    fn charged_valences_follow_isoelectronic_rule() {
        assert_eq!(valences(7, 1), &[4]);
        assert_eq!(valences(8, -1), &[1]);
        assert_eq!(valences(6, -1), &[3]);
        assert_eq!(valences(16, 0), &[2, 4, 6]);
        assert!(valences(11, 1).is_empty());
    }

    #[test]
    fn sulfur_picks_smallest_fitting_valence() {
        assert_eq!(fitting_valence(SULFUR, 0, 1), Some(2));
        assert_eq!(fitting_valence(SULFUR, 0, 3), Some(4));
        assert_eq!(fitting_valence(SULFUR, 0, 7), None);
        assert_eq!(fitting_valence(CARBON, 0, 5), None);
    }
}
