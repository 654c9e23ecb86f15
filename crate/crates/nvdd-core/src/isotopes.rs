//! Gyromagnetic ratios of common spin-1/2 (and low-spin) nuclei.
//!
//! Values are CODATA/IAEA tabulations in rad/s per tesla. Negative values
//! mean the magnetic moment is antiparallel to the spin.

/// One nuclear species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isotope {
    /// Conventional symbol, e.g. "1H".
    pub symbol: &'static str,
    /// Gyromagnetic ratio (rad/s/T).
    pub gamma: f64,
}

/// Nuclei with tabulated gyromagnetic ratios.
pub const ISOTOPES: &[Isotope] = &[
    Isotope {
        symbol: "1H",
        gamma: 26.7522128e7,
    },
    Isotope {
        symbol: "13C",
        gamma: 6.728284e7,
    },
    Isotope {
        symbol: "14N",
        gamma: 1.9337792e7,
    },
    Isotope {
        symbol: "15N",
        gamma: -2.71261804e7,
    },
    Isotope {
        symbol: "29Si",
        gamma: -5.3190e7,
    },
    Isotope {
        symbol: "31P",
        gamma: 10.8394e7,
    },
];

/// Look up a nucleus by symbol, accepting either mass-first ("13C") or
/// letter-first ("C13") spellings, case-insensitively.
pub fn isotope_of(symbol: &str) -> Option<&'static Isotope> {
    let direct = ISOTOPES
        .iter()
        .find(|i| i.symbol.eq_ignore_ascii_case(symbol));
    if direct.is_some() {
        return direct;
    }
    // "C13" -> "13C": move the leading letters behind the digits
    let letters: String = symbol.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let digits = &symbol[letters.len()..];
    if letters.is_empty() || digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let swapped = format!("{digits}{letters}");
    ISOTOPES
        .iter()
        .find(|i| i.symbol.eq_ignore_ascii_case(&swapped))
}

/// Look up a gyromagnetic ratio by symbol ("1H", "13C", ...).
pub fn gamma_of(symbol: &str) -> Option<f64> {
    isotope_of(symbol).map(|i| i.gamma)
}
