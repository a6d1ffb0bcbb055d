use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DataError;

const SYMBOLS: [&str; 10] = ["H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"];

/// A chemical element in the supported range H–Ne.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

impl Element {
    pub const MAX_Z: u8 = 10;

    pub fn from_atomic_number(z: u8) -> Result<Self, DataError> {
        if (1..=Self::MAX_Z).contains(&z) {
            Ok(Self(z))
        } else {
            Err(DataError::UnsupportedElement(format!("Z={z}")))
        }
    }

    /// Case-sensitive lookup of a standard symbol ("He", not "HE").
    pub fn from_symbol(symbol: &str) -> Result<Self, DataError> {
        SYMBOLS
            .iter()
            .position(|s| *s == symbol)
            .map(|i| Self(i as u8 + 1))
            .ok_or_else(|| DataError::UnknownElement(symbol.to_string()))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize - 1]
    }

    /// Electrons outside the closed inner shell.
    pub fn valence_electrons(self) -> usize {
        match self.0 {
            1 | 2 => self.0 as usize,
            z => z as usize - 2,
        }
    }

    /// Valence atomic orbitals in a minimal basis: 1s for H/He, 2s+2p otherwise.
    pub fn valence_orbitals(self) -> usize {
        if self.0 <= 2 {
            1
        } else {
            4
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Element::from_symbol(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for z in 1..=10 {
            let e = Element::from_atomic_number(z).unwrap();
            assert_eq!(Element::from_symbol(e.symbol()).unwrap(), e);
        }
        assert!(Element::from_symbol("Xx").is_err());
        assert!(Element::from_atomic_number(11).is_err());
    }

    #[test]
    fn valence_table() {
        let counts: Vec<_> = (1..=10)
            .map(|z| Element::from_atomic_number(z).unwrap().valence_electrons())
            .collect();
        assert_eq!(counts, vec![1, 2, 1, 2, 3, 4, 5, 6, 7, 8]);
    }
}
