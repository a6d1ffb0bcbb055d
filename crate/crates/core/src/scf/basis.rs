use serde::{Deserialize, Serialize};

use super::ScfError;
use crate::data::{DataError, Structure};

/// One contracted shell of Cartesian Gaussians centred on an atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub atom: usize,
    /// Angular momentum: 0 for s, 1 for p.
    pub l: u8,
    /// Primitive exponents in Bohr⁻².
    pub exponents: Vec<f64>,
    /// Contraction coefficients for normalized primitives.
    pub coefficients: Vec<f64>,
}

impl Shell {
    pub fn n_functions(&self) -> usize {
        match self.l {
            0 => 1,
            l => (l as usize + 1) * (l as usize + 2) / 2,
        }
    }

    /// Cartesian exponent triples in AO order; p shells are (x, y, z).
    pub fn cartesian_powers(&self) -> Vec<[u8; 3]> {
        let l = self.l;
        let mut out = Vec::new();
        for lx in (0..=l).rev() {
            for ly in (0..=l - lx).rev() {
                out.push([lx, ly, l - lx - ly]);
            }
        }
        out
    }
}

/// Basis functions assigned to every atom of a structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisSetRaw")]
pub struct BasisSet {
    name: String,
    structure: Structure,
    shells: Vec<Shell>,
}

#[derive(Deserialize)]
struct BasisSetRaw {
    name: String,
    structure: Structure,
    shells: Vec<Shell>,
}

impl TryFrom<BasisSetRaw> for BasisSet {
    type Error = DataError;

    fn try_from(raw: BasisSetRaw) -> Result<Self, DataError> {
        for (i, shell) in raw.shells.iter().enumerate() {
            if shell.exponents.len() != shell.coefficients.len() || shell.exponents.is_empty() {
                return Err(DataError::Invariant(format!("shell {i}: contraction length mismatch")));
            }
            if shell.exponents.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                return Err(DataError::Invariant(format!("shell {i}: exponents must be positive")));
            }
            if shell.atom >= raw.structure.len() {
                return Err(DataError::Invariant(format!("shell {i}: atom index out of range")));
            }
            if shell.l > 1 {
                return Err(DataError::Invariant(format!("shell {i}: only s and p shells are supported")));
            }
        }
        Ok(BasisSet { name: raw.name, structure: raw.structure, shells: raw.shells })
    }
}

impl BasisSet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn n_ao(&self) -> usize {
        self.shells.iter().map(Shell::n_functions).sum()
    }

    /// Index of the atom that owns each AO.
    pub fn ao_atoms(&self) -> Vec<usize> {
        self.shells
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.atom, s.n_functions()))
            .collect()
    }
}

/// Assigns shells from a built-in basis to every atom of `structure`.
pub fn build_basis(structure: &Structure, name: &str) -> Result<BasisSet, ScfError> {
    if !name.eq_ignore_ascii_case("sto-3g") {
        return Err(ScfError::UnsupportedBasis(name.to_string()));
    }
    let mut shells = Vec::new();
    for (atom, element) in structure.atoms().iter().enumerate() {
        let z = element.atomic_number();
        let (core, valence) = STO3G_EXPONENTS
            .get(z as usize - 1)
            .ok_or_else(|| ScfError::UnsupportedElement(element.symbol().to_string()))?;
        shells.push(Shell {
            atom,
            l: 0,
            exponents: core.to_vec(),
            coefficients: STO3G_1S.to_vec(),
        });
        if let Some(sp) = valence {
            shells.push(Shell { atom, l: 0, exponents: sp.to_vec(), coefficients: STO3G_2S.to_vec() });
            shells.push(Shell { atom, l: 1, exponents: sp.to_vec(), coefficients: STO3G_2P.to_vec() });
        }
    }
    Ok(BasisSet { name: "sto-3g".into(), structure: structure.clone(), shells })
}

const STO3G_1S: [f64; 3] = [0.1543289673, 0.5353281423, 0.4446345422];
const STO3G_2S: [f64; 3] = [-0.09996722919, 0.3995128261, 0.7001154689];
const STO3G_2P: [f64; 3] = [0.1559162750, 0.6076837186, 0.3919573931];

type ExponentRow = ([f64; 3], Option<[f64; 3]>);

/// (1s exponents, shared 2sp exponents) for H through Ne.
const STO3G_EXPONENTS: [ExponentRow; 10] = [
    ([3.425250914, 0.6239137298, 0.1688554040], None),
    ([6.362421394, 1.158922999, 0.3136497915], None),
    (
        [16.11957475, 2.936200663, 0.7946504870],
        Some([0.6362897469, 0.1478600533, 0.04808867840]),
    ),
    (
        [30.16787069, 5.495115306, 1.487192653],
        Some([1.314833110, 0.3055389383, 0.09937074560]),
    ),
    (
        [48.79111318, 8.887362172, 2.405267040],
        Some([2.236956142, 0.5198204999, 0.1690617600]),
    ),
    (
        [71.61683735, 13.04509632, 3.530512160],
        Some([2.941249355, 0.6834830964, 0.2222899159]),
    ),
    (
        [99.10616896, 18.05231239, 4.885660238],
        Some([3.780455879, 0.8784966449, 0.2857143744]),
    ),
    (
        [130.7093214, 23.80886605, 6.443608313],
        Some([5.033151319, 1.169596125, 0.3803889600]),
    ),
    (
        [166.6791340, 30.36081233, 8.216820672],
        Some([6.464803249, 1.502281245, 0.4885884864]),
    ),
    (
        [207.0156070, 37.70815124, 10.20529731],
        Some([8.246315120, 1.916266291, 0.6232292721]),
    ),
];
