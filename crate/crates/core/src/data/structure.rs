use serde::{Deserialize, Serialize};

use super::{DataError, Document, Element};

/// Ångström to Bohr.
pub const ANGSTROM_TO_BOHR: f64 = 1.8897259886;

/// Minimum allowed interatomic distance in Bohr.
const MIN_SEPARATION: f64 = 1e-6;

/// Atoms and their Cartesian coordinates in Bohr.
///
/// Fields are private and there are no mutating methods; transformations
/// such as [`Structure::translated`] build a new value.
///
/// ```compile_fail
/// use qchemflow::data::Structure;
/// let mut s = Structure::new(&["H"], &[[0.0; 3]]).unwrap();
/// s.coordinates[0][0] = 1.0;
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StructureRaw")]
pub struct Structure {
    atoms: Vec<Element>,
    coordinates: Vec<[f64; 3]>,
}

#[derive(Deserialize)]
struct StructureRaw {
    atoms: Vec<Element>,
    coordinates: Vec<[f64; 3]>,
}

impl TryFrom<StructureRaw> for Structure {
    type Error = DataError;

    fn try_from(raw: StructureRaw) -> Result<Self, DataError> {
        Structure::from_elements(raw.atoms, raw.coordinates)
    }
}

impl Structure {
    /// Builds a structure from element symbols and Bohr coordinates.
    pub fn new(symbols: &[&str], coordinates: &[[f64; 3]]) -> Result<Self, DataError> {
        let atoms = symbols
            .iter()
            .map(|s| Element::from_symbol(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_elements(atoms, coordinates.to_vec())
    }

    pub fn from_elements(atoms: Vec<Element>, coordinates: Vec<[f64; 3]>) -> Result<Self, DataError> {
        if atoms.is_empty() {
            return Err(DataError::Invariant("structure must contain at least one atom".into()));
        }
        if atoms.len() != coordinates.len() {
            return Err(DataError::Invariant(format!(
                "{} atoms but {} coordinate rows",
                atoms.len(),
                coordinates.len()
            )));
        }
        if coordinates.iter().flatten().any(|c| !c.is_finite()) {
            return Err(DataError::Invariant("coordinates must be finite".into()));
        }
        for i in 0..coordinates.len() {
            for j in 0..i {
                if distance(&coordinates[i], &coordinates[j]) < MIN_SEPARATION {
                    return Err(DataError::Invariant(format!(
                        "atoms {j} and {i} are closer than {MIN_SEPARATION} Bohr"
                    )));
                }
            }
        }
        Ok(Self { atoms, coordinates })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }

    pub fn coordinates(&self) -> &[[f64; 3]] {
        &self.coordinates
    }

    pub fn total_nuclear_charge(&self) -> i64 {
        self.atoms.iter().map(|a| a.atomic_number() as i64).sum()
    }

    /// Σ_{A<B} Z_A Z_B / R_AB in Hartree.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                let zz = self.atoms[i].atomic_number() as f64 * self.atoms[j].atomic_number() as f64;
                e += zz / distance(&self.coordinates[i], &self.coordinates[j]);
            }
        }
        e
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let coordinates = self
            .coordinates
            .iter()
            .map(|c| [c[0] + shift[0], c[1] + shift[1], c[2] + shift[2]])
            .collect();
        Self { atoms: self.atoms.clone(), coordinates }
    }

    /// Applies a 3×3 matrix (row-major) to every coordinate.
    pub fn transformed(&self, m: [[f64; 3]; 3]) -> Self {
        let coordinates = self
            .coordinates
            .iter()
            .map(|c| {
                let mut out = [0.0; 3];
                for (r, row) in m.iter().enumerate() {
                    out[r] = row[0] * c[0] + row[1] * c[1] + row[2] * c[2];
                }
                out
            })
            .collect();
        Self { atoms: self.atoms.clone(), coordinates }
    }
}

impl Document for Structure {
    const KIND: &'static str = "structure";
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Parses XYZ text (coordinates in Ångström) into a [`Structure`] in Bohr.
///
/// Line 1 holds the atom count, line 2 is a free comment, then one
/// `symbol x y z` row per atom. Trailing blank lines are ignored.
pub fn parse_xyz(text: &str) -> Result<Structure, DataError> {
    let mut lines = text.lines();
    let count_line = lines
        .next()
        .ok_or_else(|| DataError::MalformedXyz("empty input".into()))?;
    let expected: usize = count_line
        .trim()
        .parse()
        .map_err(|_| DataError::MalformedXyz(format!("invalid atom count {:?}", count_line.trim())))?;
    if lines.next().is_none() {
        return Err(DataError::MalformedXyz("missing comment line".into()));
    }

    let mut atoms = Vec::new();
    let mut coordinates = Vec::new();
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 3;
        let mut fields = line.split_whitespace();
        let Some(symbol) = fields.next() else {
            continue;
        };
        // Some writers append the atom index ("H1"); we do not accept that.
        atoms.push(Element::from_symbol(symbol)?);
        let mut xyz = [0.0; 3];
        for slot in xyz.iter_mut() {
            let field = fields
                .next()
                .ok_or_else(|| DataError::MalformedXyz(format!("line {line_no}: expected 3 coordinates")))?;
            let value: f64 = field.parse().map_err(|_| DataError::InvalidCoordinate {
                line: line_no,
                value: field.to_string(),
            })?;
            *slot = value * ANGSTROM_TO_BOHR;
        }
        coordinates.push(xyz);
    }
    if atoms.len() != expected {
        return Err(DataError::CountMismatch { expected, found: atoms.len() });
    }
    Structure::from_elements(atoms, coordinates)
}
