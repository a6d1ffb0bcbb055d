//! Active-space selection and frozen-core Hamiltonian construction.

use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::data::{ActiveSpace, DataError, Determinant, FermionHamiltonian, Orbitals, Wavefunction};
use crate::scf::{compute_integrals, Eri};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActiveSpaceError {
    #[error("wavefunction carries no orbitals")]
    MissingOrbitals,
    #[error("orbitals carry no active-space partition")]
    MissingPartition,
    #[error("infeasible active space: {0}")]
    Infeasible(String),
    #[error("orbital index {0} listed more than once")]
    DuplicateIndex(usize),
    #[error("orbital index {index} out of range for {n_mo} MOs")]
    IndexOutOfRange { index: usize, n_mo: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Degeneracies closer than this at a partition boundary are logged.
const DEGENERACY_TOL: f64 = 1e-6;

/// Valence electron and orbital counts from the per-element table.
///
/// H and He contribute one orbital (1s), Li–Ne contribute four (2s, 2p).
pub fn compute_valence_space_parameters(wf: &Wavefunction, charge: i64) -> Result<(usize, usize), ActiveSpaceError> {
    let orbitals = wf.orbitals().ok_or(ActiveSpaceError::MissingOrbitals)?;
    let structure = orbitals.basis().structure();
    let valence_e: i64 = structure.atoms().iter().map(|a| a.valence_electrons() as i64).sum();
    let valence_o: usize = structure.atoms().iter().map(|a| a.valence_orbitals()).sum();
    let n_o = valence_o.min(orbitals.n_mo());
    let n_e = valence_e - charge;
    if n_e < 0 {
        return Err(ActiveSpaceError::Infeasible(format!("charge {charge} leaves {n_e} valence electrons")));
    }
    let n_e = (n_e as usize).min(orbitals.n_electrons());
    if n_e > 2 * n_o {
        return Err(ActiveSpaceError::Infeasible(format!("{n_e} electrons do not fit in {n_o} orbitals")));
    }
    Ok((n_e, n_o))
}

/// Partitions the orbitals around the Fermi level.
///
/// Active orbitals are the `n_e/2` highest occupied MOs followed by the
/// lowest virtuals; lower MO indices win ties.
pub fn select_valence(wf: &Wavefunction, n_active_electrons: usize, n_active_orbitals: usize) -> Result<Wavefunction, ActiveSpaceError> {
    let orbitals = wf.orbitals().ok_or(ActiveSpaceError::MissingOrbitals)?;
    let n_mo = orbitals.n_mo();
    let n_occ = orbitals.occupations().iter().filter(|&&o| o == 2).count();
    if orbitals.occupations().contains(&1) {
        return Err(ActiveSpaceError::Infeasible("open-shell reference".into()));
    }
    if !n_active_electrons.is_multiple_of(2) {
        return Err(ActiveSpaceError::Infeasible(format!("{n_active_electrons} active electrons cannot be split evenly")));
    }
    let n_occ_act = n_active_electrons / 2;
    if n_active_orbitals == 0 && n_active_electrons == 0 {
        return Err(ActiveSpaceError::Infeasible("empty active space".into()));
    }
    if n_occ_act > n_active_orbitals || n_occ_act > n_occ || n_active_orbitals - n_occ_act > n_mo - n_occ {
        return Err(ActiveSpaceError::Infeasible(format!(
            "({n_active_electrons}e, {n_active_orbitals}o) with {n_occ} occupied of {n_mo} MOs"
        )));
    }
    let first = n_occ - n_occ_act;
    let last = first + n_active_orbitals;
    let eps = orbitals.energies();
    for boundary in [first, last] {
        if boundary > 0 && boundary < n_mo && (eps[boundary] - eps[boundary - 1]).abs() < DEGENERACY_TOL {
            warn!("degenerate orbitals {} and {boundary} straddle the active-space boundary", boundary - 1);
        }
    }
    let space = ActiveSpace {
        core: (0..first).collect(),
        active: (first..last).collect(),
        virtuals: (last..n_mo).collect(),
        n_active_alpha: n_occ_act,
        n_active_beta: n_occ_act,
    };
    with_partition(orbitals, space)
}

/// Sets the partition exactly as given; everything else becomes virtual.
pub fn select_manual(orbitals: &Orbitals, core: &[usize], active: &[usize]) -> Result<Orbitals, ActiveSpaceError> {
    let n_mo = orbitals.n_mo();
    let mut used = vec![false; n_mo];
    for &i in core.iter().chain(active) {
        if i >= n_mo {
            return Err(ActiveSpaceError::IndexOutOfRange { index: i, n_mo });
        }
        if std::mem::replace(&mut used[i], true) {
            return Err(ActiveSpaceError::DuplicateIndex(i));
        }
    }
    if active.is_empty() {
        return Err(ActiveSpaceError::Infeasible("no active orbitals".into()));
    }
    let n_act = orbitals.n_electrons() as i64 - 2 * core.len() as i64;
    if n_act < 0 || n_act as usize > 2 * active.len() || n_act % 2 != 0 {
        return Err(ActiveSpaceError::Infeasible(format!(
            "{n_act} electrons left for {} active orbitals",
            active.len()
        )));
    }
    let space = ActiveSpace {
        core: core.to_vec(),
        active: active.to_vec(),
        virtuals: (0..n_mo).filter(|&i| !used[i]).collect(),
        n_active_alpha: n_act as usize / 2,
        n_active_beta: n_act as usize / 2,
    };
    Ok(orbitals.with_active_space(space)?)
}

/// Reference determinant over the active orbitals of `orbitals`.
pub fn active_reference(orbitals: Arc<Orbitals>) -> Result<Wavefunction, ActiveSpaceError> {
    let space = orbitals.active_space().ok_or(ActiveSpaceError::MissingPartition)?;
    let det = Determinant::aufbau(space.n_active_alpha, space.n_active_beta);
    let n = space.active.len();
    Ok(Wavefunction::single(Some(orbitals), n, det)?)
}

fn with_partition(orbitals: &Orbitals, space: ActiveSpace) -> Result<Wavefunction, ActiveSpaceError> {
    active_reference(Arc::new(orbitals.with_active_space(space)?))
}

/// Folds the core into `E_core` and an effective one-body term and returns
/// the active-space Hamiltonian.
pub fn construct_hamiltonian(orbitals: &Arc<Orbitals>) -> Result<FermionHamiltonian, ActiveSpaceError> {
    let space = orbitals.active_space().ok_or(ActiveSpaceError::MissingPartition)?;
    let ints = compute_integrals(orbitals.basis());
    let c = orbitals.coefficients();
    let selected: Vec<usize> = space.core.iter().chain(&space.active).copied().collect();
    let nc = space.core.len();
    let na = space.active.len();
    let m = selected.len();
    let c_sel = DMatrix::from_fn(c.nrows(), m, |r, k| c[(r, selected[k])]);

    let h_mo = c_sel.transpose() * ints.core_hamiltonian() * &c_sel;
    let g_mo = transform_eri(&ints.eri, &c_sel);
    let g = |p: usize, q: usize, r: usize, s: usize| g_mo[((p * m + q) * m + r) * m + s];

    let mut e_core = ints.nuclear_repulsion;
    for i in 0..nc {
        e_core += 2.0 * h_mo[(i, i)];
        for j in 0..nc {
            e_core += 2.0 * g(i, i, j, j) - g(i, j, j, i);
        }
    }
    let mut h_eff = DMatrix::zeros(na, na);
    for p in 0..na {
        for q in 0..=p {
            let (pp, qq) = (nc + p, nc + q);
            let mut v = h_mo[(pp, qq)];
            for i in 0..nc {
                v += 2.0 * g(pp, qq, i, i) - g(pp, i, i, qq);
            }
            h_eff[(p, q)] = v;
            h_eff[(q, p)] = v;
        }
    }
    // Fill from one representative per symmetry class so the tensor is exactly symmetric.
    let mut active_g = vec![0.0; na.pow(4)];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * na + q) * na + r) * na + s;
    for p in 0..na {
        for q in 0..=p {
            for r in 0..na {
                for s in 0..=r {
                    if r * (r + 1) / 2 + s > p * (p + 1) / 2 + q {
                        continue;
                    }
                    let v = g(nc + p, nc + q, nc + r, nc + s);
                    for (a, b, cc, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)] {
                        active_g[idx(a, b, cc, d)] = v;
                    }
                }
            }
        }
    }
    Ok(FermionHamiltonian::new(Some(orbitals.clone()), e_core, h_eff, active_g)?)
}

/// `(pq|rs)` over the columns of `c` via four quarter-transformations.
pub fn transform_eri(eri: &Eri, c: &DMatrix<f64>) -> Vec<f64> {
    let n = eri.dim();
    let m = c.ncols();
    let src = eri.as_slice();
    // (μν|λσ) -> (pν|λσ)
    let mut t1 = vec![0.0; m * n * n * n];
    for p in 0..m {
        for mu in 0..n {
            let cv = c[(mu, p)];
            if cv == 0.0 {
                continue;
            }
            let from = &src[mu * n * n * n..(mu + 1) * n * n * n];
            let to = &mut t1[p * n * n * n..(p + 1) * n * n * n];
            for (t, f) in to.iter_mut().zip(from) {
                *t += cv * f;
            }
        }
    }
    // (pν|λσ) -> (pq|λσ)
    let mut t2 = vec![0.0; m * m * n * n];
    for p in 0..m {
        for q in 0..m {
            let to = &mut t2[(p * m + q) * n * n..(p * m + q + 1) * n * n];
            for nu in 0..n {
                let cv = c[(nu, q)];
                let from = &t1[(p * n + nu) * n * n..(p * n + nu + 1) * n * n];
                for (t, f) in to.iter_mut().zip(from) {
                    *t += cv * f;
                }
            }
        }
    }
    // (pq|λσ) -> (pq|rσ)
    let mut t3 = vec![0.0; m * m * m * n];
    for pq in 0..m * m {
        for r in 0..m {
            let to = &mut t3[(pq * m + r) * n..(pq * m + r + 1) * n];
            for la in 0..n {
                let cv = c[(la, r)];
                let from = &t2[(pq * n + la) * n..(pq * n + la + 1) * n];
                for (t, f) in to.iter_mut().zip(from) {
                    *t += cv * f;
                }
            }
        }
    }
    // (pq|rσ) -> (pq|rs)
    let mut out = vec![0.0; m * m * m * m];
    for pqr in 0..m * m * m {
        let from = &t3[pqr * n..(pqr + 1) * n];
        for s in 0..m {
            let mut v = 0.0;
            for (si, f) in from.iter().enumerate() {
                v += c[(si, s)] * f;
            }
            out[pqr * m + s] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Structure;
    use crate::scf::run_rhf;

    fn h2() -> Wavefunction {
        let s = Structure::new(&["H", "H"], &[[0.0; 3], [0.0, 0.0, 1.4]]).unwrap();
        run_rhf(&s, 0, 1, "sto-3g").unwrap().1
    }

    fn water() -> Wavefunction {
        let s = Structure::new(
            &["O", "H", "H"],
            &[[0.0, -0.143225816552, 0.0], [1.638036840407, 1.136548822547, 0.0], [-1.638036840407, 1.136548822547, 0.0]],
        )
        .unwrap();
        run_rhf(&s, 0, 1, "sto-3g").unwrap().1
    }

    #[test]
    fn valence_counts() {
        assert_eq!(compute_valence_space_parameters(&h2(), 0).unwrap(), (2, 2));
        assert_eq!(compute_valence_space_parameters(&water(), 0).unwrap(), (8, 6));
    }

    #[test]
    fn valence_partitions() {
        let wf = select_valence(&h2(), 2, 2).unwrap();
        let space = wf.orbitals().unwrap().active_space().unwrap().clone();
        assert!(space.core.is_empty());
        assert_eq!(space.active, [0, 1]);
        assert_eq!(wf.determinants(), &[Determinant::new(1, 1)]);

        let wf = select_valence(&water(), 8, 6).unwrap();
        let space = wf.orbitals().unwrap().active_space().unwrap();
        assert_eq!(space.core, [0]);
        assert_eq!(space.active, [1, 2, 3, 4, 5, 6]);
        assert!(space.virtuals.is_empty());
        assert!(matches!(select_valence(&h2(), 4, 1), Err(ActiveSpaceError::Infeasible(_))));
    }

    #[test]
    fn manual_matches_valence() {
        let ref_wf = water();
        let orb = ref_wf.orbitals().unwrap();
        let manual = select_manual(orb, &[0], &[1, 2, 3, 4, 5, 6]).unwrap();
        let valence = select_valence(&ref_wf, 8, 6).unwrap();
        assert_eq!(&manual, valence.orbitals().unwrap().as_ref());
        assert_eq!(select_manual(orb, &[], &[0, 0]), Err(ActiveSpaceError::DuplicateIndex(0)));
        assert!(matches!(
            select_manual(orb, &[9], &[1]),
            Err(ActiveSpaceError::IndexOutOfRange { index: 9, n_mo: 7 })
        ));
    }

    #[test]
    fn empty_core_has_no_folding() {
        let wf = select_valence(&h2(), 2, 2).unwrap();
        let orb = wf.orbitals().unwrap();
        let ham = construct_hamiltonian(orb).unwrap();
        assert_eq!(ham.core_energy(), 1.0 / 1.4);
        let ints = compute_integrals(orb.basis());
        let h_mo = orb.coefficients().transpose() * ints.core_hamiltonian() * orb.coefficients();
        assert!((ham.one_body() - h_mo).amax() < 1e-14);
    }

    #[test]
    fn quarter_transform_matches_naive() {
        let ref_wf = water();
        let orb = ref_wf.orbitals().unwrap();
        let ints = compute_integrals(orb.basis());
        let c = orb.coefficients().columns(0, 3).into_owned();
        let fast = transform_eri(&ints.eri, &c);
        let n = 7;
        for (p, q, r, s) in [(0, 0, 0, 0), (0, 1, 2, 1), (2, 2, 1, 0), (1, 2, 0, 2)] {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for cc in 0..n {
                        for d in 0..n {
                            v += c[(a, p)] * c[(b, q)] * c[(cc, r)] * c[(d, s)] * ints.eri.get(a, b, cc, d);
                        }
                    }
                }
            }
            assert!((fast[((p * 3 + q) * 3 + r) * 3 + s] - v).abs() < 1e-12);
        }
    }
}
