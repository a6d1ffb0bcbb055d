//! Helpers shared by unit tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::activespace::{construct_hamiltonian, select_valence};
use crate::casci::{prune, solve_casci};
use crate::data::{FermionHamiltonian, Structure, Wavefunction};
use crate::scf::run_rhf;

/// Random Hamiltonian with real orbitals' permutational symmetry.
pub fn random_hamiltonian(rng: &mut impl Rng, n: usize) -> FermionHamiltonian {
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let v = rng.random_range(-1.0..1.0);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let mut g = vec![0.0; n.pow(4)];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if r * (r + 1) / 2 + s > p * (p + 1) / 2 + q {
                        continue;
                    }
                    let v = rng.random_range(-0.5..0.5);
                    for (a, b, c, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)] {
                        g[idx(a, b, c, d)] = v;
                    }
                }
            }
        }
    }
    FermionHamiltonian::new(None, rng.random_range(-1.0..1.0), h, g).unwrap()
}

/// H₂ in STO-3G at `bond` Bohr: active Hamiltonian, CASCI energy and state.
///
/// Symmetry-forbidden determinants (|c| ~ 1e-17) are pruned so the state can
/// be fed to state preparation directly.
pub fn h2_active(bond: f64) -> (FermionHamiltonian, f64, Wavefunction) {
    let s = Structure::new(&["H", "H"], &[[0.0, 0.0, 0.0], [0.0, 0.0, bond]]).unwrap();
    let (_, wf) = run_rhf(&s, 0, 1, "sto-3g").unwrap();
    let active = select_valence(&wf, 2, 2).unwrap();
    let h = construct_hamiltonian(active.orbitals().unwrap()).unwrap();
    let (e, ci) = solve_casci(&h, 1, 1).unwrap();
    (h, e, prune(&ci, 1e-10).unwrap())
}
