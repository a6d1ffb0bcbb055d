use nalgebra::DMatrix;

use super::*;
use crate::casci::solve_casci;
use crate::pauli::to_dense;
use crate::rng::seeded;
use crate::testutil::random_hamiltonian;

fn dense(sum: &PauliSum, n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (c, p) in sum {
        m += to_dense(p) * *c;
    }
    m
}

#[test]
fn matrices() {
    assert_eq!(Encoding::Parity.matrix(3), vec![0b001, 0b011, 0b111]);
    assert_eq!(Encoding::BravyiKitaev.matrix(4), vec![0b0001, 0b0011, 0b0100, 0b1111]);
    assert_eq!(Encoding::BravyiKitaev.matrix(6)[5], 0b110000);
    for e in Encoding::ALL {
        let m = e.matrix(7);
        let inv = inverse_unit_lower(&m);
        for occ in 0..128u64 {
            let b = e.encode(7, occ);
            let back = inv.iter().enumerate().fold(0, |acc, (i, r)| acc | (((r & b).count_ones() as u64 & 1) << i));
            assert_eq!(back, occ);
        }
    }
    assert!("jw".parse::<Encoding>().is_err());
}

#[test]
fn anticommutation() {
    for e in Encoding::ALL {
        for n in 1..=4 {
            let ops = LadderOperators::new(e, n).unwrap();
            let dim = 1 << n;
            for p in 0..n {
                for q in 0..n {
                    let a = dense(ops.annihilator(p), n);
                    let ad = dense(&ops.creator(q), n);
                    let b = dense(ops.annihilator(q), n);
                    let anti = &a * &ad + &ad * &a;
                    let expected = if p == q { DMatrix::identity(dim, dim) } else { DMatrix::zeros(dim, dim) };
                    assert!((anti - expected).iter().all(|v| v.norm() < 1e-14), "{e} n={n} p={p} q={q}");
                    assert!((&a * &b + &b * &a).iter().all(|v| v.norm() < 1e-14));
                }
            }
        }
    }
}

#[test]
fn number_operator_jw() {
    let eps = 0.37;
    let ops = LadderOperators::new(Encoding::JordanWigner, 1).unwrap();
    let num = multiply(&ops.creator(0), ops.annihilator(0));
    let z = PauliString::from_letters("Z").unwrap();
    let i = PauliString::identity(1);
    let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    for (c, p) in num {
        *acc.entry(p).or_default() += c * eps;
    }
    assert_eq!(acc[&i], Complex64::new(eps / 2.0, 0.0));
    assert_eq!(acc[&z], Complex64::new(-eps / 2.0, 0.0));
}

#[test]
fn zero_integrals_give_identity() {
    let h = FermionHamiltonian::new(None, -0.75, DMatrix::zeros(2, 2), vec![0.0; 16]).unwrap();
    for e in Encoding::ALL {
        let q = map_fermion_to_qubit(&h, e).unwrap();
        assert_eq!(q.terms(), &[(PauliString::identity(4), -0.75)]);
    }
}

#[test]
fn determinant_states_are_eigenvectors_of_number_sectors() {
    let mut rng = seeded(21);
    let h = random_hamiltonian(&mut rng, 2);
    let (e_ci, wf) = solve_casci(&h, 1, 1).unwrap();
    for e in Encoding::ALL {
        let q = map_fermion_to_qubit(&h, e).unwrap().to_dense();
        let mut psi = nalgebra::DVector::<Complex64>::zeros(16);
        for (d, c) in wf.iter() {
            let (sign, b) = determinant_to_basis_state(d, 2, e);
            psi[b as usize] += Complex64::new(sign * c, 0.0);
        }
        let hpsi = &q * &psi;
        assert!((hpsi - &psi * Complex64::new(e_ci, 0.0)).norm() < 1e-10, "{e}");
    }
}
