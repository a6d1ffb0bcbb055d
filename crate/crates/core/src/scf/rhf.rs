use std::sync::Arc;

use log::debug;
use nalgebra::{DMatrix, DVector};

use super::basis::build_basis;
use super::integrals::{compute_integrals, AoIntegrals, Eri};
use super::ScfError;
use crate::data::{Determinant, Orbitals, Structure, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhfOptions {
    pub max_iterations: usize,
    /// Threshold on ‖FDS − SDF‖_F.
    pub residual_tol: f64,
    pub energy_tol: f64,
    pub diis_history: usize,
    /// First iteration at which DIIS extrapolation is used.
    pub diis_start: usize,
    /// Overlap eigenvalues below this are projected out.
    pub linear_dependence_tol: f64,
}

impl Default for RhfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 128,
            residual_tol: 1e-8,
            energy_tol: 1e-10,
            diis_history: 8,
            diis_start: 2,
            linear_dependence_tol: 1e-10,
        }
    }
}

/// Converged closed-shell SCF state.
#[derive(Debug, Clone)]
pub struct RhfSolution {
    pub energy: f64,
    pub orbitals: Arc<Orbitals>,
    pub integrals: AoIntegrals,
    /// Total density `2 C_occ C_occᵀ`.
    pub density: DMatrix<f64>,
    pub fock: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl RhfSolution {
    /// Single determinant filling the lowest `N/2` MOs.
    pub fn wavefunction(&self) -> Wavefunction {
        let n_occ = self.orbitals.n_electrons() / 2;
        Wavefunction::single(Some(self.orbitals.clone()), self.orbitals.n_mo(), Determinant::aufbau(n_occ, n_occ))
            .expect("aufbau determinant is valid")
    }
}

/// Restricted HF energy and reference determinant with default options.
pub fn run_rhf(
    structure: &Structure,
    charge: i64,
    spin_multiplicity: u32,
    basis: &str,
) -> Result<(f64, Wavefunction), ScfError> {
    let sol = run_rhf_with(structure, charge, spin_multiplicity, basis, &RhfOptions::default())?;
    Ok((sol.energy, sol.wavefunction()))
}

pub fn run_rhf_with(
    structure: &Structure,
    charge: i64,
    spin_multiplicity: u32,
    basis_name: &str,
    opts: &RhfOptions,
) -> Result<RhfSolution, ScfError> {
    let n_elec = structure.total_nuclear_charge() - charge;
    if n_elec < 0 {
        return Err(ScfError::UnsupportedVariant(format!("charge {charge} leaves {n_elec} electrons")));
    }
    if n_elec % 2 != 0 {
        return Err(ScfError::UnsupportedVariant(format!("{n_elec} electrons is not closed-shell")));
    }
    if spin_multiplicity != 1 {
        return Err(ScfError::UnsupportedVariant(format!(
            "spin multiplicity {spin_multiplicity} (only restricted singlets are supported)"
        )));
    }
    let basis = build_basis(structure, basis_name)?;
    let ints = compute_integrals(&basis);
    let n_occ = (n_elec / 2) as usize;

    let x = orthogonalizer(&ints.overlap, opts.linear_dependence_tol);
    let n_mo = x.ncols();
    if n_occ > n_mo {
        return Err(ScfError::UnsupportedVariant(format!("{n_occ} occupied orbitals but only {n_mo} MOs")));
    }
    let h = ints.core_hamiltonian();
    let s = &ints.overlap;

    let (mut c, _) = diagonalize(&h, &x);
    let mut d = density(&c, n_occ);
    let mut diis = Diis::new(opts.diis_history);
    let mut e_prev = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut delta_e = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        let f = &h + two_electron(&ints.eri, &d);
        let e = energy(&d, &h, &f, ints.nuclear_repulsion);
        let comm = &f * &d * s - s * &d * &f;
        residual = comm.norm();
        delta_e = (e - e_prev).abs();
        debug!("rhf iter {iter}: E = {e:.12} residual = {residual:.3e} dE = {delta_e:.3e}");
        if residual < opts.residual_tol && delta_e < opts.energy_tol {
            let (c_final, eps) = diagonalize(&f, &x);
            let d_final = density(&c_final, n_occ);
            let f_final = &h + two_electron(&ints.eri, &d_final);
            let e_final = energy(&d_final, &h, &f_final, ints.nuclear_repulsion);
            let res_final = (&f_final * &d_final * s - s * &d_final * &f_final).norm();
            let occupations = (0..n_mo).map(|i| if i < n_occ { 2 } else { 0 }).collect();
            let orbitals = Orbitals::new(basis, charge, c_final, eps.as_slice().to_vec(), occupations, None)?;
            return Ok(RhfSolution {
                energy: e_final,
                orbitals: Arc::new(orbitals),
                integrals: ints,
                density: d_final,
                fock: f_final,
                residual: res_final,
                iterations: iter,
            });
        }
        e_prev = e;
        diis.push(f.clone(), x.transpose() * &comm * &x);
        let f_use = if iter >= opts.diis_start { diis.extrapolate().unwrap_or(f) } else { f };
        c = diagonalize(&f_use, &x).0;
        d = density(&c, n_occ);
    }
    Err(ScfError::NotConverged { iterations: opts.max_iterations, residual, delta_e })
}

/// Canonical orthogonalization `X = U s^{-1/2}` over retained eigenvectors.
fn orthogonalizer(s: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let keep: Vec<usize> = (0..s.nrows()).filter(|&i| eig.eigenvalues[i] >= tol).collect();
    let mut x = DMatrix::zeros(s.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt().recip();
        x.set_column(col, &(eig.eigenvectors.column(i) * scale));
    }
    x
}

/// MO coefficients and energies in ascending order, with a fixed sign per MO.
fn diagonalize(f: &DMatrix<f64>, x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let fp = x.transpose() * f * x;
    let fp = (&fp + fp.transpose()) * 0.5;
    let eig = fp.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let cp = DMatrix::from_fn(x.ncols(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let mut c = x * cp;
    for mut col in c.column_iter_mut() {
        let mut lead = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[lead].abs() + 1e-10 {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
    let eps = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    (c, eps)
}

fn density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    occ * occ.transpose() * 2.0
}

/// `G_pq = Σ_rs D_rs [(pq|rs) − ½ (pr|qs)]`.
pub(crate) fn two_electron(eri: &Eri, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let mut g = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let mut v = 0.0;
            for r in 0..n {
                for s in 0..n {
                    v += d[(r, s)] * (eri.get(p, q, r, s) - 0.5 * eri.get(p, r, q, s));
                }
            }
            g[(p, q)] = v;
            g[(q, p)] = v;
        }
    }
    g
}

fn energy(d: &DMatrix<f64>, h: &DMatrix<f64>, f: &DMatrix<f64>, e_nn: f64) -> f64 {
    0.5 * d.component_mul(&(h + f)).sum() + e_nn
}

struct Diis {
    capacity: usize,
    focks: Vec<DMatrix<f64>>,
    errors: Vec<DMatrix<f64>>,
}

impl Diis {
    fn new(capacity: usize) -> Self {
        Self { capacity, focks: Vec::new(), errors: Vec::new() }
    }

    fn push(&mut self, f: DMatrix<f64>, e: DMatrix<f64>) {
        if self.focks.len() == self.capacity {
            self.focks.remove(0);
            self.errors.remove(0);
        }
        self.focks.push(f);
        self.errors.push(e);
    }

    /// Solves the Pulay equations, dropping the oldest vectors if singular.
    fn extrapolate(&self) -> Option<DMatrix<f64>> {
        let total = self.focks.len();
        for start in 0..total {
            let m = total - start;
            if m < 2 {
                break;
            }
            let mut b = DMatrix::from_element(m + 1, m + 1, -1.0);
            b[(m, m)] = 0.0;
            for i in 0..m {
                for j in 0..m {
                    b[(i, j)] = self.errors[start + i].dot(&self.errors[start + j]);
                }
            }
            let mut rhs = DVector::zeros(m + 1);
            rhs[m] = -1.0;
            if let Some(coef) = b.lu().solve(&rhs) {
                if coef.iter().all(|c| c.is_finite()) {
                    let mut f = DMatrix::zeros(self.focks[0].nrows(), self.focks[0].ncols());
                    for i in 0..m {
                        f += &self.focks[start + i] * coef[i];
                    }
                    return Some(f);
                }
            }
        }
        None
    }
}
