//! Determinant-basis CASCI and wavefunction truncation.
//!
//! Spin orbitals are ordered alpha first (`0..n`), then beta (`n..2n`);
//! Slater–Condon phases follow that ordering.

mod davidson;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::data::{DataError, Determinant, FermionHamiltonian, Orbitals, Wavefunction};

pub use davidson::{davidson, DavidsonOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasciError {
    #[error("infeasible electron counts: {0}")]
    Infeasible(String),
    #[error("CI dimension {0} exceeds the cap of {MAX_DIMENSION}")]
    DimensionCap(usize),
    #[error("Davidson did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("max_determinants must be at least 1")]
    InvalidTruncation,
    #[error(transparent)]
    Data(#[from] DataError),
}

pub const MAX_DIMENSION: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasciOptions {
    /// Largest dimension diagonalized densely.
    pub dense_limit: usize,
    pub davidson: DavidsonOptions,
}

impl Default for CasciOptions {
    fn default() -> Self {
        Self { dense_limit: 2000, davidson: DavidsonOptions::default() }
    }
}

/// All `n`-orbital strings with `k` electrons, ascending.
pub fn strings(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    if k == 0 {
        return vec![0];
    }
    let mut s: u64 = (1u64 << k) - 1;
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    loop {
        out.push(s);
        // Gosper's hack: next integer with the same popcount.
        let c = s & s.wrapping_neg();
        let r = s.wrapping_add(c);
        if r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
        if n < 64 && s >= limit {
            break;
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

/// Determinant basis: alpha-major ordering, index `ia * n_beta_strings + ib`.
#[derive(Debug, Clone)]
pub struct CiSpace {
    n_orbitals: usize,
    alpha: Vec<u64>,
    beta: Vec<u64>,
    alpha_index: HashMap<u64, usize>,
    beta_index: HashMap<u64, usize>,
}

impl CiSpace {
    pub fn new(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Result<Self, CasciError> {
        if n_alpha > n_orbitals || n_beta > n_orbitals {
            return Err(CasciError::Infeasible(format!(
                "{n_alpha} alpha and {n_beta} beta electrons in {n_orbitals} orbitals"
            )));
        }
        let dim = binomial(n_orbitals, n_alpha).saturating_mul(binomial(n_orbitals, n_beta));
        if dim > MAX_DIMENSION {
            return Err(CasciError::DimensionCap(dim));
        }
        let alpha = strings(n_orbitals, n_alpha);
        let beta = strings(n_orbitals, n_beta);
        let alpha_index = alpha.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let beta_index = beta.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self { n_orbitals, alpha, beta, alpha_index, beta_index })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn determinant(&self, i: usize) -> Determinant {
        let nb = self.beta.len();
        Determinant::new(self.alpha[i / nb], self.beta[i % nb])
    }

    pub fn index(&self, d: Determinant) -> Option<usize> {
        Some(self.alpha_index.get(&d.alpha)? * self.beta.len() + self.beta_index.get(&d.beta)?)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }
}

/// Parity of occupied spin orbitals strictly below `p`.
#[inline]
fn below(mask: u128, p: u32) -> u32 {
    (mask & ((1u128 << p) - 1)).count_ones()
}

/// Sign of `a_p` acting on `mask` (which must contain `p`), and the result.
#[inline]
fn annihilate(mask: u128, p: u32) -> (bool, u128) {
    (below(mask, p) % 2 == 1, mask & !(1u128 << p))
}

#[inline]
fn create(mask: u128, p: u32) -> (bool, u128) {
    (below(mask, p) % 2 == 1, mask | (1u128 << p))
}

fn bits(mut m: u128) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros();
            m &= m - 1;
            Some(b)
        }
    })
}

/// Slater–Condon matrix elements of a [`FermionHamiltonian`].
pub struct SlaterCondon<'a> {
    h: &'a FermionHamiltonian,
    n: u32,
}

impl<'a> SlaterCondon<'a> {
    pub fn new(h: &'a FermionHamiltonian) -> Self {
        Self { h, n: h.n_orbitals() as u32 }
    }

    fn spin_mask(&self, d: Determinant) -> u128 {
        d.alpha as u128 | (d.beta as u128) << self.n
    }

    #[inline]
    fn split(&self, so: u32) -> (usize, u32) {
        ((so % self.n) as usize, so / self.n)
    }

    /// `⟨bra|H|ket⟩`, including the core energy on the diagonal.
    pub fn element(&self, bra: Determinant, ket: Determinant) -> f64 {
        let (i, j) = (self.spin_mask(bra), self.spin_mask(ket));
        let diff = i ^ j;
        match diff.count_ones() {
            0 => self.diagonal(i),
            2 => {
                let m = (i & diff).trailing_zeros();
                let p = (j & diff).trailing_zeros();
                let (ms, mspin) = self.split(m);
                let (ps, pspin) = self.split(p);
                if mspin != pspin {
                    return 0.0;
                }
                let (s1, t) = annihilate(j, p);
                let (s2, _) = create(t, m);
                let mut v = self.h.h(ms, ps);
                for k in bits(i & j) {
                    let (ks, kspin) = self.split(k);
                    v += self.h.g(ms, ps, ks, ks);
                    if kspin == mspin {
                        v -= self.h.g(ms, ks, ks, ps);
                    }
                }
                if s1 ^ s2 {
                    -v
                } else {
                    v
                }
            }
            4 => {
                let mut mi = bits(i & diff);
                let (m, n) = (mi.next().unwrap(), mi.next().unwrap());
                let mut pj = bits(j & diff);
                let (p, q) = (pj.next().unwrap(), pj.next().unwrap());
                // ⟨bra| a†_m a†_n a_q a_p |ket⟩
                let (s1, t) = annihilate(j, p);
                let (s2, t) = annihilate(t, q);
                let (s3, t) = create(t, n);
                let (s4, _) = create(t, m);
                let (ms, mspin) = self.split(m);
                let (ns, nspin) = self.split(n);
                let (ps, pspin) = self.split(p);
                let (qs, qspin) = self.split(q);
                let mut v = 0.0;
                if mspin == pspin && nspin == qspin {
                    v += self.h.g(ms, ps, ns, qs);
                }
                if mspin == qspin && nspin == pspin {
                    v -= self.h.g(ms, qs, ns, ps);
                }
                if s1 ^ s2 ^ s3 ^ s4 {
                    -v
                } else {
                    v
                }
            }
            _ => 0.0,
        }
    }

    fn diagonal(&self, mask: u128) -> f64 {
        let mut e = self.h.core_energy();
        for k in bits(mask) {
            let (ks, kspin) = self.split(k);
            e += self.h.h(ks, ks);
            for l in bits(mask) {
                let (ls, lspin) = self.split(l);
                e += 0.5 * self.h.g(ks, ks, ls, ls);
                if kspin == lspin {
                    e -= 0.5 * self.h.g(ks, ls, ls, ks);
                }
            }
        }
        e
    }
}

/// Dense CI matrix with every element evaluated independently.
pub fn ci_matrix(h: &FermionHamiltonian, space: &CiSpace) -> DMatrix<f64> {
    let sc = SlaterCondon::new(h);
    let dim = space.dim();
    let dets: Vec<Determinant> = (0..dim).map(|i| space.determinant(i)).collect();
    DMatrix::from_fn(dim, dim, |r, c| sc.element(dets[r], dets[c]))
}

/// Sparse row lists of the CI matrix, built from singles and doubles of each determinant.
fn sparse_rows(h: &FermionHamiltonian, space: &CiSpace) -> Vec<Vec<(usize, f64)>> {
    let sc = SlaterCondon::new(h);
    let n = space.n_orbitals;
    let full = crate::data::low_bits(n);
    let single_list = |s: u64| -> Vec<u64> {
        let mut out = Vec::new();
        let occ = s;
        let vir = !s & full;
        for i in bits(occ as u128) {
            for a in bits(vir as u128) {
                out.push(s & !(1 << i) | (1 << a));
            }
        }
        out
    };
    let double_list = |s: u64| -> Vec<u64> {
        let mut out = Vec::new();
        let vir = !s & full;
        let occ: Vec<u32> = bits(s as u128).collect();
        let vir: Vec<u32> = bits(vir as u128).collect();
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in vir.iter().enumerate() {
                    for &b in &vir[y + 1..] {
                        out.push(s & !(1 << i) & !(1 << j) | (1 << a) | (1 << b));
                    }
                }
            }
        }
        out
    };
    let a_singles: Vec<Vec<u64>> = space.alpha.iter().map(|&s| single_list(s)).collect();
    let b_singles: Vec<Vec<u64>> = space.beta.iter().map(|&s| single_list(s)).collect();
    let a_doubles: Vec<Vec<u64>> = space.alpha.iter().map(|&s| double_list(s)).collect();
    let b_doubles: Vec<Vec<u64>> = space.beta.iter().map(|&s| double_list(s)).collect();
    let nb = space.beta.len();
    (0..space.dim())
        .map(|row| {
            let (ia, ib) = (row / nb, row % nb);
            let d = space.determinant(row);
            let mut out = vec![(row, sc.element(d, d))];
            let mut push = |alpha: u64, beta: u64| {
                let other = Determinant::new(alpha, beta);
                let col = space.index(other).expect("excitation stays in the CI space");
                let v = sc.element(d, other);
                if v != 0.0 {
                    out.push((col, v));
                }
            };
            for &a in a_singles[ia].iter().chain(&a_doubles[ia]) {
                push(a, d.beta);
            }
            for &b in b_singles[ib].iter().chain(&b_doubles[ib]) {
                push(d.alpha, b);
            }
            for &a in &a_singles[ia] {
                for &b in &b_singles[ib] {
                    push(a, b);
                }
            }
            out
        })
        .collect()
}

/// Ground state of `h` with `n_alpha` and `n_beta` active electrons.
pub fn solve_casci(h: &FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<(f64, Wavefunction), CasciError> {
    solve_casci_with(h, n_alpha, n_beta, &CasciOptions::default())
}

pub fn solve_casci_with(
    h: &FermionHamiltonian,
    n_alpha: usize,
    n_beta: usize,
    opts: &CasciOptions,
) -> Result<(f64, Wavefunction), CasciError> {
    let space = CiSpace::new(h.n_orbitals(), n_alpha, n_beta)?;
    let dim = space.dim();
    let (energy, vector) = if dim <= opts.dense_limit {
        let m = ci_matrix(h, &space);
        let eig = m.symmetric_eigen();
        let k = (0..dim)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("CI space is never empty");
        (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
    } else {
        let rows = sparse_rows(h, &space);
        let diag: Vec<f64> = rows.iter().map(|r| r[0].1).collect();
        let apply = |x: &DVector<f64>| {
            DVector::from_iterator(dim, rows.iter().map(|r| r.iter().map(|&(c, v)| v * x[c]).sum::<f64>()))
        };
        davidson(dim, &diag, apply, &opts.davidson)?
    };
    let wf = canonical_wavefunction(h.orbitals().cloned(), &space, vector.as_slice())?;
    Ok((energy, wf))
}

/// Normalizes, orders by descending `|c|` (ties by bitmask) and fixes the sign of the leading coefficient.
fn canonical_wavefunction(
    orbitals: Option<Arc<Orbitals>>,
    space: &CiSpace,
    vector: &[f64],
) -> Result<Wavefunction, CasciError> {
    let norm = vector.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut entries: Vec<(Determinant, f64)> =
        vector.iter().enumerate().map(|(i, &c)| (space.determinant(i), c / norm)).collect();
    sort_entries(&mut entries);
    if entries[0].1 < 0.0 {
        entries.iter_mut().for_each(|e| e.1 = -e.1);
    }
    let (dets, coefs) = entries.into_iter().unzip();
    Ok(Wavefunction::new(orbitals, space.n_orbitals(), dets, coefs)?)
}

fn sort_entries(entries: &mut [(Determinant, f64)]) {
    entries.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
}

/// Keeps the `max_determinants` largest-|c| determinants and renormalizes.
pub fn truncate(wf: &Wavefunction, max_determinants: usize) -> Result<Wavefunction, CasciError> {
    if max_determinants == 0 {
        return Err(CasciError::InvalidTruncation);
    }
    let mut entries: Vec<(Determinant, f64)> = wf.iter().collect();
    sort_entries(&mut entries);
    entries.truncate(max_determinants);
    renormalized(wf, entries)
}

/// Drops determinants with `|c| < threshold` and renormalizes.
pub fn prune(wf: &Wavefunction, threshold: f64) -> Result<Wavefunction, CasciError> {
    let mut entries: Vec<(Determinant, f64)> = wf.iter().filter(|(_, c)| c.abs() >= threshold).collect();
    if entries.is_empty() {
        return Err(CasciError::Infeasible("every coefficient is below the pruning threshold".into()));
    }
    sort_entries(&mut entries);
    renormalized(wf, entries)
}

fn renormalized(wf: &Wavefunction, entries: Vec<(Determinant, f64)>) -> Result<Wavefunction, CasciError> {
    let norm = entries.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    let (dets, coefs): (Vec<_>, Vec<_>) = entries.into_iter().map(|(d, c)| (d, c / norm)).unzip();
    Ok(Wavefunction::new(wf.orbitals().cloned(), wf.n_orbitals(), dets, coefs)?)
}

/// `⟨ψ|H|ψ⟩` by Slater–Condon rules.
pub fn energy_expectation(h: &FermionHamiltonian, wf: &Wavefunction) -> f64 {
    let sc = SlaterCondon::new(h);
    let mut e = 0.0;
    for (di, ci) in wf.iter() {
        for (dj, cj) in wf.iter() {
            e += ci * cj * sc.element(di, dj);
        }
    }
    e
}
