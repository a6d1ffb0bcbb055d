//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use qchemflow::activespace::compute_valence_space_parameters;
use qchemflow::casci::{solve_casci, truncate};
use qchemflow::circuit::{expectation, simulate, unitary, Circuit, Gate, GateKind, StateVector};
use qchemflow::data::{from_json, to_json, Document, FermionHamiltonian, QubitHamiltonian, Structure};
use qchemflow::estimate::{classical_prefilter, estimate_energy, group_qubitwise_commuting, EstimateOptions};
use qchemflow::pauli::{to_dense, Letter, PauliString};
use qchemflow::qpe::{build_trotter, run_iterative_qpe, run_standard_qpe, QpeComponents, QpeParameters};
use qchemflow::qubitmap::{map_fermion_to_qubit, Encoding, LadderOperators, PauliSum};
use qchemflow::registry::kinds::*;
use qchemflow::registry::{self, AlgorithmKind, SettingSpec, Settings};
use qchemflow::rng::seeded;
use qchemflow::scf::{run_rhf_with, RhfOptions};
use qchemflow::stateprep::{prepare_basis_amplitudes, prepare_sparse};
use qchemflow::workflow::{run_workflow, WorkflowConfig};

type M = DMatrix<Complex64>;
type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn h2(bond: f64) -> Structure {
    Structure::new(&["H", "H"], &[[0.0, 0.0, 0.0], [0.0, 0.0, bond]]).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Stretched H2 through the registry, iterative QPE.

const LSB_BOUND: f64 = 2.0 * PI / (0.5 * 256.0);

struct StretchedRun {
    casci: f64,
    raw: f64,
    bits: String,
}

fn stretched_h2_script(seed: i64) -> StretchedRun {
    let structure = h2(2.5);
    let scf = registry::create::<ScfSolverKind>(Some("native"), &[]).unwrap();
    let (_e_scf, wfn) = scf.run(&structure, 0, 1, "sto-3g").unwrap();
    let (n_e, n_o) = compute_valence_space_parameters(&wfn, 0).unwrap();
    let selector = registry::create::<ActiveSpaceSelectorKind>(
        Some("valence"),
        &[("num_active_electrons", (n_e as i64).into()), ("num_active_orbitals", (n_o as i64).into())],
    )
    .unwrap();
    let active = selector.run(&wfn).unwrap();
    let ham = registry::create::<HamiltonianConstructorKind>(None, &[]).unwrap().run(active.orbitals().unwrap()).unwrap();
    let space = active.orbitals().unwrap().active_space().unwrap().clone();
    let mc = registry::create::<MultiConfigurationCalculatorKind>(Some("casci"), &[]).unwrap();
    let (casci, ci) = mc.run(&ham, space.n_active_alpha, space.n_active_beta).unwrap();
    let trial = truncate(&ci, 2).unwrap();
    let qubit = registry::create::<QubitMapperKind>(Some("jordan_wigner"), &[]).unwrap().run(&ham).unwrap();
    let prep = registry::create::<StatePrepKind>(Some("sparse_isometry_gf2x"), &[]).unwrap().run(&trial).unwrap();
    let builder = registry::create::<TimeEvolutionBuilderKind>(Some("trotter"), &[]).unwrap();
    let mapper = registry::create::<ControlledEvolutionMapperKind>(Some("pauli_sequence"), &[]).unwrap();
    let executor = registry::create::<CircuitExecutorKind>(Some("native_full_state"), &[]).unwrap();
    let qpe = registry::create::<PhaseEstimationKind>(
        Some("iterative"),
        &[("num_bits", 8.into()), ("evolution_time", 0.5.into()), ("seed", seed.into())],
    )
    .unwrap();
    let result = qpe.run(&prep, &qubit, &executor, &builder, &mapper).unwrap();
    StretchedRun { casci, raw: result.raw_energy(), bits: result.bits().to_owned() }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let a = stretched_h2_script(42);
    let elapsed = start.elapsed().as_secs_f64();
    let b = stretched_h2_script(42);
    let diff = (a.raw - a.casci).abs();
    ensure(diff <= LSB_BOUND, || format!("|raw − casci| = {diff:.6} > {LSB_BOUND:.6}"))?;
    ensure(a.bits == b.bits && a.raw.to_bits() == b.raw.to_bits(), || "rerun with the same seed differs".into())?;
    ensure(elapsed < 10.0, || format!("runtime {elapsed:.2} s"))?;
    // The config-driven pipeline runs the same algorithms.
    let cfg = WorkflowConfig::from_json(include_str!("../../cli/examples/h2_qpe.json")).unwrap();
    let w = run_workflow(&cfg, &h2(2.5), Some(42)).unwrap();
    ensure((w.energy() - a.raw).abs() < 1e-10 && (w.summary.casci_energy - a.casci).abs() < 1e-10, || {
        format!("workflow {} / {} vs script {} / {}", w.energy(), w.summary.casci_energy, a.raw, a.casci)
    })?;
    Ok(format!("E_CASCI = {:.8}, QPE = {:.8} (bits {}), |Δ| = {diff:.2e} ≤ {LSB_BOUND:.4}, {elapsed:.2} s", a.casci, a.raw, a.bits))
}

// ---------------------------------------------------------------------------
// 2. RHF against an independent s-function oracle.

/// Normalized contracted s function: (exponent, coefficient) pairs and centre.
struct SFunction {
    prims: Vec<(f64, f64)>,
    centre: [f64; 3],
}

const STO3G_COEF: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];

fn sto3g_s(z: u32, centre: [f64; 3]) -> SFunction {
    let exps = match z {
        1 => [3.42525091, 0.62391373, 0.16885540],
        2 => [6.36242139, 1.15892300, 0.31364979],
        _ => unreachable!(),
    };
    let prims: Vec<(f64, f64)> = exps.iter().zip(STO3G_COEF).map(|(&a, d)| (a, d * (2.0 * a / PI).powf(0.75))).collect();
    let mut f = SFunction { prims, centre };
    let norm = prim_sum(&f, &f, overlap_prim);
    for p in &mut f.prims {
        p.1 /= norm.sqrt();
    }
    f
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn gauss_product(a: f64, ra: [f64; 3], b: f64, rb: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (a * ra[i] + b * rb[i]) / (a + b))
}

/// `F0(t) = ∫₀¹ exp(−t x²) dx` by composite Simpson quadrature.
fn boys0(t: f64) -> f64 {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |x: f64| (-t * x * x).exp();
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn overlap_prim(a: f64, b: f64, ra: [f64; 3], rb: [f64; 3]) -> f64 {
    (PI / (a + b)).powf(1.5) * (-a * b / (a + b) * dist2(ra, rb)).exp()
}

fn kinetic_prim(a: f64, b: f64, ra: [f64; 3], rb: [f64; 3]) -> f64 {
    let mu = a * b / (a + b);
    mu * (3.0 - 2.0 * mu * dist2(ra, rb)) * overlap_prim(a, b, ra, rb)
}

fn prim_sum(f: &SFunction, g: &SFunction, k: impl Fn(f64, f64, [f64; 3], [f64; 3]) -> f64) -> f64 {
    let mut s = 0.0;
    for &(a, ca) in &f.prims {
        for &(b, cb) in &g.prims {
            s += ca * cb * k(a, b, f.centre, g.centre);
        }
    }
    s
}

fn rhf_oracle(atoms: &[(u32, [f64; 3])]) -> f64 {
    let basis: Vec<SFunction> = atoms.iter().map(|&(z, r)| sto3g_s(z, r)).collect();
    let n = basis.len();
    let mut s = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = prim_sum(&basis[i], &basis[j], overlap_prim);
            let t = prim_sum(&basis[i], &basis[j], kinetic_prim);
            let v: f64 = atoms
                .iter()
                .map(|&(z, rc)| {
                    prim_sum(&basis[i], &basis[j], |a, b, ra, rb| {
                        let p = gauss_product(a, ra, b, rb);
                        -2.0 * PI / (a + b) * z as f64 * (-a * b / (a + b) * dist2(ra, rb)).exp() * boys0((a + b) * dist2(p, rc))
                    })
                })
                .sum();
            h[(i, j)] = t + v;
        }
    }
    let mut eri = vec![0.0; n.pow(4)];
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    for &(a, ca) in &basis[i].prims {
                        for &(b, cb) in &basis[j].prims {
                            for &(cc, ccoef) in &basis[k].prims {
                                for &(d, cd) in &basis[l].prims {
                                    let (p, q) = (a + b, cc + d);
                                    let rp = gauss_product(a, basis[i].centre, b, basis[j].centre);
                                    let rq = gauss_product(cc, basis[k].centre, d, basis[l].centre);
                                    let pre = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                                    let e = (-a * b / p * dist2(basis[i].centre, basis[j].centre)
                                        - cc * d / q * dist2(basis[k].centre, basis[l].centre))
                                        .exp();
                                    v += ca * cb * ccoef * cd * pre * e * boys0(p * q / (p + q) * dist2(rp, rq));
                                }
                            }
                        }
                    }
                    eri[idx(i, j, k, l)] = v;
                }
            }
        }
    }
    let mut e_nuc = 0.0;
    for a in 0..atoms.len() {
        for b in 0..a {
            e_nuc += (atoms[a].0 * atoms[b].0) as f64 / dist2(atoms[a].1, atoms[b].1).sqrt();
        }
    }
    let n_occ = atoms.iter().map(|a| a.0 as usize).sum::<usize>() / 2;
    // Symmetric orthogonalization.
    let se = s.clone().symmetric_eigen();
    let x = &se.eigenvectors * DMatrix::from_diagonal(&se.eigenvalues.map(|v| 1.0 / v.sqrt())) * se.eigenvectors.transpose();
    let mut p = DMatrix::zeros(n, n);
    let mut energy = 0.0;
    for _ in 0..500 {
        let mut f = h.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        f[(i, j)] += p[(k, l)] * (eri[idx(i, j, l, k)] - 0.5 * eri[idx(i, k, l, j)]);
                    }
                }
            }
        }
        let new_energy = 0.5 * p.component_mul(&(&h + &f)).sum();
        let fe = (x.transpose() * &f * &x).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fe.eigenvalues[a].total_cmp(&fe.eigenvalues[b]));
        let cmat = &x * &fe.eigenvectors;
        let mut new_p = DMatrix::zeros(n, n);
        for &m in &order[..n_occ] {
            let col = cmat.column(m);
            new_p += 2.0 * &col * col.transpose();
        }
        let dp = (&new_p - &p).abs().max();
        p = new_p;
        let converged = (new_energy - energy).abs() < 1e-13 && dp < 1e-11;
        energy = new_energy;
        if converged {
            break;
        }
    }
    energy + e_nuc
}

/// Values produced by the oracle above, frozen.
const H2_RHF: f64 = -1.116714325063;
const HE_RHF: f64 = -2.807783957539;

fn criterion_2() -> Outcome {
    let he = Structure::new(&["He"], &[[0.0; 3]]).unwrap();
    let cases = [("H2", h2(1.4), vec![(1, [0.0; 3]), (1, [0.0, 0.0, 1.4])], H2_RHF), ("He", he, vec![(2, [0.0; 3])], HE_RHF)];
    let mut report = Vec::new();
    for (name, structure, atoms, frozen) in cases {
        let oracle = rhf_oracle(&atoms);
        let sol = run_rhf_with(&structure, 0, 1, "sto-3g", &RhfOptions::default()).map_err(|e| e.to_string())?;
        ensure((sol.energy - oracle).abs() < 1e-6, || format!("{name}: {} vs oracle {oracle}", sol.energy))?;
        ensure((oracle - frozen).abs() < 1e-9, || format!("{name}: oracle {oracle:.12} drifted from {frozen}"))?;
        ensure(sol.residual < 1e-8, || format!("{name}: residual {:.2e}", sol.residual))?;
        report.push(format!("{name} {:.9} (Δ {:.1e}, residual {:.1e})", sol.energy, (sol.energy - oracle).abs(), sol.residual));
    }
    Ok(report.join("; "))
}

// ---------------------------------------------------------------------------
// 3. Isospectral encodings and the determinant-CI oracle.

fn random_two_orbital(rng: &mut impl Rng) -> FermionHamiltonian {
    let n = 2;
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let v = rng.random_range(-1.0..1.0);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    let mut g = vec![f64::NAN; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if g[idx(p, q, r, s)].is_nan() {
                        let v = rng.random_range(-0.5..0.5);
                        for (a, b, c2, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)] {
                            g[idx(a, b, c2, d)] = v;
                        }
                    }
                }
            }
        }
    }
    FermionHamiltonian::new(None, rng.random_range(-1.0..1.0), h, g).unwrap()
}

/// `a_j` on an occupation bitmask (spin orbital `pσ` at bit `p + σ n`).
fn annihilate(j: usize, occ: u64) -> Option<(f64, u64)> {
    if occ >> j & 1 == 0 {
        return None;
    }
    let sign = if (occ & ((1 << j) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    Some((sign, occ & !(1 << j)))
}

fn create_op(j: usize, occ: u64) -> Option<(f64, u64)> {
    if occ >> j & 1 == 1 {
        return None;
    }
    let sign = if (occ & ((1 << j) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    Some((sign, occ | 1 << j))
}

/// Second-quantized Hamiltonian on the full Fock space, by direct operator application.
fn fock_matrix(h: &FermionHamiltonian) -> DMatrix<f64> {
    let n = h.n_orbitals();
    let dim = 1usize << (2 * n);
    let mut m = DMatrix::zeros(dim, dim);
    for ket in 0..dim as u64 {
        m[(ket as usize, ket as usize)] += h.core_energy();
        for p in 0..n {
            for q in 0..n {
                for sigma in 0..2 {
                    let step = annihilate(q + sigma * n, ket).and_then(|(s1, k)| create_op(p + sigma * n, k).map(|(s2, k)| (s1 * s2, k)));
                    if let Some((s, bra)) = step {
                        m[(bra as usize, ket as usize)] += s * h.h(p, q);
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        for sigma in 0..2 {
                            for tau in 0..2 {
                                // a†_pσ a†_rτ a_sτ a_qσ
                                let step = annihilate(q + sigma * n, ket)
                                    .and_then(|(s1, k)| annihilate(s + tau * n, k).map(|(s2, k)| (s1 * s2, k)))
                                    .and_then(|(s1, k)| create_op(r + tau * n, k).map(|(s2, k)| (s1 * s2, k)))
                                    .and_then(|(s1, k)| create_op(p + sigma * n, k).map(|(s2, k)| (s1 * s2, k)));
                                if let Some((sg, bra)) = step {
                                    m[(bra as usize, ket as usize)] += 0.5 * sg * h.g(p, q, r, s);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    m
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let fh = random_two_orbital(&mut rng);
        let fock = fock_matrix(&fh);
        let oracle_spectrum = sorted(fock.clone().symmetric_eigen().eigenvalues.as_slice().to_vec());
        // Lowest state with one alpha and one beta electron.
        let sector: Vec<usize> = (0..16usize).filter(|&k| (k & 0b11).count_ones() == 1 && (k >> 2).count_ones() == 1).collect();
        let block = DMatrix::from_fn(sector.len(), sector.len(), |i, j| fock[(sector[i], sector[j])]);
        let oracle_min = block.symmetric_eigen().eigenvalues.min();
        let (casci, _) = solve_casci(&fh, 1, 1).map_err(|e| e.to_string())?;
        ensure((casci - oracle_min).abs() < 1e-10, || format!("trial {trial}: CASCI {casci} vs oracle {oracle_min}"))?;
        let number = FermionHamiltonian::new(None, 0.0, DMatrix::identity(2, 2), vec![0.0; 16]).unwrap();
        for enc in Encoding::ALL {
            let q = map_fermion_to_qubit(&fh, enc).map_err(|e| e.to_string())?;
            let dense = q.to_dense();
            let spectrum = sorted(dense.clone().symmetric_eigen().eigenvalues.as_slice().to_vec());
            for (a, b) in spectrum.iter().zip(&oracle_spectrum) {
                worst = worst.max((a - b).abs());
                ensure((a - b).abs() < 1e-10, || format!("trial {trial} {enc}: eigenvalue {a} vs {b}"))?;
            }
            // Project onto the two-particle eigenspace of the encoded number operator.
            let n_eig = map_fermion_to_qubit(&number, enc).unwrap().to_dense().symmetric_eigen();
            let cols: Vec<DVector<Complex64>> =
                (0..16).filter(|&k| (n_eig.eigenvalues[k] - 2.0).abs() < 1e-9).map(|k| n_eig.eigenvectors.column(k).into_owned()).collect();
            ensure(cols.len() == 6, || format!("{enc}: two-particle space has dimension {}", cols.len()))?;
            let v = M::from_columns(&cols);
            let min = (v.adjoint() * &dense * &v).symmetric_eigen().eigenvalues.min();
            ensure((min - oracle_min).abs() < 1e-10, || format!("trial {trial} {enc}: sector minimum {min} vs {oracle_min}"))?;
        }
    }
    Ok(format!("10 Hamiltonians × 3 encodings, max spectral deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 4. Canonical anticommutation relations.

fn dense_sum(s: &PauliSum, n: usize) -> M {
    let mut m = M::zeros(1 << n, 1 << n);
    for (coef, p) in s {
        m += to_dense(p) * *coef;
    }
    m
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for enc in Encoding::ALL {
        for n in 1..=4 {
            let ops = LadderOperators::new(enc, n).map_err(|e| e.to_string())?;
            let a: Vec<M> = (0..n).map(|j| dense_sum(ops.annihilator(j), n)).collect();
            let id = M::identity(1 << n, 1 << n);
            for p in 0..n {
                for q in 0..n {
                    let ad = a[q].adjoint();
                    let anti = &a[p] * &ad + &ad * &a[p];
                    let want = if p == q { id.clone() } else { M::zeros(1 << n, 1 << n) };
                    let e1 = (anti - want).iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let e2 = (&a[p] * &a[q] + &a[q] * &a[p]).iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let creator = dense_sum(&ops.creator(q), n);
                    let e3 = (creator - &ad).iter().map(|v| v.norm()).fold(0.0, f64::max);
                    worst = worst.max(e1).max(e2).max(e3);
                    ensure(e1 < 1e-14 && e2 < 1e-14 && e3 < 1e-14, || format!("{enc} n={n} p={p} q={q}: {e1:.1e} {e2:.1e} {e3:.1e}"))?;
                }
            }
        }
    }
    Ok(format!("3 encodings, n = 1..4, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 5. Sparse state preparation.

fn criterion_5() -> Outcome {
    let mut rng = seeded(55);
    let mut worst: f64 = 1.0;
    let mut most_gates = 0;
    for trial in 0..100 {
        let n = rng.random_range(1..=8usize);
        let k = rng.random_range(1..=8usize.min(1 << n));
        let mut states: Vec<u64> = Vec::new();
        while states.len() < k {
            let b = rng.random_range(0..1u64 << n);
            if !states.contains(&b) {
                states.push(b);
            }
        }
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        let terms: Vec<(u64, f64)> = states.iter().zip(&raw).map(|(&b, &a)| (b, a / norm)).collect();
        let circ = prepare_basis_amplitudes(n, &terms).map_err(|e| format!("trial {trial}: {e}"))?;
        let psi = simulate(&circ).unwrap();
        let overlap: Complex64 = terms.iter().map(|&(b, a)| psi.amplitudes()[b as usize] * a).sum();
        let fidelity = overlap.norm_sqr();
        worst = worst.min(fidelity);
        most_gates = most_gates.max(circ.len());
        ensure(fidelity >= 1.0 - 1e-10, || format!("trial {trial} (n={n}, k={k}): fidelity {fidelity}"))?;
        if k == 1 {
            ensure(circ.gates().iter().all(|g| g.kind == GateKind::X), || format!("trial {trial}: k=1 uses non-X gates"))?;
        }
    }
    Ok(format!("100 targets, min fidelity 1 − {:.1e}, largest circuit {most_gates} gates", 1.0 - worst))
}

// ---------------------------------------------------------------------------
// 6. Trotter error scaling.

fn expm(a: &M) -> M {
    let norm: f64 = a.iter().map(|v| v.norm()).sum();
    let s = norm.max(1.0).log2().ceil() as i32 + 1;
    let scaled = a / c(2f64.powi(s));
    let mut term = M::identity(a.nrows(), a.ncols());
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / c(k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn trotter_matrix(h: &QubitHamiltonian, t: f64, r: usize, order: u32) -> M {
    let seq = build_trotter(h, t, r, order).unwrap();
    // Uncontrolled unitary: simulate the controlled circuit and take the ancilla-|1⟩ block.
    let circ = qchemflow::qpe::map_controlled_evolution(&seq, 1).unwrap();
    let u = unitary(&circ).unwrap();
    let d = 1 << h.n_qubits();
    u.view((d, d), (d, d)).into_owned()
}

fn criterion_6() -> Outcome {
    let h = QubitHamiltonian::from_terms(1, [(PauliString::from_letters("X").unwrap(), 0.8), (PauliString::from_letters("Z").unwrap(), 0.6)]).unwrap();
    let t = 1.0;
    let exact = expm(&(h.to_dense() * Complex64::new(0.0, -t)));
    let err = |r: usize, order: u32| (trotter_matrix(&h, t, r, order) - &exact).singular_values().max();
    let mut report = Vec::new();
    for (order, lo, hi) in [(1u32, 1.7, 2.3), (2, 3.2, 4.8)] {
        for r in [4, 8] {
            let ratio = err(r, order) / err(2 * r, order);
            ensure((lo..=hi).contains(&ratio), || format!("order {order}, {r}→{}: ratio {ratio:.3}", 2 * r))?;
            report.push(format!("o{order} r{r}→{}: {ratio:.3}", 2 * r));
        }
    }
    Ok(report.join(", "))
}

// ---------------------------------------------------------------------------
// 7. Exactly representable phases.

fn criterion_7() -> Outcome {
    let parts = QpeComponents::native(1, 1);
    let t = PI / 4.0;
    for m in 0..8u32 {
        let h = QubitHamiltonian::from_terms(1, [(PauliString::from_letters("Z").unwrap(), -(m as f64))]).unwrap();
        let want = format!("{m:03b}");
        let params = QpeParameters { num_bits: 3, evolution_time: t, shots: 100, seed: 100 + m as u64 };
        let s = run_standard_qpe(&Circuit::new(1), &h, &parts, &params).map_err(|e| e.to_string())?;
        ensure(s.bits() == want && s.histogram()[0].get(&want) == 100, || format!("standard m={m}: {:?}", s.histogram()[0]))?;
        let it = run_iterative_qpe(&Circuit::new(1), &h, &parts, &params).map_err(|e| e.to_string())?;
        ensure(it.bits() == want, || format!("iterative m={m}: {}", it.bits()))?;
        ensure(it.histogram().iter().all(|c| c.counts().len() == 1), || format!("iterative m={m}: a round was not deterministic"))?;
        ensure((s.phase() - m as f64 / 8.0).abs() < 1e-15, || format!("phase {}", s.phase()))?;
    }
    Ok("φ = m/8 for m = 0..7, both variants, 100/100 shots".into())
}

// ---------------------------------------------------------------------------
// 8. Estimation statistics.

fn letters_qwc(p: &PauliString, q: &PauliString) -> bool {
    (0..p.n_qubits()).all(|k| p.letter(k) == Letter::I || q.letter(k) == Letter::I || p.letter(k) == q.letter(k))
}

fn criterion_8() -> Outcome {
    let s = h2(1.4);
    let (_, wf) = qchemflow::scf::run_rhf(&s, 0, 1, "sto-3g").unwrap();
    let active = qchemflow::activespace::select_valence(&wf, 2, 2).unwrap();
    let fh = qchemflow::activespace::construct_hamiltonian(active.orbitals().unwrap()).unwrap();
    let (exact, ci) = solve_casci(&fh, 1, 1).unwrap();
    let ci = qchemflow::casci::prune(&ci, 1e-12).unwrap();
    let h = map_fermion_to_qubit(&fh, Encoding::JordanWigner).unwrap();
    let prep = prepare_sparse(&ci, Encoding::JordanWigner).unwrap();
    let (reduced, offset) = classical_prefilter(&h, &ci, Encoding::JordanWigner, 0.0).unwrap();
    let groups = group_qubitwise_commuting(&reduced);

    // Brute-force partition check, letters and dense commutators.
    let mut seen = vec![0usize; reduced.len()];
    for g in &groups {
        for (a, &i) in g.terms.iter().enumerate() {
            seen[i] += 1;
            for &j in &g.terms[..a] {
                let (p, q) = (reduced.terms()[i].0, reduced.terms()[j].0);
                ensure(letters_qwc(&p, &q), || format!("{} and {} share a group", p.to_letters(), q.to_letters()))?;
                let (dp, dq) = (to_dense(&p), to_dense(&q));
                ensure((&dp * &dq - &dq * &dp).iter().all(|v| v.norm() < 1e-14), || "grouped terms do not commute".into())?;
            }
        }
    }
    ensure(seen.iter().all(|&k| k == 1), || format!("term multiplicities {seen:?}"))?;

    let state: StateVector = simulate(&prep).unwrap();
    let exp_full = expectation(&state, &h).unwrap();
    ensure((exp_full - exact).abs() < 1e-10, || format!("⟨H⟩ {exp_full} vs CASCI {exact}"))?;
    let opts = |seed, exact| EstimateOptions { shots_per_group: 10_000, seed, exact, classical_offset: offset };
    let e = estimate_energy(&prep, &groups, &reduced, &opts(0, true)).map_err(|e| e.to_string())?;
    ensure((e.energy() - exp_full).abs() < 1e-10, || format!("exact mode {} vs {exp_full}", e.energy()))?;

    let mut inside = 0;
    let mut max_z: f64 = 0.0;
    for seed in 0..50 {
        let r = estimate_energy(&prep, &groups, &reduced, &opts(seed, false)).map_err(|e| e.to_string())?;
        let z = (r.energy() - exact).abs() / r.std_error();
        max_z = max_z.max(z);
        if z <= 5.0 {
            inside += 1;
        }
    }
    ensure(inside == 50, || format!("{inside}/50 repetitions within 5σ"))?;
    Ok(format!("{} groups, 50/50 within 5σ (max {max_z:.2}σ), exact mode Δ {:.1e}", groups.len(), (e.energy() - exp_full).abs()))
}

// ---------------------------------------------------------------------------
// 9. Architecture contracts.

struct StubMapper;

impl QubitMapper for StubMapper {
    fn run(&self, h: &FermionHamiltonian, _: &Settings) -> qchemflow::Result<QubitHamiltonian> {
        Ok(map_fermion_to_qubit(h, Encoding::JordanWigner)?)
    }
}

fn round_trip<T: Document + PartialEq + std::fmt::Debug>(x: &T) -> Result<(), String> {
    let text = to_json(x);
    let back: T = from_json(&text).map_err(|e| format!("{}: {e}", T::KIND))?;
    ensure(&back == x, || format!("{} round trip differs", T::KIND))?;
    ensure(to_json(&back) == text, || format!("{} re-serialization differs", T::KIND))
}

fn check_listing<K: AlgorithmKind>() -> Result<(), String> {
    let listing = registry::list(K::NAME);
    ensure(listing.found && !listing.implementations.is_empty(), || format!("{} not listed", K::NAME))?;
    for imp in listing.implementations {
        registry::create::<K>(Some(&imp.name), &[]).map_err(|e| format!("{}/{}: {e}", K::NAME, imp.name))?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    // Lock after run.
    let mut scf = registry::create::<ScfSolverKind>(None, &[]).unwrap();
    scf.settings_mut().set("max_iterations", 100).map_err(|e| e.to_string())?;
    scf.run(&h2(1.4), 0, 1, "sto-3g").unwrap();
    ensure(scf.settings_mut().set("max_iterations", 50).is_err(), || "mutation after run succeeded".into())?;
    ensure(scf.settings().int("max_iterations") == Ok(100), || "settings changed".into())?;

    // list/create consistency.
    check_listing::<ScfSolverKind>()?;
    check_listing::<ActiveSpaceSelectorKind>()?;
    check_listing::<HamiltonianConstructorKind>()?;
    check_listing::<MultiConfigurationCalculatorKind>()?;
    check_listing::<QubitMapperKind>()?;
    check_listing::<StatePrepKind>()?;
    check_listing::<TimeEvolutionBuilderKind>()?;
    check_listing::<ControlledEvolutionMapperKind>()?;
    check_listing::<CircuitExecutorKind>()?;
    check_listing::<PhaseEstimationKind>()?;
    check_listing::<EstimatorKind>()?;

    // A runtime-registered mapper drives the whole pipeline.
    registry::register::<QubitMapperKind>("stub_mapper", Vec::<SettingSpec>::new(), false, || Box::new(StubMapper)).map_err(|e| e.to_string())?;
    ensure(registry::list("qubit_mapper").implementations.iter().any(|i| i.name == "stub_mapper"), || "plugin not listed".into())?;
    let base = WorkflowConfig::from_json(include_str!("../../cli/examples/h2_qpe.json")).unwrap();
    let mut plugged = base.clone();
    plugged.qubit_mapper.implementation = Some("stub_mapper".into());
    plugged.state_prep.settings.insert("encoding".into(), "jordan_wigner".into());
    let a = run_workflow(&base, &h2(2.5), Some(5)).map_err(|e| e.to_string())?;
    let b = run_workflow(&plugged, &h2(2.5), Some(5)).map_err(|e| e.to_string())?;
    ensure(a.result == b.result, || "plugin pipeline differs from the built-in one".into())?;

    // JSON round trips for every document type.
    let s = h2(1.4);
    let sol = run_rhf_with(&s, 0, 1, "sto-3g", &RhfOptions::default()).unwrap();
    let active = qchemflow::activespace::select_valence(&sol.wavefunction(), 2, 2).unwrap();
    let fh = qchemflow::activespace::construct_hamiltonian(active.orbitals().unwrap()).unwrap();
    let (_, ci) = solve_casci(&fh, 1, 1).unwrap();
    let q = map_fermion_to_qubit(&fh, Encoding::BravyiKitaev).unwrap();
    let ci = qchemflow::casci::prune(&ci, 1e-12).unwrap();
    let mut circ = prepare_sparse(&ci, Encoding::BravyiKitaev).unwrap();
    circ.push(Gate::rz(1, 0.1)).unwrap().push(Gate::cphase(0, 3, -1.0 / 3.0)).unwrap();
    circ.measure_all();
    let counts = qchemflow::circuit::sample(&circ, 64, 3).unwrap();
    let seq = build_trotter(&q, 0.3, 2, 2).unwrap();
    let phase = match &a.result {
        qchemflow::workflow::FinalResult::Phase(p) => p.clone(),
        _ => unreachable!(),
    };
    let est = estimate_energy(&circ, &group_qubitwise_commuting(&q), &q, &EstimateOptions { shots_per_group: 20, ..Default::default() }).unwrap();
    round_trip(&s)?;
    round_trip(sol.orbitals.as_ref())?;
    round_trip(active.orbitals().unwrap().as_ref())?;
    round_trip(&sol.wavefunction())?;
    round_trip(&ci)?;
    round_trip(&fh)?;
    round_trip(&q)?;
    round_trip(&circ)?;
    round_trip(&counts)?;
    round_trip(&seq)?;
    round_trip(&phase)?;
    round_trip(&est)?;
    round_trip(scf.settings())?;
    Ok("lock, list/create, plugin pipeline and 13 document round trips".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stretched H2 iterative QPE within one phase LSB of CASCI", criterion_1),
        ("RHF matches the independent oracle", criterion_2),
        ("encodings are isospectral and match determinant CI", criterion_3),
        ("ladder operators satisfy the anticommutation relations", criterion_4),
        ("sparse state preparation fidelity", criterion_5),
        ("Trotter error scaling", criterion_6),
        ("exact-phase QPE", criterion_7),
        ("shot-based estimation statistics", criterion_8),
        ("architecture contracts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
