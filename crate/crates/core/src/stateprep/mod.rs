//! Preparation circuits for sparse real wavefunctions.
//!
//! The target is disentangled in reverse. The two lowest-|amplitude| strings
//! are aligned with CX gates until they differ in one pivot bit. A
//! multi-controlled RY then folds one amplitude into the other. Controls are
//! chosen greedily so that no other string matches them. When a single string
//! remains, X gates map it to `|0…0⟩`, and the preparation circuit is the
//! inverse of the recorded sequence.
//!
//! Multi-controlled rotations use exact Toffoli decompositions with idle
//! qubits as dirty ancillas, so the gate count grows linearly in the register
//! width per merge and no extra qubits are needed.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::data::Wavefunction;
use crate::qubitmap::{wavefunction_to_basis_amplitudes, Encoding};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatePrepError {
    #[error("{0} determinants exceed the cap of {MAX_TERMS}")]
    TooManyTerms(usize),
    #[error("amplitude of basis state {0:#b} is zero; prune before state preparation")]
    ZeroAmplitude(u64),
    #[error("basis state {0:#b} appears twice")]
    Duplicate(u64),
    #[error("amplitudes are not normalized (sum of squares {0})")]
    NotNormalized(f64),
    #[error("basis state {state:#b} does not fit in {n_qubits} qubits")]
    OutOfRange { state: u64, n_qubits: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

pub const MAX_TERMS: usize = 256;

/// Amplitudes below this are treated as zero.
pub const ZERO_AMPLITUDE: f64 = 1e-12;

/// Documented bound: `gates ≤ GATE_COUNT_ALPHA · k · n` for `k` terms on `n` qubits.
pub const GATE_COUNT_ALPHA: usize = 32;

/// Circuit preparing `wf` on `2 · n_orbitals` qubits under `encoding`.
pub fn prepare_sparse(wf: &Wavefunction, encoding: Encoding) -> Result<Circuit, StatePrepError> {
    prepare_basis_amplitudes(2 * wf.n_orbitals(), &wavefunction_to_basis_amplitudes(wf, encoding))
}

/// Circuit mapping `|0…0⟩` to `Σ a_i |b_i⟩` for real, normalized amplitudes.
pub fn prepare_basis_amplitudes(n_qubits: usize, terms: &[(u64, f64)]) -> Result<Circuit, StatePrepError> {
    if terms.len() > MAX_TERMS {
        return Err(StatePrepError::TooManyTerms(terms.len()));
    }
    let mut states: Vec<(u64, f64)> = Vec::with_capacity(terms.len());
    for &(b, a) in terms {
        if n_qubits < 64 && b >> n_qubits != 0 {
            return Err(StatePrepError::OutOfRange { state: b, n_qubits });
        }
        if a.abs() < ZERO_AMPLITUDE || !a.is_finite() {
            return Err(StatePrepError::ZeroAmplitude(b));
        }
        if states.iter().any(|&(s, _)| s == b) {
            return Err(StatePrepError::Duplicate(b));
        }
        states.push((b, a));
    }
    let norm: f64 = states.iter().map(|(_, a)| a * a).sum();
    if states.is_empty() || (norm - 1.0).abs() > 1e-10 {
        return Err(StatePrepError::NotNormalized(norm));
    }

    let mut out = Circuit::new(n_qubits);
    while states.len() > 1 {
        merge_step(&mut states, &mut out)?;
    }
    let last = states[0].0;
    for q in 0..n_qubits {
        if last >> q & 1 == 1 {
            out.push(Gate::x(q))?;
        }
    }
    Ok(out.inverse())
}

/// One merge: reduces the number of strings by one, appending the gates used.
fn merge_step(states: &mut Vec<(u64, f64)>, out: &mut Circuit) -> Result<(), StatePrepError> {
    let n = out.n_qubits();
    states.sort_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(x.0.cmp(&y.0)));
    let (s1, s2) = (states[0].0, states[1].0);
    let diff = s1 ^ s2;
    let pivot = diff.trailing_zeros() as usize;

    for j in (0..n).filter(|&j| j != pivot && diff >> j & 1 == 1) {
        out.push(Gate::cx(pivot, j))?;
        for s in states.iter_mut() {
            if s.0 >> pivot & 1 == 1 {
                s.0 ^= 1 << j;
            }
        }
    }
    let common = states[0].0 & !(1 << pivot);

    // Greedy control selection: each step removes the most remaining look-alikes.
    let mut conflicts: Vec<u64> = states[2..].iter().map(|s| s.0).collect();
    let mut controls: Vec<usize> = Vec::new();
    while !conflicts.is_empty() {
        let best = (0..n)
            .filter(|&j| j != pivot && !controls.contains(&j))
            .max_by_key(|&j| (conflicts.iter().filter(|&&s| (s ^ common) >> j & 1 == 1).count(), std::cmp::Reverse(j)))
            .expect("distinct strings always leave a separating bit");
        conflicts.retain(|&s| (s ^ common) >> best & 1 == 0);
        controls.push(best);
    }
    controls.sort_unstable();

    let (lo, hi) = if states[0].0 >> pivot & 1 == 0 { (0, 1) } else { (1, 0) };
    let (a, b) = (states[lo].1, states[hi].1);
    let theta = -2.0 * b.atan2(a);
    let flips: Vec<usize> = controls.iter().copied().filter(|&c| common >> c & 1 == 0).collect();
    for &c in &flips {
        out.push(Gate::x(c))?;
    }
    mc_ry(out, &controls, pivot, theta)?;
    for &c in &flips {
        out.push(Gate::x(c))?;
    }
    states[lo].1 = a.hypot(b);
    states.remove(hi);
    Ok(())
}

/// RY(θ) on `target` controlled on every qubit in `controls` being 1.
pub fn mc_ry(out: &mut Circuit, controls: &[usize], target: usize, theta: f64) -> Result<(), CircuitError> {
    let n = out.n_qubits();
    match controls.len() {
        0 => {
            out.push(Gate::ry(target, theta))?;
        }
        1 => {
            out.extend([
                Gate::ry(target, theta / 2.0),
                Gate::cx(controls[0], target),
                Gate::ry(target, -theta / 2.0),
                Gate::cx(controls[0], target),
            ])?;
        }
        m => {
            let free = idle(n, controls, target);
            if free.is_empty() {
                // Every other qubit is a control: peel one off so the target can serve as a dirty ancilla.
                let (rest, last) = (&controls[..m - 1], controls[m - 1]);
                mc_ry(out, rest, target, theta / 2.0)?;
                mcx(out, rest, last, &[target])?;
                mc_ry(out, &[last], target, -theta / 2.0)?;
                mcx(out, rest, last, &[target])?;
                mc_ry(out, &[last], target, theta / 2.0)?;
            } else {
                out.push(Gate::ry(target, theta / 2.0))?;
                mcx(out, controls, target, &free)?;
                out.push(Gate::ry(target, -theta / 2.0))?;
                mcx(out, controls, target, &free)?;
            }
        }
    }
    Ok(())
}

fn idle(n: usize, controls: &[usize], target: usize) -> Vec<usize> {
    (0..n).filter(|q| *q != target && !controls.contains(q)).collect()
}

/// Exact Toffoli from H, T, T† and CX.
fn toffoli(out: &mut Circuit, a: usize, b: usize, t: usize) -> Result<(), CircuitError> {
    let tg = |q| Gate::phase(q, FRAC_PI_4);
    let tdg = |q| Gate::phase(q, -FRAC_PI_4);
    out.extend([
        Gate::h(t),
        Gate::cx(b, t),
        tdg(t),
        Gate::cx(a, t),
        tg(t),
        Gate::cx(b, t),
        tdg(t),
        Gate::cx(a, t),
        tg(b),
        tg(t),
        Gate::h(t),
        Gate::cx(a, b),
        tg(a),
        tdg(b),
        Gate::cx(a, b),
    ])?;
    Ok(())
}

/// Multi-controlled X using qubits in `dirty` as ancillas in arbitrary states.
///
/// With at least `m − 2` dirty qubits this is the 4(m − 2)-Toffoli chain;
/// with fewer, the controls are split in two halves around one borrowed qubit.
pub fn mcx(out: &mut Circuit, controls: &[usize], target: usize, dirty: &[usize]) -> Result<(), CircuitError> {
    let m = controls.len();
    match m {
        0 => {
            out.push(Gate::x(target))?;
        }
        1 => {
            out.push(Gate::cx(controls[0], target))?;
        }
        2 => toffoli(out, controls[0], controls[1], target)?,
        _ if dirty.len() >= m - 2 => toffoli_chain(out, controls, target, &dirty[..m - 2])?,
        _ => {
            let a = *dirty.first().expect("a split needs one borrowed qubit");
            let (c1, c2) = controls.split_at(m.div_ceil(2));
            let mut c2a = c2.to_vec();
            c2a.push(a);
            let pool1: Vec<usize> = c2.iter().copied().chain([target]).chain(dirty[1..].iter().copied()).collect();
            let pool2: Vec<usize> = c1.iter().copied().chain(dirty[1..].iter().copied()).collect();
            for _ in 0..2 {
                mcx(out, c1, a, &pool1)?;
                mcx(out, &c2a, target, &pool2)?;
            }
        }
    }
    Ok(())
}

fn toffoli_chain(out: &mut Circuit, c: &[usize], t: usize, a: &[usize]) -> Result<(), CircuitError> {
    let m = c.len();
    let ladder_down = |out: &mut Circuit| -> Result<(), CircuitError> {
        for i in (2..m - 1).rev() {
            toffoli(out, c[i], a[i - 2], a[i - 1])?;
        }
        Ok(())
    };
    let ladder_up = |out: &mut Circuit| -> Result<(), CircuitError> {
        for i in 2..m - 1 {
            toffoli(out, c[i], a[i - 2], a[i - 1])?;
        }
        Ok(())
    };
    toffoli(out, c[m - 1], a[m - 3], t)?;
    ladder_down(out)?;
    toffoli(out, c[0], c[1], a[0])?;
    ladder_up(out)?;
    toffoli(out, c[m - 1], a[m - 3], t)?;
    ladder_down(out)?;
    toffoli(out, c[0], c[1], a[0])?;
    ladder_up(out)?;
    Ok(())
}
