//! One- and two-electron integrals over contracted Cartesian Gaussians,
//! evaluated with McMurchie–Davidson Hermite expansions.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::basis::BasisSet;
use super::boys::boys;

/// Dense two-electron tensor (pq|rs) in chemists' notation.
#[derive(Debug, Clone, PartialEq)]
pub struct Eri {
    n: usize,
    data: Vec<f64>,
}

impl Eri {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.index(p, q, r, s)]
    }

    /// Writes all eight permutationally equivalent positions.
    pub fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.index(a, b, c, d);
            self.data[i] = value;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// All AO-basis integrals needed for a closed-shell SCF.
#[derive(Debug, Clone)]
pub struct AoIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: Eri,
    pub nuclear_repulsion: f64,
}

impl AoIntegrals {
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }
}

/// A contracted Cartesian Gaussian with normalization folded into the coefficients.
#[derive(Debug, Clone)]
struct Function {
    center: [f64; 3],
    powers: [u8; 3],
    exponents: Vec<f64>,
    coefficients: Vec<f64>,
}

fn double_factorial(n: i32) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

fn primitive_norm(alpha: f64, powers: [u8; 3]) -> f64 {
    let l = powers.iter().map(|&p| p as i32).sum::<i32>();
    let df: f64 = powers.iter().map(|&p| double_factorial(2 * p as i32 - 1)).product();
    (2.0 * alpha / PI).powf(0.75) * (4.0 * alpha).powf(l as f64 / 2.0) / df.sqrt()
}

fn functions(basis: &BasisSet) -> Vec<Function> {
    let coords = basis.structure().coordinates();
    let mut out = Vec::with_capacity(basis.n_ao());
    for shell in basis.shells() {
        for powers in shell.cartesian_powers() {
            let coefficients = shell
                .exponents
                .iter()
                .zip(&shell.coefficients)
                .map(|(&a, &c)| c * primitive_norm(a, powers))
                .collect();
            let mut f = Function {
                center: coords[shell.atom],
                powers,
                exponents: shell.exponents.clone(),
                coefficients,
            };
            let s = overlap_contracted(&f, &f);
            let scale = 1.0 / s.sqrt();
            f.coefficients.iter_mut().for_each(|c| *c *= scale);
            out.push(f);
        }
    }
    out
}

/// Hermite expansion coefficients E_t^{ij} for t = 0..=i+j along one axis.
fn hermite(i: usize, j: usize, a: f64, b: f64, qx: f64) -> Vec<f64> {
    let p = a + b;
    let mu = a * b / p;
    // table[i'][j'][t]
    let tmax = i + j + 1;
    let mut table = vec![vec![vec![0.0; tmax + 1]; j + 1]; i + 1];
    table[0][0][0] = (-mu * qx * qx).exp();
    let at = |tab: &Vec<Vec<Vec<f64>>>, ii: usize, jj: usize, t: isize| -> f64 {
        if t < 0 || t as usize > ii + jj {
            0.0
        } else {
            tab[ii][jj][t as usize]
        }
    };
    for ii in 1..=i {
        for t in 0..=ii {
            let ti = t as isize;
            table[ii][0][t] = at(&table, ii - 1, 0, ti - 1) / (2.0 * p)
                - mu * qx / a * at(&table, ii - 1, 0, ti)
                + (t + 1) as f64 * at(&table, ii - 1, 0, ti + 1);
        }
    }
    for jj in 1..=j {
        for ii in 0..=i {
            for t in 0..=ii + jj {
                let ti = t as isize;
                table[ii][jj][t] = at(&table, ii, jj - 1, ti - 1) / (2.0 * p)
                    + mu * qx / b * at(&table, ii, jj - 1, ti)
                    + (t + 1) as f64 * at(&table, ii, jj - 1, ti + 1);
            }
        }
    }
    table[i][j][..=i + j].to_vec()
}

/// Hermite Coulomb integrals R_{tuv}(p, PC) for t+u+v ≤ lmax, indexed [t][u][v].
struct HermiteCoulomb {
    dim: usize,
    values: Vec<f64>,
}

impl HermiteCoulomb {
    fn new(lmax: usize, p: f64, pc: [f64; 3]) -> Self {
        let dim = lmax + 1;
        let r2 = pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2];
        let mut f = vec![0.0; lmax + 1];
        boys(p * r2, &mut f);
        let idx = |t: usize, u: usize, v: usize| (t * dim + u) * dim + v;
        // level[n] holds R^n for all (t,u,v) with t+u+v <= lmax - n.
        let mut upper = vec![0.0; dim * dim * dim];
        let mut factor = (-2.0 * p).powi(lmax as i32);
        upper[idx(0, 0, 0)] = factor * f[lmax];
        for n in (0..lmax).rev() {
            factor /= -2.0 * p;
            let mut cur = vec![0.0; dim * dim * dim];
            cur[idx(0, 0, 0)] = factor * f[n];
            let budget = lmax - n;
            for t in 0..=budget {
                for u in 0..=budget - t {
                    for v in 0..=budget - t - u {
                        if t + u + v == 0 {
                            continue;
                        }
                        // Step down along the first non-zero index using R^{n+1}.
                        let value = if t > 0 {
                            let prev = if t > 1 { (t - 1) as f64 * upper[idx(t - 2, u, v)] } else { 0.0 };
                            prev + pc[0] * upper[idx(t - 1, u, v)]
                        } else if u > 0 {
                            let prev = if u > 1 { (u - 1) as f64 * upper[idx(t, u - 2, v)] } else { 0.0 };
                            prev + pc[1] * upper[idx(t, u - 1, v)]
                        } else {
                            let prev = if v > 1 { (v - 1) as f64 * upper[idx(t, u, v - 2)] } else { 0.0 };
                            prev + pc[2] * upper[idx(t, u, v - 1)]
                        };
                        cur[idx(t, u, v)] = value;
                    }
                }
            }
            upper = cur;
        }
        Self { dim, values: upper }
    }

    #[inline]
    fn get(&self, t: usize, u: usize, v: usize) -> f64 {
        self.values[(t * self.dim + u) * self.dim + v]
    }
}

/// Precomputed data for one primitive product of an AO pair.
struct PrimitivePair {
    p: f64,
    center: [f64; 3],
    coefficient: f64,
    ex: Vec<f64>,
    ey: Vec<f64>,
    ez: Vec<f64>,
}

fn primitive_pairs(fa: &Function, fb: &Function) -> Vec<PrimitivePair> {
    let mut out = Vec::with_capacity(fa.exponents.len() * fb.exponents.len());
    for (&a, &ca) in fa.exponents.iter().zip(&fa.coefficients) {
        for (&b, &cb) in fb.exponents.iter().zip(&fb.coefficients) {
            let p = a + b;
            let center = [0, 1, 2].map(|d| (a * fa.center[d] + b * fb.center[d]) / p);
            let e = |d: usize| hermite(fa.powers[d] as usize, fb.powers[d] as usize, a, b, fa.center[d] - fb.center[d]);
            out.push(PrimitivePair { p, center, coefficient: ca * cb, ex: e(0), ey: e(1), ez: e(2) });
        }
    }
    out
}

fn overlap_primitive(a: f64, pa: [u8; 3], ca: [f64; 3], b: f64, pb: [u8; 3], cb: [f64; 3]) -> f64 {
    let p = a + b;
    let mut s = (PI / p).powf(1.5);
    for d in 0..3 {
        s *= hermite(pa[d] as usize, pb[d] as usize, a, b, ca[d] - cb[d])[0];
    }
    s
}

fn overlap_contracted(fa: &Function, fb: &Function) -> f64 {
    let mut s = 0.0;
    for (&a, &ca) in fa.exponents.iter().zip(&fa.coefficients) {
        for (&b, &cb) in fb.exponents.iter().zip(&fb.coefficients) {
            s += ca * cb * overlap_primitive(a, fa.powers, fa.center, b, fb.powers, fb.center);
        }
    }
    s
}

fn kinetic_primitive(a: f64, pa: [u8; 3], ca: [f64; 3], b: f64, pb: [u8; 3], cb: [f64; 3]) -> f64 {
    let l2: i32 = pb.iter().map(|&x| x as i32).sum();
    let mut t = b * (2 * l2 + 3) as f64 * overlap_primitive(a, pa, ca, b, pb, cb);
    for d in 0..3 {
        let mut up = pb;
        up[d] += 2;
        t -= 2.0 * b * b * overlap_primitive(a, pa, ca, b, up, cb);
        if pb[d] >= 2 {
            let mut down = pb;
            down[d] -= 2;
            let k = (pb[d] as i32 * (pb[d] as i32 - 1)) as f64;
            t -= 0.5 * k * overlap_primitive(a, pa, ca, b, down, cb);
        }
    }
    t
}

/// AO overlap matrix alone.
pub fn overlap_matrix(basis: &BasisSet) -> DMatrix<f64> {
    let fs = functions(basis);
    let n = fs.len();
    DMatrix::from_fn(n, n, |i, j| overlap_contracted(&fs[i], &fs[j]))
}

/// Computes S, T, V, ERI and nuclear repulsion for `basis`.
pub fn compute_integrals(basis: &BasisSet) -> AoIntegrals {
    let fs = functions(basis);
    let n = fs.len();
    let structure = basis.structure();
    let nuclei: Vec<(f64, [f64; 3])> = structure
        .atoms()
        .iter()
        .zip(structure.coordinates())
        .map(|(e, c)| (e.atomic_number() as f64, *c))
        .collect();

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    let mut pairs: Vec<Vec<PrimitivePair>> = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            let (fa, fb) = (&fs[i], &fs[j]);
            let mut s = 0.0;
            let mut t = 0.0;
            for (&a, &ca) in fa.exponents.iter().zip(&fa.coefficients) {
                for (&b, &cb) in fb.exponents.iter().zip(&fb.coefficients) {
                    s += ca * cb * overlap_primitive(a, fa.powers, fa.center, b, fb.powers, fb.center);
                    t += ca * cb * kinetic_primitive(a, fa.powers, fa.center, b, fb.powers, fb.center);
                }
            }
            let pp = primitive_pairs(fa, fb);
            let mut v = 0.0;
            for pair in &pp {
                let lmax = pair.ex.len() + pair.ey.len() + pair.ez.len() - 3;
                for &(z, c) in &nuclei {
                    let pc = [pair.center[0] - c[0], pair.center[1] - c[1], pair.center[2] - c[2]];
                    let r = HermiteCoulomb::new(lmax, pair.p, pc);
                    let mut acc = 0.0;
                    for (t_, ext) in pair.ex.iter().enumerate() {
                        for (u, eyu) in pair.ey.iter().enumerate() {
                            for (w, ezw) in pair.ez.iter().enumerate() {
                                acc += ext * eyu * ezw * r.get(t_, u, w);
                            }
                        }
                    }
                    v -= z * pair.coefficient * 2.0 * PI / pair.p * acc;
                }
            }
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            kinetic[(i, j)] = t;
            kinetic[(j, i)] = t;
            nuclear[(i, j)] = v;
            nuclear[(j, i)] = v;
            pairs.push(pp);
        }
    }

    let pair_index = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let mut eri = Eri::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let ij = pair_index(i, j);
            for k in 0..n {
                for l in 0..=k {
                    let kl = pair_index(k, l);
                    if kl > ij {
                        continue;
                    }
                    let value = eri_contracted(&pairs[ij], &pairs[kl]);
                    eri.set_symmetric(i, j, k, l, value);
                }
            }
        }
    }

    AoIntegrals {
        overlap,
        kinetic,
        nuclear,
        eri,
        nuclear_repulsion: structure.nuclear_repulsion(),
    }
}

fn eri_contracted(bra: &[PrimitivePair], ket: &[PrimitivePair]) -> f64 {
    let mut total = 0.0;
    for ab in bra {
        for cd in ket {
            let p = ab.p;
            let q = cd.p;
            let alpha = p * q / (p + q);
            let pq = [ab.center[0] - cd.center[0], ab.center[1] - cd.center[1], ab.center[2] - cd.center[2]];
            let lab = ab.ex.len() + ab.ey.len() + ab.ez.len() - 3;
            let lcd = cd.ex.len() + cd.ey.len() + cd.ez.len() - 3;
            let r = HermiteCoulomb::new(lab + lcd, alpha, pq);
            let mut acc = 0.0;
            for (t, e1) in ab.ex.iter().enumerate() {
                for (u, e2) in ab.ey.iter().enumerate() {
                    for (v, e3) in ab.ez.iter().enumerate() {
                        let e_ab = e1 * e2 * e3;
                        for (tau, f1) in cd.ex.iter().enumerate() {
                            for (nu, f2) in cd.ey.iter().enumerate() {
                                for (phi, f3) in cd.ez.iter().enumerate() {
                                    let sign = if (tau + nu + phi) % 2 == 0 { 1.0 } else { -1.0 };
                                    acc += e_ab * sign * f1 * f2 * f3 * r.get(t + tau, u + nu, v + phi);
                                }
                            }
                        }
                    }
                }
            }
            total += ab.coefficient * cd.coefficient * 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * acc;
        }
    }
    total
}
