use nalgebra::{DMatrix, DVector};

use super::CasciError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavidsonOptions {
    /// Convergence threshold on ‖Hc − Ec‖₂.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Subspace size at which the basis collapses to the current estimate.
    pub max_subspace: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-8, max_iterations: 500, max_subspace: 40 }
    }
}

/// Lowest eigenpair of a symmetric operator given its diagonal.
pub fn davidson(
    dim: usize,
    diag: &[f64],
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    opts: &DavidsonOptions,
) -> Result<(f64, DVector<f64>), CasciError> {
    let start = (0..dim).min_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b))).unwrap_or(0);
    let mut basis: Vec<DVector<f64>> = vec![DVector::from_fn(dim, |i, _| if i == start { 1.0 } else { 0.0 })];
    let mut images: Vec<DVector<f64>> = vec![apply(&basis[0])];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let m = basis.len();
        let small = DMatrix::from_fn(m, m, |i, j| basis[i].dot(&images[j]));
        let small = (&small + small.transpose()) * 0.5;
        let eig = small.symmetric_eigen();
        let k = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
        let theta = eig.eigenvalues[k];
        let y = eig.eigenvectors.column(k);
        let mut x = DVector::zeros(dim);
        let mut ax = DVector::zeros(dim);
        for i in 0..m {
            x.axpy(y[i], &basis[i], 1.0);
            ax.axpy(y[i], &images[i], 1.0);
        }
        let r = &ax - &x * theta;
        residual = r.norm();
        if residual < opts.residual_tol {
            let norm = x.norm();
            return Ok((theta, x / norm));
        }
        if dim == m {
            // Complete space: the Rayleigh–Ritz pair is exact up to rounding.
            let norm = x.norm();
            return Ok((theta, x / norm));
        }
        let mut t = DVector::from_fn(dim, |i, _| {
            let d = diag[i] - theta;
            r[i] / if d.abs() < 1e-8 { 1e-8f64.copysign(d) } else { d }
        });
        if m >= opts.max_subspace {
            let norm = x.norm();
            basis = vec![&x / norm];
            images = vec![apply(&basis[0])];
        }
        // Two passes of Gram–Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&t);
                t.axpy(-c, b, 1.0);
            }
        }
        let tn = t.norm();
        if tn < 1e-14 {
            // Preconditioned residual lies in the subspace; fall back to the raw residual.
            t = r.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&t);
                    t.axpy(-c, b, 1.0);
                }
            }
            if t.norm() < 1e-14 {
                let norm = x.norm();
                return Ok((theta, x / norm));
            }
        }
        let tn = t.norm();
        t /= tn;
        images.push(apply(&t));
        basis.push(t);
    }
    Err(CasciError::NotConverged { iterations: opts.max_iterations, residual })
}
