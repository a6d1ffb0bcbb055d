//! Boys function F_m(T) = ∫₀¹ u^{2m} exp(−T u²) du.

/// Above this argument the upward recursion from the closed-form F₀ is used.
const SERIES_LIMIT: f64 = 40.0;

/// Fills `out[m]` with F_m(t) for m = 0..out.len().
pub fn boys(t: f64, out: &mut [f64]) {
    let Some(mmax) = out.len().checked_sub(1) else {
        return;
    };
    assert!(t >= 0.0 && t.is_finite(), "Boys argument must be finite and non-negative, got {t}");
    let exp_t = (-t).exp();
    if t <= SERIES_LIMIT {
        // F_m(T) = e^{-T} Σ_k (2T)^k / ((2m+1)(2m+3)…(2m+2k+1)), then recur down.
        let mut term = 1.0 / (2 * mmax + 1) as f64;
        let mut sum = term;
        let mut k = 1usize;
        loop {
            term *= 2.0 * t / (2 * mmax + 2 * k + 1) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1;
            assert!(k < 10_000, "Boys series failed to converge at T = {t}");
        }
        out[mmax] = exp_t * sum;
        for m in (0..mmax).rev() {
            out[m] = (2.0 * t * out[m + 1] + exp_t) / (2 * m + 1) as f64;
        }
    } else {
        // erf(√T) = 1 to double precision here.
        out[0] = 0.5 * (std::f64::consts::PI / t).sqrt();
        for m in 0..mmax {
            out[m + 1] = ((2 * m + 1) as f64 * out[m] - exp_t) / (2.0 * t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature of the defining integral.
    fn boys_quadrature(m: usize, t: f64) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |u: f64| u.powi(2 * m as i32) * (-t * u * u).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn matches_quadrature_across_regimes() {
        for &t in &[0.0, 1e-9, 0.3, 2.0, 11.7, 39.9, 40.1, 75.0, 300.0] {
            let mut f = [0.0; 7];
            boys(t, &mut f);
            for (m, &value) in f.iter().enumerate() {
                let reference = boys_quadrature(m, t);
                assert!(
                    (value - reference).abs() < 1e-12 * reference.max(1e-30) + 1e-15,
                    "m={m} t={t}: {value} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn zero_argument() {
        let mut f = [0.0; 4];
        boys(0.0, &mut f);
        for (m, v) in f.iter().enumerate() {
            assert!((v - 1.0 / (2 * m + 1) as f64).abs() < 1e-16);
        }
    }
}
