use num_complex::Complex64;

use super::density::CMatrix;
use super::special::{laguerre_series, ln_factorials};

/// Extra Fock levels kept beyond the region of interest whenever a
/// displacement by `γ` is involved: `⌈2|γ|²⌉ + 10`.
pub fn displacement_margin(gamma: Complex64) -> usize {
    (2.0 * gamma.norm_sqr()).ceil() as usize + 10
}

/// Matrix elements `⟨n|D(γ)|k⟩` for `n, k < dim` of `D(γ) = exp(γa† − γ*a)`.
///
/// Uses the closed form
/// `⟨k+d|D(γ)|k⟩ = √(k!/(k+d)!) γ^d e^{−|γ|²/2} L_k^{(d)}(|γ|²)` and
/// `⟨k|D(γ)|k+d⟩ = √(k!/(k+d)!) (−γ*)^d e^{−|γ|²/2} L_k^{(d)}(|γ|²)`,
/// assembled in log space. Each entry is exact for the untruncated operator;
/// only the cropping makes the returned block non-unitary near its edge.
pub fn displacement_matrix(gamma: Complex64, dim: usize) -> CMatrix {
    let mut d = CMatrix::zeros(dim, dim);
    if gamma == Complex64::new(0.0, 0.0) {
        d.fill_with_identity();
        return d;
    }
    let x = gamma.norm_sqr();
    let ln_abs = gamma.norm().ln();
    let arg = gamma.arg();
    let lf = ln_factorials(dim);

    for off in 0..dim {
        let lag = laguerre_series(off as f64, x, dim - off);
        let phase_lower = Complex64::from_polar(1.0, off as f64 * arg);
        // (−γ*)^d carries e^{−i d arg γ} and (−1)^d
        let phase_upper = phase_lower.conj() * if off % 2 == 0 { 1.0 } else { -1.0 };
        for (k, l) in lag.iter().enumerate() {
            if l.sign == 0.0 {
                continue;
            }
            let n = k + off;
            let ln_mag = 0.5 * (lf[k] - lf[n]) + off as f64 * ln_abs - 0.5 * x + l.ln_abs;
            let mag = l.sign * ln_mag.exp();
            d[(n, k)] = phase_lower * mag;
            if off > 0 {
                d[(k, n)] = phase_upper * mag;
            }
        }
    }
    d
}
