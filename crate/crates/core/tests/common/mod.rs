#![allow(dead_code)]

use fock_filter::fock::{CMatrix, DensityMatrix};
use num_complex::Complex64;

/// Full-rank mixed state `(W W† + 10⁻³) / Tr(…)` from `2·dim²` raw entries.
pub fn wishart_state(raw: &[f64], dim: usize) -> DensityMatrix {
    assert!(raw.len() >= 2 * dim * dim);
    let w = CMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex64::new(raw[k], raw[k + 1])
    });
    let m = &w * w.adjoint() + CMatrix::identity(dim, dim) * Complex64::new(1e-3, 0.0);
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    let mut m = m.map(|c| c / tr);
    for n in 0..dim {
        m[(n, n)].im = 0.0;
        for k in n + 1..dim {
            m[(k, n)] = m[(n, k)].conj();
        }
    }
    DensityMatrix::new(m).expect("wishart state is valid")
}

/// Annihilation operator on `dim` levels: `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(γ a† − γ* a)` by dense matrix exponential.
pub fn displacement_by_expm(gamma: Complex64, dim: usize) -> CMatrix {
    let a = annihilation(dim);
    let gen = a.adjoint() * gamma - &a * gamma.conj();
    gen.exp()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix, rows: usize, cols: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in 0..cols {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}
