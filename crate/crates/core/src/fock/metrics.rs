use nalgebra::SymmetricEigen;

use super::density::{CMatrix, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMetrics {
    pub purity: f64,
    pub fidelity_to_pure: f64,
    pub trace_distance: f64,
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|c| c.norm_sqr()).sum()
}

fn padded_pair(a: &DensityMatrix, b: &DensityMatrix) -> (CMatrix, CMatrix) {
    let dim = a.dim().max(b.dim());
    let pad = |r: &DensityMatrix| {
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (r.dim(), r.dim())).copy_from(r.matrix());
        m
    };
    (pad(a), pad(b))
}

/// `Re Tr(a b)`. Equals the fidelity `⟨ψ|a|ψ⟩` when `b = |ψ⟩⟨ψ|` is pure.
pub fn fidelity_to_pure(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (a, b) = padded_pair(a, b);
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum()
}

/// `½ Σ |λ_i(a − b)|`; the smaller state is zero padded.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (a, b) = padded_pair(a, b);
    let diff = a - b;
    0.5 * SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
}

pub fn state_metrics(a: &DensityMatrix, b: &DensityMatrix) -> StateMetrics {
    StateMetrics {
        purity: purity(a),
        fidelity_to_pure: fidelity_to_pure(a, b),
        trace_distance: trace_distance(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn number_state_is_pure() {
        let four = DensityMatrix::number(4, 10).unwrap();
        assert_eq!(purity(&four), 1.0);
        assert_eq!(trace_distance(&four, &four), 0.0);
        assert_eq!(fidelity_to_pure(&four, &four), 1.0);
    }

    #[test]
    fn orthogonal_states_are_maximally_distant() {
        let a = DensityMatrix::number(0, 3).unwrap();
        let b = DensityMatrix::number(2, 5).unwrap();
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
        assert_eq!(fidelity_to_pure(&a, &b), 0.0);
    }

    #[test]
    fn superposition_vs_mixture() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let mixed = DensityMatrix::from_populations(&[0.5, 0.5]).unwrap();
        let m = state_metrics(&mixed, &plus);
        assert!((m.purity - 0.5).abs() < 1e-15);
        assert!((m.fidelity_to_pure - 0.5).abs() < 1e-15);
        assert!((m.trace_distance - 0.5).abs() < 1e-14);
    }
}
