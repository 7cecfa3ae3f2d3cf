use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest tolerated `|ν_nm − conj(ν_mn)|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest tolerated `|Tr ν − 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest tolerated eigenvalue. Eigenvalues in `(PSD_TOL, 0)` are kept as is.
pub const PSD_TOL: f64 = -1e-9;

/// A single-mode density matrix on the truncated Fock basis `|0⟩ … |dim−1⟩`.
///
/// Values built through [`DensityMatrix::new`] are Hermitian, unit trace and
/// positive semidefinite within the module tolerances. Reconstructed
/// estimates (see `tomography`) are only guaranteed Hermitian; call
/// [`DensityMatrix::validate`] to check the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let rho = Self::checked_shape(mat)?;
        rho.validate()?;
        Ok(rho)
    }

    fn checked_shape(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    /// Hermitian by construction: the upper triangle is taken from `mat` and
    /// mirrored, the diagonal is made real. No trace or positivity check.
    pub(crate) fn from_upper_unchecked(mut mat: CMatrix) -> Self {
        let dim = mat.nrows();
        for n in 0..dim {
            mat[(n, n)].im = 0.0;
            for m in n + 1..dim {
                mat[(m, n)] = mat[(n, m)].conj();
            }
        }
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|` for the normalized amplitude vector `psi`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if psi.is_empty() || !norm2.is_finite() || norm2 <= 0.0 {
            return Err(Error::InvalidState("pure state vector has zero norm".into()));
        }
        let inv = 1.0 / norm2;
        let dim = psi.len();
        let mat = CMatrix::from_fn(dim, dim, |n, m| psi[n] * psi[m].conj() * inv);
        Ok(Self::from_upper_unchecked(mat))
    }

    /// Diagonal (phase-insensitive) state with the given populations, renormalized.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidState(
                "populations must be non-empty, finite and non-negative".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("populations sum to zero".into()));
        }
        let dim = p.len();
        let mat = CMatrix::from_fn(dim, dim, |n, m| {
            if n == m {
                Complex64::new(p[n] / total, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self { mat })
    }

    /// The number state `|n⟩⟨n|` in dimension `dim`.
    pub fn number(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::DimensionMismatch(format!(
                "|{n}⟩ does not fit in dimension {dim}"
            )));
        }
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.mat[(n, m)]
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|n| self.mat[(n, n)].re).sum()
    }

    /// Real parts of the diagonal, unclamped.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.mat[(n, n)].re).collect()
    }

    /// Embeds the state in a larger space (zero padded) or returns a clone
    /// when `dim` equals the current dimension. Never truncates.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot pad dimension {} down to {dim}",
                self.dim()
            )));
        }
        let mut mat = CMatrix::zeros(dim, dim);
        mat.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.mat);
        Ok(Self { mat })
    }

    /// Copy scaled to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        Ok(Self {
            mat: self.mat.map(|c| c / tr),
        })
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for n in 0..dim {
            for m in n..dim {
                worst = worst.max((self.mat[(n, m)] - self.mat[(m, n)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order (Hermitian part).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        if self.mat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("non-finite matrix element".into()));
        }
        let defect = self.max_hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max defect {defect:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr:.15} is not 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (smallest eigenvalue {min_ev:.3e})"
            )));
        }
        Ok(())
    }

    /// Optional physical projection: clip negative eigenvalues and renormalize.
    pub fn project_physical(&self) -> Result<Self> {
        let eig = SymmetricEigen::new(self.mat.clone());
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState(
                "no positive eigenvalues left after clipping".into(),
            ));
        }
        let dim = self.dim();
        let v = &eig.eigenvectors;
        let mat = CMatrix::from_fn(dim, dim, |n, m| {
            (0..dim)
                .map(|j| v[(n, j)] * v[(m, j)].conj() * clipped[j])
                .sum::<Complex64>()
                / total
        });
        Ok(Self::from_upper_unchecked(mat))
    }
}
