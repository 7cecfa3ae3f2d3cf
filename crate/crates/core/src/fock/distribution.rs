use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;

/// Photon-number probabilities `p_n`, optionally with per-bin confidence
/// half-widths (Monte Carlo estimates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub values: Vec<f64>,
    pub half_widths: Option<Vec<f64>>,
}

impl PhotonDistribution {
    pub fn exact(values: Vec<f64>) -> Self {
        Self {
            values,
            half_widths: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Index of the largest entry (first one on ties).
    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (n, &p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((n, p)),
            })
            .map(|(n, _)| n)
    }
}

/// `p_n = ⟨n|ν|n⟩`, with round-off negatives clamped to zero.
pub fn photon_distribution(rho: &DensityMatrix) -> PhotonDistribution {
    PhotonDistribution::exact(rho.populations().into_iter().map(|p| p.max(0.0)).collect())
}
