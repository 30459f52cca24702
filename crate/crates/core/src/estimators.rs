//! KSG mutual information, relative entropies, and normalized mutual
//! information assembled from k-NN radii.

use crate::error::{Error, Result};
use crate::knn::{compute_knn_radii, Dataset, RadiusSet};
use crate::scaling::{normalize, scale_radii, Backend, ScaledRadii};
use crate::special::digamma_unchecked as psi;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    X,
    Y,
}

/// NMI, or the entropies that made it undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NmiValue {
    Defined(f64),
    /// The product of the marginal entropies was not positive.
    Undefined {
        h_x: f64,
        h_y: f64,
    },
}

impl NmiValue {
    pub fn value(self) -> Option<f64> {
        match self {
            NmiValue::Defined(v) => Some(v),
            NmiValue::Undefined { .. } => None,
        }
    }
}

/// All estimates for one dataset and backend, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub mi_ksg: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    /// `h_x + h_y - h_xy`; the NMI numerator.
    pub mi_from_entropies: f64,
    pub nmi: NmiValue,
    pub ln_v: f64,
    pub backend: Backend,
    pub n_samples: usize,
    pub k: usize,
}

impl EstimateReport {
    /// True when every numeric field is finite (NMI may still be undefined).
    pub fn all_finite(&self) -> bool {
        let nmi_ok = self.nmi.value().is_none_or(f64::is_finite);
        [
            self.mi_ksg,
            self.h_x,
            self.h_y,
            self.h_xy,
            self.mi_from_entropies,
            self.ln_v,
        ]
        .iter()
        .all(|v| v.is_finite())
            && nmi_ok
    }
}

fn mean_psi_plus_one(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| psi(c as f64 + 1.0)).sum::<f64>() / counts.len() as f64
}

/// `psi(N) + psi(k) - < psi(n_x + 1) + psi(n_y + 1) >`.
pub fn ksg_mi(radii: &RadiusSet) -> f64 {
    let n = radii.len() as f64;
    let k = radii.k as f64;
    let sum: f64 = radii
        .n_x
        .iter()
        .zip(&radii.n_y)
        .map(|(&a, &b)| psi(a as f64 + 1.0) + psi(b as f64 + 1.0))
        .sum();
    psi(n) + psi(k) - sum / n
}

/// `-< psi(n + 1) > + psi(N) + d < ln eps_tilde >` for the chosen marginal,
/// using the joint-space scaled radii.
pub fn relative_entropy_marginal(
    radii: &RadiusSet,
    scaled: &ScaledRadii,
    d: usize,
    which: Marginal,
) -> f64 {
    let counts = match which {
        Marginal::X => &radii.n_x,
        Marginal::Y => &radii.n_y,
    };
    -mean_psi_plus_one(counts) + psi(radii.len() as f64) + d as f64 * scaled.mean_ln_epsilon_tilde
}

/// `-psi(k) + psi(N) + (d_x + d_y) < ln eps_tilde >`.
pub fn relative_entropy_joint(
    radii: &RadiusSet,
    scaled: &ScaledRadii,
    d_x: usize,
    d_y: usize,
) -> f64 {
    -psi(radii.k as f64)
        + psi(radii.len() as f64)
        + (d_x + d_y) as f64 * scaled.mean_ln_epsilon_tilde
}

/// `mi / sqrt(h_x h_y)`, undefined unless the entropy product is positive.
pub fn nmi(mi: f64, h_x: f64, h_y: f64) -> NmiValue {
    let product = h_x * h_y;
    if product > 0.0 {
        NmiValue::Defined(mi / product.sqrt())
    } else {
        NmiValue::Undefined { h_x, h_y }
    }
}

/// Runs the estimators on precomputed radii. A non-finite normalization
/// (the baseline's overflow) is returned as
/// [`Error::NonFiniteNormalization`].
pub fn estimate_from_radii(
    radii: &RadiusSet,
    d_x: usize,
    d_y: usize,
    backend: Backend,
) -> Result<EstimateReport> {
    if radii.is_empty() || radii.n_x.len() != radii.len() || radii.n_y.len() != radii.len() {
        return Err(Error::Invariant(
            "radius set vectors have inconsistent lengths".into(),
        ));
    }
    let norm = normalize(backend, &radii.epsilon, d_x + d_y)?;
    let scaled = scale_radii(&radii.epsilon, &norm)?;

    let h_x = relative_entropy_marginal(radii, &scaled, d_x, Marginal::X);
    let h_y = relative_entropy_marginal(radii, &scaled, d_y, Marginal::Y);
    let h_xy = relative_entropy_joint(radii, &scaled, d_x, d_y);
    let mi_from_entropies = h_x + h_y - h_xy;
    Ok(EstimateReport {
        mi_ksg: ksg_mi(radii),
        h_x,
        h_y,
        h_xy,
        mi_from_entropies,
        nmi: nmi(mi_from_entropies, h_x, h_y),
        ln_v: norm.ln_v,
        backend,
        n_samples: radii.len(),
        k: radii.k,
    })
}

/// k-NN radii plus all estimates for one backend.
pub fn estimate(data: &Dataset, k: usize, backend: Backend) -> Result<EstimateReport> {
    let radii = compute_knn_radii(data, k)?;
    estimate_from_radii(&radii, data.d_x(), data.d_y(), backend)
}
