//! The power-mean normalization factor `V = <eps^D>^(1/D)` of the k-NN
//! radii, and the scale-free radii `eps / V`.
//!
//! Three backends compute `ln V`:
//!
//! * [`Backend::Baseline`] evaluates the formula literally in the linear
//!   domain. `eps^D` overflows (or underflows) once `D` is a few hundred,
//!   and the result is reported as non-finite rather than repaired.
//! * [`Backend::Proposed`] factors out the largest radius,
//!   `ln V = ln eps_max + (1/D) ln( sum (eps_i/eps_max)^D / N )`, so every
//!   power has a base in `(0, 1]` and the sum lies in `[1, N]`.
//! * [`Backend::DominantTerm`] keeps only the limit `ln V -> ln eps_max`,
//!   which is off by at most `ln(N)/D`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Baseline,
    Proposed,
    DominantTerm,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Baseline, Backend::Proposed, Backend::DominantTerm];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Baseline => "baseline",
            Backend::Proposed => "proposed",
            Backend::DominantTerm => "dominant_term",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "baseline" => Ok(Backend::Baseline),
            "proposed" => Ok(Backend::Proposed),
            "dominant_term" | "dominant" => Ok(Backend::DominantTerm),
            other => Err(Error::config(format!("unknown backend '{other}'"))),
        }
    }
}

/// `ln V` from one backend, with its numerical health.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationResult {
    pub ln_v: f64,
    pub backend: Backend,
    pub finite: bool,
    pub epsilon_max: f64,
    /// Joint dimensionality `d_x + d_y`.
    pub d_joint: usize,
}

/// Radii divided by `V`, with the cached mean of their logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRadii {
    pub epsilon_tilde: Vec<f64>,
    pub mean_ln_epsilon_tilde: f64,
}

fn validate(epsilon: &[f64], d_joint: usize) -> Result<f64> {
    if epsilon.is_empty() {
        return Err(Error::config("radius vector is empty"));
    }
    if d_joint == 0 {
        return Err(Error::config("joint dimension must be at least 1"));
    }
    let mut max = 0.0f64;
    for &e in epsilon {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Domain {
                what: "radii must be finite and positive",
                value: e,
            });
        }
        max = max.max(e);
    }
    Ok(max)
}

fn result(ln_v: f64, backend: Backend, epsilon_max: f64, d_joint: usize) -> NormalizationResult {
    NormalizationResult {
        ln_v,
        backend,
        finite: ln_v.is_finite(),
        epsilon_max,
        d_joint,
    }
}

/// `ln V` computed literally: the mean of `eps_i^D`, its D-th root, then
/// the logarithm. Overflow or underflow of the powers shows up as
/// `finite == false`.
pub fn ln_v_baseline(epsilon: &[f64], d_joint: usize) -> Result<NormalizationResult> {
    let epsilon_max = validate(epsilon, d_joint)?;
    let dim = d_joint as f64;
    let sum: f64 = epsilon.iter().map(|e| e.powf(dim)).sum();
    let mean = sum / epsilon.len() as f64;
    let v = mean.powf(1.0 / dim);
    Ok(result(v.ln(), Backend::Baseline, epsilon_max, d_joint))
}

/// `ln V` with the largest radius factored out of the power sum.
pub fn ln_v_proposed(epsilon: &[f64], d_joint: usize) -> Result<NormalizationResult> {
    let epsilon_max = validate(epsilon, d_joint)?;
    let dim = d_joint as f64;
    // left to right over the sample index; the term at eps_max is exactly 1
    let sum: f64 = epsilon.iter().map(|e| (e / epsilon_max).powf(dim)).sum();
    let correction = (sum / epsilon.len() as f64).ln() / dim;
    let ln_v = epsilon_max.ln() + correction;
    Ok(result(ln_v, Backend::Proposed, epsilon_max, d_joint))
}

/// High-dimensional limit `ln V = ln eps_max`.
pub fn ln_v_dominant(epsilon: &[f64], d_joint: usize) -> Result<NormalizationResult> {
    let epsilon_max = validate(epsilon, d_joint)?;
    Ok(result(
        epsilon_max.ln(),
        Backend::DominantTerm,
        epsilon_max,
        d_joint,
    ))
}

/// Dispatches to the backend's `ln V`.
pub fn normalize(backend: Backend, epsilon: &[f64], d_joint: usize) -> Result<NormalizationResult> {
    match backend {
        Backend::Baseline => ln_v_baseline(epsilon, d_joint),
        Backend::Proposed => ln_v_proposed(epsilon, d_joint),
        Backend::DominantTerm => ln_v_dominant(epsilon, d_joint),
    }
}

/// `eps_i / V`, formed as `exp(ln eps_i - ln V)`.
pub fn scale_radii(epsilon: &[f64], norm: &NormalizationResult) -> Result<ScaledRadii> {
    if !norm.finite {
        return Err(Error::NonFiniteNormalization {
            backend: norm.backend,
            ln_v: norm.ln_v,
        });
    }
    if epsilon.is_empty() {
        return Err(Error::config("radius vector is empty"));
    }
    let mut ln_sum = 0.0;
    let mut epsilon_tilde = Vec::with_capacity(epsilon.len());
    for &e in epsilon {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::Domain {
                what: "radii must be finite and positive",
                value: e,
            });
        }
        let ln_tilde = e.ln() - norm.ln_v;
        ln_sum += ln_tilde;
        epsilon_tilde.push(ln_tilde.exp());
    }
    Ok(ScaledRadii {
        epsilon_tilde,
        mean_ln_epsilon_tilde: ln_sum / epsilon.len() as f64,
    })
}
