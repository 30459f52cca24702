//! Closed-form mutual information, marginal entropy, and NMI for the two
//! benchmark families.

use crate::error::{Error, Result};
use crate::special::{digamma_unchecked, ln_gamma_unchecked};

/// Reference values for one distribution. `nmi_true` is capped at 1 and is
/// `None` when the marginal entropy is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRecord {
    pub mi_true: f64,
    pub h_marginal_true: f64,
    pub nmi_true: Option<f64>,
}

/// `ln(2 pi e)`
const LN_2PI_E: f64 = 2.837_877_066_409_345_5;

/// Componentwise-correlated Gaussian pair in `R^d x R^d`:
/// `I = -(d/2) ln(1 - rho²)`, `H = (d/2) ln(2 pi e)`,
/// `NMI = min(1, -ln(1 - rho²) / ln(2 pi e))`.
pub fn gaussian_truth(d: usize, rho: f64) -> Result<TruthRecord> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain {
            what: "rho must lie in [0, 1]",
            value: rho,
        });
    }
    let half_d = d as f64 / 2.0;
    // ln(1) is +0, so -ln(1 - rho²) would print as -0
    let neg_log_det = -(1.0 - rho * rho).ln() + 0.0;
    Ok(TruthRecord {
        mi_true: half_d * neg_log_det,
        h_marginal_true: half_d * LN_2PI_E,
        nmi_true: Some((neg_log_det / LN_2PI_E).min(1.0)),
    })
}

/// `f(x) = ln Γ(x/2) - (x/2) ψ(x/2)`.
pub fn f_aux(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            what: "f_aux requires a finite positive argument",
            value: x,
        });
    }
    let h = x / 2.0;
    Ok(ln_gamma_unchecked(h) - h * digamma_unchecked(h))
}

fn check_student(nu: f64, d: usize) -> Result<()> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain {
            what: "nu must be finite and positive",
            value: nu,
        });
    }
    if d == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    Ok(())
}

/// Mutual information carried by the shared chi-square scale:
/// `c(nu, d) = f(nu) + f(nu + 2d) - 2 f(nu + d)`.
pub fn student_t_c(nu: f64, d: usize) -> Result<f64> {
    check_student(nu, d)?;
    let d = d as f64;
    Ok(f_aux(nu)? + f_aux(nu + 2.0 * d)? - 2.0 * f_aux(nu + d)?)
}

/// `H = (d/2) ln(nu pi) + f(nu) - f(nu + d)`.
pub fn student_t_marginal_entropy(nu: f64, d: usize) -> Result<f64> {
    check_student(nu, d)?;
    let df = d as f64;
    Ok(df / 2.0 * (nu * std::f64::consts::PI).ln() + f_aux(nu)? - f_aux(nu + df)?)
}

/// Student-t pair with identity dispersion, `latent_mi` being the mutual
/// information of the latent Gaussian pair (0 for identity dispersion).
pub fn student_t_truth(d: usize, nu: f64, latent_mi: f64) -> Result<TruthRecord> {
    let mi_true = latent_mi + student_t_c(nu, d)?;
    let h = student_t_marginal_entropy(nu, d)?;
    Ok(TruthRecord {
        mi_true,
        h_marginal_true: h,
        nmi_true: (h > 0.0).then(|| (mi_true / h).min(1.0)),
    })
}
