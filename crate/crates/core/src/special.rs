//! Digamma and log-gamma for positive real arguments.
//!
//! Both use upward recurrence into a region where an asymptotic series
//! converges to full double precision, so results do not depend on the
//! platform math library beyond `ln`.

use crate::error::{Error, Result};

/// Below this the argument is shifted up by recurrence before the
/// asymptotic series is applied.
const DIGAMMA_SHIFT: f64 = 10.0;
const LN_GAMMA_SHIFT: f64 = 15.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// ψ(x), the logarithmic derivative of Γ, for finite x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma requires a finite positive argument")?;
    Ok(digamma_unchecked(x))
}

/// ln Γ(x) for finite x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive(x, "ln_gamma requires a finite positive argument")?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < DIGAMMA_SHIFT {
        shift -= 1.0 / x;
        x += 1.0;
    }
    // ln x - 1/(2x) - sum B_2n / (2n x^2n), through x^-14
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 * (1.0 / 12.0)))))));
    shift + x.ln() - 0.5 * r - series
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut z = x;
    let mut product = 1.0;
    while z < LN_GAMMA_SHIFT {
        product *= z;
        z += 1.0;
    }
    // Stirling series through z^-13
    let r = 1.0 / z;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0
                        - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 * (1.0 / 156.0)))))));
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_2PI + series;
    if product == 1.0 {
        stirling
    } else {
        stirling - product.ln()
    }
}
