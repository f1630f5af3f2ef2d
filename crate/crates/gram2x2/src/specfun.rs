//! Scalar special functions: the entire function S(z) = sinh(sqrt z)/sqrt z,
//! its overflow-safe exponentially scaled variant, the real exponential
//! integral Ei, and the Ei-difference combination g used by the closed-form
//! eigenvalue CDFs.

use crate::error::Error;
use crate::profile::PartialProfile;
use crate::Result;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// |z| at or below which the Taylor series of S is used instead of the
/// closed forms. Chosen so both branches are far from their cancellation
/// regimes; continuity across the switch is covered by tests.
pub const SINHC_SERIES_THRESHOLD: f64 = 0.25;

/// S(z) = sum_{k>=0} z^k/(2k+1)!, the entire continuation of
/// sinh(sqrt z)/sqrt z. For z < 0 this equals sin(sqrt -z)/sqrt -z.
///
/// S(0) = 1 and S is positive for z > -pi^2; the density formulas feed it
/// arguments that are nonnegative up to rounding, so tiny negative inputs
/// land on the smooth series branch rather than a branch cut.
pub fn sinhc_sqrt(z: f64) -> f64 {
    if z.abs() <= SINHC_SERIES_THRESHOLD {
        // 2k+1)! grows fast enough that a handful of terms reach 1e-17.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=12u32 {
            let k = f64::from(k);
            term *= z / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else if z > 0.0 {
        let r = z.sqrt();
        r.sinh() / r
    } else {
        let r = (-z).sqrt();
        r.sin() / r
    }
}

/// e^(-alpha) * S(z), computed without forming either factor when both
/// overflow f64: for z above the series threshold the product is evaluated
/// as (e^(sqrt z - alpha) - e^(-sqrt z - alpha)) / (2 sqrt z).
///
/// The density of W needs exactly this combination with alpha ~ tr(W)/phi
/// and sqrt z ~ tr(W)/phi, where the separate factors can exceed e^700.
pub fn exp_scaled_sinhc_sqrt(alpha: f64, z: f64) -> f64 {
    if z > SINHC_SERIES_THRESHOLD {
        let r = z.sqrt();
        ((r - alpha).exp() - (-r - alpha).exp()) / (2.0 * r)
    } else {
        sinhc_sqrt(z) * (-alpha).exp()
    }
}

/// Real exponential integral Ei(x) = -PV int_{-x}^inf e^(-t)/t dt, x != 0.
///
/// Branches: convergent series gamma + ln x + sum x^k/(k k!) for 0 < x <= 40;
/// asymptotic e^x/x sum k!/x^k truncated at its smallest term for x > 40;
/// alternating E1 series for -1 <= x < 0; modified-Lentz continued fraction
/// for E1 for x < -1, with Ei(x) = -E1(-x). Relative accuracy is ~1e-14
/// across [-700, 700] except near the positive zero x ~ 0.372507, where
/// absolute accuracy holds but cancellation caps the relative figure.
pub fn expint_ei(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::DomainError {
            what: format!("Ei argument must be finite, got {x}"),
        });
    }
    if x == 0.0 {
        return Err(Error::DomainError {
            what: "Ei has a logarithmic singularity at 0".into(),
        });
    }
    if x > 0.0 {
        if x <= 40.0 {
            Ok(ei_series_positive(x))
        } else {
            Ok(ei_asymptotic(x))
        }
    } else {
        let z = -x;
        if z <= 1.0 {
            Ok(-e1_series(z))
        } else {
            Ok(-e1_continued_fraction(z))
        }
    }
}

fn ei_series_positive(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..=200u32 {
        let k = f64::from(k);
        term *= x / k;
        let add = term / k;
        sum += add;
        if add < 1e-17 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

fn ei_asymptotic(x: f64) -> f64 {
    (x.exp() / x) * ei_asymptotic_sum(x)
}

/// sum_k k!/x^k truncated at its smallest term; Ei(x) ~ e^x/x times this.
fn ei_asymptotic_sum(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=100u32 {
        let next = term * f64::from(k) / x;
        if next >= term {
            // divergent tail reached; the smallest-term truncation error is
            // ~sqrt(2 pi x) e^(-x), far below f64 resolution for x > 40
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// e^(-y) * Ei(y). Finite for every finite nonzero y, unlike the factors:
/// Ei(y) overflows past y ~ 716 and e^(-y) past y ~ -709. The CDF of the
/// maximum eigenvalue multiplies Ei by exponentials of opposite sign and
/// needs this combination when the variances are strongly separated.
pub fn expint_ei_scaled(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::DomainError {
            what: format!("Ei argument must be finite, got {y}"),
        });
    }
    if y == 0.0 {
        return Err(Error::DomainError {
            what: "Ei has a logarithmic singularity at 0".into(),
        });
    }
    if y > 40.0 {
        Ok(ei_asymptotic_sum(y) / y)
    } else if y >= -1.0 {
        // both factors are representable here
        Ok(expint_ei(y)? * (-y).exp())
    } else {
        // e^z E1(z) is exactly the Lentz continued-fraction value
        Ok(-e1_continued_fraction_scaled(-y))
    }
}

/// E1(z) for 0 < z <= 1 via -gamma - ln z - sum (-z)^k/(k k!).
fn e1_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..=80u32 {
        let k = f64::from(k);
        term *= -z / k;
        let add = -term / k;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() + 1e-320 {
            break;
        }
    }
    -EULER_GAMMA - z.ln() + sum
}

/// E1(z) for z > 1 via the continued fraction
/// e^(-z) / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))), evaluated with the
/// modified Lentz algorithm.
fn e1_continued_fraction(z: f64) -> f64 {
    e1_continued_fraction_scaled(z) * (-z).exp()
}

/// e^z E1(z), the bare Lentz value, finite for all z > 1.
fn e1_continued_fraction_scaled(z: f64) -> f64 {
    let mut b = z + 1.0;
    let mut c = 1e308;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=200u32 {
        let a = -f64::from(i) * f64::from(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// g(x) = Ei((1/phi3 - 1/phi2) x) - Ei((1/phi3 - 1/phi1) x) for x > 0.
///
/// This is the primitive that the maximum-eigenvalue CDF and the partial
/// closed-form eigenvalue density are built from. Requires phi3 distinct
/// from both phi1 and phi2 (and phi1 from phi2) so neither Ei argument
/// collapses to the singularity at 0.
pub fn g_func(x: f64, p: &PartialProfile) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError {
            what: format!("g is defined for x > 0, got {x}"),
        });
    }
    p.check_all_distinct()?;
    let c2 = 1.0 / p.phi3() - 1.0 / p.phi2();
    let c1 = 1.0 / p.phi3() - 1.0 / p.phi1();
    Ok(expint_ei(c2 * x)? - expint_ei(c1 * x)?)
}
