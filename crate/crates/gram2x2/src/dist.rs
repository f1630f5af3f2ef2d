//! Analytic distributions of the 2x2 Gram matrix: the matrix density, the
//! joint density of the ordered eigenvalues (angular-quadrature form for
//! arbitrary profiles, closed form when one row of the profile is flat),
//! the extreme-eigenvalue CDFs with their small-argument expansions, the
//! inverse minimum-eigenvalue CDF, and a normalization self-check.

use rayon::prelude::*;

use crate::error::Error;
use crate::gram::{EigenPair, GramMatrix2};
use crate::profile::{PartialProfile, VarianceProfile, DISTINCT_REL_TOL};
use crate::quad::{self, GaussLegendre, QuadratureConfig};
use crate::specfun::{exp_scaled_sinhc_sqrt, expint_ei, expint_ei_scaled, g_func};
use crate::Result;

use std::f64::consts::{FRAC_PI_2, PI};

/// Intermediate quantities of the angular integrand at angle kappa.
///
/// With a = cos^2 kappa, b = sin^2 kappa and u = a l1 + b l2,
/// v = b l1 + a l2:
///   nu  = u s1 + v s2
///   eta = (u eps1)^2 + (v eps2)^2 + 2 (a b (l1 - l2)^2 - l1 l2) eps1 eps2
/// eta can be negative when eps1 eps2 < 0, which the sin branch of the
/// sinh-cardinal absorbs.
#[derive(Debug, Clone, Copy)]
pub struct EigIntegrandTerms {
    pub kappa: f64,
    pub a_k: f64,
    pub b_k: f64,
    pub nu: f64,
    pub eta: f64,
}

impl EigIntegrandTerms {
    pub fn new(p: &VarianceProfile, e: &EigenPair, kappa: f64) -> Self {
        let c = kappa.cos();
        let s = kappa.sin();
        let a_k = c * c;
        let b_k = s * s;
        let (l1, l2) = (e.l1(), e.l2());
        let u = a_k * l1 + b_k * l2;
        let v = b_k * l1 + a_k * l2;
        let nu = u * p.s1() + v * p.s2();
        let eta = (u * p.eps1()).powi(2)
            + (v * p.eps2()).powi(2)
            + 2.0 * (a_k * b_k * (l1 - l2).powi(2) - l1 * l2) * p.eps1() * p.eps2();
        Self {
            kappa,
            a_k,
            b_k,
            nu,
            eta,
        }
    }
}

/// Density of W at `w`, with respect to Lebesgue measure on
/// (w1, w2, Re w3, Im w3):
///
///   p(W) = (K/pi) e^(-(w1 s1 + w2 s2)/2) S(Delta/4),
///   Delta = (w1 eps1 - w2 eps2)^2 + 4 |w3|^2 eps1 eps2.
///
/// Delta >= 0 holds in exact arithmetic for every PSD w (when eps1 eps2 < 0,
/// |w3|^2 <= w1 w2 bounds Delta below by (w1 eps1 + w2 eps2)^2); rounding can
/// leave a tiny negative, which lands on the smooth series branch of S.
pub fn matrix_pdf(p: &VarianceProfile, w: &GramMatrix2) -> f64 {
    let delta = (w.w1() * p.eps1() - w.w2() * p.eps2()).powi(2)
        + 4.0 * w.w3().norm_sqr() * p.eps1() * p.eps2();
    let alpha = 0.5 * (w.w1() * p.s1() + w.w2() * p.s2());
    (p.k_const() / PI) * exp_scaled_sinhc_sqrt(alpha, 0.25 * delta)
}

/// `matrix_pdf` specialized to a flat second row (eps2 = 0), where
/// Delta collapses to (w1 eps1)^2.
pub fn matrix_pdf_partial(p: &PartialProfile, w: &GramMatrix2) -> Result<f64> {
    p.check_phi12_distinct()?;
    let (p1, p2, p3) = (p.phi1(), p.phi2(), p.phi3());
    let k = 1.0 / (p1 * p2 * p3 * p3);
    let s1 = 1.0 / p1 + 1.0 / p2;
    let eps1 = 1.0 / p1 - 1.0 / p2;
    let alpha = 0.5 * (w.w1() * s1 + w.w2() * 2.0 / p3);
    let half_u = 0.5 * w.w1() * eps1;
    Ok((k / PI) * exp_scaled_sinhc_sqrt(alpha, half_u * half_u))
}

/// Joint density of the ordered eigenvalues (l1 >= l2) of W:
///
///   2 K (l1 - l2)^2 int_0^{pi/2} e^(-nu/2) (1/2) S(eta/4) sin(2 kappa) dkappa
///
/// evaluated by Gauss-Legendre quadrature with node doubling until two
/// successive estimates agree to `q.rel_tol`.
pub fn eig_pdf_general(p: &VarianceProfile, e: &EigenPair, q: &QuadratureConfig) -> Result<f64> {
    let rules = quad::cached_refinement_rules(q);
    eig_pdf_general_with_rules(p, e, &rules, q.rel_tol)
}

/// `eig_pdf_general` against a prebuilt rule ladder; the hot path for the
/// normalization scan, which reuses one ladder across every grid point.
pub fn eig_pdf_general_with_rules(
    p: &VarianceProfile,
    e: &EigenPair,
    rules: &[GaussLegendre],
    rel_tol: f64,
) -> Result<f64> {
    let (l1, l2) = (e.l1(), e.l2());
    if l1 == l2 {
        return Ok(0.0);
    }
    if l2 <= 0.0 {
        return Err(Error::InvalidEigenOrder { l1, l2 });
    }
    let prefactor = 2.0 * p.k_const() * (l1 - l2).powi(2);
    let integral = quad::integrate_refined_with(rules, rel_tol, 0.0, FRAC_PI_2, |kappa| {
        let t = EigIntegrandTerms::new(p, e, kappa);
        exp_scaled_sinhc_sqrt(0.5 * t.nu, 0.25 * t.eta) * 0.5 * (2.0 * kappa).sin()
    })?;
    Ok(prefactor * integral)
}

/// Closed form of the joint eigenvalue density when the second profile row
/// is flat:
///
///   e^(-(l1 + l2)/phi3) / ((phi2 - phi1) phi3^2) (l2 - l1) (g(l2) - g(l1)).
///
/// Both factors of the product are negative for l1 > l2 (g is increasing),
/// so the value is nonnegative.
pub fn eig_pdf_partial(p: &PartialProfile, e: &EigenPair) -> Result<f64> {
    p.check_all_distinct()?;
    let (l1, l2) = (e.l1(), e.l2());
    if l1 == l2 {
        return Ok(0.0);
    }
    if l2 <= 0.0 {
        return Err(Error::InvalidEigenOrder { l1, l2 });
    }
    let p3 = p.phi3();
    let pref = (-(l1 + l2) / p3).exp() / ((p.phi2() - p.phi1()) * p3 * p3);
    let v = pref * (l2 - l1) * (g_func(l2, p)? - g_func(l1, p)?);
    // rounding in the g difference can leave a negative at the 1e-16 scale
    Ok(v.max(0.0))
}

/// CDF of the minimum eigenvalue:
///
///   F(x) = 1 - e^(-x/phi3)/(phi2 - phi1) (phi2 e^(-x/phi2) - phi1 e^(-x/phi1)
///          + x (Ei(-x/phi2) - Ei(-x/phi1)))
///
/// The subtraction from 1 caps absolute accuracy at ~1 ulp of 1, so relative
/// accuracy degrades once F drops below ~1e-8; `cdf_min_small_x` covers that
/// regime.
pub fn cdf_min(p: &PartialProfile, x: f64) -> Result<f64> {
    p.check_all_distinct()?;
    check_cdf_arg(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let (p1, p2, p3) = (p.phi1(), p.phi2(), p.phi3());
    let term = p2 * (-x / p2).exp() - p1 * (-x / p1).exp()
        + x * (expint_ei(-x / p2)? - expint_ei(-x / p1)?);
    let f = 1.0 - (-x / p3).exp() / (p2 - p1) * term;
    Ok(f.clamp(0.0, 1.0))
}

/// CDF of the maximum eigenvalue:
///
///   F(x) = 1/(phi2 - phi1) [ (1 - e^(-x/phi3))(phi2 (1 - e^(-x/phi2))
///            - phi1 (1 - e^(-x/phi1)))
///          + x e^(-x/phi3) (-g(x) + Ei(-x/phi2) - Ei(-x/phi1)
///            + ln |(phi3 - phi2)/(phi3 - phi1)|) ]
///
/// The e^(-x/phi3) g(x) product is evaluated through the scaled exponential
/// integral so strongly separated variances (phi3 far below phi1, phi2)
/// cannot overflow Ei.
pub fn cdf_max(p: &PartialProfile, x: f64) -> Result<f64> {
    p.check_all_distinct()?;
    check_cdf_arg(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let (p1, p2, p3) = (p.phi1(), p.phi2(), p.phi3());
    let e3 = (-x / p3).exp();
    let t1 = (1.0 - e3) * (p2 * (1.0 - (-x / p2).exp()) - p1 * (1.0 - (-x / p1).exp()));
    // x e^(-x/phi3) g(x) regrouped termwise: e^(-x/phi3) Ei((1/phi3-1/phi2)x)
    // equals e^(-x/phi2) [e^(-y) Ei(y)] at y = (1/phi3-1/phi2)x
    let c2 = 1.0 / p3 - 1.0 / p2;
    let c1 = 1.0 / p3 - 1.0 / p1;
    let scaled_g = (-x / p2).exp() * expint_ei_scaled(c2 * x)?
        - (-x / p1).exp() * expint_ei_scaled(c1 * x)?;
    let log_term = ((p3 - p2) / (p3 - p1)).abs().ln();
    let t2 = x
        * (-scaled_g + e3 * (expint_ei(-x / p2)? - expint_ei(-x / p1)? + log_term));
    Ok(((t1 + t2) / (p2 - p1)).clamp(0.0, 1.0))
}

fn check_cdf_arg(x: f64) -> Result<()> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::DomainError {
            what: format!("eigenvalue CDF argument must be finite and >= 0, got {x}"),
        });
    }
    Ok(())
}

/// Slope of the minimum-eigenvalue CDF at 0:
///
///   a = 1/phi3 + (ln phi2 - ln phi1)/(phi2 - phi1),
///
/// with the phi1 = phi2 limit 1/phi3 + 1/phi1.
pub fn a_factor(p: &PartialProfile) -> f64 {
    let (p1, p2, p3) = (p.phi1(), p.phi2(), p.phi3());
    if p2 - p1 <= DISTINCT_REL_TOL * p2 {
        1.0 / p3 + 1.0 / p1
    } else {
        1.0 / p3 + (p2.ln() - p1.ln()) / (p2 - p1)
    }
}

/// First-order expansion of `cdf_min` near 0: a(phi) x. Validity range is
/// the caller's concern.
pub fn cdf_min_small_x(p: &PartialProfile, x: f64) -> f64 {
    a_factor(p) * x
}

/// Leading term of `cdf_max` near 0: x^4 / (12 phi1 phi2 phi3^2).
pub fn cdf_max_small_x(p: &PartialProfile, x: f64) -> f64 {
    x.powi(4) / (12.0 * p.phi1() * p.phi2() * p.phi3() * p.phi3())
}

/// Inverse of `cdf_min` on (0, 1) by bracketed bisection; the CDF is
/// continuous and strictly increasing, so the root is unique.
pub fn inv_cdf_min(p: &PartialProfile, prob: f64) -> Result<f64> {
    p.check_all_distinct()?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::DomainError {
            what: format!("quantile level must lie in (0, 1), got {prob}"),
        });
    }
    // linearized guess, then double until the bracket closes
    let mut hi = (prob / a_factor(p)).max(1e-12);
    let mut lo = 0.0;
    while cdf_min(p, hi)? < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf_min(p, mid)? < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mass of `eig_pdf_general` over {l1 > l2 > 0}; a correct implementation
/// returns 1 up to quadrature error. The integration domain is truncated at
/// L = 2 ln(1e16) / min(s1, s2), outside which the integrand envelope is
/// below 1e-16, and panels are graded geometrically from width min_phi/4 so
/// the boundary layer a small variance creates near 0 is resolved.
pub fn eig_pdf_normalization(p: &VarianceProfile, q: &QuadratureConfig) -> Result<f64> {
    let cutoff = 2.0 * (16.0 * std::f64::consts::LN_10) / p.s1().min(p.s2());
    let cuts = graded_breakpoints(p.min_phi() / 4.0, cutoff / 24.0, cutoff);
    let panel_rule = GaussLegendre::new(16);
    let rules = quad::cached_refinement_rules(q);

    let outer: Vec<(f64, f64)> = cuts
        .windows(2)
        .flat_map(|ab| panel_rule.mapped(ab[0], ab[1]).collect::<Vec<_>>())
        .collect();

    let contributions: Vec<f64> = outer
        .par_iter()
        .map(|&(l1, w1)| -> Result<f64> {
            let mut acc = 0.0;
            for ab in cuts.windows(2) {
                if ab[0] >= l1 {
                    break;
                }
                let b = ab[1].min(l1);
                for (l2, w2) in panel_rule.mapped(ab[0], b) {
                    let e = EigenPair::new(l1, l2).expect("nodes are interior");
                    acc += w2 * eig_pdf_general_with_rules(p, &e, &rules, q.rel_tol)?;
                }
            }
            Ok(w1 * acc)
        })
        .collect::<Result<Vec<f64>>>()?;

    // sequential sum in node order keeps the result independent of the
    // worker count
    Ok(contributions.iter().sum())
}

/// 0 = c_0 < c_1 < ... breakpoints: first width w0, doubling up to `cap`,
/// ending exactly at `end`.
fn graded_breakpoints(w0: f64, cap: f64, end: f64) -> Vec<f64> {
    let mut cuts = vec![0.0];
    let mut x = 0.0;
    let mut w = w0.min(cap);
    while x < end {
        x = (x + w).min(end);
        cuts.push(x);
        w = (2.0 * w).min(cap);
    }
    cuts
}

/// Nudge phi3 multiplicatively (factor 1 + 1e-7) until it clears the
/// distinctness tolerance against phi1 and phi2. A phi1 = phi2 coincidence
/// is not repairable this way and is returned unchanged for the caller's
/// guards to reject.
pub fn perturb_distinct(p: &PartialProfile) -> PartialProfile {
    if p.check_phi12_distinct().is_err() {
        return *p;
    }
    let mut out = *p;
    for _ in 0..8 {
        if out.check_all_distinct().is_ok() {
            break;
        }
        out = PartialProfile::new(out.phi1(), out.phi2(), out.phi3() * (1.0 + 1e-7))
            .expect("positive stays positive");
    }
    out
}
