//! Gauss-Legendre quadrature with node-doubling refinement.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;
use crate::Result;

/// Controls for the refining quadrature loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes of the coarsest rule.
    pub nodes: usize,
    /// Number of node doublings allowed before giving up.
    pub refine_max: u32,
    /// Successive estimates must agree to this relative tolerance.
    pub rel_tol: f64,
}

impl QuadratureConfig {
    pub fn new(nodes: usize, refine_max: u32, rel_tol: f64) -> Result<Self> {
        if nodes < 8 {
            return Err(Error::DomainError {
                what: format!("quadrature needs at least 8 nodes, got {nodes}"),
            });
        }
        if refine_max == 0 || !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::DomainError {
                what: format!(
                    "invalid refinement settings: refine_max {refine_max}, rel_tol {rel_tol}"
                ),
            });
        }
        Ok(Self {
            nodes,
            refine_max,
            rel_tol,
        })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            refine_max: 4,
            rel_tol: 1e-10,
        }
    }
}

/// An n-point Gauss-Legendre rule on [-1, 1]. Nodes are roots of the n-th
/// Legendre polynomial, found by Newton iteration on the three-term
/// recurrence; exact for polynomials of degree 2n - 1.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi-style initial guess, accurate enough for Newton
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // evaluate P_n and P_n' at z by upward recurrence
                let mut p0 = 1.0;
                let mut p1 = 0.0;
                for k in 0..n {
                    let kf = k as f64;
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * kf + 1.0) * z * p1 - kf * p2) / (kf + 1.0);
                }
                pp = nf * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            let wi = 2.0 / ((1.0 - z * z) * pp * pp);
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        Self { x, w }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.x
            .iter()
            .zip(&self.w)
            .map(move |(&xi, &wi)| (mid + half * xi, half * wi))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// The doubling ladder of rules [n, 2n, ..., n * 2^refine_max] for a config.
pub fn refinement_rules(cfg: &QuadratureConfig) -> Vec<GaussLegendre> {
    (0..=cfg.refine_max)
        .map(|k| GaussLegendre::new(cfg.nodes << k))
        .collect()
}

type RuleLadders = Mutex<HashMap<(usize, u32), Arc<Vec<GaussLegendre>>>>;

/// Process-wide cache in front of `refinement_rules`: building the largest
/// rule of the default ladder costs milliseconds, evaluating it costs
/// microseconds, so per-call construction would dominate point evaluations.
pub fn cached_refinement_rules(cfg: &QuadratureConfig) -> Arc<Vec<GaussLegendre>> {
    static CACHE: OnceLock<RuleLadders> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (cfg.nodes, cfg.refine_max);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Arc::clone(hit);
    }
    // built outside the lock; a concurrent builder just loses the insert race
    let built = Arc::new(refinement_rules(cfg));
    Arc::clone(cache.lock().unwrap().entry(key).or_insert(built))
}

/// Integrate with a prebuilt rule ladder, returning the first estimate that
/// agrees with its predecessor to rel_tol.
pub fn integrate_refined_with<F: Fn(f64) -> f64>(
    rules: &[GaussLegendre],
    rel_tol: f64,
    a: f64,
    b: f64,
    f: F,
) -> Result<f64> {
    assert!(rules.len() >= 2, "refinement needs at least two rule sizes");
    let mut prev = rules[0].integrate(a, b, &f);
    let mut second_last = prev;
    for rule in &rules[1..] {
        let next = rule.integrate(a, b, &f);
        if (next - prev).abs() <= rel_tol * next.abs() + 1e-300 {
            return Ok(next);
        }
        second_last = prev;
        prev = next;
    }
    Err(Error::QuadratureNoConvergence {
        previous: second_last,
        last: prev,
    })
}

/// One-shot version of `integrate_refined_with`.
pub fn integrate_refined<F: Fn(f64) -> f64>(
    cfg: &QuadratureConfig,
    a: f64,
    b: f64,
    f: F,
) -> Result<f64> {
    let rules = cached_refinement_rules(cfg);
    integrate_refined_with(&rules, cfg.rel_tol, a, b, f)
}
