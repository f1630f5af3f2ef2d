//! Variance profiles: the 2x2 matrix of per-entry channel variances, the
//! derived constants every density formula consumes, and classification into
//! the symmetric / partially-asymmetric / general regimes.

use crate::error::Error;
use crate::Result;

/// Relative gap below which two parameters of a closed form are treated as
/// coincident and the formula refuses to evaluate.
pub const DISTINCT_REL_TOL: f64 = 1e-9;

/// Default relative tolerance for row-flatness classification.
pub const CLASSIFY_REL_TOL: f64 = 1e-12;

/// Per-entry variances phi[i][j] = E|h_ij|^2 of the 2x2 channel, all
/// strictly positive, together with the constants derived from them:
/// k_const = prod 1/phi_ij, s_i = 1/phi_i1 + 1/phi_i2 and
/// eps_i = 1/phi_i1 - 1/phi_i2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceProfile {
    phi: [[f64; 2]; 2],
    k_const: f64,
    s: [f64; 2],
    eps: [f64; 2],
}

impl VarianceProfile {
    pub fn new(phi11: f64, phi12: f64, phi21: f64, phi22: f64) -> Result<Self> {
        Self::from_rows([[phi11, phi12], [phi21, phi22]])
    }

    pub fn from_rows(phi: [[f64; 2]; 2]) -> Result<Self> {
        for row in &phi {
            for &v in row {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositiveVariance { value: v });
                }
            }
        }
        let inv = [
            [1.0 / phi[0][0], 1.0 / phi[0][1]],
            [1.0 / phi[1][0], 1.0 / phi[1][1]],
        ];
        Ok(Self {
            phi,
            k_const: inv[0][0] * inv[0][1] * inv[1][0] * inv[1][1],
            s: [inv[0][0] + inv[0][1], inv[1][0] + inv[1][1]],
            eps: [inv[0][0] - inv[0][1], inv[1][0] - inv[1][1]],
        })
    }

    /// Profile from a matrix of propagation distances under a power-law
    /// pathloss: phi_ij = d_ij^(-pathloss_exp).
    pub fn from_distances(d: [[f64; 2]; 2], pathloss_exp: f64) -> Result<Self> {
        if !pathloss_exp.is_finite() {
            return Err(Error::DomainError {
                what: format!("pathloss exponent must be finite, got {pathloss_exp}"),
            });
        }
        let mut phi = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                if !(d[i][j] > 0.0) || !d[i][j].is_finite() {
                    return Err(Error::NonPositiveVariance { value: d[i][j] });
                }
                phi[i][j] = d[i][j].powf(-pathloss_exp);
            }
        }
        Self::from_rows(phi)
    }

    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.phi[i][j]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.phi
    }

    pub fn k_const(&self) -> f64 {
        self.k_const
    }

    pub fn s1(&self) -> f64 {
        self.s[0]
    }

    pub fn s2(&self) -> f64 {
        self.s[1]
    }

    pub fn eps1(&self) -> f64 {
        self.eps[0]
    }

    pub fn eps2(&self) -> f64 {
        self.eps[1]
    }

    /// Sum of the four variances.
    pub fn total(&self) -> f64 {
        self.phi.iter().flatten().sum()
    }

    /// Smallest of the four variances; sets the width of the boundary layer
    /// the eigenvalue density develops near 0.
    pub fn min_phi(&self) -> f64 {
        self.phi
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Swap phi12 and phi21. The spectrum of W = H H† matches that of H† H,
    /// whose profile is the transpose, so eigenvalue statistics are
    /// invariant under this operation.
    pub fn transpose(&self) -> Self {
        Self::from_rows([
            [self.phi[0][0], self.phi[1][0]],
            [self.phi[0][1], self.phi[1][1]],
        ])
        .expect("transpose of a valid profile is valid")
    }

    /// Rescale all four variances by a common factor so they sum to `total`.
    pub fn normalize_total(&self, total: f64) -> Result<Self> {
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NonPositiveVariance { value: total });
        }
        let factor = total / self.total();
        Self::from_rows(self.phi.map(|row| row.map(|v| v * factor)))
    }

    /// Classify with the default flatness tolerance.
    pub fn classify(&self) -> ProfileClass {
        self.classify_with_tol(CLASSIFY_REL_TOL)
    }

    /// Row i is flat when |eps_i| <= tol * s_i. Both rows flat means the
    /// density collapses to the classical uncorrelated-variance form;
    /// exactly one flat row admits the closed-form CDFs. When row 1 is the
    /// flat one the profile is row-swapped into canonical form first
    /// (row swap permutes entries of H, leaving the law of the spectrum
    /// unchanged).
    pub fn classify_with_tol(&self, tol: f64) -> ProfileClass {
        let flat = [
            self.eps[0].abs() <= tol * self.s[0],
            self.eps[1].abs() <= tol * self.s[1],
        ];
        match flat {
            [true, true] => ProfileClass::Symmetric,
            [false, true] => ProfileClass::PartiallyAsymmetric {
                partial: self.extract_partial(0, 1),
                flat_row: FlatRow::Second,
            },
            [true, false] => ProfileClass::PartiallyAsymmetric {
                partial: self.extract_partial(1, 0),
                flat_row: FlatRow::First,
            },
            [false, false] => ProfileClass::General,
        }
    }

    fn extract_partial(&self, varied: usize, flat: usize) -> PartialProfile {
        // mean absorbs roundoff-level disagreement between the flat entries
        let phi3 = 0.5 * (self.phi[flat][0] + self.phi[flat][1]);
        PartialProfile::new(self.phi[varied][0], self.phi[varied][1], phi3)
            .expect("entries of a valid profile are positive")
    }
}

/// Which row of the original profile carried the equal variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatRow {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileClass {
    /// All four variances effectively unconstrained.
    General,
    /// Exactly one row flat: closed-form eigenvalue CDFs apply.
    PartiallyAsymmetric {
        partial: PartialProfile,
        flat_row: FlatRow,
    },
    /// Both rows flat: classical uncorrelated-variance special case.
    Symmetric,
}

/// Three-parameter profile ((phi1, phi2), (phi3, phi3)) with phi1 <= phi2.
/// The constructor sorts the first two arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialProfile {
    phi1: f64,
    phi2: f64,
    phi3: f64,
}

impl PartialProfile {
    pub fn new(phi_a: f64, phi_b: f64, phi3: f64) -> Result<Self> {
        for v in [phi_a, phi_b, phi3] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveVariance { value: v });
            }
        }
        let (phi1, phi2) = if phi_a <= phi_b {
            (phi_a, phi_b)
        } else {
            (phi_b, phi_a)
        };
        Ok(Self { phi1, phi2, phi3 })
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn phi3(&self) -> f64 {
        self.phi3
    }

    /// The full 2x2 profile this parameterizes.
    pub fn embed(&self) -> VarianceProfile {
        VarianceProfile::new(self.phi1, self.phi2, self.phi3, self.phi3)
            .expect("positive entries")
    }

    fn rel_gap(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.max(b)
    }

    /// Err unless phi1 and phi2 are separated by more than the distinctness
    /// tolerance. Needed by every formula with a 1/(phi2 - phi1) prefactor.
    pub fn check_phi12_distinct(&self) -> Result<()> {
        if Self::rel_gap(self.phi1, self.phi2) <= DISTINCT_REL_TOL {
            return Err(Error::DegenerateParameters {
                what: format!("phi1 = {} and phi2 = {} coincide", self.phi1, self.phi2),
            });
        }
        Ok(())
    }

    /// Err unless all three parameters are pairwise distinct. Needed by the
    /// g-based expressions, whose Ei arguments vanish when phi3 hits phi1 or
    /// phi2.
    pub fn check_all_distinct(&self) -> Result<()> {
        self.check_phi12_distinct()?;
        for (name, v) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if Self::rel_gap(v, self.phi3) <= DISTINCT_REL_TOL {
                return Err(Error::DegenerateParameters {
                    what: format!("phi3 = {} coincides with {name} = {v}", self.phi3),
                });
            }
        }
        Ok(())
    }
}
