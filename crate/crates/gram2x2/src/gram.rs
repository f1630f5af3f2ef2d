//! Channel matrices, their 2x2 Gram matrices, and closed-form eigenvalues.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// A 2x2 complex channel realization H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMatrix {
    h: [[Complex64; 2]; 2],
}

impl ChannelMatrix {
    pub fn new(h: [[Complex64; 2]; 2]) -> Result<Self> {
        for row in &h {
            for &v in row {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::DomainError {
                        what: format!("channel entry {v} is not finite"),
                    });
                }
            }
        }
        Ok(Self { h })
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.h[i][j]
    }
}

/// W = H H†, stored as the diagonal (w1, w2) and the off-diagonal w3 = W_12.
/// Hermitian by construction; positive semidefinite within `psd_tolerance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix2 {
    w1: f64,
    w2: f64,
    w3: Complex64,
}

impl GramMatrix2 {
    /// Absolute determinant tolerance below which `new` rejects the matrix.
    pub fn psd_tolerance(w1: f64, w2: f64) -> f64 {
        1e-12 * (w1 * w2).max(1.0)
    }

    pub fn new(w1: f64, w2: f64, w3: Complex64) -> Result<Self> {
        for v in [w1, w2, w3.re, w3.im] {
            if !v.is_finite() {
                return Err(Error::DomainError {
                    what: format!("Gram entry {v} is not finite"),
                });
            }
        }
        if w1 < 0.0 || w2 < 0.0 {
            return Err(Error::NotPSD {
                det: w1.min(w2),
                tol: 0.0,
            });
        }
        let m = Self { w1, w2, w3 };
        let tol = Self::psd_tolerance(w1, w2);
        if m.det() < -tol {
            return Err(Error::NotPSD { det: m.det(), tol });
        }
        Ok(m)
    }

    /// W = H H†: w1 and w2 are the row norms of H, w3 the inner product of
    /// row 1 with row 2.
    pub fn from_channel(h: &ChannelMatrix) -> Self {
        let w1 = h.entry(0, 0).norm_sqr() + h.entry(0, 1).norm_sqr();
        let w2 = h.entry(1, 0).norm_sqr() + h.entry(1, 1).norm_sqr();
        let w3 = h.entry(0, 0) * h.entry(1, 0).conj() + h.entry(0, 1) * h.entry(1, 1).conj();
        // PSD holds exactly in real arithmetic; rounding can only produce a
        // determinant above -psd_tolerance here
        Self { w1, w2, w3 }
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn w3(&self) -> Complex64 {
        self.w3
    }

    pub fn trace(&self) -> f64 {
        self.w1 + self.w2
    }

    pub fn det(&self) -> f64 {
        self.w1 * self.w2 - self.w3.norm_sqr()
    }

    /// Ordered eigenvalues (t +- sqrt(t^2 - 4d))/2. A discriminant pushed
    /// negative by rounding is clamped to zero (coincident eigenvalues); a
    /// lower eigenvalue within -1e-12 * max(t, 1) of zero is clamped to 0.
    pub fn eigenvalues(&self) -> Result<EigenPair> {
        let t = self.trace();
        let d = self.det();
        let tol = Self::psd_tolerance(self.w1, self.w2);
        if d < -tol {
            return Err(Error::NotPSD { det: d, tol });
        }
        let disc = (t * t - 4.0 * d).max(0.0);
        let r = disc.sqrt();
        let l1 = 0.5 * (t + r);
        let mut l2 = 0.5 * (t - r);
        if l2 < 0.0 {
            if l2 < -1e-12 * t.max(1.0) {
                return Err(Error::NotPSD { det: d, tol });
            }
            l2 = 0.0;
        }
        EigenPair::new(l1, l2)
    }
}

/// Ordered nonnegative eigenvalue pair l1 >= l2 >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    l1: f64,
    l2: f64,
}

impl EigenPair {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !l1.is_finite() || !l2.is_finite() || l1 < l2 || l2 < 0.0 {
            return Err(Error::InvalidEigenOrder { l1, l2 });
        }
        Ok(Self { l1, l2 })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn min(&self) -> f64 {
        self.l2
    }

    pub fn max(&self) -> f64 {
        self.l1
    }
}
