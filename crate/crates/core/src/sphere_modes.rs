//! Coclosed Hodge-Laplacian eigenvalues on the round sphere `S^{n-1}`.
//!
//! The coclosed `p`-form spectrum is the family
//! `lambda_(m) = (m + p)(n + m - p - 2)`, `m >= 1`, listed without
//! multiplicity. These eigenvalues index the radial problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sphere mode `(p, m)` of `S^{n-1}` together with its eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: u32,
    pub p: u32,
    pub m: u32,
    pub lambda: f64,
}

impl ModeIndex {
    pub fn new(n: u32, p: u32, m: u32) -> Result<Self> {
        let lambda = sphere_eigenvalue(n, p, m)?;
        Ok(Self { n, p, m, lambda })
    }

    /// The exponent `n - 2p - 1` multiplying `h'/h` in the radial equation.
    pub fn weight_exponent(&self) -> i32 {
        self.n as i32 - 2 * self.p as i32 - 1
    }
}

fn check_degree(n: u32, p: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    if p > n - 2 {
        return Err(Error::Domain(format!("form degree p = {p} must satisfy p <= n - 2 = {}", n - 2)));
    }
    Ok(())
}

/// Exact integer value of `(m + p)(n + m - p - 2)`.
pub fn sphere_eigenvalue_exact(n: u32, p: u32, m: u32) -> Result<u64> {
    check_degree(n, p)?;
    if m < 1 {
        return Err(Error::Domain("mode number m must be at least 1".into()));
    }
    let (n, p, m) = (n as u64, p as u64, m as u64);
    Ok((m + p) * (n + m - p - 2))
}

pub fn sphere_eigenvalue(n: u32, p: u32, m: u32) -> Result<f64> {
    sphere_eigenvalue_exact(n, p, m).map(|v| v as f64)
}

/// `lambda_(k+1) / lambda_(k)`, the upper bound for consecutive DtN ratios.
pub fn ratio_bound(n: u32, p: u32, k: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("ratio bound needs n >= 3, got {n}")));
    }
    let lo = sphere_eigenvalue_exact(n, p, k)?;
    let hi = sphere_eigenvalue_exact(n, p, k + 1)?;
    Ok(hi as f64 / lo as f64)
}

/// Dimension of the coclosed eigenspace of a sphere mode, when known.
///
/// Spectra in this crate are counted without multiplicity; a provider lets a
/// caller attach eigenspace dimensions for with-multiplicity orderings.
pub trait MultiplicityProvider: Send + Sync {
    fn multiplicity(&self, n: u32, p: u32, m: u32) -> Option<u64>;
}

/// The default provider: multiplicities are unknown.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoMultiplicity;

impl MultiplicityProvider for NoMultiplicity {
    fn multiplicity(&self, _n: u32, _p: u32, _m: u32) -> Option<u64> {
        None
    }
}
