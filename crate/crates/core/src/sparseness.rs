//! Sparseness measure based on the ratio of the L1 and L2 norms.
//!
//! For a vector `x` of length `n >= 2`
//!
//! ```text
//! sparseness(x) = (sqrt(n) - |x|_1 / |x|_2) / (sqrt(n) - 1)
//! ```
//!
//! which is 1 exactly when a single entry is non-zero and 0 exactly when all
//! entries have the same magnitude.

use crate::error::{Error, Result};

/// Sparseness of `x`, a value in `[0, 1]`.
///
/// Fails for the zero vector and for vectors shorter than two entries.
///
/// ```
/// use sparse_nmf::sparseness::sparseness;
///
/// assert_eq!(sparseness(&[0.0, 0.0, 5.0, 0.0]).unwrap(), 1.0);
/// assert!(sparseness(&[2.0, 2.0, 2.0, 2.0]).unwrap().abs() < 1e-12);
/// ```
pub fn sparseness(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "sparseness needs at least 2 entries, got {n}"
        )));
    }
    // Rescale by the largest magnitude so the squares cannot under- or overflow.
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !peak.is_finite() {
        return Err(Error::Numerical("non-finite entry in vector".into()));
    }
    if peak == 0.0 {
        return Err(Error::ZeroVector);
    }
    let (l1, sq) = x.iter().fold((0.0, 0.0), |(l1, sq), v| {
        let u = v.abs() / peak;
        (l1 + u, sq + u * u)
    });
    let root_n = (n as f64).sqrt();
    let value = (root_n - l1 / sq.sqrt()) / (root_n - 1.0);
    Ok(value.clamp(0.0, 1.0))
}

/// L1 norm that, together with L2 norm `l2`, gives an `n`-vector the
/// sparseness `target`.
///
/// ```
/// use sparse_nmf::sparseness::l1_for_sparseness;
///
/// assert_eq!(l1_for_sparseness(0.5, 1.0, 4).unwrap(), 1.5);
/// ```
pub fn l1_for_sparseness(target: f64, l2: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "sparseness needs at least 2 entries, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Infeasible(format!(
            "sparseness {target} is outside [0, 1]"
        )));
    }
    if !(l2 > 0.0 && l2.is_finite()) {
        return Err(Error::Infeasible(format!("L2 norm must be positive, got {l2}")));
    }
    let root_n = (n as f64).sqrt();
    Ok(l2 * (root_n - target * (root_n - 1.0)))
}

/// L1 and squared-L2 norm in one pass.
pub(crate) fn norms(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((0.0, 0.0), |(l1, sq), v| (l1 + v.abs(), sq + v * v))
}
