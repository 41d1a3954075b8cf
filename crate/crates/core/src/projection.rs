//! Euclidean projection onto the set of non-negative vectors with a
//! prescribed L1 norm and L2 norm.
//!
//! The operator first moves `x` onto the hyperplane `sum(s) = L1`, then
//! moves radially outward from the centre of the hypersphere `|s|_2 = L2`
//! restricted to that hyperplane. Any entries that come out negative are
//! pinned at zero and the procedure repeats on the remaining entries. Every
//! pass either returns or grows the zero set, so at most `n` passes are made.

use crate::error::{Error, Result};
use crate::sparseness::{l1_for_sparseness, norms};

/// Relative slack inside which a slightly infeasible norm pair is clamped
/// onto the feasible boundary.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Relative slack inside which a negative discriminant is treated as a
/// tangency.
const DISCRIMINANT_SLACK: f64 = 1e-12;

/// Norm constraints for a projection.
///
/// A non-negative `n`-vector with L1 norm `l1` and L2 norm `l2` exists iff
/// `l2 <= l1 <= sqrt(n) * l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionTarget {
    l1: f64,
    l2: f64,
    dimension: usize,
}

impl ProjectionTarget {
    pub fn new(l1: f64, l2: f64, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidDimension(format!(
                "projection needs dimension >= 2, got {dimension}"
            )));
        }
        if !(l1 > 0.0 && l1.is_finite()) || !(l2 > 0.0 && l2.is_finite()) {
            return Err(Error::Infeasible(format!(
                "norms must be positive and finite, got L1 = {l1}, L2 = {l2}"
            )));
        }
        let lo = l2;
        let hi = (dimension as f64).sqrt() * l2;
        let l1 = if l1 < lo {
            if lo - l1 > FEASIBILITY_SLACK * lo {
                return Err(Error::Infeasible(format!(
                    "L1 = {l1} is below L2 = {l2}"
                )));
            }
            lo
        } else if l1 > hi {
            if l1 - hi > FEASIBILITY_SLACK * hi {
                return Err(Error::Infeasible(format!(
                    "L1 = {l1} exceeds sqrt({dimension}) * L2 = {hi}"
                )));
            }
            hi
        } else {
            l1
        };
        Ok(ProjectionTarget { l1, l2, dimension })
    }

    /// Target with L2 norm `l2` and the L1 norm giving sparseness `sparseness`.
    pub fn from_sparseness(sparseness: f64, l2: f64, dimension: usize) -> Result<Self> {
        let l1 = l1_for_sparseness(sparseness, l2, dimension)?;
        Self::new(l1, l2, dimension)
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Bookkeeping from one call to [`project_nonneg`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectionTrace {
    /// Number of radial solves performed; 1 when the first pass succeeds.
    pub iterations: usize,
    /// Size of the zero set at the start of each pass.
    pub zero_set_sizes: Vec<usize>,
}

/// Closest non-negative vector to `x` with the L1 and L2 norms of `target`.
///
/// `x` may contain negative entries. When several points are equally close
/// the result is deterministic but otherwise unspecified.
///
/// ```
/// use sparse_nmf::projection::{project_nonneg, ProjectionTarget};
///
/// let target = ProjectionTarget::new(1.0, 1.0, 2).unwrap();
/// let (s, trace) = project_nonneg(&[0.8, 0.2], &target).unwrap();
/// assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12);
/// assert_eq!(trace.iterations, 1);
/// ```
pub fn project_nonneg(x: &[f64], target: &ProjectionTarget) -> Result<(Vec<f64>, ProjectionTrace)> {
    let mut s = x.to_vec();
    let trace = project_nonneg_in_place(&mut s, target)?;
    Ok((s, trace))
}

/// In-place form of [`project_nonneg`]; `s` holds `x` on entry and the
/// projection on return.
pub fn project_nonneg_in_place(s: &mut [f64], target: &ProjectionTarget) -> Result<ProjectionTrace> {
    let n = s.len();
    if n != target.dimension {
        return Err(Error::DimensionMismatch {
            context: "projection",
            expected: format!("vector of length {}", target.dimension),
            found: format!("{n}"),
        });
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in projection input".into()));
    }
    let l1 = target.l1;
    let l2_sq = target.l2 * target.l2;

    let shift = (l1 - s.iter().sum::<f64>()) / n as f64;
    s.iter_mut().for_each(|v| *v += shift);

    let mut zero = vec![false; n];
    let mut zero_count = 0usize;
    let mut trace = ProjectionTrace::default();
    // Below this, s - m is rounding noise and carries no direction.
    let degenerate = {
        let t = n as f64 * f64::EPSILON * l1;
        t * t
    };
    // Entries this close below zero are rounding error and are snapped to 0.
    let snap = 16.0 * f64::EPSILON * target.l2;

    loop {
        trace.iterations += 1;
        trace.zero_set_sizes.push(zero_count);

        let free = (n - zero_count) as f64;
        let mid = l1 / free;

        // Quadratic |m + alpha (s - m)|^2 = L2^2 in alpha.
        let mut a = 0.0;
        let mut b = 0.0;
        for (v, _) in s.iter().zip(&zero).filter(|(_, z)| !**z) {
            let d = v - mid;
            a += d * d;
            b += d;
        }
        b *= 2.0 * mid;
        let c = free * mid * mid - l2_sq;

        if a <= degenerate {
            // s sits on the centre of the sphere, every direction is equally
            // close. Step towards the first free coordinate.
            if c.abs() <= FEASIBILITY_SLACK * l2_sq {
                fill_free(s, &zero, |_| mid);
                return Ok(trace);
            }
            if zero_count + 1 == n {
                return Err(Error::Numerical(format!(
                    "single free entry cannot reach L2 = {} with L1 = {l1}",
                    target.l2
                )));
            }
            let first = zero.iter().position(|z| !z).expect("free set is never empty");
            let inv = 1.0 / free;
            fill_free(s, &zero, |i| if i == first { mid + 1.0 - inv } else { mid - inv });
            a = 1.0 - inv;
            b = 0.0;
        }

        let mut disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            let scale = b * b + (4.0 * a * c).abs();
            if disc < -DISCRIMINANT_SLACK * scale {
                return Err(Error::Numerical(format!(
                    "no real radial step (discriminant {disc:e}) with {zero_count} zeroed entries"
                )));
            }
            disc = 0.0;
        }
        let alpha = (-b + disc.sqrt()) / (2.0 * a);
        if !(alpha >= 0.0) {
            return Err(Error::Numerical(format!("negative radial step {alpha:e}")));
        }

        let mut any_negative = false;
        for (v, _) in s.iter_mut().zip(&zero).filter(|(_, z)| !**z) {
            *v = mid + alpha * (*v - mid);
            if *v < 0.0 {
                if *v >= -snap {
                    *v = 0.0;
                } else {
                    any_negative = true;
                }
            }
        }
        if !any_negative {
            return Ok(trace);
        }

        for (v, z) in s.iter_mut().zip(zero.iter_mut()) {
            if !*z && *v < 0.0 {
                *z = true;
                *v = 0.0;
                zero_count += 1;
            }
        }
        let free = (n - zero_count) as f64;
        let excess = (s.iter().sum::<f64>() - l1) / free;
        for (v, _) in s.iter_mut().zip(&zero).filter(|(_, z)| !**z) {
            *v -= excess;
        }
    }
}

fn fill_free(s: &mut [f64], zero: &[bool], mut value: impl FnMut(usize) -> f64) {
    for (i, (v, _)) in s.iter_mut().zip(zero).enumerate().filter(|(_, (_, z))| !**z) {
        *v = value(i);
    }
}

/// Projection without a sign restriction.
///
/// The closest vector with the given norms keeps the sign of each entry of
/// `x`, so the problem reduces to projecting `|x|` and restoring the signs.
pub fn project_signed(x: &[f64], target: &ProjectionTarget) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    project_nonneg_in_place(&mut s, target)?;
    for (v, orig) in s.iter_mut().zip(x) {
        if *orig < 0.0 {
            *v = -*v;
        }
    }
    Ok(s)
}

/// L1 and L2 norms of a vector, for checking projection output.
pub fn l1_l2(x: &[f64]) -> (f64, f64) {
    let (l1, sq) = norms(x);
    (l1, sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparseness::sparseness;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn feasible_input_is_unchanged() {
        let x = [0.6, 0.4, 0.2];
        let t = ProjectionTarget::new(1.2, 0.56f64.sqrt(), 3).unwrap();
        let (s, trace) = project_nonneg(&x, &t).unwrap();
        assert!(close(&s, &x, 1e-12), "{s:?}");
        assert_eq!(trace.iterations, 1);
    }

    #[test]
    fn two_dimensional_spike() {
        // m = (0.5, 0.5); 0.5 + 0.18 alpha^2 = 1 gives alpha = 5/3 and s = (1, 0).
        let t = ProjectionTarget::new(1.0, 1.0, 2).unwrap();
        let (s, trace) = project_nonneg(&[0.8, 0.2], &t).unwrap();
        assert!(close(&s, &[1.0, 0.0], 1e-12), "{s:?}");
        assert_eq!(trace.iterations, 1);
        assert_eq!(trace.zero_set_sizes, vec![0]);
    }

    #[test]
    fn zero_set_iteration_with_tie() {
        // First pass gives (2/3, 2/3, -1/3); after zeroing the third entry the
        // remaining pair sits on the centre and the tie resolves to the first.
        let t = ProjectionTarget::new(1.0, 1.0, 3).unwrap();
        let (s, trace) = project_nonneg(&[1.0, 1.0, -2.0], &t).unwrap();
        assert!(close(&s, &[1.0, 0.0, 0.0], 1e-12), "{s:?}");
        assert_eq!(trace.iterations, 2);
        assert_eq!(trace.zero_set_sizes, vec![0, 1]);
    }

    #[test]
    fn symmetric_tie_is_deterministic() {
        let t = ProjectionTarget::new(1.0, 1.0, 2).unwrap();
        let (a, _) = project_nonneg(&[0.5, 0.5], &t).unwrap();
        let (b, _) = project_nonneg(&[0.5, 0.5], &t).unwrap();
        assert_eq!(a, b);
        assert!(close(&a, &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn zero_input_is_allowed() {
        let t = ProjectionTarget::from_sparseness(0.5, 1.0, 6).unwrap();
        let (s, _) = project_nonneg(&[0.0; 6], &t).unwrap();
        let (l1, l2) = l1_l2(&s);
        assert!((l1 - t.l1()).abs() < 1e-12 && (l2 - 1.0).abs() < 1e-12);
        assert!(s.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn zero_sparseness_gives_constant_vector() {
        let t = ProjectionTarget::from_sparseness(0.0, 2.0, 4).unwrap();
        let (s, _) = project_nonneg(&[0.1, 3.0, 0.0, 0.7], &t).unwrap();
        assert!(close(&s, &[1.0; 4], 1e-12), "{s:?}");
    }

    #[test]
    fn full_sparseness_gives_spike_at_largest_entry() {
        let t = ProjectionTarget::from_sparseness(1.0, 2.0, 5).unwrap();
        let (s, trace) = project_nonneg(&[0.1, 0.3, 0.9, 0.2, 0.4], &t).unwrap();
        assert!(close(&s, &[0.0, 0.0, 2.0, 0.0, 0.0], 1e-12), "{s:?}");
        assert!(trace.iterations <= 5);
    }

    #[test]
    fn signed_projection_restores_signs() {
        let t = ProjectionTarget::new(1.0, 1.0, 2).unwrap();
        let s = project_signed(&[-0.8, 0.2], &t).unwrap();
        assert!(close(&s, &[-1.0, 0.0], 1e-12), "{s:?}");

        let x = [0.3, 0.1, 0.7, 0.2];
        let t = ProjectionTarget::from_sparseness(0.6, 1.0, 4).unwrap();
        assert_eq!(project_signed(&x, &t).unwrap(), project_nonneg(&x, &t).unwrap().0);
    }

    #[test]
    fn signed_projection_preserves_sparseness() {
        let x = [-0.3, 0.1, -0.7, 0.2, 0.0];
        let t = ProjectionTarget::from_sparseness(0.7, 1.5, 5).unwrap();
        let signed = project_signed(&x, &t).unwrap();
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let (nonneg, _) = project_nonneg(&abs, &t).unwrap();
        assert!((sparseness(&signed).unwrap() - sparseness(&nonneg).unwrap()).abs() < 1e-12);
        assert!(signed[4] >= 0.0);
    }

    #[test]
    fn target_feasibility() {
        assert!(matches!(ProjectionTarget::new(0.5, 1.0, 4), Err(Error::Infeasible(_))));
        assert!(matches!(ProjectionTarget::new(2.5, 1.0, 4), Err(Error::Infeasible(_))));
        assert!(ProjectionTarget::new(1.0, 1.0, 1).is_err());
        assert!(ProjectionTarget::new(1.0, 0.0, 3).is_err());
        // Within slack: clamped onto the boundary.
        let t = ProjectionTarget::new(2.0 * (1.0 + 1e-14), 1.0, 4).unwrap();
        assert_eq!(t.l1(), 2.0);
        let t = ProjectionTarget::new(1.0 - 1e-14, 1.0, 4).unwrap();
        assert_eq!(t.l1(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let t = ProjectionTarget::new(1.0, 1.0, 3).unwrap();
        assert!(matches!(
            project_nonneg(&[1.0, 2.0], &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
