//! Reference computations that do not go through the library's own
//! projection or gradient code.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norms(x: &[f64]) -> (f64, f64) {
    (
        x.iter().map(|v| v.abs()).sum(),
        x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    )
}

/// Closest feasible point found by enumerating the feasible set.
///
/// For `n = 2` the set is at most two points, enumerated exactly. For
/// `n = 3` it is a circle in the plane `sum(s) = l1`; the circle is sampled
/// every `step` radians and the points where one coordinate vanishes (the
/// arc endpoints) are added analytically.
///
/// Returns the best point, its distance to `x` and the arc-length spacing of
/// the samples.
pub fn brute_force_closest(x: &[f64], l1: f64, l2: f64, step: f64) -> (Vec<f64>, f64, f64) {
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut spacing = 0.0;
    match x.len() {
        2 => {
            let disc = 2.0 * l2 * l2 - l1 * l1;
            let r = disc.max(0.0).sqrt();
            let (a, b) = ((l1 + r) / 2.0, (l1 - r) / 2.0);
            candidates.push(vec![a, b]);
            candidates.push(vec![b, a]);
        }
        3 => {
            let c = l1 / 3.0;
            let radius = (l2 * l2 - l1 * l1 / 3.0).max(0.0).sqrt();
            let u = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
            let v = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
            let steps = (2.0 * std::f64::consts::PI / step).ceil() as usize;
            for k in 0..steps {
                let theta = k as f64 * step;
                let (sin, cos) = theta.sin_cos();
                candidates.push((0..3).map(|i| c + radius * (cos * u[i] + sin * v[i])).collect());
            }
            spacing = radius * step;
            // Two-coordinate solutions with the third coordinate at zero.
            let disc = 2.0 * l2 * l2 - l1 * l1;
            if disc >= 0.0 {
                let r = disc.sqrt();
                let (a, b) = ((l1 + r) / 2.0, (l1 - r) / 2.0);
                for zero in 0..3 {
                    for (p, q) in [(a, b), (b, a)] {
                        let mut s = vec![0.0; 3];
                        let others: Vec<usize> = (0..3).filter(|i| *i != zero).collect();
                        s[others[0]] = p;
                        s[others[1]] = q;
                        candidates.push(s);
                    }
                }
            }
        }
        n => panic!("brute force oracle supports n = 2 or 3, got {n}"),
    }
    let slack = 1e-12 * l2;
    let (best, d) = candidates
        .into_iter()
        .filter(|s| s.iter().all(|v| *v >= -slack))
        .map(|s| {
            let d = dist(&s, x);
            (s, d)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("feasible set is non-empty");
    (best, d, spacing)
}

/// Sparseness straight from its definition, without rescaling.
pub fn sparseness_reference(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (l1, l2) = norms(x);
    (n.sqrt() - l1 / l2) / (n.sqrt() - 1.0)
}

pub fn squared_error(v: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            let mut wh = 0.0;
            for k in 0..w.ncols() {
                wh += w[[i, k]] * h[[k, j]];
            }
            let d = v[[i, j]] - wh;
            total += d * d;
        }
    }
    total
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_difference(x: &Array2<f64>, h: f64, f: impl Fn(&Array2<f64>) -> f64) -> Array2<f64> {
    let mut grad = Array2::zeros(x.dim());
    let mut probe = x.clone();
    for idx in ndarray::indices(x.dim()) {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let up = f(&probe);
        probe[idx] = orig - h;
        let down = f(&probe);
        probe[idx] = orig;
        grad[idx] = (up - down) / (2.0 * h);
    }
    grad
}

pub fn uniform_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random::<f64>())
}

pub fn normal_vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect::<Vec<f64>>()
}
