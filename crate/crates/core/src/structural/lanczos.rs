//! Lanczos iteration with full reorthogonalization, locking and thick
//! restarts, for the largest eigenpairs of a symmetric operator restricted to
//! the orthogonal complement of a given set of vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LanczosOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    pub basis_size: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    par::sum_range(a.len(), |i| a[i] * b[i])
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn orthogonalize<'a>(w: &mut [f64], basis: impl Iterator<Item = &'a Vec<f64>> + Clone) {
    for _ in 0..2 {
        for q in basis.clone() {
            let c = dot(w, q);
            axpy(-c, q, w);
        }
    }
}

/// `Σ_i coef[i] · vs[i]`.
fn combine(vs: &[Vec<f64>], coef: impl Iterator<Item = f64>, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (v, c) in vs.iter().zip(coef) {
        axpy(c, v, &mut out);
    }
    out
}

/// Finds the `k` largest eigenpairs of `op` on the complement of `deflate`.
///
/// Thick-restart Lanczos: the basis is extended by repeated application of
/// the operator with full reorthogonalization, Ritz pairs are extracted by a
/// Rayleigh-Ritz projection, converged leading pairs are locked, and the
/// basis restarts from the leading unconverged Ritz vectors.
///
/// Every vector in `deflate` must be unit-norm and mutually orthogonal, and
/// the complement must have dimension at least `k`. Returns eigenvalues in
/// descending order with matching unit eigenvectors.
pub(crate) fn largest_eigenpairs<F>(
    dim: usize,
    k: usize,
    op: F,
    deflate: &[Vec<f64>],
    opts: LanczosOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    assert!(deflate.len() + k <= dim, "not enough room for {k} eigenpairs");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| StandardNormal.sample(rng)).collect() };
    let apply = |x: &[f64]| {
        let mut y = vec![0.0; dim];
        op(x, &mut y);
        y
    };

    let mut locked: Vec<Vec<f64>> = deflate.to_vec();
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    // Orthonormal basis and the operator applied to it.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next: Option<Vec<f64>> = None;

    for _ in 0..opts.max_restarts {
        let need = k - found.len();
        if need == 0 {
            break;
        }
        let free = dim - locked.len();
        let cap = free.min(opts.basis_size.max(2 * need + 20));

        while basis.len() < cap {
            let mut v = next.take().unwrap_or_else(|| match images.last() {
                Some(av) => av.clone(),
                None => random_vec(&mut rng),
            });
            orthogonalize(&mut v, basis.iter().chain(locked.iter()));
            let mut fresh_tries = 0;
            while normalize(&mut v) < 1e-10 {
                // Invariant subspace reached; continue from a fresh direction.
                fresh_tries += 1;
                if fresh_tries > 3 {
                    break;
                }
                v = random_vec(&mut rng);
                orthogonalize(&mut v, basis.iter().chain(locked.iter()));
            }
            if fresh_tries > 3 {
                break;
            }
            images.push(apply(&v));
            basis.push(v);
        }

        let m = basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let keep = (need + 10).min(m.saturating_sub(1)).max(1).min(m);
        let mut ritz = Vec::with_capacity(keep);
        let mut ritz_images = Vec::with_capacity(keep);
        let mut residual_dir: Option<Vec<f64>> = None;
        let mut locking = true;
        for &idx in order.iter().take(keep) {
            let coef = || eig.eigenvectors.column(idx).iter().copied().collect::<Vec<_>>().into_iter();
            let y = combine(&basis, coef(), dim);
            let ay = combine(&images, coef(), dim);
            let theta = eig.eigenvalues[idx];
            let r: Vec<f64> = ay.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
            let res = dot(&r, &r).sqrt();
            // Lock only an unbroken run of leading converged pairs.
            if locking && found.len() < k && res < opts.tol {
                let mut y = y;
                normalize(&mut y);
                locked.push(y.clone());
                found.push((theta, y));
                continue;
            }
            locking = false;
            if residual_dir.is_none() {
                residual_dir = Some(r);
            }
            ritz.push(y);
            ritz_images.push(ay);
        }
        basis = ritz;
        images = ritz_images;
        next = residual_dir;
    }
    if found.len() < k {
        return Err(Error::Numeric(format!(
            "Lanczos found {} of {k} eigenpairs within {} restarts",
            found.len(),
            opts.max_restarts
        )));
    }
    found.truncate(k);
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(found.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> LanczosOptions {
        LanczosOptions {
            tol: 1e-10,
            seed: 1,
            max_restarts: 500,
            basis_size: 8,
        }
    }

    #[test]
    fn diagonal_operator() {
        let diag: Vec<f64> = (0..30).map(|i| i as f64 / 7.0).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let (vals, vecs) = largest_eigenpairs(30, 4, op, &[], opts()).unwrap();
        for (j, v) in vals.iter().enumerate() {
            assert!((v - (29 - j) as f64 / 7.0).abs() < 1e-10);
            assert!((vecs[j][29 - j].abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn deflation_skips_top_vector() {
        let diag: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let mut e9 = vec![0.0; 10];
        e9[9] = 1.0;
        let (vals, _) = largest_eigenpairs(10, 2, op, &[e9], opts()).unwrap();
        assert!((vals[0] - 8.0).abs() < 1e-10 && (vals[1] - 7.0).abs() < 1e-10);
    }

    #[test]
    fn repeated_eigenvalues() {
        // Eigenvalue 5 with multiplicity 3, found through restarts.
        let diag = [5.0, 1.0, 5.0, 2.0, 5.0, 0.5, 3.0];
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        };
        let (vals, _) = largest_eigenpairs(7, 4, op, &[], opts()).unwrap();
        assert!(vals[..3].iter().all(|v| (v - 5.0).abs() < 1e-10), "{vals:?}");
        assert!((vals[3] - 3.0).abs() < 1e-10);
    }
}
