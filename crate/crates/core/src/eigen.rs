//! Symmetric eigendecomposition.
//!
//! Small problems (n <= 512, which covers the sample counts this toolkit is
//! aimed at) go through cyclic Jacobi sweeps on a dense copy; larger problems
//! use Lanczos with full reorthogonalization and Jacobi on the projected
//! tridiagonal matrix.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Threshold between the dense Jacobi path and the Lanczos path.
const JACOBI_MAX_N: usize = 512;
const JACOBI_MAX_SWEEPS: usize = 100;
const LANCZOS_SEED: u64 = 0x6f6d_6963_6c75_7374;

/// Which end of the spectrum to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

/// Eigenvalues (ascending) with matching orthonormal eigenvectors as the
/// columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenPairs {
    /// Column `j` of the eigenvector matrix.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

/// `k` eigenpairs from the requested end of the spectrum of `s`.
///
/// Eigenvalues come back sorted ascending; each eigenvector's first component
/// of magnitude above 1e-12 is made positive so repeated runs agree exactly.
pub fn symmetric_eigen(s: &SymmetricMatrix, k: usize, which: Which) -> Result<EigenPairs> {
    let n = s.n();
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "requested {k} eigenpairs from a {n}x{n} matrix"
        )));
    }
    let mut pairs = if n <= JACOBI_MAX_N {
        let (values, vectors) = jacobi_full(s)?;
        select_pairs(values, vectors, k, which)
    } else {
        lanczos(s, k, which)?
    };
    canonicalize_signs(&mut pairs.vectors);
    check_quality(s, &pairs)?;
    Ok(pairs)
}

/// Full dense decomposition by cyclic Jacobi sweeps. Returns unsorted
/// eigenvalues and the accumulated rotation matrix (columns are eigenvectors).
fn jacobi_full(s: &SymmetricMatrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.n();
    let mut a: Vec<f64> = s.values().to_vec();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let frob = s.frobenius_norm();
    let tol = 1e-14 * frob.max(1.0);

    let off = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = a[i * n + j];
                sum += 2.0 * x * x;
            }
        }
        sum.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= tol {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;

                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - sn * aiq;
                    a[i * n + q] = sn * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - sn * aqj;
                    a[q * n + j] = sn * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - sn * viq);
                    v.set(i, q, sn * vip + c * viq);
                }
            }
        }
    }
    Err(Error::Numeric(format!(
        "Jacobi sweeps did not converge: off-diagonal norm {:.3e} above tolerance {:.3e}",
        off(&a),
        tol
    )))
}

/// Sorts all pairs ascending by eigenvalue and keeps `k` from the requested end.
fn select_pairs(values: Vec<f64>, vectors: Matrix, k: usize, which: Which) -> EigenPairs {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let chosen: Vec<usize> = match which {
        Which::Smallest => order[..k].to_vec(),
        Which::Largest => order[n - k..].to_vec(),
    };
    let mut out_vals = Vec::with_capacity(k);
    let mut out_vecs = Matrix::zeros(n, k);
    for (col, &idx) in chosen.iter().enumerate() {
        out_vals.push(values[idx]);
        for i in 0..n {
            out_vecs.set(i, col, vectors.get(i, idx));
        }
    }
    EigenPairs {
        values: out_vals,
        vectors: out_vecs,
    }
}

fn canonicalize_signs(vectors: &mut Matrix) {
    let (n, k) = (vectors.rows(), vectors.cols());
    for j in 0..k {
        let mut flip = false;
        for i in 0..n {
            let v = vectors.get(i, j);
            if v.abs() > 1e-12 {
                flip = v < 0.0;
                break;
            }
        }
        if flip {
            for i in 0..n {
                let v = vectors.get(i, j);
                vectors.set(i, j, -v);
            }
        }
    }
}

fn check_quality(s: &SymmetricMatrix, pairs: &EigenPairs) -> Result<()> {
    let n = s.n();
    let bound = 1e-8 * s.frobenius_norm().max(1.0);
    for (j, &lambda) in pairs.values.iter().enumerate() {
        let mut res = 0.0f64;
        for i in 0..n {
            let mut sv = 0.0;
            for l in 0..n {
                sv += s.get(i, l) * pairs.vectors.get(l, j);
            }
            let r = sv - lambda * pairs.vectors.get(i, j);
            res += r * r;
        }
        let res = res.sqrt();
        if res > bound {
            return Err(Error::Numeric(format!(
                "eigenpair {j} residual {res:.3e} exceeds tolerance {bound:.3e}"
            )));
        }
    }
    Ok(())
}

fn mat_vec(s: &SymmetricMatrix, x: &[f64], out: &mut [f64]) {
    let n = s.n();
    for i in 0..n {
        let row = s.row(i);
        out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Lanczos with full reorthogonalization; grows the Krylov basis until the
/// requested Ritz pairs meet the residual bound or the basis spans the space.
fn lanczos(s: &SymmetricMatrix, k: usize, which: Which) -> Result<EigenPairs> {
    let n = s.n();
    let bound = 1e-8 * s.frobenius_norm().max(1.0);
    let mut m = (3 * k + 30).min(n);

    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        normalize(&mut q);
        basis.push(q);

        let mut w = vec![0.0; n];
        for j in 0..m {
            mat_vec(s, &basis[j], &mut w);
            let alpha: f64 = dot(&w, &basis[j]);
            alphas.push(alpha);
            // w -= alpha*q_j + beta_{j-1}*q_{j-1}, then reorthogonalize twice
            for (wi, qi) in w.iter_mut().zip(&basis[j]) {
                *wi -= alpha * qi;
            }
            if j > 0 {
                let beta = betas[j - 1];
                for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= beta * qi;
                }
            }
            for _ in 0..2 {
                for qb in &basis {
                    let c = dot(&w, qb);
                    for (wi, qi) in w.iter_mut().zip(qb) {
                        *wi -= c * qi;
                    }
                }
            }
            if j + 1 == m {
                break;
            }
            let beta = dot(&w, &w).sqrt();
            if beta <= 1e-13 {
                // invariant subspace: restart the recurrence from a fresh
                // direction orthogonal to the current basis
                let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
                for qb in &basis {
                    let c = dot(&fresh, qb);
                    for (fi, qi) in fresh.iter_mut().zip(qb) {
                        *fi -= c * qi;
                    }
                }
                normalize(&mut fresh);
                betas.push(0.0);
                basis.push(fresh);
            } else {
                betas.push(beta);
                let mut next = w.clone();
                for v in &mut next {
                    *v /= beta;
                }
                basis.push(next);
            }
        }

        // dense decomposition of the projected tridiagonal matrix
        let mut t = SymmetricMatrix::zeros(m);
        for j in 0..m {
            t.set(j, j, alphas[j]);
            if j + 1 < m {
                t.set(j, j + 1, betas[j]);
            }
        }
        let (tvals, tvecs) = jacobi_full(&t)?;
        let ritz = select_pairs(tvals, tvecs, k, which);

        // lift Ritz vectors back to R^n
        let mut vectors = Matrix::zeros(n, k);
        for col in 0..k {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += basis[j][i] * ritz.vectors.get(j, col);
                }
                vectors.set(i, col, acc);
            }
            let mut v = vectors.column(col);
            normalize(&mut v);
            for i in 0..n {
                vectors.set(i, col, v[i]);
            }
        }
        let pairs = EigenPairs {
            values: ritz.values,
            vectors,
        };

        // explicit residual check; enlarge the basis if not there yet
        let mut worst = 0.0f64;
        for (j, &lambda) in pairs.values.iter().enumerate() {
            let v = pairs.vector(j);
            let mut sv = vec![0.0; n];
            mat_vec(s, &v, &mut sv);
            let res: f64 = sv
                .iter()
                .zip(&v)
                .map(|(a, b)| {
                    let r = a - lambda * b;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res);
        }
        if worst <= bound {
            return Ok(pairs);
        }
        if m == n {
            return Err(Error::Numeric(format!(
                "Lanczos did not converge: residual {worst:.3e} above tolerance {bound:.3e}"
            )));
        }
        m = (2 * m).min(n);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Normalized graph Laplacian `L = D^{-1/2} (D - A) D^{-1/2}` of a
/// nonnegative affinity matrix with strictly positive row sums.
pub fn normalized_laplacian(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = a.n();
    let mut inv_sqrt_deg = vec![0.0; n];
    for i in 0..n {
        let mut deg = 0.0;
        for j in 0..n {
            let v = a.get(i, j);
            if v < 0.0 {
                return Err(Error::Data(format!(
                    "affinity matrix has negative entry at ({i}, {j})"
                )));
            }
            deg += v;
        }
        if deg <= 0.0 {
            return Err(Error::Data(format!(
                "sample {i} is isolated (zero affinity row sum)"
            )));
        }
        inv_sqrt_deg[i] = 1.0 / deg.sqrt();
    }
    let mut l = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let d = if i == j { 1.0 / (inv_sqrt_deg[i] * inv_sqrt_deg[i]) } else { 0.0 };
            l.set(i, j, inv_sqrt_deg[i] * (d - a.get(i, j)) * inv_sqrt_deg[j]);
        }
    }
    Ok(l)
}
