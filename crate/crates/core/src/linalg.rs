//! Small dense linear algebra: exactly the routines the pipeline needs,
//! hand-rolled for determinism (fixed operation order, no threading).

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix via the cyclic Jacobi method.
///
/// `a` is row-major `n x n` and is consumed as workspace. Returns the
/// eigenvalues in unspecified order. Intended for the modest matrix sizes
/// that appear in rank checks (tens to a few hundred).
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix storage must be n*n");
    if n == 0 {
        return Vec::new();
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a)) {
            break;
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
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Leading singular triple (sigma, u, v) of a row-major `rows x cols`
/// matrix, by power iteration on the Gram matrix.
///
/// The starting vector is deterministic. Returns an error when the matrix
/// is identically zero.
pub fn top_singular_triple(a: &[f64], rows: usize, cols: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), rows * cols);
    let norm2: f64 = a.iter().map(|x| x * x).sum();
    if norm2 == 0.0 {
        return Err(Error::numeric("top_singular_triple: zero matrix"));
    }
    // v0: column energies, biased by index so symmetric inputs still break ties.
    let mut v = vec![0.0f64; cols];
    for r in 0..rows {
        for c in 0..cols {
            let x = a[r * cols + c];
            v[c] += x * x;
        }
    }
    for (c, vc) in v.iter_mut().enumerate() {
        *vc += 1e-3 * ((c as f64) + 1.0).sin().abs() + 1e-9;
    }
    normalize(&mut v);

    let mut u = vec![0.0f64; rows];
    for _ in 0..500 {
        // u = A v
        for r in 0..rows {
            let mut acc = 0.0;
            let row = &a[r * cols..(r + 1) * cols];
            for c in 0..cols {
                acc += row[c] * v[c];
            }
            u[r] = acc;
        }
        normalize(&mut u);
        // v = A^T u
        let mut vn = vec![0.0f64; cols];
        for r in 0..rows {
            let ur = u[r];
            let row = &a[r * cols..(r + 1) * cols];
            for c in 0..cols {
                vn[c] += row[c] * ur;
            }
        }
        let sv = normalize(&mut vn);
        let converged = sv > 0.0 && {
            let mut dot = 0.0;
            for c in 0..cols {
                dot += vn[c] * v[c];
            }
            (1.0 - dot.abs()) < 1e-15
        };
        v = vn;
        if converged {
            break;
        }
    }
    // Final consistent u and sigma for the returned v.
    for r in 0..rows {
        let mut acc = 0.0;
        let row = &a[r * cols..(r + 1) * cols];
        for c in 0..cols {
            acc += row[c] * v[c];
        }
        u[r] = acc;
    }
    let sigma = normalize(&mut u);
    Ok((sigma, u, v))
}

fn normalize(v: &mut [f64]) -> f64 {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major `n x n`)
/// by Cholesky factorization. `b` holds one or more right-hand sides laid
/// out as columns of a row-major `n x k` block; the solution overwrites it.
pub fn cholesky_solve(a: &[f64], n: usize, b: &mut [f64], k: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * k);
    // Factor A = L L^T, L lower-triangular, stored dense.
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for p in 0..j {
                sum -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::numeric(format!(
                        "cholesky_solve: matrix not positive definite at pivot {i}"
                    )));
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // Forward then back substitution per right-hand side.
    for rhs in 0..k {
        for i in 0..n {
            let mut sum = b[i * k + rhs];
            for p in 0..i {
                sum -= l[i * n + p] * b[p * k + rhs];
            }
            b[i * k + rhs] = sum / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = b[i * k + rhs];
            for p in (i + 1)..n {
                sum -= l[p * n + i] * b[p * k + rhs];
            }
            b[i * k + rhs] = sum / l[i * n + i];
        }
    }
    Ok(())
}

/// Pearson correlation coefficient, or `None` when either side has zero
/// variance (the caller decides how to report undefined correlations).
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Mean and standard error (sample std over sqrt(n)) of a slice.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, var.sqrt() / nf.sqrt())
}

/// Percentile by linear interpolation between order statistics
/// (`q` in [0, 100]; input need not be sorted).
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}
