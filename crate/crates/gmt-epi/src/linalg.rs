//! Small dense linear algebra on slices, plus a cyclic Jacobi eigensolver.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm2(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn centroid<'a>(pts: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    let mut k = 0usize;
    for p in pts {
        if acc.is_empty() {
            acc = vec![0.0; p.len()];
        }
        axpy(&mut acc, 1.0, p);
        k += 1;
    }
    if k > 0 {
        for a in acc.iter_mut() {
            *a /= k as f64;
        }
    }
    acc
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Gram matrix `E Eᵀ` of a list of row vectors.
pub fn gram(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let k = rows.len();
    DMatrix::from_fn(k, k, |i, j| dot(&rows[i], &rows[j]))
}

pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.determinant()
    }
}

/// Determinant of the Gram matrix of the edge vectors.
pub fn gram_det(edges: &[Vec<f64>]) -> f64 {
    det(&gram(edges))
}

/// Orthonormalize a list of vectors (modified Gram-Schmidt). Vectors that
/// collapse below `tol` are skipped.
pub fn gram_schmidt(vs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = dot(&w, u);
                axpy(&mut w, -c, u);
            }
        }
        let l = norm(&w);
        if l > tol {
            out.push(scale(&w, 1.0 / l));
        }
    }
    out
}

/// Complete an orthonormal family to a basis of R^n; the added vectors span
/// the orthogonal complement.
pub fn complement(frame: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all = frame.to_vec();
    let mut extra = Vec::new();
    for i in 0..n {
        if all.len() == n {
            break;
        }
        let mut w = unit(n, i);
        for _ in 0..2 {
            for u in &all {
                let c = dot(&w, u);
                axpy(&mut w, -c, u);
            }
        }
        let l = norm(&w);
        if l > 1e-8 {
            let w = scale(&w, 1.0 / l);
            all.push(w.clone());
            extra.push(w);
        }
    }
    extra
}

/// Solve `A x = b` for a small square system.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    a.clone()
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues sorted in descending order.
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`; the first component above 1e-12
    /// in magnitude is positive.
    pub vectors: Vec<Vec<f64>>,
}

pub fn sym_eigen(a: &DMatrix<f64>) -> SymEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eigen needs a square matrix");
    let mut m = a.clone();
    // symmetrize against round-off in assembly
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale_ref = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off.sqrt() <= 1e-12 * scale_ref * 1e-3 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = idx.iter().map(|&i| m[(i, i)]).collect();
    let vectors = idx
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = (0..n).map(|k| v[(k, i)]).collect();
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();
    SymEigen { values, vectors }
}

/// Largest absolute eigenvalue of a symmetric matrix (its operator norm).
pub fn sym_op_norm(a: &DMatrix<f64>) -> f64 {
    sym_eigen(a)
        .values
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Permutation parity of sorting `keys` (true = odd).
pub fn sort_parity<T: Ord>(keys: &[T]) -> (Vec<usize>, bool) {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    // count cycles of the permutation
    let mut seen = vec![false; idx.len()];
    let mut transpositions = 0usize;
    for s in 0..idx.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut j = s;
        while !seen[j] {
            seen[j] = true;
            j = idx[j];
            len += 1;
        }
        transpositions += len - 1;
    }
    (idx, transpositions % 2 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_known_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let e = sym_eigen(&a);
        assert!((e.values[0] - 5.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.values[2] - 1.0).abs() < 1e-12);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let av: Vec<f64> = (0..3)
                .map(|i| (0..3).map(|j| a[(i, j)] * v[j]).sum())
                .collect();
            for i in 0..3 {
                assert!((av[i] - lam * v[i]).abs() < 1e-10);
            }
        }
        // sign convention
        assert!(e.vectors[1][0] > 0.0);
    }

    #[test]
    fn parity_of_swaps() {
        assert!(!sort_parity(&[1, 2, 3]).1);
        assert!(sort_parity(&[2, 1, 3]).1);
        assert!(!sort_parity(&[3, 1, 2]).1);
    }

    #[test]
    fn complement_is_orthogonal() {
        let f = gram_schmidt(&[vec![1.0, 1.0, 0.0]], 1e-12);
        let c = complement(&f, 3);
        assert_eq!(c.len(), 2);
        for u in &c {
            assert!(dot(u, &f[0]).abs() < 1e-12);
        }
        assert!(dot(&c[0], &c[1]).abs() < 1e-12);
    }
}
