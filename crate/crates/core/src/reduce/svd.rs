use super::ReduceError;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

/// Rank-k factors of `X ≈ U Σ Vᵀ`. `scores = U Σ = X V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub scores: Array2<f64>,
    pub singular_values: Array1<f64>,
    /// `k × d`, rows are right singular vectors.
    pub components: Array2<f64>,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Array2<f64> {
        self.scores.dot(&self.components)
    }
}

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
pub(crate) fn sorted_eigen(gram: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let eig = SymmetricEigen::new(to_nalgebra(gram));
    let m = gram.nrows();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Array2::zeros((m, m));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..m {
            vectors[[row, col]] = eig.eigenvectors[(row, src)];
        }
    }
    (values, vectors)
}

/// Modified Gram-Schmidt over the columns of `v`, replacing degenerate
/// columns with the first standard basis vector that is still independent.
fn orthonormalize_columns(v: &mut Array2<f64>) {
    let (d, k) = v.dim();
    let mut next_basis = 0;
    for j in 0..k {
        for _attempt in 0..=d {
            for p in 0..j {
                let proj: f64 = (0..d).map(|r| v[[r, j]] * v[[r, p]]).sum();
                for r in 0..d {
                    v[[r, j]] -= proj * v[[r, p]];
                }
            }
            let norm: f64 = v.column(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                v.column_mut(j).mapv_inplace(|x| x / norm);
                break;
            }
            v.column_mut(j).fill(0.0);
            v[[next_basis % d, j]] = 1.0;
            next_basis += 1;
        }
    }
}

/// Truncated SVD via the eigendecomposition of the smaller Gram matrix.
/// Each right singular vector is signed so its largest-magnitude loading is
/// positive.
pub fn truncated_svd(x: &Array2<f64>, k: usize) -> Result<SvdFactors, ReduceError> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(ReduceError::Dimension(format!("SVD needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(ReduceError::Dimension(format!("k={k} outside 1..={}", n.min(d))));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ReduceError::Dimension("input has non-finite entries".into()));
    }

    let mut v = Array2::<f64>::zeros((d, k));
    let mut sigma = Array1::<f64>::zeros(k);
    if d <= n {
        let (vals, vecs) = sorted_eigen(&x.t().dot(x));
        for j in 0..k {
            sigma[j] = vals[j].max(0.0).sqrt();
            v.column_mut(j).assign(&vecs.column(j));
        }
    } else {
        let (vals, vecs) = sorted_eigen(&x.dot(&x.t()));
        let scale = vals[0].max(0.0).sqrt();
        for j in 0..k {
            let s = vals[j].max(0.0).sqrt();
            sigma[j] = s;
            if s > 1e-12 * scale.max(1e-300) {
                let u = vecs.column(j);
                let col = x.t().dot(&u) / s;
                v.column_mut(j).assign(&col);
            }
        }
    }
    orthonormalize_columns(&mut v);

    for j in 0..k {
        let col = v.column(j);
        let pivot = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[[pivot, j]] < 0.0 {
            v.column_mut(j).mapv_inplace(|x| -x);
        }
    }

    let scores = x.dot(&v);
    // exact sigma for the returned directions
    for j in 0..k {
        sigma[j] = scores.column(j).iter().map(|s| s * s).sum::<f64>().sqrt();
    }
    Ok(SvdFactors {
        scores,
        singular_values: sigma,
        components: v.t().to_owned(),
    })
}
