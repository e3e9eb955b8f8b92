//! Small dense matrices over an exact or floating field.

use crate::weight::Weight;

pub type Matrix<W> = Vec<Vec<W>>;

pub fn zeros<W: Weight>(r: usize, c: usize) -> Matrix<W> {
    vec![vec![W::zero(); c]; r]
}

pub fn identity<W: Weight>(n: usize) -> Matrix<W> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = W::one();
    }
    m
}

pub fn outer<W: Weight>(a: &[W], b: &[W]) -> Matrix<W> {
    a.iter()
        .map(|x| b.iter().map(|y| x.clone() * y.clone()).collect())
        .collect()
}

pub fn add<W: Weight>(a: &Matrix<W>, b: &Matrix<W>) -> Matrix<W> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.clone() + y.clone()).collect())
        .collect()
}

pub fn scale<W: Weight>(a: &Matrix<W>, s: &W) -> Matrix<W> {
    a.iter()
        .map(|r| r.iter().map(|x| x.clone() * s.clone()).collect())
        .collect()
}

pub fn mat_vec<W: Weight>(a: &Matrix<W>, v: &[W]) -> Vec<W> {
    a.iter()
        .map(|r| {
            let mut s = W::zero();
            for (x, y) in r.iter().zip(v) {
                s += x.clone() * y.clone();
            }
            s
        })
        .collect()
}

pub fn dot<W: Weight>(a: &[W], b: &[W]) -> W {
    let mut s = W::zero();
    for (x, y) in a.iter().zip(b) {
        s += x.clone() * y.clone();
    }
    s
}

/// Row echelon reduction with partial pivoting (largest magnitude for floats,
/// first nonzero for rationals). Returns the determinant and, when the
/// matrix is invertible, the inverse.
pub fn det_and_inverse<W: Weight>(a: &Matrix<W>, tol: f64) -> (W, Option<Matrix<W>>) {
    let n = a.len();
    let mut m: Matrix<W> = a.clone();
    let mut inv = identity::<W>(n);
    let mut det = W::one();
    for col in 0..n {
        let pivot = if W::SPARSE {
            (col..n).find(|&r| !m[r][col].is_zero())
        } else {
            (col..n)
                .max_by(|&x, &y| {
                    m[x][col]
                        .to_f64()
                        .abs()
                        .partial_cmp(&m[y][col].to_f64().abs())
                        .unwrap()
                })
                .filter(|&r| !m[r][col].near_zero(tol))
        };
        let Some(p) = pivot else {
            return (W::zero(), None);
        };
        if p != col {
            m.swap(p, col);
            inv.swap(p, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det = det * pv.clone();
        for j in 0..n {
            m[col][j] = m[col][j].clone() / pv.clone();
            inv[col][j] = inv[col][j].clone() / pv.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for j in 0..n {
                let a = m[col][j].clone() * factor.clone();
                m[r][j] = m[r][j].clone() - a;
                let b = inv[col][j].clone() * factor.clone();
                inv[r][j] = inv[r][j].clone() - b;
            }
        }
    }
    (det, Some(inv))
}

pub fn det<W: Weight>(a: &Matrix<W>) -> W {
    det_and_inverse(a, 0.0).0
}

pub fn to_f64<W: Weight>(a: &Matrix<W>) -> Matrix<f64> {
    a.iter()
        .map(|r| r.iter().map(|x| x.to_f64()).collect())
        .collect()
}

/// Cholesky test for symmetric positive definiteness.
pub fn is_positive_definite(a: &Matrix<f64>) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}
