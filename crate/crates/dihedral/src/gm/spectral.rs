//! Leading eigendata of the twisted operators near θ = 0.

use super::model::MarkovGibbsModel;
use super::operator::{twisted_block, twisted_block_derivative, CMatrix, ReducedOperator};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use num_complex::Complex64;
use serde::Serialize;

/// Moduli closer than this count as a tie at the top of the spectrum.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Eigen {
    pub lambda: Complex64,
    /// Normalised so that `Σ_a w_a v_a = 1` for the supplied weights.
    pub vector: Vec<Complex64>,
    /// `|λ|` minus the second largest modulus.
    pub gap: f64,
}

/// Eigenvalues ordered by decreasing modulus.
pub fn eigenvalues(a: &CMatrix) -> Vec<Complex64> {
    let t = a.clone().schur().unpack().1;
    let mut ev: Vec<Complex64> = t.diagonal().iter().copied().collect();
    ev.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap());
    ev
}

pub fn spectral_radius(a: &CMatrix) -> f64 {
    eigenvalues(a).first().map_or(0.0, |z| z.norm())
}

/// Kernel vector of `a − λI`, from the smallest singular value.
fn null_vector(a: &CMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = a.nrows();
    let shifted = a - CMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .expect("nonempty");
    vt.row(idx).iter().map(|z| z.conj()).collect()
}

fn normalise(mut v: Vec<Complex64>, weights: &[f64]) -> Vec<Complex64> {
    let s: Complex64 = v.iter().zip(weights).map(|(x, w)| x * w).sum();
    let scale = if s.norm() > 1e-12 {
        s
    } else {
        let big = v.iter().copied().fold(Complex64::new(0.0, 0.0), |m, x| {
            if x.norm() > m.norm() {
                x
            } else {
                m
            }
        });
        big / big.norm() * v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    };
    for x in &mut v {
        *x /= scale;
    }
    v
}

/// Dominant eigenvalue by modulus; ties within [`TIE_TOL`] are an error.
pub fn leading_eigen(block: &CMatrix, weights: &[f64]) -> Result<Eigen> {
    let ev = eigenvalues(block);
    let lambda = ev[0];
    let second = ev.get(1).map_or(0.0, |z| z.norm());
    let gap = lambda.norm() - second;
    if ev.len() > 1 && gap < TIE_TOL {
        return Err(Error::EigenTie(gap));
    }
    Ok(Eigen {
        lambda,
        vector: normalise(null_vector(block, lambda), weights),
        gap,
    })
}

/// The eigenvalue closest to `target` (continuation of a curve).
pub fn eigen_near(block: &CMatrix, target: Complex64) -> Complex64 {
    eigenvalues(block)
        .into_iter()
        .min_by(|x, y| (x - target).norm().partial_cmp(&(y - target).norm()).unwrap())
        .expect("nonempty")
}

/// Second derivatives of `f` at 0 by central differences with two
/// Richardson steps (error O(h⁶)).
pub fn hessian(f: impl Fn(&[f64]) -> f64, d: usize, h: f64) -> Matrix<f64> {
    let second = |j: usize, k: usize, h: f64| {
        let at = |sj: f64, sk: f64| {
            let mut t = vec![0.0; d];
            t[j] += sj * h;
            t[k] += sk * h;
            f(&t)
        };
        if j == k {
            let mut t = vec![0.0; d];
            let f0 = f(&t);
            t[j] = h;
            let fp = f(&t);
            t[j] = -h;
            let fm = f(&t);
            (fp - 2.0 * f0 + fm) / (h * h)
        } else {
            (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
        }
    };
    let mut out = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in j..d {
            let (a, b, c) = (second(j, k, h), second(j, k, h / 2.0), second(j, k, h / 4.0));
            let (r1, r2) = ((4.0 * b - a) / 3.0, (4.0 * c - b) / 3.0);
            let v = (16.0 * r2 - r1) / 15.0;
            out[j][k] = v;
            out[k][j] = v;
        }
    }
    out
}

/// Leading eigenvalue of the assembled block near θ = 0 (`a₊⁰(θ)`).
pub fn assembled_leading(red: &ReducedOperator, theta: &[f64]) -> Complex64 {
    eigen_near(&red.matrix(theta), Complex64::new(1.0, 0.0))
}

/// `Σ₁² = Hess(−log a₊⁰)(0)`, so that `a₊⁰(θ) ≈ exp(−θᵀΣ₁²θ/2)`.
pub fn sigma1_sq(m: &MarkovGibbsModel) -> Matrix<f64> {
    let red = ReducedOperator::new(m);
    hessian(|t| -assembled_leading(&red, t).norm().ln(), m.dim(), 1e-2)
}

/// Green–Kubo partial sums of `C_j = ∫ ψ∘Tʲ ψᵀ dμ`: the literal series
/// `Σ_{j≥0} C_j` and its symmetrisation `C_0 + Σ_{j≥1} (C_j + C_jᵀ)`.
#[derive(Clone, Debug, Serialize)]
pub struct GreenKubo {
    pub literal: Matrix<f64>,
    pub symmetric: Matrix<f64>,
    pub terms: usize,
}

pub fn green_kubo(m: &MarkovGibbsModel) -> GreenKubo {
    const MAX_TERMS: usize = 100_000;
    let d = m.dim();
    let n = m.states();
    let pi = m.pi();
    let psi: Vec<Vec<f64>> = m
        .psi()
        .iter()
        .map(|v| v.iter().map(|&x| x as f64).collect())
        .collect();
    // y = Pʲ ψ, so C_j[k][l] = Σ_a π_a ψ_a[k] y_a[l].
    let mut y = psi.clone();
    let mut literal = vec![vec![0.0; d]; d];
    let mut symmetric = vec![vec![0.0; d]; d];
    let mut terms = 0;
    for j in 0..MAX_TERMS {
        let mut c = vec![vec![0.0; d]; d];
        for a in 0..n {
            for k in 0..d {
                for l in 0..d {
                    c[k][l] += pi[a] * psi[a][k] * y[a][l];
                }
            }
        }
        let size = c.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
        terms = j + 1;
        for k in 0..d {
            for l in 0..d {
                literal[k][l] += c[k][l];
                symmetric[k][l] += if j == 0 { c[k][l] } else { c[k][l] + c[l][k] };
            }
        }
        if j > 0 && size < 1e-17 {
            break;
        }
        y = (0..n)
            .map(|a| {
                (0..d)
                    .map(|l| (0..n).map(|b| m.p()[a][b] * y[b][l]).sum())
                    .collect()
            })
            .collect();
    }
    GreenKubo {
        literal,
        symmetric,
        terms,
    }
}

/// Eigencurves of `L_θ^{±1}` and the quadratic data at θ = 0.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralCurve {
    pub thetas: Vec<Vec<f64>>,
    /// `λ_θ^{+1}` as `[re, im]`.
    pub lambda_plus: Vec<[f64; 2]>,
    pub lambda_minus: Vec<[f64; 2]>,
    /// Leading eigenvalues of `L_0^{+1}` and `L_0^{−1}`.
    pub lambda0: [f64; 2],
    /// `max_a |v_a − 1|` for the normalised eigenvectors at θ = 0.
    pub eigvec0_dev: [f64; 2],
    /// Real first-order eigenvector derivative `w_j` with
    /// `v_θ = 1 − i⟨θ, w⟩ + O(|θ|²)` (one row per coordinate).
    pub v0_prime: Vec<Vec<f64>>,
    /// First derivative `∂_j λ_θ^{±1}` at 0 (purely imaginary), as `Im`.
    pub lambda1_plus: Vec<f64>,
    pub lambda1_minus: Vec<f64>,
    pub gamma_plus: Matrix<f64>,
    pub gamma_minus: Matrix<f64>,
    /// Finite-difference Hessians of `Re λ_θ^{±1}` at 0.
    pub hessian_plus: Matrix<f64>,
    pub hessian_minus: Matrix<f64>,
    pub sigma1_sq: Matrix<f64>,
    pub green_kubo: GreenKubo,
}

impl SpectralCurve {
    /// `max |Hess λ^{±1} + Γ^{±}|` over both signs.
    pub fn hessian_gap(&self) -> f64 {
        let mut g = 0.0f64;
        for (h, gm) in [
            (&self.hessian_plus, &self.gamma_plus),
            (&self.hessian_minus, &self.gamma_minus),
        ] {
            for (r, s) in h.iter().zip(gm) {
                for (x, y) in r.iter().zip(s) {
                    g = g.max((x + y).abs());
                }
            }
        }
        g
    }
}

fn half() -> Complex64 {
    Complex64::new(0.5, 0.0)
}

/// First-order perturbation of the ½-eigenpair of `L_0^{+1}`: returns
/// `(λ'_j, v'_j)` with `Σ π v'_j = 0`.
fn first_order(m: &MarkovGibbsModel, s: i8, j: usize) -> Result<(Complex64, Vec<Complex64>)> {
    let n = m.states();
    let l0 = twisted_block(m, &vec![0.0; m.dim()], s);
    let dj = twisted_block_derivative(m, j, s);
    let ones = CMatrix::from_element(n, 1, Complex64::new(1.0, 0.0));
    let left = null_vector(&l0.transpose(), half());
    let d1 = &dj * &ones;
    let num: Complex64 = left.iter().zip(d1.iter()).map(|(l, x)| l * x).sum();
    let den: Complex64 = left.iter().sum();
    if den.norm() < 1e-12 {
        return Err(Error::Perturbation(den.norm()));
    }
    let lambda1 = num / den;
    let mut a = CMatrix::zeros(n + 1, n);
    a.view_mut((0, 0), (n, n))
        .copy_from(&(&l0 - CMatrix::identity(n, n) * half()));
    for (col, &p) in m.pi().iter().enumerate() {
        a[(n, col)] = Complex64::new(p, 0.0);
    }
    let mut rhs = CMatrix::zeros(n + 1, 1);
    for b in 0..n {
        rhs[(b, 0)] = lambda1 - d1[(b, 0)];
    }
    let x = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::Perturbation(f64::INFINITY))?;
    let residual = (&a * &x - &rhs).norm();
    if residual > 1e-9 {
        return Err(Error::Perturbation(residual));
    }
    Ok((lambda1, x.iter().copied().collect()))
}

pub fn spectral_curve(m: &MarkovGibbsModel, thetas: &[Vec<f64>]) -> Result<SpectralCurve> {
    let d = m.dim();
    let n = m.states();
    let zero = vec![0.0; d];
    let pi = m.pi();

    let mut lambda0 = [0.0; 2];
    let mut eigvec0_dev = [0.0; 2];
    for (i, s) in [1i8, -1].into_iter().enumerate() {
        let e = leading_eigen(&twisted_block(m, &zero, s), pi)?;
        lambda0[i] = e.lambda.re;
        eigvec0_dev[i] = e
            .vector
            .iter()
            .map(|v| (v - 1.0).norm())
            .fold(0.0, f64::max)
            .max(e.lambda.im.abs());
    }

    let curve = |s: i8| -> Vec<[f64; 2]> {
        thetas
            .iter()
            .map(|t| {
                let z = eigen_near(&twisted_block(m, t, s), half());
                [z.re, z.im]
            })
            .collect()
    };

    let mut v0_prime = Vec::with_capacity(d);
    let mut lambda1_plus = Vec::with_capacity(d);
    let mut lambda1_minus = Vec::with_capacity(d);
    for j in 0..d {
        let (l1, v) = first_order(m, 1, j)?;
        lambda1_plus.push(l1.im);
        // v' = −i w.
        v0_prime.push(v.iter().map(|z| -z.im).collect::<Vec<f64>>());
        lambda1_minus.push(first_order(m, -1, j)?.0.im);
    }

    let gamma = |s: i8| -> Matrix<f64> {
        let mut g = vec![vec![0.0; d]; d];
        for a in 0..n {
            if m.eps()[a] != s {
                continue;
            }
            let psi = &m.psi()[a];
            for j in 0..d {
                for k in 0..d {
                    let (pj, pk) = (psi[j] as f64, psi[k] as f64);
                    g[j][k] += pi[a]
                        * (pj * pk - (pj * v0_prime[k][a] + v0_prime[j][a] * pk));
                }
            }
        }
        g
    };

    let fd = |s: i8| hessian(|t| eigen_near(&twisted_block(m, t, s), half()).re, d, 1e-2);

    let (gamma_plus, gamma_minus) = (gamma(1), gamma(-1));
    Ok(SpectralCurve {
        thetas: thetas.to_vec(),
        lambda_plus: curve(1),
        lambda_minus: curve(-1),
        lambda0,
        eigvec0_dev,
        v0_prime,
        lambda1_plus,
        lambda1_minus,
        gamma_plus,
        gamma_minus,
        hessian_plus: fd(1),
        hessian_minus: fd(-1),
        sigma1_sq: sigma1_sq(m),
        green_kubo: green_kubo(m),
    })
}

/// `Φ₁(0) = ½ (2π)^{−d/2} det(Σ₁²)^{−1/2}`.
pub fn phi1_at_zero(sigma1: &Matrix<f64>) -> Result<f64> {
    crate::rw::gaussian_density(sigma1, &vec![0.0; sigma1.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn half_eigenvalue_with_constant_vector() {
        for m in [fixtures::gm_bern(), fixtures::gm_markov()] {
            for s in [1, -1] {
                let e = leading_eigen(&twisted_block(&m, &[0.0], s), m.pi()).unwrap();
                assert!((e.lambda - 0.5).norm() < 1e-12);
                assert!(e.vector.iter().all(|v| (v - 1.0).norm() < 1e-12));
            }
        }
    }

    #[test]
    fn identity_is_a_tie() {
        let id = CMatrix::identity(3, 3);
        assert!(matches!(leading_eigen(&id, &[1.0, 0.0, 0.0]), Err(Error::EigenTie(_))));
    }

    #[test]
    fn sigma1_of_fixtures() {
        assert!((sigma1_sq(&fixtures::gm_bern())[0][0] - 0.25).abs() < 1e-10);
        assert!((sigma1_sq(&fixtures::gm_markov())[0][0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn green_kubo_on_markov_fixture() {
        let gk = green_kubo(&fixtures::gm_markov());
        assert!((gk.literal[0][0] - 1.5).abs() < 1e-14);
        assert!((gk.symmetric[0][0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_expansion() {
        let c = spectral_curve(&fixtures::gm_bern(), &[vec![0.4], vec![-0.4]]).unwrap();
        assert!((c.gamma_plus[0][0] - 0.25).abs() < 1e-12);
        assert!(c.gamma_minus[0][0].abs() < 1e-12);
        assert!(c.hessian_gap() < 1e-6);
        // λ_{−θ} = conj λ_θ.
        assert!((c.lambda_plus[0][0] - c.lambda_plus[1][0]).abs() < 1e-14);
        assert!((c.lambda_plus[0][1] + c.lambda_plus[1][1]).abs() < 1e-14);
    }

    #[test]
    fn markov_fixture_curvature() {
        let c = spectral_curve(&fixtures::gm_markov(), &[]).unwrap();
        // Frozen values: the eigencurves have curvature −1/2 while the
        // quadratic forms are 5/4 and 1/4; only their sum is Σ₁².
        assert!((c.hessian_plus[0][0] + 0.5).abs() < 1e-6);
        assert!((c.hessian_minus[0][0] + 0.5).abs() < 1e-6);
        assert!((c.gamma_plus[0][0] - 1.25).abs() < 1e-10);
        assert!((c.gamma_minus[0][0] - 0.25).abs() < 1e-10);
        assert!((c.lambda1_plus[0] - 0.5).abs() < 1e-10 || (c.lambda1_plus[0] + 0.5).abs() < 1e-10);
    }
}
