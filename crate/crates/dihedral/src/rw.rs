//! Local limit theorem for i.i.d. random walks on G_d.
//!
//! The characteristic matrix `M(θ) = Σ ν(g) ρ_θ(g)` drives everything:
//! `P(S_n = g) = c_P ∫ Tr(ρ_θ(g)* M(θ)^n) dθ`, and powers of the 2×2 matrix
//! are taken in closed form through Cayley–Hamilton.

use crate::dual::{self, FourierAtoms, Mat2, TorusGrid};
use crate::error::{Error, Result};
use crate::group::{convolve, GroupDistribution, GroupElement};
use crate::linalg::{self, Matrix};
use crate::weight::Weight;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Below this relative eigenvalue separation the confluent formula is used.
pub const CONFLUENT_TOL: f64 = 1e-9;
/// Below this separation (and above [`CONFLUENT_TOL`]) `a_n` is summed term
/// by term; the difference quotient would cancel badly.
const NEAR_CONFLUENT: f64 = 0.5;

pub fn char_matrix<W: Weight>(nu: &GroupDistribution<W>, theta: &[f64]) -> Mat2 {
    dual::fourier(nu, theta)
}

/// Eigenvalue data of a 2×2 matrix, with the coefficients of
/// `M^n = a_n M + b_n I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigData {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub tau: Complex64,
    pub delta: Complex64,
}

impl EigData {
    pub fn new(m: &Mat2) -> Self {
        let (a_plus, a_minus) = m.eigenvalues();
        Self {
            a_plus,
            a_minus,
            tau: m.trace(),
            delta: m.det(),
        }
    }

    /// `|a₊ − a₋| / max(|a₊|, |a₋|)`, or 0 for the zero spectrum.
    pub fn separation(&self) -> f64 {
        let scale = self.a_plus.norm().max(self.a_minus.norm());
        if scale == 0.0 {
            0.0
        } else {
            (self.a_plus - self.a_minus).norm() / scale
        }
    }

    /// `(a_n, a_{n−1})`; `b_n = −Δ a_{n−1}`.
    fn coefficients(&self, n: u32) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if n == 0 {
            return (zero, zero);
        }
        let sep = self.separation();
        if sep < CONFLUENT_TOL {
            let c = self.tau / 2.0;
            let prev = if n >= 2 { c.powu(n - 2) * (n - 1) as f64 } else { zero };
            return (c.powu(n - 1) * n as f64, prev);
        }
        let (p, m) = (self.a_plus, self.a_minus);
        if sep < NEAR_CONFLUENT {
            // a_{k+1} = a₊ a_k + a₋^k
            let (mut prev, mut cur, mut mk) = (zero, one, one);
            for _ in 1..n {
                mk *= m;
                let next = p * cur + mk;
                prev = cur;
                cur = next;
            }
            return (cur, prev);
        }
        let q = |k: u32| (p.powu(k) - m.powu(k)) / (p - m);
        (q(n), q(n - 1))
    }

    pub fn a_n(&self, n: u32) -> Complex64 {
        self.coefficients(n).0
    }

    pub fn b_n(&self, n: u32) -> Complex64 {
        -self.delta * self.coefficients(n).1
    }
}

/// `M^n` from `M^n = a_n M + b_n I`; `n = 0` gives the identity.
pub fn matrix_power_cayley(m: &Mat2, n: u32) -> Mat2 {
    if n == 0 {
        return Mat2::IDENTITY;
    }
    let eig = EigData::new(m);
    let (an, an1) = eig.coefficients(n);
    let bn = -eig.delta * an1;
    m.scale(an) + Mat2::IDENTITY.scale(bn)
}

/// Repeated multiplication, the oracle for [`matrix_power_cayley`].
pub fn matrix_power_naive(m: &Mat2, n: u32) -> Mat2 {
    let mut out = Mat2::IDENTITY;
    for _ in 0..n {
        out = out * *m;
    }
    out
}

/// First and second moment data of a step distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMoments<W = f64> {
    pub a_plus: W,
    pub a_minus: W,
    pub p: W,
    pub w_plus: Vec<W>,
    pub w_minus: Vec<W>,
    pub s_mat: Matrix<W>,
    pub beta0: W,
    pub beta1: W,
    pub beta2: W,
    pub sigma_q: Matrix<W>,
    /// `|det σ_q − det S·((1+β₀/A₋)(1−β₂/A₋)+(β₁/A₋)²)|`.
    pub det_identity_gap: f64,
}

impl<W: Weight> StepMoments<W> {
    pub fn sigma_f64(&self) -> Matrix<f64> {
        linalg::to_f64(&self.sigma_q)
    }
}

/// Computes `A_±`, `w_±`, `S`, the β's and the limit covariance
/// `σ_q = S + (w₊w₊ᵀ − w₋w₋ᵀ)/A₋`.
///
/// # Errors
/// `ConditionA` if `S` is singular, `ConditionB` if `A₋ = 0` or the
/// β-factor vanishes (equivalently, `σ_q` is singular).
pub fn moments<W: Weight>(nu: &GroupDistribution<W>) -> Result<StepMoments<W>> {
    let d = nu.dim();
    let mut a_plus = W::zero();
    let mut a_minus = W::zero();
    let mut w_plus = vec![W::zero(); d];
    let mut w_minus = vec![W::zero(); d];
    let mut s_mat: Matrix<W> = linalg::zeros(d, d);
    for (g, w) in nu.atoms() {
        let m: Vec<W> = g.trans.iter().map(|&x| W::from_i64(x)).collect();
        let (a, wv) = if g.flip == 1 {
            (&mut a_plus, &mut w_plus)
        } else {
            (&mut a_minus, &mut w_minus)
        };
        *a += w.clone();
        for (acc, x) in wv.iter_mut().zip(&m) {
            *acc += w.clone() * x.clone();
        }
        for i in 0..d {
            for j in 0..d {
                s_mat[i][j] += w.clone() * m[i].clone() * m[j].clone();
            }
        }
    }
    let scale = s_mat.iter().flatten().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
    let (det_s, s_inv) = linalg::det_and_inverse(&s_mat, 1e-12 * scale.max(1e-300));
    let Some(s_inv) = s_inv else {
        return Err(Error::ConditionA { det: det_s.to_f64() });
    };
    if a_minus.is_zero() || a_minus.near_zero(1e-15) {
        return Err(Error::ConditionB {
            reason: "no flip steps (A₋ = 0)".into(),
        });
    }
    let quad = |x: &[W], y: &[W]| linalg::dot(x, &linalg::mat_vec(&s_inv, y));
    let beta0 = quad(&w_plus, &w_plus);
    let beta1 = quad(&w_plus, &w_minus);
    let beta2 = quad(&w_minus, &w_minus);
    let am = a_minus.clone();
    let factor = (W::one() + beta0.clone() / am.clone()) * (W::one() - beta2.clone() / am.clone())
        + (beta1.clone() / am.clone()) * (beta1.clone() / am.clone());
    if factor.near_zero(1e-12) {
        return Err(Error::ConditionB {
            reason: format!("β-factor vanishes ({:e})", factor.to_f64()),
        });
    }
    let inv_am = W::one() / am;
    let ww = linalg::add(
        &linalg::outer(&w_plus, &w_plus),
        &linalg::scale(&linalg::outer(&w_minus, &w_minus), &-W::one()),
    );
    let sigma_q = linalg::add(&s_mat, &linalg::scale(&ww, &inv_am));
    let det_sigma = linalg::det(&sigma_q);
    let det_identity_gap = (det_sigma - det_s * factor).to_f64().abs();
    let p = a_plus.clone() - a_minus.clone();
    Ok(StepMoments {
        a_plus,
        a_minus,
        p,
        w_plus,
        w_minus,
        s_mat,
        beta0,
        beta1,
        beta2,
        sigma_q,
        det_identity_gap,
    })
}

/// gcd of the return times `n ≤ n_max` with `ν^{∗n}(e) > 0`.
pub fn check_aperiodicity_gcd<W: Weight>(nu: &GroupDistribution<W>, n_max: usize) -> Result<u64> {
    let e = GroupElement::identity(nu.dim());
    let mut cur = GroupDistribution::delta(e.clone());
    let mut gcd = 0u64;
    for n in 1..=n_max {
        cur = convolve(nu, &cur)?;
        if cur.weight(&e) > W::zero() {
            gcd = num_integer_gcd(gcd, n as u64);
            if gcd == 1 {
                break;
            }
        }
    }
    if gcd == 0 {
        Err(Error::NoReturn(n_max))
    } else {
        Ok(gcd)
    }
}

fn num_integer_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Per-axis grid that makes the n-step inversion exact at every `g` with
/// `|g_j| ≤ reach[j]`.
pub fn exact_grid(max_step: &[i64], n: usize, reach: &[i64]) -> TorusGrid {
    TorusGrid::per_axis(
        max_step
            .iter()
            .zip(reach)
            .map(|(&m, &r)| {
                let deg = m * n as i64;
                (2 * deg + 1).max(deg + r + 1) as usize
            })
            .collect(),
    )
}

/// `P(S_n = g)` by trace inversion of `M(θ)^n` on an exact grid.
pub fn nstep_prob<W: Weight>(nu: &GroupDistribution<W>, n: usize, g: &GroupElement) -> Result<f64> {
    crate::group::check_dim(nu.dim(), g.dim())?;
    if n == 0 {
        return Ok(g.is_identity() as u8 as f64);
    }
    let reach: Vec<i64> = g.trans.iter().map(|x| x.abs()).collect();
    let grid = exact_grid(&nu.max_abs_trans(), n, &reach);
    let fa = FourierAtoms::new(nu);
    let r = dual::plancherel_inverse(|t| matrix_power_cayley(&fa.eval(t), n as u32), g, &grid);
    Ok(r.value)
}

/// All `P(S_n = (ε, r))` for `|r|_∞ ≤ radius`, from a single pass over
/// the grid.
#[derive(Clone, Debug)]
pub struct NstepTable {
    pub dim: usize,
    pub n: usize,
    pub radius: i64,
    /// `(element, probability)` in canonical order.
    pub rows: Vec<(GroupElement, f64)>,
    /// Largest imaginary residue of the quadrature.
    pub max_imag: f64,
}

pub fn lattice_points(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let side = (2 * radius + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut r = vec![0; dim];
            for j in (0..dim).rev() {
                r[j] = (idx % side) as i64 - radius;
                idx /= side;
            }
            r
        })
        .collect()
}

pub fn nstep_table<W: Weight>(nu: &GroupDistribution<W>, n: usize, radius: i64) -> NstepTable {
    let d = nu.dim();
    let points = lattice_points(d, radius);
    let grid = exact_grid(&nu.max_abs_trans(), n, &vec![radius; d]);
    let fa = FourierAtoms::new(nu);
    let np = points.len();
    let sums = fold_grid(&grid, 2 * np, |theta, acc| {
        let p = matrix_power_cayley(&fa.eval(theta), n as u32).0;
        for (i, r) in points.iter().enumerate() {
            let phi: f64 = theta.iter().zip(r).map(|(t, &x)| t * x as f64).sum();
            let z = Complex64::from_polar(1.0, phi);
            acc[i] += z.conj() * p[0][0] + z * p[1][1];
            acc[np + i] += z * p[1][0] + z.conj() * p[0][1];
        }
    });
    let w = dual::plancherel_weight(d) * grid.cell_volume();
    let mut rows = Vec::with_capacity(2 * np);
    let mut max_imag = 0.0f64;
    for (flip, off) in [(-1i8, np), (1i8, 0)] {
        for (i, r) in points.iter().enumerate() {
            let v = sums[off + i] * w;
            max_imag = max_imag.max(v.im.abs());
            rows.push((
                GroupElement {
                    flip,
                    trans: r.clone(),
                },
                v.re,
            ));
        }
    }
    NstepTable {
        dim: d,
        n,
        radius,
        rows,
        max_imag,
    }
}

/// Vector-valued grid reduction with a deterministic summation order.
pub(crate) fn fold_grid<F>(grid: &TorusGrid, len: usize, f: F) -> Vec<Complex64>
where
    F: Fn(&[f64], &mut [Complex64]) + Sync,
{
    const CHUNK: usize = 512;
    let total = grid.len();
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<Vec<Complex64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut theta = vec![0.0; grid.dim()];
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                grid.node_into(idx, &mut theta);
                f(&theta, &mut acc);
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Half the centred normal density with covariance `sigma`.
pub fn gaussian_density(sigma: &Matrix<f64>, x: &[f64]) -> Result<f64> {
    let d = sigma.len();
    let (det, inv) = linalg::det_and_inverse(sigma, 1e-300);
    let inv = inv.ok_or(Error::SingularCovariance)?;
    if det <= 0.0 {
        return Err(Error::SingularCovariance);
    }
    let q = linalg::dot(x, &linalg::mat_vec(&inv, x));
    Ok(0.5 * TAU.powf(-(d as f64) / 2.0) * det.powf(-0.5) * (-q / 2.0).exp())
}

/// Φ(x) = ½ (2π)^{−d/2} det(σ_q)^{−1/2} exp(−xᵀσ_q⁻¹x/2).
pub fn gaussian_limit<W: Weight>(m: &StepMoments<W>, x: &[f64]) -> Result<f64> {
    gaussian_density(&m.sigma_f64(), x)
}

/// One row of an LCLT comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct LcltRow {
    pub element: GroupElement,
    pub p_n: f64,
    pub scaled: f64,
    pub phi: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct LcltReport {
    pub n: usize,
    pub rows: Vec<LcltRow>,
    pub sup_gap: f64,
}

pub fn lclt_report<W: Weight>(nu: &GroupDistribution<W>, n: usize, radius: i64) -> Result<LcltReport> {
    let mom = moments(nu)?;
    let sigma = mom.sigma_f64();
    let table = nstep_table(nu, n, radius);
    let d = nu.dim();
    let norm = (n as f64).powf(d as f64 / 2.0);
    let sq = (n as f64).sqrt();
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut sup_gap = 0.0f64;
    for (g, p) in table.rows {
        let x: Vec<f64> = g.trans.iter().map(|&r| r as f64 / sq).collect();
        let phi = gaussian_density(&sigma, &x)?;
        let scaled = norm * p;
        let gap = (scaled - phi).abs();
        sup_gap = sup_gap.max(gap);
        rows.push(LcltRow {
            element: g,
            p_n: p,
            scaled,
            phi,
            gap,
        });
    }
    Ok(LcltReport { n, rows, sup_gap })
}

/// `max_{ε, |r|_∞ ≤ radius} |n^{d/2} P(S_n = (ε, r)) − Φ(r/√n)|`.
pub fn lclt_deviation<W: Weight>(nu: &GroupDistribution<W>, n: usize, radius: i64) -> Result<f64> {
    Ok(lclt_report(nu, n, radius)?.sup_gap)
}
