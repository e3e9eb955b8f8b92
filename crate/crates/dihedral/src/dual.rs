//! Unitary dual of G_d: the torus family ρ_θ of 2×2 representations, the
//! one-dimensional characters on T_d = {0, π}^d, Fourier transforms and
//! trace inversion by periodic quadrature.
//!
//! Conventions: `fourier(f)(θ) = Σ_g f(g) ρ_θ(g)` (a homomorphism for
//! convolution) and `f(g) = c_P ∫ Tr(ρ_θ(g)* F(θ)) dθ` over the full torus,
//! with `c_P = 1 / (2 (2π)^d)`.

use crate::group::{GroupDistribution, GroupElement};
use crate::weight::Weight;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::ops::{Add, AddAssign, Mul, Sub};

pub const TD_TOL: f64 = 1e-12;

/// Weight of the Plancherel measure on the torus family.
pub fn plancherel_weight(dim: usize) -> f64 {
    0.5 / TAU.powi(dim as i32)
}

/// Normalised Lebesgue weight without the factor 1/2 for ρ_θ ≅ ρ_{−θ}.
/// Kept for the negative control in the self-tests.
pub fn uncorrected_weight(dim: usize) -> f64 {
    1.0 / TAU.powi(dim as i32)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[Complex64::new(0.0, 0.0); 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    /// Operator 2-norm.
    pub fn norm2(&self) -> f64 {
        let h = self.adjoint() * *self;
        let tr = h.trace().re;
        let det = h.det().re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc).max(0.0).sqrt()
    }

    /// Both eigenvalues, larger modulus first.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_tr = self.trace() / 2.0;
        let root = (half_tr * half_tr - self.det()).sqrt();
        let (a, b) = (half_tr + root, half_tr - root);
        if a.norm() >= b.norm() {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().0.norm()
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale((-1.0).into())
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

/// Point θ of the torus, each coordinate reduced to [0, 2π).
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    theta: Vec<f64>,
}

impl DualPoint {
    pub fn new(theta: &[f64]) -> Self {
        Self {
            theta: theta.iter().map(|&t| reduce_angle(t)).collect(),
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// True iff every coordinate is 0 or π (within 1e-12, periodically).
    pub fn in_td(&self) -> bool {
        self.theta.iter().all(|&t| {
            let d0 = t.min(TAU - t);
            d0 <= TD_TOL || (t - PI).abs() <= TD_TOL
        })
    }
}

pub fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn phase(theta: &[f64], m: &[i64]) -> f64 {
    theta.iter().zip(m).map(|(t, &x)| t * x as f64).sum()
}

/// ρ_θ(ε, m): diag(e^{i⟨m,θ⟩}, e^{−i⟨m,θ⟩}) for ε = 1, the anti-diagonal
/// with the same entries for ε = −1.
pub fn rho2(theta: &[f64], g: &GroupElement) -> Mat2 {
    rho2_raw(theta, g.flip, &g.trans)
}

pub(crate) fn rho2_raw(theta: &[f64], flip: i8, m: &[i64]) -> Mat2 {
    let z = Complex64::from_polar(1.0, phase(theta, m));
    let zero = Complex64::new(0.0, 0.0);
    if flip == 1 {
        Mat2::new(z, zero, zero, z.conj())
    } else {
        Mat2::new(zero, z, z.conj(), zero)
    }
}

/// The character ρ_{θ,γ}(ε, m) = e^{i⟨θ,m⟩} γ^{[ε = −1]} for θ ∈ T_d.
pub fn rho1(theta: &DualPoint, gamma: i8, g: &GroupElement) -> crate::Result<Complex64> {
    if !theta.in_td() {
        return Err(crate::Error::NotInTd);
    }
    let sign_m: i64 = theta
        .theta
        .iter()
        .zip(&g.trans)
        .filter(|(t, _)| (**t - PI).abs() <= TD_TOL)
        .map(|(_, m)| m.rem_euclid(2))
        .sum();
    let mut v = if sign_m % 2 == 0 { 1.0 } else { -1.0 };
    if g.flip == -1 && gamma == -1 {
        v = -v;
    }
    Ok(Complex64::new(v, 0.0))
}

const U: Mat2 = Mat2([
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
]);

/// U M U⁻¹ with U = (1/√2)[[1,1],[1,−1]] (U is its own inverse).
pub fn conjugate_u(m: &Mat2) -> Mat2 {
    U * *m * U
}

/// φ_{θ,s,t}(g) = ⟨ρ_θ(g)ξ, ξ⟩ with ξ = (s, t).
pub fn positive_type(theta: &[f64], s: Complex64, t: Complex64, g: &GroupElement) -> Complex64 {
    let z = Complex64::from_polar(1.0, phase(theta, &g.trans));
    if g.flip == 1 {
        z * s.norm_sqr() + z.conj() * t.norm_sqr()
    } else {
        z * t * s.conj() + z.conj() * s * t.conj()
    }
}

/// Atoms flattened for fast repeated evaluation of the Fourier transform.
#[derive(Clone, Debug)]
pub struct FourierAtoms {
    atoms: Vec<(i8, Vec<i64>, f64)>,
}

impl FourierAtoms {
    pub fn new<W: Weight>(f: &GroupDistribution<W>) -> Self {
        Self {
            atoms: f
                .atoms()
                .map(|(g, w)| (g.flip, g.trans.clone(), w.to_f64()))
                .collect(),
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Mat2 {
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for (flip, m, w) in &self.atoms {
            let z = Complex64::from_polar(*w, phase(theta, m));
            if *flip == 1 {
                a += z;
            } else {
                b += z;
            }
        }
        Mat2::new(a, b, b.conj(), a.conj())
    }
}

/// `Σ_g f(g) ρ_θ(g)`. For a probability measure this is the characteristic
/// matrix M(θ) of the walk.
pub fn fourier<W: Weight>(f: &GroupDistribution<W>, theta: &[f64]) -> Mat2 {
    let mut out = Mat2::ZERO;
    for (g, w) in f.atoms() {
        out += rho2(theta, g).scale(w.to_f64().into());
    }
    out
}

/// Product grid on [0, 2π)^d with `k[j]` equispaced nodes per axis, optionally
/// shifted by half a cell (midpoint rule, which never hits θ = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    pub k: Vec<usize>,
    pub midpoint: bool,
}

impl TorusGrid {
    pub fn uniform(dim: usize, k: usize) -> Self {
        Self {
            k: vec![k; dim],
            midpoint: false,
        }
    }

    pub fn per_axis(k: Vec<usize>) -> Self {
        Self { k, midpoint: false }
    }

    pub fn midpoint(dim: usize, k: usize) -> Self {
        Self {
            k: vec![k; dim],
            midpoint: true,
        }
    }

    /// Grid that integrates trigonometric polynomials of per-axis degree
    /// `degree[j]` exactly: K = 2D + 1.
    pub fn exact_for_degree(degree: &[i64]) -> Self {
        Self::per_axis(degree.iter().map(|&d| 2 * d.max(0) as usize + 1).collect())
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn len(&self) -> usize {
        self.k.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.k.iter().map(|&k| TAU / k as f64).product()
    }

    /// Writes node `idx` (row-major, last axis fastest) into `out`.
    pub fn node_into(&self, mut idx: usize, out: &mut [f64]) {
        let shift = if self.midpoint { 0.5 } else { 0.0 };
        for j in (0..self.k.len()).rev() {
            let kj = self.k[j];
            out[j] = TAU * ((idx % kj) as f64 + shift) / kj as f64;
            idx /= kj;
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.node_into(idx, &mut v);
        v
    }

    /// True when the rule is exact for per-axis degree `degree`.
    pub fn is_exact_for(&self, degree: &[i64]) -> bool {
        !self.midpoint
            && self
                .k
                .iter()
                .zip(degree)
                .all(|(&k, &d)| k as i64 >= 2 * d + 1)
    }
}

const CHUNK: usize = 1024;

/// Σ over grid nodes of `f(θ)`, evaluated in parallel with a fixed
/// summation order (chunk sums added left to right), so results do not
/// depend on the thread count.
pub fn grid_sum<T, F>(grid: &TorusGrid, f: F) -> T
where
    T: Send + Copy + Default + AddAssign,
    F: Fn(&[f64]) -> T + Sync,
{
    let n = grid.len();
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut theta = vec![0.0; grid.dim()];
            let mut acc = T::default();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(n) {
                grid.node_into(idx, &mut theta);
                acc += f(&theta);
            }
            acc
        })
        .collect();
    let mut total = T::default();
    for p in partial {
        total += p;
    }
    total
}

/// Result of a trace inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Imaginary part of the quadrature, which should vanish.
    pub imag: f64,
}

/// `c_P Σ_k Tr(ρ_{θ_k}(g)* F(θ_k)) · vol`.
pub fn plancherel_inverse<F>(f: F, g: &GroupElement, grid: &TorusGrid) -> Inversion
where
    F: Fn(&[f64]) -> Mat2 + Sync,
{
    inverse_with_weight(f, g, grid, plancherel_weight(grid.dim()))
}

pub fn inverse_with_weight<F>(f: F, g: &GroupElement, grid: &TorusGrid, weight: f64) -> Inversion
where
    F: Fn(&[f64]) -> Mat2 + Sync,
{
    let s: Complex64 = grid_sum(grid, |theta| {
        (rho2(theta, g).adjoint() * f(theta)).trace()
    });
    let s = s * (weight * grid.cell_volume());
    Inversion {
        value: s.re,
        imag: s.im,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `Σ |f(g)|²` against `c_P ∫ Tr(f̂ f̂*)`.
pub fn parseval_check<W: Weight>(f: &GroupDistribution<W>, grid: &TorusGrid) -> ParsevalReport {
    parseval_with_weight(f, grid, plancherel_weight(f.dim()))
}

pub fn parseval_with_weight<W: Weight>(
    f: &GroupDistribution<W>,
    grid: &TorusGrid,
    weight: f64,
) -> ParsevalReport {
    let lhs: f64 = f.atoms().map(|(_, w)| w.to_f64().powi(2)).sum();
    let fa = FourierAtoms::new(f);
    let s: f64 = grid_sum(grid, |theta| {
        let m = fa.eval(theta);
        (m * m.adjoint()).trace().re
    });
    let rhs = s * weight * grid.cell_volume();
    ParsevalReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::convolve;

    fn g(f: i64, m: &[i64]) -> GroupElement {
        GroupElement::new(f, m.to_vec()).unwrap()
    }

    fn nu1() -> GroupDistribution<f64> {
        GroupDistribution::new(
            1,
            [
                (g(1, &[0]), 0.25),
                (g(1, &[1]), 0.125),
                (g(1, &[-1]), 0.125),
                (g(-1, &[0]), 0.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rho2_examples() {
        let m = rho2(&[PI / 2.0], &g(-1, &[1]));
        let i = Complex64::i();
        assert!(m.max_abs_diff(&Mat2::new(0.0.into(), i, -i, 0.0.into())) < 1e-15);
        assert!(rho2(&[1.3, 0.2], &GroupElement::identity(2)).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn rho1_characters() {
        let zero = DualPoint::new(&[0.0]);
        let pi = DualPoint::new(&[PI]);
        for m in -3..=3 {
            for f in [1, -1] {
                assert_eq!(rho1(&zero, 1, &g(f, &[m])).unwrap().re, 1.0);
                let expect = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(rho1(&pi, 1, &g(f, &[m])).unwrap().re, expect);
            }
            assert_eq!(rho1(&zero, -1, &g(-1, &[m])).unwrap().re, -1.0);
        }
        assert!(rho1(&DualPoint::new(&[0.3]), 1, &g(1, &[0])).is_err());
    }

    #[test]
    fn td_membership() {
        assert!(DualPoint::new(&[0.0, PI]).in_td());
        assert!(DualPoint::new(&[TAU, -PI]).in_td());
        assert!(!DualPoint::new(&[0.0, 1.0]).in_td());
    }

    #[test]
    fn conjugate_u_example() {
        let m = conjugate_u(&rho2(&[PI], &g(-1, &[0])));
        assert!(m.max_abs_diff(&Mat2::real(1.0, 0.0, 0.0, -1.0)) < 1e-15);
        assert!(conjugate_u(&Mat2::IDENTITY).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn positive_type_cases() {
        let s = Complex64::new(0.3, -1.2);
        let t = Complex64::new(-0.7, 0.4);
        let a = positive_type(&[0.9], s, t, &g(1, &[0]));
        assert!((a - (s.norm_sqr() + t.norm_sqr())).norm() < 1e-15);
        let b = positive_type(&[0.9], s, t, &g(-1, &[0]));
        assert!((b - (t * s.conj() + s * t.conj())).norm() < 1e-15);
    }

    #[test]
    fn fourier_of_nu1() {
        for &t in &[0.0, 0.4, PI, 5.0] {
            let f = fourier(&nu1(), &[t]);
            let a = (1.0 + t.cos()) / 4.0;
            assert!(f.max_abs_diff(&Mat2::real(a, 0.5, 0.5, a)) < 1e-15);
            assert!(FourierAtoms::new(&nu1()).eval(&[t]).max_abs_diff(&f) < 1e-15);
        }
        let e = GroupDistribution::<f64>::delta(GroupElement::identity(1));
        assert!(fourier(&e, &[1.0]).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn fourier_is_multiplicative() {
        let a = GroupDistribution::new(1, [(g(1, &[2]), 0.3), (g(-1, &[1]), 0.7)]).unwrap();
        let b = GroupDistribution::new(1, [(g(-1, &[-3]), 0.6), (g(1, &[1]), 0.4)]).unwrap();
        let ab = convolve(&a, &b).unwrap();
        for &t in &[0.2, 1.7, 3.9] {
            let lhs = fourier(&ab, &[t]);
            let rhs = fourier(&a, &[t]) * fourier(&b, &[t]);
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }
    }

    #[test]
    fn inversion_self_tests() {
        let e = GroupElement::identity(1);
        let r = plancherel_inverse(|_| Mat2::IDENTITY, &e, &TorusGrid::uniform(1, 5));
        assert!((r.value - 1.0).abs() < 1e-15);
        let bad = inverse_with_weight(|_| Mat2::IDENTITY, &e, &TorusGrid::uniform(1, 5), uncorrected_weight(1));
        assert!((bad.value - 2.0).abs() < 1e-14);

        let fa = FourierAtoms::new(&nu1());
        let grid = TorusGrid::uniform(1, 3);
        let r = plancherel_inverse(|t| fa.eval(t), &g(1, &[0]), &grid);
        assert!((r.value - 0.25).abs() < 1e-15 && r.imag.abs() < 1e-15);
        let grid = TorusGrid::uniform(1, 5);
        let r = plancherel_inverse(|t| { let m = fa.eval(t); m * m }, &e, &grid);
        assert!((r.value - 11.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn parseval_examples() {
        let e = GroupDistribution::<f64>::delta(GroupElement::identity(2));
        let r = parseval_check(&e, &TorusGrid::uniform(2, 1));
        assert!((r.lhs - 1.0).abs() < 1e-15 && r.gap < 1e-15);
        let r = parseval_check(&nu1(), &TorusGrid::exact_for_degree(&[2]));
        assert!(r.gap < 1e-15, "{r:?}");
        let zero = GroupDistribution::<f64>::from_atoms_unchecked(1, []).unwrap();
        let r = parseval_check(&zero, &TorusGrid::uniform(1, 3));
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn grid_nodes() {
        let grid = TorusGrid::per_axis(vec![2, 3]);
        assert_eq!(grid.len(), 6);
        assert_eq!(grid.node(4), vec![PI, TAU / 3.0]);
        let m = TorusGrid::midpoint(1, 4);
        assert_eq!(m.node(0), vec![TAU / 8.0]);
        let c: f64 = grid_sum(&grid, |_| 1.0) * grid.cell_volume() / TAU.powi(2);
        assert!((c - 1.0).abs() < 1e-15);
    }
}
