//! Twisted transfer operators `L_θ^{s} v = L(1_{ε=s} e^{i⟨θ,ψ⟩} v)` on
//! cell-constant functions.

use super::model::MarkovGibbsModel;
use crate::dual::{rho2_raw, Mat2};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// `(L_θ^s)[b][a] = k(a, b) 1{ε_a = s} e^{i⟨θ, ψ_a⟩}`.
pub fn twisted_block(m: &MarkovGibbsModel, theta: &[f64], s: i8) -> CMatrix {
    let n = m.states();
    CMatrix::from_fn(n, n, |b, a| {
        if m.eps()[a] != s {
            return Complex64::new(0.0, 0.0);
        }
        let k = m.kernel(a, b);
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase: f64 = theta.iter().zip(&m.psi()[a]).map(|(t, &x)| t * x as f64).sum();
        Complex64::from_polar(k, phase)
    })
}

/// `∂/∂θ_j L_θ^s` at θ = 0.
pub fn twisted_block_derivative(m: &MarkovGibbsModel, j: usize, s: i8) -> CMatrix {
    let n = m.states();
    CMatrix::from_fn(n, n, |b, a| {
        if m.eps()[a] != s {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, m.kernel(a, b) * m.psi()[a][j] as f64)
    })
}

/// The four blocks at θ and their 2N×2N assembly
/// `[[L_θ^{+1}, L_θ^{−1}], [L_{−θ}^{−1}, L_{−θ}^{+1}]]`, which is the
/// transfer operator twisted by `ρ_θ` in the basis (component, state).
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub theta: Vec<f64>,
    /// `[L_θ^{+1}, L_θ^{−1}, L_{−θ}^{−1}, L_{−θ}^{+1}]`.
    pub blocks: [CMatrix; 4],
    pub assembled: CMatrix,
}

pub fn twisted_blocks(m: &MarkovGibbsModel, theta: &[f64]) -> BlockOperator {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    let blocks = [
        twisted_block(m, theta, 1),
        twisted_block(m, theta, -1),
        twisted_block(m, &neg, -1),
        twisted_block(m, &neg, 1),
    ];
    let n = m.states();
    let mut assembled = CMatrix::zeros(2 * n, 2 * n);
    for (i, b) in blocks.iter().enumerate() {
        let (r, c) = (i / 2, i % 2);
        assembled.view_mut((r * n, c * n), (n, n)).copy_from(b);
    }
    BlockOperator {
        theta: theta.to_vec(),
        blocks,
        assembled,
    }
}

/// The assembled operator restricted to functions constant on column
/// classes (states `b` with the same kernel column `k(·, b)`). Its image
/// always lies in that subspace, so powers applied to class-constant
/// vectors and the nonzero spectrum agree with the full operator.
#[derive(Clone, Debug)]
pub struct ReducedOperator {
    classes: usize,
    class_of: Vec<usize>,
    /// `π(C) = Σ_{b ∈ C} π_b`.
    class_pi: Vec<f64>,
    /// `(row class, source state, k(a, rep C))`.
    entries: Vec<(usize, usize, f64)>,
    flips: Vec<i8>,
    psi: Vec<Vec<i64>>,
    kernel_rows: Vec<Vec<f64>>,
}

impl ReducedOperator {
    pub fn new(m: &MarkovGibbsModel) -> Self {
        let (classes, class_of) = m.column_classes();
        let class_pi = classes
            .iter()
            .map(|c| c.iter().map(|&b| m.pi()[b]).sum())
            .collect();
        let mut entries = Vec::new();
        let mut kernel_rows = Vec::new();
        for (c, members) in classes.iter().enumerate() {
            let rep = members[0];
            let row: Vec<f64> = (0..m.states()).map(|a| m.kernel(a, rep)).collect();
            for (a, &k) in row.iter().enumerate() {
                if k != 0.0 {
                    entries.push((c, a, k));
                }
            }
            kernel_rows.push(row);
        }
        Self {
            classes: classes.len(),
            class_of,
            class_pi,
            entries,
            flips: m.eps().to_vec(),
            psi: m.psi().to_vec(),
            kernel_rows,
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn class_pi(&self) -> &[f64] {
        &self.class_pi
    }

    /// 2C×2C matrix in the (component, class) basis.
    pub fn matrix(&self, theta: &[f64]) -> CMatrix {
        let nc = self.classes;
        let mut out = CMatrix::zeros(2 * nc, 2 * nc);
        for &(c, a, k) in &self.entries {
            let r = rho2_raw(theta, self.flips[a], &self.psi[a]).scale(Complex64::new(k, 0.0));
            let ca = self.class_of[a];
            for i in 0..2 {
                for j in 0..2 {
                    out[(i * nc + c, j * nc + ca)] += r.0[i][j];
                }
            }
        }
        out
    }

    /// First application of the operator to `v ⊗ I₂` for an arbitrary
    /// cell vector `v`: a 2C×2 matrix.
    pub fn apply_first(&self, theta: &[f64], v: &[f64]) -> CMatrix {
        let nc = self.classes;
        let mut out = CMatrix::zeros(2 * nc, 2);
        for &(c, a, k) in &self.entries {
            let r = rho2_raw(theta, self.flips[a], &self.psi[a]).scale(Complex64::new(k * v[a], 0.0));
            for i in 0..2 {
                for j in 0..2 {
                    out[(i * nc + c, j)] += r.0[i][j];
                }
            }
        }
        out
    }

    /// `𝟙 ⊗ I₂` in the reduced basis.
    pub fn ones(&self) -> CMatrix {
        let nc = self.classes;
        CMatrix::from_fn(2 * nc, 2, |r, c| {
            Complex64::new(if r / nc == c { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// `Σ_C ω_C x[(i, C), j]` as a 2×2 matrix.
    pub fn pair(&self, omega: &[f64], x: &CMatrix) -> Mat2 {
        let nc = self.classes;
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                for c in 0..nc {
                    out.0[i][j] += x[(i * nc + c, j)] * omega[c];
                }
            }
        }
        out
    }

    /// `ω_C = Σ_{b ∈ C} π_b w_b`.
    pub fn class_weights(&self, pi: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.classes];
        for (b, &c) in self.class_of.iter().enumerate() {
            out[c] += pi[b] * w[b];
        }
        out
    }

    /// `k(·, rep C)` for each class.
    pub fn kernel_rows(&self) -> &[Vec<f64>] {
        &self.kernel_rows
    }
}

/// `x ↦ Aⁿ x` by binary powering.
pub fn power_apply(a: &CMatrix, n: usize, x: CMatrix) -> CMatrix {
    let mut result = x;
    let mut base = a.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &base * &result;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn zero_twist_is_markov() {
        for m in [fixtures::gm_bern(), fixtures::gm_markov()] {
            let b = twisted_blocks(&m, &[0.0]);
            let sum = &b.blocks[0] + &b.blocks[1];
            let ones = CMatrix::from_element(m.states(), 1, Complex64::new(1.0, 0.0));
            assert!((&sum * &ones - &ones).norm() < 1e-15);
            assert_eq!(b.blocks[0], b.blocks[3]);
            assert_eq!(b.blocks[1], b.blocks[2]);
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let m = fixtures::gm_markov();
        let a = twisted_blocks(&m, &[0.7]).assembled;
        let b = twisted_blocks(&m, &[-0.7]).assembled;
        assert!((a.conjugate() - b).norm() < 1e-15);
    }

    #[test]
    fn bernoulli_blocks_are_rank_one() {
        let m = fixtures::gm_bern();
        let b = twisted_blocks(&m, &[0.3]);
        for blk in &b.blocks {
            for r in 1..m.states() {
                assert!((blk.row(r) - blk.row(0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn reduced_spectrum_matches_full() {
        let m = fixtures::gm_markov();
        let theta = [1.1];
        let full = twisted_blocks(&m, &theta).assembled;
        let red = ReducedOperator::new(&m);
        assert_eq!(red.classes(), 4);
        let r1 = spectral_radius(&full);
        let r2 = spectral_radius(&red.matrix(&theta));
        assert!((r1 - r2).abs() < 1e-12);
    }

    fn spectral_radius(a: &CMatrix) -> f64 {
        a.clone()
            .schur()
            .unpack()
            .1
            .diagonal()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
