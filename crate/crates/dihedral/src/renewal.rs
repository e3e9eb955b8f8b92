//! First returns of `ψ_n` to the identity, the renewal identity and tail
//! diagnostics.

use crate::dual::{plancherel_weight, TorusGrid};
use crate::error::{Error, Result};
use crate::gm::operator::{power_apply, CMatrix, ReducedOperator};
use crate::gm::{CocycleDp, MarkovGibbsModel};
use crate::rw::fold_grid;
use crate::linalg::Matrix;
use crate::weight::Weight;
use num_complex::Complex64;
use serde::Serialize;

/// `f[n] = μ(τ = n)`, `tail[n] = μ(τ ≥ n)` and `u[n] = μ(ψ_n = e)`, all
/// indexed by `n` (`f[0] = 0`, `tail[0] = tail[1] = 1`, `u[0] = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnLaw<W> {
    pub f: Vec<W>,
    pub tail: Vec<W>,
    pub u: Vec<W>,
}

/// `f[1..=n_max]` by the taboo recursion: identity mass is removed after
/// every intermediate step.
pub fn taboo_pmf<W: Weight>(m: &MarkovGibbsModel, n_max: usize) -> Vec<W> {
    let mut f = vec![W::zero()];
    if n_max == 0 {
        return f;
    }
    let mut dp = CocycleDp::<W>::new(m, n_max, None);
    loop {
        f.push(dp.identity_mass());
        if dp.steps() == n_max {
            break;
        }
        dp.clear_identity();
        dp.step();
    }
    f
}

/// `u[0..=n_max]` by the unconstrained recursion.
pub fn return_probabilities<W: Weight>(m: &MarkovGibbsModel, n_max: usize) -> Vec<W> {
    let mut u = vec![W::one()];
    if n_max == 0 {
        return u;
    }
    let mut dp = CocycleDp::<W>::new(m, n_max, None);
    loop {
        u.push(dp.identity_mass());
        if dp.steps() == n_max {
            break;
        }
        dp.step();
    }
    u
}

fn tail_from<W: Weight>(f: &[W]) -> Vec<W> {
    let mut tail = vec![W::one(); f.len() + 1];
    let mut acc = W::one();
    for n in 1..f.len() {
        tail[n] = acc.clone();
        acc = acc - f[n].clone();
    }
    tail[f.len()] = acc;
    tail
}

pub fn first_return_pmf<W: Weight>(m: &MarkovGibbsModel, n_max: usize) -> ReturnLaw<W> {
    let f = taboo_pmf(m, n_max);
    ReturnLaw {
        tail: tail_from(&f),
        u: return_probabilities(m, n_max),
        f,
    }
}

/// Both readings of the renewal identity up to `n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenewalCheck {
    /// `max_n |u[n] − Σ_{k≥1} f^{∗k}[n]|` for the scalar sequences. This
    /// vanishes when returns regenerate the chain (i.i.d. steps) but not
    /// for general Markov models.
    pub scalar_gap: f64,
    /// `max |Û_n − Σ_{k=1}^n F̂_k D⁻¹ Û_{n−k}|` for the state-resolved
    /// kernels of [`return_kernels`]: the operator identity
    /// `Σ_m L̃_z^m = Σ_n zⁿ Lⁿ 1{ψ_n = e}` coefficient by coefficient.
    pub operator_gap: f64,
}

pub fn renewal_check<W: Weight>(m: &MarkovGibbsModel, n_max: usize) -> RenewalCheck {
    let law = first_return_pmf::<W>(m, n_max);
    RenewalCheck {
        scalar_gap: renewal_gap(&law.f, &law.u),
        operator_gap: operator_renewal_gap(m, &return_kernels::<W>(m, n_max)),
    }
}

/// `u[n][a][c] = μ(a_0 = a, ψ_n = e, a_n = c)` and
/// `f[n][a][c] = μ(a_0 = a, τ = n, a_n = c)`, where `a_n` is the state at
/// time n (the one that produces the next step).
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnKernels<W> {
    pub u: Vec<Matrix<W>>,
    pub f: Vec<Matrix<W>>,
}

impl<W: Weight> ReturnKernels<W> {
    /// The scalar sequences `Σ_{a,c} u[n][a][c]` and likewise for f.
    pub fn totals(&self) -> (Vec<W>, Vec<W>) {
        let total = |ms: &[Matrix<W>]| {
            ms.iter()
                .map(|m| {
                    let mut s = W::zero();
                    for x in m.iter().flatten() {
                        s += x.clone();
                    }
                    s
                })
                .collect()
        };
        (total(&self.u), total(&self.f))
    }
}

pub fn return_kernels<W: Weight>(m: &MarkovGibbsModel, n_max: usize) -> ReturnKernels<W> {
    let n = m.states();
    let (_, pi) = m.weights::<W>();
    let unit = |i: usize| -> Vec<W> { (0..n).map(|j| if i == j { W::one() } else { W::zero() }).collect() };
    let mut u = vec![crate::linalg::zeros::<W>(n, n); n_max + 1];
    let mut f = u.clone();
    for a in 0..n {
        u[0][a][a] = pi[a].clone();
    }
    if n_max == 0 {
        return ReturnKernels { u, f };
    }
    let e = crate::group::GroupElement::identity(m.dim());
    let targets: Vec<Vec<W>> = (0..n).map(unit).collect();
    for a in 0..n {
        let start = unit(a);
        for (taboo, out) in [(false, &mut u), (true, &mut f)] {
            let mut dp = CocycleDp::<W>::new(m, n_max, Some(&start));
            loop {
                let k = dp.steps();
                for c in 0..n {
                    out[k][a][c] = dp.paired_mass(&e, Some(&targets[c]));
                }
                if k == n_max {
                    break;
                }
                if taboo {
                    dp.clear_identity();
                }
                dp.step();
            }
        }
    }
    ReturnKernels { u, f }
}

pub fn operator_renewal_gap<W: Weight>(m: &MarkovGibbsModel, k: &ReturnKernels<W>) -> f64 {
    let n = m.states();
    let (_, pi) = m.weights::<W>();
    let mut gap = 0.0f64;
    for t in 1..k.u.len() {
        for a in 0..n {
            for c in 0..n {
                let mut s = W::zero();
                for j in 1..=t {
                    for b in 0..n {
                        if k.f[j][a][b].is_zero() {
                            continue;
                        }
                        s += k.f[j][a][b].clone() * k.u[t - j][b][c].clone() / pi[b].clone();
                    }
                }
                gap = gap.max((k.u[t][a][c].clone() - s).to_f64().abs());
            }
        }
    }
    gap
}

pub fn renewal_gap<W: Weight>(f: &[W], u: &[W]) -> f64 {
    let n_max = f.len() - 1;
    let mut total = vec![W::zero(); n_max + 1];
    let mut power = f.to_vec();
    for _ in 1..=n_max {
        for n in 1..=n_max {
            total[n] += power[n].clone();
        }
        let mut next = vec![W::zero(); n_max + 1];
        for i in 1..=n_max {
            if power[i].is_zero() {
                continue;
            }
            for j in 1..=n_max - i {
                next[i + j] += power[i].clone() * f[j].clone();
            }
        }
        power = next;
    }
    (1..=n_max)
        .map(|n| (u[n].clone() - total[n].clone()).to_f64().abs())
        .fold(0.0, f64::max)
}

/// Which normalisation makes the return tail flat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailScaling {
    /// `tail·√n` (d = 1).
    Sqrt,
    /// `tail·log n` (d = 2).
    Log,
    /// Partial sums of `f` with a remainder bound (d ≥ 3).
    Transient,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailDiagnostic {
    pub dim: usize,
    pub scaling: TailScaling,
    pub checkpoints: Vec<usize>,
    /// `μ(τ > n)` at each checkpoint.
    pub tail: Vec<f64>,
    /// `tail·√n`, `tail·log n` or `Σ_{k≤n} f[k]`.
    pub scaled: Vec<f64>,
    /// `scaled[i+1] / scaled[i]`.
    pub ratios: Vec<f64>,
    /// d ≥ 3: bound on `Σ_{n>N} f[n]` at the last checkpoint N.
    pub remainder_bound: Option<f64>,
    /// d ≥ 3: `Σ_{n≤N} f[n] + remainder_bound`.
    pub total_bound: Option<f64>,
}

/// Tail statistics at the given checkpoints (sorted, ≥ 2). For d ≥ 3 the
/// remainder is bounded through `Σ_{n>N} f[n] ≤ Σ_{n>N} u[n]`, evaluated by
/// Fourier inversion on midpoint grids with `grid_k` and `2·grid_k` nodes
/// per axis.
pub fn tail_diagnostic(m: &MarkovGibbsModel, checkpoints: &[usize], grid_k: usize) -> Result<TailDiagnostic> {
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if cps.first().is_none_or(|&c| c < 2) {
        return Err(Error::InvalidArgument("checkpoints must be at least 2".into()));
    }
    let n_max = *cps.last().unwrap();
    let f = taboo_pmf::<f64>(m, n_max);
    let d = m.dim();
    let scaling = match d {
        1 => TailScaling::Sqrt,
        2 => TailScaling::Log,
        _ => TailScaling::Transient,
    };
    // Prefix sums; tail after n steps is 1 − Σ_{k≤n} f[k].
    let mut cum = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        cum[n] = cum[n - 1] + f[n];
    }
    let tail: Vec<f64> = cps.iter().map(|&n| 1.0 - cum[n]).collect();
    let scaled: Vec<f64> = cps
        .iter()
        .zip(&tail)
        .map(|(&n, &t)| match scaling {
            TailScaling::Sqrt => t * (n as f64).sqrt(),
            TailScaling::Log => t * (n as f64).ln(),
            TailScaling::Transient => cum[n],
        })
        .collect();
    let ratios = scaled.windows(2).map(|w| w[1] / w[0]).collect();
    let (remainder_bound, total_bound) = if scaling == TailScaling::Transient {
        let r = return_remainder_bound(m, n_max, grid_k);
        (Some(r), Some(cum[n_max] + r))
    } else {
        (None, None)
    };
    Ok(TailDiagnostic {
        dim: d,
        scaling,
        checkpoints: cps,
        tail,
        scaled,
        ratios,
        remainder_bound,
        total_bound,
    })
}

/// `Σ_{n>N} u[n] = c_P ∫ Tr Π₀ A^{N+1} (I − A)^{−1} 𝟙 dθ`, on a midpoint
/// grid (θ = 0, where `I − A` is singular, is never a node).
pub fn return_remainder(m: &MarkovGibbsModel, n: usize, grid_k: usize) -> f64 {
    let red = ReducedOperator::new(m);
    let grid = TorusGrid::midpoint(m.dim(), grid_k);
    let omega = red.class_pi().to_vec();
    let s = fold_grid(&grid, 1, |theta, acc| {
        let a = red.matrix(theta);
        let dim = a.nrows();
        let resolvent = (CMatrix::identity(dim, dim) - &a)
            .lu()
            .solve(&red.ones())
            .expect("I − A is invertible off θ = 0");
        let x = power_apply(&a, n + 1, resolvent);
        acc[0] += red.pair(&omega, &x).trace();
    });
    s[0].re * plancherel_weight(m.dim()) * grid.cell_volume()
}

/// Larger of the two grid values plus their difference.
pub fn return_remainder_bound(m: &MarkovGibbsModel, n: usize, grid_k: usize) -> f64 {
    let a = return_remainder(m, n, grid_k);
    let b = return_remainder(m, n, 2 * grid_k);
    a.max(b) + (a - b).abs()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeneratingFunction {
    pub f_z: [f64; 2],
    pub u_z: [f64; 2],
    /// `|U(z)(1 − F(z)) − 1|` for the truncated series.
    pub gap: f64,
    /// A priori bound `Σ_{N<n≤2N} |z|ⁿ` on the gap, from `0 ≤ u, f ≤ 1`,
    /// plus a rounding allowance of `8(N+1)ε`. Only meaningful where the
    /// scalar renewal identity holds (see [`RenewalCheck`]).
    pub truncation: f64,
}

/// Truncated `F(z) = Σ f[n] zⁿ` and `U(z) = Σ u[n] zⁿ` with the renewal
/// identity gap. Requires `|z| ≤ 1`, `z ≠ 1`.
pub fn generating_function(m: &MarkovGibbsModel, z: Complex64, n_max: usize) -> Result<GeneratingFunction> {
    if z.norm() > 1.0 {
        return Err(Error::InvalidArgument(format!("|z| = {} exceeds 1", z.norm())));
    }
    if z == Complex64::new(1.0, 0.0) {
        return Err(Error::InvalidArgument("z = 1 is excluded".into()));
    }
    let law = first_return_pmf::<f64>(m, n_max);
    let (mut fz, mut uz, mut zn) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for n in 0..=n_max {
        fz += law.f[n] * zn;
        uz += law.u[n] * zn;
        zn *= z;
    }
    let r = z.norm();
    let truncation = (n_max + 1..=2 * n_max).map(|n| r.powi(n as i32)).sum::<f64>()
        + 8.0 * (n_max + 1) as f64 * f64::EPSILON;
    Ok(GeneratingFunction {
        f_z: [fz.re, fz.im],
        u_z: [uz.re, uz.im],
        gap: (uz * (1.0 - fz) - 1.0).norm(),
        truncation,
    })
}
