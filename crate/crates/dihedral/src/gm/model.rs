//! Finite-state Gibbs–Markov models carrying a G_d-valued label per state.

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg::Matrix;
use crate::weight::{f64_to_ratio, Weight};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

/// Stationary Markov chain on `N` cells. State `a` contributes the step
/// `(eps[a], psi[a])`; `invol` is the involution `S` on cells.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovGibbsModel {
    d: usize,
    p: Matrix<f64>,
    pi: Vec<f64>,
    eps: Vec<i8>,
    psi: Vec<Vec<i64>>,
    invol: Vec<usize>,
    exact: Option<(Matrix<BigRational>, Vec<BigRational>)>,
}

impl MarkovGibbsModel {
    /// Exact model. Checks shapes only; use [`validate_model`] for the
    /// dynamical assumptions.
    pub fn new_exact(
        d: usize,
        p: Matrix<BigRational>,
        pi: Vec<BigRational>,
        eps: Vec<i8>,
        psi: Vec<Vec<i64>>,
        invol: Vec<usize>,
    ) -> Result<Self> {
        let pf = p.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect();
        let pif = pi.iter().map(|x| x.to_f64()).collect();
        let mut m = Self::new(d, pf, pif, eps, psi, invol)?;
        m.exact = Some((p, pi));
        Ok(m)
    }

    pub fn new(
        d: usize,
        p: Matrix<f64>,
        pi: Vec<f64>,
        eps: Vec<i8>,
        psi: Vec<Vec<i64>>,
        invol: Vec<usize>,
    ) -> Result<Self> {
        let n = pi.len();
        let bad = |s: &str| Err(Error::InvalidModel(s.to_string()));
        if n == 0 {
            return bad("no states");
        }
        if d == 0 {
            return bad("dimension must be at least 1");
        }
        if p.len() != n || p.iter().any(|r| r.len() != n) {
            return bad("P must be N×N");
        }
        if eps.len() != n || psi.len() != n || invol.len() != n {
            return bad("eps, psi and invol must have one entry per state");
        }
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return bad("eps entries must be +1 or -1");
        }
        if psi.iter().any(|v| v.len() != d) {
            return bad("every psi entry must have length d");
        }
        if invol.iter().any(|&s| s >= n) {
            return bad("invol entries must be state indices");
        }
        if p.iter().flatten().chain(&pi).any(|x| !x.is_finite()) {
            return bad("non-finite probability");
        }
        Ok(Self {
            d,
            p,
            pi,
            eps,
            psi,
            invol,
            exact: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn states(&self) -> usize {
        self.pi.len()
    }
    pub fn p(&self) -> &Matrix<f64> {
        &self.p
    }
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }
    pub fn eps(&self) -> &[i8] {
        &self.eps
    }
    pub fn psi(&self) -> &[Vec<i64>] {
        &self.psi
    }
    pub fn invol(&self) -> &[usize] {
        &self.invol
    }
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn label(&self, a: usize) -> GroupElement {
        GroupElement {
            flip: self.eps[a],
            trans: self.psi[a].clone(),
        }
    }

    /// Largest |ψ_j| per coordinate.
    pub fn max_abs_psi(&self) -> Vec<i64> {
        (0..self.d)
            .map(|j| self.psi.iter().map(|v| v[j].abs()).max().unwrap_or(0))
            .collect()
    }

    /// Transition matrix and stationary vector in the requested field.
    /// Float models are converted to rationals exactly (dyadic values).
    pub fn weights<W: Weight>(&self) -> (Matrix<W>, Vec<W>) {
        match &self.exact {
            Some((p, pi)) => (
                p.iter().map(|r| r.iter().map(W::from_ratio).collect()).collect(),
                pi.iter().map(W::from_ratio).collect(),
            ),
            None => {
                let conv = |x: &f64| W::from_ratio(&f64_to_ratio(*x).unwrap_or_else(BigRational::zero));
                (
                    self.p.iter().map(|r| r.iter().map(conv).collect()).collect(),
                    self.pi.iter().map(conv).collect(),
                )
            }
        }
    }

    /// Transfer kernel `k(a, b) = π_a P_ab / π_b`, so that
    /// `(L v)(b) = Σ_a k(a, b) v(a)` and `L 1 = 1`.
    pub fn kernel(&self, a: usize, b: usize) -> f64 {
        if self.p[a][b] == 0.0 {
            0.0
        } else {
            self.pi[a] * self.p[a][b] / self.pi[b]
        }
    }

    /// Groups of states with identical rows of P.
    pub fn row_classes(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        group_identical(self.states(), |a| self.p[a].clone())
    }

    /// Groups of states with identical incoming kernel columns `k(·, b)`.
    pub fn column_classes(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.states();
        group_identical(n, |b| (0..n).map(|a| self.kernel(a, b)).collect::<Vec<f64>>())
    }

    /// Independent product with an i.i.d. "lazy" coordinate: each state is
    /// split into three, appending ψ ∈ {−1, 0, +1} with probabilities
    /// ¼, ½, ¼. The involution acts on the base factor only.
    pub fn with_lazy_coordinate(&self) -> MarkovGibbsModel {
        let lazy: [(i64, BigRational); 3] = [
            (-1, BigRational::new(1.into(), 4.into())),
            (0, BigRational::new(1.into(), 2.into())),
            (1, BigRational::new(1.into(), 4.into())),
        ];
        let (p, pi): (Matrix<BigRational>, Vec<BigRational>) = self.weights();
        let n = self.states();
        let idx = |a: usize, c: usize| 3 * a + c;
        let mut np = vec![vec![BigRational::zero(); 3 * n]; 3 * n];
        let mut npi = vec![BigRational::zero(); 3 * n];
        let mut eps = vec![1; 3 * n];
        let mut psi = vec![vec![]; 3 * n];
        let mut invol = vec![0; 3 * n];
        for a in 0..n {
            for (c, (shift, q)) in lazy.iter().enumerate() {
                let s = idx(a, c);
                npi[s] = pi[a].clone() * q.clone();
                eps[s] = self.eps[a];
                let mut v = self.psi[a].clone();
                v.push(*shift);
                psi[s] = v;
                invol[s] = idx(self.invol[a], c);
                for b in 0..n {
                    for (c2, (_, q2)) in lazy.iter().enumerate() {
                        np[s][idx(b, c2)] = p[a][b].clone() * q2.clone();
                    }
                }
            }
        }
        MarkovGibbsModel::new_exact(self.d + 1, np, npi, eps, psi, invol)
            .expect("product of a valid model")
    }
}

fn group_identical<K: PartialEq>(n: usize, key: impl Fn(usize) -> K) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut keys: Vec<K> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; n];
    for s in 0..n {
        let k = key(s);
        match keys.iter().position(|x| *x == k) {
            Some(c) => {
                classes[c].push(s);
                class_of[s] = c;
            }
            None => {
                keys.push(k);
                classes.push(vec![s]);
                class_of[s] = classes.len() - 1;
            }
        }
    }
    (classes, class_of)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub exact: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Checks every structural assumption: stochasticity, stationarity,
/// irreducibility, the involution (flips ε, preserves π and rows of P) and
/// the centring conditions `Σ π 1_{ε=1} ψ = 0`, `Σ π ψ = 0`.
pub fn validate_model(m: &MarkovGibbsModel) -> ValidationReport {
    if m.is_exact() {
        validate_in::<BigRational>(m, 0.0)
    } else {
        validate_in::<f64>(m, 1e-12)
    }
}

fn validate_in<W: Weight>(m: &MarkovGibbsModel, tol: f64) -> ValidationReport {
    let (p, pi) = m.weights::<W>();
    let n = m.states();
    let s = m.invol();
    let absf = |w: W| w.to_f64().abs();
    let maxf = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };
    let sum = |it: &mut dyn Iterator<Item = W>| {
        let mut t = W::zero();
        for x in it {
            t += x;
        }
        t
    };

    let mut plus = vec![W::zero(); m.dim()];
    let mut all = vec![W::zero(); m.dim()];
    let mut half = W::zero();
    for a in 0..n {
        for j in 0..m.dim() {
            let v = pi[a].clone() * W::from_i64(m.psi()[a][j]);
            if m.eps()[a] == 1 {
                plus[j] += v.clone();
            }
            all[j] += v;
        }
        if m.eps()[a] == 1 {
            half += pi[a].clone();
        }
    }
    let two = W::one() + W::one();

    let residuals: Vec<(&'static str, f64)> = vec![
        (
            "nonnegative",
            maxf(&mut p.iter().flatten().chain(&pi).map(|x| (-x.to_f64()).max(0.0))),
        ),
        (
            "row_sums",
            maxf(&mut (0..n).map(|a| absf(sum(&mut p[a].iter().cloned()) - W::one()))),
        ),
        ("pi_normalized", absf(sum(&mut pi.iter().cloned()) - W::one())),
        ("pi_positive", flag(pi.iter().all(|x| x.is_positive()))),
        (
            "stationary",
            maxf(&mut (0..n).map(|b| {
                absf(sum(&mut (0..n).map(|a| pi[a].clone() * p[a][b].clone())) - pi[b].clone())
            })),
        ),
        ("irreducible", flag(irreducible(&p))),
        ("involution", flag((0..n).all(|a| s[s[a]] == a))),
        ("involution_flips_eps", flag((0..n).all(|a| m.eps()[s[a]] == -m.eps()[a]))),
        (
            "involution_preserves_pi",
            maxf(&mut (0..n).map(|a| absf(pi[s[a]].clone() - pi[a].clone()))),
        ),
        (
            "involution_preserves_rows",
            maxf(&mut (0..n).flat_map(|a| {
                let (p, s) = (&p, &s);
                (0..n).map(move |b| (p[s[a]][b].to_f64() - p[a][b].to_f64()).abs())
            })),
        ),
        ("centred_plus", maxf(&mut plus.into_iter().map(absf))),
        ("centred", maxf(&mut all.into_iter().map(absf))),
        ("half_plus_mass", absf(half - W::one() / two)),
    ];
    ValidationReport {
        exact: m.is_exact(),
        checks: residuals
            .into_iter()
            .map(|(name, residual)| Check {
                name,
                pass: residual <= tol,
                residual,
            })
            .collect(),
    }
}

fn irreducible<W: Weight>(p: &Matrix<W>) -> bool {
    let n = p.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..n {
                let w = if forward { &p[a][b] } else { &p[b][a] };
                if !seen[b] && w.is_positive() {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen.iter().all(|&x| x)
    };
    reach(true) && reach(false)
}

/// One-step law of the cocycle under μ: `Σ_a π_a δ_{(ε_a, ψ_a)}`.
pub fn one_step_law<W: Weight>(m: &MarkovGibbsModel) -> crate::GroupDistribution<W> {
    let (_, pi) = m.weights::<W>();
    crate::GroupDistribution::from_atoms_unchecked(
        m.dim(),
        (0..m.states()).map(|a| (m.label(a), pi[a].clone())),
    )
    .expect("labels have the model dimension")
}

