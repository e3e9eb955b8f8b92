//! Exact forward dynamic programming for the cocycle `ψ_n` of a finite
//! Gibbs–Markov model.
//!
//! The table after `k` steps holds `E[v(a_0); a_{k−1} ∈ C, ψ_k = g]`,
//! indexed by the row class `C` of the last state (states whose rows of P
//! coincide are merged), the flip of `g` and its translation in the box
//! `|r_j| ≤ n_max·max|ψ_j|`, which is never left.

use super::model::MarkovGibbsModel;
use crate::group::{GroupDistribution, GroupElement};
use crate::weight::Weight;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
struct Term<W> {
    source: usize,
    flip: i8,
    psi: Vec<i64>,
    offset: isize,
    weight: W,
}

#[derive(Clone, Debug)]
pub struct CocycleDp<W: Weight> {
    d: usize,
    max_psi: Vec<i64>,
    reach: Vec<i64>,
    stride: Vec<usize>,
    len: usize,
    classes: usize,
    /// Incoming terms per destination class.
    incoming: Vec<Vec<Term<W>>>,
    /// `P[rep C][b]` for the final pairing.
    rows: Vec<Vec<W>>,
    mass: Vec<W>,
    next: Vec<W>,
    steps: usize,
    n_max: usize,
}

impl<W: Weight> CocycleDp<W> {
    /// Starts the recursion at step 1 with initial weights `π_a v_a`.
    /// `v = None` means `v ≡ 1`.
    pub fn new(m: &MarkovGibbsModel, n_max: usize, v: Option<&[W]>) -> Self {
        let d = m.dim();
        let max_psi = m.max_abs_psi();
        let n_max = n_max.max(1);
        let reach: Vec<i64> = max_psi.iter().map(|&x| x * n_max as i64).collect();
        let mut stride = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            stride[j] = stride[j + 1] * (2 * reach[j + 1] as usize + 1);
        }
        let len = stride[0] * (2 * reach[0] as usize + 1);
        let (p, pi) = m.weights::<W>();
        let (classes, class_of) = m.row_classes();
        let nc = classes.len();

        let mut agg: Vec<BTreeMap<(usize, i8, Vec<i64>), W>> = vec![BTreeMap::new(); nc];
        for (c, members) in classes.iter().enumerate() {
            let rep = members[0];
            for b in 0..m.states() {
                if p[rep][b].is_zero() {
                    continue;
                }
                *agg[class_of[b]]
                    .entry((c, m.eps()[b], m.psi()[b].clone()))
                    .or_insert_with(W::zero) += p[rep][b].clone();
            }
        }
        let incoming = agg
            .into_iter()
            .map(|terms| {
                terms
                    .into_iter()
                    .map(|((source, flip, psi), weight)| {
                        let offset = psi
                            .iter()
                            .zip(&stride)
                            .map(|(&x, &s)| x as isize * s as isize)
                            .sum();
                        Term {
                            source,
                            flip,
                            psi,
                            offset,
                            weight,
                        }
                    })
                    .collect()
            })
            .collect();
        let rows = classes.iter().map(|c| p[c[0]].clone()).collect();

        let mut dp = Self {
            d,
            max_psi,
            reach,
            stride,
            len,
            classes: nc,
            incoming,
            rows,
            mass: vec![W::zero(); 2 * nc * len],
            next: vec![W::zero(); 2 * nc * len],
            steps: 1,
            n_max,
        };
        for a in 0..m.states() {
            let mut w = pi[a].clone();
            if let Some(v) = v {
                w = w * v[a].clone();
            }
            let idx = dp.index(class_of[a], m.eps()[a], &m.psi()[a]);
            dp.mass[idx] += w;
        }
        dp
    }

    /// Number of steps already taken.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn center(&self) -> usize {
        (self.len - 1) / 2
    }

    fn slot(class: usize, flip: i8) -> usize {
        2 * class + (flip == -1) as usize
    }

    fn index(&self, class: usize, flip: i8, r: &[i64]) -> usize {
        let flat: isize = r
            .iter()
            .zip(&self.stride)
            .map(|(&x, &s)| x as isize * s as isize)
            .sum();
        Self::slot(class, flip) * self.len + (self.center() as isize + flat) as usize
    }

    /// Advances one step. Panics past `n_max`, where the box would be left.
    pub fn step(&mut self) {
        assert!(self.steps < self.n_max, "DP box exhausted");
        let k = self.steps as i64;
        let d = self.d;
        let len = self.len;
        let center = self.center() as isize;
        let src_r: Vec<i64> = self.max_psi.iter().map(|&m| m * k).collect();
        let dst_r: Vec<i64> = self.max_psi.iter().map(|&m| m * (k + 1)).collect();
        let last = d - 1;
        let mut next = std::mem::take(&mut self.next);

        for dest in 0..self.classes {
            for dflip in [1i8, -1] {
                let out = &mut next[Self::slot(dest, dflip) * len..][..len];
                for_each_row(&dst_r[..last], &self.stride[..last], |row_off, _| {
                    let base = (center + row_off) as usize;
                    let lo = (base as i64 - dst_r[last]) as usize;
                    let hi = (base as i64 + dst_r[last]) as usize;
                    for x in &mut out[lo..=hi] {
                        x.set_zero();
                    }
                });
                for t in &self.incoming[dest] {
                    let sflip = t.flip * dflip;
                    let src = &self.mass[Self::slot(t.source, sflip) * len..][..len];
                    let e = t.flip as i64;
                    for_each_row(&dst_r[..last], &self.stride[..last], |row_off, x| {
                        // The source y = e(x − ψ) must lie in the step-k box.
                        for j in 0..last {
                            if (x[j] - t.psi[j]).abs() > src_r[j] {
                                return;
                            }
                        }
                        let pl = t.psi[last];
                        let xlo = (pl - src_r[last]).max(-dst_r[last]);
                        let xhi = (pl + src_r[last]).min(dst_r[last]);
                        if xlo > xhi {
                            return;
                        }
                        let xbase = center + row_off;
                        let lo = (xbase + xlo as isize) as usize;
                        let hi = (xbase + xhi as isize) as usize;
                        let w = &t.weight;
                        if e == 1 {
                            let shift = t.offset;
                            let s = &src[(lo as isize - shift) as usize..=(hi as isize - shift) as usize];
                            axpy(&mut out[lo..=hi], s, w);
                        } else {
                            // y = ψ − x: flat(y) = len − 1 − flat(x) + offset.
                            let top = (len as isize - 1 + t.offset) as usize;
                            let s = &src[top - hi..=top - lo];
                            axpy_rev(&mut out[lo..=hi], s, w);
                        }
                    });
                }
            }
        }
        self.next = std::mem::replace(&mut self.mass, next);
        self.steps += 1;
    }

    /// Total mass at the identity, `E[v(a_0); ψ_k = e]`.
    pub fn identity_mass(&self) -> W {
        let c = self.center();
        let mut s = W::zero();
        for class in 0..self.classes {
            s += self.mass[Self::slot(class, 1) * self.len + c].clone();
        }
        s
    }

    /// `E[v(a_0) w(a_k); ψ_k = g]` with `w = None` meaning `w ≡ 1`.
    pub fn paired_mass(&self, g: &GroupElement, w: Option<&[W]>) -> W {
        if g.dim() != self.d || g.trans.iter().zip(&self.reach).any(|(x, r)| x.abs() > *r) {
            return W::zero();
        }
        let mut s = W::zero();
        for class in 0..self.classes {
            let m = &self.mass[self.index(class, g.flip, &g.trans)];
            if m.is_zero() {
                continue;
            }
            let pw = match w {
                None => W::one(),
                Some(w) => crate::linalg::dot(&self.rows[class], w),
            };
            s += m.clone() * pw;
        }
        s
    }

    /// Removes the mass sitting at the identity (taboo recursion).
    pub fn clear_identity(&mut self) {
        let c = self.center();
        for class in 0..self.classes {
            self.mass[Self::slot(class, 1) * self.len + c].set_zero();
        }
    }

    /// Law of `ψ_k` (weighted by `v`), merged over classes.
    pub fn distribution(&self) -> GroupDistribution<W> {
        let side: Vec<usize> = self.reach.iter().map(|&r| 2 * r as usize + 1).collect();
        let mut atoms: BTreeMap<GroupElement, W> = BTreeMap::new();
        for class in 0..self.classes {
            for flip in [1i8, -1] {
                let buf = &self.mass[Self::slot(class, flip) * self.len..][..self.len];
                for (i, x) in buf.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let mut trans = vec![0i64; self.d];
                    let mut rest = i;
                    for j in (0..self.d).rev() {
                        trans[j] = (rest % side[j]) as i64 - self.reach[j];
                        rest /= side[j];
                    }
                    *atoms
                        .entry(GroupElement { flip, trans })
                        .or_insert_with(W::zero) += x.clone();
                }
            }
        }
        GroupDistribution::from_atoms_unchecked(self.d, atoms).expect("box elements have dimension d")
    }
}

/// Calls `f(flat offset, coordinates)` for every point of the box
/// `|x_j| ≤ r[j]` on the leading axes.
fn for_each_row(r: &[i64], stride: &[usize], mut f: impl FnMut(isize, &[i64])) {
    let mut x: Vec<i64> = r.iter().map(|&v| -v).collect();
    loop {
        let off = x
            .iter()
            .zip(stride)
            .map(|(&a, &s)| a as isize * s as isize)
            .sum();
        f(off, &x);
        let mut j = x.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if x[j] < r[j] {
                x[j] += 1;
                break;
            }
            x[j] = -r[j];
        }
    }
}

fn axpy<W: Weight>(out: &mut [W], src: &[W], w: &W) {
    for (o, s) in out.iter_mut().zip(src) {
        if W::SPARSE && s.is_zero() {
            continue;
        }
        *o += s.clone() * w.clone();
    }
}

fn axpy_rev<W: Weight>(out: &mut [W], src: &[W], w: &W) {
    for (o, s) in out.iter_mut().zip(src.iter().rev()) {
        if W::SPARSE && s.is_zero() {
            continue;
        }
        *o += s.clone() * w.clone();
    }
}

/// Exact law of `ψ_n` under the stationary chain (`n = 0` gives `δ_e`).
pub fn gm_nstep_exact<W: Weight>(m: &MarkovGibbsModel, n: usize) -> GroupDistribution<W> {
    if n == 0 {
        return GroupDistribution::delta(GroupElement::identity(m.dim()));
    }
    let mut dp = CocycleDp::<W>::new(m, n, None);
    while dp.steps() < n {
        dp.step();
    }
    dp.distribution()
}

/// `∫ 1{ψ_n = g} v · w∘Tⁿ dμ` by weighted dynamic programming.
pub fn gm_testfn_exact<W: Weight>(
    m: &MarkovGibbsModel,
    n: usize,
    v: &[W],
    w: &[W],
    g: &GroupElement,
) -> W {
    if n == 0 {
        if !g.is_identity() {
            return W::zero();
        }
        let (_, pi) = m.weights::<W>();
        let mut s = W::zero();
        for a in 0..m.states() {
            s += pi[a].clone() * v[a].clone() * w[a].clone();
        }
        return s;
    }
    let mut dp = CocycleDp::<W>::new(m, n, Some(v));
    while dp.steps() < n {
        dp.step();
    }
    dp.paired_mass(g, Some(w))
}
