//! The group G_d = Z/2Z ⋉ Z^d, finitely supported distributions on it, and
//! seeded sample paths.
//!
//! Elements are pairs `(ε, m)` with product `(ε, m)(δ, r) = (εδ, m + εr)`.
//! Random walks multiply new steps on the left: `S_n = g_n ⋯ g_1`.

use crate::error::{Error, Result};
use crate::weight::Weight;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, serde::Serialize)]
pub struct GroupElement {
    pub flip: i8,
    pub trans: Vec<i64>,
}

impl GroupElement {
    pub fn new(flip: i64, trans: Vec<i64>) -> Result<Self> {
        match flip {
            1 | -1 => Ok(Self {
                flip: flip as i8,
                trans,
            }),
            f => Err(Error::InvalidFlip(f)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            flip: 1,
            trans: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.trans.len()
    }

    pub fn is_identity(&self) -> bool {
        self.flip == 1 && self.trans.iter().all(|&x| x == 0)
    }

    pub fn multiply(&self, h: &GroupElement) -> Result<GroupElement> {
        check_dim(self.dim(), h.dim())?;
        Ok(self.mul_unchecked(h))
    }

    fn mul_unchecked(&self, h: &GroupElement) -> GroupElement {
        let e = self.flip as i64;
        GroupElement {
            flip: self.flip * h.flip,
            trans: self
                .trans
                .iter()
                .zip(&h.trans)
                .map(|(m, r)| m + e * r)
                .collect(),
        }
    }

    /// In place `self ← g · self`, the random-walk update.
    pub fn left_mul_assign(&mut self, g: &GroupElement) {
        let e = g.flip as i64;
        for (s, m) in self.trans.iter_mut().zip(&g.trans) {
            *s = m + e * *s;
        }
        self.flip *= g.flip;
    }

    pub fn inverse(&self) -> GroupElement {
        let e = self.flip as i64;
        GroupElement {
            flip: self.flip,
            trans: self.trans.iter().map(|m| -e * m).collect(),
        }
    }

    pub fn linf(&self) -> i64 {
        self.trans.iter().map(|x| x.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+},[", self.flip)?;
        for (i, x) in self.trans.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "])")
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Finitely supported measure on G_d. Atoms are kept in canonical order
/// (flip, then lexicographic translation) and zero atoms are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupDistribution<W = f64> {
    dim: usize,
    atoms: BTreeMap<GroupElement, W>,
}

impl<W: Weight> GroupDistribution<W> {
    /// Builds a distribution, merging repeated atoms. Weights must be
    /// nonnegative and sum to one (exactly for rationals, 1e-12 for floats).
    pub fn new(dim: usize, atoms: impl IntoIterator<Item = (GroupElement, W)>) -> Result<Self> {
        let d = Self::from_atoms_unchecked(dim, atoms)?;
        let total = d.total();
        if !(total.clone() - W::one()).near_zero(1e-12) {
            return Err(Error::NotNormalized(total.to_f64()));
        }
        Ok(d)
    }

    /// Like [`new`](Self::new) without the normalisation check; used for
    /// signed or sub-probability test functions.
    pub fn from_atoms_unchecked(
        dim: usize,
        atoms: impl IntoIterator<Item = (GroupElement, W)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<GroupElement, W> = BTreeMap::new();
        for (g, w) in atoms {
            check_dim(dim, g.dim())?;
            *map.entry(g).or_insert_with(W::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        Ok(Self { dim, atoms: map })
    }

    pub fn delta(g: GroupElement) -> Self {
        let dim = g.dim();
        let mut atoms = BTreeMap::new();
        atoms.insert(g, W::one());
        Self { dim, atoms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&GroupElement, &W)> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self, g: &GroupElement) -> W {
        self.atoms.get(g).cloned().unwrap_or_else(W::zero)
    }

    pub fn total(&self) -> W {
        let mut t = W::zero();
        for w in self.atoms.values() {
            t += w.clone();
        }
        t
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.values().all(|w| !w.is_negative())
    }

    /// Largest |m_j| over the support, per coordinate.
    pub fn max_abs_trans(&self) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for g in self.atoms.keys() {
            for (o, x) in out.iter_mut().zip(&g.trans) {
                *o = (*o).max(x.abs());
            }
        }
        out
    }

    pub fn to_f64(&self) -> GroupDistribution<f64> {
        GroupDistribution {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(g, w)| (g.clone(), w.to_f64()))
                .collect(),
        }
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> GroupDistribution<V> {
        GroupDistribution {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|(g, w)| (g.clone(), f(w)))
                .filter(|(_, w)| !w.is_zero())
                .collect(),
        }
    }
}

/// `(μ₁ ∗ μ₂)(g) = Σ_h μ₁(g h⁻¹) μ₂(h)`, by exhaustive pairing of supports.
pub fn convolve<W: Weight>(
    mu1: &GroupDistribution<W>,
    mu2: &GroupDistribution<W>,
) -> Result<GroupDistribution<W>> {
    check_dim(mu1.dim, mu2.dim)?;
    let mut acc: HashMap<GroupElement, W> = HashMap::new();
    for (a, wa) in &mu1.atoms {
        for (b, wb) in &mu2.atoms {
            *acc.entry(a.mul_unchecked(b)).or_insert_with(W::zero) += wa.clone() * wb.clone();
        }
    }
    let mut atoms: BTreeMap<_, _> = acc.into_iter().collect();
    atoms.retain(|_, w| !w.is_zero());
    Ok(GroupDistribution {
        dim: mu1.dim,
        atoms,
    })
}

/// Exact law of `S_n = g_n ⋯ g_1` for i.i.d. steps `g_i ~ ν`.
pub fn convolve_power<W: Weight>(nu: &GroupDistribution<W>, n: usize) -> GroupDistribution<W> {
    let mut out = GroupDistribution::delta(GroupElement::identity(nu.dim));
    for _ in 0..n {
        out = convolve(nu, &out).expect("same dimension");
    }
    out
}

/// Reusable step sampler over the atoms of a distribution.
#[derive(Clone, Debug)]
pub struct StepSampler {
    elements: Vec<GroupElement>,
    index: WeightedIndex<f64>,
}

impl StepSampler {
    pub fn new<W: Weight>(nu: &GroupDistribution<W>) -> Result<Self> {
        let (elements, weights): (Vec<_>, Vec<_>) =
            nu.atoms().map(|(g, w)| (g.clone(), w.to_f64())).unzip();
        let index =
            WeightedIndex::new(&weights).map_err(|e| Error::InvalidWeight(e.to_string()))?;
        Ok(Self { elements, index })
    }

    pub fn sample<'a, R: Rng + ?Sized>(&'a self, rng: &mut R) -> &'a GroupElement {
        &self.elements[self.index.sample(rng)]
    }
}

/// Generator used for every stochastic routine in the crate: ChaCha8 seeded
/// from a 64-bit master seed, with `stream` selecting an independent
/// substream (trial index).
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub seed: u64,
    pub steps: Vec<GroupElement>,
    /// `partials[n] = S_n`, with `partials[0] = e`.
    pub partials: Vec<GroupElement>,
}

impl PathSample {
    pub fn from_steps(seed: u64, dim: usize, steps: Vec<GroupElement>) -> Result<Self> {
        let mut partials = Vec::with_capacity(steps.len() + 1);
        let mut s = GroupElement::identity(dim);
        partials.push(s.clone());
        for g in &steps {
            check_dim(dim, g.dim())?;
            s.left_mul_assign(g);
            partials.push(s.clone());
        }
        Ok(Self {
            seed,
            steps,
            partials,
        })
    }
}

pub fn sample_path<W: Weight>(nu: &GroupDistribution<W>, t: usize, seed: u64) -> Result<PathSample> {
    if t == 0 {
        return Err(Error::InvalidArgument("path length must be at least 1".into()));
    }
    let sampler = StepSampler::new(nu)?;
    let mut rng = rng_for(seed, 0);
    let steps = (0..t).map(|_| sampler.sample(&mut rng).clone()).collect();
    PathSample::from_steps(seed, nu.dim(), steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn g(f: i64, m: &[i64]) -> GroupElement {
        GroupElement::new(f, m.to_vec()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn nu1() -> GroupDistribution<BigRational> {
        GroupDistribution::new(
            1,
            [
                (g(1, &[0]), q(1, 4)),
                (g(1, &[1]), q(1, 8)),
                (g(1, &[-1]), q(1, 8)),
                (g(-1, &[0]), q(1, 2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(g(1, &[2]).multiply(&g(-1, &[3])).unwrap(), g(-1, &[5]));
        assert_eq!(g(-1, &[2]).multiply(&g(-1, &[3])).unwrap(), g(1, &[-1]));
        assert!(g(1, &[1]).multiply(&g(1, &[1, 2])).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(g(1, &[5]).inverse(), g(1, &[-5]));
        assert_eq!(g(-1, &[5]).inverse(), g(-1, &[5]));
        assert_eq!(GroupElement::identity(2).inverse(), GroupElement::identity(2));
    }

    #[test]
    fn bad_flip() {
        assert!(GroupElement::new(0, vec![1]).is_err());
    }

    #[test]
    fn nu1_squared_at_identity() {
        let two = convolve(&nu1(), &nu1()).unwrap();
        assert_eq!(two.weight(&GroupElement::identity(1)), q(11, 32));
        assert_eq!(two.total(), q(1, 1));
        assert_eq!(convolve_power(&nu1(), 2), two);
    }

    #[test]
    fn power_zero_and_one() {
        let p0 = convolve_power(&nu1(), 0);
        assert_eq!(p0.len(), 1);
        assert_eq!(p0.weight(&GroupElement::identity(1)), q(1, 1));
        assert_eq!(convolve_power(&nu1(), 1).weight(&g(1, &[0])), q(1, 4));
    }

    #[test]
    fn delta_is_identity_for_convolution() {
        let e = GroupDistribution::delta(GroupElement::identity(1));
        assert_eq!(convolve(&e, &nu1()).unwrap(), nu1());
        assert_eq!(convolve(&nu1(), &e).unwrap(), nu1());
    }

    #[test]
    fn not_normalized_rejected() {
        let r = GroupDistribution::new(1, [(g(1, &[0]), q(1, 2))]);
        assert!(matches!(r, Err(Error::NotNormalized(_))));
    }

    #[test]
    fn canonical_order() {
        let d = nu1();
        let keys: Vec<_> = d.atoms().map(|(k, _)| k.clone()).collect();
        assert_eq!(keys, vec![g(-1, &[0]), g(1, &[-1]), g(1, &[0]), g(1, &[1])]);
    }

    #[test]
    fn sample_path_is_deterministic() {
        let nu = nu1();
        let a = sample_path(&nu, 50, 7).unwrap();
        let b = sample_path(&nu, 50, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.partials[0].is_identity());
        for n in 1..=50 {
            assert_eq!(a.partials[n], a.steps[n - 1].multiply(&a.partials[n - 1]).unwrap());
        }
        assert_ne!(a, sample_path(&nu, 50, 8).unwrap());
    }

    #[test]
    fn monte_carlo_two_step_return() {
        let nu = nu1();
        let sampler = StepSampler::new(&nu).unwrap();
        let trials = 1_000_000u64;
        let mut rng = rng_for(2024, 0);
        let mut hits = 0u64;
        for _ in 0..trials {
            let mut s = GroupElement::identity(1);
            s.left_mul_assign(sampler.sample(&mut rng));
            s.left_mul_assign(sampler.sample(&mut rng));
            hits += s.is_identity() as u64;
        }
        let p = 11.0 / 32.0;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        let est = hits as f64 / trials as f64;
        assert!((est - p).abs() < 3.0 * sd, "{est} vs {p}");
    }
}
