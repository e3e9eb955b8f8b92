//! Monte Carlo view of recurrence: split a path at its flip steps, pair
//! consecutive blocks, and look at the symmetric increments.
//!
//! Trial `i` of a run with master seed `s` draws from
//! [`rng_for`]`(s, i)`, so results do not depend on the thread count.

use crate::error::{Error, Result};
use crate::group::{rng_for, GroupDistribution, GroupElement, PathSample, StepSampler};
use crate::weight::Weight;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Two-sided 4σ level for a standard normal.
pub const FOUR_SIGMA_P: f64 = 6.334e-5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDecomposition {
    /// 1-based times of the flip steps.
    pub tau: Vec<usize>,
    /// `Y_k = S_{τ_k} S_{τ_{k−1}}⁻¹` with `τ_0 = 0`.
    pub blocks: Vec<GroupElement>,
    /// `W_n = Y_{2n−1}.trans − Y_{2n}.trans`.
    pub w: Vec<Vec<i64>>,
}

pub fn decompose(path: &PathSample) -> Result<BlockDecomposition> {
    let tau: Vec<usize> = path
        .steps
        .iter()
        .enumerate()
        .filter(|(_, g)| g.flip == -1)
        .map(|(i, _)| i + 1)
        .collect();
    if tau.is_empty() {
        return Err(Error::NoFlip);
    }
    let mut blocks = Vec::with_capacity(tau.len());
    let mut prev = 0;
    for &t in &tau {
        let y = path.partials[t]
            .multiply(&path.partials[prev].inverse())
            .expect("same dimension");
        blocks.push(y);
        prev = t;
    }
    let mut prod = GroupElement::identity(path.partials[0].dim());
    for (y, &t) in blocks.iter().zip(&tau) {
        prod.left_mul_assign(y);
        assert_eq!(prod, path.partials[t], "block products reproduce S_τ");
    }
    let w = blocks
        .chunks_exact(2)
        .map(|p| p[0].trans.iter().zip(&p[1].trans).map(|(a, b)| a - b).collect())
        .collect();
    Ok(BlockDecomposition { tau, blocks, w })
}

/// Path of trial `stream`, stopped after `flips` flip steps or at `horizon`.
fn path_until_flips(sampler: &StepSampler, dim: usize, seed: u64, stream: u64, horizon: usize, flips: usize) -> PathSample {
    let mut rng = rng_for(seed, stream);
    let mut steps = Vec::new();
    let mut seen = 0;
    while steps.len() < horizon && seen < flips {
        let g = sampler.sample(&mut rng).clone();
        seen += (g.flip == -1) as usize;
        steps.push(g);
    }
    PathSample::from_steps(seed, dim, steps).expect("sampler atoms have the walk dimension")
}

#[derive(Clone, Debug, Serialize)]
pub struct WSymmetryReport {
    pub trials: usize,
    /// Trials that completed two blocks within the horizon.
    pub used: usize,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Largest `|mean_j| / stderr_j`.
    pub max_z: f64,
    pub pass: bool,
}

/// Orientation of `w` within its pair `{w, −w}`.
fn positive(w: &[i64]) -> bool {
    w.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Compares the empirical law of `W_1` with its mirror image: a chi-square
/// statistic over the pairs `{w, −w}` (pairs with fewer than 10
/// observations pooled into one bin) and a 4σ test on the mean.
pub fn w_symmetry_test<W: Weight>(
    nu: &GroupDistribution<W>,
    trials: usize,
    horizon: usize,
    seed: u64,
) -> Result<WSymmetryReport> {
    let sampler = StepSampler::new(nu)?;
    if nu.atoms().all(|(g, w)| g.flip == 1 || w.is_zero()) {
        return Err(Error::NoFlip);
    }
    let d = nu.dim();
    let samples: Vec<Option<Vec<i64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let path = path_until_flips(&sampler, d, seed, i, horizon, 2);
            decompose(&path).ok().and_then(|b| b.w.into_iter().next())
        })
        .collect();
    let ws: Vec<Vec<i64>> = samples.into_iter().flatten().collect();
    let used = ws.len();

    let mut pairs: BTreeMap<Vec<i64>, (u64, u64)> = BTreeMap::new();
    for w in &ws {
        if w.iter().all(|&x| x == 0) {
            continue;
        }
        if positive(w) {
            pairs.entry(w.clone()).or_default().0 += 1;
        } else {
            pairs.entry(w.iter().map(|x| -x).collect()).or_default().1 += 1;
        }
    }
    let (mut chi2, mut dof) = (0.0, 0usize);
    let (mut pa, mut pb) = (0u64, 0u64);
    for &(a, b) in pairs.values() {
        if a + b >= 10 {
            chi2 += (a as f64 - b as f64).powi(2) / (a + b) as f64;
            dof += 1;
        } else {
            pa += a;
            pb += b;
        }
    }
    if pa + pb > 0 {
        chi2 += (pa as f64 - pb as f64).powi(2) / (pa + pb) as f64;
        dof += 1;
    }
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(chi2)
    };

    let nf = used.max(1) as f64;
    let mean: Vec<f64> = (0..d)
        .map(|j| ws.iter().map(|w| w[j] as f64).sum::<f64>() / nf)
        .collect();
    let stderr: Vec<f64> = (0..d)
        .map(|j| {
            let var = ws.iter().map(|w| (w[j] as f64 - mean[j]).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
            (var / nf).sqrt()
        })
        .collect();
    let max_z = mean
        .iter()
        .zip(&stderr)
        .map(|(m, s)| if *s > 0.0 { m.abs() / s } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(WSymmetryReport {
        trials,
        used,
        chi2,
        dof,
        p_value,
        mean,
        stderr,
        max_z,
        pass: used > 0 && p_value >= FOUR_SIGMA_P && max_z <= 4.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WaldReport {
    pub p: f64,
    pub mean: f64,
    pub expected: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

/// `E[τ₁] = 1/p` for the geometric waiting time until the first flip.
pub fn tau1_check<W: Weight>(nu: &GroupDistribution<W>, trials: usize, seed: u64) -> Result<WaldReport> {
    let p: f64 = nu.atoms().filter(|(g, _)| g.flip == -1).map(|(_, w)| w.to_f64()).sum();
    if p <= 0.0 {
        return Err(Error::NoFlip);
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let sampler = StepSampler::new(nu)?;
    let taus: Vec<u64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let mut t = 1;
            while sampler.sample(&mut rng).flip != -1 {
                t += 1;
            }
            t
        })
        .collect();
    let mean = taus.iter().sum::<u64>() as f64 / trials as f64;
    let expected = 1.0 / p;
    let stderr = (1.0 - p).sqrt() / p / (trials as f64).sqrt();
    let z = if stderr > 0.0 { (mean - expected) / stderr } else { 0.0 };
    Ok(WaldReport {
        p,
        mean,
        expected,
        stderr,
        z,
        pass: z.abs() <= 4.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnFractions {
    pub trials: usize,
    pub seed: u64,
    pub horizons: Vec<usize>,
    /// Fraction of paths with `S_n = e` for some `1 ≤ n ≤ horizon`.
    pub fractions: Vec<f64>,
}

impl ReturnFractions {
    pub fn nondecreasing(&self) -> bool {
        self.fractions.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn return_fraction<W: Weight>(
    nu: &GroupDistribution<W>,
    horizons: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ReturnFractions> {
    if trials == 0 {
        return Ok(ReturnFractions {
            trials,
            seed,
            horizons: horizons.to_vec(),
            fractions: vec![],
        });
    }
    let sampler = StepSampler::new(nu)?;
    let h_max = horizons.iter().copied().max().unwrap_or(0);
    let d = nu.dim();
    let first: Vec<Option<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let mut s = GroupElement::identity(d);
            for n in 1..=h_max {
                s.left_mul_assign(sampler.sample(&mut rng));
                if s.is_identity() {
                    return Some(n);
                }
            }
            None
        })
        .collect();
    let fractions = horizons
        .iter()
        .map(|&h| first.iter().filter(|t| t.is_some_and(|t| t <= h)).count() as f64 / trials as f64)
        .collect();
    Ok(ReturnFractions {
        trials,
        seed,
        horizons: horizons.to_vec(),
        fractions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn g(f: i64, m: i64) -> GroupElement {
        GroupElement::new(f, vec![m]).unwrap()
    }

    #[test]
    fn decomposition_example() {
        let steps = vec![g(1, 1), g(-1, 0), g(1, 2), g(-1, 1)];
        let path = PathSample::from_steps(0, 1, steps).unwrap();
        let b = decompose(&path).unwrap();
        assert_eq!(b.tau, vec![2, 4]);
        assert_eq!(b.blocks[0], path.partials[2]);
        assert_eq!(
            b.blocks[1],
            path.partials[4].multiply(&path.partials[2].inverse()).unwrap()
        );
        assert_eq!(b.w.len(), 1);
    }

    #[test]
    fn flip_free_path() {
        let path = PathSample::from_steps(0, 1, vec![g(1, 1), g(1, 0)]).unwrap();
        assert!(matches!(decompose(&path), Err(Error::NoFlip)));
        let delta = GroupDistribution::<f64>::delta(g(1, 1));
        assert!(matches!(w_symmetry_test(&delta, 10, 10, 1), Err(Error::NoFlip)));
    }

    #[test]
    fn fractions_are_deterministic() {
        let nu = fixtures::nu1();
        let a = return_fraction(&nu, &[10, 100], 500, 7).unwrap();
        let b = return_fraction(&nu, &[10, 100], 500, 7).unwrap();
        assert_eq!(a.fractions, b.fractions);
        assert!(a.nondecreasing());
        assert!(return_fraction(&nu, &[10], 0, 7).unwrap().fractions.is_empty());
    }
}
