//! Inversion formula for `μ(ψ_n = g)` and weighted variants, and the
//! aperiodicity scan.

use super::model::MarkovGibbsModel;
use super::operator::{power_apply, ReducedOperator};
use super::spectral::spectral_radius;
use crate::dual::{self, reduce_angle, TorusGrid};
use crate::error::Result;
use crate::group::{check_dim, GroupElement};
use crate::rw::exact_grid;
use serde::Serialize;
use std::f64::consts::TAU;

/// `E[ρ_θ(ψ_n) v(a_0) w(a_n)]` as a 2×2 matrix.
fn expectation(
    red: &ReducedOperator,
    theta: &[f64],
    n: usize,
    v: Option<&[f64]>,
    omega: &[f64],
) -> dual::Mat2 {
    let a = red.matrix(theta);
    let x = match v {
        None => power_apply(&a, n, red.ones()),
        Some(v) => power_apply(&a, n - 1, red.apply_first(theta, v)),
    };
    red.pair(omega, &x)
}

/// `μ(ψ_n = g)` by trace inversion of the n-th power of the assembled
/// block on an exact grid.
pub fn gm_nstep_prob(m: &MarkovGibbsModel, n: usize, g: &GroupElement) -> Result<f64> {
    check_dim(m.dim(), g.dim())?;
    if n == 0 {
        return Ok(g.is_identity() as u8 as f64);
    }
    let red = ReducedOperator::new(m);
    let omega = red.class_pi().to_vec();
    let reach: Vec<i64> = g.trans.iter().map(|x| x.abs()).collect();
    let grid = exact_grid(&m.max_abs_psi(), n, &reach);
    Ok(dual::plancherel_inverse(|t| expectation(&red, t, n, None, &omega), g, &grid).value)
}

/// `∫ 1{ψ_n = g} v · w∘Tⁿ dμ` for cell functions `v`, `w`.
pub fn gm_lclt_testfn(
    m: &MarkovGibbsModel,
    n: usize,
    v: &[f64],
    w: &[f64],
    g: &GroupElement,
) -> Result<f64> {
    check_dim(m.dim(), g.dim())?;
    if v.len() != m.states() || w.len() != m.states() {
        return Err(crate::Error::InvalidArgument(
            "test functions need one value per state".into(),
        ));
    }
    if n == 0 {
        let s = (0..m.states()).map(|a| m.pi()[a] * v[a] * w[a]).sum();
        return Ok(if g.is_identity() { s } else { 0.0 });
    }
    let red = ReducedOperator::new(m);
    let omega = red.class_weights(m.pi(), w);
    let reach: Vec<i64> = g.trans.iter().map(|x| x.abs()).collect();
    let grid = exact_grid(&m.max_abs_psi(), n, &reach);
    Ok(dual::plancherel_inverse(|t| expectation(&red, t, n, Some(v), &omega), g, &grid).value)
}

#[derive(Clone, Debug, Serialize)]
pub struct AperiodicityReport {
    pub max_radius: f64,
    pub argmax: Vec<f64>,
    /// `1 − max_radius`.
    pub margin: f64,
    pub nodes: usize,
    /// Nodes inside the excluded ball around θ = 0.
    pub excluded: usize,
    pub pass: bool,
}

/// Spectral radius of the assembled block over grid nodes at torus
/// distance more than `delta` from 0. Passes when the maximum stays below
/// `1 − 1e-9`.
pub fn aperiodicity_scan(m: &MarkovGibbsModel, grid: &TorusGrid, delta: f64) -> AperiodicityReport {
    let red = ReducedOperator::new(m);
    let mut max_radius = 0.0f64;
    let mut argmax = vec![];
    let mut excluded = 0;
    for idx in 0..grid.len() {
        let theta = grid.node(idx);
        let dist = theta
            .iter()
            .map(|&t| {
                let r = reduce_angle(t);
                r.min(TAU - r).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if dist <= delta {
            excluded += 1;
            continue;
        }
        let r = spectral_radius(&red.matrix(&theta));
        if r > max_radius {
            max_radius = r;
            argmax = theta;
        }
    }
    AperiodicityReport {
        max_radius,
        argmax,
        margin: 1.0 - max_radius,
        nodes: grid.len(),
        excluded,
        pass: max_radius < 1.0 - 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gm::dp::{gm_nstep_exact, gm_testfn_exact};
    use crate::rw::nstep_prob;
    use std::f64::consts::PI;

    #[test]
    fn bernoulli_model_is_the_iid_walk() {
        let m = fixtures::gm_bern();
        let nu = fixtures::nu1();
        for n in [1, 2, 5, 9] {
            for f in [1, -1] {
                for r in -3..=3 {
                    let g = GroupElement::new(f, vec![r]).unwrap();
                    let a = gm_nstep_prob(&m, n, &g).unwrap();
                    let b = nstep_prob(&nu, n, &g).unwrap();
                    assert!((a - b).abs() < 1e-12, "n={n} g={g}");
                }
            }
        }
    }

    #[test]
    fn matches_dp_on_markov_fixture() {
        let m = fixtures::gm_markov();
        for n in [0, 1, 3, 6] {
            let exact = gm_nstep_exact::<f64>(&m, n);
            let mut total = 0.0;
            for (g, p) in exact.atoms() {
                total += p;
                assert!((gm_nstep_prob(&m, n, g).unwrap() - p).abs() < 1e-12);
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_version() {
        let m = fixtures::gm_markov();
        let v = [0.3, -1.0, 2.0, 0.5, 1.5, 0.0, -0.25, 1.0];
        let w = [1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, 0.25];
        for n in [0, 1, 4] {
            for r in -2..=2 {
                let g = GroupElement::new(-1, vec![r]).unwrap();
                let a = gm_lclt_testfn(&m, n, &v, &w, &g).unwrap();
                let b = gm_testfn_exact(&m, n, &v, &w, &g);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn period_two_control_fails_at_pi() {
        let r = aperiodicity_scan(&fixtures::gm_period2(), &TorusGrid::uniform(1, 64), 0.3);
        assert!(!r.pass);
        assert!((r.max_radius - 1.0).abs() < 1e-10);
        assert!((r.argmax[0] - PI).abs() < 1e-12);
        assert_eq!(r.excluded, 7);
    }
}
