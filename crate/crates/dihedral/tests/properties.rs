use dihedral::dual::{self, conjugate_u, fourier, plancherel_inverse, rho2, DualPoint, Mat2, TorusGrid};
use dihedral::gm::operator::{twisted_block, twisted_blocks};
use dihedral::gm::{gm_nstep_exact, gm_nstep_prob, leading_eigen, validate_model, MarkovGibbsModel};
use dihedral::group::{convolve, convolve_power};
use dihedral::renewal::{renewal_check, return_probabilities};
use dihedral::rw::{matrix_power_cayley, matrix_power_naive, moments, nstep_prob};
use dihedral::{GroupDistribution, GroupElement, Weight};
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn element(d: usize, r: i64) -> impl Strategy<Value = GroupElement> {
    (prop_oneof![Just(1i64), Just(-1i64)], prop::collection::vec(-r..=r, d))
        .prop_map(|(f, t)| GroupElement::new(f, t).unwrap())
}

fn theta(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-TAU..TAU, d)
}

/// Small rational law with integer weights 1..=9.
fn rational_law(d: usize) -> impl Strategy<Value = GroupDistribution<BigRational>> {
    prop::collection::vec((element(d, 2), 1i64..=9), 1..=5).prop_map(move |atoms| {
        let total: i64 = atoms.iter().map(|(_, w)| w).sum();
        let mut merged: std::collections::BTreeMap<GroupElement, i64> = Default::default();
        for (g, w) in atoms {
            *merged.entry(g).or_default() += w;
        }
        GroupDistribution::new(
            d,
            merged.into_iter().map(|(g, w)| (g, BigRational::new(w.into(), total.into()))),
        )
        .unwrap()
    })
}

fn r(n: i64, q: i64) -> BigRational {
    BigRational::new(n.into(), q.into())
}

/// The chain of the doubling-map model with random centred labels: states
/// 0..4 have ε = +1, states 4..8 are their mirror images.
fn markov_family() -> impl Strategy<Value = MarkovGibbsModel> {
    (0i64..=3, 0i64..=3, 0i64..=3, 0i64..=3, 0u64..16)
        .prop_map(|(x, y, z, w, perm)| {
            let mut plus = [x, -x, y, -y];
            let mut minus = [z, -z, w, -w];
            plus.rotate_left((perm % 4) as usize);
            minus.rotate_left(((perm / 4) % 4) as usize);
            let n = 8;
            let mut p = vec![vec![r(0, 1); n]; n];
            for a in 0..n {
                let block = a % 4;
                p[a][2 * block] = r(1, 2);
                p[a][2 * block + 1] = r(1, 2);
            }
            let psi = plus.iter().chain(&minus).map(|&v| vec![v]).collect();
            MarkovGibbsModel::new_exact(
                1,
                p,
                vec![r(1, 8); n],
                vec![1, 1, 1, 1, -1, -1, -1, -1],
                psi,
                vec![4, 5, 6, 7, 0, 1, 2, 3],
            )
            .unwrap()
        })
}

/// i.i.d. model: each weight w_i gives four states (+1, ±x_i) and
/// (−1, ±y_i) of mass w_i/(4W); the involution pairs them across ε.
fn bernoulli_family() -> impl Strategy<Value = MarkovGibbsModel> {
    prop::collection::vec((1i64..=6, 0i64..=2, -2i64..=2), 1..=3).prop_map(|atoms| {
        let total: i64 = atoms.iter().map(|a| a.0).sum();
        let k = 2 * atoms.len();
        let n = 2 * k;
        let mut pi = vec![r(0, 1); n];
        let mut psi = vec![vec![0]; n];
        for (i, &(w, x, y)) in atoms.iter().enumerate() {
            for (j, sign) in [(2 * i, 1), (2 * i + 1, -1)] {
                pi[j] = r(w, 4 * total);
                pi[k + j] = r(w, 4 * total);
                psi[j] = vec![sign * x];
                psi[k + j] = vec![sign * y];
            }
        }
        let eps = (0..n).map(|a| if a < k { 1 } else { -1 }).collect();
        let invol = (0..n).map(|a| (a + k) % n).collect();
        let p = vec![pi.clone(); n];
        MarkovGibbsModel::new_exact(1, p, pi, eps, psi, invol).unwrap()
    })
}

fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn group_axioms(
        triples in (1usize..=3).prop_flat_map(|d| prop::collection::vec((element(d, 50), element(d, 50), element(d, 50)), 160))
    ) {
        for (a, b, c) in triples {
            let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let e = GroupElement::identity(a.dim());
            prop_assert_eq!(a.multiply(&e).unwrap(), a.clone());
            prop_assert_eq!(e.multiply(&a).unwrap(), a.clone());
            prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
            prop_assert!(a.inverse().multiply(&a).unwrap().is_identity());
        }
    }

    #[test]
    fn rho_is_a_unitary_homomorphism(t in theta(2), g in element(2, 9), h in element(2, 9)) {
        let (rg, rh) = (rho2(&t, &g), rho2(&t, &h));
        prop_assert!(close(&(rg * rh), &rho2(&t, &g.multiply(&h).unwrap()), 1e-12));
        prop_assert!(close(&(rg * rg.adjoint()), &Mat2::real(1.0, 0.0, 0.0, 1.0), 1e-12));
    }

    #[test]
    fn conjugate_u_diagonalises_on_td(corner in prop::collection::vec(any::<bool>(), 2), g in element(2, 9)) {
        let t: Vec<f64> = corner.iter().map(|&c| if c { PI } else { 0.0 }).collect();
        prop_assert!(DualPoint::new(&t).in_td());
        let m = conjugate_u(&rho2(&t, &g));
        prop_assert!(m.0[0][1].norm() < 1e-12 && m.0[1][0].norm() < 1e-12);
    }

    #[test]
    fn convolution_is_associative(a in rational_law(1), b in rational_law(1), c in rational_law(1)) {
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.total(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn fourier_inversion_round_trip(f in rational_law(2)) {
        let f = f.to_f64();
        let degree = f.max_abs_trans();
        let grid = TorusGrid::exact_for_degree(&degree);
        for (g, w) in f.atoms() {
            let v = plancherel_inverse(|t| fourier(&f, t), g, &grid).value;
            prop_assert!((v - w).abs() < 1e-12);
        }
        let p = dual::parseval_check(&f, &TorusGrid::exact_for_degree(&degree.iter().map(|x| 2 * x).collect::<Vec<_>>()));
        prop_assert!(p.gap < 1e-12);
    }

    #[test]
    fn nstep_matches_convolution(nu in rational_law(1), n in 1usize..=8) {
        let exact = convolve_power(&nu, n);
        for (g, w) in exact.atoms() {
            let p = nstep_prob(&nu, n, g).unwrap();
            prop_assert!((p - w.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn cayley_hamilton_powers(re in prop::collection::vec(-1.5f64..1.5, 4), im in prop::collection::vec(-1.5f64..1.5, 4), n in 0u32..40) {
        let c = |i: usize| Complex64::new(re[i], im[i]);
        let m = Mat2::new(c(0), c(1), c(2), c(3));
        let a = matrix_power_cayley(&m, n);
        let b = matrix_power_naive(&m, n);
        prop_assert!(a.max_abs_diff(&b) <= 1e-9 * b.norm_fro().max(1.0));
    }

    #[test]
    fn moment_det_identity(nu in rational_law(1)) {
        if let Ok(m) = moments(&nu) {
            prop_assert!(m.det_identity_gap < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn valid_models_have_half_eigenvalue(m in prop_oneof![markov_family(), bernoulli_family()]) {
        prop_assert!(validate_model(&m).all_pass(), "{:?}", validate_model(&m).failures());
        for s in [1, -1] {
            let e = leading_eigen(&twisted_block(&m, &[0.0], s), m.pi()).unwrap();
            prop_assert!((e.lambda - 0.5).norm() < 1e-12);
            prop_assert!(e.vector.iter().all(|v| (v - 1.0).norm() < 1e-12));
        }
    }

    #[test]
    fn assembled_block_conjugation(m in markov_family(), t in -PI..PI) {
        let a = twisted_blocks(&m, &[t]).assembled;
        let b = twisted_blocks(&m, &[-t]).assembled;
        prop_assert!((a.conjugate() - b).norm() < 1e-14);
    }

    #[test]
    fn inversion_matches_dp(m in markov_family(), n in 1usize..=7) {
        let exact = gm_nstep_exact::<BigRational>(&m, n);
        prop_assert_eq!(exact.total(), BigRational::from_integer(1.into()));
        for (g, w) in exact.atoms() {
            prop_assert!((gm_nstep_prob(&m, n, g).unwrap() - w.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_renewal_is_exact(m in prop_oneof![markov_family(), bernoulli_family()]) {
        let c = renewal_check::<BigRational>(&m, 8);
        prop_assert_eq!(c.operator_gap, 0.0);
        let u = return_probabilities::<f64>(&m, 6);
        for (n, un) in u.iter().enumerate() {
            let p = gm_nstep_prob(&m, n, &GroupElement::identity(1)).unwrap();
            prop_assert!((p - un).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_renewal_holds_for_iid_models(m in bernoulli_family()) {
        prop_assert_eq!(renewal_check::<BigRational>(&m, 8).scalar_gap, 0.0);
    }
}
