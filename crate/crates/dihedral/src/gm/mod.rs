//! Finite-state Gibbs–Markov models with G_d-valued cocycles.

pub mod dp;
pub mod lclt;
pub mod model;
pub mod operator;
pub mod spectral;

pub use dp::{gm_nstep_exact, gm_testfn_exact, CocycleDp};
pub use lclt::{aperiodicity_scan, gm_lclt_testfn, gm_nstep_prob, AperiodicityReport};
pub use model::{one_step_law, validate_model, Check, MarkovGibbsModel, ValidationReport};
pub use operator::{twisted_blocks, BlockOperator, ReducedOperator};
pub use spectral::{leading_eigen, sigma1_sq, spectral_curve, Eigen, SpectralCurve};
