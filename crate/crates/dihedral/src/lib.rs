//! Local limit theorems on the infinite dihedral group G_d = Z/2Z ⋉ Z^d.
//!
//! * [`group`]: group law, exact distributions, convolution powers, sampling.
//! * [`dual`]: representations ρ_θ, characters, Fourier transform, Plancherel inversion.
//! * [`rw`]: i.i.d. random walks: characteristic matrices, moments, LCLT.
//! * [`gm`]: finite-state Gibbs–Markov cocycles: twisted operators, spectral
//!   curves, inversion and an exact dynamic-programming oracle.
//! * [`renewal`]: first-return laws, renewal identity and tail diagnostics.
//! * [`recurrence`]: Monte Carlo stopping-time decomposition and recurrence.

pub mod cli;
pub mod dual;
pub mod error;
pub mod fixtures;
pub mod gm;
pub mod group;
pub mod io;
pub mod linalg;
pub mod recurrence;
pub mod renewal;
pub mod rw;
pub mod weight;

pub use error::{Error, Result};
pub use group::{GroupDistribution, GroupElement};
pub use weight::Weight;
