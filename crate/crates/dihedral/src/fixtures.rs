//! Built-in distributions and models.
//!
//! | name | description |
//! |---|---|
//! | `nu1` | i.i.d. step law on G_1 |
//! | `gm-bern` | six full branches reproducing `nu1` |
//! | `gm-markov` | doubling-map refinement with eight cells, S = shift by four |
//! | `gm-period2` | four full branches with ψ = ±1 only (fails aperiodicity at π) |
//! | `gm-d2` | `gm-markov` with one independent lazy coordinate |
//! | `gm-d3` | `gm-bern` with two independent lazy coordinates |

use crate::error::{Error, Result};
use crate::gm::MarkovGibbsModel;
use crate::group::GroupDistribution;
use crate::io::{distribution_from_json, model_from_json, LoadedDistribution};
use num_rational::BigRational;

pub const NU1_JSON: &str = include_str!("../fixtures/nu1.json");
pub const GM_BERN_JSON: &str = include_str!("../fixtures/gm-bern.json");
pub const GM_MARKOV_JSON: &str = include_str!("../fixtures/gm-markov.json");
pub const GM_PERIOD2_JSON: &str = include_str!("../fixtures/gm-period2.json");

pub const MODEL_NAMES: [&str; 5] = ["gm-bern", "gm-markov", "gm-period2", "gm-d2", "gm-d3"];

pub fn nu1_exact() -> GroupDistribution<BigRational> {
    match distribution_from_json(NU1_JSON).expect("bundled fixture") {
        LoadedDistribution::Exact(d) => d,
        LoadedDistribution::Float(_) => unreachable!("nu1 is written exactly"),
    }
}

pub fn nu1() -> GroupDistribution<f64> {
    nu1_exact().to_f64()
}

pub fn gm_bern() -> MarkovGibbsModel {
    model_from_json(GM_BERN_JSON).expect("bundled fixture")
}

pub fn gm_markov() -> MarkovGibbsModel {
    model_from_json(GM_MARKOV_JSON).expect("bundled fixture")
}

pub fn gm_period2() -> MarkovGibbsModel {
    model_from_json(GM_PERIOD2_JSON).expect("bundled fixture")
}

pub fn gm_d2() -> MarkovGibbsModel {
    gm_markov().with_lazy_coordinate()
}

pub fn gm_d3() -> MarkovGibbsModel {
    gm_bern().with_lazy_coordinate().with_lazy_coordinate()
}

pub fn model(name: &str) -> Option<MarkovGibbsModel> {
    Some(match name {
        "gm-bern" => gm_bern(),
        "gm-markov" => gm_markov(),
        "gm-period2" => gm_period2(),
        "gm-d2" => gm_d2(),
        "gm-d3" => gm_d3(),
        _ => return None,
    })
}

/// A fixture name or a path to a model JSON file.
pub fn resolve_model(spec: &str) -> Result<MarkovGibbsModel> {
    if let Some(m) = model(spec) {
        return Ok(m);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::InvalidArgument(format!("model {spec:?}: {e}")))?;
    model_from_json(&text)
}

/// `nu1` or a path to a distribution JSON file.
pub fn resolve_distribution(spec: &str) -> Result<LoadedDistribution> {
    if spec == "nu1" {
        return Ok(LoadedDistribution::Exact(nu1_exact()));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::InvalidArgument(format!("distribution {spec:?}: {e}")))?;
    distribution_from_json(&text)
}
