//! Experiment runner behind the `dihedral` binary. A run is described by an
//! [`ExperimentConfig`], built from command-line flags or read from a JSON
//! file, and produces one text artifact (CSV or JSON) whose header echoes
//! the config and the library version.

use crate::dual::{self, uncorrected_weight, TorusGrid};
use crate::error::{Error, Result};
use crate::fixtures::{resolve_distribution, resolve_model};
use crate::gm::spectral::phi1_at_zero;
use crate::gm::{gm_nstep_prob, sigma1_sq, validate_model, ValidationReport};
use crate::group::{GroupDistribution, GroupElement};
use crate::recurrence::{return_fraction, tau1_check, w_symmetry_test};
use crate::renewal::taboo_pmf;
use crate::rw::{gaussian_density, lclt_report};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable read by the binary for the worker thread count.
pub const THREADS_ENV: &str = "DIHEDRAL_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualSelftest {
    /// Distribution for the Parseval check: `nu1` or a JSON path.
    #[serde(default = "default_dist")]
    pub dist: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwLclt {
    pub dist: String,
    pub n: usize,
    pub radius: i64,
    #[serde(default = "csv")]
    pub out: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmLclt {
    pub model: String,
    pub n: usize,
    /// `e`, or `flip:r1,r2,…` such as `-1:2,0`.
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "csv")]
    pub out: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReturnTail {
    pub model: String,
    pub n_max: usize,
    #[serde(default = "csv")]
    pub out: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recurrence {
    pub dist: String,
    pub trials: usize,
    pub horizons: Vec<usize>,
    pub seed: u64,
    /// Step budget for completing two flip blocks in the W-symmetry test.
    #[serde(default = "default_block_horizon")]
    pub block_horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateModel {
    pub model: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    DualSelftest(DualSelftest),
    RwLclt(RwLclt),
    GmLclt(GmLclt),
    ReturnTail(ReturnTail),
    Recurrence(Recurrence),
    ValidateModel(ValidateModel),
}

fn default_dist() -> String {
    "nu1".into()
}
fn default_target() -> String {
    "e".into()
}
fn csv() -> Format {
    Format::Csv
}
fn default_block_horizon() -> usize {
    10_000
}

/// Result of a run. `ok == false` maps to a nonzero exit status; `stderr`
/// carries reports meant for the error stream.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub ok: bool,
    pub artifact: String,
    pub stderr: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidArgument(s.into()));
        match self {
            Self::RwLclt(c) if c.n == 0 => bad("n must be positive"),
            Self::RwLclt(c) if c.radius < 0 => bad("radius must be nonnegative"),
            Self::ReturnTail(c) if c.n_max == 0 => bad("n_max must be positive"),
            Self::Recurrence(c) if c.horizons.is_empty() => bad("horizons must not be empty"),
            Self::Recurrence(c) if c.horizons.contains(&0) => bad("horizons must be positive"),
            _ => Ok(()),
        }
    }
}

/// `e` or `flip:r1,r2,…`.
pub fn parse_target(s: &str, dim: usize) -> Result<GroupElement> {
    let s = s.trim();
    if s == "e" {
        return Ok(GroupElement::identity(dim));
    }
    let bad = || Error::InvalidArgument(format!("target {s:?}: expected e or flip:r1,...,rd"));
    let (f, r) = s.split_once(':').ok_or_else(bad)?;
    let flip: i64 = f.trim().parse().map_err(|_| bad())?;
    let trans = r
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if trans.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: trans.len(),
        });
    }
    GroupElement::new(flip, trans)
}

fn header(config: &ExperimentConfig) -> String {
    format!(
        "# dihedral {VERSION}\n# config: {}\n",
        serde_json::to_string(config).expect("config serialises")
    )
}

fn json_artifact(config: &ExperimentConfig, body: serde_json::Value) -> String {
    let doc = json!({
        "dihedral": VERSION,
        "config": config,
        "result": body,
    });
    serde_json::to_string_pretty(&doc).expect("serialisable") + "\n"
}

fn ok(artifact: String) -> Outcome {
    Outcome {
        ok: true,
        artifact,
        stderr: String::new(),
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    match config {
        ExperimentConfig::DualSelftest(c) => dual_selftest(config, c),
        ExperimentConfig::RwLclt(c) => rw_lclt(config, c),
        ExperimentConfig::GmLclt(c) => gm_lclt(config, c),
        ExperimentConfig::ReturnTail(c) => return_tail(config, c),
        ExperimentConfig::Recurrence(c) => recurrence(config, c),
        ExperimentConfig::ValidateModel(c) => validate(config, c),
    }
}

fn dual_selftest(config: &ExperimentConfig, c: &DualSelftest) -> Result<Outcome> {
    let nu = resolve_distribution(&c.dist)?.to_f64();
    let d = nu.dim();
    let degree: Vec<i64> = nu.max_abs_trans().iter().map(|m| 2 * m).collect();
    let grid = TorusGrid::exact_for_degree(&degree);
    let corrected = dual::parseval_check(&nu, &grid);
    let uncorr = dual::parseval_with_weight(&nu, &grid, uncorrected_weight(d));
    let e = GroupElement::identity(d);
    let delta = GroupDistribution::<f64>::delta(e.clone());
    let unit = TorusGrid::uniform(d, 1);
    let inv = dual::plancherel_inverse(|t| dual::fourier(&delta, t), &e, &unit).value;
    let inv_uncorrected = dual::inverse_with_weight(|t| dual::fourier(&delta, t), &e, &unit, uncorrected_weight(d)).value;
    let pass = corrected.gap < 1e-12 && (inv - 1.0).abs() < 1e-12;
    let body = json!({
        "lhs": corrected.lhs,
        "rhs": corrected.rhs,
        "gap": corrected.gap,
        "delta_e_inverse": inv,
        "uncorrected": {
            "rhs": uncorr.rhs,
            "gap": uncorr.gap,
            "delta_e_inverse": inv_uncorrected,
        },
        "pass": pass,
    });
    Ok(Outcome {
        ok: pass,
        artifact: json_artifact(config, body),
        stderr: String::new(),
    })
}

fn rw_lclt(config: &ExperimentConfig, c: &RwLclt) -> Result<Outcome> {
    let report = lclt_report(&resolve_distribution(&c.dist)?.to_f64(), c.n, c.radius)?;
    let artifact = match c.out {
        Format::Csv => {
            let d = report.rows.first().map_or(1, |r| r.element.dim());
            let mut s = header(config);
            let _ = writeln!(s, "flip,{},p_n,scaled,phi,gap", coord_names(d));
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{:e},{:e},{:e},{:e}",
                    r.element.flip,
                    join(&r.element.trans),
                    r.p_n,
                    r.scaled,
                    r.phi,
                    r.gap
                );
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|r| json!({"element": r.element, "p_n": r.p_n, "scaled": r.scaled, "phi": r.phi, "gap": r.gap}))
                .collect();
            json_artifact(config, json!({"n": report.n, "sup_gap": report.sup_gap, "rows": rows}))
        }
    };
    Ok(ok(artifact))
}

fn coord_names(d: usize) -> String {
    if d == 1 {
        return "r".into();
    }
    (1..=d).map(|j| format!("r{j}")).collect::<Vec<_>>().join(",")
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn load_valid_model(spec: &str) -> Result<std::result::Result<crate::gm::MarkovGibbsModel, Outcome>> {
    let m = resolve_model(spec)?;
    let report = validate_model(&m);
    if report.all_pass() {
        Ok(Ok(m))
    } else {
        Ok(Err(Outcome {
            ok: false,
            artifact: String::new(),
            stderr: validation_text(&report),
        }))
    }
}

fn validation_text(r: &ValidationReport) -> String {
    serde_json::to_string_pretty(r).expect("serialisable") + "\n"
}

fn gm_lclt(config: &ExperimentConfig, c: &GmLclt) -> Result<Outcome> {
    let m = match load_valid_model(&c.model)? {
        Ok(m) => m,
        Err(o) => return Ok(o),
    };
    let d = m.dim();
    let g = parse_target(&c.target, d)?;
    let p = gm_nstep_prob(&m, c.n, &g)?;
    let sigma = sigma1_sq(&m);
    let sq = (c.n as f64).sqrt();
    let x: Vec<f64> = g.trans.iter().map(|&r| r as f64 / sq).collect();
    let phi = gaussian_density(&sigma, &x)?;
    let scaled = (c.n as f64).powf(d as f64 / 2.0) * p;
    let gap = (scaled - phi).abs();
    let artifact = match c.out {
        Format::Csv => {
            let mut s = header(config);
            let _ = writeln!(s, "n,flip,{},p_n,scaled,phi,gap", coord_names(d));
            let _ = writeln!(s, "{},{},{},{:e},{:e},{:e},{:e}", c.n, g.flip, join(&g.trans), p, scaled, phi, gap);
            s
        }
        Format::Json => json_artifact(
            config,
            json!({
                "n": c.n, "target": g, "p_n": p, "scaled": scaled, "phi": phi, "gap": gap,
                "sigma1_sq": sigma, "phi1_at_zero": phi1_at_zero(&sigma)?,
            }),
        ),
    };
    Ok(ok(artifact))
}

fn return_tail(config: &ExperimentConfig, c: &ReturnTail) -> Result<Outcome> {
    let m = match load_valid_model(&c.model)? {
        Ok(m) => m,
        Err(o) => return Ok(o),
    };
    let d = m.dim();
    let f = taboo_pmf::<f64>(&m, c.n_max);
    let label = match d {
        1 => "tail_sqrt_n",
        2 => "tail_log_n",
        _ => "partial_sum",
    };
    let mut rows = Vec::with_capacity(c.n_max);
    let mut cum = 0.0;
    for (n, &fn_) in f.iter().enumerate().skip(1) {
        cum += fn_;
        let tail = 1.0 - cum;
        let scaled = match d {
            1 => tail * (n as f64).sqrt(),
            2 => tail * (n as f64).ln(),
            _ => cum,
        };
        rows.push((n, fn_, tail, scaled));
    }
    let artifact = match c.out {
        Format::Csv => {
            let mut s = header(config);
            let _ = writeln!(s, "n,f,tail,{label}");
            for (n, fv, t, sc) in &rows {
                let _ = writeln!(s, "{n},{fv:e},{t:e},{sc:e}");
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(n, fv, t, sc)| json!({"n": n, "f": fv, "tail": t, label: sc}))
                .collect();
            json_artifact(config, json!({ "rows": rows }))
        }
    };
    Ok(ok(artifact))
}

fn recurrence(config: &ExperimentConfig, c: &Recurrence) -> Result<Outcome> {
    let nu = resolve_distribution(&c.dist)?.to_f64();
    let body = json!({
        "w_symmetry": w_symmetry_test(&nu, c.trials, c.block_horizon, c.seed).ok(),
        "tau1": tau1_check(&nu, c.trials, c.seed).ok(),
        "return_fraction": return_fraction(&nu, &c.horizons, c.trials, c.seed)?,
    });
    Ok(ok(json_artifact(config, body)))
}

fn validate(config: &ExperimentConfig, c: &ValidateModel) -> Result<Outcome> {
    let m = resolve_model(&c.model)?;
    let report = validate_model(&m);
    let pass = report.all_pass();
    Ok(Outcome {
        ok: pass,
        artifact: json_artifact(config, serde_json::to_value(&report)?),
        stderr: if pass { String::new() } else { validation_text(&report) },
    })
}
