//! JSON formats for step distributions and Gibbs–Markov models.
//!
//! Distribution: `{"dim": d, "atoms": [{"flip": ±1, "trans": [..], "w": "p/q" or float}]}`.
//! Model: `{"d": d, "P": [[..]], "pi": [..], "eps": [±1..], "psi": [[..]..], "invol": [..]}`
//! with 0-based state indices in `invol`. Probabilities are `"p/q"` strings
//! or numbers; a file whose probabilities are all strings loads in exact
//! rational mode.

use crate::error::{Error, Result};
use crate::gm::MarkovGibbsModel;
use crate::group::{GroupDistribution, GroupElement};
use crate::weight::{f64_to_ratio, parse_ratio, Weight};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    flip: i64,
    trans: Vec<i64>,
    w: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionJson {
    dim: usize,
    atoms: Vec<AtomJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ModelJson {
    d: usize,
    P: Vec<Vec<Value>>,
    pi: Vec<Value>,
    eps: Vec<i64>,
    psi: Vec<Vec<i64>>,
    invol: Vec<usize>,
}

/// A distribution as loaded from JSON, exact when the file allows it.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedDistribution {
    Exact(GroupDistribution<BigRational>),
    Float(GroupDistribution<f64>),
}

impl LoadedDistribution {
    pub fn dim(&self) -> usize {
        match self {
            Self::Exact(d) => d.dim(),
            Self::Float(d) => d.dim(),
        }
    }

    pub fn to_f64(&self) -> GroupDistribution<f64> {
        match self {
            Self::Exact(d) => d.to_f64(),
            Self::Float(d) => d.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact(_))
    }
}

/// Probability value: (exact rational, whether it was written exactly).
fn parse_prob(v: &Value) -> Result<(BigRational, bool)> {
    match v {
        Value::String(s) => parse_ratio(s)
            .map(|r| (r, true))
            .ok_or_else(|| Error::InvalidWeight(s.clone())),
        Value::Number(n) => n
            .as_f64()
            .and_then(f64_to_ratio)
            .map(|r| (r, false))
            .ok_or_else(|| Error::InvalidWeight(n.to_string())),
        other => Err(Error::InvalidWeight(other.to_string())),
    }
}

pub fn distribution_from_json(text: &str) -> Result<LoadedDistribution> {
    let raw: DistributionJson = serde_json::from_str(text)?;
    let mut exact = true;
    let mut atoms = Vec::with_capacity(raw.atoms.len());
    for a in &raw.atoms {
        let (w, ex) = parse_prob(&a.w)?;
        if w < BigRational::from_integer(0.into()) {
            return Err(Error::InvalidWeight(format!("negative weight {w}")));
        }
        exact &= ex;
        atoms.push((GroupElement::new(a.flip, a.trans.clone())?, w));
    }
    if atoms.is_empty() {
        return Err(Error::EmptySupport);
    }
    if exact {
        Ok(LoadedDistribution::Exact(GroupDistribution::new(raw.dim, atoms)?))
    } else {
        let atoms = atoms.into_iter().map(|(g, w)| (g, w.to_f64()));
        Ok(LoadedDistribution::Float(GroupDistribution::new(raw.dim, atoms)?))
    }
}

#[derive(Serialize)]
struct AtomOut<'a> {
    flip: i8,
    trans: &'a [i64],
    w: Value,
}

#[derive(Serialize)]
struct DistributionOut<'a> {
    dim: usize,
    atoms: Vec<AtomOut<'a>>,
}

/// Canonical serialisation (atoms in canonical order).
pub fn distribution_to_json(d: &LoadedDistribution) -> String {
    let atoms: Vec<AtomOut> = match d {
        LoadedDistribution::Exact(x) => x
            .atoms()
            .map(|(g, w)| AtomOut {
                flip: g.flip,
                trans: &g.trans,
                w: Value::String(w.to_string()),
            })
            .collect(),
        LoadedDistribution::Float(x) => x
            .atoms()
            .map(|(g, w)| AtomOut {
                flip: g.flip,
                trans: &g.trans,
                w: serde_json::json!(w),
            })
            .collect(),
    };
    serde_json::to_string(&DistributionOut { dim: d.dim(), atoms }).expect("serialisable")
}

pub fn model_from_json(text: &str) -> Result<MarkovGibbsModel> {
    let raw: ModelJson = serde_json::from_str(text)?;
    let mut exact = true;
    let mut conv = |v: &Value| -> Result<BigRational> {
        let (r, ex) = parse_prob(v)?;
        exact &= ex;
        Ok(r)
    };
    let p = raw
        .P
        .iter()
        .map(|row| row.iter().map(&mut conv).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let pi = raw.pi.iter().map(&mut conv).collect::<Result<Vec<_>>>()?;
    let eps = raw
        .eps
        .iter()
        .map(|&e| match e {
            1 | -1 => Ok(e as i8),
            other => Err(Error::InvalidFlip(other)),
        })
        .collect::<Result<Vec<_>>>()?;
    if exact {
        MarkovGibbsModel::new_exact(raw.d, p, pi, eps, raw.psi, raw.invol)
    } else {
        let pf = p.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect();
        let pif = pi.iter().map(|x| x.to_f64()).collect();
        MarkovGibbsModel::new(raw.d, pf, pif, eps, raw.psi, raw.invol)
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct ModelOut {
    d: usize,
    P: Vec<Vec<Value>>,
    pi: Vec<Value>,
    eps: Vec<i8>,
    psi: Vec<Vec<i64>>,
    invol: Vec<usize>,
}

pub fn model_to_json(m: &MarkovGibbsModel) -> String {
    let (p, pi): (Vec<Vec<Value>>, Vec<Value>) = if m.is_exact() {
        let (p, pi) = m.weights::<BigRational>();
        (
            p.iter()
                .map(|r| r.iter().map(|x| Value::String(x.to_string())).collect())
                .collect(),
            pi.iter().map(|x| Value::String(x.to_string())).collect(),
        )
    } else {
        (
            m.p().iter()
                .map(|r| r.iter().map(|x| serde_json::json!(x)).collect())
                .collect(),
            m.pi().iter().map(|x| serde_json::json!(x)).collect(),
        )
    };
    serde_json::to_string(&ModelOut {
        d: m.dim(),
        P: p,
        pi,
        eps: m.eps().to_vec(),
        psi: m.psi().to_vec(),
        invol: m.invol().to_vec(),
    })
    .expect("serialisable")
}

#[cfg(test)]
mod tests {
    use super::*;

    const NU1: &str = r#"{"dim":1,"atoms":[
        {"flip":1,"trans":[0],"w":"1/4"},{"flip":1,"trans":[1],"w":"1/8"},
        {"flip":1,"trans":[-1],"w":"1/8"},{"flip":-1,"trans":[0],"w":"1/2"}]}"#;

    #[test]
    fn exact_round_trip() {
        let d = distribution_from_json(NU1).unwrap();
        assert!(d.is_exact());
        let text = distribution_to_json(&d);
        assert_eq!(distribution_from_json(&text).unwrap(), d);
        assert_eq!(distribution_to_json(&distribution_from_json(&text).unwrap()), text);
    }

    #[test]
    fn float_mode() {
        let d = distribution_from_json(r#"{"dim":1,"atoms":[{"flip":1,"trans":[1],"w":0.5},{"flip":-1,"trans":[0],"w":"1/2"}]}"#).unwrap();
        assert!(!d.is_exact());
        assert_eq!(d.to_f64().len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(distribution_from_json("{").is_err());
        assert!(distribution_from_json(r#"{"dim":1,"atoms":[],"extra":1}"#).is_err());
        assert!(distribution_from_json(r#"{"dim":1,"atoms":[{"flip":2,"trans":[0],"w":"1"}]}"#).is_err());
        assert!(distribution_from_json(r#"{"dim":2,"atoms":[{"flip":1,"trans":[0],"w":"1"}]}"#).is_err());
        assert!(distribution_from_json(r#"{"dim":1,"atoms":[{"flip":1,"trans":[0],"w":"1/3"}]}"#).is_err());
        assert!(distribution_from_json(r#"{"dim":1,"atoms":[{"flip":1,"trans":[0],"w":"-1"},{"flip":1,"trans":[1],"w":"2"}]}"#).is_err());
    }
}
