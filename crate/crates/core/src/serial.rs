//! JSON and CSV encodings. Rationals are strings `p/q` (or `p`), so every
//! encoding is exact and byte-stable.

use num::{BigInt, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::derived::{CertVerdict, Certificate, Near, Witness};
use crate::oracle::{Cluster, CrossReport, Explanation, FitReport, FitVerdict, Sample};
use crate::setfam::{parse_rational, Atom, FamilyError, Interval, Parameter, PolyAtom, Rational, SetFamily};

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamJson {
    id: String,
    min: u64,
    q: u64,
    r: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonoJson {
    coeff: String,
    support: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    base: String,
    monomials: Vec<MonoJson>,
    params: Vec<ParamJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteJson {
    finite: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AtomJson {
    Poly(PolyJson),
    Finite(FiniteJson),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    atoms: Vec<AtomJson>,
    clip: Option<[String; 2]>,
}

fn s(q: &Rational) -> String {
    q.to_string()
}

fn strs(v: &[Rational]) -> Vec<String> {
    v.iter().map(s).collect()
}

fn interval(i: &Interval) -> [String; 2] {
    [s(&i.lo), s(&i.hi)]
}

fn int_json(n: &BigInt) -> Json {
    match n.to_u64() {
        Some(u) => Json::from(u),
        None => Json::from(n.to_string()),
    }
}

fn atom_json(a: &Atom) -> AtomJson {
    match a {
        Atom::Finite(v) => AtomJson::Finite(FiniteJson { finite: strs(v) }),
        Atom::Poly(p) => {
            let params = p.params();
            AtomJson::Poly(PolyJson {
                base: s(p.base()),
                monomials: p
                    .monomials()
                    .iter()
                    .map(|m| MonoJson {
                        coeff: s(&m.coeff),
                        support: p.support_ids(m.support).into_iter().map(String::from).collect(),
                    })
                    .collect(),
                params: params.iter().map(|x| ParamJson { id: x.id.clone(), min: x.min, q: x.q, r: x.r }).collect(),
            })
        }
    }
}

fn family_value(f: &SetFamily) -> FamilyJson {
    FamilyJson { atoms: f.atoms.iter().map(atom_json).collect(), clip: f.clip.as_ref().map(interval) }
}

fn family_json(f: &SetFamily) -> Json {
    serde_json::to_value(family_value(f)).expect("family encodes")
}

/// Compact JSON encoding of a family.
pub fn family_to_json(f: &SetFamily) -> String {
    serde_json::to_string(&family_value(f)).expect("family encodes")
}

fn rational(text: &str) -> Result<Rational, FamilyError> {
    parse_rational(text)
}

fn atom_from(a: AtomJson) -> Result<Atom, SerialError> {
    match a {
        AtomJson::Finite(f) => {
            let v = f.finite.iter().map(|x| rational(x)).collect::<Result<Vec<_>, _>>()?;
            Ok(Atom::finite(v))
        }
        AtomJson::Poly(p) => {
            let params =
                p.params.into_iter().map(|x| Parameter::new(x.id, x.min, x.q, x.r)).collect::<Result<Vec<_>, _>>()?;
            let mut monos = Vec::with_capacity(p.monomials.len());
            for m in &p.monomials {
                monos.push((rational(&m.coeff)?, m.support.iter().map(String::as_str).collect()));
            }
            Ok(PolyAtom::build(rational(&p.base)?, params, monos)?)
        }
    }
}

/// Decodes a family produced by [`family_to_json`] or written by hand.
pub fn family_from_json(text: &str) -> Result<SetFamily, SerialError> {
    let f: FamilyJson = serde_json::from_str(text)?;
    let atoms = f.atoms.into_iter().map(atom_from).collect::<Result<Vec<_>, _>>()?;
    let clip = match f.clip {
        Some([lo, hi]) => Some(Interval::new(rational(&lo)?, rational(&hi)?)?),
        None => None,
    };
    Ok(SetFamily::new(atoms, clip))
}

pub fn witness_json(w: &Witness) -> Json {
    serde_json::json!({
        "gamma0": s(&w.gamma0),
        "eps": s(&w.eps),
        "coeffs": strs(&w.coeffs),
        "I": int_json(&w.i),
    })
}

pub fn certificate_json(c: &Certificate) -> Json {
    let mut m = serde_json::Map::new();
    match &c.verdict {
        CertVerdict::Standardized => {
            m.insert("verdict".into(), "standardized".into());
        }
        CertVerdict::NotStandardized { k, gamma0 } => {
            m.insert("verdict".into(), "not_standardized".into());
            m.insert("k".into(), Json::from(*k));
            m.insert("gamma0".into(), s(gamma0).into());
        }
        CertVerdict::Unknown(r) => {
            m.insert("verdict".into(), "unknown".into());
            m.insert("reason".into(), r.clone().into());
        }
    }
    m.insert("depth".into(), Json::from(c.depth));
    let levels: Vec<Json> = c
        .levels
        .iter()
        .map(|l| {
            serde_json::json!({
                "k": l.k,
                "family": family_json(&l.family),
                "witnesses": l.witnesses.iter().map(witness_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    m.insert("levels".into(), levels.into());
    Json::Object(m)
}

pub fn near_json(n: &Near) -> Json {
    match n {
        Near::Standardized(w) => serde_json::json!({ "verdict": "standardized", "witness": witness_json(w) }),
        Near::No(r) => serde_json::json!({ "verdict": "no", "reason": r }),
        Near::Unknown(r) => serde_json::json!({ "verdict": "unknown", "reason": r }),
    }
}

pub fn sample_json(smp: &Sample) -> Json {
    serde_json::json!({
        "window": interval(&smp.window),
        "cap": smp.cap,
        "exhaustive": smp.exhaustive,
        "values": strs(&smp.values),
    })
}

/// One reduced rational per row, ascending.
pub fn sample_csv(smp: &Sample) -> String {
    let mut out = String::with_capacity(smp.values.len() * 8);
    for v in &smp.values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn cluster_json(c: &Cluster) -> Json {
    serde_json::json!({
        "interval": interval(&c.interval),
        "count": c.count,
        "estimate": c.estimate.as_ref().map(s),
    })
}

pub fn fit_json(r: &FitReport) -> Json {
    let mut m = serde_json::Map::new();
    m.insert("gamma0".into(), s(&r.gamma0).into());
    m.insert("numerators".into(), r.numerators.iter().map(|n| n.to_string()).collect::<Vec<_>>().into());
    match &r.verdict {
        FitVerdict::Consistent { i, coeffs } => {
            m.insert("verdict".into(), "consistent".into());
            m.insert("I".into(), int_json(i));
            m.insert("coeffs".into(), coeffs.iter().map(|n| n.to_string()).collect::<Vec<_>>().into());
        }
        FitVerdict::Inconsistent { evidence } => {
            m.insert("verdict".into(), "inconsistent".into());
            m.insert("evidence".into(), s(evidence).into());
        }
        FitVerdict::Insufficient => {
            m.insert("verdict".into(), "insufficient".into());
        }
    }
    Json::Object(m)
}

pub fn cross_json(r: &CrossReport) -> Json {
    let symbolic: Vec<Json> = r
        .symbolic_only
        .iter()
        .map(|x| {
            let reason = match &x.reason {
                Explanation::CapTooSmall { needed } => serde_json::json!({ "cap_too_small": needed }),
                Explanation::OutsideWindow => Json::from("outside_window"),
                Explanation::Unexplained => Json::from("unexplained"),
            };
            serde_json::json!({ "point": s(&x.point), "reason": reason })
        })
        .collect();
    serde_json::json!({
        "exact": r.exact,
        "matched": strs(&r.matched),
        "symbolic_only": symbolic,
        "empirical_only": r.empirical_only.iter().map(interval).collect::<Vec<_>>(),
        "undecided": r.undecided.iter().map(interval).collect::<Vec<_>>(),
        "clusters": r.clusters.iter().map(cluster_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomsets::gamma16;
    use crate::setfam::rat;

    #[test]
    fn documented_family_layout() {
        let f = SetFamily::single(
            PolyAtom::build(rat(5, 6), vec![Parameter::natural("m")], vec![(rat(1, 6), vec!["m"])]).unwrap(),
        )
        .with_clip(Interval::new(rat(5, 6), rat(1, 1)).unwrap());
        assert_eq!(
            family_to_json(&f),
            r#"{"atoms":[{"base":"5/6","monomials":[{"coeff":"1/6","support":["m"]}],"params":[{"id":"m","min":1,"q":1,"r":0}]}],"clip":["5/6","1"]}"#
        );
        assert_eq!(family_from_json(&family_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn finite_atoms_and_absent_clip() {
        let g = gamma16();
        let text = family_to_json(&g);
        assert!(text.ends_with(r#"{"finite":["12/13"]}],"clip":null}"#));
        assert_eq!(family_from_json(&text).unwrap(), g);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(family_from_json("{"), Err(SerialError::Json(_))));
        assert!(family_from_json(r#"{"atoms":[{"finite":["1/0"]}],"clip":null}"#).is_err());
        let bad = r#"{"atoms":[{"base":"0","monomials":[{"coeff":"1","support":["x"]}],"params":[]}],"clip":null}"#;
        assert!(matches!(family_from_json(bad), Err(SerialError::Family(FamilyError::UndeclaredParam(_)))));
    }

    #[test]
    fn certificate_layout() {
        let c = crate::derived::certify(&gamma16());
        let j = certificate_json(&c);
        assert_eq!(j["verdict"], "standardized");
        assert_eq!(j["depth"], 2);
        let w = &j["levels"][0]["witnesses"][0];
        assert_eq!(w["gamma0"], "5/6");
        assert!(w["I"].is_u64());
    }
}
