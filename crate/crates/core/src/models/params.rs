use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

pub type Params = BTreeMap<String, ParamValue>;

/// Boson label to `n_max`; unlisted bosons use the preset default.
pub type Truncations = BTreeMap<String, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Number,
    List,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDefault {
    Number(f64),
    List(&'static [f64]),
    Text(&'static str),
}

impl ParamDefault {
    pub fn value(self) -> ParamValue {
        match self {
            ParamDefault::Number(x) => ParamValue::Number(x),
            ParamDefault::List(x) => ParamValue::List(x.to_vec()),
            ParamDefault::Text(x) => ParamValue::Text(x.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: ParamDefault,
    pub doc: &'static str,
}

pub(crate) const fn num(name: &'static str, default: f64, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Number,
        default: ParamDefault::Number(default),
        doc,
    }
}

pub(crate) const fn list(name: &'static str, default: &'static [f64], doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::List,
        default: ParamDefault::List(default),
        doc,
    }
}

pub(crate) const fn text(name: &'static str, default: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Text,
        default: ParamDefault::Text(default),
        doc,
    }
}

/// Parameter lookup against a schema, with defaults filled in.
pub(crate) struct Args<'a> {
    preset: &'static str,
    schema: &'static [ParamSpec],
    given: &'a Params,
    truncations: &'a Truncations,
    default_n_max: usize,
}

impl<'a> Args<'a> {
    pub fn new(
        preset: &'static str,
        schema: &'static [ParamSpec],
        given: &'a Params,
        truncations: &'a Truncations,
        default_n_max: usize,
    ) -> Result<Self> {
        for (name, value) in given {
            let Some(spec) = schema.iter().find(|s| s.name == name) else {
                return Err(Error::UnknownParam {
                    preset: preset.into(),
                    name: name.clone(),
                });
            };
            let ok = matches!(
                (spec.kind, value),
                (ParamKind::Number, ParamValue::Number(_))
                    | (ParamKind::List, ParamValue::List(_))
                    | (ParamKind::Text, ParamValue::Text(_))
            );
            if !ok {
                return Err(Error::BadParam {
                    preset: preset.into(),
                    name: name.clone(),
                    reason: format!("expected a {:?}", spec.kind).to_lowercase(),
                });
            }
            let finite = match value {
                ParamValue::Number(x) => x.is_finite(),
                ParamValue::List(xs) => xs.iter().all(|x| x.is_finite()),
                ParamValue::Text(_) => true,
            };
            if !finite {
                return Err(Error::BadParam {
                    preset: preset.into(),
                    name: name.clone(),
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(Args {
            preset,
            schema,
            given,
            truncations,
            default_n_max,
        })
    }

    fn value(&self, name: &str) -> Result<ParamValue> {
        if let Some(v) = self.given.get(name) {
            return Ok(v.clone());
        }
        self.schema
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.default.value())
            .ok_or_else(|| Error::MissingParam {
                preset: self.preset.into(),
                name: name.into(),
            })
    }

    pub fn num(&self, name: &str) -> Result<f64> {
        match self.value(name)? {
            ParamValue::Number(x) => Ok(x),
            _ => Err(self.bad(name, "expected a number")),
        }
    }

    pub fn list(&self, name: &str) -> Result<Vec<f64>> {
        match self.value(name)? {
            ParamValue::List(x) => Ok(x),
            _ => Err(self.bad(name, "expected a list")),
        }
    }

    pub fn text(&self, name: &str) -> Result<String> {
        match self.value(name)? {
            ParamValue::Text(x) => Ok(x),
            _ => Err(self.bad(name, "expected a string")),
        }
    }

    /// Non-negative integer parameter.
    pub fn count(&self, name: &str) -> Result<usize> {
        let x = self.num(name)?;
        if x < 0.0 || x.fract() != 0.0 || x > 64.0 {
            return Err(self.bad(name, "expected a small non-negative integer"));
        }
        Ok(x as usize)
    }

    pub fn bad(&self, name: &str, reason: impl Into<String>) -> Error {
        Error::BadParam {
            preset: self.preset.into(),
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn n_max(&self, label: &str) -> usize {
        self.truncations.get(label).copied().unwrap_or(self.default_n_max)
    }

    /// Rejects truncations naming labels the model does not have.
    pub fn check_truncation_labels(&self, bosons: &[String]) -> Result<()> {
        match self.truncations.keys().find(|k| !bosons.contains(k)) {
            Some(k) => Err(Error::UnknownFactor(k.clone())),
            None => Ok(()),
        }
    }

    /// Errors if `label` cannot hold `needed` quanta.
    pub fn require(&self, label: &str, needed: usize) -> Result<usize> {
        let n = self.n_max(label);
        if n < needed {
            return Err(Error::TruncationTooSmall {
                label: label.into(),
                n_max: n,
                needed,
            });
        }
        Ok(n)
    }
}
