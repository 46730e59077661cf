//! Model-spec files: strict JSON describing a space, `H0`, `V`, blocks,
//! engine settings and an optional parameter sweep.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{EngineOptions, Variant};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::models::{self, BlockRecipe, BuiltModel, ParamValue, Params, Preset, Truncations};
use crate::operator::{FactorSpec, OperatorMatrix, ProductSpace};
use crate::spectral::{diagonalize, explicit_from_states, make_blocks, BlockStrategy, BlockStructure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Vec<FactorEntry>>,
    pub h0: OperatorSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<OperatorSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksSpec>,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorEntry {
    pub label: String,
    pub kind: FactorKindName,
    /// Qudit dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Boson truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKindName {
    Qudit,
    Boson,
    Fermion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Preset(PresetRef),
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetRef {
    pub preset: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub truncations: Truncations,
}

/// Row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseMatrix {
    pub dense: Vec<[f64; 2]>,
}

/// `[row, col, re, im]` entries; repeated positions add.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseMatrix {
    pub sparse: Vec<(usize, usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlocksSpec {
    /// Eigen-index sets over the ascending spectrum of `H0`.
    Explicit { sets: Vec<Vec<usize>> },
    GapThreshold { delta: f64 },
    Degeneracy { tol: f64 },
    Subsystem { factors: Vec<String> },
    /// Product-basis state sets; `H0` must be diagonal.
    States { sets: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_tol: Option<f64>,
}

fn default_order() -> usize {
    2
}

fn default_variant() -> Variant {
    Variant::BlockDiagonal
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec {
            order: default_order(),
            variant: default_variant(),
            bin_tol: None,
        }
    }
}

impl EngineSpec {
    pub fn options(&self) -> EngineOptions {
        EngineOptions {
            order: self.order,
            variant: self.variant,
            bin_tol: self.bin_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<ModelSpec> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical JSON echo; parsing it gives back an equal spec.
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("specs serialize")
    }

    fn validate(&self) -> Result<()> {
        let e = &self.engine;
        if e.order < 2 || e.order > e.variant.max_order() {
            return Err(Error::InvalidOrder {
                order: e.order,
                variant: e.variant.name(),
            });
        }
        if let Some(t) = e.bin_tol {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Spec(format!("engine.bin_tol must be finite and non-negative, got {t}")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Spec("sweep.values is empty".into()));
            }
            if s.values.iter().any(|x| !x.is_finite()) {
                return Err(Error::Spec("sweep.values must be finite".into()));
            }
            if self.preset_ref().is_none() {
                return Err(Error::Spec("sweep needs a preset model".into()));
            }
        }
        match (&self.h0, &self.space) {
            (OperatorSource::Preset(_), Some(_)) => {
                return Err(Error::Spec("`space` comes from the preset; remove it".into()))
            }
            (OperatorSource::Preset(_), None) => {}
            (_, None) => return Err(Error::Spec("explicit matrices need a `space`".into())),
            (_, Some(entries)) => {
                for e in entries {
                    e.spec()?;
                }
                match &self.v {
                    None => return Err(Error::Spec("missing `v`".into())),
                    Some(OperatorSource::Preset(_)) => {
                        return Err(Error::Spec("`v` cannot be a preset when `h0` is explicit".into()))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    fn preset_ref(&self) -> Option<&PresetRef> {
        match &self.h0 {
            OperatorSource::Preset(p) => Some(p),
            _ => None,
        }
    }

    /// Builds the model, substituting `param = value` into the preset when given.
    pub fn build(&self, sweep_value: Option<(&str, f64)>) -> Result<LoadedModel> {
        match &self.h0 {
            OperatorSource::Preset(p) => {
                let preset = Preset::from_name(&p.preset)?;
                let mut params = p.params.clone();
                if let Some((name, value)) = sweep_value {
                    params.insert(name.to_string(), ParamValue::Number(value));
                }
                let built = models::build(preset, &params, &p.truncations)?;
                let v = match &self.v {
                    None => built.v.clone(),
                    Some(OperatorSource::Preset(q)) => {
                        if q != p {
                            return Err(Error::Spec("`v` preset must match the `h0` preset".into()));
                        }
                        built.v.clone()
                    }
                    Some(src) => explicit(src, &built.space, "v")?,
                };
                let recipe = match &self.blocks {
                    Some(b) => b.recipe(),
                    None => built.blocks.clone(),
                };
                Ok(LoadedModel {
                    space: built.space.clone(),
                    h0: built.h0.clone(),
                    v,
                    recipe,
                    margin: built.margin,
                    warnings: built.warnings.clone(),
                    built: Some(built),
                })
            }
            src => {
                let entries = self
                    .space
                    .as_ref()
                    .ok_or_else(|| Error::Spec("explicit matrices need a `space`".into()))?;
                let space = Arc::new(ProductSpace::new(entries.iter().map(FactorEntry::spec).collect::<Result<_>>()?)?);
                let h0 = explicit(src, &space, "h0")?;
                let v = explicit(self.v.as_ref().expect("validated"), &space, "v")?;
                let recipe = self
                    .blocks
                    .as_ref()
                    .map(BlocksSpec::recipe)
                    .unwrap_or(BlockRecipe::Strategy(BlockStrategy::Degeneracy { tol: 1e-9 }));
                Ok(LoadedModel {
                    space,
                    h0,
                    v,
                    recipe,
                    margin: 0,
                    warnings: Vec::new(),
                    built: None,
                })
            }
        }
    }
}

impl FactorEntry {
    fn spec(&self) -> Result<FactorSpec> {
        let bad = |what: &str| Error::Spec(format!("factor `{}`: {what}", self.label));
        match self.kind {
            FactorKindName::Qudit => {
                if self.n_max.is_some() {
                    return Err(bad("qudits take `dim`, not `n_max`"));
                }
                Ok(FactorSpec::qudit(&self.label, self.dim.ok_or_else(|| bad("missing `dim`"))?))
            }
            FactorKindName::Boson => {
                if self.dim.is_some() {
                    return Err(bad("bosons take `n_max`, not `dim`"));
                }
                Ok(FactorSpec::boson(&self.label, self.n_max.ok_or_else(|| bad("missing `n_max`"))?))
            }
            FactorKindName::Fermion => {
                if self.dim.is_some() || self.n_max.is_some() {
                    return Err(bad("fermions take no size"));
                }
                Ok(FactorSpec::fermion(&self.label))
            }
        }
    }
}

impl BlocksSpec {
    fn recipe(&self) -> BlockRecipe {
        match self {
            BlocksSpec::Explicit { sets } => BlockRecipe::Strategy(BlockStrategy::Explicit { sets: sets.clone() }),
            BlocksSpec::GapThreshold { delta } => BlockRecipe::Strategy(BlockStrategy::GapThreshold { delta: *delta }),
            BlocksSpec::Degeneracy { tol } => BlockRecipe::Strategy(BlockStrategy::Degeneracy { tol: *tol }),
            BlocksSpec::Subsystem { factors } => BlockRecipe::Strategy(BlockStrategy::Subsystem {
                factors: factors.clone(),
            }),
            BlocksSpec::States { sets } => BlockRecipe::States(sets.clone()),
        }
    }
}

fn explicit(src: &OperatorSource, space: &Arc<ProductSpace>, what: &'static str) -> Result<OperatorMatrix> {
    let n = space.total_dim();
    let m = match src {
        OperatorSource::Preset(_) => return Err(Error::Spec(format!("`{what}` cannot mix presets and matrices"))),
        OperatorSource::Dense(d) => {
            if d.dense.len() != n * n {
                return Err(Error::Spec(format!(
                    "`{what}` has {} entries, space dimension {n} needs {}",
                    d.dense.len(),
                    n * n
                )));
            }
            let t = d
                .dense
                .iter()
                .enumerate()
                .filter(|(_, x)| x[0] != 0.0 || x[1] != 0.0)
                .map(|(k, x)| (k / n, k % n, C64::new(x[0], x[1])));
            OperatorMatrix::from_triplets(space, t)?
        }
        OperatorSource::Sparse(s) => OperatorMatrix::from_triplets(
            space,
            s.sparse.iter().map(|&(r, c, re, im)| (r, c, C64::new(re, im))),
        )?,
    };
    let finite = m.triplets().iter().all(|(_, _, x)| x.re.is_finite() && x.im.is_finite());
    if !finite {
        return Err(Error::Spec(format!("`{what}` has non-finite entries")));
    }
    m.with_hermitian_hint(what)
}

/// A spec resolved into matrices.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub space: Arc<ProductSpace>,
    pub h0: OperatorMatrix,
    pub v: OperatorMatrix,
    pub recipe: BlockRecipe,
    pub margin: usize,
    pub warnings: Vec<String>,
    pub built: Option<BuiltModel>,
}

impl LoadedModel {
    pub fn blocks(&self) -> Result<BlockStructure> {
        let spec = Arc::new(diagonalize(&self.h0)?);
        let strategy = match &self.recipe {
            BlockRecipe::Strategy(s) => s.clone(),
            BlockRecipe::States(sets) => explicit_from_states(&spec, sets)?,
        };
        make_blocks(&self.h0, &spec, strategy)
    }

    /// Oracle `H'` when the preset has one and `V` was not replaced.
    pub fn oracle(&self) -> Option<&OperatorMatrix> {
        self.built
            .as_ref()
            .filter(|b| b.v == self.v)
            .and_then(|b| b.oracle.as_ref())
    }
}
