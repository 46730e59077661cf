//! Batch front end shared by the `swlab` binary and the C interface.

mod report;
mod spec;


use std::path::Path;

use serde_json::{json, Value};

pub use report::{run, spec_hash, Command, Report, RunOptions, SweepRow, SWEEP_CSV_HEADER};
pub use spec::{
    BlocksSpec, DenseMatrix, EngineSpec, FactorEntry, FactorKindName, LoadedModel, ModelSpec, OperatorSource,
    PresetRef, SparseMatrix, SweepSpec,
};

use crate::engine::Variant;
use crate::error::{Error, Result};
use crate::models::Preset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical_guard() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Command-line overrides of the spec's `engine` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOverrides {
    pub bin_tol: Option<f64>,
    pub order: Option<usize>,
    pub variant: Option<Variant>,
}

/// Parses a spec, applies overrides and re-validates.
pub fn load_spec(text: &str, overrides: EngineOverrides) -> Result<ModelSpec> {
    let mut spec: ModelSpec = serde_json::from_str(text)?;
    if let Some(t) = overrides.bin_tol {
        spec.engine.bin_tol = Some(t);
    }
    if let Some(n) = overrides.order {
        spec.engine.order = n;
    }
    if let Some(v) = overrides.variant {
        spec.engine.variant = v;
    }
    ModelSpec::parse(&serde_json::to_string(&spec)?)
}

pub fn load_spec_file(path: &Path, overrides: EngineOverrides) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_spec(&text, overrides)
}

/// Every preset with its parameter schema and default truncation.
pub fn presets_listing() -> Value {
    let list: Vec<Value> = Preset::ALL
        .iter()
        .map(|p| {
            let params: Vec<Value> = p
                .schema()
                .iter()
                .map(|s| json!({ "name": s.name, "kind": s.kind, "default": s.default.value(), "doc": s.doc }))
                .collect();
            json!({
                "name": p.name(),
                "about": p.about(),
                "default_n_max": p.default_n_max(),
                "params": params,
            })
        })
        .collect();
    json!({ "presets": list })
}

/// Installs the global thread pool, capped by `SWLAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SWLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("SWLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}
