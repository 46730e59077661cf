use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::spec::{LoadedModel, ModelSpec};
use crate::eigenop::eigen_decompose;
use crate::engine::{offdiag_residual, spectral_compare_on, transform, SwResult};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, CMat};
use crate::models::coupling_ratio;
use crate::spectral::BlockStructure;

/// Fixed CSV header of the sweep side file.
pub const SWEEP_CSV_HEADER: [&str; 5] = ["param", "value", "max_delta", "offdiag_residual", "runtime_ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Transform,
    Compare,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Transform => "transform",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall-clock times; off by default so reports are byte-stable.
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub max_delta: f64,
    pub offdiag_residual: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub sweep_rows: Vec<SweepRow>,
}

impl Report {
    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn sweep_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
        for r in &self.sweep_rows {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn spec_hash(spec: &ModelSpec) -> String {
    let canonical = serde_json::to_string(&spec.canonical()).expect("specs serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run(cmd: Command, spec: &ModelSpec, opts: RunOptions) -> Result<Report> {
    let start = Instant::now();
    let mut out = serde_json::Map::new();
    let mut sweep_rows = Vec::new();
    out.insert("command".into(), json!(cmd.name()));
    out.insert("spec".into(), spec.canonical());

    match cmd {
        Command::Sweep => {
            let rows = sweep(spec, opts)?;
            out.insert("sweep_rows".into(), serde_json::to_value(&rows)?);
            sweep_rows = rows;
        }
        _ => {
            let model = spec.build(None)?;
            let blocks = model.blocks()?;
            out.insert("warnings".into(), json!(model.warnings));
            out.insert("blocks".into(), blocks_section(&blocks));
            out.insert("frequencies".into(), frequencies(&model, &blocks, spec.engine.bin_tol)?);
            if cmd != Command::Decompose {
                let res = transform(&model.h0, &model.v, &blocks, &spec.engine.options())?;
                out.insert("validity".into(), json!({ "coupling_ratio": coupling_ratio(&model.v, &blocks) }));
                out.insert("s_diagnostics".into(), serde_json::to_value(res.diagnostics)?);
                out.insert("hprime".into(), triplets(&res));
                out.insert("block_spectra".into(), block_spectra(&res));
                if let Some(o) = model.oracle() {
                    let interior = model.space.trusted_interior(model.margin);
                    let diff = res.h_prime.max_diff_on(o, &interior)?;
                    out.insert(
                        "oracle".into(),
                        json!({ "max_diff": diff, "relative": diff / o.norm_max().max(f64::MIN_POSITIVE) }),
                    );
                }
                if cmd == Command::Compare {
                    let interior = interior_eigen(&model, &blocks);
                    let h = &model.h0 + &model.v;
                    let report = spectral_compare_on(&h, &res.h_prime, &blocks, &interior)?;
                    out.insert("compare".into(), serde_json::to_value(report)?);
                }
            }
        }
    }

    let wall = if opts.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    out.insert(
        "provenance".into(),
        json!({
            "tool": "swlab",
            "version": env!("CARGO_PKG_VERSION"),
            "spec_hash": spec_hash(spec),
            "wall_time_ms": wall,
        }),
    );
    Ok(Report {
        json: Value::Object(out),
        sweep_rows,
    })
}

fn interior_eigen(model: &LoadedModel, blocks: &BlockStructure) -> Vec<usize> {
    let states = model.space.trusted_interior(model.margin);
    blocks.spectrum().eigen_indices_within(&states)
}

fn blocks_section(blocks: &BlockStructure) -> Value {
    json!({
        "count": blocks.n_blocks(),
        "sets": blocks.blocks(),
        "min_cross_gap": blocks.min_cross_gap(),
    })
}

fn frequencies(model: &LoadedModel, blocks: &BlockStructure, bin_tol: Option<f64>) -> Result<Value> {
    let spectrum = blocks.spectrum();
    let tol = bin_tol.unwrap_or_else(|| crate::eigenop::default_bin_tol(spectrum));
    let dec = eigen_decompose(&model.v, spectrum, tol)?;
    let mut list = Vec::with_capacity(dec.len());
    for (k, c) in dec.components().iter().enumerate() {
        list.push(json!({
            "omega": c.omega,
            "component_norm": c.norm_max(),
            "component_norm_fro": c.norm_fro(),
            "defect": dec.defect(&model.h0, k)?,
        }));
    }
    Ok(Value::Array(list))
}

fn triplets(res: &SwResult) -> Value {
    let t: Vec<Value> = res
        .h_prime
        .triplets()
        .into_iter()
        .map(|(r, c, x)| json!([r, c, x.re, x.im]))
        .collect();
    json!({ "dim": res.h_prime.dim(), "entries": t })
}

fn block_spectra(res: &SwResult) -> Value {
    let blocks = &res.blocks;
    let he = blocks.spectrum().op_to_eigen(&res.h_prime);
    let list: Vec<Value> = blocks
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, idx)| {
            let sub = CMat::from_fn(idx.len(), idx.len(), |r, c| he[(idx[r], idx[c])]);
            json!({ "block": b, "eigenvalues": eigvalsh(&sub) })
        })
        .collect();
    Value::Array(list)
}

fn sweep(spec: &ModelSpec, opts: RunOptions) -> Result<Vec<SweepRow>> {
    let sw = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Spec("`sweep` command needs a `sweep` section".into()))?;
    // Rows are computed independently and collected in input order.
    let rows: Vec<Result<SweepRow>> = sw
        .values
        .par_iter()
        .map(|&value| {
            let start = Instant::now();
            let model = spec.build(Some((&sw.param, value)))?;
            let blocks = model.blocks()?;
            let res = transform(&model.h0, &model.v, &blocks, &spec.engine.options())?;
            let interior = interior_eigen(&model, &blocks);
            let h = &model.h0 + &model.v;
            let cmp = spectral_compare_on(&h, &res.h_prime, &blocks, &interior)?;
            let off = offdiag_residual(&model.h0, &model.v, &res.s, &blocks, Some(&interior))?;
            Ok(SweepRow {
                param: sw.param.clone(),
                value,
                max_delta: cmp.max_delta,
                offdiag_residual: off,
                runtime_ms: if opts.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
            })
        })
        .collect();
    rows.into_iter().collect()
}
