//! Schrieffer-Wolff generators and effective Hamiltonians.
//!
//! All assembly happens densely in the eigenbasis of `H0` held by the block
//! structure; results are rotated back to the product basis at the end.

mod compare;
mod higher;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use compare::{offdiag_residual, spectral_compare, spectral_compare_on, BlockDeltas, CompareReport};
pub use higher::{sw_single_generator_series, sw_third_order_blockdiag};

use crate::eigenop::{decompose_eigen, BohrDecomposition, Component};
use crate::error::{Error, Result};
use crate::linalg::{commutator, hermiticity_residual, max_abs, re, CMat, C64};
use crate::operator::OperatorMatrix;
use crate::spectral::{BlockStructure, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    BlockDiagonal,
    SingleGenerator,
    MatrixForm,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::BlockDiagonal => "block_diagonal",
            Variant::SingleGenerator => "single_generator",
            Variant::MatrixForm => "matrix_form",
        }
    }

    pub const ALL: [Variant; 3] = [Variant::BlockDiagonal, Variant::SingleGenerator, Variant::MatrixForm];

    pub fn from_name(name: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant `{name}`")))
    }

    pub fn max_order(self) -> usize {
        match self {
            Variant::BlockDiagonal => 3,
            Variant::SingleGenerator => 6,
            Variant::MatrixForm => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest inter-block entry of the exact rotation `e^S H e^{-S}`.
    pub offdiag_residual: f64,
    pub s_antihermiticity: f64,
    /// Largest intra-block entry of `S`.
    pub s_block_diag_norm: f64,
    /// `max|[H0, S1] - V_o|`.
    pub generator_residual: f64,
    pub hprime_hermiticity: f64,
    /// Largest inter-block entry of `H'` itself.
    pub hprime_offblock: f64,
}

#[derive(Debug, Clone)]
pub struct SwResult {
    pub s: OperatorMatrix,
    pub h_prime: OperatorMatrix,
    pub order: usize,
    pub variant: Variant,
    pub diagnostics: Diagnostics,
    pub blocks: BlockStructure,
}

/// `(1/w + 1/w') / 2`.
pub fn f_coeff(w: f64, w2: f64) -> f64 {
    0.5 * (1.0 / w + 1.0 / w2)
}

/// Eigenbasis pieces shared by every variant.
pub(crate) struct Prepared {
    pub spectrum: Arc<Spectrum>,
    pub energies: CMat,
    pub vd: CMat,
    pub vo: CMat,
    pub vo_components: Vec<Component>,
}

pub(crate) fn check_inputs(h0: &OperatorMatrix, v: &OperatorMatrix, blocks: &BlockStructure) -> Result<()> {
    if h0.space() != v.space() {
        return Err(Error::SpaceMismatch);
    }
    if blocks.spectrum().dim() != h0.dim() {
        return Err(Error::SpaceMismatch);
    }
    for (what, m, tol) in [("H0", h0, 1e-10), ("V", v, 1e-10)] {
        let residual = m.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian { what, residual });
        }
    }
    Ok(())
}

pub(crate) fn prepare(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    bin_tol: Option<f64>,
) -> Result<Prepared> {
    check_inputs(h0, v, blocks)?;
    let spectrum = blocks.spectrum().clone();
    let bin_tol = bin_tol.unwrap_or_else(|| crate::eigenop::default_bin_tol(&spectrum));
    let n = spectrum.dim();
    let ve = spectrum.op_to_eigen(v);
    let comps = decompose_eigen(&ve, spectrum.energies(), bin_tol, true)?;
    let mut vd = CMat::zeros(n, n);
    let mut vo = CMat::zeros(n, n);
    let mut vo_components = Vec::new();
    for c in &comps {
        let (d, o) = c.split_eigen(blocks);
        for &(r, col, x) in &d.entries {
            vd[(r, col)] = x;
        }
        for &(r, col, x) in &o.entries {
            vo[(r, col)] = x;
        }
        if !o.entries.is_empty() {
            vo_components.push(o);
        }
    }
    let energies = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spectrum.energies().iter().map(|&x| re(x)),
    ));
    Ok(Prepared {
        spectrum,
        energies,
        vd,
        vo,
        vo_components,
    })
}

/// Eigenbasis generator `S = -sum_{w>0} (V_w - V_w^dagger) / w` from the
/// block-off-diagonal components, with the small-denominator guards.
pub(crate) fn generator_eigen(
    comps: &[Component],
    blocks: &BlockStructure,
) -> Result<CMat> {
    let spec = blocks.spectrum();
    let n = spec.dim();
    let floor = 1e-8 * spec.spread();
    for c in comps {
        let Some(&(r, col, _)) = c.entries.iter().find(|(r, col, _)| !blocks.same_block(*r, *col)) else {
            continue;
        };
        let (mu, nu) = ordered(blocks.block_of(r), blocks.block_of(col));
        if c.omega == 0.0 {
            return Err(Error::ZeroFrequencyOffBlock { mu, nu });
        }
        if c.omega.abs() < floor {
            return Err(Error::SmallDenominator {
                omega: c.omega,
                floor,
                mu,
                nu,
            });
        }
    }
    let mut s = CMat::zeros(n, n);
    for c in comps.iter().filter(|c| c.omega > 0.0) {
        for &(r, col, x) in &c.entries {
            if !blocks.same_block(r, col) {
                s[(r, col)] -= x / c.omega;
                s[(col, r)] += x.conj() / c.omega;
            }
        }
    }
    Ok(s)
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Generator for the block-off-diagonal part of a decomposed operator.
pub fn build_generator(dec_o: &BohrDecomposition, blocks: &BlockStructure) -> Result<OperatorMatrix> {
    if !Arc::ptr_eq(dec_o.spectrum(), blocks.spectrum()) && **dec_o.spectrum() != **blocks.spectrum() {
        return Err(Error::InvalidArgument(
            "decomposition and blocks refer to different eigenbases".into(),
        ));
    }
    let s = generator_eigen(dec_o.components(), blocks)?;
    Ok(blocks.spectrum().op_from_eigen(dec_o.input().space(), &s))
}

fn symmetrize(m: CMat) -> CMat {
    (&m + m.adjoint()) * re(0.5)
}

pub(crate) fn finish(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    p: &Prepared,
    s1: &CMat,
    s_total: CMat,
    hp: CMat,
    order: usize,
    variant: Variant,
) -> Result<SwResult> {
    let hp = symmetrize(hp);
    let gen_res = max_abs(&(commutator(&p.energies, s1) - &p.vo));
    let s_block = max_abs(&blocks.project_eigen(&s_total));
    let s_anti = max_abs(&(&s_total + s_total.adjoint())) / max_abs(&s_total).max(1.0);
    let space = h0.space();
    let s_op = p.spectrum.op_from_eigen(space, &s_total);
    let offdiag = offdiag_residual(h0, v, &s_op, blocks, None)?;
    let diagnostics = Diagnostics {
        offdiag_residual: offdiag,
        s_antihermiticity: s_anti,
        s_block_diag_norm: s_block,
        generator_residual: gen_res,
        hprime_hermiticity: hermiticity_residual(&hp),
        hprime_offblock: blocks.offblock_max(&hp),
    };
    Ok(SwResult {
        s: s_op,
        h_prime: p.spectrum.op_from_eigen(space, &hp),
        order,
        variant,
        diagnostics,
        blocks: blocks.clone(),
    })
}

/// `H' = H0 + V_d + [S, V_o]_d / 2`.
pub fn sw_second_order(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    bin_tol: Option<f64>,
) -> Result<SwResult> {
    let p = prepare(h0, v, blocks, bin_tol)?;
    let s = generator_eigen(&p.vo_components, blocks)?;
    let half = blocks.project_eigen(&commutator(&s, &p.vo)) * re(0.5);
    let hp = &p.energies + &p.vd + half;
    finish(h0, v, blocks, &p, &s, s.clone(), hp, 2, Variant::BlockDiagonal)
}

/// Second order from the pairwise sum
/// `-1/2 sum_{w,w'} f(w,w') [V_w, V_w'^dagger]` projected block diagonal.
pub fn sw_second_order_pairwise(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    bin_tol: Option<f64>,
) -> Result<OperatorMatrix> {
    let p = prepare(h0, v, blocks, bin_tol)?;
    generator_eigen(&p.vo_components, blocks)?;
    let n = p.spectrum.dim();
    let mats: Vec<CMat> = p.vo_components.iter().map(|c| c.to_eigen_dense(n)).collect();
    let mut acc = CMat::zeros(n, n);
    for (c1, m1) in p.vo_components.iter().zip(&mats) {
        for (c2, m2) in p.vo_components.iter().zip(&mats) {
            let f = f_coeff(c1.omega, c2.omega);
            acc += commutator(m1, &m2.adjoint()) * re(f);
        }
    }
    let hp = &p.energies + &p.vd - blocks.project_eigen(&acc) * re(0.5);
    Ok(p.spectrum.op_from_eigen(h0.space(), &symmetrize(hp)))
}

/// Second order summed entry by entry in the eigenbasis, without the
/// frequency decomposition.
pub fn sw_second_order_matrix_form(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
) -> Result<SwResult> {
    check_inputs(h0, v, blocks)?;
    let spec = blocks.spectrum();
    let e = spec.energies();
    let n = spec.dim();
    let floor = 1e-8 * spec.spread();
    let ve = spec.op_to_eigen(v);
    let mut s = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            if blocks.same_block(r, c) || ve[(r, c)] == C64::new(0.0, 0.0) {
                continue;
            }
            let den = e[r] - e[c];
            let (mu, nu) = ordered(blocks.block_of(r), blocks.block_of(c));
            if den == 0.0 {
                return Err(Error::ZeroFrequencyOffBlock { mu, nu });
            }
            if den.abs() < floor {
                return Err(Error::SmallDenominator {
                    omega: -den,
                    floor,
                    mu,
                    nu,
                });
            }
            s[(r, c)] = ve[(r, c)] / den;
        }
    }
    let mut hp = CMat::zeros(n, n);
    for blk in blocks.blocks() {
        for &a in blk {
            for &b in blk {
                let mut x = ve[(a, b)];
                if a == b {
                    x += e[a];
                }
                let mut second = C64::new(0.0, 0.0);
                for k in 0..n {
                    if blocks.same_block(a, k) {
                        continue;
                    }
                    let w = 1.0 / (e[a] - e[k]) + 1.0 / (e[b] - e[k]);
                    second += ve[(a, k)] * ve[(k, b)] * w;
                }
                hp[(a, b)] = x + second * 0.5;
            }
        }
    }
    let p = Prepared {
        spectrum: spec.clone(),
        energies: CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, e.iter().map(|&x| re(x)))),
        vd: blocks.project_eigen(&ve),
        vo: &ve - blocks.project_eigen(&ve),
        vo_components: Vec::new(),
    };
    finish(h0, v, blocks, &p, &s, s.clone(), hp, 2, Variant::MatrixForm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub order: usize,
    pub variant: Variant,
    pub bin_tol: Option<f64>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            order: 2,
            variant: Variant::BlockDiagonal,
            bin_tol: None,
        }
    }
}

/// Dispatches to the requested variant and order.
pub fn transform(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    opts: &EngineOptions,
) -> Result<SwResult> {
    let bad = || Error::InvalidOrder {
        order: opts.order,
        variant: opts.variant.name(),
    };
    if opts.order < 2 || opts.order > opts.variant.max_order() {
        return Err(bad());
    }
    match (opts.variant, opts.order) {
        (Variant::BlockDiagonal, 2) => sw_second_order(h0, v, blocks, opts.bin_tol),
        (Variant::BlockDiagonal, 3) => sw_third_order_blockdiag(h0, v, blocks, opts.bin_tol),
        (Variant::SingleGenerator, n) => sw_single_generator_series(h0, v, blocks, n, opts.bin_tol),
        (Variant::MatrixForm, 2) => sw_second_order_matrix_form(h0, v, blocks),
        _ => Err(bad()),
    }
}
