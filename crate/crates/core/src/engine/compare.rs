use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, CMat};
use crate::operator::{unitary_from_generator, OperatorMatrix};
use crate::spectral::BlockStructure;

/// Largest inter-block entry, in the eigenbasis, of `e^S (H0 + V) e^{-S}`.
/// With `restrict`, only eigen-indices in the list are inspected.
pub fn offdiag_residual(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    s: &OperatorMatrix,
    blocks: &BlockStructure,
    restrict: Option<&[usize]>,
) -> Result<f64> {
    if h0.space() != v.space() || h0.space() != s.space() {
        return Err(Error::SpaceMismatch);
    }
    let u = unitary_from_generator(&s.to_dense())?;
    let h = h0.to_dense() + v.to_dense();
    let rot = &u * h * u.adjoint();
    let re = blocks.spectrum().to_eigen(&rot);
    let n = re.nrows();
    let keep: Vec<bool> = match restrict {
        Some(idx) => {
            let mut k = vec![false; n];
            idx.iter().for_each(|&i| k[i] = true);
            k
        }
        None => vec![true; n],
    };
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if keep[r] && keep[c] && !blocks.same_block(r, c) {
                worst = worst.max(re[(r, c)].norm());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDeltas {
    pub block: usize,
    /// `(exact, effective)` eigenvalue pairs.
    pub pairs: Vec<(f64, f64)>,
    pub max_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub max_delta: f64,
    pub per_block: Vec<BlockDeltas>,
}

fn block_eigs(h_prime: &OperatorMatrix, blocks: &BlockStructure, which: &[usize]) -> Vec<(f64, usize)> {
    let he: CMat = blocks.spectrum().op_to_eigen(h_prime);
    let mut out = Vec::new();
    for &b in which {
        let idx = &blocks.blocks()[b];
        let sub = CMat::from_fn(idx.len(), idx.len(), |r, c| he[(idx[r], idx[c])]);
        out.extend(eigvalsh(&sub).into_iter().map(|x| (x, b)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

fn report(n_blocks: usize, matched: Vec<(f64, f64, usize)>) -> CompareReport {
    let mut per_block: Vec<BlockDeltas> = (0..n_blocks)
        .map(|b| BlockDeltas {
            block: b,
            pairs: Vec::new(),
            max_delta: 0.0,
        })
        .collect();
    let mut max_delta = 0.0f64;
    for (exact, eff, b) in matched {
        let d = (exact - eff).abs();
        max_delta = max_delta.max(d);
        per_block[b].pairs.push((exact, eff));
        per_block[b].max_delta = per_block[b].max_delta.max(d);
    }
    per_block.retain(|b| !b.pairs.is_empty());
    CompareReport {
        max_delta,
        per_block,
    }
}

/// Sorted spectrum of `h` against the union of the per-block spectra of
/// `h_prime`, matched by position.
pub fn spectral_compare(
    h: &OperatorMatrix,
    h_prime: &OperatorMatrix,
    blocks: &BlockStructure,
) -> Result<CompareReport> {
    if h.space() != h_prime.space() {
        return Err(Error::SpaceMismatch);
    }
    let exact = eigvalsh(&h.to_dense());
    let all: Vec<usize> = (0..blocks.n_blocks()).collect();
    let eff = block_eigs(h_prime, blocks, &all);
    let matched = exact
        .into_iter()
        .zip(eff)
        .map(|(x, (y, b))| (x, y, b))
        .collect();
    Ok(report(blocks.n_blocks(), matched))
}

/// Like [`spectral_compare`] but only for blocks lying entirely inside
/// `interior` (eigen-indices). Each effective eigenvalue is paired with the
/// nearest exact eigenvalue not yet used.
pub fn spectral_compare_on(
    h: &OperatorMatrix,
    h_prime: &OperatorMatrix,
    blocks: &BlockStructure,
    interior: &[usize],
) -> Result<CompareReport> {
    if h.space() != h_prime.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut inside = vec![false; h.dim()];
    interior.iter().for_each(|&i| inside[i] = true);
    let which: Vec<usize> = (0..blocks.n_blocks())
        .filter(|&b| blocks.blocks()[b].iter().all(|&i| inside[i]))
        .collect();
    let exact = eigvalsh(&h.to_dense());
    let mut used = vec![false; exact.len()];
    let mut matched = Vec::new();
    for (y, b) in block_eigs(h_prime, blocks, &which) {
        let best = (0..exact.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| (exact[i] - y).abs().total_cmp(&(exact[j] - y).abs()));
        if let Some(i) = best {
            used[i] = true;
            matched.push((exact[i], y, b));
        }
    }
    Ok(report(blocks.n_blocks(), matched))
}
