//! Eigenbasis of `H0`, energy blocks and the block split of a perturbation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, CMat, C64, ZERO};
use crate::operator::{OperatorMatrix, ProductSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Eigenvector `k` is the product-basis state `perm[k]`.
    Permutation(Vec<usize>),
    /// Eigenvectors are the columns.
    Dense(CMat),
}

/// Eigenvalues of `H0` in ascending order with their eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energies: Vec<f64>,
    basis: Basis,
}

pub fn diagonalize(h0: &OperatorMatrix) -> Result<Spectrum> {
    let residual = h0.hermiticity_residual();
    if residual > 1e-10 {
        return Err(Error::NotHermitian {
            what: "H0",
            residual,
        });
    }
    let n = h0.dim();
    let scale = h0.norm_max();
    let off = h0
        .triplets()
        .into_iter()
        .filter(|(r, c, _)| r != c)
        .fold(0.0f64, |acc, (_, _, v)| acc.max(v.norm()));
    if off <= 1e-14 * scale {
        let diag: Vec<f64> = (0..n).map(|i| h0.get(i, i).re).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let energies = perm.iter().map(|&i| diag[i]).collect();
        return Ok(Spectrum {
            energies,
            basis: Basis::Permutation(perm),
        });
    }
    let (energies, vectors) = eigh(&h0.to_dense());
    Ok(Spectrum {
        energies,
        basis: Basis::Dense(vectors),
    })
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn is_permutation(&self) -> bool {
        matches!(self.basis, Basis::Permutation(_))
    }

    pub fn spread(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Eigenvectors as columns of a dense unitary.
    pub fn basis_matrix(&self) -> CMat {
        match &self.basis {
            Basis::Dense(w) => w.clone(),
            Basis::Permutation(p) => {
                let n = p.len();
                let mut w = CMat::zeros(n, n);
                for (k, &i) in p.iter().enumerate() {
                    w[(i, k)] = C64::new(1.0, 0.0);
                }
                w
            }
        }
    }

    /// `W^dagger M W`.
    pub fn to_eigen(&self, m: &CMat) -> CMat {
        match &self.basis {
            Basis::Permutation(p) => CMat::from_fn(p.len(), p.len(), |r, c| m[(p[r], p[c])]),
            Basis::Dense(w) => w.adjoint() * m * w,
        }
    }

    /// `W M W^dagger`.
    pub fn from_eigen(&self, m: &CMat) -> CMat {
        match &self.basis {
            Basis::Permutation(p) => {
                let n = p.len();
                let mut out = CMat::zeros(n, n);
                for r in 0..n {
                    for c in 0..n {
                        out[(p[r], p[c])] = m[(r, c)];
                    }
                }
                out
            }
            Basis::Dense(w) => w * m * w.adjoint(),
        }
    }

    pub fn op_to_eigen(&self, op: &OperatorMatrix) -> CMat {
        self.to_eigen(&op.to_dense())
    }

    pub fn op_from_eigen(&self, space: &Arc<ProductSpace>, m: &CMat) -> OperatorMatrix {
        OperatorMatrix::from_dense(space, &self.from_eigen(m)).expect("dimension matches space")
    }

    /// Eigen-indices whose eigenvector is supported on the listed product
    /// states, up to a weight leak of `1e-9`.
    pub fn eigen_indices_within(&self, states: &[usize]) -> Vec<usize> {
        let n = self.dim();
        let mut inside = vec![false; n];
        states.iter().for_each(|&i| inside[i] = true);
        match &self.basis {
            Basis::Permutation(p) => (0..n).filter(|&k| inside[p[k]]).collect(),
            Basis::Dense(w) => (0..n)
                .filter(|&k| {
                    let out: f64 = (0..n).filter(|&i| !inside[i]).map(|i| w[(i, k)].norm_sqr()).sum();
                    out <= 1e-9
                })
                .collect(),
        }
    }

    /// `max|H0 W - W diag(E)|`.
    pub fn residual(&self, h0: &OperatorMatrix) -> f64 {
        let w = self.basis_matrix();
        let hw = h0.to_dense() * &w;
        let n = self.dim();
        let we = CMat::from_fn(n, n, |r, c| w[(r, c)] * self.energies[c]);
        max_abs(&(hw - we))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockStrategy {
    /// Index sets over the ascending eigen-ordering.
    Explicit { sets: Vec<Vec<usize>> },
    GapThreshold { delta: f64 },
    Degeneracy { tol: f64 },
    /// Bucket eigenstates by the energy of the listed factors.
    Subsystem { factors: Vec<String> },
}

/// Partition of the eigen-indices of a [`Spectrum`] into blocks.
///
/// The subsystem strategy may rotate within degenerate eigenspaces, so the
/// structure owns the spectrum its indices refer to.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    spectrum: Arc<Spectrum>,
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    strategy: BlockStrategy,
}

pub fn make_blocks(
    h0: &OperatorMatrix,
    spectrum: &Arc<Spectrum>,
    strategy: BlockStrategy,
) -> Result<BlockStructure> {
    let n = spectrum.dim();
    let e = spectrum.energies();
    let (spec, blocks) = match &strategy {
        BlockStrategy::Explicit { sets } => (spectrum.clone(), explicit_blocks(sets, n)?),
        BlockStrategy::GapThreshold { delta } => {
            if !(*delta > 0.0) || !delta.is_finite() {
                return Err(Error::InvalidBlocks(format!(
                    "gap threshold must be positive, got {delta}"
                )));
            }
            (spectrum.clone(), chain_blocks(e, |gap| gap < *delta))
        }
        BlockStrategy::Degeneracy { tol } => {
            if !(*tol >= 0.0) || !tol.is_finite() {
                return Err(Error::InvalidBlocks(format!(
                    "degeneracy tolerance must be non-negative, got {tol}"
                )));
            }
            let delta = tol * spectrum.spread().max(1.0);
            (spectrum.clone(), chain_blocks(e, |gap| gap <= delta))
        }
        BlockStrategy::Subsystem { factors } => subsystem_blocks(h0, spectrum, factors)?,
    };
    let mut block_of = vec![0; n];
    for (b, set) in blocks.iter().enumerate() {
        for &i in set {
            block_of[i] = b;
        }
    }
    Ok(BlockStructure {
        spectrum: spec,
        block_of,
        blocks,
        strategy,
    })
}

fn explicit_blocks(sets: &[Vec<usize>], n: usize) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; n];
    for set in sets {
        if set.is_empty() {
            return Err(Error::InvalidBlocks("empty block".into()));
        }
        for &i in set {
            if i >= n {
                return Err(Error::InvalidBlocks(format!(
                    "index {i} out of range for dimension {n}"
                )));
            }
            if seen[i] {
                return Err(Error::InvalidBlocks(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidBlocks(format!("index {i} is not covered")));
    }
    Ok(sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s
        })
        .collect())
}

fn chain_blocks(e: &[f64], join: impl Fn(f64) -> bool) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in e.iter().enumerate() {
        match blocks.last_mut() {
            Some(last) if join(x - e[i - 1]) => last.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    blocks
}

fn subsystem_blocks(
    h0: &OperatorMatrix,
    spectrum: &Arc<Spectrum>,
    labels: &[String],
) -> Result<(Arc<Spectrum>, Vec<Vec<usize>>)> {
    let space = h0.space();
    let mut pos_a = Vec::new();
    for l in labels {
        let p = space.position(l)?;
        if !pos_a.contains(&p) {
            pos_a.push(p);
        }
    }
    if pos_a.is_empty() {
        return Err(Error::InvalidBlocks("subsystem strategy needs at least one factor".into()));
    }
    let pos_b: Vec<usize> = (0..space.factors().len())
        .filter(|p| !pos_a.contains(p))
        .collect();
    let sub_index = |idx: usize, pos: &[usize]| {
        pos.iter()
            .fold(0, |acc, &p| acc * space.factors()[p].dim + space.level(idx, p))
    };
    let d_a: usize = pos_a.iter().map(|&p| space.factors()[p].dim).product();
    let d_b = space.total_dim() / d_a;
    let n = space.total_dim();
    let ia: Vec<usize> = (0..n).map(|i| sub_index(i, &pos_a)).collect();
    let ib: Vec<usize> = (0..n).map(|i| sub_index(i, &pos_b)).collect();

    let h = h0.to_dense();
    let mut ha = CMat::zeros(d_a, d_a);
    for r in 0..n {
        for c in 0..n {
            if ib[r] == ib[c] {
                ha[(ia[r], ia[c])] += h[(r, c)] / d_b as f64;
            }
        }
    }
    let ha_full = CMat::from_fn(n, n, |r, c| {
        if ib[r] == ib[c] {
            ha[(ia[r], ia[c])]
        } else {
            ZERO
        }
    });
    let rest = &h - &ha_full;
    let mut hb = CMat::zeros(d_b, d_b);
    for r in 0..n {
        for c in 0..n {
            if ia[r] == ia[c] {
                hb[(ib[r], ib[c])] += rest[(r, c)] / d_a as f64;
            }
        }
    }
    let mut residual = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let want = if ia[r] == ia[c] { hb[(ib[r], ib[c])] } else { ZERO };
            residual = residual.max((rest[(r, c)] - want).norm());
        }
    }
    if residual > 1e-9 * max_abs(&h).max(1.0) {
        return Err(Error::NotAdditive {
            factors: labels.to_vec(),
            residual,
        });
    }

    let mut spec = spectrum.clone();
    let mut m = spec.to_eigen(&ha_full);
    let scale = max_abs(&m).max(1.0);
    let off = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|(r, c)| r != c)
        .fold(0.0f64, |acc, (r, c)| acc.max(m[(r, c)].norm()));
    if off > 1e-9 * scale {
        spec = Arc::new(refine(&spec, &m));
        m = spec.to_eigen(&ha_full);
    }
    let ea: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let lo = ea.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ea.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (hi - lo).max(1.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ea[a].total_cmp(&ea[b]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for &i in &order {
        match blocks.last_mut() {
            Some(last) if ea[i] - prev <= tol => last.push(i),
            _ => blocks.push(vec![i]),
        }
        prev = ea[i];
    }
    blocks.iter_mut().for_each(|b| b.sort_unstable());
    Ok((spec, blocks))
}

/// Rotates within degenerate clusters of `spec` so that `m` (given in the
/// eigenbasis and commuting with `H0`) becomes diagonal.
fn refine(spec: &Spectrum, m: &CMat) -> Spectrum {
    let e = spec.energies();
    let tol = 1e-9 * spec.spread().max(1.0);
    let clusters = chain_blocks(e, |gap| gap <= tol);
    let n = spec.dim();
    let mut rot = CMat::zeros(n, n);
    for cl in &clusters {
        let sub = CMat::from_fn(cl.len(), cl.len(), |r, c| m[(cl[r], cl[c])]);
        let (_, v) = eigh(&sub);
        for (r, &i) in cl.iter().enumerate() {
            for (c, &j) in cl.iter().enumerate() {
                rot[(i, j)] = v[(r, c)];
            }
        }
    }
    Spectrum {
        energies: e.to_vec(),
        basis: Basis::Dense(spec.basis_matrix() * rot),
    }
}

/// Explicit strategy from sets of product-basis states. Only available when
/// the spectrum is a permutation of the product basis.
pub fn explicit_from_states(spectrum: &Spectrum, sets: &[Vec<usize>]) -> Result<BlockStrategy> {
    let Basis::Permutation(p) = spectrum.basis() else {
        return Err(Error::InvalidBlocks(
            "state sets need H0 diagonal in the product basis".into(),
        ));
    };
    let mut inv = vec![usize::MAX; p.len()];
    for (k, &i) in p.iter().enumerate() {
        inv[i] = k;
    }
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        let mut mapped = Vec::with_capacity(set.len());
        for &i in set {
            if i >= p.len() {
                return Err(Error::InvalidBlocks(format!("state {i} out of range")));
            }
            mapped.push(inv[i]);
        }
        out.push(mapped);
    }
    Ok(BlockStrategy::Explicit { sets: out })
}

impl BlockStructure {
    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn strategy(&self) -> &BlockStrategy {
        &self.strategy
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    /// Zeroes every entry of an eigenbasis matrix that couples two blocks.
    pub fn project_eigen(&self, m: &CMat) -> CMat {
        CMat::from_fn(m.nrows(), m.ncols(), |r, c| {
            if self.same_block(r, c) {
                m[(r, c)]
            } else {
                ZERO
            }
        })
    }

    /// Largest entry of an eigenbasis matrix that couples two blocks.
    pub fn offblock_max(&self, m: &CMat) -> f64 {
        let mut acc = 0.0f64;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if !self.same_block(r, c) {
                    acc = acc.max(m[(r, c)].norm());
                }
            }
        }
        acc
    }

    /// Smallest energy gap between states in different blocks.
    pub fn min_cross_gap(&self) -> f64 {
        let e = self.spectrum.energies();
        let mut g = f64::INFINITY;
        for i in 0..e.len() {
            for j in 0..e.len() {
                if !self.same_block(i, j) {
                    g = g.min((e[i] - e[j]).abs());
                }
            }
        }
        g
    }
}

/// `V_d = sum_mu P_mu V P_mu` and `V_o = V - V_d`, in the original basis.
pub fn split_v(
    v: &OperatorMatrix,
    blocks: &BlockStructure,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let spec = blocks.spectrum();
    if v.dim() != spec.dim() {
        return Err(Error::SpaceMismatch);
    }
    match spec.basis() {
        Basis::Permutation(p) => {
            let mut inv = vec![0; p.len()];
            for (k, &i) in p.iter().enumerate() {
                inv[i] = k;
            }
            let (d, o): (Vec<_>, Vec<_>) = v
                .triplets()
                .into_iter()
                .partition(|(r, c, _)| blocks.same_block(inv[*r], inv[*c]));
            Ok((
                OperatorMatrix::from_triplets(v.space(), d)?,
                OperatorMatrix::from_triplets(v.space(), o)?,
            ))
        }
        Basis::Dense(_) => {
            let vd = project_block_diagonal(v, blocks)?;
            let vo = v.try_sub(&vd)?;
            Ok((vd, vo))
        }
    }
}

pub fn project_block_diagonal(m: &OperatorMatrix, blocks: &BlockStructure) -> Result<OperatorMatrix> {
    let spec = blocks.spectrum();
    if m.dim() != spec.dim() {
        return Err(Error::SpaceMismatch);
    }
    if spec.is_permutation() {
        return Ok(split_v(m, blocks)?.0);
    }
    let me = spec.op_to_eigen(m);
    Ok(spec.op_from_eigen(m.space(), &blocks.project_eigen(&me)))
}
