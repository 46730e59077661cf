//! Bohr-frequency decomposition of operators with respect to `H0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, C64, I};
use crate::operator::{OperatorMatrix, ProductSpace};
use crate::spectral::{project_block_diagonal, BlockStructure, Spectrum};

/// One eigenoperator `V_omega`, stored as eigenbasis entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub omega: f64,
    pub entries: Vec<(usize, usize, C64)>,
}

impl Component {
    pub fn to_eigen_dense(&self, n: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn norm_max(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.2.norm()))
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Splits by whether each entry stays inside a block. Both halves keep
    /// the component frequency.
    pub fn split_eigen(&self, blocks: &BlockStructure) -> (Component, Component) {
        let (d, o) = self
            .entries
            .iter()
            .partition(|(r, c, _)| blocks.same_block(*r, *c));
        (
            Component {
                omega: self.omega,
                entries: d,
            },
            Component {
                omega: self.omega,
                entries: o,
            },
        )
    }
}

/// `V = sum_omega V_omega` with `[H0, V_omega] = -omega V_omega`.
#[derive(Debug, Clone)]
pub struct BohrDecomposition {
    space: Arc<ProductSpace>,
    spectrum: Arc<Spectrum>,
    input: OperatorMatrix,
    components: Vec<Component>,
    bin_tol: f64,
}

/// Default binning tolerance: `1e-9` of the spectral spread.
pub fn default_bin_tol(spectrum: &Spectrum) -> f64 {
    1e-9 * spectrum.spread()
}

pub fn eigen_decompose(
    v: &OperatorMatrix,
    spectrum: &Arc<Spectrum>,
    bin_tol: f64,
) -> Result<BohrDecomposition> {
    if !(bin_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin tolerance must be non-negative, got {bin_tol}"
        )));
    }
    let n = spectrum.dim();
    if v.dim() != n {
        return Err(Error::SpaceMismatch);
    }
    let ve = spectrum.op_to_eigen(v);
    let hermitian = v.hermiticity_residual() <= 1e-12;
    let components = decompose_eigen(&ve, spectrum.energies(), bin_tol, hermitian)?;
    Ok(BohrDecomposition {
        space: v.space().clone(),
        spectrum: spectrum.clone(),
        input: v.clone(),
        components,
        bin_tol,
    })
}

/// Clusters the entries of an eigenbasis matrix by Bohr frequency
/// `E_c - E_r` with single linkage at `bin_tol`.
pub(crate) fn decompose_eigen(
    ve: &CMat,
    e: &[f64],
    bin_tol: f64,
    hermitian: bool,
) -> Result<Vec<Component>> {
    let n = e.len();
    let floor = 1e-14 * max_abs(ve);
    let mut items: Vec<(f64, usize, usize, C64)> = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let x = ve[(r, c)];
            if x.norm() > floor {
                items.push((e[c] - e[r], r, c, x));
            }
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut clusters: Vec<Vec<(f64, usize, usize, C64)>> = Vec::new();
    for it in items {
        match clusters.last_mut() {
            Some(cl) if it.0 - cl.last().unwrap().0 <= bin_tol => cl.push(it),
            _ => clusters.push(vec![it]),
        }
    }

    let mut components = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let has_zero = cl.iter().any(|x| x.0.abs() <= bin_tol);
        let omega = if has_zero {
            if let Some(bad) = cl.iter().find(|x| x.0.abs() > bin_tol) {
                return Err(Error::BinMerge {
                    omega: bad.0,
                    bin_tol,
                });
            }
            0.0
        } else {
            let base = cl[0].0;
            let w: f64 = cl.iter().map(|x| x.3.norm()).sum();
            base + cl.iter().map(|x| (x.0 - base) * x.3.norm()).sum::<f64>() / w
        };
        let mut entries: Vec<_> = cl.into_iter().map(|(_, r, c, x)| (r, c, x)).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        components.push(Component { omega, entries });
    }

    // Make the +/- pairing of Hermitian inputs exact in the frequencies.
    if hermitian {
        let k = components.len();
        let mirrored = (0..k).all(|i| components[i].entries.len() == components[k - 1 - i].entries.len());
        if mirrored {
            let om: Vec<f64> = components.iter().map(|c| c.omega).collect();
            for i in 0..k {
                components[i].omega = 0.5 * (om[i] - om[k - 1 - i]);
            }
        }
    }
    Ok(components)
}

impl BohrDecomposition {
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.omega).collect()
    }

    pub fn bin_tol(&self) -> f64 {
        self.bin_tol
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn input(&self) -> &OperatorMatrix {
        &self.input
    }

    /// Index of the component whose frequency lies within `tol` of `omega`.
    pub fn find(&self, omega: f64, tol: f64) -> Option<usize> {
        self.components
            .iter()
            .position(|c| (c.omega - omega).abs() <= tol)
    }

    pub fn component_eigen(&self, k: usize) -> CMat {
        self.components[k].to_eigen_dense(self.spectrum.dim())
    }

    /// Component `k` in the original product basis.
    pub fn component(&self, k: usize) -> OperatorMatrix {
        self.spectrum
            .op_from_eigen(&self.space, &self.component_eigen(k))
    }

    pub fn reconstruct(&self) -> OperatorMatrix {
        let n = self.spectrum.dim();
        let mut m = CMat::zeros(n, n);
        for c in &self.components {
            for &(r, col, v) in &c.entries {
                m[(r, col)] += v;
            }
        }
        self.spectrum.op_from_eigen(&self.space, &m)
    }

    /// `max|[H0, V_k] + omega_k V_k|` for component `k`.
    pub fn defect(&self, h0: &OperatorMatrix, k: usize) -> Result<f64> {
        let vk = self.component(k);
        let c = h0.commutator(&vk)?;
        Ok(c.try_add(&vk.scale_re(self.components[k].omega))?.norm_max())
    }

    /// Largest deviation between the Heisenberg-evolved input and
    /// `sum_omega e^{-i omega t} V_omega` over the sample times.
    pub fn verify_time_evolution(&self, h0: &OperatorMatrix, ts: &[f64]) -> f64 {
        let h = h0.to_dense();
        let v = self.input.to_dense();
        let comps: Vec<CMat> = (0..self.len())
            .map(|k| self.component(k).to_dense())
            .collect();
        let mut worst = 0.0f64;
        for &t in ts {
            let u = (&h * (I * t)).exp();
            let lhs = &u * &v * u.adjoint();
            let mut rhs = CMat::zeros(v.nrows(), v.ncols());
            for (c, m) in self.components.iter().zip(&comps) {
                rhs += m * C64::new(0.0, -c.omega * t).exp();
            }
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
        worst
    }
}

/// Splits component `k` into its block-diagonal and block-off-diagonal parts.
pub fn split_component_by_blocks(
    dec: &BohrDecomposition,
    k: usize,
    blocks: &BlockStructure,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let vk = dec.component(k);
    let d = project_block_diagonal(&vk, blocks)?;
    let o = vk.try_sub(&d)?;
    Ok((d, o))
}
