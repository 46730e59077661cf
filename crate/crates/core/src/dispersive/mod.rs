//! Closed-form dispersive effective Hamiltonians.
//!
//! System A (bosonic modes or a qubit) is far detuned from system B. Each
//! assembler builds its operator directly from the renormalized couplings
//! `B_r` and is meant to agree with the general engine run on subsystem
//! blocks of A.

mod chains;
mod cubic;

use std::sync::Arc;

pub use chains::{two_chain_hprime, ChainSpecies, TwoChain};
pub use cubic::{cubic_forms, cubic_tensors, CubicForms, CubicSetup, CubicTensors, Tensor4};

use crate::eigenop::{default_bin_tol, eigen_decompose};
use crate::error::{Error, Result};
use crate::operator::{build_creation, build_ladder, build_number, build_transition, pauli, FactorKind, OperatorMatrix, ProductSpace};
use crate::spectral::diagonalize;

/// One Bohr component of `B` and the detuning that weights it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BTerm {
    pub omega_b: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone)]
pub struct RenormalizedB {
    pub b_r: OperatorMatrix,
    pub table: Vec<BTerm>,
    components: Vec<OperatorMatrix>,
}

impl RenormalizedB {
    /// Components `B_{omega_B}` in the order of `table`.
    pub fn components(&self) -> &[OperatorMatrix] {
        &self.components
    }

    /// `sum_k B_k / d_k` recomputed from the stored table.
    pub fn reconstruct(&self) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(self.b_r.space());
        for (t, c) in self.table.iter().zip(&self.components) {
            out += c * (1.0 / t.denominator);
        }
        out
    }

    pub fn min_denominator(&self) -> f64 {
        self.table
            .iter()
            .map(|t| t.denominator.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `B_r = sum_{omega_B} B_{omega_B} / (omega_r - omega_B)`, with the
/// components taken with respect to `h_b`.
pub fn renormalize_b(
    b: &OperatorMatrix,
    h_b: &OperatorMatrix,
    omega_r: f64,
    bin_tol: Option<f64>,
) -> Result<RenormalizedB> {
    if b.space() != h_b.space() {
        return Err(Error::SpaceMismatch);
    }
    let spec = Arc::new(diagonalize(h_b)?);
    let tol = bin_tol.unwrap_or_else(|| default_bin_tol(&spec));
    let dec = eigen_decompose(b, &spec, tol)?;
    let floor = 1e-8 * omega_r.abs().max(spec.spread());
    let mut b_r = OperatorMatrix::zeros(b.space());
    let mut table = Vec::with_capacity(dec.len());
    let mut components = Vec::with_capacity(dec.len());
    for (k, comp) in dec.components().iter().enumerate() {
        let d = omega_r - comp.omega;
        if d.abs() <= floor {
            return Err(Error::Resonance {
                omega_b: comp.omega,
                denominator: d,
            });
        }
        let op = dec.component(k);
        b_r += &op * (1.0 / d);
        table.push(BTerm {
            omega_b: comp.omega,
            denominator: d,
        });
        components.push(op);
    }
    Ok(RenormalizedB {
        b_r,
        table,
        components,
    })
}

#[derive(Debug, Clone)]
pub struct BosonMode {
    pub label: String,
    pub omega: f64,
    /// Operator of system B multiplying `a^dagger` in the coupling.
    pub b: OperatorMatrix,
}

#[derive(Debug, Clone)]
pub enum Coupling {
    /// `V = sum_i a_i^dagger B_i + h.c.`
    Modes(Vec<BosonMode>),
    /// `H_A = (omega/2) sigma_z`, `V = B^dagger sigma_- + sigma_+ B`.
    Qubit {
        label: String,
        omega: f64,
        b: OperatorMatrix,
    },
}

#[derive(Debug, Clone)]
pub struct DispersiveSetup {
    pub h_b: OperatorMatrix,
    pub coupling: Coupling,
}

impl DispersiveSetup {
    pub fn space(&self) -> &Arc<ProductSpace> {
        self.h_b.space()
    }

    /// Factor labels of system A, for subsystem blocks.
    pub fn a_factors(&self) -> Vec<String> {
        match &self.coupling {
            Coupling::Modes(m) => m.iter().map(|x| x.label.clone()).collect(),
            Coupling::Qubit { label, .. } => vec![label.clone()],
        }
    }

    pub fn h_a(&self) -> Result<OperatorMatrix> {
        let space = self.space();
        match &self.coupling {
            Coupling::Modes(modes) => {
                let mut h = OperatorMatrix::zeros(space);
                for m in modes {
                    h += build_number(space, &m.label)? * m.omega;
                }
                Ok(h)
            }
            Coupling::Qubit { label, omega, .. } => Ok(pauli::z(space, label)? * (0.5 * omega)),
        }
    }

    pub fn h0(&self) -> Result<OperatorMatrix> {
        Ok(self.h_a()? + &self.h_b)
    }

    pub fn v(&self) -> Result<OperatorMatrix> {
        let space = self.space();
        match &self.coupling {
            Coupling::Modes(modes) => {
                let mut v = OperatorMatrix::zeros(space);
                for m in modes {
                    let t = build_creation(space, &m.label)?.try_mul(&m.b)?;
                    v += &t + &t.adjoint();
                }
                Ok(v)
            }
            Coupling::Qubit { label, b, .. } => {
                let t = pauli::plus(space, label)?.try_mul(b)?;
                Ok(&t + &t.adjoint())
            }
        }
    }

    /// `max(|V|, omega_B spread) / min |omega_r - omega_B|`; small values
    /// mean the dispersive picture is trustworthy.
    pub fn validity_ratio(&self, bin_tol: Option<f64>) -> Result<f64> {
        let spread = diagonalize(&self.h_b)?.spread();
        let scale = self.v()?.norm_max().max(spread);
        let gap = match &self.coupling {
            Coupling::Modes(modes) => {
                let mut g = f64::INFINITY;
                for m in modes {
                    g = g.min(renormalize_b(&m.b, &self.h_b, m.omega, bin_tol)?.min_denominator());
                }
                g
            }
            Coupling::Qubit { omega, b, .. } => renormalize_b(b, &self.h_b, *omega, bin_tol)?.min_denominator(),
        };
        Ok(scale / gap)
    }
}

fn check_modes(modes: &[BosonMode], h_b: &OperatorMatrix) -> Result<()> {
    let space = h_b.space();
    for m in modes {
        if m.b.space() != space {
            return Err(Error::SpaceMismatch);
        }
        let f = space.factor(&m.label)?;
        if f.kind != FactorKind::Boson {
            return Err(Error::WrongFactorKind {
                label: m.label.clone(),
                op: "dispersive mode",
                expected: "boson",
                found: f.kind.name(),
            });
        }
    }
    Ok(())
}

/// Pairs `i < j` whose cross terms are kept by default: modes closer than
/// ten times the coupling scale.
pub fn default_cross_pairs(modes: &[BosonMode]) -> Vec<(usize, usize)> {
    let scale = modes.iter().map(|m| m.b.norm_max()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 0..modes.len() {
        for j in i + 1..modes.len() {
            if (modes[i].omega - modes[j].omega).abs() <= 10.0 * scale {
                out.push((i, j));
            }
        }
    }
    out
}

/// Multi-mode dispersive `H'`. Cross terms `a_i^dagger a_j` with `i != j`
/// are included only for the listed pairs.
pub fn dispersive_multimode_hprime(
    modes: &[BosonMode],
    h_b: &OperatorMatrix,
    keep_cross: &[(usize, usize)],
    bin_tol: Option<f64>,
) -> Result<OperatorMatrix> {
    check_modes(modes, h_b)?;
    let space = h_b.space();
    let rb: Vec<OperatorMatrix> = modes
        .iter()
        .map(|m| Ok(renormalize_b(&m.b, h_b, m.omega, bin_tol)?.b_r))
        .collect::<Result<_>>()?;
    let a: Vec<OperatorMatrix> = modes
        .iter()
        .map(|m| build_ladder(space, &m.label))
        .collect::<Result<_>>()?;

    let mut pairs: Vec<(usize, usize)> = (0..modes.len()).map(|i| (i, i)).collect();
    for &(i, j) in keep_cross {
        if i >= modes.len() || j >= modes.len() || i == j {
            return Err(Error::InvalidArgument(format!("bad cross pair ({i}, {j})")));
        }
        pairs.push((i, j));
        pairs.push((j, i));
    }

    let mut h = h_b.clone();
    for (m, ai) in modes.iter().zip(&a) {
        h += &ai.adjoint() * ai * m.omega;
    }
    for &(i, j) in &pairs {
        let bj = &modes[j].b;
        let x = bj.adjoint().commutator(&rb[i])?;
        let y = rb[i].adjoint().commutator(bj)?;
        let hop_ij = &a[i].adjoint() * &a[j];
        let hop_ji = &a[j].adjoint() * &a[i];
        h -= (&hop_ij * &x + &hop_ji * &y) * 0.5;
    }
    for (m, r) in modes.iter().zip(&rb) {
        h -= (&m.b.adjoint() * r + &r.adjoint() * &m.b) * 0.5;
    }
    Ok(h)
}

/// Single-mode dispersive `H'`.
pub fn dispersive_boson_hprime(mode: &BosonMode, h_b: &OperatorMatrix, bin_tol: Option<f64>) -> Result<OperatorMatrix> {
    dispersive_multimode_hprime(std::slice::from_ref(mode), h_b, &[], bin_tol)
}

#[derive(Debug, Clone)]
pub struct QubitDispersive {
    pub h_prime: OperatorMatrix,
    /// Effective Hamiltonian of B with the qubit excited, constant dropped.
    pub up: OperatorMatrix,
    /// Effective Hamiltonian of B with the qubit in the ground state.
    pub down: OperatorMatrix,
    pub b_r: RenormalizedB,
}

/// Dispersive `H'` when system A is a single qubit `(omega/2) sigma_z`.
pub fn dispersive_qubit_hprime(
    qubit: &str,
    omega: f64,
    h_b: &OperatorMatrix,
    b: &OperatorMatrix,
    bin_tol: Option<f64>,
) -> Result<QubitDispersive> {
    let space = h_b.space();
    let f = space.factor(qubit)?;
    if f.kind != FactorKind::Qudit || f.dim != 2 {
        return Err(Error::WrongFactorKind {
            label: qubit.to_string(),
            op: "dispersive_qubit_hprime",
            expected: "two-level qudit",
            found: f.kind.name(),
        });
    }
    let rb = renormalize_b(b, h_b, omega, bin_tol)?;
    let r = &rb.b_r;
    let up = h_b + &((r * &b.adjoint() + b * &r.adjoint()) * 0.5);
    let down = h_b - &((&b.adjoint() * r + &r.adjoint() * b) * 0.5);
    let p_up = build_transition(space, qubit, 1, 1)?;
    let p_down = build_transition(space, qubit, 0, 0)?;
    let h_prime = h_b + &(&p_up * &(&up - h_b)) + &(&p_down * &(&down - h_b))
        + (&p_up - &p_down) * (0.5 * omega);
    Ok(QubitDispersive {
        h_prime,
        up,
        down,
        b_r: rb,
    })
}

#[cfg(test)]
mod tests;
