use std::sync::Arc;

use super::matrix::OperatorMatrix;
use super::space::{FactorKind, ProductSpace};
use crate::error::{Error, Result};
use crate::linalg::{re, CMat, C64, ZERO};

/// Embeds a local operator, given as `(i, j, value)` entries of `|i><j|`,
/// into the full space. With `jw` set, each term picks up the parity of all
/// fermion factors preceding `pos`.
fn embed(
    space: &Arc<ProductSpace>,
    pos: usize,
    local: &[(usize, usize, C64)],
    jw: bool,
) -> OperatorMatrix {
    let stride = space.stride(pos);
    let mut t = Vec::new();
    for idx in 0..space.total_dim() {
        let lv = space.level(idx, pos);
        let sign = if jw {
            let odd = space.factors()[..pos]
                .iter()
                .enumerate()
                .filter(|(p, f)| f.kind == FactorKind::Fermion && space.level(idx, *p) == 1)
                .count()
                % 2;
            if odd == 1 {
                -1.0
            } else {
                1.0
            }
        } else {
            1.0
        };
        for &(i, j, v) in local {
            if j == lv {
                let row = idx + i * stride - j * stride;
                t.push((row, idx, v * sign));
            }
        }
    }
    OperatorMatrix::from_triplets(space, t).expect("embedded indices are in range")
}

fn wrong_kind(label: &str, op: &'static str, expected: &'static str, found: FactorKind) -> Error {
    Error::WrongFactorKind {
        label: label.to_string(),
        op,
        expected,
        found: found.name(),
    }
}

/// Annihilation operator of a boson or fermion factor.
pub fn build_ladder(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
    let pos = space.position(label)?;
    let f = &space.factors()[pos];
    match f.kind {
        FactorKind::Boson => {
            let local: Vec<_> = (1..f.dim)
                .map(|n| (n - 1, n, re((n as f64).sqrt())))
                .collect();
            Ok(embed(space, pos, &local, false))
        }
        FactorKind::Fermion => Ok(embed(space, pos, &[(0, 1, re(1.0))], true)),
        FactorKind::Qudit => Err(wrong_kind(label, "build_ladder", "boson or fermion", f.kind)),
    }
}

pub fn build_creation(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
    Ok(build_ladder(space, label)?.adjoint())
}

/// `|i><j|` on a qudit factor.
pub fn build_transition(
    space: &Arc<ProductSpace>,
    label: &str,
    i: usize,
    j: usize,
) -> Result<OperatorMatrix> {
    let pos = space.position(label)?;
    let f = &space.factors()[pos];
    if f.kind != FactorKind::Qudit {
        return Err(wrong_kind(label, "build_transition", "qudit", f.kind));
    }
    for level in [i, j] {
        if level >= f.dim {
            return Err(Error::LevelOutOfRange {
                label: label.to_string(),
                level,
                dim: f.dim,
            });
        }
    }
    Ok(embed(space, pos, &[(i, j, re(1.0))], false))
}

pub fn build_number(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
    let pos = space.position(label)?;
    let f = &space.factors()[pos];
    match f.kind {
        FactorKind::Boson | FactorKind::Fermion => {
            let local: Vec<_> = (1..f.dim).map(|n| (n, n, re(n as f64))).collect();
            Ok(embed(space, pos, &local, false).with_hint())
        }
        FactorKind::Qudit => Err(wrong_kind(label, "build_number", "boson or fermion", f.kind)),
    }
}

/// `1 - n` on a fermion factor.
pub fn build_hole(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
    let pos = space.position(label)?;
    let f = &space.factors()[pos];
    if f.kind != FactorKind::Fermion {
        return Err(wrong_kind(label, "build_hole", "fermion", f.kind));
    }
    Ok(embed(space, pos, &[(0, 0, re(1.0))], false).with_hint())
}

/// Arbitrary dense local matrix on a qudit or boson factor.
pub fn build_local(space: &Arc<ProductSpace>, label: &str, m: &CMat) -> Result<OperatorMatrix> {
    let pos = space.position(label)?;
    let f = &space.factors()[pos];
    if f.kind == FactorKind::Fermion {
        return Err(wrong_kind(label, "build_local", "qudit or boson", f.kind));
    }
    if m.nrows() != f.dim || m.ncols() != f.dim {
        return Err(Error::ShapeMismatch {
            rows: m.nrows(),
            cols: m.ncols(),
            dim: f.dim,
        });
    }
    let mut local = Vec::new();
    for i in 0..f.dim {
        for j in 0..f.dim {
            if m[(i, j)] != ZERO {
                local.push((i, j, m[(i, j)]));
            }
        }
    }
    Ok(embed(space, pos, &local, false))
}

/// Pauli operators on a two-level qudit, with level 1 the excited state.
pub mod pauli {
    use super::*;

    pub fn minus(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
        build_transition(space, label, 0, 1)
    }

    pub fn plus(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
        build_transition(space, label, 1, 0)
    }

    pub fn z(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
        Ok((build_transition(space, label, 1, 1)? - build_transition(space, label, 0, 0)?)
            .with_hint())
    }

    pub fn x(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
        Ok((minus(space, label)? + plus(space, label)?).with_hint())
    }

    pub fn y(space: &Arc<ProductSpace>, label: &str) -> Result<OperatorMatrix> {
        let i = C64::new(0.0, 1.0);
        Ok((minus(space, label)? * i - plus(space, label)? * i).with_hint())
    }
}

impl OperatorMatrix {
    /// Sets the Hermitian hint on operators Hermitian by construction.
    pub(crate) fn with_hint(self) -> Self {
        self.with_hermitian_hint("operator")
            .expect("operator Hermitian by construction")
    }
}
