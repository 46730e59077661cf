use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Qudit,
    Boson,
    Fermion,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::Qudit => "qudit",
            FactorKind::Boson => "boson",
            FactorKind::Fermion => "fermion",
        }
    }
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One local tensor factor.
///
/// For bosons `dim` is the truncation `n_max + 1`; fermions are always two
/// dimensional with level 0 empty and level 1 occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub dim: usize,
    pub label: String,
}

impl FactorSpec {
    pub fn qudit(label: impl Into<String>, dim: usize) -> Self {
        FactorSpec {
            kind: FactorKind::Qudit,
            dim,
            label: label.into(),
        }
    }

    /// Boson truncated at `n_max` quanta.
    pub fn boson(label: impl Into<String>, n_max: usize) -> Self {
        FactorSpec {
            kind: FactorKind::Boson,
            dim: n_max + 1,
            label: label.into(),
        }
    }

    pub fn fermion(label: impl Into<String>) -> Self {
        FactorSpec {
            kind: FactorKind::Fermion,
            dim: 2,
            label: label.into(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            FactorKind::Qudit => self.dim >= 2,
            FactorKind::Boson => self.dim >= 1,
            FactorKind::Fermion => self.dim == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDimension {
                label: self.label.clone(),
                kind: self.kind.name(),
                dim: self.dim,
            })
        }
    }
}

/// Ordered tensor product of local factors.
///
/// The first factor is the most significant digit of the basis index, and
/// the factor order doubles as the Jordan-Wigner order for fermions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    factors: Vec<FactorSpec>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl ProductSpace {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            f.validate()?;
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].dim;
        }
        let total_dim = factors.iter().map(|f| f.dim).product();
        Ok(ProductSpace {
            factors,
            strides,
            total_dim,
        })
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))
    }

    pub fn factor(&self, label: &str) -> Result<&FactorSpec> {
        Ok(&self.factors[self.position(label)?])
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    /// Local level of factor `pos` in basis state `index`.
    pub fn level(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.factors[pos].dim
    }

    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.factors.len()).map(|p| self.level(index, p)).collect()
    }

    pub fn index_of(&self, levels: &[usize]) -> usize {
        levels
            .iter()
            .zip(&self.strides)
            .map(|(l, s)| l * s)
            .sum()
    }

    /// Basis states whose boson occupations all stay at or below
    /// `n_max - margin`. Qudit and fermion levels are unrestricted.
    pub fn trusted_interior(&self, margin: usize) -> Vec<usize> {
        (0..self.total_dim)
            .filter(|&idx| {
                self.factors.iter().enumerate().all(|(p, f)| {
                    f.kind != FactorKind::Boson || self.level(idx, p) + margin <= f.n_max()
                })
            })
            .collect()
    }
}
