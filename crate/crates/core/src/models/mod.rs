//! Preset models with their recommended blocks and closed-form oracles.

mod params;
mod presets;
mod special;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use params::{ParamDefault, ParamKind, ParamSpec, ParamValue, Params, Truncations};
pub use special::{hubbard_operators, three_boson_eigenops, HubbardOperators, ThreeBosonOracle, HUBBARD_STATES};

use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, ProductSpace};
use crate::spectral::{diagonalize, explicit_from_states, make_blocks, BlockStrategy, BlockStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Qutrit,
    ThreeBoson,
    OneBosonN,
    TwoBoson,
    Anderson,
    DispersiveBosonGeneric,
    JaynesCummings,
    Rabi,
    DispersiveQubitGeneric,
    GiantAtomChain,
    TwoChains,
    CubicFb,
    DiracFixedP,
    HubbardTU,
}

impl Preset {
    pub const ALL: [Preset; 14] = [
        Preset::Qutrit,
        Preset::ThreeBoson,
        Preset::OneBosonN,
        Preset::TwoBoson,
        Preset::Anderson,
        Preset::DispersiveBosonGeneric,
        Preset::JaynesCummings,
        Preset::Rabi,
        Preset::DispersiveQubitGeneric,
        Preset::GiantAtomChain,
        Preset::TwoChains,
        Preset::CubicFb,
        Preset::DiracFixedP,
        Preset::HubbardTU,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Qutrit => "qutrit",
            Preset::ThreeBoson => "three_boson",
            Preset::OneBosonN => "one_boson_n",
            Preset::TwoBoson => "two_boson",
            Preset::Anderson => "anderson",
            Preset::DispersiveBosonGeneric => "dispersive_boson_generic",
            Preset::JaynesCummings => "jaynes_cummings",
            Preset::Rabi => "rabi",
            Preset::DispersiveQubitGeneric => "dispersive_qubit_generic",
            Preset::GiantAtomChain => "giant_atom_chain",
            Preset::TwoChains => "two_chains",
            Preset::CubicFb => "cubic_fb",
            Preset::DiracFixedP => "dirac_fixed_p",
            Preset::HubbardTU => "hubbard_tU",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    pub fn about(self) -> &'static str {
        presets::about(self)
    }

    pub fn schema(self) -> &'static [ParamSpec] {
        presets::schema(self)
    }

    /// Default boson truncation, if the preset has bosons.
    pub fn default_n_max(self) -> Option<usize> {
        presets::default_n_max(self)
    }
}

/// How to build the recommended block structure.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockRecipe {
    Strategy(BlockStrategy),
    /// Sets of product-basis states; needs a diagonal `H0`.
    States(Vec<Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub preset: Preset,
    pub space: Arc<ProductSpace>,
    pub h0: OperatorMatrix,
    pub v: OperatorMatrix,
    pub blocks: BlockRecipe,
    /// Closed-form effective Hamiltonian, trusted on [`BuiltModel::interior`].
    pub oracle: Option<OperatorMatrix>,
    /// Boson headroom the model needs below each truncation.
    pub margin: usize,
    pub warnings: Vec<String>,
}

impl BuiltModel {
    pub fn block_structure(&self) -> Result<BlockStructure> {
        let spec = Arc::new(diagonalize(&self.h0)?);
        let strategy = match &self.blocks {
            BlockRecipe::Strategy(s) => s.clone(),
            BlockRecipe::States(sets) => explicit_from_states(&spec, sets)?,
        };
        make_blocks(&self.h0, &spec, strategy)
    }

    /// Product-basis states unaffected by the boson truncation.
    pub fn interior(&self) -> Vec<usize> {
        self.space.trusted_interior(self.margin)
    }

    /// `H0 + V`.
    pub fn hamiltonian(&self) -> OperatorMatrix {
        &self.h0 + &self.v
    }
}

/// Builds a preset. Missing parameters take their defaults; unknown ones
/// are rejected.
pub fn build(preset: Preset, params: &Params, truncations: &Truncations) -> Result<BuiltModel> {
    let mut m = presets::build(preset, params, truncations)?;
    let blocks = m.block_structure()?;
    let ratio = coupling_ratio(&m.v, &blocks);
    if ratio >= 1.0 {
        m.warnings.push(format!(
            "an off-block element of V is {ratio:.3} times the energy gap it bridges"
        ));
    }
    Ok(m)
}

/// Largest `|V_ij| / |E_i - E_j|` over eigenstates in different blocks.
pub fn coupling_ratio(v: &OperatorMatrix, blocks: &BlockStructure) -> f64 {
    let spec = blocks.spectrum();
    let e = spec.energies();
    let ve = spec.op_to_eigen(v);
    let mut worst = 0.0f64;
    for i in 0..e.len() {
        for j in 0..e.len() {
            let x = ve[(i, j)].norm();
            if x > 0.0 && !blocks.same_block(i, j) {
                worst = worst.max(x / (e[i] - e[j]).abs());
            }
        }
    }
    worst
}

pub fn build_default(preset: Preset) -> Result<BuiltModel> {
    build(preset, &Params::new(), &Truncations::new())
}

#[cfg(test)]
mod tests;
