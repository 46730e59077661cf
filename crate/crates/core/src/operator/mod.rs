//! Hilbert-space construction and sparse operator algebra.

mod builders;
mod matrix;
mod rotate;
mod space;

pub use builders::{
    build_creation, build_hole, build_ladder, build_local, build_number, build_transition, pauli,
};
pub use matrix::OperatorMatrix;
pub use rotate::{matrix_exponential_rotate, unitary_from_generator};
pub use space::{FactorKind, FactorSpec, ProductSpace};
