use super::{finish, generator_eigen, prepare, SwResult, Variant};
use crate::eigenop::decompose_eigen;
use crate::error::{Error, Result};
use crate::linalg::{commutator, re, CMat};
use crate::operator::OperatorMatrix;
use crate::spectral::BlockStructure;

/// Expansion of `e^{S1} H e^{-S1}` through order `n` with the first-order
/// generator only. The result need not be block diagonal beyond second order.
pub fn sw_single_generator_series(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    n: usize,
    bin_tol: Option<f64>,
) -> Result<SwResult> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidOrder {
            order: n,
            variant: Variant::SingleGenerator.name(),
        });
    }
    let p = prepare(h0, v, blocks, bin_tol)?;
    let s = generator_eigen(&p.vo_components, blocks)?;
    let mut hp = &p.energies + &p.vd;
    let mut ad_d = p.vd.clone();
    let mut ad_o = p.vo.clone();
    let mut fact = 1.0;
    for k in 2..=n {
        ad_d = commutator(&s, &ad_d);
        ad_o = commutator(&s, &ad_o);
        let prev_fact = fact;
        fact *= k as f64;
        hp += &ad_d * re(1.0 / prev_fact) + &ad_o * re((k - 1) as f64 / fact);
    }
    finish(h0, v, blocks, &p, &s, s.clone(), hp, n, Variant::SingleGenerator)
}

/// Block-diagonal effective Hamiltonian through third order, using the
/// second-order generator `S2` that removes the off-block part of
/// `[S1, V_d] + [S1, V_o] / 2`.
pub fn sw_third_order_blockdiag(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    blocks: &BlockStructure,
    bin_tol: Option<f64>,
) -> Result<SwResult> {
    let p = prepare(h0, v, blocks, bin_tol)?;
    let s1 = generator_eigen(&p.vo_components, blocks)?;
    let s1_vd = commutator(&s1, &p.vd);
    let s1_vo = commutator(&s1, &p.vo);
    let rhs: CMat = &s1_vd + (&s1_vo - blocks.project_eigen(&s1_vo)) * re(0.5);

    let bin = bin_tol.unwrap_or_else(|| crate::eigenop::default_bin_tol(&p.spectrum));
    let r_comps = decompose_eigen(&rhs, p.spectrum.energies(), bin, true)?;
    let s2 = generator_eigen(&r_comps, blocks)?;

    let third = commutator(&s2, &p.vd) + commutator(&s2, &p.vo) * re(0.5)
        - commutator(&s1, &rhs) * re(0.5)
        + commutator(&s1, &s1_vd) * re(0.5)
        + commutator(&s1, &s1_vo) * re(1.0 / 3.0);
    let hp = &p.energies
        + &p.vd
        + blocks.project_eigen(&s1_vo) * re(0.5)
        + blocks.project_eigen(&third);
    let s_total = &s1 + &s2;
    finish(h0, v, blocks, &p, &s1, s_total, hp, 3, Variant::BlockDiagonal)
}
