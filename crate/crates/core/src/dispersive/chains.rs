use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::operator::{build_creation, build_ladder, build_number, FactorKind, OperatorMatrix, ProductSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSpecies {
    Fermion,
    Boson,
}

#[derive(Debug, Clone)]
pub struct TwoChain {
    pub n_a: usize,
    pub n_b: usize,
    /// `f[i][j][k][q]`, flattened row-major.
    pub f: Vec<C64>,
    /// `H_A + H_B - sum f [b_k^dagger a_i, a_j^dagger b_q]`.
    pub general: OperatorMatrix,
    /// Normal-ordered form for the species pair.
    pub closed: OperatorMatrix,
    pub species: (ChainSpecies, ChainSpecies),
}

impl TwoChain {
    pub fn f_at(&self, i: usize, j: usize, k: usize, q: usize) -> C64 {
        self.f[((i * self.n_a + j) * self.n_b + k) * self.n_b + q]
    }
}

fn species_of(space: &ProductSpace, labels: &[String]) -> Result<ChainSpecies> {
    let mut kind = None;
    for l in labels {
        let k = space.factor(l)?.kind;
        let s = match k {
            FactorKind::Fermion => ChainSpecies::Fermion,
            FactorKind::Boson => ChainSpecies::Boson,
            FactorKind::Qudit => {
                return Err(Error::WrongFactorKind {
                    label: l.clone(),
                    op: "two_chain_hprime",
                    expected: "boson or fermion",
                    found: k.name(),
                })
            }
        };
        match kind {
            None => kind = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::InvalidArgument(format!("chain mixes species at `{l}`")))
            }
            _ => {}
        }
    }
    kind.ok_or_else(|| Error::InvalidArgument("empty chain".into()))
}

/// Two quadratic chains `H_A = sum E_i a_i^dagger a_i`,
/// `H_B = sum eps_k b_k^dagger b_k` coupled by
/// `V = sum v_ik b_k^dagger a_i + h.c.`, with every coupling off-block.
/// `v` has one row per `a` mode.
pub fn two_chain_hprime(
    space: &Arc<ProductSpace>,
    a_labels: &[String],
    b_labels: &[String],
    e: &[f64],
    eps: &[f64],
    v: &CMat,
) -> Result<TwoChain> {
    let (na, nb) = (a_labels.len(), b_labels.len());
    if e.len() != na || eps.len() != nb || v.nrows() != na || v.ncols() != nb {
        return Err(Error::InvalidArgument(format!(
            "two chains: {na} a modes, {nb} b modes, {} energies, {} energies, couplings {}x{}",
            e.len(),
            eps.len(),
            v.nrows(),
            v.ncols()
        )));
    }
    let sa = species_of(space, a_labels)?;
    let sb = species_of(space, b_labels)?;
    let scale = e.iter().chain(eps).fold(0.0f64, |m, x| m.max(x.abs()));
    let mut inv = CMat::zeros(na, nb);
    for i in 0..na {
        for k in 0..nb {
            if v[(i, k)].norm() == 0.0 {
                continue;
            }
            let d = e[i] - eps[k];
            if d.abs() <= 1e-8 * scale {
                return Err(Error::Resonance {
                    omega_b: eps[k],
                    denominator: d,
                });
            }
            inv[(i, k)] = C64::new(1.0 / d, 0.0);
        }
    }
    let mut f = vec![C64::new(0.0, 0.0); na * na * nb * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for q in 0..nb {
                    f[((i * na + j) * nb + k) * nb + q] =
                        v[(i, k)] * v[(j, q)].conj() * 0.5 * (inv[(i, k)] + inv[(j, q)]);
                }
            }
        }
    }

    let a: Vec<OperatorMatrix> = a_labels.iter().map(|l| build_ladder(space, l)).collect::<Result<_>>()?;
    let b: Vec<OperatorMatrix> = b_labels.iter().map(|l| build_ladder(space, l)).collect::<Result<_>>()?;
    let ad: Vec<OperatorMatrix> = a_labels.iter().map(|l| build_creation(space, l)).collect::<Result<_>>()?;
    let bd: Vec<OperatorMatrix> = b_labels.iter().map(|l| build_creation(space, l)).collect::<Result<_>>()?;

    let mut h0 = OperatorMatrix::zeros(space);
    for (l, x) in a_labels.iter().zip(e) {
        h0 += build_number(space, l)? * *x;
    }
    for (l, x) in b_labels.iter().zip(eps) {
        h0 += build_number(space, l)? * *x;
    }

    let at = |i: usize, j: usize, k: usize, q: usize| f[((i * na + j) * nb + k) * nb + q];

    let mut general = h0.clone();
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for q in 0..nb {
                    let c = at(i, j, k, q);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    let x = &bd[k] * &a[i];
                    let y = &ad[j] * &b[q];
                    general -= x.commutator(&y)? * c;
                }
            }
        }
    }

    let mut closed = h0;
    for i in 0..na {
        for j in 0..na {
            let c: C64 = (0..nb).map(|k| at(i, j, k, k)).sum();
            if c.norm() != 0.0 {
                closed += &ad[j] * &a[i] * c;
            }
        }
    }
    for k in 0..nb {
        for q in 0..nb {
            let c: C64 = (0..na).map(|i| at(i, i, k, q)).sum();
            if c.norm() != 0.0 {
                closed -= &bd[k] * &b[q] * c;
            }
        }
    }
    let mixed = match (sa, sb) {
        (ChainSpecies::Fermion, ChainSpecies::Boson) => 2.0,
        (ChainSpecies::Boson, ChainSpecies::Fermion) => -2.0,
        _ => 0.0,
    };
    if mixed != 0.0 {
        for i in 0..na {
            for j in 0..na {
                let hop = &ad[j] * &a[i];
                for k in 0..nb {
                    for q in 0..nb {
                        let c = at(i, j, k, q);
                        if c.norm() != 0.0 {
                            closed += &hop * &(&bd[k] * &b[q]) * (c * mixed);
                        }
                    }
                }
            }
        }
    }
    Ok(TwoChain {
        n_a: na,
        n_b: nb,
        f,
        general,
        closed,
        species: (sa, sb),
    })
}
