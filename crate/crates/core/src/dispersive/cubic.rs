use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermiticity_residual, CMat, C64};
use crate::operator::{build_creation, build_ladder, OperatorMatrix, ProductSpace};

/// Fermions `b^dagger h b` coupled to bosonic modes through
/// `V = sum_i sum_nm b_n^dagger b_m (M_i[n,m] a_i^dagger + conj(M_i[m,n]) a_i)`.
#[derive(Debug, Clone)]
pub struct CubicSetup {
    pub omegas: Vec<f64>,
    pub h: CMat,
    pub m: Vec<CMat>,
}

/// Dense rank-4 tensor over `n` fermion modes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    pub data: Vec<C64>,
}

impl Tensor4 {
    fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![C64::new(0.0, 0.0); n * n * n * n],
        }
    }

    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.data[self.idx(a, b, c, d)]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: C64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }
}

#[derive(Debug, Clone)]
pub struct CubicTensors {
    pub eps: Vec<f64>,
    /// Columns are the single-particle eigenvectors of `h`.
    pub r: CMat,
    /// Couplings in the eigenmode basis, `R^dagger M_i R`.
    pub m_diag: Vec<CMat>,
    /// Coefficient of `c_k'^dagger c_k c_p^dagger c_p'` at `[k][k'][p][p']`.
    pub a: Tensor4,
    pub g: CMat,
    /// Coefficient of `c_k'^dagger c_p^dagger c_k c_p'` at `[k][k'][p][p']`.
    pub f: Tensor4,
}

pub fn cubic_tensors(setup: &CubicSetup) -> Result<CubicTensors> {
    let n = setup.h.nrows();
    if setup.h.ncols() != n || setup.m.len() != setup.omegas.len() {
        return Err(Error::InvalidArgument(format!(
            "cubic setup: h is {}x{}, {} couplings for {} modes",
            setup.h.nrows(),
            setup.h.ncols(),
            setup.m.len(),
            setup.omegas.len()
        )));
    }
    if setup.m.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::InvalidArgument("coupling matrices must match h".into()));
    }
    let res = hermiticity_residual(&setup.h);
    if res > 1e-12 {
        return Err(Error::NotHermitian {
            what: "h",
            residual: res,
        });
    }
    let (eps, r) = eigh(&setup.h);
    let m_diag: Vec<CMat> = setup.m.iter().map(|m| r.adjoint() * m * &r).collect();

    let spread = eps.last().copied().unwrap_or(0.0) - eps.first().copied().unwrap_or(0.0);
    let scale = setup.omegas.iter().fold(spread, |acc, w| acc.max(w.abs()));
    // inv[i][k][k'] = 1 / (omega_i + eps_k - eps_k')
    let mut inv = vec![CMat::zeros(n, n); setup.omegas.len()];
    for (i, &w) in setup.omegas.iter().enumerate() {
        for k in 0..n {
            for k2 in 0..n {
                let d = w + eps[k] - eps[k2];
                if d.abs() <= 1e-8 * scale {
                    return Err(Error::Resonance {
                        omega_b: eps[k2] - eps[k],
                        denominator: d,
                    });
                }
                inv[i][(k, k2)] = C64::new(1.0 / d, 0.0);
            }
        }
    }

    let mut a = Tensor4::zeros(n);
    let mut f = Tensor4::zeros(n);
    for k in 0..n {
        for k2 in 0..n {
            for p in 0..n {
                for p2 in 0..n {
                    let mut sa = C64::new(0.0, 0.0);
                    let mut sf = C64::new(0.0, 0.0);
                    for (i, m) in m_diag.iter().enumerate() {
                        let w = m[(k, k2)].conj() * m[(p, p2)];
                        sa += w * (inv[i][(k, k2)] + inv[i][(p, p2)]);
                        sf += w * inv[i][(k, k2)] + m[(k2, k)] * m[(p2, p)].conj() * inv[i][(k2, k)];
                    }
                    a.set(k, k2, p, p2, sa * -0.5);
                    f.set(k, k2, p, p2, sf * 0.5);
                }
            }
        }
    }
    let mut g = CMat::zeros(n, n);
    for k in 0..n {
        for p in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (i, m) in m_diag.iter().enumerate() {
                for q in 0..n {
                    s += m[(q, k)].conj() * m[(q, p)] * (inv[i][(q, k)] + inv[i][(q, p)]);
                }
            }
            g[(k, p)] = s * -0.5;
        }
    }
    Ok(CubicTensors {
        eps,
        r,
        m_diag,
        a,
        g,
        f,
    })
}

/// Effective fermion Hamiltonians with every boson in the vacuum.
#[derive(Debug, Clone)]
pub struct CubicForms {
    /// Built from the `A` tensor.
    pub exact_a: OperatorMatrix,
    /// Built from `G` and `F`; equal to `exact_a`.
    pub exact_gf: OperatorMatrix,
    /// Expansion through `1/omega^2`, in the original modes.
    pub expanded: OperatorMatrix,
    /// Leading `1/omega` term only.
    pub leading: OperatorMatrix,
}

struct Modes {
    b: Vec<OperatorMatrix>,
    bd: Vec<OperatorMatrix>,
}

impl Modes {
    /// `sum_nm x[n,m] b_n^dagger b_m`.
    fn bilinear(&self, x: &CMat, space: &Arc<ProductSpace>) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(space);
        for n in 0..self.b.len() {
            for m in 0..self.b.len() {
                if x[(n, m)].norm() != 0.0 {
                    out += &self.bd[n] * &self.b[m] * x[(n, m)];
                }
            }
        }
        out
    }
}

pub fn cubic_forms(
    setup: &CubicSetup,
    t: &CubicTensors,
    space: &Arc<ProductSpace>,
    fermion_labels: &[String],
) -> Result<CubicForms> {
    let n = t.eps.len();
    if fermion_labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} fermion labels for {n} modes",
            fermion_labels.len()
        )));
    }
    let modes = Modes {
        b: fermion_labels.iter().map(|l| build_ladder(space, l)).collect::<Result<_>>()?,
        bd: fermion_labels.iter().map(|l| build_creation(space, l)).collect::<Result<_>>()?,
    };
    // c_k = sum_n conj(R[n,k]) b_n
    let c: Vec<OperatorMatrix> = (0..n)
        .map(|k| {
            let mut op = OperatorMatrix::zeros(space);
            for (m, b) in modes.b.iter().enumerate() {
                op += b * t.r[(m, k)].conj();
            }
            op
        })
        .collect();
    let cd: Vec<OperatorMatrix> = c.iter().map(|x| x.adjoint()).collect();
    let hop: Vec<Vec<OperatorMatrix>> = (0..n)
        .map(|x| (0..n).map(|y| &cd[x] * &c[y]).collect())
        .collect();

    let mut band = OperatorMatrix::zeros(space);
    for k in 0..n {
        band += &hop[k][k] * t.eps[k];
    }

    let mut exact_a = band.clone();
    let mut exact_gf = band;
    for k in 0..n {
        for k2 in 0..n {
            for p in 0..n {
                for p2 in 0..n {
                    let av = t.a.get(k, k2, p, p2);
                    if av.norm() != 0.0 {
                        exact_a += &hop[k2][k] * &hop[p][p2] * av;
                    }
                    let fv = t.f.get(k, k2, p, p2);
                    if fv.norm() != 0.0 {
                        exact_gf += &(&cd[k2] * &cd[p]) * &(&c[k] * &c[p2]) * fv;
                    }
                }
            }
        }
    }
    for k in 0..n {
        for p in 0..n {
            if t.g[(k, p)].norm() != 0.0 {
                exact_gf += &hop[k][p] * t.g[(k, p)];
            }
        }
    }

    let hb = modes.bilinear(&setup.h, space);
    let mut leading = hb.clone();
    let mut expanded = hb;
    for (w, m) in setup.omegas.iter().zip(&setup.m) {
        let bm = modes.bilinear(m, space);
        let bmd = modes.bilinear(&m.adjoint(), space);
        let first = &bmd * &bm * (1.0 / w);
        leading -= &first;
        expanded -= &first;
        let hm = &setup.h * m - m * &setup.h;
        let hmd = &setup.h * m.adjoint() - m.adjoint() * &setup.h;
        let second = &bmd * &modes.bilinear(&hm, space) - &modes.bilinear(&hmd, space) * &bm;
        expanded += second * (0.5 / (w * w));
    }
    Ok(CubicForms {
        exact_a,
        exact_gf,
        expanded,
        leading,
    })
}
