use std::sync::Arc;

use super::params::{Args, Params, Truncations};
use super::presets::{quadrature_power, schema};
use super::Preset;
use crate::error::Result;
use crate::linalg::re;
use crate::operator::{build_creation, build_ladder, build_local, build_number, FactorSpec, OperatorMatrix, ProductSpace};

/// Site basis order used by [`HubbardOperators`].
pub const HUBBARD_STATES: [&str; 4] = ["0", "1", "2", "d"];

/// Hubbard operators `X_ij = |i><j|` of a two-fermion site
/// `H = eps1 n1 + eps2 n2 + U n1 n2`, with `|d> = c1^dagger c2^dagger |0>`.
#[derive(Debug, Clone)]
pub struct HubbardOperators {
    pub space: Arc<ProductSpace>,
    pub h: OperatorMatrix,
    pub energies: [f64; 4],
    /// `x[i][j] = X_ij` in [`HUBBARD_STATES`] order.
    pub x: [[OperatorMatrix; 4]; 4],
    /// `frequencies[i][j] = E_j - E_i`, so that `[H, X_ij] = -omega X_ij`.
    pub frequencies: [[f64; 4]; 4],
    /// Largest `|[H, X_ij] + omega_ij X_ij|`.
    pub commutator_residual: f64,
    /// Largest deviation in `c1^dagger = X_10 + X_d2`, `c2^dagger = X_20 - X_d1`,
    /// `X_d1 = -n1 c2^dagger` and `sum_i X_ii = 1`.
    pub identity_residual: f64,
}

pub fn hubbard_operators(eps1: f64, eps2: f64, u: f64) -> Result<HubbardOperators> {
    let space = Arc::new(ProductSpace::new(vec![FactorSpec::fermion("c1"), FactorSpec::fermion("c2")])?);
    let (n1, n2) = (build_number(&space, "c1")?, build_number(&space, "c2")?);
    let h = &n1 * eps1 + &n2 * eps2 + &n1 * &n2 * u;
    let energies = [0.0, eps1, eps2, eps1 + eps2 + u];

    let (c1d, c2d) = (build_creation(&space, "c1")?, build_creation(&space, "c2")?);
    let vac = space.index_of(&[0, 0]);
    // Product-basis columns of |0>, |1>, |2>, |d>.
    let kets = [
        OperatorMatrix::from_triplets(&space, [(vac, vac, re(1.0))])?,
        &c1d * &OperatorMatrix::from_triplets(&space, [(vac, vac, re(1.0))])?,
        &c2d * &OperatorMatrix::from_triplets(&space, [(vac, vac, re(1.0))])?,
        &c1d * &c2d * &OperatorMatrix::from_triplets(&space, [(vac, vac, re(1.0))])?,
    ];
    let x: [[OperatorMatrix; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| &kets[i] * &kets[j].adjoint()));
    let frequencies: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| energies[j] - energies[i]));

    let mut commutator_residual = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let d = h.commutator(&x[i][j])? + &x[i][j] * frequencies[i][j];
            commutator_residual = commutator_residual.max(d.norm_max());
        }
    }
    let mut completeness = OperatorMatrix::zeros(&space);
    for (i, row) in x.iter().enumerate() {
        completeness += &row[i];
    }
    let identity_residual = [
        c1d.max_diff(&(&x[1][0] + &x[3][2]))?,
        c2d.max_diff(&(&x[2][0] - &x[3][1]))?,
        x[3][1].max_diff(&-(&n1 * &c2d))?,
        completeness.max_diff(&OperatorMatrix::identity(&space))?,
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(HubbardOperators {
        space,
        h,
        energies,
        x,
        frequencies,
        commutator_residual,
        identity_residual,
    })
}

/// Closed-form eigenoperators of the three-boson preset.
#[derive(Debug, Clone)]
pub struct ThreeBosonOracle {
    pub space: Arc<ProductSpace>,
    pub h0: OperatorMatrix,
    pub v: OperatorMatrix,
    /// `(omega, V_omega)` for every listed component and its adjoint,
    /// ascending in `omega`.
    pub components: Vec<(f64, OperatorMatrix)>,
}

impl ThreeBosonOracle {
    /// Sums components whose frequencies chain together within `tol`.
    pub fn merged(&self, tol: f64) -> Vec<(f64, OperatorMatrix)> {
        let mut out: Vec<(f64, OperatorMatrix)> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (w, op) in &self.components {
            match out.last_mut() {
                Some(prev) if w - last <= tol => prev.1 += op,
                _ => out.push((*w, op.clone())),
            }
            last = *w;
        }
        out.retain(|(_, op)| !op.is_zero());
        out
    }
}

pub fn three_boson_eigenops(params: &Params, truncations: &Truncations) -> Result<ThreeBosonOracle> {
    let model = super::build(Preset::ThreeBoson, params, truncations)?;
    let args = Args::new(
        Preset::ThreeBoson.name(),
        schema(Preset::ThreeBoson),
        params,
        truncations,
        Preset::ThreeBoson.default_n_max().unwrap_or(0),
    )?;
    let (wa, wb, wc) = (args.num("omega_a")?, args.num("omega_b")?, args.num("omega_c")?);
    let (g, om) = (args.num("g")?, args.num("Omega")?);
    let sp = model.space.clone();
    let (a, b, c) = (build_ladder(&sp, "a")?, build_ladder(&sp, "b")?, build_ladder(&sp, "c")?);
    let (ad, cd) = (a.adjoint(), c.adjoint());
    let n_c = sp.factor("c")?.n_max();
    let n_a = sp.factor("a")?.n_max();
    // 2 n + 1 with exact matrix elements, the diagonal of the squared quadrature.
    let sym_a = build_local(&sp, "a", &quadrature_power(n_a, 2))? - &a * &a - &ad * &ad;
    let sym_c = build_local(&sp, "c", &quadrature_power(n_c, 2))? - &c * &c - &cd * &cd;
    let h = -0.5 * g;
    let k = 0.5 * g * om * om;
    let listed = [
        (wb - 2.0 * wa, &ad * &ad * &b * h),
        (wb - 2.0 * wc, &cd * &cd * &b * k),
        (wb + 2.0 * wa, &a * &a * &b * h),
        (wb + 2.0 * wc, &c * &c * &b * k),
        (wb, (sym_a - sym_c * (om * om)) * &b * h),
    ];
    let mut components = Vec::new();
    for (w, op) in listed {
        if op.is_zero() {
            continue;
        }
        components.push((-w, op.adjoint()));
        components.push((w, op));
    }
    components.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(ThreeBosonOracle {
        space: sp,
        h0: model.h0,
        v: model.v,
        components,
    })
}
