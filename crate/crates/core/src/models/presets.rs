use std::sync::Arc;

use super::params::{list, num, text, Args, ParamSpec, Params, Truncations};
use super::{BlockRecipe, BuiltModel, Preset};
use crate::error::{Error, Result};
use crate::linalg::{re, CMat, C64};
use crate::operator::{
    build_creation, build_hole, build_ladder, build_local, build_number, build_transition, pauli, FactorSpec,
    OperatorMatrix, ProductSpace,
};
use crate::spectral::BlockStrategy;

const QUTRIT: &[ParamSpec] = &[
    num("E0", 0.0, "level 0 energy"),
    num("E1", 1.0, "level 1 energy"),
    num("E2", 3.0, "level 2 energy"),
    num("v01", 0.3, "real part of the 0-1 coupling"),
    num("v01_im", 0.0, "imaginary part of the 0-1 coupling"),
    num("v12", 0.05, "real part of the 1-2 coupling"),
    num("v12_im", 0.0, "imaginary part of the 1-2 coupling"),
];

const THREE_BOSON: &[ParamSpec] = &[
    num("omega_a", 1.0, "frequency of mode a"),
    num("omega_b", 3.37, "frequency of mode b"),
    num("omega_c", 0.71, "frequency of mode c"),
    num("g", 0.05, "coupling strength"),
    num("Omega", 0.8, "relative weight of the c quadrature"),
];

const ONE_BOSON_N: &[ParamSpec] = &[
    num("power", 1.0, "exponent n in g (a + a^dagger)^n"),
    num("omega_r", 1.0, "mode frequency"),
    num("g", 0.01, "coupling strength"),
];

const TWO_BOSON: &[ParamSpec] = &[
    text("regime", "dispersive", "`dispersive` (blocks by n_a) or `quasi_degenerate` (blocks by n_a + n_b)"),
    num("omega_a", 5.0, "frequency of mode a"),
    num("omega_b", 1.0, "frequency of mode b"),
    num("g", 0.05, "coupling strength"),
];

const ANDERSON: &[ParamSpec] = &[
    list("eps_k", &[-1.2, 0.9], "conduction energies, one per k point"),
    num("eps_d", -0.5, "impurity level"),
    num("U", 2.0, "impurity repulsion"),
    list("v_kd", &[0.05, 0.07], "real parts of the hybridizations"),
    list("v_kd_im", &[], "imaginary parts of the hybridizations; empty means zero"),
];

const DISPERSIVE_BOSON_GENERIC: &[ParamSpec] = &[
    num("omega_r", 12.0, "mode frequency"),
    list("energies", &[0.0, 1.0, 2.3], "qudit level energies"),
    list("couplings", &[0.05, 0.04], "ladder couplings g_j between levels j and j+1"),
];

const JAYNES_CUMMINGS: &[ParamSpec] = &[
    num("omega_r", 10.0, "resonator frequency"),
    num("omega_q", 1.0, "qubit frequency"),
    num("g", 0.02, "coupling strength"),
];

const DISPERSIVE_QUBIT_GENERIC: &[ParamSpec] = &[
    num("omega", 8.0, "qubit frequency"),
    list("energies", &[0.0, 0.9, 2.1], "level energies of the dispersed qudit"),
    list("couplings", &[0.05, 0.03], "ladder couplings between levels j and j+1"),
];

const GIANT_ATOM_CHAIN: &[ParamSpec] = &[
    text("species", "fermion", "`fermion` or `boson` chain modes"),
    num("omega_r", 10.0, "qubit frequency"),
    list("eps", &[0.0, 0.5, 1.1], "chain mode energies"),
    list("g", &[0.1, -0.08, 0.12], "qubit couplings to each mode"),
];

const TWO_CHAINS: &[ParamSpec] = &[
    text("species_a", "fermion", "`fermion` or `boson` for the upper band"),
    text("species_b", "fermion", "`fermion` or `boson` for the lower band"),
    list("eps", &[0.0, 0.3], "lower band energies"),
    num("delta", 2.0, "band offset, E_i = eps_i + delta"),
    num("v", 0.05, "diagonal coupling used when `couplings` is empty"),
    list("couplings", &[], "row-major real coupling matrix v_ik; empty means v on the diagonal"),
];

const CUBIC_FB: &[ParamSpec] = &[
    list("omegas", &[8.0], "boson frequencies"),
    list("h", &[0.0, 0.3, 0.3, 1.0], "row-major real symmetric hopping matrix"),
    list("m", &[0.2, 0.1, 0.05, -0.15], "row-major real coupling matrices, one per boson"),
];

const DIRAC_FIXED_P: &[ParamSpec] = &[
    num("m", 1.0, "mass"),
    num("phi", 0.3, "scalar potential"),
    num("e", 1.0, "charge"),
    list("p", &[0.1, 0.0, 0.0], "momentum"),
];

const HUBBARD_TU: &[ParamSpec] = &[
    num("sites", 2.0, "sites on an open chain"),
    num("t", 0.05, "hopping"),
    num("U", 1.0, "on-site repulsion"),
];

pub(super) fn schema(p: Preset) -> &'static [ParamSpec] {
    match p {
        Preset::Qutrit => QUTRIT,
        Preset::ThreeBoson => THREE_BOSON,
        Preset::OneBosonN => ONE_BOSON_N,
        Preset::TwoBoson => TWO_BOSON,
        Preset::Anderson => ANDERSON,
        Preset::DispersiveBosonGeneric => DISPERSIVE_BOSON_GENERIC,
        Preset::JaynesCummings | Preset::Rabi => JAYNES_CUMMINGS,
        Preset::DispersiveQubitGeneric => DISPERSIVE_QUBIT_GENERIC,
        Preset::GiantAtomChain => GIANT_ATOM_CHAIN,
        Preset::TwoChains => TWO_CHAINS,
        Preset::CubicFb => CUBIC_FB,
        Preset::DiracFixedP => DIRAC_FIXED_P,
        Preset::HubbardTU => HUBBARD_TU,
    }
}

pub(super) fn about(p: Preset) -> &'static str {
    match p {
        Preset::Qutrit => "three levels, levels 0 and 1 bundled, level 2 coupled off-block",
        Preset::ThreeBoson => "three bosons with a cubic quadrature coupling",
        Preset::OneBosonN => "one boson perturbed by g (a + a^dagger)^n",
        Preset::TwoBoson => "two bosons coupled through g (a + a^dagger)(b + b^dagger)",
        Preset::Anderson => "Anderson impurity with a discrete conduction band",
        Preset::DispersiveBosonGeneric => "boson dispersively coupled to a ladder qudit",
        Preset::JaynesCummings => "Jaynes-Cummings model in the dispersive regime",
        Preset::Rabi => "quantum Rabi model in the dispersive regime",
        Preset::DispersiveQubitGeneric => "qubit dispersively coupled to a ladder qudit",
        Preset::GiantAtomChain => "qubit dispersively coupled to a chain of modes",
        Preset::TwoChains => "two tight-binding bands coupled by hopping",
        Preset::CubicFb => "fermion band coupled linearly to bosons through bilinears",
        Preset::DiracFixedP => "4x4 Dirac Hamiltonian at fixed momentum",
        Preset::HubbardTU => "Hubbard chain with hopping treated perturbatively",
    }
}

pub(super) fn default_n_max(p: Preset) -> Option<usize> {
    match p {
        Preset::ThreeBoson | Preset::TwoBoson => Some(6),
        Preset::OneBosonN => Some(12),
        Preset::DispersiveBosonGeneric => Some(8),
        Preset::JaynesCummings | Preset::Rabi => Some(10),
        Preset::GiantAtomChain | Preset::TwoChains => Some(3),
        Preset::CubicFb => Some(2),
        _ => None,
    }
}

pub(super) fn build(p: Preset, params: &Params, truncations: &Truncations) -> Result<BuiltModel> {
    let args = Args::new(p.name(), schema(p), params, truncations, default_n_max(p).unwrap_or(0))?;
    match p {
        Preset::Qutrit => qutrit(&args),
        Preset::ThreeBoson => three_boson(&args),
        Preset::OneBosonN => one_boson_n(&args),
        Preset::TwoBoson => two_boson(&args),
        Preset::Anderson => anderson(&args),
        Preset::DispersiveBosonGeneric => dispersive_boson_generic(&args),
        Preset::JaynesCummings => jaynes_cummings(&args, false),
        Preset::Rabi => jaynes_cummings(&args, true),
        Preset::DispersiveQubitGeneric => dispersive_qubit_generic(&args),
        Preset::GiantAtomChain => giant_atom_chain(&args),
        Preset::TwoChains => two_chains(&args),
        Preset::CubicFb => cubic_fb(&args),
        Preset::DiracFixedP => dirac_fixed_p(&args),
        Preset::HubbardTU => hubbard_tu(&args),
    }
}

fn space(factors: Vec<FactorSpec>) -> Result<Arc<ProductSpace>> {
    Ok(Arc::new(ProductSpace::new(factors)?))
}

fn model(
    preset: Preset,
    space: &Arc<ProductSpace>,
    h0: OperatorMatrix,
    v: OperatorMatrix,
    blocks: BlockRecipe,
    oracle: Option<OperatorMatrix>,
    margin: usize,
) -> BuiltModel {
    BuiltModel {
        preset,
        space: space.clone(),
        h0,
        v,
        blocks,
        oracle,
        margin,
        warnings: Vec::new(),
    }
}

fn subsystem(labels: &[&str]) -> BlockRecipe {
    BlockRecipe::Strategy(BlockStrategy::Subsystem {
        factors: labels.iter().map(|s| s.to_string()).collect(),
    })
}

fn degeneracy() -> BlockRecipe {
    BlockRecipe::Strategy(BlockStrategy::Degeneracy { tol: 1e-9 })
}

/// Groups product states by a key, in order of first appearance.
fn states_by<K: PartialEq>(space: &ProductSpace, key: impl Fn(usize) -> K) -> BlockRecipe {
    let mut keys: Vec<K> = Vec::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for i in 0..space.total_dim() {
        let k = key(i);
        match keys.iter().position(|x| *x == k) {
            Some(b) => sets[b].push(i),
            None => {
                keys.push(k);
                sets.push(vec![i]);
            }
        }
    }
    BlockRecipe::States(sets)
}

/// `sum_j e_j |j><j|` on a qudit.
fn qudit_levels(space: &Arc<ProductSpace>, label: &str, e: &[f64]) -> Result<OperatorMatrix> {
    let mut h = OperatorMatrix::zeros(space);
    for (j, &x) in e.iter().enumerate() {
        h += build_transition(space, label, j, j)? * x;
    }
    Ok(h)
}

/// `(a + a^dagger)^p` with exact matrix elements on levels `0..=n_max`.
pub(super) fn quadrature_power(n_max: usize, p: usize) -> CMat {
    let big = n_max + p + 1;
    let mut x = CMat::zeros(big, big);
    for n in 1..big {
        let s = re((n as f64).sqrt());
        x[(n - 1, n)] = s;
        x[(n, n - 1)] = s;
    }
    let mut out = CMat::identity(big, big);
    for _ in 0..p {
        out = &out * &x;
    }
    out.view((0, 0), (n_max + 1, n_max + 1)).into_owned()
}

/// `n (n - 1) ... (n - k + 1)`, the Fock value of `a^dagger^k a^k`.
fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| n as f64 - i as f64).product::<f64>().max(0.0)
}

fn diagonal_of(space: &Arc<ProductSpace>, f: impl Fn(usize) -> f64) -> Result<OperatorMatrix> {
    OperatorMatrix::from_triplets(space, (0..space.total_dim()).map(|i| (i, i, re(f(i)))))
}

fn same_len(args: &Args, name: &str, xs: &[f64], want: usize) -> Result<()> {
    if xs.len() != want {
        return Err(args.bad(name, format!("expected {want} entries, got {}", xs.len())));
    }
    Ok(())
}

fn qutrit(args: &Args) -> Result<BuiltModel> {
    let e = [args.num("E0")?, args.num("E1")?, args.num("E2")?];
    let v01 = C64::new(args.num("v01")?, args.num("v01_im")?);
    let v12 = C64::new(args.num("v12")?, args.num("v12_im")?);
    args.check_truncation_labels(&[])?;
    let sp = space(vec![FactorSpec::qudit("q", 3)])?;
    let h0 = qudit_levels(&sp, "q", &e)?;
    let t01 = build_transition(&sp, "q", 0, 1)? * v01;
    let t12 = build_transition(&sp, "q", 1, 2)? * v12;
    let v = &t01 + &t01.adjoint() + &t12 + &t12.adjoint();
    let w21 = e[2] - e[1];
    if w21 == 0.0 {
        return Err(args.bad("E2", "levels 1 and 2 must differ"));
    }
    let shift = v12.norm_sqr() / w21;
    let oracle = qudit_levels(&sp, "q", &[e[0], e[1] - shift, e[2] + shift])? + &t01 + &t01.adjoint();
    Ok(model(
        Preset::Qutrit,
        &sp,
        h0,
        v,
        BlockRecipe::States(vec![vec![0, 1], vec![2]]),
        Some(oracle),
        0,
    ))
}

fn three_boson(args: &Args) -> Result<BuiltModel> {
    let (wa, wb, wc) = (args.num("omega_a")?, args.num("omega_b")?, args.num("omega_c")?);
    let (g, om) = (args.num("g")?, args.num("Omega")?);
    let labels = ["a".to_string(), "b".to_string(), "c".to_string()];
    args.check_truncation_labels(&labels)?;
    let na = args.require("a", 2)?;
    let nb = args.require("b", 1)?;
    let nc = args.require("c", 2)?;
    let sp = space(vec![
        FactorSpec::boson("a", na),
        FactorSpec::boson("b", nb),
        FactorSpec::boson("c", nc),
    ])?;
    let h0 = build_number(&sp, "a")? * wa + build_number(&sp, "b")? * wb + build_number(&sp, "c")? * wc;
    let xa2 = build_local(&sp, "a", &quadrature_power(na, 2))?;
    let xc2 = build_local(&sp, "c", &quadrature_power(nc, 2))?;
    let xb = build_local(&sp, "b", &quadrature_power(nb, 1))?;
    let v = (xa2 - xc2 * (om * om)) * &xb * (-0.5 * g);
    Ok(model(Preset::ThreeBoson, &sp, h0, v, degeneracy(), None, 2))
}

fn one_boson_n(args: &Args) -> Result<BuiltModel> {
    let power = args.count("power")?;
    if power == 0 {
        return Err(args.bad("power", "must be at least 1"));
    }
    let (wr, g) = (args.num("omega_r")?, args.num("g")?);
    args.check_truncation_labels(&["a".to_string()])?;
    let n_max = args.require("a", power)?;
    let sp = space(vec![FactorSpec::boson("a", n_max)])?;
    let h0 = build_number(&sp, "a")? * wr;
    let v = build_local(&sp, "a", &quadrature_power(n_max, power))? * g;
    let oracle = match power {
        1 => Some(diagonal_of(&sp, |n| wr * n as f64 - g * g / wr)?),
        2 => Some(diagonal_of(&sp, |n| {
            (wr + 2.0 * g - 2.0 * g * g / wr) * n as f64 + g - g * g / wr
        })?),
        4 => Some(diagonal_of(&sp, |n| {
            let f = |k| falling(n, k);
            wr * f(1) + g * (3.0 + 12.0 * f(1) + 6.0 * f(2))
                - 2.0 * g * g / wr * (21.0 + 144.0 * f(1) + 153.0 * f(2) + 34.0 * f(3))
        })?),
        _ => None,
    };
    Ok(model(Preset::OneBosonN, &sp, h0, v, degeneracy(), oracle, power))
}

fn two_boson(args: &Args) -> Result<BuiltModel> {
    let regime = args.text("regime")?;
    let (wa, wb, g) = (args.num("omega_a")?, args.num("omega_b")?, args.num("g")?);
    args.check_truncation_labels(&["a".to_string(), "b".to_string()])?;
    let sp = space(vec![
        FactorSpec::boson("a", args.require("a", 1)?),
        FactorSpec::boson("b", args.require("b", 1)?),
    ])?;
    let (a, b) = (build_ladder(&sp, "a")?, build_ladder(&sp, "b")?);
    let (na, nb) = (build_number(&sp, "a")?, build_number(&sp, "b")?);
    let h0 = &na * wa + &nb * wb;
    let v = (&a + &a.adjoint()) * &(&b + &b.adjoint()) * g;
    let id = OperatorMatrix::identity(&sp);
    let sum = wa + wb;
    let counter = (&na + &nb + &id) * (g * g / sum);
    let (blocks, oracle) = match regime.as_str() {
        "quasi_degenerate" => {
            let hop = &a.adjoint() * &b;
            let oracle = &h0 + &((&hop + &hop.adjoint()) * g) - &counter;
            (states_by(&sp, |i| sp.level(i, 0) + sp.level(i, 1)), oracle)
        }
        "dispersive" => {
            let diff = wa - wb;
            if diff == 0.0 {
                return Err(args.bad("omega_b", "dispersive regime needs omega_a != omega_b"));
            }
            let b2 = &b * &b;
            let oracle = &h0 - &((&nb - &na) * (g * g / diff)) - &counter
                - (&b2 + &b2.adjoint()) * (g * g * wa / (wa * wa - wb * wb));
            (subsystem(&["a"]), oracle)
        }
        _ => return Err(args.bad("regime", "expected `dispersive` or `quasi_degenerate`")),
    };
    Ok(model(Preset::TwoBoson, &sp, h0, v, blocks, Some(oracle), 1))
}

pub(super) const ANDERSON_SPINS: [&str; 2] = ["up", "dn"];

fn anderson(args: &Args) -> Result<BuiltModel> {
    let eps_k = args.list("eps_k")?;
    let (eps_d, u) = (args.num("eps_d")?, args.num("U")?);
    let v_re = args.list("v_kd")?;
    let mut v_im = args.list("v_kd_im")?;
    same_len(args, "v_kd", &v_re, eps_k.len())?;
    if v_im.is_empty() {
        v_im = vec![0.0; eps_k.len()];
    }
    same_len(args, "v_kd_im", &v_im, eps_k.len())?;
    if eps_k.is_empty() || eps_k.len() > 4 {
        return Err(args.bad("eps_k", "expected between 1 and 4 k points"));
    }
    args.check_truncation_labels(&[])?;
    let vkd: Vec<C64> = v_re.iter().zip(&v_im).map(|(r, i)| C64::new(*r, *i)).collect();

    let k_label = |k: usize, s: usize| format!("k{k}_{}", ANDERSON_SPINS[s]);
    let d_label = |s: usize| format!("d_{}", ANDERSON_SPINS[s]);
    let mut factors = Vec::new();
    for k in 0..eps_k.len() {
        for s in 0..2 {
            factors.push(FactorSpec::fermion(k_label(k, s)));
        }
    }
    for s in 0..2 {
        factors.push(FactorSpec::fermion(d_label(s)));
    }
    let sp = space(factors)?;
    let c: Vec<[OperatorMatrix; 2]> = (0..eps_k.len())
        .map(|k| Ok([build_ladder(&sp, &k_label(k, 0))?, build_ladder(&sp, &k_label(k, 1))?]))
        .collect::<Result<_>>()?;
    let d = [build_ladder(&sp, &d_label(0))?, build_ladder(&sp, &d_label(1))?];
    let nd = [&d[0].adjoint() * &d[0], &d[1].adjoint() * &d[1]];
    let double = &nd[0] * &nd[1];

    let mut h0 = &(&nd[0] + &nd[1]) * eps_d + &double * u;
    let mut v = OperatorMatrix::zeros(&sp);
    for (k, ck) in c.iter().enumerate() {
        for s in 0..2 {
            h0 += &ck[s].adjoint() * &ck[s] * eps_k[k];
            let t = &ck[s].adjoint() * &d[s] * vkd[k];
            v += &t + &t.adjoint();
        }
    }

    let nk = eps_k.len();
    let mut w = CMat::zeros(nk, nk);
    let mut j = CMat::zeros(nk, nk);
    for k in 0..nk {
        for q in 0..nk {
            let (dk, dq) = (eps_k[k] - eps_d, eps_k[q] - eps_d);
            if dk == 0.0 || dq == 0.0 || dk == u || dq == u {
                return Err(Error::Resonance {
                    omega_b: eps_k[if dk == 0.0 || dk == u { k } else { q }],
                    denominator: 0.0,
                });
            }
            let pre = vkd[k] * vkd[q].conj();
            w[(k, q)] = pre * 0.5 * (1.0 / dk + 1.0 / dq);
            j[(k, q)] = pre * (1.0 / (dk - u) + 1.0 / (dq - u) - 1.0 / dk - 1.0 / dq);
        }
    }
    let w_tr: C64 = (0..nk).map(|k| w[(k, k)]).sum();
    let j_tr: C64 = (0..nk).map(|k| j[(k, k)]).sum();
    // The spin sum doubles the U renormalization relative to the hopping terms.
    let mut oracle = &h0 - &((&nd[0] + &nd[1]) * w_tr) - &double * j_tr;
    for k in 0..nk {
        for q in 0..nk {
            for s in 0..2 {
                let hop = &c[k][s].adjoint() * &c[q][s];
                oracle += &hop * w[(k, q)] + &hop * &nd[1 - s] * (j[(k, q)] * 0.5);
                let flip = &c[k][s].adjoint() * &c[q][1 - s] * &d[1 - s].adjoint() * &d[s];
                oracle -= flip * (j[(k, q)] * 0.5);
            }
        }
    }
    let d_labels: Vec<String> = (0..2).map(d_label).collect();
    Ok(model(
        Preset::Anderson,
        &sp,
        h0,
        v,
        BlockRecipe::Strategy(BlockStrategy::Subsystem { factors: d_labels }),
        Some(oracle),
        0,
    ))
}

fn ladder_qudit(args: &Args, energies: &[f64], couplings: &[f64]) -> Result<()> {
    if energies.len() < 2 {
        return Err(args.bad("energies", "need at least two levels"));
    }
    same_len(args, "couplings", couplings, energies.len() - 1)
}

fn dispersive_boson_generic(args: &Args) -> Result<BuiltModel> {
    let wr = args.num("omega_r")?;
    let e = args.list("energies")?;
    let gs = args.list("couplings")?;
    ladder_qudit(args, &e, &gs)?;
    args.check_truncation_labels(&["a".to_string()])?;
    let sp = space(vec![FactorSpec::boson("a", args.require("a", 1)?), FactorSpec::qudit("q", e.len())])?;
    let h_b = qudit_levels(&sp, "q", &e)?;
    let n = build_number(&sp, "a")?;
    let mut b = OperatorMatrix::zeros(&sp);
    for (j, &g) in gs.iter().enumerate() {
        b += build_transition(&sp, "q", j, j + 1)? * g;
    }
    let h0 = &n * wr + &h_b;
    let t = build_creation(&sp, "a")? * &b;
    let v = &t + &t.adjoint();
    let proj = |j| build_transition(&sp, "q", j, j);
    let mut oracle = h0.clone();
    for (j, &g) in gs.iter().enumerate() {
        let chi = g * g / (wr - (e[j + 1] - e[j]));
        oracle -= &n * &(proj(j + 1)? - proj(j)?) * chi;
        oracle -= proj(j + 1)? * chi;
    }
    Ok(model(Preset::DispersiveBosonGeneric, &sp, h0, v, subsystem(&["a"]), Some(oracle), 1))
}

fn jaynes_cummings(args: &Args, counter_rotating: bool) -> Result<BuiltModel> {
    let (wr, wq, g) = (args.num("omega_r")?, args.num("omega_q")?, args.num("g")?);
    args.check_truncation_labels(&["a".to_string()])?;
    let sp = space(vec![FactorSpec::boson("a", args.require("a", 1)?), FactorSpec::qudit("q", 2)])?;
    let a = build_ladder(&sp, "a")?;
    let n = build_number(&sp, "a")?;
    let z = pauli::z(&sp, "q")?;
    let sm = pauli::minus(&sp, "q")?;
    let h0 = &n * wr + &z * (0.5 * wq);
    let (v, oracle) = if counter_rotating {
        let v = (&a + &a.adjoint()) * &pauli::x(&sp, "q")? * g;
        let chi = 2.0 * g * g * wq / (wr * wr - wq * wq);
        let lamb = g * g * wr / (wr * wr - wq * wq);
        let oracle = (&n * wr - &z * &n * chi + &z * (0.5 * (wq - chi))).shift(-lamb);
        (v, oracle)
    } else {
        let t = &a.adjoint() * &sm;
        let chi = g * g / (wr - wq);
        let oracle = (&n * wr - &z * &n * chi + &z * (0.5 * (wq - chi))).shift(-0.5 * chi);
        ((&t + &t.adjoint()) * g, oracle)
    };
    let preset = if counter_rotating { Preset::Rabi } else { Preset::JaynesCummings };
    Ok(model(preset, &sp, h0, v, subsystem(&["a"]), Some(oracle), 1))
}

fn dispersive_qubit_generic(args: &Args) -> Result<BuiltModel> {
    let w = args.num("omega")?;
    let e = args.list("energies")?;
    let cs = args.list("couplings")?;
    ladder_qudit(args, &e, &cs)?;
    args.check_truncation_labels(&[])?;
    let sp = space(vec![FactorSpec::qudit("s", 2), FactorSpec::qudit("b", e.len())])?;
    let h_b = qudit_levels(&sp, "b", &e)?;
    let mut b = OperatorMatrix::zeros(&sp);
    for (j, &c) in cs.iter().enumerate() {
        b += build_transition(&sp, "b", j, j + 1)? * c;
    }
    let h0 = pauli::z(&sp, "s")? * (0.5 * w) + &h_b;
    let t = pauli::plus(&sp, "s")? * &b;
    let v = &t + &t.adjoint();
    // Qubit up: level j pushed by the j -> j+1 transition; down: level j+1 pulled.
    let mut up = h_b.clone();
    let mut down = h_b.clone();
    for (j, &c) in cs.iter().enumerate() {
        let shift = c * c / (w - (e[j + 1] - e[j]));
        up += build_transition(&sp, "b", j, j)? * shift;
        down -= build_transition(&sp, "b", j + 1, j + 1)? * shift;
    }
    let p_up = build_transition(&sp, "s", 1, 1)?;
    let p_down = build_transition(&sp, "s", 0, 0)?;
    let oracle = &p_up * &up + &p_down * &down + pauli::z(&sp, "s")? * (0.5 * w);
    Ok(model(Preset::DispersiveQubitGeneric, &sp, h0, v, subsystem(&["s"]), Some(oracle), 0))
}

fn fermionic(args: &Args, name: &str) -> Result<bool> {
    match args.text(name)?.as_str() {
        "fermion" => Ok(true),
        "boson" => Ok(false),
        _ => Err(args.bad(name, "expected `fermion` or `boson`")),
    }
}

fn giant_atom_chain(args: &Args) -> Result<BuiltModel> {
    let fermions = fermionic(args, "species")?;
    let wr = args.num("omega_r")?;
    let eps = args.list("eps")?;
    let g = args.list("g")?;
    same_len(args, "g", &g, eps.len())?;
    if eps.is_empty() || eps.len() > 6 {
        return Err(args.bad("eps", "expected between 1 and 6 modes"));
    }
    let labels: Vec<String> = (0..eps.len()).map(|k| format!("b{k}")).collect();
    let mut factors = vec![FactorSpec::qudit("s", 2)];
    if fermions {
        args.check_truncation_labels(&[])?;
        factors.extend(labels.iter().map(|l| FactorSpec::fermion(l.clone())));
    } else {
        args.check_truncation_labels(&labels)?;
        for l in &labels {
            factors.push(FactorSpec::boson(l.clone(), args.require(l, 1)?));
        }
    }
    let sp = space(factors)?;
    let b: Vec<OperatorMatrix> = labels.iter().map(|l| build_ladder(&sp, l)).collect::<Result<_>>()?;
    let z = pauli::z(&sp, "s")?;
    let mut h_b = OperatorMatrix::zeros(&sp);
    let mut coupling = OperatorMatrix::zeros(&sp);
    for k in 0..eps.len() {
        h_b += &b[k].adjoint() * &b[k] * eps[k];
        coupling += &b[k] * g[k];
    }
    let h0 = &z * (0.5 * wr) + &h_b;
    let t = pauli::plus(&sp, "s")? * &coupling;
    let v = &t + &t.adjoint();

    let shift: f64 = (0..eps.len()).map(|k| g[k] * g[k] / (wr - eps[k])).sum();
    let mut hop = OperatorMatrix::zeros(&sp);
    for k in 0..eps.len() {
        for q in 0..eps.len() {
            let c = 0.5 * g[k] * g[q] * (1.0 / (wr - eps[k]) + 1.0 / (wr - eps[q]));
            hop += &b[k].adjoint() * &b[q] * c;
        }
    }
    let mut oracle = &h0 + &(pauli::plus(&sp, "s")? * &pauli::minus(&sp, "s")? * shift);
    if fermions {
        oracle -= hop;
    } else {
        oracle += &z * &hop;
    }
    let margin = if fermions { 0 } else { 1 };
    Ok(model(Preset::GiantAtomChain, &sp, h0, v, subsystem(&["s"]), Some(oracle), margin))
}

fn two_chains(args: &Args) -> Result<BuiltModel> {
    let fa = fermionic(args, "species_a")?;
    let fb = fermionic(args, "species_b")?;
    let eps = args.list("eps")?;
    let (delta, vv) = (args.num("delta")?, args.num("v")?);
    let couplings = args.list("couplings")?;
    let n = eps.len();
    if n == 0 || n > 3 {
        return Err(args.bad("eps", "expected between 1 and 3 modes per band"));
    }
    let resonant = couplings.is_empty();
    let vm = if resonant {
        CMat::from_fn(n, n, |i, k| re(if i == k { vv } else { 0.0 }))
    } else {
        same_len(args, "couplings", &couplings, n * n)?;
        CMat::from_fn(n, n, |i, k| re(couplings[i * n + k]))
    };
    let e: Vec<f64> = eps.iter().map(|x| x + delta).collect();
    let a_labels: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let b_labels: Vec<String> = (0..n).map(|k| format!("b{k}")).collect();
    let mut bosons = Vec::new();
    let mut factors = Vec::new();
    for (labels, fermions) in [(&a_labels, fa), (&b_labels, fb)] {
        for l in labels {
            if fermions {
                factors.push(FactorSpec::fermion(l.clone()));
            } else {
                bosons.push(l.clone());
                factors.push(FactorSpec::boson(l.clone(), args.require(l, 1)?));
            }
        }
    }
    args.check_truncation_labels(&bosons)?;
    let sp = space(factors)?;
    let a: Vec<OperatorMatrix> = a_labels.iter().map(|l| build_ladder(&sp, l)).collect::<Result<_>>()?;
    let b: Vec<OperatorMatrix> = b_labels.iter().map(|l| build_ladder(&sp, l)).collect::<Result<_>>()?;
    let mut h0 = OperatorMatrix::zeros(&sp);
    for i in 0..n {
        h0 += &a[i].adjoint() * &a[i] * e[i];
        h0 += &b[i].adjoint() * &b[i] * eps[i];
    }
    let mut v = OperatorMatrix::zeros(&sp);
    for i in 0..n {
        for k in 0..n {
            if vm[(i, k)].norm() != 0.0 {
                let t = &b[k].adjoint() * &a[i] * vm[(i, k)];
                v += &t + &t.adjoint();
            }
        }
    }
    let oracle = if resonant && delta != 0.0 {
        let x = vv * vv / delta;
        let mut o = OperatorMatrix::zeros(&sp);
        for i in 0..n {
            o += &a[i].adjoint() * &a[i] * (e[i] + x);
            o += &b[i].adjoint() * &b[i] * (eps[i] - x);
        }
        let mixed = match (fa, fb) {
            (true, false) => 2.0,
            (false, true) => -2.0,
            _ => 0.0,
        };
        if mixed != 0.0 {
            for i in 0..n {
                for j in 0..n {
                    o += &a[j].adjoint() * &a[i] * &(&b[i].adjoint() * &b[j]) * (mixed * x);
                }
            }
        }
        Some(o)
    } else {
        None
    };
    let blocks = states_by(&sp, |idx| (0..n).map(|p| sp.level(idx, p)).sum::<usize>());
    Ok(model(Preset::TwoChains, &sp, h0, v, blocks, oracle, 2))
}

fn cubic_fb(args: &Args) -> Result<BuiltModel> {
    let omegas = args.list("omegas")?;
    let h = args.list("h")?;
    let m = args.list("m")?;
    let nf = (h.len() as f64).sqrt().round() as usize;
    if nf == 0 || nf * nf != h.len() || nf > 4 {
        return Err(args.bad("h", "expected a square matrix with at most 4 modes"));
    }
    if omegas.is_empty() || omegas.len() > 2 {
        return Err(args.bad("omegas", "expected one or two bosons"));
    }
    same_len(args, "m", &m, omegas.len() * nf * nf)?;
    for x in 0..nf {
        for y in 0..x {
            if h[x * nf + y] != h[y * nf + x] {
                return Err(args.bad("h", "must be symmetric"));
            }
        }
    }
    let bos: Vec<String> = (0..omegas.len()).map(|i| format!("a{i}")).collect();
    let fer: Vec<String> = (0..nf).map(|k| format!("c{k}")).collect();
    args.check_truncation_labels(&bos)?;
    let mut factors = Vec::new();
    for l in &bos {
        factors.push(FactorSpec::boson(l.clone(), args.require(l, 1)?));
    }
    factors.extend(fer.iter().map(|l| FactorSpec::fermion(l.clone())));
    let sp = space(factors)?;
    let c: Vec<OperatorMatrix> = fer.iter().map(|l| build_ladder(&sp, l)).collect::<Result<_>>()?;
    let hop = |x: usize, y: usize| &c[x].adjoint() * &c[y];
    let mut h0 = OperatorMatrix::zeros(&sp);
    for x in 0..nf {
        for y in 0..nf {
            if h[x * nf + y] != 0.0 {
                h0 += hop(x, y) * h[x * nf + y];
            }
        }
    }
    let mut v = OperatorMatrix::zeros(&sp);
    for (i, l) in bos.iter().enumerate() {
        h0 += build_number(&sp, l)? * omegas[i];
        let mut bi = OperatorMatrix::zeros(&sp);
        for x in 0..nf {
            for y in 0..nf {
                let mv = m[(i * nf + x) * nf + y];
                if mv != 0.0 {
                    bi += hop(x, y) * mv;
                }
            }
        }
        let t = build_creation(&sp, l)? * bi;
        v += &t + &t.adjoint();
    }
    let labels: Vec<&str> = bos.iter().map(|s| s.as_str()).collect();
    Ok(model(Preset::CubicFb, &sp, h0, v, subsystem(&labels), None, 1))
}

/// `beta` and `alpha_x, alpha_y, alpha_z` in the standard representation.
pub(super) fn dirac_matrices() -> (CMat, [CMat; 3]) {
    let z = re(0.0);
    let one = re(1.0);
    let i = C64::new(0.0, 1.0);
    let sigma = [
        CMat::from_row_slice(2, 2, &[z, one, one, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    ];
    let beta = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![one, one, -one, -one]));
    let alpha = sigma.map(|s| {
        let mut a = CMat::zeros(4, 4);
        a.view_mut((0, 2), (2, 2)).copy_from(&s);
        a.view_mut((2, 0), (2, 2)).copy_from(&s);
        a
    });
    (beta, alpha)
}

fn dirac_fixed_p(args: &Args) -> Result<BuiltModel> {
    let (m, phi, e) = (args.num("m")?, args.num("phi")?, args.num("e")?);
    let p = args.list("p")?;
    same_len(args, "p", &p, 3)?;
    if m <= 0.0 {
        return Err(args.bad("m", "must be positive"));
    }
    args.check_truncation_labels(&[])?;
    let sp = space(vec![FactorSpec::qudit("spinor", 4)])?;
    let (beta, alpha) = dirac_matrices();
    let id = CMat::identity(4, 4);
    let mut ap = CMat::zeros(4, 4);
    for k in 0..3 {
        ap += &alpha[k] * re(p[k]);
    }
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let h0 = OperatorMatrix::from_dense(&sp, &(&beta * re(m)))?;
    let v = OperatorMatrix::from_dense(&sp, &(ap - &id * re(e * phi)))?;
    let oracle = OperatorMatrix::from_dense(&sp, &(&beta * re(m + p2 / (2.0 * m)) - &id * re(e * phi)))?;
    Ok(model(Preset::DiracFixedP, &sp, h0, v, degeneracy(), Some(oracle), 0))
}

pub(super) fn hubbard_label(site: usize, spin: usize) -> String {
    format!("c{site}_{}", ANDERSON_SPINS[spin])
}

/// `V_0`, `V_+`, `V_-` of the hopping on an open chain.
pub(super) struct HoppingSplit {
    pub v0: OperatorMatrix,
    pub v_plus: OperatorMatrix,
    pub v_minus: OperatorMatrix,
}

pub(super) fn hopping_split(sp: &Arc<ProductSpace>, sites: usize, t: f64) -> Result<HoppingSplit> {
    let mut v0 = OperatorMatrix::zeros(sp);
    let mut v_plus = OperatorMatrix::zeros(sp);
    let mut v_minus = OperatorMatrix::zeros(sp);
    for i in 0..sites.saturating_sub(1) {
        let j = i + 1;
        for s in 0..2 {
            let hop = |x: usize, y: usize| -> Result<OperatorMatrix> {
                Ok(build_creation(sp, &hubbard_label(x, s))? * build_ladder(sp, &hubbard_label(y, s))?)
            };
            let n = |x: usize| build_number(sp, &hubbard_label(x, 1 - s));
            let h = |x: usize| build_hole(sp, &hubbard_label(x, 1 - s));
            let (ij, ji) = (hop(i, j)?, hop(j, i)?);
            let stay = &n(i)? * &ij * &n(j)? + &h(i)? * &ij * &h(j)?;
            v0 += (&stay + &stay.adjoint()) * -t;
            v_plus += (&n(i)? * &ij * &h(j)? + &n(j)? * &ji * &h(i)?) * -t;
            v_minus += (&h(i)? * &ij * &n(j)? + &h(j)? * &ji * &n(i)?) * -t;
        }
    }
    Ok(HoppingSplit { v0, v_plus, v_minus })
}

fn hubbard_tu(args: &Args) -> Result<BuiltModel> {
    let sites = args.count("sites")?;
    if !(2..=4).contains(&sites) {
        return Err(args.bad("sites", "expected 2 to 4 sites"));
    }
    let (t, u) = (args.num("t")?, args.num("U")?);
    if u == 0.0 {
        return Err(args.bad("U", "must be non-zero"));
    }
    args.check_truncation_labels(&[])?;
    let mut factors = Vec::new();
    for i in 0..sites {
        for s in 0..2 {
            factors.push(FactorSpec::fermion(hubbard_label(i, s)));
        }
    }
    let sp = space(factors)?;
    let mut h0 = OperatorMatrix::zeros(&sp);
    for i in 0..sites {
        h0 += build_number(&sp, &hubbard_label(i, 0))? * build_number(&sp, &hubbard_label(i, 1))? * u;
    }
    let split = hopping_split(&sp, sites, t)?;
    let v = &split.v0 + &split.v_plus + &split.v_minus;
    let oracle = &h0 + &split.v0 - split.v_minus.commutator(&split.v_plus)? * (1.0 / u);
    Ok(model(Preset::HubbardTU, &sp, h0, v, degeneracy(), Some(oracle), 0))
}
