use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::sw_second_order;
use crate::linalg::{re, CMat, C64};
use crate::operator::{build_local, FactorSpec};
use crate::spectral::{diagonalize, explicit_from_states, make_blocks, BlockStrategy};

fn space(f: Vec<FactorSpec>) -> Arc<ProductSpace> {
    Arc::new(ProductSpace::new(f).unwrap())
}

/// Engine `H'` with blocks bucketed by the energy of `factors`.
fn engine(h0: &OperatorMatrix, v: &OperatorMatrix, factors: &[String]) -> OperatorMatrix {
    let spec = Arc::new(diagonalize(h0).unwrap());
    let blocks = make_blocks(
        h0,
        &spec,
        BlockStrategy::Subsystem {
            factors: factors.to_vec(),
        },
    )
    .unwrap();
    sw_second_order(h0, v, &blocks, None).unwrap().h_prime
}

fn rel_diff_on(a: &OperatorMatrix, b: &OperatorMatrix, idx: &[usize]) -> f64 {
    a.max_diff_on(b, idx).unwrap() / b.norm_max().max(1e-300)
}

fn jc(g: f64, wr: f64, wq: f64, n_max: usize) -> DispersiveSetup {
    let sp = space(vec![FactorSpec::boson("a", n_max), FactorSpec::qudit("q", 2)]);
    let h_b = pauli::z(&sp, "q").unwrap() * (0.5 * wq);
    let b = pauli::minus(&sp, "q").unwrap() * g;
    DispersiveSetup {
        h_b,
        coupling: Coupling::Modes(vec![BosonMode {
            label: "a".into(),
            omega: wr,
            b,
        }]),
    }
}

fn single_mode(s: &DispersiveSetup) -> &BosonMode {
    match &s.coupling {
        Coupling::Modes(m) => &m[0],
        _ => unreachable!(),
    }
}

#[test]
fn jc_renormalized_coupling() {
    let (g, wr, wq) = (0.02, 10.0, 1.0);
    let s = jc(g, wr, wq, 4);
    let m = single_mode(&s);
    let rb = renormalize_b(&m.b, &s.h_b, wr, None).unwrap();
    let want = pauli::minus(s.space(), "q").unwrap() * (g / (wr - wq));
    assert!(rb.b_r.max_diff(&want).unwrap() < 1e-16);
    assert_eq!(rb.table.len(), 1);
    assert!((rb.table[0].omega_b - wq).abs() < 1e-15);
    assert!(rb.reconstruct().max_diff(&rb.b_r).unwrap() < 1e-12);
}

#[test]
fn rabi_renormalized_coupling() {
    let (g, wr, wq) = (0.03, 7.0, 1.5);
    let sp = space(vec![FactorSpec::qudit("q", 2)]);
    let h_b = pauli::z(&sp, "q").unwrap() * (0.5 * wq);
    let b = pauli::x(&sp, "q").unwrap() * g;
    let rb = renormalize_b(&b, &h_b, wr, None).unwrap();
    let want = pauli::minus(&sp, "q").unwrap() * (g / (wr - wq))
        + pauli::plus(&sp, "q").unwrap() * (g / (wr + wq));
    assert!(rb.b_r.max_diff(&want).unwrap() < 1e-15);
    assert!(rb.reconstruct().max_diff(&rb.b_r).unwrap() < 1e-12);
}

#[test]
fn zero_coupling_renormalizes_to_zero() {
    let s = jc(0.0, 10.0, 1.0, 3);
    let rb = renormalize_b(&single_mode(&s).b, &s.h_b, 10.0, None).unwrap();
    assert!(rb.b_r.is_zero());
    assert!(rb.table.is_empty());
}

#[test]
fn renormalization_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sp = space(vec![FactorSpec::qudit("q", 4)]);
    let h_b = OperatorMatrix::from_triplets(&sp, (0..4).map(|i| (i, i, re([0.0, 0.7, 1.9, 2.2][i])))).unwrap();
    let m = CMat::from_fn(4, 4, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let b = build_local(&sp, "q", &m).unwrap();
    let lam = 0.375;
    let r1 = renormalize_b(&b, &h_b, 9.0, None).unwrap().b_r;
    let r2 = renormalize_b(&(&b * lam), &h_b, 9.0, None).unwrap().b_r;
    assert!(r2.max_diff(&(&r1 * lam)).unwrap() < 1e-15);
}

#[test]
fn resonance_is_reported() {
    let s = jc(0.02, 1.0, 1.0, 3);
    match renormalize_b(&single_mode(&s).b, &s.h_b, 1.0, None) {
        Err(Error::Resonance { omega_b, .. }) => assert!((omega_b - 1.0).abs() < 1e-12),
        other => panic!("expected resonance, got {other:?}"),
    }
}

#[test]
fn jc_matches_closed_form_and_engine() {
    let (g, wr, wq) = (0.02, 10.0, 1.0);
    let s = jc(g, wr, wq, 6);
    let sp = s.space().clone();
    let hp = dispersive_boson_hprime(single_mode(&s), &s.h_b, None).unwrap();
    let chi = g * g / (wr - wq);
    let n = build_number(&sp, "a").unwrap();
    let z = pauli::z(&sp, "q").unwrap();
    let want = &(&n * wr) - &(&(&z * &n) * chi) + (&z * (0.5 * (wq - chi))).shift(-0.5 * chi);
    assert!(hp.max_diff(&want).unwrap() < 1e-13);

    let eng = engine(&s.h0().unwrap(), &s.v().unwrap(), &s.a_factors());
    assert!(rel_diff_on(&hp, &eng, &sp.trusted_interior(1)) < 1e-9);
}

#[test]
fn qudit_ladder_shifts() {
    let e = [0.0, 1.0, 2.3, 3.1];
    let bj = [0.05, 0.04, 0.03];
    let wr = 12.0;
    let sp = space(vec![FactorSpec::boson("a", 5), FactorSpec::qudit("q", 4)]);
    let h_b = OperatorMatrix::from_triplets(
        &sp,
        (0..sp.total_dim()).map(|i| (i, i, re(e[sp.level(i, 1)]))),
    )
    .unwrap();
    let mut b = OperatorMatrix::zeros(&sp);
    for j in 0..3 {
        b += build_transition(&sp, "q", j, j + 1).unwrap() * bj[j];
    }
    let mode = BosonMode {
        label: "a".into(),
        omega: wr,
        b,
    };
    let hp = dispersive_boson_hprime(&mode, &h_b, None).unwrap();
    let n = build_number(&sp, "a").unwrap();
    let proj = |j| build_transition(&sp, "q", j, j).unwrap();
    let mut want = &(&n * wr) + &h_b;
    for j in 0..3 {
        let chi = bj[j] * bj[j] / (wr - (e[j + 1] - e[j]));
        want -= &n * &(&proj(j + 1) - &proj(j)) * chi;
        want -= proj(j + 1) * chi;
    }
    let d = hp.max_diff(&want).unwrap();
    assert!(d < 1e-14 * want.norm_max(), "{d}");

    let setup = DispersiveSetup {
        h_b,
        coupling: Coupling::Modes(vec![mode]),
    };
    let eng = engine(&setup.h0().unwrap(), &setup.v().unwrap(), &setup.a_factors());
    assert!(rel_diff_on(&hp, &eng, &sp.trusted_interior(1)) < 1e-9);
    assert!(setup.validity_ratio(None).unwrap() < 0.5);
}

fn two_mode_setup(w1: f64, w2: f64, same_b: bool) -> DispersiveSetup {
    let sp = space(vec![
        FactorSpec::boson("a1", 3),
        FactorSpec::boson("a2", 3),
        FactorSpec::qudit("q", 3),
    ]);
    let h_b = OperatorMatrix::from_triplets(
        &sp,
        (0..sp.total_dim()).map(|i| (i, i, re([0.0, 0.9, 2.1][sp.level(i, 2)]))),
    )
    .unwrap();
    let b1 = build_transition(&sp, "q", 0, 1).unwrap() * 0.04
        + build_transition(&sp, "q", 1, 2).unwrap() * C64::new(0.02, 0.01);
    let b2 = if same_b {
        b1.clone()
    } else {
        build_transition(&sp, "q", 0, 2).unwrap() * 0.03 + build_transition(&sp, "q", 1, 1).unwrap() * 0.01
    };
    DispersiveSetup {
        h_b,
        coupling: Coupling::Modes(vec![
            BosonMode {
                label: "a1".into(),
                omega: w1,
                b: b1,
            },
            BosonMode {
                label: "a2".into(),
                omega: w2,
                b: b2,
            },
        ]),
    }
}

fn modes(s: &DispersiveSetup) -> &[BosonMode] {
    match &s.coupling {
        Coupling::Modes(m) => m,
        _ => unreachable!(),
    }
}

#[test]
fn multimode_single_mode_reduction_is_exact() {
    let s = jc(0.05, 8.0, 1.2, 4);
    let m = single_mode(&s);
    let a = dispersive_multimode_hprime(std::slice::from_ref(m), &s.h_b, &[], None).unwrap();
    let b = dispersive_boson_hprime(m, &s.h_b, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn multimode_far_detuned_drops_cross_terms() {
    let s = two_mode_setup(9.0, 15.0, false);
    let keep = default_cross_pairs(modes(&s));
    assert!(keep.is_empty());
    let hp = dispersive_multimode_hprime(modes(&s), &s.h_b, &keep, None).unwrap();
    let eng = engine(&s.h0().unwrap(), &s.v().unwrap(), &s.a_factors());
    assert!(rel_diff_on(&hp, &eng, &s.space().trusted_interior(1)) < 1e-9);
}

#[test]
fn multimode_degenerate_keeps_cross_terms() {
    let s = two_mode_setup(9.0, 9.0, true);
    let keep = default_cross_pairs(modes(&s));
    assert_eq!(keep, vec![(0, 1)]);
    let hp = dispersive_multimode_hprime(modes(&s), &s.h_b, &keep, None).unwrap();
    let eng = engine(&s.h0().unwrap(), &s.v().unwrap(), &s.a_factors());
    assert!(rel_diff_on(&hp, &eng, &s.space().trusted_interior(1)) < 1e-9);

    // With B1 = B2 the cross coefficients equal the direct ones, so the
    // kept terms are the direct part with a1^dagger a1 replaced by a1^dagger a2.
    let drop = dispersive_multimode_hprime(modes(&s), &s.h_b, &[], None).unwrap();
    let sp = s.space();
    let n1 = build_number(sp, "a1").unwrap();
    let hop = build_creation(sp, "a1").unwrap() * build_ladder(sp, "a2").unwrap();
    let m = &modes(&s)[0];
    let rb = renormalize_b(&m.b, &s.h_b, m.omega, None).unwrap().b_r;
    let x = m.b.adjoint().commutator(&rb).unwrap() + rb.adjoint().commutator(&m.b).unwrap();
    let direct = &n1 * &x * -0.5;
    let cross = (&hop * &x + &hop.adjoint() * &x) * -0.5;
    assert!((&hp - &drop).max_diff(&cross).unwrap() < 1e-15);
    assert!(direct.norm_max() > 0.0);
}

#[test]
fn qubit_zero_coupling() {
    let sp = space(vec![FactorSpec::qudit("s", 2), FactorSpec::fermion("b0"), FactorSpec::fermion("b1")]);
    let h_b = build_number(&sp, "b0").unwrap() * 0.3 + build_number(&sp, "b1").unwrap() * -0.2;
    let out = dispersive_qubit_hprime("s", 6.0, &h_b, &OperatorMatrix::zeros(&sp), None).unwrap();
    let want = &h_b + &(pauli::z(&sp, "s").unwrap() * 3.0);
    let d = out.h_prime.max_diff(&want).unwrap();
    assert!(d < 1e-14, "{d}");
}

fn chain_setup(fermions: bool) -> (DispersiveSetup, Vec<f64>, Vec<f64>, f64) {
    let eps = vec![0.0, 0.5, 1.1];
    let g = vec![0.1, -0.08, 0.12];
    let wr = 10.0;
    let mut f = vec![FactorSpec::qudit("s", 2)];
    for k in 0..3 {
        f.push(if fermions {
            FactorSpec::fermion(format!("b{k}"))
        } else {
            FactorSpec::boson(format!("b{k}"), 3)
        });
    }
    let sp = space(f);
    let mut h_b = OperatorMatrix::zeros(&sp);
    let mut b = OperatorMatrix::zeros(&sp);
    for k in 0..3 {
        h_b += build_number(&sp, &format!("b{k}")).unwrap() * eps[k];
        b += build_ladder(&sp, &format!("b{k}")).unwrap() * g[k];
    }
    (
        DispersiveSetup {
            h_b,
            coupling: Coupling::Qubit {
                label: "s".into(),
                omega: wr,
                b,
            },
        },
        eps,
        g,
        wr,
    )
}

fn qubit_parts(s: &DispersiveSetup) -> (&str, f64, &OperatorMatrix) {
    match &s.coupling {
        Coupling::Qubit { label, omega, b } => (label, *omega, b),
        _ => unreachable!(),
    }
}

#[test]
fn fermion_chain_decouples() {
    let (s, eps, g, wr) = chain_setup(true);
    let (q, w, b) = qubit_parts(&s);
    let out = dispersive_qubit_hprime(q, w, &s.h_b, b, None).unwrap();
    let sp = s.space();
    let mut want = &s.h_b + &(pauli::z(sp, q).unwrap() * (0.5 * wr));
    let shift: f64 = (0..3).map(|k| g[k] * g[k] / (wr - eps[k])).sum();
    want += build_transition(sp, q, 1, 1).unwrap() * shift;
    for k in 0..3 {
        for p in 0..3 {
            let c = 0.5 * g[k] * g[p] * (1.0 / (wr - eps[k]) + 1.0 / (wr - eps[p]));
            want -= build_creation(sp, &format!("b{k}")).unwrap() * build_ladder(sp, &format!("b{p}")).unwrap() * c;
        }
    }
    let d = out.h_prime.max_diff(&want).unwrap();
    assert!(d < 1e-14, "{d}");
    let shifted = out.up.shift(-shift);
    assert!(shifted.max_diff(&out.down).unwrap() < 1e-15);

    let eng = engine(&s.h0().unwrap(), &s.v().unwrap(), &s.a_factors());
    assert!(rel_diff_on(&out.h_prime, &eng, &sp.trusted_interior(0)) < 1e-9);
}

#[test]
fn boson_chain_conditional_dispersion() {
    let (s, eps, g, wr) = chain_setup(false);
    let (q, w, b) = qubit_parts(&s);
    let out = dispersive_qubit_hprime(q, w, &s.h_b, b, None).unwrap();
    let sp = s.space();
    let eng = engine(&s.h0().unwrap(), &s.v().unwrap(), &s.a_factors());
    assert!(rel_diff_on(&out.h_prime, &eng, &sp.trusted_interior(1)) < 1e-9);
    // Diagonal k = q coefficients of the conditional Hamiltonians.
    let interior = sp.trusted_interior(1);
    for k in 0..3 {
        let mut lv = vec![0; 4];
        lv[k + 1] = 1;
        let one = sp.index_of(&lv);
        let vac = sp.index_of(&[0, 0, 0, 0]);
        assert!(interior.contains(&one));
        let chi = g[k] * g[k] / (wr - eps[k]);
        let sum: f64 = (0..3).map(|p| g[p] * g[p] / (wr - eps[p])).sum();
        let up = (out.up.get(one, one) - out.up.get(vac, vac)).re;
        let down = (out.down.get(one, one) - out.down.get(vac, vac)).re;
        assert!((up - (eps[k] + chi)).abs() < 1e-14, "{up} vs {}", eps[k] + chi);
        assert!((down - (eps[k] - chi)).abs() < 1e-14, "{down} vs {}", eps[k] - chi);
        assert!((out.up.get(vac, vac).re - sum).abs() < 1e-14);
    }
}

#[test]
fn two_chains_resonant_bands() {
    let eps = [0.0, 0.3];
    let (delta, v) = (2.0, 0.05);
    let sp = space(vec![
        FactorSpec::fermion("a0"),
        FactorSpec::fermion("a1"),
        FactorSpec::fermion("b0"),
        FactorSpec::fermion("b1"),
    ]);
    let a: Vec<String> = vec!["a0".into(), "a1".into()];
    let b: Vec<String> = vec!["b0".into(), "b1".into()];
    let e: Vec<f64> = eps.iter().map(|x| x + delta).collect();
    let vm = CMat::from_fn(2, 2, |i, k| if i == k { re(v) } else { re(0.0) });
    let out = two_chain_hprime(&sp, &a, &b, &e, &eps, &vm).unwrap();
    let mut want = OperatorMatrix::zeros(&sp);
    for i in 0..2 {
        want += build_number(&sp, &a[i]).unwrap() * (e[i] + v * v / delta);
        want += build_number(&sp, &b[i]).unwrap() * (eps[i] - v * v / delta);
    }
    assert!(out.closed.max_diff(&want).unwrap() < 1e-15);
    assert!(out.general.max_diff(&want).unwrap() < 1e-15);
}

fn chain_blocks_by_a_number(
    h0: &OperatorMatrix,
    sp: &ProductSpace,
    a_pos: &[usize],
) -> crate::spectral::BlockStructure {
    let spec = Arc::new(diagonalize(h0).unwrap());
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut keys: Vec<usize> = Vec::new();
    for i in 0..sp.total_dim() {
        let na: usize = a_pos.iter().map(|&p| sp.level(i, p)).sum();
        match keys.iter().position(|&k| k == na) {
            Some(b) => sets[b].push(i),
            None => {
                keys.push(na);
                sets.push(vec![i]);
            }
        }
    }
    let strat = explicit_from_states(&spec, &sets).unwrap();
    make_blocks(h0, &spec, strat).unwrap()
}

fn check_two_chains(kind_a: FactorKind, kind_b: FactorKind) {
    let mk = |k: FactorKind, l: String| match k {
        FactorKind::Fermion => FactorSpec::fermion(l),
        _ => FactorSpec::boson(l, 3),
    };
    let sp = space(vec![
        mk(kind_a, "a0".into()),
        mk(kind_a, "a1".into()),
        mk(kind_b, "b0".into()),
        mk(kind_b, "b1".into()),
    ]);
    let a: Vec<String> = vec!["a0".into(), "a1".into()];
    let b: Vec<String> = vec!["b0".into(), "b1".into()];
    let e = [3.0, 3.7];
    let eps = [0.2, -0.4];
    let vm = CMat::from_row_slice(2, 2, &[C64::new(0.05, 0.01), C64::new(-0.03, 0.0), C64::new(0.02, -0.02), C64::new(0.04, 0.0)]);
    let out = two_chain_hprime(&sp, &a, &b, &e, &eps, &vm).unwrap();
    let mut h0 = OperatorMatrix::zeros(&sp);
    let mut v = OperatorMatrix::zeros(&sp);
    for i in 0..2 {
        h0 += build_number(&sp, &a[i]).unwrap() * e[i];
        h0 += build_number(&sp, &b[i]).unwrap() * eps[i];
    }
    for i in 0..2 {
        for k in 0..2 {
            let t = build_creation(&sp, &b[k]).unwrap() * build_ladder(&sp, &a[i]).unwrap() * vm[(i, k)];
            v += &t + &t.adjoint();
        }
    }
    let blocks = chain_blocks_by_a_number(&h0, &sp, &[0, 1]);
    let eng = sw_second_order(&h0, &v, &blocks, None).unwrap().h_prime;
    let interior = sp.trusted_interior(2);
    assert!(rel_diff_on(&out.general, &eng, &interior) < 1e-9, "{kind_a:?}/{kind_b:?} general");
    assert!(rel_diff_on(&out.closed, &eng, &interior) < 1e-9, "{kind_a:?}/{kind_b:?} closed");
}

#[test]
fn two_chains_all_species_match_engine() {
    check_two_chains(FactorKind::Fermion, FactorKind::Fermion);
    check_two_chains(FactorKind::Boson, FactorKind::Boson);
    check_two_chains(FactorKind::Fermion, FactorKind::Boson);
    check_two_chains(FactorKind::Boson, FactorKind::Fermion);
}

#[test]
fn two_chains_zero_coupling() {
    let sp = space(vec![FactorSpec::fermion("a0"), FactorSpec::fermion("b0")]);
    let out = two_chain_hprime(&sp, &["a0".into()], &["b0".into()], &[2.0], &[0.5], &CMat::zeros(1, 1)).unwrap();
    let h0 = build_number(&sp, "a0").unwrap() * 2.0 + build_number(&sp, "b0").unwrap() * 0.5;
    assert_eq!(out.closed, h0);
    assert_eq!(out.general, h0);
}

fn cubic_instance(nf: usize, omegas: &[f64], seed: u64, hermitian_m: bool) -> CubicSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let h0 = CMat::from_fn(nf, nf, |_, _| c());
    let h = (&h0 + h0.adjoint()) * re(0.5);
    let m = omegas
        .iter()
        .map(|_| {
            let x = CMat::from_fn(nf, nf, |_, _| c() * 0.1);
            if hermitian_m {
                (&x + x.adjoint()) * re(0.5)
            } else {
                x
            }
        })
        .collect();
    CubicSetup {
        omegas: omegas.to_vec(),
        h,
        m,
    }
}

fn cubic_space(nf: usize, nb: usize, n_max: usize) -> (Arc<ProductSpace>, Vec<String>, Vec<String>) {
    let mut f = Vec::new();
    let bos: Vec<String> = (0..nb).map(|i| format!("a{i}")).collect();
    let fer: Vec<String> = (0..nf).map(|i| format!("c{i}")).collect();
    for l in &bos {
        f.push(FactorSpec::boson(l.clone(), n_max));
    }
    for l in &fer {
        f.push(FactorSpec::fermion(l.clone()));
    }
    (space(f), bos, fer)
}

fn cubic_model(setup: &CubicSetup, sp: &Arc<ProductSpace>, bos: &[String], fer: &[String]) -> (OperatorMatrix, OperatorMatrix) {
    let n = fer.len();
    let hop = |x: usize, y: usize| build_creation(sp, &fer[x]).unwrap() * build_ladder(sp, &fer[y]).unwrap();
    let mut h0 = OperatorMatrix::zeros(sp);
    for x in 0..n {
        for y in 0..n {
            h0 += hop(x, y) * setup.h[(x, y)];
        }
    }
    let mut v = OperatorMatrix::zeros(sp);
    for (i, l) in bos.iter().enumerate() {
        h0 += build_number(sp, l).unwrap() * setup.omegas[i];
        let mut bi = OperatorMatrix::zeros(sp);
        for x in 0..n {
            for y in 0..n {
                bi += hop(x, y) * setup.m[i][(x, y)];
            }
        }
        let t = build_creation(sp, l).unwrap() * bi;
        v += &t + &t.adjoint();
    }
    (h0, v)
}

#[test]
fn cubic_exact_forms_agree_and_match_engine() {
    for (nf, omegas, seed) in [(2, vec![8.0], 1u64), (3, vec![7.0, 9.5], 2)] {
        let setup = cubic_instance(nf, &omegas, seed, false);
        let (sp, bos, fer) = cubic_space(nf, omegas.len(), 1);
        let t = cubic_tensors(&setup).unwrap();
        let forms = cubic_forms(&setup, &t, &sp, &fer).unwrap();
        let scale = forms.exact_a.norm_max();
        assert!(forms.exact_a.max_diff(&forms.exact_gf).unwrap() < 1e-10 * scale);

        let (h0, v) = cubic_model(&setup, &sp, &bos, &fer);
        let eng = engine(&h0, &v, &bos);
        let vacuum: Vec<usize> = (0..sp.total_dim())
            .filter(|&i| (0..bos.len()).all(|p| sp.level(i, p) == 0))
            .collect();
        assert!(rel_diff_on(&forms.exact_a, &eng, &vacuum) < 1e-9, "nf={nf}");
    }
}

#[test]
fn cubic_hermitian_coupling_simplifies_f() {
    let setup = cubic_instance(3, &[6.0, 8.0], 5, true);
    let t = cubic_tensors(&setup).unwrap();
    let n = 3;
    for k in 0..n {
        for k2 in 0..n {
            for p in 0..n {
                for p2 in 0..n {
                    let mut want = C64::new(0.0, 0.0);
                    for (i, m) in t.m_diag.iter().enumerate() {
                        let w = setup.omegas[i];
                        let d = t.eps[k] - t.eps[k2];
                        want += m[(k, k2)].conj() * m[(p, p2)] * (w / (w * w - d * d));
                    }
                    assert!((t.f.get(k, k2, p, p2) - want).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn cubic_zero_coupling() {
    let mut setup = cubic_instance(2, &[5.0], 3, false);
    setup.m = vec![CMat::zeros(2, 2)];
    let (sp, _, fer) = cubic_space(2, 1, 1);
    let t = cubic_tensors(&setup).unwrap();
    let forms = cubic_forms(&setup, &t, &sp, &fer).unwrap();
    let mut band = OperatorMatrix::zeros(&sp);
    for x in 0..2 {
        for y in 0..2 {
            band += build_creation(&sp, &fer[x]).unwrap() * build_ladder(&sp, &fer[y]).unwrap() * setup.h[(x, y)];
        }
    }
    assert!(forms.exact_a.max_diff(&band).unwrap() < 1e-14);
    assert!(forms.leading.max_diff(&band).unwrap() < 1e-15);
}

#[test]
fn cubic_expansion_error_is_quadratic_in_band_spread() {
    let base = cubic_instance(2, &[20.0], 9, false);
    let (sp, _, fer) = cubic_space(2, 1, 1);
    let err = |scale: f64| {
        let mut s = base.clone();
        s.h = &s.h * re(scale);
        let t = cubic_tensors(&s).unwrap();
        let f = cubic_forms(&s, &t, &sp, &fer).unwrap();
        f.expanded.max_diff(&f.exact_a).unwrap()
    };
    let ratio = err(1.0) / err(0.5);
    assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
}
