use super::*;
use crate::eigenop::eigen_decompose;
use crate::engine::{sw_second_order, transform, EngineOptions};
use crate::linalg::{eigvalsh, re};
use crate::spectral::project_block_diagonal;

fn p(pairs: &[(&str, ParamValue)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn n(x: f64) -> ParamValue {
    ParamValue::Number(x)
}

fn t(s: &str) -> ParamValue {
    ParamValue::Text(s.into())
}

fn oracle_gap(m: &BuiltModel) -> f64 {
    let blocks = m.block_structure().unwrap();
    let hp = sw_second_order(&m.h0, &m.v, &blocks, None).unwrap().h_prime;
    let o = m.oracle.as_ref().unwrap();
    hp.max_diff_on(o, &m.interior()).unwrap() / o.norm_max()
}

#[test]
fn names_round_trip() {
    for preset in Preset::ALL {
        assert_eq!(Preset::from_name(preset.name()).unwrap(), preset);
        assert!(!preset.schema().is_empty());
    }
    assert!(matches!(Preset::from_name("nope"), Err(Error::UnknownPreset(_))));
}

#[test]
fn defaults_build_hermitian_models() {
    for preset in Preset::ALL {
        let m = build_default(preset).unwrap();
        assert!(m.h0.hermiticity_residual() < 1e-14, "{}", preset.name());
        assert!(m.v.hermiticity_residual() < 1e-14, "{}", preset.name());
        assert!(m.warnings.is_empty(), "{}: {:?}", preset.name(), m.warnings);
        if let Some(o) = &m.oracle {
            assert!(o.hermiticity_residual() < 1e-14, "{}", preset.name());
            let blocks = m.block_structure().unwrap();
            let d = project_block_diagonal(o, &blocks).unwrap();
            assert!(d.max_diff(o).unwrap() < 1e-12 * o.norm_max(), "{}", preset.name());
        }
    }
}

#[test]
fn builds_are_bit_identical() {
    for preset in Preset::ALL {
        let a = build_default(preset).unwrap();
        let b = build_default(preset).unwrap();
        assert_eq!(a.h0, b.h0);
        assert_eq!(a.v, b.v);
        assert_eq!(a.oracle, b.oracle);
    }
}

#[test]
fn default_oracles_match_engine() {
    for preset in Preset::ALL {
        let m = build_default(preset).unwrap();
        if m.oracle.is_some() {
            let d = oracle_gap(&m);
            assert!(d < 1e-9, "{}: {d:e}", preset.name());
        }
    }
}

#[test]
fn oracles_cover_variants() {
    let cases = [
        (Preset::OneBosonN, p(&[("power", n(2.0))])),
        (Preset::OneBosonN, p(&[("power", n(4.0)), ("g", n(1e-3))])),
        (Preset::TwoBoson, p(&[("regime", t("quasi_degenerate")), ("omega_b", n(4.8))])),
        (Preset::GiantAtomChain, p(&[("species", t("boson"))])),
        (Preset::TwoChains, p(&[("species_a", t("boson"))])),
        (Preset::TwoChains, p(&[("species_b", t("boson"))])),
        (Preset::TwoChains, p(&[("species_a", t("boson")), ("species_b", t("boson"))])),
        (Preset::HubbardTU, p(&[("sites", n(3.0))])),
        (
            Preset::Qutrit,
            p(&[("v01_im", n(0.2)), ("v12_im", n(-0.04))]),
        ),
        (
            Preset::Anderson,
            p(&[
                ("eps_k", ParamValue::List(vec![-1.3, 0.4, 1.1])),
                ("v_kd", ParamValue::List(vec![0.04, -0.06, 0.05])),
                ("v_kd_im", ParamValue::List(vec![0.01, 0.02, -0.03])),
            ]),
        ),
    ];
    for (preset, params) in cases {
        let m = build(preset, &params, &Truncations::new()).unwrap();
        let d = oracle_gap(&m);
        assert!(d < 1e-9, "{} {params:?}: {d:e}", preset.name());
    }
}

#[test]
fn odd_power_has_no_oracle() {
    let m = build(Preset::OneBosonN, &p(&[("power", n(3.0))]), &Truncations::new()).unwrap();
    assert!(m.oracle.is_none());
}

#[test]
fn parameter_errors() {
    let none = Truncations::new();
    let e = build(Preset::Qutrit, &p(&[("E9", n(1.0))]), &none).unwrap_err();
    assert!(matches!(e, Error::UnknownParam { .. }));
    let e = build(Preset::Qutrit, &p(&[("E0", t("x"))]), &none).unwrap_err();
    assert!(matches!(e, Error::BadParam { .. }));
    let e = build(Preset::Qutrit, &p(&[("E0", n(f64::NAN))]), &none).unwrap_err();
    assert!(matches!(e, Error::BadParam { .. }));
    let e = build(Preset::TwoBoson, &p(&[("regime", t("strong"))]), &none).unwrap_err();
    assert!(matches!(e, Error::BadParam { .. }));
    let e = build(Preset::Anderson, &p(&[("v_kd", ParamValue::List(vec![0.1]))]), &none).unwrap_err();
    assert!(matches!(e, Error::BadParam { .. }));

    let small: Truncations = [("a".to_string(), 3)].into();
    let e = build(Preset::OneBosonN, &p(&[("power", n(4.0))]), &small).unwrap_err();
    assert!(matches!(e, Error::TruncationTooSmall { needed: 4, .. }));
    let stray: Truncations = [("z".to_string(), 3)].into();
    let e = build(Preset::JaynesCummings, &Params::new(), &stray).unwrap_err();
    assert!(matches!(e, Error::UnknownFactor(_)));
}

#[test]
fn strong_coupling_warns() {
    let m = build(Preset::Qutrit, &p(&[("v12", n(5.0))]), &Truncations::new()).unwrap();
    assert_eq!(m.warnings.len(), 1);
}

#[test]
fn truncations_resize_bosons() {
    let tr: Truncations = [("a".to_string(), 4)].into();
    let m = build(Preset::JaynesCummings, &Params::new(), &tr).unwrap();
    assert_eq!(m.space.total_dim(), 10);
}

#[test]
fn qutrit_oracle_entries() {
    let m = build_default(Preset::Qutrit).unwrap();
    let o = m.oracle.unwrap();
    let s = 0.05f64.powi(2) / 2.0;
    assert_eq!(o.get(0, 1), re(0.3));
    assert!((o.get(1, 1).re - (1.0 - s)).abs() < 1e-15);
    assert!((o.get(2, 2).re - (3.0 + s)).abs() < 1e-15);
}

#[test]
fn hubbard_operator_identities() {
    let h = hubbard_operators(0.3, -0.7, 2.1).unwrap();
    assert!(h.commutator_residual < 1e-14, "{}", h.commutator_residual);
    assert!(h.identity_residual == 0.0, "{}", h.identity_residual);
    // [H, X_d0] = (eps1 + eps2 + U) X_d0 in the raising direction.
    assert!((h.frequencies[3][0] + (0.3 - 0.7 + 2.1)).abs() < 1e-15);
    assert!((h.frequencies[3][1] + (-0.7 + 2.1)).abs() < 1e-15);
    let d = h.space.index_of(&[1, 1]);
    assert_eq!(h.x[3][0].get(d, 0), re(1.0));
}

#[test]
fn hubbard_decomposition_of_annihilator() {
    let (e1, e2, u) = (0.3, -0.7, 2.1);
    let h = hubbard_operators(e1, e2, u).unwrap();
    let spec = Arc::new(diagonalize(&h.h).unwrap());
    let c1 = crate::operator::build_ladder(&h.space, "c1").unwrap();
    let dec = eigen_decompose(&c1, &spec, 1e-9).unwrap();
    assert_eq!(dec.len(), 2);
    for (w, want) in [(e1, &h.x[0][1]), (e1 + u, &h.x[2][3])] {
        let k = dec.find(w, 1e-9).unwrap();
        assert!(dec.component(k).max_diff(want).unwrap() < 1e-12);
    }
}

#[test]
fn three_boson_components_match_decomposition() {
    let oracle = three_boson_eigenops(&Params::new(), &Truncations::new()).unwrap();
    assert_eq!(oracle.components.len(), 10);
    let spec = Arc::new(diagonalize(&oracle.h0).unwrap());
    let dec = eigen_decompose(&oracle.v, &spec, 1e-9).unwrap();
    assert_eq!(dec.len(), 10);
    for (w, op) in &oracle.components {
        let k = dec.find(*w, 1e-9).unwrap();
        let d = dec.component(k).max_diff(op).unwrap();
        assert!(d < 1e-10, "omega {w}: {d:e}");
    }
    let positive: Vec<f64> = oracle.components.iter().map(|c| c.0).filter(|w| *w > 0.0).collect();
    assert_eq!(positive.len(), 5);
}

#[test]
fn three_boson_zero_coupling_is_empty() {
    let oracle = three_boson_eigenops(&p(&[("g", n(0.0))]), &Truncations::new()).unwrap();
    assert!(oracle.components.is_empty());
    let spec = Arc::new(diagonalize(&oracle.h0).unwrap());
    assert!(eigen_decompose(&oracle.v, &spec, 1e-9).unwrap().is_empty());
}

#[test]
fn three_boson_commensurate_merge() {
    // omega_b = 2 omega_a folds a^dagger^2 b and its adjoint into one
    // zero-frequency component.
    let params = p(&[("omega_a", n(1.0)), ("omega_b", n(2.0)), ("omega_c", n(0.71))]);
    let oracle = three_boson_eigenops(&params, &Truncations::new()).unwrap();
    let merged = oracle.merged(1e-9);
    let spec = Arc::new(diagonalize(&oracle.h0).unwrap());
    let dec = eigen_decompose(&oracle.v, &spec, 1e-9).unwrap();
    assert_eq!(dec.len(), merged.len());
    assert!(merged.len() < oracle.components.len());
    for (w, op) in &merged {
        let k = dec.find(*w, 1e-9).unwrap();
        assert!(dec.component(k).max_diff(op).unwrap() < 1e-10);
    }
}

fn half_filled_singlet_triplet(h: &crate::operator::OperatorMatrix) -> f64 {
    let sp = h.space();
    let idx: Vec<usize> = (0..sp.total_dim())
        .filter(|&i| {
            let lv = sp.levels(i);
            lv.iter().sum::<usize>() == 2 && lv[0] + lv[2] == 1
        })
        .collect();
    let e = eigvalsh(&h.restrict_dense(&idx));
    // S_z = 0 sector: singlet ground state, then the triplet.
    e[1] - e[0]
}

#[test]
fn hubbard_two_site_gap() {
    let (tt, u) = (0.05, 1.0);
    let m = build_default(Preset::HubbardTU).unwrap();
    let blocks = m.block_structure().unwrap();
    let hp = sw_second_order(&m.h0, &m.v, &blocks, None).unwrap().h_prime;
    let want = 4.0 * tt * tt / u;
    let low: Vec<usize> = (0..16)
        .filter(|&i| {
            let lv = m.space.levels(i);
            lv[0] + lv[1] == 1 && lv[2] + lv[3] == 1
        })
        .collect();
    let e = eigvalsh(&hp.restrict_dense(&low));
    assert!((e[1] - e[0] - want).abs() < 1e-12, "{} vs {want}", e[1] - e[0]);
    let exact = half_filled_singlet_triplet(&m.hamiltonian());
    let exact_want = (u.hypot(4.0 * tt) - u) / 2.0;
    assert!((exact - exact_want).abs() < 1e-12);
}

#[test]
fn dirac_upper_block() {
    let m = build_default(Preset::DiracFixedP).unwrap();
    let blocks = m.block_structure().unwrap();
    let hp = transform(&m.h0, &m.v, &blocks, &EngineOptions::default()).unwrap().h_prime;
    let upper = eigvalsh(&hp.restrict_dense(&[0, 1]));
    let want = 1.0 + 0.01 / 2.0 - 0.3;
    for e in upper {
        assert!((e - want).abs() < 1e-12);
    }
}
