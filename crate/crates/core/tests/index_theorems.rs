use qha_core::fock::{parity, parity_rotation, FockSpec};
use qha_core::fredholm::{
    band_profile, build_family, index_deficiency, index_parity_experiment, index_winding, IndexOptions,
};
use qha_core::parity::{block_decompose, symmetry_class};
use qha_core::quantize::{toeplitz, QuadratureScheme, SymbolFn};
use qha_core::C64;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn winding_powers_have_matching_indices() {
    let spec = FockSpec::single(200).unwrap();
    let q = QuadratureScheme::default();
    for j in 1..=3i64 {
        let t = toeplitz(&SymbolFn::winding(j), &spec, &q).unwrap();
        let band = band_profile(&t.entries, 1e-10).unwrap();
        assert_eq!((band.lower, band.upper), (j as usize, 0));
        assert_eq!(index_deficiency(&t, 1e-8, 0.5).unwrap().value, -j);
        assert_eq!(index_winding(&t, 6.0, 720).unwrap().value, -j);
    }
}

#[test]
fn index_is_stable_under_doubling_and_unitary_factors() {
    let q = QuadratureScheme::default();
    for d in [200, 400] {
        let spec = FockSpec::single(d).unwrap();
        let t = toeplitz(&SymbolFn::winding(1), &spec, &q).unwrap();
        assert_eq!(index_deficiency(&t, 1e-8, 0.5).unwrap().value, -1);
        let tu = &t * &parity(&spec);
        assert_eq!(index_deficiency(&tu, 1e-8, 0.5).unwrap().value, -1);
        let rot = parity_rotation(&[C64::from_polar(1.0, 0.7)], &spec).unwrap();
        assert_eq!(index_deficiency(&(&t * &rot), 1e-8, 0.5).unwrap().value, -1);
    }
}

#[test]
fn even_toeplitz_blocks_share_an_index() {
    let spec = FockSpec::single(200).unwrap();
    let t = toeplitz(&SymbolFn::winding(2), &spec, &QuadratureScheme::default()).unwrap();
    assert_eq!(symmetry_class(&t, C64::new(-1.0, 0.0), 2).unwrap(), Some(0));
    let b = block_decompose(&t);
    assert!(b.a12.norm() < 1e-12 && b.a21.norm() < 1e-12);
    let opts = IndexOptions::default();
    let i11 = qha_core::fredholm::index_deficiency_matrix(&b.a11, opts.tol, opts.interior).unwrap().value;
    let i22 = qha_core::fredholm::index_deficiency_matrix(&b.a22, opts.tol, opts.interior).unwrap().value;
    assert_eq!((i11, i22), (-1, -1));
}

#[test]
fn constructed_even_operator_separates_block_indices() {
    // identity on H_even with an index-k odd block: the block indices are 0 and k
    let spec = FockSpec::single(200).unwrap();
    let fam = build_family(&names(&["even:-2", "even:2"]), &spec, &QuadratureScheme::default()).unwrap();
    let report = index_parity_experiment(&fam, &IndexOptions::default()).unwrap();
    let table = &report.tables["members"];
    let idx: Vec<_> = table.rows.iter().map(|r| r[2].clone()).collect();
    assert_eq!(idx, vec![(-2i64).into(), 2i64.into()]);
    let parity_ok = report.verdicts.iter().filter(|v| v.name.contains("(mod 2)")).all(|v| v.passed);
    assert!(parity_ok);
    let blocks_equal = report.verdicts.iter().filter(|v| v.name.contains("A11")).any(|v| v.passed);
    assert!(!blocks_equal);
}
