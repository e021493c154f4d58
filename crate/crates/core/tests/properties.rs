use nalgebra::DMatrix;
use proptest::prelude::*;
use qha_core::fock::{
    ccr_defect, coherent_state, parity, weyl_elements, weyl_operator, FockSpec, FockVector, OperatorMatrix, PhasePoint,
};
use qha_core::parity::{block_decompose, even_odd_split};
use qha_core::C64;

fn disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(u, t)| C64::from_polar(r * u.sqrt(), t))
}

fn operator(d: usize) -> impl Strategy<Value = OperatorMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        let e = DMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| C64::new(re, im)));
        OperatorMatrix::new(FockSpec::single(d).unwrap(), e).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weyl_relation_holds_on_the_interior_block(z in disc(1.5), w in disc(1.5)) {
        let spec = FockSpec::single(64).unwrap();
        let d = ccr_defect(&PhasePoint::single(z), &PhasePoint::single(w), &spec, 32).unwrap();
        prop_assert!(d < 1e-8, "defect {d}");
    }

    #[test]
    fn parity_intertwines_opposite_shifts(z in disc(2.0)) {
        let spec = FockSpec::single(48).unwrap();
        let u = parity(&spec);
        let lhs = &weyl_operator(&PhasePoint::single(z), &spec) * &u;
        let rhs = &u * &weyl_operator(&PhasePoint::single(-z), &spec);
        prop_assert!((lhs.entries - rhs.entries).norm() < 1e-12);
    }

    #[test]
    fn truncated_and_exact_weyl_elements_agree_on_a_block(z in disc(1.5)) {
        let w = weyl_operator(&PhasePoint::single(z), &FockSpec::single(64).unwrap());
        let exact = weyl_elements(z, 16, 16);
        prop_assert!((w.block(16) - exact).norm() < 1e-10);
    }

    #[test]
    fn weyl_maps_vacuum_to_coherent_state(z in disc(1.5)) {
        let spec = FockSpec::single(64).unwrap();
        let p = PhasePoint::single(z);
        let k = coherent_state(&p, &spec).unwrap().vector;
        let w0 = weyl_operator(&p, &spec).apply(&FockVector::basis(&spec, 0));
        let gap: f64 = (0..32).map(|m| (w0.coeffs[m] - k.coeffs[m]).norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-10);
    }

    #[test]
    fn even_odd_parts_reassemble_and_respect_parity(a in operator(9)) {
        let s = even_odd_split(&a);
        let u = parity(&a.spec);
        prop_assert!(s.residual < 1e-14);
        prop_assert!((&(&u * &s.even_part) * &u).entries == s.even_part.entries);
        prop_assert!(((&(&u * &s.odd_part) * &u).entries + &s.odd_part.entries).norm() == 0.0);
        let b = block_decompose(&s.even_part);
        prop_assert!(b.a12.norm() == 0.0 && b.a21.norm() == 0.0);
    }
}
