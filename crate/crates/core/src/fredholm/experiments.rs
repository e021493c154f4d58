use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::index::{index_deficiency, index_deficiency_matrix, index_winding};
use crate::error::{QhaError, Result};
use crate::fock::{FockSpec, OperatorMatrix};
use crate::parity::{block_decompose, make_even_with_index, symmetry_class};
use crate::quantize::{toeplitz, QuadratureScheme, SymbolFn};
use crate::report::{Cell, ExperimentReport, Table, Verdict};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexOptions {
    /// Relative singular-value threshold of the deficiency method.
    pub tol: f64,
    /// Section size as a fraction of `D`.
    pub interior: f64,
    pub winding_radius: f64,
    pub winding_samples: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { tol: 1e-8, interior: 0.5, winding_radius: 6.0, winding_samples: 720 }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub name: String,
    pub operator: OperatorMatrix,
    /// Toeplitz members also get the winding cross-check.
    pub toeplitz: bool,
}

/// Builds a named family member: `identity`, `tzp` (`T_{z/|z|}`),
/// `winding:j` (`T_{(z/|z|)^j}`, any integer `j`) or `even:k`
/// (identity on `H_even`, index-`k` shift on `H_odd`).
pub fn build_member(name: &str, spec: &FockSpec, scheme: &QuadratureScheme) -> Result<FamilyMember> {
    let (operator, is_toeplitz) = match name.split_once(':') {
        None if name == "identity" => (OperatorMatrix::identity(spec), true),
        None if name == "tzp" => (toeplitz(&SymbolFn::winding(1), spec, scheme)?, true),
        Some(("winding", j)) => {
            let j: i64 = j.parse().map_err(|_| QhaError::UnknownSymbol(name.to_string()))?;
            (toeplitz(&SymbolFn::winding(j), spec, scheme)?, true)
        }
        Some(("even", k)) => {
            let k: i64 = k.parse().map_err(|_| QhaError::UnknownSymbol(name.to_string()))?;
            (make_even_with_index(k, spec)?, false)
        }
        _ => return Err(QhaError::UnknownSymbol(format!("family member `{name}`"))),
    };
    Ok(FamilyMember { name: name.to_string(), operator, toeplitz: is_toeplitz })
}

pub fn build_family(names: &[String], spec: &FockSpec, scheme: &QuadratureScheme) -> Result<Vec<FamilyMember>> {
    names.iter().map(|n| build_member(n, spec, scheme)).collect()
}

/// Per-member index estimates checked against the even/odd index theorems.
///
/// For every member in symmetry class 0 the indices of the diagonal blocks
/// `A₁₁` (on `H_even`) and `A₂₂` (on `H_odd`) are compared as well.
pub fn index_parity_experiment(members: &[FamilyMember], opts: &IndexOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("index-parity");
    let mut table = Table::new(&[
        "member",
        "class",
        "index_deficiency",
        "index_winding",
        "index_mod_2",
        "block11_index",
        "block22_index",
    ]);
    for member in members {
        let a = &member.operator;
        let class = symmetry_class(a, C64::new(-1.0, 0.0), 2)?
            .ok_or_else(|| QhaError::InvalidSpec(format!("{} is neither even nor odd", member.name)))?;
        let ind = index_deficiency(a, opts.tol, opts.interior)?;
        let winding =
            if member.toeplitz { Some(index_winding(a, opts.winding_radius, opts.winding_samples)?) } else { None };
        let residue = ind.value.rem_euclid(2);
        report.verdict(
            Verdict::holds(format!("{}: index ≡ class (mod 2)", member.name), residue == class as i64)
                .with_detail(format!("class {class}, index {}", ind.value)),
        );
        if let Some(w) = &winding {
            report.verdict(
                Verdict::holds(format!("{}: deficiency index = winding index", member.name), w.value == ind.value)
                    .with_detail(format!("deficiency {}, winding {}", ind.value, w.value)),
            );
        }
        let (mut b11, mut b22) = (Cell::from("n/a"), Cell::from("n/a"));
        if class == 0 {
            let blocks = block_decompose(a);
            let i11 = index_deficiency_matrix(&blocks.a11, opts.tol, opts.interior)?.value;
            let i22 = index_deficiency_matrix(&blocks.a22, opts.tol, opts.interior)?.value;
            report.verdict(
                Verdict::holds(format!("{}: ind(A11) = ind(A22)", member.name), i11 == i22)
                    .with_detail(format!("ind(A11) = {i11}, ind(A22) = {i22}")),
            );
            b11 = i11.into();
            b22 = i22.into();
        }
        table.push(vec![
            member.name.as_str().into(),
            class.into(),
            ind.value.into(),
            winding.as_ref().map_or(Cell::from("n/a"), |w| w.value.into()),
            residue.into(),
            b11,
            b22,
        ]);
    }
    report.table("members", table);
    Ok(report)
}

/// Symmetry class and index modulo `k` for each member, with the sign of
/// the congruence `ind ≡ ±m (mod k)` that the whole family satisfies.
pub fn congruence_experiment(k: usize, members: &[FamilyMember], opts: &IndexOptions) -> Result<ExperimentReport> {
    if k < 2 {
        return Err(QhaError::InvalidSpec("congruence order must be at least 2".into()));
    }
    let theta = C64::from_polar(1.0, 2.0 * PI / k as f64);
    let mut report = ExperimentReport::new(format!("congruence-k{k}"));
    let mut table =
        Table::new(&["member", "class", "index", "index_mod_k", "minus_class_mod_k", "plus_ok", "minus_ok"]);
    let (mut all_plus, mut all_minus) = (true, true);
    for member in members {
        let a = &member.operator;
        let m = symmetry_class(a, theta, k)?
            .ok_or_else(|| QhaError::InvalidSpec(format!("{} has no symmetry class for k = {k}", member.name)))?;
        let ind = index_deficiency(a, opts.tol, opts.interior)?.value;
        let ki = k as i64;
        let r = ind.rem_euclid(ki);
        let plus = r == (m as i64).rem_euclid(ki);
        let minus = r == (-(m as i64)).rem_euclid(ki);
        all_plus &= plus;
        all_minus &= minus;
        table.push(vec![
            member.name.as_str().into(),
            m.into(),
            ind.into(),
            r.into(),
            (-(m as i64)).rem_euclid(ki).into(),
            (plus as usize).into(),
            (minus as usize).into(),
        ]);
    }
    let sign = match (all_plus, all_minus) {
        (true, true) => "both",
        (true, false) => "+m",
        (false, true) => "-m",
        (false, false) => "none",
    };
    report.label("congruence_sign", sign);
    report.scalar("k", k as f64);
    report.verdict(
        Verdict::holds(format!("k = {k}: ind ≡ ±m (mod k) with one sign for all members"), all_plus || all_minus)
            .with_detail(format!("satisfied sign: {sign}")),
    );
    report.table("members", table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_rejects_unknown_members() {
        let s = FockSpec::single(32).unwrap();
        let q = QuadratureScheme::default();
        assert!(build_member("nope", &s, &q).is_err());
        assert!(build_member("even:x", &s, &q).is_err());
        assert!(!build_member("even:2", &s, &q).unwrap().toeplitz);
    }

    #[test]
    fn shift_congruence_sign_for_k3() {
        let s = FockSpec::single(96).unwrap();
        let q = QuadratureScheme::default();
        let names: Vec<String> = ["tzp", "winding:2", "winding:-1", "identity"].iter().map(|s| s.to_string()).collect();
        let fam = build_family(&names, &s, &q).unwrap();
        let r = congruence_experiment(3, &fam, &IndexOptions::default()).unwrap();
        assert_eq!(r.labels["congruence_sign"], "-m");
        assert!(r.passed());
    }
}
