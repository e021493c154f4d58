//! One function per subcommand. Each builds its inputs from the config,
//! runs the core routines and returns a report with verdicts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use clap::ValueEnum;
use nalgebra::DMatrix;
use qha_core::fock::{
    ccr_defect, op_norm, parity, tensor_product, weyl_operator, FockSpec, FockVector, OperatorMatrix, PhasePoint,
};
use qha_core::fredholm::{
    build_family, build_member, congruence_experiment, index_deficiency, index_parity_experiment, index_winding,
};
use qha_core::parity::{
    block_decompose, continuity_modulus, even_odd_split, intersection_probe, localization_profile, ContinuityMode,
};
use qha_core::phase::experiments::{
    convention_audit, delta_parity_experiment, fop_experiment, ideal_membership_suite, parity_conjugation_check,
    roundtrip_experiment, twisted_experiment,
};
use qha_core::phase::{weyl_symbol, ConventionParams, Grid, GridSymbol};
use qha_core::quantize::{shift_weight, toeplitz, SymbolFn};
use qha_core::report::{Cell, ExperimentReport, Table, Verdict};
use qha_core::C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliResult, Context};
use crate::families::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Experiment {
    CcrCheck,
    ParityCheck,
    ToeplitzShift,
    EvenOdd,
    Index,
    IndexParity,
    Congruence,
    ModulationScan,
    LocalizationScan,
    IntersectionProbe,
    FourierRoundtrip,
    FopIdentity,
    TwistedConv,
    DeltaParity,
    ParityConjugation,
    IdealSuite,
    ConventionAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 17] = [
        Experiment::CcrCheck,
        Experiment::ParityCheck,
        Experiment::ToeplitzShift,
        Experiment::EvenOdd,
        Experiment::Index,
        Experiment::IndexParity,
        Experiment::Congruence,
        Experiment::ModulationScan,
        Experiment::LocalizationScan,
        Experiment::IntersectionProbe,
        Experiment::FourierRoundtrip,
        Experiment::FopIdentity,
        Experiment::TwistedConv,
        Experiment::DeltaParity,
        Experiment::ParityConjugation,
        Experiment::IdealSuite,
        Experiment::ConventionAudit,
    ];

    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Fixed conventions of the Fock model plus the configured Fourier constants.
pub fn convention_ledger(conv: &ConventionParams) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("symplectic_form".into(), json!("σ(z, w) = Im(z·w̄)"));
    m.insert("weyl_relation".into(), json!("W_z W_w = e^{−iσ(z,w)/2} W_{z+w}"));
    m.insert("weyl_parameter".into(), json!("W_z = exp(α a† − ᾱ a), α = z̄/√2"));
    m.insert("basis".into(), json!("e_m = z^m / √(2^m m!)"));
    m.insert("fock_measure".into(), json!("(2π)^{-n} e^{-|z|²/2} dz"));
    m.insert("fourier_weyl".into(), json!("F_W(A)(ξ) = Tr(A W_{−ξ})"));
    m.insert("symplectic_fourier".into(), json!("F_σ f(z) = c_σ ∫ f(w) e^{i s σ(w,z)} dw"));
    m.insert("twisted_convolution".into(), json!("(f ∗σ g)(ξ) = c_t ∫ f(ξ−w) g(w) e^{i t σ(ξ,w)} dw"));
    m.insert("synthesis".into(), json!("F_W⁻¹ f = c_H ∫ f(ξ) W_ξ dξ"));
    m.insert("params".into(), serde_json::to_value(conv).expect("plain struct"));
    m
}

/// Runs one experiment with the config echo, convention ledger and wall time filled in.
pub fn run(exp: Experiment, cfg: &Config) -> CliResult<ExperimentReport> {
    let conv = cfg.convention.resolve()?;
    let start = Instant::now();
    let name = exp.name();
    let mut report = match exp {
        Experiment::CcrCheck => ccr_check(cfg),
        Experiment::ParityCheck => parity_check(cfg),
        Experiment::ToeplitzShift => toeplitz_shift(cfg),
        Experiment::EvenOdd => even_odd(cfg),
        Experiment::Index => index(cfg),
        Experiment::IndexParity => index_parity(cfg),
        Experiment::Congruence => congruence(cfg),
        Experiment::ModulationScan => modulation_scan(cfg),
        Experiment::LocalizationScan => localization_scan(cfg),
        Experiment::IntersectionProbe => intersection(cfg),
        Experiment::FourierRoundtrip => fourier_roundtrip(cfg, &conv),
        Experiment::FopIdentity => fop_identity(cfg, &conv),
        Experiment::TwistedConv => twisted(cfg, &conv),
        Experiment::DeltaParity => delta_parity(cfg, &conv),
        Experiment::ParityConjugation => parity_conjugation(cfg, &conv),
        Experiment::IdealSuite => ideal_suite(cfg, &conv),
        Experiment::ConventionAudit => audit(cfg, &conv),
    }
    .during(&name)?;
    report.experiment = name;
    report.config = serde_json::to_value(cfg).expect("config serializes");
    let mut ledger = convention_ledger(&conv);
    ledger.append(&mut report.conventions);
    report.conventions = ledger;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn runtime_verdict(start: Instant, budget: f64) -> Verdict {
    Verdict::below("runtime (s)", start.elapsed().as_secs_f64(), budget)
}

type CoreResult<T> = qha_core::Result<T>;

fn ccr_check(cfg: &Config) -> CoreResult<ExperimentReport> {
    let start = Instant::now();
    let c = &cfg.ccr;
    let mut r = families::rng(cfg.seed, stream::CCR);
    let pairs: Vec<(PhasePoint, PhasePoint)> = (0..c.pairs)
        .map(|_| {
            let z = families::disc_point(&mut r, c.radius);
            let w = families::disc_point(&mut r, c.radius);
            (PhasePoint::single(z), PhasePoint::single(w))
        })
        .collect();
    let mut report = ExperimentReport::new("ccr-check");
    let mut per_dim = Vec::new();
    for &d in &c.dims {
        let spec = FockSpec::single(d)?;
        let defects: Vec<f64> =
            pairs.par_iter().map(|(z, w)| ccr_defect(z, w, &spec, c.block)).collect::<CoreResult<_>>()?;
        let worst = defects.iter().copied().fold(0.0, f64::max);
        report.scalar(format!("max_defect_d{d}"), worst).verdict(Verdict::below(
            format!("max CCR defect on the {}-block at D = {d}", c.block),
            worst,
            c.tol,
        ));
        per_dim.push(defects);
    }
    for (k, w) in c.dims.windows(2).enumerate() {
        let (prev, next) = (&per_dim[k], &per_dim[k + 1]);
        let violations = prev.iter().zip(next).filter(|(p, n)| **n > p.max(c.noise_floor)).count();
        report.verdict(
            Verdict::holds(format!("defect does not grow from D = {} to D = {}", w[0], w[1]), violations == 0)
                .with_detail(format!(
                    "{violations} of {} pairs grew above the {:.0e} floor",
                    prev.len(),
                    c.noise_floor
                )),
        );
    }
    let mut cols: Vec<String> = vec!["pair".into(), "abs_z".into(), "abs_w".into()];
    cols.extend(c.dims.iter().map(|d| format!("defect_d{d}")));
    let mut table = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, (z, w)) in pairs.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into(), z.norm().into(), w.norm().into()];
        row.extend(per_dim.iter().map(|d| Cell::from(d[i])));
        table.push(row);
    }
    report.table("pairs", table).verdict(runtime_verdict(start, c.time_budget_s));
    Ok(report)
}

fn parity_check(cfg: &Config) -> CoreResult<ExperimentReport> {
    let start = Instant::now();
    let c = &cfg.parity_check;
    let mut r = families::rng(cfg.seed, stream::PARITY);
    let points = families::disc_points(&mut r, c.samples, c.radius);
    let mut report = ExperimentReport::new("parity-check");
    let mut table = Table::new(&["dim", "sample", "abs_z", "defect"]);
    for &d in &c.dims {
        let spec = FockSpec::single(d)?;
        let u = parity(&spec);
        let defects: Vec<f64> = points
            .par_iter()
            .map(|z| {
                let lhs = &weyl_operator(z, &spec) * &u;
                let rhs = &u * &weyl_operator(&z.neg(), &spec);
                op_norm(&(lhs.entries - rhs.entries))
            })
            .collect();
        for (i, (z, v)) in points.iter().zip(&defects).enumerate() {
            table.push(vec![d.into(), i.into(), z.norm().into(), (*v).into()]);
        }
        let worst = defects.iter().copied().fold(0.0, f64::max);
        report.scalar(format!("max_defect_d{d}"), worst).verdict(Verdict::below(
            format!("‖W_z U − U W_{{−z}}‖ at D = {d}"),
            worst,
            c.tol,
        ));
    }
    report.table("samples", table).verdict(runtime_verdict(start, c.time_budget_s));
    Ok(report)
}

fn toeplitz_shift(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.toeplitz_shift;
    let spec = FockSpec::single(c.dim)?;
    let t = toeplitz(&SymbolFn::winding(1), &spec, &cfg.quadrature)?;
    let mut table = Table::new(&["m", "alpha_re", "alpha_im", "closed_form", "abs_diff"]);
    let mut worst = 0.0f64;
    for m in 0..=c.max_m {
        let a = t.entries[(m + 1, m)];
        let exact = shift_weight(m);
        let diff = (a - exact).norm();
        worst = worst.max(diff);
        table.push(vec![m.into(), a.re.into(), a.im.into(), exact.into(), diff.into()]);
    }
    let mut off = 0.0f64;
    for l in 0..c.dim {
        for m in 0..c.dim {
            if l != m + 1 {
                off = off.max(t.entries[(l, m)].norm());
            }
        }
    }
    let a0 = t.entries[(1, 0)];
    let alast = t.entries[(c.max_m + 1, c.max_m)];
    let mut report = ExperimentReport::new("toeplitz-shift");
    report
        .scalar("alpha_0", a0.re)
        .scalar(format!("alpha_{}", c.max_m), alast.re)
        .table("weights", table)
        .verdict(Verdict::below(format!("α_m matches Γ(m+3/2)/√(m!(m+1)!) for m ≤ {}", c.max_m), worst, c.tol))
        .verdict(
            Verdict::near("α₀ = √π/2", a0.norm(), PI.sqrt() / 2.0, c.alpha0_tol)
                .with_detail(format!("imaginary part {:.2e}", a0.im)),
        )
        .verdict(Verdict::below("largest entry off the subdiagonal", off, c.off_shift_tol))
        .verdict(Verdict::near(format!("α_{} → 1", c.max_m), alast.norm(), 1.0, c.limit_tol));
    Ok(report)
}

fn even_odd(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.even_odd;
    let spec = FockSpec::single(c.dim)?;
    let u = parity(&spec);
    let mut report = ExperimentReport::new("even-odd");
    let mut table = Table::new(&["operator", "reconstruction", "even_symmetry", "odd_symmetry", "even_offdiag_blocks"]);
    let mut ops: Vec<(String, OperatorMatrix)> =
        vec![("parity".into(), u.clone()), ("tzp".into(), toeplitz(&SymbolFn::winding(1), &spec, &cfg.quadrature)?)];
    let mut r = families::rng(cfg.seed, stream::EVEN_ODD);
    for i in 0..c.samples {
        ops.push((format!("random-{i}"), families::dense_operator(&mut r, &spec)));
    }
    let (mut worst_rec, mut worst_sym, mut worst_blocks) = (0.0f64, 0.0f64, 0.0f64);
    for (name, a) in &ops {
        let s = even_odd_split(a);
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        let rec = s.residual / scale;
        let ue = &(&u * &s.even_part) * &u;
        let uo = &(&u * &s.odd_part) * &u;
        let even_sym = (ue.entries - &s.even_part.entries).norm() / scale;
        let odd_sym = (uo.entries + &s.odd_part.entries).norm() / scale;
        let b = block_decompose(&s.even_part);
        let blocks = (b.a12.norm() + b.a21.norm()) / scale;
        worst_rec = worst_rec.max(rec);
        worst_sym = worst_sym.max(even_sym).max(odd_sym);
        worst_blocks = worst_blocks.max(blocks);
        table.push(vec![name.as_str().into(), rec.into(), even_sym.into(), odd_sym.into(), blocks.into()]);
    }
    let parity_split = even_odd_split(&u);
    let tzp_split = even_odd_split(&ops[1].1);
    report
        .table("operators", table)
        .verdict(Verdict::below("even + odd reconstructs A (relative)", worst_rec, c.reconstruction_tol))
        .verdict(Verdict::below("U·even·U = even and U·odd·U = −odd (relative)", worst_sym, c.tol))
        .verdict(Verdict::below("off-diagonal blocks of the even part vanish", worst_blocks, c.tol))
        .verdict(Verdict::below("odd part of U", parity_split.odd_part.frobenius_norm(), c.tol))
        .verdict(Verdict::below("even part of T_{z/|z|}", tzp_split.even_part.frobenius_norm(), 1e-10));
    Ok(report)
}

fn index(cfg: &Config) -> CoreResult<ExperimentReport> {
    let start = Instant::now();
    let c = &cfg.index;
    let mut report = ExperimentReport::new("index");
    let mut table = Table::new(&["dim", "deficiency", "winding", "kernel", "cokernel", "band_lower", "band_upper"]);
    let mut values = Vec::new();
    for &d in &c.dims {
        let spec = FockSpec::single(d)?;
        let member = build_member(&c.member, &spec, &cfg.quadrature)?;
        let def = index_deficiency(&member.operator, c.options.tol, c.options.interior)?;
        let win = index_winding(&member.operator, c.options.winding_radius, c.options.winding_samples)?;
        let sec = def.section.as_ref().expect("deficiency estimates carry section data");
        table.push(vec![
            d.into(),
            def.value.into(),
            win.value.into(),
            sec.kernel_dim.into(),
            sec.cokernel_dim.into(),
            sec.band.lower.into(),
            sec.band.upper.into(),
        ]);
        report.verdict(
            Verdict::holds(format!("D = {d}: deficiency index = winding index"), def.value == win.value)
                .with_detail(format!("deficiency {}, winding {}", def.value, win.value)),
        );
        if let Some(e) = c.expected {
            report.verdict(
                Verdict::holds(format!("D = {d}: index = {e}"), def.value == e && win.value == e)
                    .with_detail(format!("deficiency {}, winding {}", def.value, win.value)),
            );
        }
        values.push(def.value);
    }
    let stable = values.windows(2).all(|w| w[0] == w[1]);
    report
        .label("member", c.member.clone())
        .table("dims", table)
        .verdict(Verdict::holds("index is stable across truncations", stable).with_detail(format!("{values:?}")))
        .verdict(runtime_verdict(start, c.time_budget_s));
    Ok(report)
}

fn index_parity(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.index_parity;
    let spec = FockSpec::single(c.dim)?;
    let fam = build_family(&c.members, &spec, &cfg.quadrature)?;
    index_parity_experiment(&fam, &c.options)
}

fn congruence(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.congruence;
    let spec = FockSpec::single(c.dim)?;
    let mut report = ExperimentReport::new("congruence");
    let mut signs = Vec::new();
    for f in &c.families {
        let fam = build_family(&f.members, &spec, &cfg.quadrature)?;
        let sub = congruence_experiment(f.order, &fam, &c.options)?;
        let sign = sub.labels.get("congruence_sign").cloned().unwrap_or_default();
        report.label(format!("congruence_sign_k{}", f.order), sign.clone());
        signs.push(format!("k = {}: {sign}", f.order));
        for (name, t) in sub.tables {
            report.table(format!("{name}_k{}", f.order), t);
        }
        report.verdicts.extend(sub.verdicts);
    }
    report.label("summary", signs.join("; "));
    Ok(report)
}

fn modulation_scan(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.modulation;
    let spec = FockSpec::single(c.dim)?;
    let u = parity(&spec);
    let modulation = continuity_modulus(&u, ContinuityMode::Modulation, None, &c.radii, c.directions)?;
    let shift = continuity_modulus(&u, ContinuityMode::Shift, None, &[c.shift_radius], c.directions)?;
    let worst_mod = modulation.moduli.iter().copied().fold(0.0, f64::max);
    let shift_mod = shift.moduli[0];
    // rounding floor so an exactly vanishing modulus still gives a finite ratio
    let contrast = shift_mod / worst_mod.max(f64::EPSILON);

    // U·C₁ = C₋₁: the modulation modulus of U·A equals the shift modulus of A
    let vac = OperatorMatrix::matrix_unit(&spec, 0, 0);
    let probe = families::interior_family(cfg.seed, stream::EVEN_ODD, &spec, 1, 6, 3).remove(0);
    let mut witness = 0.0f64;
    for a in [&vac, &probe] {
        let ua = &u * a;
        let m = continuity_modulus(&ua, ContinuityMode::Modulation, None, &c.radii, c.directions)?;
        let s = continuity_modulus(a, ContinuityMode::Shift, None, &c.radii, c.directions)?;
        for (x, y) in m.moduli.iter().zip(&s.moduli) {
            witness = witness.max((x - y).abs());
        }
    }

    let mut table = Table::new(&["radius", "modulation_modulus", "weyl_truncation"]);
    for i in 0..c.radii.len() {
        table.push(vec![c.radii[i].into(), modulation.moduli[i].into(), modulation.weyl_truncation[i].into()]);
    }
    let mut report = ExperimentReport::new("modulation-scan");
    report
        .scalar("max_modulation_modulus", worst_mod)
        .scalar("shift_modulus", shift_mod)
        .scalar("contrast", contrast)
        .table("modulation", table)
        .verdict(Verdict::below("‖W_z U W_z − U‖ over sampled |z| ≤ 1", worst_mod, c.modulation_tol))
        .verdict(Verdict::above(format!("‖W_z U W_z* − U‖ at |z| = {}", c.shift_radius), shift_mod, c.shift_min))
        .verdict(Verdict::above("shift / modulation contrast for U", contrast, c.contrast_min))
        .verdict(Verdict::below("modulation modulus of U·A = shift modulus of A", witness, 1e-8));
    if shift.truncation_dominated.iter().any(|&b| b) {
        report.warn("shift modulus of U is within 10× of the Weyl truncation error");
    }
    Ok(report)
}

fn localization_scan(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.localization;
    let spec = FockSpec::single(c.dim)?;
    let e0 = FockVector::basis(&spec, 0);
    let e1 = FockVector::basis(&spec, 1);
    let a = C64::new(c.coherent_center[0], c.coherent_center[1]);
    let ka = qha_core::fock::coherent_state(&PhasePoint::single(a), &spec)?.vector;
    let a2 = a.norm_sqr();
    // closed forms from |⟨k_z, e_m⟩| = e^{−r²/4} r^m/√(2^m m!) and |⟨k_z, k_w⟩| = e^{−|z−w|²/4}
    type Oracle = Box<dyn Fn(f64) -> f64>;
    let family: Vec<(&str, OperatorMatrix, Oracle)> = vec![
        ("e0 e0*", e0.outer(&e0), Box::new(|r: f64| (-r * r / 2.0).exp())),
        ("e0 e1*", e0.outer(&e1), Box::new(|r: f64| r * (-r * r / 2.0).exp() / 2f64.sqrt())),
        ("e1 e0*", e1.outer(&e0), Box::new(|r: f64| r * (-r * r / 2.0).exp() / 2f64.sqrt())),
        ("k_a k_a*", ka.outer(&ka), Box::new(move |r: f64| (-(r * r + a2) / 2.0).exp())),
        ("identity", OperatorMatrix::identity(&spec), Box::new(|r: f64| (-r * r).exp())),
    ];
    let mut report = ExperimentReport::new("localization-scan");
    let mut table = Table::new(&["operator", "radius", "profile", "oracle"]);
    for (name, op, oracle) in &family {
        let prof = localization_profile(op, &c.radii, c.directions)?;
        let mut err = 0.0f64;
        for (&r, &p) in c.radii.iter().zip(&prof) {
            let o = oracle(r);
            err = err.max((p - o).abs());
            table.push(vec![(*name).into(), r.into(), p.into(), o.into()]);
        }
        let tail: Vec<f64> =
            c.radii.iter().zip(&prof).filter(|(&r, _)| r >= c.monotone_from).map(|(_, &p)| p).collect();
        let monotone = tail.windows(2).all(|w| w[1] < w[0]);
        report
            .verdict(Verdict::below(format!("{name}: profile matches closed form"), err, c.tol))
            .verdict(Verdict::holds(format!("{name}: profile decreases beyond |z| = {}", c.monotone_from), monotone));
    }
    report.table("profiles", table);
    Ok(report)
}

fn intersection(cfg: &Config) -> CoreResult<ExperimentReport> {
    let c = &cfg.intersection;
    let factor = FockSpec::single(c.factor_dim)?;
    let k = OperatorMatrix::matrix_unit(&factor, 0, 0);
    let b = toeplitz(&SymbolFn::from_name(&c.b_symbol)?, &factor, &cfg.quadrature)?;
    let a = tensor_product(&k, &b)?;
    let control = tensor_product(&OperatorMatrix::identity(&factor), &OperatorMatrix::identity(&factor))?;
    let theta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
    let probe =
        intersection_probe(&a, std::slice::from_ref(&theta), &c.v_radii, c.v_directions, &c.w_radii, c.w_directions)?;
    let ctrl = intersection_probe(&control, &[theta], &c.v_radii, c.v_directions, &c.w_radii, c.w_directions)?;

    let env0 = probe.envelope[0].max(f64::MIN_POSITIVE);
    let at = c
        .v_radii
        .iter()
        .position(|&r| r >= c.decay_radius)
        .ok_or_else(|| qha_core::QhaError::InvalidSpec("intersection.decay_radius beyond v_radii".into()))?;
    let ratio = probe.envelope[at] / env0;
    // K = e₀e₀* factorizes the Berezin transform: Ã(v + w) = e^{−|v|²/2}·B̃(w)
    let oracle_err = c
        .v_radii
        .iter()
        .zip(&probe.envelope)
        .map(|(&r, &e)| (e / env0 - (-r * r / 2.0).exp()).abs())
        .fold(0.0, f64::max);
    let flat = probe.w_variation.iter().copied().fold(0.0, f64::max);
    let cmax = ctrl.envelope.iter().copied().fold(0.0, f64::max);
    let cmin = ctrl.envelope.iter().copied().fold(f64::INFINITY, f64::min);
    let control_spread = (cmax - cmin) / cmax.max(f64::MIN_POSITIVE);

    let mut table = Table::new(&["v_radius", "envelope", "w_variation", "control_envelope"]);
    for i in 0..c.v_radii.len() {
        table.push(vec![
            c.v_radii[i].into(),
            probe.envelope[i].into(),
            probe.w_variation[i].into(),
            ctrl.envelope[i].into(),
        ]);
    }
    let mut report = ExperimentReport::new("intersection-probe");
    report
        .label("v0_factors", format!("{:?}", probe.split.v0))
        .label("v0_perp_factors", format!("{:?}", probe.split.v0_perp))
        .scalar("tail_violations", probe.tail_violations as f64)
        .scalar("control_tail_violations", ctrl.tail_violations as f64)
        .scalar("max_tail", probe.max_tail.max(ctrl.max_tail))
        .table("envelope", table)
        .verdict(Verdict::below(
            format!("envelope at |v| = {} relative to |v| = 0", c.v_radii[at]),
            ratio,
            c.decay_ratio,
        ))
        .verdict(Verdict::below("envelope matches e^{−|v|²/2} (factorized oracle)", oracle_err, 1e-6))
        .verdict(Verdict::below("variation along V₀^⊥", flat, c.flat_tol))
        .verdict(Verdict::below("I ⊗ I envelope spread", control_spread, c.control_tol));
    if probe.tail_violations + ctrl.tail_violations > 0 {
        report.warn(format!(
            "{} Berezin samples exceed the coherent-state tail tolerance (largest tail {:.2e}); \
             the rank-one factor only reads the vacuum coefficient, which is exact",
            probe.tail_violations + ctrl.tail_violations,
            probe.max_tail.max(ctrl.max_tail)
        ));
    }
    Ok(report)
}

fn phase_spec(cfg: &Config) -> CoreResult<FockSpec> {
    FockSpec::single(cfg.phase.dim)
}

fn phase_family(cfg: &Config, spec: &FockSpec) -> Vec<OperatorMatrix> {
    let p = &cfg.phase;
    families::interior_family(cfg.seed, stream::ROUNDTRIP, spec, p.family_size, p.support, p.max_rank)
}

fn fourier_roundtrip(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let start = Instant::now();
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.phase.points)?;
    let mut report = roundtrip_experiment(&phase_family(cfg, &spec), grid, conv, cfg.phase.roundtrip_tol)?;
    report.verdict(runtime_verdict(start, cfg.phase.time_budget_s));
    Ok(report)
}

fn fop_identity(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let start = Instant::now();
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.phase.points)?;
    let mut report = fop_experiment(&phase_family(cfg, &spec), grid, conv, &cfg.fop.options)?;
    report.verdict(runtime_verdict(start, cfg.fop.time_budget_s));
    Ok(report)
}

fn twisted(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let t = &cfg.twisted;
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, t.points)?;
    let ops = families::interior_family(cfg.seed, stream::TWISTED, &spec, 2 * t.pairs, t.support, t.max_rank);
    let pairs: Vec<_> = ops.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
    twisted_experiment(&pairs, grid, conv, t.tol, t.vacuum_tol)
}

fn delta_parity(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.delta.points)?;
    delta_parity_experiment(&spec, grid, conv, &cfg.delta.options)
}

fn parity_conjugation(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let c = &cfg.parity_conjugation;
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.phase.points)?;
    let mut r = families::rng(cfg.seed, stream::CONJUGATION);
    let symbols: Vec<GridSymbol> =
        (0..c.symbols).map(|_| families::smooth_symbol(&mut r, grid, c.bumps, c.max_center, c.width)).collect();
    parity_conjugation_check(&symbols, &spec, conv, c.tol)
}

fn ideal_suite(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let c = &cfg.ideal;
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.phase.points)?;
    let mut r = families::rng(cfg.seed, stream::IDEAL);
    // e^{−a|z|²} is mapped to a multiple of itself by F_σ when a = |s|/2
    let width = 2.0 / conv.fourier_phase_scale.abs();
    let mut symbols = Vec::new();
    for _ in 0..c.bumps {
        let centre = families::disc_point(&mut r, 1.5);
        symbols.push(GridSymbol::sample(
            grid,
            move |z| C64::new((-(z - centre).norm_sqr() / width).exp(), 0.0),
            "bump",
        ));
    }
    for row in [true, false] {
        for _ in 0..c.derived {
            let mut a = families::interior_operator(&mut r, &spec, c.support, c.max_rank);
            families::clear_vacuum_line(&mut a, row);
            let mut f = weyl_symbol(&a, grid, conv)?;
            f.provenance = format!("symbol of an operator with zero first {}", if row { "row" } else { "column" });
            symbols.push(f);
        }
    }
    ideal_membership_suite(&symbols, &spec, conv, &c.options)
}

fn audit(cfg: &Config, conv: &ConventionParams) -> CoreResult<ExperimentReport> {
    let spec = phase_spec(cfg)?;
    let grid = Grid::new(cfg.phase.extent, cfg.phase.points)?;
    let mut probes = vec![OperatorMatrix::matrix_unit(&spec, 0, 0)];
    probes.extend(families::interior_family(
        cfg.seed,
        stream::AUDIT,
        &spec,
        cfg.audit.probes,
        cfg.phase.support,
        cfg.phase.max_rank,
    ));
    let (selected, mut report) = convention_audit(&probes, grid, conv, &cfg.audit.options)?;
    report.conventions.insert("audited".into(), serde_json::to_value(&selected).expect("plain struct"));
    Ok(report)
}
