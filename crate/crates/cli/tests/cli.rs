use std::path::Path;
use std::process::{Command, Output};

fn qha(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qha")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn toeplitz_shift_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = qha(&["toeplitz-shift", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("toeplitz-shift.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "toeplitz-shift");
    assert!(json["conventions"]["params"]["haar_normalization"].is_number());
    assert!(json["config"]["toeplitz_shift"]["max_m"] == 40);
    let csv = std::fs::read_to_string(out.join("toeplitz-shift_weights.csv")).unwrap();
    assert!(csv.starts_with("m,alpha_re,alpha_im,closed_form,abs_diff"));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn config_errors_name_the_field_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[ccr]\npairs = 50\nradiuss = 1.5\n");
    let o = qha(&["ccr-check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ccr") && err.contains("radiuss"), "{err}");
}

#[test]
fn failed_verdicts_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tight.toml", "[ccr]\ntol = 1e-20\n");
    let o = qha(&["ccr-check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn seed_flag_changes_the_family_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = qha(&["parity-check", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("parity-check_samples.csv")).unwrap()
    };
    let (a, b, c) = (read("1", "a"), read("1", "b"), read("2", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn halved_dimension_keeps_the_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "half.toml", "[phase]\ndim = 24\nfamily_size = 5\n");
    let o = qha(&["fourier-roundtrip", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let o = qha(&["frobnicate"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("suite"));
}
