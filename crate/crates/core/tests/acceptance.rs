//! Acceptance criteria, one test per criterion.
//!
//! Each test prints a single `criterion NN (...): PASS|FAIL` line (visible
//! with `cargo test -- --nocapture`) and fails the build on FAIL.

use std::process::Command;

use kato_sobolev::grid::make_grid;
use kato_sobolev::sobolev::{derivative, h_norm};
use kato_sobolev::suites::{run_suite, SuiteConfig};
use kato_sobolev::testfields::corpus;
use kato_sobolev::weights::BlockOrder;

fn verdict(num: u32, name: &str, ok: bool) {
    println!(
        "criterion {num:02} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {num:02} ({name}) failed");
}

fn suite_passes(name: &str, cfg: &SuiteConfig) -> bool {
    match run_suite(name, cfg) {
        Ok(doc) => {
            let ok = doc.passed();
            if !ok {
                for c in &doc.cases {
                    eprintln!(
                        "  {}::{} -> {:?} (measured {}, bound {:?})",
                        name, c.name, c.status, c.measured, c.bound
                    );
                }
            }
            ok
        }
        Err(e) => {
            eprintln!("  {name} errored: {e}");
            false
        }
    }
}

fn default_cfg() -> SuiteConfig {
    SuiteConfig::default()
}

#[test]
fn criterion_01_peetre_and_weight_norms() {
    let cfg = SuiteConfig {
        size: Some(10_000),
        ..default_cfg()
    };
    verdict(1, "Peetre margins and weight L1 norms", suite_passes("peetre", &cfg));
}

#[test]
fn criterion_02_convolution_bounds() {
    verdict(
        2,
        "convolution weight bounds over 11 configurations",
        suite_passes("conv-bounds", &default_cfg()),
    );
}

#[test]
fn criterion_03_derivative_identity() {
    let grid = make_grid(&[1], &[128], &[2.0 * std::f64::consts::PI]).unwrap();
    let fields = corpus(&grid, 20, 11, 50).unwrap();
    let s = BlockOrder::isotropic(1.5, 1).unwrap();
    let s1 = s.shift(-1.0);
    let mut worst = 0.0f64;
    for u in &fields {
        let total = h_norm(u, &s).unwrap().powi(2);
        let mut parts = h_norm(u, &s1).unwrap().powi(2);
        parts += h_norm(&derivative(u, 0).unwrap(), &s1).unwrap().powi(2);
        worst = worst.max((total - parts).abs() / total);
    }
    verdict(3, "exact derivative norm identity", worst <= 1e-9);
}

#[test]
fn criterion_04_partition_sums() {
    verdict(
        4,
        "partition of unity sums in 1-D and 2-D",
        suite_passes("partition", &default_cfg()),
    );
}

#[test]
fn criterion_05_decomposition_equivalence() {
    verdict(
        5,
        "almost-orthogonal decomposition bands",
        suite_passes("decomposition", &default_cfg()),
    );
}

#[test]
fn criterion_06_poisson_periodization() {
    verdict(
        6,
        "modulated periodization cosets and theta-Plancherel",
        suite_passes("poisson", &default_cfg()),
    );
}

#[test]
fn criterion_07_retract_identity() {
    verdict(
        7,
        "retract round trip on a 20-field corpus",
        suite_passes("retract", &default_cfg()),
    );
}

#[test]
fn criterion_08_h_equals_k2() {
    verdict(
        8,
        "H^s = K_2^s norm ratio bands under refinement",
        suite_passes("h-eq-k2", &default_cfg()),
    );
}

#[test]
fn criterion_09_window_equivalence_and_p_chain() {
    verdict(
        9,
        "window equivalence band and p-monotone chain",
        suite_passes("kato-equivalence", &default_cfg()),
    );
}

#[test]
fn criterion_10_product_estimates() {
    let ok = suite_passes("product", &default_cfg())
        && suite_passes("kato-product", &default_cfg());
    verdict(10, "Sobolev and Kato product estimates", ok);
}

#[test]
fn criterion_11_mollifier_rates() {
    verdict(
        11,
        "mollifier approximation bound and fitted slope",
        suite_passes("mollifier-rate", &default_cfg()),
    );
}

#[test]
fn criterion_12_calderon_calculus_and_inversion() {
    let ok = suite_passes("calderon", &default_cfg()) && suite_passes("invert", &default_cfg());
    verdict(12, "contour calculus accuracy and Wiener inversion", ok);
}

#[test]
fn criterion_13_chain_rule() {
    verdict(
        13,
        "chain rule residuals",
        suite_passes("chain-rule", &default_cfg()),
    );
}

#[test]
fn criterion_14_division_lemma() {
    verdict(
        14,
        "compactly supported division",
        suite_passes("divide", &default_cfg()),
    );
}

#[test]
fn criterion_15_spectrum_membership() {
    verdict(
        15,
        "joint spectrum membership and Bezout witness",
        suite_passes("spectrum", &default_cfg()),
    );
}

#[test]
fn criterion_16_cli_determinism_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ks");
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("a.json");
    let f2 = dir.path().join("b.json");
    let mut ok = true;
    for f in [&f1, &f2] {
        let st = Command::new(bin)
            .args([
                "verify",
                "peetre",
                "--seed",
                "7",
                "--size",
                "300",
                "--out",
                f.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        ok &= st.success();
    }
    let same = std::fs::read(&f1).unwrap() == std::fs::read(&f2).unwrap();
    if !same {
        eprintln!("  reports for identical seeds differ");
    }
    ok &= same;

    // exit-code contract on the three error fixtures
    let missing = Command::new(bin)
        .args(["norm", "--input", "/no/such/field.ksf", "--s", "1"])
        .output()
        .unwrap();
    let io_code = missing.status.code();
    if io_code != Some(2) {
        eprintln!("  missing input file: expected exit 2, got {io_code:?}");
        ok = false;
    }
    let unknown = Command::new(bin)
        .args(["verify", "no-such-suite"])
        .output()
        .unwrap();
    let usage_code = unknown.status.code();
    if usage_code != Some(3) {
        eprintln!("  unknown suite: expected exit 3, got {usage_code:?}");
        ok = false;
    }
    let under_resolved = Command::new(bin)
        .args(["verify", "calderon", "--quadrature-nodes", "4"])
        .output()
        .unwrap();
    let verify_code = under_resolved.status.code();
    if verify_code != Some(4) {
        eprintln!("  under-resolved contour: expected exit 4, got {verify_code:?}");
        ok = false;
    }
    verdict(16, "CLI determinism and exit codes", ok);
}
