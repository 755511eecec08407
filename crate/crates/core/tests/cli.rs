//! End-to-end checks of the `ks` binary against library values.

use std::process::Command;

use num_complex::Complex64;
use kato_sobolev::grid::{make_grid, sample};
use kato_sobolev::io::field_write;
use kato_sobolev::kato::{kato_norm, KatoNormSpec, PNorm, TranslationSet};
use kato_sobolev::sobolev::h_norm;
use kato_sobolev::suites::named_window;
use kato_sobolev::weights::BlockOrder;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ks")
}

fn stdout_value(out: std::process::Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().trim().parse().unwrap()
}

#[test]
fn norm_command_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wave.ksf");
    let grid = make_grid(&[1], &[128], &[2.0 * std::f64::consts::PI]).unwrap();
    let u = sample(&grid, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
    field_write(&u, &path).unwrap();
    let printed = stdout_value(
        Command::new(bin())
            .args(["norm", "--input", path.to_str().unwrap(), "--s", "1"])
            .output()
            .unwrap(),
    );
    let expected = h_norm(&u, &BlockOrder::isotropic(1.0, 1).unwrap()).unwrap();
    assert!((printed - expected).abs() <= 1e-10 * expected);

    let zero = sample(&grid, |_| Complex64::new(0.0, 0.0));
    let zpath = dir.path().join("zero.ksf");
    field_write(&zero, &zpath).unwrap();
    let printed = stdout_value(
        Command::new(bin())
            .args(["norm", "--input", zpath.to_str().unwrap(), "--s", "1.5"])
            .output()
            .unwrap(),
    );
    assert_eq!(printed, 0.0);
}

#[test]
fn kato_norm_command_orders_p_correctly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bump.ksf");
    let grid = make_grid(&[1], &[256], &[4.0]).unwrap();
    let u = kato_sobolev::testfields::bump_field(&grid, &[0.3], 0.8, 1.0);
    field_write(&u, &path).unwrap();
    let run = |p: &str| {
        stdout_value(
            Command::new(bin())
                .args([
                    "kato-norm",
                    "--input",
                    path.to_str().unwrap(),
                    "--s",
                    "1",
                    "--p",
                    p,
                    "--window",
                    "cell",
                ])
                .output()
                .unwrap(),
        )
    };
    let p2 = run("2");
    let pinf = run("inf");
    assert!(pinf <= p2 * (1.0 + 1e-12), "{pinf} vs {p2}");
    // agreement with the library
    let spec = KatoNormSpec {
        s: BlockOrder::isotropic(1.0, 1).unwrap(),
        p: PNorm::Finite(2.0),
        window: named_window(&grid, "cell").unwrap(),
        translations: TranslationSet::Lattice { spacing: vec![1] },
    };
    let expected = kato_norm(&u, &spec).unwrap();
    assert!((p2 - expected).abs() <= 1e-10 * expected);

    let bad = Command::new(bin())
        .args([
            "kato-norm",
            "--input",
            path.to_str().unwrap(),
            "--s",
            "1",
            "--window",
            "no-such-window",
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn report_merge_concatenates_suites() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("invert.json");
    let b = dir.path().join("spectrum.json");
    for (suite, path) in [("invert", &a), ("spectrum", &b)] {
        let st = Command::new(bin())
            .args(["verify", suite, "--out", path.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(st.success());
    }
    let merged = Command::new(bin())
        .args(["report-merge", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(merged.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&merged.stdout).unwrap();
    let suites: Vec<_> = doc["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["suite"].as_str().unwrap().to_string())
        .collect();
    assert!(suites.contains(&"invert".to_string()));
    assert!(suites.contains(&"spectrum".to_string()));

    let bad = Command::new(bin())
        .args(["report-merge", "/no/such/report.json"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
