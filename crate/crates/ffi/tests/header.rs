//! The generated header must exist, declare every exported symbol, and
//! compile together with the static library from plain C.

use std::path::{Path, PathBuf};
use std::process::Command;

const SYMBOLS: &[&str] = &[
    "trm_version",
    "trm_last_error_message",
    "trm_state_new",
    "trm_state_free",
    "trm_state_dim",
    "trm_state_components",
    "trm_partition_new",
    "trm_partition_singletons",
    "trm_partition_free",
    "trm_partition_len",
    "trm_rng_new",
    "trm_rng_free",
    "trm_simplex_measure",
    "trm_region_measure",
    "trm_region_of",
    "trm_outcome_probabilities",
    "trm_collapse",
    "trm_run_once",
    "trm_run_many",
    "trm_complementary_probabilities",
    "trm_epsilon_probability",
    "trm_universal_probability_exact",
    "trm_kolmogorov_check",
    "trm_qubit_embeddable",
    "trm_run_config_json",
    "trm_string_free",
];

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/trm.h")
}

#[test]
fn header_declares_every_symbol() {
    let text = std::fs::read_to_string(header()).expect("include/trm.h is generated by build.rs");
    for s in SYMBOLS {
        assert!(text.contains(&format!("{s}(")), "missing {s}");
    }
    assert!(text.contains("typedef struct TrmState TrmState;"));
    assert!(text.contains("TRM_STATUS_OK = 0"));
}

#[test]
fn c_program_links_and_runs() {
    // target/<profile>/deps/<test-binary> -> target/<profile>/libtrm_ffi.a
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libtrm_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "trm.h"
int main(void) {
    double x[3] = {0.2, 0.3, 0.5};
    TrmState *s = NULL;
    TrmPartition *p = NULL;
    double probs[3];
    if (trm_state_new(x, 3, &s) != TRM_STATUS_OK) return 10;
    if (trm_partition_singletons(3, &p) != TRM_STATUS_OK) return 11;
    if (trm_outcome_probabilities(s, p, probs, 3) != TRM_STATUS_OK) return 12;
    if (probs[2] != 0.5) return 13;
    double bad[2] = {0.5, 0.6};
    TrmState *b = NULL;
    if (trm_state_new(bad, 2, &b) != TRM_STATUS_DOMAIN) return 14;
    char msg[128];
    if (trm_last_error_message(msg, sizeof msg) == 0) return 15;
    trm_partition_free(p);
    trm_state_free(s);
    printf("ok %s\n", trm_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("probe");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler `cc` is required for this test");
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "probe exited with {:?}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
