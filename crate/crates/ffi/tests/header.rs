use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/trapping_lab.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "tl_last_error_message",
        "tl_potential_new",
        "tl_potential_eval",
        "tl_potential_free",
        "tl_classify",
        "tl_report_gamma",
        "tl_report_free",
        "tl_operator_new",
        "tl_operator_free",
        "tl_estimate_norm",
        "tl_sweep",
        "tl_fit_classify",
        "typedef struct TlPotential TlPotential",
        "TL_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C program against the header and the static library
/// when a C compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let target = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/debug");
    let lib = target.join("libtrapping_lab_ffi.a");
    if !lib.is_file() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "trapping_lab.h"

int main(void) {
    const char *names[] = {"V0", "w"};
    double values[] = {4.0, 1.0};
    TlPotential *p = NULL;
    if (tl_potential_new("EckartBarrier", names, values, 2, 0.0, &p) != TL_STATUS_OK) return 1;
    double v = 0.0;
    if (tl_potential_eval(p, 0.0, 0, &v) != TL_STATUS_OK || fabs(v - 4.0) > 1e-12) return 2;
    TlReport *r = NULL;
    if (tl_classify(p, 4.0, &r) != TL_STATUS_OK) return 3;
    double gamma = 0.0;
    if (tl_report_gamma(r, &gamma) != TL_STATUS_OK || fabs(gamma - 4.0) > 1e-3) return 4;
    tl_report_free(r);
    if (tl_potential_new("Nope", NULL, NULL, 0, 0.0, &p) != TL_STATUS_CONFIG) return 5;
    char buf[128];
    if (tl_last_error_message(buf, sizeof buf) == 0) return 6;
    printf("ok %s\n", buf);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
