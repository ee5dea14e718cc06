//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::env;
use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "nonlocal_limit.h"

#define CHECK(call) do { NlStatus s_ = (call); if (s_ != NL_STATUS_OK) { \
    char msg[256]; nl_last_error_message(msg, sizeof msg); \
    fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, msg); return 1; } } while (0)

int main(void) {
    double bp[1] = {0.0};
    double levels[2] = {1.0, 0.0};
    NlCellField *q = NULL;
    CHECK(nl_cell_field_sample_profile(-1.0, 1.0, 64, bp, 1, levels, &q));

    NlVelocity *v = NULL;
    CHECK(nl_velocity_greenshields(&v));

    double times[2] = {0.0, 0.25};
    NlReport *r = NULL;
    CHECK(nl_solve_nonlocal(q, v, NL_KERNEL_FAMILY_EXPONENTIAL, NL_ORIENTATION_DOWNSTREAM,
                            0.1, 0.5, 0.25, times, 2, &r));
    size_t n = nl_report_series_len(r, NL_SERIES_TV_Q);
    if (n != nl_report_steps(r) + 1) return 2;
    double tv[4096];
    CHECK(nl_report_series(r, NL_SERIES_TV_Q, tv, sizeof tv / sizeof tv[0]));
    if (fabs(tv[0] - 1.0) > 1e-12) return 3;

    if (nl_cell_field_new(1.0, 0.0, 4, 0.0, 0.0, NULL, &q) != NL_STATUS_DOMAIN) return 4;

    nl_report_free(r);
    nl_velocity_free(v);
    nl_cell_field_free(q);
    printf("ok %zu\n", n);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler ({cc})");
        return;
    }
    // Test binaries live in target/<profile>/deps; the static library one level up.
    let exe = env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = lib_dir.join("libnonlocal_limit_ffi.a");
    assert!(lib.is_file(), "missing {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .unwrap();
    assert!(status.success(), "compile failed");

    let out = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout.starts_with("ok "), "{stdout}");
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/nonlocal_limit.h"),
    )
    .unwrap();
    for name in [
        "nl_last_error_message",
        "nl_cell_field_new",
        "nl_cell_field_sample_profile",
        "nl_nonlocal_exponential",
        "nl_nonlocal_constant",
        "nl_reconstruct_density",
        "nl_solve_nonlocal",
        "nl_solve_local",
        "nl_report_series",
        "nl_config_parse",
        "nl_run_sweep",
        "typedef struct NlCellField NlCellField",
        "NL_STATUS_BLOWUP = 14",
        "NONLOCAL_LIMIT_H",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
