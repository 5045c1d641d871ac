use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use impois_ffi::*;

const EPS: f64 = 1e-10;

#[test]
fn pmf_cdf_and_gamma() {
    let mut p = 0.0;
    let mut c = 0.0;
    let mut g = 0.0;
    unsafe {
        assert_eq!(impois_poisson_pmf(0, 2.0, &mut p), ImpoisStatus::Ok);
        assert_eq!(impois_poisson_cdf(3, 2.0, &mut c), ImpoisStatus::Ok);
        assert_eq!(impois_gamma_cdf(4.0, 2.0, &mut g), ImpoisStatus::Ok);
    }
    assert!((p - (-2.0f64).exp()).abs() < 1e-15);
    assert!((c - (1.0 - g)).abs() < 1e-12);
}

#[test]
fn invalid_arguments_set_a_message() {
    let mut out = 0.0;
    let s = unsafe { impois_poisson_pmf(1, -1.0, &mut out) };
    assert_eq!(s, ImpoisStatus::InvalidArgument);
    let msg = unsafe { CStr::from_ptr(impois_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("domain"), "{msg}");
}

#[test]
fn null_out_pointer_is_reported() {
    let s = unsafe { impois_point_plausibility(3, 3.0, EPS, ptr::null_mut()) };
    assert_eq!(s, ImpoisStatus::NullPointer);
    assert_eq!(unsafe { impois_ranking_len(ptr::null(), ptr::null_mut()) }, ImpoisStatus::NullPointer);
}

#[test]
fn one_sided_both_sides() {
    let mut g = ImpoisBelief::default();
    let mut l = ImpoisBelief::default();
    unsafe {
        assert_eq!(impois_one_sided(3, 2.0, ImpoisSide::Greater, &mut g), ImpoisStatus::Ok);
        assert_eq!(impois_one_sided(3, 2.0, ImpoisSide::LessEqual, &mut l), ImpoisStatus::Ok);
    }
    assert!((g.belief - 0.6766764).abs() < 1e-6);
    assert!((g.plausibility - 0.8571235).abs() < 1e-6);
    assert!((g.belief + l.plausibility - 1.0).abs() < 1e-12);
}

#[test]
fn ranking_handle_round_trip() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(impois_ranking_new(5.0, EPS, &mut h), ImpoisStatus::Ok);
        let mut n = 0usize;
        assert_eq!(impois_ranking_len(h, &mut n), ImpoisStatus::Ok);
        let mut support = vec![0u64; n];
        assert_eq!(impois_ranking_support(h, support.as_mut_ptr(), n), ImpoisStatus::Ok);
        assert_eq!(support[0], 5);
        let mut sorted = support.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n as u64).collect::<Vec<_>>());

        let mut rank = 0usize;
        assert_eq!(impois_ranking_rank(h, support[3], &mut rank), ImpoisStatus::Ok);
        assert_eq!(rank, 4);
        assert_eq!(impois_ranking_rank(h, 10_000, &mut rank), ImpoisStatus::Ok);
        assert_eq!(rank, n + 1);

        let mut t = vec![0.0; n];
        let mut v = vec![0.0; n];
        assert_eq!(impois_ranking_diagnostics(h, t.as_mut_ptr(), v.as_mut_ptr(), n), ImpoisStatus::Ok);
        assert!(v[..n - 1].iter().all(|&x| x < 0.0));
        assert!(t[n - 1].abs() < 1e-8);
        assert_eq!(
            impois_ranking_diagnostics(h, t.as_mut_ptr(), v.as_mut_ptr(), n - 1),
            ImpoisStatus::BufferTooSmall
        );
        impois_ranking_free(h);
        impois_ranking_free(ptr::null_mut());
    }
}

#[test]
fn intervals_match_the_library() {
    let mut iv = ImpoisInterval::default();
    let mut li = ImpoisLambdaInterval::default();
    let mut pl = 0.0;
    let mut conflict = 0.0;
    unsafe {
        assert_eq!(impois_plausibility_interval(7, 0.1, EPS, &mut iv), ImpoisStatus::Ok);
        assert_eq!(impois_lambda_interval(0, 3.0, 0.1, EPS, &mut li), ImpoisStatus::Ok);
        assert_eq!(impois_ebsb_plausibility(0, 2.0, 3.0, EPS, &mut pl), ImpoisStatus::Ok);
        assert_eq!(impois_conflict_mass(0, 3.0, EPS, &mut conflict), ImpoisStatus::Ok);
    }
    let lib = impois::two_sided::plausibility_interval(7, 0.1, EPS).unwrap();
    assert_eq!((iv.lower, iv.upper, iv.contiguous), (lib.lower, lib.upper, lib.contiguous));
    assert_eq!(li.lower, 0.0);
    assert!(li.upper > 0.0);
    assert_eq!(pl, 0.0);
    assert_eq!(li.conflict_mass, conflict);
    assert!(conflict > 0.0);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/impois.h")).unwrap();
    for name in [
        "impois_last_error",
        "impois_poisson_pmf",
        "impois_poisson_cdf",
        "impois_gamma_cdf",
        "impois_one_sided",
        "impois_ranking_new",
        "impois_ranking_free",
        "impois_ranking_len",
        "impois_ranking_support",
        "impois_ranking_rank",
        "impois_ranking_diagnostics",
        "impois_point_plausibility",
        "impois_plausibility_interval",
        "impois_conflict_mass",
        "impois_ebsb_plausibility",
        "impois_lambda_interval",
        "typedef struct ImpoisRanking ImpoisRanking",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libimpois_ffi.a");
    lib.exists().then_some(lib)
}

/// Compiles and runs a C program against the generated header and the
/// static library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not built");
        return;
    };
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("impois_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
