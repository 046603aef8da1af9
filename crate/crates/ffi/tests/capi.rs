use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use e2e_energy_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { e2e_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn config_and_model_lifecycle() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(e2e_config_default(&mut cfg), E2eStatus::Ok);
        let (s, k, v) = (c"scenario", c"m_t", c"128");
        assert_eq!(e2e_config_set(cfg, s.as_ptr(), k.as_ptr(), v.as_ptr()), E2eStatus::Ok);

        let mut model = ptr::null_mut();
        let variant = c"sep-lifi";
        assert_eq!(e2e_model_build(cfg, variant.as_ptr(), 0, &mut model), E2eStatus::Ok);
        let mut p = E2ePoint {
            feasible: false,
            total_power_w: 0.0,
            ee: 0.0,
            p_mbs_w: 0.0,
            p_bmaa_w: 0.0,
            p_iap_w: 0.0,
        };
        assert_eq!(e2e_model_solve(model, 1e9, &mut p), E2eStatus::Ok);
        assert!(p.feasible);
        let sum = p.p_mbs_w + p.p_bmaa_w + p.p_iap_w;
        assert!((p.total_power_w - sum).abs() <= 1e-9 * sum);

        assert_eq!(e2e_model_solve(model, 1e12, &mut p), E2eStatus::Ok);
        assert!(!p.feasible);
        assert!(p.total_power_w.is_nan());

        e2e_model_free(model);
        e2e_config_free(cfg);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let text = CString::new("[device]\neta_c = 1.2\n").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(e2e_config_parse(text.as_ptr(), &mut cfg), E2eStatus::Validation);
        assert!(cfg.is_null());
        assert!(last_error().contains("eta_c"));

        let bad = CString::new("[scenario]\nm_t = lots\n").unwrap();
        assert_eq!(e2e_config_parse(bad.as_ptr(), &mut cfg), E2eStatus::Parse);

        assert_eq!(e2e_config_default(ptr::null_mut()), E2eStatus::NullPointer);
        assert_eq!(e2e_config_parse(ptr::null(), &mut cfg), E2eStatus::NullPointer);

        let mut v = 0.0;
        assert_eq!(e2e_pathloss_winner_b5a(0.5, 5.0, &mut v), E2eStatus::Domain);
        assert_eq!(e2e_pa_power_doherty(2.0, 1.0, &mut v), E2eStatus::Saturation);
        assert!(last_error().contains("saturated"));

        let mut d = ptr::null_mut();
        assert_eq!(e2e_config_default(&mut d), E2eStatus::Ok);
        let mut model = ptr::null_mut();
        let variant = c"hybrid@64";
        assert_eq!(e2e_model_build(d, variant.as_ptr(), 0, &mut model), E2eStatus::InvalidArgument);
        assert!(model.is_null());
        e2e_config_free(d);
        e2e_config_free(ptr::null_mut());
        e2e_model_free(ptr::null_mut());
    }
}

#[test]
fn pure_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(e2e_pathloss_winner_b5a(100.0, 5.0, &mut v), E2eStatus::Ok);
        assert!((v - 89.5).abs() < 1e-9);
        assert_eq!(e2e_lambertian_order(60f64.to_radians(), &mut v), E2eStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(e2e_pa_power_doherty(1.0, 1.0, &mut v), E2eStatus::Ok);
        assert!((v - 6.0 / std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(e2e_pa_power_classb(0.25, 1.0, &mut v), E2eStatus::Ok);
        assert!((v - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    }
    assert_eq!(e2e_fejer_kernel(7, 0.0), 1.0);
    assert_eq!(e2e_required_sinr(2.0, 1.0), 3.0);
    assert_eq!(e2e_snr_macro(1.0, 1, 1, 2.5, 2.5), 1.0);
}

#[test]
fn last_error_truncates() {
    unsafe {
        let mut v = 0.0;
        e2e_lambertian_order(2.0, &mut v);
        let full = e2e_last_error(ptr::null_mut(), 0);
        assert!(full > 4);
        let mut buf = [1 as c_char; 4];
        assert_eq!(e2e_last_error(buf.as_mut_ptr(), 4), full);
        assert_eq!(buf[3], 0);
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/e2e_energy.h")).unwrap();
    for sym in [
        "E2E_ENERGY_H",
        "typedef struct E2eConfig E2eConfig;",
        "typedef struct E2eModel E2eModel;",
        "E2E_STATUS_SATURATION = 6",
        "e2e_last_error",
        "e2e_config_default",
        "e2e_config_load",
        "e2e_config_parse",
        "e2e_config_set",
        "e2e_config_free",
        "e2e_model_build",
        "e2e_model_solve",
        "e2e_model_free",
        "e2e_fejer_kernel",
        "e2e_pathloss_winner_b5a",
        "e2e_lambertian_order",
        "e2e_pa_power_doherty",
        "e2e_pa_power_classb",
        "e2e_required_sinr",
        "e2e_snr_macro",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

/// Compiles and runs a C program against the static library.
#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libe2e_energy_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "e2e_energy.h"

int main(void) {
    E2eConfig *cfg = NULL;
    E2eModel *model = NULL;
    E2ePoint p;
    double pl = 0.0;
    if (e2e_config_default(&cfg) != E2E_STATUS_OK) return 1;
    if (e2e_model_build(cfg, "nonsep@256", 0, &model) != E2E_STATUS_OK) return 2;
    if (e2e_model_solve(model, 1e9, &p) != E2E_STATUS_OK || !p.feasible) return 3;
    if (e2e_pathloss_winner_b5a(100.0, 5.0, &pl) != E2E_STATUS_OK || fabs(pl - 89.5) > 1e-9) return 4;
    if (e2e_pathloss_winner_b5a(0.1, 5.0, &pl) != E2E_STATUS_DOMAIN) return 5;
    printf("%.3f\n", p.total_power_w);
    e2e_model_free(model);
    e2e_config_free(cfg);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    let watts: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(watts > 0.0);
}
