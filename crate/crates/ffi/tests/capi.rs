use std::ffi::{CStr, CString};
use std::ptr;

use menugap_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn sequence_roundtrip_and_gaps() {
    unsafe {
        let mut seq = ptr::null_mut();
        assert_eq!(mg_sequence_build(3, &mut seq), MgStatus::Ok);
        assert_eq!(mg_sequence_len(seq), 10);
        let mut lag = 0.0;
        assert_eq!(mg_lagrel_bound(seq, &mut lag), MgStatus::Ok);
        assert!(lag > 2.0 && lag < 3.0, "{lag}");
        let mut lp = 0.0;
        assert_eq!(mg_menugap_lp(seq, &mut lp), MgStatus::Ok);
        let mut sup = 0.0;
        assert_eq!(mg_supgap(seq, &mut sup), MgStatus::Ok);
        assert!(lp >= sup - 1e-9);
        mg_sequence_free(seq);
    }
}

#[test]
fn parse_errors_set_message() {
    unsafe {
        let mut seq = ptr::null_mut();
        let bad = cstr(r#"{"k": 2, "points": [[1, 0], [1]]}"#);
        assert_eq!(
            mg_sequence_from_json(bad.as_ptr(), &mut seq),
            MgStatus::InvalidInput
        );
        assert!(seq.is_null());
        let msg = CStr::from_ptr(mg_last_error())
            .to_string_lossy()
            .into_owned();
        assert!(msg.contains("points[1]"), "{msg}");

        let garbage = cstr("not json");
        assert_eq!(
            mg_sequence_from_json(garbage.as_ptr(), &mut seq),
            MgStatus::InvalidInput
        );
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(mg_supgap(ptr::null(), &mut out), MgStatus::NullPointer);
        assert_eq!(mg_sequence_build(3, ptr::null_mut()), MgStatus::NullPointer);
        assert_eq!(mg_sequence_len(ptr::null()), 0);
        mg_sequence_free(ptr::null_mut());
        mg_string_free(ptr::null_mut());
    }
}

#[test]
fn auction_calls() {
    unsafe {
        let d_json = cstr(r#"{"k": 2, "support": [{"v": [1, 1], "p": 1}]}"#);
        let mut d = ptr::null_mut();
        assert_eq!(
            mg_distribution_from_json(d_json.as_ptr(), &mut d),
            MgStatus::Ok
        );
        assert_eq!(mg_distribution_len(d), 1);

        let mut m = ptr::null_mut();
        let mut opt = 0.0;
        assert_eq!(mg_optimal_mechanism(d, &mut m, &mut opt), MgStatus::Ok);
        assert!((opt - 2.0).abs() < 1e-9);

        let (mut rev, mut arev) = (0.0, 0.0);
        assert_eq!(mg_revenue(d, m, 1e-9, &mut rev, &mut arev), MgStatus::Ok);
        assert!((rev - 2.0).abs() < 1e-9);

        let (mut price, mut value) = (0.0, 0.0);
        assert_eq!(mg_brev(d, &mut price, &mut value), MgStatus::Ok);
        assert_eq!((price, value), (2.0, 2.0));

        let mut ok = false;
        assert_eq!(mg_verify_ic(d, m, 1e-9, &mut ok), MgStatus::Ok);
        assert!(ok);

        let mut s = ptr::null_mut();
        assert_eq!(mg_mechanism_to_json(m, &mut s), MgStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        mg_string_free(s);
        let mut m2 = ptr::null_mut();
        let t = cstr(&text);
        assert_eq!(mg_mechanism_from_json(t.as_ptr(), &mut m2), MgStatus::Ok);
        assert_eq!(mg_mechanism_len(m2), mg_mechanism_len(m));

        let mut cert = ptr::null_mut();
        assert_eq!(mg_certify(d, 1e-9, &mut cert), MgStatus::Ok);
        let cert_text = CStr::from_ptr(cert).to_str().unwrap().to_owned();
        mg_string_free(cert);
        assert!(cert_text.contains("\"pass\""));

        mg_mechanism_free(m2);
        mg_mechanism_free(m);
        mg_distribution_free(d);
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/menugap.h")).unwrap();
    for name in [
        "mg_last_error",
        "mg_sequence_build",
        "mg_menugap_lp",
        "mg_lagrel_bound",
        "mg_optimal_mechanism",
        "mg_certify",
        "MG_STATUS_PANIC",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"menugap.h\"\nint main(void) { MgSequence *s = 0; return (int)mg_sequence_build(3, &s); }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .is_ok()
        })
        .ok_or(())
}
