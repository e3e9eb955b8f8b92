use dihedral_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    unsafe {
        dh_last_error(buf.as_mut_ptr().cast(), buf.len());
        CStr::from_ptr(buf.as_ptr().cast()).to_string_lossy().into_owned()
    }
}

#[test]
fn distribution_round_trip() {
    let json = CString::new(
        r#"{"dim":1,"atoms":[{"flip":1,"trans":[1],"w":"1/2"},{"flip":-1,"trans":[0],"w":"1/2"}]}"#,
    )
    .unwrap();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(dh_distribution_from_json(json.as_ptr(), &mut d), DhStatus::Ok);
        assert_eq!(dh_distribution_dim(d), 1);
        let mut p = 0.0;
        let r = [1i64];
        assert_eq!(dh_rw_nstep_prob(d, 1, 1, r.as_ptr(), 1, &mut p), DhStatus::Ok);
        assert!((p - 0.5).abs() < 1e-12);
        let r2 = [1i64, 0];
        assert_eq!(dh_rw_nstep_prob(d, 1, 1, r2.as_ptr(), 2, &mut p), DhStatus::DimensionMismatch);
        assert!(last_error().contains("dimension"));
        assert_eq!(dh_rw_nstep_prob(d, 1, 1, r.as_ptr(), 1, ptr::null_mut()), DhStatus::NullPointer);
        dh_distribution_free(d);
    }
}

#[test]
fn bad_inputs() {
    let mut d = ptr::null_mut();
    let mut m = ptr::null_mut();
    unsafe {
        let junk = CString::new("{").unwrap();
        assert_eq!(dh_distribution_from_json(junk.as_ptr(), &mut d), DhStatus::Parse);
        assert!(d.is_null());
        assert_eq!(dh_distribution_from_json(ptr::null(), &mut d), DhStatus::NullPointer);
        let uncentred = CString::new(
            r#"{"d":1,"P":[["1/2","1/2"],["1/2","1/2"]],"pi":["1/2","1/2"],"eps":[1,-1],"psi":[[1],[0]],"invol":[1,0]}"#,
        )
        .unwrap();
        assert_eq!(dh_model_from_json(uncentred.as_ptr(), &mut m), DhStatus::InvalidModel);
        assert!(last_error().contains("centred_plus"));
        assert!(m.is_null());
        dh_distribution_free(ptr::null_mut());
        dh_model_free(ptr::null_mut());
        assert_eq!(dh_distribution_dim(ptr::null()), 0);
    }
}

#[test]
fn model_queries() {
    let name = CString::new("gm-markov").unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(dh_model_fixture(name.as_ptr(), &mut m), DhStatus::Ok);
        assert_eq!(dh_model_states(m), 8);
        let mut s = [0.0];
        assert_eq!(dh_gm_sigma1_sq(m, s.as_mut_ptr(), 1), DhStatus::Ok);
        assert!((s[0] - 1.5).abs() < 1e-8);
        let mut f = [0.0; 8];
        assert_eq!(dh_gm_first_return(m, 8, f.as_mut_ptr(), 8), DhStatus::BufferTooSmall);
        let mut f = [0.0; 9];
        assert_eq!(dh_gm_first_return(m, 8, f.as_mut_ptr(), 9), DhStatus::Ok);
        assert_eq!(&f[..5], &[0.0, 0.0, 0.125, 0.0625, 0.0625]);
        let mut p = 0.0;
        assert_eq!(dh_gm_nstep_prob(m, 2, 1, [0i64].as_ptr(), 1, &mut p), DhStatus::Ok);
        assert!((p - 0.125).abs() < 1e-12);
        dh_model_free(m);
    }
}

#[test]
fn return_fractions() {
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(dh_distribution_nu1(&mut d), DhStatus::Ok);
        let h = [10usize, 100];
        let mut out = [0.0; 2];
        assert_eq!(dh_rw_return_fraction(d, h.as_ptr(), 2, 500, 7, out.as_mut_ptr()), DhStatus::Ok);
        assert!(out[0] <= out[1] && out[1] > 0.5);
        assert_eq!(dh_rw_return_fraction(d, h.as_ptr(), 2, 0, 7, out.as_mut_ptr()), DhStatus::InvalidArgument);
        dh_distribution_free(d);
    }
}

fn find_staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libdihedral_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let (Some(lib), true) = (find_staticlib(), Command::new("cc").arg("--version").output().is_ok()) else {
        eprintln!("skipping: no C compiler or static library");
        return;
    };
    let out = std::env::temp_dir().join(format!("dihedral-smoke-{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
    assert!(text.contains("unknown fixture"));
}
