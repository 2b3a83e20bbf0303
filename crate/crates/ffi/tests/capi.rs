use std::ffi::{CStr, CString};
use std::ptr;

use bamp_ffi::*;

fn copula(toml: &str) -> *mut BampCopula {
    let text = CString::new(toml).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { bamp_copula_from_toml(text.as_ptr(), &mut out) };
    assert_eq!(status, BampStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = bamp_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn independence_cdf_and_survival() {
    let c = copula("family = \"independence\"\ndim = 3\n");
    unsafe {
        assert_eq!(bamp_copula_dim(c), 3);
        let mut v = 0.0;
        let u = [0.5, 0.4, 0.2];
        assert_eq!(bamp_copula_cdf(c, u.as_ptr(), 3, &mut v), BampStatus::Ok);
        assert!((v - 0.04).abs() < 1e-15);
        assert_eq!(bamp_copula_survival_cdf(c, u.as_ptr(), 3, &mut v), BampStatus::Ok);
        assert!((v - 0.04).abs() < 1e-15);
        bamp_copula_free(c);
    }
}

#[test]
fn errors_are_reported() {
    let text = CString::new("family = \"gauss\"\ncorrelation = [[1.0, 2.0], [2.0, 1.0]]\n").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { bamp_copula_from_toml(text.as_ptr(), &mut out) };
    assert_eq!(status, BampStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("correlation"), "{}", last_error());

    let text = CString::new("family = \"nope\"").unwrap();
    assert_eq!(unsafe { bamp_copula_from_toml(text.as_ptr(), &mut out) }, BampStatus::Parse);

    let c = copula("family = \"independence\"\ndim = 2\n");
    let mut v = 0.0;
    unsafe {
        let u = [0.5, 0.5, 0.5];
        assert_eq!(bamp_copula_cdf(c, u.as_ptr(), 3, &mut v), BampStatus::DimensionMismatch);
        assert_eq!(bamp_copula_cdf(c, ptr::null(), 2, &mut v), BampStatus::NullPointer);
        assert_eq!(bamp_copula_cdf(ptr::null(), u.as_ptr(), 2, &mut v), BampStatus::NullPointer);
        bamp_copula_free(c);
        bamp_copula_free(ptr::null_mut());
    }
}

#[test]
fn high_dimensional_gauss_asks_for_monte_carlo() {
    let c = copula("family = \"homogeneous-gauss\"\nrho = 0.5\ndim = 3\n");
    let mut v = 0.0;
    let u = [0.5; 3];
    assert_eq!(unsafe { bamp_copula_cdf(c, u.as_ptr(), 3, &mut v) }, BampStatus::UseMonteCarlo);
    assert!(last_error().contains("use-monte-carlo"));
    unsafe { bamp_copula_free(c) };
}

#[test]
fn sampling_is_deterministic_and_matches_rust() {
    let toml = "family = \"homogeneous-gauss\"\nrho = 0.6\ndim = 4\n";
    let c = copula(toml);
    let mut a = vec![0.0; 40];
    let mut b = vec![0.0; 40];
    unsafe {
        assert_eq!(bamp_copula_sample(c, 10, 9, a.as_mut_ptr(), 40), BampStatus::Ok);
        assert_eq!(bamp_copula_sample(c, 10, 9, b.as_mut_ptr(), 40), BampStatus::Ok);
        assert_eq!(bamp_copula_sample(c, 10, 9, b.as_mut_ptr(), 39), BampStatus::DimensionMismatch);
        bamp_copula_free(c);
    }
    assert_eq!(a, b);
    let spec: bamp::CopulaSpec = toml::from_str(toml).unwrap();
    let direct = bamp::Copula::new(spec).unwrap().sample(10, 9).unwrap();
    assert_eq!(direct.as_slice(), a.as_slice());
}

#[test]
fn amputation_mask() {
    let c = copula("family = \"comonotone\"\ndim = 3\n");
    let n = 50;
    let data: Vec<f64> = (0..n * 3).map(|k| k as f64).collect();
    let probs: Vec<f64> = (0..n).flat_map(|_| [0.3, 0.6, 0.0]).collect();
    let mut mask = vec![7u8; n * 3];
    let status = unsafe { bamp_ampute_rows_iid(c, data.as_ptr(), probs.as_ptr(), n, 3, 5, mask.as_mut_ptr()) };
    assert_eq!(status, BampStatus::Ok, "{}", last_error());
    for row in mask.chunks(3) {
        assert!(row.iter().all(|&m| m <= 1));
        assert_eq!(row[2], 0);
        // comonotone: column 0 missing implies column 1 missing
        assert!(row[0] <= row[1]);
    }
    unsafe { bamp_copula_free(c) };
}

#[test]
fn analytics_and_coefficients() {
    let c = copula("family = \"comonotone\"\ndim = 2\n");
    let (mut rho, mut lo, mut hi) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(bamp_pairwise_correlation(c, 0.3, 0.3, &mut rho), BampStatus::Ok);
        assert_eq!(bamp_correlation_bounds(0.3, 0.3, &mut lo, &mut hi), BampStatus::Ok);
        bamp_copula_free(c);
    }
    assert!((rho - 1.0).abs() < 1e-12);
    assert!((hi - 1.0).abs() < 1e-12);
    assert!((lo - (-0.09 / 0.21)).abs() < 1e-12);

    let (mut b0, mut b) = (0.0, 0.0);
    let s = unsafe { bamp_implied_coefficients(0.5, 0.1, 0.0, 1.0, 1, &mut b0, &mut b) };
    assert_eq!(s, BampStatus::Ok);
    let logit = |p: f64| (p / (1.0 - p)).ln();
    assert!((b - (logit(0.6) - logit(0.4))).abs() < 1e-12);
    assert!((b0 - logit(0.4)).abs() < 1e-12);
    let s = unsafe { bamp_implied_coefficients(0.5, 0.6, 0.0, 1.0, 1, &mut b0, &mut b) };
    assert_eq!(s, BampStatus::InvalidArgument);
}

#[test]
fn header_is_generated_and_compiles() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/bamp.h")).unwrap();
    for name in [
        "bamp_copula_from_toml",
        "bamp_copula_free",
        "bamp_copula_cdf",
        "bamp_ampute_rows_iid",
        "BAMP_STATUS_USE_MONTE_CARLO",
        "typedef struct BampCopula BampCopula",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"bamp.h\"\nint main(void) { return bamp_copula_dim(0) == 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
