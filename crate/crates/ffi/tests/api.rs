use std::f64::consts::PI;
use std::ffi::{c_char, CStr};
use std::ptr;

use qwzmem_ffi::*;

fn last_error() -> String {
    unsafe {
        let mut buf = [0 as c_char; 256];
        qwz_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn protocol(m: f64, t_max: f64, tau: f64) -> *mut QwzProtocol {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            qwz_protocol_new(3.0, m, t_max, 0.01, tau, &mut p),
            QwzStatus::Ok
        );
        p
    }
}

fn series(p: *const QwzProtocol, kx: f64, ky: f64) -> *mut QwzSeries {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            qwz_vorticity_series_new(p, 100, kx, ky, 0.0, &mut s),
            QwzStatus::Ok
        );
        s
    }
}

#[test]
fn spectrum_and_topology() {
    unsafe {
        let mut r = [0.0; 3];
        assert_eq!(qwz_r_vector(1.0, PI, PI, r.as_mut_ptr()), QwzStatus::Ok);
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] - 3.0).abs() < 1e-15);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(
            qwz_band_energies(1.0, PI, PI, &mut lo, &mut hi),
            QwzStatus::Ok
        );
        assert_eq!((lo, hi), (-3.0, 3.0));

        for (m, want) in [(3.0, 0), (1.0, -1), (-3.0, 0)] {
            let (mut a, mut b) = (99, 99);
            assert_eq!(qwz_chern_fhs(m, 40, &mut a), QwzStatus::Ok);
            assert_eq!(qwz_chern_patchwise(m, 40, &mut b), QwzStatus::Ok);
            assert_eq!((a, b), (want, want), "m={m}");
            assert_eq!(qwz_hall_conductance(a), -(want as f64));
        }
    }
}

#[test]
fn error_reporting() {
    unsafe {
        let mut c = 0;
        assert_eq!(qwz_chern_fhs(2.0, 40, &mut c), QwzStatus::GapClosed);
        assert!(last_error().contains("critical"), "{}", last_error());
        assert_eq!(qwz_chern_fhs(1.0, 1, &mut c), QwzStatus::InvalidArgument);
        assert_eq!(
            qwz_chern_fhs(1.0, 40, ptr::null_mut()),
            QwzStatus::NullPointer
        );

        let mut t = 0.0;
        assert_eq!(
            qwz_theoretical_period(-2.0, PI, PI, &mut t),
            QwzStatus::GapClosed
        );
        assert_eq!(qwz_theoretical_period(1.0, PI, PI, &mut t), QwzStatus::Ok);
        assert_eq!(qwz_last_error_message(ptr::null_mut(), 0), 0);

        let mut p = ptr::null_mut();
        assert_eq!(
            qwz_protocol_new(3.0, 1.0, 10.0, -0.1, 0.0, &mut p),
            QwzStatus::InvalidArgument
        );
        assert!(p.is_null());
        assert_eq!(qwz_protocol_n_steps(ptr::null()), 0);
        qwz_protocol_free(ptr::null_mut());
    }
}

#[test]
fn loschmidt_into_buffers() {
    unsafe {
        let p = protocol(-1.0, 10.0, 0.0);
        let n = qwz_protocol_n_steps(p);
        assert_eq!(n, 1001);
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(
            qwz_loschmidt_series(p, PI, PI, re.as_mut_ptr(), im.as_mut_ptr(), n - 1),
            QwzStatus::BufferTooSmall
        );
        assert_eq!(
            qwz_loschmidt_series(p, PI, PI, re.as_mut_ptr(), im.as_mut_ptr(), n),
            QwzStatus::Ok
        );
        // |R′(π,π)| = 1 and R ∥ R′, so L = e^{it}
        for i in [0, 157, 500, 1000] {
            let t = i as f64 * 0.01;
            assert!(
                (re[i] - t.cos()).abs() < 1e-12 && (im[i] - t.sin()).abs() < 1e-12,
                "t={t}"
            );
        }
        qwz_protocol_free(p);
    }
}

#[test]
fn series_period_and_decode() {
    unsafe {
        let m = 0.7;
        let t_max = 10.0 * PI / (m - 2.0f64).abs();
        let p = protocol(m, t_max, 0.0);
        let a = series(p, PI, PI);
        let b = series(p, 0.0, 0.0);

        let n = qwz_series_len(a);
        assert_eq!(n, qwz_protocol_n_steps(p));
        let (mut times, mut idx) = (vec![0.0; n], vec![0i8; n]);
        assert_eq!(
            qwz_series_copy(a, times.as_mut_ptr(), idx.as_mut_ptr(), n),
            QwzStatus::Ok
        );
        assert!(idx.iter().all(|i| (-1..=1).contains(i)));
        assert!(idx.contains(&1) && idx.contains(&-1));

        let (mut period, mut sigma) = (0.0, 0.0);
        assert_eq!(qwz_series_period(a, &mut period, &mut sigma), QwzStatus::Ok);
        assert!((period / (PI / (m + 2.0)) - 1.0).abs() < 0.02, "{period}");

        let (mut got, mut u) = (0.0, 0.0);
        assert_eq!(
            qwz_decode(a, QwzBranch::None, &mut got, &mut u),
            QwzStatus::AmbiguousBranch
        );
        assert_eq!(
            qwz_decode(a, QwzBranch::Above, &mut got, &mut u),
            QwzStatus::Ok
        );
        assert!((got - m).abs() < 0.02 * m, "{got}");
        assert_eq!(qwz_decode_joint(a, b, &mut got, &mut u), QwzStatus::Ok);
        assert!((got - m).abs() < 0.02 * m, "{got}");

        qwz_series_free(a);
        qwz_series_free(b);
        qwz_protocol_free(p);
    }
}

#[test]
fn short_run_has_too_few_cycles() {
    unsafe {
        let p = protocol(1.0, 1.0, 0.0);
        let s = series(p, PI, PI);
        let (mut period, mut sigma) = (0.0, 0.0);
        assert_eq!(
            qwz_series_period(s, &mut period, &mut sigma),
            QwzStatus::InsufficientCycles
        );
        qwz_series_free(s);
        qwz_protocol_free(p);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/qwzmem.h");
    for name in [
        "qwz_last_error_message",
        "qwz_r_vector",
        "qwz_band_energies",
        "qwz_chern_fhs",
        "qwz_chern_patchwise",
        "qwz_hall_conductance",
        "qwz_theoretical_period",
        "qwz_protocol_new",
        "qwz_protocol_n_steps",
        "qwz_protocol_free",
        "qwz_loschmidt_series",
        "qwz_vorticity_series_new",
        "qwz_series_len",
        "qwz_series_copy",
        "qwz_series_period",
        "qwz_decode",
        "qwz_decode_joint",
        "qwz_series_free",
        "typedef struct QwzProtocol QwzProtocol",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
