//! Exercises the C entry points through the raw `extern "C"` surface.

use std::ffi::{c_char, CString};
use std::ptr;

use netred::presets::{small_network, vanderpol_grid};
use netred_ffi::*;

fn open(text: &str) -> *mut NetredSystem {
    let c = CString::new(text).unwrap();
    let mut handle: *mut NetredSystem = ptr::null_mut();
    let status = unsafe { netred_system_from_string(c.as_ptr(), &mut handle) };
    assert_eq!(status, NetredStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error_string() -> String {
    let len = unsafe { netred_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0u8; len + 1];
    unsafe { netred_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    buf.truncate(len);
    String::from_utf8(buf).unwrap()
}

#[test]
fn parse_dims_and_free() {
    let sys = open(&small_network().to_canonical_string());
    let (mut n, mut e, mut d) = (0usize, 0usize, 0usize);
    let status = unsafe { netred_system_dims(sys, &mut n, &mut e, &mut d) };
    assert_eq!(status, NetredStatus::Ok);
    assert_eq!((n, e, d), (10, 15, 1));
    // out pointers are individually optional
    let status = unsafe { netred_system_dims(sys, &mut n, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(status, NetredStatus::Ok);
    unsafe { netred_system_free(sys) };
    unsafe { netred_system_free(ptr::null_mut()) };
}

#[test]
fn h2_error_matches_known_partition() {
    let sys = open(&small_network().to_canonical_string());
    // {{1, 8}, {2, 3, 4, 9, 10}, {5}, {6}, {7}}
    let labels: [usize; 10] = [0, 1, 1, 1, 2, 3, 4, 0, 1, 1];
    let (mut abs, mut rel) = (0.0f64, 0.0f64);
    let status =
        unsafe { netred_h2_error(sys, labels.as_ptr(), labels.len(), &mut abs, &mut rel) };
    assert_eq!(status, NetredStatus::Ok);
    assert!((rel - 1.280_530_316_245_990_2e-1).abs() < 1e-10);
    assert!(abs > 0.0 && abs < rel);
    unsafe { netred_system_free(sys) };
}

#[test]
fn hinf_error_matches_known_partition() {
    let sys = open(&small_network().to_canonical_string());
    // {{1, 3, 5, 8}, {2, 4}, {6}, {7}, {9, 10}}
    let labels: [usize; 10] = [0, 1, 0, 1, 0, 2, 3, 0, 4, 4];
    let mut rel = 0.0f64;
    let status = unsafe {
        netred_hinf_error(sys, labels.as_ptr(), labels.len(), 0.0, ptr::null_mut(), &mut rel)
    };
    assert_eq!(status, NetredStatus::Ok);
    assert!((rel - 2.539_749_548_881_818_4e-1).abs() < 1e-8);
    unsafe { netred_system_free(sys) };
}

#[test]
fn pipeline_recovers_partition() {
    let sys = open(&small_network().to_canonical_string());
    let mut labels = [usize::MAX; 10];
    let (mut h2, mut hinf) = (0.0f64, 0.0f64);
    let status = unsafe {
        netred_pipeline_partition(
            sys,
            NetredMethod::Irka as u32,
            NetredSource::Vw as u32,
            NetredAlgo::Kmeans as u32,
            5,
            5,
            0,
            labels.as_mut_ptr(),
            &mut h2,
            &mut hinf,
        )
    };
    assert_eq!(status, NetredStatus::Ok);
    // {{1, 2, 3, 4}, {5, 8}, {6}, {7}, {9, 10}}
    assert_eq!(labels, [0, 0, 0, 0, 1, 2, 3, 1, 4, 4]);
    assert!((h2 - 1.313_113_444_404_953_6e-1).abs() < 1e-10);
    assert!((hinf - 2.622_441_343_412_306_7e-1).abs() < 1e-8);
    unsafe { netred_system_free(sys) };
}

#[test]
fn status_codes_and_last_error() {
    // null text
    let mut handle: *mut NetredSystem = ptr::null_mut();
    let status = unsafe { netred_system_from_string(ptr::null(), &mut handle) };
    assert_eq!(status, NetredStatus::BadArgument);

    // unparsable text reports the offending line
    let garbage = CString::new("netred-system v1\nname x\n[graph]\nvertices ten\n").unwrap();
    let status = unsafe { netred_system_from_string(garbage.as_ptr(), &mut handle) };
    assert_eq!(status, NetredStatus::Parse);
    let msg = last_error_string();
    assert!(msg.contains("line"), "unexpected message: {msg}");

    let sys = open(&small_network().to_canonical_string());

    // label array of the wrong length
    let labels: [usize; 3] = [0, 1, 2];
    let status =
        unsafe { netred_h2_error(sys, labels.as_ptr(), labels.len(), ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(status, NetredStatus::BadArgument);

    // unknown selector value
    let mut out = [0usize; 10];
    let status = unsafe {
        netred_pipeline_partition(sys, 99, 0, 0, 5, 5, 0, out.as_mut_ptr(), ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, NetredStatus::BadArgument);

    // qr with clusters != order is an invalid combination, same as the CLI
    let status = unsafe {
        netred_pipeline_partition(
            sys,
            NetredMethod::Irka as u32,
            NetredSource::V as u32,
            NetredAlgo::Qr as u32,
            5,
            4,
            0,
            out.as_mut_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, NetredStatus::InvalidCombination);
    unsafe { netred_system_free(sys) };

    // norm evaluation is linear-only; the Van der Pol file is rejected
    let vdp = open(&vanderpol_grid().unwrap().to_canonical_string());
    let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
    let status = unsafe {
        netred_h2_error(vdp, labels.as_ptr(), labels.len(), ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, NetredStatus::Error);
    assert!(!last_error_string().is_empty());
    unsafe { netred_system_free(vdp) };
}
