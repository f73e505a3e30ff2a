use std::ffi::{CStr, CString};
use std::ptr;

use simtri_ffi::*;

fn last_error() -> String {
    let p = simtri_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn grid_points(n: usize) -> Vec<f64> {
    (0..n)
        .flat_map(|i| {
            let a = i as f64 * 0.37;
            [a.cos(), a.sin(), 0.1 * (i % 7) as f64]
        })
        .collect()
}

#[test]
fn cosine_and_bounds() {
    let mut out = f64::NAN;
    let a = [3.0, 4.0];
    let b = [4.0, 3.0];
    let st = unsafe { simtri_cosine_dense(a.as_ptr(), b.as_ptr(), 2, &mut out) };
    assert_eq!(st, SimtriStatus::Ok);
    assert!((out - 0.96).abs() < 1e-15);
    assert!(simtri_last_error_message().is_null());

    let (ai, av) = ([0u32, 5], [1.0, 1.0]);
    let (bi, bv) = ([5u32, 9], [2.0, 2.0]);
    let st = unsafe {
        simtri_cosine_sparse(
            ai.as_ptr(),
            av.as_ptr(),
            2,
            bi.as_ptr(),
            bv.as_ptr(),
            2,
            &mut out,
        )
    };
    assert_eq!(st, SimtriStatus::Ok);
    assert!((out - 0.5).abs() < 1e-15);

    let st = unsafe { simtri_lower_bound(SimtriBound::Arccos, 0.5, 0.5, &mut out) };
    assert_eq!(st, SimtriStatus::Ok);
    assert!((out + 0.5).abs() < 1e-15);
    let st = unsafe { simtri_upper_bound(0.5, 0.5, &mut out) };
    assert_eq!(st, SimtriStatus::Ok);
    assert!((out - 1.0).abs() < 1e-15);
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = 7.0;
    let st = unsafe { simtri_lower_bound(SimtriBound::Mult, 1.5, 0.0, &mut out) };
    assert_eq!(st, SimtriStatus::Domain);
    assert_eq!(out, 7.0);
    assert!(last_error().contains("1.5"));

    let st = unsafe { simtri_upper_bound(f64::NAN, 0.0, &mut out) };
    assert_eq!(st, SimtriStatus::Domain);

    let z = [0.0, 0.0];
    let a = [1.0, 0.0];
    let st = unsafe { simtri_cosine_dense(z.as_ptr(), a.as_ptr(), 2, &mut out) };
    assert_eq!(st, SimtriStatus::InvalidVector);

    let st = unsafe { simtri_cosine_dense(ptr::null(), a.as_ptr(), 2, &mut out) };
    assert_eq!(st, SimtriStatus::NullPointer);
    let st = unsafe { simtri_cosine_dense(a.as_ptr(), a.as_ptr(), 2, ptr::null_mut()) };
    assert_eq!(st, SimtriStatus::NullPointer);

    let (bi, bv) = ([4u32, 2], [1.0, 1.0]);
    let st = unsafe {
        simtri_cosine_sparse(
            bi.as_ptr(),
            bv.as_ptr(),
            2,
            bi.as_ptr(),
            bv.as_ptr(),
            2,
            &mut out,
        )
    };
    assert_eq!(st, SimtriStatus::InvalidVector);
}

unsafe fn collect(results: *mut SimtriResults) -> Vec<(usize, f64)> {
    let n = simtri_results_len(results);
    (0..n)
        .map(|i| {
            let (mut id, mut sim) = (0usize, 0.0f64);
            assert_eq!(
                simtri_results_get(results, i, &mut id, &mut sim),
                SimtriStatus::Ok
            );
            (id, sim)
        })
        .collect()
}

#[test]
fn vp_and_laesa_agree() {
    let n = 200;
    let data = grid_points(n);
    let q = [1.0, 0.2, 0.3];
    unsafe {
        let mut vp = ptr::null_mut();
        let mut la = ptr::null_mut();
        assert_eq!(
            simtri_vp_build(data.as_ptr(), n, 3, 4, 1, &mut vp),
            SimtriStatus::Ok
        );
        assert_eq!(
            simtri_laesa_build(data.as_ptr(), n, 3, 8, 1, &mut la),
            SimtriStatus::Ok
        );
        assert_eq!(simtri_index_len(vp), n);

        let mut r1 = ptr::null_mut();
        let mut r2 = ptr::null_mut();
        assert_eq!(
            simtri_index_knn(vp, q.as_ptr(), 3, 10, &mut r1),
            SimtriStatus::Ok
        );
        assert_eq!(
            simtri_index_knn(la, q.as_ptr(), 3, 10, &mut r2),
            SimtriStatus::Ok
        );
        let (a, b) = (collect(r1), collect(r2));
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].1 >= w[1].1));

        let mut stats = SimtriStats::default();
        assert_eq!(simtri_results_stats(r1, &mut stats), SimtriStatus::Ok);
        assert!(stats.sims_computed > 0 && stats.sims_computed <= n + 64);
        assert_eq!(
            simtri_results_get(r1, 10, ptr::null_mut(), ptr::null_mut()),
            SimtriStatus::InvalidArgument
        );
        simtri_results_free(r1);
        simtri_results_free(r2);

        let tau = a[4].1;
        let mut r = ptr::null_mut();
        assert_eq!(
            simtri_index_range(vp, q.as_ptr(), 3, tau, &mut r),
            SimtriStatus::Ok
        );
        let range = collect(r);
        assert!(range.len() >= 5);
        assert_eq!(&range[..5], &a[..5]);
        simtri_results_free(r);

        let mut r = ptr::null_mut();
        assert_eq!(
            simtri_index_range(vp, q.as_ptr(), 3, 2.0, &mut r),
            SimtriStatus::Domain
        );
        assert!(r.is_null());
        assert_eq!(
            simtri_index_knn(vp, q.as_ptr(), 2, 3, &mut r),
            SimtriStatus::DimensionMismatch
        );
        assert_eq!(
            simtri_index_knn(vp, q.as_ptr(), 3, 0, &mut r),
            SimtriStatus::InvalidArgument
        );
        assert_eq!(
            simtri_index_knn(ptr::null(), q.as_ptr(), 3, 1, &mut r),
            SimtriStatus::NullPointer
        );

        simtri_index_free(vp);
        simtri_index_free(la);
        simtri_index_free(ptr::null_mut());
        simtri_results_free(ptr::null_mut());
    }
}

#[test]
fn build_rejects_bad_input() {
    let data = [1.0, 0.0, 0.0, 0.0];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(
            simtri_vp_build(data.as_ptr(), 2, 2, 4, 1, &mut h),
            SimtriStatus::InvalidVector
        );
        assert!(last_error().starts_with("row 1"));
        assert_eq!(
            simtri_vp_build(data.as_ptr(), 0, 2, 4, 1, &mut h),
            SimtriStatus::InvalidArgument
        );
        assert_eq!(
            simtri_vp_build(data.as_ptr(), 1, 2, 0, 1, &mut h),
            SimtriStatus::InvalidArgument
        );
        assert_eq!(
            simtri_laesa_build(data.as_ptr(), 1, 2, 5, 1, &mut h),
            SimtriStatus::InvalidArgument
        );
        assert!(h.is_null());
    }
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("idx.json").to_str().unwrap()).unwrap();
    let data = grid_points(50);
    let q = [0.3, 1.0, 0.0];
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            simtri_laesa_build(data.as_ptr(), 50, 3, 4, 9, &mut h),
            SimtriStatus::Ok
        );
        assert_eq!(simtri_index_save(h, path.as_ptr()), SimtriStatus::Ok);
        let mut g = ptr::null_mut();
        assert_eq!(simtri_index_load(path.as_ptr(), &mut g), SimtriStatus::Ok);
        let (mut r1, mut r2) = (ptr::null_mut(), ptr::null_mut());
        simtri_index_knn(h, q.as_ptr(), 3, 5, &mut r1);
        simtri_index_knn(g, q.as_ptr(), 3, 5, &mut r2);
        assert_eq!(collect(r1), collect(r2));
        simtri_results_free(r1);
        simtri_results_free(r2);
        simtri_index_free(h);
        simtri_index_free(g);

        let missing = CString::new(dir.path().join("nope.json").to_str().unwrap()).unwrap();
        assert_eq!(
            simtri_index_load(missing.as_ptr(), &mut g),
            SimtriStatus::Io
        );
        std::fs::write(dir.path().join("bad.json"), "{}").unwrap();
        let bad = CString::new(dir.path().join("bad.json").to_str().unwrap()).unwrap();
        assert_eq!(
            simtri_index_load(bad.as_ptr(), &mut g),
            SimtriStatus::Format
        );
    }
}
