use std::ffi::{CStr, CString};
use std::ptr;

use stv_manip_ffi::*;

fn parse(text: &str) -> *mut StvProfile {
    let text = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { stv_profile_parse(text.as_ptr(), &mut p) },
        StvStatus::Ok
    );
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let e = stv_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_string()
}

#[test]
fn winner_of_two_round_election() {
    let p = parse("m=3\n2: 0>1>2\n2: 1>2>0\n1: 2>1>0\n");
    unsafe {
        assert_eq!(stv_profile_candidates(p), 3);
        assert_eq!(stv_profile_total_weight(p), 5);
        let mut w = u32::MAX;
        assert_eq!(
            stv_winner(p, StvTieRule::MaxIndex, 0, &mut w),
            StvStatus::Ok
        );
        assert_eq!(w, 1);
        stv_profile_free(p);
    }
}

#[test]
fn manipulation_with_witness() {
    // A ballot topped by 0 forces a 3-3 tie with 1 in round two, broken against 1.
    let fixed = "m=3\n2: 0>1>2\n2: 1>2>0\n1: 2>1>0\n";
    let p = parse(fixed);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(
            stv_manipulate(p, 1, 0, StvTieRule::MaxIndex, 0, 0, &mut r),
            StvStatus::Ok
        );
        assert_eq!(stv_result_decision(r), StvDecision::Manipulable);
        assert!(stv_result_nodes(r) >= 1);
        let mut len = 0usize;
        assert_eq!(
            stv_result_witness(r, ptr::null_mut(), 0, &mut len),
            StvStatus::BufferTooSmall
        );
        assert_eq!(len, 3);
        let mut buf = [u32::MAX; 3];
        assert_eq!(
            stv_result_witness(r, buf.as_mut_ptr(), 3, &mut len),
            StvStatus::Ok
        );
        let mut sorted = buf;
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2]);
        stv_result_free(r);

        let ranking: Vec<String> = buf.iter().map(u32::to_string).collect();
        let q = parse(&format!("{fixed}1: {}\n", ranking.join(">")));
        let mut w = u32::MAX;
        assert_eq!(
            stv_winner(q, StvTieRule::MaxIndex, 0, &mut w),
            StvStatus::Ok
        );
        assert_eq!(w, 0);
        stv_profile_free(q);

        let mut r = ptr::null_mut();
        assert_eq!(
            stv_manipulate(p, 1, 2, StvTieRule::MaxIndex, 0, 0, &mut r),
            StvStatus::Ok
        );
        assert_eq!(stv_result_decision(r), StvDecision::NotManipulable);
        assert_eq!(
            stv_result_witness(r, ptr::null_mut(), 0, &mut len),
            StvStatus::Ok
        );
        assert_eq!(len, 0);
        stv_result_free(r);
        stv_profile_free(p);
    }
}

#[test]
fn matches_library_decision() {
    for seed in 0..40u64 {
        let mut p = ptr::null_mut();
        unsafe {
            assert_eq!(
                stv_profile_sample(StvDistribution::Urn, 4, 6, 1.0, seed, &mut p),
                StvStatus::Ok
            );
            let mut text = ptr::null_mut();
            assert_eq!(stv_profile_to_string(p, &mut text), StvStatus::Ok);
            let profile =
                stv_manip::io::parse_profile(CStr::from_ptr(text).to_str().unwrap()).unwrap();
            stv_string_free(text);
            for pref in 0..4u32 {
                let inst = stv_manip::ManipulationInstance::new(
                    profile.clone(),
                    2,
                    stv_manip::CandidateId(pref as u8),
                    stv_manip::TieRule::SeededRandom(seed),
                )
                .unwrap();
                let expected = stv_manip::manipulate_single(&inst, stv_manip::SearchLimits::NONE)
                    .unwrap()
                    .decision;
                let mut r = ptr::null_mut();
                assert_eq!(
                    stv_manipulate(p, 2, pref, StvTieRule::Random, seed, 0, &mut r),
                    StvStatus::Ok
                );
                let got = stv_result_decision(r);
                assert_eq!(
                    got == StvDecision::Manipulable,
                    expected == stv_manip::Decision::Manipulable
                );
                stv_result_free(r);
            }
            stv_profile_free(p);
        }
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new("m=3\n1: 0>0>1\n").unwrap();
        assert_eq!(
            stv_profile_parse(bad.as_ptr(), &mut p),
            StvStatus::ParseError
        );
        assert!(last_error().contains("line 2"));
        assert!(p.is_null());

        assert_eq!(
            stv_profile_parse(ptr::null(), &mut p),
            StvStatus::NullPointer
        );
        assert!(last_error().contains("text"));

        assert_eq!(
            stv_profile_sample(StvDistribution::Urn, 3, 3, -1.0, 0, &mut p),
            StvStatus::InvalidArgument
        );

        let empty = parse("m=3\n");
        let mut w = 0;
        assert_eq!(
            stv_winner(empty, StvTieRule::MaxIndex, 0, &mut w),
            StvStatus::EmptyElection
        );
        let mut r = ptr::null_mut();
        assert_eq!(
            stv_manipulate(empty, 1, 7, StvTieRule::MaxIndex, 0, 0, &mut r),
            StvStatus::InvalidArgument
        );
        assert_eq!(
            stv_manipulate(empty, 1, 300, StvTieRule::MaxIndex, 0, 0, &mut r),
            StvStatus::InvalidArgument
        );
        assert!(r.is_null());
        stv_profile_free(empty);

        stv_profile_free(ptr::null_mut());
        stv_result_free(ptr::null_mut());
        stv_string_free(ptr::null_mut());
        assert_eq!(stv_profile_candidates(ptr::null()), 0);
    }
}

#[test]
fn node_limit_reports_unresolved() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            stv_profile_sample(StvDistribution::Ic, 24, 24, 0.0, 3, &mut p),
            StvStatus::Ok
        );
        let mut saw_limit = false;
        for pref in 0..24 {
            let mut r = ptr::null_mut();
            assert_eq!(
                stv_manipulate(p, 1, pref, StvTieRule::MaxIndex, 0, 1, &mut r),
                StvStatus::Ok
            );
            let d = stv_result_decision(r);
            assert!(stv_result_nodes(r) <= 1 || d == StvDecision::LimitExceeded);
            saw_limit |= d == StvDecision::LimitExceeded;
            stv_result_free(r);
        }
        assert!(saw_limit);
        stv_profile_free(p);
    }
}

#[test]
fn fit_recovers_exponential() {
    let m: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = m.iter().map(|&x| 3.0 * 1.2f64.powf(x)).collect();
    let mut fit = StvFit::default();
    unsafe {
        assert_eq!(
            stv_fit_exponential(m.as_ptr(), y.as_ptr(), m.len(), &mut fit),
            StvStatus::Ok
        );
        assert!((fit.a - 3.0).abs() < 1e-9 && (fit.b - 1.2).abs() < 1e-12);
        assert_eq!(
            stv_fit_exponential(m.as_ptr(), y.as_ptr(), 1, &mut fit),
            StvStatus::InvalidArgument
        );
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stv_manip.h"))
            .unwrap();
    for f in [
        "stv_last_error",
        "stv_profile_parse",
        "stv_profile_sample",
        "stv_profile_free",
        "stv_profile_candidates",
        "stv_profile_total_weight",
        "stv_profile_to_string",
        "stv_string_free",
        "stv_winner",
        "stv_manipulate",
        "stv_result_decision",
        "stv_result_nodes",
        "stv_result_witness",
        "stv_result_free",
        "stv_fit_exponential",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct StvProfile StvProfile;"));
    assert!(header.contains("STV_STATUS_BUFFER_TOO_SMALL = 5"));
}
