use std::ffi::CString;
use std::path::Path;
use std::process::Command;
use std::ptr;

use fair_gossip_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as libc::c_char; fg_last_error_length() + 1];
    assert_eq!(unsafe { fg_last_error_message(buf.as_mut_ptr(), buf.len()) }, FgStatus::Ok);
    let bytes: Vec<u8> = buf.iter().take_while(|&&c| c != 0).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn config(n: u32) -> *mut FgConfig {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { fg_config_new(n, 4.0, 1.0, &mut cfg) }, FgStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn lifecycle() {
    unsafe {
        let cfg = config(4);
        let colors = [1u32, 2, 2, 2];
        assert_eq!(fg_config_set_colors(cfg, colors.as_ptr(), colors.len()), FgStatus::Ok);
        let faulty = [2u32, 3, 4];
        assert_eq!(fg_config_set_faulty(cfg, faulty.as_ptr(), faulty.len(), 1.0), FgStatus::Ok);
        assert_eq!(fg_config_set_seed(cfg, 7), FgStatus::Ok);
        let mut trace = ptr::null_mut();
        assert_eq!(fg_run_trial(cfg, &mut trace), FgStatus::Ok);
        let mut s = FgTrialSummary::default();
        assert_eq!(fg_trace_summary(trace, &mut s), FgStatus::Ok);
        // only agent 1 is active
        assert_eq!(s.outcome_color, 1);
        assert_eq!(s.winner, 1);
        assert_eq!(s.rounds_elapsed, 4 * 6);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(fg_trace_write_jsonl(trace, cpath.as_ptr()), FgStatus::Ok);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().last().unwrap().contains("\"outcome\":\"1\""));

        fg_trace_free(trace);
        fg_config_free(cfg);
    }
}

#[test]
fn fairness_summary() {
    unsafe {
        let cfg = config(8);
        let mut out = FgFairnessSummary::default();
        assert_eq!(fg_fairness_experiment(cfg, 200, 0, 4.0, 0.05, &mut out), FgStatus::Ok);
        assert_eq!(out.trials, 200);
        assert_eq!(out.successes + out.fail_count, 200);
        assert_eq!(out.verdict, 1);
        assert_eq!(fg_fairness_experiment(cfg, 0, 0, 4.0, 0.05, &mut out), FgStatus::InvalidArgument);
        fg_config_free(cfg);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(fg_config_new(0, 4.0, 1.0, &mut cfg), FgStatus::InvalidConfig);
        assert!(last_error().contains("`n`"));
        assert_eq!(fg_config_new(4, 4.0, 1.0, ptr::null_mut()), FgStatus::NullPointer);

        let cfg = config(4);
        let colors = [1u32, 2];
        assert_eq!(fg_config_set_colors(cfg, colors.as_ptr(), 2), FgStatus::InvalidConfig);
        assert!(last_error().contains("color count"));

        let ids = [1u32];
        let bogus = CString::new("no_such").unwrap();
        assert_eq!(fg_config_set_coalition(cfg, ids.as_ptr(), 1, bogus.as_ptr()), FgStatus::UnknownStrategy);
        assert!(last_error().contains("no_such"));

        let honest = CString::new("honest").unwrap();
        assert_eq!(fg_config_set_coalition(cfg, ids.as_ptr(), 1, honest.as_ptr()), FgStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(fg_config_set_faulty(cfg, ids.as_ptr(), 1, 1.0), FgStatus::Ok);
        let mut trace = ptr::null_mut();
        assert_eq!(fg_run_trial(cfg, &mut trace), FgStatus::InvalidConfig);
        assert!(trace.is_null());
        assert!(last_error().contains("faulty and a coalition member"));

        let mut small = [0 as libc::c_char; 4];
        assert_eq!(fg_last_error_message(small.as_mut_ptr(), small.len()), FgStatus::BufferTooSmall);
        assert_eq!(fg_trace_summary(ptr::null(), ptr::null_mut()), FgStatus::NullPointer);

        fg_config_free(cfg);
        fg_config_free(ptr::null_mut());
        fg_trace_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fair_gossip.h");
    assert!(header.exists());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status =
            Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not found, skipping"),
        }
    }
}
