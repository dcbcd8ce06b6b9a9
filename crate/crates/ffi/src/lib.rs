//! C ABI over `fair_gossip`.
//!
//! Configurations and traces are opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`FgStatus`]; on anything but `FG_STATUS_OK` the message is available from
//! [`fg_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as `FG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::CStr;
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fair_gossip::adversary::{CoalitionSpec, StrategySpec};
use fair_gossip::analysis::{fairness_test, run_fairness_experiment, Experiment, Verdict};
use fair_gossip::protocol::{AgentId, Color, Params};
use fair_gossip::sim::{classify_good_execution, export, run_trial, CalibrationConstants, SimConfig, Trace};
use fair_gossip::ConfigError;
use libc::{c_char, size_t};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    UnknownStrategy = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Simulation setup. Build with `fg_config_new`, release with `fg_config_free`.
pub struct FgConfig {
    inner: SimConfig,
}

/// A completed trial. Release with `fg_trace_free`.
pub struct FgTrace {
    inner: Trace,
}

/// Bit `i` of [`FgTrialSummary::good_flags`], in declaration order.
pub const FG_GOOD_VOTES: u32 = 1 << 0;
pub const FG_GOOD_K_DISTINCT: u32 = 1 << 1;
pub const FG_GOOD_FINDMIN: u32 = 1 << 2;
pub const FG_GOOD_COMMIT: u32 = 1 << 3;
pub const FG_GOOD_COHERENCE: u32 = 1 << 4;
pub const FG_GOOD_UNTAINTED: u32 = 1 << 5;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FgTrialSummary {
    /// Winning color, 0 when the run failed.
    pub outcome_color: u32,
    /// Owner of the final certificate, 0 when there is none.
    pub winner: u32,
    pub rounds_elapsed: u32,
    pub good_flags: u32,
    pub total_messages: u64,
    pub max_message_bits: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FgFairnessSummary {
    pub trials: u64,
    pub successes: u64,
    pub fail_count: u64,
    /// Largest `|frequency - share|` over the colors.
    pub max_abs_deviation: f64,
    /// 1 pass, 0 fail, -1 indeterminate.
    pub verdict: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg.into()));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn config_status(e: &ConfigError) -> FgStatus {
    set_error(e.to_string());
    match e {
        ConfigError::UnknownStrategy(_) => FgStatus::UnknownStrategy,
        _ => FgStatus::InvalidConfig,
    }
}

fn guard(f: impl FnOnce() -> FgStatus) -> FgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside fair_gossip");
            FgStatus::Panic
        }
    }
}

unsafe fn slice<'a>(data: *const u32, len: size_t) -> Option<&'a [u32]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(data, len))
    }
}

macro_rules! non_null {
    ($p:expr) => {
        if $p.is_null() {
            set_error(concat!("`", stringify!($p), "` is null"));
            return FgStatus::NullPointer;
        }
    };
}

/// Creates a config for `n` agents split evenly between colors 1 and 2.
/// Writes the handle to `*out`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fg_config_new(n: u32, gamma: f64, chi: f64, out: *mut *mut FgConfig) -> FgStatus {
    guard(|| {
        non_null!(out);
        let params = match Params::derive(n, gamma, chi, 2) {
            Ok(p) => p,
            Err(e) => return config_status(&e),
        };
        let colors = (1..=n).map(|i| Color(if i <= n.div_ceil(2) { 1 } else { 2 })).collect();
        *out = Box::into_raw(Box::new(FgConfig { inner: SimConfig::new(params, colors) }));
        FgStatus::Ok
    })
}

/// # Safety
/// `config` must come from `fg_config_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fg_config_free(config: *mut FgConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the color of agent `i + 1` to `colors[i]`; `len` must equal `n`.
/// The color alphabet grows to the largest color given.
///
/// # Safety
/// `config` must be a live handle; `colors` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn fg_config_set_colors(config: *mut FgConfig, colors: *const u32, len: size_t) -> FgStatus {
    guard(|| {
        non_null!(config);
        let Some(colors) = slice(colors, len) else {
            set_error("`colors` is null");
            return FgStatus::NullPointer;
        };
        let cfg = &mut (*config).inner;
        if colors.len() != cfg.params.n as usize {
            return config_status(&ConfigError::ColorCount { got: colors.len(), n: cfg.params.n });
        }
        if colors.contains(&0) {
            set_error("colors start at 1");
            return FgStatus::InvalidArgument;
        }
        let sigma = colors.iter().copied().max().unwrap_or(1).max(cfg.params.sigma_size);
        match Params::derive(cfg.params.n, cfg.params.gamma, cfg.params.chi, sigma) {
            Ok(p) => cfg.params = p,
            Err(e) => return config_status(&e),
        }
        cfg.colors = colors.iter().map(|&c| Color(c)).collect();
        FgStatus::Ok
    })
}

/// Replaces the faulty set and fault bound `alpha`.
///
/// # Safety
/// `config` must be a live handle; `ids` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn fg_config_set_faulty(
    config: *mut FgConfig,
    ids: *const u32,
    len: size_t,
    alpha: f64,
) -> FgStatus {
    guard(|| {
        non_null!(config);
        let Some(ids) = slice(ids, len) else {
            set_error("`ids` is null");
            return FgStatus::NullPointer;
        };
        let cfg = &mut (*config).inner;
        cfg.faulty = ids.iter().map(|&i| AgentId(i)).collect();
        cfg.alpha = alpha;
        FgStatus::Ok
    })
}

/// Sets the coalition to `ids` running the built-in strategy `strategy`
/// (a NUL-terminated name). `len == 0` removes the coalition.
///
/// # Safety
/// `config` must be a live handle; `ids` must point to `len` values;
/// `strategy` must be a NUL-terminated string when `len > 0`.
#[no_mangle]
pub unsafe extern "C" fn fg_config_set_coalition(
    config: *mut FgConfig,
    ids: *const u32,
    len: size_t,
    strategy: *const c_char,
) -> FgStatus {
    guard(|| {
        non_null!(config);
        let cfg = &mut (*config).inner;
        if len == 0 {
            cfg.coalition = None;
            return FgStatus::Ok;
        }
        non_null!(strategy);
        let Some(ids) = slice(ids, len) else {
            set_error("`ids` is null");
            return FgStatus::NullPointer;
        };
        let Ok(name) = CStr::from_ptr(strategy).to_str() else {
            set_error("strategy name is not UTF-8");
            return FgStatus::InvalidArgument;
        };
        let spec = StrategySpec::named(name);
        if let Err(e) = fair_gossip::adversary::StrategyRegistry::default().build(&spec) {
            return config_status(&e);
        }
        cfg.coalition = Some(CoalitionSpec::new(ids.iter().map(|&i| AgentId(i)), spec));
        FgStatus::Ok
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fg_config_set_seed(config: *mut FgConfig, seed: u64) -> FgStatus {
    guard(|| {
        non_null!(config);
        (*config).inner.seed = seed;
        FgStatus::Ok
    })
}

/// Validates `config`, runs one trial and writes a new trace handle to `*out`.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fg_run_trial(config: *const FgConfig, out: *mut *mut FgTrace) -> FgStatus {
    guard(|| {
        non_null!(config);
        non_null!(out);
        match run_trial(&(*config).inner) {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(FgTrace { inner: trace }));
                FgStatus::Ok
            }
            Err(e) => config_status(&e),
        }
    })
}

/// # Safety
/// `trace` must come from `fg_run_trial` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fg_trace_free(trace: *mut FgTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `trace` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fg_trace_summary(trace: *const FgTrace, out: *mut FgTrialSummary) -> FgStatus {
    guard(|| {
        non_null!(trace);
        non_null!(out);
        let t = &(*trace).inner;
        let f = classify_good_execution(t, &CalibrationConstants::default());
        let bits = [
            f.d2_votes_theta_logn,
            f.d2_k_distinct,
            f.d2_findmin_converged,
            f.d3_commit_covered,
            f.d3_coherence_agree_or_fail,
            f.d3_untainted_voter,
        ];
        *out = FgTrialSummary {
            outcome_color: t.outcome.color().map_or(0, |c| c.0),
            winner: t.winner.map_or(0, |w| w.0),
            rounds_elapsed: t.stats.rounds_elapsed,
            good_flags: bits.iter().enumerate().map(|(i, &b)| (b as u32) << i).sum(),
            total_messages: t.stats.total_messages,
            max_message_bits: t.stats.max_message_bits,
        };
        FgStatus::Ok
    })
}

/// Writes the trace as JSON lines to the file at `path`.
///
/// # Safety
/// `trace` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fg_trace_write_jsonl(trace: *const FgTrace, path: *const c_char) -> FgStatus {
    guard(|| {
        non_null!(trace);
        non_null!(path);
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not UTF-8");
            return FgStatus::InvalidArgument;
        };
        let t = &(*trace).inner;
        let flags = classify_good_execution(t, &CalibrationConstants::default());
        let result = File::create(path).and_then(|f| export::write_jsonl(t, flags, BufWriter::new(f)));
        match result {
            Ok(()) => FgStatus::Ok,
            Err(e) => {
                set_error(format!("{path}: {e}"));
                FgStatus::Io
            }
        }
    })
}

/// Runs `trials` trials at seeds `seed0..` and tests color frequencies
/// against active shares at `sigma_mult` standard errors. The failure-rate
/// bound is `max_fail_rate`.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fg_fairness_experiment(
    config: *const FgConfig,
    trials: u64,
    seed0: u64,
    sigma_mult: f64,
    max_fail_rate: f64,
    out: *mut FgFairnessSummary,
) -> FgStatus {
    guard(|| {
        non_null!(config);
        non_null!(out);
        if trials == 0 {
            set_error("trials must be at least 1");
            return FgStatus::InvalidArgument;
        }
        let exp = Experiment::new((*config).inner.clone());
        let report = match run_fairness_experiment(&exp, trials, seed0) {
            Ok(r) => r,
            Err(e) => return config_status(&e),
        };
        let v = fairness_test(&report, sigma_mult, max_fail_rate);
        *out = FgFairnessSummary {
            trials: report.trials,
            successes: report.successes,
            fail_count: report.fail_count,
            max_abs_deviation: report.colors.iter().map(|c| (c.frequency - c.active_share).abs()).fold(0.0, f64::max),
            verdict: match v.verdict {
                Verdict::Pass => 1,
                Verdict::Fail => 0,
                Verdict::Indeterminate => -1,
            },
        };
        FgStatus::Ok
    })
}

/// Length in bytes of the last error message on this thread, without the NUL; 0 if none.
#[no_mangle]
pub extern "C" fn fg_last_error_length() -> size_t {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |m| m.len()))
}

/// Copies the last error message on this thread into `buf` as a
/// NUL-terminated string. Returns `FG_STATUS_BUFFER_TOO_SMALL` when `len`
/// cannot hold the message and its NUL; an empty string is written when
/// there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn fg_last_error_message(buf: *mut c_char, len: size_t) -> FgStatus {
    if buf.is_null() {
        return FgStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let msg = e.as_deref().unwrap_or("");
        if msg.len() + 1 > len {
            return FgStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, msg.len());
        *buf.add(msg.len()) = 0;
        FgStatus::Ok
    })
}
