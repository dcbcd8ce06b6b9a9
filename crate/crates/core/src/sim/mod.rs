//! Trial execution on the complete graph: scheduling, faults, traces,
//! good-execution classification and trace export.

mod classify;
mod config;
mod engine;
pub mod export;
mod message;
mod trace;

pub use classify::{classify_good_execution, CalibrationConstants, GoodExecutionFlags};
pub use config::{parse_color_shorthand, spread_coalition, FaultSpec, SimConfig};
pub use engine::{init_simulation, init_simulation_with, run_trial, run_trial_with_strategy, SimState};
pub use message::{ceil_log2, message_size_bits, FieldWidths, Message, MessageKind, MessageStats, Payload};
pub use trace::{FirstDeclaration, Trace, Transition};
