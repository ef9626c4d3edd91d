//! Dense semidefinite programming for the two problem shapes of the pipeline.

pub mod block;
pub mod ipm;
pub mod lmi;

pub use block::{BlockOperator, BlockTerm};
pub use ipm::{solve_linear_sdp, IpmOptions, LinearSdp, SdpSolution, SdpStatus};
pub use lmi::{solve_lmi_max, LmiMaxProblem, LmiSolution};
