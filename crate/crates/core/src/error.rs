use alloc::string::String;

use crate::rational::ParseRationalError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("instance has no agents")]
    EmptyInstance,
    #[error("invalid cost parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid lottery: {0}")]
    InvalidLottery(&'static str),
    #[error("index {index} out of range for {len} agents")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid range: {0}")]
    InvalidRange(&'static str),
    #[error("this construction needs symmetric peaks (b_left = b_right)")]
    NonSymmetricParams,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("search budget of {budget} mechanism evaluations exceeded")]
    SearchBudgetExceeded { budget: u64 },
    #[error("certificate failed its exact re-check")]
    RecheckFailed,
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
}
