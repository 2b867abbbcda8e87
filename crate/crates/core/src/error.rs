use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parameter mismatch: {0}")]
    Mismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("window underflow: nonzero coefficient at exponent {exponent} below Vmin = {vmin}")]
    WindowUnderflow { exponent: i32, vmin: i32 },
    #[error("precision error: exponent {exponent} needed but precision is {precision}")]
    Precision { exponent: i32, precision: i32 },
    #[error("resolution error: need m >= {needed}, got {got}")]
    Resolution { needed: i32, got: i32 },
    #[error("window error: {0}")]
    Window(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {0} leaves the translation set")]
    OutOfLambda(String),
}

pub type Result<T> = std::result::Result<T, Error>;
