use std::fmt;
use std::io;

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERIC: u8 = 4;

/// Bad flags, conflicting options or missing input files.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return USAGE;
        }
        if let Some(e) = cause.downcast_ref::<csg_core::Error>() {
            return match e {
                csg_core::Error::Config(_) | csg_core::Error::UnknownWord(_) => USAGE,
                csg_core::Error::NonFinite { .. } => NUMERIC,
                csg_core::Error::Io(io) if io.kind() == io::ErrorKind::NotFound => USAGE,
                _ => DATA,
            };
        }
        if let Some(io) = cause.downcast_ref::<io::Error>() {
            return if io.kind() == io::ErrorKind::NotFound { USAGE } else { DATA };
        }
    }
    DATA
}
