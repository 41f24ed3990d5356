pub mod commands;
pub mod config;
pub mod guide;

use shellmc::Error;

/// Process exit code for an error: 2 for configuration problems, 3 for
/// numerical-reliability failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::Unreliable(_) => 3,
        _ => 2,
    }
}
