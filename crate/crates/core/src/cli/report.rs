use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;

pub const AMBIGUITY_HINT: &str = "rescale input or raise --tol";

/// Envelope printed in `--json` mode. Everything except `wall_time_ms` is a
/// function of the command line and the input files.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub results: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub wall_time_ms: u128,
}

/// SHA-256 over the arguments and input file contents, length-prefixed so
/// that different splits cannot collide.
pub fn inputs_digest(args: &[String], files: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for part in args.iter().map(|a| a.as_bytes()).chain(files.iter().map(Vec::as_slice)) {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ToleranceAmbiguity { .. } => EXIT_AMBIGUOUS,
        Error::MalformedDescription(_) | Error::InvalidJson(_) => EXIT_PARSE,
        _ => EXIT_FAILURE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_split() {
        let a = inputs_digest(&["ab".into()], &[]);
        let b = inputs_digest(&["a".into(), "b".into()], &[]);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
        assert_eq!(a, inputs_digest(&["ab".into()], &[]));
    }

    #[test]
    fn exit_codes() {
        let amb = Error::ToleranceAmbiguity {
            singular_value: 1e-7,
            cut: 1e-7,
        };
        assert_eq!(exit_code(&amb), EXIT_AMBIGUOUS);
        assert_eq!(exit_code(&Error::MalformedDescription("x".into())), EXIT_PARSE);
        assert_eq!(exit_code(&Error::NeedTwoEntries), EXIT_FAILURE);
    }
}
