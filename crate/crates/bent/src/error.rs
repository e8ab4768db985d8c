use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed matrix dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Core(#[from] bent_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status; see [`EXIT_CODES`].
    pub fn exit_code(&self) -> i32 {
        use bent_core::Error as E;
        match self {
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Dump(_) => 5,
            CliError::Core(e) => match e {
                E::InvalidCutoff(_) => 10,
                E::NonHermitian { .. } => 11,
                E::EmptyInput => 12,
                E::ZeroTrace(_) => 13,
                E::InvalidParameter(_) => 14,
                E::CutoffExceeded { .. } => 15,
                E::DimensionMismatch { .. } => 16,
                E::Overflow { .. } => 17,
                E::BlockLeakage { .. } => 18,
                E::InvalidScaling { .. } => 19,
                E::DegenerateAngle => 20,
            },
        }
    }
}

pub const EXIT_CODES: &str = "\
Exit codes:
   0  completed (any verdict)
   2  invalid command line
   3  configuration error
   4  file I/O error
   5  malformed matrix dump
  10  invalid Fock cutoff
  11  non-hermitian matrix
  12  empty input
  13  zero or negative trace
  14  invalid parameter
  15  photon number exceeds cutoff
  16  dimension mismatch
  17  arithmetic overflow
  18  partial transpose leaks between blocks
  19  invalid diagonal scaling
  20  degenerate beam splitter angle";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_and_documented() {
        use bent_core::Error as E;
        let errors = vec![
            CliError::Config(String::new()),
            CliError::io(Path::new("x"), std::io::Error::other("x")),
            CliError::Dump(String::new()),
            CliError::Core(E::InvalidCutoff(1)),
            CliError::Core(E::NonHermitian {
                deviation: 1.0,
                tolerance: 0.0,
            }),
            CliError::Core(E::EmptyInput),
            CliError::Core(E::ZeroTrace(0.0)),
            CliError::Core(E::InvalidParameter(String::new())),
            CliError::Core(E::CutoffExceeded { n: 1, n_max: 0 }),
            CliError::Core(E::DimensionMismatch { expected: 1, found: 2 }),
            CliError::Core(E::Overflow { max_admissible: 0 }),
            CliError::Core(E::InvalidScaling { index: 0 }),
            CliError::Core(E::DegenerateAngle),
        ];
        let mut codes: Vec<i32> = errors.iter().map(CliError::exit_code).collect();
        codes.push(18);
        let n = codes.len();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), n);
        for c in codes {
            assert!(EXIT_CODES.contains(&format!("{c:>4}  ")), "code {c} undocumented");
        }
    }
}
