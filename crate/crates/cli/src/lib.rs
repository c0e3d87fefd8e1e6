//! Front end for the `opsys-index` binary: input parsing, the run record,
//! the on-disk cache and the subcommands.

pub mod cache;
pub mod commands;
pub mod input;
pub mod record;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("malformed input: {0}")]
    Input(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Core(#[from] opsys_index::Error),
    #[error("ambient SDP block dimension {dim} exceeds the cap {cap} (see --size-cap)")]
    SizeGuard { dim: usize, cap: usize },
}
