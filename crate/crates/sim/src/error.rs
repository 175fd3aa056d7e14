//! Tool-level errors mapped onto process exit codes.

use apeps_core::channel::ChannelError;
use apeps_core::config::ConfigError;
use apeps_core::engine::EngineError;
use apeps_core::scheduler::LedgerError;
use apeps_core::traffic::TraceError;
use thiserror::Error;

use crate::configfile::ConfigFileError;

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    ConfigFile(#[from] ConfigFileError),
    #[error("vbr trace: {0}")]
    VbrTrace(#[from] TraceError),
    #[error("channel trace: {0}")]
    ChannelTrace(#[from] ChannelError),
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("runtime invariant violation at frame {frame}: {detail}")]
    Invariant { frame: u64, detail: LedgerError },
    #[error("{failed} of {total} sweep runs failed")]
    SweepFailures { failed: usize, total: usize },
}

impl ToolError {
    /// 2 for configuration problems, 3 for runtime invariant traps,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Config(_)
            | ToolError::ConfigFile(_)
            | ToolError::VbrTrace(_)
            | ToolError::ChannelTrace(_)
            | ToolError::Spec(_) => 2,
            ToolError::Invariant { .. } => 3,
            ToolError::Io { .. } | ToolError::SweepFailures { .. } => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        ToolError::Io { path: path.display().to_string(), source }
    }
}

impl From<EngineError> for ToolError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(c) => ToolError::Config(c),
            EngineError::Invariant { frame, detail } => ToolError::Invariant { frame, detail },
        }
    }
}
