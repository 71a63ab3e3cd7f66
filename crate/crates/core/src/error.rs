use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{origin}:{line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("self-loop on node {0}")]
    SelfLoop(u32),

    #[error("edge ({u}, {v}) has invalid weight {w}")]
    InvalidWeight { u: u32, v: u32, w: f64 },

    #[error("node id {id} out of range for a graph with {n} nodes")]
    NodeOutOfRange { id: u64, n: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sort key {0}: keys must be finite and non-negative")]
    InvalidKey(f64),

    #[error("edge {0} is not a crossing edge")]
    NotCrossing(u32),

    #[error("corrupt tree: {0}")]
    CorruptTree(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("non-crossing recovery did not settle after {0} sweeps")]
    NoConvergence(usize),

    #[error("worker panicked: {0}")]
    WorkerPanic(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
