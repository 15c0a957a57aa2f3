//! Numerical side: sectorised spaces, route-following maps, contraction of
//! skeletal circuits and unitarity certification.

mod certify;
mod choi;
mod contract;
mod dump;
pub mod haar;
mod space;

pub use certify::{
    certify_fleshing, certify_isometry, certify_superunitary, deviations, CertifyOptions, CertifyReport, TrialResult,
};
pub use choi::{
    analyze, choi_vector, from_choi_vector, process_matrix, swap_fleshing, swap_map, ChoiReport, ProcessMatrixView,
    MAX_CHOI_DIM,
};
pub use contract::{contract_skeletal, contract_skeletal_with, contract_unchecked, ContractionOrder};
pub use dump::{read_dump, write_dump, DumpHeader};
pub use haar::{check_balance, haar_unitary, random_fleshing, random_routed_unitary};
pub use space::{arrow_space, identity_deviation, node_spaces, select, CMatrix, ProductSpace, SectoredMap, SectoredSpace};

use thiserror::Error;

use crate::graph::GraphError;

/// Entries in forbidden blocks above this are route violations.
pub const LEAKAGE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("branch {branch} is unbalanced: input dimension {in_dim}, output dimension {out_dim}")]
    UnbalancedBranch { branch: String, in_dim: usize, out_dim: usize },
    #[error("practical input dimension {in_dim} differs from practical output dimension {out_dim}")]
    DimensionMismatch { in_dim: usize, out_dim: usize },
    #[error("map at node `{0}` does not follow its route")]
    RouteViolation(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("no node is flagged as a party slot")]
    MissingPartyFlags,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("dump format: {0}")]
    Format(String),
}

pub type TensorResult<T> = Result<T, TensorError>;

/// One map per node, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleshing {
    pub maps: Vec<SectoredMap>,
}
