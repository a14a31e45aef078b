use irs_core::beamforming::BeamError;
use irs_core::channel::ChannelError;
use irs_core::estimation::EstimationError;
use irs_core::routing::RoutingError;
use irs_core::scene::SceneError;
use irs_core::training::TrainingError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scene file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Routing(RoutingError),
    #[error(transparent)]
    Beam(#[from] BeamError),
    #[error(transparent)]
    Training(#[from] TrainingError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl From<RoutingError> for SimError {
    fn from(e: RoutingError) -> Self {
        match e {
            RoutingError::NoFeasiblePath { .. } | RoutingError::Infeasible { .. } => SimError::Infeasible(e.to_string()),
            other => SimError::Routing(other),
        }
    }
}

impl SimError {
    /// Process exit code: 2 for bad input, 3 for infeasible problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Io { .. } | SimError::Json(_) | SimError::Scene(_) | SimError::Config(_) => 2,
            SimError::Infeasible(_) => 3,
            _ => 1,
        }
    }
}
