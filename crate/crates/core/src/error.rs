use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(
        "QP solver failed after {iterations} iterations \
         (dim {dim}, {rows} rows, active set {active_set:?})"
    )]
    SolverFailure {
        iterations: usize,
        dim: usize,
        rows: usize,
        active_set: Vec<usize>,
    },

    #[error("pair ({i}, {j}) is outside the admissible set (h = {h}, hdot = {hdot})")]
    OutsideAdmissibleSet { i: usize, j: usize, h: f64, hdot: f64 },

    #[error("could not place {n_agents} agents without overlap after {attempts} attempts")]
    ScenarioGeneration { n_agents: usize, attempts: usize },

    #[error("trial {trial} ({policy}) failed: {source}")]
    Trial {
        trial: usize,
        policy: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
