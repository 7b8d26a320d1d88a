use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rank kappa={0}: must be between 1 and 16")]
    InvalidRank(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("commutation hypothesis violated: worst pair ({i},{j}) has defect {defect:.3e} > {tol:.3e}")]
    CommutationDefect {
        i: usize,
        j: usize,
        defect: f64,
        tol: f64,
    },

    #[error("eigenvalue within 0.1*eps of the contour |z|={eps:.3e} (closest at |z|={closest:.3e}); try eps={suggestion:.3e}")]
    ContourTooClose {
        eps: f64,
        closest: f64,
        suggestion: f64,
    },

    #[error("peripheral eigenvalue {value} with |.| in [1-tol, 1+tol] but away from 1; power limit does not exist")]
    PeripheralEigenvalue { value: String },

    #[error("power iteration failed to contract geometrically (|R^2k - R^k| ratio {ratio:.3}); peripheral eigenvalue != 1 or Jordan block")]
    PowerNotContracting { ratio: f64 },

    #[error("spectral radius {rho:.6} exceeds 1 + tol")]
    SpectralRadiusExceeded { rho: f64 },

    #[error("quadrature did not converge: relative change {change:.3e} after doubling to {nodes} nodes")]
    QuadratureNotConverged { change: f64, nodes: usize },

    #[error("matrix is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("escape profile invariant violated after {retries} retries: {reason}")]
    EscapeInvariant { retries: usize, reason: String },

    #[error("lattice radius K={k} exceeds ceiling {ceiling} for base dimension {d}")]
    LatticeCeiling { k: usize, ceiling: usize, d: usize },

    #[error("cone is not a proper subcone of the Weyl chamber: {0}")]
    ImproperCone(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("no generalized weight space at the given lambda")]
    EmptyWeightSpace,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
