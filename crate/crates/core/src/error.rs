use thiserror::Error;

/// Every failure the geometry routines can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("metric is singular at {point:?} (|det g| = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },
    #[error("point {point:?} lies outside the domain of chart '{chart}': {reason}")]
    OutOfDomain { chart: String, point: Vec<f64>, reason: String },
    #[error("derivatives of order {requested} unavailable (provider supplies {available})")]
    JetUnavailable { requested: usize, available: usize },
    #[error("operation needs dimension {required}, got {got}")]
    DimensionUnsupported { required: String, got: usize },
    #[error("form degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("hodge star requested on an unoriented patch '{0}'")]
    OrientationUnset(String),
    #[error("integration failed at parameter {at}: {reason}")]
    IntegrationFailure { at: f64, reason: String },
    #[error("projection onto the transverse hypersurface is undefined: {0}")]
    ProjectionUndefined(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("scalar curvatures must be nonzero and of sign {expected}: got {got:?}")]
    SignMismatch { expected: i8, got: Vec<String> },
    #[error("scalar curvature constraints are incompatible: {0}")]
    IncompatibleScalars(String),
    #[error("base metric '{0}' has zero scalar curvature; its metric cone is unavailable")]
    RicciFlatBase(String),
    #[error("cone constants disagree: {0}")]
    LambdaMismatch(String),
    #[error("parameter mu = {0} is not admissible here (needs mu != 0)")]
    BadMu(f64),
    #[error("form is not special Killing: residual {residual:e} exceeds {tolerance:e}")]
    NotSpecialKilling { residual: f64, tolerance: f64 },
    #[error("factor '{label}' has scalar curvature {got}, expected {expected}")]
    BadNormalization { label: String, got: String, expected: String },
    #[error("chart mismatch: expected '{expected}', got '{got}'")]
    ChartMismatch { expected: String, got: String },
    #[error("catalog entry '{0}' could not be parsed: {1}")]
    Catalog(String, String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
