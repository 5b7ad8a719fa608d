use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole at evaluation point")]
    PoleAtEvaluationPoint,
    #[error("singularity on contour")]
    SingularityOnContour,
    #[error("endpoint solve failed: {0}")]
    EndpointSolveFailed(String),
    #[error("critical/non-regular potential: moment polynomial vanishes on the cut")]
    NonRegularPotential,
    #[error("zero of M on the cut (critical curve)")]
    MomentZeroOnCut,
    #[error("branch point / on-cut input")]
    OnCutInput,
    #[error("pole of map at z = 0")]
    MapPole,
    #[error("kernel pole")]
    KernelPole,
    #[error("mirror-pole evaluation (z1*z2 = 1)")]
    MirrorPole,
    #[error("double pole of shifted correlator (z1 = z2)")]
    ShiftedDiagonal,
    #[error("coincident-point evaluation unsupported")]
    CoincidentPoints,
    #[error("not on physical sheet (|z| <= 1)")]
    NotOnPhysicalSheet,
    #[error("branch-point angle (theta in {{0, pi}})")]
    BranchPointAngle,
    #[error("correlator order not supported: {0}")]
    UnsupportedKey(String),
    #[error("degenerate configuration (-inf weight)")]
    DegenerateConfiguration,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
