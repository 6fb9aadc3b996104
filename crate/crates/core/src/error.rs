use core::fmt;

/// Errors raised by grid, weight, operator and evolution construction.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// The outer index `M` is below the minimum of 8.
    GridTooSmall { last_index: f64 },
    /// Grid parameters that cannot describe a grid.
    InvalidGrid(&'static str),
    /// `p` (or `l`, `n`) outside the supported range.
    InvalidPower(&'static str),
    /// Evans weights need an even `p` on the centred grid.
    OddPOnCentredGrid { p: u32 },
    /// `i_star` too small to reach the asymptotic regime for this `p`.
    PrecisionExhausted { p: u32, i_star: u32, required: u32 },
    /// Tail evaluated below the index where it is trustworthy.
    BelowTailThreshold { index: f64, threshold: f64 },
    /// Weight table does not match the scheme request.
    TableMismatch(&'static str),
    /// Boundary coefficients of mixed sign.
    IllPosedSigns,
    /// `s = rho mu + sigma nu` vanishes for a derivative condition.
    DegenerateS,
    /// The projector normal `L W^{-1} L^T` vanishes.
    SingularNormal,
    /// Boundary variant that cannot be turned into a projector.
    UnsupportedBoundary,
    /// Initial data does not vanish at the outer boundary.
    SupportTouchesBoundary,
    /// A field value became NaN or infinite.
    NonFinite { t: f64 },
    /// Grids whose points do not line up under refinement.
    MisalignedGrids,
    /// Invalid run parameters.
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridTooSmall { last_index } => write!(f, "grid too small: M = {last_index} < 8"),
            Error::InvalidGrid(m) => write!(f, "invalid grid: {m}"),
            Error::InvalidPower(m) => write!(f, "invalid power: {m}"),
            Error::OddPOnCentredGrid { p } => {
                write!(f, "Evans weights need even p on the centred grid (p = {p})")
            }
            Error::PrecisionExhausted { p, i_star, required } => write!(
                f,
                "i_star = {i_star} is too small for p = {p}; at least {required} is needed"
            ),
            Error::BelowTailThreshold { index, threshold } => {
                write!(f, "tail evaluated at i = {index}, below threshold {threshold}")
            }
            Error::TableMismatch(m) => write!(f, "weight table mismatch: {m}"),
            Error::IllPosedSigns => write!(f, "boundary coefficients have mixed signs"),
            Error::DegenerateS => write!(f, "rho mu + sigma nu must be positive"),
            Error::SingularNormal => write!(f, "projector normal L W^-1 L^T vanishes"),
            Error::UnsupportedBoundary => write!(f, "boundary variant cannot be projected"),
            Error::SupportTouchesBoundary => write!(f, "initial data does not vanish at r = R"),
            Error::NonFinite { t } => write!(f, "non-finite field value at t = {t}"),
            Error::MisalignedGrids => write!(f, "grid points do not align under refinement"),
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
        }
    }
}

impl core::error::Error for Error {}
