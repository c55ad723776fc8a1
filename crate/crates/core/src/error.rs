use thiserror::Error;

/// Which characteristic-polynomial evaluation hit a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleSite {
    /// f(0), the carrier.
    Carrier,
    /// f(-nu), entering the heating (blue sideband) amplitudes.
    Heating,
    /// f(+nu), entering the cooling (red sideband) amplitudes.
    Cooling,
}

impl std::fmt::Display for PoleSite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoleSite::Carrier => write!(f, "f(0)"),
            PoleSite::Heating => write!(f, "f(-nu)"),
            PoleSite::Cooling => write!(f, "f(+nu)"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cavity coupling vanishes at zeroth order (cos(phi) = 0) but tan(phi) is required")]
    DegenerateCoupling,

    #[error("physical input `{0}` must be strictly positive")]
    NonPositiveInput(&'static str),

    #[error("exact dressed-state pole: |{site}| = {magnitude:e} is below the floor {floor:e}")]
    PoleAtResonance {
        site: PoleSite,
        magnitude: f64,
        floor: f64,
    },

    #[error("optimal detuning diverges at delta_c = -nu (sideband asymptote)")]
    DivergentOptimum,

    #[error("parameters lie in a heating region: {0}")]
    HeatingRegion(String),

    #[error("geometry violates the formula's assumption: {0}")]
    GeometryViolation(String),

    #[error("small-kappa expansion invalid: kappa = {kappa} is not below the narrow linewidth {gamma_minus}")]
    ExpansionInvalid { kappa: f64, gamma_minus: f64 },

    #[error("truncation leak: population {population:e} at the top level exceeds {bound:e}")]
    TruncationLeak { population: f64, bound: f64 },

    #[error("heating regime: A- = {a_minus} <= A+ = {a_plus}")]
    HeatingRegime { a_minus: f64, a_plus: f64 },

    #[error("resolvent (L + i nu) is numerically singular")]
    SingularResolvent,

    #[error("Liouvillian kernel is degenerate (steady state not unique)")]
    DegenerateKernel,

    #[error("time step too large: single-step jump probability {probability} exceeds {limit}")]
    StepTooLarge { probability: f64, limit: f64 },

    #[error("trajectories do not share a common time grid")]
    GridMismatch,

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable name, used in CSV error columns and JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DegenerateCoupling => "degenerate-coupling",
            Error::NonPositiveInput(_) => "non-positive-input",
            Error::PoleAtResonance { .. } => "pole-at-resonance",
            Error::DivergentOptimum => "divergent-optimum",
            Error::HeatingRegion(_) => "heating-region",
            Error::GeometryViolation(_) => "geometry-violation",
            Error::ExpansionInvalid { .. } => "expansion-invalid",
            Error::TruncationLeak { .. } => "truncation-leak",
            Error::HeatingRegime { .. } => "heating-regime",
            Error::SingularResolvent => "singular-resolvent",
            Error::DegenerateKernel => "degenerate-kernel",
            Error::StepTooLarge { .. } => "step-too-large",
            Error::GridMismatch => "grid-mismatch",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
