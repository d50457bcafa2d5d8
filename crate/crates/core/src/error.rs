use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid wire configuration: {0}")]
    InvalidWire(String),

    #[error("invalid lead configuration: {0}")]
    InvalidLead(String),

    #[error("eigensolver did not converge for a {dimension}x{dimension} matrix (inf-norm {norm:.6e})")]
    EigenNonConvergence { dimension: usize, norm: f64 },

    #[error("particle-hole symmetry violated: mode {index} has best partner overlap {overlap:.6}")]
    SymmetryViolation { index: usize, overlap: f64 },

    #[error("propagator is singular at omega = {omega:.17e}")]
    Singular { omega: f64 },

    #[error("propagator is near-singular at omega = {omega:.17e} (1-norm condition estimate {condition:.3e})")]
    NearSingular { omega: f64, condition: f64 },

    #[error("quadrature did not converge: estimate {estimate:.17e}, error bound {error_bound:.3e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        intervals: usize,
    },

    #[error("differential conductance is defined at zero temperature only (lead {lead} has T = {temperature})")]
    FiniteTemperature { lead: usize, temperature: f64 },

    #[error("expected exactly {expected} leads, got {got}")]
    LeadCount { expected: usize, got: usize },

    #[error("the Landauer oracle requires a pairing-free wire (|delta| = {delta:.3e})")]
    PairingPresent { delta: f64 },

    #[error("pole at the origin is not simple (order {order}); the steady limit is undefined")]
    NonSimpleOriginPole { order: u32 },

    #[error("pole {pole_re:.6e}{pole_im:+.6e}i lies in the upper half plane")]
    AcausalPole { pole_re: f64, pole_im: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

impl Error {
    /// True for failures caused by an (almost) singular propagator at one frequency.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NearSingular { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
