use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    Domain(&'static str),
    /// Input arrays are inconsistent (lengths, ordering, coverage).
    Shape(&'static str),
    /// A quadrature, bisection or refinement loop did not meet its tolerance.
    Convergence { what: &'static str, gap: f64 },
    /// Young's condition 1/p + 1/q > 1 fails; use the rough-path route.
    YoungCondition { p: f64, q: f64 },
    /// Integrand and integrator jump at the same point.
    CommonJump { x: f64 },
    /// The (α, q) pair or θ falls outside the window of the requested method.
    Regime(&'static str),
    /// Chen composition of tensors whose intervals do not abut.
    IndexMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::Shape(s) => write!(f, "shape error: {s}"),
            Error::Convergence { what, gap } => {
                write!(f, "{what} did not converge (last gap {gap:e})")
            }
            Error::YoungCondition { p, q } => {
                write!(f, "Young condition fails: 1/{p} + 1/{q} <= 1")
            }
            Error::CommonJump { x } => write!(f, "integrand and integrator both jump at {x}"),
            Error::Regime(s) => write!(f, "regime error: {s}"),
            Error::IndexMismatch => write!(f, "tensor intervals do not share an endpoint"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
