use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode or qubit index {index} out of range for register of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("register of {n} qubits exceeds the dense cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("noise requires the density-matrix backend")]
    NoiseOnPureState,
    #[error("observable is not Hermitian (imaginary residue {0:.3e})")]
    NonHermitian(f64),
    #[error("degenerate bath: Delta^p eigenvalue {0} at the edge of (0, 1)")]
    DegenerateBath(f64),
    #[error("R is not invertible")]
    SingularR,
    #[error("optimizer produced a non-finite objective at iteration {0}")]
    Divergence(usize),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}
