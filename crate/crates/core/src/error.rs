use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um is outside the model range [{min}, {max}] um")]
    WavelengthOutOfRange {
        wavelength_um: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "frequency grid too narrow: span {span:.4e} rad/s, need at least {required:.4e} rad/s"
    )]
    GridTooNarrow { span: f64, required: f64 },

    #[error("amplitudes are defined on different frequency grids")]
    GridMismatch,

    #[error("amplitude has zero norm")]
    ZeroNorm,

    #[error("filter centred at {center_nm} nm lies outside the frequency grid")]
    FilterOutsideGrid { center_nm: f64 },

    #[error("expansion order {order} needs {needed} photons but truncation is {n_max}")]
    TruncationExceeded { order: u32, needed: u32, n_max: u32 },

    #[error("state is not normalized (norm = {norm})")]
    Unnormalized { norm: f64 },

    #[error("coincidence table is empty")]
    EmptyTable,

    #[error("dispersion data: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
