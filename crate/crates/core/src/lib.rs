pub mod cli;
pub mod curve;
pub mod error;
pub mod numeric;
pub mod pathgen;
pub mod ratefit;
pub mod rkhs;
pub mod smallball;
pub mod spectra;
pub mod tsirelson;

pub use error::{Error, Result};
pub use spectra::{CovarianceValue, SpectralKind, SpectralModel};
