//! Numerical building blocks shared by the modules.

pub mod quadrature;
pub mod special;

pub use quadrature::{integrate, panels, Integral, Tolerance};
pub use special::{
    hurwitz_zeta, log_norm_cdf, norm_cdf, norm_pdf, norm_quantile, norm_quantile_log, zeta,
};
