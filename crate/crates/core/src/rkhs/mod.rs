//! Unit balls of the reproducing kernel Hilbert spaces, their metric entropy,
//! and the bounds linking entropy to small deviations.

pub mod ellipsoid;
pub mod entropy;
pub mod gfunc;
pub mod growth;
pub mod kuelbs_li;
pub mod scaling;
pub mod truncation;

pub use ellipsoid::{ellipsoid_member_to_function, CoefficientEllipsoid};
pub use entropy::{entropy_bracket, entropy_brackets, entropy_lower, entropy_upper, EntropyBracket, EntropyOptions};
pub use gfunc::{g_certify, g_eval, g_log_abs, GCertificate, GFunctionSpec};
pub use growth::{rkhs_growth_check, GrowthReport};
pub use kuelbs_li::{alpha_r, kl_consistency, kl_h_lower, kl_h_lower_simplified, kl_h_to_phi, kl_phi_to_h, KlConsistency};
pub use scaling::{patch_multiplier, scaling_patch};
pub use truncation::{truncation_entropy_upper, truncation_phi_upper, TruncationBoundInput, TruncationReport};
