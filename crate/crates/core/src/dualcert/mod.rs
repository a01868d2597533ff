//! Dual test functions for lower bounds on `D_N` and the combinatorics that
//! control them.
//!
//! * [`build_psi`], [`build_fs`], [`build_phi`]: the bounded sine test
//!   functions built from the hyperbolic r-functions of a point set.
//! * [`expansion`]: products of r-functions, the `G_v` sums, product
//!   counts and the odd-power expansion of `(Σ f_r)^k`.
//! * [`certificate`]: pairings of `D_N` with the test functions, assembled
//!   into reports.

pub mod certificate;
mod config;
pub mod expansion;
mod testfn;

pub use certificate::{
    halasz_certificate, halasz_expansion_check, main_certificate, ExpansionPairing, PairingReport,
    PrefixPairing, PHI_EXPONENTS,
};
pub use config::CertificateConfig;
pub use testfn::{
    build_fs, build_phi, build_psi, hyperbolic_rfunctions, phi_levels, prefix_classes,
    prefix_levels, prefix_shapes, sine_of_fs, SinePrefix,
};
