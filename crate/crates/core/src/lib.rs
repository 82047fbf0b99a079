//! Analytic calculus and numerical oracles for gauge-covariant Gaussian
//! bosonic channels.
//!
//! - [`matcore`]: dense Hermitian kernels (eigendecomposition, PSD powers, determinants).
//! - [`channel`]: `(K, mu)` parameters, complete positivity, `S^p -> S^p` norms, tensor products.
//! - [`thermal`]: closed forms on thermal inputs (norms, ratios, entropies, large-`E` limits).
//! - [`fockoracle`]: truncated Fock-space Kraus simulation used to cross-check the closed forms.
//! - [`interpbound`]: randomized check of the interpolation bound for finite positive maps.

pub mod channel;
pub mod fockoracle;
pub mod interpbound;
pub mod matcore;
pub mod sampling;
pub mod thermal;

pub use channel::{ChannelError, ChannelParams, CpReport, ExtReal};
pub use matcore::{ComplexMatrix, HermitianMatrix};
pub use thermal::{GaussianSigma, ThermalSpectrum};
