//! Random instances for the randomized suites: CP-valid channels, Gaussian
//! covariances, density matrices and unitaries.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelParams;
use crate::matcore::{ComplexMatrix, HermitianMatrix};
use crate::thermal::GaussianSigma;

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Random PSD matrix `scale * G*G / dim`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    HermitianMatrix::gram(&g).scale(scale / dim as f64)
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    qr.q()
}

/// Matrix absolute value `|H| = (H^2)^(1/2)` of a Hermitian matrix.
fn hermitian_abs(h: &HermitianMatrix) -> HermitianMatrix {
    let eig = crate::matcore::eig_hermitian(h).expect("small Hermitian eigenproblem");
    HermitianMatrix::symmetrized(eig.reconstruct_with(f64::abs))
}

/// Random CP-valid `(K, mu)`: `K` complex Gaussian, `mu = |X| + W` with
/// `X = (1 - K*K)/2` and `W` a random PSD matrix of size `noise`. Both
/// `mu - X` and `mu + X` are then PSD by construction.
pub fn random_cp_channel<R: Rng + ?Sized>(rng: &mut R, modes: usize, noise: f64) -> ChannelParams {
    let k = gaussian_matrix(rng, modes, modes).scale((1.0 / modes as f64).sqrt());
    let x = HermitianMatrix::gram(&k).scale(-0.5).shifted(0.5);
    let scale = noise * rng.random::<f64>();
    let w = random_psd(rng, modes, scale);
    let mu = hermitian_abs(&x).add(&w);
    ChannelParams::new(k, mu).expect("square by construction")
}

/// Random single-mode channel with `|K|^2` uniform in `k2_range` and noise
/// `mu = |1 - K^2|/2 + u`, `u` uniform in `[0, excess_max]`.
pub fn random_single_mode<R: Rng + ?Sized>(
    rng: &mut R,
    k2_range: (f64, f64),
    excess_max: f64,
) -> (f64, f64) {
    let k2 = rng.random_range(k2_range.0..=k2_range.1);
    let mu = (1.0 - k2).abs() / 2.0 + excess_max * rng.random::<f64>();
    (k2, mu)
}

/// Random valid covariance `Sigma = I/2 + P`, `P` PSD.
pub fn random_sigma<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> GaussianSigma {
    let p = random_psd(rng, modes, 3.0);
    GaussianSigma::new(p.shifted(0.5)).expect("valid by construction")
}

/// Random trace-one density matrix of full rank on `dim` levels.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let rho = g.clone() * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}
