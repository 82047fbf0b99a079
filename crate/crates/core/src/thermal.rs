//! Closed forms for the thermal family `omega_E^{⊗s}` and its images.
//!
//! A thermal state with mean occupation `E` has spectrum
//! `(1/(E+1)) (E/(E+1))^n`. Its image under a gauge-covariant channel is
//! unitarily equivalent to `omega_{e_1} ⊗ ... ⊗ omega_{e_s}` where `e_j` are
//! the eigenvalues of `(E + 1/2) K*K + mu - 1/2`, so every Schatten norm and
//! entropy below reduces to scalar functions of `E` and the `e_j`.
//!
//! All logarithms are natural; entropies are in nats.

use crate::channel::{ChannelError, ChannelParams, Result};
use crate::matcore::{self, HermitianMatrix};

/// Default exponent grid for sweeps.
pub const DEFAULT_P_GRID: [f64; 6] = [1.1, 1.5, 2.0, 3.0, 5.0, 10.0];

/// Occupations in `[-CLAMP_TOL, 0)` are rounding noise at the quantum-limited boundary.
const CLAMP_TOL: f64 = 1e-10;

/// Covariance `Sigma` of a gauge-invariant Gaussian state with characteristic
/// function `exp(-z* Sigma z)`; valid states have `Sigma >= I/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSigma(HermitianMatrix);

impl GaussianSigma {
    pub fn new(sigma: HermitianMatrix) -> Result<Self> {
        let excess = sigma.shifted(-0.5);
        let min = matcore::min_eigenvalue(&excess)?;
        let scale = 1.0_f64.max(sigma.operator_norm()?);
        if min < -matcore::PSD_TOL * scale {
            return Err(ChannelError::InvalidSigma(format!(
                "Sigma - I/2 has eigenvalue {min:.6e}"
            )));
        }
        Ok(Self(sigma))
    }

    /// `omega_E^{⊗s}`: `Sigma = (E + 1/2) I`.
    pub fn thermal(mean_occupation: f64, modes: usize) -> Self {
        Self(HermitianMatrix::identity(modes).scale(mean_occupation + 0.5))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    /// Per-mode occupations: eigenvalues of `Sigma - I/2`.
    pub fn occupations(&self) -> Result<ThermalSpectrum> {
        ThermalSpectrum::new(matcore::eigenvalues_hermitian(&self.0.shifted(-0.5))?)
    }
}

/// Per-mode mean occupations `e_1 <= ... <= e_s`, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpectrum(Vec<f64>);

impl ThermalSpectrum {
    pub fn new(mut occupations: Vec<f64>) -> Result<Self> {
        for e in occupations.iter_mut() {
            if *e < 0.0 {
                if *e < -CLAMP_TOL {
                    return Err(ChannelError::InvalidSigma(format!("negative occupation {e:.6e}")));
                }
                *e = 0.0;
            }
        }
        occupations.sort_by(f64::total_cmp);
        Ok(Self(occupations))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// `ln((E+1)^p - E^p)` without cancellation for any `E >= 0`:
/// `p ln(1+E) + ln(1 - (E/(E+1))^p)` with `ln(E/(E+1)) = -ln1p(1/E)`.
pub fn log_thermal_gap(e: f64, p: f64) -> f64 {
    if e == 0.0 {
        return 0.0;
    }
    p * e.ln_1p() + (-(-p * (1.0 / e).ln_1p()).exp_m1()).ln()
}

/// `||omega_E^{⊗s}||_p = ((E+1)^p - E^p)^(-s/p)`.
pub fn thermal_schatten_norm(mean_occupation: f64, p: f64, modes: usize) -> f64 {
    if p == 1.0 {
        return 1.0;
    }
    (-(modes as f64) * log_thermal_gap(mean_occupation, p) / p).exp()
}

/// Eigenvalues of `(E + 1/2) K*K + mu - 1/2`, ascending: the thermal
/// parameters of `Phi(omega_E^{⊗s})` after diagonalization.
pub fn output_spectrum(params: &ChannelParams, mean_occupation: f64) -> Result<ThermalSpectrum> {
    params.require_cp()?;
    ThermalSpectrum::new(matcore::eigenvalues_hermitian(&output_matrix(params, mean_occupation))?)
}

fn output_matrix(params: &ChannelParams, mean_occupation: f64) -> HermitianMatrix {
    params
        .gram()
        .scale(mean_occupation + 0.5)
        .add(params.mu())
        .shifted(-0.5)
}

/// `||Phi(omega_E^{⊗s})||_p` from the determinant form
/// `det(A^p - B^p)^(-1/p)`, `B = (E + 1/2) K*K + mu - 1/2`, `A = B + 1`.
///
/// `A` and `B` commute, so `A^p - B^p = A^p (1 - C^p)` with
/// `C = 1 - A^{-1}`, whose spectrum lies in `[0, 1)`. Evaluating
/// `p ln det A + ln det(1 - C^p)` avoids the cancellation of forming the
/// difference of two large powers.
pub fn output_schatten_norm(params: &ChannelParams, mean_occupation: f64, p: f64) -> Result<f64> {
    params.require_cp()?;
    if p < 1.0 {
        return Err(ChannelError::InvalidExponent(p));
    }
    let a = output_matrix(params, mean_occupation).shifted(1.0);
    let chol = a
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(matcore::MatError::NotPsd {
            min_eigenvalue: f64::NAN,
            allowed: 0.0,
        })?;
    let log_det_a: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
    let a_inv = HermitianMatrix::symmetrized(chol.inverse());
    let c = a_inv.scale(-1.0).shifted(1.0);
    let one_minus_cp = matcore::psd_power(&c, p)?.scale(-1.0).shifted(1.0);
    let log_det = p * log_det_a + matcore::log_det_psd(&one_minus_cp)?;
    Ok((-log_det / p).exp())
}

/// Same quantity as [`output_schatten_norm`] from the per-mode product
/// `prod_j ((e_j+1)^p - e_j^p)^(-1/p)`.
pub fn output_schatten_norm_spectral(
    params: &ChannelParams,
    mean_occupation: f64,
    p: f64,
) -> Result<f64> {
    if p < 1.0 {
        return Err(ChannelError::InvalidExponent(p));
    }
    let spectrum = output_spectrum(params, mean_occupation)?;
    let log_sum: f64 = spectrum.as_slice().iter().map(|&e| log_thermal_gap(e, p)).sum();
    Ok((-log_sum / p).exp())
}

/// `||Phi(omega_E^{⊗s})||_p / ||omega_E^{⊗s}||_p`, the thermal lower bound
/// on the `p -> p` norm.
pub fn norm_ratio(params: &ChannelParams, mean_occupation: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(ChannelError::InvalidExponent(p));
    }
    let spectrum = output_spectrum(params, mean_occupation)?;
    let input_gap = log_thermal_gap(mean_occupation, p);
    let log_ratio: f64 = spectrum
        .as_slice()
        .iter()
        .map(|&e| (input_gap - log_thermal_gap(e, p)) / p)
        .sum();
    Ok(log_ratio.exp())
}

/// Von Neumann entropy of `omega_E`: `(E+1) ln(E+1) - E ln E`.
pub fn thermal_entropy(mean_occupation: f64) -> f64 {
    let e = mean_occupation;
    if e == 0.0 {
        return 0.0;
    }
    e.ln_1p() + e * (1.0 / e).ln_1p()
}

/// `S(Phi(omega_E^{⊗s})) - S(omega_E^{⊗s}) = sum_j g(e_j) - s g(E)`.
pub fn entropy_gain(params: &ChannelParams, mean_occupation: f64) -> Result<f64> {
    let spectrum = output_spectrum(params, mean_occupation)?;
    let out: f64 = spectrum.as_slice().iter().map(|&e| thermal_entropy(e)).sum();
    Ok(out - params.modes() as f64 * thermal_entropy(mean_occupation))
}

/// `||Phi(omega_E^{⊗s})||_q / ||omega_E^{⊗s}||_p` for `1 <= q < p`; grows like
/// `E^(s(1/q - 1/p))`.
pub fn cross_norm_ratio(
    params: &ChannelParams,
    mean_occupation: f64,
    p: f64,
    q: f64,
) -> Result<f64> {
    if !(q >= 1.0 && q < p && p.is_finite()) {
        return Err(ChannelError::InvalidExponent(q));
    }
    let spectrum = output_spectrum(params, mean_occupation)?;
    let log_out: f64 = -spectrum
        .as_slice()
        .iter()
        .map(|&e| log_thermal_gap(e, q) / q)
        .sum::<f64>();
    let log_in = -(params.modes() as f64) * log_thermal_gap(mean_occupation, p) / p;
    Ok((log_out - log_in).exp())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
