//! Gauge-covariant Gaussian `s`-mode channels parametrized by `(K, mu)`.
//!
//! The channel acts on Weyl operators as `Phi*(D(z)) = exp(-z* mu z) D(K z)`.
//! Everything analytic about it (complete positivity, Schatten `p -> p`
//! norms, the entropy-gain bound) depends on `K` only through `K*K`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{self, ComplexMatrix, HermitianMatrix, MatError};
use crate::thermal::GaussianSigma;

/// Relative threshold below which `K*K` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Smallest accepted `p - 1` for the `p > 1` norm formula.
pub const MIN_P_MINUS_ONE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parameters are not completely positive (min eigenvalues {:.6e}, {:.6e})", .0.min_eig_first, .0.min_eig_second)]
    NotCompletelyPositive(CpReport),
    #[error("invalid exponent p = {0}: expected p = 1 or p - 1 >= 1e-6")]
    InvalidExponent(f64),
    #[error("invalid Gaussian covariance: {0}")]
    InvalidSigma(String),
    #[error("malformed channel spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

/// A real number or one of the two infinities, used where a closed form
/// degenerates (non-invertible `K`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInfinity => f64::INFINITY,
            ExtReal::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => f.write_str("unbounded"),
            ExtReal::NegInfinity => f.write_str("-unbounded"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInfinity => s.serialize_str("unbounded"),
            ExtReal::NegInfinity => s.serialize_str("-unbounded"),
        }
    }
}

/// Outcome of the complete-positivity test: smallest eigenvalues of
/// `mu - (1 - K*K)/2` and `mu + (1 - K*K)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpReport {
    pub is_cp: bool,
    pub min_eig_first: f64,
    pub min_eig_second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    modes: usize,
    k: ComplexMatrix,
    mu: HermitianMatrix,
}

impl ChannelParams {
    pub fn new(k: ComplexMatrix, mu: HermitianMatrix) -> Result<Self> {
        let modes = mu.dim();
        if modes == 0 {
            return Err(ChannelError::Dimension("channel needs at least one mode".into()));
        }
        if k.shape() != (modes, modes) {
            return Err(ChannelError::Dimension(format!(
                "K is {}x{} but mu is {modes}x{modes}",
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(Self { modes, k, mu })
    }

    /// Single-mode channel with scalar `K` and `mu`.
    pub fn single_mode(k: Complex64, mu: f64) -> Self {
        Self {
            modes: 1,
            k: ComplexMatrix::from_element(1, 1, k),
            mu: HermitianMatrix::from_real_diagonal(&[mu]),
        }
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            k: ComplexMatrix::identity(modes, modes),
            mu: HermitianMatrix::zeros(modes),
        }
    }

    /// Quantum-limited attenuator with transmissivity `eta`.
    pub fn attenuator(eta: f64) -> Self {
        Self::single_mode(matcore::c(eta.sqrt()), (1.0 - eta) / 2.0)
    }

    /// Quantum-limited amplifier with gain `g`.
    pub fn amplifier(gain: f64) -> Self {
        Self::single_mode(matcore::c(gain.sqrt()), (gain - 1.0) / 2.0)
    }

    /// Mode-diagonal channel: independent single-mode channels with `|K_j|^2`
    /// and `mu_j` on each mode.
    pub fn diagonal(k_abs2: &[f64], mu: &[f64]) -> Result<Self> {
        if k_abs2.len() != mu.len() {
            return Err(ChannelError::Dimension(format!(
                "{} K entries vs {} mu entries",
                k_abs2.len(),
                mu.len()
            )));
        }
        let k: Vec<f64> = k_abs2.iter().map(|x| x.sqrt()).collect();
        Self::new(matcore::real_diagonal(&k), HermitianMatrix::from_real_diagonal(mu))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn k(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn mu(&self) -> &HermitianMatrix {
        &self.mu
    }

    /// `K*K`, the only way `K` enters any analytic output.
    pub fn gram(&self) -> HermitianMatrix {
        HermitianMatrix::gram(&self.k)
    }

    /// The two matrices `mu -/+ (1 - K*K)/2` whose positivity is complete positivity.
    pub fn cp_matrices(&self) -> (HermitianMatrix, HermitianMatrix) {
        let half_defect = self.gram().scale(-0.5).shifted(0.5);
        (self.mu.sub(&half_defect), self.mu.add(&half_defect))
    }

    pub fn cp_check(&self) -> Result<CpReport> {
        let (first, second) = self.cp_matrices();
        let min_eig_first = matcore::min_eigenvalue(&first)?;
        let min_eig_second = matcore::min_eigenvalue(&second)?;
        let scale = 1.0_f64
            .max(self.gram().operator_norm()?)
            .max(self.mu.operator_norm()?);
        let allowed = -matcore::PSD_TOL * scale;
        Ok(CpReport {
            is_cp: min_eig_first >= allowed && min_eig_second >= allowed,
            min_eig_first,
            min_eig_second,
        })
    }

    /// Errors with the report when the parameters do not define a channel.
    pub fn require_cp(&self) -> Result<CpReport> {
        let report = self.cp_check()?;
        if report.is_cp {
            Ok(report)
        } else {
            Err(ChannelError::NotCompletelyPositive(report))
        }
    }

    pub fn gram_determinant(&self) -> Result<f64> {
        Ok(matcore::det_psd(&self.gram())?)
    }

    /// `K` is treated as singular when the smallest eigenvalue of `K*K` is
    /// below `SINGULAR_TOL * |K*K|`.
    pub fn is_invertible(&self) -> Result<bool> {
        let ev = matcore::psd_eigenvalues(&self.gram())?;
        let top = ev.last().copied().unwrap_or(0.0);
        let bottom = ev.first().copied().unwrap_or(0.0);
        Ok(top > 0.0 && bottom >= SINGULAR_TOL * top)
    }

    /// The `S^p -> S^p` norm `(det K*K)^(-(p-1)/p)`; unbounded for singular `K`.
    ///
    /// `p = 1` returns 1: the channel is trace preserving and positive. This
    /// value is outside the `1 < p < inf` range of the closed form.
    pub fn schatten_norm_analytic(&self, p: f64) -> Result<ExtReal> {
        self.require_cp()?;
        if p == 1.0 {
            return Ok(ExtReal::Finite(1.0));
        }
        if !p.is_finite() || p - 1.0 < MIN_P_MINUS_ONE {
            return Err(ChannelError::InvalidExponent(p));
        }
        if !self.is_invertible()? {
            return Ok(ExtReal::PosInfinity);
        }
        let log_det = matcore::log_det_psd(&self.gram())?;
        let inv_conj_exponent = (p - 1.0) / p;
        Ok(ExtReal::Finite((-inv_conj_exponent * log_det).exp()))
    }

    /// `Sigma -> mu + K* Sigma K` on the covariance of a gauge-invariant
    /// Gaussian state.
    pub fn transform_sigma(&self, sigma: &GaussianSigma) -> Result<GaussianSigma> {
        if sigma.dim() != self.modes {
            return Err(ChannelError::Dimension(format!(
                "Sigma has {} modes, channel has {}",
                sigma.dim(),
                self.modes
            )));
        }
        let out = self.mu.add(&sigma.matrix().congruence(&self.k));
        let out = GaussianSigma::new(out);
        if self.cp_check()?.is_cp {
            debug_assert!(out.is_ok(), "CP channel produced an invalid covariance");
        }
        out
    }

    /// Block-diagonal `(K_a ⊕ K_b, mu_a ⊕ mu_b)`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            modes: self.modes + other.modes,
            k: matcore::block_diag(&self.k, &other.k),
            mu: self.mu.block_diag(&other.mu),
        }
    }

    /// Lower bound `ln det K*K` on the entropy gain; `-inf` for singular `K`.
    pub fn entropy_gain_bound(&self) -> Result<ExtReal> {
        if !self.is_invertible()? {
            return Ok(ExtReal::NegInfinity);
        }
        Ok(ExtReal::Finite(matcore::log_det_psd(&self.gram())?))
    }

    /// `Some((|K_j|^2, mu_j))` per mode when both `K` and `mu` are diagonal.
    pub fn mode_diagonal(&self) -> Option<Vec<(f64, f64)>> {
        let zero = Complex64::new(0.0, 0.0);
        let n = self.modes;
        let off_diag_zero = (0..n)
            .all(|i| (0..n).all(|j| i == j || (self.k[(i, j)] == zero && self.mu.as_matrix()[(i, j)] == zero)));
        off_diag_zero.then(|| {
            (0..n)
                .map(|i| (self.k[(i, i)].norm_sqr(), self.mu.as_matrix()[(i, i)].re))
                .collect()
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ChannelSpec = serde_json::from_str(text).map_err(|e| ChannelError::Spec(e.to_string()))?;
        spec.into_params()
    }

    pub fn to_spec(&self) -> ChannelSpec {
        let rows = |m: &ComplexMatrix| -> Vec<Vec<SpecEntry>> {
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if z.im == 0.0 {
                                SpecEntry::Real(z.re)
                            } else {
                                SpecEntry::Complex([z.re, z.im])
                            }
                        })
                        .collect()
                })
                .collect()
        };
        ChannelSpec {
            s: self.modes,
            k: rows(&self.k),
            mu: rows(self.mu.as_matrix()),
        }
    }
}

/// A matrix entry in a channel-spec document: a bare number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<SpecEntry> for Complex64 {
    fn from(e: SpecEntry) -> Self {
        match e {
            SpecEntry::Real(x) => Complex64::new(x, 0.0),
            SpecEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Channel-spec document `{ "s": int, "K": [[...]], "mu": [[...]] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub s: usize,
    #[serde(rename = "K")]
    pub k: Vec<Vec<SpecEntry>>,
    pub mu: Vec<Vec<SpecEntry>>,
}

impl ChannelSpec {
    pub fn into_params(self) -> Result<ChannelParams> {
        let s = self.s;
        let to_matrix = |name: &str, rows: Vec<Vec<SpecEntry>>| -> Result<ComplexMatrix> {
            if rows.len() != s || rows.iter().any(|r| r.len() != s) {
                return Err(ChannelError::Spec(format!("{name} must be {s}x{s}")));
            }
            let entries = rows.into_iter().flatten().map(Complex64::from).collect();
            Ok(matcore::from_row_major(s, s, entries)?)
        };
        let k = to_matrix("K", self.k)?;
        let mu = to_matrix("mu", self.mu)?;
        let mu = HermitianMatrix::new(mu).map_err(|e| ChannelError::Spec(format!("mu: {e}")))?;
        ChannelParams::new(k, mu)
    }
}
