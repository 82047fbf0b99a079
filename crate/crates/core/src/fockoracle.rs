//! Truncated Fock-space oracle.
//!
//! Single-mode gauge-covariant channels are simulated as a quantum-limited
//! attenuator followed by a quantum-limited amplifier, each given by explicit
//! Kraus operators on a truncated number basis. Multi-mode channels are
//! tensor products of single-mode ones. Nothing here uses the closed forms
//! of [`crate::thermal`]; the point is to check them.
//!
//! Every Kraus operator in this module maps `|n>` to a multiple of
//! `|n + shift>`, so diagonal inputs stay diagonal. Those use a
//! probability-vector transform instead of dense conjugation, which is what
//! makes cutoffs in the thousands affordable.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelParams;
use crate::matcore::{self, ComplexMatrix, HermitianMatrix, MatError};

/// Truncation target for thermal inputs: `(E/(E+1))^N < THERMAL_TAIL`.
pub const THERMAL_TAIL: f64 = 1e-12;
/// Per-level Kraus completeness deficit allowed when truncating amplifiers.
pub const AMPLIFIER_TAIL: f64 = 1e-12;
/// Entropy inputs may have eigenvalues down to `-NEG_EIG_TOL`.
pub const NEG_EIG_TOL: f64 = 1e-10;

const MAX_AMPLIFIER_SPREAD: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator is not positive semidefinite: eigenvalue {0:.6e}")]
    NotPsd(f64),
    #[error("channel is not mode-diagonal; the Fock oracle only simulates tensor products of single-mode channels")]
    NotModeDiagonal,
    #[error(transparent)]
    Matrix(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// `ln n!` for `n = 0..len`, by running sum.
fn log_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0_f64;
    out.push(0.0);
    for n in 1..len {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

fn ln_binom(lf: &[f64], n: usize, k: usize) -> f64 {
    lf[n] - lf[k] - lf[n - k]
}

/// Single-mode operator with `A|n> = coeffs[n - first_col] |n + shift>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOp {
    rows: usize,
    cols: usize,
    shift: isize,
    first_col: usize,
    coeffs: Vec<f64>,
}

impl ShiftOp {
    fn new(rows: usize, cols: usize, shift: isize, first_col: usize, coeffs: Vec<f64>) -> Self {
        debug_assert!(first_col + coeffs.len() <= cols);
        debug_assert!(coeffs.is_empty() || {
            let lo = first_col as isize + shift;
            let hi = (first_col + coeffs.len() - 1) as isize + shift;
            lo >= 0 && (hi as usize) < rows
        });
        Self {
            rows,
            cols,
            shift,
            first_col,
            coeffs,
        }
    }

    fn identity(dim: usize) -> Self {
        Self::new(dim, dim, 0, 0, vec![1.0; dim])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shift(&self) -> isize {
        self.shift
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &v)| {
            let col = self.first_col + i;
            ((col as isize + self.shift) as usize, col, v)
        })
    }

    /// Image of column `col`, if any.
    fn image(&self, col: usize) -> Option<(usize, f64)> {
        let i = col.checked_sub(self.first_col)?;
        let v = *self.coeffs.get(i)?;
        Some(((col as isize + self.shift) as usize, v))
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `after * self`.
    fn then(&self, after: &ShiftOp) -> ShiftOp {
        debug_assert_eq!(self.rows, after.cols);
        let mut first = None;
        let mut coeffs = Vec::new();
        for (mid, col, v) in self.entries() {
            if let Some((_, w)) = after.image(mid) {
                if first.is_none() {
                    first = Some(col);
                }
                // shift ops have contiguous support; gaps only at the ends
                coeffs.push(v * w);
            } else if first.is_some() {
                break;
            }
        }
        ShiftOp::new(
            after.rows,
            self.cols,
            self.shift + after.shift,
            first.unwrap_or(0),
            coeffs,
        )
    }
}

/// One Kraus family acting on a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausStage {
    cutoff_in: usize,
    cutoff_out: usize,
    ops: Vec<ShiftOp>,
    tail: f64,
}

impl KrausStage {
    pub fn ops(&self) -> &[ShiftOp] {
        &self.ops
    }

    /// Largest per-level completeness deficit from truncating the family.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Diagonal of `sum_l A_l^* A_l`.
    pub fn level_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.cutoff_in];
        for op in &self.ops {
            for (_, c, v) in op.entries() {
                w[c] += v * v;
            }
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ModeChannel {
    cutoff_in: usize,
    stages: Vec<KrausStage>,
}

impl ModeChannel {
    fn cutoff_out(&self) -> usize {
        self.stages.last().map_or(self.cutoff_in, |s| s.cutoff_out)
    }

    /// Flattened Kraus family (products over stages).
    fn kraus_family(&self) -> Vec<ShiftOp> {
        let mut family = vec![ShiftOp::identity(self.cutoff_in)];
        for stage in &self.stages {
            family = family
                .iter()
                .flat_map(|f| stage.ops.iter().map(move |op| f.then(op)))
                .filter(|op| !op.coeffs.is_empty())
                .collect();
        }
        family
    }
}

/// Kraus representation of a tensor product of single-mode channels on a
/// truncated Fock space. Modes are ordered slow-to-fast in the flattened
/// basis, matching [`matcore::kron`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    modes: Vec<ModeChannel>,
}

impl KrausChannel {
    pub fn identity(cutoffs: &[usize]) -> Self {
        Self {
            modes: cutoffs
                .iter()
                .map(|&cutoff_in| ModeChannel {
                    cutoff_in,
                    stages: vec![],
                })
                .collect(),
        }
    }

    fn single(stage: KrausStage) -> Self {
        Self {
            modes: vec![ModeChannel {
                cutoff_in: stage.cutoff_in,
                stages: vec![stage],
            }],
        }
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn cutoffs_in(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.cutoff_in).collect()
    }

    pub fn cutoffs_out(&self) -> Vec<usize> {
        self.modes.iter().map(ModeChannel::cutoff_out).collect()
    }

    /// Stages of mode `m`, in application order.
    pub fn stages(&self, mode: usize) -> &[KrausStage] {
        &self.modes[mode].stages
    }

    /// Upper bound on the trace lost to truncation, for any normalized input.
    pub fn tail_bound(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| m.stages.iter().map(|s| s.tail))
            .sum()
    }

    /// `after ∘ self`, mode by mode.
    pub fn then(mut self, after: KrausChannel) -> Result<Self> {
        if self.cutoffs_out() != after.cutoffs_in() {
            return Err(OracleError::Dimension(format!(
                "output cutoffs {:?} do not match input cutoffs {:?}",
                self.cutoffs_out(),
                after.cutoffs_in()
            )));
        }
        for (mine, theirs) in self.modes.iter_mut().zip(after.modes) {
            mine.stages.extend(theirs.stages);
        }
        Ok(self)
    }

    /// Materializes the full Kraus family `{A_i ⊗ B_j ⊗ ...}` as dense
    /// matrices. Only sensible for small truncations.
    pub fn kraus_ops(&self) -> Vec<ComplexMatrix> {
        let mut ops = vec![ComplexMatrix::identity(1, 1)];
        for mode in &self.modes {
            let family: Vec<ComplexMatrix> = mode.kraus_family().iter().map(ShiftOp::to_dense).collect();
            ops = ops
                .iter()
                .flat_map(|a| family.iter().map(move |b| matcore::kron(a, b)))
                .collect();
        }
        ops
    }
}

/// `Phi_a ⊗ Phi_b`; Kraus family `{A_i ⊗ B_j}`, cutoffs concatenate.
pub fn tensor_channel(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut modes = a.modes.clone();
    modes.extend(b.modes.iter().cloned());
    KrausChannel { modes }
}

/// Quantum-limited attenuator `(K = sqrt(eta), mu = (1 - eta)/2)`:
/// `<n-l|A_l|n> = sqrt(C(n,l) (1-eta)^l eta^(n-l))`, `l = 0..cutoff`.
/// Complete on the truncated space.
pub fn attenuator_kraus(eta: f64, cutoff: usize) -> Result<KrausChannel> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(OracleError::InvalidParameter(format!("eta = {eta} not in (0, 1]")));
    }
    if cutoff == 0 {
        return Err(OracleError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let ops = if eta == 1.0 {
        vec![ShiftOp::identity(cutoff)]
    } else {
        let lf = log_factorials(cutoff);
        let (ln_loss, ln_keep) = ((1.0 - eta).ln(), eta.ln());
        (0..cutoff)
            .map(|l| {
                let coeffs = (l..cutoff)
                    .map(|n| {
                        let ln_w = ln_binom(&lf, n, l) + l as f64 * ln_loss + (n - l) as f64 * ln_keep;
                        (0.5 * ln_w).exp()
                    })
                    .collect();
                ShiftOp::new(cutoff, cutoff, -(l as isize), l, coeffs)
            })
            .collect()
    };
    Ok(KrausChannel::single(KrausStage {
        cutoff_in: cutoff,
        cutoff_out: cutoff,
        ops,
        tail: 0.0,
    }))
}

/// `ln` of the amplifier weight `|<n+l|B_l|n>|^2 = C(n+l,l) G^-(n+1) (1-1/G)^l`.
fn ln_amplifier_weight(lf: &[f64], gain: f64, n: usize, l: usize) -> f64 {
    ln_binom(lf, n + l, l) - (n + 1) as f64 * gain.ln() + l as f64 * (1.0 - 1.0 / gain).ln()
}

/// Per-level completeness deficits `1 - sum_{l <= spread} w(n, l)`.
fn amplifier_deficits(gain: f64, cutoff_in: usize, spread: usize) -> Vec<f64> {
    if gain == 1.0 {
        return vec![0.0; cutoff_in];
    }
    let lf = log_factorials(cutoff_in + spread + 1);
    (0..cutoff_in)
        .map(|n| {
            let kept: f64 = (0..=spread).map(|l| ln_amplifier_weight(&lf, gain, n, l).exp()).sum();
            (1.0 - kept).max(0.0)
        })
        .collect()
}

/// Smallest output cutoff for which every input level below `cutoff_in`
/// keeps all but `tail` of its weight.
pub fn amplifier_output_cutoff(gain: f64, cutoff_in: usize, tail: f64) -> Result<usize> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(OracleError::InvalidParameter(format!("gain G = {gain} < 1")));
    }
    if gain == 1.0 || cutoff_in == 0 {
        return Ok(cutoff_in);
    }
    // the top level has the heaviest tail
    let n = cutoff_in - 1;
    let mut lf = log_factorials(n + 2);
    let mut kept = 0.0;
    for l in 0..MAX_AMPLIFIER_SPREAD {
        if lf.len() <= n + l {
            let next = lf[lf.len() - 1] + (lf.len() as f64).ln();
            lf.push(next);
        }
        kept += ln_amplifier_weight(&lf, gain, n, l).exp();
        if 1.0 - kept < tail {
            return Ok(cutoff_in + l);
        }
    }
    Err(OracleError::InvalidParameter(format!(
        "gain {gain} needs more than {MAX_AMPLIFIER_SPREAD} extra levels"
    )))
}

/// Quantum-limited amplifier `(K = sqrt(G), mu = (G - 1)/2)`:
/// `<n+l|B_l|n> = sqrt(C(n+l,l)) G^(-(n+1)/2) (1 - 1/G)^(l/2)` for
/// `l = 0..=cutoff_out - cutoff_in`. The dropped `l` leave a per-level
/// deficit reported as the stage tail.
pub fn amplifier_kraus(gain: f64, cutoff_in: usize, cutoff_out: usize) -> Result<KrausChannel> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(OracleError::InvalidParameter(format!("gain G = {gain} < 1")));
    }
    if cutoff_in == 0 || cutoff_out < cutoff_in {
        return Err(OracleError::InvalidParameter(format!(
            "need 1 <= cutoff_in <= cutoff_out, got {cutoff_in}, {cutoff_out}"
        )));
    }
    let spread = cutoff_out - cutoff_in;
    let ops = if gain == 1.0 {
        vec![ShiftOp::new(cutoff_out, cutoff_in, 0, 0, vec![1.0; cutoff_in])]
    } else {
        let lf = log_factorials(cutoff_out + 1);
        (0..=spread)
            .map(|l| {
                let coeffs = (0..cutoff_in)
                    .map(|n| (0.5 * ln_amplifier_weight(&lf, gain, n, l)).exp())
                    .collect();
                ShiftOp::new(cutoff_out, cutoff_in, l as isize, 0, coeffs)
            })
            .collect()
    };
    let tail = amplifier_deficits(gain, cutoff_in, spread)
        .into_iter()
        .fold(0.0_f64, f64::max);
    Ok(KrausChannel::single(KrausStage {
        cutoff_in,
        cutoff_out,
        ops,
        tail,
    }))
}

/// Splits a single-mode `(|K|^2, mu)` into attenuator `eta` followed by
/// amplifier `G`: `G = (|K|^2 + 2 mu + 1)/2`, `eta = |K|^2 / G`.
///
/// Then `e = G (eta E) + G - 1 = |K|^2 E + |K|^2/2 + mu - 1/2`, the channel's
/// action on thermal occupations. `eta <= 1` and `G >= 1` are exactly the two
/// complete-positivity inequalities.
pub fn single_mode_decompose(k_abs2: f64, mu: f64) -> Result<(f64, f64)> {
    if !(k_abs2 > 0.0 && k_abs2.is_finite() && mu.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "need finite |K|^2 > 0, got {k_abs2}"
        )));
    }
    let tol = matcore::PSD_TOL * 1.0_f64.max(k_abs2).max(mu.abs());
    if mu < (1.0 - k_abs2) / 2.0 - tol || mu < (k_abs2 - 1.0) / 2.0 - tol {
        return Err(OracleError::InvalidParameter(format!(
            "(|K|^2 = {k_abs2}, mu = {mu}) is not completely positive"
        )));
    }
    let gain = ((k_abs2 + 2.0 * mu + 1.0) / 2.0).max(1.0);
    let eta = (k_abs2 / gain).min(1.0);
    Ok((eta, gain))
}

/// Single-mode channel `amplifier(G) ∘ attenuator(eta)` on `cutoff_in`
/// levels, with the output cutoff chosen by [`amplifier_output_cutoff`].
pub fn single_mode_channel(k_abs2: f64, mu: f64, cutoff_in: usize) -> Result<KrausChannel> {
    let (eta, gain) = single_mode_decompose(k_abs2, mu)?;
    let cutoff_out = amplifier_output_cutoff(gain, cutoff_in, AMPLIFIER_TAIL)?;
    attenuator_kraus(eta, cutoff_in)?.then(amplifier_kraus(gain, cutoff_in, cutoff_out)?)
}

/// Kraus realization of a mode-diagonal `(K, mu)` as a tensor product of
/// single-mode channels. Phases of `K` are dropped.
pub fn gaussian_channel(params: &ChannelParams, cutoffs_in: &[usize]) -> Result<KrausChannel> {
    let modes = params.mode_diagonal().ok_or(OracleError::NotModeDiagonal)?;
    if modes.len() != cutoffs_in.len() {
        return Err(OracleError::Dimension(format!(
            "{} modes but {} cutoffs",
            modes.len(),
            cutoffs_in.len()
        )));
    }
    let mut channels = modes
        .iter()
        .zip(cutoffs_in)
        .map(|(&(k2, mu), &cutoff)| single_mode_channel(k2, mu, cutoff));
    let first = channels.next().expect("at least one mode")?;
    channels.try_fold(first, |acc, ch| Ok(tensor_channel(&acc, &ch?)))
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Diagonal(Vec<f64>),
    Dense(ComplexMatrix),
}

/// Operator on a truncated multi-mode Fock space. Diagonal operators are
/// stored as their diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cutoffs: Vec<usize>,
    storage: Storage,
}

impl FockOperator {
    pub fn dense(cutoffs: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let dim: usize = cutoffs.iter().product();
        if matrix.shape() != (dim, dim) {
            return Err(OracleError::Dimension(format!(
                "matrix is {}x{}, cutoffs {:?} need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols(),
                cutoffs
            )));
        }
        Ok(Self {
            cutoffs,
            storage: Storage::Dense(matrix),
        })
    }

    pub fn diagonal(cutoffs: Vec<usize>, diag: Vec<f64>) -> Result<Self> {
        let dim: usize = cutoffs.iter().product();
        if diag.len() != dim {
            return Err(OracleError::Dimension(format!(
                "{} diagonal entries, cutoffs {:?} need {dim}",
                diag.len(),
                cutoffs
            )));
        }
        Ok(Self {
            cutoffs,
            storage: Storage::Diagonal(diag),
        })
    }

    pub fn identity(cutoffs: Vec<usize>) -> Self {
        let dim = cutoffs.iter().product();
        Self {
            cutoffs,
            storage: Storage::Diagonal(vec![1.0; dim]),
        }
    }

    pub fn mode_cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.storage, Storage::Diagonal(_))
    }

    pub fn trace(&self) -> f64 {
        match &self.storage {
            Storage::Diagonal(d) => d.iter().sum(),
            Storage::Dense(m) => m.trace().re,
        }
    }

    /// Real parts of the diagonal.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Diagonal(d) => d.clone(),
            Storage::Dense(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match &self.storage {
            Storage::Diagonal(d) => matcore::real_diagonal(d),
            Storage::Dense(m) => m.clone(),
        }
    }

    pub fn tensor(&self, other: &FockOperator) -> FockOperator {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => {
                Storage::Diagonal(a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect())
            }
            _ => Storage::Dense(matcore::kron(&self.to_dense(), &other.to_dense())),
        };
        FockOperator { cutoffs, storage }
    }

    /// Eigenvalues of a Hermitian operator (ascending for dense storage).
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        match &self.storage {
            Storage::Diagonal(d) => Ok(d.clone()),
            Storage::Dense(m) => Ok(matcore::eigenvalues_hermitian(&HermitianMatrix::new(m.clone())?)?),
        }
    }
}

/// `omega_E` truncated to `cutoff` levels: `(1/(E+1)) (E/(E+1))^n`. The
/// missing trace is `(E/(E+1))^cutoff`.
pub fn thermal_diagonal(mean_occupation: f64, cutoff: usize) -> Vec<f64> {
    let e = mean_occupation;
    let ratio = e / (e + 1.0);
    let mut w = 1.0 / (e + 1.0);
    (0..cutoff)
        .map(|_| {
            let out = w;
            w *= ratio;
            out
        })
        .collect()
}

pub fn thermal_matrix(mean_occupation: f64, cutoff: usize) -> FockOperator {
    FockOperator::diagonal(vec![cutoff], thermal_diagonal(mean_occupation, cutoff)).expect("consistent")
}

/// Product thermal state `omega_{E_1} ⊗ ... ⊗ omega_{E_s}`.
pub fn thermal_product(occupations: &[f64], cutoffs: &[usize]) -> Result<FockOperator> {
    if occupations.len() != cutoffs.len() || cutoffs.is_empty() {
        return Err(OracleError::Dimension("one cutoff per mode required".into()));
    }
    let mut it = occupations.iter().zip(cutoffs).map(|(&e, &n)| thermal_matrix(e, n));
    let first = it.next().expect("nonempty");
    Ok(it.fold(first, |acc, op| acc.tensor(&op)))
}

/// Cutoff `ceil(28 (E + 1))`, which keeps `(E/(E+1))^N` below `1e-12`.
pub fn thermal_cutoff(mean_occupation: f64) -> usize {
    (28.0 * (mean_occupation + 1.0)).ceil() as usize
}

/// Where each flattened input index lands under `I ⊗ op ⊗ I` on mode `mode`.
fn axis_images(op: &ShiftOp, pre: usize, post: usize) -> Vec<Option<(usize, f64)>> {
    let mut out = Vec::with_capacity(pre * op.cols * post);
    for a in 0..pre {
        for k in 0..op.cols {
            let image = op.image(k);
            for b in 0..post {
                out.push(image.map(|(i, v)| ((a * op.rows + i) * post + b, v)));
            }
        }
    }
    out
}

fn apply_stage_diagonal(stage: &KrausStage, diag: &[f64], pre: usize, post: usize) -> Vec<f64> {
    let mut out = vec![0.0; pre * stage.cutoff_out * post];
    for op in &stage.ops {
        for a in 0..pre {
            for (i, c, v) in op.entries() {
                let w = v * v;
                let src = (a * stage.cutoff_in + c) * post;
                let dst = (a * stage.cutoff_out + i) * post;
                for b in 0..post {
                    out[dst + b] += w * diag[src + b];
                }
            }
        }
    }
    out
}

fn apply_stage_dense(stage: &KrausStage, rho: &ComplexMatrix, pre: usize, post: usize) -> ComplexMatrix {
    let dim_out = pre * stage.cutoff_out * post;
    let mut out = ComplexMatrix::zeros(dim_out, dim_out);
    for op in &stage.ops {
        let images = axis_images(op, pre, post);
        let mapped: Vec<(usize, usize, f64)> = images
            .iter()
            .enumerate()
            .filter_map(|(r, img)| img.map(|(o, v)| (r, o, v)))
            .collect();
        for &(r, ro, rv) in &mapped {
            for &(c, co, cv) in &mapped {
                out[(ro, co)] += rho[(r, c)] * (rv * cv);
            }
        }
    }
    out
}

/// `sum_l A_l rho A_l^*` over the full Kraus family, mode by mode.
pub fn apply_channel(channel: &KrausChannel, rho: &FockOperator) -> Result<FockOperator> {
    if channel.cutoffs_in() != rho.cutoffs {
        return Err(OracleError::Dimension(format!(
            "channel expects cutoffs {:?}, operator has {:?}",
            channel.cutoffs_in(),
            rho.cutoffs
        )));
    }
    let mut cutoffs = rho.cutoffs.clone();
    let mut storage = rho.storage.clone();
    for (m, mode) in channel.modes.iter().enumerate() {
        for stage in &mode.stages {
            let pre: usize = cutoffs[..m].iter().product();
            let post: usize = cutoffs[m + 1..].iter().product();
            storage = match storage {
                Storage::Diagonal(d) => Storage::Diagonal(apply_stage_diagonal(stage, &d, pre, post)),
                Storage::Dense(rho) => Storage::Dense(apply_stage_dense(stage, &rho, pre, post)),
            };
            cutoffs[m] = stage.cutoff_out;
        }
    }
    Ok(FockOperator { cutoffs, storage })
}

/// `(sum_i sigma_i^p)^(1/p)` over singular values.
pub fn schatten_norm_numeric(op: &FockOperator, p: f64) -> f64 {
    let values: Vec<f64> = match &op.storage {
        Storage::Diagonal(d) => d.iter().map(|x| x.abs()).collect(),
        Storage::Dense(m) => matcore::singular_values(m),
    };
    schatten_from_values(&values, p)
}

/// `(sum x_i^p)^(1/p)` for nonnegative `x`, scaled by the maximum to avoid overflow.
pub fn schatten_from_values(values: &[f64], p: f64) -> f64 {
    let top = values.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    if top == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|&x| (x / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// Von Neumann entropy `-sum lambda ln lambda`, with `0 ln 0 = 0`.
pub fn entropy_numeric(op: &FockOperator) -> Result<f64> {
    let ev = op.hermitian_eigenvalues()?;
    let mut s = 0.0;
    for &x in &ev {
        if x < -NEG_EIG_TOL {
            return Err(OracleError::NotPsd(x));
        }
        if x > 0.0 {
            s -= x * x.ln();
        }
    }
    Ok(s)
}

/// Diagonal of the attenuator applied to the truncated identity. Entries
/// well inside the cutoff approach `1/eta`.
pub fn phi_of_identity_diag(eta: f64, cutoff: usize) -> Result<Vec<f64>> {
    let channel = attenuator_kraus(eta, cutoff)?;
    Ok(apply_channel(&channel, &FockOperator::identity(vec![cutoff]))?.diagonal_entries())
}
