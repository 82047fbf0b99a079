//! Interpolation bound for positive maps on matrix algebras.
//!
//! For a positive map `N` on `d x d` matrices and `p > 1`,
//! `||N||_{p->p} <= ||N(1)||^(1/p') ||N*(1)||^(1/p)`. This module builds
//! positive maps that are positive by construction (Kraus sums, optionally
//! precomposed with the transpose), probes `||N||_{p->p}` from below by a
//! fixed-point ascent, and checks the inequality.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matcore::{self, ComplexMatrix, HermitianMatrix, MatError};
use crate::sampling;

/// Relative tolerance for `lower <= rhs`.
pub const VIOLATION_TOL: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_ITERS: usize = 50;
pub const DEFAULT_P_GRID: [f64; 6] = [1.1, 1.5, 2.0, 3.0, 10.0, 1000.0];

#[derive(Debug, Error)]
pub enum MapError {
    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Dimension { expected: usize, rows: usize, cols: usize },
    #[error("a positive map needs at least one Kraus operator")]
    NoKrausOps,
    #[error("exponent p = {0} must be > 1")]
    InvalidExponent(f64),
    #[error("trials and iterations must be at least 1")]
    InvalidBudget,
    #[error(transparent)]
    Matrix(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, MapError>;

/// `X -> sum_A A T(X) A^*`, `T` the transpose when `pre_transpose` is set,
/// else the identity. CP without the transpose, co-positive with it.
#[derive(Debug, Clone)]
pub struct PositiveMapRep {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    pre_transpose: bool,
    // row-major vec: vec(A X B) = (A ⊗ B^T) vec(X)
    superop: ComplexMatrix,
}

impl PositiveMapRep {
    pub fn new(kraus: Vec<ComplexMatrix>, pre_transpose: bool) -> Result<Self> {
        let first = kraus.first().ok_or(MapError::NoKrausOps)?;
        let dim = first.nrows();
        for a in &kraus {
            check_square(a, dim)?;
        }
        let d2 = dim * dim;
        let mut superop = kraus
            .iter()
            .fold(ComplexMatrix::zeros(d2, d2), |acc, a| acc + matcore::kron(a, &a.conjugate()));
        if pre_transpose {
            // right-multiply by the swap permutation vec(X) -> vec(X^T)
            let mut swapped = ComplexMatrix::zeros(d2, d2);
            for i in 0..dim {
                for j in 0..dim {
                    swapped.set_column(j * dim + i, &superop.column(i * dim + j));
                }
            }
            superop = swapped;
        }
        Ok(Self {
            dim,
            kraus,
            pre_transpose,
            superop,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim, dim)], false).expect("nonempty")
    }

    pub fn transpose(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim, dim)], true).expect("nonempty")
    }

    /// Pinching onto the diagonal: Kraus ops `|i><i|`.
    pub fn pinching(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|i| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                m
            })
            .collect();
        Self::new(kraus, false).expect("nonempty")
    }

    /// `k` Kraus ops with i.i.d. standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, kraus_count: usize, pre_transpose: bool) -> Self {
        let kraus = (0..kraus_count.max(1))
            .map(|_| sampling::gaussian_matrix(rng, dim, dim))
            .collect();
        Self::new(kraus, pre_transpose).expect("nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn pre_transpose(&self) -> bool {
        self.pre_transpose
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_square(x, self.dim)?;
        Ok(self.apply_unchecked(x))
    }

    /// `T(sum_A A^* Y A)`. This is both the trace-pairing dual
    /// (`tr(Y N(X)) = tr(N*(Y) X)`) and the Hilbert-Schmidt adjoint.
    pub fn apply_dual(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_square(y, self.dim)?;
        Ok(self.apply_dual_unchecked(y))
    }

    fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        unvec(&(&self.superop * vec(x)), self.dim)
    }

    fn apply_dual_unchecked(&self, y: &ComplexMatrix) -> ComplexMatrix {
        unvec(&self.superop.ad_mul(&vec(y)), self.dim)
    }

    /// `N(1)` and `N*(1)`.
    pub fn unit_images(&self) -> (ComplexMatrix, ComplexMatrix) {
        let id = ComplexMatrix::identity(self.dim, self.dim);
        (self.apply_unchecked(&id), self.apply_dual_unchecked(&id))
    }

    /// `||N(1)||^(1/p') ||N*(1)||^(1/p)` in operator norm.
    pub fn bound_rhs(&self, p: f64) -> f64 {
        let (n1, nd1) = self.unit_images();
        let a = operator_norm(&n1);
        let b = operator_norm(&nd1);
        a.powf(1.0 - 1.0 / p) * b.powf(1.0 / p)
    }

    /// Rescales the Kraus ops so that `N(1) = N*(1) = 1` (operator
    /// Sinkhorn scaling). Returns `None` if `N(1)` or `N*(1)` is singular or
    /// the scaling fails to converge.
    pub fn doubly_normalized(&self, max_iters: usize, tol: f64) -> Option<Self> {
        let mut kraus = self.kraus.clone();
        let id = ComplexMatrix::identity(self.dim, self.dim);
        for _ in 0..max_iters {
            let row = kraus.iter().fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, a| acc + a * a.adjoint());
            let left = inverse_sqrt(&row)?;
            kraus = kraus.iter().map(|a| &left * a).collect();
            let col = kraus.iter().fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, a| acc + a.adjoint() * a);
            let right = inverse_sqrt(&col)?;
            kraus = kraus.iter().map(|a| a * &right).collect();
            let candidate = Self::new(kraus.clone(), self.pre_transpose).ok()?;
            let (n1, nd1) = candidate.unit_images();
            if matcore::max_abs(&(n1 - &id)) < tol && matcore::max_abs(&(nd1 - &id)) < tol {
                return Some(candidate);
            }
        }
        None
    }

    /// Best `||N(X)||_p / ||X||_p` found over `trials` starts, each refined
    /// by up to `iters` ascent steps. Every reported value is attained by an
    /// explicit witness, so it is a lower bound on `||N||_{p->p}` whether or
    /// not the ascent converged.
    pub fn norm_lower_bound<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        p: f64,
        trials: usize,
        iters: usize,
    ) -> Result<NormWitness> {
        if p.is_nan() || p <= 1.0 {
            return Err(MapError::InvalidExponent(p));
        }
        if trials == 0 || iters == 0 {
            return Err(MapError::InvalidBudget);
        }
        let mut best = NormWitness {
            value: f64::NEG_INFINITY,
            witness: ComplexMatrix::identity(self.dim, self.dim),
        };
        for t in 0..trials {
            let start = match t {
                0 => ComplexMatrix::identity(self.dim, self.dim),
                t if t % 2 == 1 => {
                    let g = sampling::gaussian_matrix(rng, self.dim, self.dim);
                    (&g + g.adjoint()).scale(0.5)
                }
                _ => sampling::gaussian_matrix(rng, self.dim, self.dim),
            };
            let found = self.ascend(start, p, iters);
            if found.value > best.value {
                best = found;
            }
        }
        Ok(best)
    }

    fn ascend(&self, start: ComplexMatrix, p: f64, iters: usize) -> NormWitness {
        let conj = p / (p - 1.0);
        let mut x = start;
        let mut best = NormWitness {
            value: self.ratio(&x, p),
            witness: x.clone(),
        };
        let mut last = best.value;
        for _ in 0..iters {
            let y = self.apply_unchecked(&x);
            let Some(g) = dual_direction(&y, p) else { break };
            let z = self.apply_dual_unchecked(&g);
            let Some(next) = dual_direction(&z, conj) else { break };
            x = next;
            let value = self.ratio(&x, p);
            if value > best.value {
                best = NormWitness {
                    value,
                    witness: x.clone(),
                };
            }
            if (value - last).abs() <= 1e-13 * value.abs() {
                break;
            }
            last = value;
        }
        best
    }

    fn ratio(&self, x: &ComplexMatrix, p: f64) -> f64 {
        let denom = schatten_norm(x, p);
        if denom == 0.0 {
            return 0.0;
        }
        schatten_norm(&self.apply_unchecked(x), p) / denom
    }

    /// Checks the bound at every `p` in `p_grid`.
    pub fn verify_bound<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        p_grid: &[f64],
        trials: usize,
        iters: usize,
    ) -> Result<BoundReport> {
        let mut rows = Vec::with_capacity(p_grid.len());
        let mut counterexamples = Vec::new();
        for &p in p_grid {
            let found = self.norm_lower_bound(rng, p, trials, iters)?;
            let rhs = self.bound_rhs(p);
            let slack = if rhs > 0.0 { (rhs - found.value) / rhs } else { 0.0 };
            if found.value > rhs * (1.0 + VIOLATION_TOL) {
                counterexamples.push(Counterexample {
                    p,
                    lower: found.value,
                    rhs,
                    pre_transpose: self.pre_transpose,
                    kraus_ops: self.kraus.iter().map(encode_matrix).collect(),
                    witness: encode_matrix(&found.witness),
                });
            }
            rows.push(SlackRow {
                p,
                lower: found.value,
                rhs,
                slack,
            });
        }
        Ok(BoundReport {
            dim: self.dim,
            kraus_count: self.kraus.len(),
            pre_transpose: self.pre_transpose,
            rows,
            counterexamples,
        })
    }
}

fn check_square(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(MapError::Dimension {
            expected: dim,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn vec(x: &ComplexMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(x.len(), x.transpose().iter().copied())
}

fn unvec(v: &nalgebra::DVector<Complex64>, dim: usize) -> ComplexMatrix {
    DMatrix::from_row_slice(dim, dim, v.as_slice())
}

fn operator_norm(m: &ComplexMatrix) -> f64 {
    matcore::singular_values(m).first().copied().unwrap_or(0.0)
}

fn schatten_norm(m: &ComplexMatrix, p: f64) -> f64 {
    crate::fockoracle::schatten_from_values(&matcore::singular_values(m), p)
}

/// `U diag(s/s_max)^(r-1) V^*` from the SVD `Y = U diag(s) V^*`: the
/// direction maximizing `Re tr(Y^* X)` on the Schatten sphere of exponent
/// dual to `r`, up to scale.
fn dual_direction(y: &ComplexMatrix, r: f64) -> Option<ComplexMatrix> {
    let svd = y.clone().svd(true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    let top = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    if top.is_nan() || top <= 0.0 || !top.is_finite() {
        return None;
    }
    let weights: Vec<Complex64> = svd
        .singular_values
        .iter()
        .map(|&s| Complex64::new(if s > 0.0 { (s / top).powf(r - 1.0) } else { 0.0 }, 0.0))
        .collect();
    let mut scaled = u;
    for (j, w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w.re);
    }
    Some(scaled * v_t)
}

fn inverse_sqrt(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let h = HermitianMatrix::symmetrized(m.clone());
    let eig = matcore::eig_hermitian(&h).ok()?;
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &x| a.max(x));
    if eig.eigenvalues.iter().any(|&x| x.is_nan() || x <= 1e-12 * top) {
        return None;
    }
    Some(eig.reconstruct_with(|x| x.powf(-0.5)))
}

/// Row-major `[re, im]` pairs.
pub fn encode_matrix(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct NormWitness {
    pub value: f64,
    pub witness: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlackRow {
    pub p: f64,
    pub lower: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub p: f64,
    pub lower: f64,
    pub rhs: f64,
    pub pre_transpose: bool,
    pub kraus_ops: Vec<Vec<Vec<[f64; 2]>>>,
    pub witness: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub kraus_count: usize,
    pub pre_transpose: bool,
    pub rows: Vec<SlackRow>,
    pub counterexamples: Vec<Counterexample>,
}

impl BoundReport {
    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    /// Kraus sums.
    Cp,
    /// Kraus sums after a transpose.
    CoPositive,
    /// Alternates CP (even index) and co-positive (odd index).
    Mixed,
    /// The identity map on `d_max` levels.
    Identity,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub d_max: usize,
    pub n_maps: usize,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub iters: usize,
    pub family: MapFamily,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            d_max: 8,
            n_maps: 500,
            p_grid: DEFAULT_P_GRID.to_vec(),
            trials: DEFAULT_TRIALS,
            iters: DEFAULT_ITERS,
            family: MapFamily::Mixed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub index: usize,
    pub dim: usize,
    pub kraus_count: usize,
    pub pre_transpose: bool,
    pub min_slack: f64,
    pub rows: Vec<SlackRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub maps: Vec<MapSummary>,
    pub min_slack: f64,
    pub max_slack: f64,
    pub violation_count: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Map `index` of the suite and the RNG used to probe it. Depends only on
/// `(seed, index)`.
pub fn suite_map(config: &SuiteConfig, index: usize) -> (PositiveMapRep, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let map = match config.family {
        MapFamily::Identity => PositiveMapRep::identity(config.d_max),
        family => {
            let transpose = match family {
                MapFamily::Cp => false,
                MapFamily::CoPositive => true,
                _ => index % 2 == 1,
            };
            let dim = rng.random_range(1..=config.d_max.max(1));
            let count = rng.random_range(1..=dim * dim);
            PositiveMapRep::random(&mut rng, dim, count, transpose)
        }
    };
    (map, rng)
}

/// Runs `verify_bound` on every map of the suite, in parallel on the
/// current rayon pool. Output order and values do not depend on the
/// number of threads.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let reports: Vec<Result<(usize, BoundReport)>> = (0..config.n_maps)
        .into_par_iter()
        .map(|index| {
            let (map, mut rng) = suite_map(config, index);
            let report = map.verify_bound(&mut rng, &config.p_grid, config.trials, config.iters)?;
            Ok((index, report))
        })
        .collect();
    let mut maps = Vec::with_capacity(config.n_maps);
    let mut counterexamples = Vec::new();
    for r in reports {
        let (index, report) = r?;
        counterexamples.extend(report.counterexamples.iter().cloned());
        maps.push(MapSummary {
            index,
            dim: report.dim,
            kraus_count: report.kraus_count,
            pre_transpose: report.pre_transpose,
            min_slack: report.min_slack(),
            rows: report.rows,
        });
    }
    let slacks = maps.iter().flat_map(|m| m.rows.iter().map(|r| r.slack));
    let (min_slack, max_slack) = slacks.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    Ok(SuiteReport {
        config: config.clone(),
        violation_count: counterexamples.len(),
        maps,
        min_slack,
        max_slack,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Direct formula `sum_A A T(X) A^*`, independent of the superoperator.
    fn apply_direct(map: &PositiveMapRep, x: &ComplexMatrix) -> ComplexMatrix {
        let x = if map.pre_transpose() { x.transpose() } else { x.clone() };
        map.kraus_ops()
            .iter()
            .fold(ComplexMatrix::zeros(map.dim(), map.dim()), |acc, a| acc + a * &x * a.adjoint())
    }

    fn m2(a: f64, b: f64, cc: f64, d: f64) -> ComplexMatrix {
        matcore::from_row_major(2, 2, vec![c(a), c(b), c(cc), c(d)]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let mut r = rng(1);
        let x = sampling::gaussian_matrix(&mut r, 3, 3);
        assert_eq!(PositiveMapRep::identity(3).apply(&x).unwrap(), x);
        assert_eq!(PositiveMapRep::transpose(3).apply(&x).unwrap(), x.transpose());

        let k0 = m2(1.0, 0.0, 0.0, 0.0);
        let k1 = m2(0.0, 1.0, 0.0, 0.0);
        let map = PositiveMapRep::new(vec![k0, k1], false).unwrap();
        let out = map.apply(&m2(2.0, 3.0, 5.0, 7.0)).unwrap();
        assert_eq!(out, m2(9.0, 0.0, 0.0, 0.0));

        assert!(map.apply(&ComplexMatrix::zeros(3, 3)).is_err());
        assert!(map.apply_dual(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(PositiveMapRep::new(vec![], false).is_err());
        assert!(PositiveMapRep::new(vec![m2(1.0, 0.0, 0.0, 1.0), ComplexMatrix::zeros(3, 3)], false).is_err());
    }

    #[test]
    fn superoperator_matches_direct_formula() {
        let mut r = rng(2);
        for &t in &[false, true] {
            for d in 1..=5 {
                let map = PositiveMapRep::random(&mut r, d, 3, t);
                let x = sampling::gaussian_matrix(&mut r, d, d);
                let diff = map.apply(&x).unwrap() - apply_direct(&map, &x);
                assert!(matcore::max_abs(&diff) < 1e-12);
            }
        }
    }

    #[test]
    fn duality_pairing() {
        let mut r = rng(3);
        for &t in &[false, true] {
            let map = PositiveMapRep::random(&mut r, 4, 5, t);
            // dual formula T(sum A^* Y A) computed directly
            for _ in 0..20 {
                let x = sampling::gaussian_matrix(&mut r, 4, 4);
                let y = sampling::gaussian_matrix(&mut r, 4, 4);
                let lhs = (&y * map.apply(&x).unwrap()).trace();
                let dual = map.apply_dual(&y).unwrap();
                let rhs = (&dual * &x).trace();
                assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
                let direct = map
                    .kraus_ops()
                    .iter()
                    .fold(ComplexMatrix::zeros(4, 4), |acc, a| acc + a.adjoint() * &y * a);
                let direct = if t { direct.transpose() } else { direct };
                assert!(matcore::max_abs(&(dual - direct)) < 1e-10);
            }
        }
        let y = sampling::gaussian_matrix(&mut r, 3, 3);
        assert_eq!(PositiveMapRep::identity(3).apply_dual(&y).unwrap(), y);
    }

    #[test]
    fn trace_preserving_maps_have_unital_duals() {
        let u = sampling::random_unitary(&mut rng(4), 3);
        let map = PositiveMapRep::new(vec![u.scale(0.6), u.scale(0.8)], false).unwrap();
        let (_, nd1) = map.unit_images();
        assert!(matcore::max_abs(&(nd1 - ComplexMatrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn generated_maps_preserve_positivity() {
        let mut r = rng(5);
        let mut checked = 0;
        for i in 0..100 {
            let d = 1 + i % 8;
            let map = PositiveMapRep::random(&mut r, d, 1 + i % (d * d), i % 2 == 1);
            for _ in 0..100 {
                let x = sampling::random_psd(&mut r, d, 1.0);
                let y = map.apply(x.as_matrix()).unwrap();
                let h = HermitianMatrix::symmetrized(y.clone());
                let min = matcore::min_eigenvalue(&h).unwrap();
                assert!(min >= -1e-10 * operator_norm(&y).max(1.0), "min eig {min}");
                checked += 1;
            }
        }
        assert_eq!(checked, 10_000);
    }

    #[test]
    fn bound_rhs_examples() {
        for p in [1.5, 2.0, 7.0] {
            assert_eq!(PositiveMapRep::identity(4).bound_rhs(p), 1.0);
            assert!((PositiveMapRep::transpose(4).bound_rhs(p) - 1.0).abs() < 1e-15);
            let id = ComplexMatrix::identity(3, 3);
            let doubled = PositiveMapRep::new(vec![id.clone(), id], false).unwrap();
            assert!((doubled.bound_rhs(p) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_lower_bound_examples() {
        let mut r = rng(6);
        for p in [1.1, 2.0, 10.0] {
            let w = PositiveMapRep::identity(4).norm_lower_bound(&mut r, p, 5, 10).unwrap();
            assert_eq!(w.value, 1.0);
            let id = ComplexMatrix::identity(3, 3);
            let doubled = PositiveMapRep::new(vec![id.clone(), id], false).unwrap();
            let w = doubled.norm_lower_bound(&mut r, p, 5, 10).unwrap();
            assert!((w.value - 2.0).abs() < 1e-14);
        }
        let w = PositiveMapRep::pinching(3).norm_lower_bound(&mut r, 2.0, 20, 50).unwrap();
        assert!((w.value - 1.0).abs() < 1e-8);
        assert!(PositiveMapRep::identity(2).norm_lower_bound(&mut r, 1.0, 1, 1).is_err());
        assert!(PositiveMapRep::identity(2).norm_lower_bound(&mut r, 2.0, 0, 1).is_err());
    }

    #[test]
    fn witness_attains_reported_value() {
        let mut r = rng(7);
        let map = PositiveMapRep::random(&mut r, 5, 4, true);
        let w = map.norm_lower_bound(&mut r, 3.0, 6, 30).unwrap();
        let direct = schatten_norm(&map.apply(&w.witness).unwrap(), 3.0) / schatten_norm(&w.witness, 3.0);
        assert!((direct - w.value).abs() < 1e-12 * w.value);
    }

    #[test]
    fn ascent_reaches_known_norm() {
        // X -> <0|X|0> I has p -> p norm d^(1/p), attained at |0><0|
        let d = 4;
        let kraus: Vec<ComplexMatrix> = (0..d)
            .map(|i| {
                let mut m = ComplexMatrix::zeros(d, d);
                m[(i, 0)] = c(1.0);
                m
            })
            .collect();
        let map = PositiveMapRep::new(kraus, false).unwrap();
        let mut r = rng(8);
        for p in [1.5, 2.0, 3.0, 10.0] {
            let w = map.norm_lower_bound(&mut r, p, DEFAULT_TRIALS, DEFAULT_ITERS).unwrap();
            let exact = (d as f64).powf(1.0 / p);
            assert!((w.value - exact).abs() < 1e-8 * exact, "p={p}: {} vs {exact}", w.value);
            assert!(w.value <= map.bound_rhs(p) * (1.0 + VIOLATION_TOL));
        }
        let w = PositiveMapRep::transpose(3).norm_lower_bound(&mut r, 2.0, 5, 10).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_bound_identity_has_zero_slack() {
        let report = PositiveMapRep::identity(3).verify_bound(&mut rng(9), &[1.5, 2.0, 3.0], 5, 10).unwrap();
        assert!(report.counterexamples.is_empty());
        assert!(report.rows.iter().all(|r| r.slack == 0.0));
    }

    #[test]
    fn zero_map_has_zero_norms() {
        let map = PositiveMapRep::new(vec![ComplexMatrix::zeros(3, 3)], false).unwrap();
        let report = map.verify_bound(&mut rng(10), &[1.5, 2.0], 3, 5).unwrap();
        for row in &report.rows {
            assert_eq!((row.lower, row.rhs, row.slack), (0.0, 0.0, 0.0));
        }
        assert!(report.counterexamples.is_empty());
    }

    #[test]
    fn endpoint_consistency_for_doubly_normalized_maps() {
        let mut r = rng(11);
        for i in 0..20 {
            let d = 2 + i % 5;
            let raw = PositiveMapRep::random(&mut r, d, 1 + i % (d * d), i % 2 == 1);
            let Some(map) = raw.doubly_normalized(500, 1e-13) else {
                continue;
            };
            let (n1, nd1) = map.unit_images();
            let hi = map.norm_lower_bound(&mut r, 1000.0, 5, 20).unwrap().value;
            assert!(hi <= operator_norm(&n1) * (1.0 + 1e-6), "p=1000: {hi}");
            let lo = map.norm_lower_bound(&mut r, 1.001, 5, 20).unwrap().value;
            assert!(lo <= operator_norm(&nd1) * (1.0 + 1e-3), "p=1.001: {lo}");
        }
    }

    #[test]
    fn small_suite_has_no_violations_and_is_deterministic() {
        let config = SuiteConfig {
            seed: 42,
            n_maps: 24,
            d_max: 5,
            trials: 4,
            iters: 20,
            ..SuiteConfig::default()
        };
        let a = run_suite(&config).unwrap();
        assert_eq!(a.violation_count, 0);
        assert_eq!(a.maps.len(), 24);
        assert!(a.maps.iter().any(|m| m.pre_transpose) && a.maps.iter().any(|m| !m.pre_transpose));
        let b = run_suite(&config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

        let id = run_suite(&SuiteConfig {
            n_maps: 1,
            family: MapFamily::Identity,
            ..config
        })
        .unwrap();
        assert_eq!(id.min_slack, 0.0);
        assert_eq!(id.max_slack, 0.0);
    }
}
