//! Covariance linear algebra: sample covariance, top-k spectra, Haar bases,
//! effective rank and the Wielandt block bound.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{arg, Error, Result};

/// Relative tolerance below which negative eigenvalues are rounding noise.
pub const PSD_TOL: f64 = 1e-10;

/// Dimension at or below which the data route forms the covariance and runs
/// a dense symmetric eigensolver; above it the data matrix is factored by SVD.
pub const DENSE_EIGEN_MAX_P: usize = 512;

/// A symmetric covariance matrix, stored with an exactly symmetric layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Accepts a square matrix whose asymmetry is at rounding level and
    /// mirrors its upper triangle into the lower one.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "covariance must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::Dimension("covariance is empty".into()));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let p = entries.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(arg(
                        "cov",
                        format!("matrix is not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        Ok(Self::from_upper(entries))
    }

    fn from_upper(mut entries: DMatrix<f64>) -> Self {
        entries.fill_lower_triangle_with_upper_triangle();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Full spectrum, descending.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let values = self.entries.symmetric_eigenvalues();
        Spectrum::from_raw(values.iter().copied().collect())
    }
}

/// Eigenvalues sorted in non-increasing order, all non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Wraps values that must already be sorted descending and non-negative
    /// up to `PSD_TOL` relative to the largest.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("spectrum is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(arg("values", "spectrum contains a non-finite value"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(arg("values", "spectrum must be non-increasing"));
        }
        let floor = -PSD_TOL * values[0].abs();
        if let Some(&last) = values.last() {
            if last < floor {
                return Err(Error::NotPsd {
                    min: last,
                    max: values[0],
                });
            }
        }
        Ok(Self {
            values: values.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    /// Sorts raw eigenvalues, clamps rounding-level negatives to zero and
    /// rejects genuinely negative ones.
    pub(crate) fn from_raw(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Leading `k` values.
    pub fn top(&self, k: usize) -> Result<Spectrum> {
        if k == 0 || k > self.values.len() {
            return Err(arg(
                "k",
                format!("k = {k} must lie in 1..={}", self.values.len()),
            ));
        }
        Ok(Self {
            values: self.values[..k].to_vec(),
        })
    }
}

/// Orthogonal p x p matrix whose j-th column is the j-th eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalBasis {
    columns: DMatrix<f64>,
}

impl OrthogonalBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if !columns.is_square() || columns.nrows() == 0 {
            return Err(Error::Dimension("basis must be square and non-empty".into()));
        }
        let basis = Self { columns };
        let err = basis.orthogonality_error();
        if err > 1e-10 {
            return Err(arg("columns", format!("not orthogonal (error {err:e})")));
        }
        Ok(basis)
    }

    pub fn identity(p: usize) -> Self {
        Self {
            columns: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// max |QᵀQ − I| entrywise.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.dim();
        let gram = self.columns.transpose() * &self.columns;
        (gram - DMatrix::<f64>::identity(p, p)).amax()
    }
}

fn check_data(data: &DMatrix<f64>) -> Result<()> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "data matrix must be non-empty, got {}x{}",
            data.nrows(),
            data.ncols()
        )));
    }
    Ok(())
}

/// `(1/n) Σ xᵢxᵢᵀ`, after subtracting column means when `centered` is set.
pub fn sample_covariance(data: &DMatrix<f64>, centered: bool) -> Result<CovarianceMatrix> {
    check_data(data)?;
    let n = data.nrows() as f64;
    let cov = if centered {
        let means = data.row_mean();
        let mut dev = data.clone();
        for mut row in dev.row_iter_mut() {
            row -= &means;
        }
        dev.transpose() * &dev / n
    } else {
        data.transpose() * data / n
    };
    Ok(CovarianceMatrix::from_upper(cov))
}

/// Top-`k` eigenvalues of a covariance matrix.
pub fn top_eigenvalues(cov: &CovarianceMatrix, k: usize) -> Result<Spectrum> {
    check_k(k, cov.dim())?;
    cov.spectrum()?.top(k)
}

/// How the data route extracts the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenRoute {
    /// Dense eigensolver for `p <= DENSE_EIGEN_MAX_P`, SVD otherwise.
    #[default]
    Auto,
    SymmetricEigen,
    Svd,
}

/// Top-`k` eigenvalues of the uncentered sample covariance of `data`,
/// computed directly from the data matrix.
pub fn top_eigenvalues_of_data(data: &DMatrix<f64>, k: usize, route: EigenRoute) -> Result<Spectrum> {
    check_data(data)?;
    let (n, p) = data.shape();
    check_k(k, p)?;
    let use_svd = match route {
        EigenRoute::Auto => p > DENSE_EIGEN_MAX_P,
        EigenRoute::SymmetricEigen => false,
        EigenRoute::Svd => true,
    };
    if !use_svd {
        return top_eigenvalues(&sample_covariance(data, false)?, k);
    }
    let singular = data.singular_values();
    let mut values: Vec<f64> = singular.iter().map(|s| s * s / n as f64).collect();
    // an n < p matrix has only n singular values; the rest of the spectrum is 0
    values.resize(p.max(values.len()), 0.0);
    Spectrum::from_raw(values)?.top(k)
}

fn check_k(k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(arg("k", format!("k = {k} must lie in 1..={p}")));
    }
    Ok(())
}

/// Leading eigenpairs of a covariance: values descending and a p x b matrix
/// of the matching unit eigenvectors.
pub fn top_eigenpairs(cov: &CovarianceMatrix, b: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_k(b, cov.dim())?;
    let eig = SymmetricEigen::new(cov.as_matrix().clone());
    let mut order: Vec<usize> = (0..cov.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order[..b].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(cov.dim(), b, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `tr(Σ) / λ₁(Σ)`.
pub fn effective_rank(spectrum: &Spectrum) -> Result<f64> {
    let top = spectrum.largest();
    if top <= 0.0 {
        return Err(Error::Degenerate("effective rank of an all-zero spectrum".into()));
    }
    Ok(spectrum.sum() / top)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q flipped so that diag(R) > 0.
pub fn haar_orthogonal<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<OrthogonalBasis> {
    if p == 0 {
        return Err(arg("p", "dimension must be at least 1"));
    }
    let gauss = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(OrthogonalBasis { columns: q })
}

/// Outcome of checking Wielandt's block-perturbation inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum WielandtReport {
    /// λ_k(B) ≤ λ₁(D): the inequality says nothing.
    NotApplicable,
    Applicable {
        /// `(λ_j(A) − λ_j(B), λ₁(CCᵀ)/(λ_j(B) − λ₁(D)))` for j = 1..k.
        pairs: Vec<(f64, f64)>,
        holds: bool,
    },
}

/// Partitions `a` into a leading k x k block B, off-diagonal block C and
/// trailing block D, and checks `0 ≤ λ_j(A) − λ_j(B) ≤ λ₁(CCᵀ)/(λ_j(B) − λ₁(D))`.
///
/// Comparisons allow a rounding slack of `1e-10·max|λ(A)|`.
pub fn wielandt_check(a: &CovarianceMatrix, k: usize) -> Result<WielandtReport> {
    let p = a.dim();
    if k == 0 || k >= p {
        return Err(arg("k", format!("k = {k} must lie in 1..{p}")));
    }
    let m = a.as_matrix();
    let b = m.view((0, 0), (k, k)).into_owned();
    let d = m.view((k, k), (p - k, p - k)).into_owned();
    let c = m.view((0, k), (k, p - k)).into_owned();
    let mut lam_b: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    lam_b.sort_by(|x, y| y.total_cmp(x));
    let lam_d1 = d.symmetric_eigenvalues().max();
    if lam_b[k - 1] <= lam_d1 {
        return Ok(WielandtReport::NotApplicable);
    }
    let cct = CovarianceMatrix::from_upper(&c * c.transpose());
    let lam_cct = cct.as_matrix().symmetric_eigenvalues().max().max(0.0);
    let mut lam_a: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    lam_a.sort_by(|x, y| y.total_cmp(x));
    let slack = 1e-10 * lam_a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut holds = true;
    let pairs = (0..k)
        .map(|j| {
            let gap = lam_a[j] - lam_b[j];
            let bound = lam_cct / (lam_b[j] - lam_d1);
            holds &= gap >= -slack && gap <= bound + slack;
            (gap, bound)
        })
        .collect();
    Ok(WielandtReport::Applicable { pairs, holds })
}

/// How [`factor_top_eigenvalues`] computes the spectrum of `YᵀY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorRoute {
    /// Cheapest of the routes below by a flop estimate.
    #[default]
    Auto,
    /// Dense eigensolve of the p x p matrix `YᵀY`.
    Covariance,
    /// Dense eigensolve of the m x m matrix `YYᵀ`.
    Gram,
    /// Warm-started block subspace iteration with Rayleigh–Ritz; O(mpb) per sweep.
    Subspace,
}

impl std::fmt::Display for FactorRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Covariance => "covariance",
            Self::Gram => "gram",
            Self::Subspace => "subspace",
        })
    }
}

impl std::str::FromStr for FactorRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "covariance" => Ok(Self::Covariance),
            "gram" => Ok(Self::Gram),
            "subspace" => Ok(Self::Subspace),
            _ => Err(Error::Config {
                field: "route".into(),
                reason: format!("unknown route `{s}` (auto, covariance, gram, subspace)"),
            }),
        }
    }
}

/// Settings for the subspace route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceOptions {
    /// Stop once every leading residual `‖Av − θv‖` is below `tol·θ₁`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
        }
    }
}

/// Iterations used by the last subspace solve, plus the route actually taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorSolve {
    pub route: FactorRoute,
    pub iterations: usize,
}

/// Top-`k` eigenvalues of `A = YᵀY` for an m x p factor `Y`.
///
/// `warm` is a p x b orthonormal block (b ≥ k) that seeds the subspace
/// route; without it that route is unavailable. Returns the values
/// (descending, clamped at zero) and which route ran.
pub fn factor_top_eigenvalues(
    y: &DMatrix<f64>,
    k: usize,
    warm: Option<&DMatrix<f64>>,
    route: FactorRoute,
    opts: SubspaceOptions,
) -> Result<(Vec<f64>, FactorSolve)> {
    let (m, p) = y.shape();
    check_k(k, p)?;
    if m == 0 {
        return Ok((
            vec![0.0; k],
            FactorSolve {
                route: FactorRoute::Gram,
                iterations: 0,
            },
        ));
    }
    let warm = warm.filter(|w| w.nrows() == p && w.ncols() >= k && w.ncols() < p);
    let chosen = match route {
        FactorRoute::Auto => cheapest_route(m, p, warm.map(|w| w.ncols())),
        FactorRoute::Subspace if warm.is_none() => cheapest_route(m, p, None),
        r => r,
    };
    let dense = |r: FactorRoute| -> Result<(Vec<f64>, FactorSolve)> {
        let values = match r {
            FactorRoute::Gram => {
                (y * y.transpose()).symmetric_eigenvalues()
            }
            _ => (y.transpose() * y).symmetric_eigenvalues(),
        };
        let mut values: Vec<f64> = values.iter().copied().collect();
        values.resize(values.len().max(k), 0.0);
        let spec = Spectrum::from_raw(values)?;
        Ok((
            spec.values()[..k].to_vec(),
            FactorSolve {
                route: r,
                iterations: 0,
            },
        ))
    };
    match chosen {
        FactorRoute::Subspace => {
            let w = warm.expect("subspace route requires a warm block");
            match subspace_iteration(y, k, w, opts)? {
                Some((values, iterations)) => Ok((
                    values,
                    FactorSolve {
                        route: FactorRoute::Subspace,
                        iterations,
                    },
                )),
                None => {
                    log::debug!("subspace iteration did not converge; using dense route");
                    dense(if m < p { FactorRoute::Gram } else { FactorRoute::Covariance })
                }
            }
        }
        FactorRoute::Gram => dense(FactorRoute::Gram),
        _ => dense(FactorRoute::Covariance),
    }
}

// Costs in units of one gemm flop; a dense symmetric eigensolve runs at
// roughly a tenth of gemm throughput.
fn cheapest_route(m: usize, p: usize, block: Option<usize>) -> FactorRoute {
    let (m, p) = (m as f64, p as f64);
    let cov = 2.0 * m * p * p + 10.0 * p * p * p;
    let gram = 2.0 * m * m * p + 10.0 * m * m * m;
    let mut best = if gram < cov {
        (gram, FactorRoute::Gram)
    } else {
        (cov, FactorRoute::Covariance)
    };
    if let Some(b) = block {
        let b = b as f64;
        let sub = 15.0 * (4.0 * m * p * b + 40.0 * p * b * b);
        if sub < best.0 {
            best = (sub, FactorRoute::Subspace);
        }
    }
    best.1
}

fn subspace_iteration(
    y: &DMatrix<f64>,
    k: usize,
    warm: &DMatrix<f64>,
    opts: SubspaceOptions,
) -> Result<Option<(Vec<f64>, usize)>> {
    let yt = y.transpose();
    let mut q = warm.clone();
    for iter in 1..=opts.max_iter {
        let yq = y * &q;
        let z = &yt * &yq;
        let t = yq.tr_mul(&yq);
        let eig = SymmetricEigen::new(t);
        let b = q.ncols();
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let top = theta[0];
        if top <= 0.0 {
            return Ok(Some((vec![0.0; k], iter)));
        }
        let s_k = DMatrix::from_fn(b, k, |r, c| eig.eigenvectors[(r, order[c])]);
        let zs = &z * &s_k;
        let qs = &q * &s_k;
        let worst = (0..k)
            .map(|j| (zs.column(j) - qs.column(j) * theta[j]).norm())
            .fold(0.0f64, f64::max);
        if worst <= opts.tol * top {
            let spec = Spectrum::from_raw(theta)?;
            return Ok(Some((spec.values()[..k].to_vec(), iter)));
        }
        q = z.qr().q();
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resample::StreamKey;
    use approx::assert_relative_eq;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn covariance_single_row() {
        let c = sample_covariance(&m(1, 2, &[1.0, 2.0]), false).unwrap();
        assert_eq!(c.as_matrix(), &m(2, 2, &[1.0, 2.0, 2.0, 4.0]));
    }

    #[test]
    fn covariance_uncentered_and_centered() {
        let c = sample_covariance(&m(2, 1, &[1.0, -1.0]), false).unwrap();
        assert_eq!(c.as_matrix()[(0, 0)], 1.0);
        let c = sample_covariance(&m(2, 1, &[1.0, 3.0]), true).unwrap();
        assert_eq!(c.as_matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn covariance_rejects_empty() {
        assert!(matches!(
            sample_covariance(&DMatrix::zeros(0, 3), false),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn top_eigenvalues_small_cases() {
        let c = CovarianceMatrix::new(m(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let s = top_eigenvalues(&c, 2).unwrap();
        assert_relative_eq!(s.values()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.values()[1], 1.0, epsilon = 1e-12);

        let c = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 4.0, 3.0]))).unwrap();
        assert_eq!(top_eigenvalues(&c, 2).unwrap().values(), &[5.0, 4.0]);

        let s = top_eigenvalues_of_data(&DMatrix::identity(2, 2), 2, EigenRoute::Auto).unwrap();
        assert_relative_eq!(s.values()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.values()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn top_eigenvalues_argument_errors() {
        let c = CovarianceMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(top_eigenvalues(&c, 3), Err(Error::Argument { name: "k", .. })));
        assert!(matches!(
            CovarianceMatrix::new(m(2, 2, &[1.0, 0.5, 0.0, 1.0])),
            Err(Error::Argument { .. })
        ));
    }

    #[test]
    fn large_negative_eigenvalue_is_an_error() {
        let c = CovarianceMatrix::new(m(2, 2, &[1.0, 0.0, 0.0, -0.5])).unwrap();
        assert!(matches!(c.spectrum(), Err(Error::NotPsd { .. })));
        let c = CovarianceMatrix::new(m(2, 2, &[1.0, 0.0, 0.0, -1e-13])).unwrap();
        assert_eq!(c.spectrum().unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn effective_rank_examples() {
        let s = Spectrum::new(vec![1.0; 4]).unwrap();
        assert_eq!(effective_rank(&s).unwrap(), 4.0);
        let s = Spectrum::new(vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(effective_rank(&s).unwrap(), 1.75);
        // direct summation: 1 + 2^-1.3 + 3^-1.3
        let oracle: f64 = (1..=3).map(|j| (j as f64).powf(-1.3)).sum();
        let s = Spectrum::new((1..=3).map(|j| (j as f64).powf(-1.3)).collect()).unwrap();
        let r = effective_rank(&s).unwrap();
        assert_relative_eq!(r, oracle, epsilon = 1e-12);
        assert!((r - 1.6459).abs() < 1e-3);
        assert!(matches!(
            effective_rank(&Spectrum::new(vec![0.0, 0.0]).unwrap()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn haar_is_orthogonal_and_sign_fixed() {
        for p in [1, 2, 5, 40] {
            let q = haar_orthogonal(p, &mut StreamKey::new(p as u64).stream()).unwrap();
            assert!(q.orthogonality_error() <= 1e-10);
        }
        let mut signs = [0usize; 2];
        for s in 0..200 {
            let q = haar_orthogonal(1, &mut StreamKey::new(s).stream()).unwrap();
            let v = q.as_matrix()[(0, 0)];
            assert!(v == 1.0 || v == -1.0);
            signs[(v > 0.0) as usize] += 1;
        }
        assert!(signs[0] > 60 && signs[1] > 60, "{signs:?}");
    }

    #[test]
    fn haar_first_entry_is_centered() {
        let draws = 20_000;
        let mut sum = 0.0;
        for s in 0..draws {
            let q = haar_orthogonal(3, &mut StreamKey::new(11).with("haar", s).stream()).unwrap();
            sum += q.as_matrix()[(0, 0)];
        }
        assert!((sum / draws as f64).abs() < 0.02);
    }

    #[test]
    fn wielandt_block_diagonal_is_tight() {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 0)] = 5.0;
        a[(1, 1)] = 4.0;
        a[(2, 2)] = 2.0;
        a[(3, 3)] = 1.0;
        let r = wielandt_check(&CovarianceMatrix::new(a).unwrap(), 2).unwrap();
        match r {
            WielandtReport::Applicable { pairs, holds } => {
                assert!(holds);
                for (gap, bound) in pairs {
                    assert_eq!(gap, 0.0);
                    assert_eq!(bound, 0.0);
                }
            }
            WielandtReport::NotApplicable => panic!("should apply"),
        }
    }

    #[test]
    fn wielandt_two_by_two() {
        let a = CovarianceMatrix::new(m(2, 2, &[2.0, 0.1, 0.1, 1.0])).unwrap();
        // exact: λ₁ = 1.5 + sqrt(0.25 + 0.01)
        let exact = 1.5 + (0.26f64).sqrt();
        match wielandt_check(&a, 1).unwrap() {
            WielandtReport::Applicable { pairs, holds } => {
                assert!(holds);
                assert_relative_eq!(pairs[0].0, exact - 2.0, epsilon = 1e-12);
                assert_relative_eq!(pairs[0].1, 0.01, epsilon = 1e-12);
                assert!(pairs[0].0 > 0.0 && pairs[0].0 <= 0.01);
            }
            WielandtReport::NotApplicable => panic!("should apply"),
        }
    }

    #[test]
    fn wielandt_not_applicable_without_gap() {
        let a = CovarianceMatrix::new(m(2, 2, &[1.0, 0.1, 0.1, 2.0])).unwrap();
        assert_eq!(wielandt_check(&a, 1).unwrap(), WielandtReport::NotApplicable);
    }

    #[test]
    fn factor_routes_agree() {
        let mut s = StreamKey::new(3).stream();
        for &(mrows, p) in &[(30usize, 12usize), (8, 20), (40, 40)] {
            let y = DMatrix::from_fn(mrows, p, |_, _| s.sample::<f64, _>(StandardNormal));
            let cov = CovarianceMatrix::from_upper(y.tr_mul(&y));
            let (_, warm) = top_eigenpairs(&cov, 6).unwrap();
            let reference = cov.spectrum().unwrap();
            for route in [FactorRoute::Covariance, FactorRoute::Gram, FactorRoute::Subspace] {
                let perturbed = &warm + DMatrix::from_fn(p, 6, |_, _| 0.05 * s.sample::<f64, _>(StandardNormal));
                let warm_q = perturbed.qr().q();
                let (vals, _) = factor_top_eigenvalues(
                    &y,
                    3,
                    Some(&warm_q),
                    route,
                    SubspaceOptions { tol: 1e-10, max_iter: 2000 },
                )
                .unwrap();
                for (v, r) in vals.iter().zip(reference.values()) {
                    assert_relative_eq!(*v, *r, max_relative = 1e-8);
                }
            }
        }
    }
}
