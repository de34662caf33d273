//! The k×k fourth-moment matrix Γ with `Γ_jj' = E[(⟨u_j,Z⟩²−1)(⟨u_j',Z⟩²−1)]`:
//! closed forms for the built-in generators and the Monte Carlo estimate Γ̂.
//!
//! Γ̂ needs the true basis U and the raw Z draws, so it is only available for
//! simulated data.

use nalgebra::DMatrix;

use crate::error::{arg, Error, Result};
use crate::linalg::{haar_orthogonal, OrthogonalBasis};
use crate::models::{sample_z, GeneratorFamily};
use crate::resample::StreamKey;

#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    entries: DMatrix<f64>,
}

impl GammaMatrix {
    /// Checks symmetry and positive semi-definiteness up to `−1e−8·λ₁`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "Γ must be a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        if (&entries - entries.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Degenerate("Γ is not symmetric".into()));
        }
        let eig = entries.clone().symmetric_eigenvalues();
        let (min, max) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if min < -1e-8 * max.abs().max(scale) {
            return Err(Error::NotPsd { min, max });
        }
        Ok(Self { entries })
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Eigenvalues in non-increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn max_abs_diff(&self, other: &GammaMatrix) -> Result<f64> {
        if self.k() != other.k() {
            return Err(Error::Dimension(format!("Γ sizes differ: {} vs {}", self.k(), other.k())));
        }
        Ok((&self.entries - &other.entries).amax())
    }
}

fn check_k(k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(arg("k", format!("k = {k} must lie in 1..={p}")));
    }
    Ok(())
}

/// Independent coordinates with kurtoses κ_l: `Γ = 2I + Hᵀ(D − 3I)H`
/// where `H[l, j] = u_{j,l}²` and `D = diag(κ)`.
pub fn analytic_gamma_iid(kurtoses: &[f64], u: &OrthogonalBasis, k: usize) -> Result<GammaMatrix> {
    let p = u.dim();
    if kurtoses.len() != p {
        return Err(Error::Dimension(format!(
            "{} kurtoses for a basis of dimension {p}",
            kurtoses.len()
        )));
    }
    check_k(k, p)?;
    if let Some(l) = kurtoses.iter().position(|&x| x.is_nan() || x < 1.0) {
        return Err(arg("kurtoses", format!("kurtosis {} at index {l} is below 1", kurtoses[l])));
    }
    let um = u.as_matrix();
    let h = DMatrix::from_fn(p, k, |l, j| um[(l, j)].powi(2));
    let mut weighted = h.clone();
    for (l, &kappa) in kurtoses.iter().enumerate() {
        weighted.row_mut(l).scale_mut(kappa - 3.0);
    }
    let entries = DMatrix::identity(k, k) * 2.0 + h.transpose() * weighted;
    GammaMatrix::new(entries)
}

/// Elliptical Z = ξV: `Γ = a·I + b·11ᵀ` with `a = 2E[ξ⁴]/(p(p+2))` and
/// `b = E[ξ⁴]/(p(p+2)) − 1`.
pub fn analytic_gamma_elliptical(p: usize, xi4: f64, k: usize) -> Result<GammaMatrix> {
    if p < 2 {
        return Err(arg("p", format!("p = {p}; the elliptical form needs p >= 2")));
    }
    check_k(k, p)?;
    let pf = p as f64;
    if xi4.is_nan() || xi4 < pf * pf * (1.0 - 1e-12) {
        return Err(arg("xi4", format!("E[xi^4] = {xi4} is below the floor p^2 = {}", pf * pf)));
    }
    let c = xi4 / (pf * (pf + 2.0));
    let (a, b) = (2.0 * c, c - 1.0);
    GammaMatrix::new(DMatrix::from_fn(k, k, |i, j| if i == j { a + b } else { b }))
}

/// Closed-form Γ for a built-in generator.
pub fn analytic_gamma(generator: GeneratorFamily, u: &OrthogonalBasis, k: usize) -> Result<GammaMatrix> {
    let p = u.dim();
    match generator {
        GeneratorFamily::GaussianIid => analytic_gamma_iid(&vec![3.0; p], u, k),
        GeneratorFamily::EllipticalExp => {
            let pf = p as f64;
            analytic_gamma_elliptical(p, 2.0 * pf * pf, k)
        }
        GeneratorFamily::IidWithKurtosis(src) => analytic_gamma_iid(&vec![src.fourth_moment(); p], u, k),
    }
}

/// `Γ̂ = (1/n) Σ (W_i − W̄)(W_i − W̄)ᵀ` with `W_ij = ⟨u_j, Z_i⟩² − 1`.
pub fn empirical_gamma(z_draws: &DMatrix<f64>, u: &OrthogonalBasis, k: usize) -> Result<GammaMatrix> {
    let (n, p) = z_draws.shape();
    if p != u.dim() {
        return Err(Error::Dimension(format!("Z has {p} columns, basis has dimension {}", u.dim())));
    }
    check_k(k, p)?;
    if n < 2 {
        return Err(arg("n", format!("n = {n}; need at least two draws")));
    }
    let w = centered_w(z_draws, u, k);
    let mut entries = w.transpose() * &w / n as f64;
    // exact symmetry for the validator
    entries = (&entries + entries.transpose()) * 0.5;
    GammaMatrix::new(entries)
}

/// Columns `W_·j − W̄_j`.
fn centered_w(z_draws: &DMatrix<f64>, u: &OrthogonalBasis, k: usize) -> DMatrix<f64> {
    let mut w = z_draws * u.as_matrix().columns(0, k);
    w.apply(|x| *x = *x * *x - 1.0);
    for j in 0..k {
        let mean = w.column(j).mean();
        w.column_mut(j).add_scalar_mut(-mean);
    }
    w
}

fn product_se(w: &DMatrix<f64>, a: usize, b: usize, mean: f64) -> f64 {
    let n = w.nrows() as f64;
    let ss: f64 = w.column(a).iter().zip(w.column(b).iter()).map(|(x, y)| (x * y - mean).powi(2)).sum();
    (ss / (n - 1.0) / n).sqrt()
}

/// One Γ entry compared across the closed form and the Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEntry {
    pub row: usize,
    pub col: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub abs_error: f64,
    /// Monte Carlo standard error of the empirical entry.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaCheck {
    pub generator: GeneratorFamily,
    pub p: usize,
    pub n_mc: usize,
    pub analytic: GammaMatrix,
    pub empirical: GammaMatrix,
    pub entries: Vec<GammaEntry>,
    pub max_abs_error: f64,
}

/// Draws `n_mc` Z vectors under a Haar-random basis and compares Γ̂ with the
/// closed form, entry by entry (upper triangle, row-major).
pub fn gamma_check(generator: GeneratorFamily, p: usize, k: usize, n_mc: usize, key: &StreamKey) -> Result<GammaCheck> {
    if p == 0 {
        return Err(arg("p", "p must be positive"));
    }
    check_k(k, p)?;
    let u = haar_orthogonal(p, &mut key.with("basis", p as u64).stream())?;
    let z = sample_z(generator, n_mc, p, &mut key.with("gamma-z", 0).stream());
    let analytic = analytic_gamma(generator, &u, k)?;
    let empirical = empirical_gamma(&z, &u, k)?;
    let w = centered_w(&z, &u, k);
    let mut entries = Vec::with_capacity(k * (k + 1) / 2);
    for row in 0..k {
        for col in row..k {
            let a = analytic.entries()[(row, col)];
            let e = empirical.entries()[(row, col)];
            entries.push(GammaEntry {
                row: row + 1,
                col: col + 1,
                analytic: a,
                empirical: e,
                abs_error: (a - e).abs(),
                mc_se: product_se(&w, row, col, e),
            });
        }
    }
    let max_abs_error = analytic.max_abs_diff(&empirical)?;
    Ok(GammaCheck {
        generator,
        p,
        n_mc,
        analytic,
        empirical,
        entries,
        max_abs_error,
    })
}
