//! Population covariance profiles and the data generators used in the
//! simulation studies.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg::{haar_orthogonal, OrthogonalBasis, Spectrum};

/// How eigenvalues beyond an explicit leading block decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailRule {
    /// `λ_j = j^{-γ}` with j counted from 1 over the whole spectrum.
    Polynomial(f64),
}

/// Shape of the population spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecayProfile {
    /// `λ_j = j^{-γ}`, γ > 0.
    Polynomial(f64),
    /// `λ_j = δ^j`, 0 < δ < 1.
    Exponential(f64),
    /// Explicit leading eigenvalues followed by a tail rule.
    CustomLeading { leading: Vec<f64>, tail: TailRule },
}

impl DecayProfile {
    /// `(1+g, 1, 1−g)` followed by `j^{-1}` for j ≥ 4. g = 0 ties the top
    /// three eigenvalues.
    pub fn gap(g: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&g) {
            return Err(arg("g", format!("gap parameter {g} must lie in [0, 1)")));
        }
        Ok(Self::CustomLeading {
            leading: vec![1.0 + g, 1.0, 1.0 - g],
            tail: TailRule::Polynomial(1.0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Polynomial(gamma) if !(gamma.is_finite() && *gamma > 0.0) => Err(Error::Config {
                field: "gamma".into(),
                reason: format!("polynomial decay needs gamma > 0, got {gamma}"),
            }),
            Self::Exponential(delta) if !(*delta > 0.0 && *delta < 1.0) => Err(Error::Config {
                field: "delta".into(),
                reason: format!("exponential decay needs 0 < delta < 1, got {delta}"),
            }),
            Self::CustomLeading { leading, tail } => {
                if leading.is_empty() || leading.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::Config {
                        field: "leading".into(),
                        reason: "leading eigenvalues must be positive and finite".into(),
                    });
                }
                let TailRule::Polynomial(gamma) = tail;
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return Err(Error::Config {
                        field: "tail".into(),
                        reason: format!("tail exponent must be positive, got {gamma}"),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether the leading eigenvalues include a tie (violates the
    /// eigengap condition).
    pub fn has_tied_leading(&self) -> bool {
        match self {
            Self::CustomLeading { leading, .. } => leading.windows(2).any(|w| w[0] <= w[1]),
            _ => false,
        }
    }

    /// The p eigenvalues, descending.
    pub fn eigenvalues(&self, p: usize) -> Result<Spectrum> {
        self.validate()?;
        if p == 0 {
            return Err(arg("p", "dimension must be at least 1"));
        }
        let values: Vec<f64> = match self {
            Self::Polynomial(gamma) => (1..=p).map(|j| (j as f64).powf(-gamma)).collect(),
            Self::Exponential(delta) => (1..=p).map(|j| delta.powi(j as i32)).collect(),
            Self::CustomLeading { leading, tail } => {
                if p < leading.len() + 2 {
                    return Err(arg(
                        "p",
                        format!(
                            "custom leading profile with {} values needs p >= {}",
                            leading.len(),
                            leading.len() + 2
                        ),
                    ));
                }
                let TailRule::Polynomial(gamma) = tail;
                leading
                    .iter()
                    .copied()
                    .chain((leading.len() + 1..=p).map(|j| (j as f64).powf(-gamma)))
                    .collect()
            }
        };
        Spectrum::new(values).map_err(|_| Error::Config {
            field: "leading".into(),
            reason: "profile does not produce a non-increasing spectrum".into(),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Polynomial(_) => "polynomial",
            Self::Exponential(_) => "exponential",
            Self::CustomLeading { .. } => "custom",
        }
    }

    /// γ, δ or the gap (leading[0] − 1) for display.
    pub fn parameter(&self) -> f64 {
        match self {
            Self::Polynomial(v) | Self::Exponential(v) => *v,
            Self::CustomLeading { leading, .. } => leading[0] - 1.0,
        }
    }
}

impl fmt::Display for DecayProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), crate::report::fmt_sig6(self.parameter()))
    }
}

/// Unit-variance, mean-zero source for the independent-entries generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KurtosisSource {
    /// ±1 with equal probability; fourth moment 1.
    TwoPoint,
    /// Uniform on [−√3, √3]; fourth moment 9/5.
    ScaledUniform,
}

impl KurtosisSource {
    pub fn fourth_moment(self) -> f64 {
        match self {
            Self::TwoPoint => 1.0,
            Self::ScaledUniform => 1.8,
        }
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Self::TwoPoint => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::ScaledUniform => {
                let s = 3f64.sqrt();
                rng.random_range(-s..s)
            }
        }
    }
}

/// Law of the standardized vector Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorFamily {
    /// i.i.d. N(0, 1) entries.
    GaussianIid,
    /// `Z = ξV`, V uniform on the sphere, ξ² exponential with mean p.
    EllipticalExp,
    /// i.i.d. entries from a fixed unit-variance source.
    IidWithKurtosis(KurtosisSource),
}

impl GeneratorFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GaussianIid => "gaussian",
            Self::EllipticalExp => "elliptical",
            Self::IidWithKurtosis(KurtosisSource::TwoPoint) => "iid-twopoint",
            Self::IidWithKurtosis(KurtosisSource::ScaledUniform) => "iid-uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "ii" | "model-ii" => Ok(Self::GaussianIid),
            "elliptical" | "i" | "model-i" => Ok(Self::EllipticalExp),
            "iid-twopoint" => Ok(Self::IidWithKurtosis(KurtosisSource::TwoPoint)),
            "iid-uniform" => Ok(Self::IidWithKurtosis(KurtosisSource::ScaledUniform)),
            other => Err(Error::Config {
                field: "model".into(),
                reason: format!(
                    "unknown generator `{other}` (gaussian, elliptical, iid-twopoint, iid-uniform)"
                ),
            }),
        }
    }
}

/// One draw of Z in R^p.
pub fn generate_z<R: Rng + ?Sized>(generator: GeneratorFamily, p: usize, rng: &mut R) -> Vec<f64> {
    let mut z = vec![0.0; p];
    fill_z(generator, &mut z, rng);
    z
}

fn fill_z<R: Rng + ?Sized>(generator: GeneratorFamily, out: &mut [f64], rng: &mut R) {
    match generator {
        GeneratorFamily::GaussianIid => {
            for v in out.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
        }
        GeneratorFamily::EllipticalExp => {
            let (xi, _) = elliptical_draw(out, rng);
            for v in out.iter_mut() {
                *v *= xi;
            }
        }
        GeneratorFamily::IidWithKurtosis(src) => {
            for v in out.iter_mut() {
                *v = src.draw(rng);
            }
        }
    }
}

/// Writes a uniform unit vector into `v` and returns `(ξ, ξ²)` with ξ² ~ Exp(mean p).
fn elliptical_draw<R: Rng + ?Sized>(v: &mut [f64], rng: &mut R) -> (f64, f64) {
    let p = v.len();
    loop {
        let mut norm2 = 0.0;
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 0.0 {
            let inv = norm2.sqrt().recip();
            for x in v.iter_mut() {
                *x *= inv;
            }
            break;
        }
    }
    let xi2 = Exp::new(1.0 / p as f64)
        .expect("positive rate")
        .sample(rng);
    (xi2.sqrt(), xi2)
}

/// Draws a unit vector and its radial variable separately; used by tests
/// that check the sphere and radial laws directly.
pub fn elliptical_parts<R: Rng + ?Sized>(p: usize, rng: &mut R) -> (Vec<f64>, f64) {
    let mut v = vec![0.0; p];
    let (_, xi2) = elliptical_draw(&mut v, rng);
    (v, xi2)
}

/// Σ = U Λ Uᵀ together with the law of Z.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationModel {
    pub spectrum: Spectrum,
    pub basis: OrthogonalBasis,
    pub generator: GeneratorFamily,
}

impl PopulationModel {
    pub fn new(spectrum: Spectrum, basis: OrthogonalBasis, generator: GeneratorFamily) -> Result<Self> {
        if spectrum.len() != basis.dim() {
            return Err(Error::Dimension(format!(
                "spectrum has {} values but basis is {}x{}",
                spectrum.len(),
                basis.dim(),
                basis.dim()
            )));
        }
        Ok(Self {
            spectrum,
            basis,
            generator,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    /// Σ as a dense matrix.
    pub fn covariance(&self) -> DMatrix<f64> {
        let u = self.basis.as_matrix();
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.spectrum.values()[j];
        }
        scaled * u.transpose()
    }

    /// `Λ^{1/2} Uᵀ`, so that a row z gives the observation `z Λ^{1/2} Uᵀ`.
    fn root_transpose(&self) -> DMatrix<f64> {
        let mut m = self.basis.as_matrix().transpose();
        for (j, mut row) in m.row_iter_mut().enumerate() {
            row *= self.spectrum.values()[j].sqrt();
        }
        m
    }
}

/// Eigenvalues from `profile`, Haar eigenvectors from `rng`.
pub fn build_population<R: Rng + ?Sized>(
    profile: &DecayProfile,
    p: usize,
    generator: GeneratorFamily,
    rng: &mut R,
) -> Result<PopulationModel> {
    let spectrum = profile.eigenvalues(p)?;
    let basis = haar_orthogonal(p, rng)?;
    PopulationModel::new(spectrum, basis, generator)
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Simulated { generator: GeneratorFamily },
    File { path: String },
    InMemory,
}

/// n x p observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub data: DMatrix<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(data: DMatrix<f64>) -> Self {
        Self {
            data,
            provenance: Provenance::InMemory,
        }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }
}

/// n x p matrix whose rows are independent draws of Z.
pub fn sample_z<R: Rng + ?Sized>(generator: GeneratorFamily, n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(n, p);
    let mut row = vec![0.0; p];
    for i in 0..n {
        fill_z(generator, &mut row, rng);
        for (j, v) in row.iter().enumerate() {
            z[(i, j)] = *v;
        }
    }
    z
}

/// n rows `X_i = U Λ^{1/2} Z_i`.
pub fn sample_dataset<R: Rng + ?Sized>(model: &PopulationModel, n: usize, rng: &mut R) -> Dataset {
    sample_with_z(model, n, rng).0
}

/// As [`sample_dataset`], also returning the n x p matrix of Z draws.
pub fn sample_with_z<R: Rng + ?Sized>(
    model: &PopulationModel,
    n: usize,
    rng: &mut R,
) -> (Dataset, DMatrix<f64>) {
    let z = sample_z(model.generator, n, model.dim(), rng);
    let data = &z * model.root_transpose();
    (
        Dataset {
            data,
            provenance: Provenance::Simulated {
                generator: model.generator,
            },
        },
        z,
    )
}
