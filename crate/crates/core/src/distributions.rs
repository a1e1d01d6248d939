//! The population knowledge distribution: a CDF `G` on `[0, 1]` with a
//! continuous, strictly positive density `g`.
//!
//! Two representations are supported: the uniform distribution and a density
//! that is piecewise linear between knots. Both keep the CDF and every mass
//! integral in closed form, so no quadrature is involved here.

use thiserror::Error;

/// Positivity floor for the density. The matching ODE divides by `g(m(z))`,
/// so a density this close to zero is a modelling error, not a numerical one.
pub const MIN_DENSITY: f64 = 1e-6;

/// Raw knot masses outside this band are rejected instead of rescaled.
const MASS_NORMALIZATION_BAND: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("density {density} at z = {z} lies below the positivity floor {MIN_DENSITY}")]
    NonPositiveDensity { z: f64, density: f64 },
    #[error("knots must span [0, 1] exactly (got [{first}, {last}])")]
    BadSupport { first: f64, last: f64 },
    #[error("knots must be strictly increasing in z and need at least two entries")]
    UnsortedKnots,
    #[error("total mass {mass} is too far from one to be a plausible density")]
    MassOutOfRange { mass: f64 },
    #[error("argument {z} lies outside the support [0, 1]")]
    OutOfSupport { z: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Uniform,
    PiecewiseLinearDensity,
}

/// Knowledge distribution with density linear between knots, normalized to
/// unit mass at construction. Immutable afterwards; safe to share across
/// threads and evaluate concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeDistribution {
    kind: DistKind,
    zs: Vec<f64>,
    densities: Vec<f64>,
    cdf: Vec<f64>,
}

impl KnowledgeDistribution {
    /// The uniform distribution: `g ≡ 1`, `G(z) = z`.
    pub fn uniform() -> Self {
        Self {
            kind: DistKind::Uniform,
            zs: vec![0.0, 1.0],
            densities: vec![1.0, 1.0],
            cdf: vec![0.0, 1.0],
        }
    }

    /// Builds a distribution from `(z, density)` knots. The density is linear
    /// between knots and rescaled so the total mass is one; masses outside
    /// `[0.5, 2]` are rejected as likely user error.
    pub fn from_density_knots(knots: &[(f64, f64)]) -> Result<Self, DistError> {
        if knots.len() < 2 || knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(DistError::UnsortedKnots);
        }
        let first = knots[0].0;
        let last = knots[knots.len() - 1].0;
        if first != 0.0 || last != 1.0 {
            return Err(DistError::BadSupport { first, last });
        }
        for &(z, density) in knots {
            if !(density.is_finite() && density >= MIN_DENSITY) {
                return Err(DistError::NonPositiveDensity { z, density });
            }
        }
        let mass: f64 = knots
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
            .sum();
        let (lo, hi) = MASS_NORMALIZATION_BAND;
        if !(mass >= lo && mass <= hi) {
            return Err(DistError::MassOutOfRange { mass });
        }
        let zs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let densities: Vec<f64> = knots.iter().map(|k| k.1 / mass).collect();
        for (&z, &density) in zs.iter().zip(&densities) {
            if density < MIN_DENSITY {
                return Err(DistError::NonPositiveDensity { z, density });
            }
        }
        let mut cdf = Vec::with_capacity(zs.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for (z, d) in zs.windows(2).zip(densities.windows(2)) {
            acc += (z[1] - z[0]) * 0.5 * (d[0] + d[1]);
            cdf.push(acc);
        }
        Ok(Self {
            kind: DistKind::PiecewiseLinearDensity,
            zs,
            densities,
            cdf,
        })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// The normalized `(z, density)` knots.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.zs.iter().copied().zip(self.densities.iter().copied())
    }

    /// Density `g(z)`.
    pub fn pdf_at(&self, z: f64) -> Result<f64, DistError> {
        self.check_support(z)?;
        Ok(self.density_clamped(z))
    }

    /// Cumulative mass `G(z)`, exact per the piecewise closed form.
    pub fn cdf_at(&self, z: f64) -> Result<f64, DistError> {
        self.check_support(z)?;
        Ok(self.cdf_clamped(z))
    }

    /// `G(b) - G(a)` for `0 <= a <= b <= 1`.
    pub fn mass_between(&self, a: f64, b: f64) -> Result<f64, DistError> {
        self.check_support(a)?;
        self.check_support(b)?;
        assert!(a <= b, "mass_between requires a <= b");
        Ok(self.cdf_clamped(b) - self.cdf_clamped(a))
    }

    fn check_support(&self, z: f64) -> Result<(), DistError> {
        if !(0.0..=1.0).contains(&z) {
            return Err(DistError::OutOfSupport { z });
        }
        Ok(())
    }

    /// Density with the query clamped into the support. RK4 stages may step a
    /// rounding error past an endpoint; the clamp keeps them well defined.
    pub(crate) fn density_clamped(&self, z: f64) -> f64 {
        if self.kind == DistKind::Uniform {
            return 1.0;
        }
        let z = z.clamp(0.0, 1.0);
        let idx = self.segment_index(z);
        let (z0, z1) = (self.zs[idx], self.zs[idx + 1]);
        let (d0, d1) = (self.densities[idx], self.densities[idx + 1]);
        d0 + (z - z0) * (d1 - d0) / (z1 - z0)
    }

    pub(crate) fn cdf_clamped(&self, z: f64) -> f64 {
        if self.kind == DistKind::Uniform {
            return z.clamp(0.0, 1.0);
        }
        let z = z.clamp(0.0, 1.0);
        let idx = self.segment_index(z);
        let (z0, z1) = (self.zs[idx], self.zs[idx + 1]);
        let (d0, d1) = (self.densities[idx], self.densities[idx + 1]);
        let t = z - z0;
        // ∫ of the linear density: quadratic in the offset
        self.cdf[idx] + d0 * t + 0.5 * (d1 - d0) * t * t / (z1 - z0)
    }

    fn segment_index(&self, z: f64) -> usize {
        self.zs
            .partition_point(|&v| v <= z)
            .clamp(1, self.zs.len() - 1)
            - 1
    }
}
