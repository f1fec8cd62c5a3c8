//! Weighted least-squares fit of interference fringes.
//!
//! Subtracted coincidence curves follow `B + A cos^2(l (phi - phi0))`.
//! The double-angle identity turns this into a model linear in three
//! parameters, `y = C0 + P cos(2 l phi) + Q sin(2 l phi)` with
//! `C0 = B + A/2`, `P = (A/2) cos(2 l phi0)` and `Q = (A/2) sin(2 l phi0)`,
//! so the fit is a 3x3 normal-equation solve with no starting guess. The
//! reported fringe parameters and their covariance follow by the delta
//! method.

use anyhow::{bail, Context};
use nalgebra::{Matrix3, SMatrix, Vector3};
use serde::Serialize;

/// Fringe parameters of `baseline + amplitude * cos^2(l (phi - offset))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Peak-to-valley height `A` of the cosine-squared fringe.
    pub amplitude: f64,
    /// Offset `B` under the fringe.
    pub baseline: f64,
    /// `(max - min) / (max + min)` of the fitted curve, `A / (A + 2B)`.
    pub visibility: f64,
    /// Mismatch angle of the fringe maximum.
    pub phase_offset_rad: f64,
    /// Weighted residual chi-square per degree of freedom.
    pub reduced_chi_squared: f64,
    /// Covariance of `(amplitude, baseline, visibility, phase_offset_rad)`.
    pub covariance: [[f64; 4]; 4],
}

impl FitResult {
    /// Fitted value at a fringe maximum, `baseline + amplitude`.
    pub fn peak(&self) -> f64 {
        self.baseline + self.amplitude
    }

    pub fn phase_offset_deg(&self) -> f64 {
        self.phase_offset_rad.to_degrees()
    }
}

/// Fits `baseline + amplitude * cos^2(l (phi - offset))` to measured points
/// with known per-point standard errors.
pub fn fit_cosine(l: i32, phi_rad: &[f64], values: &[f64], sigmas: &[f64]) -> anyhow::Result<FitResult> {
    if l == 0 {
        bail!("fit_cosine: the OAM index must be nonzero");
    }
    let n = phi_rad.len();
    if values.len() != n || sigmas.len() != n {
        bail!(
            "fit_cosine: mismatched input lengths ({n} angles, {} values, {} errors)",
            values.len(),
            sigmas.len()
        );
    }
    if n < 4 {
        bail!("fit_cosine: need at least 4 points, got {n}");
    }
    for (&y, &s) in values.iter().zip(sigmas) {
        if !y.is_finite() || !s.is_finite() || s <= 0.0 {
            bail!("fit_cosine: values must be finite and errors positive (got y={y}, sigma={s})");
        }
    }

    let harmonic = 2.0 * f64::from(l);
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for ((&phi, &y), &sigma) in phi_rad.iter().zip(values).zip(sigmas) {
        let row = Vector3::new(1.0, (harmonic * phi).cos(), (harmonic * phi).sin());
        let weight = 1.0 / (sigma * sigma);
        normal += weight * row * row.transpose();
        rhs += weight * y * row;
    }
    let linear_cov = normal
        .try_inverse()
        .context("fit_cosine: degenerate angle grid (normal matrix is singular)")?;
    // Floating-point LU can "invert" a rank-deficient matrix; verify the
    // product really is the identity before trusting the solution.
    if (normal * linear_cov - Matrix3::identity()).norm() > 1e-6 {
        bail!("fit_cosine: degenerate angle grid (normal matrix is numerically singular)");
    }
    let params = linear_cov * rhs;
    let (c0, p, q) = (params[0], params[1], params[2]);
    let c1 = p.hypot(q);
    if c1 <= f64::EPSILON * (c0.abs() + 1.0) {
        bail!("fit_cosine: no discernible fringe modulation in the data");
    }

    let mut chi_squared = 0.0;
    for ((&phi, &y), &sigma) in phi_rad.iter().zip(values).zip(sigmas) {
        let model = c0 + p * (harmonic * phi).cos() + q * (harmonic * phi).sin();
        let pull = (y - model) / sigma;
        chi_squared += pull * pull;
    }

    // Delta method: rows are the gradients of (A, B, V, phi0) with respect
    // to (C0, P, Q), where A = 2 C1, B = C0 - C1, V = C1 / C0 and
    // phi0 = atan2(Q, P) / (2l) with C1 = hypot(P, Q).
    let jacobian = SMatrix::<f64, 4, 3>::from_rows(&[
        [0.0, 2.0 * p / c1, 2.0 * q / c1].into(),
        [1.0, -p / c1, -q / c1].into(),
        [-c1 / (c0 * c0), p / (c1 * c0), q / (c1 * c0)].into(),
        [0.0, -q / (c1 * c1 * harmonic), p / (c1 * c1 * harmonic)].into(),
    ]);
    let fringe_cov = jacobian * linear_cov * jacobian.transpose();
    let mut covariance = [[0.0; 4]; 4];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = fringe_cov[(i, j)];
        }
    }

    Ok(FitResult {
        amplitude: 2.0 * c1,
        baseline: c0 - c1,
        visibility: c1 / c0,
        phase_offset_rad: q.atan2(p) / harmonic,
        reduced_chi_squared: chi_squared / (n - 3) as f64,
        covariance,
    })
}
