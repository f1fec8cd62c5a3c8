//! Single-mode coherent-state statistics.
//!
//! A coherent state `|alpha>` with `alpha = |alpha| e^{i theta}` carries a
//! Poisson photon-number distribution with mean `mu = |alpha|^2` and an
//! oscillating mean field proportional to `2|alpha|`. The helpers here supply
//! those numbers in a numerically careful way (log-space evaluation for large
//! `n`) together with the truncation level needed by finite-dimensional
//! density-matrix work.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Factorials 0!..=20! are exactly representable in f64 well within one ulp;
/// beyond that every routine switches to log-space.
const MAX_DIRECT_FACTORIAL: u64 = 20;

fn factorial(n: u64) -> f64 {
    debug_assert!(n <= MAX_DIRECT_FACTORIAL);
    (1..=n).map(|k| k as f64).product()
}

/// Natural log of `n!`, exact table below 21, `ln_gamma` above.
pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n <= MAX_DIRECT_FACTORIAL {
        factorial(n).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Binomial coefficient `C(n, k)` as a float, exact for the photon numbers
/// handled here (the multiplicative form keeps every intermediate an integer).
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc = acc * (n - k + i) as f64 / i as f64;
    }
    acc.round()
}

/// Poisson probability `P(n) = e^{-mu} mu^n / n!` of finding `n` photons in a
/// weak coherent pulse of mean photon number `mu`.
///
/// Evaluated directly for small `n` and in log-space for `n > 20` so that
/// deep-tail queries stay finite instead of overflowing `n!`.
pub fn poisson_pmf(mu: f64, n: u64) -> Result<f64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!(
            "poisson_pmf: mean photon number must be finite and >= 0, got {mu}"
        )));
    }
    if mu == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if n <= MAX_DIRECT_FACTORIAL {
        Ok((-mu).exp() * mu.powi(n as i32) / factorial(n))
    } else {
        Ok((-mu + n as f64 * mu.ln() - ln_factorial(n)).exp())
    }
}

/// Standard deviation `sqrt(mu)` of the Poisson photon-number distribution.
pub fn number_stddev(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!(
            "number_stddev: mean photon number must be finite and >= 0, got {mu}"
        )));
    }
    Ok(mu.sqrt())
}

/// Ratio of the photon-number spread to the mean, `1/sqrt(mu)`.
///
/// This is the figure of merit separating the quantum regime (`mu << 1`,
/// ratio >> 1) from the quasi-classical regime (`mu >> 1`, ratio << 1):
/// `mu = 1e-2` gives 10 and `mu = 1e-4` gives 100.
pub fn quantum_classical_ratio(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::domain(format!(
            "quantum_classical_ratio: mean photon number must be finite and > 0, got {mu}"
        )));
    }
    Ok(1.0 / mu.sqrt())
}

/// Smallest `n_max` such that the Poisson weights `P(0)..P(n_max)` carry at
/// least `1 - epsilon` of the distribution.
pub fn truncation_level(mu: f64, epsilon: f64) -> Result<u64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!(
            "truncation_level: mean photon number must be finite and >= 0, got {mu}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::domain(format!(
            "truncation_level: epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let target = 1.0 - epsilon;
    let mut term = (-mu).exp();
    let mut cumulative = term;
    let mut n = 0u64;
    while cumulative < target {
        n += 1;
        term *= mu / n as f64;
        cumulative += term;
        if n > 100_000 {
            return Err(Error::domain(
                "truncation_level: failed to reach requested mass (mu too large?)".to_string(),
            ));
        }
    }
    Ok(n)
}

/// Complex amplitude `alpha = magnitude * e^{i phase}` of a coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude {
    magnitude: f64,
    phase: f64,
}

impl CoherentAmplitude {
    /// Builds an amplitude from a nonnegative magnitude and an arbitrary
    /// finite phase (radians).
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !magnitude.is_finite() || magnitude < 0.0 {
            return Err(Error::domain(format!(
                "CoherentAmplitude: magnitude must be finite and >= 0, got {magnitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::domain(format!(
                "CoherentAmplitude: phase must be finite, got {phase}"
            )));
        }
        Ok(Self { magnitude, phase })
    }

    /// Builds the amplitude `sqrt(mu) e^{i phase}` for a given mean photon
    /// number.
    pub fn from_mean(mu: f64, phase: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::domain(format!(
                "CoherentAmplitude: mean photon number must be finite and >= 0, got {mu}"
            )));
        }
        Self::new(mu.sqrt(), phase)
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Mean photon number `|alpha|^2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Photon-number distribution of a coherent state, tabulated to `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    mean: f64,
    pmf: Vec<f64>,
}

impl PhotonDistribution {
    /// Tabulates `P(0)..P(n_max)` for mean photon number `mu`.
    pub fn new(mu: f64, n_max: u64) -> Result<Self> {
        let pmf = (0..=n_max)
            .map(|n| poisson_pmf(mu, n))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { mean: mu, pmf })
    }

    /// Tabulates far enough that at most `epsilon` of the probability mass is
    /// left out.
    pub fn truncated(mu: f64, epsilon: f64) -> Result<Self> {
        Self::new(mu, truncation_level(mu, epsilon)?)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn n_max(&self) -> u64 {
        (self.pmf.len() - 1) as u64
    }

    /// Tabulated probability of `n` photons; zero beyond `n_max`.
    pub fn pmf(&self, n: u64) -> f64 {
        self.pmf.get(n as usize).copied().unwrap_or(0.0)
    }

    /// Total tabulated mass (at most 1, approaching 1 as `n_max` grows).
    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pmf
    }
}

/// Fock-basis expansion coefficients `c_n = e^{-|alpha|^2/2} alpha^n /
/// sqrt(n!)` of the coherent state `|alpha>`, tabulated to `n_max`.
///
/// Magnitudes are evaluated in log-space, phases as `n * arg(alpha)`, so the
/// entries stay accurate deep into the factorial-suppressed tail.
pub fn coherent_fock_amplitudes(alpha: &CoherentAmplitude, n_max: u64) -> Vec<Complex64> {
    let mu = alpha.mean_photon_number();
    (0..=n_max)
        .map(|n| {
            if alpha.magnitude() == 0.0 {
                return if n == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            let ln_mag = -0.5 * mu + n as f64 * alpha.magnitude().ln() - 0.5 * ln_factorial(n);
            Complex64::from_polar(ln_mag.exp(), n as f64 * alpha.phase())
        })
        .collect()
}

/// Scale factors relating field operators to a measurable field amplitude:
/// the single-photon field amplitude and the accumulated space-time phase
/// `omega t - k . r` at the observation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldScale {
    single_photon_amplitude: f64,
    space_time_phase: f64,
}

impl FieldScale {
    pub fn new(single_photon_amplitude: f64, space_time_phase: f64) -> Result<Self> {
        if !single_photon_amplitude.is_finite() || single_photon_amplitude <= 0.0 {
            return Err(Error::domain(format!(
                "FieldScale: single-photon amplitude must be finite and > 0, got \
                 {single_photon_amplitude}"
            )));
        }
        if !space_time_phase.is_finite() {
            return Err(Error::domain(format!(
                "FieldScale: space-time phase must be finite, got {space_time_phase}"
            )));
        }
        Ok(Self {
            single_photon_amplitude,
            space_time_phase,
        })
    }

    pub fn single_photon_amplitude(&self) -> f64 {
        self.single_photon_amplitude
    }

    pub fn space_time_phase(&self) -> f64 {
        self.space_time_phase
    }
}

/// Expectation value of the electric field in the coherent state:
/// `2 |alpha| E1 sin(space_time_phase - arg(alpha))`, a classical sinusoid
/// whose amplitude grows with `sqrt(mu)` while its uncertainty stays at the
/// vacuum level `E1`.
pub fn mean_field(alpha: &CoherentAmplitude, scale: &FieldScale) -> f64 {
    2.0 * alpha.magnitude()
        * scale.single_photon_amplitude()
        * (scale.space_time_phase() - alpha.phase()).sin()
}
