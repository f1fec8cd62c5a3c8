//! Phase randomization of a coherent state.
//!
//! Averaging `|alpha e^{i theta}>` over a uniform `theta` leaves the diagonal
//! Poisson mixture `sum_n P_n |n><n|` — the identity that lets a weak laser
//! beam stand in for a photon-number source once its phase is scrambled. The
//! closed form lives in [`randomized_density_analytic`]; the Monte Carlo
//! average in [`randomized_density_mc`] reconstructs it sample by sample and
//! is the first of the crate's quantum-versus-classical cross-checks.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quasiclassical::{coherent_fock_amplitudes, poisson_pmf, CoherentAmplitude};
use crate::streams::PhaseOracle;

/// Samples per accumulation shard. Fixed, so the reduction tree — and with
/// it every bit of the result — is independent of the worker count.
const SHARD_SAMPLES: u64 = 1 << 14;

/// Largest representable dimension; outer products are quadratic in it and
/// weak-beam truncation never comes close.
const MAX_DIM: usize = 64;

/// Dense single-mode density matrix on the photon-number basis `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallDensity {
    dim: usize,
    elements: Vec<Complex64>,
}

impl SmallDensity {
    fn zero(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::domain(format!(
                "SmallDensity: dimension must lie in 1..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            elements: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix element `<n| rho |m>`.
    pub fn element(&self, n: usize, m: usize) -> Complex64 {
        assert!(n < self.dim && m < self.dim, "element ({n},{m}) out of range");
        self.elements[n * self.dim + m]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|n| self.element(n, n)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.element(n, n).re).collect()
    }

    /// Largest `|<n| rho |m>|` with `n != m`.
    pub fn max_offdiagonal_magnitude(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.dim {
            for m in 0..self.dim {
                if n != m {
                    worst = worst.max(self.element(n, m).norm());
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        (0..self.dim).all(|n| {
            (0..self.dim).all(|m| (self.element(n, m) - self.element(m, n).conj()).norm() <= tolerance)
        })
    }

    /// Rank-one update `rho += weight |amps><amps|`.
    fn add_outer(&mut self, amps: &[Complex64], weight: f64) {
        debug_assert_eq!(amps.len(), self.dim);
        for n in 0..self.dim {
            for m in 0..self.dim {
                self.elements[n * self.dim + m] += weight * amps[n] * amps[m].conj();
            }
        }
    }

    fn add_assign(&mut self, other: &SmallDensity) {
        debug_assert_eq!(self.dim, other.dim);
        for (lhs, rhs) in self.elements.iter_mut().zip(&other.elements) {
            *lhs += rhs;
        }
    }

    fn scale(&mut self, factor: f64) {
        for element in &mut self.elements {
            *element *= factor;
        }
    }
}

/// The phase-averaged coherent state in closed form: diagonal Poisson
/// weights, every coherence gone.
pub fn randomized_density_analytic(mu: f64, dim: usize) -> Result<SmallDensity> {
    let mut rho = SmallDensity::zero(dim)?;
    for n in 0..dim {
        rho.elements[n * dim + n] = Complex64::new(poisson_pmf(mu, n as u64)?, 0.0);
    }
    Ok(rho)
}

/// Monte Carlo average of `|sqrt(mu) e^{i theta}>` projectors over uniform
/// phases, truncated to `dim` number states.
///
/// Phases come from a counter-addressed stream keyed by the sample index and
/// partial sums are reduced in fixed shard order, so the result is identical
/// bit for bit no matter how many worker threads run the shards.
pub fn randomized_density_mc(mu: f64, dim: usize, samples: u64, seed: u64) -> Result<SmallDensity> {
    let mut rho = SmallDensity::zero(dim)?;
    if samples == 0 {
        return Err(Error::domain("randomized_density_mc: need at least one sample"));
    }
    let base = coherent_fock_amplitudes(&CoherentAmplitude::from_mean(mu, 0.0)?, dim as u64 - 1);
    let shards = samples.div_ceil(SHARD_SAMPLES);
    let partials: Vec<SmallDensity> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut oracle = PhaseOracle::new(seed);
            let mut local = SmallDensity::zero(dim).expect("dim validated above");
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            let last = samples.min((shard + 1) * SHARD_SAMPLES);
            for index in shard * SHARD_SAMPLES..last {
                let rotor = Complex64::from_polar(1.0, oracle.phase(index));
                let mut turn = Complex64::new(1.0, 0.0);
                for (slot, base_amp) in amps.iter_mut().zip(&base) {
                    *slot = base_amp * turn;
                    turn *= rotor;
                }
                local.add_outer(&amps, 1.0);
            }
            local
        })
        .collect();
    for partial in &partials {
        rho.add_assign(partial);
    }
    rho.scale(1.0 / samples as f64);
    Ok(rho)
}

/// One uniform interference phase in `[0, 2*pi)`.
pub fn sample_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn analytic_density_is_the_poisson_diagonal() {
        let rho = randomized_density_analytic(0.3, 5).unwrap();
        for n in 0..5 {
            let want = poisson_pmf(0.3, n as u64).unwrap();
            assert!((rho.element(n, n).re - want).abs() < 1e-15);
        }
        assert_eq!(rho.max_offdiagonal_magnitude(), 0.0);
    }

    #[test]
    fn density_dimension_is_validated() {
        assert!(randomized_density_analytic(0.3, 0).is_err());
        assert!(randomized_density_analytic(0.3, 65).is_err());
        assert!(randomized_density_mc(0.3, 0, 10, 1).is_err());
        assert!(randomized_density_mc(0.3, 4, 0, 1).is_err());
    }

    #[test]
    fn mc_diagonal_carries_no_sampling_noise() {
        // |<n | alpha e^{i theta}>|^2 does not depend on theta, so the
        // diagonal converges at floating-point accuracy for any sample count.
        let rho = randomized_density_mc(0.05, 6, 2_000, 9).unwrap();
        for n in 0..6 {
            let want = poisson_pmf(0.05, n as u64).unwrap();
            assert!(
                (rho.element(n, n).re - want).abs() < 1e-12,
                "diagonal {n}: {} vs {want}",
                rho.element(n, n).re
            );
        }
    }

    #[test]
    fn mc_offdiagonals_sit_within_sampling_error() {
        let samples = 20_000u64;
        let rho = randomized_density_mc(0.05, 6, samples, 9).unwrap();
        for n in 0..6 {
            for m in 0..6 {
                if n == m {
                    continue;
                }
                let p_n = poisson_pmf(0.05, n as u64).unwrap();
                let p_m = poisson_pmf(0.05, m as u64).unwrap();
                let standard_error = (p_n * p_m / samples as f64).sqrt();
                assert!(
                    rho.element(n, m).norm() < 5.0 * standard_error + 1e-15,
                    "({n},{m}): {} vs SE {standard_error}",
                    rho.element(n, m).norm()
                );
            }
        }
    }

    #[test]
    fn single_sample_is_a_pure_projector() {
        let seed = 21;
        let rho = randomized_density_mc(0.4, 5, 1, seed).unwrap();
        let theta = PhaseOracle::new(seed).phase(0);
        let alpha = CoherentAmplitude::from_mean(0.4, theta).unwrap();
        let amps = coherent_fock_amplitudes(&alpha, 4);
        for n in 0..5 {
            for m in 0..5 {
                let want = amps[n] * amps[m].conj();
                assert!((rho.element(n, m) - want).norm() < 1e-15, "({n},{m})");
            }
        }
    }

    #[test]
    fn mc_density_is_hermitian_with_the_truncated_trace() {
        let rho = randomized_density_mc(0.1, 6, 4_096, 3).unwrap();
        assert!(rho.is_hermitian(1e-15));
        let truncated_mass: f64 = (0..6).map(|n| poisson_pmf(0.1, n).unwrap()).sum();
        assert!((rho.trace().re - truncated_mass).abs() < 1e-12);
        assert!(rho.trace().im.abs() < 1e-15);
    }

    #[test]
    fn result_does_not_depend_on_worker_count() {
        let serial_pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide_pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let samples = 3 * SHARD_SAMPLES + 17;
        let serial = serial_pool.install(|| randomized_density_mc(0.2, 5, samples, 77).unwrap());
        let wide = wide_pool.install(|| randomized_density_mc(0.2, 5, samples, 77).unwrap());
        assert_eq!(serial, wide);
    }

    #[test]
    fn offdiagonals_shrink_as_samples_grow() {
        let coarse = randomized_density_mc(0.2, 5, 200, 5).unwrap();
        let fine = randomized_density_mc(0.2, 5, 200_000, 5).unwrap();
        assert!(fine.max_offdiagonal_magnitude() < coarse.max_offdiagonal_magnitude());
    }

    #[test]
    fn sampled_phases_pass_a_uniformity_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bins = 16usize;
        let draws = 16_000usize;
        let mut counts = vec![0u64; bins];
        for _ in 0..draws {
            let phase = sample_phase(&mut rng);
            let bin = ((phase / std::f64::consts::TAU) * bins as f64) as usize;
            counts[bin.min(bins - 1)] += 1;
        }
        let expected = draws as f64 / bins as f64;
        let statistic: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let cutoff = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.9999);
        assert!(statistic < cutoff, "chi-square {statistic} vs cutoff {cutoff}");
    }
}
