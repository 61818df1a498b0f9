//! Verification of contour guarantees by independent simulation.
//!
//! [`check_exceedence`] counts, on a fresh sample, how often the projection onto
//! each grid direction exceeds the classical support value `C_j`; each count
//! should be binomial with success probability `P_e`. [`check_gamma_buffered`]
//! estimates the buffered failure probability of the maximal performance
//! function `Γ(u_j, v) = u_j′v − C̄_j`, which should equal `P_e`.
//!
//! Both checks use a 3σ criterion. The standard error combines the variance of
//! the verification estimate with that induced by the construction sample the
//! support values were estimated from, which for both checks scales the
//! verification error by `sqrt(1 + n_verify / N)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::contour::{DirectionGrid, DirectionalSupport};
use crate::model::{joint_sample, EnvironmentalModel, SampleSet};
use crate::risk::{buffered_estimate, buffered_failure_probability, superquantile, ScalarSample};
use crate::{Error, Result};

pub const TOLERANCE_SIGMAS: f64 = 3.0;

/// Probability levels used by [`check_monotonicity`].
pub const MONOTONICITY_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Exceedence,
    GammaBuffered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub index: usize,
    pub theta: f64,
    /// Exceedence fraction, or buffered failure probability of `Γ`.
    pub estimate: f64,
    /// Standard error of the verification estimate alone.
    pub std_error: f64,
    /// Standard error including the construction-sample contribution.
    pub combined_std_error: f64,
    pub z_score: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: CheckKind,
    pub pe: f64,
    pub n_verify: usize,
    pub seed: u64,
    pub construction_seed: u64,
    pub construction_samples: usize,
    /// The verification seed equals the construction seed; estimates are biased.
    pub seed_reused: bool,
    pub tolerance_sigmas: f64,
    pub directions: Vec<DirectionCheck>,
    pub max_estimate: f64,
    pub failing: Vec<usize>,
    pub pass: bool,
}

fn construction_inflation(n_verify: usize, construction_samples: usize) -> f64 {
    if construction_samples == 0 {
        1.0
    } else {
        (1.0 + n_verify as f64 / construction_samples as f64).sqrt()
    }
}

fn assemble(check: CheckKind, support: &DirectionalSupport, pe: f64, n_verify: usize, seed: u64, directions: Vec<DirectionCheck>) -> VerificationReport {
    let failing: Vec<usize> = directions.iter().filter(|d| !d.within_tolerance).map(|d| d.index).collect();
    VerificationReport {
        check,
        pe,
        n_verify,
        seed,
        construction_seed: support.construction_seed,
        construction_samples: support.sample_size,
        seed_reused: seed == support.construction_seed,
        tolerance_sigmas: TOLERANCE_SIGMAS,
        max_estimate: directions.iter().map(|d| d.estimate).fold(f64::NEG_INFINITY, f64::max),
        pass: failing.is_empty(),
        failing,
        directions,
    }
}

fn judge(index: usize, theta: f64, estimate: f64, std_error: f64, combined: f64, pe: f64) -> DirectionCheck {
    let z_score = (estimate - pe) / combined;
    DirectionCheck {
        index,
        theta,
        estimate,
        std_error,
        combined_std_error: combined,
        z_score,
        within_tolerance: z_score.abs() <= TOLERANCE_SIGMAS,
    }
}

fn check_grid(support: &DirectionalSupport, grid: &DirectionGrid) -> Result<()> {
    if support.entries.len() != grid.len() {
        return Err(Error::Input(format!("{} support entries for {} grid directions", support.entries.len(), grid.len())));
    }
    Ok(())
}

/// Fraction of rows with `u′v > threshold`.
pub fn exceedence_fraction(samples: &SampleSet, u: [f64; 2], threshold: f64) -> f64 {
    let hits = samples.rows().iter().filter(|r| u[0] * r[0] + u[1] * r[1] > threshold).count();
    hits as f64 / samples.len() as f64
}

/// Per-direction exceedence of `C_j` on `n_verify` fresh draws.
pub fn check_exceedence<M: EnvironmentalModel>(
    model: &M,
    support: &DirectionalSupport,
    grid: &DirectionGrid,
    pe: f64,
    n_verify: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_grid(support, grid)?;
    let fresh = joint_sample(model, n_verify, seed)?;
    Ok(exceedence_on(&fresh, support, grid, pe))
}

/// [`check_exceedence`] on an already drawn verification sample.
pub fn exceedence_on(fresh: &SampleSet, support: &DirectionalSupport, grid: &DirectionGrid, pe: f64) -> VerificationReport {
    let n = fresh.len();
    let se = (pe * (1.0 - pe) / n as f64).sqrt();
    let combined = se * construction_inflation(n, support.sample_size);
    let directions = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let e = &support.entries[j];
            judge(j, e.theta, exceedence_fraction(fresh, grid.unit(j), e.c), se, combined, pe)
        })
        .collect();
    assemble(CheckKind::Exceedence, support, pe, n, fresh.seed(), directions)
}

/// Sorted `u′V_r − C̄`.
pub fn gamma_sample(samples: &SampleSet, u: [f64; 2], cbar: f64) -> ScalarSample {
    let values = samples.rows().iter().map(|r| u[0] * r[0] + u[1] * r[1] - cbar).collect();
    ScalarSample::new(values).expect("sample sets are nonempty and finite")
}

/// Buffered failure probability of `Γ(u_j, ·)` on fresh draws, every direction.
pub fn check_gamma_buffered<M: EnvironmentalModel>(
    model: &M,
    support: &DirectionalSupport,
    grid: &DirectionGrid,
    pe: f64,
    n_verify: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let all: Vec<usize> = (0..grid.len()).collect();
    check_gamma_buffered_at(model, support, grid, pe, n_verify, seed, &all)
}

/// [`check_gamma_buffered`] restricted to the listed direction indices.
pub fn check_gamma_buffered_at<M: EnvironmentalModel>(
    model: &M,
    support: &DirectionalSupport,
    grid: &DirectionGrid,
    pe: f64,
    n_verify: usize,
    seed: u64,
    directions: &[usize],
) -> Result<VerificationReport> {
    check_grid(support, grid)?;
    let min_tail = support.min_tail.max(1);
    let expected_tail = (n_verify as f64 * pe).floor() as usize;
    if expected_tail < min_tail {
        return Err(Error::InsufficientTail {
            direction: directions.first().copied().unwrap_or(0),
            tail_count: expected_tail,
            min_tail,
            required_samples: (min_tail as f64 / pe).ceil() as u64,
        });
    }
    if let Some(bad) = directions.iter().find(|j| **j >= grid.len()) {
        return Err(Error::Input(format!("direction index {bad} outside grid of {}", grid.len())));
    }
    let fresh = joint_sample(model, n_verify, seed)?;
    let inflation = construction_inflation(n_verify, support.sample_size);
    let checks = directions
        .par_iter()
        .map(|&j| {
            let u = grid.unit(j);
            let e = &support.entries[j];
            let values: Vec<f64> = fresh.rows().iter().map(|r| u[0] * r[0] + u[1] * r[1] - e.cbar).collect();
            let est = buffered_estimate(values)?;
            let se = est.std_error.unwrap_or(f64::NAN);
            Ok(judge(j, e.theta, est.report.p_f_buffered, se, se * inflation, pe))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(CheckKind::GammaBuffered, support, pe, n_verify, seed, checks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MonotonicityViolations {
    pub superquantile: usize,
    pub buffered: usize,
}

impl MonotonicityViolations {
    pub fn is_empty(&self) -> bool {
        self.superquantile == 0 && self.buffered == 0
    }
}

/// Counts ordering violations between `lower` and its pointwise dominator.
///
/// `lower[i] ≤ upper[i]` must hold index by index on the unsorted inputs.
pub fn monotonicity_violations(lower: &[f64], upper: &[f64]) -> Result<MonotonicityViolations> {
    if lower.len() != upper.len() {
        return Err(Error::Input(format!("paired samples differ in length: {} vs {}", lower.len(), upper.len())));
    }
    if let Some((index, (l, u))) = lower.iter().zip(upper).enumerate().find(|(_, (l, u))| !(l <= u)) {
        return Err(Error::Pairing { index, lower: *l, upper: *u });
    }
    let s1 = ScalarSample::new(lower.to_vec())?;
    let s2 = ScalarSample::new(upper.to_vec())?;
    let mut out = MonotonicityViolations::default();
    for alpha in MONOTONICITY_LEVELS {
        if superquantile(&s1, alpha)? > superquantile(&s2, alpha)? {
            out.superquantile += 1;
        }
    }
    if buffered_failure_probability(&s1).p_f_buffered > buffered_failure_probability(&s2).p_f_buffered {
        out.buffered += 1;
    }
    Ok(out)
}

pub fn check_monotonicity(lower: &[f64], upper: &[f64]) -> Result<bool> {
    Ok(monotonicity_violations(lower, upper)?.is_empty())
}

/// Analytic buffered failure probability of `N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalBufferedOracle {
    pub z: f64,
    pub alpha: f64,
    pub q_alpha: f64,
    pub p_f_buffered: f64,
}

impl NormalBufferedOracle {
    /// Delta-method standard error of the empirical buffered failure
    /// probability of `n` draws, evaluated at the analytic root:
    /// `Var = (σ² E[(Z − z)₊²] / q² − p̄²) / n` with
    /// `E[(Z − z)₊²] = (1 + z²)(1 − Φ(z)) − z φ(z)`.
    pub fn std_error(&self, sigma: f64, n: usize) -> f64 {
        let z = self.z;
        let second = (1.0 + z * z) * self.p_f_buffered - z * std_normal_pdf(z);
        let p = self.p_f_buffered;
        ((sigma * sigma * second / (self.q_alpha * self.q_alpha) - p * p).max(0.0) / n as f64).sqrt()
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail `1 − Φ(z)`.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Mills ratio `(1 − Φ(z)) / φ(z)`; continued fraction in the far tail.
fn mills_ratio(z: f64) -> f64 {
    if z < 8.0 {
        return std_normal_sf(z) / std_normal_pdf(z);
    }
    let mut f = z;
    for k in (1..=60).rev() {
        f = z + k as f64 / f;
    }
    1.0 / f
}

/// Normal hazard `φ(z) / (1 − Φ(z))`, increasing in `z`.
pub fn normal_hazard(z: f64) -> f64 {
    1.0 / mills_ratio(z)
}

/// Solves `φ(z)/(1 − Φ(z)) = −mu/sigma` by bisection; the superquantile at
/// `α = Φ(z)` is then `mu + sigma λ(z) = 0`.
pub fn normal_cvar_oracle(mu: f64, sigma: f64) -> Result<NormalBufferedOracle> {
    if !(mu < 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("mean must be negative and finite, got {mu}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("standard deviation must be positive, got {sigma}")));
    }
    let target = -mu / sigma;
    let mut hi = target + 1.0;
    let mut lo = -1.0;
    while normal_hazard(lo) >= target {
        lo *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if normal_hazard(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    Ok(NormalBufferedOracle {
        z,
        alpha: 0.5 * erfc(-z / std::f64::consts::SQRT_2),
        q_alpha: mu + sigma * z,
        p_f_buffered: std_normal_sf(z),
    })
}
