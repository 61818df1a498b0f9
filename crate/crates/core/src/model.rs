//! Joint long-term environmental models and seeded sampling.
//!
//! The metocean model is the product `f_{T,H}(t, h) = f_H(h) f_{T|H}(t | h)` of
//! a three-parameter Weibull marginal for significant wave height and a
//! lognormal conditional for wave period, with log-mean `a1 + a2 h^a3` and
//! log-sd `b1 + b2 e^(b3 h)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stream::{chunk_stream, chunks};
use crate::{Error, Result};

/// Three-parameter Weibull distribution of significant wave height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weibull3Params {
    /// Location `γ` (m); the support is `h ≥ γ`.
    pub location: f64,
    /// Scale `α > 0` (m).
    pub scale: f64,
    /// Shape `β > 0`.
    pub shape: f64,
}

impl Weibull3Params {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        let p = Self { location, scale, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::Parameter(format!("weibull location {} is not finite", self.location)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Parameter(format!("weibull scale must be > 0, got {}", self.scale)));
        }
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::Parameter(format!("weibull shape must be > 0, got {}", self.shape)));
        }
        Ok(())
    }

    pub fn cdf(&self, h: f64) -> f64 {
        if h <= self.location {
            return 0.0;
        }
        let z = (h - self.location) / self.scale;
        -(-z.powf(self.shape)).exp_m1()
    }

    /// Inverse CDF, `γ + α (−ln(1 − p))^(1/β)` for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        self.location + self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape)
    }
}

/// Weibull density at `h`.
///
/// Zero below the location. At `h = γ` the density is zero for `β > 1`, `1/α`
/// for `β = 1`, and unbounded for `β < 1`, which is reported as
/// [`Error::DensityDivergence`].
pub fn weibull3_pdf(h: f64, p: &Weibull3Params) -> Result<f64> {
    p.validate()?;
    if h < p.location {
        return Ok(0.0);
    }
    if h == p.location && p.shape < 1.0 {
        return Err(Error::DensityDivergence { h, shape: p.shape });
    }
    let z = (h - p.location) / p.scale;
    Ok(p.shape / p.scale * z.powf(p.shape - 1.0) * (-z.powf(p.shape)).exp())
}

/// Draws `n` wave heights by inverse-CDF sampling from `stream`.
pub fn weibull3_sample<R: Rng + ?Sized>(p: &Weibull3Params, n: usize, stream: &mut R) -> Result<Vec<f64>> {
    p.validate()?;
    if n == 0 {
        return Err(Error::Input("sample count must be at least 1".into()));
    }
    Ok((0..n).map(|_| p.quantile(stream.random::<f64>())).collect())
}

/// Coefficients of the conditional lognormal wave-period model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondLognormalParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl CondLognormalParams {
    /// `(μ, σ)` of `ln T` given `H = h`.
    pub fn moments(&self, h: f64) -> Result<(f64, f64)> {
        cond_lognormal_moments(h, self)
    }
}

pub fn cond_lognormal_moments(h: f64, p: &CondLognormalParams) -> Result<(f64, f64)> {
    if !(h >= 0.0) {
        return Err(Error::Input(format!("wave height must be >= 0, got {h}")));
    }
    let mu = p.a1 + p.a2 * h.powf(p.a3);
    let sigma = p.b1 + p.b2 * (p.b3 * h).exp();
    if !(sigma > 0.0) || !mu.is_finite() {
        return Err(Error::ConditionalModel { h, sigma });
    }
    Ok((mu, sigma))
}

/// Joint Weibull / conditional lognormal model of `(T, H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMetoceanModel {
    pub marginal: Weibull3Params,
    pub conditional: CondLognormalParams,
}

impl JointMetoceanModel {
    /// North West Australia swell.
    pub fn swell() -> Self {
        Self {
            marginal: Weibull3Params { location: 0.132, scale: 0.450, shape: 1.580 },
            conditional: CondLognormalParams { a1: 0.010, a2: 2.543, a3: 0.032, b1: 0.137, b2: 0.000, b3: 0.000 },
        }
    }

    /// North West Australia wind sea.
    pub fn windsea() -> Self {
        Self {
            marginal: Weibull3Params { location: 0.322, scale: 0.605, shape: 0.867 },
            conditional: CondLognormalParams { a1: 0.000, a2: 1.798, a3: 0.134, b1: 0.042, b2: 0.224, b3: -0.500 },
        }
    }

    /// Lognormal density of `T` given `H = h`.
    pub fn conditional_pdf(&self, t: f64, h: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let (mu, sigma) = self.conditional.moments(h)?;
        let z = (t.ln() - mu) / sigma;
        Ok((-0.5 * z * z).exp() / (t * sigma * (2.0 * PI).sqrt()))
    }
}

/// Joint density `f_H(h) f_{T|H}(t | h)`; zero outside `t > 0, h ≥ γ`.
pub fn joint_pdf(t: f64, h: f64, m: &JointMetoceanModel) -> Result<f64> {
    if t <= 0.0 || h < m.marginal.location {
        return Ok(0.0);
    }
    let fh = weibull3_pdf(h, &m.marginal)?;
    if fh == 0.0 {
        return Ok(0.0);
    }
    Ok(fh * m.conditional_pdf(t, h)?)
}

/// Independent bivariate normal; the standard one is isotropic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateNormal {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

impl BivariateNormal {
    pub fn standard() -> Self {
        Self { mean: [0.0, 0.0], sd: [1.0, 1.0] }
    }
}

/// A bivariate distribution that can be sampled one row at a time.
pub trait EnvironmentalModel: Sync {
    /// Label recorded in every [`SampleSet`] drawn from the model.
    fn id(&self) -> String;

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2]>;
}

impl EnvironmentalModel for JointMetoceanModel {
    fn id(&self) -> String {
        let (w, c) = (&self.marginal, &self.conditional);
        format!(
            "weibull3-lognormal(gamma={},alpha={},beta={};a={},{},{};b={},{},{})",
            w.location, w.scale, w.shape, c.a1, c.a2, c.a3, c.b1, c.b2, c.b3
        )
    }

    fn validate(&self) -> Result<()> {
        self.marginal.validate()
    }

    /// Row `(t, h)`: inverse-CDF wave height, then `t = exp(μ(h) + σ(h) Z)`.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2]> {
        let h = self.marginal.quantile(rng.random::<f64>());
        let (mu, sigma) = self.conditional.moments(h)?;
        let z: f64 = rng.sample(StandardNormal);
        Ok([(mu + sigma * z).exp(), h])
    }
}

impl EnvironmentalModel for BivariateNormal {
    fn id(&self) -> String {
        format!("normal(mean={},{};sd={},{})", self.mean[0], self.mean[1], self.sd[0], self.sd[1])
    }

    fn validate(&self) -> Result<()> {
        if self.sd.iter().all(|s| *s > 0.0 && s.is_finite()) && self.mean.iter().all(|m| m.is_finite()) {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid bivariate normal {self:?}")))
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2]> {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Ok([self.mean[0] + self.sd[0] * x, self.mean[1] + self.sd[1] * y])
    }
}

/// An immutable `N × 2` sample with the seed that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    rows: Vec<[f64; 2]>,
    seed: u64,
    model_id: String,
}

impl SampleSet {
    pub fn from_rows(rows: Vec<[f64; 2]>, seed: u64, model_id: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("sample set must contain at least one row".into()));
        }
        Ok(Self { rows, seed, model_id: model_id.into() })
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }
}

/// Draws `n` rows from `m`. The result depends only on `(m, n, seed)`.
pub fn joint_sample<M: EnvironmentalModel>(m: &M, n: usize, seed: u64) -> Result<SampleSet> {
    m.validate()?;
    if n == 0 {
        return Err(Error::Input("sample count must be at least 1".into()));
    }
    let parts: Vec<(u64, usize, usize)> = chunks(n).collect();
    let blocks = parts
        .into_par_iter()
        .map(|(chunk, _, len)| {
            let mut rng = chunk_stream(seed, chunk);
            (0..len).map(|_| m.draw(&mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n);
    for block in blocks {
        rows.extend(block);
    }
    Ok(SampleSet { rows, seed, model_id: m.id() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swell() -> Weibull3Params {
        JointMetoceanModel::swell().marginal
    }

    #[test]
    fn pdf_is_zero_below_and_at_location_for_shape_above_one() {
        assert_eq!(weibull3_pdf(0.0, &swell()).unwrap(), 0.0);
        assert_eq!(weibull3_pdf(swell().location, &swell()).unwrap(), 0.0);
    }

    #[test]
    fn pdf_diverges_at_location_for_shape_below_one() {
        let ws = JointMetoceanModel::windsea().marginal;
        assert!(matches!(weibull3_pdf(ws.location, &ws), Err(Error::DensityDivergence { .. })));
        assert!(weibull3_pdf(ws.location + 1e-6, &ws).unwrap().is_finite());
    }

    #[test]
    fn pdf_at_location_for_exponential_shape() {
        let p = Weibull3Params::new(1.0, 2.0, 1.0).unwrap();
        assert_eq!(weibull3_pdf(1.0, &p).unwrap(), 0.5);
    }

    #[test]
    fn invalid_params_are_rejected() {
        for p in [
            Weibull3Params { location: 0.0, scale: 0.0, shape: 1.0 },
            Weibull3Params { location: 0.0, scale: 1.0, shape: -1.0 },
        ] {
            assert!(matches!(weibull3_pdf(1.0, &p), Err(Error::Parameter(_))));
            assert!(weibull3_sample(&p, 3, &mut chunk_stream(1, 0)).is_err());
        }
    }

    #[test]
    fn pdf_matches_finite_difference_of_cdf() {
        let p = swell();
        let h = 0.582;
        let step = 1e-5;
        let fd = (p.cdf(h + step) - p.cdf(h - step)) / (2.0 * step);
        let pdf = weibull3_pdf(h, &p).unwrap();
        assert!((pdf - fd).abs() < 1e-8, "pdf {pdf} vs finite difference {fd}");
    }

    #[test]
    fn quantile_round_trips_through_cdf() {
        for p in [swell(), JointMetoceanModel::windsea().marginal] {
            for prob in [0.01, 0.5, 0.99] {
                assert!((p.cdf(p.quantile(prob)) - prob).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantile_reference_points() {
        let p = swell();
        let u = 1.0 - (-1.0f64).exp();
        assert!((p.quantile(u) - (p.location + p.scale)).abs() < 1e-12);
        assert_eq!(p.quantile(0.0), p.location);
        assert!(p.quantile(1e-300) - p.location < 1e-100);
    }

    #[test]
    fn moments_follow_table_coefficients() {
        let (mu, sigma) = JointMetoceanModel::swell().conditional.moments(1.0).unwrap();
        assert!((mu - 2.553).abs() < 1e-12);
        assert!((sigma - 0.137).abs() < 1e-12);

        let ws = JointMetoceanModel::windsea().conditional;
        let (mu0, _) = ws.moments(0.0).unwrap();
        assert_eq!(mu0, 0.0);
        let (_, sigma2) = ws.moments(2.0).unwrap();
        assert!((sigma2 - (0.042 + 0.224 * (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn non_positive_sigma_is_a_conditional_model_error() {
        let p = CondLognormalParams { a1: 0.0, a2: 1.0, a3: 1.0, b1: -1.0, b2: 0.5, b3: 0.0 };
        assert!(matches!(p.moments(1.0), Err(Error::ConditionalModel { .. })));
        let m = JointMetoceanModel { marginal: swell(), conditional: p };
        assert!(matches!(joint_sample(&m, 10, 1), Err(Error::ConditionalModel { .. })));
    }

    #[test]
    fn joint_pdf_support() {
        let m = JointMetoceanModel::swell();
        assert_eq!(joint_pdf(-1.0, 1.0, &m).unwrap(), 0.0);
        assert_eq!(joint_pdf(10.0, 0.1, &m).unwrap(), 0.0);
        assert!(joint_pdf(12.0, 1.0, &m).unwrap() > 0.0);
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let m = JointMetoceanModel::windsea();
        let a = joint_sample(&m, 40_000, 11).unwrap();
        let b = joint_sample(&m, 40_000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.rows().iter().all(|r| r[0] > 0.0 && r[1] >= m.marginal.location));
        let c = joint_sample(&m, 40_000, 12).unwrap();
        assert_ne!(a.rows(), c.rows());
    }

    #[test]
    fn zero_rows_is_an_input_error() {
        assert!(matches!(joint_sample(&BivariateNormal::standard(), 0, 1), Err(Error::Input(_))));
    }
}
