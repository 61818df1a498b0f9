//! Empirical risk measures on scalar samples.
//!
//! Positive performance values mean failure. Quantiles use the order statistic
//! `Y_(k)` with `k = ceil(prob · n)`; tails are the values strictly above it.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A nonempty sample sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSample {
    values: Vec<f64>,
}

impl ScalarSample {
    /// Sorts `values`. Rejects empty input and NaN.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("scalar sample must contain at least one value".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Input("scalar sample contains NaN".into()));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
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

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// One-based order-statistic index `ceil(prob · n)` clamped to `[1, n]`.
///
/// Products within a few ulps of an integer snap to it, so that e.g.
/// `0.6 · 5` selects `k = 3` regardless of the rounding of `0.6`.
pub fn order_index(prob: f64, n: usize) -> usize {
    let x = prob * n as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) { nearest } else { x.ceil() };
    (k.max(1.0) as usize).min(n)
}

fn check_open_unit(prob: f64, name: &str) -> Result<()> {
    if prob > 0.0 && prob < 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must lie in (0, 1), got {prob}")))
    }
}

pub fn empirical_quantile(s: &ScalarSample, prob: f64) -> Result<f64> {
    check_open_unit(prob, "probability")?;
    Ok(s.values[order_index(prob, s.len()) - 1])
}

/// Mean of the values strictly above the `alpha`-quantile.
pub fn superquantile(s: &ScalarSample, alpha: f64) -> Result<f64> {
    let q = empirical_quantile(s, alpha)?;
    let start = s.values.partition_point(|v| *v <= q);
    let tail = &s.values[start..];
    if tail.is_empty() {
        return Err(Error::DegenerateTail { alpha, quantile: q });
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Fraction of values strictly greater than zero.
pub fn failure_probability(s: &ScalarSample) -> f64 {
    let functioning = s.values.partition_point(|v| *v <= 0.0);
    (s.len() - functioning) as f64 / s.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub n: usize,
    pub p_f: f64,
    pub reliability: f64,
    /// `k*/n`, the probability level at which the superquantile crosses zero.
    pub alpha: f64,
    /// `Y_(k*)`; absent when the whole sample has nonnegative mean (`k* = 0`).
    pub q_alpha: Option<f64>,
    /// Mean of the values above `q_alpha`; absent when `k* = n`.
    pub superquantile_at_alpha: Option<f64>,
    pub p_f_buffered: f64,
    pub reliability_buffered: f64,
}

/// Buffered failure probability from the zero crossing of the suffix means
/// `m(k) = mean(Y_(k+1), …, Y_(n))`.
///
/// `k*` is the smallest `k` with `m(k) ≥ 0`; `p̄_f = (n − k*)/n`. When every
/// suffix mean is negative (`max < 0`) the result is `p̄_f = 0`, `α = 1`.
pub fn buffered_failure_probability(s: &ScalarSample) -> RiskReport {
    let crossing = suffix_crossing(&s.values);
    report_from_crossing(s.len(), failure_probability(s), &s.values, 0, crossing)
}

struct Crossing {
    /// Zero-based index of the first value in the balancing tail, i.e. `k*`.
    k_star: usize,
    tail_sum: f64,
}

/// Scans the sorted slice from the top, accumulating suffix sums, and stops at
/// the first suffix whose mean turns negative.
fn suffix_crossing(sorted: &[f64]) -> Crossing {
    let mut sum = 0.0;
    let mut k_star = sorted.len();
    let mut tail_sum = 0.0;
    for (i, v) in sorted.iter().enumerate().rev() {
        let next = sum + v;
        if next < 0.0 {
            break;
        }
        sum = next;
        k_star = i;
        tail_sum = sum;
    }
    Crossing { k_star, tail_sum }
}

/// `top` holds the largest values of an `n`-sample sorted ascending; it starts
/// at global index `offset`.
fn report_from_crossing(n: usize, p_f: f64, top: &[f64], offset: usize, c: Crossing) -> RiskReport {
    let k_star = c.k_star + offset;
    let tail = n - k_star;
    let q_alpha = (k_star >= 1).then(|| top[k_star - 1 - offset]);
    let superquantile_at_alpha = (tail > 0).then(|| c.tail_sum / tail as f64);
    let p_f_buffered = tail as f64 / n as f64;
    RiskReport {
        n,
        p_f,
        reliability: 1.0 - p_f,
        alpha: k_star as f64 / n as f64,
        q_alpha,
        superquantile_at_alpha,
        p_f_buffered,
        reliability_buffered: 1.0 - p_f_buffered,
    }
}

/// Buffered failure probability with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferedEstimate {
    pub report: RiskReport,
    /// `sqrt((mean((Y − q)₊²)/q² − p̄_f²)/n)`, the standard error of the root of
    /// `mean((Y − q)·1{Y > q}) = 0`; absent when `q_alpha` is missing or zero.
    pub std_error: Option<f64>,
}

/// Same result as [`buffered_failure_probability`] on the sorted sample, but
/// only the top of the sample is ever sorted: the top block is doubled until
/// the suffix-mean crossing falls strictly inside it.
pub fn buffered_estimate(mut values: Vec<f64>) -> Result<BufferedEstimate> {
    if values.is_empty() {
        return Err(Error::Input("scalar sample must contain at least one value".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Input("scalar sample contains NaN".into()));
    }
    let n = values.len();
    let p_f = values.iter().filter(|v| **v > 0.0).count() as f64 / n as f64;
    let mut block = n.min(1024);
    loop {
        let offset = n - block;
        if offset > 0 {
            values.select_nth_unstable_by(offset, f64::total_cmp);
        }
        let top = &mut values[offset..];
        top.sort_unstable_by(f64::total_cmp);
        let c = suffix_crossing(top);
        if c.k_star > 0 || offset == 0 {
            let report = report_from_crossing(n, p_f, top, offset, c);
            let std_error = report.q_alpha.filter(|q| *q != 0.0).map(|q| {
                let second: f64 = top.iter().filter(|v| **v > q).map(|v| (v - q) * (v - q)).sum::<f64>() / n as f64;
                let p = report.p_f_buffered;
                ((second / (q * q) - p * p).max(0.0) / n as f64).sqrt()
            });
            return Ok(BufferedEstimate { report, std_error });
        }
        block = (block * 4).min(n);
    }
}

/// Return period in years and the number of sea states per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPeriodSpec {
    pub return_period_years: f64,
    #[serde(default = "default_states_per_hour")]
    pub states_per_hour: f64,
    #[serde(default = "default_hours_per_year")]
    pub hours_per_year: f64,
}

fn default_states_per_hour() -> f64 {
    1.0
}

fn default_hours_per_year() -> f64 {
    HOURS_PER_YEAR
}

pub const HOURS_PER_YEAR: f64 = 365.25 * 24.0;

impl ReturnPeriodSpec {
    pub fn years(return_period_years: f64) -> Self {
        Self { return_period_years, states_per_hour: 1.0, hours_per_year: HOURS_PER_YEAR }
    }
}

/// `P_e = 1 / (years · hours_per_year · states_per_hour)`.
pub fn return_period_to_pe(spec: &ReturnPeriodSpec) -> Result<f64> {
    if !(spec.return_period_years > 0.0) {
        return Err(Error::Input(format!("return period must be > 0 years, got {}", spec.return_period_years)));
    }
    if !(spec.states_per_hour > 0.0 && spec.hours_per_year > 0.0) {
        return Err(Error::Input("states per hour and hours per year must be > 0".into()));
    }
    let pe = 1.0 / (spec.return_period_years * spec.hours_per_year * spec.states_per_hour);
    if !(pe < 1.0) {
        return Err(Error::Input(format!("return period shorter than one sea state (P_e = {pe})")));
    }
    Ok(pe)
}
