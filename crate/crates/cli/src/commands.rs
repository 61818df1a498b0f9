//! The four subcommands as library functions.

use std::fs;
use std::path::{Path, PathBuf};

use bufcontour::contour::{
    build_polygon, build_support, polygon_contains, polygon_from_offsets, vertices_outside, ContourKind, ContourPolygon,
    DirectionGrid, DirectionalSupport, SupportEntry, DEFAULT_RELATIVE_TOLERANCE,
};
use bufcontour::model::{joint_sample, BivariateNormal, EnvironmentalModel};
use bufcontour::risk::{buffered_estimate, order_index, RiskReport};
use bufcontour::verify::{check_exceedence, check_gamma_buffered, normal_cvar_oracle, std_normal_sf, VerificationReport};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::svg::{render, Layer};
use crate::table::{format_real, read_contour_csv, write_contour_csv, ContourRecord};
use crate::{CliError, Result};

pub const CONTOUR_CSV: &str = "contour.csv";
pub const CONTOUR_REPORT: &str = "report.json";
pub const CONTOUR_SVG: &str = "contour.svg";
pub const VERIFY_REPORT: &str = "verify.json";
pub const SAMPLES_CSV: &str = "samples.csv";

/// Values derived from the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub pe: f64,
    pub model_id: String,
    pub verify_samples: usize,
    pub verify_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        values.into_iter().fold(Range { min: f64::INFINITY, max: f64::NEG_INFINITY }, |r, v| Range { min: r.min.min(v), max: r.max.max(v) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSummary {
    pub valid: bool,
    pub failing_vertices: Vec<usize>,
}

impl From<&ContourPolygon> for PolygonSummary {
    fn from(p: &ContourPolygon) -> Self {
        Self { valid: p.is_valid(), failing_vertices: p.failing_vertices() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    /// Every classical vertex satisfies every buffered halfplane.
    pub classical_in_buffered: bool,
    pub vertices_outside: Vec<usize>,
    pub cbar_dominates_c: bool,
    /// Strict polygon containment; absent unless both polygons are valid.
    pub both_valid_and_contained: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourReport {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub pe: f64,
    pub samples: usize,
    pub directions: usize,
    pub seed: u64,
    pub support_c: Range,
    pub support_cbar: Option<Range>,
    pub support_cbar_scaled: Option<Range>,
    pub classical: PolygonSummary,
    pub buffered: Option<PolygonSummary>,
    pub containment: Option<Containment>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ContourOutcome {
    pub support: DirectionalSupport,
    pub classical: ContourPolygon,
    pub buffered: Option<ContourPolygon>,
    pub records: Vec<ContourRecord>,
    pub report: ContourReport,
}

fn resolved(config: &RunConfig, pe: f64, model: &impl EnvironmentalModel) -> Resolved {
    Resolved { pe, model_id: model.id(), verify_samples: config.verify_samples(), verify_seed: config.verify_seed() }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::file(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::file(path, e.to_string()))
}

fn out_dir(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.out_dir).map_err(|e| CliError::file(&config.out_dir, e.to_string()))?;
    Ok(&config.out_dir)
}

/// Samples once, builds both supports and writes the contour files.
pub fn run_contour(config: &RunConfig) -> Result<ContourOutcome> {
    let (model, pe) = config.validate()?;
    let dir = out_dir(config)?;
    let samples = joint_sample(&model, config.samples, config.seed)?;
    let grid = DirectionGrid::new(config.directions)?;
    let support = build_support(&samples, &grid, pe, config.min_tail)?;
    drop(samples);
    let classical = build_polygon(&support, &grid, ContourKind::Classical)?;
    let scaled = support.scaled(config.scale_a)?;
    let buffered = if config.buffered { Some(build_polygon(&scaled, &grid, ContourKind::Buffered)?) } else { None };

    let records: Vec<ContourRecord> = (0..grid.len())
        .map(|j| {
            let e = &support.entries[j];
            let u = grid.unit(j);
            let b = buffered.as_ref();
            ContourRecord {
                theta: e.theta,
                ux: u[0],
                uy: u[1],
                c: e.c,
                cbar: b.map(|_| e.cbar),
                cbar_scaled: b.map(|_| scaled.entries[j].cbar),
                vx_classical: classical.vertices[j][0],
                vy_classical: classical.vertices[j][1],
                vx_buffered: b.map(|p| p.vertices[j][0]),
                vy_buffered: b.map(|p| p.vertices[j][1]),
                convex_ok: classical.convexity_flags[j] && b.is_none_or(|p| p.convexity_flags[j]),
            }
        })
        .collect();

    let mut files = vec![CONTOUR_CSV.to_string(), CONTOUR_REPORT.to_string()];
    write_contour_csv(&dir.join(CONTOUR_CSV), &records)?;
    if config.svg {
        let mut layers = vec![Layer { label: "classical", stroke: "gray", vertices: &classical.vertices }];
        if let Some(p) = &buffered {
            layers.push(Layer { label: "buffered", stroke: "black", vertices: &p.vertices });
        }
        let [x, y] = model.columns();
        fs::write(dir.join(CONTOUR_SVG), render(&layers, x, y))?;
        files.push(CONTOUR_SVG.to_string());
    }

    let containment = buffered.as_ref().map(|b| {
        let outside = vertices_outside(b, &classical);
        Containment {
            classical_in_buffered: outside.is_empty(),
            vertices_outside: outside,
            cbar_dominates_c: scaled.dominance_failures().is_empty(),
            both_valid_and_contained: polygon_contains(b, &classical).ok(),
        }
    });
    let report = ContourReport {
        config: config.clone(),
        resolved: resolved(config, pe, &model),
        pe,
        samples: config.samples,
        directions: config.directions,
        seed: config.seed,
        support_c: Range::of(support.entries.iter().map(|e| e.c)),
        support_cbar: buffered.as_ref().map(|_| Range::of(support.entries.iter().map(|e| e.cbar))),
        support_cbar_scaled: buffered.as_ref().map(|_| Range::of(scaled.entries.iter().map(|e| e.cbar))),
        classical: (&classical).into(),
        buffered: buffered.as_ref().map(Into::into),
        containment,
        files,
    };
    write_json(&dir.join(CONTOUR_REPORT), &report)?;
    Ok(ContourOutcome { support, classical, buffered, records, report })
}

/// Source of a scalar performance sample.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskInput {
    /// Numbers separated by whitespace or commas; `#` starts a comment.
    File(PathBuf),
    Normal { mu: f64, sigma: f64, samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalReference {
    pub mu: f64,
    pub sigma: f64,
    pub p_f: f64,
    pub alpha: f64,
    pub q_alpha: f64,
    pub p_f_buffered: f64,
    /// Monte Carlo standard error of `p_f_buffered` at this sample size.
    pub p_f_buffered_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskOutput {
    pub source: String,
    pub report: RiskReport,
    pub p_f_buffered_std_error: Option<f64>,
    pub oracle: Option<NormalReference>,
}

pub fn parse_values(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for token in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match token.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(CliError::file(path, format!("line {}: cannot parse {token:?} as a finite number", i + 1))),
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::file(path, "no values"));
    }
    Ok(values)
}

/// Failure and buffered failure probabilities of a scalar sample.
pub fn run_riskcalc(input: &RiskInput) -> Result<RiskOutput> {
    let (source, values, reference) = match input {
        RiskInput::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::file(path, e.to_string()))?;
            (path.display().to_string(), parse_values(&text, path)?, None)
        }
        RiskInput::Normal { mu, sigma, samples, seed } => {
            if *samples == 0 {
                return Err(CliError::Usage("samples: must be positive".into()));
            }
            let m = BivariateNormal { mean: [*mu, 0.0], sd: [*sigma, 1.0] };
            m.validate().map_err(|e| CliError::Usage(format!("normal: {e}")))?;
            let rows = joint_sample(&m, *samples, *seed)?;
            let values = rows.rows().iter().map(|r| r[0]).collect();
            let oracle = normal_cvar_oracle(*mu, *sigma).ok().map(|o| NormalReference {
                mu: *mu,
                sigma: *sigma,
                p_f: std_normal_sf(-mu / sigma),
                alpha: o.alpha,
                q_alpha: o.q_alpha,
                p_f_buffered: o.p_f_buffered,
                p_f_buffered_std_error: o.std_error(*sigma, *samples),
            });
            (format!("normal(mu={mu}, sigma={sigma}, n={samples}, seed={seed})"), values, oracle)
        }
    };
    let est = buffered_estimate(values)?;
    Ok(RiskOutput { source, report: est.report, p_f_buffered_std_error: est.std_error, oracle: reference })
}

/// Text table of estimates beside the analytic values.
pub fn side_by_side(out: &RiskOutput) -> Option<String> {
    let o = out.oracle?;
    let r = &out.report;
    let q = r.q_alpha.map(|q| format!("{q:.6}")).unwrap_or_else(|| "-".into());
    Some(format!(
        "quantity        estimate      analytic\n\
         p_f             {:<13.6} {:.6}\n\
         alpha           {:<13.6} {:.6}\n\
         q_alpha         {:<13} {:.6}\n\
         p_f_buffered    {:<13.6} {:.6}\n",
        r.p_f, o.p_f, r.alpha, o.alpha, q, o.q_alpha, r.p_f_buffered, o.p_f_buffered
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub contour: String,
    pub exceedence: VerificationReport,
    pub gamma_buffered: Option<VerificationReport>,
    /// Convexity of the polygons rebuilt from the stored offsets.
    pub classical: PolygonSummary,
    pub buffered: Option<PolygonSummary>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: VerifyReport,
    pub path: PathBuf,
}

/// Rebuilds the support values stored in a contour CSV.
pub fn support_from_records(records: &[ContourRecord], config: &RunConfig, pe: f64, path: &Path) -> Result<(DirectionGrid, DirectionalSupport)> {
    let grid = DirectionGrid::new(records.len())?;
    let tol = 1e-12;
    for (j, r) in records.iter().enumerate() {
        let u = grid.unit(j);
        for (name, got, want) in [("theta", r.theta, grid.angles()[j]), ("ux", r.ux, u[0]), ("uy", r.uy, u[1])] {
            if (got - want).abs() > tol {
                return Err(CliError::file(path, format!("line {}: column {name:?} is {got}, grid of {} expects {want}", j + 2, records.len())));
            }
        }
    }
    let n = config.samples;
    let tail_count = n - order_index(1.0 - pe, n);
    let entries = records
        .iter()
        .map(|r| SupportEntry { theta: r.theta, c: r.c, cbar: r.cbar.unwrap_or(f64::NAN), tail_count })
        .collect();
    let support = DirectionalSupport { pe, sample_size: n, construction_seed: config.seed, min_tail: config.min_tail, entries };
    Ok((grid, support))
}

/// Checks a contour CSV against fresh draws from the configured model.
pub fn run_verify(config: &RunConfig, contour: &Path) -> Result<VerifyOutcome> {
    let (model, pe) = config.validate()?;
    let records = read_contour_csv(contour)?;
    let (grid, support) = support_from_records(&records, config, pe, contour)?;
    let classical = polygon_from_offsets(&grid, &support.classical_offsets(), ContourKind::Classical, DEFAULT_RELATIVE_TOLERANCE)?;
    let buffered = match records.iter().map(|r| r.cbar_scaled).collect::<Option<Vec<f64>>>() {
        Some(offsets) => Some(polygon_from_offsets(&grid, &offsets, ContourKind::Buffered, DEFAULT_RELATIVE_TOLERANCE)?),
        None => None,
    };
    let (n_verify, seed) = (config.verify_samples(), config.verify_seed());
    let mut warnings = Vec::new();
    if seed == config.seed {
        warnings.push(format!("verification seed {seed} equals the construction seed; estimates are optimistic"));
    }
    let exceedence = check_exceedence(&model, &support, &grid, pe, n_verify, seed)?;
    let gamma_buffered = if records[0].cbar.is_some() {
        Some(check_gamma_buffered(&model, &support, &grid, pe, n_verify, seed)?)
    } else {
        None
    };
    let pass = exceedence.pass && gamma_buffered.as_ref().is_none_or(|g| g.pass);
    let report = VerifyReport {
        config: config.clone(),
        resolved: resolved(config, pe, &model),
        contour: contour.display().to_string(),
        exceedence,
        gamma_buffered,
        classical: (&classical).into(),
        buffered: buffered.as_ref().map(Into::into),
        warnings,
        pass,
    };
    let path = out_dir(config)?.join(VERIFY_REPORT);
    write_json(&path, &report)?;
    Ok(VerifyOutcome { report, path })
}

/// Writes the raw sample used by `contour` for the same configuration.
pub fn run_sample(config: &RunConfig) -> Result<PathBuf> {
    let model = config.model.resolve()?;
    if config.samples == 0 {
        return Err(CliError::Usage("samples: must be positive".into()));
    }
    let samples = joint_sample(&model, config.samples, config.seed)?;
    let path = out_dir(config)?.join(SAMPLES_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::file(&path, e.to_string()))?;
    let io = |e: csv::Error| CliError::file(&path, e.to_string());
    w.write_record(model.columns()).map_err(io)?;
    for r in samples.rows() {
        w.write_record([format_real(r[0]), format_real(r[1])]).map_err(io)?;
    }
    w.flush()?;
    Ok(path)
}
