//! Classical and buffered Monte Carlo contours.
//!
//! For every direction `u_j` of a uniform grid, the shared sample is projected
//! onto `u_j`. The classical support value `C_j` is the `(1 − P_e)` order
//! statistic of the projections and the buffered support value `C̄_j` is the
//! mean of the projections above it. The contour is the boundary of the
//! intersection of the halfplanes `u_j′v ≤ c_j`; its vertices are the
//! intersections of adjacent supporting lines.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::SampleSet;
use crate::risk::{order_index, ScalarSample};
use crate::{Error, Result};

pub const DEFAULT_DIRECTIONS: usize = 360;
pub const DEFAULT_MIN_TAIL: usize = 20;
/// Halfplane slack, relative to `max(1, max_j |c_j|)`, allowed before a vertex
/// is flagged as violating a non-adjacent constraint.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Uniform grid of `m` unit vectors `u_j = (cos θ_j, sin θ_j)`, `θ_j = 2πj/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    angles: Vec<f64>,
    units: Vec<[f64; 2]>,
}

impl DirectionGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("direction grid needs at least one direction".into()));
        }
        let angles: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let units = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
        Ok(Self { angles, units })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn units(&self) -> &[[f64; 2]] {
        &self.units
    }

    pub fn unit(&self, j: usize) -> [f64; 2] {
        self.units[j]
    }
}

#[inline]
fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Sorted projections `u′V_r`.
pub fn project(samples: &SampleSet, u: [f64; 2]) -> ScalarSample {
    let values = samples.rows().iter().map(|r| dot(u, *r)).collect();
    ScalarSample::new(values).expect("sample sets are nonempty and projections of finite rows are not NaN")
}

/// One-based `k` with `k/n ≈ 1 − pe`, checked against the tail policy.
fn support_index(n: usize, pe: f64, min_tail: usize, direction: usize) -> Result<usize> {
    if !(pe > 0.0 && pe < 1.0) {
        return Err(Error::Input(format!("exceedence probability must lie in (0, 1), got {pe}")));
    }
    let k = order_index(1.0 - pe, n);
    let tail_count = n - k;
    let min_tail = min_tail.max(1);
    if tail_count < min_tail {
        return Err(Error::InsufficientTail {
            direction,
            tail_count,
            min_tail,
            required_samples: (min_tail as f64 / pe).ceil() as u64,
        });
    }
    Ok(k)
}

/// Classical support estimate `Ĉ = Y_(k)`.
pub fn estimate_c(s: &ScalarSample, pe: f64, min_tail: usize) -> Result<f64> {
    let k = support_index(s.len(), pe, min_tail, 0)?;
    Ok(s.values()[k - 1])
}

/// Buffered support estimate: mean of the `n − k` largest values.
pub fn estimate_cbar(s: &ScalarSample, pe: f64, min_tail: usize) -> Result<f64> {
    let k = support_index(s.len(), pe, min_tail, 0)?;
    let tail = &s.values()[k..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// `a · C̄` for the inflated buffered contour.
pub fn scale_support(cbar: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Input(format!("scale factor must be > 0, got {a}")));
    }
    Ok(a * cbar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub theta: f64,
    pub c: f64,
    pub cbar: f64,
    pub tail_count: usize,
}

/// Per-direction support values, all estimated from one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalSupport {
    pub pe: f64,
    pub sample_size: usize,
    pub construction_seed: u64,
    pub min_tail: usize,
    pub entries: Vec<SupportEntry>,
}

impl DirectionalSupport {
    pub fn classical_offsets(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.c).collect()
    }

    pub fn buffered_offsets(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.cbar).collect()
    }

    /// Copy with every `C̄_j` replaced by `a · C̄_j`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.cbar = scale_support(e.cbar, a)?;
        }
        Ok(out)
    }

    /// Indices of directions with `C̄_j ≤ C_j`.
    pub fn dominance_failures(&self) -> Vec<usize> {
        self.entries.iter().enumerate().filter(|(_, e)| !(e.cbar > e.c)).map(|(j, _)| j).collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The `count` largest projections onto `u`, sorted ascending.
fn top_projections(rows: &[[f64; 2]], u: [f64; 2], count: usize) -> Vec<f64> {
    if count > rows.len() / 64 {
        let mut all: Vec<f64> = rows.iter().map(|r| dot(u, *r)).collect();
        let cut = all.len() - count;
        if cut > 0 {
            all.select_nth_unstable_by(cut, f64::total_cmp);
        }
        let mut top = all.split_off(cut);
        top.sort_unstable_by(f64::total_cmp);
        return top;
    }
    let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::with_capacity(count + 1);
    for r in rows {
        let y = dot(u, *r);
        if heap.len() < count {
            heap.push(Reverse(Key(y)));
        } else if let Some(mut min) = heap.peek_mut() {
            if y > min.0 .0 {
                *min = Reverse(Key(y));
            }
        }
    }
    let mut top: Vec<f64> = heap.into_iter().map(|Reverse(Key(y))| y).collect();
    top.sort_unstable_by(f64::total_cmp);
    top
}

/// Estimates `C_j` and `C̄_j` for every grid direction.
///
/// Only the `n − k + 1` largest projections are kept per direction, and they
/// are summed in ascending order, so the values agree bit for bit with
/// [`estimate_c`] and [`estimate_cbar`] on the fully sorted projection.
pub fn build_support(samples: &SampleSet, grid: &DirectionGrid, pe: f64, min_tail: usize) -> Result<DirectionalSupport> {
    let n = samples.len();
    let k = support_index(n, pe, min_tail, 0)?;
    let keep = n - k + 1;
    let rows = samples.rows();
    let entries = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let top = top_projections(rows, grid.unit(j), keep);
            let tail = &top[1..];
            SupportEntry {
                theta: grid.angles()[j],
                c: top[0],
                cbar: tail.iter().sum::<f64>() / tail.len() as f64,
                tail_count: tail.len(),
            }
        })
        .collect();
    Ok(DirectionalSupport {
        pe,
        sample_size: n,
        construction_seed: samples.seed(),
        min_tail: min_tail.max(1),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourKind {
    Classical,
    Buffered,
}

impl fmt::Display for ContourKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContourKind::Classical => "classical",
            ContourKind::Buffered => "buffered",
        })
    }
}

/// Closed polygon from adjacent-halfplane intersections.
///
/// Vertex `j` lies on the supporting lines of directions `j` and `j + 1 (mod m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPolygon {
    pub kind: ContourKind,
    pub vertices: Vec<[f64; 2]>,
    /// Whether vertex `j` satisfies every halfplane within `tolerance`.
    pub convexity_flags: Vec<bool>,
    pub normals: Vec<[f64; 2]>,
    pub offsets: Vec<f64>,
    pub tolerance: f64,
}

impl ContourPolygon {
    pub fn is_valid(&self) -> bool {
        self.convexity_flags.iter().all(|f| *f)
    }

    pub fn failing_vertices(&self) -> Vec<usize> {
        self.convexity_flags.iter().enumerate().filter(|(_, f)| !**f).map(|(j, _)| j).collect()
    }

    /// Largest `u_i′v − c_i` over all halfplanes.
    pub fn max_violation(&self, v: [f64; 2]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(u, c)| dot(*u, v) - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_point(&self, v: [f64; 2], tol: f64) -> bool {
        self.max_violation(v) <= tol
    }
}

pub fn build_polygon(support: &DirectionalSupport, grid: &DirectionGrid, kind: ContourKind) -> Result<ContourPolygon> {
    let offsets = match kind {
        ContourKind::Classical => support.classical_offsets(),
        ContourKind::Buffered => support.buffered_offsets(),
    };
    polygon_from_offsets(grid, &offsets, kind, DEFAULT_RELATIVE_TOLERANCE)
}

/// Intersects adjacent supporting lines `u_j′v = c_j`, `u_{j+1}′v = c_{j+1}`.
pub fn polygon_from_offsets(grid: &DirectionGrid, offsets: &[f64], kind: ContourKind, relative_tolerance: f64) -> Result<ContourPolygon> {
    let m = grid.len();
    if m < 3 {
        return Err(Error::Geometry(format!("a polygon needs at least 3 directions, got {m}")));
    }
    if offsets.len() != m {
        return Err(Error::Geometry(format!("{} offsets for {m} directions", offsets.len())));
    }
    if offsets.iter().any(|c| !c.is_finite()) {
        return Err(Error::Geometry("support offsets must be finite".into()));
    }
    let scale = offsets.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let tolerance = relative_tolerance * scale;
    let normals = grid.units().to_vec();
    let mut vertices = Vec::with_capacity(m);
    for j in 0..m {
        let next = (j + 1) % m;
        let (a, b) = (normals[j], normals[next]);
        let det = a[0] * b[1] - a[1] * b[0];
        if det.abs() < 1e-12 {
            return Err(Error::Geometry(format!("directions {j} and {next} are parallel")));
        }
        let (cj, cn) = (offsets[j], offsets[next]);
        vertices.push([(cj * b[1] - a[1] * cn) / det, (a[0] * cn - cj * b[0]) / det]);
    }
    let convexity_flags = vertices
        .iter()
        .map(|v| normals.iter().zip(offsets).all(|(u, c)| dot(*u, *v) <= c + tolerance))
        .collect();
    Ok(ContourPolygon { kind, vertices, convexity_flags, normals, offsets: offsets.to_vec(), tolerance })
}

/// Whether every vertex of `inner` satisfies every halfplane of `outer`
/// within `outer.tolerance`. Both polygons must pass their convexity checks.
pub fn polygon_contains(outer: &ContourPolygon, inner: &ContourPolygon) -> Result<bool> {
    for p in [outer, inner] {
        if !p.is_valid() {
            return Err(Error::InvalidPolygon { kind: p.kind.to_string(), failing: p.failing_vertices() });
        }
    }
    Ok(vertices_inside(outer, inner))
}

/// Indices of `inner` vertices that fall outside `outer`, regardless of
/// either polygon's convexity flags.
pub fn vertices_outside(outer: &ContourPolygon, inner: &ContourPolygon) -> Vec<usize> {
    (0..inner.vertices.len()).filter(|&j| !outer.contains_point(inner.vertices[j], outer.tolerance)).collect()
}

pub fn vertices_inside(outer: &ContourPolygon, inner: &ContourPolygon) -> bool {
    inner.vertices.iter().all(|v| outer.contains_point(*v, outer.tolerance))
}
