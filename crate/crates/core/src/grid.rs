//! Uniform rectangular grids, node-valued fields on them, and the bilinear /
//! linear interpolation used to read grid solutions at arbitrary sensor and
//! ghost coordinates.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fractional offsets this close to a node are treated as the node.
const NODE_SNAP: f64 = 1e-9;

/// Relative slack allowed when testing whether a coordinate lies on the
/// closed domain; points inside the slack are clamped onto the boundary.
const EDGE_SLACK: f64 = 1e-12;

/// A location in space, or in space-time for dynamic problems (`t` is
/// ignored by static fields).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const fn xy(x: f64, y: f64) -> Self {
        Point { x, y, t: 0.0 }
    }

    pub const fn xyt(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }
}

/// Closed axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`. A
/// degenerate rectangle (zero width or height) is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Rect {
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !ok || self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::invalid(
                "region",
                "bounds must be finite and ordered",
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.x_min, other.y_min) && self.contains(other.x_max, other.y_max)
    }

    /// Point at fractional coordinates `(s, r) ∈ [0, 1]²`.
    pub fn lerp(&self, s: f64, r: f64) -> (f64, f64) {
        (
            self.x_min + s * (self.x_max - self.x_min),
            self.y_min + r * (self.y_max - self.y_min),
        )
    }
}

/// Box `[x_min, x_max] × [y_min, y_max]` discretized by `nx × ny` nodes,
/// boundary nodes included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain2D {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Domain2D {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        let d = Domain2D {
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            nx,
            ny,
        };
        d.validate()?;
        Ok(d)
    }

    /// Square `[lo, hi]²` with `n × n` nodes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new((lo, hi), (lo, hi), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::invalid(
                "domain",
                "bounds must be finite with min < max",
            ));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::invalid(
                "domain",
                "at least 3 nodes per axis are required",
            ));
        }
        Ok(())
    }

    /// Same box at a different resolution.
    pub fn rect(&self) -> Rect {
        Rect::new((self.x_min, self.x_max), (self.y_min, self.y_max))
    }

    pub fn with_resolution(&self, nx: usize, ny: usize) -> Self {
        Domain2D { nx, ny, ..*self }
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Row-major node index: `j` selects the row (y), `i` the column (x).
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.hx()
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.hy()
        }
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (self.x(i), self.y(j))))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.locate(x, y).is_ok()
    }

    /// Bilinear stencil (four node indices and weights) for a point on the
    /// closed domain.
    pub fn stencil(&self, x: f64, y: f64) -> Result<Stencil> {
        let ((i, fx), (j, fy)) = self.locate(x, y)?;
        let i0 = self.index(i, j);
        let i1 = self.index(i, j + 1);
        Ok(Stencil {
            nodes: [i0, i0 + 1, i1, i1 + 1],
            weights: [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
        })
    }

    fn locate(&self, x: f64, y: f64) -> Result<((usize, f64), (usize, f64))> {
        let axis = |v: f64, lo: f64, hi: f64, n: usize| -> Option<(usize, f64)> {
            let width = hi - lo;
            let slack = EDGE_SLACK * width;
            if !(v >= lo - slack && v <= hi + slack) {
                return None;
            }
            let mut s = ((v - lo) / width * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let nearest = s.round();
            if (s - nearest).abs() < NODE_SNAP {
                s = nearest;
            }
            let cell = (s.floor() as usize).min(n - 2);
            Some((cell, s - cell as f64))
        };
        match (
            axis(x, self.x_min, self.x_max, self.nx),
            axis(y, self.y_min, self.y_max, self.ny),
        ) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::OutOfDomain { x, y }),
        }
    }
}

/// Four-node bilinear interpolation weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub nodes: [usize; 4],
    pub weights: [f64; 4],
}

/// `k`-component field stored at the nodes of a [`Domain2D`], row-major by
/// node with components interleaved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField2D {
    domain: Domain2D,
    components: usize,
    values: Vec<f64>,
}

impl GridField2D {
    pub fn zeros(domain: Domain2D, components: usize) -> Self {
        GridField2D {
            domain,
            components,
            values: vec![0.0; domain.node_count() * components],
        }
    }

    pub fn from_values(domain: Domain2D, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 || values.len() != domain.node_count() * components {
            return Err(Error::Shape(alloc::format!(
                "{} values for {} nodes with {} components",
                values.len(),
                domain.node_count(),
                components
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field", "values must be finite"));
        }
        Ok(GridField2D {
            domain,
            components,
            values,
        })
    }

    /// Evaluates `f(x, y)` at every node.
    pub fn from_fn<const K: usize>(domain: Domain2D, f: impl Fn(f64, f64) -> [f64; K]) -> Self {
        let mut values = Vec::with_capacity(domain.node_count() * K);
        for (x, y) in domain.nodes() {
            values.extend_from_slice(&f(x, y));
        }
        GridField2D {
            domain,
            components: K,
            values,
        }
    }

    pub fn domain(&self) -> &Domain2D {
        &self.domain
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, c: usize) -> f64 {
        self.values[self.domain.index(i, j) * self.components + c]
    }

    /// Bilinear interpolation at `(x, y)`; exact at nodes and for affine
    /// fields.
    pub fn sample_space(&self, x: f64, y: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.components];
        self.sample_into(x, y, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, x: f64, y: f64, out: &mut [f64]) -> Result<()> {
        let st = self.domain.stencil(x, y)?;
        self.apply_stencil(&st, out);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_stencil(&self, st: &Stencil, out: &mut [f64]) {
        let k = self.components;
        for (c, o) in out.iter_mut().enumerate().take(k) {
            let mut acc = 0.0;
            for (&n, &w) in st.nodes.iter().zip(&st.weights) {
                acc += w * self.values[n * k + c];
            }
            *o = acc;
        }
    }
}

/// A trajectory of `nt ≥ 2` frames at uniformly spaced times spanning
/// `[t0, t1]`, all on one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    t0: f64,
    t1: f64,
    frames: Vec<GridField2D>,
}

impl SpaceTimeField {
    pub fn new(t0: f64, t1: f64, frames: Vec<GridField2D>) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::invalid("time range", "t0 < t1 required"));
        }
        if frames.len() < 2 {
            return Err(Error::invalid("frames", "at least two frames required"));
        }
        let (d, k) = (frames[0].domain, frames[0].components);
        if frames.iter().any(|f| f.domain != d || f.components != k) {
            return Err(Error::Shape(
                "frames disagree on domain or components".into(),
            ));
        }
        Ok(SpaceTimeField { t0, t1, frames })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn nt(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[GridField2D] {
        &self.frames
    }

    pub fn domain(&self) -> &Domain2D {
        &self.frames[0].domain
    }

    pub fn components(&self) -> usize {
        self.frames[0].components
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.frames.len() - 1) as f64
    }

    pub fn frame_time(&self, k: usize) -> f64 {
        if k + 1 == self.frames.len() {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    /// Index of the stored frame closest to `t` (clamped to the range).
    pub fn nearest_frame(&self, t: f64) -> usize {
        let s = ((t - self.t0) / self.dt()).round();
        (s.max(0.0) as usize).min(self.frames.len() - 1)
    }

    /// Bracketing frame `k` and weight `w` of frame `k + 1`.
    pub fn time_bracket(&self, t: f64) -> Result<(usize, f64)> {
        let slack = EDGE_SLACK * (self.t1 - self.t0);
        if !(t >= self.t0 - slack && t <= self.t1 + slack) {
            return Err(Error::OutOfTimeRange {
                t,
                t0: self.t0,
                t1: self.t1,
            });
        }
        let last = (self.frames.len() - 1) as f64;
        let s = ((t - self.t0) / (self.t1 - self.t0) * last).clamp(0.0, last);
        let k = (s.floor() as usize).min(self.frames.len() - 2);
        Ok((k, s - k as f64))
    }

    /// Linear in time between the bracketing frames, bilinear in space.
    pub fn sample_spacetime(&self, x: f64, y: f64, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.components()];
        self.sample_into(x, y, t, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, x: f64, y: f64, t: f64, out: &mut [f64]) -> Result<()> {
        let (k, w) = self.time_bracket(t)?;
        let st = self.domain().stencil(x, y)?;
        let n = self.components();
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        self.frames[k].apply_stencil(&st, &mut a[..n]);
        self.frames[k + 1].apply_stencil(&st, &mut b[..n]);
        for c in 0..n {
            out[c] = (1.0 - w) * a[c] + w * b[c];
        }
        Ok(())
    }
}
