//! Domain descriptions and the interior grids built from them.
//!
//! Grid points sit at `x_p = (j_p + 1) h_p` for `j_p = 0..m_p`, with the
//! boundary at `0` and `extent_p`. Every value outside the interior set
//! (outside the box, or masked out) is identified with zero.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("shape {shape:?} needs dimension {expected}, got n = {got}")]
    DimensionMismatch { shape: Shape, expected: usize, got: usize },
    #[error("expected {expected} {what}, got {got}")]
    AxisCount { what: &'static str, expected: usize, got: usize },
    #[error("axis {axis}: {what} must be positive and finite, got {value}")]
    NonPositive { axis: usize, what: &'static str, value: f64 },
    #[error("axis {axis}: extent {extent} is not an integer multiple of h = {h}")]
    Incommensurate { axis: usize, extent: f64, h: f64 },
    #[error("axis {axis}: {points} interior points, need at least {required} for order l = {l}")]
    GridTooSmall { axis: usize, points: usize, required: usize, l: u32 },
    #[error("operator order l must be at least 1")]
    ZeroOrder,
    #[error("mask: {0}")]
    Mask(String),
    #[error("domain has no interior points")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Interval,
    Rectangle,
    Box,
    /// Rectangle whose interior is restricted by a coarse bitmap.
    MaskedRectangle,
}

impl Shape {
    fn dimension(self) -> usize {
        match self {
            Shape::Interval => 1,
            Shape::Rectangle | Shape::MaskedRectangle => 2,
            Shape::Box => 3,
        }
    }
}

/// Declarative description of the domain, grid and operator order.
///
/// For [`Shape::MaskedRectangle`] the `mask` rows are stretched over the
/// rectangle: row `r` covers the `r`-th band along axis 1 (counted from
/// `x_1 = 0`), character `c` the `c`-th band along axis 0. `#` or `1` marks
/// an inside cell, `.` or `0` an outside one. A grid point is interior when
/// every bitmap cell touching it is inside, so points on the edge of the
/// masked region are boundary points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub n: usize,
    pub extents: Vec<f64>,
    pub h: Vec<f64>,
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<String>>,
}

impl DomainSpec {
    /// `[0, extent]` with `points` interior grid points.
    pub fn interval(extent: f64, points: usize, l: u32) -> Self {
        Self::uniform(Shape::Interval, &[extent], points, l)
    }

    pub fn rectangle(extents: [f64; 2], points: usize, l: u32) -> Self {
        Self::uniform(Shape::Rectangle, &extents, points, l)
    }

    pub fn cube(extents: [f64; 3], points: usize, l: u32) -> Self {
        Self::uniform(Shape::Box, &extents, points, l)
    }

    /// Unit square with the quadrant `[1/2, 1] x [1/2, 1]` removed.
    pub fn l_shape(points: usize, l: u32) -> Self {
        let mut spec = Self::uniform(Shape::MaskedRectangle, &[1.0, 1.0], points, l);
        spec.mask = Some(vec!["##".into(), "#.".into()]);
        spec
    }

    fn uniform(shape: Shape, extents: &[f64], points: usize, l: u32) -> Self {
        Self {
            shape,
            n: extents.len(),
            extents: extents.to_vec(),
            h: extents.iter().map(|e| e / (points as f64 + 1.0)).collect(),
            l,
            mask: None,
        }
    }

    pub fn with_order(&self, l: u32) -> Self {
        Self { l, ..self.clone() }
    }

    /// Same domain with every spacing multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            h: self.h.iter().map(|h| h * factor).collect(),
            ..self.clone()
        }
    }

    /// Validates the spec and builds its interior grid.
    pub fn build_grid(&self) -> Result<Arc<Grid>, DomainError> {
        Grid::new(self).map(Arc::new)
    }

    fn axis_points(&self) -> Result<Vec<usize>, DomainError> {
        if self.l == 0 {
            return Err(DomainError::ZeroOrder);
        }
        let expected = self.shape.dimension();
        if self.n != expected {
            return Err(DomainError::DimensionMismatch {
                shape: self.shape,
                expected,
                got: self.n,
            });
        }
        for (what, len) in [("extents", self.extents.len()), ("spacings", self.h.len())] {
            if len != self.n {
                return Err(DomainError::AxisCount { what, expected: self.n, got: len });
            }
        }
        let required = 2 * self.l as usize + 3;
        let mut points = Vec::with_capacity(self.n);
        for axis in 0..self.n {
            let (extent, h) = (self.extents[axis], self.h[axis]);
            for (what, value) in [("extent", extent), ("h", h)] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(DomainError::NonPositive { axis, what, value });
                }
            }
            let cells = extent / h;
            let rounded = cells.round();
            if (cells - rounded).abs() > 1e-8 * cells.max(1.0) || rounded < 2.0 {
                return Err(DomainError::Incommensurate { axis, extent, h });
            }
            let m = rounded as usize - 1;
            if m < required {
                return Err(DomainError::GridTooSmall {
                    axis,
                    points: m,
                    required,
                    l: self.l,
                });
            }
            points.push(m);
        }
        Ok(points)
    }
}

const NONE: usize = usize::MAX;

/// Interior grid of a validated [`DomainSpec`].
///
/// Bounding-box points are numbered with axis 0 fastest; interior points are
/// numbered in the same order, so interior index differences are bounded by
/// bounding-box offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: DomainSpec,
    dims: [usize; 3],
    strides: [usize; 3],
    spacing: [f64; 3],
    box_to_interior: Vec<usize>,
    interior: Vec<[usize; 3]>,
}

impl Grid {
    fn new(spec: &DomainSpec) -> Result<Self, DomainError> {
        let points = spec.axis_points()?;
        let mut dims = [1usize; 3];
        let mut spacing = [1.0; 3];
        for (axis, &m) in points.iter().enumerate() {
            dims[axis] = m;
            spacing[axis] = spec.h[axis];
        }
        let strides = [1, dims[0], dims[0] * dims[1]];
        let total = dims.iter().product::<usize>();

        let inside = match (&spec.shape, &spec.mask) {
            (Shape::MaskedRectangle, Some(rows)) => Some(Bitmap::parse(rows)?),
            (Shape::MaskedRectangle, None) => {
                return Err(DomainError::Mask("masked-rectangle requires a mask".into()))
            }
            (_, Some(_)) => {
                return Err(DomainError::Mask(format!("shape {:?} does not take a mask", spec.shape)))
            }
            (_, None) => None,
        };

        let mut box_to_interior = vec![NONE; total];
        let mut interior = Vec::new();
        for idx in 0..total {
            let multi = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
            let keep = match &inside {
                Some(bitmap) => bitmap.contains(
                    (multi[0] + 1) as f64 / (dims[0] + 1) as f64,
                    (multi[1] + 1) as f64 / (dims[1] + 1) as f64,
                ),
                None => true,
            };
            if keep {
                box_to_interior[idx] = interior.len();
                interior.push(multi);
            }
        }
        if interior.is_empty() {
            return Err(DomainError::Empty);
        }
        Ok(Self {
            spec: spec.clone(),
            dims,
            strides,
            spacing,
            box_to_interior,
            interior,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn order(&self) -> u32 {
        self.spec.l
    }

    /// Number of interior unknowns.
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// Interior points per axis of the bounding box.
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.n()]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn multi_index(&self, i: usize) -> [usize; 3] {
        self.interior[i]
    }

    pub fn coordinate(&self, i: usize, axis: usize) -> f64 {
        (self.interior[i][axis] + 1) as f64 * self.spacing[axis]
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.n()).map(|p| self.coordinate(i, p)).collect()
    }

    /// Interior index of the point at `multi + offset`, or `None` when that
    /// point is exterior.
    pub fn neighbor(&self, multi: [usize; 3], offset: [isize; 3]) -> Option<usize> {
        let mut idx = 0;
        for axis in 0..3 {
            let j = multi[axis] as isize + offset[axis];
            if j < 0 || j >= self.dims[axis] as isize {
                return None;
            }
            idx += j as usize * self.strides[axis];
        }
        match self.box_to_interior[idx] {
            NONE => None,
            i => Some(i),
        }
    }

    /// Whether every point within box distance `radius` of interior point `i`
    /// is itself interior.
    pub fn has_margin(&self, i: usize, radius: usize) -> bool {
        let r = radius as isize;
        let span = |axis: usize| if axis < self.n() { -r..=r } else { 0..=0 };
        let multi = self.interior[i];
        span(0).all(|a| span(1).all(|b| span(2).all(|c| self.neighbor(multi, [a, b, c]).is_some())))
    }

    /// Euclidean inner product on interior values.
    pub fn dot(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn norm(x: &[f64]) -> f64 {
        Self::dot(x, x).sqrt()
    }
}

struct Bitmap {
    rows: Vec<Vec<bool>>,
    cols: usize,
}

impl Bitmap {
    fn parse(rows: &[String]) -> Result<Self, DomainError> {
        if rows.is_empty() {
            return Err(DomainError::Mask("no rows".into()));
        }
        let parsed = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|c| match c {
                        '#' | '1' => Ok(true),
                        '.' | '0' => Ok(false),
                        other => Err(DomainError::Mask(format!("unexpected character {other:?}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cols = parsed[0].len();
        if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
            return Err(DomainError::Mask("rows must be non-empty and of equal length".into()));
        }
        Ok(Self { rows: parsed, cols })
    }

    /// `u`, `v` are fractional positions in `(0, 1)` along axes 0 and 1.
    fn contains(&self, u: f64, v: f64) -> bool {
        let touching = |t: f64, cells: usize| -> Vec<usize> {
            let s = t * cells as f64;
            let nearest = s.round();
            if (s - nearest).abs() < 1e-9 {
                let k = nearest as usize;
                [k.checked_sub(1), Some(k).filter(|&k| k < cells)].into_iter().flatten().collect()
            } else {
                vec![(s.floor() as usize).min(cells - 1)]
            }
        };
        let cs = touching(u, self.cols);
        let rs = touching(v, self.rows.len());
        rs.iter().all(|&r| cs.iter().all(|&c| self.rows[r][c]))
    }
}

/// Values over the interior points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    grid: Arc<Grid>,
}

impl GridFunction {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: Arc::clone(grid),
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self, DomainError> {
        if values.len() != grid.len() {
            return Err(DomainError::AxisCount {
                what: "grid values",
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            grid: Arc::clone(grid),
        })
    }

    /// Samples `f` at every interior point.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self {
            values,
            grid: Arc::clone(grid),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn norm(&self) -> f64 {
        Grid::norm(&self.values)
    }

    pub fn dot(&self, other: &GridFunction) -> f64 {
        Grid::dot(&self.values, &other.values)
    }
}
