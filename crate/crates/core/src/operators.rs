//! Finite-difference operators on interior grids.
//!
//! `L_h = -Δ_h` is the `(2n + 1)`-point stencil with exterior values set to
//! zero. The order-`l` polyharmonic operator is the full-grid stencil of
//! `L^l` applied to the zero extension and restricted back to the interior,
//! `P L^l E`. That keeps `u` and its first `l - 1` normal differences pinned
//! to zero at the boundary, whereas the plain composition `(P L E)^l`
//! (see [`operator_power`]) only pins `u` itself.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::banded::BandedMatrix;
use crate::domain::{DomainError, DomainSpec, Grid, GridFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("axis {axis} out of range for dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("operator is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: operator has {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid function belongs to a different grid")]
    GridMismatch,
    #[error("support of u reaches grid cell {cell:?}, closer than {margin} cells to the boundary")]
    SupportTooCloseToBoundary { cell: Vec<usize>, margin: usize },
    #[error("dense assembly of dimension {dim} exceeds the limit {limit}")]
    TooLargeForDense { dim: usize, limit: usize },
    #[error("matrix must be square and symmetric")]
    InvalidMatrix,
}

/// Constant-coefficient stencil: `(offset, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    entries: Vec<([isize; 3], f64)>,
}

impl Stencil {
    /// The `(2n + 1)`-point stencil of `-Δ_h`.
    pub fn negative_laplacian(grid: &Grid) -> Self {
        let mut centre = 0.0;
        let mut entries = Vec::new();
        for axis in 0..grid.n() {
            let w = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
            centre += 2.0 * w;
            for dir in [-1isize, 1] {
                let mut off = [0; 3];
                off[axis] = dir;
                entries.push((off, -w));
            }
        }
        entries.push(([0; 3], centre));
        Self::normalized(entries)
    }

    /// Full-grid convolution `self * other`.
    pub fn compose(&self, other: &Stencil) -> Stencil {
        let mut acc = Vec::with_capacity(self.entries.len() * other.entries.len());
        for (a, ca) in &self.entries {
            for (b, cb) in &other.entries {
                acc.push(([a[0] + b[0], a[1] + b[1], a[2] + b[2]], ca * cb));
            }
        }
        Self::normalized(acc)
    }

    pub fn power(&self, l: u32) -> Stencil {
        let mut out = self.clone();
        for _ in 1..l {
            out = out.compose(self);
        }
        out
    }

    fn normalized(entries: Vec<([isize; 3], f64)>) -> Self {
        let mut merged: BTreeMap<[isize; 3], f64> = BTreeMap::new();
        for (off, c) in entries {
            *merged.entry(off).or_insert(0.0) += c;
        }
        Self {
            entries: merged.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[([isize; 3], f64)] {
        &self.entries
    }

    /// Largest `|offset|` along any axis.
    pub fn radius(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|(o, _)| o.iter().map(|x| x.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Stencil { grid: Arc<Grid>, stencil: Stencil },
    Power { base: Arc<DiscreteOperator>, exponent: u32 },
    Dense(Arc<DMatrix<f64>>),
}

/// Symmetric linear operator on the interior space of a grid (or on `R^d`
/// for dense test operators).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    kind: Kind,
    dim: usize,
    symmetric: bool,
    positive_definite: bool,
}

impl DiscreteOperator {
    /// Wraps a dense symmetric matrix. The matrix is trusted to be positive
    /// definite if `positive_definite` is set.
    pub fn from_dense(matrix: DMatrix<f64>, positive_definite: bool) -> Result<Self, OperatorError> {
        if !matrix.is_square() || (&matrix - matrix.transpose()).amax() > 1e-14 * matrix.amax().max(1.0) {
            return Err(OperatorError::InvalidMatrix);
        }
        Ok(Self {
            dim: matrix.nrows(),
            kind: Kind::Dense(Arc::new(matrix)),
            symmetric: true,
            positive_definite,
        })
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self {
            dim,
            kind: Kind::Dense(Arc::new(DMatrix::identity(dim, dim) * scale)),
            symmetric: true,
            positive_definite: scale > 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    /// Grid this operator acts on, if it is grid-based.
    pub fn grid(&self) -> Option<&Arc<Grid>> {
        match &self.kind {
            Kind::Stencil { grid, .. } => Some(grid),
            Kind::Power { base, .. } => base.grid(),
            Kind::Dense(_) => None,
        }
    }

    /// `y = Op x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        match &self.kind {
            Kind::Stencil { grid, stencil } => {
                for (i, out) in y.iter_mut().enumerate() {
                    let multi = grid.multi_index(i);
                    *out = stencil
                        .entries()
                        .iter()
                        .filter_map(|(off, c)| grid.neighbor(multi, *off).map(|j| c * x[j]))
                        .sum();
                }
            }
            Kind::Power { base, exponent } => {
                let mut tmp = x.to_vec();
                for _ in 0..*exponent {
                    base.apply_into(&tmp, y);
                    tmp.copy_from_slice(y);
                }
            }
            Kind::Dense(m) => {
                for (i, out) in y.iter_mut().enumerate() {
                    *out = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_fn(&self, u: &GridFunction) -> Result<GridFunction, OperatorError> {
        match self.grid() {
            Some(g) if Arc::ptr_eq(g, u.grid()) || **g == **u.grid() => {}
            _ => return Err(OperatorError::GridMismatch),
        }
        Ok(GridFunction::from_values(u.grid(), self.apply(u.values()))?)
    }

    /// Dense matrix of the operator (column by column for composed kinds).
    pub fn to_dense(&self, limit: usize) -> Result<DMatrix<f64>, OperatorError> {
        if self.dim > limit {
            return Err(OperatorError::TooLargeForDense { dim: self.dim, limit });
        }
        if let Kind::Dense(m) = &self.kind {
            return Ok((**m).clone());
        }
        if let Some(band) = self.to_banded() {
            return Ok(band.to_dense());
        }
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut e = vec![0.0; self.dim];
        for j in 0..self.dim {
            e[j] = 1.0;
            let col = self.apply(&e);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        Ok(out)
    }

    /// Lower band storage of a stencil operator.
    pub fn to_banded(&self) -> Option<BandedMatrix> {
        let Kind::Stencil { grid, stencil } = &self.kind else {
            return None;
        };
        let mut entries = Vec::new();
        let mut bandwidth = 0;
        for i in 0..grid.len() {
            let multi = grid.multi_index(i);
            for (off, c) in stencil.entries() {
                if let Some(j) = grid.neighbor(multi, *off) {
                    if j <= i {
                        bandwidth = bandwidth.max(i - j);
                        entries.push((i, j, *c));
                    }
                }
            }
        }
        let mut band = BandedMatrix::zeros(grid.len(), bandwidth);
        for (i, j, c) in entries {
            band.set(i, j, c);
        }
        Some(band)
    }

    pub(crate) fn power_parts(&self) -> Option<(&DiscreteOperator, u32)> {
        match &self.kind {
            Kind::Power { base, exponent } => Some((base, *exponent)),
            _ => None,
        }
    }

    pub(crate) fn dense_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Dense(m) => Some(m),
            _ => None,
        }
    }

    /// Upper estimate of `‖Op‖₂` (Gershgorin for stencils, powers of the base estimate).
    pub fn norm_estimate(&self) -> f64 {
        match &self.kind {
            Kind::Stencil { stencil, .. } => stencil.entries().iter().map(|(_, c)| c.abs()).sum(),
            Kind::Power { base, exponent } => base.norm_estimate().powi(*exponent as i32),
            Kind::Dense(m) => m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max),
        }
    }
}

/// `L_h = -Δ_h` on the interior of `spec`, zero outside.
pub fn build_laplacian(spec: &DomainSpec) -> Result<DiscreteOperator, OperatorError> {
    let grid = spec.build_grid()?;
    Ok(laplacian_on(&grid))
}

pub fn laplacian_on(grid: &Arc<Grid>) -> DiscreteOperator {
    stencil_operator(grid, Stencil::negative_laplacian(grid))
}

/// Discrete `(-Δ)^l` with clamped conditions: the full-grid stencil of
/// `L^l` acting on the zero extension, restricted to the interior. For
/// `l = 1` this is [`build_laplacian`].
pub fn build_polyharmonic(spec: &DomainSpec) -> Result<DiscreteOperator, OperatorError> {
    let grid = spec.build_grid()?;
    Ok(polyharmonic_on(&grid, spec.l))
}

pub fn polyharmonic_on(grid: &Arc<Grid>, l: u32) -> DiscreteOperator {
    stencil_operator(grid, Stencil::negative_laplacian(grid).power(l.max(1)))
}

fn stencil_operator(grid: &Arc<Grid>, stencil: Stencil) -> DiscreteOperator {
    DiscreteOperator {
        dim: grid.len(),
        kind: Kind::Stencil {
            grid: Arc::clone(grid),
            stencil,
        },
        symmetric: true,
        positive_definite: true,
    }
}

/// `op` applied `l` times. Eigenvalues are the `l`-th powers of those of `op`.
pub fn operator_power(op: &DiscreteOperator, l: u32) -> Result<DiscreteOperator, OperatorError> {
    if l == 0 {
        return Err(OperatorError::ZeroPower);
    }
    if !op.symmetric {
        return Err(OperatorError::NotSymmetric);
    }
    if l == 1 {
        return Ok(op.clone());
    }
    let (base, exponent) = match &op.kind {
        Kind::Power { base, exponent } => (Arc::clone(base), exponent * l),
        _ => (Arc::new(op.clone()), l),
    };
    Ok(DiscreteOperator {
        dim: op.dim,
        positive_definite: op.positive_definite,
        symmetric: true,
        kind: Kind::Power { base, exponent },
    })
}

fn check_axis(grid: &Grid, axis: usize) -> Result<(), OperatorError> {
    if axis >= grid.n() {
        Err(OperatorError::AxisOutOfRange { axis, n: grid.n() })
    } else {
        Ok(())
    }
}

/// Pointwise product with the `axis`-th coordinate.
pub fn coordinate_multiply(axis: usize, u: &GridFunction) -> Result<GridFunction, OperatorError> {
    let grid = u.grid();
    check_axis(grid, axis)?;
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.coordinate(i, axis))
        .collect();
    Ok(GridFunction::from_values(grid, values)?)
}

/// Centered difference `(u_{j+1} - u_{j-1}) / 2h` along `axis`, zero outside.
/// Skew-symmetric on the interior space.
pub fn central_difference(axis: usize, u: &GridFunction) -> Result<GridFunction, OperatorError> {
    let grid = u.grid();
    check_axis(grid, axis)?;
    let mut fwd = [0isize; 3];
    fwd[axis] = 1;
    let bwd = fwd.map(|x| -x);
    let scale = 0.5 / grid.spacing(axis);
    let x = u.values();
    let values = (0..grid.len())
        .map(|i| {
            let multi = grid.multi_index(i);
            let up = grid.neighbor(multi, fwd).map_or(0.0, |j| x[j]);
            let down = grid.neighbor(multi, bwd).map_or(0.0, |j| x[j]);
            (up - down) * scale
        })
        .collect();
    Ok(GridFunction::from_values(grid, values)?)
}

/// Residual of `L^l (x_p u) = x_p L^l u - 2l L^(l-1) D_p u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResidual {
    /// `‖L^l(x_p u) - x_p L^l u + 2l L^(l-1) D_p u‖`.
    pub absolute: f64,
    /// `absolute / ‖u‖`.
    pub per_input_norm: f64,
    /// `absolute` divided by the sum of the norms of the three terms; zero when `u = 0`.
    pub relative: f64,
}

/// Evaluates the commutator identity for `L_h^l` (order from `spec`) and the
/// coordinate `x_p` on an interior-supported `u`.
///
/// `u` must vanish within `l + 1` cells of the boundary; otherwise stencils
/// would reach the zero extension and the identity only holds up to boundary
/// terms.
pub fn commutator_residual(
    spec: &DomainSpec,
    u: &GridFunction,
    axis: usize,
) -> Result<CommutatorResidual, OperatorError> {
    let grid = u.grid();
    if grid.spec() != spec {
        return Err(OperatorError::GridMismatch);
    }
    check_axis(grid, axis)?;
    let l = spec.l;
    let margin = l as usize + 1;
    for (i, v) in u.values().iter().enumerate() {
        if *v != 0.0 && !grid.has_margin(i, margin) {
            return Err(OperatorError::SupportTooCloseToBoundary {
                cell: grid.multi_index(i)[..grid.n()].to_vec(),
                margin,
            });
        }
    }
    let lap = laplacian_on(grid);
    let power = |x: Vec<f64>, times: u32| {
        (0..times).fold(x, |acc, _| lap.apply(&acc))
    };

    let xu = coordinate_multiply(axis, u)?;
    let lhs = power(xu.into_values(), l);
    let l_u = GridFunction::from_values(grid, power(u.values().to_vec(), l))?;
    let x_lu = coordinate_multiply(axis, &l_u)?.into_values();
    let du = central_difference(axis, u)?.into_values();
    let corr: Vec<f64> = power(du, l - 1).into_iter().map(|v| 2.0 * l as f64 * v).collect();

    let residual: Vec<f64> = (0..grid.len()).map(|i| lhs[i] - x_lu[i] + corr[i]).collect();
    let absolute = Grid::norm(&residual);
    let scale = Grid::norm(&lhs) + Grid::norm(&x_lu) + Grid::norm(&corr);
    let norm_u = u.norm();
    Ok(CommutatorResidual {
        absolute,
        per_input_norm: if norm_u > 0.0 { absolute / norm_u } else { 0.0 },
        relative: if scale > 0.0 { absolute / scale } else { 0.0 },
    })
}

/// `⟨D_p(x_p u) - x_p D_p u, u⟩` for the centered difference `D_p`.
///
/// On the grid `(D_p x_p - x_p D_p) u = u + (h_p² / 2) Δ_p u` exactly, so for
/// unit `u` the value is `1 - (h_p² / 2) ⟨L_p u, u⟩` with `L_p` the
/// one-axis second difference.
pub fn difference_commutator_trace(axis: usize, u: &GridFunction) -> Result<f64, OperatorError> {
    let d_xu = central_difference(axis, &coordinate_multiply(axis, u)?)?;
    let x_du = coordinate_multiply(axis, &central_difference(axis, u)?)?;
    Ok(d_xu
        .values()
        .iter()
        .zip(x_du.values())
        .zip(u.values())
        .map(|((a, b), c)| (a - b) * c)
        .sum())
}

/// `⟨L_p u, u⟩` where `L_p` is the second difference along `axis` only.
pub fn axis_quadratic_form(axis: usize, u: &GridFunction) -> Result<f64, OperatorError> {
    let grid = u.grid();
    check_axis(grid, axis)?;
    let mut fwd = [0isize; 3];
    fwd[axis] = 1;
    let h2 = grid.spacing(axis).powi(2);
    let x = u.values();
    // sum over grid edges (including edges to the zero exterior) of squared jumps
    let mut total = 0.0;
    for i in 0..grid.len() {
        let multi = grid.multi_index(i);
        let up = grid.neighbor(multi, fwd).map_or(0.0, |j| x[j]);
        total += (up - x[i]).powi(2);
        let mut back = fwd;
        back[axis] = -1;
        if grid.neighbor(multi, back).is_none() {
            total += x[i] * x[i];
        }
    }
    Ok(total / h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn laplacian_matches_tridiagonal_closed_form() {
        let m = 12;
        let op = build_laplacian(&DomainSpec::interval(1.0, m, 1)).unwrap();
        let dense = op.to_dense(100).unwrap();
        let h = 1.0 / (m + 1) as f64;
        let mut eig: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for (j, val) in eig.iter().enumerate() {
            let exact = 4.0 / (h * h) * ((j + 1) as f64 * PI * h / 2.0).sin().powi(2);
            assert!((val - exact).abs() < 1e-10 * exact, "{val} vs {exact}");
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let op = build_laplacian(&DomainSpec::rectangle([1.0, 2.0], 7, 1)).unwrap();
        assert!(op.apply(&vec![0.0; op.dim()]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn square_sine_mode_is_eigenvector() {
        let spec = DomainSpec::rectangle([1.0, 1.0], 15, 1);
        let grid = spec.build_grid().unwrap();
        let u = GridFunction::from_fn(&grid, |p| (PI * p[0]).sin() * (PI * p[1]).sin());
        let lu = laplacian_on(&grid).apply_fn(&u).unwrap();
        let h = grid.spacing(0);
        let mu = 4.0 / (h * h) * 2.0 * (PI * h / 2.0).sin().powi(2);
        for (a, b) in lu.values().iter().zip(u.values()) {
            assert!((a - mu * b).abs() < 1e-11 * mu);
        }
    }

    #[test]
    fn power_one_is_identity_and_power_two_composes() {
        let spec = DomainSpec::rectangle([1.0, 1.5], 9, 2);
        let lap = build_laplacian(&spec).unwrap();
        let same = operator_power(&lap, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_vec(&mut rng, lap.dim());
        assert_eq!(same.apply(&x), lap.apply(&x));

        let sq = operator_power(&lap, 2).unwrap();
        let twice = lap.apply(&lap.apply(&x));
        let got = sq.apply(&x);
        for (a, b) in got.iter().zip(&twice) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert_eq!(operator_power(&lap, 0).unwrap_err(), OperatorError::ZeroPower);
    }

    #[test]
    fn clamped_operator_differs_from_composition_only_near_boundary() {
        let spec = DomainSpec::interval(1.0, 11, 2);
        let grid = spec.build_grid().unwrap();
        let clamped = polyharmonic_on(&grid, 2).to_dense(100).unwrap();
        let composed = operator_power(&laplacian_on(&grid), 2).unwrap().to_dense(100).unwrap();
        let h4 = grid.spacing(0).powi(4);
        let diff = (&clamped - &composed) * h4;
        // the only differences are the two corner diagonal entries: 6 vs 5
        for i in 0..11 {
            for j in 0..11 {
                let expect = if i == j && (i == 0 || i == 10) { 1.0 } else { 0.0 };
                assert!((diff[(i, j)] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coordinate_multiply_examples() {
        let grid = DomainSpec::rectangle([1.0, 1.0], 7, 1).build_grid().unwrap();
        let zero = GridFunction::zeros(&grid);
        assert!(coordinate_multiply(0, &zero).unwrap().values().iter().all(|v| *v == 0.0));

        let mut delta = GridFunction::zeros(&grid);
        delta.values_mut()[10] = 1.0;
        let out = coordinate_multiply(1, &delta).unwrap();
        assert_eq!(out.values()[10], grid.coordinate(10, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = GridFunction::from_values(&grid, random_vec(&mut rng, grid.len())).unwrap();
        let a = coordinate_multiply(0, &coordinate_multiply(1, &u).unwrap()).unwrap();
        let b = coordinate_multiply(1, &coordinate_multiply(0, &u).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-15 * x.abs());
        }
        assert!(matches!(coordinate_multiply(2, &u), Err(OperatorError::AxisOutOfRange { .. })));
    }

    #[test]
    fn central_difference_examples() {
        let grid = DomainSpec::interval(1.0, 19, 1).build_grid().unwrap();
        let ones = GridFunction::from_fn(&grid, |_| 1.0);
        let d = central_difference(0, &ones).unwrap();
        assert!(d.values()[1..18].iter().all(|v| v.abs() < 1e-14));

        let ramp = GridFunction::from_fn(&grid, |p| p[0]);
        let d = central_difference(0, &ramp).unwrap();
        assert!(d.values()[1..18].iter().all(|v| (v - 1.0).abs() < 1e-12));

        assert!(central_difference(1, &ramp).is_err());
    }

    #[test]
    fn central_difference_is_skew() {
        let grid = DomainSpec::l_shape(11, 1).build_grid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for axis in 0..2 {
            let u = GridFunction::from_values(&grid, random_vec(&mut rng, grid.len())).unwrap();
            let v = GridFunction::from_values(&grid, random_vec(&mut rng, grid.len())).unwrap();
            let a = central_difference(axis, &u).unwrap().dot(&v);
            let b = u.dot(&central_difference(axis, &v).unwrap());
            assert!((a + b).abs() < 1e-12 * u.norm() * v.norm() / grid.spacing(axis));
        }
    }

    #[test]
    fn commutator_exact_for_bump() {
        let spec = DomainSpec::interval(1.0, 40, 1);
        let grid = spec.build_grid().unwrap();
        let u = GridFunction::from_fn(&grid, |p| {
            let t = p[0] - 0.5;
            if t.abs() < 0.25 { (0.0625 - t * t).powi(2) } else { 0.0 }
        });
        let r = commutator_residual(&spec, &u, 0).unwrap();
        assert!(r.relative <= 1e-12, "{r:?}");

        let zero = GridFunction::zeros(&grid);
        assert_eq!(commutator_residual(&spec, &zero, 0).unwrap().relative, 0.0);
    }

    #[test]
    fn commutator_rejects_boundary_support() {
        let spec = DomainSpec::interval(1.0, 20, 2);
        let grid = spec.build_grid().unwrap();
        let mut u = GridFunction::zeros(&grid);
        u.values_mut()[2] = 1.0;
        match commutator_residual(&spec, &u, 0) {
            Err(OperatorError::SupportTooCloseToBoundary { cell, margin }) => {
                assert_eq!(cell, vec![2]);
                assert_eq!(margin, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        u.values_mut()[2] = 0.0;
        u.values_mut()[3] = 1.0;
        assert!(commutator_residual(&spec, &u, 0).is_ok());
    }

    #[test]
    fn difference_commutator_trace_identity() {
        let grid = DomainSpec::rectangle([1.0, 1.0], 13, 1).build_grid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut u = GridFunction::from_values(&grid, random_vec(&mut rng, grid.len())).unwrap();
        let norm = u.norm();
        u.values_mut().iter_mut().for_each(|v| *v /= norm);
        for axis in 0..2 {
            let trace = difference_commutator_trace(axis, &u).unwrap();
            let q = axis_quadratic_form(axis, &u).unwrap();
            let h = grid.spacing(axis);
            assert!((trace - (1.0 - 0.5 * h * h * q)).abs() < 1e-12);
        }
    }

    #[test]
    fn difference_commutator_is_identity_where_u_is_linear() {
        let grid = DomainSpec::interval(1.0, 30, 1).build_grid().unwrap();
        // piecewise-linear hat, linear on each side of its peak
        let u = GridFunction::from_fn(&grid, |p| (0.25 - (p[0] - 0.5).abs()).max(0.0));
        let d_xu = central_difference(0, &coordinate_multiply(0, &u).unwrap()).unwrap();
        let x_du = coordinate_multiply(0, &central_difference(0, &u).unwrap()).unwrap();
        for i in 0..grid.len() {
            let x = grid.coordinate(i, 0);
            let kink = [0.25, 0.5, 0.75].iter().any(|k| (x - k).abs() < 1.01 * grid.spacing(0));
            if !kink {
                let c = d_xu.values()[i] - x_du.values()[i];
                assert!((c - u.values()[i]).abs() < 1e-14, "at {x}");
            }
        }
    }

    #[test]
    fn axis_quadratic_forms_sum_to_laplacian_form() {
        let grid = DomainSpec::l_shape(9, 1).build_grid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = GridFunction::from_values(&grid, random_vec(&mut rng, grid.len())).unwrap();
        let total: f64 = (0..2).map(|p| axis_quadratic_form(p, &u).unwrap()).sum();
        let direct = laplacian_on(&grid).apply_fn(&u).unwrap().dot(&u);
        assert!((total - direct).abs() < 1e-11 * direct);
    }

    #[test]
    fn stencil_power_radius() {
        let grid = DomainSpec::rectangle([1.0, 1.0], 9, 3).build_grid().unwrap();
        let s = Stencil::negative_laplacian(&grid);
        assert_eq!(s.entries().len(), 5);
        assert_eq!(s.power(3).radius(), 3);
        // 2D stencil of L^2 is the 13-point biharmonic stencil
        assert_eq!(s.power(2).entries().len(), 13);
    }
}
