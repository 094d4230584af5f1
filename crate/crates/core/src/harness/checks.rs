//! Individual checks. Each returns the rows of one report group; the rows
//! follow the `lhs <= rhs` convention of [`BoundCheck`].

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ExponentPair, Tolerance};
use crate::bounds::{self, BoundCheck, BoundError, BoundOptions, BoundParams, SpecialCase};
use crate::domain::{DomainSpec, Grid, GridFunction};
use crate::eigensolve::{smallest_eigenpairs, SolverOptions, Spectrum};
use crate::operators::{
    axis_quadratic_form, central_difference, commutator_residual, difference_commutator_trace, laplacian_on,
    operator_power, polyharmonic_on, DiscreteOperator,
};

/// No slack: `lhs <= rhs` exactly. Used where the tolerance is already
/// folded into `rhs`.
const EXACT: Tolerance = Tolerance {
    relative: 0.0,
    absolute: 0.0,
};

/// `err <= tol · scale`.
fn within(name: &str, k: usize, err: f64, scale: f64, tol: f64) -> BoundCheck {
    BoundCheck::compare(name, k, err, tol * scale, EXACT)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = Grid::norm(v);
    v.iter().map(|x| x / n).collect()
}

/// A spectrum (or prefix of one) together with where it came from.
#[derive(Debug, Clone)]
pub struct Source {
    pub label: String,
    pub eigenvalues: Vec<f64>,
}

impl Source {
    pub fn analytic(name: &str, eigenvalues: Vec<f64>) -> Self {
        Self {
            label: format!("analytic:{name}"),
            eigenvalues,
        }
    }

    pub fn computed(spec: &DomainSpec, eigenvalues: Vec<f64>) -> Self {
        let h: Vec<String> = spec.h.iter().map(|h| format!("{h}")).collect();
        Self {
            label: format!("computed:h={}", h.join("x")),
            eigenvalues,
        }
    }
}

/// Symmetry probes `|⟨Ax, y⟩ - ⟨x, Ay⟩| <= tol ‖x‖‖y‖‖A‖` on `probes`
/// random pairs; one row per operator with the worst probe.
pub fn symmetry_check(grid: &Arc<Grid>, l: u32, seed: u64, probes: usize, tol: f64) -> Vec<BoundCheck> {
    let lap = laplacian_on(grid);
    let mut ops = vec![("laplacian", lap.clone()), ("polyharmonic", polyharmonic_on(grid, l))];
    if l > 1 {
        ops.push(("laplacian_power", operator_power(&lap, l).expect("l >= 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.len();
    ops.into_iter()
        .map(|(name, op)| {
            let scale = op.norm_estimate();
            let mut worst: f64 = 0.0;
            for _ in 0..probes {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let diff = (Grid::dot(&op.apply(&x), &y) - Grid::dot(&x, &op.apply(&y))).abs();
                worst = worst.max(diff / (Grid::norm(&x) * Grid::norm(&y) * scale));
            }
            within(&format!("{name}_symmetric"), 0, worst, 1.0, tol).with_notes(format!("{probes} probes"))
        })
        .collect()
}

/// Random vectors supported at least `l + 1` cells from the boundary.
pub fn interior_supported(grid: &Arc<Grid>, margin: usize, rng: &mut ChaCha8Rng) -> Option<GridFunction> {
    let values: Vec<f64> = (0..grid.len())
        .map(|i| if grid.has_margin(i, margin) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    if values.iter().all(|v| *v == 0.0) {
        return None;
    }
    GridFunction::from_values(grid, values).ok()
}

/// Worst relative commutator residual over `trials` interior-supported
/// random vectors, one row per axis.
pub fn commutator_check(grid: &Arc<Grid>, seed: u64, trials: usize, tol: f64) -> Vec<BoundCheck> {
    let spec = grid.spec();
    let margin = spec.l as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for axis in 0..grid.n() {
        let name = format!("commutator_axis_{axis}");
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let Some(u) = interior_supported(grid, margin, &mut rng) else {
                rows.push(BoundCheck::inapplicable(&name, 0, format!("no grid point {margin} cells from the boundary")));
                return rows;
            };
            match commutator_residual(spec, &u, axis) {
                Ok(r) => worst = worst.max(r.relative),
                Err(e) => {
                    rows.push(BoundCheck::compare(&name, 0, 1.0, 0.0, EXACT).with_notes(e.to_string()));
                    return rows;
                }
            }
        }
        rows.push(within(&name, 0, worst, 1.0, tol).with_notes(format!("l = {}, {trials} vectors", spec.l)));
    }
    rows
}

/// Ordering, positivity, residuals and orthonormality of a solved spectrum.
pub fn spectrum_check(s: &Spectrum, solver_tol: f64, orth_tol: f64) -> Vec<BoundCheck> {
    let mut rows = Vec::new();
    let descents = s.eigenvalues.windows(2).filter(|w| w[1] < w[0]).count();
    rows.push(BoundCheck::compare("ascending", 0, descents as f64, 0.0, EXACT));
    rows.push(BoundCheck::compare("positive", 0, 0.0, s.eigenvalues[0], EXACT).with_notes("lhs 0 <= rhs lambda_1"));
    for (i, r) in s.residuals.iter().enumerate() {
        rows.push(within("residual", i + 1, *r, 1.0, solver_tol));
    }
    if let Some(v) = &s.eigenvectors {
        rows.push(within("orthonormal", 0, orthonormality_error(v), 1.0, orth_tol));
    }
    rows
}

pub fn orthonormality_error(vectors: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((Grid::dot(a, b) - target).abs());
        }
    }
    worst
}

/// `⟨L^j u_i, u_i⟩ <= λ_i^(j/l) (1 + tol)` for `j = 1..l-1`, with `L^j`
/// the full-grid stencil power acting on the zero extension. Empty for
/// `l = 1`.
pub fn interpolation_check(grid: &Arc<Grid>, l: u32, eigenvalues: &[f64], vectors: &[Vec<f64>], tol: f64) -> Vec<BoundCheck> {
    let mut rows = Vec::new();
    for j in 1..l {
        let op = polyharmonic_on(grid, j);
        for (i, (lambda, v)) in eigenvalues.iter().zip(vectors).enumerate() {
            let u = unit(v);
            let r = Grid::dot(&op.apply(&u), &u);
            let bound = lambda.powf(j as f64 / l as f64);
            rows.push(BoundCheck::compare(&format!("power_{j}_form"), i + 1, r, bound * (1.0 + tol), EXACT));
        }
    }
    rows
}

/// `⟨L_p u, u⟩ - ‖D_p u‖²` for unit `u`, computed from its closed form:
/// `(h²/4) ‖L_p u‖²` plus `u_j² / 2h²` for each end of every grid line.
fn summation_by_parts_gap(grid: &Grid, axis: usize, u: &[f64]) -> f64 {
    let h2 = grid.spacing(axis).powi(2);
    let mut fwd = [0isize; 3];
    fwd[axis] = 1;
    let bwd = fwd.map(|x| -x);
    let mut total = 0.0;
    for (i, ui) in u.iter().enumerate() {
        let multi = grid.multi_index(i);
        let up = grid.neighbor(multi, fwd);
        let down = grid.neighbor(multi, bwd);
        let lp = (2.0 * ui - up.map_or(0.0, |j| u[j]) - down.map_or(0.0, |j| u[j])) / h2;
        total += h2 / 4.0 * lp * lp;
        let ends = up.is_none() as u8 + down.is_none() as u8;
        total += ends as f64 * ui * ui / (2.0 * h2);
    }
    total
}

/// Gradient-sum rows per eigenpair: `Σ_p ‖D_p u‖² <= ⟨L u, u⟩`, the exact
/// summation-by-parts gap between the two, and `⟨L u, u⟩ <= λ^(1/l) (1 + tol)`.
pub fn gradient_sum_check(
    grid: &Arc<Grid>,
    l: u32,
    eigenvalues: &[f64],
    vectors: &[Vec<f64>],
    tol: f64,
    identity_tol: f64,
) -> Vec<BoundCheck> {
    let lap = laplacian_on(grid);
    let mut rows = Vec::new();
    for (i, (lambda, v)) in eigenvalues.iter().zip(vectors).enumerate() {
        let u = GridFunction::from_values(grid, unit(v)).expect("eigenvector length");
        let form = Grid::dot(&lap.apply(u.values()), u.values());
        let mut gradient = 0.0;
        let mut gap = 0.0;
        for axis in 0..grid.n() {
            let d = central_difference(axis, &u).expect("axis in range");
            gradient += d.dot(&d);
            gap += summation_by_parts_gap(grid, axis, u.values());
        }
        let k = i + 1;
        rows.push(BoundCheck::compare("gradient_below_form", k, gradient, form, Tolerance::relative(identity_tol)));
        rows.push(within("summation_by_parts", k, (form - gradient - gap).abs(), form, identity_tol));
        let bound = lambda.powf(1.0 / l as f64);
        rows.push(BoundCheck::compare("form_below_root", k, form, bound * (1.0 + tol), EXACT));
    }
    rows
}

/// `|⟨[D_p, x_p] u, u⟩ - 1|` for unit `u`.
fn trace_deviation(grid: &Arc<Grid>, axis: usize, v: &[f64]) -> f64 {
    let u = GridFunction::from_values(grid, unit(v)).expect("eigenvector length");
    (difference_commutator_trace(axis, &u).expect("axis in range") - 1.0).abs()
}

/// Trace identity rows. On every grid `[D_p, x_p] u = u + (h²/2) Δ_p u`
/// exactly, which is asserted per eigenvector and axis. The deviation from
/// 1 is then followed over the grids `4h, 2h, h` for `u_1`, and its observed
/// order must reach `min_order` on both refinements.
pub fn trace_identity_check(
    grid: &Arc<Grid>,
    vectors: &[Vec<f64>],
    solver: &SolverOptions,
    identity_tol: f64,
    min_order: f64,
) -> Vec<BoundCheck> {
    let mut rows = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let u = GridFunction::from_values(grid, unit(v)).expect("eigenvector length");
        for axis in 0..grid.n() {
            let measured = difference_commutator_trace(axis, &u).expect("axis in range");
            let h2 = grid.spacing(axis).powi(2);
            let predicted = 1.0 - h2 / 2.0 * axis_quadratic_form(axis, &u).expect("axis in range");
            rows.push(
                within("trace_product_rule", i + 1, (measured - predicted).abs(), 1.0, identity_tol)
                    .with_notes(format!("axis {axis}")),
            );
        }
    }

    let spec = grid.spec();
    let mut chain = Vec::new();
    for factor in [4.0, 2.0] {
        let coarse = spec.rescaled(factor);
        let built = coarse.build_grid().map_err(|e| e.to_string()).and_then(|g| {
            let op = polyharmonic_on(&g, spec.l);
            smallest_eigenpairs(&op, 1, solver)
                .map_err(|e| e.to_string())
                .map(|s| (g, s.eigenvectors.expect("vectors kept").remove(0)))
        });
        match built {
            Ok(pair) => chain.push(pair),
            Err(e) => {
                rows.push(BoundCheck::inapplicable(
                    "trace_order",
                    1,
                    format!("no {factor}h grid for the refinement study: {e}"),
                ));
                return rows;
            }
        }
    }
    chain.push((Arc::clone(grid), unit(&vectors[0])));
    for axis in 0..grid.n() {
        let d: Vec<f64> = chain.iter().map(|(g, v)| trace_deviation(g, axis, v)).collect();
        for (step, pair) in d.windows(2).enumerate() {
            let order = (pair[0] / pair[1]).log2();
            let order = if order.is_finite() { order } else { 0.0 };
            rows.push(BoundCheck::compare("trace_order", 1, min_order, order, EXACT).with_notes(format!(
                "axis {axis}, refinement {}: deviation {:.3e} -> {:.3e}, ratio {:.4}",
                step + 1,
                pair[0],
                pair[1],
                pair[1] / pair[0]
            )));
        }
    }
    rows
}

/// Relative agreement of computed eigenvalues with a reference list.
pub fn oracle_check(computed: &[f64], reference: &[f64], tol: f64) -> Vec<BoundCheck> {
    computed
        .iter()
        .zip(reference)
        .enumerate()
        .map(|(i, (c, r))| within("relative_error", i + 1, (c - r).abs() / r, 1.0, tol).with_notes(format!("reference {r}")))
        .collect()
}

/// Everything needed to evaluate inequalities on a list of spectra.
pub struct BoundContext<'a> {
    pub l: u32,
    pub n: usize,
    pub pairs: &'a [ExponentPair],
    pub opts: BoundOptions,
    pub coherence_tol: f64,
}

fn error_row(name: &str, k: usize, e: BoundError) -> BoundCheck {
    BoundCheck::compare(name, k, 1.0, 0.0, EXACT).with_notes(format!("evaluation error: {e}"))
}

fn settle(name: &str, k: usize, r: Result<BoundCheck, BoundError>) -> BoundCheck {
    r.unwrap_or_else(|e| error_row(name, k, e))
}

impl BoundContext<'_> {
    fn params(&self, k: usize) -> BoundParams {
        BoundParams::plain(self.l, self.n, k).expect("validated order and k")
    }

    fn for_each_window(&self, sources: &[Source], mut f: impl FnMut(&Source, &BoundParams, &mut Vec<BoundCheck>)) -> Vec<BoundCheck> {
        let mut rows = Vec::new();
        for s in sources {
            let start = rows.len();
            for k in 1..s.eigenvalues.len() {
                f(s, &self.params(k), &mut rows);
            }
            for r in &mut rows[start..] {
                r.source = s.label.clone();
            }
        }
        rows
    }

    /// The exponent family over the sweep plus every parameter-free
    /// inequality, at each `k`.
    pub fn bounds(&self, sources: &[Source]) -> Vec<BoundCheck> {
        self.for_each_window(sources, |s, p, rows| {
            let lam = &s.eigenvalues;
            for &e in self.pairs {
                let q = p.with_exponents(e);
                rows.push(settle("generalized_yang", p.k, bounds::generalized_yang(lam, &q, &self.opts)));
                rows.push(settle("linear_weight_bound", p.k, bounds::linear_weight_bound(lam, &q, &self.opts)));
            }
            rows.push(settle("quadratic_gap_bound", p.k, bounds::quadratic_gap_bound(lam, p, &self.opts)));
            rows.push(settle("gap_product_bound", p.k, bounds::gap_product_bound(lam, p, &self.opts)));
            rows.push(settle("yang_first", p.k, bounds::yang_first(lam, p, &self.opts)));
            rows.push(settle("ppw_gap", p.k, bounds::ppw_gap(lam, p, &self.opts)));
            rows.push(settle("yang_second", p.k, bounds::yang_second(lam, p, &self.opts)));
        })
    }

    /// Representative parameters for each named case, each evaluated in its
    /// own form and compared against the general family.
    pub fn special_cases(&self, sources: &[Source]) -> Vec<BoundCheck> {
        let s2 = std::f64::consts::SQRT_2;
        let mut cases = Vec::new();
        for alpha in [2.0 - s2, 1.0, 2.0, 2.0 + s2] {
            cases.push((SpecialCase::BalancedExponent, ExponentPair { alpha, beta: 2.0 * alpha - 1.0 }));
        }
        cases.push((SpecialCase::UnitExponents, ExponentPair { alpha: 1.0, beta: 1.0 }));
        for beta in [0.125, 0.5, 2.0] {
            cases.push((SpecialCase::SquareRootGap, ExponentPair { alpha: 0.5, beta }));
        }
        for beta in [0.5, 1.0, 3.0] {
            cases.push((SpecialCase::ReciprocalGap, ExponentPair { alpha: -1.0, beta }));
        }
        self.for_each_window(sources, |s, p, rows| {
            for &(case, e) in &cases {
                let q = p.with_exponents(e);
                let row = settle(case.name(), p.k, bounds::special_case(&s.eigenvalues, &q, case, &self.opts));
                let general = bounds::generalized_yang(&s.eigenvalues, &p.with_exponents(e), &self.opts);
                if let (true, Ok(general)) = (row.applicable, general) {
                    if general.applicable {
                        let scale = general.lhs.abs() + general.rhs.abs();
                        let err = (row.lhs - general.lhs).abs() + (row.rhs - general.rhs).abs();
                        let mut agree = within(&format!("{}_agreement", case.name()), p.k, err, scale, self.coherence_tol);
                        agree.alpha = Some(e.alpha);
                        agree.beta = Some(e.beta);
                        rows.push(agree);
                    }
                }
                rows.push(row);
            }
        })
    }

    /// Cross-evaluator consistency: specialization, implication, dominance,
    /// `k = 1` exponent independence and scale covariance.
    pub fn coherence(&self, sources: &[Source]) -> Vec<BoundCheck> {
        let tol = self.coherence_tol;
        self.for_each_window(sources, |s, p, rows| {
            let lam = &s.eigenvalues;
            let opts = &self.opts;
            let two = p.with_exponents(ExponentPair { alpha: 2.0, beta: 2.0 });
            if let (Ok(q), Ok(g)) = (bounds::quadratic_gap_bound(lam, p, opts), bounds::generalized_yang(lam, &two, opts)) {
                let err = (q.lhs - g.lhs).abs() + (q.rhs - g.rhs).abs();
                rows.push(within("quadratic_is_two_two_instance", p.k, err, q.lhs.abs() + q.rhs.abs(), tol));
                if let Ok(first) = bounds::yang_first(lam, p, opts) {
                    let mut row = first.clone();
                    row.name = "quadratic_implies_yang_first".into();
                    if !q.holds {
                        row = BoundCheck::inapplicable(&row.name, p.k, "premise does not hold");
                    }
                    rows.push(row);
                }
            }
            let mut ratios = Vec::new();
            for &e in self.pairs {
                let q = p.with_exponents(e);
                let (Ok(g), Ok(w)) = (bounds::generalized_yang(lam, &q, opts), bounds::linear_weight_bound(lam, &q, opts)) else {
                    continue;
                };
                if !(g.applicable && w.applicable && g.ratio().is_finite()) {
                    continue;
                }
                let mut dom = BoundCheck::compare("linear_weight_dominates", p.k, g.rhs, w.rhs, opts.tolerance);
                dom.alpha = Some(e.alpha);
                dom.beta = Some(e.beta);
                rows.push(dom);
                ratios.push(g.ratio());
                for c in [1e-3, 1e3] {
                    let scaled: Vec<f64> = lam.iter().map(|x| x * c).collect();
                    if let Ok(gs) = bounds::generalized_yang(&scaled, &q, opts) {
                        let mut row = within("scale_covariance", p.k, (gs.ratio() - g.ratio()).abs(), g.ratio(), 1e-9);
                        if gs.holds != g.holds {
                            row.holds = false;
                        }
                        row.alpha = Some(e.alpha);
                        row.beta = Some(e.beta);
                        row.notes = format!("factor {c}");
                        rows.push(row);
                    }
                }
            }
            if p.k == 1 && !ratios.is_empty() {
                let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ratios.iter().copied().fold(0.0, f64::max);
                rows.push(within("k1_exponent_independence", 1, hi - lo, lo, 1e-10));
            }
        })
    }

    /// The chain started at each source's `λ_1` must dominate the rest of it.
    pub fn chain(&self, sources: &[Source]) -> Vec<BoundCheck> {
        let mut rows = Vec::new();
        for s in sources {
            let lam = &s.eigenvalues;
            if lam.len() < 2 {
                continue;
            }
            match bounds::yang_upper_chain(lam[0], self.l, self.n, lam.len() - 1) {
                Ok(upper) => {
                    for (j, (u, l)) in upper.iter().zip(&lam[1..]).enumerate() {
                        let mut row = BoundCheck::compare("chain_dominates", j + 2, *l, *u, self.opts.tolerance);
                        row.source = s.label.clone();
                        rows.push(row);
                    }
                }
                Err(e) => rows.push(error_row("chain_dominates", 0, e)),
            }
        }
        rows
    }

    pub fn comparison(&self, sources: &[Source]) -> Vec<BoundCheck> {
        self.for_each_window(sources, |s, p, rows| match bounds::comparison_table(&s.eigenvalues, p, &self.opts) {
            Ok(table) => rows.extend(table),
            Err(e) => rows.push(error_row("comparison", p.k, e)),
        })
    }
}

/// Operator shared by the spectrum-dependent checks.
pub fn clamped_operator(grid: &Arc<Grid>) -> DiscreteOperator {
    polyharmonic_on(grid, grid.order())
}
