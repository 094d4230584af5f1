//! Both sides of each universal eigenvalue inequality for `(-Δ)^l`, evaluated
//! on a (truncated) ascending spectrum, plus a priori upper bounds.
//!
//! Every evaluator reads `λ_1 ..= λ_{k+1}` from the slice it is given. The
//! gap `λ_{k+1} - λ_i` may vanish on spectra with repeated eigenvalues; a
//! zero gap raised to a positive exponent contributes 0, to exponent 0
//! contributes 1, and to a negative exponent makes the row inapplicable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, ExponentPair, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("order l and dimension n must be positive")]
    InvalidOrder,
    #[error("truncation index k must be at least 1")]
    ZeroK,
    #[error("need {need} eigenvalues, spectrum has {have}")]
    NotEnoughEigenvalues { need: usize, have: usize },
    #[error("eigenvalue {index} = {value} is not a positive finite number")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("eigenvalues are not ascending at index {0}")]
    Unsorted(usize),
    #[error(transparent)]
    Exponents(#[from] AlgebraError),
    #[error("parameters outside the range of {case:?}: {reason}")]
    OutOfRange { case: SpecialCase, reason: String },
    #[error("chain depth must be at least 1")]
    ZeroDepth,
}

/// `(l, n, α, β, k)` with the derived constants `C₀ = 2√(l(n+2l-2))/n`
/// and `C₁ = C₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub l: u32,
    pub n: usize,
    pub exponents: ExponentPair,
    pub k: usize,
    c0: f64,
    c1: f64,
}

impl BoundParams {
    pub fn new(l: u32, n: usize, exponents: ExponentPair, k: usize) -> Result<Self, BoundError> {
        if l == 0 || n == 0 {
            return Err(BoundError::InvalidOrder);
        }
        if k == 0 {
            return Err(BoundError::ZeroK);
        }
        let (lf, nf) = (l as f64, n as f64);
        let c1 = 4.0 * lf * (nf + 2.0 * lf - 2.0) / (nf * nf);
        Ok(Self {
            l,
            n,
            exponents,
            k,
            c0: c1.sqrt(),
            c1,
        })
    }

    /// Parameters for the evaluators that take no exponents; `(α, β) = (2, 2)`.
    pub fn plain(l: u32, n: usize, k: usize) -> Result<Self, BoundError> {
        Self::new(l, n, ExponentPair { alpha: 2.0, beta: 2.0 }, k)
    }

    pub fn with_exponents(&self, exponents: ExponentPair) -> Self {
        Self { exponents, ..*self }
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..*self }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    /// Slack on the right-hand side; default relative `1e-9`.
    pub tolerance: Tolerance,
    /// Gaps below `gap_tol · λ_{k+1}` are treated as exact zeros.
    pub gap_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            tolerance: Tolerance {
                relative: 1e-9,
                absolute: 1e-15,
            },
            gap_tol: 1e-10,
        }
    }
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub applicable: bool,
    /// Set when some gap `λ_{k+1} - λ_i` was zero, i.e. the row relied on
    /// the non-strict reading of the inequality.
    pub repeated_eigenvalues: bool,
    /// Which spectrum the row was evaluated on; empty for direct calls.
    pub source: String,
    pub notes: String,
}

impl BoundCheck {
    /// A plain `lhs <= rhs` row under `tol`. `k` is 0 when the row is not
    /// tied to an index.
    pub fn compare(name: &str, k: usize, lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        Self {
            name: name.to_string(),
            k,
            alpha: None,
            beta: None,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: tol.allows(lhs, rhs),
            applicable: true,
            repeated_eigenvalues: false,
            source: String::new(),
            notes: String::new(),
        }
    }

    /// A row that could not be evaluated; passes vacuously.
    pub fn inapplicable(name: &str, k: usize, notes: impl Into<String>) -> Self {
        Self {
            applicable: false,
            notes: notes.into(),
            ..Self::compare(name, k, 0.0, 0.0, Tolerance::default())
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    fn evaluated(name: &str, p: &BoundParams, lhs: f64, rhs: f64, repeated: bool, opts: &BoundOptions) -> Self {
        Self {
            name: name.to_string(),
            k: p.k,
            alpha: None,
            beta: None,
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: opts.tolerance.allows(lhs, rhs),
            applicable: true,
            repeated_eigenvalues: repeated,
            source: String::new(),
            notes: if repeated {
                "repeated eigenvalue: zero gap".to_string()
            } else {
                String::new()
            },
        }
    }

    fn not_evaluated(name: &str, p: &BoundParams, notes: String) -> Self {
        Self {
            repeated_eigenvalues: true,
            ..Self::inapplicable(name, p.k, notes)
        }
    }

    fn tagged(mut self, e: ExponentPair) -> Self {
        self.alpha = Some(e.alpha);
        self.beta = Some(e.beta);
        self
    }

    /// `rhs / lhs`, the tightness ratio reported in comparisons.
    pub fn ratio(&self) -> f64 {
        self.rhs / self.lhs
    }

    /// True unless the row is applicable and fails.
    pub fn passes(&self) -> bool {
        !self.applicable || self.holds
    }
}

/// The four named specializations of [`generalized_yang`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCase {
    /// `β = 2α - 1` (third exponent 0), `α ∈ [2 - √2, 2 + √2]`.
    BalancedExponent,
    /// `α = β = 1`.
    UnitExponents,
    /// `α = ½`, `β ≥ ⅛`; third exponent `-β`.
    SquareRootGap,
    /// `α = -1`, `β ≥ ½`; third exponent `-β - 3`.
    ReciprocalGap,
}

impl SpecialCase {
    pub const ALL: [SpecialCase; 4] = [
        SpecialCase::BalancedExponent,
        SpecialCase::UnitExponents,
        SpecialCase::SquareRootGap,
        SpecialCase::ReciprocalGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecialCase::BalancedExponent => "balanced_exponent",
            SpecialCase::UnitExponents => "unit_exponents",
            SpecialCase::SquareRootGap => "square_root_gap",
            SpecialCase::ReciprocalGap => "reciprocal_gap",
        }
    }
}

/// Validated view of `λ_1 ..= λ_{k+1}` with snapped gaps.
struct Window<'a> {
    lambda: &'a [f64],
    next: f64,
    gaps: Vec<f64>,
    repeated: bool,
}

impl<'a> Window<'a> {
    fn new(eigenvalues: &'a [f64], k: usize, opts: &BoundOptions) -> Result<Self, BoundError> {
        if k == 0 {
            return Err(BoundError::ZeroK);
        }
        if eigenvalues.len() < k + 1 {
            return Err(BoundError::NotEnoughEigenvalues {
                need: k + 1,
                have: eigenvalues.len(),
            });
        }
        let all = &eigenvalues[..=k];
        for (index, &value) in all.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(BoundError::NonPositiveEigenvalue { index, value });
            }
        }
        if let Some(i) = all.windows(2).position(|w| w[1] < w[0]) {
            return Err(BoundError::Unsorted(i + 1));
        }
        let next = all[k];
        let gaps: Vec<f64> = all[..k]
            .iter()
            .map(|&l| {
                let g = next - l;
                if g <= opts.gap_tol * next {
                    0.0
                } else {
                    g
                }
            })
            .collect();
        let repeated = gaps.contains(&0.0);
        Ok(Self {
            lambda: &all[..k],
            next,
            gaps,
            repeated,
        })
    }

    /// `gap_i^e`, or `None` if a zero gap meets a negative exponent.
    fn gap_powers(&self, e: f64) -> Option<Vec<f64>> {
        self.gaps
            .iter()
            .map(|&g| {
                if g > 0.0 {
                    Some(g.powf(e))
                } else if e > 0.0 {
                    Some(0.0)
                } else if e == 0.0 {
                    Some(1.0)
                } else {
                    None
                }
            })
            .collect()
    }

    fn lambda_powers(&self, e: f64) -> Vec<f64> {
        self.lambda.iter().map(|l| l.powf(e)).collect()
    }

    fn needs_strict(&self, exponents: &[f64]) -> Option<String> {
        let negative: Vec<String> = exponents.iter().filter(|e| **e < 0.0).map(|e| format!("{e}")).collect();
        if self.repeated && !negative.is_empty() {
            Some(format!(
                "zero gap raised to negative exponent {}; requires λ_{{k+1}} > λ_k",
                negative.join(", ")
            ))
        } else {
            None
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sum(a: &[f64]) -> f64 {
    a.iter().sum()
}

/// Exponents of the two weights in `C₀ [Σ g^e1 λ^((l-1)/l)]^½ [Σ g^e2 λ^(1/l)]^½`.
fn split_form(
    name: &str,
    eigenvalues: &[f64],
    p: &BoundParams,
    lhs_exp: f64,
    e1: f64,
    e2: f64,
    (w1, w2): (f64, f64),
    opts: &BoundOptions,
) -> Result<BoundCheck, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    if let Some(note) = w.needs_strict(&[lhs_exp, e1, e2]) {
        return Ok(BoundCheck::not_evaluated(name, p, note));
    }
    let (lhs_g, g1, g2) = (
        w.gap_powers(lhs_exp).unwrap(),
        w.gap_powers(e1).unwrap(),
        w.gap_powers(e2).unwrap(),
    );
    let lhs = sum(&lhs_g);
    let rhs = p.c0 * dot(&g1, &w.lambda_powers(w1)).sqrt() * dot(&g2, &w.lambda_powers(w2)).sqrt();
    Ok(BoundCheck::evaluated(name, p, lhs, rhs, w.repeated, opts))
}

fn order_weights(p: &BoundParams) -> (f64, f64) {
    let l = p.l as f64;
    ((l - 1.0) / l, 1.0 / l)
}

/// `Σ g^α <= C₀ [Σ g^β λ^((l-1)/l)]^½ [Σ g^(2α-β-1) λ^(1/l)]^½`, the
/// two-parameter family of Yang-type bounds; `(α, β)` must satisfy `α² <= 2β`.
pub fn generalized_yang(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let e = p.exponents;
    ExponentPair::new(e.alpha, e.beta)?.require_admissible()?;
    split_form(
        "generalized_yang",
        eigenvalues,
        p,
        e.alpha,
        e.beta,
        e.complementary(),
        order_weights(p),
        opts,
    )
    .map(|c| c.tagged(e))
}

/// Evaluates one of the named specializations in its own closed form.
/// `p.exponents` selects the free parameter where the case has one
/// (`α` for [`SpecialCase::BalancedExponent`], `β` for the gap cases).
pub fn special_case(
    eigenvalues: &[f64],
    p: &BoundParams,
    case: SpecialCase,
    opts: &BoundOptions,
) -> Result<BoundCheck, BoundError> {
    let e = p.exponents;
    let out_of_range = |reason: &str| BoundError::OutOfRange {
        case,
        reason: reason.to_string(),
    };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    let weights = order_weights(p);
    let name = case.name();
    let check = match case {
        SpecialCase::BalancedExponent => {
            let s2 = std::f64::consts::SQRT_2;
            if !(e.alpha >= 2.0 - s2 - 1e-12 && e.alpha <= 2.0 + s2 + 1e-12) {
                return Err(out_of_range("alpha must lie in [2 - sqrt 2, 2 + sqrt 2]"));
            }
            if !close(e.beta, 2.0 * e.alpha - 1.0) {
                return Err(out_of_range("beta must equal 2 alpha - 1"));
            }
            split_form(name, eigenvalues, p, e.alpha, 2.0 * e.alpha - 1.0, 0.0, weights, opts)?
        }
        SpecialCase::UnitExponents => {
            if !(close(e.alpha, 1.0) && close(e.beta, 1.0)) {
                return Err(out_of_range("alpha and beta must both be 1"));
            }
            split_form(name, eigenvalues, p, 1.0, 1.0, 0.0, weights, opts)?
        }
        SpecialCase::SquareRootGap => {
            if !close(e.alpha, 0.5) || e.beta < 0.125 {
                return Err(out_of_range("alpha must be 1/2 and beta >= 1/8"));
            }
            split_form(name, eigenvalues, p, 0.5, e.beta, -e.beta, weights, opts)?
        }
        SpecialCase::ReciprocalGap => {
            if !close(e.alpha, -1.0) || e.beta < 0.5 {
                return Err(out_of_range("alpha must be -1 and beta >= 1/2"));
            }
            split_form(name, eigenvalues, p, -1.0, e.beta, -e.beta - 3.0, weights, opts)?
        }
    };
    Ok(check.tagged(e))
}

/// `Σ g² <= C₀ [Σ g² λ^((l-1)/l)]^½ [Σ g λ^(1/l)]^½`.
pub fn quadratic_gap_bound(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    split_form("quadratic_gap_bound", eigenvalues, p, 2.0, 2.0, 1.0, order_weights(p), opts)
}

/// `λ_{k+1} - λ_k <= C₁/k² (Σ λ^((l-1)/l)) (Σ λ^(1/l))`.
pub fn gap_product_bound(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    let (w1, w2) = order_weights(p);
    let k = p.k as f64;
    let lhs = w.gaps[p.k - 1];
    let rhs = p.c1 / (k * k) * sum(&w.lambda_powers(w1)) * sum(&w.lambda_powers(w2));
    Ok(BoundCheck::evaluated("gap_product_bound", p, lhs, rhs, w.repeated, opts))
}

/// `Σ g^α <= C₀ [Σ g^β]^½ [Σ g^(2α-β-1) λ]^½`.
pub fn linear_weight_bound(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let e = p.exponents;
    ExponentPair::new(e.alpha, e.beta)?.require_admissible()?;
    split_form(
        "linear_weight_bound",
        eigenvalues,
        p,
        e.alpha,
        e.beta,
        e.complementary(),
        (0.0, 1.0),
        opts,
    )
    .map(|c| c.tagged(e))
}

/// Yang-type first inequality: `Σ g² <= C₁ Σ g λ`.
pub fn yang_first(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    let lhs = w.gaps.iter().map(|g| g * g).sum();
    let rhs = p.c1 * dot(&w.gaps, w.lambda);
    Ok(BoundCheck::evaluated("yang_first", p, lhs, rhs, w.repeated, opts))
}

/// Gap bound by the running mean: `λ_{k+1} - λ_k <= C₁/k Σ λ`.
pub fn ppw_gap(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    let lhs = w.gaps[p.k - 1];
    let rhs = p.c1 / p.k as f64 * sum(w.lambda);
    Ok(BoundCheck::evaluated("ppw_gap", p, lhs, rhs, w.repeated, opts))
}

/// Yang-type second inequality: `λ_{k+1} <= (1 + C₁)/k Σ λ`.
pub fn yang_second(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<BoundCheck, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    let rhs = (1.0 + p.c1) / p.k as f64 * sum(w.lambda);
    Ok(BoundCheck::evaluated("yang_second", p, w.next, rhs, w.repeated, opts))
}

/// A priori upper bounds `U_2 ..= U_{depth+1}` from `U_1 = λ_1` and
/// `U_{k+1} = (1 + C₁)/k Σ_{i<=k} U_i`. The right side of the second Yang
/// inequality is increasing in every `λ_i`, so each `U_j` bounds `λ_j`.
pub fn yang_upper_chain(lambda_1: f64, l: u32, n: usize, depth: usize) -> Result<Vec<f64>, BoundError> {
    if depth == 0 {
        return Err(BoundError::ZeroDepth);
    }
    if !(lambda_1 > 0.0 && lambda_1.is_finite()) {
        return Err(BoundError::NonPositiveEigenvalue {
            index: 0,
            value: lambda_1,
        });
    }
    let c1 = BoundParams::plain(l, n, 1)?.c1;
    let mut all = vec![lambda_1];
    let mut running = lambda_1;
    for k in 1..=depth {
        let next = (1.0 + c1) / k as f64 * running;
        all.push(next);
        running += next;
    }
    Ok(all.split_off(1))
}

/// Earlier inequalities from the literature, evaluated on the same spectrum
/// for comparison. Each row is normalized to `lhs <= rhs`:
///
/// * `hile_protter` (l = 1 only): `nk/4 <= Σ λ / g`;
/// * `chen_qian_hook`: `n²k² / (4l(n+2l-2)) <= (Σ λ^(1/l) / g)(Σ λ^((l-1)/l))`;
/// * `cheng_ichikawa_mametsuka`: `Σ g² <= C₁ Σ g λ`.
pub fn comparison_table(eigenvalues: &[f64], p: &BoundParams, opts: &BoundOptions) -> Result<Vec<BoundCheck>, BoundError> {
    let w = Window::new(eigenvalues, p.k, opts)?;
    let (w1, w2) = order_weights(p);
    let (k, n) = (p.k as f64, p.n as f64);
    let mut rows = Vec::new();
    let reciprocal = w.gap_powers(-1.0);

    if p.l == 1 {
        rows.push(match &reciprocal {
            Some(r) => BoundCheck::evaluated("hile_protter", p, n * k / 4.0, dot(w.lambda, r), false, opts),
            None => BoundCheck::not_evaluated("hile_protter", p, "zero gap in a denominator".to_string()),
        });
    }
    rows.push(match &reciprocal {
        Some(r) => {
            let lhs = n * n * k * k / (4.0 * p.l as f64 * (n + 2.0 * p.l as f64 - 2.0));
            let rhs = dot(&w.lambda_powers(w2), r) * sum(&w.lambda_powers(w1));
            BoundCheck::evaluated("chen_qian_hook", p, lhs, rhs, false, opts)
        }
        None => BoundCheck::not_evaluated("chen_qian_hook", p, "zero gap in a denominator".to_string()),
    });
    let mut cim = yang_first(eigenvalues, p, opts)?;
    cim.name = "cheng_ichikawa_mametsuka".to_string();
    rows.push(cim);
    Ok(rows)
}

/// The `(α, β)` sweep grid: `α ∈ {-1, -½, ½, 1, 3/2, 2, 5/2}` and
/// `β = α²/2, α²/2 + ½, …` up to 4.
pub fn auto_grid() -> Vec<ExponentPair> {
    let mut out = Vec::new();
    for alpha in [-1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let mut beta: f64 = alpha * alpha / 2.0;
        while beta <= 4.0 + 1e-12 {
            out.push(ExponentPair { alpha, beta });
            beta += 0.5;
        }
    }
    out
}
