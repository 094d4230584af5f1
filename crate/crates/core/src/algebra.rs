//! Order-based sum inequalities and the power-family membership test.
//!
//! Everything here is independent of any spectrum: the bound evaluators use
//! these kernels, and the test suite fuzzes them directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("exponent gamma = {0} is below 1")]
    GammaBelowOne(f64),
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("sequence lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("sequences are not oppositely ordered at indices ({i}, {j}); inequality is inapplicable")]
    NotOppositelyOrdered { i: usize, j: usize },
    #[error("sequence {which} breaks its monotone order at index {index}")]
    NotMonotone { which: char, index: usize },
    #[error("beta = {0} is negative")]
    NegativeBeta(f64),
    #[error("exponent pair (alpha = {alpha}, beta = {beta}) violates alpha^2 <= 2 beta")]
    Inadmissible { alpha: f64, beta: f64 },
    #[error("A[{index}] = 0 raised to negative exponent {exponent}")]
    ZeroBaseNegativeExponent { index: usize, exponent: f64 },
    #[error("lambda = {0} must be positive")]
    NonPositiveLambda(f64),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Slack used for every "holds" verdict: `lhs <= rhs + max(relative * |rhs|, absolute)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-12,
            absolute: 1e-15,
        }
    }
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self {
            relative,
            ..Self::default()
        }
    }

    pub fn allows(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + (self.relative * rhs.abs()).max(self.absolute)
    }
}

/// Both sides of an inequality of the form `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl SumCheck {
    fn new(lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        Self {
            lhs,
            rhs,
            holds: tol.allows(lhs, rhs),
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Exponents of the power family `f = (λ - x)^alpha`, `g = (λ - x)^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub alpha: f64,
    pub beta: f64,
}

impl ExponentPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, AlgebraError> {
        if !(beta >= 0.0) {
            return Err(AlgebraError::NegativeBeta(beta));
        }
        Ok(Self { alpha, beta })
    }

    /// `α² <= 2β`, allowing a few ulps so pairs computed on the boundary
    /// (e.g. `β = α²/2`) are accepted.
    pub fn is_admissible(&self) -> bool {
        let (a2, b2) = (self.alpha * self.alpha, 2.0 * self.beta);
        a2 <= b2 + 1e-14 * a2.max(b2)
    }

    /// The third exponent `2 alpha - beta - 1` paired with the `C` weights.
    pub fn complementary(&self) -> f64 {
        2.0 * self.alpha - self.beta - 1.0
    }

    pub fn require_admissible(&self) -> Result<(), AlgebraError> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(AlgebraError::Inadmissible {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }
}

/// `A` nonincreasing, `B` and `C` nondecreasing, all nonnegative and of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTriple {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl MonotoneTriple {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, AlgebraError> {
        if a.is_empty() {
            return Err(AlgebraError::EmptySequence);
        }
        for other in [&b, &c] {
            if other.len() != a.len() {
                return Err(AlgebraError::LengthMismatch {
                    left: a.len(),
                    right: other.len(),
                });
            }
        }
        for seq in [&a, &b, &c] {
            check_nonnegative(seq)?;
        }
        if let Some(index) = a.windows(2).position(|w| w[0] < w[1]) {
            return Err(AlgebraError::NotMonotone { which: 'A', index: index + 1 });
        }
        if let Some(index) = b.windows(2).position(|w| w[0] > w[1]) {
            return Err(AlgebraError::NotMonotone { which: 'B', index: index + 1 });
        }
        if let Some(index) = c.windows(2).position(|w| w[0] > w[1]) {
            return Err(AlgebraError::NotMonotone { which: 'C', index: index + 1 });
        }
        Ok(Self { a, b, c })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

fn check_nonnegative(s: &[f64]) -> Result<(), AlgebraError> {
    for (index, &value) in s.iter().enumerate() {
        if !value.is_finite() {
            return Err(AlgebraError::NonFinite { index });
        }
        if value < 0.0 {
            return Err(AlgebraError::NegativeEntry { index, value });
        }
    }
    Ok(())
}

/// `(Σ s_i)^γ <= k^(γ-1) Σ s_i^γ` for `γ >= 1`, `s_i >= 0`.
pub fn power_mean_holds(s: &[f64], gamma: f64, tol: Tolerance) -> Result<SumCheck, AlgebraError> {
    if s.is_empty() {
        return Err(AlgebraError::EmptySequence);
    }
    if !(gamma >= 1.0) {
        return Err(AlgebraError::GammaBelowOne(gamma));
    }
    check_nonnegative(s)?;
    let k = s.len() as f64;
    let lhs = s.iter().sum::<f64>().powf(gamma);
    let rhs = k.powf(gamma - 1.0) * s.iter().map(|x| x.powf(gamma)).sum::<f64>();
    Ok(SumCheck::new(lhs, rhs, tol))
}

/// Chebyshev's sum inequality for oppositely ordered sequences:
/// `Σ a_i b_i <= (1/n)(Σ a_i)(Σ b_i)`.
///
/// Sequences that are not oppositely ordered yield
/// [`AlgebraError::NotOppositelyOrdered`]; that means the inequality does not
/// apply, not that it failed.
pub fn chebyshev_sum_holds(a: &[f64], b: &[f64], tol: Tolerance) -> Result<SumCheck, AlgebraError> {
    if a.is_empty() {
        return Err(AlgebraError::EmptySequence);
    }
    if a.len() != b.len() {
        return Err(AlgebraError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        for (j, (aj, bj)) in a.iter().zip(b).enumerate().skip(i + 1) {
            if (ai - aj) * (bi - bj) > 0.0 {
                return Err(AlgebraError::NotOppositelyOrdered { i, j });
            }
        }
    }
    let n = a.len() as f64;
    let lhs = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rhs = a.iter().sum::<f64>() * b.iter().sum::<f64>() / n;
    Ok(SumCheck::new(lhs, rhs, tol))
}

fn powers(a: &[f64], exponent: f64) -> Result<Vec<f64>, AlgebraError> {
    a.iter()
        .enumerate()
        .map(|(index, &x)| {
            if x == 0.0 && exponent < 0.0 {
                Err(AlgebraError::ZeroBaseNegativeExponent { index, exponent })
            } else {
                Ok(x.powf(exponent))
            }
        })
        .collect()
}

/// Generalized Chebyshev inequality for a monotone triple and an admissible
/// exponent pair:
///
/// ```text
/// (Σ A^β B)(Σ A^(2α-β-1) C) <= (Σ A^β)(Σ A^(2α-β-1) B C)
/// ```
pub fn generalized_chebyshev_holds(
    t: &MonotoneTriple,
    e: ExponentPair,
    tol: Tolerance,
) -> Result<SumCheck, AlgebraError> {
    e.require_admissible()?;
    let wb = powers(&t.a, e.beta)?;
    let wc = powers(&t.a, e.complementary())?;
    let dot = |w: &[f64], x: &[f64]| w.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
    let bc: Vec<f64> = t.b.iter().zip(&t.c).map(|(p, q)| p * q).collect();
    let lhs = dot(&wb, &t.b) * dot(&wc, &t.c);
    let rhs = wb.iter().sum::<f64>() * dot(&wc, &bc);
    Ok(SumCheck::new(lhs, rhs, tol))
}

/// The squared-weight specialization `(Σ A² B)(Σ A C) <= (Σ A²)(Σ A B C)`.
pub fn squared_weight_chebyshev_holds(t: &MonotoneTriple, tol: Tolerance) -> SumCheck {
    let (a, b, c) = (&t.a, &t.b, &t.c);
    let s_a2b = (0..a.len()).map(|i| a[i] * a[i] * b[i]).sum::<f64>();
    let s_ac = (0..a.len()).map(|i| a[i] * c[i]).sum::<f64>();
    let s_a2 = a.iter().map(|x| x * x).sum::<f64>();
    let s_abc = (0..a.len()).map(|i| a[i] * b[i] * c[i]).sum::<f64>();
    SumCheck::new(s_a2b * s_ac, s_a2 * s_abc, tol)
}

/// Power-family couple `f(x) = (λ - x)^alpha`, `g(x) = (λ - x)^beta` on `(0, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiLambdaCouple {
    pub lambda: f64,
    pub exponents: ExponentPair,
}

impl ChiLambdaCouple {
    pub fn new(lambda: f64, exponents: ExponentPair) -> Result<Self, AlgebraError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AlgebraError::NonPositiveLambda(lambda));
        }
        Ok(Self { lambda, exponents })
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.lambda - x).powf(self.exponents.alpha)
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.lambda - x).powf(self.exponents.beta)
    }

    /// The two terms of the membership condition at `(x, y)`; the condition
    /// asks for their sum to be nonpositive.
    pub fn condition_terms(&self, x: f64, y: f64) -> (f64, f64) {
        let dx = x - y;
        let df = (self.f(x) - self.f(y)) / dx;
        let dg = (self.g(x) - self.g(y)) / dx;
        let fx = self.f(x);
        let fy = self.f(y);
        let weight = fx * fx / (self.g(x) * (self.lambda - x)) + fy * fy / (self.g(y) * (self.lambda - y));
        (df * df, weight * dg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: f64,
    pub y: f64,
    /// Value of the condition (should be `<= 0`).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub holds_on_samples: bool,
    pub first_violation: Option<Violation>,
    pub pairs_checked: usize,
    /// Whether the closed-form criterion `alpha^2 <= 2 beta` agrees with the sampled verdict.
    pub agrees_with_closed_form: bool,
}

/// Samples the membership condition on the uniform grid
/// `x_i = λ i / (N + 1)`, `i = 1..=N`, over all ordered pairs `i != j`.
///
/// A pair violates the condition when the sum of its two terms exceeds
/// `tol.relative` times their combined magnitude (plus `tol.absolute`).
pub fn chi_lambda_member(
    c: &ChiLambdaCouple,
    sample_count: usize,
    tol: Tolerance,
) -> Result<MembershipVerdict, AlgebraError> {
    if sample_count < 2 {
        return Err(AlgebraError::TooFewSamples(sample_count));
    }
    let step = c.lambda / (sample_count as f64 + 1.0);
    let mut first_violation = None;
    let mut pairs_checked = 0;
    'outer: for i in 1..=sample_count {
        let x = step * i as f64;
        for j in 1..=sample_count {
            if i == j {
                continue;
            }
            let y = step * j as f64;
            pairs_checked += 1;
            let (t1, t2) = c.condition_terms(x, y);
            let value = t1 + t2;
            let slack = (tol.relative * (t1.abs() + t2.abs())).max(tol.absolute);
            if !(value <= slack) {
                first_violation = Some(Violation { x, y, value });
                break 'outer;
            }
        }
    }
    let holds_on_samples = first_violation.is_none();
    Ok(MembershipVerdict {
        holds_on_samples,
        first_violation,
        pairs_checked,
        agrees_with_closed_form: holds_on_samples == c.exponents.is_admissible(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn power_mean_examples() {
        let r = power_mean_holds(&[1.0, 2.0], 2.0, tol()).unwrap();
        assert_eq!((r.lhs, r.rhs), (9.0, 10.0));
        assert!(r.holds);

        let r = power_mean_holds(&[3.7], 2.5, tol()).unwrap();
        assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-15);
        assert!(r.holds);

        let r = power_mean_holds(&[1.0, 1.0, 1.0], 3.0, tol()).unwrap();
        assert_eq!((r.lhs, r.rhs), (27.0, 27.0));
    }

    #[test]
    fn power_mean_rejects_bad_input() {
        assert_eq!(power_mean_holds(&[], 2.0, tol()), Err(AlgebraError::EmptySequence));
        assert_eq!(power_mean_holds(&[1.0], 0.5, tol()), Err(AlgebraError::GammaBelowOne(0.5)));
        assert!(matches!(
            power_mean_holds(&[1.0, -1.0], 2.0, tol()),
            Err(AlgebraError::NegativeEntry { index: 1, .. })
        ));
    }

    #[test]
    fn chebyshev_examples() {
        let r = chebyshev_sum_holds(&[3.0, 1.0], &[1.0, 3.0], tol()).unwrap();
        assert_eq!((r.lhs, r.rhs), (6.0, 8.0));
        assert!(r.holds);

        let r = chebyshev_sum_holds(&[2.5, 2.5], &[4.0, 4.0], tol()).unwrap();
        assert_eq!(r.lhs, 20.0);
        assert_eq!(r.rhs, 20.0);

        let r = chebyshev_sum_holds(&[5.0, 3.0, 1.0], &[1.0, 1.0, 2.0], tol()).unwrap();
        assert_eq!((r.lhs, r.rhs), (10.0, 12.0));
    }

    #[test]
    fn chebyshev_same_order_is_inapplicable() {
        assert_eq!(
            chebyshev_sum_holds(&[1.0, 2.0], &[1.0, 2.0], tol()),
            Err(AlgebraError::NotOppositelyOrdered { i: 0, j: 1 })
        );
        assert!(matches!(
            chebyshev_sum_holds(&[1.0], &[1.0, 2.0], tol()),
            Err(AlgebraError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn generalized_chebyshev_examples() {
        let t = MonotoneTriple::new(vec![2.0, 1.0], vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let r = generalized_chebyshev_holds(&t, ExponentPair::new(1.0, 1.0).unwrap(), tol()).unwrap();
        assert_eq!((r.lhs, r.rhs), (12.0, 15.0));
        assert!(r.holds);

        let t = MonotoneTriple::new(vec![1.7], vec![0.3], vec![2.2]).unwrap();
        let r = generalized_chebyshev_holds(&t, ExponentPair::new(-1.0, 0.75).unwrap(), tol()).unwrap();
        assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-14);

        let t = MonotoneTriple::new(vec![3.0, 2.0, 1.0], vec![1.0; 3], vec![1.0; 3]).unwrap();
        for (a, b) in [(2.0, 2.0), (0.5, 0.2), (-1.0, 3.0)] {
            let r = generalized_chebyshev_holds(&t, ExponentPair::new(a, b).unwrap(), tol()).unwrap();
            assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-14);
        }
    }

    #[test]
    fn generalized_chebyshev_errors() {
        let t = MonotoneTriple::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            generalized_chebyshev_holds(&t, ExponentPair::new(2.0, 1.0).unwrap(), tol()),
            Err(AlgebraError::Inadmissible { .. })
        ));
        // 2α - β - 1 = -3.5 with A_2 = 0
        assert_eq!(
            generalized_chebyshev_holds(&t, ExponentPair::new(-1.0, 0.5).unwrap(), tol()),
            Err(AlgebraError::ZeroBaseNegativeExponent { index: 1, exponent: -3.5 })
        );
        // nonnegative exponents accept zeros
        assert!(generalized_chebyshev_holds(&t, ExponentPair::new(2.0, 2.0).unwrap(), tol()).is_ok());
    }

    #[test]
    fn triple_validation() {
        assert_eq!(
            MonotoneTriple::new(vec![1.0, 2.0], vec![0.0, 1.0], vec![0.0, 1.0]),
            Err(AlgebraError::NotMonotone { which: 'A', index: 1 })
        );
        assert_eq!(
            MonotoneTriple::new(vec![2.0, 2.0], vec![1.0, 0.0], vec![0.0, 1.0]),
            Err(AlgebraError::NotMonotone { which: 'B', index: 1 })
        );
        assert!(MonotoneTriple::new(vec![], vec![], vec![]).is_err());
        assert!(ExponentPair::new(0.0, -0.1).is_err());
    }

    #[test]
    fn chi_lambda_examples() {
        let couple = |a, b| ChiLambdaCouple::new(1.0, ExponentPair::new(a, b).unwrap()).unwrap();

        let v = chi_lambda_member(&couple(2.0, 2.0), 50, tol()).unwrap();
        assert!(v.holds_on_samples);
        assert_eq!(v.pairs_checked, 50 * 49);

        let v = chi_lambda_member(&couple(0.0, 0.0), 10, tol()).unwrap();
        assert!(v.holds_on_samples);

        let v = chi_lambda_member(&couple(2.0, 1.0), 50, tol()).unwrap();
        let bad = v.first_violation.expect("violation expected");
        assert!(bad.value > 0.0);
        assert!(v.agrees_with_closed_form);

        assert_eq!(
            chi_lambda_member(&couple(1.0, 1.0), 1, tol()),
            Err(AlgebraError::TooFewSamples(1))
        );
        assert!(ChiLambdaCouple::new(0.0, ExponentPair::new(1.0, 1.0).unwrap()).is_err());
    }
}
