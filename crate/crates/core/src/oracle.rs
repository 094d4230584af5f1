//! Closed-form reference spectra used as independent ground truth.

use std::f64::consts::PI;

use crate::domain::{DomainSpec, Shape};

/// First `count` Dirichlet eigenvalues of `-u''` on `(0, a)`: `(π j / a)²`.
pub fn interval_spectrum(extent: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| (PI * j as f64 / extent).powi(2)).collect()
}

/// Eigenvalues of the `(-1, 2, -1) / h²` matrix with `m` interior points:
/// `(4/h²) sin²(jπh / 2a)` for `h = a / (m + 1)`.
pub fn discrete_interval_spectrum(extent: f64, m: usize, count: usize) -> Vec<f64> {
    let h = extent / (m as f64 + 1.0);
    (1..=count.min(m))
        .map(|j| 4.0 / (h * h) * (j as f64 * PI * h / (2.0 * extent)).sin().powi(2))
        .collect()
}

/// First `count` Dirichlet Laplacian eigenvalues on a box with the given
/// side lengths: `π² Σ_p (j_p / a_p)²` sorted ascending, with multiplicity.
pub fn box_spectrum(extents: &[f64], count: usize) -> Vec<f64> {
    if count == 0 || extents.is_empty() {
        return Vec::new();
    }
    // Every mode among the lowest `count` has j_p <= count along each axis.
    let mut values = vec![0.0];
    for &a in extents {
        let mut next = Vec::with_capacity(values.len() * count);
        for v in &values {
            for j in 1..=count {
                next.push(v + (PI * j as f64 / a).powi(2));
            }
        }
        next.sort_by(f64::total_cmp);
        next.truncate(count);
        values = next;
    }
    values
}

/// `j`-th positive root (1-based) of `cos k cosh k = 1`.
///
/// Rewritten as `cos k - sech k = 0`, which is well scaled; the root lies
/// within 0.3 of `(j + ½)π` and the bracket holds a single sign change.
pub fn clamped_rod_root(j: usize) -> f64 {
    assert!(j >= 1, "roots are numbered from 1");
    let f = |k: f64| k.cos() - 1.0 / k.cosh();
    let centre = (j as f64 + 0.5) * PI;
    let (mut lo, mut hi) = (centre - 0.3, centre + 0.3);
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) < 0.0);
    while hi - lo > 1e-12 * centre {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clamped rod eigenvalues of `u'''' = λ u` on `(0, a)` with `u = u' = 0` at
/// both ends: `(k_j / a)⁴`.
pub fn clamped_rod_spectrum(extent: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| (clamped_rod_root(j) / extent).powi(4)).collect()
}

/// Known continuum spectrum for a domain, if the registry has one.
pub fn analytic_spectrum(spec: &DomainSpec, count: usize) -> Option<Vec<f64>> {
    match (spec.shape, spec.l) {
        (Shape::Interval, 1) | (Shape::Rectangle, 1) | (Shape::Box, 1) => Some(box_spectrum(&spec.extents, count)),
        (Shape::Interval, 2) => Some(clamped_rod_spectrum(spec.extents[0], count)),
        _ => None,
    }
}

/// Name of the registry entry [`analytic_spectrum`] would use.
pub fn oracle_name(spec: &DomainSpec) -> Option<&'static str> {
    match (spec.shape, spec.l) {
        (Shape::Interval, 1) => Some("interval-sine-modes"),
        (Shape::Rectangle, 1) | (Shape::Box, 1) => Some("box-sum-of-squares"),
        (Shape::Interval, 2) => Some("clamped-rod-roots"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_rod_root() {
        assert_relative_eq!(clamped_rod_root(1), 4.730040744862704, max_relative = 1e-12);
        assert_relative_eq!(clamped_rod_root(2), 7.853204624095838, max_relative = 1e-12);
        for j in 1..=8 {
            let k = clamped_rod_root(j);
            assert!((k.cos() * k.cosh() - 1.0).abs() < 1e-9 * k.cosh());
        }
    }

    #[test]
    fn unit_square_list() {
        let s = box_spectrum(&[1.0, 1.0], 11);
        let units: Vec<f64> = s.iter().map(|v| (v / (PI * PI)).round()).collect();
        assert_eq!(units, vec![2.0, 5.0, 5.0, 8.0, 10.0, 10.0, 13.0, 13.0, 17.0, 17.0, 18.0]);
    }

    #[test]
    fn interval_matches_one_dimensional_box() {
        assert_eq!(interval_spectrum(2.0, 5), box_spectrum(&[2.0], 5));
    }

    #[test]
    fn discrete_interval_converges() {
        let d = discrete_interval_spectrum(1.0, 999, 1)[0];
        assert!((d - PI * PI).abs() / (PI * PI) < 1e-6);
    }

    #[test]
    fn registry_coverage() {
        let rod = DomainSpec::interval(1.0, 20, 2);
        assert_eq!(oracle_name(&rod), Some("clamped-rod-roots"));
        assert!(analytic_spectrum(&DomainSpec::l_shape(8, 1), 3).is_none());
        assert!(analytic_spectrum(&DomainSpec::rectangle([1.0, 1.0], 10, 2), 3).is_none());
    }
}
