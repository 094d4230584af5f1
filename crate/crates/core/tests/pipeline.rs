use polyspec::harness::{self, CheckName, HarnessError, RunConfig, Verdict, VerificationReport};
use polyspec::DomainSpec;

fn square(points: usize, k: usize) -> RunConfig {
    RunConfig::new(DomainSpec::rectangle([1.0, 1.0], points, 1), k)
}

#[test]
fn square_run_passes_every_group() {
    let report = harness::run(&square(31, 5)).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{}", report.summary());
    assert_eq!(report.checks.len(), CheckName::ALL.len());
    for g in &report.checks {
        let expect_applicable = g.check != CheckName::Interpolation;
        assert_eq!(g.applicable, expect_applicable, "{:?}", g.check);
    }
    let spectrum = report.spectrum.as_ref().unwrap();
    assert_eq!(spectrum.eigenvalues.len(), 5);
    assert_eq!(report.oracle.as_ref().unwrap().name, "box-sum-of-squares");
    // both the analytic and the computed spectrum feed the inequality rows
    let bounds = report.group(CheckName::Bounds).unwrap();
    assert!(bounds.rows.iter().any(|r| r.source.starts_with("analytic:")));
    assert!(bounds.rows.iter().any(|r| r.source.starts_with("computed:")));
    // h = 1/32: the 1/8, 1/16, 1/32 refinement shrinks the trace deviation
    // by a factor near 1/4 on both axes
    let orders: Vec<f64> = report
        .group(CheckName::Trace)
        .unwrap()
        .rows
        .iter()
        .filter(|r| r.name == "trace_order")
        .map(|r| r.rhs)
        .collect();
    assert_eq!(orders.len(), 4);
    for order in orders {
        let ratio = 2f64.powf(-order);
        assert!((0.15..=0.35).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn l_shape_has_no_oracle() {
    let cfg = RunConfig::new(DomainSpec::l_shape(23, 1), 3);
    let report = harness::run(&cfg).unwrap();
    assert!(report.oracle.is_none());
    let oracle = report.group(CheckName::Oracle).unwrap();
    assert!(!oracle.applicable && oracle.rows.is_empty());
    assert_eq!(report.verdict, Verdict::Pass, "{}", report.summary());
    // the L-shape lies strictly above the unit square spectrum
    let lambda_1 = report.spectrum.unwrap().eigenvalues[0];
    assert!(lambda_1 > 2.0 * std::f64::consts::PI.powi(2));
}

#[test]
fn clamped_rod_run_exercises_interpolation() {
    let mut cfg = RunConfig::new(DomainSpec::interval(1.0, 999, 2), 4);
    cfg.checks = vec![CheckName::Spectrum, CheckName::Trace, CheckName::Interpolation, CheckName::Oracle, CheckName::Bounds];
    let report = harness::run(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{}", report.summary());
    assert_eq!(report.oracle.as_ref().unwrap().name, "clamped-rod-roots");
    let interp = report.group(CheckName::Interpolation).unwrap();
    assert!(interp.applicable);
    assert_eq!(interp.rows.len(), 4);
}

#[test]
fn single_eigenvalue_skips_inequalities() {
    let report = harness::run(&square(15, 1)).unwrap();
    for check in [CheckName::Bounds, CheckName::SpecialCases, CheckName::Coherence, CheckName::Chain, CheckName::Comparison] {
        assert!(!report.group(check).unwrap().applicable, "{check:?}");
    }
}

#[test]
fn selected_checks_only() {
    let mut cfg = square(15, 3);
    cfg.checks = vec![CheckName::Chain, CheckName::Symmetry, CheckName::Chain];
    let report = harness::run(&cfg).unwrap();
    let order: Vec<CheckName> = report.checks.iter().map(|g| g.check).collect();
    assert_eq!(order, [CheckName::Symmetry, CheckName::Chain]);
}

#[test]
fn identity_checks_run_without_a_spectrum() {
    let mut cfg = square(15, 3);
    cfg.checks = vec![CheckName::Symmetry, CheckName::Commutator];
    let report = harness::run(&cfg).unwrap();
    assert!(report.spectrum.is_none());
    assert_eq!(report.verdict, Verdict::Pass);
}

#[test]
fn configuration_errors() {
    let err = harness::run(&square(15, 0)).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(matches!(harness::run(&square(3, 10)), Err(HarnessError::Config(_))));
    let mut cfg = square(15, 3);
    cfg.tolerances.insert("bogus".into(), 1.0);
    assert!(matches!(harness::run(&cfg), Err(HarnessError::Config(_))));
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = harness::run(&square(15, 3)).unwrap();
    let prefix = dir.path().join("nested/out");
    let (json, csv) = report.write(prefix.to_str().unwrap()).unwrap();
    let back = VerificationReport::from_json(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(back, report);
    let csv = std::fs::read_to_string(csv).unwrap();
    let rows: usize = report.checks.iter().map(|g| g.rows.len()).sum();
    assert_eq!(csv.lines().count(), rows + 1);
    assert!(csv.starts_with("check,name,source,k,alpha,beta,lhs,rhs,margin,holds"));
}

#[test]
fn foreign_schema_rejected() {
    let report = harness::run(&square(15, 2)).unwrap();
    let text = report.to_json().replace("polyspec-report/1", "other/9");
    assert!(matches!(VerificationReport::from_json(&text), Err(HarnessError::Report(_))));
}

#[test]
fn external_eigenvalue_lists() {
    let pi2 = std::f64::consts::PI.powi(2);
    let square: Vec<f64> = [2.0, 5.0, 5.0, 8.0, 10.0, 10.0].iter().map(|m| m * pi2).collect();
    let groups = harness::check_eigenvalues(&square, 1, 2, &Default::default(), &Default::default(), "list").unwrap();
    assert!(groups.iter().all(|g| g.passed));
    let none = Default::default();
    assert!(harness::check_eigenvalues(&[3.0, 1.0], 1, 2, &Default::default(), &none, "x").is_err());
    assert!(harness::check_eigenvalues(&[1.0], 1, 2, &Default::default(), &none, "x").is_err());
    assert!(harness::check_eigenvalues(&[-1.0, 1.0], 1, 2, &Default::default(), &none, "x").is_err());
    // a spectrum with a far too large gap violates the gap bounds
    let groups = harness::check_eigenvalues(&[1.0, 1000.0], 1, 2, &Default::default(), &none, "x").unwrap();
    assert!(!groups.iter().all(|g| g.passed));
}
