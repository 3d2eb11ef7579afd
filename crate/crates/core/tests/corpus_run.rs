use growthlab::corpus::{corpus, run_corpus, run_entries, run_entry, FailTag, TolerancePolicy};
use growthlab::expr::parse;
use growthlab::growth::GrowthProfile;
use growthlab::numeric::log_grid;
use growthlab::odelab::OdeInstance;
use growthlab::report::to_json;

#[test]
fn full_corpus_passes() {
    let s = run_corpus(&TolerancePolicy::default()).unwrap();
    assert_eq!(s.total, 9);
    for e in &s.entries {
        assert!(e.pass, "{}: {:?}", e.label, e.diffs);
    }
    assert!(s.all_pass());
}

#[test]
fn tight_residual_tolerance_fails() {
    let policy = TolerancePolicy {
        residual_tol: 1e-15,
        ..TolerancePolicy::default()
    };
    let s = run_corpus(&policy).unwrap();
    let failed: Vec<_> = s.entries.iter().filter(|e| !e.residual_pass).collect();
    assert!(!failed.is_empty());
    for e in failed {
        assert!(!e.pass);
        assert!(
            e.diffs.iter().any(|d| d.starts_with("residual")),
            "{:?}",
            e.diffs
        );
    }
}

#[test]
fn mutated_first_example_passes() {
    // B -> exp(z) + 1 with H = 2 exp(z) has the finite order solution exp(z)
    let mut entry = corpus().unwrap().remove(0);
    let i = &entry.instance;
    entry.instance = OdeInstance::new(
        "eg1-mutated",
        i.a.clone(),
        parse("exp(z) + 1").unwrap(),
        parse("2*exp(z)").unwrap(),
        Some(parse("exp(z)").unwrap()),
        i.factorization.clone(),
    )
    .unwrap();
    entry.expected.orders.insert("H".into(), 1.0);
    entry.expected.which_hypothesis_fails = FailTag::OrdersAndH;
    let r = run_entry(&entry, &TolerancePolicy::default());
    assert!(r.pass, "{:?}", r.diffs);
}

#[test]
fn wrong_expectation_is_reported_not_fatal() {
    let mut entries = corpus().unwrap();
    entries[2].expected.orders.insert("B".into(), 1.0);
    entries[3].expected.which_hypothesis_fails = FailTag::None;
    let s = run_entries(&entries, &TolerancePolicy::default());
    assert_eq!(s.passed, 7);
    assert!(s.entries[2].diffs.iter().any(|d| d.contains("rho(B)")));
    assert!(s.entries[3]
        .diffs
        .iter()
        .any(|d| d.contains("hypothesis failure")));
}

#[test]
fn summary_csv_has_nine_rows() {
    let s = run_corpus(&TolerancePolicy::default()).unwrap();
    let csv = s.to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[0].starts_with("label,residual_max"));
    assert!(lines[1].starts_with("eg1,"));
}

#[test]
fn summary_json_is_sorted_and_stable() {
    let a = to_json(&run_corpus(&TolerancePolicy::default()).unwrap()).unwrap();
    let b = to_json(&run_corpus(&TolerancePolicy::default()).unwrap()).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<_> = v["entries"][0]
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(a.find("\"diffs\"").unwrap() < a.find("\"label\"").unwrap());
}

#[test]
fn exp_profile_log_m_equals_r() {
    let p = GrowthProfile::compute(&parse("exp(z)").unwrap(), &log_grid(1.0, 1e3, 10), 64).unwrap();
    let csv = p.to_csv();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line
            .split(',')
            .take(2)
            .map(|c| c.parse().unwrap())
            .collect();
        assert!((cols[1] - cols[0]).abs() <= 1e-9 * cols[0], "{line}");
    }
}
