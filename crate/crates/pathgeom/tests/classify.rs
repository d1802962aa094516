mod common;

use pathgeom::classify::{classify, CanonicalStatus, ClassificationReport, Verdict};
use pathgeom::lagrange::sr_geodesic_ode;
use pathgeom::odeparse::{check_definite, parse_ode};
use symexpr::{Sampler, ZeroVerdict};

fn run(text: &str) -> ClassificationReport {
    classify(&parse_ode(text).unwrap(), &Sampler::default(), false).unwrap()
}

fn zero_verdict(r: &ClassificationReport, name: &str) -> ZeroVerdict {
    r.invariants.get(name).unwrap().verdict
}

#[test]
fn example_verdicts() {
    let cases = [
        ("3*(y''')^2", Verdict::VariationalNotMetric),
        ("0", Verdict::VariationalDegenerate),
        ("y*y'''", Verdict::NotVariational),
        ("5/4*(y''')^2/y''", Verdict::VariationalIndefinite),
        ("3*y''*(y''')^2/(1+(y'')^2)", Verdict::SubRiemannian),
    ];
    for (text, verdict) in cases {
        let r = run(text);
        assert_eq!(r.verdict, Some(verdict), "{text}");
        assert!(!r.is_withheld());
        assert_eq!(r.metric.is_some(), verdict == Verdict::SubRiemannian, "{text}");
    }
}

#[test]
fn exp_lagrangian_stops_at_metric_gate() {
    let r = run("3*(y''')^2");
    assert_eq!(zero_verdict(&r, "W2"), ZeroVerdict::ProvenNonzero);
    assert_eq!(zero_verdict(&r, "T4"), ZeroVerdict::ProvenNonzero);
    for name in ["I1", "T5", "T8"] {
        assert_eq!(zero_verdict(&r, name), ZeroVerdict::ProvenZero);
    }
    assert_eq!(r.canonical_scale_status, CanonicalStatus::NotApplicable);
}

#[test]
fn invariant_table_order() {
    let r = run("3*y''*(y''')^2/(1+(y'')^2)");
    assert_eq!(
        r.invariants.names(),
        [
            "I1", "T5", "T8", "T4", "T3", "T2", "T1", "I0", "T6", "T7", "U1", "U2", "W0", "W1", "W2", "H", "G0", "G1",
            "G2", "G3"
        ]
    );
    // Non-variational inputs stop after the B1 table.
    assert_eq!(run("y*y'''").invariants.names().last(), Some(&"T7"));
}

#[test]
fn flat_round_trip() {
    let r = run("3*y''*(y''')^2/(1+(y'')^2)");
    let m = r.metric.unwrap();
    assert_eq!((m.e.as_str(), m.f.as_str(), m.g.as_str()), ("1", "0", "1"));
    assert_ne!(r.canonical_scale_status, CanonicalStatus::UpToScale);
}

#[test]
fn recovered_metrics_are_fixed_points() {
    let s = Sampler::default();
    for text in common::METRICS {
        let ode = sr_geodesic_ode(&common::metric(text), &s).unwrap();
        let r = classify(&ode, &s, false).unwrap();
        assert_eq!(r.verdict, Some(Verdict::SubRiemannian), "{text}");
        let m = r.metric.unwrap();
        check_definite(&m.input, &s).unwrap();
        let again = sr_geodesic_ode(&m.input, &s).unwrap();
        assert!(s.zero_test(&again.rhs.sub_ref(&ode.rhs)).is_zero(), "{text}");
        if r.canonical_scale_status != CanonicalStatus::UpToScale {
            // The canonical scale is exact: the recovered metric is the input.
            let input = common::metric(text);
            for (a, b) in [(&m.input.e, &input.e), (&m.input.f, &input.f), (&m.input.g, &input.g)] {
                assert!(s.zero_test(&a.sub_ref(b)).is_zero(), "{text}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn constant_rescaling_gives_same_equation() {
    let s = Sampler::default();
    let flat = sr_geodesic_ode(&common::flat(), &s).unwrap();
    let four = sr_geodesic_ode(&common::metric("E=4,F=0,G=4"), &s).unwrap();
    assert_eq!(flat, four);
}

#[test]
fn strict_mode_withholds_sampled_zeros() {
    let s = Sampler::default();
    let ode = parse_ode("3*(y''')^2 + (exp(x)^2-exp(2*x))*y'''").unwrap();
    let lax = classify(&ode, &s, false).unwrap();
    assert_eq!(lax.verdict, Some(Verdict::VariationalNotMetric));
    assert!(!lax.warnings.is_empty());
    let strict = classify(&ode, &s, true).unwrap();
    assert!(strict.is_withheld());
    assert_eq!(strict.verdict, None);
    assert!(matches!(
        zero_verdict(&strict, "I1"),
        ZeroVerdict::NumericallyZero { .. }
    ));
}

#[test]
fn reports_match_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let s = Sampler::default();
    let inputs = [
        "3*(y''')^2",
        "0",
        "y*y'''",
        "3*y''*(y''')^2/(1+(y'')^2)",
        "5/4*(y''')^2/y''",
    ];
    for text in inputs {
        let r = run(text);
        let json = serde_json::to_value(&r).unwrap();
        let errors: Vec<String> = validator.iter_errors(&json).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{text}: {errors:?}");
    }
    let withheld = classify(&parse_ode("3*(y''')^2 + (exp(x)^2-exp(2*x))*y'''").unwrap(), &s, true).unwrap();
    assert!(validator.is_valid(&serde_json::to_value(&withheld).unwrap()));
}

#[test]
fn text_report_names_verdict() {
    let text = run("3*(y''')^2").render_text();
    assert!(text.contains("VariationalNotMetric"));
    assert!(text.contains("W2"));
}
