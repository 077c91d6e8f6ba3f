use stabcert::certificate::{exit_code, CheckStatus, EXIT_DISCREPANCY, EXIT_FAIL, EXIT_PASS, EXIT_UNCERTIFIED};
use stabcert::optimizer::{minimize_delta0, Objective, SearchConfig};
use stabcert::pipeline::{names, reverify, verify, verify_all, Settings};
use stabcert::{Certificate, Rational};

fn fast() -> Settings {
    Settings {
        pointwise_samples: 1_000,
        quadform_samples: 500,
        linearity_samples: 32,
        barrier_samples: 32,
        ..Settings::default()
    }
}

#[test]
fn verify_all_round_trips_and_reverifies() {
    let cert = verify_all(&fast()).unwrap();
    let back = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(back, cert);
    assert!(reverify(&back).unwrap().is_empty());
    assert_eq!(exit_code(&back, true), EXIT_PASS);
    let rows = back.sections.iter().filter(|s| s.n.is_some()).count();
    assert_eq!(rows, 3);
    assert!(back.section(names::DELTA1_SECTION).is_some());
    assert!(back.section(names::EPSILON1_SECTION).is_none());
}

#[test]
fn c_ms_adds_the_eps1_table() {
    let s = Settings { c_ms: Some(2.0), ..fast() };
    let cert = verify_all(&s).unwrap();
    let table = cert.section(names::EPSILON1_SECTION).unwrap();
    assert!(table.values.iter().any(|(k, _)| k.contains("n = 3, q = 1/2, delta = 1")));
}

#[test]
fn exit_codes_follow_content() {
    let mut cert = verify(4, &fast()).unwrap();
    assert_eq!(exit_code(&cert, true), EXIT_PASS);
    cert.sections[0].reference_values[0].quoted = Rational::new(1, 7);
    cert.sections[0].reference_values[0].matches = false;
    assert_eq!(exit_code(&cert, false), EXIT_PASS);
    assert_eq!(exit_code(&cert, true), EXIT_DISCREPANCY);
    cert.sections[0].checks[0].status = CheckStatus::Fail;
    assert_eq!(exit_code(&cert, true), EXIT_FAIL);
    // tampered certificates do not reverify
    assert!(!reverify(&cert).unwrap().is_empty());
}

#[test]
fn optimizer_is_deterministic_and_dominates_the_row() {
    let mut config = SearchConfig::new(3, Objective::MinimizeDelta0).unwrap();
    config.budget = 20_000;
    let first = minimize_delta0(&config).unwrap();
    let second = minimize_delta0(&config).unwrap();
    assert_eq!(first, second);
    assert!(first.certified && first.delta0 <= Rational::new(1, 3));
}

#[test]
fn uncertified_search_maps_to_its_exit_code() {
    let mut config = SearchConfig::new(6, Objective::MinimizeDelta0).unwrap();
    config.budget = 2_000;
    let result = minimize_delta0(&config).unwrap();
    assert!(!result.certified);
    let mut cert = Certificate::new("optimize n=6", Default::default());
    cert.search = Some(result);
    assert_eq!(exit_code(&cert.finalize(), false), EXIT_UNCERTIFIED);
}
