use paracity::city::CityParams;
use paracity::config::{fielbaum_mu, parse_config, parse_number, read_config, write_config, ConfigError};

const BASE: &str = "\
# base setting
n = 8
T = 30
g = 1/3
Y = 24000
a = 0.8
alpha = 0.2
beta = 0.5
gamma = 0.3   # lateral share
K = 100
";

#[test]
fn parses_base_file() {
    let p = parse_config(BASE).unwrap();
    assert_eq!(p.n, 8);
    assert_eq!(p.g, 1.0 / 3.0);
    assert_eq!((p.alpha, p.beta, p.gamma), (0.2, 0.5, 0.3));
    assert_eq!(p.lambda, None);
    assert_eq!(p.mu, 1.0);
    p.validate().unwrap();
}

#[test]
fn optional_keys() {
    let p = parse_config(&format!("{BASE}Lambda = 30\nmu = 0.5\n")).unwrap();
    assert_eq!((p.lambda, p.mu), (Some(30), 0.5));
}

#[test]
fn numbers_and_fractions() {
    assert_eq!(parse_number(" 2.5 "), Some(2.5));
    assert_eq!(parse_number("1 / 4"), Some(0.25));
    assert_eq!(parse_number("1/0"), None);
    assert_eq!(parse_number("abc"), None);
    assert_eq!(parse_number("1e3"), Some(1000.0));
}

#[test]
fn errors_name_the_field() {
    let missing = parse_config(&BASE.replace("K = 100\n", "")).unwrap_err();
    assert!(matches!(missing, ConfigError::Missing("K")));
    assert!(missing.to_string().contains("`K`"));

    let bad = parse_config(&BASE.replace("Y = 24000", "Y = lots")).unwrap_err();
    assert!(bad.to_string().contains("`Y`"), "{bad}");

    let unknown = parse_config(&format!("{BASE}zones = 3\n")).unwrap_err();
    assert!(matches!(unknown, ConfigError::UnknownKey { line: 11, .. }));

    let twice = parse_config(&format!("{BASE}n = 9\n")).unwrap_err();
    assert!(matches!(twice, ConfigError::Duplicate { .. }));

    assert!(matches!(parse_config("n 8"), Err(ConfigError::Syntax { line: 1 })));
    assert!(parse_config(&BASE.replace("n = 8", "n = 8.5")).unwrap_err().to_string().contains("`n`"));
    assert!(parse_config(&format!("{BASE}Lambda = -2\n")).is_err());
}

#[test]
fn round_trip_through_text() {
    let p = CityParams { lambda: Some(40), mu: 0.25, ..parse_config(BASE).unwrap() };
    assert_eq!(parse_config(&write_config(&p)).unwrap(), p);
}

#[test]
fn reads_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("city.cfg");
    std::fs::write(&path, BASE).unwrap();
    assert_eq!(read_config(&path).unwrap().n, 8);
    assert!(matches!(read_config(dir.path().join("none.cfg")), Err(ConfigError::Io(_))));
}

#[test]
fn operator_weight_from_hourly_costs() {
    assert!((fielbaum_mu(10.65, 1.48).unwrap() - 0.87799).abs() < 1e-5);
    assert_eq!(fielbaum_mu(1.0, 1.0).unwrap(), 0.5);
    assert!(fielbaum_mu(1.0, 0.0).is_err());
    assert!(fielbaum_mu(-1.0, 2.0).is_err());
    assert!(fielbaum_mu(f64::NAN, 2.0).is_err());
}
