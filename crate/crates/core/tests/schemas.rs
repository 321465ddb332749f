//! The shipped JSON schemas accept what the library writes and reject what
//! the library refuses to read.

use gaussbv::bv::measure::Atom;
use gaussbv::bv::{Bv1d, Continuous, FinVectorMeasure};
use gaussbv::coarea::GridFunction;
use gaussbv::domains::PlanarDomain;
use proptest::prelude::*;
use serde_json::Value;

fn schema(name: &str) -> jsonschema::Validator {
    let path = format!("{}/../../schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn domains_written_by_the_library_validate() {
    let v = schema("domain");
    for d in [
        PlanarDomain::rhomb(3).unwrap(),
        PlanarDomain::disc([0.5, -1.0], 2.0).unwrap(),
        PlanarDomain::half_plane([0.0, 1.0], -0.3).unwrap(),
        PlanarDomain::rectangle(-1.0, 1.0, 0.0, 2.0).unwrap(),
    ] {
        let j = json(&d.to_json());
        assert!(v.is_valid(&j), "{j}");
        assert_eq!(PlanarDomain::from_json(&d.to_json()).unwrap(), d);
    }
    for bad in [r#"{"kind":"rhomb","m":1}"#, r#"{"kind":"disc","center":[0,0]}"#, r#"{"kind":"ellipse","a":1}"#] {
        assert!(!v.is_valid(&json(bad)), "{bad}");
        assert!(PlanarDomain::from_json(bad).is_err(), "{bad}");
    }
}

#[test]
fn bv1d_and_measure_reject_extra_keys() {
    let b = schema("bv1d");
    let m = schema("fin_vector_measure");
    let extra_b = r#"{"continuous":{"kind":"piecewise_linear","knots":[[0,0]]},"jumps":[],"note":1}"#;
    assert!(!b.is_valid(&json(extra_b)));
    assert!(Bv1d::from_json(extra_b).is_err());
    let extra_m = r#"{"dim":1,"atoms":[[0,1]],"unit":"m"}"#;
    assert!(!m.is_valid(&json(extra_m)));
    assert!(FinVectorMeasure::from_json(extra_m).is_err());
    assert!(!m.is_valid(&json(r#"{"dim":0,"atoms":[]}"#)));
    assert!(FinVectorMeasure::from_json(r#"{"dim":0,"atoms":[]}"#).is_err());
}

#[test]
fn grid_sidecar_validates() {
    let g = GridFunction::sample([0.0, 0.0], [1.0, 1.0], 5, 4, |x| x[0] + x[1], |x| x[0] < 0.6).unwrap();
    let j = serde_json::to_value(g.sidecar()).unwrap();
    assert!(schema("grid_sidecar").is_valid(&j), "{j}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bv1d_round_trips_through_schema(
        knots in prop::collection::vec(-5.0f64..5.0, 1..6),
        heights in prop::collection::vec((-3.0f64..3.0).prop_filter("nonzero", |h| h.abs() > 1e-3), 0..5),
    ) {
        let knots: Vec<[f64; 2]> = knots.iter().enumerate().map(|(i, v)| [i as f64 - 2.0, *v]).collect();
        let jumps: Vec<(f64, f64)> = heights.iter().enumerate().map(|(i, h)| (0.7 * i as f64 - 1.1, *h)).collect();
        let f = Bv1d::with_jumps(Continuous::PiecewiseLinear(knots), &jumps).unwrap();
        let s = f.to_json().unwrap();
        prop_assert!(schema("bv1d").is_valid(&json(&s)));
        let g = Bv1d::from_json(&s).unwrap();
        for t in [-3.0, -1.1, -0.2, 0.0, 0.35, 1.7, 4.0] {
            prop_assert_eq!(f.value(t), g.value(t));
        }
    }

    #[test]
    fn measure_round_trips_through_schema(
        dim in 1usize..4,
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 0..8),
    ) {
        let atoms = rows.iter().enumerate().map(|(i, r)| Atom { at: i as f64 * 0.5, value: r[..dim].to_vec() }).collect();
        let mu = FinVectorMeasure::new(dim, atoms).unwrap();
        let s = mu.to_json().unwrap();
        prop_assert!(schema("fin_vector_measure").is_valid(&json(&s)));
        let nu = FinVectorMeasure::from_json(&s).unwrap();
        prop_assert_eq!(nu.variation().unwrap(), mu.variation().unwrap());
    }
}
