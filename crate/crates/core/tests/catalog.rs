use std::collections::BTreeSet;

use modal_core::actualization::ActualizationOptions;
use modal_core::catalog::{all_fixtures, by_name, run_catalog, ScenarioFixture, FIXTURE_NAMES};
use modal_core::operator::CMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn definite_set(f: &ScenarioFixture) -> BTreeSet<String> {
    f.check(ActualizationOptions::default())
        .unwrap()
        .rows
        .into_iter()
        .filter(|r| r.actual)
        .map(|r| r.label)
        .collect()
}

#[test]
fn regression_table_passes() {
    let rep = run_catalog(ActualizationOptions::default()).unwrap();
    assert_eq!(rep.fixtures.len(), FIXTURE_NAMES.len());
    assert!(rep.pass, "{:#?}", rep.fixtures.iter().filter(|f| !f.pass).collect::<Vec<_>>());
}

#[test]
fn named_verdicts() {
    let h = by_name("hydrogen").unwrap().check(Default::default()).unwrap();
    let get = |r: &modal_core::catalog::FixtureReport, l: &str| {
        r.rows.iter().find(|x| x.label == l).unwrap().actual
    };
    assert!(!get(&h, "L²") && !get(&h, "L_z"));
    let z = by_name("zeeman_hydrogen_non_coulomb").unwrap().check(Default::default()).unwrap();
    assert!(get(&z, "L²") && get(&z, "L_z"));
    let zc = by_name("zeeman_hydrogen").unwrap().check(Default::default()).unwrap();
    assert!(!get(&zc, "L²") && get(&zc, "L_z"));
    let fs = by_name("fine_structure").unwrap().check(Default::default()).unwrap();
    assert!(get(&fs, "J²") && !get(&fs, "J_z"));
}

#[test]
fn bundles_serialize() {
    for f in all_fixtures().unwrap() {
        let v = serde_json::to_value(f.to_bundle()).unwrap();
        assert_eq!(v["system"]["dim"], f.system.dim());
        assert!(v["expected_verdicts"].as_object().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lifting_degeneracy_never_loses_definite_observables(
        which in 0..FIXTURE_NAMES.len(),
        seed in proptest::collection::vec(1e-4f64..1e-3, 64),
    ) {
        let f = by_name(FIXTURE_NAMES[which]).unwrap();
        let n = f.system.dim();
        // diagonal in the fixture basis, all entries distinct
        let delta = CMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(seed[i % seed.len()] * (1.0 + i as f64), 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let g = f.perturbed("perturbed", &delta).unwrap();
        let before = definite_set(&f);
        let after = definite_set(&g);
        prop_assert!(before.is_subset(&after), "{before:?} ⊄ {after:?}");
    }
}
