mod common;

use std::collections::BTreeMap;

use common::{run_session, Session};
use proptest::prelude::*;
use updprov::model::{Atom, Graph, GraphName, Triple};
use updprov::provenance::vocab::{CURRENT, NS};
use updprov::provenance::Policy;
use updprov::store::SnapshotInterval;
use updprov::{apply_update, Dataset, ProvStore};

fn policies() -> impl Strategy<Value = Policy> {
    (
        prop_oneof![Just(SnapshotInterval::Every(1)), Just(SnapshotInterval::Every(3)), Just(SnapshotInterval::Never)],
        any::<bool>(),
    )
        .prop_map(|(interval, materialize_data)| Policy { interval, materialize_data })
}

/// Every recorded version rebuilds to the reference state it had.
fn check_reconstruction(s: &Session) -> Result<(), TestCaseError> {
    let mut seen: BTreeMap<(GraphName, usize), Graph> = BTreeMap::new();
    for (state, currents) in s.states.iter().zip(&s.currents) {
        for (g, &i) in currents {
            let expected = state.graph(g).cloned().unwrap_or_default();
            if let Some(prev) = seen.insert((g.clone(), i), expected.clone()) {
                prop_assert_eq!(&prev, &expected, "version {} of {} seen with two contents", i, g);
            }
        }
    }
    for ((g, i), expected) in &seen {
        let got = s.prov.reconstruct(g, *i).map_err(|e| TestCaseError::fail(format!("{g} v{i}: {e}")))?;
        prop_assert_eq!(&got, expected, "version {} of {}", i, g);
    }
    Ok(())
}

fn history_without_current(prov: &ProvStore) -> Graph {
    let current = Atom::iri(CURRENT);
    let mut g = prov.prov_graph().clone();
    let drop: Vec<Triple> = g.iter().filter(|t| t.predicate == current).cloned().collect();
    drop.iter().for_each(|t| {
        g.remove(t);
    });
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn store_agrees_with_reference_semantics(seed in any::<u64>(), policy in policies()) {
        let s = run_session(seed, 25, policy);
        prop_assert!(s.disagreements.is_empty(), "{:?}", s.disagreements);
        prop_assert_eq!(s.prov.user_dataset(), s.states.last().unwrap());
        check_reconstruction(&s)?;
        let report = s.prov.verify_history();
        prop_assert!(report.is_clean(), "{}", report);
    }

    /// Recorded history only grows; old snapshots never change.
    #[test]
    fn history_is_append_only(seed in any::<u64>(), policy in policies()) {
        let s = run_session(seed, 20, policy);
        let mut replay = ProvStore::new(policy);
        let mut before = history_without_current(&replay);
        let mut snapshots = replay.materialized_versions().clone();
        for (step, (u, text)) in s.accepted.iter().enumerate() {
            let meta = updprov::UpdateMeta::new(format!("user{}", step % 3), common::time(step), text.clone());
            replay.apply_with_provenance(u, &meta).unwrap();
            let after = history_without_current(&replay);
            prop_assert!(before.is_subset(&after), "update {} removed history", text);
            for (v, g) in &snapshots {
                prop_assert_eq!(replay.materialized_versions().get(v), Some(g));
            }
            before = after;
            snapshots = replay.materialized_versions().clone();
        }
    }

    /// Each update's effect on the user graphs is exactly the plain update.
    #[test]
    fn user_view_is_plain_update(seed in any::<u64>(), policy in policies()) {
        let s = run_session(seed, 20, policy);
        let mut d = Dataset::new();
        for ((u, _), expected) in s.accepted.iter().zip(&s.states[1..]) {
            d = apply_update(u, &d).unwrap();
            prop_assert_eq!(&d, expected);
        }
    }

    /// Replaying with data graphs only from the recorded sources gives the
    /// same versions, so the sources are complete.
    #[test]
    fn recorded_sources_suffice(seed in any::<u64>()) {
        let s = run_session(seed, 25, Policy { interval: SnapshotInterval::Never, materialize_data: false });
        check_reconstruction(&s)?;
    }

    #[test]
    fn dataset_form_round_trips(seed in any::<u64>(), policy in policies()) {
        let s = run_session(seed, 15, policy);
        let back = ProvStore::from_dataset(s.prov.to_dataset(), policy).unwrap();
        prop_assert_eq!(&back, &s.prov);
    }
}

#[test]
fn vocabulary_lives_in_one_namespace() {
    assert!(CURRENT.starts_with(NS));
}
