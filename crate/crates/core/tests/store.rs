mod common;

use std::fs;

use common::{gen, rng, time};
use tempfile::tempdir;
use updprov::store::{self, replay_log, verify_store, CommitOptions, SnapshotInterval, StoreError};
use updprov::{Atom, GraphName, Store, StoreConfig};

fn opts(step: usize) -> CommitOptions {
    CommitOptions {
        user: Some(Atom::literal(format!("user{}", step % 2))),
        time: Some(time(step)),
        extra: Vec::new(),
    }
}

fn populate(root: &std::path::Path, seed: u64, n: usize, config: &StoreConfig) -> Store {
    store::init(root, config).unwrap();
    let mut s = Store::open_for_write(root).unwrap();
    let mut r = rng(seed);
    for step in 0..n {
        let _ = s.apply(&gen::update_text(&mut r), opts(step));
    }
    s
}

#[test]
fn reopening_gives_the_same_state() {
    for seed in 0..10 {
        let dir = tempdir().unwrap();
        let config = StoreConfig {
            snapshot_interval: SnapshotInterval::Every(3),
            ..StoreConfig::default()
        };
        let written = populate(dir.path(), seed, 30, &config);
        let (prov, log) = (written.prov().clone(), written.log().to_vec());
        drop(written);
        let reopened = Store::open(dir.path()).unwrap();
        assert_eq!(reopened.prov(), &prov);
        assert_eq!(reopened.log(), log.as_slice());
    }
}

#[test]
fn log_replay_reproduces_state_bytes() {
    for seed in 0..10 {
        let dir = tempdir().unwrap();
        let config = StoreConfig {
            snapshot_interval: SnapshotInterval::Never,
            materialize_data_graphs: seed % 2 == 0,
            ..StoreConfig::default()
        };
        let s = populate(dir.path(), seed, 30, &config);
        let states = replay_log(&config, s.log()).unwrap();
        let on_disk = fs::read_to_string(dir.path().join("state.nq")).unwrap();
        assert_eq!(states.last().map(String::as_str).unwrap_or(""), on_disk);
        assert!(verify_store(dir.path()).unwrap().is_clean());
    }
}

#[test]
fn blank_node_updates_replay_with_logged_bindings() {
    let dir = tempdir().unwrap();
    store::init(dir.path(), &StoreConfig::default()).unwrap();
    let mut s = Store::open_for_write(dir.path()).unwrap();
    s.apply("INSERT DATA { _:x <http://ex/p> _:y . _:y <http://ex/p> <http://ex/a> }", opts(0)).unwrap();
    assert_eq!(s.log()[0].skolem.len(), 2);
    let states = replay_log(s.config(), s.log()).unwrap();
    assert_eq!(states[0], fs::read_to_string(dir.path().join("state.nq")).unwrap());
}

#[test]
fn tampering_is_detected_on_open() {
    let dir = tempdir().unwrap();
    drop(populate(dir.path(), 7, 10, &StoreConfig::default()));
    let path = dir.path().join("state.nq");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("<http://ex/x> <http://ex/y> <http://ex/z> .\n");
    fs::write(&path, text).unwrap();
    assert!(matches!(Store::open(dir.path()), Err(StoreError::Corruption(_))));
    assert!(!verify_store(dir.path()).unwrap().is_clean());
}

#[test]
fn one_writer_at_a_time() {
    let dir = tempdir().unwrap();
    store::init(dir.path(), &StoreConfig::default()).unwrap();
    let first = Store::open_for_write(dir.path()).unwrap();
    assert!(matches!(Store::open_for_write(dir.path()), Err(StoreError::Locked(_))));
    // readers are not blocked
    assert!(Store::open(dir.path()).is_ok());
    drop(first);
    assert!(Store::open_for_write(dir.path()).is_ok());
}

#[test]
fn rejected_update_leaves_files_untouched() {
    let dir = tempdir().unwrap();
    store::init(dir.path(), &StoreConfig::default()).unwrap();
    let mut s = Store::open_for_write(dir.path()).unwrap();
    s.apply("CREATE GRAPH <http://ex/g>", opts(0)).unwrap();
    let before = (fs::read(dir.path().join("state.nq")).unwrap(), fs::read(dir.path().join("log")).unwrap());
    assert!(s.apply("CREATE GRAPH <http://ex/g>", opts(1)).is_err());
    assert!(s.apply("INSERT DATA { GRAPH <urn:upd:prov> { <a> <b> <c> } }", opts(2)).is_err());
    assert!(matches!(s.apply("INSERT DATA {", opts(3)), Err(StoreError::Syntax(_))));
    let after = (fs::read(dir.path().join("state.nq")).unwrap(), fs::read(dir.path().join("log")).unwrap());
    assert_eq!(before, after);
    assert_eq!(s.prov().current_version(&GraphName::iri("http://ex/g")).unwrap().0, 0);
}

#[test]
fn init_refuses_existing_store() {
    let dir = tempdir().unwrap();
    store::init(dir.path(), &StoreConfig::default()).unwrap();
    assert!(matches!(store::init(dir.path(), &StoreConfig::default()), Err(StoreError::Exists(_))));
}
