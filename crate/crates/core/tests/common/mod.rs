#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use rand::rngs::StdRng;
use rand::SeedableRng;
use updprov::query::ValuationSet;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn to_naive(rows: &ValuationSet) -> oracle::NaiveSet {
    rows.iter()
        .map(|m| m.iter().map(|(v, a)| (v.clone(), a.clone())).collect())
        .collect()
}

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use updprov::model::{Dataset, GraphName};
use updprov::provenance::Policy;
use updprov::{ProvStore, Update, UpdateMeta};

pub fn time(step: usize) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds(step as i64)
}

/// A random update sequence applied both to a provenance store and to the
/// reference semantics, keeping only the updates both accept.
pub struct Session {
    pub prov: ProvStore,
    /// Accepted updates with the text recorded for them.
    pub accepted: Vec<(Update, String)>,
    /// Reference state after each accepted update, starting from empty.
    pub states: Vec<Dataset>,
    /// Current version index of every live tracked graph after each
    /// accepted update.
    pub currents: Vec<BTreeMap<GraphName, usize>>,
    /// Updates where the two sides disagreed on acceptance.
    pub disagreements: Vec<String>,
}

pub fn run_session(seed: u64, len: usize, policy: Policy) -> Session {
    let mut r = rng(seed);
    let mut s = Session {
        prov: ProvStore::new(policy),
        accepted: Vec::new(),
        states: vec![Dataset::new()],
        currents: vec![BTreeMap::new()],
        disagreements: Vec::new(),
    };
    for step in 0..len {
        let text = gen::update_text(&mut r);
        let u = updprov::parse_update(&text).expect("generated updates parse");
        let meta = UpdateMeta::new(format!("user{}", step % 3), time(step), text.clone());
        let expected = oracle::naive_apply(&u, s.states.last().unwrap());
        let got = s.prov.apply_with_provenance(&u, &meta);
        match (expected, got) {
            (Ok(d), Ok(_)) => {
                s.states.push(d);
                s.accepted.push((u, text));
                s.currents.push(current_indices(&s.prov));
            }
            (Err(_), Err(_)) => {}
            (e, g) => s.disagreements.push(format!("{text}: oracle {:?}, store {:?}", e.map(|_| ()), g.map(|_| ()))),
        }
    }
    s
}

pub fn current_indices(prov: &ProvStore) -> BTreeMap<GraphName, usize> {
    prov.tracked_graphs()
        .into_iter()
        .filter(|g| prov.user_dataset().is_defined(g))
        .filter_map(|g| prov.current_version(&g).ok().map(|(i, _)| (g, i)))
        .collect()
}
