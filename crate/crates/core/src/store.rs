//! On-disk store: one canonical dataset file plus an append-only commit log.
//!
//! A store directory holds `state.nq` (the whole [`ProvStore`] in the line
//! format), `log` (one JSON object per committed update) and `config`
//! (`key=value` lines). Writers hold the `lock` file for their lifetime.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::Atom;
use crate::provenance::{AppliedRecord, Policy, ProvError, ProvStore, Report, UpdateMeta};
use crate::syntax::{parse_dataset, parse_term, parse_update_with, serialize_dataset, Skolemizer, SyntaxError};

const STATE_FILE: &str = "state.nq";
const LOG_FILE: &str = "log";
const CONFIG_FILE: &str = "config";
const LOCK_FILE: &str = "lock";

/// How often version graphs are stored: every `K`th index, or only index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotInterval {
    Every(usize),
    Never,
}

impl SnapshotInterval {
    pub fn every(k: usize) -> Option<Self> {
        (k >= 1).then_some(SnapshotInterval::Every(k))
    }
}

impl fmt::Display for SnapshotInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotInterval::Every(k) => write!(f, "{k}"),
            SnapshotInterval::Never => f.write_str("inf"),
        }
    }
}

impl FromStr for SnapshotInterval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "never" => Ok(SnapshotInterval::Never),
            _ => s
                .parse::<usize>()
                .ok()
                .and_then(SnapshotInterval::every)
                .ok_or_else(|| format!("snapshot interval must be a positive integer or 'inf', got {s:?}")),
        }
    }
}

/// Whether version `i` is stored when it is written. The current version
/// needs no snapshot of its own because it is the live graph.
pub fn snapshot_decision(i: usize, interval: SnapshotInterval) -> bool {
    match interval {
        SnapshotInterval::Every(k) => i.is_multiple_of(k),
        SnapshotInterval::Never => i == 0,
    }
}

pub trait Clock {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreConfig {
    pub snapshot_interval: SnapshotInterval,
    pub materialize_data_graphs: bool,
    pub default_user: String,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            snapshot_interval: SnapshotInterval::Every(10),
            materialize_data_graphs: true,
            default_user: "anonymous".to_string(),
        }
    }
}

impl StoreConfig {
    pub fn policy(&self) -> Policy {
        Policy {
            interval: self.snapshot_interval,
            materialize_data: self.materialize_data_graphs,
        }
    }

    fn render(&self) -> String {
        format!(
            "snapshot_interval={}\nmaterialize_data_graphs={}\ndefault_user={}\n",
            self.snapshot_interval, self.materialize_data_graphs, self.default_user
        )
    }

    fn parse(text: &str) -> Result<Self, StoreError> {
        let mut c = StoreConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| StoreError::Config(format!("line {}: {msg}", n + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
            match key.trim() {
                "snapshot_interval" => c.snapshot_interval = value.trim().parse().map_err(bad)?,
                "materialize_data_graphs" => {
                    c.materialize_data_graphs = value.trim().parse().map_err(|_| bad(format!("not a boolean: {value}")))?
                }
                "default_user" => c.default_user = value.trim().to_string(),
                other => return Err(bad(format!("unknown key {other}"))),
            }
        }
        Ok(c)
    }
}

/// One committed update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitLogEntry {
    pub seq: u64,
    pub time: DateTime<Utc>,
    /// A user name, or an IRI when `user_is_iri` is set.
    pub user: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub user_is_iri: bool,
    pub text: String,
    /// SHA-256 of `state.nq` after the commit, in hex.
    pub digest: String,
    /// Extra meta triples as `(predicate, object)` terms in line syntax.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, String)>,
    /// Blank-node labels and the IRIs minted for them.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub skolem: BTreeMap<String, String>,
}

impl CommitLogEntry {
    fn meta(&self) -> Result<UpdateMeta, StoreError> {
        let user = if self.user_is_iri {
            Atom::parse_iri(self.user.clone()).map_err(|e| StoreError::Corruption(format!("log entry {}: {e}", self.seq)))?
        } else {
            Atom::literal(self.user.clone())
        };
        let mut meta = UpdateMeta::new("", self.time, self.text.clone()).with_user(user);
        for (p, o) in &self.extra {
            let term = |s: &str| parse_term(s).map_err(|e| StoreError::Corruption(format!("log entry {}: {e}", self.seq)));
            meta = meta.with_extra(term(p)?, term(o)?);
        }
        Ok(meta)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("parse error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Prov(#[from] ProvError),
    #[error("store is corrupt: {0}")]
    Corruption(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("store at {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("store already initialized at {0}")]
    Exists(PathBuf),
}

/// Per-commit overrides; unset fields fall back to the store's clock and
/// default user.
#[derive(Debug, Clone, Default)]
pub struct CommitOptions {
    pub user: Option<Atom>,
    pub time: Option<DateTime<Utc>>,
    pub extra: Vec<(Atom, Atom)>,
}

struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Store {
    root: PathBuf,
    config: StoreConfig,
    prov: ProvStore,
    log: Vec<CommitLogEntry>,
    clock: Box<dyn Clock>,
    lock: Option<Lock>,
}

pub fn digest(state_text: &str) -> String {
    hex::encode(Sha256::digest(state_text.as_bytes()))
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn read_log(path: &Path) -> Result<Vec<CommitLogEntry>, StoreError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CommitLogEntry =
            serde_json::from_str(line).map_err(|e| StoreError::Corruption(format!("log line {}: {e}", n + 1)))?;
        if entry.seq != out.len() as u64 + 1 {
            return Err(StoreError::Corruption(format!("log line {}: expected seq {}, found {}", n + 1, out.len() + 1, entry.seq)));
        }
        out.push(entry);
    }
    Ok(out)
}

/// Creates a new store. Fails if `root` already holds one.
pub fn init(root: &Path, config: &StoreConfig) -> Result<(), StoreError> {
    fs::create_dir_all(root)?;
    if root.join(CONFIG_FILE).exists() || root.join(STATE_FILE).exists() {
        return Err(StoreError::Exists(root.to_path_buf()));
    }
    write_atomic(&root.join(CONFIG_FILE), &config.render())?;
    write_atomic(&root.join(STATE_FILE), "")?;
    File::create(root.join(LOG_FILE))?;
    Ok(())
}

impl Store {
    /// Opens the store for reading, creating an empty one with the default
    /// config if `root` holds none. The state must match the last digest in
    /// the log.
    pub fn open(root: &Path) -> Result<Store, StoreError> {
        if !root.join(CONFIG_FILE).exists() {
            init(root, &StoreConfig::default())?;
        }
        let config = StoreConfig::parse(&fs::read_to_string(root.join(CONFIG_FILE))?)?;
        let text = fs::read_to_string(root.join(STATE_FILE))?;
        let log = read_log(&root.join(LOG_FILE))?;
        let expected = log.last().map(|e| e.digest.clone()).unwrap_or_else(|| digest(""));
        let actual = digest(&text);
        if actual != expected {
            return Err(StoreError::Corruption(format!("state digest {actual} does not match logged digest {expected}")));
        }
        let prov = ProvStore::from_dataset(parse_dataset(&text)?, config.policy())?;
        Ok(Store {
            root: root.to_path_buf(),
            config,
            prov,
            log,
            clock: Box::new(SystemClock),
            lock: None,
        })
    }

    /// Opens the store and takes the writer lock.
    pub fn open_for_write(root: &Path) -> Result<Store, StoreError> {
        if !root.join(CONFIG_FILE).exists() {
            init(root, &StoreConfig::default())?;
        }
        let lock_path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::Locked(root.to_path_buf())),
            Err(e) => return Err(e.into()),
        }
        let lock = Lock(lock_path);
        let mut s = Store::open(root)?;
        s.lock = Some(lock);
        Ok(s)
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn prov(&self) -> &ProvStore {
        &self.prov
    }

    pub fn log(&self) -> &[CommitLogEntry] {
        &self.log
    }

    /// Parses and applies one update, then persists the result.
    pub fn apply(&mut self, text: &str, opts: CommitOptions) -> Result<Vec<AppliedRecord>, StoreError> {
        assert!(self.lock.is_some(), "apply needs a store opened with open_for_write");
        let mut skolem = Skolemizer::new();
        let u = parse_update_with(text, &mut skolem)?;
        let user = opts.user.unwrap_or_else(|| Atom::literal(self.config.default_user.clone()));
        let time = opts.time.unwrap_or_else(|| self.clock.now());
        let mut meta = UpdateMeta::new("", time, text).with_user(user.clone());
        meta.extra = opts.extra.clone();

        let mut next = self.prov.clone();
        let records = next.apply_with_provenance(&u, &meta)?;
        let (user, user_is_iri) = match user {
            Atom::Iri(i) => (i, true),
            Atom::Literal(l) => (l.lexical().to_string(), false),
        };
        let entry = CommitLogEntry {
            seq: self.log.len() as u64 + 1,
            time,
            user,
            user_is_iri,
            text: text.to_string(),
            digest: String::new(),
            extra: opts.extra.iter().map(|(p, o)| (p.to_string(), o.to_string())).collect(),
            skolem: skolem.into_bindings(),
        };
        self.commit(next, entry)?;
        Ok(records)
    }

    /// Writes `next` as the new state and appends `entry` with its digest.
    pub fn commit(&mut self, next: ProvStore, mut entry: CommitLogEntry) -> Result<(), StoreError> {
        let text = serialize_dataset(&next.to_dataset());
        entry.digest = digest(&text);
        let line = serde_json::to_string(&entry).expect("log entries serialize");
        write_atomic(&self.root.join(STATE_FILE), &text)?;
        let mut log = OpenOptions::new().append(true).create(true).open(self.root.join(LOG_FILE))?;
        writeln!(log, "{line}")?;
        log.sync_all()?;
        self.prov = next;
        self.log.push(entry);
        Ok(())
    }
}

/// Rebuilds a store by replaying `log` from empty. Returns the state after
/// each entry in line format, or a description of the first failure.
pub fn replay_log(config: &StoreConfig, log: &[CommitLogEntry]) -> Result<Vec<String>, String> {
    let mut prov = ProvStore::new(config.policy());
    let mut states = Vec::new();
    for entry in log {
        let u = parse_update_with(&entry.text, &mut Skolemizer::with_bindings(entry.skolem.clone()))
            .map_err(|e| format!("log entry {}: {e}", entry.seq))?;
        let meta = entry.meta().map_err(|e| e.to_string())?;
        prov.apply_with_provenance(&u, &meta)
            .map_err(|e| format!("log entry {}: {e}", entry.seq))?;
        states.push(serialize_dataset(&prov.to_dataset()));
    }
    Ok(states)
}

/// Result of checking a store directory.
#[derive(Debug, Default)]
pub struct StoreReport {
    /// Digest, log and layout problems.
    pub problems: Vec<String>,
    pub history: Report,
}

impl StoreReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty() && self.history.is_clean()
    }
}

/// Checks digests, replays the log and verifies the provenance graph.
/// Unlike [`Store::open`] it keeps going after a digest mismatch.
pub fn verify_store(root: &Path) -> Result<StoreReport, StoreError> {
    let config = StoreConfig::parse(&fs::read_to_string(root.join(CONFIG_FILE))?)?;
    let text = fs::read_to_string(root.join(STATE_FILE))?;
    let mut report = StoreReport::default();
    let log = match read_log(&root.join(LOG_FILE)) {
        Ok(l) => l,
        Err(e) => {
            report.problems.push(e.to_string());
            Vec::new()
        }
    };
    let expected = log.last().map(|e| e.digest.clone()).unwrap_or_else(|| digest(""));
    if digest(&text) != expected {
        report.problems.push(format!("state digest {} does not match logged digest {expected}", digest(&text)));
    }
    match replay_log(&config, &log) {
        Ok(states) => {
            for (entry, state) in log.iter().zip(&states) {
                if digest(state) != entry.digest {
                    report.problems.push(format!("replaying log entry {} gives a different digest", entry.seq));
                    break;
                }
            }
        }
        Err(e) => report.problems.push(format!("log replay failed: {e}")),
    }
    match parse_dataset(&text) {
        Ok(d) => {
            if serialize_dataset(&d) != text {
                report.problems.push("state file is not in canonical form".to_string());
            }
            match ProvStore::from_dataset(d, config.policy()) {
                Ok(prov) => report.history = prov.verify_history(),
                Err(e) => report.problems.push(e.to_string()),
            }
        }
        Err(e) => report.problems.push(format!("state file does not parse: {e}")),
    }
    Ok(report)
}
