//! Command-line front end.
//!
//! Results go to stdout as TSV or dataset lines; diagnostics go to stderr.
//! Exit codes: 0 ok, 1 usage, 2 parse error, 3 update rejected, 4 integrity
//! failure, 5 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand};

use crate::model::{Atom, Dataset, Graph, GraphName};
use crate::provenance::{ids, ProvError, ProvStore};
use crate::query::{eval_query, format_solutions, QueryResult};
use crate::store::{self, CommitOptions, SnapshotInterval, Store, StoreConfig, StoreError};
use crate::syntax::{parse_query, parse_term, serialize_dataset, serialize_graph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UPDATE: i32 = 3;
pub const EXIT_INTEGRITY: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "updprov", version, about = "Versioned RDF store with update provenance")]
struct Cli {
    /// Store directory.
    #[arg(short = 'd', long = "dir", global = true, default_value = ".")]
    dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create an empty store.
    Init {
        /// Store every Kth version graph; `inf` stores only version 0.
        #[arg(long, default_value = "10")]
        snapshot_interval: SnapshotInterval,
        /// Do not store the triples each insert or delete touched.
        #[arg(long)]
        no_data_graphs: bool,
        /// User recorded when `apply` is given none.
        #[arg(long, default_value = "anonymous")]
        user: String,
    },
    /// Apply one update and print the versions it created.
    Apply {
        text: Option<String>,
        #[arg(short = 'f', long = "file", conflicts_with = "text")]
        file: Option<PathBuf>,
        /// A user name, or `<iri>`.
        #[arg(long)]
        user: Option<String>,
        /// RFC 3339 timestamp to record instead of the current time.
        #[arg(long)]
        time: Option<String>,
        /// Extra metadata as PREDICATE=TERM, e.g. `<http://purl.org/dc/terms/title>="fix"`.
        #[arg(long = "meta")]
        meta: Vec<String>,
    },
    /// Run a SELECT or CONSTRUCT query.
    Query {
        text: Option<String>,
        #[arg(short = 'f', long = "file", conflicts_with = "text")]
        file: Option<PathBuf>,
        /// Query a past version instead: a version IRI, or an index with --graph.
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        graph: Option<String>,
    },
    /// List the updates recorded for a graph.
    Log { graph: String },
    /// Print a past version of a graph.
    Checkout {
        graph: String,
        index: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the triples removed and added between two versions.
    Diff { graph: String, from: usize, to: usize },
    /// Check digests, the commit log and the provenance graph.
    Verify,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::Io(_) | StoreError::Locked(_) => EXIT_IO,
            StoreError::Syntax(_) => EXIT_PARSE,
            StoreError::Prov(p) => return p.clone().into(),
            StoreError::Corruption(_) => EXIT_INTEGRITY,
            StoreError::Config(_) | StoreError::Exists(_) => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ProvError> for Failure {
    fn from(e: ProvError) -> Self {
        let code = match &e {
            ProvError::Update(_) | ProvError::TargetViolation(_) => EXIT_UPDATE,
            ProvError::NoCurrentVersion(_) | ProvError::UnknownVersion { .. } => EXIT_USAGE,
            ProvError::BrokenChain { .. } | ProvError::Layout(_) => EXIT_INTEGRITY,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

/// Runs one command and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_text(text: Option<String>, file: Option<PathBuf>) -> Result<String, Failure> {
    match (text, file) {
        (Some(t), None) => Ok(t),
        (None, Some(f)) => Ok(fs::read_to_string(f)?),
        _ => Err(Failure::new(EXIT_USAGE, "give the statement inline or with -f FILE")),
    }
}

fn parse_graph(s: &str) -> Result<GraphName, Failure> {
    if s == "DEFAULT" {
        return Ok(GraphName::Default);
    }
    let inner = s.strip_prefix('<').and_then(|r| r.strip_suffix('>')).unwrap_or(s);
    Atom::parse_iri(inner)
        .map(GraphName::Named)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("bad graph name {s:?}: {e}")))
}

fn parse_user(s: &str) -> Result<Atom, Failure> {
    match s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        Some(iri) => Atom::parse_iri(iri).map_err(|e| Failure::new(EXIT_USAGE, format!("bad user IRI: {e}"))),
        None => Ok(Atom::literal(s)),
    }
}

fn parse_meta(s: &str) -> Result<(Atom, Atom), Failure> {
    let bad = |m: String| Failure::new(EXIT_USAGE, format!("bad --meta {s:?}: {m}"));
    // split after the predicate, which never contains '=' inside angle brackets
    let split = if s.starts_with('<') {
        s.find('>').map(|i| i + 1).filter(|&i| s[i..].starts_with('='))
    } else {
        s.find('=')
    };
    let i = split.ok_or_else(|| bad("expected PREDICATE=TERM".into()))?;
    let pred = s[..i].trim_start_matches('<').trim_end_matches('>');
    let pred = Atom::parse_iri(pred).map_err(|e| bad(e.to_string()))?;
    let obj = parse_term(&s[i + 1..]).map_err(|e| bad(e.to_string()))?;
    Ok((pred, obj))
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, Failure> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Failure::new(EXIT_USAGE, format!("bad --time {s:?}: {e}")))
}

/// Resolves `--at` to a graph and index.
fn resolve_at(at: &str, graph: Option<&str>) -> Result<(GraphName, usize), Failure> {
    if let Ok(i) = at.parse::<usize>() {
        let g = graph.ok_or_else(|| Failure::new(EXIT_USAGE, "--at INDEX needs --graph"))?;
        return Ok((parse_graph(g)?, i));
    }
    let iri = at.strip_prefix('<').and_then(|r| r.strip_suffix('>')).unwrap_or(at);
    match ids::parse_minted(iri) {
        Some((base, ids::IdKind::Version, i)) => {
            let g = ids::graph_name(base);
            if let Some(named) = graph {
                if parse_graph(named)? != g {
                    return Err(Failure::new(EXIT_USAGE, format!("{at} is not a version of {named}")));
                }
            }
            Ok((g, i))
        }
        _ => Err(Failure::new(EXIT_USAGE, format!("{at} is neither an index nor a version IRI"))),
    }
}

fn diff_lines(from: &Graph, to: &Graph) -> String {
    let mut out = String::new();
    for t in from.difference(to).iter() {
        out.push_str(&format!("- {t}\n"));
    }
    for t in to.difference(from).iter() {
        out.push_str(&format!("+ {t}\n"));
    }
    out
}

fn first_line(s: &str) -> &str {
    s.lines().next().unwrap_or("")
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let dir = cli.dir;
    match cli.command {
        Command::Init {
            snapshot_interval,
            no_data_graphs,
            user,
        } => {
            let config = StoreConfig {
                snapshot_interval,
                materialize_data_graphs: !no_data_graphs,
                default_user: user,
            };
            store::init(&dir, &config)?;
        }
        Command::Apply {
            text,
            file,
            user,
            time,
            meta,
        } => {
            let text = read_text(text, file)?;
            let opts = CommitOptions {
                user: user.as_deref().map(parse_user).transpose()?,
                time: time.as_deref().map(parse_time).transpose()?,
                extra: meta.iter().map(|m| parse_meta(m)).collect::<Result<_, _>>()?,
            };
            let mut s = Store::open_for_write(&dir)?;
            for r in s.apply(&text, opts)? {
                if let Some(v) = r.output {
                    writeln!(out, "{v}")?;
                }
            }
        }
        Command::Query { text, file, at, graph } => {
            let text = read_text(text, file)?;
            let q = parse_query(&text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
            let s = Store::open(&dir)?;
            let d = match at {
                Some(at) => {
                    let (g, i) = resolve_at(&at, graph.as_deref())?;
                    let content = s.prov().reconstruct(&g, i)?;
                    let mut d = Dataset::new();
                    *d.default_graph_mut() = content.clone();
                    if g != GraphName::Default {
                        d.set_graph(&g, content);
                    }
                    d
                }
                None => {
                    if graph.is_some() {
                        return Err(Failure::new(EXIT_USAGE, "--graph only applies together with --at"));
                    }
                    s.prov().to_dataset()
                }
            };
            match eval_query(&q, &d) {
                QueryResult::Solutions { vars, rows } => write!(out, "{}", format_solutions(&vars, &rows))?,
                QueryResult::Graph(g) => write!(out, "{}", serialize_dataset(&g))?,
            }
        }
        Command::Log { graph } => {
            let g = parse_graph(&graph)?;
            let s = Store::open(&dir)?;
            writeln!(out, "index\ttype\tuser\ttime\ttext")?;
            for e in s.prov().history_log(&g)? {
                let user = match &e.user {
                    Some(Atom::Literal(l)) => l.lexical().to_string(),
                    Some(a) => a.to_string(),
                    None => String::new(),
                };
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    e.index,
                    e.kind.label(),
                    user,
                    e.time.as_deref().unwrap_or(""),
                    first_line(e.text.as_deref().unwrap_or(""))
                )?;
            }
        }
        Command::Checkout { graph, index, out: file } => {
            let g = parse_graph(&graph)?;
            let s = Store::open(&dir)?;
            let text = serialize_graph(&s.prov().reconstruct(&g, index)?);
            match file {
                Some(f) => fs::write(f, text)?,
                None => write!(out, "{text}")?,
            }
        }
        Command::Diff { graph, from, to } => {
            let g = parse_graph(&graph)?;
            let s = Store::open(&dir)?;
            let p: &ProvStore = s.prov();
            write!(out, "{}", diff_lines(&p.reconstruct(&g, from)?, &p.reconstruct(&g, to)?))?;
        }
        Command::Verify => {
            let report = store::verify_store(&dir)?;
            for p in &report.problems {
                writeln!(out, "store\t{p}")?;
            }
            write!(out, "{}", report.history)?;
            if !report.is_clean() {
                return Ok(EXIT_INTEGRITY);
            }
            writeln!(out, "ok")?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_arguments() {
        assert_eq!(parse_graph("DEFAULT").ok(), Some(GraphName::Default));
        assert_eq!(parse_graph("<g1>").ok(), Some(GraphName::iri("g1")));
        assert_eq!(parse_graph("http://ex/g").ok(), Some(GraphName::iri("http://ex/g")));
        assert!(parse_graph("<a b>").is_err());
    }

    #[test]
    fn meta_arguments() {
        let (p, o) = parse_meta("<http://purl.org/dc/terms/title>=\"a=b\"").ok().unwrap();
        assert_eq!(p, Atom::iri("http://purl.org/dc/terms/title"));
        assert_eq!(o, Atom::literal("a=b"));
        assert!(parse_meta("nothing").is_err());
    }

    #[test]
    fn at_arguments() {
        assert_eq!(resolve_at("<g#_v3>", None).ok(), Some((GraphName::iri("g"), 3)));
        assert_eq!(resolve_at("2", Some("DEFAULT")).ok(), Some((GraphName::Default, 2)));
        assert_eq!(resolve_at("urn:upd:default#_v0", None).ok(), Some((GraphName::Default, 0)));
        assert!(resolve_at("2", None).is_err());
        assert!(resolve_at("g#_u3", None).is_err());
    }

    #[test]
    fn diff_output() {
        use crate::model::testing::{graph, t};
        let a = graph(&[t("a", "p", "b"), t("c", "p", "d")]);
        let b = graph(&[t("a", "p", "b"), t("e", "p", "f")]);
        assert_eq!(diff_lines(&a, &b), "- <c> <p> <d>\n+ <e> <p> <f>\n");
    }
}
