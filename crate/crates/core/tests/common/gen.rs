//! Seeded random generators for datasets, patterns, queries and updates.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use updprov::model::{Atom, Dataset, Graph, GraphName, Literal, Triple};
use updprov::syntax::ast::{BasicPattern, Condition, Pattern, Query, TermPattern, TriplePattern, Update, Variable};
use updprov::syntax::print_pattern;

pub const NODES: [&str; 4] = ["http://ex/a", "http://ex/b", "http://ex/c", "http://ex/d"];
pub const PREDICATES: [&str; 3] = ["http://ex/p", "http://ex/q", "http://ex/r"];
pub const GRAPHS: [&str; 3] = ["http://ex/g1", "http://ex/g2", "http://ex/g3"];
pub const VARS: [&str; 4] = ["x", "y", "z", "w"];

/// How many of the pooled atoms generators draw from. A narrow vocabulary
/// makes patterns far more likely to match.
#[derive(Clone, Copy)]
pub struct Vocab {
    pub nodes: usize,
    pub predicates: usize,
    pub graphs: usize,
    /// Name graphs with node IRIs, so one variable can bind both.
    pub shared_names: bool,
}

pub const WIDE: Vocab = Vocab { nodes: 4, predicates: 3, graphs: 3, shared_names: false };
pub const NARROW: Vocab = Vocab { nodes: 2, predicates: 1, graphs: 2, shared_names: true };

impl Vocab {
    pub fn node(self, rng: &mut StdRng) -> Atom {
        if rng.gen_ratio(1, 8) {
            Atom::Literal(Literal::simple(["1", "one"][rng.gen_range(0..2)]))
        } else {
            self.subject(rng)
        }
    }

    pub fn subject(self, rng: &mut StdRng) -> Atom {
        Atom::iri(NODES[rng.gen_range(0..self.nodes)])
    }

    pub fn predicate(self, rng: &mut StdRng) -> Atom {
        Atom::iri(PREDICATES[rng.gen_range(0..self.predicates)])
    }

    fn graph_pool(self) -> &'static [&'static str] {
        if self.shared_names {
            &NODES[..self.graphs]
        } else {
            &GRAPHS[..self.graphs]
        }
    }

    pub fn graph(self, rng: &mut StdRng) -> Atom {
        Atom::iri(*self.graph_pool().choose(rng).unwrap())
    }

    pub fn triple(self, rng: &mut StdRng) -> Triple {
        Triple::new(self.subject(rng), self.predicate(rng), self.node(rng))
    }
}

pub fn node(rng: &mut StdRng) -> Atom {
    WIDE.node(rng)
}

pub fn subject(rng: &mut StdRng) -> Atom {
    WIDE.subject(rng)
}

pub fn predicate(rng: &mut StdRng) -> Atom {
    WIDE.predicate(rng)
}

pub fn triple(rng: &mut StdRng) -> Triple {
    WIDE.triple(rng)
}

/// At most `max_triples` triples over the default graph and up to three
/// named graphs, some of them possibly empty.
pub fn dataset(rng: &mut StdRng, max_triples: usize) -> Dataset {
    dataset_in(WIDE, rng, max_triples)
}

pub fn dataset_in(vocab: Vocab, rng: &mut StdRng, max_triples: usize) -> Dataset {
    let mut d = Dataset::new();
    let names: Vec<&str> = vocab.graph_pool().iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
    for n in &names {
        d.set_graph(&GraphName::iri(*n), Graph::new());
    }
    for _ in 0..rng.gen_range(0..=max_triples) {
        let target = match names.choose(rng) {
            Some(n) if rng.gen_bool(0.6) => GraphName::iri(*n),
            _ => GraphName::Default,
        };
        d.insert(&target, vocab.triple(rng));
    }
    d
}

pub struct PatternGen {
    /// Variables the pattern may use.
    pub vars: usize,
    pub vocab: Vocab,
}

impl PatternGen {
    fn var(&self, rng: &mut StdRng) -> Variable {
        Variable::new(VARS[rng.gen_range(0..self.vars)])
    }

    fn term(&self, rng: &mut StdRng, ground: impl Fn(Vocab, &mut StdRng) -> Atom) -> TermPattern {
        if rng.gen_bool(0.55) {
            TermPattern::Var(self.var(rng))
        } else {
            TermPattern::Atom(ground(self.vocab, rng))
        }
    }

    fn triple(&self, rng: &mut StdRng) -> TriplePattern {
        let s = self.term(rng, Vocab::subject);
        let p = if rng.gen_bool(0.25) { TermPattern::Var(self.var(rng)) } else { TermPattern::Atom(self.vocab.predicate(rng)) };
        let o = self.term(rng, Vocab::node);
        TriplePattern::new(s, p, o)
    }

    pub fn basic(&self, rng: &mut StdRng) -> BasicPattern {
        let mut c = BasicPattern::new();
        for _ in 0..rng.gen_range(1..=2) {
            if rng.gen_bool(0.5) {
                c.push_triple(self.triple(rng));
            } else {
                let name = if rng.gen_bool(0.5) {
                    TermPattern::Var(self.var(rng))
                } else {
                    TermPattern::Atom(self.vocab.graph(rng))
                };
                let n = if rng.gen_ratio(1, 6) { 0 } else { rng.gen_range(1..=2) };
                c.push_graph(name, (0..n).map(|_| self.triple(rng)).collect());
            }
        }
        c
    }

    pub fn condition(&self, rng: &mut StdRng, depth: u32) -> Condition {
        let leaf = depth == 0 || rng.gen_bool(0.5);
        if leaf {
            if rng.gen_bool(0.35) {
                Condition::Bound(self.var(rng))
            } else {
                let a = TermPattern::Var(self.var(rng));
                let b = self.term(rng, Vocab::node);
                Condition::Equal(a, b)
            }
        } else {
            match rng.gen_range(0..3) {
                0 => self.condition(rng, depth - 1).and(self.condition(rng, depth - 1)),
                1 => self.condition(rng, depth - 1).or(self.condition(rng, depth - 1)),
                _ => self.condition(rng, depth - 1).not(),
            }
        }
    }

    /// A pattern with operator nesting depth at most `depth`.
    pub fn pattern(&self, rng: &mut StdRng, depth: u32) -> Pattern {
        if depth == 0 || rng.gen_bool(0.3) {
            return Pattern::Basic(self.basic(rng));
        }
        let a = self.pattern(rng, depth - 1);
        match rng.gen_range(0..4) {
            0 => a.join(self.pattern(rng, depth - 1)),
            1 => a.union(self.pattern(rng, depth - 1)),
            2 => a.optional(self.pattern(rng, depth - 1)),
            _ => a.filter(self.condition(rng, 2)),
        }
    }

    pub fn template(&self, rng: &mut StdRng) -> BasicPattern {
        let mut c = BasicPattern::new();
        let ts: Vec<TriplePattern> = (0..rng.gen_range(1..=2)).map(|_| self.triple(rng)).collect();
        if rng.gen_bool(0.5) {
            ts.into_iter().for_each(|t| c.push_triple(t));
        } else {
            let name = if rng.gen_bool(0.7) {
                TermPattern::Atom(self.vocab.graph(rng))
            } else {
                TermPattern::Var(self.var(rng))
            };
            c.push_graph(name, ts);
        }
        c
    }

    pub fn query(&self, rng: &mut StdRng, depth: u32) -> Query {
        let body = self.pattern(rng, depth);
        if rng.gen_bool(0.7) {
            let mut vars: Vec<Variable> = VARS[..self.vars]
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .map(|v| Variable::new(*v))
                .collect();
            if vars.is_empty() {
                vars.push(self.var(rng));
            }
            Query::Select { vars, body }
        } else {
            Query::Construct {
                template: self.template(rng),
                body,
            }
        }
    }
}

/// Graph reference for update text: a named graph or the default graph.
fn graph_choice(rng: &mut StdRng, with_default: bool) -> GraphName {
    if with_default && rng.gen_ratio(1, 4) {
        GraphName::Default
    } else {
        GraphName::iri(*GRAPHS.choose(rng).unwrap())
    }
}

fn graph_ref(g: &GraphName) -> String {
    match g {
        GraphName::Default => "DEFAULT".into(),
        GraphName::Named(a) => format!("GRAPH {a}"),
    }
}

fn bare_ref(g: &GraphName) -> String {
    match g {
        GraphName::Default => "DEFAULT".into(),
        GraphName::Named(a) => a.to_string(),
    }
}

fn block(g: &GraphName, body: &str) -> String {
    match g {
        GraphName::Default => body.to_string(),
        GraphName::Named(a) => format!("GRAPH {a} {{ {body} }}"),
    }
}

fn ground_triples(rng: &mut StdRng, max: usize) -> String {
    let n = rng.gen_range(1..=max);
    (0..n).map(|_| format!("{} . ", triple(rng))).collect()
}

/// Text of one random update statement over at most three named graphs
/// and the default graph. Templates always name one fixed graph.
pub fn update_text(rng: &mut StdRng) -> String {
    let pg = PatternGen { vars: 3, vocab: WIDE };
    let g = graph_choice(rng, true);
    let h = graph_choice(rng, true);
    let named = graph_choice(rng, false);
    match rng.gen_range(0..20) {
        0 | 1 => format!("CREATE GRAPH {}", bare_ref(&named)),
        2 => format!("DROP GRAPH {}", bare_ref(&named)),
        3 => format!("CLEAR {}", graph_ref(&g)),
        4 => format!("LOAD {} INTO {}", bare_ref(&h), graph_ref(&g)),
        5 => format!("ADD {} TO {}", graph_ref(&h), graph_ref(&g)),
        6 => format!("COPY {} TO {}", graph_ref(&h), graph_ref(&g)),
        7 => format!("MOVE {} TO {}", graph_ref(&named), graph_ref(&g)),
        8..=10 => format!("INSERT DATA {{ {} }}", block(&g, &ground_triples(rng, 3))),
        11 => format!("DELETE DATA {{ {} }}", block(&g, &ground_triples(rng, 2))),
        12 => {
            // copy between graphs, so the where clause has real sources
            let (p, q) = (predicate(rng), predicate(rng));
            format!("INSERT {{ {} }} WHERE {{ {} }}", block(&g, &format!("?x {p} ?y .")), block(&h, &format!("?x {q} ?y")))
        }
        13 | 14 => {
            let body = format!("?x {} ?y", predicate(rng));
            let pat = pg.pattern(rng, 2);
            format!("INSERT {{ {} }} WHERE {{ {} }}", block(&g, &format!("{body} .")), print_pattern(&pat))
        }
        15 => {
            // a blank node in the template mints a fresh IRI per statement
            let body = format!("_:n {} ?x", predicate(rng));
            let pat = pg.pattern(rng, 1);
            format!("INSERT {{ {} }} WHERE {{ {} }}", block(&g, &format!("{body} .")), print_pattern(&pat))
        }
        16 => {
            let p = predicate(rng);
            format!("DELETE {{ {} }} WHERE {{ {} }}", block(&g, &format!("?x {p} ?y .")), block(&g, &format!("?x {p} ?y")))
        }
        17 => {
            let body = "?x ?y ?z";
            let src = match &g {
                GraphName::Default => format!("?x ?y ?z . {}", print_pattern(&pg.pattern(rng, 1))),
                GraphName::Named(a) => format!("GRAPH {a} {{ ?x ?y ?z }} . {}", print_pattern(&pg.pattern(rng, 1))),
            };
            format!("DELETE {{ {} }} WHERE {{ {src} }}", block(&g, &format!("{body} .")))
        }
        _ => {
            let p = predicate(rng);
            let q = predicate(rng);
            let src = match &g {
                GraphName::Default => format!("?x {p} ?y"),
                GraphName::Named(a) => format!("GRAPH {a} {{ ?x {p} ?y }}"),
            };
            format!(
                "DELETE {{ {} }} INSERT {{ {} }} WHERE {{ {src} }}",
                block(&g, &format!("?x {p} ?y .")),
                block(&h, &format!("?y {q} ?x ."))
            )
        }
    }
}

pub fn update(rng: &mut StdRng) -> Update {
    updprov::parse_update(&update_text(rng)).expect("generated updates parse")
}

/// Alternates between the narrow and wide vocabularies.
pub fn vocab_for(seed: u64) -> Vocab {
    if seed.is_multiple_of(2) {
        NARROW
    } else {
        WIDE
    }
}
