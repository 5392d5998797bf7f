//! Pretty-printer producing text that parses back to the same AST.

use std::fmt::Write;

use super::ast::*;
use crate::model::GraphName;

pub fn print_query(q: &Query) -> String {
    let mut out = String::new();
    match q {
        Query::Select { vars, body } => {
            out.push_str("SELECT");
            for v in vars {
                let _ = write!(out, " {v}");
            }
            out.push_str(" WHERE ");
            print_group(body, &mut out);
        }
        Query::Construct { template, body } => {
            out.push_str("CONSTRUCT ");
            print_template(template, &mut out);
            out.push_str(" WHERE ");
            print_group(body, &mut out);
        }
    }
    out
}

pub fn print_update(u: &Update) -> String {
    let mut out = String::new();
    match u {
        Update::InsertWhere { template, pattern } => {
            out.push_str("INSERT ");
            print_template(template, &mut out);
            out.push_str(" WHERE ");
            print_group(pattern, &mut out);
        }
        Update::DeleteWhere { template, pattern } => {
            out.push_str("DELETE ");
            print_template(template, &mut out);
            out.push_str(" WHERE ");
            print_group(pattern, &mut out);
        }
        Update::DeleteInsertWhere { delete, insert, pattern } => {
            out.push_str("DELETE ");
            print_template(delete, &mut out);
            out.push_str(" INSERT ");
            print_template(insert, &mut out);
            out.push_str(" WHERE ");
            print_group(pattern, &mut out);
        }
        Update::Load { source, target } => {
            let _ = write!(out, "LOAD {} INTO {}", bare_ref(source), graph_ref(target));
        }
        Update::Clear(g) => {
            let _ = write!(out, "CLEAR {}", graph_ref(g));
        }
        Update::Create(g) => {
            let _ = write!(out, "CREATE {}", graph_ref(g));
        }
        Update::Drop(g) => {
            let _ = write!(out, "DROP {}", graph_ref(g));
        }
        Update::Copy { source, target } => {
            let _ = write!(out, "COPY {} TO {}", graph_ref(source), graph_ref(target));
        }
        Update::Move { source, target } => {
            let _ = write!(out, "MOVE {} TO {}", graph_ref(source), graph_ref(target));
        }
        Update::Add { source, target } => {
            let _ = write!(out, "ADD {} TO {}", graph_ref(source), graph_ref(target));
        }
    }
    out
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

pub(crate) fn term(t: &TermPattern) -> String {
    match t {
        TermPattern::Atom(a) => a.to_string(),
        TermPattern::Var(v) => v.to_string(),
    }
}

fn print_triples(ts: &[TriplePattern], out: &mut String) {
    for t in ts {
        let _ = write!(out, "{} {} {} . ", term(&t.subject), term(&t.predicate), term(&t.object));
    }
}

fn print_blocks(bp: &BasicPattern, out: &mut String) {
    for block in bp.blocks() {
        match block {
            Block::Default(ts) => print_triples(ts, out),
            Block::Graph { name, triples } => {
                let _ = write!(out, "GRAPH {} {{ ", term(name));
                print_triples(triples, out);
                out.push_str("} ");
            }
        }
    }
}

fn print_template(bp: &BasicPattern, out: &mut String) {
    out.push_str("{ ");
    print_blocks(bp, out);
    out.push('}');
}

pub fn print_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    print_group(p, &mut out);
    out
}

fn print_group(p: &Pattern, out: &mut String) {
    out.push_str("{ ");
    match p {
        Pattern::Basic(bp) => print_blocks(bp, out),
        Pattern::Join(a, b) => {
            print_group(a, out);
            out.push(' ');
            print_group(b, out);
            out.push(' ');
        }
        Pattern::Union(a, b) => {
            print_group(a, out);
            out.push_str(" UNION ");
            print_group(b, out);
            out.push(' ');
        }
        Pattern::Optional(a, b) => {
            print_group(a, out);
            out.push_str(" OPTIONAL ");
            print_group(b, out);
            out.push(' ');
        }
        Pattern::Filter(a, c) => {
            print_group(a, out);
            out.push_str(" FILTER (");
            print_condition(c, out);
            out.push_str(") ");
        }
    }
    out.push('}');
}

pub fn print_condition(c: &Condition, out: &mut String) {
    match c {
        Condition::Bound(v) => {
            let _ = write!(out, "BOUND({v})");
        }
        Condition::Equal(a, b) => {
            let _ = write!(out, "{} = {}", term(a), term(b));
        }
        Condition::And(a, b) => {
            out.push('(');
            print_condition(a, out);
            out.push_str(" && ");
            print_condition(b, out);
            out.push(')');
        }
        Condition::Or(a, b) => {
            out.push('(');
            print_condition(a, out);
            out.push_str(" || ");
            print_condition(b, out);
            out.push(')');
        }
        Condition::Not(inner) => {
            out.push('!');
            match **inner {
                Condition::Equal(..) => {
                    out.push('(');
                    print_condition(inner, out);
                    out.push(')');
                }
                _ => print_condition(inner, out),
            }
        }
    }
}
