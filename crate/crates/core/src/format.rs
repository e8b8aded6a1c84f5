//! Line-oriented DAG text format and Graphviz export.
//!
//! ```text
//! # comment
//! dag <n> <m>
//! arc <u> <v>        (m lines, u is a parent of v)
//! sink <b>           (optional marked bugged vertex)
//! label <v> <text>   (optional display label)
//! ```
//!
//! Confined instances additionally carry `innocent <v>` and `budget <k>`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::state::BisectState;

/// Parsed document before it is split into a plain DAG or a confined instance.
#[derive(Debug, Clone)]
pub(crate) struct Document {
    pub dag: Dag,
    pub innocent: Vec<usize>,
    pub budget: Option<usize>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub(crate) fn parse_document(text: &str, confined: bool) -> Result<Document> {
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = Vec::new();
    let mut sink = None;
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut innocent = Vec::new();
    let mut budget = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let keyword = toks.next().unwrap_or_default();
        if keyword != "dag" && header.is_none() {
            return Err(parse_err(line, "expected `dag <n> <m>` header first"));
        }
        let n = header.map_or(0, |(n, _)| n);
        let check = |v: usize| {
            if v < n {
                Ok(v)
            } else {
                Err(parse_err(line, format!("dangling vertex id {v} (n = {n})")))
            }
        };
        match keyword {
            "dag" => {
                if header.is_some() {
                    return Err(parse_err(line, "duplicate header"));
                }
                let n = parse_num(toks.next(), line, "vertex count")?;
                let m = parse_num(toks.next(), line, "arc count")?;
                header = Some((n, m));
                labels = vec![None; n];
            }
            "arc" => {
                let u = check(parse_num(toks.next(), line, "arc tail")?)?;
                let v = check(parse_num(toks.next(), line, "arc head")?)?;
                arcs.push((u, v));
            }
            "sink" => {
                if sink.is_some() {
                    return Err(parse_err(line, "duplicate sink"));
                }
                sink = Some(check(parse_num(toks.next(), line, "sink id")?)?);
            }
            "label" => {
                let v = check(parse_num(toks.next(), line, "vertex id")?)?;
                let rest: Vec<&str> = toks.by_ref().collect();
                if rest.is_empty() {
                    return Err(parse_err(line, "missing label text"));
                }
                labels[v] = Some(rest.join(" "));
            }
            "innocent" if confined => {
                innocent.push(check(parse_num(toks.next(), line, "vertex id")?)?);
            }
            "budget" if confined => {
                if budget.is_some() {
                    return Err(parse_err(line, "duplicate budget"));
                }
                budget = Some(parse_num(toks.next(), line, "budget")?);
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            if keyword != "label" {
                return Err(parse_err(line, format!("unexpected token `{extra}`")));
            }
        }
    }

    let (n, m) = header.ok_or_else(|| parse_err(0, "empty input"))?;
    if arcs.len() != m {
        return Err(parse_err(
            0,
            format!("header declares {m} arcs, found {}", arcs.len()),
        ));
    }
    let mut dag = Dag::new(n, arcs)?;
    if let Some(b) = sink {
        dag = dag.with_sink(b)?;
    }
    if labels.iter().any(Option::is_some) {
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.unwrap_or_else(|| v.to_string()))
            .collect();
        dag = dag.with_labels(labels)?;
    }
    Ok(Document { dag, innocent, budget })
}

/// Parses the DAG text format.
pub fn parse_dag(text: &str) -> Result<Dag> {
    parse_document(text, false).map(|d| d.dag)
}

pub(crate) fn write_dag_body(dag: &Dag, out: &mut String) {
    let _ = writeln!(out, "dag {} {}", dag.len(), dag.arcs().len());
    for &(u, v) in dag.arcs() {
        let _ = writeln!(out, "arc {u} {v}");
    }
    if let Some(b) = dag.sink() {
        let _ = writeln!(out, "sink {b}");
    }
    if let Some(labels) = dag.labels() {
        for (v, l) in labels.iter().enumerate() {
            let _ = writeln!(out, "label {v} {l}");
        }
    }
}

/// Serializes to the DAG text format; `parse_dag` inverts it.
pub fn write_dag(dag: &Dag) -> String {
    let mut out = String::new();
    write_dag_body(dag, &mut out);
    out
}

/// Graphviz rendering options.
#[derive(Debug, Clone, Default)]
pub struct DotOptions<'a> {
    /// Counts are taken relative to this state's candidates when present.
    pub state: Option<&'a BisectState<'a>>,
    pub highlights: BTreeSet<usize>,
}

/// Renders `dag` as a Graphviz digraph. Every vertex is labelled with its name
/// and `ancestors/non-ancestors`; eliminated vertices (when a state is given)
/// are drawn dashed.
pub fn export_dot(dag: &Dag, opts: &DotOptions<'_>) -> String {
    let mut out = String::from("digraph dag {\n");
    for v in 0..dag.len() {
        let (a, total) = match opts.state {
            Some(s) => (s.live_ancestors(v), s.n_live()),
            None => (dag.ancestor_count(v), dag.len()),
        };
        let non = total.saturating_sub(a);
        let mut attrs = format!("label=\"{}\\n{a}/{non}\"", escape(&dag.label(v)));
        if opts.highlights.contains(&v) {
            attrs.push_str(", style=filled, fillcolor=orange");
        }
        if let Some(s) = opts.state {
            if !s.is_live(v) {
                attrs.push_str(", style=dashed");
            }
        }
        if dag.sink() == Some(v) {
            attrs.push_str(", shape=doublecircle");
        }
        let _ = writeln!(out, "  {v} [{attrs}];");
    }
    for &(u, v) in dag.arcs() {
        let _ = writeln!(out, "  {u} -> {v};");
    }
    out.push_str("}\n");
    out
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_path() {
        let d = parse_dag("dag 5 4\narc 0 1\narc 1 2\narc 2 3\narc 3 4\nsink 4\n").unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(d.sink(), Some(4));
        assert_eq!(d.ancestor_count(4), 5);
    }

    #[test]
    fn comments_and_labels() {
        let d = parse_dag("# hi\ndag 2 1 # header\narc 0 1\nlabel 1 top commit\n").unwrap();
        assert_eq!(d.label(1), "top commit");
        assert_eq!(d.label(0), "0");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_dag("dag 4 1\narc 3 3\n"),
            Err(Error::SelfLoop(3))
        ));
        assert!(matches!(parse_dag("dag 2 1\narc 0 5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_dag("arc 0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dag("dag 2 1\nedge 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_dag("dag 2 2\narc 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_dag("dag 2 2\narc 0 1\narc 0 1\n"),
            Err(Error::DuplicateArc(0, 1))
        ));
        assert!(matches!(parse_dag("dag 2 1\narc 0 1\ninnocent 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn dot_for_path() {
        let d = parse_dag("dag 3 2\narc 0 1\narc 1 2\n").unwrap();
        let dot = export_dot(&d, &DotOptions::default());
        assert_eq!(dot.matches("->").count(), 2);
        assert_eq!(dot.matches("label=").count(), 3);
        assert!(!dot.contains("style"));
    }
}
