//! Line-oriented text formats for systems and labeled graphs.
//!
//! ```text
//! lgs <name>
//! alphabet <sym1> <sym2> ...
//! depth <D>
//! vertices <l> <m(l)>
//! edge <l> <i> <sym> <j>
//! iota <l> <j> <i>
//! end
//! ```
//!
//! Graphs use `graph <name>`, an optional `alphabet` line, `state <s>`,
//! `edge <s> <sym> <t>` and `end`. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::system::{Alphabet, Edge, LabeledGraph, Lgs};

#[derive(Clone, Debug)]
pub(crate) struct Tok<'a> {
    pub text: &'a str,
    pub line: usize,
    pub col: usize,
}

pub(crate) struct Lines<'a> {
    pub source: &'a str,
    pub lines: Vec<Vec<Tok<'a>>>,
    pub eof_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(source: &'a str, text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut count = 0;
        for (n, raw) in text.lines().enumerate() {
            count = n + 1;
            let body = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let mut toks = Vec::new();
            let mut start = None;
            for (i, c) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
                if c.is_whitespace() {
                    if let Some(s) = start.take() {
                        toks.push(Tok { text: &body[s..i], line: n + 1, col: body[..s].chars().count() + 1 });
                    }
                } else if start.is_none() {
                    start = Some(i);
                }
            }
            if !toks.is_empty() {
                lines.push(toks);
            }
        }
        Lines { source, lines, eof_line: count + 1 }
    }

    pub fn err(&self, tok: &Tok, msg: impl Into<String>) -> Error {
        Error::Parse { source_name: self.source.into(), line: tok.line, col: tok.col, msg: msg.into() }
    }

    pub fn err_at(&self, line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { source_name: self.source.into(), line, col, msg: msg.into() }
    }

    pub fn eof(&self, msg: impl Into<String>) -> Error {
        self.err_at(self.eof_line, 1, msg)
    }

    pub fn num(&self, tok: &Tok) -> Result<usize> {
        tok.text.parse::<usize>().map_err(|_| self.err(tok, format!("expected a non-negative integer, got {:?}", tok.text)))
    }

    pub fn int(&self, tok: &Tok) -> Result<i64> {
        tok.text.parse::<i64>().map_err(|_| self.err(tok, format!("expected an integer, got {:?}", tok.text)))
    }

    pub fn arity(&self, toks: &[Tok], n: usize) -> Result<()> {
        if toks.len() != n {
            let t = toks.get(n).unwrap_or(&toks[0]);
            return Err(self.err(t, format!("`{}` takes {} argument(s)", toks[0].text, n - 1)));
        }
        Ok(())
    }
}

pub fn parse_lgs(source: &str, text: &str) -> Result<Lgs> {
    let lx = Lines::new(source, text);
    let mut it = lx.lines.iter();
    let head = it.next().ok_or_else(|| lx.eof("empty input, expected `lgs <name>`"))?;
    if head[0].text != "lgs" {
        return Err(lx.err(&head[0], "expected `lgs <name>`"));
    }
    lx.arity(head, 2)?;
    let name = head[1].text.to_string();
    let mut alphabet: Option<Alphabet> = None;
    let mut depth: Option<usize> = None;
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut edge_toks: Vec<&Vec<Tok>> = Vec::new();
    let mut iota_toks: Vec<&Vec<Tok>> = Vec::new();
    let mut ended = false;
    for toks in it.by_ref() {
        let kw = &toks[0];
        match kw.text {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(lx.err(kw, "duplicate `alphabet` line"));
                }
                if toks.len() < 2 {
                    return Err(lx.err(kw, "`alphabet` needs at least one symbol"));
                }
                let mut seen = BTreeSet::new();
                for t in &toks[1..] {
                    if !seen.insert(t.text) {
                        return Err(lx.err(t, format!("duplicate symbol {}", t.text)));
                    }
                }
                alphabet = Some(
                    Alphabet::new(toks[1..].iter().map(|t| t.text)).map_err(|e| lx.err(&toks[1], e.to_string()))?,
                );
            }
            "depth" => {
                lx.arity(toks, 2)?;
                if depth.is_some() {
                    return Err(lx.err(kw, "duplicate `depth` line"));
                }
                let d = lx.num(&toks[1])?;
                if d == 0 {
                    return Err(lx.err(&toks[1], "depth must be at least 1"));
                }
                depth = Some(d);
            }
            "vertices" => {
                lx.arity(toks, 3)?;
                let l = lx.num(&toks[1])?;
                let m = lx.num(&toks[2])?;
                if m == 0 {
                    return Err(lx.err(&toks[2], "a level needs at least one vertex"));
                }
                if sizes.insert(l, m).is_some() {
                    return Err(lx.err(&toks[1], format!("level {l} declared twice")));
                }
            }
            "edge" => {
                lx.arity(toks, 5)?;
                edge_toks.push(toks);
            }
            "iota" => {
                lx.arity(toks, 4)?;
                iota_toks.push(toks);
            }
            "end" => {
                lx.arity(toks, 1)?;
                ended = true;
                break;
            }
            other => return Err(lx.err(kw, format!("unknown keyword `{other}`"))),
        }
    }
    if !ended {
        return Err(lx.eof("missing `end`"));
    }
    if let Some(extra) = it.next() {
        return Err(lx.err(&extra[0], "content after `end`"));
    }
    let alphabet = alphabet.ok_or_else(|| lx.eof("missing `alphabet` line"))?;
    let depth = depth.ok_or_else(|| lx.eof("missing `depth` line"))?;
    let mut size_vec = Vec::new();
    for l in 0..=depth {
        size_vec.push(*sizes.get(&l).ok_or_else(|| lx.eof(format!("missing `vertices {l} <m>`")))?);
    }
    if let Some((&l, _)) = sizes.iter().find(|(&l, _)| l > depth) {
        return Err(lx.eof(format!("vertices declared for level {l} beyond depth {depth}")));
    }
    let mut edges = Vec::new();
    let mut seen_edges = BTreeSet::new();
    for toks in edge_toks {
        let l = lx.num(&toks[1])?;
        if l >= depth {
            return Err(lx.err(&toks[1], format!("edge level {l} must be below depth {depth}")));
        }
        let i = vertex_index(&lx, &toks[2], size_vec[l])?;
        let a = alphabet.lookup(toks[3].text).ok_or_else(|| lx.err(&toks[3], format!("unknown symbol {}", toks[3].text)))?;
        let j = vertex_index(&lx, &toks[4], size_vec[l + 1])?;
        let e = Edge { level: l, src: i, label: a, dst: j };
        if !seen_edges.insert(e) {
            return Err(lx.err(&toks[0], "repeated edge with identical source, label and target"));
        }
        edges.push(e);
    }
    let mut iota: Vec<Vec<Option<usize>>> = (0..depth).map(|l| vec![None; size_vec[l + 1]]).collect();
    for toks in iota_toks {
        let l = lx.num(&toks[1])?;
        if l >= depth {
            return Err(lx.err(&toks[1], format!("iota level {l} must be below depth {depth}")));
        }
        let j = vertex_index(&lx, &toks[2], size_vec[l + 1])?;
        let i = vertex_index(&lx, &toks[3], size_vec[l])?;
        if iota[l][j].replace(i).is_some() {
            return Err(lx.err(&toks[0], format!("iota_{{{l},{}}} given twice for vertex {}", l + 1, j + 1)));
        }
    }
    let mut iota_full = Vec::new();
    for (l, map) in iota.into_iter().enumerate() {
        let mut v = Vec::new();
        for (j, x) in map.into_iter().enumerate() {
            v.push(x.ok_or_else(|| lx.eof(format!("iota_{{{l},{}}} undefined on vertex {}", l + 1, j + 1)))?);
        }
        iota_full.push(v);
    }
    Lgs::new(name, alphabet, size_vec, edges, iota_full)
}

fn vertex_index(lx: &Lines, tok: &Tok, size: usize) -> Result<usize> {
    let i = lx.num(tok)?;
    if i == 0 || i > size {
        return Err(lx.err(tok, format!("vertex index {i} out of range 1..={size}")));
    }
    Ok(i - 1)
}

pub fn lgs_to_text(s: &Lgs) -> String {
    let mut out = String::new();
    writeln!(out, "lgs {}", s.name()).unwrap();
    writeln!(out, "alphabet {}", s.alphabet().names().join(" ")).unwrap();
    writeln!(out, "depth {}", s.depth()).unwrap();
    for l in 0..=s.depth() {
        writeln!(out, "vertices {} {}", l, s.size(l)).unwrap();
    }
    for e in s.all_edges() {
        writeln!(out, "edge {} {} {} {}", e.level, e.src + 1, s.alphabet().name(e.label), e.dst + 1).unwrap();
    }
    for l in 0..s.depth() {
        for (j, &i) in s.iota_map(l).iter().enumerate() {
            writeln!(out, "iota {} {} {}", l, j + 1, i + 1).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

pub fn parse_graph(source: &str, text: &str) -> Result<LabeledGraph> {
    let lx = Lines::new(source, text);
    let mut it = lx.lines.iter();
    let head = it.next().ok_or_else(|| lx.eof("empty input, expected `graph <name>`"))?;
    if head[0].text != "graph" {
        return Err(lx.err(&head[0], "expected `graph <name>`"));
    }
    lx.arity(head, 2)?;
    let mut declared: Option<Vec<String>> = None;
    let mut states: Vec<String> = Vec::new();
    let mut raw_edges: Vec<&Vec<Tok>> = Vec::new();
    let mut ended = false;
    for toks in it.by_ref() {
        match toks[0].text {
            "alphabet" => {
                if declared.is_some() {
                    return Err(lx.err(&toks[0], "duplicate `alphabet` line"));
                }
                declared = Some(toks[1..].iter().map(|t| t.text.to_string()).collect());
            }
            "state" => {
                lx.arity(toks, 2)?;
                if states.iter().any(|s| s == toks[1].text) {
                    return Err(lx.err(&toks[1], format!("state {} declared twice", toks[1].text)));
                }
                states.push(toks[1].text.into());
            }
            "edge" => {
                lx.arity(toks, 4)?;
                raw_edges.push(toks);
            }
            "end" => {
                lx.arity(toks, 1)?;
                ended = true;
                break;
            }
            other => return Err(lx.err(&toks[0], format!("unknown keyword `{other}`"))),
        }
    }
    if !ended {
        return Err(lx.eof("missing `end`"));
    }
    if let Some(extra) = it.next() {
        return Err(lx.err(&extra[0], "content after `end`"));
    }
    let names = match declared {
        Some(n) => n,
        None => {
            let mut n: Vec<String> = Vec::new();
            for t in &raw_edges {
                if !n.iter().any(|x| x == t[2].text) {
                    n.push(t[2].text.into());
                }
            }
            n
        }
    };
    let alphabet = Alphabet::new(names).map_err(|e| lx.err(&head[0], e.to_string()))?;
    let state_ix = |t: &Tok| -> Result<usize> {
        states.iter().position(|s| s == t.text).ok_or_else(|| lx.err(t, format!("unknown state {}", t.text)))
    };
    let mut edges = Vec::new();
    for t in raw_edges {
        let s = state_ix(&t[1])?;
        let a = alphabet.lookup(t[2].text).ok_or_else(|| lx.err(&t[2], format!("unknown symbol {}", t[2].text)))?;
        let d = state_ix(&t[3])?;
        if edges.contains(&(s, a, d)) {
            return Err(lx.err(&t[0], "repeated edge with identical source, label and target"));
        }
        edges.push((s, a, d));
    }
    LabeledGraph::new(head[1].text, alphabet, states, edges)
}

pub fn graph_to_text(g: &LabeledGraph) -> String {
    let mut out = String::new();
    writeln!(out, "graph {}", g.name).unwrap();
    writeln!(out, "alphabet {}", g.alphabet.names().join(" ")).unwrap();
    for s in &g.states {
        writeln!(out, "state {s}").unwrap();
    }
    for &(s, a, t) in &g.edges {
        writeln!(out, "edge {} {} {}", g.states[s], g.alphabet.name(a), g.states[t]).unwrap();
    }
    out.push_str("end\n");
    out
}

/// Parses either format; graphs are expanded to `graph_depth` levels.
pub fn parse_system(source: &str, text: &str, graph_depth: usize) -> Result<Lgs> {
    let lx = Lines::new(source, text);
    match lx.lines.first().map(|t| t[0].text) {
        Some("graph") => {
            let g = parse_graph(source, text)?;
            crate::system::from_labeled_graph(&g, graph_depth)
        }
        _ => parse_lgs(source, text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn round_trip() {
        for s in [examples::full2(3), examples::golden(4), examples::even(5)] {
            let t = lgs_to_text(&s);
            assert_eq!(parse_lgs("mem", &t).unwrap(), s);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let text = "lgs x\nalphabet a\ndepth 1\nvertices 0 1\nvertices 1 1\nedge 0 1 z 1\niota 0 1 1\nend\n";
        match parse_lgs("f.lgs", text).unwrap_err() {
            Error::Parse { source_name, line, col, .. } => {
                assert_eq!((source_name.as_str(), line, col), ("f.lgs", 6, 10));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn repeated_edges_are_rejected() {
        let text = "lgs x\nalphabet a\ndepth 1\nvertices 0 1\nvertices 1 1\nedge 0 1 a 1\nedge 0 1 a 1\niota 0 1 1\nend\n";
        let e = parse_lgs("f", text).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 7, col: 1, .. }), "{e}");
    }

    #[test]
    fn missing_end_reports_eof() {
        let e = parse_lgs("f", "lgs x\nalphabet a\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# c\ngraph g # trailing\n\nstate 1\nedge 1 a 1\nedge 1 b 1\nend\n";
        let g = parse_graph("g", text).unwrap();
        assert_eq!(g.alphabet.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(parse_graph("g", &graph_to_text(&g)).unwrap(), g);
    }
}
