//! Truncated λ-graph systems: vertices `v_i^l` for levels `0..=D`, labeled
//! edges between consecutive levels and the surjections `ι_{l,l+1}`.
//!
//! Vertex indices are 0-based in memory and printed 1-based as `v(l,i)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type Sym = usize;
pub type Word = Vec<Sym>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Structure("empty alphabet".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() || n.contains(|c: char| c.is_whitespace() || ",()+*^.-".contains(c)) {
                return Err(Error::Structure(format!("bad symbol name {n:?}")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Structure(format!("duplicate symbol {n}")));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.names.iter().position(|n| n == name)
    }

    /// Words print by concatenation when every symbol is one character,
    /// otherwise dot-separated. The empty word prints as `ε`.
    pub fn format_word(&self, w: &[Sym]) -> String {
        if w.is_empty() {
            return "ε".into();
        }
        let sep = if self.names.iter().all(|n| n.chars().count() == 1) {
            ""
        } else {
            "."
        };
        w.iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(sep)
    }

    /// Accepts `ε`, `-` or the empty string for the empty word, dot-separated
    /// symbols, or a concatenation split by greedy longest match.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let t = text.trim();
        if t.is_empty() || t == "ε" || t == "-" {
            return Ok(Vec::new());
        }
        if t.contains('.') {
            return t
                .split('.')
                .map(|p| {
                    self.lookup(p)
                        .ok_or_else(|| Error::Invalid(format!("unknown symbol {p:?} in word {t:?}")))
                })
                .collect();
        }
        let mut out = Vec::new();
        let mut rest = t;
        while !rest.is_empty() {
            let best = self
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((s, n)) => {
                    out.push(s);
                    rest = &rest[n.len()..];
                }
                None => return Err(Error::Invalid(format!("cannot split word {t:?} over the alphabet"))),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub level: usize,
    /// 0-based; displayed 1-based.
    pub index: usize,
}

impl VertexRef {
    pub fn new(level: usize, index: usize) -> Self {
        VertexRef { level, index }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v({},{})", self.level, self.index + 1)
    }
}

impl std::str::FromStr for VertexRef {
    type Err = Error;

    /// Parses `v(l,i)` with a 1-based index.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("expected v(l,i), found {text:?}"));
        let inner = text.trim().strip_prefix("v(").and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (l, i) = inner.split_once(',').ok_or_else(bad)?;
        let level: usize = l.trim().parse().map_err(|_| bad())?;
        let index: usize = i.trim().parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(Error::Invalid(format!("vertex indices are 1-based in {text:?}")));
        }
        Ok(VertexRef { level, index: index - 1 })
    }
}

/// Edge from `v_src^level` to `v_dst^{level+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub level: usize,
    pub src: usize,
    pub label: Sym,
    pub dst: usize,
}

#[derive(Clone, Debug)]
pub struct Lgs {
    name: String,
    alphabet: Alphabet,
    sizes: Vec<usize>,
    edges: Vec<Vec<Edge>>,
    iota: Vec<Vec<usize>>,
    out: Vec<Vec<Vec<(Sym, usize)>>>,
    inn: Vec<Vec<Vec<(Sym, usize)>>>,
}

impl PartialEq for Lgs {
    /// Structural equality; the name is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.sizes == other.sizes
            && self.edges == other.edges
            && self.iota == other.iota
    }
}

impl Eq for Lgs {}

impl Lgs {
    /// Builds a system after structural checks only (index ranges, one ι
    /// value per vertex, no repeated `(source, label, target)` edges).
    /// Axioms are checked separately by [`Lgs::validate`].
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        sizes: Vec<usize>,
        edges: Vec<Edge>,
        iota: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Structure("depth must be at least 1".into()));
        }
        let depth = sizes.len() - 1;
        if let Some(l) = sizes.iter().position(|&m| m == 0) {
            return Err(Error::Structure(format!("level {l} has no vertices")));
        }
        if iota.len() != depth {
            return Err(Error::Structure(format!(
                "expected {depth} iota maps, got {}",
                iota.len()
            )));
        }
        for (l, map) in iota.iter().enumerate() {
            if map.len() != sizes[l + 1] {
                return Err(Error::Structure(format!(
                    "iota_{{{l},{}}} has {} entries, level {} has {} vertices",
                    l + 1,
                    map.len(),
                    l + 1,
                    sizes[l + 1]
                )));
            }
            for &i in map {
                if i >= sizes[l] {
                    return Err(Error::VertexOutOfRange { level: l, index: i + 1, size: sizes[l] });
                }
            }
        }
        let mut per_level: Vec<Vec<Edge>> = vec![Vec::new(); depth];
        for e in edges {
            if e.level >= depth {
                return Err(Error::LevelOutOfRange { level: e.level, max: depth - 1 });
            }
            if e.src >= sizes[e.level] {
                return Err(Error::VertexOutOfRange {
                    level: e.level,
                    index: e.src + 1,
                    size: sizes[e.level],
                });
            }
            if e.dst >= sizes[e.level + 1] {
                return Err(Error::VertexOutOfRange {
                    level: e.level + 1,
                    index: e.dst + 1,
                    size: sizes[e.level + 1],
                });
            }
            if e.label >= alphabet.len() {
                return Err(Error::Structure(format!("label index {} out of range", e.label)));
            }
            per_level[e.level].push(e);
        }
        for list in per_level.iter_mut() {
            list.sort();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Structure(format!(
                        "repeated edge {} --{}--> {}",
                        VertexRef::new(w[0].level, w[0].src),
                        alphabet.name(w[0].label),
                        VertexRef::new(w[0].level + 1, w[0].dst)
                    )));
                }
            }
        }
        let mut out: Vec<Vec<Vec<(Sym, usize)>>> = sizes.iter().map(|&m| vec![Vec::new(); m]).collect();
        let mut inn: Vec<Vec<Vec<(Sym, usize)>>> = sizes.iter().map(|&m| vec![Vec::new(); m]).collect();
        for list in &per_level {
            for e in list {
                out[e.level][e.src].push((e.label, e.dst));
                inn[e.level + 1][e.dst].push((e.label, e.src));
            }
        }
        for lvl in out.iter_mut().chain(inn.iter_mut()) {
            for v in lvl.iter_mut() {
                v.sort();
            }
        }
        Ok(Lgs {
            name: name.into(),
            alphabet,
            sizes,
            edges: per_level,
            iota,
            out,
            inn,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn size(&self, l: usize) -> usize {
        self.sizes[l]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Edges of `E_{l,l+1}`, sorted.
    pub fn edges(&self, l: usize) -> &[Edge] {
        &self.edges[l]
    }

    pub fn iota_map(&self, l: usize) -> &[usize] {
        &self.iota[l]
    }

    /// `ι_{l,l+1}(v_j^{l+1})`.
    pub fn iota(&self, l: usize, j: usize) -> usize {
        self.iota[l][j]
    }

    /// `ι^{from-to}` applied to a vertex at level `from`.
    pub fn project(&self, from: usize, v: usize, to: usize) -> usize {
        debug_assert!(to <= from);
        let mut v = v;
        for l in (to..from).rev() {
            v = self.iota[l][v];
        }
        v
    }

    /// Outgoing `(label, target)` pairs of `v_u^l`.
    pub fn out_edges(&self, l: usize, u: usize) -> &[(Sym, usize)] {
        &self.out[l][u]
    }

    /// Incoming `(label, source)` pairs of `v_v^l`, sources at level `l-1`.
    pub fn in_edges(&self, l: usize, v: usize) -> &[(Sym, usize)] {
        &self.inn[l][v]
    }

    pub fn has_in_label(&self, l: usize, v: usize, a: Sym) -> bool {
        self.inn[l][v].iter().any(|&(b, _)| b == a)
    }

    /// First source of an `a`-edge into `v_v^l`; unique when left-resolving.
    pub fn pred(&self, l: usize, v: usize, a: Sym) -> Option<usize> {
        if l == 0 {
            return None;
        }
        self.inn[l][v].iter().find(|&&(b, _)| b == a).map(|&(_, s)| s)
    }

    /// Whether some path labeled `word` ends at `v_v^l` (it starts at level
    /// `l - |word|`). This is admissibility of the cylinder `U(word, v_v^l)`.
    pub fn admissible(&self, word: &[Sym], l: usize, v: usize) -> bool {
        if word.len() > l || l > self.depth() || v >= self.sizes[l] {
            return false;
        }
        let mut cur: BTreeSet<usize> = BTreeSet::from([v]);
        let mut lvl = l;
        for &a in word.iter().rev() {
            let mut next = BTreeSet::new();
            for &x in &cur {
                for &(b, s) in &self.inn[lvl][x] {
                    if b == a {
                        next.insert(s);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            cur = next;
            lvl -= 1;
        }
        true
    }

    /// Vertices of the path labeled `word` ending at `v_v^l`, from level
    /// `l - |word|` up to `l`; follows first predecessors, so the path is the
    /// unique one when left-resolving.
    pub fn backtrack(&self, word: &[Sym], l: usize, v: usize) -> Option<Vec<usize>> {
        if word.len() > l {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        let mut lvl = l;
        for &a in word.iter().rev() {
            cur = self.pred(lvl, cur, a)?;
            lvl -= 1;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    pub fn check_vertex(&self, v: VertexRef) -> Result<()> {
        if v.level > self.depth() {
            return Err(Error::LevelOutOfRange { level: v.level, max: self.depth() });
        }
        if v.index >= self.sizes[v.level] {
            return Err(Error::VertexOutOfRange {
                level: v.level,
                index: v.index + 1,
                size: self.sizes[v.level],
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let d = self.depth();
        for l in 0..d {
            let mut hit = vec![false; self.sizes[l]];
            for &i in &self.iota[l] {
                hit[i] = true;
            }
            for (i, h) in hit.iter().enumerate() {
                if !h {
                    violations.push(Violation {
                        rule: Rule::IotaSurjective,
                        location: format!("l={l} {}", VertexRef::new(l, i)),
                        detail: format!("no vertex of level {} maps to {}", l + 1, VertexRef::new(l, i)),
                    });
                }
            }
        }
        for l in 0..d {
            for u in 0..self.sizes[l] {
                if self.out[l][u].is_empty() {
                    violations.push(Violation {
                        rule: Rule::Successor,
                        location: format!("l={l} {}", VertexRef::new(l, u)),
                        detail: "no outgoing edge".into(),
                    });
                }
            }
        }
        for l in 1..=d {
            for v in 0..self.sizes[l] {
                if self.inn[l][v].is_empty() {
                    violations.push(Violation {
                        rule: Rule::Predecessor,
                        location: format!("l={l} {}", VertexRef::new(l, v)),
                        detail: "no incoming edge".into(),
                    });
                }
            }
        }
        for (l, u, v, lhs, rhs) in self.local_property_mismatches(false) {
            violations.push(Violation {
                rule: Rule::LocalProperty,
                location: format!("l={l} u={} v={}", VertexRef::new(l - 1, u), VertexRef::new(l + 1, v)),
                detail: format!(
                    "labels of E^iota(u,v) = {{{}}} but E_iota(u,v) = {{{}}}",
                    self.fmt_labels(&lhs),
                    self.fmt_labels(&rhs)
                ),
            });
        }
        for (l, v, a) in self.terminal_mismatches() {
            violations.push(Violation {
                rule: Rule::TerminalConsistency,
                location: format!("l={l} v={}", VertexRef::new(l + 1, v)),
                detail: format!(
                    "label {} enters exactly one of {} and {}",
                    self.alphabet.name(a),
                    VertexRef::new(l + 1, v),
                    VertexRef::new(l, self.iota[l][v])
                ),
            });
        }
        ValidationReport { violations }
    }

    fn fmt_labels(&self, ls: &[Sym]) -> String {
        ls.iter().map(|&a| self.alphabet.name(a)).collect::<Vec<_>>().join(",")
    }

    /// Label multisets of `E^ι(u,v)` against `E_ι(u,v)` for every `u ∈ V_{l-1}`,
    /// `v ∈ V_{l+1}`; `swap` exchanges which side is collected first.
    pub(crate) fn local_property_mismatches(&self, swap: bool) -> Vec<(usize, usize, usize, Vec<Sym>, Vec<Sym>)> {
        let mut bad = Vec::new();
        let d = self.depth();
        for l in 1..d {
            for v in 0..self.sizes[l + 1] {
                let mut upper: BTreeMap<usize, Vec<Sym>> = BTreeMap::new();
                for &(a, s) in &self.inn[l + 1][v] {
                    upper.entry(self.iota[l - 1][s]).or_default().push(a);
                }
                let mut lower: BTreeMap<usize, Vec<Sym>> = BTreeMap::new();
                for &(a, s) in &self.inn[l][self.iota[l][v]] {
                    lower.entry(s).or_default().push(a);
                }
                let (first, second) = if swap { (&lower, &upper) } else { (&upper, &lower) };
                for u in 0..self.sizes[l - 1] {
                    let mut x = first.get(&u).cloned().unwrap_or_default();
                    let mut y = second.get(&u).cloned().unwrap_or_default();
                    x.sort();
                    y.sort();
                    if x != y {
                        let (lhs, rhs) = if swap { (y, x) } else { (x, y) };
                        bad.push((l, u, v, lhs, rhs));
                    }
                }
            }
        }
        bad
    }

    fn terminal_mismatches(&self) -> Vec<(usize, usize, Sym)> {
        let mut bad = Vec::new();
        for l in 1..self.depth() {
            for v in 0..self.sizes[l + 1] {
                let above: BTreeSet<Sym> = self.inn[l + 1][v].iter().map(|&(a, _)| a).collect();
                let below: BTreeSet<Sym> = self.inn[l][self.iota[l][v]].iter().map(|&(a, _)| a).collect();
                for &a in above.symmetric_difference(&below) {
                    bad.push((l, v, a));
                }
            }
        }
        bad
    }

    /// `Ok(())` or the first two edges sharing target and label.
    pub fn is_left_resolving(&self) -> std::result::Result<(), (Edge, Edge)> {
        for (l, list) in self.edges.iter().enumerate() {
            let mut seen: BTreeMap<(usize, Sym), Edge> = BTreeMap::new();
            for e in list {
                if let Some(prev) = seen.insert((e.dst, e.label), *e) {
                    let _ = l;
                    return Err((prev, *e));
                }
            }
        }
        Ok(())
    }

    pub fn require_left_resolving(&self) -> Result<()> {
        self.is_left_resolving().map_err(|(e, f)| {
            Error::NotLeftResolving(format!(
                "edges from {} and {} both enter {} with label {}",
                VertexRef::new(e.level, e.src),
                VertexRef::new(f.level, f.src),
                VertexRef::new(e.level + 1, e.dst),
                self.alphabet.name(e.label)
            ))
        })
    }

    pub fn transition_matrices(&self, l: usize) -> Result<TransitionMatrices> {
        if l >= self.depth() {
            return Err(Error::LevelOutOfRange { level: l, max: self.depth() - 1 });
        }
        let (m0, m1, n) = (self.sizes[l], self.sizes[l + 1], self.alphabet.len());
        let mut a = vec![vec![vec![0u8; m1]; n]; m0];
        for e in &self.edges[l] {
            a[e.src][e.label][e.dst] = 1;
        }
        let mut i = vec![vec![0u8; m1]; m0];
        for (j, &t) in self.iota[l].iter().enumerate() {
            i[t][j] = 1;
        }
        Ok(TransitionMatrices { a, i })
    }

    pub fn truncate(&self, d: usize) -> Result<Lgs> {
        if d == 0 || d > self.depth() {
            return Err(Error::Invalid(format!("truncation depth {d} not in 1..={}", self.depth())));
        }
        Lgs::new(
            self.name.clone(),
            self.alphabet.clone(),
            self.sizes[..=d].to_vec(),
            self.edges[..d].iter().flatten().copied().collect(),
            self.iota[..d].to_vec(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// All edges, level by level.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrices {
    /// `a[i][α][j]`
    pub a: Vec<Vec<Vec<u8>>>,
    /// `i[i][j]`
    pub i: Vec<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    IotaSurjective,
    Successor,
    Predecessor,
    LocalProperty,
    TerminalConsistency,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::IotaSurjective => "iota-surjectivity",
            Rule::Successor => "successor",
            Rule::Predecessor => "predecessor",
            Rule::LocalProperty => "local-property",
            Rule::TerminalConsistency => "terminal-consistency",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub location: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// A finite labeled graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub name: String,
    pub alphabet: Alphabet,
    pub states: Vec<String>,
    pub edges: Vec<(usize, Sym, usize)>,
}

impl LabeledGraph {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        states: Vec<String>,
        edges: Vec<(usize, Sym, usize)>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::Structure("graph has no states".into()));
        }
        for &(s, a, t) in &edges {
            if s >= n || t >= n || a >= alphabet.len() {
                return Err(Error::Structure(format!("edge ({s},{a},{t}) references unknown state or symbol")));
            }
        }
        let mut sorted = edges.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != edges.len() {
            return Err(Error::Structure("repeated graph edge".into()));
        }
        Ok(LabeledGraph { name: name.into(), alphabet, states, edges })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn is_left_resolving(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|&(_, a, t)| seen.insert((t, a)))
    }

    /// `S(w)`: states from which a path labeled `w` starts.
    pub fn follower_states(&self, w: &[Sym]) -> BTreeSet<usize> {
        let mut cur: BTreeSet<usize> = (0..self.states.len()).collect();
        for &a in w.iter().rev() {
            cur = self.pred_set(&cur, a);
        }
        cur
    }

    /// States with an `a`-edge into `set`.
    pub fn pred_set(&self, set: &BTreeSet<usize>, a: Sym) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|&&(_, b, t)| b == a && set.contains(&t))
            .map(|&(s, _, _)| s)
            .collect()
    }
}

/// Same vertices at every level, `ι` the identity, graph edges copied.
pub fn from_labeled_graph(g: &LabeledGraph, depth: usize) -> Result<Lgs> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    let n = g.state_count();
    for s in 0..n {
        if !g.edges.iter().any(|&(x, _, _)| x == s) {
            return Err(Error::Invalid(format!("state {} has no outgoing edge", g.states[s])));
        }
        if !g.edges.iter().any(|&(_, _, y)| y == s) {
            return Err(Error::Invalid(format!("state {} has no incoming edge", g.states[s])));
        }
    }
    let edges = (0..depth)
        .flat_map(|l| g.edges.iter().map(move |&(s, a, t)| Edge { level: l, src: s, label: a, dst: t }))
        .collect();
    Lgs::new(
        g.name.clone(),
        g.alphabet.clone(),
        vec![n; depth + 1],
        edges,
        vec![(0..n).collect(); depth],
    )
}

/// Past-set presentation. Level-`l` vertices are the distinct sets
/// `Γ_l⁻(w) = {ν ∈ B_l : νw admissible}` over admissible words `w` of length
/// `window`. The edge labeled `α` into the class of `w` starts at the class
/// `{ν : να ∈ Γ_{l+1}⁻(w)}`; `ι` sends the class of `w` at level `l+1` to its
/// class at level `l`. Fails with a window error when a source set is not
/// itself a class, which cannot happen once `window` exceeds the
/// synchronization length of the input.
pub fn canonical_lgs(g: &LabeledGraph, depth: usize, window: usize) -> Result<Lgs> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    if window < depth {
        return Err(Error::Invalid(format!("window {window} is smaller than depth {depth}")));
    }
    let futures = graph_words(g, window);
    let follower: BTreeSet<BTreeSet<usize>> = futures.iter().map(|w| g.follower_states(w)).collect();
    // ending[l][s] = words of length l that label a path ending at state s
    let mut ending: Vec<Vec<BTreeSet<Word>>> = vec![vec![BTreeSet::from([Vec::new()]); g.state_count()]];
    for l in 0..depth {
        let mut next = vec![BTreeSet::new(); g.state_count()];
        for &(s, a, t) in &g.edges {
            for w in &ending[l][s] {
                let mut w2 = w.clone();
                w2.push(a);
                next[t].insert(w2);
            }
        }
        ending.push(next);
    }
    let past = |l: usize, set: &BTreeSet<usize>| -> BTreeSet<Word> {
        set.iter().flat_map(|&s| ending[l][s].iter().cloned()).collect()
    };
    // classes[l] : class -> index, reps[l][idx] = one follower set realizing it
    let mut classes: Vec<BTreeMap<BTreeSet<Word>, usize>> = Vec::new();
    let mut rep_of: Vec<Vec<BTreeSet<usize>>> = Vec::new();
    for l in 0..=depth {
        let mut map = BTreeMap::new();
        let mut reps = Vec::new();
        for f in &follower {
            let p = past(l, f);
            if let std::collections::btree_map::Entry::Vacant(e) = map.entry(p) {
                e.insert(reps.len());
                reps.push(f.clone());
            }
        }
        classes.push(map);
        rep_of.push(reps);
    }
    let mut edges = Vec::new();
    let mut iota = Vec::new();
    for l in 0..depth {
        let mut map = Vec::new();
        for f in &rep_of[l + 1] {
            map.push(classes[l][&past(l, f)]);
        }
        iota.push(map);
        for (j, f) in rep_of[l + 1].iter().enumerate() {
            for a in 0..g.alphabet.len() {
                let src_states = g.pred_set(f, a);
                if src_states.is_empty() {
                    continue;
                }
                let src_past = past(l, &src_states);
                let Some(&i) = classes[l].get(&src_past) else {
                    return Err(Error::Invalid(format!(
                        "window {window} too small: source class at level {l} is not a past set of a length-{window} word"
                    )));
                };
                edges.push(Edge { level: l, src: i, label: a, dst: j });
            }
        }
    }
    let sizes = rep_of.iter().map(|r| r.len()).collect();
    let lgs = Lgs::new(g.name.clone(), g.alphabet.clone(), sizes, edges, iota)?;
    let report = lgs.validate();
    if !report.ok() {
        return Err(Error::Invalid(format!(
            "window {window} too small: past-set system violates {}",
            report.violations[0].rule
        )));
    }
    Ok(lgs)
}

/// Label sequences of length-`k` paths in a labeled graph, sorted.
pub fn graph_words(g: &LabeledGraph, k: usize) -> BTreeSet<Word> {
    let mut frontier: BTreeSet<(Word, usize)> = (0..g.state_count()).map(|s| (Vec::new(), s)).collect();
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for (w, s) in &frontier {
            for &(x, a, t) in &g.edges {
                if x == *s {
                    let mut w2 = w.clone();
                    w2.push(a);
                    next.insert((w2, t));
                }
            }
        }
        frontier = next;
    }
    frontier.into_iter().map(|(w, _)| w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use proptest::prelude::*;

    #[test]
    fn full2_is_valid_and_left_resolving() {
        let f = examples::full2(4);
        assert!(f.validate().ok());
        assert!(f.is_left_resolving().is_ok());
        assert_eq!(f.sizes(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn deleting_a_level_two_edge_breaks_the_local_property() {
        let f = examples::full2(4);
        let b = f.alphabet().lookup("b").unwrap();
        let edges: Vec<Edge> = f.all_edges().copied().filter(|e| !(e.level == 2 && e.label == b)).collect();
        let broken = Lgs::new("x", f.alphabet().clone(), f.sizes().to_vec(), edges, (0..4).map(|_| vec![0]).collect()).unwrap();
        let r = broken.validate();
        let first = r.violations.iter().find(|v| v.rule == Rule::LocalProperty).unwrap();
        assert_eq!(first.location, "l=2 u=v(1,1) v=v(3,1)");
    }

    #[test]
    fn non_surjective_iota_is_reported_at_level_zero() {
        let a = Alphabet::new(["a"]).unwrap();
        let edges = vec![
            Edge { level: 0, src: 0, label: 0, dst: 0 },
            Edge { level: 0, src: 1, label: 0, dst: 1 },
        ];
        let s = Lgs::new("x", a, vec![2, 2], edges, vec![vec![0, 0]]).unwrap();
        let r = s.validate();
        assert!(r.violations.iter().any(|v| v.rule == Rule::IotaSurjective && v.location.starts_with("l=0")));
    }

    #[test]
    fn even_shift_depth_three_is_left_resolving() {
        assert!(examples::even(3).is_left_resolving().is_ok());
    }

    #[test]
    fn colliding_labels_break_left_resolving() {
        let a = Alphabet::new(["a", "b"]).unwrap();
        let g = LabeledGraph::new(
            "c",
            a,
            vec!["1".into(), "2".into()],
            vec![(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)],
        )
        .unwrap();
        let s = from_labeled_graph(&g, 2).unwrap();
        let (e, f) = s.is_left_resolving().unwrap_err();
        assert_eq!((e.dst, e.label), (f.dst, f.label));
        assert_ne!(e.src, f.src);
    }

    #[test]
    fn golden_mean_matrices() {
        let g = examples::golden(4);
        let t = g.transition_matrices(2).unwrap();
        let (al, be, ga) = (0, 1, 2);
        let mut ones = Vec::new();
        for i in 0..2 {
            for a in 0..3 {
                for j in 0..2 {
                    if t.a[i][a][j] == 1 {
                        ones.push((i, a, j));
                    }
                }
            }
        }
        assert_eq!(ones, vec![(0, al, 0), (0, be, 1), (1, ga, 0)]);
        assert_eq!(t.i, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn sink_state_is_rejected() {
        let a = Alphabet::new(["a"]).unwrap();
        let g = LabeledGraph::new("s", a, vec!["1".into(), "2".into()], vec![(0, 0, 0), (0, 0, 1)]).unwrap();
        assert!(from_labeled_graph(&g, 3).is_err());
    }

    #[test]
    fn truncate_is_identity_at_full_depth() {
        let e = examples::even(5);
        assert_eq!(e.truncate(5).unwrap(), e);
        assert!(e.truncate(2).unwrap().validate().ok());
        assert!(e.truncate(0).is_err());
        assert!(e.truncate(6).is_err());
    }

    #[test]
    fn canonical_full2_has_one_vertex_per_level() {
        let s = canonical_lgs(&examples::full2_graph(), 3, 3).unwrap();
        assert_eq!(s.sizes(), &[1, 1, 1, 1]);
        assert!(canonical_lgs(&examples::full2_graph(), 3, 2).is_err());
    }

    #[test]
    fn parse_word_forms() {
        let a = Alphabet::new(["a", "ab", "b"]).unwrap();
        assert_eq!(a.parse_word("aba").unwrap(), vec![1, 0]);
        assert_eq!(a.parse_word("a.b.a").unwrap(), vec![0, 2, 0]);
        assert_eq!(a.parse_word("ε").unwrap(), Vec::<Sym>::new());
        assert!(a.parse_word("c").is_err());
    }

    proptest! {
        #[test]
        fn labeled_graph_systems_validate(seed in any::<u64>(), depth in 1usize..6) {
            let g = crate::gen::random_graph(seed, 4, 3);
            let s = from_labeled_graph(&g, depth).unwrap();
            prop_assert!(s.validate().ok());
        }

        #[test]
        fn local_property_is_symmetric(seed in any::<u64>()) {
            let s = crate::gen::random_lgs(seed, 4);
            let mut rng_edges: Vec<Edge> = s.all_edges().copied().collect();
            if seed % 3 == 0 && !rng_edges.is_empty() {
                rng_edges.remove((seed as usize / 3) % rng_edges.len());
            }
            let t = Lgs::new("t", s.alphabet().clone(), s.sizes().to_vec(), rng_edges,
                (0..s.depth()).map(|l| s.iota_map(l).to_vec()).collect()).unwrap();
            prop_assert_eq!(t.local_property_mismatches(false).is_empty(), t.local_property_mismatches(true).is_empty());
        }

        #[test]
        fn iota_columns_have_one_entry_and_rows_at_least_one(seed in any::<u64>()) {
            let s = crate::gen::random_lgs(seed, 4);
            prop_assume!(s.validate().ok());
            for l in 0..s.depth() {
                let t = s.transition_matrices(l).unwrap();
                for j in 0..s.size(l + 1) {
                    prop_assert_eq!((0..s.size(l)).map(|i| t.i[i][j] as usize).sum::<usize>(), 1);
                }
                for row in &t.i {
                    prop_assert!(row.contains(&1));
                }
            }
        }

        #[test]
        fn terminal_consistency_agrees_with_local_property(seed in any::<u64>()) {
            let s = crate::gen::random_lgs(seed, 4);
            if s.local_property_mismatches(false).is_empty() {
                prop_assert!(s.terminal_mismatches().is_empty());
            }
        }
    }
}
