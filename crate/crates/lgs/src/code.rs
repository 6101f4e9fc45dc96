//! Certificates: block codes between two systems, transfer functions and the
//! constants and bounds used by the equivalence checkers.
//!
//! ```text
//! certificate <name>
//! window <d>
//! code forward <word>,v(l,i) -> <sym> v(l2,j)
//! code inverse <word>,v(l,i) -> <sym> v(l2,j)
//! kfun 1 <word>,v(l,i) <int>      # or `kfun 1 * <int>` for a constant
//! lfun 2 * <int>
//! const K1 <int>
//! const K2 <int>
//! inj-window <l>
//! recode-bound <L>
//! end
//! ```
//!
//! A forward key `(μ, v_i^l)` with `|μ| = d` reads labels `x_i … x_{i+d-1}` and
//! the vertex of coordinate `i+d-1` projected to level `l`; its value is the
//! image coordinate `i` (a symbol and a vertex at the output level).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::language::cylinders;
use crate::points::{Point, PointModel};
use crate::system::{Lgs, Sym, VertexRef, Word};
use crate::text::{Lines, Tok};

/// A sliding block code with window `window` and no memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCode {
    pub window: usize,
    pub key_level: usize,
    pub out_level: usize,
    pub map: BTreeMap<(Word, usize), (Sym, usize)>,
}

impl BlockCode {
    /// Image coordinates `1..=n-d+1` of a point; `None` if some key is
    /// missing from the table.
    pub fn apply(&self, pm: &PointModel, p: &Point) -> Option<Point> {
        let d = self.window;
        if p.len() < d {
            return Some(Point { labels: Vec::new(), verts: Vec::new() });
        }
        let mut out = Point { labels: Vec::new(), verts: Vec::new() };
        for i in 0..=p.len() - d {
            let key = (p.labels[i..i + d].to_vec(), pm.vertex_at(p, i + d - 1, self.key_level));
            let &(b, w) = self.map.get(&key)?;
            out.labels.push(b);
            out.verts.push(w);
        }
        Some(out)
    }

    /// Keys of `s` that the table does not cover.
    pub fn missing_keys(&self, s: &Lgs) -> Result<Vec<(Word, VertexRef)>> {
        Ok(cylinders(s, self.window, self.key_level)?
            .into_iter()
            .filter(|c| !self.map.contains_key(&(c.word.clone(), c.vertex.index)))
            .map(|c| (c.word, c.vertex))
            .collect())
    }

    /// Keys that are not admissible cylinders of `s`.
    pub fn inadmissible_keys(&self, s: &Lgs) -> Vec<(Word, VertexRef)> {
        self.map
            .keys()
            .filter(|(w, v)| !s.admissible(w, self.key_level, *v))
            .map(|(w, v)| (w.clone(), VertexRef::new(self.key_level, *v)))
            .collect()
    }

    /// `σ^m ∘ self` as a code of window `d + m` (the first `m` symbols of
    /// each key are ignored).
    pub fn precompose_shift(&self, s: &Lgs, m: usize) -> Result<BlockCode> {
        if m == 0 {
            return Ok(self.clone());
        }
        let key_level = self.key_level + m;
        if key_level > s.depth() {
            return Err(Error::DepthBudget { needed: key_level, depth: s.depth() });
        }
        let mut map = BTreeMap::new();
        for c in cylinders(s, self.window + m, key_level)? {
            let tail = c.word[m..].to_vec();
            let v = s.project(key_level, c.vertex.index, self.key_level);
            if let Some(&val) = self.map.get(&(tail, v)) {
                map.insert((c.word, c.vertex.index), val);
            }
        }
        Ok(BlockCode { window: self.window + m, key_level, out_level: self.out_level, map })
    }

    /// The label map `h_Λ` on windows, if it does not depend on the vertex.
    pub fn label_map(&self) -> std::result::Result<BTreeMap<Word, Sym>, (Word, Sym, Sym)> {
        let mut out: BTreeMap<Word, Sym> = BTreeMap::new();
        for ((w, _), &(b, _)) in &self.map {
            match out.get(w) {
                Some(&c) if c != b => return Err((w.clone(), c, b)),
                _ => {
                    out.insert(w.clone(), b);
                }
            }
        }
        Ok(out)
    }
}

/// A `ℤ₊`-valued function of the first `window` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CylinderFunction {
    Constant(u64),
    Table { window: usize, level: usize, values: BTreeMap<(Word, usize), u64> },
}

impl CylinderFunction {
    pub fn window(&self) -> usize {
        match self {
            CylinderFunction::Constant(_) => 0,
            CylinderFunction::Table { window, .. } => *window,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            CylinderFunction::Constant(_) => 0,
            CylinderFunction::Table { level, .. } => *level,
        }
    }

    pub fn max_value(&self) -> u64 {
        match self {
            CylinderFunction::Constant(c) => *c,
            CylinderFunction::Table { values, .. } => values.values().copied().max().unwrap_or(0),
        }
    }

    pub fn eval(&self, pm: &PointModel, p: &Point) -> Option<u64> {
        match self {
            CylinderFunction::Constant(c) => Some(*c),
            CylinderFunction::Table { window, level, values } => {
                if p.len() < *window || *window == 0 {
                    return None;
                }
                let key = (p.labels[..*window].to_vec(), pm.vertex_at(p, window - 1, *level));
                values.get(&key).copied()
            }
        }
    }

    /// Keys of `s` where the function is undefined.
    pub fn missing_keys(&self, s: &Lgs) -> Result<Vec<(Word, VertexRef)>> {
        match self {
            CylinderFunction::Constant(_) => Ok(Vec::new()),
            CylinderFunction::Table { window, level, values } => Ok(cylinders(s, *window, *level)?
                .into_iter()
                .filter(|c| !values.contains_key(&(c.word.clone(), c.vertex.index)))
                .map(|c| (c.word, c.vertex))
                .collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub name: String,
    pub window: usize,
    pub forward: BlockCode,
    pub inverse: Option<BlockCode>,
    /// `k_1, l_1` on the first system and `k_2, l_2` on the second.
    pub k: [Option<CylinderFunction>; 2],
    pub l: [Option<CylinderFunction>; 2],
    pub consts: [Option<u64>; 2],
    pub inj_window: Option<usize>,
    pub recode_bound: Option<usize>,
}

impl Certificate {
    /// The two-sided certificate of `h ∘ σ^m`: the windows move by `m` and
    /// the inverse code is dropped.
    pub fn precompose_shift(&self, s1: &Lgs, m: usize) -> Result<Certificate> {
        if m == 0 {
            return Ok(self.clone());
        }
        let forward = self.forward.precompose_shift(s1, m)?;
        Ok(Certificate {
            name: format!("{}∘σ^{m}", self.name),
            window: forward.window,
            forward,
            inverse: None,
            inj_window: self.inj_window.map(|l| l + m),
            recode_bound: self.recode_bound.map(|l| l + m),
            ..self.clone()
        })
    }

    /// The transfer functions `(k_i, l_i)` for side `i ∈ {1, 2}`.
    pub fn transfer(&self, side: usize) -> Result<(&CylinderFunction, &CylinderFunction)> {
        let i = side - 1;
        match (&self.k[i], &self.l[i]) {
            (Some(k), Some(l)) => Ok((k, l)),
            _ => Err(Error::Precondition(format!("certificate {} lacks kfun/lfun {side}", self.name))),
        }
    }

    pub fn constants(&self) -> Result<(u64, u64)> {
        match self.consts {
            [Some(a), Some(b)] => Ok((a, b)),
            _ => Err(Error::Precondition(format!("certificate {} lacks const K1/K2", self.name))),
        }
    }

    pub fn inverse(&self) -> Result<&BlockCode> {
        self.inverse
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("certificate {} has no inverse code", self.name)))
    }

    /// The same certificate read as a continuous orbit equivalence with
    /// `k_i = K_i` and `l_i = K_i + 1`.
    pub fn ec_as_coe(&self) -> Result<Certificate> {
        let (a, b) = self.constants()?;
        let mut c = self.clone();
        c.k = [Some(CylinderFunction::Constant(a)), Some(CylinderFunction::Constant(b))];
        c.l = [Some(CylinderFunction::Constant(a + 1)), Some(CylinderFunction::Constant(b + 1))];
        Ok(c)
    }

    pub fn to_text(&self, s1: &Lgs, s2: &Lgs) -> String {
        let mut t = String::new();
        writeln!(t, "certificate {}", self.name).unwrap();
        writeln!(t, "window {}", self.window).unwrap();
        let code = |t: &mut String, dir: &str, c: &BlockCode, a: &Lgs, b: &Lgs| {
            for ((w, v), &(sym, u)) in &c.map {
                writeln!(
                    t,
                    "code {dir} {},{} -> {} {}",
                    a.alphabet().format_word(w),
                    VertexRef::new(c.key_level, *v),
                    b.alphabet().name(sym),
                    VertexRef::new(c.out_level, u)
                )
                .unwrap();
            }
        };
        code(&mut t, "forward", &self.forward, s1, s2);
        if let Some(inv) = &self.inverse {
            code(&mut t, "inverse", inv, s2, s1);
        }
        for (name, fs) in [("kfun", &self.k), ("lfun", &self.l)] {
            for (i, f) in fs.iter().enumerate() {
                let s = if i == 0 { s1 } else { s2 };
                match f {
                    None => {}
                    Some(CylinderFunction::Constant(c)) => writeln!(t, "{name} {} * {c}", i + 1).unwrap(),
                    Some(CylinderFunction::Table { level, values, .. }) => {
                        for ((w, v), c) in values {
                            writeln!(t, "{name} {} {},{} {c}", i + 1, s.alphabet().format_word(w), VertexRef::new(*level, *v))
                                .unwrap();
                        }
                    }
                }
            }
        }
        for (i, c) in self.consts.iter().enumerate() {
            if let Some(c) = c {
                writeln!(t, "const K{} {c}", i + 1).unwrap();
            }
        }
        if let Some(l) = self.inj_window {
            writeln!(t, "inj-window {l}").unwrap();
        }
        if let Some(l) = self.recode_bound {
            writeln!(t, "recode-bound {l}").unwrap();
        }
        t.push_str("end\n");
        t
    }
}

struct Builder {
    window: Option<usize>,
    level: Option<usize>,
    out_level: Option<usize>,
    map: BTreeMap<(Word, usize), (Sym, usize)>,
}

impl Builder {
    fn new() -> Self {
        Builder { window: None, level: None, out_level: None, map: BTreeMap::new() }
    }
}

fn cyl(lx: &Lines, tok: &Tok, s: &Lgs) -> Result<(Word, VertexRef)> {
    let (w, v) = tok
        .text
        .split_once(',')
        .ok_or_else(|| lx.err(tok, format!("expected `<word>,v(l,i)`, got {:?}", tok.text)))?;
    let word = s.alphabet().parse_word(w).map_err(|e| lx.err(tok, e.to_string()))?;
    let vr: VertexRef = v.parse().map_err(|e: Error| lx.err(tok, e.to_string()))?;
    if vr.level > s.depth() || vr.index >= s.size(vr.level) {
        return Err(lx.err(tok, format!("{vr} does not exist in {}", s.name())));
    }
    if !s.admissible(&word, vr.level, vr.index) {
        return Err(lx.err(tok, format!("cylinder {} is not admissible", tok.text)));
    }
    Ok((word, vr))
}

fn code_line(lx: &Lines, toks: &[Tok], b: &mut Builder, from: &Lgs, to: &Lgs) -> Result<()> {
    lx.arity(toks, 6)?;
    if toks[3].text != "->" {
        return Err(lx.err(&toks[3], "expected `->`"));
    }
    let (word, v) = cyl(lx, &toks[2], from)?;
    let sym = to
        .alphabet()
        .lookup(toks[4].text)
        .ok_or_else(|| lx.err(&toks[4], format!("unknown symbol {} in {}", toks[4].text, to.name())))?;
    let out: VertexRef = toks[5].text.parse().map_err(|e: Error| lx.err(&toks[5], e.to_string()))?;
    if out.level == 0 || out.level > to.depth() || out.index >= to.size(out.level) {
        return Err(lx.err(&toks[5], format!("{out} is not a vertex of {} at a positive level", to.name())));
    }
    if !to.has_in_label(out.level, out.index, sym) {
        return Err(lx.err(&toks[5], format!("no {}-edge enters {out}", toks[4].text)));
    }
    let check = |slot: &mut Option<usize>, val: usize, tok: &Tok, what: &str| -> Result<()> {
        match *slot {
            Some(x) if x != val => Err(lx.err(tok, format!("{what} {val} differs from earlier {x}"))),
            _ => {
                *slot = Some(val);
                Ok(())
            }
        }
    };
    check(&mut b.window, word.len(), &toks[2], "key length")?;
    check(&mut b.level, v.level, &toks[2], "key level")?;
    check(&mut b.out_level, out.level, &toks[5], "output level")?;
    if word.is_empty() {
        return Err(lx.err(&toks[2], "keys need at least one symbol"));
    }
    if b.map.insert((word, v.index), (sym, out.index)).is_some() {
        return Err(lx.err(&toks[2], "duplicate key"));
    }
    Ok(())
}

fn finish(b: Builder) -> Option<BlockCode> {
    Some(BlockCode { window: b.window?, key_level: b.level?, out_level: b.out_level?, map: b.map })
}

pub fn parse_certificate(source: &str, text: &str, s1: &Lgs, s2: &Lgs) -> Result<Certificate> {
    let lx = Lines::new(source, text);
    let mut it = lx.lines.iter();
    let head = it.next().ok_or_else(|| lx.eof("empty input, expected `certificate <name>`"))?;
    if head[0].text != "certificate" {
        return Err(lx.err(&head[0], "expected `certificate <name>`"));
    }
    lx.arity(head, 2)?;
    let mut window: Option<(usize, &Tok)> = None;
    let mut fwd = Builder::new();
    let mut inv = Builder::new();
    let mut tables: [[BTreeMap<(Word, usize), u64>; 2]; 2] = Default::default();
    let mut levels: [[Option<(usize, usize)>; 2]; 2] = [[None; 2]; 2];
    let mut consts_fn: [[Option<u64>; 2]; 2] = [[None; 2]; 2];
    let mut consts = [None, None];
    let mut inj_window = None;
    let mut recode_bound = None;
    let mut ended = false;
    for toks in it.by_ref() {
        let kw = &toks[0];
        match kw.text {
            "window" => {
                lx.arity(toks, 2)?;
                window = Some((lx.num(&toks[1])?, &toks[1]));
            }
            "code" => {
                if toks.len() < 2 {
                    return Err(lx.err(kw, "expected `code forward|inverse ...`"));
                }
                match toks[1].text {
                    "forward" => code_line(&lx, toks, &mut fwd, s1, s2)?,
                    "inverse" => code_line(&lx, toks, &mut inv, s2, s1)?,
                    _ => return Err(lx.err(&toks[1], "expected `forward` or `inverse`")),
                }
            }
            "kfun" | "lfun" => {
                lx.arity(toks, 4)?;
                let which = usize::from(kw.text == "lfun");
                let side = match toks[1].text {
                    "1" => 0,
                    "2" => 1,
                    _ => return Err(lx.err(&toks[1], "side must be 1 or 2")),
                };
                let val = lx.int(&toks[3])?;
                let val = u64::try_from(val).map_err(|_| lx.err(&toks[3], "transfer functions take values in ℤ₊"))?;
                if toks[2].text == "*" {
                    if !tables[which][side].is_empty() || consts_fn[which][side].is_some() {
                        return Err(lx.err(&toks[2], "constant given after other values"));
                    }
                    consts_fn[which][side] = Some(val);
                    continue;
                }
                if consts_fn[which][side].is_some() {
                    return Err(lx.err(&toks[2], "table value given after a constant"));
                }
                let s = if side == 0 { s1 } else { s2 };
                let (w, v) = cyl(&lx, &toks[2], s)?;
                match levels[which][side] {
                    Some((lw, ll)) if (lw, ll) != (w.len(), v.level) => {
                        return Err(lx.err(&toks[2], "all keys of a function share window and level"))
                    }
                    _ => levels[which][side] = Some((w.len(), v.level)),
                }
                if w.is_empty() {
                    return Err(lx.err(&toks[2], "use `*` for a constant function"));
                }
                if tables[which][side].insert((w, v.index), val).is_some() {
                    return Err(lx.err(&toks[2], "duplicate key"));
                }
            }
            "const" => {
                lx.arity(toks, 3)?;
                let i = match toks[1].text {
                    "K1" => 0,
                    "K2" => 1,
                    _ => return Err(lx.err(&toks[1], "expected K1 or K2")),
                };
                let v = lx.int(&toks[2])?;
                consts[i] = Some(u64::try_from(v).map_err(|_| lx.err(&toks[2], "constants are non-negative"))?);
            }
            "inj-window" => {
                lx.arity(toks, 2)?;
                inj_window = Some(lx.num(&toks[1])?);
            }
            "recode-bound" => {
                lx.arity(toks, 2)?;
                recode_bound = Some(lx.num(&toks[1])?);
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
    let forward = finish(fwd).ok_or_else(|| lx.eof("no `code forward` lines"))?;
    if let Some((w, tok)) = window {
        if w != forward.window {
            return Err(lx.err(tok, format!("window {w} but forward keys have length {}", forward.window)));
        }
    }
    let inverse = finish(inv);
    let mut k: [Option<CylinderFunction>; 2] = [None, None];
    let mut l: [Option<CylinderFunction>; 2] = [None, None];
    for which in 0..2 {
        for side in 0..2 {
            let f = if let Some(c) = consts_fn[which][side] {
                Some(CylinderFunction::Constant(c))
            } else {
                levels[which][side].map(|(window, level)| CylinderFunction::Table {
                    window,
                    level,
                    values: std::mem::take(&mut tables[which][side]),
                })
            };
            if which == 0 {
                k[side] = f;
            } else {
                l[side] = f;
            }
        }
    }
    if let (Some(l), Some(b)) = (inj_window, recode_bound) {
        if l > b {
            return Err(lx.eof(format!("inj-window {l} exceeds recode-bound {b}")));
        }
    }
    Ok(Certificate {
        name: head[1].text.to_string(),
        window: forward.window,
        forward,
        inverse,
        k,
        l,
        consts,
        inj_window,
        recode_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    const IDENTITY: &str = "certificate id
window 1
code forward a,v(1,1) -> a v(1,1)
code forward b,v(1,1) -> b v(1,1)
code inverse a,v(1,1) -> a v(1,1)
code inverse b,v(1,1) -> b v(1,1)
kfun 1 * 0
lfun 1 * 1
kfun 2 * 0
lfun 2 a,v(1,1) 1
lfun 2 b,v(1,1) 1
const K1 0
const K2 0
end
";

    #[test]
    fn parses_and_round_trips() {
        let s = examples::full2(3);
        let c = parse_certificate("id.cert", IDENTITY, &s, &s).unwrap();
        assert_eq!(c.window, 1);
        assert_eq!(c.forward.map.len(), 2);
        assert_eq!(c.l[1].as_ref().unwrap().window(), 1);
        assert_eq!(c.constants().unwrap(), (0, 0));
        let again = parse_certificate("x", &c.to_text(&s, &s), &s, &s).unwrap();
        assert_eq!(again, c);
        assert!(c.forward.missing_keys(&s).unwrap().is_empty());
    }

    #[test]
    fn errors_are_located() {
        let s = examples::full2(3);
        let bad = IDENTITY.replace("b,v(1,1) -> b v(1,1)\ncode inverse a", "b,v(1,1) -> c v(1,1)\ncode inverse a");
        match parse_certificate("id.cert", &bad, &s, &s).unwrap_err() {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (4, 26)),
            e => panic!("{e}"),
        }
        let bad = IDENTITY.replace("kfun 1 * 0", "kfun 1 * -1");
        assert!(matches!(parse_certificate("c", &bad, &s, &s), Err(Error::Parse { line: 7, col: 10, .. })));
        let bad = IDENTITY.replace("end\n", "");
        assert!(matches!(parse_certificate("c", &bad, &s, &s), Err(Error::Parse { .. })));
    }

    #[test]
    fn shift_precomposition() {
        let s = examples::full2(4);
        let c = parse_certificate("id.cert", IDENTITY, &s, &s).unwrap();
        let sh = c.forward.precompose_shift(&s, 1).unwrap();
        assert_eq!(sh.window, 2);
        assert_eq!(sh.map.len(), 4);
        let pm = PointModel::new(&s, 2).unwrap();
        for p in pm.points(4) {
            let a = sh.apply(&pm, &p).unwrap();
            let b = c.forward.apply(&pm, &p.shift(1)).unwrap();
            assert_eq!(a.labels, b.labels);
        }
    }
}
