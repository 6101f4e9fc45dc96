//! Symbolic matrix systems `(𝓜, I)`.
//!
//! Entries of `𝓜_{l,l+1}` are multisets of symbols (formal sums), so that
//! systems that are not left-resolving stay representable.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::system::{Alphabet, Edge, Lgs, Sym};
use crate::text::Lines;

/// Entry `(i, j)` is a sorted multiset of symbols; empty means 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Vec<Sym>>>,
}

impl SymbolicMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SymbolicMatrix { rows, cols, entries: vec![vec![Vec::new(); cols]; rows] }
    }

    /// Product with a 0/1 matrix on the right.
    pub fn mul_right(&self, z: &ZeroOneMatrix) -> Result<SymbolicMatrix> {
        if self.cols != z.rows {
            return Err(Error::Invalid(format!("dimension mismatch {}x{} * {}x{}", self.rows, self.cols, z.rows, z.cols)));
        }
        let mut out = SymbolicMatrix::zero(self.rows, z.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                for j in 0..z.cols {
                    if z.data[k][j] == 1 {
                        out.entries[i][j].extend_from_slice(&self.entries[i][k]);
                    }
                }
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Product with a 0/1 matrix on the left.
    pub fn mul_left(z: &ZeroOneMatrix, m: &SymbolicMatrix) -> Result<SymbolicMatrix> {
        if z.cols != m.rows {
            return Err(Error::Invalid(format!("dimension mismatch {}x{} * {}x{}", z.rows, z.cols, m.rows, m.cols)));
        }
        let mut out = SymbolicMatrix::zero(z.rows, m.cols);
        for i in 0..z.rows {
            for k in 0..z.cols {
                if z.data[i][k] == 1 {
                    for j in 0..m.cols {
                        out.entries[i][j].extend_from_slice(&m.entries[k][j]);
                    }
                }
            }
        }
        out.normalize();
        Ok(out)
    }

    fn normalize(&mut self) {
        for row in self.entries.iter_mut() {
            for e in row.iter_mut() {
                e.sort();
            }
        }
    }

    pub fn format_entry(&self, alphabet: &Alphabet, i: usize, j: usize) -> String {
        format_multiset(alphabet, &self.entries[i][j])
    }

    /// Scalar specialization: every symbol becomes 1.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        self.entries.iter().map(|r| r.iter().map(Vec::len).collect()).collect()
    }
}

pub fn format_multiset(alphabet: &Alphabet, e: &[Sym]) -> String {
    if e.is_empty() {
        "0".into()
    } else {
        e.iter().map(|&a| alphabet.name(a)).collect::<Vec<_>>().join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroOneMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<u8>>,
}

impl ZeroOneMatrix {
    /// Each column has exactly one 1.
    pub fn is_column_stochastic(&self) -> bool {
        (0..self.cols).all(|j| (0..self.rows).filter(|&i| self.data[i][j] == 1).count() == 1)
    }

    pub fn swap() -> Self {
        ZeroOneMatrix { rows: 2, cols: 2, data: vec![vec![0, 1], vec![1, 0]] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sms {
    pub name: String,
    pub alphabet: Alphabet,
    /// `(𝓜_{l,l+1}, I_{l,l+1})` for `0 ≤ l < D`.
    pub levels: Vec<(SymbolicMatrix, ZeroOneMatrix)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelCheck {
    pub level: usize,
    /// First mismatching entry `(i, j)` (0-based) with both products' entries.
    pub mismatch: Option<(usize, usize, Vec<Sym>, Vec<Sym>)>,
}

impl LevelCheck {
    pub fn ok(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl Sms {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn from_lgs(s: &Lgs) -> Sms {
        let mut levels = Vec::new();
        for l in 0..s.depth() {
            let mut m = SymbolicMatrix::zero(s.size(l), s.size(l + 1));
            for e in s.edges(l) {
                m.entries[e.src][e.dst].push(e.label);
            }
            m.normalize();
            let mut z = ZeroOneMatrix { rows: s.size(l), cols: s.size(l + 1), data: vec![vec![0; s.size(l + 1)]; s.size(l)] };
            for (j, &i) in s.iota_map(l).iter().enumerate() {
                z.data[i][j] = 1;
            }
            levels.push((m, z));
        }
        Sms { name: s.name().to_string(), alphabet: s.alphabet().clone(), levels }
    }

    fn check_dims(&self) -> Result<()> {
        for (l, (m, z)) in self.levels.iter().enumerate() {
            if m.rows != z.rows || m.cols != z.cols {
                return Err(Error::Invalid(format!("level {l}: 𝓜 is {}x{} but I is {}x{}", m.rows, m.cols, z.rows, z.cols)));
            }
            if let Some((m2, _)) = self.levels.get(l + 1) {
                if m.cols != m2.rows {
                    return Err(Error::Invalid(format!("level {l}: {} columns do not chain into {} rows", m.cols, m2.rows)));
                }
            }
        }
        Ok(())
    }

    /// Compares `𝓜_{l,l+1} I_{l+1,l+2}` with `I_{l,l+1} 𝓜_{l+1,l+2}` entrywise
    /// as multisets, for `0 ≤ l < D-1`.
    pub fn verify_compatibility(&self) -> Result<Vec<LevelCheck>> {
        self.check_dims()?;
        let mut out = Vec::new();
        for l in 0..self.depth().saturating_sub(1) {
            let (m0, i0) = &self.levels[l];
            let (m1, i1) = &self.levels[l + 1];
            let lhs = m0.mul_right(i1)?;
            let rhs = SymbolicMatrix::mul_left(i0, m1)?;
            let mut mismatch = None;
            'scan: for i in 0..lhs.rows {
                for j in 0..lhs.cols {
                    if lhs.entries[i][j] != rhs.entries[i][j] {
                        mismatch = Some((i, j, lhs.entries[i][j].clone(), rhs.entries[i][j].clone()));
                        break 'scan;
                    }
                }
            }
            out.push(LevelCheck { level: l, mismatch });
        }
        Ok(out)
    }

    pub fn to_lgs(&self) -> Result<Lgs> {
        self.check_dims()?;
        if self.levels.is_empty() {
            return Err(Error::Invalid("empty symbolic matrix system".into()));
        }
        for (l, (_, z)) in self.levels.iter().enumerate() {
            if !z.is_column_stochastic() {
                return Err(Error::Invalid(format!("I_{{{l},{}}} is not column-stochastic", l + 1)));
            }
        }
        for c in self.verify_compatibility()? {
            if let Some((i, j, a, b)) = c.mismatch {
                return Err(Error::Compatibility {
                    level: c.level,
                    detail: format!(
                        "entry ({},{}): {} vs {}",
                        i + 1,
                        j + 1,
                        format_multiset(&self.alphabet, &a),
                        format_multiset(&self.alphabet, &b)
                    ),
                });
            }
        }
        let mut sizes = vec![self.levels[0].0.rows];
        let mut edges = Vec::new();
        let mut iota = Vec::new();
        for (l, (m, z)) in self.levels.iter().enumerate() {
            sizes.push(m.cols);
            for i in 0..m.rows {
                for j in 0..m.cols {
                    for &a in &m.entries[i][j] {
                        edges.push(Edge { level: l, src: i, label: a, dst: j });
                    }
                }
            }
            iota.push((0..z.cols).map(|j| (0..z.rows).find(|&i| z.data[i][j] == 1).unwrap()).collect());
        }
        let s = Lgs::new(self.name.clone(), self.alphabet.clone(), sizes, edges, iota)?;
        let report = s.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::Invalid(format!("{} violated at {}: {}", v.rule, v.location, v.detail)));
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "sms {}", self.name).unwrap();
        writeln!(out, "alphabet {}", self.alphabet.names().join(" ")).unwrap();
        writeln!(out, "depth {}", self.depth()).unwrap();
        for (l, (m, z)) in self.levels.iter().enumerate() {
            writeln!(out, "matrix {} {} {}", l, m.rows, m.cols).unwrap();
            for i in 0..m.rows {
                let row: Vec<String> = (0..m.cols).map(|j| m.format_entry(&self.alphabet, i, j)).collect();
                writeln!(out, "row {}", row.join(" ")).unwrap();
            }
            writeln!(out, "iota-matrix {} {} {}", l, z.rows, z.cols).unwrap();
            for r in &z.data {
                let row: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                writeln!(out, "row {}", row.join(" ")).unwrap();
            }
        }
        out.push_str("end\n");
        out
    }

    /// Reads the format written by [`Sms::to_text`].
    pub fn parse(source: &str, text: &str) -> Result<Sms> {
        let lx = Lines::new(source, text);
        let mut it = lx.lines.iter().peekable();
        let head = it.next().ok_or_else(|| lx.eof("empty input, expected `sms <name>`"))?;
        if head[0].text != "sms" {
            return Err(lx.err(&head[0], "expected `sms <name>`"));
        }
        lx.arity(head, 2)?;
        let al = it.next().ok_or_else(|| lx.eof("expected `alphabet`"))?;
        if al[0].text != "alphabet" || al.len() < 2 {
            return Err(lx.err(&al[0], "expected `alphabet <syms>`"));
        }
        let alphabet = Alphabet::new(al[1..].iter().map(|t| t.text)).map_err(|e| lx.err(&al[1], e.to_string()))?;
        let dl = it.next().ok_or_else(|| lx.eof("expected `depth`"))?;
        if dl[0].text != "depth" {
            return Err(lx.err(&dl[0], "expected `depth <D>`"));
        }
        lx.arity(dl, 2)?;
        let depth = lx.num(&dl[1])?;
        let mut levels = Vec::new();
        for l in 0..depth {
            let h = it.next().ok_or_else(|| lx.eof(format!("expected `matrix {l} ...`")))?;
            if h[0].text != "matrix" {
                return Err(lx.err(&h[0], format!("expected `matrix {l} <rows> <cols>`")));
            }
            lx.arity(h, 4)?;
            if lx.num(&h[1])? != l {
                return Err(lx.err(&h[1], format!("expected level {l}")));
            }
            let (rows, cols) = (lx.num(&h[2])?, lx.num(&h[3])?);
            let mut m = SymbolicMatrix::zero(rows, cols);
            for i in 0..rows {
                let r = it.next().ok_or_else(|| lx.eof("expected `row`"))?;
                if r[0].text != "row" {
                    return Err(lx.err(&r[0], "expected `row`"));
                }
                lx.arity(r, cols + 1)?;
                for j in 0..cols {
                    let t = &r[j + 1];
                    if t.text != "0" {
                        for part in t.text.split('+') {
                            let a = alphabet.lookup(part).ok_or_else(|| lx.err(t, format!("unknown symbol {part:?}")))?;
                            m.entries[i][j].push(a);
                        }
                    }
                }
            }
            m.normalize();
            let h = it.next().ok_or_else(|| lx.eof(format!("expected `iota-matrix {l} ...`")))?;
            if h[0].text != "iota-matrix" {
                return Err(lx.err(&h[0], format!("expected `iota-matrix {l} <rows> <cols>`")));
            }
            lx.arity(h, 4)?;
            if lx.num(&h[1])? != l {
                return Err(lx.err(&h[1], format!("expected level {l}")));
            }
            let (zr, zc) = (lx.num(&h[2])?, lx.num(&h[3])?);
            let mut data = vec![vec![0u8; zc]; zr];
            for row in data.iter_mut() {
                let r = it.next().ok_or_else(|| lx.eof("expected `row`"))?;
                if r[0].text != "row" {
                    return Err(lx.err(&r[0], "expected `row`"));
                }
                lx.arity(r, zc + 1)?;
                for (j, x) in row.iter_mut().enumerate() {
                    *x = match r[j + 1].text {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(lx.err(&r[j + 1], "expected 0 or 1")),
                    };
                }
            }
            levels.push((m, ZeroOneMatrix { rows: zr, cols: zc, data }));
        }
        let end = it.next().ok_or_else(|| lx.eof("missing `end`"))?;
        if end[0].text != "end" {
            return Err(lx.err(&end[0], "expected `end`"));
        }
        if let Some(extra) = it.next() {
            return Err(lx.err(&extra[0], "content after `end`"));
        }
        Ok(Sms { name: head[1].text.into(), alphabet, levels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use proptest::prelude::*;

    fn entry(s: &Sms, l: usize, i: usize, j: usize) -> String {
        s.levels[l].0.format_entry(&s.alphabet, i, j)
    }

    #[test]
    fn example_matrices() {
        let f = Sms::from_lgs(&examples::full2(3));
        assert_eq!(entry(&f, 1, 0, 0), "a+b");
        let g = Sms::from_lgs(&examples::golden(3));
        assert_eq!([entry(&g, 0, 0, 0), entry(&g, 0, 0, 1), entry(&g, 0, 1, 0), entry(&g, 0, 1, 1)], ["α", "β", "γ", "0"]);
        let e = Sms::from_lgs(&examples::even(3));
        assert_eq!([entry(&e, 2, 0, 0), entry(&e, 2, 0, 1), entry(&e, 2, 1, 0), entry(&e, 2, 1, 1)], ["b", "a", "a", "0"]);
        for s in [f, g, e] {
            assert!(s.verify_compatibility().unwrap().iter().all(LevelCheck::ok));
        }
    }

    #[test]
    fn swapped_iota_is_located() {
        let mut g = Sms::from_lgs(&examples::golden(4));
        g.levels[1].1 = ZeroOneMatrix::swap();
        let checks = g.verify_compatibility().unwrap();
        let first = checks.iter().find(|c| !c.ok()).unwrap();
        assert_eq!(first.level, 0);
        let (i, j, _, _) = first.mismatch.clone().unwrap();
        assert_eq!((i, j), (0, 0));
        assert!(matches!(g.to_lgs(), Err(Error::Compatibility { level: 0, .. })));
    }

    #[test]
    fn empty_column_is_rejected() {
        let mut g = Sms::from_lgs(&examples::golden(1));
        for row in g.levels[0].0.entries.iter_mut() {
            row[1].clear();
        }
        assert!(g.to_lgs().is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = Sms::from_lgs(&examples::golden2(3));
        assert_eq!(Sms::parse("m", &g.to_text()).unwrap(), g);
    }

    proptest! {
        #[test]
        fn round_trips(seed in any::<u64>()) {
            let s = crate::gen::random_lgs(seed, 4);
            let m = Sms::from_lgs(&s);
            prop_assert_eq!(m.to_lgs().unwrap(), s);
            prop_assert_eq!(Sms::from_lgs(&m.to_lgs().unwrap()), m.clone());
            prop_assert_eq!(Sms::parse("m", &m.to_text()).unwrap(), m);
        }

        #[test]
        fn scalar_specialization_matches_transition_matrices(seed in any::<u64>()) {
            let s = crate::gen::random_lgs(seed, 4);
            let m = Sms::from_lgs(&s);
            for l in 0..s.depth() - 1 {
                let t0 = s.transition_matrices(l).unwrap();
                let t1 = s.transition_matrices(l + 1).unwrap();
                let a0: Vec<Vec<usize>> = (0..s.size(l)).map(|i| (0..s.size(l + 1)).map(|j| (0..s.alphabet().len()).map(|a| t0.a[i][a][j] as usize).sum()).collect()).collect();
                let a1: Vec<Vec<usize>> = (0..s.size(l + 1)).map(|i| (0..s.size(l + 2)).map(|j| (0..s.alphabet().len()).map(|a| t1.a[i][a][j] as usize).sum()).collect()).collect();
                prop_assert_eq!(&m.levels[l].0.counts(), &a0);
                for i in 0..s.size(l) {
                    for j in 0..s.size(l + 2) {
                        let lhs: usize = (0..s.size(l + 1)).map(|k| a0[i][k] * t1.i[k][j] as usize).sum();
                        let rhs: usize = (0..s.size(l + 1)).map(|k| t0.i[i][k] as usize * a1[k][j]).sum();
                        prop_assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }
}
