//! Words, cylinders and the finite-depth tests for condition (I) and
//! essential freeness.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::system::{Alphabet, Lgs, Sym, VertexRef, Word};

/// The cylinder `U(word, v_i^l)`, with `|word| ≤ l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    pub word: Word,
    pub vertex: VertexRef,
}

impl Cylinder {
    pub fn new(word: Word, vertex: VertexRef) -> Self {
        Cylinder { word, vertex }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        CylDisplay(self, alphabet)
    }

    pub fn is_admissible(&self, s: &Lgs) -> bool {
        s.admissible(&self.word, self.vertex.level, self.vertex.index)
    }
}

struct CylDisplay<'a>(&'a Cylinder, &'a Alphabet);

impl fmt::Display for CylDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.1.format_word(&self.0.word), self.0.vertex)
    }
}

/// Length-`k` words labeling paths that start at level 0, sorted.
pub fn words(s: &Lgs, k: usize) -> Result<Vec<Word>> {
    words_from_level(s, 0, k)
}

/// Length-`k` words labeling paths that start at level `start`.
pub fn words_from_level(s: &Lgs, start: usize, k: usize) -> Result<Vec<Word>> {
    if start + k > s.depth() {
        return Err(Error::DepthBudget { needed: start + k, depth: s.depth() });
    }
    let mut frontier: BTreeSet<(Word, usize)> = (0..s.size(start)).map(|v| (Vec::new(), v)).collect();
    for l in start..start + k {
        let mut next = BTreeSet::new();
        for (w, v) in &frontier {
            for &(a, t) in s.out_edges(l, *v) {
                let mut w2 = w.clone();
                w2.push(a);
                next.insert((w2, t));
            }
        }
        frontier = next;
    }
    let set: BTreeSet<Word> = frontier.into_iter().map(|(w, _)| w).collect();
    Ok(set.into_iter().collect())
}

/// Every admissible `(μ, v_i^l)` with `|μ| = k`, sorted by vertex then word.
pub fn cylinders(s: &Lgs, k: usize, l: usize) -> Result<Vec<Cylinder>> {
    if k > l {
        return Err(Error::Invalid(format!("cylinder word length {k} exceeds level {l}")));
    }
    if l > s.depth() {
        return Err(Error::DepthBudget { needed: l, depth: s.depth() });
    }
    let mut out = Vec::new();
    for v in 0..s.size(l) {
        for w in words_into(s, l, v, k) {
            out.push(Cylinder::new(w, VertexRef::new(l, v)));
        }
    }
    Ok(out)
}

/// Words of length `k` labeling paths that end at `v_v^l`, sorted.
pub fn words_into(s: &Lgs, l: usize, v: usize, k: usize) -> Vec<Word> {
    let mut frontier: BTreeSet<(Word, usize)> = BTreeSet::from([(Vec::new(), v)]);
    for step in 0..k {
        let lvl = l - step;
        let mut next = BTreeSet::new();
        for (w, x) in &frontier {
            for &(a, src) in s.in_edges(lvl, *x) {
                let mut w2 = Vec::with_capacity(w.len() + 1);
                w2.push(a);
                w2.extend_from_slice(w);
                next.insert((w2, src));
            }
        }
        frontier = next;
    }
    let set: BTreeSet<Word> = frontier.into_iter().map(|(w, _)| w).collect();
    set.into_iter().collect()
}

/// Label sequences of length-`d` paths leaving `v`.
pub fn gamma_plus(s: &Lgs, v: VertexRef, d: usize) -> Result<Vec<Word>> {
    s.check_vertex(v)?;
    if v.level + d > s.depth() {
        return Err(Error::DepthBudget { needed: v.level + d, depth: s.depth() });
    }
    let mut frontier: BTreeSet<(Word, usize)> = BTreeSet::from([(Vec::new(), v.index)]);
    for l in v.level..v.level + d {
        let mut next = BTreeSet::new();
        for (w, x) in &frontier {
            for &(a, t) in s.out_edges(l, *x) {
                let mut w2 = w.clone();
                w2.push(a);
                next.insert((w2, t));
            }
        }
        frontier = next;
    }
    let set: BTreeSet<Word> = frontier.into_iter().map(|(w, _)| w).collect();
    Ok(set.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondIVerdict {
    Pass,
    FailAtDepth,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionIReport {
    pub depth: usize,
    /// Vertices with `level + depth ≤ D`, in order.
    pub verdicts: Vec<(VertexRef, CondIVerdict, usize)>,
}

impl ConditionIReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|(_, v, _)| *v == CondIVerdict::Pass)
    }
}

/// A vertex passes when at least two distinct length-`d` label sequences
/// leave it. Only vertices with `level + d ≤ D` are evaluated.
pub fn check_condition_i(s: &Lgs, d: usize) -> Result<ConditionIReport> {
    if d == 0 {
        return Err(Error::Invalid("condition (I) depth must be at least 1".into()));
    }
    if d > s.depth() {
        return Err(Error::DepthBudget { needed: d, depth: s.depth() });
    }
    let mut verdicts = Vec::new();
    for l in 0..=s.depth() - d {
        for i in 0..s.size(l) {
            let v = VertexRef::new(l, i);
            let n = gamma_plus(s, v, d)?.len();
            let verdict = if n >= 2 { CondIVerdict::Pass } else { CondIVerdict::FailAtDepth };
            verdicts.push((v, verdict, n));
        }
    }
    Ok(ConditionIReport { depth: d, verdicts })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreenessVerdict {
    /// An extension of the cylinder's word breaking `σ^m x = σ^n x`.
    Witness(Word),
    /// Every extension inside the truncation satisfies `σ^m x = σ^n x`.
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssFreeReport {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub verdicts: Vec<(Cylinder, FreenessVerdict)>,
}

impl EssFreeReport {
    /// Every depth-`d` cylinder has a witness.
    pub fn certified(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| matches!(v, FreenessVerdict::Witness(_)))
    }
}

fn breaks_period(x: &[Sym], m: usize, n: usize) -> bool {
    (1..=x.len().saturating_sub(m)).any(|i| x[m + i - 1] != x[n + i - 1])
}

/// For each cylinder `(μ, v^d)` with `|μ| = d`, searches extensions of `μ`
/// along paths leaving `v` (shortest first, then lexicographic) for a word
/// with `x_{m+i} ≠ x_{n+i}` inside the truncation.
pub fn check_essential_freeness(s: &Lgs, m: usize, n: usize, d: usize) -> Result<EssFreeReport> {
    if m <= n {
        return Err(Error::Invalid(format!("need m > n, got m={m} n={n}")));
    }
    if d + m > s.depth() {
        return Err(Error::DepthBudget { needed: d + m, depth: s.depth() });
    }
    let mut verdicts = Vec::new();
    for cyl in cylinders(s, d, d)? {
        let mut verdict = FreenessVerdict::Periodic;
        'search: for ext in 1..=s.depth() - d {
            for rho in gamma_plus(s, cyl.vertex, ext)? {
                let mut x = cyl.word.clone();
                x.extend_from_slice(&rho);
                if breaks_period(&x, m, n) {
                    verdict = FreenessVerdict::Witness(rho);
                    break 'search;
                }
            }
        }
        verdicts.push((cyl, verdict));
    }
    Ok(EssFreeReport { m, n, d, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use proptest::prelude::*;

    fn fmt(s: &Lgs, ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| s.alphabet().format_word(w)).collect()
    }

    #[test]
    fn golden_mean_two_blocks() {
        let g = examples::golden(4);
        assert_eq!(fmt(&g, &words(&g, 2).unwrap()), ["αα", "αβ", "βγ", "γα", "γβ"]);
    }

    #[test]
    fn even_shift_three_blocks() {
        let e = examples::even(5);
        let w = fmt(&e, &words(&e, 3).unwrap());
        assert_eq!(w.len(), 7);
        assert!(!w.contains(&"bab".to_string()));
    }

    #[test]
    fn golden_single_edge_cylinders() {
        let g = examples::golden(3);
        let c: Vec<String> = cylinders(&g, 1, 1).unwrap().iter().map(|c| c.display(g.alphabet()).to_string()).collect();
        assert_eq!(c, ["α,v(1,1)", "γ,v(1,1)", "β,v(1,2)"]);
    }

    #[test]
    fn gamma_plus_examples() {
        let g = examples::golden(4);
        assert_eq!(fmt(&g, &gamma_plus(&g, VertexRef::new(0, 1), 2).unwrap()), ["γα", "γβ"]);
        let l = examples::single_loop(4);
        assert_eq!(gamma_plus(&l, VertexRef::new(1, 0), 3).unwrap().len(), 1);
        assert!(gamma_plus(&l, VertexRef::new(2, 0), 3).is_err());
    }

    #[test]
    fn condition_i_examples() {
        assert!(check_condition_i(&examples::full2(3), 1).unwrap().all_pass());
        let l = check_condition_i(&examples::single_loop(4), 2).unwrap();
        assert!(l.verdicts.iter().all(|(_, v, _)| *v == CondIVerdict::FailAtDepth));
        assert!(check_condition_i(&examples::even(4), 2).unwrap().all_pass());
    }

    #[test]
    fn essential_freeness_examples() {
        let f = check_essential_freeness(&examples::full2(3), 1, 0, 2).unwrap();
        assert!(f.certified());
        assert_eq!(f.verdicts.len(), 4);
        assert!(!check_essential_freeness(&examples::single_loop(5), 1, 0, 2).unwrap().certified());
        assert!(check_essential_freeness(&examples::golden(4), 2, 0, 2).unwrap().certified());
        assert!(check_essential_freeness(&examples::golden(3), 2, 0, 2).is_err());
    }

    proptest! {
        #[test]
        fn prefixes_are_words(seed in any::<u64>(), k in 0usize..4) {
            let s = crate::gen::random_lgs(seed, 5);
            let short: BTreeSet<Word> = words(&s, k).unwrap().into_iter().collect();
            for w in words(&s, k + 1).unwrap() {
                prop_assert!(short.contains(&w[..k]));
            }
        }

        #[test]
        fn words_do_not_depend_on_start_level(seed in any::<u64>(), start in 0usize..3, k in 0usize..3) {
            let s = crate::gen::random_lgs(seed, 5);
            prop_assert_eq!(words(&s, k).unwrap(), words_from_level(&s, start, k).unwrap());
        }

        #[test]
        fn truncation_keeps_words(seed in any::<u64>(), d in 1usize..5) {
            let s = crate::gen::random_lgs(seed, 5);
            let t = s.truncate(d).unwrap();
            for k in 0..=d {
                prop_assert_eq!(words(&s, k).unwrap(), words(&t, k).unwrap());
            }
        }

        #[test]
        fn condition_i_is_monotone(seed in any::<u64>(), d in 1usize..4) {
            let s = crate::gen::random_lgs(seed, 6);
            let a = check_condition_i(&s, d).unwrap();
            let b = check_condition_i(&s, d + 1).unwrap();
            for (v, verdict, _) in &b.verdicts {
                let before = a.verdicts.iter().find(|(u, _, _)| u == v).unwrap().1;
                if before == CondIVerdict::Pass {
                    prop_assert_eq!(*verdict, CondIVerdict::Pass);
                }
            }
        }

        #[test]
        fn cylinder_words_are_exactly_the_language(seed in any::<u64>(), l in 1usize..4) {
            let s = crate::gen::random_lgs(seed, 4);
            for k in 0..=l {
                let from_cyl: BTreeSet<Word> = cylinders(&s, k, l).unwrap().into_iter().map(|c| c.word).collect();
                let lang: BTreeSet<Word> = words(&s, k).unwrap().into_iter().collect();
                prop_assert_eq!(from_cyl, lang);
            }
        }
    }
}
