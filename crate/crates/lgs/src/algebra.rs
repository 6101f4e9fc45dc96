//! The *-algebra generated by partial isometries `S_α` and projections
//! `E_i^l` subject to the relations (𝔏), in exact normal form.
//!
//! Products are computed by rewriting generator words with
//!
//! * R1 `S_α* S_β = 0` for `α ≠ β`,
//! * R2 `S_α* S_α = Σ_j [α-edge into v_j^1] E_j^1`,
//! * R3 `E_i^l E_j^l = δ_ij E_i^l` (after raising to a common level),
//! * R4 `E_i^l = Σ_j I_{l,l+1}(i,j) E_j^{l+1}`,
//! * R5 `E_i^l S_α = S_α Σ_j A_{l,l+1}(i,α,j) E_j^{l+1}` and its adjoint,
//!
//! until every term reads `S_μ E_i^l S_ν*` with `|μ|, |ν| ≤ l`. Terms are then
//! multiplied by `S_μ*S_μ` and `S_ν*S_ν`, which removes the ones that vanish.
//! Elements are stored in the fine form of [`crate::fine`], so equality and
//! zero tests are exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fine::{align, fine_form, fine_form_at, reshape, to_shape, Coef, FineForm, Shape};
use crate::groupoid::{BasicBisection, CocycleMode, SymbolWeights};
use crate::system::{Lgs, Sym, VertexRef, Word};

/// `S_μ E_i^l S_ν*`, the indicator of `U(μ, v_i^l, ν)`.
pub type Monomial = BasicBisection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    S(Sym),
    SStar(Sym),
    /// `E_i^l` as `(l, i)`, 0-based index.
    E(usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Element {
    form: FineForm,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn is_zero(&self) -> bool {
        self.form.is_zero()
    }

    pub fn form(&self) -> &FineForm {
        &self.form
    }

    pub fn terms(&self) -> Vec<(Monomial, Coef)> {
        self.form.cells().map(|(b, c)| (b.clone(), c.clone())).collect()
    }
}

#[derive(Clone, Debug)]
struct Partial {
    mu: Word,
    e: Option<(usize, usize)>,
    nu: Word,
}

/// Evaluation context: the system whose relations are used.
pub struct Algebra<'a> {
    s: &'a Lgs,
}

impl<'a> Algebra<'a> {
    /// Non-left-resolving systems are rejected: R2 relies on at most one
    /// `α`-edge into each vertex.
    pub fn new(s: &'a Lgs) -> Result<Self> {
        s.require_left_resolving()?;
        Ok(Algebra { s })
    }

    pub fn system(&self) -> &Lgs {
        self.s
    }

    fn budget(&self, level: usize) -> Result<()> {
        if level > self.s.depth() {
            Err(Error::DepthBudget { needed: level, depth: self.s.depth() })
        } else {
            Ok(())
        }
    }

    /// R5 (and its adjoint): the `E_j^{l+1}` with `A(i, α, j) = 1`.
    fn step(&self, (l, i): (usize, usize), a: Sym) -> Result<Vec<(usize, usize)>> {
        self.budget(l + 1)?;
        Ok(self.s.out_edges(l, i).iter().filter(|&&(b, _)| b == a).map(|&(_, j)| (l + 1, j)).collect())
    }

    /// `S_ν* E = Σ E' S_ν*`, moving `E` left through `S_{ν_1}*, …, S_{ν_k}*`.
    fn through(&self, e: (usize, usize), word: &[Sym]) -> Result<Vec<(usize, usize)>> {
        let mut cur = vec![e];
        for &a in word {
            let mut next = Vec::new();
            for c in cur {
                next.extend(self.step(c, a)?);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// R3 after R4: the product of two projections.
    fn meet(&self, (l, i): (usize, usize), (m, j): (usize, usize)) -> Option<(usize, usize)> {
        if l <= m {
            (self.s.project(m, j, l) == i).then_some((m, j))
        } else {
            (self.s.project(l, i, m) == j).then_some((l, i))
        }
    }

    fn meet_opt(&self, e: Option<(usize, usize)>, f: (usize, usize)) -> Option<(usize, usize)> {
        match e {
            None => Some(f),
            Some(e) => self.meet(e, f),
        }
    }

    /// R2.
    fn r2(&self, a: Sym) -> Result<Vec<(usize, usize)>> {
        self.budget(1)?;
        Ok((0..self.s.size(1)).filter(|&j| self.s.has_in_label(1, j, a)).map(|j| (1, j)).collect())
    }

    fn apply(&self, p: Partial, g: Gen) -> Result<Vec<Partial>> {
        let mut out = Vec::new();
        match g {
            Gen::SStar(a) => {
                let mut nu = vec![a];
                nu.extend_from_slice(&p.nu);
                out.push(Partial { nu, ..p });
            }
            Gen::S(a) => {
                if let Some((&first, rest)) = p.nu.split_first() {
                    if first != a {
                        return Ok(out);
                    }
                    for f in self.r2(a)? {
                        for f2 in self.through(f, rest)? {
                            if let Some(e) = self.meet_opt(p.e, f2) {
                                out.push(Partial { mu: p.mu.clone(), e: Some(e), nu: rest.to_vec() });
                            }
                        }
                    }
                } else {
                    let mut mu = p.mu.clone();
                    mu.push(a);
                    match p.e {
                        None => out.push(Partial { mu, e: None, nu: Vec::new() }),
                        Some(e) => {
                            for f in self.step(e, a)? {
                                out.push(Partial { mu: mu.clone(), e: Some(f), nu: Vec::new() });
                            }
                        }
                    }
                }
            }
            Gen::E(l, i) => {
                self.budget(l)?;
                if i >= self.s.size(l) {
                    return Err(Error::VertexOutOfRange { level: l, index: i + 1, size: self.s.size(l) });
                }
                for f in self.through((l, i), &p.nu)? {
                    if let Some(e) = self.meet_opt(p.e, f) {
                        out.push(Partial { mu: p.mu.clone(), e: Some(e), nu: p.nu.clone() });
                    }
                }
            }
        }
        Ok(out)
    }

    fn run(&self, start: Vec<Partial>, gens: &[Gen]) -> Result<Vec<Partial>> {
        let mut cur = start;
        for &g in gens {
            let mut next = Vec::new();
            for p in cur {
                next.extend(self.apply(p, g)?);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// `S_μ* S_μ` as a set of level-`|μ|` projections (`None` for `μ = ε`).
    fn source_projection(&self, mu: &[Sym]) -> Result<Option<BTreeSet<(usize, usize)>>> {
        if mu.is_empty() {
            return Ok(None);
        }
        let mut gens: Vec<Gen> = mu.iter().rev().map(|&a| Gen::SStar(a)).collect();
        gens.extend(mu.iter().map(|&a| Gen::S(a)));
        let parts = self.run(vec![Partial { mu: Vec::new(), e: None, nu: Vec::new() }], &gens)?;
        Ok(Some(parts.into_iter().filter_map(|p| p.e).collect()))
    }

    /// Brings a partial to monomials: inserts `1 = Σ_i E_i^0` if needed, raises
    /// to `max(|μ|, |ν|)`, and multiplies by the source projections of `μ`, `ν`.
    fn finish(&self, p: Partial) -> Result<Vec<Monomial>> {
        let starts: Vec<(usize, usize)> = match p.e {
            Some(e) => vec![e],
            None => (0..self.s.size(0)).map(|i| (0, i)).collect(),
        };
        let floor = p.mu.len().max(p.nu.len());
        let pm = self.source_projection(&p.mu)?;
        let pn = self.source_projection(&p.nu)?;
        let mut out = Vec::new();
        for (l, i) in starts {
            let top = l.max(floor);
            self.budget(top)?;
            for j in 0..self.s.size(top) {
                if self.s.project(top, j, l) != i {
                    continue;
                }
                let keep = |proj: &Option<BTreeSet<(usize, usize)>>| match proj {
                    None => true,
                    Some(set) => set.iter().any(|&f| self.meet((top, j), f).is_some()),
                };
                if keep(&pm) && keep(&pn) {
                    out.push(BasicBisection { mu: p.mu.clone(), vertex: VertexRef::new(top, j), nu: p.nu.clone() });
                }
            }
        }
        Ok(out)
    }

    fn collect(&self, terms: Vec<(Coef, Partial)>) -> Result<Element> {
        let mut flat = Vec::new();
        for (c, p) in terms {
            for m in self.finish(p)? {
                flat.push((m, c.clone()));
            }
        }
        Ok(Element { form: fine_form(self.s, &flat)? })
    }

    /// Evaluates a product of generators.
    pub fn word(&self, gens: &[Gen]) -> Result<Element> {
        let parts = self.run(vec![Partial { mu: Vec::new(), e: None, nu: Vec::new() }], gens)?;
        self.collect(parts.into_iter().map(|p| (Coef::one(), p)).collect())
    }

    pub fn one(&self) -> Result<Element> {
        self.word(&[])
    }

    pub fn s(&self, word: &[Sym]) -> Result<Element> {
        self.word(&word.iter().map(|&a| Gen::S(a)).collect::<Vec<_>>())
    }

    pub fn s_star(&self, word: &[Sym]) -> Result<Element> {
        self.word(&word.iter().rev().map(|&a| Gen::SStar(a)).collect::<Vec<_>>())
    }

    pub fn e(&self, v: VertexRef) -> Result<Element> {
        self.s.check_vertex(v)?;
        self.word(&[Gen::E(v.level, v.index)])
    }

    /// `S_μ E_i^l S_ν*`; zero when the bisection is empty.
    pub fn monomial(&self, m: &Monomial) -> Result<Element> {
        self.word(&monomial_gens(m))
    }

    pub fn scale(&self, a: &Element, c: &Coef) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        let mut form = a.form.clone();
        for (_, cells) in form.groups.values_mut() {
            for v in cells.values_mut() {
                *v *= c;
            }
        }
        Element { form }
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        let mut terms = a.terms();
        terms.extend(b.terms());
        let shapes = join_shapes(&a.form, &b.form);
        Ok(Element { form: fine_form_at(self.s, &terms, &shapes)? })
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        self.add(a, &self.scale(b, &-Coef::one()))
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        let mut terms = Vec::new();
        for (m1, c1) in a.form.cells() {
            let start = Partial { mu: m1.mu.clone(), e: Some((m1.vertex.level, m1.vertex.index)), nu: m1.nu.clone() };
            for (m2, c2) in b.form.cells() {
                for p in self.run(vec![start.clone()], &monomial_gens(m2))? {
                    terms.push((c1 * c2, p));
                }
            }
        }
        self.collect(terms)
    }

    pub fn adjoint(&self, a: &Element) -> Result<Element> {
        let terms: Vec<(Monomial, Coef)> = a.terms().into_iter().map(|(m, c)| (m.inverse(), c)).collect();
        Ok(Element { form: fine_form(self.s, &terms)? })
    }

    pub fn equal(&self, a: &Element, b: &Element) -> Result<bool> {
        let (x, y) = align(self.s, &a.form, &b.form)?;
        Ok(x == y)
    }

    /// `S_μ E_i^l S_ν*` written with projections at level `target`.
    pub fn raise_level(&self, m: &Monomial, target: usize) -> Result<Element> {
        if target < m.level() {
            return Err(Error::Invalid(format!("cannot lower level {} to {target}", m.level())));
        }
        self.budget(target)?;
        let cells = to_shape(self.s, m, Shape { k: m.nu.len(), level: target })?;
        let terms: Vec<(Monomial, Coef)> = cells.into_iter().map(|c| (c, Coef::one())).collect();
        let mut at = BTreeMap::new();
        at.insert(m.degree(), Shape { k: m.nu.len(), level: target });
        Ok(Element { form: fine_form_at(self.s, &terms, &at)? })
    }

    /// Reshapes so that all projections sit at level at least `level`.
    pub fn at_level(&self, a: &Element, level: usize) -> Result<Element> {
        let shapes = a.form.shapes().into_iter().map(|(d, sh)| (d, Shape { k: sh.k, level: sh.level.max(level) })).collect();
        Ok(Element { form: reshape(self.s, &a.form, &shapes)? })
    }

    pub fn degree(&self, w: &SymbolWeights, a: &Element) -> Degree {
        degree_of(a.form.cells().map(|(m, _)| w.word(&m.mu) - w.word(&m.nu)))
    }

    /// Greedy coarsening for display: merges complete families of raised or
    /// refined cells with equal coefficients back into their parent.
    pub fn coarsen(&self, a: &Element) -> Vec<(Monomial, Coef)> {
        let mut cur: BTreeMap<Monomial, Coef> = a.terms().into_iter().collect();
        loop {
            let mut changed = false;
            let keys: Vec<Monomial> = cur.keys().cloned().collect();
            for m in keys {
                if !cur.contains_key(&m) || m.level() == 0 {
                    continue;
                }
                let l = m.level() - 1;
                let mut parents = Vec::new();
                if l >= m.mu.len() && l >= m.nu.len() {
                    parents.push((
                        BasicBisection {
                            mu: m.mu.clone(),
                            vertex: VertexRef::new(l, self.s.iota(l, m.vertex.index)),
                            nu: m.nu.clone(),
                        },
                        true,
                    ));
                }
                if let (Some((&a1, mu)), Some((&a2, nu))) = (m.mu.split_last(), m.nu.split_last()) {
                    if a1 == a2 {
                        if let Some(src) = self.s.pred(m.vertex.level, m.vertex.index, a1) {
                            parents.push((
                                BasicBisection { mu: mu.to_vec(), vertex: VertexRef::new(l, src), nu: nu.to_vec() },
                                false,
                            ));
                        }
                    }
                }
                for (parent, by_raise) in parents {
                    if !parent.is_admissible(self.s) {
                        continue;
                    }
                    let kids = if by_raise {
                        crate::fine::raise(self.s, &parent)
                    } else {
                        crate::fine::refine(self.s, &parent)
                    };
                    let Ok(kids) = kids else { continue };
                    let c = cur[&m].clone();
                    if !kids.is_empty() && kids.iter().all(|k| cur.get(k) == Some(&c)) {
                        for k in &kids {
                            cur.remove(k);
                        }
                        *cur.entry(parent).or_insert_with(Coef::zero) += &c;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        cur.retain(|_, c| !c.is_zero());
        cur.into_iter().collect()
    }

    /// One `q * S(mu) E(l,i) S(nu)^*` line per term, or `0`.
    pub fn display(&self, a: &Element) -> String {
        let terms = self.coarsen(a);
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (m, c) in terms {
            writeln!(out, "{}", self.format_term(&m, &c)).unwrap();
        }
        out.pop();
        out
    }

    pub fn format_term(&self, m: &Monomial, c: &Coef) -> String {
        let al = self.s.alphabet();
        let mut t = format!("{c} *");
        if !m.mu.is_empty() {
            write!(t, " S({})", al.format_word(&m.mu)).unwrap();
        }
        write!(t, " E({},{})", m.vertex.level, m.vertex.index + 1).unwrap();
        if !m.nu.is_empty() {
            write!(t, " S({})^*", al.format_word(&m.nu)).unwrap();
        }
        t
    }
}

fn join_shapes(a: &FineForm, b: &FineForm) -> BTreeMap<i64, Shape> {
    crate::fine::join(&a.shapes(), &b.shapes())
}

pub fn monomial_gens(m: &Monomial) -> Vec<Gen> {
    let mut g: Vec<Gen> = m.mu.iter().map(|&a| Gen::S(a)).collect();
    g.push(Gen::E(m.vertex.level, m.vertex.index));
    g.extend(m.nu.iter().rev().map(|&a| Gen::SStar(a)));
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Homogeneous(i64),
    NotHomogeneous,
    /// The zero element is homogeneous of every degree.
    Zero,
}

fn degree_of(mut it: impl Iterator<Item = i64>) -> Degree {
    let Some(first) = it.next() else { return Degree::Zero };
    if it.all(|d| d == first) {
        Degree::Homogeneous(first)
    } else {
        Degree::NotHomogeneous
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub name: &'static str,
    pub instances: usize,
    /// First failing instance, if any.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationsReport {
    pub level: usize,
    pub checks: Vec<RelationCheck>,
}

impl RelationsReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.failure.is_none())
    }
}

/// Evaluates the five relations (𝔏) at level `l` as identities of normal forms.
pub fn verify_relations(s: &Lgs, l: usize) -> Result<RelationsReport> {
    if l + 1 > s.depth() {
        return Err(Error::DepthBudget { needed: l + 1, depth: s.depth() });
    }
    let alg = Algebra::new(s)?;
    let al = s.alphabet();
    let one = alg.one()?;
    let t = s.transition_matrices(l)?;
    let mut checks = Vec::new();

    let mut sum = Element::zero();
    for a in 0..al.len() {
        sum = alg.add(&sum, &alg.word(&[Gen::S(a), Gen::SStar(a)])?)?;
    }
    checks.push(RelationCheck {
        name: "range-sum",
        instances: 1,
        failure: (!alg.equal(&sum, &one)?).then(|| "Σ_β S_β S_β* ≠ 1".to_string()),
    });

    let mut sum = Element::zero();
    for i in 0..s.size(l) {
        sum = alg.add(&sum, &alg.word(&[Gen::E(l, i)])?)?;
    }
    checks.push(RelationCheck {
        name: "partition-of-unity",
        instances: 1,
        failure: (!alg.equal(&sum, &one)?).then(|| format!("Σ_i E_i^{l} ≠ 1")),
    });

    let mut failure = None;
    let mut n = 0;
    for a in 0..al.len() {
        for i in 0..s.size(l) {
            n += 1;
            let x = alg.word(&[Gen::S(a), Gen::SStar(a), Gen::E(l, i)])?;
            let y = alg.word(&[Gen::E(l, i), Gen::S(a), Gen::SStar(a)])?;
            if failure.is_none() && !alg.equal(&x, &y)? {
                failure = Some(format!("α={} i={}", al.name(a), i + 1));
            }
        }
    }
    checks.push(RelationCheck { name: "range-commutes", instances: n, failure });

    let mut failure = None;
    let mut n = 0;
    for a in 0..al.len() {
        for i in 0..s.size(l) {
            n += 1;
            let x = alg.word(&[Gen::SStar(a), Gen::E(l, i), Gen::S(a)])?;
            let mut y = Element::zero();
            for j in 0..s.size(l + 1) {
                if t.a[i][a][j] == 1 {
                    y = alg.add(&y, &alg.word(&[Gen::E(l + 1, j)])?)?;
                }
            }
            if failure.is_none() && !alg.equal(&x, &y)? {
                failure = Some(format!("α={} i={}", al.name(a), i + 1));
            }
        }
    }
    checks.push(RelationCheck { name: "transition", instances: n, failure });

    let mut failure = None;
    for i in 0..s.size(l) {
        let x = alg.word(&[Gen::E(l, i)])?;
        let mut y = Element::zero();
        for j in 0..s.size(l + 1) {
            if t.i[i][j] == 1 {
                y = alg.add(&y, &alg.word(&[Gen::E(l + 1, j)])?)?;
            }
        }
        if failure.is_none() && !alg.equal(&x, &y)? {
            failure = Some(format!("i={}", i + 1));
        }
    }
    checks.push(RelationCheck { name: "raise", instances: s.size(l), failure });

    Ok(RelationsReport { level: l, checks })
}

/// `Σ a_{pq} ⊗ θ_{p,q}` in `𝒪_𝔏 ⊗ 𝒦`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StableElement {
    pub parts: BTreeMap<(u64, u64), Element>,
}

impl StableElement {
    pub fn single(a: Element, p: u64, q: u64) -> Self {
        let mut parts = BTreeMap::new();
        if !a.is_zero() {
            parts.insert((p, q), a);
        }
        StableElement { parts }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }
}

/// `(a ⊗ θ_{pq})(b ⊗ θ_{rs}) = δ_{qr} ab ⊗ θ_{ps}`.
pub fn stable_multiply(alg: &Algebra, a: &StableElement, b: &StableElement) -> Result<StableElement> {
    let mut parts: BTreeMap<(u64, u64), Element> = BTreeMap::new();
    for (&(p, q), x) in &a.parts {
        for (&(r, t), y) in &b.parts {
            if q != r {
                continue;
            }
            let prod = alg.multiply(x, y)?;
            let cur = parts.remove(&(p, t)).unwrap_or_default();
            let sum = alg.add(&cur, &prod)?;
            if !sum.is_zero() {
                parts.insert((p, t), sum);
            }
        }
    }
    Ok(StableElement { parts })
}

/// Degree of `S_μ E S_ν* ⊗ θ_{pq}` under the lifted or canonical stable
/// grading, mirroring [`crate::groupoid::stable_cocycle`].
pub fn stable_degree(w: &SymbolWeights, a: &StableElement, mode: CocycleMode) -> Degree {
    degree_of(a.parts.iter().flat_map(|(&(p, q), x)| {
        x.form().cells().map(move |(m, _)| match mode {
            CocycleMode::Lift => w.word(&m.mu) - w.word(&m.nu),
            CocycleMode::CanonicalStable => (m.degree() + p as i64 - q as i64) + q as i64 - p as i64,
        })
    }))
}

/// Whether some coefficient is negative (used by display helpers).
pub fn has_negative(a: &Element) -> bool {
    a.form().cells().any(|(_, c)| c.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn sym(s: &Lgs, n: &str) -> Sym {
        s.alphabet().lookup(n).unwrap()
    }

    #[test]
    fn cuntz_relations_on_the_full_shift() {
        let s = examples::full2(4);
        let alg = Algebra::new(&s).unwrap();
        let (a, b) = (sym(&s, "a"), sym(&s, "b"));
        let x = alg.word(&[Gen::S(a), Gen::E(1, 0), Gen::SStar(a)]).unwrap();
        let y = alg.word(&[Gen::S(b), Gen::E(1, 0), Gen::SStar(b)]).unwrap();
        assert!(alg.multiply(&x, &y).unwrap().is_zero());
        let p = alg.multiply(&alg.s_star(&[a]).unwrap(), &alg.s(&[a]).unwrap()).unwrap();
        assert!(alg.equal(&p, &alg.one().unwrap()).unwrap());
        assert_eq!(alg.display(&alg.s_star(&[a]).unwrap()), "1 * E(1,1) S(a)^*");
    }

    #[test]
    fn golden_projection_moves_past_generator() {
        let s = examples::golden(4);
        let alg = Algebra::new(&s).unwrap();
        let al = sym(&s, "α");
        let x = alg.word(&[Gen::E(2, 0), Gen::S(al)]).unwrap();
        let y = alg.word(&[Gen::S(al), Gen::E(3, 0)]).unwrap();
        assert!(alg.equal(&x, &y).unwrap());
    }

    #[test]
    fn relations_hold_on_references() {
        for s in examples::reference_systems(5) {
            for l in 1..=4 {
                let r = verify_relations(&s, l).unwrap();
                assert!(r.ok(), "{} l={l}: {:?}", s.name(), r);
            }
        }
    }

    #[test]
    fn golden_transition_relation() {
        let s = examples::golden(3);
        let alg = Algebra::new(&s).unwrap();
        let (al, be) = (sym(&s, "α"), sym(&s, "β"));
        let x = alg.word(&[Gen::SStar(al), Gen::E(1, 0), Gen::S(al)]).unwrap();
        assert!(alg.equal(&x, &alg.e(VertexRef::new(2, 0)).unwrap()).unwrap());
        let y = alg.word(&[Gen::SStar(be), Gen::E(1, 0), Gen::S(be)]).unwrap();
        assert!(alg.equal(&y, &alg.e(VertexRef::new(2, 1)).unwrap()).unwrap());
    }

    #[test]
    fn raising_levels() {
        let s = examples::full2(3);
        let alg = Algebra::new(&s).unwrap();
        let m = BasicBisection::parse(&s, ",v(1,1),").unwrap();
        let r = alg.raise_level(&m, 3).unwrap();
        assert_eq!(r.terms().len(), 1);
        assert_eq!(r.terms()[0].0.vertex, VertexRef::new(3, 0));
        let again = alg.at_level(&r, 3).unwrap();
        assert_eq!(again, r);
        assert!(matches!(alg.raise_level(&m, 4), Err(Error::DepthBudget { needed: 4, .. })));
        let g = examples::golden(3);
        let galg = Algebra::new(&g).unwrap();
        let m = BasicBisection::parse(&g, ",v(1,1),").unwrap();
        assert_eq!(galg.raise_level(&m, 2).unwrap().terms()[0].0.vertex, VertexRef::new(2, 0));
    }

    #[test]
    fn degrees() {
        let s = examples::full2(3);
        let alg = Algebra::new(&s).unwrap();
        let w = SymbolWeights::ones(s.alphabet());
        let m = alg.monomial(&BasicBisection::parse(&s, "ab,v(2,1),a").unwrap()).unwrap();
        assert_eq!(alg.degree(&w, &m), Degree::Homogeneous(1));
        assert_eq!(alg.degree(&w, &alg.e(VertexRef::new(2, 0)).unwrap()), Degree::Homogeneous(0));
        let mixed = alg.add(&m, &alg.one().unwrap()).unwrap();
        assert_eq!(alg.degree(&w, &mixed), Degree::NotHomogeneous);
        assert_eq!(alg.degree(&w, &Element::zero()), Degree::Zero);
    }

    #[test]
    fn adjoint_of_monomial() {
        let s = examples::full2(3);
        let alg = Algebra::new(&s).unwrap();
        let m = alg.monomial(&BasicBisection::parse(&s, "ab,v(2,1),").unwrap()).unwrap();
        let n = alg.monomial(&BasicBisection::parse(&s, ",v(2,1),ab").unwrap()).unwrap();
        assert_eq!(alg.adjoint(&m).unwrap(), n);
        assert_eq!(alg.adjoint(&alg.adjoint(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let s = examples::full2(2);
        let alg = Algebra::new(&s).unwrap();
        let a = sym(&s, "a");
        let e = alg.word(&[Gen::E(2, 0), Gen::S(a)]).unwrap_err();
        assert!(matches!(e, Error::DepthBudget { needed: 3, depth: 2 }));
    }

    #[test]
    fn matrix_units() {
        let s = examples::full2(3);
        let alg = Algebra::new(&s).unwrap();
        let one = alg.one().unwrap();
        let x = StableElement::single(one.clone(), 0, 1);
        let y = StableElement::single(one.clone(), 1, 2);
        let z = stable_multiply(&alg, &x, &y).unwrap();
        assert_eq!(z.parts.keys().copied().collect::<Vec<_>>(), vec![(0, 2)]);
        assert!(alg.equal(&z.parts[&(0, 2)], &one).unwrap());
        let y2 = StableElement::single(one, 2, 1);
        assert!(stable_multiply(&alg, &x, &y2).unwrap().is_zero());
    }

    #[test]
    fn non_left_resolving_is_rejected() {
        let g = crate::text::parse_graph(
            "g",
            "graph g\nalphabet a b\nstate 1\nstate 2\nedge 1 a 1\nedge 2 a 1\nedge 1 b 2\nend\n",
        )
        .unwrap();
        let s = crate::system::from_labeled_graph(&g, 2).unwrap();
        assert!(matches!(Algebra::new(&s), Err(Error::NotLeftResolving { .. })));
    }
}
