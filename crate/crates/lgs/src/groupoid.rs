//! Basic bisections `U(μ, v_i^l, ν)` of the groupoid `G_𝔏`, their products,
//! ℤ-valued cocycles, and the stabilized groupoid `G_𝔏 × G_ℤ₊`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::language::{words_into, Cylinder};
use crate::system::{Alphabet, Lgs, VertexRef, Word};

/// The set of `(μy, |μ|-|ν|, νy)` with `v(y)_0^l = v_i^l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicBisection {
    pub mu: Word,
    pub vertex: VertexRef,
    pub nu: Word,
}

impl BasicBisection {
    /// Checks `|μ|, |ν| ≤ l` and that both cylinders are admissible.
    pub fn new(s: &Lgs, mu: Word, vertex: VertexRef, nu: Word) -> Result<Self> {
        s.check_vertex(vertex)?;
        let b = BasicBisection { mu, vertex, nu };
        if !b.is_admissible(s) {
            return Err(Error::Inadmissible(format!("bisection {} is empty", b.display(s.alphabet()))));
        }
        Ok(b)
    }

    pub fn is_admissible(&self, s: &Lgs) -> bool {
        let VertexRef { level, index } = self.vertex;
        s.admissible(&self.mu, level, index) && s.admissible(&self.nu, level, index)
    }

    pub fn degree(&self) -> i64 {
        self.mu.len() as i64 - self.nu.len() as i64
    }

    pub fn level(&self) -> usize {
        self.vertex.level
    }

    pub fn is_unit(&self) -> bool {
        self.mu == self.nu
    }

    pub fn inverse(&self) -> BasicBisection {
        BasicBisection { mu: self.nu.clone(), vertex: self.vertex, nu: self.mu.clone() }
    }

    pub fn range(&self) -> Cylinder {
        Cylinder::new(self.mu.clone(), self.vertex)
    }

    pub fn source(&self) -> Cylinder {
        Cylinder::new(self.nu.clone(), self.vertex)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        Shown(self, alphabet)
    }

    /// Reads `mu,v(l,i),nu`.
    pub fn parse(s: &Lgs, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Invalid(format!("expected mu,v(l,i),nu, found {text:?}")));
        }
        let vertex = VertexRef::from_str(&format!("{},{}", parts[1], parts[2]))?;
        let a = s.alphabet();
        BasicBisection::new(s, a.parse_word(parts[0])?, vertex, a.parse_word(parts[3])?)
    }
}

struct Shown<'a>(&'a BasicBisection, &'a Alphabet);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.1.format_word(&self.0.mu), self.0.vertex, self.1.format_word(&self.0.nu))
    }
}

fn require(s: &Lgs, b: &BasicBisection) -> Result<()> {
    s.check_vertex(b.vertex)?;
    if !b.is_admissible(s) {
        return Err(Error::Inadmissible(format!("bisection {} is empty", b.display(s.alphabet()))));
    }
    Ok(())
}

/// Product `U(b1)·U(b2)` as a sorted list of disjoint basic bisections.
///
/// With `κ = νρ` the product is the union over `w ∈ V_L`, `L = max(l+|ρ|, m)`,
/// of `U(μρ, w, τ)` where `ι^{L-m}(w) = v_j^m` and the `ρ`-path into `w`
/// starts above `v_i^l`. The case `ν = κρ` goes through inverses; otherwise
/// the product is empty.
pub fn compose(s: &Lgs, b1: &BasicBisection, b2: &BasicBisection) -> Result<Vec<BasicBisection>> {
    s.require_left_resolving()?;
    require(s, b1)?;
    require(s, b2)?;
    if b2.mu.starts_with(&b1.nu) {
        compose_forward(s, b1, b2)
    } else if b1.nu.starts_with(&b2.mu) {
        let mut out: Vec<BasicBisection> =
            compose_forward(s, &b2.inverse(), &b1.inverse())?.iter().map(BasicBisection::inverse).collect();
        out.sort();
        Ok(out)
    } else {
        Ok(Vec::new())
    }
}

fn compose_forward(s: &Lgs, b1: &BasicBisection, b2: &BasicBisection) -> Result<Vec<BasicBisection>> {
    let rho = &b2.mu[b1.nu.len()..];
    let (l, m) = (b1.level(), b2.level());
    let top = (l + rho.len()).max(m);
    if top > s.depth() {
        return Err(Error::DepthBudget { needed: top, depth: s.depth() });
    }
    let mut mu = b1.mu.clone();
    mu.extend_from_slice(rho);
    let mut out = Vec::new();
    for w in 0..s.size(top) {
        if s.project(top, w, m) != b2.vertex.index {
            continue;
        }
        let Some(path) = s.backtrack(rho, top, w) else { continue };
        if s.project(top - rho.len(), path[0], l) != b1.vertex.index {
            continue;
        }
        let piece = BasicBisection { mu: mu.clone(), vertex: VertexRef::new(top, w), nu: b2.nu.clone() };
        if piece.is_admissible(s) {
            out.push(piece);
        }
    }
    out.sort();
    Ok(out)
}

/// All admissible bisections at exactly level `l`.
pub fn bisections_at(s: &Lgs, l: usize) -> Vec<BasicBisection> {
    let mut out = Vec::new();
    for v in 0..s.size(l) {
        let ws: Vec<Word> = (0..=l).flat_map(|k| words_into(s, l, v, k)).collect();
        for mu in &ws {
            for nu in &ws {
                out.push(BasicBisection { mu: mu.clone(), vertex: VertexRef::new(l, v), nu: nu.clone() });
            }
        }
    }
    out
}

/// All admissible bisections with level at most `d`.
pub fn universe(s: &Lgs, d: usize) -> Result<Vec<BasicBisection>> {
    if d > s.depth() {
        return Err(Error::LevelOutOfRange { level: d, max: s.depth() });
    }
    Ok((0..=d).flat_map(|l| bisections_at(s, l)).collect())
}

/// A groupoid element sample: the pieces of `G_𝔏` whose range lies in `x`,
/// source in `z`, with lag `n`, meeting at the shared terminal vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupoidElementSample {
    pub x: Cylinder,
    pub n: i64,
    pub z: Cylinder,
}

impl GroupoidElementSample {
    pub fn bisection(&self) -> BasicBisection {
        BasicBisection { mu: self.x.word.clone(), vertex: self.x.vertex, nu: self.z.word.clone() }
    }
}

/// Every `(x, n, z)` cell at level `d` with `|μ|, |ν| ≤ d`.
pub fn enumerate_elements(s: &Lgs, d: usize) -> Result<Vec<GroupoidElementSample>> {
    if d > s.depth() {
        return Err(Error::LevelOutOfRange { level: d, max: s.depth() });
    }
    let mut out: Vec<GroupoidElementSample> = bisections_at(s, d)
        .into_iter()
        .map(|b| GroupoidElementSample { n: b.degree(), x: b.range(), z: b.source() })
        .collect();
    out.sort();
    Ok(out)
}

/// Symbol weights `w`, defining `f(x,n,z) = Σ_{i<k} w(x_i) - Σ_{i<l} w(z_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolWeights {
    pub w: Vec<i64>,
}

impl SymbolWeights {
    /// `w ≡ 1`, giving the canonical cocycle `c_𝔏`.
    pub fn ones(alphabet: &Alphabet) -> Self {
        SymbolWeights { w: vec![1; alphabet.len()] }
    }

    /// Reads `a=2,b=0`; unnamed symbols get weight 1.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self> {
        let mut w = vec![1; alphabet.len()];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, val) =
                part.split_once('=').ok_or_else(|| Error::Invalid(format!("expected sym=int, found {part:?}")))?;
            let a = alphabet
                .lookup(name.trim())
                .ok_or_else(|| Error::Invalid(format!("unknown symbol {:?}", name.trim())))?;
            w[a] = val.trim().parse().map_err(|_| Error::Invalid(format!("bad weight {val:?}")))?;
        }
        Ok(SymbolWeights { w })
    }

    pub fn word(&self, word: &[usize]) -> i64 {
        word.iter().map(|&a| self.w[a]).sum()
    }
}

pub fn cocycle_value(w: &SymbolWeights, b: &BasicBisection) -> i64 {
    w.word(&b.mu) - w.word(&b.nu)
}

/// `{((x,p), n', (z,q)) : (x, n, z) ∈ U(base)}`; the base lag `n = deg(base)`
/// and the stable lag is `n' = n + p - q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableBisection {
    pub base: BasicBisection,
    pub p: u64,
    pub q: u64,
}

impl StableBisection {
    pub fn stable_lag(&self) -> i64 {
        self.base.degree() + self.p as i64 - self.q as i64
    }

    pub fn inverse(&self) -> StableBisection {
        StableBisection { base: self.base.inverse(), p: self.q, q: self.p }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        StableShown(self, alphabet)
    }
}

struct StableShown<'a>(&'a StableBisection, &'a Alphabet);

impl fmt::Display for StableShown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) p={} q={}", self.0.base.display(self.1), self.0.p, self.0.q)
    }
}

/// `G_ℤ₊` multiplies `(m,n)(k,l) = (m,l)` when `n = k`.
pub fn stable_compose(s: &Lgs, s1: &StableBisection, s2: &StableBisection) -> Result<Vec<StableBisection>> {
    if s1.q != s2.p {
        return Ok(Vec::new());
    }
    Ok(compose(s, &s1.base, &s2.base)?
        .into_iter()
        .map(|base| StableBisection { base, p: s1.p, q: s2.q })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CocycleMode {
    /// `f̃((x,p), n, (z,q)) = f(x, n + q - p, z)`: the base value.
    Lift,
    /// `n + q - p` in stable-lag coordinates, i.e. the base lag.
    CanonicalStable,
}

impl FromStr for CocycleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lift" => Ok(CocycleMode::Lift),
            "canonical-stable" => Ok(CocycleMode::CanonicalStable),
            _ => Err(Error::Invalid(format!("unknown cocycle mode {s:?} (expected lift or canonical-stable)"))),
        }
    }
}

pub fn stable_cocycle(w: &SymbolWeights, s: &StableBisection, mode: CocycleMode) -> i64 {
    match mode {
        CocycleMode::Lift => cocycle_value(w, &s.base),
        CocycleMode::CanonicalStable => s.stable_lag() + s.q as i64 - s.p as i64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn b(s: &Lgs, t: &str) -> BasicBisection {
        BasicBisection::parse(s, t).unwrap()
    }

    fn shown(s: &Lgs, v: &[BasicBisection]) -> Vec<String> {
        v.iter().map(|x| x.display(s.alphabet()).to_string()).collect()
    }

    #[test]
    fn full2_products() {
        let s = examples::full2(4);
        let r = compose(&s, &b(&s, "a,v(1,1),"), &b(&s, ",v(2,1),ab")).unwrap();
        assert_eq!(shown(&s, &r), ["a,v(2,1),ab"]);
        assert!(compose(&s, &b(&s, ",v(1,1),a"), &b(&s, "b,v(1,1),")).unwrap().is_empty());
        let r = compose(&s, &b(&s, "a,v(1,1),"), &b(&s, "b,v(1,1),")).unwrap();
        assert_eq!(shown(&s, &r), ["ab,v(2,1),ε"]);
    }

    #[test]
    fn golden_product() {
        let s = examples::golden(3);
        let r = compose(&s, &b(&s, "β,v(1,2),"), &b(&s, ",v(1,2),β")).unwrap();
        assert_eq!(shown(&s, &r), ["β,v(1,2),β"]);
        assert!(BasicBisection::parse(&s, "γ,v(1,2),").is_err());
    }

    #[test]
    fn product_past_depth_is_an_error() {
        let s = examples::full2(2);
        let e = compose(&s, &b(&s, "a,v(2,1),"), &b(&s, "b,v(2,1),")).unwrap_err();
        assert!(matches!(e, Error::DepthBudget { needed: 3, depth: 2 }));
    }

    #[test]
    fn inverse_and_cocycles() {
        let s = examples::full2(3);
        assert_eq!(b(&s, "a,v(1,1),").inverse(), b(&s, ",v(1,1),a"));
        let x = b(&s, "ab,v(2,1),a");
        assert_eq!(cocycle_value(&SymbolWeights::ones(s.alphabet()), &x), 1);
        let w = SymbolWeights::parse(s.alphabet(), "a=2,b=0").unwrap();
        assert_eq!(cocycle_value(&w, &x), 0);
        for u in universe(&s, 3).unwrap() {
            assert_eq!(u.inverse().inverse(), u);
            assert_eq!(cocycle_value(&w, &u.inverse()), -cocycle_value(&w, &u));
        }
    }

    #[test]
    fn cocycles_add_along_products() {
        for s in examples::reference_systems(6) {
            let w1 = SymbolWeights::ones(s.alphabet());
            let mut w2 = SymbolWeights::ones(s.alphabet());
            w2.w[0] = 3;
            let u = universe(&s, 3).unwrap();
            for x in &u {
                for y in &u {
                    for piece in compose(&s, x, y).unwrap() {
                        for w in [&w1, &w2] {
                            assert_eq!(cocycle_value(w, &piece), cocycle_value(w, x) + cocycle_value(w, y));
                        }
                    }
                }
                if x.is_unit() {
                    assert_eq!(cocycle_value(&w2, x), 0);
                }
            }
        }
    }

    #[test]
    fn element_samples() {
        let s = examples::full2(2);
        let e = enumerate_elements(&s, 1).unwrap();
        assert_eq!(e.len(), 9);
        assert!(e.iter().any(|g| g.n == 1 && g.x.word == [0]));
        for g in &e {
            let inv = GroupoidElementSample { x: g.z.clone(), n: -g.n, z: g.x.clone() };
            assert!(e.contains(&inv));
        }
        for c in crate::language::cylinders(&s, 1, 1).unwrap() {
            assert!(e.iter().any(|g| g.n == 0 && g.x == c && g.z == c));
        }
    }

    #[test]
    fn stable_products_and_cocycles() {
        let s = examples::full2(4);
        let x = StableBisection { base: b(&s, "a,v(1,1),"), p: 3, q: 5 };
        let y = StableBisection { base: b(&s, ",v(1,1),b"), p: 5, q: 2 };
        let r = stable_compose(&s, &x, &y).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].p, r[0].q), (3, 2));
        assert_eq!(r[0].base, b(&s, "a,v(1,1),b"));
        let y2 = StableBisection { p: 4, ..y.clone() };
        assert!(stable_compose(&s, &x, &y2).unwrap().is_empty());

        let ones = SymbolWeights::ones(s.alphabet());
        let c2 = StableBisection { base: b(&s, "ab,v(2,1),"), p: 7, q: 1 };
        assert_eq!(stable_cocycle(&ones, &c2, CocycleMode::Lift), 2);
        let d1 = StableBisection { base: b(&s, "a,v(1,1),"), p: 0, q: 3 };
        assert_eq!(d1.stable_lag(), -2);
        assert_eq!(stable_cocycle(&ones, &d1, CocycleMode::CanonicalStable), 1);
        assert!("phase".parse::<CocycleMode>().is_err());
    }

    #[test]
    fn stable_cocycles_add() {
        let s = examples::golden(6);
        let ones = SymbolWeights::ones(s.alphabet());
        let bases = universe(&s, 2).unwrap();
        let mut st = Vec::new();
        for base in &bases {
            for (p, q) in [(0, 0), (0, 2), (1, 0), (2, 2)] {
                st.push(StableBisection { base: base.clone(), p, q });
            }
        }
        for x in &st {
            for y in &st {
                for z in stable_compose(&s, x, y).unwrap() {
                    for mode in [CocycleMode::Lift, CocycleMode::CanonicalStable] {
                        assert_eq!(
                            stable_cocycle(&ones, &z, mode),
                            stable_cocycle(&ones, x, mode) + stable_cocycle(&ones, y, mode)
                        );
                    }
                    assert_eq!(z.stable_lag(), x.stable_lag() + y.stable_lag());
                }
            }
        }
    }
}
