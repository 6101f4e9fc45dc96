//! Two-sided conjugacy certificates: a future-only window code `ψ₀` with an
//! injectivity window `l` and a recoding bound `L`, the relation `∼` on
//! `B_L(Λ₁, v_i^L)`, and the stable groupoid map
//! `φ̃((x,p), n, (z,q)) = (ξ(x,p), n + q + g_x(p) - p - g_z(q), ξ(z,q))`
//! with `ξ(x,p) = (ψ₀(x), g_x(p))`.
//!
//! The bijections `g` interleave residue classes: a class enumerated in
//! lexicographic order as `ν_0, …, ν_{r-1}` gets `g_{ν_t}(n) = t + r·n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::Certificate;
use crate::equivalence::{budget, images_admissible, label_factor, show, totality, BisectionMap, Clause, CodeIso, Report};
use crate::error::{Error, Result};
use crate::fine::{disjoint, same_set, to_shape, Shape};
use crate::groupoid::{stable_compose, stable_cocycle, universe, BasicBisection, CocycleMode, StableBisection, SymbolWeights};
use crate::language::words_into;
use crate::points::{Point, PointModel};
use crate::system::{Lgs, Word};

/// `(l, L)` of a two-sided certificate.
pub fn windows(cert: &Certificate) -> Result<(usize, usize)> {
    match (cert.inj_window, cert.recode_bound) {
        (Some(l), Some(big)) if l <= big => Ok((l, big)),
        (Some(l), Some(big)) => Err(Error::Precondition(format!("inj-window {l} exceeds recode-bound {big}"))),
        _ => Err(Error::Precondition(format!("certificate {} lacks inj-window or recode-bound", cert.name))),
    }
}

fn model_level(cert: &Certificate, big_l: usize) -> usize {
    cert.forward.key_level.max(big_l).max(1)
}

fn same_on(pm: &PointModel, key_level: usize, a: &Point, b: &Point, from: usize, to: usize) -> bool {
    (from..to).all(|i| a.labels[i] == b.labels[i] && pm.vertex_at(a, i, key_level) == pm.vertex_at(b, i, key_level))
}

/// Checks `ψ₀ ∘ σ = σ ∘ ψ₀`, admissibility of images, surjectivity onto
/// the target points of length `D - L`, and that equal images force
/// agreement from coordinate `l + 1` on, all on points of length `D + d - 1`.
pub fn check_two_sided(s1: &Lgs, s2: &Lgs, cert: &Certificate, d: usize) -> Result<Report> {
    let (l, big_l) = windows(cert)?;
    if d < big_l {
        return Err(Error::Precondition(format!("depth {d} is below the recoding bound {big_l}")));
    }
    let h = &cert.forward;
    let t1 = model_level(cert, big_l);
    budget(s1, t1)?;
    budget(s2, h.out_level)?;
    let pm = PointModel::new(s1, t1)?;
    let out = PointModel::new(s2, h.out_level)?;
    let n = d + h.window - 1;
    let mut r = Report::default();
    r.note("depth", d);
    r.note("inj-window", l);
    r.note("recode-bound", big_l);
    // Window codes are right asymptotic with memory 0 and anticipation d-1.
    r.note("M", 0);
    r.note("N", h.window - 1);
    r.note("points of length", n);

    r.clauses.push(totality(s1, "forward-total", h)?);
    r.clauses.push(images_admissible("well-defined", h, &pm, &out, n));
    r.clauses.push(label_factor("label-factor", s1, s2, h));

    let pts = pm.points(n);
    let mut shift = Clause::pass("shift-commuting", 0);
    for x in &pts {
        let (Some(hx), Some(hs)) = (h.apply(&pm, x), h.apply(&pm, &x.shift(1))) else { continue };
        shift.checked += 1;
        if hs != hx.shift(1) {
            shift = Clause::fail("shift-commuting", shift.checked, pm.format(x), "ψ₀(σx) ≠ σψ₀(x)".into());
            break;
        }
    }
    r.clauses.push(shift);

    let m = d - big_l;
    let mut surj = Clause::pass("surjective", 0);
    if m > 0 {
        let hit: BTreeSet<Point> = pm.points(m + h.window - 1).iter().filter_map(|x| h.apply(&pm, x)).collect();
        for y in out.points(m) {
            surj.checked += 1;
            if !hit.contains(&y) {
                surj = Clause::fail("surjective", surj.checked, out.format(&y), "no point maps onto this cylinder".into());
                break;
            }
        }
    }
    r.clauses.push(surj);

    let mut tail = Clause::pass("tail-agreement", 0);
    let mut first: HashMap<Point, &Point> = HashMap::new();
    for x in &pts {
        let Some(y) = h.apply(&pm, x) else { continue };
        tail.checked += 1;
        match first.get(&y) {
            None => {
                first.insert(y, x);
            }
            Some(rep) => {
                if !same_on(&pm, h.key_level, rep, x, l.min(d), d) {
                    tail = Clause::fail(
                        "tail-agreement",
                        tail.checked,
                        format!("{} | {}", pm.format(rep), pm.format(x)),
                        format!("equal images but the points differ after coordinate {l}"),
                    );
                    break;
                }
            }
        }
    }
    r.clauses.push(tail);
    Ok(r)
}

/// The partition of each `B_L(Λ₁, v_i^L)` into `∼`-classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastClasses {
    pub level: usize,
    /// Classes per vertex index at level `L`, each sorted, ordered by their
    /// least element.
    pub classes: BTreeMap<usize, Vec<Vec<Word>>>,
    /// Pairs in one class of the closure that the relation does not relate
    /// directly; empty when the relation is already transitive.
    pub non_transitive: Vec<(usize, Word, Word)>,
    index: HashMap<(usize, Word), (u64, u64)>,
}

impl PastClasses {
    fn singletons(s: &Lgs) -> Self {
        let classes: BTreeMap<usize, Vec<Vec<Word>>> = (0..s.size(0)).map(|v| (v, vec![vec![Vec::new()]])).collect();
        let index = (0..s.size(0)).map(|v| ((v, Vec::new()), (0, 1))).collect();
        PastClasses { level: 0, classes, non_transitive: Vec::new(), index }
    }

    pub fn is_transitive(&self) -> bool {
        self.non_transitive.is_empty()
    }

    /// Position `t` of `μ` in its class and the class size `r`.
    pub fn slot(&self, v: usize, mu: &[usize]) -> Option<(u64, u64)> {
        self.index.get(&(v, mu.to_vec())).copied()
    }

    /// `g_{(μ, v)}(n) = t + r·n`.
    pub fn g(&self, v: usize, mu: &[usize], n: u64) -> Option<u64> {
        self.slot(v, mu).map(|(t, r)| t + r * n)
    }

    /// The sets `{g_ν(n)}` over one class partition `0..limit` and each `g_ν`
    /// is injective there.
    pub fn check_decomposition(&self, limit: u64) -> std::result::Result<(), String> {
        for (v, classes) in &self.classes {
            for class in classes {
                let mut owner: Vec<Option<usize>> = vec![None; limit as usize];
                for (i, nu) in class.iter().enumerate() {
                    for n in 0..limit {
                        let k = self.g(*v, nu, n).unwrap();
                        if k >= limit {
                            break;
                        }
                        if let Some(j) = owner[k as usize] {
                            return Err(format!("{k} is hit by members {j} and {i} of a class at vertex {v}"));
                        }
                        owner[k as usize] = Some(i);
                    }
                }
                if let Some(k) = owner.iter().position(Option::is_none) {
                    return Err(format!("{k} is not hit by the class of size {} at vertex {v}", class.len()));
                }
            }
        }
        Ok(())
    }
}

fn find(parent: &mut HashMap<Word, Word>, w: &Word) -> Word {
    let p = parent.get(w).cloned().unwrap_or_else(|| w.clone());
    if &p == w {
        return p;
    }
    let root = find(parent, &p);
    parent.insert(w.clone(), root.clone());
    root
}

/// `μ ∼ μ'` when two points of length `D + d - 1` start with `μ, μ'`, share
/// coordinates `L+1, …` and the vertex of coordinate `L` in the model, and
/// have equal images; shared tails extend both to points with equal images.
pub fn past_equivalence_classes(s1: &Lgs, cert: &Certificate, big_l: usize, d: usize) -> Result<PastClasses> {
    if big_l == 0 {
        return Ok(PastClasses::singletons(s1));
    }
    if d < big_l {
        return Err(Error::Precondition(format!("depth {d} is below L = {big_l}")));
    }
    let h = &cert.forward;
    let t1 = model_level(cert, big_l);
    budget(s1, t1)?;
    let pm = PointModel::new(s1, t1)?;
    let n = d + h.window - 1;
    let mut groups: BTreeMap<(Point, Point), BTreeSet<(usize, Word)>> = BTreeMap::new();
    for x in pm.points(n) {
        let Some(y) = h.apply(&pm, &x) else { continue };
        let tail = Point { labels: x.labels[big_l..].to_vec(), verts: x.verts[big_l - 1..].to_vec() };
        let v = pm.vertex_at(&x, big_l - 1, big_l);
        groups.entry((y, tail)).or_default().insert((v, x.labels[..big_l].to_vec()));
    }
    let mut related: BTreeSet<(usize, Word, Word)> = BTreeSet::new();
    for members in groups.values() {
        for (v, a) in members {
            for (_, b) in members {
                related.insert((*v, a.clone(), b.clone()));
            }
        }
    }
    let mut classes = BTreeMap::new();
    let mut index = HashMap::new();
    let mut non_transitive = Vec::new();
    for v in 0..s1.size(big_l) {
        let words = words_into(s1, big_l, v, big_l);
        let mut parent: HashMap<Word, Word> = HashMap::new();
        for (_, a, b) in related.range((v, Vec::new(), Vec::new())..(v + 1, Vec::new(), Vec::new())) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (hi, lo) = if ra > rb { (ra, rb) } else { (rb, ra) };
                parent.insert(hi, lo);
            }
        }
        let mut by_root: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
        for w in &words {
            by_root.entry(find(&mut parent, w)).or_default().push(w.clone());
        }
        let mut cls: Vec<Vec<Word>> = by_root.into_values().collect();
        for c in &mut cls {
            c.sort();
        }
        cls.sort();
        for c in &cls {
            for (t, w) in c.iter().enumerate() {
                index.insert((v, w.clone()), (t as u64, c.len() as u64));
                for w2 in c {
                    if w != w2 && !related.contains(&(v, w.clone(), w2.clone())) {
                        non_transitive.push((v, w.clone(), w2.clone()));
                    }
                }
            }
        }
        classes.insert(v, cls);
    }
    Ok(PastClasses { level: big_l, classes, non_transitive, index })
}

/// `φ̃` on stable bisections.
pub struct StableIso<'a> {
    s1: &'a Lgs,
    s2: &'a Lgs,
    cert: Certificate,
    conj: CodeIso<'a>,
    pub classes: PastClasses,
}

/// Builds `φ̃` after `check_two_sided` passes at depth `d`.
pub fn build_stable_iso<'a>(s1: &'a Lgs, s2: &'a Lgs, cert: &Certificate, d: usize) -> Result<StableIso<'a>> {
    let r = check_two_sided(s1, s2, cert, d)?;
    if !r.pass() {
        return Err(Error::Precondition(format!("certificate {} fails the two-sided check", cert.name)));
    }
    let (_, big_l) = windows(cert)?;
    let classes = past_equivalence_classes(s1, cert, big_l, d)?;
    if !classes.is_transitive() {
        return Err(Error::Precondition("the past relation is not transitive".into()));
    }
    Ok(StableIso { s1, s2, cert: cert.clone(), conj: CodeIso::conjugacy(s1, s2, cert.forward.clone()), classes })
}

impl<'a> StableIso<'a> {
    /// `(t, r)` for the first `L` coordinates of `word` read along `path`
    /// (`path[j]` at level `base + j`).
    fn slot(&self, word: &[usize], path: &[usize], base: usize) -> Result<(u64, u64)> {
        let big_l = self.classes.level;
        if big_l == 0 {
            return Ok((0, 1));
        }
        let v = self.s1.project(base + big_l, path[big_l], big_l);
        self.classes.slot(v, &word[..big_l]).ok_or_else(|| {
            Error::Precondition(format!("{} has no class", self.s1.alphabet().format_word(&word[..big_l])))
        })
    }

    pub fn image(&self, sb: &StableBisection) -> Result<Vec<StableBisection>> {
        let b = &sb.base;
        let big_l = self.classes.level;
        let r = big_l.saturating_sub(b.mu.len().min(b.nu.len()));
        let level = b.level() + r;
        budget(self.s1, level)?;
        let mut out = Vec::new();
        for piece in to_shape(self.s1, b, Shape { k: b.nu.len() + r, level })? {
            let top = piece.level();
            let w = piece.vertex.index;
            let inadmissible = || Error::Inadmissible(show(self.s1, &piece));
            let pa = self.s1.backtrack(&piece.mu, top, w).ok_or_else(inadmissible)?;
            let pb = self.s1.backtrack(&piece.nu, top, w).ok_or_else(inadmissible)?;
            let (tx, rx) = self.slot(&piece.mu, &pa, top - piece.mu.len())?;
            let (tz, rz) = self.slot(&piece.nu, &pb, top - piece.nu.len())?;
            let (p, q) = (tx + rx * sb.p, tz + rz * sb.q);
            for base in self.conj.image(&piece)? {
                out.push(StableBisection { base, p, q });
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// `ξ(x, p)` on a point prefix of the level-`T` model.
    pub fn xi(&self, pm: &PointModel, x: &Point, p: u64) -> Option<(Point, u64)> {
        let big_l = self.classes.level;
        let g = if big_l == 0 {
            p
        } else {
            let v = pm.vertex_at(x, big_l - 1, big_l);
            self.classes.g(v, &x.labels[..big_l], p)?
        };
        Some((self.cert.forward.apply(pm, x)?, g))
    }

    /// Samples stable bisections with base level at most `base_depth` and
    /// `p, q ≤ 4`, and checks cocycle preservation, functoriality and
    /// injectivity of `φ̃`, then `ξ` on point prefixes with `p ≤ 6`.
    pub fn verify(&self, base_depth: usize, samples: usize, seed: u64) -> Result<Report> {
        let (s1, s2) = (self.s1, self.s2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = universe(s1, base_depth)?;
        let pick = |rng: &mut ChaCha8Rng| -> StableBisection {
            StableBisection { base: pool.choose(rng).unwrap().clone(), p: rng.gen_range(0..=4), q: rng.gen_range(0..=4) }
        };
        let sample: Vec<StableBisection> = (0..samples).map(|_| pick(&mut rng)).collect();
        let mut cache: HashMap<StableBisection, Vec<StableBisection>> = HashMap::new();
        let mut img = |b: &StableBisection| -> Result<Vec<StableBisection>> {
            if let Some(v) = cache.get(b) {
                return Ok(v.clone());
            }
            let v = self.image(b)?;
            cache.insert(b.clone(), v.clone());
            Ok(v)
        };
        let shown = |b: &StableBisection| b.display(s1.alphabet()).to_string();
        let mut r = Report::default();
        r.note("recode-bound", self.classes.level);
        r.note("base depth", base_depth);
        r.note("samples", samples);
        r.note("seed", seed);

        let ones1 = SymbolWeights::ones(s1.alphabet());
        let ones2 = SymbolWeights::ones(s2.alphabet());
        let mut coc = Clause::pass("stable-cocycle", 0);
        'coc: for sb in &sample {
            let want = stable_cocycle(&ones1, sb, CocycleMode::CanonicalStable);
            let im = img(sb)?;
            if im.is_empty() {
                coc = Clause::fail("stable-cocycle", coc.checked, shown(sb), "empty image".into());
                break;
            }
            for i in im {
                coc.checked += 1;
                let got = stable_cocycle(&ones2, &i, CocycleMode::CanonicalStable);
                if got != want {
                    coc = Clause::fail(
                        "stable-cocycle",
                        coc.checked,
                        shown(sb),
                        format!("c̃₁ = {want} but c̃₂ = {got} on {}", i.display(s2.alphabet())),
                    );
                    break 'coc;
                }
            }
        }
        r.clauses.push(coc);

        let mut fun = Clause::pass("functoriality", 0);
        for a in &sample {
            let partners: Vec<&BasicBisection> =
                pool.iter().filter(|b| b.mu.starts_with(&a.base.nu) || a.base.nu.starts_with(&b.mu)).collect();
            let b = StableBisection { base: (*partners.choose(&mut rng).unwrap()).clone(), p: a.q, q: rng.gen_range(0..=4) };
            let mut lhs: BTreeMap<(u64, u64), Vec<BasicBisection>> = BTreeMap::new();
            for c in stable_compose(s1, a, &b)? {
                for i in img(&c)? {
                    lhs.entry((i.p, i.q)).or_default().push(i.base);
                }
            }
            let mut rhs: BTreeMap<(u64, u64), Vec<BasicBisection>> = BTreeMap::new();
            for x in img(a)? {
                for y in img(&b)? {
                    for c in stable_compose(s2, &x, &y)? {
                        rhs.entry((c.p, c.q)).or_default().push(c.base);
                    }
                }
            }
            fun.checked += 1;
            let keys: BTreeSet<(u64, u64)> = lhs.keys().chain(rhs.keys()).copied().collect();
            let empty = Vec::new();
            for k in keys {
                if !same_set(s2, lhs.get(&k).unwrap_or(&empty), rhs.get(&k).unwrap_or(&empty))? {
                    fun = Clause::fail(
                        "functoriality",
                        fun.checked,
                        format!("{} ∘ {}", shown(a), shown(&b)),
                        format!("images differ at p={} q={}", k.0, k.1),
                    );
                    break;
                }
            }
            if !fun.ok {
                break;
            }
        }
        r.clauses.push(fun);

        let mut inj = Clause::pass("injective", 0);
        'inj: for (i, a) in sample.iter().enumerate() {
            for b in &sample[i + 1..] {
                let apart = (a.p, a.q) != (b.p, b.q)
                    || disjoint(s1, std::slice::from_ref(&a.base), std::slice::from_ref(&b.base))?;
                if !apart {
                    continue;
                }
                inj.checked += 1;
                for x in img(a)? {
                    for y in img(b)? {
                        if (x.p, x.q) == (y.p, y.q)
                            && !disjoint(s2, std::slice::from_ref(&x.base), std::slice::from_ref(&y.base))?
                        {
                            inj = Clause::fail(
                                "injective",
                                inj.checked,
                                format!("{} | {}", shown(a), shown(b)),
                                "disjoint bisections have overlapping images".into(),
                            );
                            break 'inj;
                        }
                    }
                }
            }
        }
        r.clauses.push(inj);

        let mut dec = Clause::pass("decomposition", 1000);
        if let Err(e) = self.classes.check_decomposition(1000) {
            dec = Clause::fail("decomposition", 1000, String::new(), e);
        }
        r.clauses.push(dec);

        r.clauses.extend(self.check_xi(6)?);
        Ok(r)
    }

    /// `ξ` on `(x, p)` with `x` of length `L + d + 1` and `p ≤ max_p`:
    /// equal values force equal `p` and equal prefixes on the coordinates
    /// the image determines, and every target `(y, p')` with `p' ≤ max_p` is
    /// reached.
    pub fn check_xi(&self, max_p: u64) -> Result<Vec<Clause>> {
        let h = &self.cert.forward;
        let big_l = self.classes.level;
        let pm = PointModel::new(self.s1, model_level(&self.cert, big_l))?;
        let out = PointModel::new(self.s2, h.out_level)?;
        let n = big_l.max(1) + h.window + 1;
        let m = n - h.window + 1;
        let mut seen: HashMap<(Point, u64), (Point, u64)> = HashMap::new();
        let mut inj = Clause::pass("xi-injective", 0);
        for x in pm.points(n) {
            for p in 0..=max_p {
                let Some(key) = self.xi(&pm, &x, p) else { continue };
                inj.checked += 1;
                match seen.get(&key) {
                    None => {
                        seen.insert(key, (x.clone(), p));
                    }
                    Some((x0, p0)) => {
                        if inj.ok && (*p0 != p || !same_on(&pm, h.key_level, x0, &x, 0, m)) {
                            inj = Clause::fail(
                                "xi-injective",
                                inj.checked,
                                format!("({}, {p0}) | ({}, {p})", pm.format(x0), pm.format(&x)),
                                "equal ξ values".into(),
                            );
                        }
                    }
                }
            }
        }
        let mut surj = Clause::pass("xi-surjective", 0);
        for y in out.points(m) {
            for p in 0..=max_p {
                surj.checked += 1;
                if !seen.contains_key(&(y.clone(), p)) {
                    surj = Clause::fail("xi-surjective", surj.checked, format!("({}, {p})", out.format(&y)), "not reached".into());
                    return Ok(vec![inj, surj]);
                }
            }
        }
        Ok(vec![inj, surj])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::parse_certificate;
    use crate::examples;

    fn shift_code() -> &'static str {
        "certificate shift
code forward aa,v(2,1) -> a v(1,1)
code forward ab,v(2,1) -> b v(1,1)
code forward ba,v(2,1) -> a v(1,1)
code forward bb,v(2,1) -> b v(1,1)
inj-window 1
recode-bound 1
end
"
    }

    #[test]
    fn shift_collapses_first_coordinate() {
        let s = examples::full2(6);
        let c = parse_certificate("shift", shift_code(), &s, &s).unwrap();
        let r = check_two_sided(&s, &s, &c, 3).unwrap();
        assert!(r.pass(), "{r}");
        let pc = past_equivalence_classes(&s, &c, 1, 3).unwrap();
        assert!(pc.is_transitive());
        assert_eq!(pc.classes[&0], vec![vec![vec![0], vec![1]]]);
        assert_eq!(pc.g(0, &[1], 3), Some(7));
        pc.check_decomposition(1000).unwrap();
    }

    #[test]
    fn zero_injectivity_window_rejects_the_shift() {
        let s = examples::full2(6);
        let text = shift_code().replace("inj-window 1", "inj-window 0");
        let c = parse_certificate("shift", &text, &s, &s).unwrap();
        let r = check_two_sided(&s, &s, &c, 3).unwrap();
        let t = r.clause("tail-agreement").unwrap();
        assert!(!t.ok);
        assert_eq!(t.witness.as_deref(), Some("aaaa | baaa"));
    }

    #[test]
    fn recode_bound_above_depth_is_refused() {
        let s = examples::full2(6);
        let c = parse_certificate("shift", shift_code(), &s, &s).unwrap();
        assert!(matches!(check_two_sided(&s, &s, &c, 0), Err(Error::Precondition(_))));
    }
}
