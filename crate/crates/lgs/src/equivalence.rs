//! Checkers for continuous orbit equivalence and eventual conjugacy
//! certificates, and the groupoid map `φ(x, p-q, z) = (h(x), c^p(x) - c^q(z), h(z))`
//! they induce.
//!
//! Points are finite prefixes in the model of [`crate::points`]; every check is
//! exact on the prefixes it enumerates and refuses when the systems are too
//! shallow.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::code::{BlockCode, Certificate, CylinderFunction};
use crate::error::{Error, Result};
use crate::fine::{fine_form_at, join, same_set, set_form, to_shape, Coef, Shape};
use crate::groupoid::{bisections_at, cocycle_value, compose, universe, BasicBisection, SymbolWeights};
use crate::points::{Point, PointModel};
use crate::system::{Lgs, VertexRef};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: String,
    pub ok: bool,
    /// Number of instances examined.
    pub checked: usize,
    /// Label word of the failing point or bisection.
    pub witness: Option<String>,
    pub detail: Option<String>,
}

impl Clause {
    pub fn pass(name: &str, checked: usize) -> Self {
        Clause { name: name.into(), ok: true, checked, witness: None, detail: None }
    }

    pub fn fail(name: &str, checked: usize, witness: String, detail: String) -> Self {
        Clause { name: name.into(), ok: false, checked, witness: Some(witness), detail: Some(detail) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub clauses: Vec<Clause>,
    /// Parameters and derived bounds, in order.
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.ok)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn note(&mut self, k: &str, v: impl ToString) {
        self.notes.push((k.into(), v.to_string()));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.notes {
            writeln!(f, "{k}: {v}")?;
        }
        for c in &self.clauses {
            write!(f, "{} {} ({} checked)", if c.ok { "PASS" } else { "FAIL" }, c.name, c.checked)?;
            if let Some(w) = &c.witness {
                write!(f, " witness {w}")?;
            }
            if let Some(d) = &c.detail {
                write!(f, ": {d}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

pub(crate) fn budget(s: &Lgs, needed: usize) -> Result<()> {
    if needed > s.depth() {
        Err(Error::DepthBudget { needed, depth: s.depth() })
    } else {
        Ok(())
    }
}

pub(crate) fn describe(pm: &PointModel, p: &Point) -> String {
    let vs: Vec<String> = p.verts.iter().map(|&v| VertexRef::new(pm.level(), v).to_string()).collect();
    format!("{} at {}", pm.format(p), vs.join(" "))
}

pub(crate) fn totality(s: &Lgs, name: &str, code: &BlockCode) -> Result<Clause> {
    let missing = code.missing_keys(s)?;
    let n = code.map.len();
    Ok(match missing.first() {
        None => Clause::pass(name, n),
        Some((w, v)) => {
            let w = s.alphabet().format_word(w);
            Clause::fail(name, n, w.clone(), format!("no entry for {w},{v} ({} keys missing)", missing.len()))
        }
    })
}

fn function_totality(s: &Lgs, name: &str, f: &CylinderFunction) -> Result<Clause> {
    let missing = f.missing_keys(s)?;
    Ok(match missing.first() {
        None => Clause::pass(name, 1),
        Some((w, v)) => {
            let w = s.alphabet().format_word(w);
            Clause::fail(name, 1, w.clone(), format!("undefined on {w},{v}"))
        }
    })
}

/// Images are points of the target's level-`out_level` model.
pub(crate) fn images_admissible(name: &str, code: &BlockCode, from: &PointModel, to: &PointModel, n: usize) -> Clause {
    let mut checked = 0;
    for p in (1..=n).flat_map(|k| from.points(k)) {
        checked += 1;
        match code.apply(from, &p) {
            None => return Clause::fail(name, checked, from.format(&p), "a key is missing".into()),
            Some(y) if !to.is_point(&y) => {
                return Clause::fail(name, checked, from.format(&p), format!("image {} is not a path", describe(to, &y)))
            }
            _ => {}
        }
    }
    Clause::pass(name, checked)
}

pub(crate) fn label_factor(name: &str, s: &Lgs, t: &Lgs, code: &BlockCode) -> Clause {
    match code.label_map() {
        Ok(m) => Clause::pass(name, m.len()),
        Err((w, a, b)) => {
            let ws = s.alphabet().format_word(&w);
            Clause::fail(
                name,
                code.map.len(),
                ws.clone(),
                format!("window {ws} maps to both {} and {}", t.alphabet().name(a), t.alphabet().name(b)),
            )
        }
    }
}

/// `h' ∘ h = id` on the determined prefix (labels, vertices at the output
/// level of `h'`).
fn round_trip(name: &str, h: &BlockCode, back: &BlockCode, pm: &PointModel, mid: &PointModel, n: usize) -> Clause {
    let mut checked = 0;
    if back.key_level > mid.level() {
        return Clause::fail(
            name,
            0,
            String::new(),
            format!("inverse key level {} exceeds forward output level {}", back.key_level, mid.level()),
        );
    }
    for x in (1..=n).flat_map(|k| pm.points(k)) {
        checked += 1;
        let Some(y) = h.apply(pm, &x) else { continue };
        let Some(z) = back.apply(mid, &y) else {
            return Clause::fail(name, checked, pm.format(&x), format!("inverse undefined on {}", describe(mid, &y)));
        };
        let want = pm.project(&x.prefix(z.len()), back.out_level);
        if z != want {
            return Clause::fail(name, checked, pm.format(&x), format!("returns {}", mid.system().alphabet().format_word(&z.labels)));
        }
    }
    Clause::pass(name, checked)
}

/// Compares `σ^k(h(σx))` with `σ^l(h(x))` on every point of length `1..=n`;
/// the witness is the shortlex-least failure.
fn orbit_clause(
    name: &str,
    pm: &PointModel,
    h: &BlockCode,
    n: usize,
    lag: impl Fn(&Point) -> Option<(u64, u64)>,
) -> Clause {
    let mut checked = 0;
    for len in 1..=n {
        for x in pm.points(len) {
            let Some((k, l)) = lag(&x) else { continue };
            let (Some(hx), Some(hs)) = (h.apply(pm, &x), h.apply(pm, &x.shift(1))) else { continue };
            let a = hs.shift(k as usize);
            let b = hx.shift(l as usize);
            let m = a.len().min(b.len());
            if m == 0 {
                continue;
            }
            checked += 1;
            if a.prefix(m) != b.prefix(m) {
                return Clause::fail(
                    name,
                    checked,
                    pm.format(&x),
                    format!("k={k} l={l}: σ^k h(σx) and σ^l h(x) differ within {m} coordinates"),
                );
            }
        }
    }
    Clause::pass(name, checked)
}

struct Sides<'a> {
    pm1: PointModel<'a>,
    pm2: PointModel<'a>,
    out2: PointModel<'a>,
    out1: PointModel<'a>,
}

fn models<'a>(s1: &'a Lgs, s2: &'a Lgs, cert: &Certificate, extra1: usize, extra2: usize) -> Result<Sides<'a>> {
    let inv = cert.inverse()?;
    let t1 = cert.forward.key_level.max(inv.out_level).max(extra1).max(1);
    let t2 = inv.key_level.max(cert.forward.out_level).max(extra2).max(1);
    budget(s1, t1)?;
    budget(s2, t2)?;
    Ok(Sides {
        pm1: PointModel::new(s1, t1)?,
        pm2: PointModel::new(s2, t2)?,
        out2: PointModel::new(s2, cert.forward.out_level)?,
        out1: PointModel::new(s1, inv.out_level)?,
    })
}

fn code_clauses(s1: &Lgs, s2: &Lgs, cert: &Certificate, sides: &Sides, n: usize, r: &mut Report) -> Result<()> {
    let inv = cert.inverse()?;
    r.clauses.push(totality(s1, "forward-total", &cert.forward)?);
    r.clauses.push(totality(s2, "inverse-total", inv)?);
    r.clauses.push(images_admissible("forward-admissible", &cert.forward, &sides.pm1, &sides.out2, n));
    r.clauses.push(images_admissible("inverse-admissible", inv, &sides.pm2, &sides.out1, n));
    r.clauses.push(label_factor("label-factor", s1, s2, &cert.forward));
    r.clauses.push(label_factor("inverse-label-factor", s2, s1, inv));
    r.clauses.push(round_trip("inverse-after-forward", &cert.forward, inv, &sides.pm1, &sides.out2, n));
    r.clauses.push(round_trip("forward-after-inverse", inv, &cert.forward, &sides.pm2, &sides.out1, n));
    Ok(())
}

/// Checks the orbit equations with transfer functions `k_i, l_i` on all
/// points of length up to `D + max(k, l) + d`.
pub fn check_coe(s1: &Lgs, s2: &Lgs, cert: &Certificate, d: usize) -> Result<Report> {
    let (k1, l1) = cert.transfer(1)?;
    let (k2, l2) = cert.transfer(2)?;
    let inv = cert.inverse()?;
    let m = [k1, l1, k2, l2].iter().map(|f| f.max_value()).max().unwrap() as usize;
    let needed = d + m + 1;
    budget(s1, needed)?;
    budget(s2, needed)?;
    let lv1 = k1.level().max(l1.level());
    let lv2 = k2.level().max(l2.level());
    let sides = models(s1, s2, cert, lv1, lv2)?;
    let n = d + m + cert.forward.window.max(inv.window);
    let mut r = Report::default();
    r.note("depth", d);
    r.note("max transfer", m);
    r.note("points up to length", n);
    r.note("model levels", format!("{} {}", sides.pm1.level(), sides.pm2.level()));
    code_clauses(s1, s2, cert, &sides, n, &mut r)?;
    for (name, s, f) in [("k1-total", s1, k1), ("l1-total", s1, l1), ("k2-total", s2, k2), ("l2-total", s2, l2)] {
        r.clauses.push(function_totality(s, name, f)?);
    }
    let (pm1, pm2) = (&sides.pm1, &sides.pm2);
    r.clauses.push(orbit_clause("orbit-1", pm1, &cert.forward, n, |x| Some((k1.eval(pm1, x)?, l1.eval(pm1, x)?))));
    r.clauses.push(orbit_clause("orbit-2", pm2, inv, n, |x| Some((k2.eval(pm2, x)?, l2.eval(pm2, x)?))));
    Ok(r)
}

/// Checks `σ^K h(σx) = σ^{K+1} h(x)` on both sides with constants `K1, K2`.
pub fn check_eventual_conjugacy(s1: &Lgs, s2: &Lgs, cert: &Certificate, d: usize) -> Result<Report> {
    let (c1, c2) = cert.constants()?;
    let inv = cert.inverse()?;
    let m = c1.max(c2) as usize + 1;
    let needed = d + m + 1;
    budget(s1, needed)?;
    budget(s2, needed)?;
    let sides = models(s1, s2, cert, 0, 0)?;
    let n = d + m + cert.forward.window.max(inv.window);
    let mut r = Report::default();
    r.note("depth", d);
    r.note("K1 K2", format!("{c1} {c2}"));
    r.note("points up to length", n);
    code_clauses(s1, s2, cert, &sides, n, &mut r)?;
    for (name, pm, h, c) in [("eventual-1", &sides.pm1, &cert.forward, c1), ("eventual-2", &sides.pm2, inv, c2)] {
        let mut clause = Clause::pass(name, 0);
        'outer: for len in 1..=n {
            for x in pm.points(len) {
                let (Some(hx), Some(hs)) = (h.apply(pm, &x), h.apply(pm, &x.shift(1))) else { continue };
                let lhs = hs.shift(c as usize);
                let rhs = hx.shift(c as usize + 1);
                if lhs.is_empty() || rhs.is_empty() {
                    continue;
                }
                clause.checked += 1;
                let k = lhs.len().min(rhs.len());
                if lhs.labels[..k] != rhs.labels[..k] || lhs.verts[..k] != rhs.verts[..k] {
                    clause = Clause::fail(name, clause.checked, pm.format(&x), format!("K={c}: the two sides differ"));
                    break 'outer;
                }
            }
        }
        r.clauses.push(clause);
    }
    Ok(r)
}

/// A map on basic bisections, evaluated piecewise.
pub trait BisectionMap {
    fn image(&self, b: &BasicBisection) -> Result<Vec<BasicBisection>>;
}

pub struct IdentityMap;

impl BisectionMap for IdentityMap {
    fn image(&self, b: &BasicBisection) -> Result<Vec<BasicBisection>> {
        Ok(vec![b.clone()])
    }
}

/// `φ` built from a code `h` and the cocycle `c = l - k` of its transfer
/// functions.
pub struct CodeIso<'a> {
    s1: &'a Lgs,
    s2: &'a Lgs,
    code: BlockCode,
    k: CylinderFunction,
    l: CylinderFunction,
}

impl<'a> CodeIso<'a> {
    /// The map for a shift-commuting code, with `c ≡ 1`.
    pub fn conjugacy(s1: &'a Lgs, s2: &'a Lgs, code: BlockCode) -> Self {
        CodeIso { s1, s2, code, k: CylinderFunction::Constant(0), l: CylinderFunction::Constant(1) }
    }

    fn c_window(&self) -> (usize, usize) {
        (self.k.window().max(self.l.window()), self.k.level().max(self.l.level()))
    }

    /// `Σ_{i<p} c(σ^i x)` where `x` reads `word` with vertices `path`
    /// (`path[j]` at level `base + j`).
    fn c_sum(&self, word: &[usize], path: &[usize], base: usize, p: usize) -> Result<i64> {
        let (wf, lf) = self.c_window();
        let mut total = 0i64;
        for i in 0..p {
            let mut vals = [0u64; 2];
            for (slot, f) in vals.iter_mut().zip([&self.k, &self.l]) {
                *slot = match f {
                    CylinderFunction::Constant(c) => *c,
                    CylinderFunction::Table { window, level, values } => {
                        let j = i + window;
                        let v = self.s1.project(base + j, path[j], *level);
                        *values.get(&(word[i..j].to_vec(), v)).ok_or_else(|| {
                            Error::Precondition(format!("transfer function undefined on a window of length {wf} at level {lf}"))
                        })?
                    }
                };
            }
            total += vals[1] as i64 - vals[0] as i64;
        }
        Ok(total)
    }

    /// Image coordinates of a refined word with its vertex path.
    fn code_word(&self, word: &[usize], path: &[usize], base: usize) -> Result<Vec<usize>> {
        let d = self.code.window;
        if word.len() < d {
            return Ok(Vec::new());
        }
        (0..=word.len() - d)
            .map(|i| {
                let j = i + d;
                let v = self.s1.project(base + j, path[j], self.code.key_level);
                self.code.map.get(&(word[i..j].to_vec(), v)).map(|&(b, _)| b).ok_or_else(|| {
                    Error::Precondition(format!("code undefined on {}", self.s1.alphabet().format_word(&word[i..j])))
                })
            })
            .collect()
    }

    fn lag(&self, piece: &BasicBisection, p: usize, q: usize) -> Result<i64> {
        let top = piece.level();
        let pa = self.s1.backtrack(&piece.mu, top, piece.vertex.index).ok_or_else(|| Error::Inadmissible("piece".into()))?;
        let pb = self.s1.backtrack(&piece.nu, top, piece.vertex.index).ok_or_else(|| Error::Inadmissible("piece".into()))?;
        Ok(self.c_sum(&piece.mu, &pa, top - piece.mu.len(), p)? - self.c_sum(&piece.nu, &pb, top - piece.nu.len(), q)?)
    }

    /// Image of one refined piece; `spare` coordinates beyond the minimal
    /// refinement are available on each side.
    fn piece_image(&self, piece: &BasicBisection, p: usize, q: usize, spare: usize) -> Result<Vec<BasicBisection>> {
        let top = piece.level();
        let w = piece.vertex.index;
        let pa = self.s1.backtrack(&piece.mu, top, w).ok_or_else(|| Error::Inadmissible("piece".into()))?;
        let pb = self.s1.backtrack(&piece.nu, top, w).ok_or_else(|| Error::Inadmissible("piece".into()))?;
        let (ba, bb) = (top - piece.mu.len(), top - piece.nu.len());
        let mut beta = self.code_word(&piece.mu, &pa, ba)?;
        let mut beta2 = self.code_word(&piece.nu, &pb, bb)?;
        let delta = self.lag(piece, p, q)? - (p as i64 - q as i64);
        // A lag other than the length difference is realized by keeping
        // |δ| more coordinates on one side. This is exact only where the
        // shared tail is periodic; elsewhere the clauses of
        // `check_groupoid_iso` fail.
        let keep_a = beta.len() - spare + delta.max(0) as usize;
        let keep_b = beta2.len() - spare + (-delta).max(0) as usize;
        let anchor = if keep_a >= keep_b { self.selector(&piece.mu, &pa, ba, keep_a)? } else { self.selector(&piece.nu, &pb, bb, keep_b)? };
        beta.truncate(keep_a);
        beta2.truncate(keep_b);
        let level = beta.len().max(beta2.len()).max(self.code.out_level);
        budget(self.s2, level)?;
        let mut out = Vec::new();
        for v in 0..self.s2.size(level) {
            if self.s2.project(level, v, self.code.out_level) != anchor {
                continue;
            }
            let b = BasicBisection { mu: beta.clone(), vertex: VertexRef::new(level, v), nu: beta2.clone() };
            if b.is_admissible(self.s2) {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Output vertex of image coordinate `coord` (1-based).
    fn selector(&self, word: &[usize], path: &[usize], base: usize, coord: usize) -> Result<usize> {
        let d = self.code.window;
        let i = coord.checked_sub(1).ok_or_else(|| Error::Precondition("empty image word".into()))?;
        let v = self.s1.project(base + i + d, path[i + d], self.code.key_level);
        self.code
            .map
            .get(&(word[i..i + d].to_vec(), v))
            .map(|&(_, w)| w)
            .ok_or_else(|| Error::Precondition("code undefined".into()))
    }
}

impl BisectionMap for CodeIso<'_> {
    fn image(&self, b: &BasicBisection) -> Result<Vec<BasicBisection>> {
        let d = self.code.window;
        let (wf, lf) = self.c_window();
        let (p, q) = (b.mu.len(), b.nu.len());
        // At least one image coordinate on the longer side carries the anchor.
        let r0 = (d.max(1) - 1).max(wf.max(1) - 1).max(d.saturating_sub(p.max(q)));
        let refine_to = |r: usize| -> Result<Vec<BasicBisection>> {
            let level = (self.code.key_level + p + r)
                .saturating_sub(d)
                .max((lf + p + r).saturating_sub(wf))
                .max(p + r)
                .max(q + r)
                .max(b.level() + r);
            budget(self.s1, level)?;
            to_shape(self.s1, b, Shape { k: q + r, level })
        };
        // The lag depends on the first `p + wf - 1` coordinates only, so
        // one refinement pass determines how many spare coordinates are needed.
        let mut spare = 0;
        for piece in refine_to(r0)? {
            spare = spare.max((self.lag(&piece, p, q)? - (p as i64 - q as i64)).unsigned_abs() as usize);
        }
        let mut out = Vec::new();
        for piece in refine_to(r0 + spare)? {
            out.extend(self.piece_image(&piece, p, q, spare)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// The groupoid map of a certificate that passes [`check_coe`].
pub fn coe_to_groupoid_iso<'a>(s1: &'a Lgs, s2: &'a Lgs, cert: &Certificate, d: usize) -> Result<CodeIso<'a>> {
    let r = check_coe(s1, s2, cert, d)?;
    if !r.pass() {
        return Err(Error::Precondition(format!("certificate {} fails the orbit equivalence check", cert.name)));
    }
    let (k, l) = cert.transfer(1)?;
    Ok(CodeIso { s1, s2, code: cert.forward.clone(), k: k.clone(), l: l.clone() })
}

pub(crate) fn show(s: &Lgs, b: &BasicBisection) -> String {
    b.display(s.alphabet()).to_string()
}

/// Checks that `map` behaves as a groupoid isomorphism on the depth-`d`
/// universe: functoriality on every pair, units, inverses, injectivity on
/// atoms of one shape, coverage of the target atoms, and optionally
/// `c_{w2} ∘ φ = c_{w1}`.
pub fn check_groupoid_iso(
    s1: &Lgs,
    s2: &Lgs,
    map: &dyn BisectionMap,
    d: usize,
    preserve: Option<(&SymbolWeights, &SymbolWeights)>,
) -> Result<Report> {
    let dom = universe(s1, d)?;
    let mut cache: HashMap<BasicBisection, Vec<BasicBisection>> = HashMap::new();
    let mut img = |b: &BasicBisection| -> Result<Vec<BasicBisection>> {
        if let Some(v) = cache.get(b) {
            return Ok(v.clone());
        }
        let v = map.image(b)?;
        cache.insert(b.clone(), v.clone());
        Ok(v)
    };
    let mut r = Report::default();
    r.note("depth", d);
    r.note("domain bisections", dom.len());

    let mut clause = Clause::pass("functoriality", 0);
    'pairs: for b1 in &dom {
        for b2 in &dom {
            let pieces = compose(s1, b1, b2)?;
            let mut lhs = Vec::new();
            for p in &pieces {
                lhs.extend(img(p)?);
            }
            let (i1, i2) = (img(b1)?, img(b2)?);
            let mut rhs = Vec::new();
            for x in &i1 {
                for y in &i2 {
                    rhs.extend(compose(s2, x, y)?);
                }
            }
            clause.checked += 1;
            if !same_set(s2, &lhs, &rhs)? {
                clause = Clause::fail(
                    "functoriality",
                    clause.checked,
                    format!("{} ∘ {}", show(s1, b1), show(s1, b2)),
                    "φ of the product differs from the product of the images".into(),
                );
                break 'pairs;
            }
        }
    }
    r.clauses.push(clause);

    let mut units = Clause::pass("units", 0);
    let mut inverses = Clause::pass("inverses", 0);
    for b in &dom {
        let i = img(b)?;
        if b.is_unit() {
            units.checked += 1;
            if units.ok && !i.iter().all(BasicBisection::is_unit) {
                units = Clause::fail("units", units.checked, show(s1, b), "a unit maps outside the unit space".into());
            }
        }
        inverses.checked += 1;
        if inverses.ok {
            let inv_img = img(&b.inverse())?;
            let flipped: Vec<BasicBisection> = i.iter().map(BasicBisection::inverse).collect();
            if !same_set(s2, &inv_img, &flipped)? {
                inverses = Clause::fail("inverses", inverses.checked, show(s1, b), "φ(b⁻¹) ≠ φ(b)⁻¹".into());
            }
        }
    }
    r.clauses.push(units);
    r.clauses.push(inverses);

    // Atoms of one shape are pairwise disjoint, so their images must be too.
    let mut by_shape: BTreeMap<(usize, usize), Vec<BasicBisection>> = BTreeMap::new();
    for b in bisections_at(s1, d) {
        by_shape.entry((b.mu.len(), b.nu.len())).or_default().push(b);
    }
    let mut inj = Clause::pass("injective", 0);
    'shapes: for atoms in by_shape.values() {
        let mut terms = Vec::new();
        let mut owner: Vec<(BTreeSet<BasicBisection>, &BasicBisection)> = Vec::new();
        for a in atoms {
            let f = set_form(s2, &img(a)?)?;
            for (c, _) in f.cells() {
                terms.push((c.clone(), Coef::from_integer(1.into())));
            }
            owner.push((f.support(), a));
        }
        inj.checked += atoms.len();
        let total = fine_form_at(s2, &terms, &BTreeMap::new())?;
        let overlap = total.cells().find(|(_, c)| **c > Coef::from_integer(1.into())).map(|(b, _)| b.clone());
        if let Some(cell) = overlap {
            let hits: Vec<&BasicBisection> = owner
                .iter()
                .filter(|(sup, _)| {
                    let fam: Vec<BasicBisection> = sup.iter().cloned().collect();
                    crate::fine::subset(s2, std::slice::from_ref(&cell), &fam).unwrap_or(false)
                })
                .map(|(_, a)| *a)
                .collect();
            let names: Vec<String> = hits.iter().map(|a| show(s1, a)).collect();
            inj = Clause::fail(
                "injective",
                inj.checked,
                names.join(" | "),
                format!("images overlap on {}", show(s2, &cell)),
            );
            break 'shapes;
        }
    }
    r.clauses.push(inj);

    let mut all = Vec::new();
    for b in &dom {
        all.extend(img(b)?);
    }
    let targets = bisections_at(s2, d.min(s2.depth()));
    let mut floor: BTreeMap<i64, Shape> = BTreeMap::new();
    for t in &targets {
        floor = join(&floor, &BTreeMap::from([(t.degree(), Shape { k: t.nu.len(), level: t.level() })]));
    }
    let cover = set_form_at(s2, &all, &floor)?;
    let mut cov = Clause::pass("coverage", 0);
    for t in &targets {
        cov.checked += 1;
        let Some((sh, cells)) = cover.get(&t.degree()) else {
            cov = Clause::fail("coverage", cov.checked, show(s2, t), "no image has this degree".into());
            break;
        };
        let pieces = to_shape(s2, t, *sh)?;
        if let Some(miss) = pieces.iter().find(|p| !cells.contains(*p)) {
            cov = Clause::fail("coverage", cov.checked, show(s2, t), format!("{} is not in any image", show(s2, miss)));
            break;
        }
    }
    r.clauses.push(cov);

    if let Some((w1, w2)) = preserve {
        let mut c = Clause::pass("cocycle", 0);
        'all: for b in &dom {
            let want = cocycle_value(w1, b);
            for i in img(b)? {
                c.checked += 1;
                let got = cocycle_value(w2, &i);
                if got != want {
                    c = Clause::fail(
                        "cocycle",
                        c.checked,
                        show(s1, b),
                        format!("c₁ = {want} but c₂ = {got} on {}", show(s2, &i)),
                    );
                    break 'all;
                }
            }
        }
        r.clauses.push(c);
    }
    Ok(r)
}

fn set_form_at(
    s: &Lgs,
    family: &[BasicBisection],
    floor: &BTreeMap<i64, Shape>,
) -> Result<BTreeMap<i64, (Shape, BTreeSet<BasicBisection>)>> {
    let terms: Vec<(BasicBisection, Coef)> =
        family.iter().map(|b| (b.clone(), Coef::from_integer(1.into()))).collect();
    let f = fine_form_at(s, &terms, floor)?;
    Ok(f.groups.into_iter().map(|(d, (sh, cells))| (d, (sh, cells.into_keys().collect()))).collect())
}
