//! Canonical fine forms for weighted families of basic bisections.
//!
//! Within one degree `n`, every bisection is refined by
//! `U(μ,v,ν) = ⊔_e U(μλ(e), t(e), νλ(e))` until `|ν| = K`, then raised by
//! `U(μ,v_i^l,ν) = ⊔_{ι(j)=i} U(μ,v_j^{l+1},ν)` to a common level `L`. Cells of
//! one shape `(n, K, L)` are pairwise disjoint, so two families describe the
//! same weighted set exactly when their forms at a common shape agree.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::groupoid::BasicBisection;
use crate::system::{Lgs, VertexRef};

pub type Coef = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    /// Length of `ν`.
    pub k: usize,
    pub level: usize,
}

/// Degree → (shape, cell coefficients). Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FineForm {
    pub groups: BTreeMap<i64, (Shape, BTreeMap<BasicBisection, Coef>)>,
}

impl FineForm {
    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn shapes(&self) -> BTreeMap<i64, Shape> {
        self.groups.iter().map(|(&d, (sh, _))| (d, *sh)).collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&BasicBisection, &Coef)> {
        self.groups.values().flat_map(|(_, m)| m.iter())
    }

    pub fn support(&self) -> BTreeSet<BasicBisection> {
        self.cells().map(|(b, _)| b.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(|(_, m)| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }
}

/// One refinement step (the level goes up by one).
pub fn refine(s: &Lgs, b: &BasicBisection) -> Result<Vec<BasicBisection>> {
    let VertexRef { level, index } = b.vertex;
    if level + 1 > s.depth() {
        return Err(Error::DepthBudget { needed: level + 1, depth: s.depth() });
    }
    let mut out = Vec::new();
    for &(a, t) in s.out_edges(level, index) {
        let mut mu = b.mu.clone();
        mu.push(a);
        let mut nu = b.nu.clone();
        nu.push(a);
        let piece = BasicBisection { mu, vertex: VertexRef::new(level + 1, t), nu };
        if piece.is_admissible(s) {
            out.push(piece);
        }
    }
    Ok(out)
}

/// One raising step, dropping empty cells.
pub fn raise(s: &Lgs, b: &BasicBisection) -> Result<Vec<BasicBisection>> {
    let VertexRef { level, index } = b.vertex;
    if level + 1 > s.depth() {
        return Err(Error::DepthBudget { needed: level + 1, depth: s.depth() });
    }
    Ok((0..s.size(level + 1))
        .filter(|&j| s.iota(level, j) == index)
        .map(|j| BasicBisection { mu: b.mu.clone(), vertex: VertexRef::new(level + 1, j), nu: b.nu.clone() })
        .filter(|p| p.is_admissible(s))
        .collect())
}

/// The cells of shape `(k, level)` partitioning `b`.
pub fn to_shape(s: &Lgs, b: &BasicBisection, shape: Shape) -> Result<Vec<BasicBisection>> {
    if b.nu.len() > shape.k {
        return Err(Error::Invalid(format!("cannot coarsen |ν| = {} to {}", b.nu.len(), shape.k)));
    }
    let steps = shape.k - b.nu.len();
    let needed = b.level() + steps;
    if needed > shape.level {
        return Err(Error::Invalid(format!("shape level {} below the required {needed}", shape.level)));
    }
    if shape.level > s.depth() {
        return Err(Error::DepthBudget { needed: shape.level, depth: s.depth() });
    }
    let mut cur = vec![b.clone()];
    for _ in 0..steps {
        let mut next = Vec::new();
        for c in &cur {
            next.extend(refine(s, c)?);
        }
        cur = next;
    }
    for _ in needed..shape.level {
        let mut next = Vec::new();
        for c in &cur {
            next.extend(raise(s, c)?);
        }
        cur = next;
    }
    Ok(cur)
}

/// The smallest shape per degree accommodating every term and `at_least`.
fn shapes_for<'a>(
    terms: impl Iterator<Item = &'a BasicBisection>,
    at_least: &BTreeMap<i64, Shape>,
) -> BTreeMap<i64, Shape> {
    let mut by_deg: BTreeMap<i64, Vec<&BasicBisection>> = BTreeMap::new();
    for b in terms {
        by_deg.entry(b.degree()).or_default().push(b);
    }
    let mut out = at_least.clone();
    for (d, bs) in by_deg {
        let floor = at_least.get(&d).copied().unwrap_or(Shape { k: 0, level: 0 });
        let k = bs.iter().map(|b| b.nu.len()).max().unwrap().max(floor.k);
        let level = bs.iter().map(|b| b.level() + k - b.nu.len()).max().unwrap().max(floor.level + k - floor.k);
        out.insert(d, Shape { k, level });
    }
    out
}

/// Canonical form of `Σ c_b χ_b`, at shapes no smaller than `at_least`.
pub fn fine_form_at(s: &Lgs, terms: &[(BasicBisection, Coef)], at_least: &BTreeMap<i64, Shape>) -> Result<FineForm> {
    let shapes = shapes_for(terms.iter().map(|(b, _)| b), at_least);
    let mut groups: BTreeMap<i64, (Shape, BTreeMap<BasicBisection, Coef>)> = BTreeMap::new();
    for (b, c) in terms {
        if c.is_zero() {
            continue;
        }
        let sh = shapes[&b.degree()];
        let cells = &mut groups.entry(b.degree()).or_insert_with(|| (sh, BTreeMap::new())).1;
        for cell in to_shape(s, b, sh)? {
            *cells.entry(cell).or_insert_with(Coef::zero) += c;
        }
    }
    for (_, cells) in groups.values_mut() {
        cells.retain(|_, c| !c.is_zero());
    }
    groups.retain(|_, (_, cells)| !cells.is_empty());
    Ok(FineForm { groups })
}

pub fn fine_form(s: &Lgs, terms: &[(BasicBisection, Coef)]) -> Result<FineForm> {
    fine_form_at(s, terms, &BTreeMap::new())
}

/// Re-expresses a form at shapes no smaller than `at_least`.
pub fn reshape(s: &Lgs, f: &FineForm, at_least: &BTreeMap<i64, Shape>) -> Result<FineForm> {
    let terms: Vec<(BasicBisection, Coef)> = f.cells().map(|(b, c)| (b.clone(), c.clone())).collect();
    fine_form_at(s, &terms, &join(at_least, &f.shapes()))
}

/// The least shape per degree that both inputs refine to; raising `k` by
/// one raises the level by one.
pub fn join(a: &BTreeMap<i64, Shape>, b: &BTreeMap<i64, Shape>) -> BTreeMap<i64, Shape> {
    let mut out = a.clone();
    for (&d, &sh) in b {
        let e = out.entry(d).or_insert(sh);
        let k = e.k.max(sh.k);
        e.level = (e.level + k - e.k).max(sh.level + k - sh.k);
        e.k = k;
    }
    out
}

/// Both forms expressed at their joint shapes.
pub fn align(s: &Lgs, a: &FineForm, b: &FineForm) -> Result<(FineForm, FineForm)> {
    let shapes = join(&a.shapes(), &b.shapes());
    Ok((reshape(s, a, &shapes)?, reshape(s, b, &shapes)?))
}

/// The union of a family as a 0/1 form.
pub fn set_form(s: &Lgs, family: &[BasicBisection]) -> Result<FineForm> {
    let terms: Vec<(BasicBisection, Coef)> = family.iter().map(|b| (b.clone(), Coef::one())).collect();
    let mut f = fine_form(s, &terms)?;
    for (_, cells) in f.groups.values_mut() {
        for c in cells.values_mut() {
            *c = Coef::one();
        }
    }
    Ok(f)
}

fn aligned_sets(s: &Lgs, a: &[BasicBisection], b: &[BasicBisection]) -> Result<(BTreeSet<BasicBisection>, BTreeSet<BasicBisection>)> {
    let (fa, fb) = align(s, &set_form(s, a)?, &set_form(s, b)?)?;
    Ok((fa.support(), fb.support()))
}

pub fn same_set(s: &Lgs, a: &[BasicBisection], b: &[BasicBisection]) -> Result<bool> {
    let (x, y) = aligned_sets(s, a, b)?;
    Ok(x == y)
}

pub fn disjoint(s: &Lgs, a: &[BasicBisection], b: &[BasicBisection]) -> Result<bool> {
    let (x, y) = aligned_sets(s, a, b)?;
    Ok(x.is_disjoint(&y))
}

/// Whether `inner ⊆ outer`.
pub fn subset(s: &Lgs, inner: &[BasicBisection], outer: &[BasicBisection]) -> Result<bool> {
    let (x, y) = aligned_sets(s, inner, outer)?;
    Ok(x.is_subset(&y))
}

/// Whether the family has no overlaps (every cell covered exactly once).
pub fn is_disjoint_family(s: &Lgs, family: &[BasicBisection]) -> Result<bool> {
    let terms: Vec<(BasicBisection, Coef)> = family.iter().map(|b| (b.clone(), Coef::one())).collect();
    Ok(fine_form(s, &terms)?.cells().all(|(_, c)| c.is_one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::groupoid::{compose, universe};

    fn flat_compose(s: &Lgs, xs: &[BasicBisection], ys: &[BasicBisection]) -> Vec<BasicBisection> {
        let mut out = Vec::new();
        for x in xs {
            for y in ys {
                out.extend(compose(s, x, y).unwrap());
            }
        }
        out
    }

    #[test]
    fn refinement_preserves_the_set() {
        for s in examples::reference_systems(5) {
            for b in universe(&s, 2).unwrap() {
                let cells = to_shape(&s, &b, Shape { k: b.nu.len() + 1, level: b.level() + 2 }).unwrap();
                assert!(same_set(&s, std::slice::from_ref(&b), &cells).unwrap());
                assert!(is_disjoint_family(&s, &cells).unwrap());
            }
        }
    }

    #[test]
    fn cells_of_a_shape_are_disjoint() {
        let s = examples::even(4);
        let u = crate::groupoid::bisections_at(&s, 3);
        for x in &u {
            for y in &u {
                if x != y && x.mu.len() == y.mu.len() && x.nu.len() == y.nu.len() {
                    assert!(disjoint(&s, std::slice::from_ref(x), std::slice::from_ref(y)).unwrap());
                }
            }
        }
    }

    fn associates(s: &Lgs, x: &BasicBisection, y: &BasicBisection, z: &BasicBisection) -> bool {
        let left = flat_compose(s, &compose(s, x, y).unwrap(), std::slice::from_ref(z));
        let right = flat_compose(s, std::slice::from_ref(x), &compose(s, y, z).unwrap());
        same_set(s, &left, &right).unwrap()
    }

    #[test]
    fn composition_is_associative() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for s in examples::reference_systems(10) {
            let small = universe(&s, 1).unwrap();
            for x in &small {
                for y in &small {
                    for z in &small {
                        assert!(associates(&s, x, y, z), "{x:?} {y:?} {z:?}");
                    }
                }
            }
            let u = universe(&s, 3).unwrap();
            for _ in 0..300 {
                let (x, y, z) = (u.choose(&mut rng).unwrap(), u.choose(&mut rng).unwrap(), u.choose(&mut rng).unwrap());
                assert!(associates(&s, x, y, z), "{x:?} {y:?} {z:?}");
            }
        }
    }

    #[test]
    fn product_with_inverse_is_the_range_unit() {
        for s in examples::reference_systems(8) {
            for b in universe(&s, 3).unwrap() {
                let p = compose(&s, &b, &b.inverse()).unwrap();
                let unit = BasicBisection { mu: b.mu.clone(), vertex: b.vertex, nu: b.mu.clone() };
                assert!(same_set(&s, &p, &[unit]).unwrap());
                assert!(p.iter().all(BasicBisection::is_unit));
            }
        }
    }

    #[test]
    fn weighted_forms_cancel() {
        let s = examples::full2(3);
        let a = BasicBisection::parse(&s, "a,v(1,1),a").unwrap();
        let b = BasicBisection::parse(&s, "b,v(1,1),b").unwrap();
        let one = BasicBisection::parse(&s, ",v(0,1),").unwrap();
        let f = fine_form(&s, &[(a, Coef::one()), (b, Coef::one()), (one, -Coef::one())]).unwrap();
        assert!(f.is_zero());
    }
}
