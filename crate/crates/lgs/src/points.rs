//! Finite prefixes of points of `X_𝔏` seen at a fixed level `T`.
//!
//! A point is a sequence `(α_i, u_i)` with `u_i ∈ V_T`, where an `α_1`-edge
//! enters `u_1` and consecutive coordinates are joined in the compressed graph
//! `G_T`: `u → w` labeled `α` whenever `ι(u) → w` is an `α`-edge of
//! `E_{T-1,T}`. The shift drops the first coordinate. Every vertex of `G_T`
//! has a successor, so each prefix extends to an infinite path.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::system::{Lgs, Sym, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub labels: Word,
    /// Vertex indices at the model level.
    pub verts: Vec<usize>,
}

impl Point {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn shift(&self, k: usize) -> Point {
        let k = k.min(self.len());
        Point { labels: self.labels[k..].to_vec(), verts: self.verts[k..].to_vec() }
    }

    pub fn prefix(&self, n: usize) -> Point {
        let n = n.min(self.len());
        Point { labels: self.labels[..n].to_vec(), verts: self.verts[..n].to_vec() }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex on labels, then on vertices.
impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.labels.cmp(&other.labels))
            .then_with(|| self.verts.cmp(&other.verts))
    }
}

pub struct PointModel<'a> {
    s: &'a Lgs,
    level: usize,
    starts: Vec<(Sym, usize)>,
    succ: Vec<Vec<(Sym, usize)>>,
}

impl<'a> PointModel<'a> {
    pub fn new(s: &'a Lgs, level: usize) -> Result<Self> {
        if level == 0 || level > s.depth() {
            return Err(Error::DepthBudget { needed: level.max(1), depth: s.depth() });
        }
        let m = s.size(level);
        let mut starts = Vec::new();
        for u in 0..m {
            for a in 0..s.alphabet().len() {
                if s.has_in_label(level, u, a) {
                    starts.push((a, u));
                }
            }
        }
        starts.sort();
        let mut succ = Vec::with_capacity(m);
        for u in 0..m {
            let mut out: Vec<(Sym, usize)> = s.out_edges(level - 1, s.iota(level - 1, u)).to_vec();
            out.sort();
            out.dedup();
            succ.push(out);
        }
        Ok(PointModel { s, level, starts, succ })
    }

    pub fn system(&self) -> &Lgs {
        self.s
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn successors(&self, u: usize) -> &[(Sym, usize)] {
        &self.succ[u]
    }

    pub fn is_point(&self, p: &Point) -> bool {
        if p.labels.len() != p.verts.len() {
            return false;
        }
        let Some((&a, &u)) = p.labels.first().zip(p.verts.first()) else { return true };
        if !self.starts.contains(&(a, u)) {
            return false;
        }
        (1..p.len()).all(|i| self.succ[p.verts[i - 1]].contains(&(p.labels[i], p.verts[i])))
    }

    /// All points of length `n`, in shortlex order.
    pub fn points(&self, n: usize) -> Vec<Point> {
        if n == 0 {
            return vec![Point { labels: Vec::new(), verts: Vec::new() }];
        }
        let mut cur: Vec<Point> =
            self.starts.iter().map(|&(a, u)| Point { labels: vec![a], verts: vec![u] }).collect();
        for _ in 1..n {
            cur = self.extend(&cur);
        }
        cur.sort();
        cur
    }

    /// One-coordinate extensions of each point.
    pub fn extend(&self, pts: &[Point]) -> Vec<Point> {
        let mut out = Vec::new();
        for p in pts {
            let last = *p.verts.last().expect("extend needs non-empty points");
            for &(a, w) in &self.succ[last] {
                let mut q = p.clone();
                q.labels.push(a);
                q.verts.push(w);
                out.push(q);
            }
        }
        out
    }

    /// Vertex of coordinate `i` (0-based) projected to level `l`.
    pub fn vertex_at(&self, p: &Point, i: usize, l: usize) -> usize {
        self.s.project(self.level, p.verts[i], l)
    }

    /// Projects every vertex to level `l`.
    pub fn project(&self, p: &Point, l: usize) -> Point {
        Point { labels: p.labels.clone(), verts: p.verts.iter().map(|&v| self.s.project(self.level, v, l)).collect() }
    }

    pub fn format(&self, p: &Point) -> String {
        self.s.alphabet().format_word(&p.labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::language::words;

    #[test]
    fn labels_of_points_are_the_language() {
        for s in examples::reference_systems(4) {
            let pm = PointModel::new(&s, 3).unwrap();
            for n in 1..=4 {
                let mut got: Vec<Word> = pm.points(n).into_iter().map(|p| p.labels).collect();
                got.dedup();
                got.sort();
                got.dedup();
                let want: Vec<Word> = words(&s, n).unwrap();
                assert_eq!(got, want, "{} n={n}", s.name());
            }
        }
    }

    #[test]
    fn shifted_points_are_points() {
        for s in examples::reference_systems(3) {
            let pm = PointModel::new(&s, 3).unwrap();
            for p in pm.points(4) {
                assert!(pm.is_point(&p));
                assert!(pm.is_point(&p.shift(1)));
                assert!(pm.is_point(&p.prefix(2)));
            }
        }
    }

    #[test]
    fn golden_points_follow_the_graph() {
        let s = examples::golden(3);
        let pm = PointModel::new(&s, 2).unwrap();
        assert_eq!(pm.points(2).len(), 5);
        assert_eq!(pm.format(&pm.points(2)[1]), "αβ");
    }
}
