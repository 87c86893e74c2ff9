//! Exact construction of the Newton polyhedron 𝒩(φ) and the floor functional.
//!
//! Facets are found the old-fashioned way: every nonsingular system made of
//! `α·w = 1` rows (α an extreme point) and `w_i = 0` rows is solved, and a
//! candidate survives when it supports the whole support and cuts out a
//! (d−1)-dimensional face. Faces are then the closure of the facets under
//! intersection, each represented by the support points it contains together
//! with the coordinate directions it recedes along.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, LpOutcome};
use crate::phase::{Multidegree, Phase};
use crate::rational::{dot, dot_int, format_rational, from_exponents, q, serde_q, serde_qvecvec, Q};

/// A compact face of 𝒩(φ).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    pub dim: usize,
    /// Extreme points of 𝒩(φ) lying on the face.
    pub vertices: Vec<Multidegree>,
    /// Indices into [`NewtonPolyhedron::facet_normals`] of the facets containing the face.
    pub facets: Vec<usize>,
    /// Every support point of the phase lying on the face.
    #[serde(skip)]
    pub support_points: Vec<Multidegree>,
}

impl Face {
    pub fn contains(&self, alpha: &Multidegree) -> bool {
        self.support_points.contains(alpha)
    }

    pub fn label(&self) -> String {
        let vs: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        format!("{{{}}}", vs.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolyhedron {
    dim: usize,
    support: Vec<Multidegree>,
    extreme_points: Vec<Multidegree>,
    facet_normals: Vec<Vec<Q>>,
    compact_faces: Vec<Face>,
    convenient: bool,
}

/// A face during lattice closure: support points on it and the axes it recedes along.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct RawFace {
    points: BTreeSet<usize>,
    rec: BTreeSet<usize>,
}

impl NewtonPolyhedron {
    pub fn build(phase: &Phase) -> Result<NewtonPolyhedron> {
        NewtonPolyhedron::from_support(phase.dimension(), &phase.support())
    }

    /// Builds 𝒩 from a bare list of multidegrees (duplicates are ignored).
    pub fn from_support(dim: usize, support: &[Multidegree]) -> Result<NewtonPolyhedron> {
        if support.is_empty() {
            return Err(Error::EmptyPhase);
        }
        if let Some(bad) = support.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        let support: Vec<Multidegree> = support.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let extreme_points: Vec<Multidegree> = support.iter().filter(|a| is_extreme(a, &support)).cloned().collect();
        let facet_normals = enumerate_facets(dim, &support, &extreme_points);
        if facet_normals.is_empty() {
            return Err(Error::NoFacets);
        }
        let convenient = (0..dim).all(|i| {
            support
                .iter()
                .any(|a| a.0.iter().enumerate().all(|(j, &e)| (j == i) == (e > 0)))
        });
        let mut poly = NewtonPolyhedron {
            dim,
            support,
            extreme_points,
            facet_normals,
            compact_faces: Vec::new(),
            convenient,
        };
        poly.compact_faces = poly.enumerate_compact_faces();
        Ok(poly)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[Multidegree] {
        &self.support
    }

    pub fn extreme_points(&self) -> &[Multidegree] {
        &self.extreme_points
    }

    /// The facet normals W, in descending lexicographic order.
    pub fn facet_normals(&self) -> &[Vec<Q>] {
        &self.facet_normals
    }

    pub fn compact_faces(&self) -> &[Face] {
        &self.compact_faces
    }

    pub fn is_convenient(&self) -> bool {
        self.convenient
    }

    /// `min_{w∈W} α·w` together with the indices of the minimizing normals.
    pub fn floor_functional(&self, alpha: &[Q]) -> Result<(Q, Vec<usize>)> {
        self.check_dim(alpha.len())?;
        if alpha.iter().any(|a| a.is_negative()) {
            return Err(Error::Invalid("floor functional needs a nonnegative argument".into()));
        }
        let mut best: Option<Q> = None;
        let mut argmin = Vec::new();
        for (k, w) in self.facet_normals.iter().enumerate() {
            let v = dot(alpha, w);
            match &best {
                Some(b) if v > *b => {}
                Some(b) if v == *b => argmin.push(k),
                _ => {
                    best = Some(v);
                    argmin = vec![k];
                }
            }
        }
        best.map(|b| (b, argmin)).ok_or(Error::NoFacets)
    }

    pub fn floor_of_multidegree(&self, alpha: &Multidegree) -> Result<(Q, Vec<usize>)> {
        self.floor_functional(&from_exponents(&alpha.0))
    }

    /// ⌊β+𝟙⌋ and 𝐧(β+𝟙).
    pub fn floor_shifted(&self, beta: &Multidegree) -> Result<(Q, Vec<usize>)> {
        self.floor_functional(&beta.plus_ones())
    }

    /// t = 1/⌊𝟙⌋.
    pub fn newton_distance(&self) -> Result<Q> {
        let (f, _) = self.floor_functional(&vec![Q::one(); self.dim])?;
        if f.is_zero() {
            return Err(Error::ZeroFloor("(1,...,1)".into()));
        }
        Ok(f.recip())
    }

    /// min{d, |𝐧(β+𝟙)|}: the largest codimension of a face containing (β+𝟙)/⌊β+𝟙⌋.
    pub fn codim_of_point(&self, beta: &Multidegree) -> Result<usize> {
        let (f, n) = self.floor_shifted(beta)?;
        if f.is_zero() {
            return Err(Error::ZeroFloor(beta.to_string()));
        }
        Ok(n.len().min(self.dim))
    }

    /// True iff ξ·w = 1 and every support point satisfies α·w ≥ 1.
    pub fn supporting_check(&self, w: &[Q], xi: &[Q]) -> Result<bool> {
        self.check_dim(w.len())?;
        self.check_dim(xi.len())?;
        if w.iter().any(|x| x.is_negative()) || w.iter().all(|x| x.is_zero()) {
            return Err(Error::Invalid(
                "supporting normal must be nonnegative and nonzero".into(),
            ));
        }
        if dot(xi, w) != Q::one() {
            return Ok(false);
        }
        Ok(self.support.iter().all(|a| dot_int(&a.0, w) >= Q::one()))
    }

    /// Membership in 𝒩 via the facet inequalities and ξ ≥ 0.
    pub fn contains(&self, xi: &[Q]) -> bool {
        xi.iter().all(|x| !x.is_negative()) && self.facet_normals.iter().all(|w| dot(xi, w) >= Q::one())
    }

    pub fn contains_lattice_point(&self, a: &[u32]) -> bool {
        self.facet_normals.iter().all(|w| dot_int(a, w) >= Q::one())
    }

    /// Lattice points of 𝒩 ∩ ℕ^d with total degree at most `max_total`.
    pub fn lattice_points(&self, max_total: u32) -> Vec<Multidegree> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.dim];
        fn rec(p: &NewtonPolyhedron, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Multidegree>) {
            if i == cur.len() {
                if p.contains_lattice_point(cur) {
                    out.push(Multidegree(cur.clone()));
                }
                return;
            }
            for v in 0..=left {
                cur[i] = v;
                rec(p, i + 1, left - v, cur, out);
            }
            cur[i] = 0;
        }
        rec(self, 0, max_total, &mut cur, &mut out);
        out
    }

    /// Index of the compact face whose support points are exactly `points`.
    pub fn face_index(&self, face: &Face) -> Result<usize> {
        self.compact_faces
            .iter()
            .position(|f| f.vertices == face.vertices)
            .ok_or(Error::FaceNotInLattice)
    }

    /// Compact faces not strictly contained in another compact face.
    pub fn maximal_compact_faces(&self) -> Vec<&Face> {
        self.compact_faces
            .iter()
            .filter(|f| {
                !self.compact_faces.iter().any(|g| {
                    g.support_points.len() > f.support_points.len()
                        && f.support_points.iter().all(|a| g.support_points.contains(a))
                })
            })
            .collect()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    fn enumerate_compact_faces(&self) -> Vec<Face> {
        let d = self.dim;
        let mut facets: Vec<RawFace> = Vec::new();
        for w in &self.facet_normals {
            facets.push(RawFace {
                points: (0..self.support.len())
                    .filter(|&k| dot_int(&self.support[k].0, w) == Q::one())
                    .collect(),
                rec: (0..d).filter(|&i| w[i].is_zero()).collect(),
            });
        }
        for i in 0..d {
            let points: BTreeSet<usize> = (0..self.support.len()).filter(|&k| self.support[k].0[i] == 0).collect();
            if !points.is_empty() {
                facets.push(RawFace {
                    points,
                    rec: (0..d).filter(|&j| j != i).collect(),
                });
            }
        }
        let mut seen: BTreeSet<RawFace> = facets.iter().cloned().collect();
        let mut queue: Vec<RawFace> = facets.clone();
        while let Some(f) = queue.pop() {
            for g in &facets {
                let points: BTreeSet<usize> = f.points.intersection(&g.points).copied().collect();
                if points.is_empty() {
                    continue;
                }
                let h = RawFace {
                    points,
                    rec: f.rec.intersection(&g.rec).copied().collect(),
                };
                if seen.insert(h.clone()) {
                    queue.push(h);
                }
            }
        }
        // A face may arise with different recession sets only if the support
        // points coincide; keep the smallest recession set per point set.
        let mut by_points: HashMap<BTreeSet<usize>, BTreeSet<usize>> = HashMap::new();
        for f in seen {
            by_points
                .entry(f.points)
                .and_modify(|r| {
                    if f.rec.is_subset(r) {
                        *r = f.rec.clone();
                    }
                })
                .or_insert(f.rec);
        }
        let mut faces: Vec<Face> = by_points
            .into_iter()
            .filter(|(_, rec)| rec.is_empty())
            .map(|(points, _)| {
                let support_points: Vec<Multidegree> = points.iter().map(|&k| self.support[k].clone()).collect();
                let vertices: Vec<Multidegree> = support_points
                    .iter()
                    .filter(|a| self.extreme_points.contains(a))
                    .cloned()
                    .collect();
                let dim = affine_dimension(&vertices);
                let facets = (0..self.facet_normals.len())
                    .filter(|&k| {
                        support_points
                            .iter()
                            .all(|a| dot_int(&a.0, &self.facet_normals[k]) == Q::one())
                    })
                    .collect();
                Face {
                    dim,
                    vertices,
                    facets,
                    support_points,
                }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.vertices.cmp(&b.vertices)));
        faces
    }

    pub fn report(&self) -> PolyhedronReport {
        PolyhedronReport {
            extreme_points: self.extreme_points.clone(),
            facet_normals: self.facet_normals.clone(),
            newton_distance: self.newton_distance().ok(),
            convenient: self.convenient,
            compact_faces: self.compact_faces.clone(),
        }
    }
}

/// Serialized form of a polyhedron.
#[derive(Debug, Clone, Serialize)]
pub struct PolyhedronReport {
    pub extreme_points: Vec<Multidegree>,
    #[serde(with = "serde_qvecvec")]
    pub facet_normals: Vec<Vec<Q>>,
    #[serde(serialize_with = "serialize_opt_q")]
    pub newton_distance: Option<Q>,
    pub convenient: bool,
    pub compact_faces: Vec<Face>,
}

fn serialize_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => serde_q::serialize(v, s),
        None => s.serialize_none(),
    }
}

/// Whether α is not in conv(others) + ℝ≥^d, decided by exact LP feasibility.
fn is_extreme(alpha: &Multidegree, support: &[Multidegree]) -> bool {
    let others: Vec<&Multidegree> = support.iter().filter(|b| *b != alpha).collect();
    if others.is_empty() {
        return true;
    }
    let target = from_exponents(&alpha.0);
    !in_hull_plus_orthant(&target, &others)
}

/// Exact LP test for ξ = Σ λ_k α_k + γ with λ ≥ 0, Σλ = 1, γ ≥ 0.
pub fn in_hull_plus_orthant(xi: &[Q], points: &[&Multidegree]) -> bool {
    let d = xi.len();
    let m = points.len();
    let n = m + d;
    let mut a: Vec<Vec<Q>> = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut row = vec![Q::zero(); n];
        for (k, p) in points.iter().enumerate() {
            row[k] = q(p.0[i] as i64);
        }
        row[m + i] = Q::one();
        a.push(row);
    }
    let mut sum_row = vec![Q::zero(); n];
    for x in sum_row.iter_mut().take(m) {
        *x = Q::one();
    }
    a.push(sum_row);
    let mut b: Vec<Q> = xi.to_vec();
    b.push(Q::one());
    !matches!(linalg::minimize(&vec![Q::zero(); n], &a, &b), LpOutcome::Infeasible)
}

fn enumerate_facets(dim: usize, support: &[Multidegree], extreme: &[Multidegree]) -> Vec<Vec<Q>> {
    let mut found: BTreeSet<Vec<Q>> = BTreeSet::new();
    let ext_q: Vec<Vec<Q>> = extreme.iter().map(|a| from_exponents(&a.0)).collect();
    for k in 1..=dim.min(extreme.len()) {
        for subset in (0..extreme.len()).combinations(k) {
            for zeros in (0..dim).combinations(dim - k) {
                let mut rows: Vec<Vec<Q>> = subset.iter().map(|&s| ext_q[s].clone()).collect();
                let mut rhs = vec![Q::one(); k];
                for &z in &zeros {
                    let mut e = vec![Q::zero(); dim];
                    e[z] = Q::one();
                    rows.push(e);
                    rhs.push(Q::zero());
                }
                let Some(w) = linalg::solve(&rows, &rhs) else {
                    continue;
                };
                if found.contains(&w) || w.iter().any(|x| x.is_negative()) {
                    continue;
                }
                if is_facet(dim, support, &w) {
                    found.insert(w);
                }
            }
        }
    }
    found.into_iter().rev().collect()
}

/// `w` supports 𝒩 and {ξ ∈ 𝒩 : ξ·w = 1} has dimension d−1.
fn is_facet(dim: usize, support: &[Multidegree], w: &[Q]) -> bool {
    let mut on: Vec<Vec<Q>> = Vec::new();
    for a in support {
        let v = dot_int(&a.0, w);
        if v < Q::one() {
            return false;
        }
        if v == Q::one() {
            on.push(from_exponents(&a.0));
        }
    }
    let Some(base) = on.first().cloned() else {
        return false;
    };
    let mut dirs: Vec<Vec<Q>> = on[1..]
        .iter()
        .map(|p| p.iter().zip(&base).map(|(x, y)| x - y).collect())
        .collect();
    for i in 0..dim {
        if w[i].is_zero() {
            let mut e = vec![Q::zero(); dim];
            e[i] = Q::one();
            dirs.push(e);
        }
    }
    linalg::rank(&dirs) == dim - 1
}

/// Affine dimension of a finite point set (0 for a single point).
pub fn affine_dimension(points: &[Multidegree]) -> usize {
    let Some(base) = points.first() else {
        return 0;
    };
    let dirs: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.0.iter().zip(&base.0).map(|(&x, &y)| q(x as i64 - y as i64)).collect())
        .collect();
    linalg::rank(&dirs)
}

/// Human-readable normal, e.g. `(1/4,1/4)`.
pub fn format_normal(w: &[Q]) -> String {
    format!("({})", w.iter().map(format_rational).join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn poly(d: usize, terms: &[&[u32]]) -> NewtonPolyhedron {
        let t: Vec<(&[u32], i64)> = terms.iter().map(|a| (*a, 1)).collect();
        NewtonPolyhedron::build(&Phase::from_int_terms(d, &t).unwrap()).unwrap()
    }

    fn md(v: &[u32]) -> Multidegree {
        Multidegree(v.to_vec())
    }

    #[test]
    fn fig2_polyhedron() {
        let n = poly(2, &[&[2, 2], &[1, 3], &[4, 5]]);
        assert_eq!(
            n.facet_normals(),
            &[vec![q(1), q(0)], vec![qf(1, 4), qf(1, 4)], vec![q(0), qf(1, 2)]]
        );
        assert_eq!(n.extreme_points(), &[md(&[1, 3]), md(&[2, 2])]);
        let faces: Vec<(usize, Vec<Multidegree>)> =
            n.compact_faces().iter().map(|f| (f.dim, f.vertices.clone())).collect();
        assert_eq!(
            faces,
            vec![
                (0, vec![md(&[1, 3])]),
                (0, vec![md(&[2, 2])]),
                (1, vec![md(&[1, 3]), md(&[2, 2])]),
            ]
        );
        assert_eq!(n.compact_faces()[0].facets, vec![0, 1]);
        assert_eq!(n.compact_faces()[2].facets, vec![1]);
        assert!(!n.is_convenient());
        assert_eq!(n.newton_distance().unwrap(), q(2));
    }

    #[test]
    fn fig3_polyhedron() {
        let n = poly(2, &[&[5, 0], &[0, 4], &[4, 1]]);
        assert_eq!(n.facet_normals(), &[vec![qf(1, 5), qf(1, 4)]]);
        assert_eq!(n.extreme_points(), &[md(&[0, 4]), md(&[5, 0])]);
        assert!(n.is_convenient());
        assert_eq!(n.newton_distance().unwrap(), qf(20, 9));
        let (v, arg) = n.floor_functional(&[q(5), q(2)]).unwrap();
        assert_eq!((v, arg), (qf(3, 2), vec![0]));
        assert_eq!(n.codim_of_point(&md(&[0, 0])).unwrap(), 1);
    }

    #[test]
    fn one_dimensional_powers() {
        for k in 2..7u32 {
            let n = poly(1, &[&[k]]);
            assert_eq!(n.facet_normals(), &[vec![qf(1, k as i64)]]);
            assert_eq!(n.newton_distance().unwrap(), q(k as i64));
            assert_eq!(n.compact_faces().len(), 1);
            assert_eq!(n.compact_faces()[0].vertices, vec![md(&[k])]);
        }
    }

    #[test]
    fn floor_functional_examples() {
        let n = poly(2, &[&[2, 2], &[1, 3], &[4, 5]]);
        assert_eq!(n.floor_functional(&[q(1), q(1)]).unwrap(), (qf(1, 2), vec![1, 2]));
        assert_eq!(n.floor_functional(&[q(1), q(3)]).unwrap(), (q(1), vec![0, 1]));
        assert_eq!(n.codim_of_point(&md(&[0, 0])).unwrap(), 2);
        let c = poly(2, &[&[2, 0], &[0, 2]]);
        assert_eq!(c.newton_distance().unwrap(), q(1));
        assert_eq!(c.codim_of_point(&md(&[1, 0])).unwrap(), 1);
        assert!(c.floor_functional(&[q(1)]).is_err());
    }

    #[test]
    fn supporting_examples() {
        let n = poly(2, &[&[2, 2], &[1, 3], &[4, 5]]);
        let w = [qf(1, 2), qf(1, 6)];
        assert!(n.supporting_check(&w, &[q(1), q(3)]).unwrap());
        assert!(!n.supporting_check(&w, &[q(2), q(2)]).unwrap());
        assert!(n.supporting_check(&[q(0), q(0)], &[q(1), q(3)]).is_err());
        assert!(n.supporting_check(&w, &[q(1)]).is_err());
    }

    #[test]
    fn single_off_axis_monomial() {
        let n = poly(2, &[&[2, 3]]);
        assert_eq!(n.facet_normals(), &[vec![qf(1, 2), q(0)], vec![q(0), qf(1, 3)]]);
        assert_eq!(n.compact_faces().len(), 1);
        assert_eq!(n.floor_functional(&[q(0), q(5)]).unwrap().0, q(0));
    }

    #[test]
    fn non_convenient_with_axis_point() {
        // x^2 in two variables: 𝒩 = {ξ_1 ≥ 2}.
        let n = poly(2, &[&[2, 0]]);
        assert_eq!(n.facet_normals(), &[vec![qf(1, 2), q(0)]]);
        assert_eq!(n.compact_faces().len(), 1);
        assert_eq!(n.compact_faces()[0].vertices, vec![md(&[2, 0])]);
        assert!(n.compact_faces()[0].facets.is_empty() || n.compact_faces()[0].facets == vec![0]);
        assert!(!n.is_convenient());
    }

    #[test]
    fn three_dimensional_simplex() {
        let n = poly(3, &[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2], &[1, 1, 1]]);
        assert_eq!(n.facet_normals(), &[vec![qf(1, 2), qf(1, 2), qf(1, 2)]]);
        let dims: Vec<usize> = n.compact_faces().iter().map(|f| f.dim).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1, 2]);
        assert_eq!(n.compact_faces()[6].support_points.len(), 3);
        assert_eq!(n.newton_distance().unwrap(), qf(2, 3));
    }

    #[test]
    fn lattice_points_and_membership() {
        let n = poly(2, &[&[2, 0], &[0, 2]]);
        let pts = n.lattice_points(2);
        assert_eq!(pts, vec![md(&[0, 2]), md(&[1, 1]), md(&[2, 0])]);
        assert!(n.contains(&[qf(1, 2), qf(3, 2)]));
        assert!(!n.contains(&[qf(1, 2), qf(1, 2)]));
    }

    #[test]
    fn report_shape() {
        let n = poly(2, &[&[2, 2], &[1, 3], &[4, 5]]);
        let v = serde_json::to_value(n.report()).unwrap();
        assert_eq!(v["facet_normals"][1], serde_json::json!(["1/4", "1/4"]));
        assert_eq!(v["newton_distance"], "2");
        assert_eq!(v["compact_faces"][2]["dim"], 1);
        assert_eq!(v["compact_faces"][2]["facets"], serde_json::json!([1]));
        assert_eq!(v["extreme_points"][0], serde_json::json!([1, 3]));
    }
}
