//! Face polynomials and a sampling-based nondegeneracy test.
//!
//! For each compact face F the residual r(x) = (x_j ∂_j φ_F(x))_j is minimized
//! in the sup norm over the shell max_i |x_i| = 1, away from the coordinate
//! hyperplanes (min_i |x_i| ≥ 0.1). Quasi-homogeneity of φ_F makes the shell
//! representative of every ray. Grid minima are polished with a few rounds of
//! Levenberg–Marquardt on the residual.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{scaled_gradient_of, Multidegree, NumericPoly, Phase};
use crate::polytope::{Face, NewtonPolyhedron};
use crate::rational::Q;

/// Smallest admissible |x_i| on the sampling shell.
pub const AXIS_CLEARANCE: f64 = 0.1;

/// φ_F: the terms of φ whose multidegree lies on a compact face F.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePolynomial {
    pub face: usize,
    pub dim: usize,
    pub terms: Vec<(Multidegree, Q)>,
}

impl FacePolynomial {
    pub fn numeric(&self) -> NumericPoly {
        NumericPoly::from_exact(self.dim, &self.terms)
    }

    /// The polynomials x_j ∂_j φ_F.
    pub fn scaled_gradient(&self) -> Vec<NumericPoly> {
        scaled_gradient_of(self.dim, &self.terms)
    }
}

pub fn face_polynomial(phase: &Phase, poly: &NewtonPolyhedron, face: &Face) -> Result<FacePolynomial> {
    let index = poly.face_index(face)?;
    let stored = &poly.compact_faces()[index];
    Ok(FacePolynomial {
        face: index,
        dim: phase.dimension(),
        terms: phase.restrict(|a| stored.contains(a)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NondegeneracyParams {
    pub grid_per_axis: usize,
    pub refine_depth: usize,
    pub degeneracy_tol: f64,
}

impl Default for NondegeneracyParams {
    fn default() -> Self {
        NondegeneracyParams {
            grid_per_axis: 64,
            refine_depth: 3,
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Nondegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceRecord {
    pub face: usize,
    pub vertices: Vec<Multidegree>,
    /// Vertex faces are decided analytically and carry no sampled minimum.
    pub analytic: bool,
    pub min_norm: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyVerdict {
    pub status: Status,
    pub reason: Option<String>,
    pub faces: Vec<FaceRecord>,
    pub params: NondegeneracyParams,
}

impl NondegeneracyVerdict {
    pub fn degenerate_face(&self) -> Option<&FaceRecord> {
        self.faces.iter().find(|f| f.witness.is_some())
    }
}

/// ‖(x_j ∂_j φ_F(x))_j‖_∞.
pub fn scaled_gradient_norm(grad: &[NumericPoly], x: &[f64]) -> f64 {
    grad.iter().map(|g| g.eval(x).abs()).fold(0.0, f64::max)
}

pub fn check_nondegenerate(phase: &Phase, params: NondegeneracyParams) -> Result<NondegeneracyVerdict> {
    let poly = NewtonPolyhedron::build(phase)?;
    Ok(check_with_polyhedron(phase, &poly, params))
}

pub fn check_with_polyhedron(
    phase: &Phase,
    poly: &NewtonPolyhedron,
    params: NondegeneracyParams,
) -> NondegeneracyVerdict {
    let faces: Vec<FaceRecord> = poly
        .compact_faces()
        .par_iter()
        .enumerate()
        .map(|(k, face)| {
            let fp = FacePolynomial {
                face: k,
                dim: phase.dimension(),
                terms: phase.restrict(|a| face.contains(a)),
            };
            check_face(&fp, face, params)
        })
        .collect();
    let status = if faces.iter().any(|f| f.witness.is_some()) {
        Status::Degenerate
    } else if faces
        .iter()
        .all(|f| f.analytic || f.min_norm.is_some_and(|m| m > 1e3 * params.degeneracy_tol))
    {
        Status::Nondegenerate
    } else {
        Status::Inconclusive
    };
    NondegeneracyVerdict {
        status,
        reason: None,
        faces,
        params,
    }
}

/// Truncates to |α| ≤ k, requires convenience, then checks the truncation.
pub fn check_k_nondegenerate(phase: &Phase, k: u32, params: NondegeneracyParams) -> Result<NondegeneracyVerdict> {
    if k < 2 {
        return Err(Error::Invalid(format!("truncation order must be at least 2, got {k}")));
    }
    let truncated = phase.truncate(k)?;
    let poly = NewtonPolyhedron::build(&truncated)?;
    if !poly.is_convenient() {
        return Ok(NondegeneracyVerdict {
            status: Status::Degenerate,
            reason: Some("not convenient".into()),
            faces: Vec::new(),
            params,
        });
    }
    Ok(check_with_polyhedron(&truncated, &poly, params))
}

fn check_face(fp: &FacePolynomial, face: &Face, params: NondegeneracyParams) -> FaceRecord {
    let mut record = FaceRecord {
        face: fp.face,
        vertices: face.vertices.clone(),
        analytic: false,
        min_norm: None,
        argmin: None,
        witness: None,
    };
    if face.dim == 0 && fp.terms.len() == 1 {
        record.analytic = true;
        return record;
    }
    let grad = fp.scaled_gradient();
    let d = fp.dim;
    let axis = free_axis_grid(params.grid_per_axis);

    // Grid search on every shell facet x_i = ±1.
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let keep = 8;
    for fixed in 0..d {
        for sign in [-1.0, 1.0] {
            let mut idx = vec![0usize; d - 1];
            loop {
                let mut x = Vec::with_capacity(d);
                let mut f = 0;
                for i in 0..d {
                    if i == fixed {
                        x.push(sign);
                    } else {
                        x.push(axis[idx[f]]);
                        f += 1;
                    }
                }
                let v = scaled_gradient_norm(&grad, &x);
                push_candidate(&mut candidates, keep, v, x);
                if !advance(&mut idx, axis.len()) {
                    break;
                }
            }
        }
    }

    let mut best = candidates[0].clone();
    for (_, start) in &candidates {
        let (v, x) = refine(&grad, start, params.refine_depth);
        if v < best.0 {
            best = (v, x);
        }
    }
    record.min_norm = Some(best.0);
    record.argmin = Some(best.1.clone());
    let residual_sq: f64 = grad.iter().map(|g| g.eval(&best.1).powi(2)).sum();
    let off_axes = best.1.iter().all(|x| x.abs() >= AXIS_CLEARANCE);
    if best.0 < params.degeneracy_tol && residual_sq < params.degeneracy_tol.powi(2) && off_axes {
        record.witness = Some(best.1);
    }
    record
}

/// Grid on [−1, −0.1] ∪ [0.1, 1] with both endpoints of each piece.
fn free_axis_grid(points: usize) -> Vec<f64> {
    let half = (points / 2).max(2);
    let mut v: Vec<f64> = (0..half)
        .map(|k| AXIS_CLEARANCE + (1.0 - AXIS_CLEARANCE) * k as f64 / (half - 1) as f64)
        .collect();
    let neg: Vec<f64> = v.iter().rev().map(|x| -x).collect();
    let mut out = neg;
    out.append(&mut v);
    out
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < n {
            return true;
        }
        *i = 0;
    }
    false
}

fn push_candidate(cands: &mut Vec<(f64, Vec<f64>)>, keep: usize, v: f64, x: Vec<f64>) {
    if cands.len() == keep && v >= cands[keep - 1].0 {
        return;
    }
    let pos = cands.partition_point(|(c, _)| *c <= v);
    cands.insert(pos, (v, x));
    cands.truncate(keep);
}

/// Damped Gauss–Newton on r(x) with the shell coordinate held fixed.
fn refine(grad: &[NumericPoly], start: &[f64], rounds: usize) -> (f64, Vec<f64>) {
    let d = start.len();
    let fixed = (0..d)
        .max_by(|&a, &b| start[a].abs().total_cmp(&start[b].abs()))
        .unwrap_or(0);
    let free: Vec<usize> = (0..d).filter(|&i| i != fixed).collect();
    let jac: Vec<Vec<NumericPoly>> = grad
        .iter()
        .map(|g| free.iter().map(|&k| g.derivative(k)).collect())
        .collect();
    let mut x = start.to_vec();
    let mut best = scaled_gradient_norm(grad, &x);
    if free.is_empty() {
        return (best, x);
    }
    let mut mu = 1e-3;
    for _ in 0..rounds * 25 {
        let r = DVector::from_iterator(d, grad.iter().map(|g| g.eval(&x)));
        let j = DMatrix::from_fn(d, free.len(), |a, b| jac[a][b].eval(&x));
        let jt = j.transpose();
        let mut h = &jt * &j;
        for i in 0..free.len() {
            h[(i, i)] += mu * (1.0 + h[(i, i)]);
        }
        let Some(step) = h.lu().solve(&(-(&jt * &r))) else {
            break;
        };
        let mut trial = x.clone();
        for (s, &k) in free.iter().enumerate() {
            trial[k] = clamp_off_axis(trial[k] + step[s]);
        }
        let v = scaled_gradient_norm(grad, &trial);
        if v < best {
            best = v;
            x = trial;
            mu = (mu * 0.3).max(1e-12);
        } else {
            mu *= 10.0;
            if mu > 1e8 {
                break;
            }
        }
        if best == 0.0 {
            break;
        }
    }
    (best, x)
}

fn clamp_off_axis(v: f64) -> f64 {
    let s = if v < 0.0 { -1.0 } else { 1.0 };
    s * v.abs().clamp(AXIS_CLEARANCE, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn phase(d: usize, terms: &[(&[u32], i64)]) -> Phase {
        Phase::from_int_terms(d, terms).unwrap()
    }

    #[test]
    fn face_polynomials_of_fig2() {
        let p = phase(2, &[(&[2, 2], 1), (&[1, 3], 1), (&[4, 5], -1)]);
        let n = NewtonPolyhedron::build(&p).unwrap();
        let edge = face_polynomial(&p, &n, &n.compact_faces()[2]).unwrap();
        let exps: Vec<Vec<u32>> = edge.terms.iter().map(|(a, _)| a.0.clone()).collect();
        assert_eq!(exps, vec![vec![1, 3], vec![2, 2]]);
        let vertex = face_polynomial(&p, &n, &n.compact_faces()[1]).unwrap();
        assert_eq!(vertex.terms, vec![(Multidegree(vec![2, 2]), q(1))]);
        let other = NewtonPolyhedron::build(&phase(1, &[(&[2], 1)])).unwrap();
        assert_eq!(
            face_polynomial(&p, &n, &other.compact_faces()[0]),
            Err(Error::FaceNotInLattice)
        );
    }

    #[test]
    fn square_of_difference_is_degenerate() {
        let p = phase(2, &[(&[2, 0], 1), (&[1, 1], -2), (&[0, 2], 1)]);
        let v = check_nondegenerate(&p, NondegeneracyParams::default()).unwrap();
        assert_eq!(v.status, Status::Degenerate);
        let w = v.degenerate_face().unwrap().witness.clone().unwrap();
        assert!((w[0] - w[1]).abs() < 1e-6);
    }

    #[test]
    fn sum_of_squares_is_nondegenerate() {
        let p = phase(2, &[(&[2, 0], 1), (&[0, 2], 1)]);
        let v = check_nondegenerate(&p, NondegeneracyParams::default()).unwrap();
        assert_eq!(v.status, Status::Nondegenerate);
        let edge = v.faces.iter().find(|f| !f.analytic).unwrap();
        assert!((edge.min_norm.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn truncations() {
        let p = phase(2, &[(&[2, 2], 1), (&[5, 0], 1), (&[0, 5], 1)]);
        let params = NondegeneracyParams::default();
        let v4 = check_k_nondegenerate(&p, 4, params).unwrap();
        assert_eq!(v4.status, Status::Degenerate);
        assert_eq!(v4.reason.as_deref(), Some("not convenient"));
        assert_eq!(
            check_k_nondegenerate(&p, 5, params).unwrap().status,
            Status::Nondegenerate
        );
        assert!(check_k_nondegenerate(&p, 1, params).is_err());
        assert_eq!(
            check_k_nondegenerate(&phase(2, &[(&[2, 0], 1), (&[0, 2], 1)]), 2, params)
                .unwrap()
                .status,
            Status::Nondegenerate
        );
    }

    #[test]
    fn axis_grid_shape() {
        let g = free_axis_grid(64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[63], 1.0);
        assert!(g.iter().all(|x| x.abs() >= AXIS_CLEARANCE - 1e-15));
    }
}
