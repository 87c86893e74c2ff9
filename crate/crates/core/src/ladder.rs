//! The exponent set ℰ = {⌊β+𝟙⌋ − n} with log multiplicities.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::Multidegree;
use crate::polytope::NewtonPolyhedron;
use crate::rational::{lcm_denominators, q, serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Witness {
    pub beta: Multidegree,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTerm {
    #[serde(with = "serde_q")]
    pub p: Q,
    pub d: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentLadder {
    pub terms: Vec<ExponentTerm>,
    #[serde(with = "serde_q")]
    pub p_max: Q,
    pub n_max: u32,
    pub beta_bound: Vec<u32>,
    pub decomposition_filter: bool,
}

impl ExponentLadder {
    pub fn exponents(&self) -> Vec<Q> {
        self.terms.iter().map(|t| t.p.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderParams {
    pub p_max: Q,
    pub n_max: u32,
    pub decomposition_filter: bool,
    /// Componentwise cap on β; required when 𝒩 is not convenient.
    pub beta_bound: Option<Vec<u32>>,
}

impl LadderParams {
    pub fn new(p_max: Q, n_max: u32, decomposition_filter: bool) -> LadderParams {
        LadderParams {
            p_max,
            n_max,
            decomposition_filter,
            beta_bound: None,
        }
    }
}

/// Per-axis cap on β_i beyond which ⌊β+𝟙⌋ cannot reach `p_max + n_max` through
/// any normal with a positive i-th component.
pub fn derived_beta_bound(poly: &NewtonPolyhedron, p_max: &Q, n_max: u32) -> Vec<u32> {
    let top = p_max + q(n_max as i64);
    (0..poly.dimension())
        .map(|i| {
            let m = poly
                .facet_normals()
                .iter()
                .map(|w| &w[i])
                .filter(|x| x.is_positive())
                .min();
            match m {
                None => 0,
                Some(m) => {
                    let cap = (&top / m).floor() - Q::one();
                    cap.to_integer().to_u32().unwrap_or(0)
                }
            }
        })
        .collect()
}

pub fn exponent_ladder(poly: &NewtonPolyhedron, params: &LadderParams) -> Result<ExponentLadder> {
    let d = poly.dimension();
    let p0 = poly.newton_distance()?.recip();
    if params.p_max < p0 {
        return Err(Error::Invalid(format!(
            "p_max must be at least 1/t = {}",
            crate::rational::format_rational(&p0)
        )));
    }
    let bound = match (&params.beta_bound, poly.is_convenient()) {
        (Some(b), _) => {
            if b.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.len(),
                });
            }
            b.clone()
        }
        (None, true) => derived_beta_bound(poly, &params.p_max, params.n_max),
        (None, false) => return Err(Error::UnboundedEnumeration),
    };
    let decomposer = if params.decomposition_filter && params.n_max >= 1 {
        Some(Decomposer::new(poly, &bound, params.n_max))
    } else {
        None
    };

    let boxes = BoxIter::new(&bound).collect::<Vec<_>>();
    let found: Vec<(Q, Witness, usize)> = boxes
        .par_iter()
        .flat_map_iter(|beta| {
            let (f, argmin) = poly.floor_shifted(beta).expect("dimension checked");
            let codim = argmin.len().min(d);
            let mut out = Vec::new();
            for n in 0..=params.n_max {
                let p = &f - q(n as i64);
                if p < p0 || p > params.p_max {
                    continue;
                }
                if n >= 1 {
                    if let Some(dec) = &decomposer {
                        if !dec.is_sum_of(beta, n) {
                            continue;
                        }
                    }
                }
                out.push((p, Witness { beta: beta.clone(), n }, codim));
            }
            out.into_iter()
        })
        .collect();

    let mut grouped: BTreeMap<Q, (usize, Vec<Witness>)> = BTreeMap::new();
    for (p, w, c) in found {
        let e = grouped.entry(p).or_insert((0, Vec::new()));
        e.0 = e.0.max(c);
        e.1.push(w);
    }
    let terms = grouped
        .into_iter()
        .map(|(p, (d, mut witnesses))| {
            witnesses.sort_by(|a, b| a.n.cmp(&b.n).then_with(|| a.beta.cmp(&b.beta)));
            ExponentTerm { p, d, witnesses }
        })
        .collect();
    Ok(ExponentLadder {
        terms,
        p_max: params.p_max.clone(),
        n_max: params.n_max,
        beta_bound: bound,
        decomposition_filter: params.decomposition_filter,
    })
}

/// q_w: the lcm of the reduced denominators of each facet normal.
pub fn arithmetic_progressions(poly: &NewtonPolyhedron) -> Vec<(Vec<Q>, BigInt)> {
    poly.facet_normals()
        .iter()
        .map(|w| (w.clone(), lcm_denominators(w)))
        .collect()
}

/// (1/t, min{d, |𝐧(𝟙)|}).
pub fn leading_term(poly: &NewtonPolyhedron) -> Result<(Q, usize)> {
    let zero = Multidegree::zeros(poly.dimension());
    let (f, _) = poly.floor_shifted(&zero)?;
    if f.is_zero() {
        return Err(Error::ZeroFloor("(1,...,1)".into()));
    }
    Ok((f, poly.codim_of_point(&zero)?))
}

/// Iterates the integer box ∏[0, bound_i] in lexicographic order.
struct BoxIter {
    bound: Vec<u32>,
    cur: Option<Vec<u32>>,
}

impl BoxIter {
    fn new(bound: &[u32]) -> BoxIter {
        BoxIter {
            bound: bound.to_vec(),
            cur: Some(vec![0; bound.len()]),
        }
    }
}

impl Iterator for BoxIter {
    type Item = Multidegree;

    fn next(&mut self) -> Option<Multidegree> {
        let cur = self.cur.take()?;
        let mut nxt = cur.clone();
        let mut i = nxt.len();
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if nxt[i] < self.bound[i] {
                nxt[i] += 1;
                advanced = true;
                break;
            }
            nxt[i] = 0;
        }
        if advanced {
            self.cur = Some(nxt);
        }
        Some(Multidegree(cur))
    }
}

/// Decides whether β = α¹ + ⋯ + αⁿ with every αⁱ ∈ 𝒩 ∩ ℕ^d, for all β in a box.
///
/// `reach[k]` marks the box points that are sums of k + 1 lattice points of 𝒩.
pub struct Decomposer {
    bound: Vec<u32>,
    strides: Vec<usize>,
    reach: Vec<Vec<bool>>,
}

impl Decomposer {
    pub fn new(poly: &NewtonPolyhedron, bound: &[u32], n_max: u32) -> Decomposer {
        let d = bound.len();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * (bound[i + 1] as usize + 1);
        }
        let size = strides.first().map_or(1, |s| s * (bound[0] as usize + 1));
        let lattice: Vec<Vec<u32>> = BoxIter::new(bound)
            .filter(|a| poly.contains_lattice_point(&a.0))
            .map(|a| a.0)
            .collect();
        let mut first = vec![false; size];
        for a in &lattice {
            first[index_of(&strides, a)] = true;
        }
        let mut reach = vec![first];
        for _ in 1..n_max.max(1) {
            let prev = reach.last().unwrap();
            let mut next = vec![false; size];
            for (idx, p) in BoxIter::new(bound).enumerate() {
                if !prev[idx] {
                    continue;
                }
                for a in &lattice {
                    if p.0.iter().zip(a).zip(bound).all(|((x, y), b)| x + y <= *b) {
                        let s: Vec<u32> = p.0.iter().zip(a).map(|(x, y)| x + y).collect();
                        next[index_of(&strides, &s)] = true;
                    }
                }
            }
            reach.push(next);
        }
        Decomposer {
            bound: bound.to_vec(),
            strides,
            reach,
        }
    }

    pub fn is_sum_of(&self, beta: &Multidegree, n: u32) -> bool {
        if n == 0 {
            return beta.0.iter().all(|&b| b == 0);
        }
        if n as usize > self.reach.len() || beta.0.iter().zip(&self.bound).any(|(b, m)| b > m) {
            return false;
        }
        self.reach[n as usize - 1][index_of(&self.strides, &beta.0)]
    }
}

fn index_of(strides: &[usize], a: &[u32]) -> usize {
    a.iter().zip(strides).map(|(&x, s)| x as usize * s).sum()
}
