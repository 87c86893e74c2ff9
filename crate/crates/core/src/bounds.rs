//! Quantitative objects around the gradient lower bound and the dyadic sum:
//! ratio tables on dyadic boxes, the constant ladder a, ρ, C_m, b_m, p, δ, s,
//! per-box oscillatory bounds, and the dyadic optimization sum.

use itertools::Itertools;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, LpOutcome};
use crate::nondegeneracy::{scaled_gradient_norm, FacePolynomial};
use crate::phase::{Multidegree, NumericPoly, Phase};
use crate::polytope::NewtonPolyhedron;
use crate::quadrature::Integrator;
use crate::rational::{format_rational, from_exponents, q, to_f64, Q};

/// Minimum of `f` over the box ∏[lo_i, hi_i]: a tensor grid with both
/// endpoints, then a compass search from the best grid point.
pub fn box_infimum(f: &(dyn Fn(&[f64]) -> f64 + Sync), lo: &[f64], hi: &[f64], grid: usize) -> (f64, Vec<f64>) {
    let d = lo.len();
    let grid = grid.max(2);
    let to_x = |i: usize, t: f64| -> f64 { lo[i] + (hi[i] - lo[i]) * t };
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..grid)
                .map(|k| {
                    if k == 0 {
                        lo[i]
                    } else if k + 1 == grid {
                        hi[i]
                    } else {
                        to_x(i, k as f64 / (grid - 1) as f64)
                    }
                })
                .collect()
        })
        .collect();
    let total = grid.pow(d as u32);
    let (best_v, best_k) = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut x = vec![0.0; d];
            let mut r = k;
            for i in (0..d).rev() {
                x[i] = axes[i][r % grid];
                r /= grid;
            }
            (f(&x), k)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let mut t = vec![0.0; d];
    let mut r = best_k;
    for i in (0..d).rev() {
        t[i] = (r % grid) as f64 / (grid - 1) as f64;
        r /= grid;
    }
    let eval_t = |t: &[f64]| -> (f64, Vec<f64>) {
        let x: Vec<f64> = (0..d)
            .map(|i| {
                if t[i] <= 0.0 {
                    lo[i]
                } else if t[i] >= 1.0 {
                    hi[i]
                } else {
                    to_x(i, t[i])
                }
            })
            .collect();
        (f(&x), x)
    };
    let (mut best, mut best_x) = eval_t(&t);
    debug_assert!(best <= best_v || best.is_nan());
    let mut step = 0.5 / (grid - 1) as f64;
    let mut iters = 0;
    while step > 1e-13 && iters < 2000 {
        iters += 1;
        let mut improved = false;
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut cand = t.clone();
                cand[i] = (cand[i] + s * step).clamp(0.0, 1.0);
                let (v, x) = eval_t(&cand);
                if v < best {
                    best = v;
                    best_x = x;
                    t = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub j: u32,
    pub eps: f64,
    pub box_min: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicRatioTable {
    pub rows: Vec<RatioRow>,
    pub grid: usize,
}

impl DyadicRatioTable {
    pub fn min_ratio(&self, levels: std::ops::RangeInclusive<u32>) -> f64 {
        self.rows
            .iter()
            .filter(|r| levels.contains(&r.j))
            .map(|r| r.ratio)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,j,value,bound,ratio\n");
        for r in &self.rows {
            s.push_str(&format!(",{},{:e},{:e},{:e}\n", r.j, r.box_min, r.envelope, r.ratio));
        }
        s
    }
}

/// Minimum of ‖x∇φ(x)‖_∞ over ∏[ε_i, 4ε_i] divided by max_α ε^α over extreme points.
pub fn gradient_ratio_at(phase: &Phase, poly: &NewtonPolyhedron, eps: &[f64], grid: usize) -> Result<(f64, f64)> {
    if eps.len() != phase.dimension() {
        return Err(Error::DimensionMismatch {
            expected: phase.dimension(),
            got: eps.len(),
        });
    }
    let grad = phase.scaled_gradient_polys();
    let hi: Vec<f64> = eps.iter().map(|e| 4.0 * e).collect();
    let (box_min, _) = box_infimum(&|x: &[f64]| scaled_gradient_norm(&grad, x), eps, &hi, grid);
    let envelope = poly
        .extreme_points()
        .iter()
        .map(|a| a.0.iter().zip(eps).map(|(&k, e)| e.powi(k as i32)).product::<f64>())
        .fold(0.0, f64::max);
    Ok((box_min, envelope))
}

/// Isotropic levels ε = 2^{-j}, j = 0..=j_max.
pub fn gradient_ratio_table(
    phase: &Phase,
    poly: &NewtonPolyhedron,
    j_max: u32,
    grid: usize,
) -> Result<DyadicRatioTable> {
    let d = phase.dimension();
    let rows = (0..=j_max)
        .map(|j| {
            let eps = 2f64.powi(-(j as i32));
            let (box_min, envelope) = gradient_ratio_at(phase, poly, &vec![eps; d], grid)?;
            Ok(RatioRow {
                j,
                eps,
                box_min,
                envelope,
                ratio: box_min / envelope,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DyadicRatioTable { rows, grid })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    /// Taylor order k (the maximal total degree).
    pub k: u32,
    pub a: f64,
    pub rho: f64,
    #[serde(skip)]
    pub rho_exact: Q,
    /// log10 of C_0, …, C_d; the plain values underflow quickly.
    pub log10_c: Vec<f64>,
    /// log10 of C′_1, …, C′_d.
    pub log10_c_prime: Vec<f64>,
    /// log10 of b_1, …, b_d.
    pub log10_b: Vec<f64>,
    pub p: f64,
    #[serde(skip)]
    pub p_exact: Q,
    pub delta_prime: f64,
    pub delta: f64,
    pub log10_s: f64,
    pub grid: usize,
}

impl ConstantsReport {
    pub fn c(&self, m: usize) -> f64 {
        10f64.powf(self.log10_c[m])
    }

    pub fn c_prime(&self, m: usize) -> f64 {
        10f64.powf(self.log10_c_prime[m - 1])
    }

    pub fn b(&self, m: usize) -> f64 {
        10f64.powf(self.log10_b[m - 1])
    }

    /// The admissible radius; zero when it underflows.
    pub fn s(&self) -> f64 {
        10f64.powf(self.log10_s)
    }

    /// Flat JSON with keys a, rho, C0..Cd, b1..bd, p, delta_prime, delta, s,
    /// each constant also given as a base-10 logarithm.
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("k".into(), json!(self.k));
        m.insert("a".into(), json!(self.a));
        m.insert("rho".into(), json!(self.rho));
        m.insert("rho_exact".into(), json!(format_rational(&self.rho_exact)));
        for (i, c) in self.log10_c.iter().enumerate() {
            m.insert(format!("C{i}"), json!(self.c(i)));
            m.insert(format!("log10_C{i}"), json!(c));
        }
        for (i, c) in self.log10_c_prime.iter().enumerate() {
            m.insert(format!("C_prime{}", i + 1), json!(self.c_prime(i + 1)));
            m.insert(format!("log10_C_prime{}", i + 1), json!(c));
        }
        for (i, b) in self.log10_b.iter().enumerate() {
            m.insert(format!("b{}", i + 1), json!(self.b(i + 1)));
            m.insert(format!("log10_b{}", i + 1), json!(b));
        }
        m.insert("p".into(), json!(self.p));
        m.insert("p_exact".into(), json!(format_rational(&self.p_exact)));
        m.insert("delta_prime".into(), json!(self.delta_prime));
        m.insert("delta".into(), json!(self.delta));
        m.insert("s".into(), json!(self.s()));
        m.insert("log10_s".into(), json!(self.log10_s));
        m.insert("grid".into(), json!(self.grid));
        Value::Object(m)
    }

    /// a > C_0 > C_1 > … > C_d > 0 and 1 > b_1 > … > b_d.
    pub fn is_ordered(&self) -> bool {
        let chain_c = std::iter::once(self.a.log10())
            .chain(self.log10_c.iter().copied())
            .tuple_windows()
            .all(|(x, y)| x > y);
        let chain_b = std::iter::once(0.0)
            .chain(self.log10_b.iter().copied())
            .tuple_windows()
            .all(|(x, y)| x > y);
        chain_c && chain_b && self.log10_c.iter().all(|c| c.is_finite())
    }
}

/// Relative size of ‖x∇φ_F‖ against its absolute-value majorant below which a face counts as degenerate.
pub const CANCELLATION_TOL: f64 = 1e-9;

/// (ln ‖x∇φ_F(x)‖_∞, ln of its absolute-value majorant) at x = e^u, without underflow.
fn log_gradient_norm(grad: &[NumericPoly], u: &[f64]) -> (f64, f64) {
    let mut norm = f64::NEG_INFINITY;
    let mut major = f64::NEG_INFINITY;
    for g in grad.iter().map(|g| g.terms()) {
        let logs: Vec<(f64, f64)> = g
            .iter()
            .map(|(e, c)| {
                (
                    c.signum(),
                    c.abs().ln() + e.iter().zip(u).map(|(&k, x)| k as f64 * x).sum::<f64>(),
                )
            })
            .collect();
        let top = logs.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            continue;
        }
        let signed: f64 = logs.iter().map(|(sg, l)| sg * (l - top).exp()).sum();
        let abs: f64 = logs.iter().map(|(_, l)| (l - top).exp()).sum();
        norm = norm.max(signed.abs().ln() + top);
        major = major.max(abs.ln() + top);
    }
    (norm, major)
}

pub fn constants_report(phase: &Phase, poly: &NewtonPolyhedron, grid: usize) -> Result<ConstantsReport> {
    let d = phase.dimension();
    let k = phase.max_degree();

    let a = 2.0
        * (0..d)
            .map(|j| {
                phase
                    .terms()
                    .iter()
                    .filter(|(al, _)| al.total() <= k)
                    .map(|(al, c)| (to_f64(c) * al.0[j] as f64).abs() * 4f64.powi(al.total() as i32))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
    let ln_a = a.ln();

    let rho_exact = rho_constant(poly);
    let rho = to_f64(&rho_exact);

    let faces: Vec<(String, Vec<NumericPoly>)> = poly
        .compact_faces()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let fp = FacePolynomial {
                face: i,
                dim: d,
                terms: phase.restrict(|al| f.contains(al)),
            };
            (f.label(), fp.scaled_gradient())
        })
        .collect();
    // Natural log of min over faces of inf over [e^lo, e^hi]^d.
    let face_min = |lo: f64, hi: f64| -> Result<f64> {
        let mut best = f64::INFINITY;
        for (label, grad) in &faces {
            let (v, u) = box_infimum(
                &|u: &[f64]| log_gradient_norm(grad, u).0,
                &vec![lo; d],
                &vec![hi; d],
                grid,
            );
            let (_, major) = log_gradient_norm(grad, &u);
            if !(v > CANCELLATION_TOL.ln() + major) {
                return Err(Error::DegeneratePhase {
                    face: label.clone(),
                    infimum: v.exp(),
                });
            }
            best = best.min(v);
        }
        Ok(best)
    };

    let ln4 = 4f64.ln();
    let mut c = vec![face_min(0.0, ln4)?];
    let mut c_prime = Vec::new();
    let mut b = Vec::new();
    for m in 1..=d {
        let bm = (c[m - 1] - ln_a) * d as f64 * rho;
        let cp = face_min(bm, ln4 - bm)?;
        b.push(bm);
        c_prime.push(cp);
        c.push(cp.min(c[m - 1] - ln_a));
    }

    let p_exact = p_constant(poly);
    let p = to_f64(&p_exact);
    let delta_prime = delta_prime_constant(poly);
    let delta = p.min(delta_prime * p);
    let cd = *c.last().expect("d ≥ 1");
    let to10 = |v: Vec<f64>| v.into_iter().map(|x| x / std::f64::consts::LN_10).collect::<Vec<_>>();
    Ok(ConstantsReport {
        k,
        a,
        rho,
        rho_exact,
        log10_c: to10(c),
        log10_c_prime: to10(c_prime),
        log10_b: to10(b),
        p,
        p_exact,
        delta_prime,
        delta,
        log10_s: (cd - ln_a) / delta / std::f64::consts::LN_10,
        grid,
    })
}

/// max ‖Ã^{-1}‖_∞ over linearly independent support subsets of each facet and
/// every nonsingular square submatrix made of their columns.
pub fn rho_constant(poly: &NewtonPolyhedron) -> Q {
    let d = poly.dimension();
    let mut best = Q::zero();
    for w in poly.facet_normals() {
        let on: Vec<Vec<Q>> = poly
            .support()
            .iter()
            .filter(|a| crate::rational::dot_int(&a.0, w) == Q::one())
            .map(|a| from_exponents(&a.0))
            .collect();
        for n in 1..=d.min(on.len()) {
            for rows in (0..on.len()).combinations(n) {
                let sub: Vec<Vec<Q>> = rows.iter().map(|&r| on[r].clone()).collect();
                if linalg::rank(&sub) < n {
                    continue;
                }
                for cols in (0..d).combinations(n) {
                    let sq: Vec<Vec<Q>> = sub
                        .iter()
                        .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                        .collect();
                    if let Some(inv) = linalg::inverse(&sq) {
                        let norm = linalg::inf_norm(&inv);
                        if norm > best {
                            best = norm;
                        }
                    }
                }
            }
        }
    }
    best
}

/// min over support points u off every compact face of min{‖γ_u‖_∞, 1}, where
/// u = v + γ with v on a compact face and γ ≥ 0, and γ is taken as large as
/// the decomposition allows. Equals 1 when every support point lies on a compact face.
pub fn p_constant(poly: &NewtonPolyhedron) -> Q {
    let maximal = poly.maximal_compact_faces();
    let on_face = |u: &Multidegree| poly.compact_faces().iter().any(|f| f.contains(u));
    let mut p = Q::one();
    for u in poly.support().iter().filter(|u| !on_face(u)) {
        let mut best: Option<Q> = None;
        for f in &maximal {
            for i in 0..poly.dimension() {
                if let Some(g) = largest_gap(u, &f.support_points, i) {
                    if best.as_ref().is_none_or(|b| g > *b) {
                        best = Some(g);
                    }
                }
            }
        }
        if let Some(g) = best {
            if g < p {
                p = g;
            }
        }
    }
    p
}

/// max u_i − v_i over v ∈ conv(points) with v ≤ u, by exact LP.
fn largest_gap(u: &Multidegree, points: &[Multidegree], i: usize) -> Option<Q> {
    let d = u.dim();
    let m = points.len();
    // Variables: λ (m), slack s (d) with Σ λ_k α_k + s = u, Σ λ = 1.
    let n = m + d;
    let mut a = Vec::with_capacity(d + 1);
    for r in 0..d {
        let mut row = vec![Q::zero(); n];
        for (k, p) in points.iter().enumerate() {
            row[k] = q(p.0[r] as i64);
        }
        row[m + r] = Q::one();
        a.push(row);
    }
    let mut sum = vec![Q::zero(); n];
    for x in sum.iter_mut().take(m) {
        *x = Q::one();
    }
    a.push(sum);
    let mut b: Vec<Q> = from_exponents(&u.0);
    b.push(Q::one());
    // Minimize v_i = Σ λ_k α_k,i.
    let mut c = vec![Q::zero(); n];
    for (k, p) in points.iter().enumerate() {
        c[k] = q(p.0[i] as i64);
    }
    match linalg::minimize(&c, &a, &b) {
        LpOutcome::Optimal { value, .. } => Some(q(u.0[i] as i64) - value),
        _ => None,
    }
}

/// δ′ = −1 + min ⌊(α¹+α²)/2⌋ over distinct support pairs not on a common facet; 1 if there are none.
pub fn delta_prime_constant(poly: &NewtonPolyhedron) -> f64 {
    let sup = poly.support();
    let on: Vec<Vec<bool>> = sup
        .iter()
        .map(|a| {
            poly.facet_normals()
                .iter()
                .map(|w| crate::rational::dot_int(&a.0, w) == Q::one())
                .collect()
        })
        .collect();
    let mut best: Option<Q> = None;
    for (i, j) in (0..sup.len()).tuple_combinations() {
        if on[i].iter().zip(&on[j]).any(|(x, y)| *x && *y) {
            continue;
        }
        let mid: Vec<Q> = sup[i]
            .0
            .iter()
            .zip(&sup[j].0)
            .map(|(&x, &y)| Q::new((x as i64 + y as i64).into(), 2.into()))
            .collect();
        if let Ok((f, _)) = poly.floor_functional(&mid) {
            if best.as_ref().is_none_or(|b| f < *b) {
                best = Some(f);
            }
        }
    }
    match best {
        Some(f) => to_f64(&(f - Q::one())),
        None => 1.0,
    }
}

/// (⌊β+𝟙⌋, d_β − 1).
pub fn theoretical_bound(poly: &NewtonPolyhedron, beta: &Multidegree) -> Result<(Q, usize)> {
    let (f, _) = poly.floor_shifted(beta)?;
    if f.is_zero() {
        return Err(Error::ZeroFloor(beta.to_string()));
    }
    Ok((f, poly.codim_of_point(beta)? - 1))
}

/// Number of extra dyadic levels summed explicitly beyond ⌈log₂λ / v_i⌉.
pub const TAIL_MARGIN: u32 = 4;

pub fn default_decay_order(poly: &NewtonPolyhedron, beta: &Multidegree) -> Result<u32> {
    let (f, _) = poly.floor_shifted(beta)?;
    Ok(f.ceil().to_integer().to_u32().unwrap_or(u32::MAX - 1) + 1)
}

/// S(λ) = Σ_j min_{N ≤ N_max, α extreme} λ^{-N} 2^{(Nα−β−𝟙)·j}, explicit over a
/// box of levels plus a closed-form bound for the N = 0 tail outside it.
pub fn dyadic_bound_sum(poly: &NewtonPolyhedron, beta: &Multidegree, lambda: f64, n_max: Option<u32>) -> Result<f64> {
    let d = poly.dimension();
    if beta.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: beta.dim(),
        });
    }
    if !(lambda > 2.0) {
        return Err(Error::Invalid(format!("lambda must exceed 2, got {lambda}")));
    }
    let (f, _) = poly.floor_shifted(beta)?;
    if f.is_zero() {
        return Err(Error::ZeroFloor(beta.to_string()));
    }
    let n_max = match n_max {
        Some(n) => n,
        None => default_decay_order(poly, beta)?,
    };
    if q(n_max as i64) <= f {
        return Err(Error::InsufficientDecayOrder {
            n_max,
            floor: format_rational(&f),
        });
    }
    let shift: Vec<f64> = beta.0.iter().map(|&b| b as f64 + 1.0).collect();
    let ff = to_f64(&f);
    let l2 = lambda.log2();
    let caps: Vec<u32> = shift
        .iter()
        .map(|s| (l2 * ff / s).ceil().max(0.0) as u32 + TAIL_MARGIN)
        .collect();
    let alphas: Vec<Vec<f64>> = poly
        .extreme_points()
        .iter()
        .map(|a| a.0.iter().map(|&x| x as f64).collect())
        .collect();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut j = vec![0u32; d];
    loop {
        let mut best = f64::INFINITY;
        for n in 0..=n_max {
            let nf = n as f64;
            for a in &alphas {
                let e: f64 = -nf * l2 + (0..d).map(|i| (nf * a[i] - shift[i]) * j[i] as f64).sum::<f64>();
                best = best.min(e);
            }
        }
        let t = 2f64.powf(best);
        let s = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
        let mut k = 0;
        loop {
            if k == d {
                let geo: Vec<f64> = shift.iter().map(|s| 1.0 / (1.0 - 2f64.powf(-s))).collect();
                let tail: f64 = (0..d)
                    .map(|i| {
                        let head = 2f64.powf(-shift[i] * (caps[i] + 1) as f64) * geo[i];
                        head * (0..d).filter(|&k| k != i).map(|k| geo[k]).product::<f64>()
                    })
                    .sum();
                return Ok(sum + comp + tail);
            }
            j[k] += 1;
            if j[k] <= caps[k] {
                break;
            }
            j[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSumRow {
    pub lambda: f64,
    pub value: f64,
    pub normalized: f64,
}

/// S(λ)·λ^{⌊β+𝟙⌋} / log^{d_β−1} λ over a λ grid.
pub fn bound_sum_table(
    poly: &NewtonPolyhedron,
    beta: &Multidegree,
    lambdas: &[f64],
    n_max: Option<u32>,
) -> Result<Vec<BoundSumRow>> {
    let (f, logp) = theoretical_bound(poly, beta)?;
    let ff = to_f64(&f);
    lambdas
        .iter()
        .map(|&l| {
            let v = dyadic_bound_sum(poly, beta, l, n_max)?;
            Ok(BoundSumRow {
                lambda: l,
                value: v,
                normalized: v * l.powf(ff) / l.ln().powi(logp as i32),
            })
        })
        .collect()
}

pub fn bound_sum_csv(rows: &[BoundSumRow]) -> String {
    let mut s = String::from("lambda,j,value,bound,ratio\n");
    for r in rows {
        s.push_str(&format!("{:e},,{:e},,{:e}\n", r.lambda, r.value, r.normalized));
    }
    s
}

/// max/median of a list of positive values.
pub fn max_over_median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let med = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    v[n - 1] / med
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxBoundRow {
    pub lambda: f64,
    pub j: u32,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub reliable: bool,
}

/// Per-box bound B = min_{N ≤ N_max, α} λ^{-N} ε^{β+𝟙−Nα} for isotropic ε.
pub fn box_bound(poly: &NewtonPolyhedron, beta: &Multidegree, lambda: f64, eps: f64, n_max: u32) -> f64 {
    let shift: f64 = beta.0.iter().map(|&b| b as f64 + 1.0).sum();
    let mut best = f64::INFINITY;
    for n in 0..=n_max {
        for a in poly.extreme_points() {
            let e = shift - n as f64 * a.total() as f64;
            best = best.min(lambda.powi(-(n as i32)) * eps.powf(e));
        }
    }
    best
}

/// J = |∫ e^{iλφ} x^β η(x/ε) dx| against B on every (λ, j) cell.
pub fn box_bound_check(
    phase: &Phase,
    poly: &NewtonPolyhedron,
    beta: &Multidegree,
    lambdas: &[f64],
    levels: std::ops::RangeInclusive<u32>,
    n_max: u32,
    panel_budget: u64,
) -> Result<Vec<BoxBoundRow>> {
    let d = phase.dimension();
    let cells: Vec<(f64, u32)> = lambdas
        .iter()
        .flat_map(|&l| levels.clone().map(move |j| (l, j)))
        .collect();
    cells
        .par_iter()
        .map(|&(lambda, j)| {
            let eps = 2f64.powi(-(j as i32));
            let bound = box_bound(poly, beta, lambda, eps, n_max);
            let ig = Integrator::on_dyadic_box(phase, beta, &vec![eps; d], 1)?.with_budget(panel_budget);
            let (value, reliable) = match ig.evaluate(lambda) {
                Ok(e) => {
                    let v = e.abs();
                    (v, e.est_error <= 0.1 * v || e.est_error <= 1e-6 * bound)
                }
                Err(Error::PanelBudget { .. }) => (f64::NAN, false),
                Err(e) => return Err(e),
            };
            Ok(BoxBoundRow {
                lambda,
                j,
                value,
                bound,
                ratio: value / bound,
                reliable,
            })
        })
        .collect()
}

pub fn box_bound_constant(rows: &[BoxBoundRow]) -> f64 {
    rows.iter().filter(|r| r.reliable).map(|r| r.ratio).fold(0.0, f64::max)
}

pub fn box_bound_csv(rows: &[BoxBoundRow]) -> String {
    let mut s = String::from("lambda,j,value,bound,ratio\n");
    for r in rows {
        s.push_str(&format!(
            "{:e},{},{:e},{:e},{:e}\n",
            r.lambda, r.j, r.value, r.bound, r.ratio
        ));
    }
    s
}
