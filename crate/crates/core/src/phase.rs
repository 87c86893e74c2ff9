//! Polynomial phases, cutoffs and their floating-point evaluation.
//!
//! A [`Phase`] keeps exact rational coefficients; everything numeric goes
//! through [`NumericPoly`], a compiled double-precision copy.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64, Q};

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multidegree(pub Vec<u32>);

impl Multidegree {
    pub fn new(exponents: Vec<u32>) -> Self {
        Multidegree(exponents)
    }

    pub fn zeros(d: usize) -> Self {
        Multidegree(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `self + 𝟙`, as exact rationals.
    pub fn plus_ones(&self) -> Vec<Q> {
        self.0.iter().map(|&a| Q::from_integer(BigInt::from(a + 1))).collect()
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A real polynomial phase with φ(0) = 0 and ∇φ(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    dim: usize,
    terms: Vec<(Multidegree, Q)>,
}

impl Phase {
    /// Builds a normalized phase: terms sorted, duplicates merged, zeros dropped.
    pub fn new(dim: usize, terms: Vec<(Multidegree, Q)>) -> Result<Phase> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be at least 1".into()));
        }
        let mut merged: std::collections::BTreeMap<Multidegree, Q> = Default::default();
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.dim(),
                });
            }
            *merged.entry(alpha).or_insert_with(Q::zero) += c;
        }
        let terms: Vec<(Multidegree, Q)> = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Err(Error::EmptyPhase);
        }
        for (alpha, _) in &terms {
            match alpha.total() {
                0 => return Err(Error::ConstantTerm),
                1 => return Err(Error::LinearTerm(alpha.0.clone())),
                _ => {}
            }
        }
        Ok(Phase { dim, terms })
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(dim: usize, terms: &[(&[u32], i64)]) -> Result<Phase> {
        Phase::new(
            dim,
            terms
                .iter()
                .map(|(a, c)| (Multidegree(a.to_vec()), Q::from_integer(BigInt::from(*c))))
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Multidegree, Q)] {
        &self.terms
    }

    /// Taylor support, in lexicographic order.
    pub fn support(&self) -> Vec<Multidegree> {
        self.terms.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.total()).max().unwrap_or(0)
    }

    /// Terms of total degree at most `k`.
    pub fn truncate(&self, k: u32) -> Result<Phase> {
        let kept: Vec<_> = self.terms.iter().filter(|(a, _)| a.total() <= k).cloned().collect();
        if kept.is_empty() {
            return Err(Error::EmptyPhase);
        }
        Ok(Phase {
            dim: self.dim,
            terms: kept,
        })
    }

    /// The sub-polynomial on the given multidegrees (used for face polynomials).
    pub fn restrict(&self, keep: impl Fn(&Multidegree) -> bool) -> Vec<(Multidegree, Q)> {
        self.terms.iter().filter(|(a, _)| keep(a)).cloned().collect()
    }

    pub fn numeric(&self) -> NumericPoly {
        NumericPoly::from_exact(self.dim, &self.terms)
    }

    /// The polynomials x_j ∂_j φ, j = 1..d, differentiated exactly.
    pub fn scaled_gradient_polys(&self) -> Vec<NumericPoly> {
        scaled_gradient_of(self.dim, &self.terms)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.numeric().eval(x))
    }

    /// (x_1 ∂_1 φ(x), …, x_d ∂_d φ(x)).
    pub fn evaluate_scaled_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(self.scaled_gradient_polys().iter().map(|p| p.eval(x)).collect())
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

    /// Parses the JSON phase document `{"dimension": d, "terms": [...]}`.
    pub fn from_json(text: &str) -> Result<Phase> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: "document".into(),
            message: e.to_string(),
        })?;
        Phase::from_value(&doc)
    }

    pub fn from_value(doc: &Value) -> Result<Phase> {
        let perr = |field: &str, message: &str| Error::Parse {
            field: field.to_string(),
            message: message.to_string(),
        };
        let dim = doc
            .get("dimension")
            .and_then(Value::as_u64)
            .ok_or_else(|| perr("dimension", "expected a positive integer"))? as usize;
        if dim == 0 {
            return Err(perr("dimension", "expected a positive integer"));
        }
        let terms = doc
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("terms", "expected an array"))?;
        let mut parsed = Vec::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            let ef = format!("terms[{i}].exponents");
            let exps = t
                .get("exponents")
                .and_then(Value::as_array)
                .ok_or_else(|| perr(&ef, "expected an array of nonnegative integers"))?;
            let mut alpha = Vec::with_capacity(exps.len());
            for e in exps {
                let v = e
                    .as_u64()
                    .filter(|&v| v <= u32::MAX as u64)
                    .ok_or_else(|| perr(&ef, "expected an array of nonnegative integers"))?;
                alpha.push(v as u32);
            }
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.len(),
                });
            }
            let cf = format!("terms[{i}].coefficient");
            let c = match t.get("coefficient") {
                Some(Value::String(s)) => parse_rational(s)?,
                Some(Value::Number(n)) if n.is_i64() => Q::from_integer(BigInt::from(n.as_i64().unwrap())),
                Some(Value::Number(n)) if n.is_u64() => Q::from_integer(BigInt::from(n.as_u64().unwrap())),
                Some(other) => return Err(Error::MalformedRational(other.to_string())),
                None => return Err(perr(&cf, "missing")),
            };
            parsed.push((Multidegree(alpha), c));
        }
        Phase::new(dim, parsed)
    }

    pub fn to_value(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(a, c)| {
                serde_json::json!({
                    "exponents": a.0,
                    "coefficient": format_rational(c),
                })
            })
            .collect();
        serde_json::json!({ "dimension": self.dim, "terms": terms })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("phase serializes")
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = ["x", "y", "z", "w"];
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mag = c.abs();
            if mag != Q::from_integer(1.into()) {
                write!(f, "{}*", format_rational(&mag))?;
            }
            let mut first = true;
            for (j, &e) in alpha.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                let name = if self.dim <= vars.len() {
                    vars[j].to_string()
                } else {
                    format!("x{}", j + 1)
                };
                if e == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn scaled_gradient_of(dim: usize, terms: &[(Multidegree, Q)]) -> Vec<NumericPoly> {
    (0..dim)
        .map(|j| {
            let scaled: Vec<(Multidegree, Q)> = terms
                .iter()
                .filter(|(a, _)| a.0[j] != 0)
                .map(|(a, c)| (a.clone(), c * BigInt::from(a.0[j])))
                .collect();
            NumericPoly::from_exact(dim, &scaled)
        })
        .collect()
}

/// Double-precision polynomial used by all numerical code.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPoly {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl NumericPoly {
    pub fn from_exact(dim: usize, terms: &[(Multidegree, Q)]) -> NumericPoly {
        NumericPoly {
            dim,
            terms: terms.iter().map(|(a, c)| (a.0.clone(), to_f64(c))).collect(),
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> NumericPoly {
        NumericPoly { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == 0.0)
    }

    /// Direct monomial sum with Neumaier compensation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (alpha, c) in &self.terms {
            let mut m = *c;
            for (xi, &e) in x.iter().zip(alpha) {
                if e != 0 {
                    m *= xi.powi(e as i32);
                }
            }
            let t = sum + m;
            if sum.abs() >= m.abs() {
                comp += (sum - t) + m;
            } else {
                comp += (m - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    pub fn derivative(&self, j: usize) -> NumericPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a[j] > 0)
            .map(|(a, c)| {
                let mut b = a.clone();
                b[j] -= 1;
                (b, c * a[j] as f64)
            })
            .collect();
        NumericPoly { dim: self.dim, terms }
    }

    /// Upper bound for |p| on the box ∏[lo_i, hi_i], by the triangle inequality.
    pub fn abs_bound(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                let mut m = c.abs();
                for i in 0..self.dim {
                    if a[i] != 0 {
                        let r = lo[i].abs().max(hi[i].abs());
                        m *= r.powi(a[i] as i32);
                    }
                }
                m
            })
            .sum()
    }

    /// True when every term involves a single variable, so exp(iλp) factors.
    pub fn separable_blocks(&self) -> Option<Vec<NumericPoly>> {
        let mut blocks: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(); self.dim];
        for (a, c) in &self.terms {
            let vars: Vec<usize> = (0..self.dim).filter(|&i| a[i] != 0).collect();
            if vars.len() != 1 {
                return None;
            }
            blocks[vars[0]].push((vec![a[vars[0]]], *c));
        }
        Some(blocks.into_iter().map(|t| NumericPoly { dim: 1, terms: t }).collect())
    }
}

/// Shape of the cutoff ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    /// exp(-1/(1-(x/a)²)) per axis.
    Bump,
    /// Generalized smoothstep S_m(1 - |x|/a) per axis; C^m but not smooth.
    Smoothstep(u32),
}

/// Tensor-product cutoff supported in [-a, a]^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub radius: f64,
    pub kind: CutoffKind,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            radius: 0.5,
            kind: CutoffKind::Bump,
        }
    }
}

impl CutoffSpec {
    pub fn new(radius: f64, kind: CutoffKind) -> Result<CutoffSpec> {
        let c = CutoffSpec { radius, kind };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Invalid(format!(
                "cutoff radius must be positive, got {}",
                self.radius
            )));
        }
        if let CutoffKind::Smoothstep(m) = self.kind {
            if m < 2 {
                return Err(Error::Invalid(format!("smoothstep order must be at least 2, got {m}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<CutoffSpec> {
        let c: CutoffSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: "cutoff".into(),
            message: e.to_string(),
        })?;
        c.validate()?;
        Ok(c)
    }

    /// One-dimensional profile at coordinate `x`.
    pub fn profile(&self, x: f64) -> f64 {
        let u = x.abs() / self.radius;
        if u >= 1.0 {
            return 0.0;
        }
        match self.kind {
            CutoffKind::Bump => (-1.0 / (1.0 - u * u)).exp(),
            CutoffKind::Smoothstep(m) => smoothstep(m, 1.0 - u),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.profile(xi)).product()
    }

    /// ψ(0).
    pub fn at_origin(&self, d: usize) -> f64 {
        self.profile(0.0).powi(d as i32)
    }
}

/// S_m(t) = t^{m+1} Σ_{k=0}^{m} C(m+k, k) C(2m+1, m-k) (-t)^k, clamped to [0, 1].
pub fn smoothstep(m: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let m = m as u64;
    let mut s = 0.0;
    for k in 0..=m {
        let c = binom(m + k, k) * binom(2 * m + 1, m - k);
        s += c * (-t).powi(k as i32);
    }
    s * t.powi(m as i32 + 1)
}

fn binom(n: u64, k: u64) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Smooth bump supported in [1, 4], used for dyadic-box amplitudes.
pub fn box_bump(t: f64) -> f64 {
    let u = (t - 2.5) / 1.5;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn fig2_doc() -> &'static str {
        r#"{"dimension": 2, "terms": [
            {"exponents": [2, 2], "coefficient": 1},
            {"exponents": [1, 3], "coefficient": "1"},
            {"exponents": [4, 5], "coefficient": "-1/1"}]}"#
    }

    #[test]
    fn parses_fig2_phase_sorted() {
        let p = Phase::from_json(fig2_doc()).unwrap();
        let got: Vec<(Vec<u32>, Q)> = p.terms().iter().map(|(a, c)| (a.0.clone(), c.clone())).collect();
        assert_eq!(got, vec![(vec![1, 3], q(1)), (vec![2, 2], q(1)), (vec![4, 5], q(-1))]);
    }

    #[test]
    fn parses_fig3_phase() {
        let doc = r#"{"dimension": 2, "terms": [
            {"exponents": [5, 0], "coefficient": 1},
            {"exponents": [0, 4], "coefficient": 1},
            {"exponents": [4, 1], "coefficient": 1}]}"#;
        let p = Phase::from_json(doc).unwrap();
        let sup: Vec<Vec<u32>> = p.support().into_iter().map(|a| a.0).collect();
        assert_eq!(sup, vec![vec![0, 4], vec![4, 1], vec![5, 0]]);
    }

    #[test]
    fn rejects_constant_and_linear_terms() {
        let doc = r#"{"dimension": 1, "terms": [{"exponents": [0], "coefficient": 1}, {"exponents": [2], "coefficient": 1}]}"#;
        let err = Phase::from_json(doc).unwrap_err();
        assert_eq!(err, Error::ConstantTerm);
        assert_eq!(err.to_string(), "constant term forbidden");
        let doc = r#"{"dimension": 2, "terms": [{"exponents": [0, 1], "coefficient": 3}]}"#;
        assert!(matches!(Phase::from_json(doc), Err(Error::LinearTerm(_))));
    }

    #[test]
    fn merge_to_zero_and_bad_input() {
        let doc = r#"{"dimension": 1, "terms": [{"exponents": [2], "coefficient": "1/2"}, {"exponents": [2], "coefficient": "-1/2"}]}"#;
        assert_eq!(Phase::from_json(doc), Err(Error::EmptyPhase));
        let doc = r#"{"dimension": 1, "terms": [{"exponents": [2], "coefficient": "1/x"}]}"#;
        assert!(matches!(Phase::from_json(doc), Err(Error::MalformedRational(_))));
        let doc = r#"{"dimension": 2, "terms": [{"exponents": [2], "coefficient": 1}]}"#;
        assert!(matches!(Phase::from_json(doc), Err(Error::DimensionMismatch { .. })));
        let doc = r#"{"dimension": 2}"#;
        match Phase::from_json(doc) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "terms"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merges_duplicates() {
        let p = Phase::new(
            1,
            vec![
                (Multidegree(vec![3]), qf(1, 3)),
                (Multidegree(vec![3]), qf(2, 3)),
                (Multidegree(vec![2]), q(1)),
            ],
        )
        .unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[1].1, q(1));
    }

    #[test]
    fn evaluation_examples() {
        let circle = Phase::from_int_terms(2, &[(&[2, 0], 1), (&[0, 2], 1)]).unwrap();
        assert_eq!(circle.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(circle.evaluate(&[1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(circle.evaluate_scaled_gradient(&[1.0, 2.0]).unwrap(), vec![2.0, 8.0]);
        let p = Phase::from_int_terms(2, &[(&[2, 2], 1), (&[1, 3], 1)]).unwrap();
        assert_eq!(p.evaluate(&[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(p.evaluate_scaled_gradient(&[1.0, 1.0]).unwrap(), vec![3.0, 5.0]);
        let sq = Phase::from_int_terms(2, &[(&[2, 0], 1), (&[1, 1], -2), (&[0, 2], 1)]).unwrap();
        assert_eq!(sq.evaluate_scaled_gradient(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(circle.evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(circle.evaluate_scaled_gradient(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn display_is_readable() {
        let p = Phase::from_json(fig2_doc()).unwrap();
        assert_eq!(p.to_string(), "x*y^3 + x^2*y^2 - x^4*y^5");
    }

    #[test]
    fn cutoff_schema() {
        let c = CutoffSpec::from_json(r#"{"radius": 0.5, "kind": "bump"}"#).unwrap();
        assert_eq!(c.kind, CutoffKind::Bump);
        assert!((c.at_origin(1) - (-1.0f64).exp()).abs() < 1e-15);
        let c = CutoffSpec::from_json(r#"{"radius": 1.0, "kind": {"smoothstep": 3}}"#).unwrap();
        assert_eq!(c.kind, CutoffKind::Smoothstep(3));
        assert_eq!(c.profile(0.0), 1.0);
        assert_eq!(c.profile(1.0), 0.0);
        assert!(CutoffSpec::from_json(r#"{"radius": -1.0, "kind": "bump"}"#).is_err());
        assert!(CutoffSpec::from_json(r#"{"radius": 1.0, "kind": {"smoothstep": 1}}"#).is_err());
    }

    #[test]
    fn smoothstep_is_flat_at_both_ends() {
        for m in 2..5 {
            let h = 1e-4;
            assert!(smoothstep(m, h) < 1e-8);
            assert!(1.0 - smoothstep(m, 1.0 - h) < 1e-8);
            assert!((smoothstep(m, 0.5) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_detection() {
        let circle = Phase::from_int_terms(2, &[(&[2, 0], 1), (&[0, 2], 1)]).unwrap();
        assert!(circle.numeric().separable_blocks().is_some());
        let p = Phase::from_int_terms(2, &[(&[2, 2], 1)]).unwrap();
        assert!(p.numeric().separable_blocks().is_none());
    }
}
