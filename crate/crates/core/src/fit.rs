//! Decay-rate and expansion fits on λ-sweeps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::ExponentLadder;
use crate::quadrature::SweepResult;
use crate::rational::{serde_q, to_f64, Q};

/// Minimum number of rows a fit may use.
pub const MIN_FIT_POINTS: usize = 8;
/// Minimum width of the fitting window, in decades of λ.
pub const MIN_DECADES: f64 = 2.0;
/// Condition number above which an expansion basis is considered collinear.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub p_hat: f64,
    pub q_hat: u32,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    /// RMS residual in log space.
    pub residual: f64,
    /// RMS residual for every candidate log power, indexed by q.
    pub residual_by_q: Vec<f64>,
    pub window: [f64; 2],
    pub points: usize,
}

/// Fits |I| ≈ C λ^{-p} log^q λ with q ∈ {0, …, d−1} chosen by least RMS residual.
/// The lowest decade of the unflagged rows is dropped.
pub fn decay_fit(sweep: &SweepResult, d: usize) -> Result<DecayFit> {
    let rows: Vec<(f64, f64)> = sweep.unflagged().map(|r| (r.lambda, r.abs)).collect();
    let Some(first) = rows.first().map(|r| r.0) else {
        return Err(Error::NotEnoughData("no unflagged rows".into()));
    };
    let cut = first * 10.0 * (1.0 - 1e-12);
    let kept: Vec<(f64, f64)> = rows.into_iter().filter(|r| r.0 >= cut).collect();
    fit_power_log(&kept, d)
}

/// The same model fit on explicit (λ, |I|) pairs without dropping rows.
pub fn fit_power_log(rows: &[(f64, f64)], d: usize) -> Result<DecayFit> {
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::NotEnoughData(format!(
            "{} rows in the window, at least {MIN_FIT_POINTS} required",
            rows.len()
        )));
    }
    if rows.iter().any(|r| !(r.0 > 1.0) || !(r.1 > 0.0) || !r.1.is_finite()) {
        return Err(Error::Invalid("decay fit needs λ > 1 and finite |I| > 0".into()));
    }
    let lo = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    if (hi / lo).log10() < MIN_DECADES - 1e-9 {
        return Err(Error::IllConditioned(format!(
            "window [{lo:e}, {hi:e}] spans fewer than {MIN_DECADES} decades"
        )));
    }
    let mut best: Option<(u32, f64, f64, f64)> = None;
    let mut residual_by_q = Vec::new();
    for qv in 0..d.max(1) as u32 {
        let (p, logc, rms) = linear_fit(rows, qv);
        residual_by_q.push(rms);
        let better = match best {
            None => true,
            Some((_, _, _, r)) => rms < r * (1.0 - 1e-9) && rms < r - 1e-14,
        };
        if better {
            best = Some((qv, p, logc, rms));
        }
    }
    let (q_hat, p_hat, logc, residual) = best.expect("at least one candidate");
    Ok(DecayFit {
        p_hat,
        q_hat,
        c_hat: logc.exp(),
        residual,
        residual_by_q,
        window: [lo, hi],
        points: rows.len(),
    })
}

/// Least squares of log|I| − q log log λ on (−log λ, 1); returns (p, log C, rms).
fn linear_fit(rows: &[(f64, f64)], qv: u32) -> (f64, f64, f64) {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| -r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln() - qv as f64 * r.0.ln().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - p * x - b).powi(2)).sum::<f64>() / n).sqrt();
    (p, b, rms)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedTerm {
    #[serde(with = "serde_q")]
    pub p: Q,
    /// Power of log λ multiplying λ^{-p}.
    pub log_power: u32,
    pub re: f64,
    pub im: f64,
}

impl FittedTerm {
    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub terms: Vec<FittedTerm>,
    /// Decay exponent of |I − Σ reported terms|; +∞ when the residual is lost in noise.
    pub residual_exponent: f64,
    pub condition_number: f64,
    /// Extra ladder terms included in the solve but not reported.
    pub guard_terms: usize,
}

impl ExpansionFit {
    pub fn evaluate(&self, lambda: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coefficient() * basis(lambda, to_f64(&t.p), t.log_power))
            .sum()
    }
}

fn basis(lambda: f64, p: f64, log_power: u32) -> f64 {
    lambda.powf(-p) * lambda.ln().powi(log_power as i32)
}

/// Complex least squares of I(λ) on {λ^{-p_j} log^{d_j−1−r} λ}, j < n_terms.
///
/// Up to two further ladder exponents are fitted alongside to absorb the
/// next corrections; they are dropped from the report.
pub fn expansion_fit(sweep: &SweepResult, ladder: &ExponentLadder, n_terms: usize) -> Result<ExpansionFit> {
    if n_terms == 0 {
        return Err(Error::Invalid("n_terms must be positive".into()));
    }
    if ladder.terms.len() < n_terms + 1 {
        return Err(Error::Invalid(format!(
            "ladder has {} exponents, need at least {}",
            ladder.terms.len(),
            n_terms + 1
        )));
    }
    let rows: Vec<(f64, Complex64, f64)> = sweep.unflagged().map(|r| (r.lambda, r.value(), r.est_error)).collect();
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::NotEnoughData(format!("{} unflagged rows", rows.len())));
    }
    let lo = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    if (hi / lo).log10() < 3.0 - 1e-9 {
        return Err(Error::IllConditioned(format!(
            "expansion fit needs 3 decades, window is [{lo:e}, {hi:e}]"
        )));
    }
    let p0 = to_f64(&ladder.terms[0].p);
    let max_guard = (ladder.terms.len() - n_terms).min(2);
    let mut last_cond = f64::INFINITY;
    for guard in (0..=max_guard).rev() {
        let cols: Vec<(Q, u32)> = ladder.terms[..n_terms + guard]
            .iter()
            .flat_map(|t| (0..t.d as u32).map(move |r| (t.p.clone(), t.d as u32 - 1 - r)))
            .collect();
        let reported = ladder.terms[..n_terms].iter().map(|t| t.d).sum::<usize>();
        let (coef, cond) = solve_weighted(&rows, &cols, p0);
        last_cond = cond;
        if cond > MAX_CONDITION {
            continue;
        }
        let terms: Vec<FittedTerm> = cols[..reported]
            .iter()
            .zip(&coef)
            .map(|((p, lp), c)| FittedTerm {
                p: p.clone(),
                log_power: *lp,
                re: c.re,
                im: c.im,
            })
            .collect();
        let mut fit = ExpansionFit {
            terms,
            residual_exponent: f64::INFINITY,
            condition_number: cond,
            guard_terms: guard,
        };
        fit.residual_exponent = residual_exponent(&rows, &fit);
        return Ok(fit);
    }
    Err(Error::Collinear(last_cond))
}

/// Rows weighted by λ^{p0}, columns scaled to unit norm, solved by SVD.
fn solve_weighted(rows: &[(f64, Complex64, f64)], cols: &[(Q, u32)], p0: f64) -> (Vec<Complex64>, f64) {
    let m = rows.len();
    let n = cols.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (i, (l, _, _)) in rows.iter().enumerate() {
        let w = l.powf(p0);
        for (j, (p, lp)) in cols.iter().enumerate() {
            a[(i, j)] = w * basis(*l, to_f64(p), *lp);
        }
    }
    let scale: Vec<f64> = (0..n).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for j in 0..n {
        let s = scale[j];
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let solve = |part: &dyn Fn(&Complex64) -> f64| -> DVector<f64> {
        let b = DVector::from_iterator(m, rows.iter().map(|(l, v, _)| l.powf(p0) * part(v)));
        svd.solve(&b, 0.0).unwrap_or_else(|_| DVector::zeros(n))
    };
    let re = solve(&|v| v.re);
    let im = solve(&|v| v.im);
    let coef = (0..n)
        .map(|j| Complex64::new(re[j] / scale[j], im[j] / scale[j]))
        .collect();
    (coef, cond)
}

/// Relative level below which a residual is indistinguishable from double rounding.
pub const ROUNDOFF: f64 = 1e-13;

/// Decay exponent of |I − fit| on rows where the residual exceeds the quadrature noise.
fn residual_exponent(rows: &[(f64, Complex64, f64)], fit: &ExpansionFit) -> f64 {
    let res: Vec<(f64, f64)> = rows
        .iter()
        .map(|(l, v, e)| (*l, (*v - fit.evaluate(*l)).norm(), e.max(ROUNDOFF * v.norm())))
        .filter(|(_, r, e)| *r > 10.0 * e && *r > 1e-300)
        .map(|(l, r, _)| (l, r))
        .collect();
    if res.len() < MIN_FIT_POINTS {
        return f64::INFINITY;
    }
    let lo = res[0].0;
    let hi = res[res.len() - 1].0;
    if (hi / lo).log10() < 1.0 {
        return f64::INFINITY;
    }
    let (p, _, _) = linear_fit(&res, 0);
    p
}
