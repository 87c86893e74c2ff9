//! Exact linear algebra over the rationals: elimination, rank, solving and a
//! small dense simplex method. Matrices here are tiny (d ≤ 4 columns, a few
//! dozen rows), so everything is plain row-major `Vec<Vec<Q>>`.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

/// Rank of a list of row vectors.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    row_echelon(&mut m)
}

/// Reduces `m` in place to row echelon form and returns its rank.
fn row_echelon(m: &mut [Vec<Q>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &m[r][c];
            for k in c..cols {
                let t = &f * &m[r][k];
                m[i][k] -= t;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = Q::one() / &m[c][c];
        for k in c..=n {
            m[c][k] = &m[c][k] * &inv;
        }
        for i in 0..n {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for k in c..=n {
                let t = &f * &m[c][k];
                m[i][k] -= t;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

pub fn inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Q> = (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Operator ∞-norm (maximum absolute row sum).
pub fn inf_norm(a: &[Vec<Q>]) -> Q {
    a.iter()
        .map(|row| row.iter().fold(Q::zero(), |s, x| s + x.abs()))
        .max()
        .unwrap_or_else(Q::zero)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Q, x: Vec<Q> },
}

/// Minimizes `c·x` subject to `a x = b`, `x ≥ 0`, exactly.
///
/// Two-phase tableau simplex with Bland's rule, so it terminates on
/// degenerate problems.
pub fn minimize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    // Normalize to b ≥ 0.
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut rhs: Vec<Q> = Vec::with_capacity(m);
    for (row, bi) in a.iter().zip(b) {
        if bi.is_negative() {
            rows.push(row.iter().map(|x| -x).collect());
            rhs.push(-bi);
        } else {
            rows.push(row.clone());
            rhs.push(bi.clone());
        }
    }
    // Tableau columns: n structural, m artificial, then rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = (0..m)
        .map(|i| {
            let mut r = Vec::with_capacity(width);
            r.extend(rows[i].iter().cloned());
            r.extend((0..m).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase one: minimize the sum of artificials.
    let mut cost1 = vec![Q::zero(); n + m];
    for c1 in cost1.iter_mut().skip(n) {
        *c1 = Q::one();
    }
    if !run_simplex(&mut t, &mut basis, &cost1, n + m) {
        return LpOutcome::Unbounded; // cannot happen in phase one
    }
    let infeas = basis
        .iter()
        .enumerate()
        .fold(Q::zero(), |s, (i, &bv)| s + &cost1[bv] * &t[i][width - 1]);
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // Phase two on structural columns only.
    let mut cost2 = vec![Q::zero(); n + m];
    cost2[..n].clone_from_slice(c);
    // Artificials still basic sit in redundant rows with value zero; forbid entering them.
    if !run_simplex(&mut t, &mut basis, &cost2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    let value = c.iter().zip(&x).fold(Q::zero(), |s, (ci, xi)| s + ci * xi);
    LpOutcome::Optimal { value, x }
}

/// Runs simplex iterations; columns `>= allowed` never enter. Returns false if unbounded.
fn run_simplex(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> bool {
    let m = t.len();
    let width = t.first().map_or(0, |r| r.len());
    loop {
        // Reduced costs r_j = c_j - c_B B^{-1} a_j, computed from the tableau.
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut r = cost[j].clone();
            for i in 0..m {
                r -= &cost[basis[i]] * &t[i][j];
            }
            r.is_negative()
        });
        let Some(j) = entering else {
            return true;
        };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return false;
        };
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], row: usize, col: usize) {
    let width = t[row].len();
    let inv = Q::one() / &t[row][col];
    for k in 0..width {
        t[row][k] = &t[row][k] * &inv;
    }
    for i in 0..t.len() {
        if i == row || t[i][col].is_zero() {
            continue;
        }
        let f = t[i][col].clone();
        for k in 0..width {
            let v = &f * &t[row][k];
            t[i][k] -= v;
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn rank_and_solve() {
        assert_eq!(rank(&m(&[&[1, 3], &[2, 6]])), 1);
        assert_eq!(rank(&m(&[&[1, 3], &[2, 2]])), 2);
        assert_eq!(rank(&m(&[&[0, 0]])), 0);
        let w = solve(&m(&[&[1, 3], &[2, 2]]), &[q(1), q(1)]).unwrap();
        assert_eq!(w, vec![qf(1, 4), qf(1, 4)]);
        assert!(solve(&m(&[&[1, 3], &[2, 6]]), &[q(1), q(1)]).is_none());
    }

    #[test]
    fn inverse_and_norm() {
        let inv = inverse(&m(&[&[5, 0], &[0, 4]])).unwrap();
        assert_eq!(inv[0][0], qf(1, 5));
        assert_eq!(inf_norm(&inv), qf(1, 4));
        assert_eq!(inf_norm(&m(&[&[1, -3], &[2, 2]])), q(4));
    }

    #[test]
    fn simplex_small_problems() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = m(&[&[1, 2, 1, 0], &[3, 1, 0, 1]]);
        let c = vec![q(-1), q(-1), q(0), q(0)];
        match minimize(&c, &a, &[q(4), q(6)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, qf(-14, 5)),
            other => panic!("{other:?}"),
        }
        // x + y = -1 with x,y ≥ 0 is infeasible.
        let a = m(&[&[1, 1]]);
        assert_eq!(minimize(&[q(0), q(0)], &a, &[q(-1)]), LpOutcome::Infeasible);
        // min -x s.t. x - y = 0 is unbounded.
        let a = m(&[&[1, -1]]);
        assert_eq!(minimize(&[q(-1), q(0)], &a, &[q(0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn simplex_redundant_rows() {
        let a = m(&[&[1, 1], &[2, 2]]);
        match minimize(&[q(1), q(2)], &a, &[q(1), q(2)]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(1));
                assert_eq!(x, vec![q(1), q(0)]);
            }
            other => panic!("{other:?}"),
        }
    }
}
