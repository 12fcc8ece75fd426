//! Dense two-phase primal simplex for small standard-form programs:
//! minimize `c . x` subject to `A x = b`, `x >= 0`.
//!
//! Phase one minimizes the sum of artificial slacks, so a feasible basic
//! solution falls out as a witness whenever the optimum reaches zero. Bland's
//! rule picks pivots, which makes every run deterministic and rules out
//! cycling. The problems solved here have a handful of rows and at most a few
//! thousand columns, so a dense tableau is the right tool.

/// Phase-one optimum below this threshold counts as feasible.
pub(crate) const FEASIBILITY_EPS: f64 = 1e-8;
/// Reduced costs above `-PIVOT_EPS` are treated as nonnegative.
const PIVOT_EPS: f64 = 1e-9;
/// Pivot elements smaller than this are not eligible in the ratio test.
const RATIO_EPS: f64 = 1e-10;
/// Ratios within this of the minimum tie-break by smallest basic index.
const TIE_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) enum LpResult {
    Optimal {
        x: Vec<f64>,
        #[allow(dead_code)] // read by tests and Debug formatting
        objective: f64,
    },
    Infeasible {
        #[allow(dead_code)]
        infeasibility: f64,
    },
    Unbounded,
    PivotLimit,
}

enum LoopEnd {
    Optimal,
    Unbounded,
    Limit,
}

/// Solves `min c.x  s.t.  rows[i] . x = rhs[i], x >= 0`.
pub(crate) fn solve(objective: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> LpResult {
    let m = rows.len();
    let n = objective.len();
    debug_assert_eq!(rhs.len(), m);
    let width = n + m + 1;

    // Tableau with one artificial column per row; right-hand sides are made
    // nonnegative by sign-flipping rows, so the artificials form a feasible
    // starting basis.
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let s = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut tr = vec![0.0; width];
        for (j, &a) in row.iter().enumerate() {
            tr[j] = s * a;
        }
        tr[n + i] = 1.0;
        tr[width - 1] = s * rhs[i];
        t.push(tr);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase-one reduced costs: cost 1 on artificials priced over the
    // artificial basis leaves `-sum of rows` on structural columns.
    let mut obj = vec![0.0; width];
    for tr in &t {
        for (o, a) in obj.iter_mut().zip(tr) {
            *o -= a;
        }
    }
    for o in obj.iter_mut().skip(n).take(m) {
        *o = 0.0;
    }

    let limit = 1000 + 60 * (n + m);
    match pivot_loop(&mut t, &mut obj, &mut basis, width, limit) {
        LoopEnd::Optimal => {}
        // A phase-one objective is bounded below by zero.
        LoopEnd::Unbounded => return LpResult::PivotLimit,
        LoopEnd::Limit => return LpResult::PivotLimit,
    }
    let infeasibility = -obj[width - 1];
    if infeasibility > FEASIBILITY_EPS {
        return LpResult::Infeasible { infeasibility };
    }

    // Drive leftover artificials out of the basis. A row whose structural
    // coefficients are all zero is redundant; its artificial stays basic at
    // level zero and is banned from re-entering below.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > RATIO_EPS) {
                pivot(&mut t, &mut obj, &mut basis, i, j);
            }
        }
    }

    // Phase two: price the real objective over the current basis and ban the
    // artificial columns by making them prohibitively expensive to enter.
    let mut obj2 = vec![0.0; width];
    obj2[..n].copy_from_slice(objective);
    for o in obj2.iter_mut().skip(n).take(m) {
        *o = f64::INFINITY;
    }
    for (i, tr) in t.iter().enumerate() {
        let cb = if basis[i] < n {
            objective[basis[i]]
        } else {
            0.0
        };
        if cb != 0.0 {
            for (o, a) in obj2.iter_mut().zip(tr) {
                *o -= cb * a;
            }
        }
    }
    for &b in &basis {
        obj2[b] = 0.0;
    }

    match pivot_loop(&mut t, &mut obj2, &mut basis, width, limit) {
        LoopEnd::Optimal => {}
        LoopEnd::Unbounded => return LpResult::Unbounded,
        LoopEnd::Limit => return LpResult::PivotLimit,
    }

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][width - 1].max(0.0);
        }
    }
    let objective_value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpResult::Optimal {
        x,
        objective: objective_value,
    }
}

fn pivot_loop(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    width: usize,
    limit: usize,
) -> LoopEnd {
    for _ in 0..limit {
        // Bland: entering column is the lowest index with negative reduced
        // cost.
        let enter = (0..width - 1).find(|&j| obj[j] < -PIVOT_EPS);
        let Some(j) = enter else {
            return LoopEnd::Optimal;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for (i, tr) in t.iter().enumerate() {
            let a = tr[j];
            if a > RATIO_EPS {
                let ratio = tr[width - 1].max(0.0) / a;
                let better = ratio < best - TIE_EPS;
                let tied =
                    (ratio - best).abs() <= TIE_EPS && leave.is_some_and(|l| basis[i] < basis[l]);
                if better || tied {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            return LoopEnd::Unbounded;
        };
        pivot(t, obj, basis, r, j);
    }
    LoopEnd::Limit
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize], r: usize, j: usize) {
    let piv = t[r][j];
    for v in t[r].iter_mut() {
        *v /= piv;
    }
    t[r][j] = 1.0;
    let pivot_row = std::mem::take(&mut t[r]);
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[j];
        if f != 0.0 {
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
            row[j] = 0.0;
        }
    }
    let f = obj[j];
    if f != 0.0 && f.is_finite() {
        for (o, &y) in obj.iter_mut().zip(&pivot_row) {
            *o -= f * y;
        }
    }
    obj[j] = 0.0;
    t[r] = pivot_row;
    basis[r] = j;
}
