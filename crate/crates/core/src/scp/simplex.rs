//! Dense tableau primal simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible from the start, so there is no phase one.
//! Pivoting follows Bland's rule, which rules out cycling on degenerate
//! vertices.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex hit its iteration cap of {0}")]
    IterationCap(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Shadow price of each constraint row (the optimal dual solution).
    pub duals: Vec<f64>,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64], max_pivots: usize) -> Result<LpSolution, SimplexError> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(SimplexError::Malformed("constraint matrix shape mismatch".into()));
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(SimplexError::Malformed("right-hand side must be non-negative".into()));
    }
    let width = n + m + 1;
    let rhs = n + m;
    // rows 0..m constraints, row m objective (reduced costs, minimised form)
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[rhs] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    loop {
        let obj = &t[m * width..(m + 1) * width];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -PIVOT_EPS) else {
            break;
        };
        if pivots >= max_pivots {
            return Err(SimplexError::IterationCap(max_pivots));
        }
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + enter];
            if aij > PIVOT_EPS {
                let ratio = t[i * width + rhs] / aij;
                let better = match leave {
                    None => true,
                    Some((k, r)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave.ok_or(SimplexError::Unbounded)?;
        pivot(&mut t, width, m + 1, row, enter);
        basis[row] = enter;
        pivots += 1;
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i * width + rhs];
        }
    }
    let obj = &t[m * width..(m + 1) * width];
    let duals = (0..m).map(|i| obj[n + i]).collect();
    Ok(LpSolution {
        objective: obj[rhs],
        x,
        duals,
        pivots,
    })
}

fn pivot(t: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for r in 0..rows {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f == 0.0 {
            continue;
        }
        for (v, pv) in t[r * width..(r + 1) * width].iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        t[r * width + col] = 0.0;
    }
}
