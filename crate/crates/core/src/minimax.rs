//! Value and optimal mixed strategies of finite two-player zero-sum matrix
//! games. The row player maximizes.
//!
//! Pure saddle points and single-row/column games are resolved by scans;
//! everything else goes through a dense tableau simplex with Bland's rule on
//! the standard LP obtained after shifting the payoffs to be positive.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimaxError {
    #[error("simplex did not terminate within {iterations} pivots")]
    NumericalFailure { iterations: usize },
    #[error("matrix game needs at least one row and one column and {expected} finite entries, got {rows}x{cols} with {len} entries")]
    BadShape {
        rows: usize,
        cols: usize,
        len: usize,
        expected: usize,
    },
}

/// Row-major payoff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, MinimaxError> {
        if rows == 0
            || cols == 0
            || entries.len() != rows * cols
            || entries.iter().any(|x| !x.is_finite())
        {
            return Err(MinimaxError::BadShape {
                rows,
                cols,
                len: entries.len(),
                expected: rows * cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MinimaxError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MinimaxError::BadShape {
                rows: rows.len(),
                cols,
                len: rows.iter().map(Vec::len).sum(),
                expected: rows.len() * cols,
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// `min_j (xᵀM)_j`: what the row strategy `x` guarantees.
    pub fn row_guarantee(&self, x: &[f64]) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.entry(i, j)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_i (My)_i`: the most the column strategy `y` concedes.
    pub fn col_guarantee(&self, y: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j) * y[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

pub fn matrix_value(game: &MatrixGame) -> Result<Solution, MinimaxError> {
    if let Some(s) = pure_solution(game.rows, game.cols, &game.entries) {
        return Ok(s);
    }
    if (game.rows, game.cols) == (2, 2) {
        return Ok(mixed_two_by_two(&game.entries));
    }
    simplex(game)
}

/// Value only, for hot loops over small row-major matrices.
pub fn value_of(rows: usize, cols: usize, entries: &[f64]) -> Result<f64, MinimaxError> {
    if rows == 1 {
        return Ok(entries.iter().copied().fold(f64::INFINITY, f64::min));
    }
    if cols == 1 {
        return Ok(entries.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    if let Some((i, j)) = saddle(rows, cols, entries) {
        return Ok(entries[i * cols + j]);
    }
    if (rows, cols) == (2, 2) {
        return Ok(mixed_two_by_two(entries).value);
    }
    let game = MatrixGame {
        rows,
        cols,
        entries: entries.to_vec(),
    };
    simplex(&game).map(|s| s.value)
}

fn unit(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

fn pure_solution(rows: usize, cols: usize, entries: &[f64]) -> Option<Solution> {
    let (i, j) = saddle(rows, cols, entries)?;
    Some(Solution {
        value: entries[i * cols + j],
        row_strategy: unit(rows, i),
        col_strategy: unit(cols, j),
    })
}

/// Entry that is the minimum of its row and the maximum of its column.
fn saddle(rows: usize, cols: usize, entries: &[f64]) -> Option<(usize, usize)> {
    let (mut best_row, mut maximin) = (0, f64::NEG_INFINITY);
    for i in 0..rows {
        let low = entries[i * cols..(i + 1) * cols]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if low > maximin {
            (best_row, maximin) = (i, low);
        }
    }
    let (mut best_col, mut minimax) = (0, f64::INFINITY);
    for j in 0..cols {
        let high = (0..rows)
            .map(|i| entries[i * cols + j])
            .fold(f64::NEG_INFINITY, f64::max);
        if high < minimax {
            (best_col, minimax) = (j, high);
        }
    }
    // rowmin(i*) ≤ M[i*, j*] ≤ colmax(j*), so equality pins the entry
    (maximin == minimax).then_some((best_row, best_col))
}

/// Equalizing strategies of a 2×2 game without a saddle point. Both `a - b`
/// and `d - c` share a sign there, as do `a - c` and `d - b`, so the sums
/// below never cancel.
fn mixed_two_by_two(e: &[f64]) -> Solution {
    let [a, b, c, d] = [e[0], e[1], e[2], e[3]];
    let x = (d - c) / ((a - b) + (d - c));
    let y = (d - b) / ((a - c) + (d - b));
    Solution {
        value: b + y * (a - b),
        row_strategy: vec![x, 1.0 - x],
        col_strategy: vec![y, 1.0 - y],
    }
}

const PIVOT_EPS: f64 = 1e-12;

/// Solves `max Σy  s.t.  A'y ≤ 1, y ≥ 0` with `A' = A - min(A) + 1`; the
/// optimum is `1/v'`, column weights come from the primal solution and row
/// weights from the slack prices.
fn simplex(game: &MatrixGame) -> Result<Solution, MinimaxError> {
    let (m, n) = (game.rows, game.cols);
    let low = game.entries.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = 1.0 - low;

    // tableau rows: m constraints then the objective; columns: n structural,
    // m slack, rhs
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = game.entry(i, j) + offset;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = 1.0;
    }
    // objective row holds reduced costs c_j - z_j; rhs slot holds -z
    for j in 0..n {
        t[m * width + j] = 1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let cap = 10 * (m + n) * (m + n);
    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| t[m * width + j] > PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + n + m] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - PIVOT_EPS
                            || (ratio <= best_ratio + PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best_ratio = best_ratio.min(ratio);
                    leave = Some(i);
                }
            }
        }
        // bounded: every column of A' is positive
        let Some(row) = leave else {
            return Err(MinimaxError::NumericalFailure { iterations: pivots });
        };
        pivot(&mut t, width, m + 1, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > cap {
            return Err(MinimaxError::NumericalFailure { iterations: pivots });
        }
    }

    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + n + m].max(0.0);
        }
    }
    let mut x: Vec<f64> = (0..m).map(|i| (-t[m * width + n + i]).max(0.0)).collect();
    let total_y: f64 = y.iter().sum();
    let total_x: f64 = x.iter().sum();
    if !(total_y > 0.0 && total_x > 0.0) {
        return Err(MinimaxError::NumericalFailure { iterations: pivots });
    }
    for v in &mut y {
        *v /= total_y;
    }
    for v in &mut x {
        *v /= total_x;
    }
    Ok(Solution {
        value: 1.0 / total_y - offset,
        row_strategy: x,
        col_strategy: y,
    })
}

fn pivot(t: &mut [f64], width: usize, height: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    for i in 0..height {
        if i == row {
            continue;
        }
        let factor = t[i * width + col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..width {
            t[i * width + j] -= factor * t[row * width + j];
        }
        t[i * width + col] = 0.0;
    }
}
