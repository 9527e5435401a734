//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use tauber::density::{Density, Normalization};
use tauber::games::{GameRng, StochasticGame};

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Quadrature of `f` over `[a, b]` split at the given interior points.
pub fn simpson_split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cuts: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(cuts.iter().copied().filter(|c| *c > a && *c < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    let pieces = (points.len() - 1) as f64;
    points
        .windows(2)
        .map(|w| simpson(f, w[0], w[1], tol / pieces))
        .sum()
}

/// Root of a monotone `f` on `[lo, hi]` with a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let rising = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Quadrature CDF that ignores the closed forms.
pub fn quadrature_cdf(rho: &Density, t: f64) -> f64 {
    let cuts = rho
        .as_steps()
        .map(|s| s.breakpoints().to_vec())
        .unwrap_or_default();
    simpson_split(&|x| rho.pdf(x), 0.0, t, &cuts, 1e-12)
}

/// `max_x min_j (xᵀM)_j` over a grid of `points + 1` mixtures of two rows.
pub fn grid_value_two_rows(m: &[Vec<f64>], points: usize) -> f64 {
    (0..=points)
        .map(|i| {
            let x = i as f64 / points as f64;
            (0..m[0].len())
                .map(|j| x * m[0][j] + (1.0 - x) * m[1][j])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn uniform_in(rng: &mut GameRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_unit()
}

/// Step density with `cells` positive levels on a random grid starting at 0.
pub fn random_steps(rng: &mut GameRng, cells: usize, span: f64) -> Density {
    let mut breakpoints = vec![0.0];
    let widths: Vec<f64> = (0..cells).map(|_| uniform_in(rng, 0.2, 1.0)).collect();
    let total: f64 = widths.iter().sum();
    for w in widths {
        let last = *breakpoints.last().unwrap();
        breakpoints.push(last + w * span / total);
    }
    let levels = (0..cells).map(|_| uniform_in(rng, 0.1, 2.0)).collect();
    Density::piecewise_constant(breakpoints, levels, Normalization::Renormalize).unwrap()
}

/// One density of kind `kind % 4` with parameters tame enough for short
/// horizons at tight truncation.
pub fn random_density(rng: &mut GameRng, kind: usize) -> Density {
    match kind % 4 {
        0 => Density::uniform(uniform_in(rng, 0.5, 40.0)).unwrap(),
        1 => Density::exponential(uniform_in(rng, 0.2, 3.0)).unwrap(),
        2 => Density::power(
            uniform_in(rng, 0.5, 2.0),
            uniform_in(rng, 0.5, 2.0),
            uniform_in(rng, 3.0, 5.0),
        )
        .unwrap(),
        _ => {
            let cells = 1 + rng.next_below(12);
            let span = uniform_in(rng, 1.0, 30.0);
            random_steps(rng, cells, span)
        }
    }
}

pub fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Values of every pure stationary policy of a maximizer-only game under
/// discount `beta`, by solving the policy's linear system with Gaussian
/// elimination; returns the pointwise best.
pub fn best_stationary_discounted(game: &StochasticGame, beta: f64) -> Vec<f64> {
    let n = game.state_count();
    assert!(game.actions_min.iter().all(|&b| b == 1));
    let mut best = vec![f64::NEG_INFINITY; n];
    let total: usize = game.actions_max.iter().product();
    for code in 0..total {
        let mut c = code;
        let policy: Vec<usize> = game
            .actions_max
            .iter()
            .map(|&a| {
                let pick = c % a;
                c /= a;
                pick
            })
            .collect();
        // (I - βP) v = (1-β) g
        let mut m = vec![vec![0.0; n + 1]; n];
        for s in 0..n {
            let row = game.transition(s, policy[s], 0);
            for t in 0..n {
                m[s][t] = if s == t { 1.0 } else { 0.0 } - beta * row[t];
            }
            m[s][n] = (1.0 - beta) * game.payoff[s];
        }
        let v = solve(m);
        for s in 0..n {
            best[s] = best[s].max(v[s]);
        }
    }
    best
}

fn solve(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let factor = m[r][col] / m[col][col];
                let pivot_row = m[col].clone();
                for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    (0..n).map(|r| m[r][n] / m[r][r]).collect()
}

/// `Σ level · width` straight from the cells.
pub fn step_mass(rho: &Density) -> f64 {
    let s = rho.as_steps().expect("step density");
    s.levels()
        .iter()
        .zip(s.breakpoints().windows(2))
        .map(|(l, w)| l * (w[1] - w[0]))
        .sum()
}

/// Mass by quadrature on `[0, q(1 - 1e-7)]` plus the exact remainder.
pub fn quadrature_mass(rho: &Density) -> f64 {
    let end = rho
        .support_end()
        .unwrap_or_else(|| rho.upper_quantile(1e-7).unwrap());
    let cuts = rho
        .as_steps()
        .map(|s| s.breakpoints().to_vec())
        .unwrap_or_default();
    simpson_split(&|x| rho.pdf(x), 0.0, end, &cuts, 1e-11) + rho.tail_mass(end)
}
