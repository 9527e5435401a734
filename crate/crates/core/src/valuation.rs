//! Weighted game values `𝒱[ρ]`: the value of the game whose payoff is
//! `∫ ρ(t) g(z(t)) dt` along the (stepwise) state process.
//!
//! The main route is backward induction over unit stages with weights
//! `θ_n = ∫_n^{n+1} ρ`. Truncating after `N` stages leaves an unknown
//! continuation worth between `0` and `tail = ∫_N^∞ ρ` (payoffs are in
//! `[0, 1]`), so running the recursion from both terminal conditions yields a
//! bracket that contains the exact value. Independent routes (series
//! summation for chains, discounted fixed point for exponential densities)
//! serve as oracles.

use std::ops::{Deref, Index};

use thiserror::Error;

use crate::density::{Density, DensityError};
use crate::games::{StepProcess, StochasticGame};
use crate::minimax::{self, MinimaxError};

/// Backward induction refuses horizons longer than this many stages.
pub const HORIZON_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error("tail mass never drops to {tail_eps} within {cap} stages for {density}")]
    TailNeverSmall {
        tail_eps: f64,
        cap: u64,
        density: String,
    },
    #[error("game has non-singleton action sets; not a Markov chain")]
    NotAChain,
    #[error("no density mass beyond stage {at}")]
    ZeroTailMass { at: u64 },
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Minimax(#[from] MinimaxError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// One real per state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFunction(pub Vec<f64>);

impl StateFunction {
    pub fn constant(states: usize, value: f64) -> Self {
        Self(vec![value; states])
    }

    pub fn sup_distance(&self, other: &StateFunction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for StateFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-state interval `[lo, hi]` containing the exact weighted value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueBracket {
    pub lo: StateFunction,
    pub hi: StateFunction,
    /// Truncated tail mass; `hi - lo` never exceeds it.
    pub tail: f64,
}

impl ValueBracket {
    pub fn exact(values: StateFunction) -> Self {
        Self {
            hi: values.clone(),
            lo: values,
            tail: 0.0,
        }
    }

    pub fn midpoint(&self) -> StateFunction {
        StateFunction(
            self.lo
                .iter()
                .zip(self.hi.iter())
                .map(|(l, h)| 0.5 * (l + h))
                .collect(),
        )
    }

    /// Largest per-state width.
    pub fn width(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, values: &[f64], slack: f64) -> bool {
        values
            .iter()
            .enumerate()
            .all(|(s, v)| *v >= self.lo[s] - slack && *v <= self.hi[s] + slack)
    }

    pub fn overlaps(&self, other: &ValueBracket, slack: f64) -> bool {
        (0..self.lo.len())
            .all(|s| self.lo[s] <= other.hi[s] + slack && other.lo[s] <= self.hi[s] + slack)
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }
}

fn check_game(game: &StochasticGame) -> Result<(), ValuationError> {
    match game.validate().first() {
        None => Ok(()),
        Some(v) => Err(ValuationError::InvalidGame(v.to_string())),
    }
}

/// Scratch space for one-stage lookahead values.
struct Stage<'a> {
    game: &'a StochasticGame,
    matrix: Vec<f64>,
}

impl<'a> Stage<'a> {
    fn new(game: &'a StochasticGame) -> Self {
        Self {
            game,
            matrix: Vec::new(),
        }
    }

    /// Matrix-game value of `Σ_ω' kernel(ω, a, b)(ω') · next(ω')`.
    fn continuation(&mut self, state: usize, next: &[f64]) -> Result<f64, MinimaxError> {
        let (rows, cols) = (self.game.actions_max[state], self.game.actions_min[state]);
        self.matrix.clear();
        for row in &self.game.kernel[state] {
            for dist in row {
                self.matrix
                    .push(dist.iter().zip(next).map(|(p, v)| p * v).sum::<f64>());
            }
        }
        minimax::value_of(rows, cols, &self.matrix)
    }

    /// One backward step `W(ω) = θ g(ω) + val[continuation of next]`.
    fn step(&mut self, weight: f64, next: &[f64], out: &mut [f64]) -> Result<(), MinimaxError> {
        for (state, slot) in out.iter_mut().enumerate() {
            *slot = weight * self.game.payoff[state] + self.continuation(state, next)?;
        }
        Ok(())
    }
}

/// Backward induction over `weights` (stage 0 first) from two terminal
/// conditions at once.
fn induct(
    game: &StochasticGame,
    weights: impl DoubleEndedIterator<Item = f64>,
    terminal_lo: Vec<f64>,
    terminal_hi: Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>), ValuationError> {
    let n = game.state_count();
    let mut stage = Stage::new(game);
    let (mut lo, mut hi) = (terminal_lo, terminal_hi);
    let (mut lo_next, mut hi_next) = (vec![0.0; n], vec![0.0; n]);
    let same = lo == hi;
    for weight in weights.rev() {
        stage.step(weight, &lo, &mut lo_next)?;
        std::mem::swap(&mut lo, &mut lo_next);
        if same {
            hi.copy_from_slice(&lo);
        } else {
            stage.step(weight, &hi, &mut hi_next)?;
            std::mem::swap(&mut hi, &mut hi_next);
        }
    }
    Ok((lo, hi))
}

fn into_bracket(lo: Vec<f64>, hi: Vec<f64>, tail: f64) -> ValueBracket {
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    let lo: Vec<f64> = lo.into_iter().map(clamp).collect();
    let hi: Vec<f64> = hi
        .into_iter()
        .zip(&lo)
        .map(|(h, l)| clamp(h).max(*l))
        .collect();
    ValueBracket {
        lo: StateFunction(lo),
        hi: StateFunction(hi),
        tail,
    }
}

/// Minimal stage count `N ≥ 1` with `∫_N^∞ ρ ≤ tail_eps`.
pub fn horizon(rho: &Density, tail_eps: f64) -> Result<u64, ValuationError> {
    if !(0.0..1.0).contains(&tail_eps) {
        return Err(ValuationError::InvalidParameter {
            name: "tail_eps",
            value: tail_eps,
        });
    }
    let never = || ValuationError::TailNeverSmall {
        tail_eps,
        cap: HORIZON_CAP,
        density: rho.to_string(),
    };
    let t = rho.upper_quantile(tail_eps).ok_or_else(never)?;
    if !(t <= HORIZON_CAP as f64) {
        return Err(never());
    }
    let mut n = (t.ceil() as u64).max(1);
    while rho.tail_mass(n as f64) > tail_eps {
        n += 1;
    }
    while n > 1 && rho.tail_mass((n - 1) as f64) <= tail_eps {
        n -= 1;
    }
    if n > HORIZON_CAP {
        return Err(never());
    }
    Ok(n)
}

/// Bracket on `𝒱[ρ]` by backward induction truncated once the tail mass is at
/// most `tail_eps` (use `0` for densities with bounded support).
pub fn value_backward(
    game: &StochasticGame,
    rho: &Density,
    tail_eps: f64,
) -> Result<ValueBracket, ValuationError> {
    check_game(game)?;
    let stages = horizon(rho, tail_eps)?;
    let tail = rho.tail_mass(stages as f64);
    let n = game.state_count();
    let (lo, hi) = induct(
        game,
        (0..stages).map(|k| rho.stage_weight(k)),
        vec![0.0; n],
        vec![tail; n],
    )?;
    Ok(into_bracket(lo, hi, tail))
}

/// Backward induction with explicit stage weights on top of a terminal
/// bracket for the continuation.
pub fn value_from_stages(
    game: &StochasticGame,
    weights: &[f64],
    terminal: &ValueBracket,
) -> Result<ValueBracket, ValuationError> {
    check_game(game)?;
    let (lo, hi) = induct(
        game,
        weights.iter().copied(),
        terminal.lo.0.clone(),
        terminal.hi.0.clone(),
    )?;
    Ok(into_bracket(lo, hi, terminal.tail))
}

/// Series oracle for Markov chains: `Σ_n θ_n Pⁿg`, summed forward.
pub fn chain_series_value(
    chain: &StochasticGame,
    rho: &Density,
    tail_eps: f64,
) -> Result<ValueBracket, ValuationError> {
    if !chain.is_chain() {
        return Err(ValuationError::NotAChain);
    }
    check_game(chain)?;
    let stages = horizon(rho, tail_eps)?;
    let tail = rho.tail_mass(stages as f64);
    let n = chain.state_count();
    let mut propagated = chain.payoff.clone();
    let mut scratch = vec![0.0; n];
    let mut sum = vec![0.0; n];
    for k in 0..stages {
        let theta = rho.stage_weight(k);
        for (acc, f) in sum.iter_mut().zip(&propagated) {
            *acc += theta * f;
        }
        for (s, slot) in scratch.iter_mut().enumerate() {
            *slot = chain
                .transition(s, 0, 0)
                .iter()
                .zip(&propagated)
                .map(|(p, f)| p * f)
                .sum();
        }
        std::mem::swap(&mut propagated, &mut scratch);
    }
    let hi = sum.iter().map(|v| v + tail).collect();
    Ok(into_bracket(sum, hi, tail))
}

/// Fixed point of the discounted Shapley operator with `β = e^{-λ}`, the value
/// under `π_λ`. Stops at residual `≤ tol (1-β)`, which bounds the error by `tol`.
pub fn abel_fixed_point(
    game: &StochasticGame,
    rate: f64,
    tol: f64,
) -> Result<StateFunction, ValuationError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ValuationError::InvalidParameter {
            name: "lambda",
            value: rate,
        });
    }
    if !(tol > 0.0) {
        return Err(ValuationError::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    check_game(game)?;
    let beta = (-rate).exp();
    let weight = -(-rate).exp_m1();
    let n = game.state_count();
    let mut stage = Stage::new(game);
    let mut v = game.payoff.clone();
    let mut next = vec![0.0; n];
    loop {
        for (state, slot) in next.iter_mut().enumerate() {
            *slot = weight * game.payoff[state] + beta * stage.continuation(state, &v)?;
        }
        let residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if residual <= tol * weight {
            return Ok(StateFunction(v));
        }
    }
}

/// Value of the `n`-stage equal-weight game. Runs the recursion with unit
/// weights and divides once at the end, which is exact for 0/1 chains.
pub fn cesaro_finite(game: &StochasticGame, stages: u64) -> Result<StateFunction, ValuationError> {
    if stages == 0 {
        return Err(ValuationError::InvalidParameter {
            name: "n",
            value: 0.0,
        });
    }
    check_game(game)?;
    let n = game.state_count();
    let (total, _) = induct(game, (0..stages).map(|_| 1.0), vec![0.0; n], vec![0.0; n])?;
    let scale = stages as f64;
    Ok(StateFunction(
        total.into_iter().map(|v| v / scale).collect(),
    ))
}

/// Discrepancy between `𝒱[ρ]` and its dynamic-programming decomposition at
/// stage `n`: `n` stages of `ρ`'s weights followed by `tail(n) · 𝒱[ρ^n_shift]`.
/// Both sides are brackets of width at most `tail_eps`; the returned number is
/// the sup-norm distance between their midpoints.
pub fn dpp_check(
    game: &StochasticGame,
    rho: &Density,
    stages: u64,
    tail_eps: f64,
) -> Result<f64, ValuationError> {
    let tail = rho.tail_mass(stages as f64);
    if !(tail > crate::density::MIN_TAIL_MASS) {
        return Err(ValuationError::ZeroTailMass { at: stages });
    }
    let direct = value_backward(game, rho, tail_eps)?;
    let shifted = rho.shift(stages as f64)?;
    let rest = value_backward(game, &shifted, tail_eps)?;
    let terminal = ValueBracket {
        lo: StateFunction(rest.lo.iter().map(|v| tail * v).collect()),
        hi: StateFunction(rest.hi.iter().map(|v| tail * v).collect()),
        tail: tail * rest.tail,
    };
    let weights: Vec<f64> = (0..stages).map(|k| rho.stage_weight(k)).collect();
    let composite = value_from_stages(game, &weights, &terminal)?;
    Ok(direct.midpoint().sup_distance(&composite.midpoint()))
}

/// `c_ρ(z) = Σ_n θ_n g(z_n)` for a step process.
///
/// Exponential densities sum the periodic part in closed form. Otherwise the
/// sum runs to `horizon` stages (or the end of a bounded support), leaving an
/// error of at most `tail(horizon)`.
pub fn step_payoff(z: &StepProcess, rho: &Density, payoff: &[f64], horizon: u64) -> f64 {
    let g = |n: usize| payoff[z.state_at(n)];
    if let Density::Exponential { rate } = rho {
        let pre = z.preperiod().len();
        let len = z.period().len();
        let head: f64 = (0..pre).map(|n| rho.stage_weight(n as u64) * g(n)).sum();
        let block: f64 = (0..len)
            .map(|i| rho.stage_weight(i as u64) * payoff[z.period()[i]])
            .sum();
        let lead = (-rate * pre as f64).exp();
        let cycle = -(-rate * len as f64).exp_m1();
        return head + lead * block / cycle;
    }
    let stop = match rho.support_end() {
        Some(end) => horizon.min(end.ceil() as u64),
        None => horizon,
    };
    (0..stop).map(|n| rho.stage_weight(n) * g(n as usize)).sum()
}
