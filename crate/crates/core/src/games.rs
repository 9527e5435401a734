//! Finite zero-sum stochastic games with state-dependent running payoff.
//!
//! At state `ω` the maximizer picks one of `actions_max[ω]` actions and the
//! minimizer one of `actions_min[ω]`; the next state is drawn from
//! `kernel[ω][a][b]`. Deterministic sup-inf games are the 0/1-kernel case.

use std::fmt;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// Kernel rows must sum to one within this.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

pub const BUILTIN_NAMES: [&str; 5] = ["swap2", "lazy2", "ergodic3", "mdp_reach", "matching_game"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(
        "unknown builtin game `{0}` (known: swap2, lazy2, ergodic3, mdp_reach, matching_game)"
    )]
    UnknownInstance(String),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> GameError {
    GameError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticGame {
    #[serde(rename = "g")]
    pub payoff: Vec<f64>,
    pub actions_max: Vec<usize>,
    pub actions_min: Vec<usize>,
    /// `kernel[ω][a][b][ω']`
    pub kernel: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    PayoffOutOfRange {
        state: usize,
        value: f64,
    },
    NoActions {
        state: usize,
    },
    NegativeProbability {
        state: usize,
        max_action: usize,
        min_action: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        state: usize,
        max_action: usize,
        min_action: usize,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::PayoffOutOfRange { state, value } => {
                write!(f, "state {state}: payoff out of [0,1] ({value})")
            }
            Violation::NoActions { state } => write!(f, "state {state}: empty action set"),
            Violation::NegativeProbability {
                state,
                max_action,
                min_action,
                next,
                value,
            } => write!(
                f,
                "kernel[{state}][{max_action}][{min_action}][{next}]: invalid probability {value}"
            ),
            Violation::RowSum {
                state,
                max_action,
                min_action,
                sum,
            } => write!(
                f,
                "kernel[{state}][{max_action}][{min_action}]: row sums to {sum}, expected 1"
            ),
        }
    }
}

impl StochasticGame {
    pub fn state_count(&self) -> usize {
        self.payoff.len()
    }

    /// Markov chain: every action set is a singleton.
    pub fn is_chain(&self) -> bool {
        self.actions_max.iter().all(|&a| a == 1) && self.actions_min.iter().all(|&b| b == 1)
    }

    pub fn transition(&self, state: usize, max_action: usize, min_action: usize) -> &[f64] {
        &self.kernel[state][max_action][min_action]
    }

    pub fn with_payoff(&self, payoff: Vec<f64>) -> Self {
        Self {
            payoff,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let n = self.state_count();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::Shape("game has no states".into()));
            return out;
        }
        for (name, len) in [
            ("actions_max", self.actions_max.len()),
            ("actions_min", self.actions_min.len()),
            ("kernel", self.kernel.len()),
        ] {
            if len != n {
                out.push(Violation::Shape(format!(
                    "{name} has {len} entries for {n} states"
                )));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (state, &value) in self.payoff.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                out.push(Violation::PayoffOutOfRange { state, value });
            }
        }
        for state in 0..n {
            let (am, bm) = (self.actions_max[state], self.actions_min[state]);
            if am == 0 || bm == 0 {
                out.push(Violation::NoActions { state });
                continue;
            }
            let block = &self.kernel[state];
            if block.len() != am || block.iter().any(|r| r.len() != bm) {
                out.push(Violation::Shape(format!(
                    "kernel[{state}] is not {am}x{bm}"
                )));
                continue;
            }
            for (a, row) in block.iter().enumerate() {
                for (b, dist) in row.iter().enumerate() {
                    if dist.len() != n {
                        out.push(Violation::Shape(format!(
                            "kernel[{state}][{a}][{b}] has {} entries for {n} states",
                            dist.len()
                        )));
                        continue;
                    }
                    let mut ok = true;
                    for (next, &value) in dist.iter().enumerate() {
                        if !(value >= 0.0 && value.is_finite()) {
                            ok = false;
                            out.push(Violation::NegativeProbability {
                                state,
                                max_action: a,
                                min_action: b,
                                next,
                                value,
                            });
                        }
                    }
                    let sum: f64 = dist.iter().sum();
                    if ok && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                        out.push(Violation::RowSum {
                            state,
                            max_action: a,
                            min_action: b,
                            sum,
                        });
                    }
                }
            }
        }
        out
    }

    /// JSON document `{states, g, actions_max, actions_min, kernel}`.
    pub fn to_document(&self) -> String {
        #[derive(Serialize)]
        struct Document<'a> {
            states: usize,
            #[serde(flatten)]
            game: &'a StochasticGame,
        }
        serde_json::to_string_pretty(&Document {
            states: self.state_count(),
            game: self,
        })
        .expect("game documents always serialize")
    }

    pub fn from_document(text: &str) -> Result<Self, GameError> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
        let obj = root
            .as_object()
            .ok_or_else(|| schema("$", "expected an object"))?;
        let field = |key: &str| {
            obj.get(key)
                .ok_or_else(|| schema(format!("$.{key}"), "missing key"))
        };
        let states = as_count(field("states")?, "$.states")?;
        if states == 0 {
            return Err(schema("$.states", "need at least one state"));
        }
        let payoff = as_array(field("g")?, "$.g", Some(states))?
            .iter()
            .enumerate()
            .map(|(i, v)| as_real(v, &format!("$.g[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let counts = |key: &str| -> Result<Vec<usize>, GameError> {
            let path = format!("$.{key}");
            as_array(field(key)?, &path, Some(states))?
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let p = format!("{path}[{i}]");
                    let c = as_count(v, &p)?;
                    if c == 0 {
                        Err(schema(p, "action count must be positive"))
                    } else {
                        Ok(c)
                    }
                })
                .collect()
        };
        let actions_max = counts("actions_max")?;
        let actions_min = counts("actions_min")?;

        let kernel_value = field("kernel")?;
        let blocks = as_array(kernel_value, "$.kernel", Some(states))?;
        let mut kernel = Vec::with_capacity(states);
        for (w, block) in blocks.iter().enumerate() {
            let bpath = format!("$.kernel[{w}]");
            let rows = as_array(block, &bpath, Some(actions_max[w]))?;
            let mut out_rows = Vec::with_capacity(rows.len());
            for (a, row) in rows.iter().enumerate() {
                let rpath = format!("{bpath}[{a}]");
                let cells = as_array(row, &rpath, Some(actions_min[w]))?;
                let mut out_cells = Vec::with_capacity(cells.len());
                for (b, cell) in cells.iter().enumerate() {
                    let cpath = format!("{rpath}[{b}]");
                    let probs = as_array(cell, &cpath, Some(states))?;
                    let dist = probs
                        .iter()
                        .enumerate()
                        .map(|(k, v)| {
                            let ppath = format!("{cpath}[{k}]");
                            let p = as_real(v, &ppath)?;
                            if p < 0.0 {
                                Err(schema(ppath, format!("negative probability {p}")))
                            } else {
                                Ok(p)
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    out_cells.push(dist);
                }
                out_rows.push(out_cells);
            }
            kernel.push(out_rows);
        }
        Ok(Self {
            payoff,
            actions_max,
            actions_min,
            kernel,
        })
    }
}

fn as_array<'a>(v: &'a Value, path: &str, len: Option<usize>) -> Result<&'a Vec<Value>, GameError> {
    let arr = v
        .as_array()
        .ok_or_else(|| schema(path, "expected an array"))?;
    match len {
        Some(n) if arr.len() != n => Err(schema(
            path,
            format!("expected {n} entries, found {}", arr.len()),
        )),
        _ => Ok(arr),
    }
}

fn as_real(v: &Value, path: &str) -> Result<f64, GameError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(path, "expected a finite number"))
}

fn as_count(v: &Value, path: &str) -> Result<usize, GameError> {
    v.as_u64()
        .map(|c| c as usize)
        .ok_or_else(|| schema(path, "expected a nonnegative integer"))
}

/// Uniform draws in `[0, 1)` from the top 53 bits of xoshiro256++ output.
///
/// The generator is seeded through splitmix64 (`seed_from_u64`), so streams
/// are identical on every platform.
pub struct GameRng(Xoshiro256PlusPlus);

impl GameRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_below(&mut self, n: usize) -> usize {
        ((self.next_unit() * n as f64) as usize).min(n - 1)
    }
}

/// Seeded random game: payoffs uniform in `[0,1)`, kernel rows normalized
/// uniform vectors. Draw order is payoffs, then rows in `(ω, a, b)` order.
pub fn random_game(
    seed: u64,
    states: usize,
    actions_max: usize,
    actions_min: usize,
) -> StochasticGame {
    assert!(states >= 1 && actions_max >= 1 && actions_min >= 1);
    let mut rng = GameRng::new(seed);
    let payoff = (0..states).map(|_| rng.next_unit()).collect();
    let kernel = (0..states)
        .map(|_| {
            (0..actions_max)
                .map(|_| {
                    (0..actions_min)
                        .map(|_| {
                            let mut row: Vec<f64> = (0..states).map(|_| rng.next_unit()).collect();
                            let sum: f64 = row.iter().sum();
                            if sum > 0.0 {
                                row.iter_mut().for_each(|p| *p /= sum);
                            } else {
                                row.iter_mut().for_each(|p| *p = 1.0 / states as f64);
                            }
                            row
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    StochasticGame {
        payoff,
        actions_max: vec![actions_max; states],
        actions_min: vec![actions_min; states],
        kernel,
    }
}

fn chain(payoff: Vec<f64>, transitions: Vec<Vec<f64>>) -> StochasticGame {
    let n = payoff.len();
    StochasticGame {
        payoff,
        actions_max: vec![1; n],
        actions_min: vec![1; n],
        kernel: transitions.into_iter().map(|row| vec![vec![row]]).collect(),
    }
}

/// Small instances whose limit values are known in closed form.
///
/// * `swap2`: deterministic alternation between payoff 1 and payoff 0.
/// * `lazy2`: both states jump to a fair coin over the two states.
/// * `ergodic3`: [`random_game`] with seed 42, 3 states, 2x1 actions.
/// * `mdp_reach`: state 0 (payoff 1) is absorbing; at state 1 (payoff 0) the
///   maximizer may stay or move to state 0.
/// * `matching_game`: state 0 (payoff 1/2) is a matching-pennies decision; a
///   match leads to state 1 (payoff 1), a mismatch to state 2 (payoff 0), and
///   both return to state 0.
pub fn builtin(name: &str) -> Result<StochasticGame, GameError> {
    Ok(match name {
        "swap2" => chain(vec![1.0, 0.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
        "lazy2" => chain(vec![1.0, 0.0], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        "ergodic3" => random_game(42, 3, 2, 1),
        "mdp_reach" => StochasticGame {
            payoff: vec![1.0, 0.0],
            actions_max: vec![1, 2],
            actions_min: vec![1, 1],
            kernel: vec![
                vec![vec![vec![1.0, 0.0]]],
                vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            ],
        },
        "matching_game" => {
            let (win, lose) = (vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
            StochasticGame {
                payoff: vec![0.5, 1.0, 0.0],
                actions_max: vec![2, 1, 1],
                actions_min: vec![2, 1, 1],
                kernel: vec![
                    vec![vec![win.clone(), lose.clone()], vec![lose, win]],
                    vec![vec![vec![1.0, 0.0, 0.0]]],
                    vec![vec![vec![1.0, 0.0, 0.0]]],
                ],
            }
        }
        _ => return Err(GameError::UnknownInstance(name.to_string())),
    })
}

/// Discrete-time trajectory `z(n)`, constant on `[n, n+1)`: a preperiod
/// followed by a forever-repeated nonempty cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProcess {
    preperiod: Vec<usize>,
    period: Vec<usize>,
}

impl StepProcess {
    pub fn new(preperiod: Vec<usize>, period: Vec<usize>) -> Option<Self> {
        (!period.is_empty()).then_some(Self { preperiod, period })
    }

    /// Finite sequence that stays at its last state afterwards.
    pub fn finite(states: Vec<usize>) -> Option<Self> {
        let last = *states.last()?;
        Some(Self {
            preperiod: states,
            period: vec![last],
        })
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.preperiod
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    pub fn state_at(&self, n: usize) -> usize {
        match self.preperiod.get(n) {
            Some(&s) => s,
            None => self.period[(n - self.preperiod.len()) % self.period.len()],
        }
    }

    pub fn fits(&self, state_count: usize) -> bool {
        self.preperiod
            .iter()
            .chain(&self.period)
            .all(|&s| s < state_count)
    }
}
