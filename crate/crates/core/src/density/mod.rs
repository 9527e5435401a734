//! Discounting densities on the half-line.
//!
//! A [`Density`] is a nonnegative weight function on `[0, ∞)` with unit mass.
//! Four kinds are supported: uniform windows, exponential (Abel) densities,
//! normalized power densities and piecewise-constant step functions. The kind
//! set is closed under [`Density::shift`] and [`Density::scale`], so every
//! derived density keeps an exact representation.

mod construction;
mod grammar;
mod l1;

pub use construction::{
    pc_approximate, proof_constants, quantile_partition, regularize_support, tv_correct,
    PcApproximation, ProofConstants, QuantilePartition, TvCorrection,
};
pub use grammar::{parse_density, GrammarError};

use std::fmt;

use thiserror::Error;

/// Allowed deviation of a piecewise-constant density's mass from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Shifts whose remaining tail mass is at or below this are rejected.
pub const MIN_TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("parameter {name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("power density needs gamma > 1, got {0}")]
    GammaNotGreaterThanOne(f64),
    #[error("piecewise-constant mass is {0}, expected 1")]
    MassNotOne(f64),
    #[error("malformed piecewise-constant density: {0}")]
    MalformedSteps(String),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("no mass left beyond t = {at}")]
    ZeroTailMass { at: f64 },
    #[error("quantile level must lie in (0, 1), got {0}")]
    QuantileOutOfRange(f64),
    #[error("empty interval [{a}, {b})")]
    EmptyInterval { a: f64, b: f64 },
    #[error("bin count must be at least 4, got {0}")]
    BinCountTooSmall(usize),
    #[error("partition interval {index} is empty (consecutive quantiles coincide)")]
    DegenerateInterval { index: usize },
    #[error("density vanishes at t = {at} inside the partitioned window")]
    NonPositiveDensityOnSupport { at: f64 },
    #[error("closed-form density cannot be spliced with flattened intervals")]
    NotRepresentable,
    #[error("invalid construction parameter {name} = {value}")]
    InvalidConstant { name: &'static str, value: f64 },
}

/// How [`Density::piecewise_constant`] treats levels whose mass is not one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Reject unless the mass is within [`MASS_TOLERANCE`] of one.
    Strict,
    /// Divide all levels by the mass.
    Renormalize,
}

/// Step function with `levels[i]` on `[breakpoints[i], breakpoints[i + 1])`
/// and zero outside `[breakpoints[0], breakpoints[last])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDensity {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
    // cumulative[i] = mass on [0, breakpoints[i])
    cumulative: Vec<f64>,
}

impl StepDensity {
    fn new(
        breakpoints: Vec<f64>,
        mut levels: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self, DensityError> {
        if breakpoints.len() < 2 {
            return Err(DensityError::MalformedSteps(
                "need at least two breakpoints".into(),
            ));
        }
        if levels.len() + 1 != breakpoints.len() {
            return Err(DensityError::MalformedSteps(format!(
                "{} breakpoints need {} levels, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                levels.len()
            )));
        }
        if !breakpoints[0].is_finite() || breakpoints[0] < 0.0 {
            return Err(DensityError::MalformedSteps(format!(
                "first breakpoint {} must be finite and nonnegative",
                breakpoints[0]
            )));
        }
        if let Some(w) = breakpoints
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(DensityError::MalformedSteps(format!(
                "breakpoints must be finite and strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&l) = levels.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(DensityError::MalformedSteps(format!(
                "levels must be finite and nonnegative, got {l}"
            )));
        }
        let mass = Self::mass_of(&breakpoints, &levels);
        if !(mass > 0.0) {
            return Err(DensityError::MassNotOne(mass));
        }
        if normalization == Normalization::Strict && (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(DensityError::MassNotOne(mass));
        }
        for l in &mut levels {
            *l /= mass;
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for (w, l) in breakpoints.windows(2).zip(&levels) {
            acc += l * (w[1] - w[0]);
            cumulative.push(acc);
        }
        Ok(Self {
            breakpoints,
            levels,
            cumulative,
        })
    }

    fn mass_of(breakpoints: &[f64], levels: &[f64]) -> f64 {
        breakpoints
            .windows(2)
            .zip(levels)
            .map(|(w, l)| l * (w[1] - w[0]))
            .sum()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Index of the cell `[b_i, b_{i+1})` containing `t`.
    fn cell(&self, t: f64) -> Option<usize> {
        if t < self.breakpoints[0] || t >= self.support_end() {
            return None;
        }
        Some(self.breakpoints.partition_point(|&b| b <= t) - 1)
    }

    fn value(&self, t: f64) -> f64 {
        self.cell(t).map_or(0.0, |i| self.levels[i])
    }

    /// Value just left of `t`.
    fn left_value(&self, t: f64) -> f64 {
        if t <= self.breakpoints[0] || t > self.support_end() {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b < t) - 1;
        self.levels[i]
    }

    fn cumulative_at(&self, t: f64) -> f64 {
        if t <= self.breakpoints[0] {
            return 0.0;
        }
        if t >= self.support_end() {
            return self.total();
        }
        let i = self.breakpoints.partition_point(|&b| b <= t) - 1;
        self.cumulative[i] + self.levels[i] * (t - self.breakpoints[i])
    }

    fn cdf(&self, t: f64) -> f64 {
        if t >= self.support_end() {
            1.0
        } else {
            (self.cumulative_at(t) / self.total()).min(1.0)
        }
    }

    fn survival(&self, t: f64) -> f64 {
        if t >= self.support_end() {
            0.0
        } else {
            ((self.total() - self.cumulative_at(t)) / self.total()).max(0.0)
        }
    }

    fn quantile(&self, r: f64) -> f64 {
        let target = r * self.total();
        let i = self.cumulative[1..].partition_point(|&c| c < target);
        if i >= self.levels.len() {
            return self.support_end();
        }
        let t = self.breakpoints[i] + (target - self.cumulative[i]) / self.levels[i];
        t.clamp(self.breakpoints[i], self.breakpoints[i + 1])
    }

    /// Breakpoints lying strictly inside `(a, b)`.
    fn interior_breakpoints(&self, a: f64, b: f64) -> &[f64] {
        let lo = self.breakpoints.partition_point(|&x| x <= a);
        let hi = self.breakpoints.partition_point(|&x| x < b);
        &self.breakpoints[lo..hi.max(lo)]
    }
}

/// Unit-mass weight function on the nonnegative half-line.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `1/T` on `[0, T)`.
    Uniform {
        horizon: f64,
    },
    /// `λ e^{-λt}`.
    Exponential {
        rate: f64,
    },
    /// `(γ-1) β α^{γ-1} (α + βt)^{-γ}`.
    Power {
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    PiecewiseConstant(StepDensity),
}

fn positive(name: &'static str, value: f64) -> Result<f64, DensityError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DensityError::NonPositiveParameter { name, value })
    }
}

impl Density {
    pub fn uniform(horizon: f64) -> Result<Self, DensityError> {
        Ok(Density::Uniform {
            horizon: positive("T", horizon)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self, DensityError> {
        Ok(Density::Exponential {
            rate: positive("lambda", rate)?,
        })
    }

    pub fn power(alpha: f64, beta: f64, gamma: f64) -> Result<Self, DensityError> {
        let alpha = positive("alpha", alpha)?;
        let beta = positive("beta", beta)?;
        positive("gamma", gamma)?;
        if !(gamma > 1.0) {
            return Err(DensityError::GammaNotGreaterThanOne(gamma));
        }
        Ok(Density::Power { alpha, beta, gamma })
    }

    pub fn piecewise_constant(
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self, DensityError> {
        StepDensity::new(breakpoints, levels, normalization).map(Density::PiecewiseConstant)
    }

    pub fn as_steps(&self) -> Option<&StepDensity> {
        match self {
            Density::PiecewiseConstant(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Density::PiecewiseConstant(_))
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            Density::Uniform { horizon } => {
                if t < *horizon {
                    1.0 / horizon
                } else {
                    0.0
                }
            }
            Density::Exponential { rate } => rate * (-rate * t).exp(),
            Density::Power { alpha, beta, gamma } => {
                let kappa = beta / alpha;
                (gamma - 1.0) * kappa * (-gamma * (kappa * t).ln_1p()).exp()
            }
            Density::PiecewiseConstant(s) => s.value(t),
        }
    }

    /// Value just left of `t` (`ρ(t⁻)`); equals `pdf` at continuity points.
    pub fn left_pdf(&self, t: f64) -> f64 {
        match self {
            Density::Uniform { horizon } => {
                if t > 0.0 && t <= *horizon {
                    1.0 / horizon
                } else {
                    0.0
                }
            }
            Density::PiecewiseConstant(s) => s.left_value(t),
            _ if t <= 0.0 => 0.0,
            _ => self.pdf(t),
        }
    }

    pub(crate) fn ln_pdf(&self, t: f64) -> f64 {
        match self {
            Density::Exponential { rate } => rate.ln() - rate * t,
            Density::Power { alpha, beta, gamma } => {
                let kappa = beta / alpha;
                ((gamma - 1.0) * kappa).ln() - gamma * (kappa * t).ln_1p()
            }
            _ => self.pdf(t).ln(),
        }
    }

    pub(crate) fn ln_pdf_slope(&self, t: f64) -> f64 {
        match self {
            Density::Exponential { rate } => -rate,
            Density::Power { alpha, beta, gamma } => -gamma * beta / (alpha + beta * t),
            _ => 0.0,
        }
    }

    /// `∫_t^∞ ρ`, the mass not yet accrued at time `t`.
    pub fn tail_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            Density::Uniform { horizon } => ((horizon - t) / horizon).max(0.0),
            Density::Exponential { rate } => (-rate * t).exp(),
            Density::Power { alpha, beta, gamma } => {
                ((1.0 - gamma) * (beta / alpha * t).ln_1p()).exp()
            }
            Density::PiecewiseConstant(s) => s.survival(t),
        }
    }

    fn cdf_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Density::Uniform { horizon } => (t / horizon).min(1.0),
            Density::Exponential { rate } => -(-rate * t).exp_m1(),
            Density::Power { alpha, beta, gamma } => {
                -((1.0 - gamma) * (beta / alpha * t).ln_1p()).exp_m1()
            }
            Density::PiecewiseConstant(s) => s.cdf(t),
        }
    }

    /// `∫_0^t ρ`.
    pub fn cdf(&self, t: f64) -> Result<f64, DensityError> {
        if t < 0.0 || t.is_nan() {
            return Err(DensityError::NegativeTime(t));
        }
        Ok(self.cdf_unchecked(t))
    }

    /// `∫_a^b ρ` for `0 ≤ a ≤ b ≤ ∞`, evaluated on whichever side of the
    /// distribution keeps the subtraction well conditioned.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        if !(b > a) {
            return 0.0;
        }
        match self {
            Density::Uniform { horizon } => (b.min(*horizon) - a.min(*horizon)).max(0.0) / horizon,
            Density::Exponential { rate } => {
                if b.is_infinite() {
                    (-rate * a).exp()
                } else {
                    (-rate * a).exp() * -(-rate * (b - a)).exp_m1()
                }
            }
            Density::PiecewiseConstant(s) => {
                ((s.cumulative_at(b) - s.cumulative_at(a)) / s.total()).max(0.0)
            }
            Density::Power { .. } => {
                let fa = self.cdf_unchecked(a);
                if fa < 0.5 {
                    (self.cdf_unchecked(b) - fa).max(0.0)
                } else {
                    (self.tail_mass(a) - self.tail_mass(b)).max(0.0)
                }
            }
        }
    }

    /// End of the support, `None` when unbounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Density::Uniform { horizon } => Some(*horizon),
            Density::PiecewiseConstant(s) => Some(s.support_end()),
            _ => None,
        }
    }

    /// Times where the density may jump.
    pub(crate) fn jump_points(&self) -> Vec<f64> {
        match self {
            Density::Uniform { horizon } => vec![*horizon],
            Density::PiecewiseConstant(s) => s.breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Density::PiecewiseConstant(s) => s.levels.iter().copied().fold(0.0, f64::max),
            _ => self.pdf(0.0),
        }
    }

    /// Minimal `t` with `cdf(t) = r`.
    pub fn quantile(&self, r: f64) -> Result<f64, DensityError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(DensityError::QuantileOutOfRange(r));
        }
        Ok(match self {
            Density::Uniform { horizon } => r * horizon,
            Density::Exponential { rate } => -(-r).ln_1p() / rate,
            Density::Power { alpha, beta, gamma } => {
                alpha / beta * (-(-r).ln_1p() / (gamma - 1.0)).exp_m1()
            }
            Density::PiecewiseConstant(s) => s.quantile(r),
        })
    }

    /// Minimal `t` with `tail_mass(t) ≤ s`, i.e. `quantile(1 - s)` without the
    /// cancellation. `None` for `s = 0` on unbounded support.
    pub fn upper_quantile(&self, s: f64) -> Option<f64> {
        if s >= 1.0 {
            return Some(0.0);
        }
        if s <= 0.0 {
            return self.support_end();
        }
        Some(match self {
            Density::Uniform { horizon } => horizon * (1.0 - s),
            Density::Exponential { rate } => -s.ln() / rate,
            Density::Power { alpha, beta, gamma } => {
                alpha / beta * (-s.ln() / (gamma - 1.0)).exp_m1()
            }
            Density::PiecewiseConstant(st) => st.quantile(1.0 - s),
        })
    }

    /// `ρ^T_shift(t) = ρ(t + T) / ∫_T^∞ ρ`.
    ///
    /// Bounded supports need more than `MIN_TAIL_MASS` left beyond `T`.
    pub fn shift(&self, by: f64) -> Result<Density, DensityError> {
        let by = positive("T", by)?;
        if self.support_end().is_some() && !(self.tail_mass(by) > MIN_TAIL_MASS) {
            return Err(DensityError::ZeroTailMass { at: by });
        }
        match self {
            Density::Uniform { horizon } => Density::uniform(horizon - by),
            Density::Exponential { .. } => Ok(self.clone()),
            Density::Power { alpha, beta, gamma } => {
                Density::power(alpha + beta * by, *beta, *gamma)
            }
            Density::PiecewiseConstant(s) => {
                let first = s.breakpoints.partition_point(|&b| b <= by);
                let mut breakpoints = Vec::with_capacity(s.breakpoints.len() - first + 1);
                let mut levels = Vec::with_capacity(s.levels.len() - first + 1);
                if first > 0 {
                    // `by` falls inside cell first - 1
                    breakpoints.push(0.0);
                    levels.push(s.levels[first - 1]);
                }
                breakpoints.extend(s.breakpoints[first..].iter().map(|b| b - by));
                levels.extend_from_slice(&s.levels[first.min(s.levels.len())..]);
                levels.truncate(breakpoints.len() - 1);
                Density::piecewise_constant(breakpoints, levels, Normalization::Renormalize)
            }
        }
    }

    /// `ρ^λ_scale(t) = λ ρ(λt)`.
    pub fn scale(&self, factor: f64) -> Result<Density, DensityError> {
        let factor = positive("lambda", factor)?;
        match self {
            Density::Uniform { horizon } => Density::uniform(horizon / factor),
            Density::Exponential { rate } => Density::exponential(rate * factor),
            Density::Power { alpha, beta, gamma } => Density::power(*alpha, beta * factor, *gamma),
            Density::PiecewiseConstant(s) => Density::piecewise_constant(
                s.breakpoints.iter().map(|b| b / factor).collect(),
                s.levels.iter().map(|l| l * factor).collect(),
                Normalization::Renormalize,
            ),
        }
    }

    /// Total variation of `ρ` on `[a, b)`; `b` may be infinite.
    pub fn total_variation(&self, a: f64, b: f64) -> Result<f64, DensityError> {
        if a < 0.0 || a.is_nan() {
            return Err(DensityError::NegativeTime(a));
        }
        if !(a < b) {
            return Err(DensityError::EmptyInterval { a, b });
        }
        Ok(match self {
            Density::Uniform { horizon } => {
                if a < *horizon && *horizon < b {
                    1.0 / horizon
                } else {
                    0.0
                }
            }
            Density::Exponential { .. } | Density::Power { .. } => {
                let end = if b.is_infinite() { 0.0 } else { self.pdf(b) };
                (self.pdf(a) - end).abs()
            }
            Density::PiecewiseConstant(s) => s
                .interior_breakpoints(a, b)
                .iter()
                .map(|&x| (s.value(x) - s.left_value(x)).abs())
                .sum(),
        })
    }

    /// Total variation of `ln ρ` on `[a, b)`; the density must stay positive there.
    pub fn log_variation(&self, a: f64, b: f64) -> Result<f64, DensityError> {
        if a < 0.0 || a.is_nan() {
            return Err(DensityError::NegativeTime(a));
        }
        if !(a < b) || b.is_infinite() {
            return Err(DensityError::EmptyInterval { a, b });
        }
        match self {
            Density::Uniform { horizon } => {
                if b <= *horizon {
                    Ok(0.0)
                } else {
                    Err(DensityError::NonPositiveDensityOnSupport { at: *horizon })
                }
            }
            Density::Exponential { rate } => Ok(rate * (b - a)),
            Density::Power { alpha, beta, gamma } => {
                Ok(gamma * (beta * (b - a) / (alpha + beta * a)).ln_1p())
            }
            Density::PiecewiseConstant(s) => {
                if s.value(a) <= 0.0 {
                    return Err(DensityError::NonPositiveDensityOnSupport { at: a });
                }
                if s.left_value(b) <= 0.0 {
                    return Err(DensityError::NonPositiveDensityOnSupport { at: b });
                }
                let mut total = 0.0;
                for &x in s.interior_breakpoints(a, b) {
                    let (left, right) = (s.left_value(x), s.value(x));
                    if right <= 0.0 {
                        return Err(DensityError::NonPositiveDensityOnSupport { at: x });
                    }
                    total += (right.ln() - left.ln()).abs();
                }
                Ok(total)
            }
        }
    }

    /// `∫ |ρ - ν|`.
    pub fn l1_distance(&self, other: &Density) -> f64 {
        l1::l1_distance(self, other)
    }

    /// Unit-interval masses `θ_n = ∫_n^{n+1} ρ` for `n < stages`, plus the tail
    /// beyond `stages`.
    pub fn stage_weights(&self, stages: usize) -> StageWeights {
        let weights = (0..stages).map(|n| self.stage_weight(n as u64)).collect();
        StageWeights {
            weights,
            tail: self.tail_mass(stages as f64),
        }
    }

    pub fn stage_weight(&self, n: u64) -> f64 {
        let n = n as f64;
        self.mass_between(n, n + 1.0)
    }

    /// Parameter-level comparison for closed forms (power densities compare by
    /// the ratio `β/α`, which is all they depend on), L1 otherwise.
    pub fn approx_eq(&self, other: &Density, tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0);
        match (self, other) {
            (Density::Uniform { horizon: a }, Density::Uniform { horizon: b }) => close(*a, *b),
            (Density::Exponential { rate: a }, Density::Exponential { rate: b }) => close(*a, *b),
            (
                Density::Power {
                    alpha: a1,
                    beta: b1,
                    gamma: g1,
                },
                Density::Power {
                    alpha: a2,
                    beta: b2,
                    gamma: g2,
                },
            ) => close(b1 / a1, b2 / a2) && close(*g1, *g2),
            _ => self.l1_distance(other) <= tol,
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform { horizon } => write!(f, "uniform:{horizon}"),
            Density::Exponential { rate } => write!(f, "exp:{rate}"),
            Density::Power { alpha, beta, gamma } => write!(f, "power:{alpha},{beta},{gamma}"),
            Density::PiecewiseConstant(s) => write!(
                f,
                "pc[{} cells on {}..{}]",
                s.levels.len(),
                s.breakpoints[0],
                s.support_end()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageWeights {
    pub weights: Vec<f64>,
    pub tail: f64,
}
