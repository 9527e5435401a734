//! Experiment harness for the equivalence of value families: Cesàro values
//! `𝒱[ϖ_T]`, their discrete counterparts, Abel values `𝒱[π_λ]`, values under
//! shifts of a base density and under rescalings of a base density.
//!
//! Each family is evaluated on a grid, a common limit `U*` is estimated from
//! the Abel and Cesàro references at their finest grid points, and every
//! family's finest-grid deviation from `U*` is checked against a tolerance.
//! Density-level hypotheses are checked separately by [`check_admissible`] and
//! [`check_test_family`].

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{parse_density, pc_approximate, Density, DensityError};
use crate::games::StochasticGame;
use crate::valuation::{
    cesaro_finite, value_backward, StateFunction, ValuationError, ValueBracket,
};

/// Fixed CSV header of sweep and equivalence outputs.
pub const CSV_HEADER: [&str; 6] = ["family", "grid_point", "state", "lo", "hi", "deviation"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TauberianError {
    #[error("equivalence needs an abel or cesaro family as reference")]
    MissingReferenceFamily,
    #[error("invalid family spec: {0}")]
    InvalidSpec(String),
    #[error("{family} at grid point {grid_point}: {source}")]
    Valuation {
        family: &'static str,
        grid_point: f64,
        source: ValuationError,
    },
    #[error("{family} at grid point {grid_point}: {source}")]
    Density {
        family: &'static str,
        grid_point: f64,
        source: DensityError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `ϖ_T` over a grid of horizons `T`.
    Cesaro,
    /// Equal weights on the first `n` stages.
    CesaroDiscrete,
    /// `π_λ` over a grid of rates.
    Abel,
    /// `base` shifted by `T`.
    PowerShift { base: Density },
    /// `base` rescaled by `λ`.
    Scaled { base: Density },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cesaro => "cesaro",
            Family::CesaroDiscrete => "cesaro_discrete",
            Family::Abel => "abel",
            Family::PowerShift { .. } => "power_shift",
            Family::Scaled { .. } => "scaled",
        }
    }

    /// Families indexed by a rate converge as the parameter goes to zero,
    /// horizon-indexed ones as it grows.
    pub fn finer_is_smaller(&self) -> bool {
        matches!(self, Family::Abel | Family::Scaled { .. })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub grid: Vec<f64>,
    /// Overrides the experiment-wide truncation for this family.
    pub tail_eps: Option<f64>,
}

impl FamilySpec {
    pub fn new(family: Family, grid: Vec<f64>) -> Result<Self, TauberianError> {
        let spec = Self {
            family,
            grid,
            tail_eps: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tail_eps(mut self, tail_eps: f64) -> Self {
        self.tail_eps = Some(tail_eps);
        self
    }

    pub fn validate(&self) -> Result<(), TauberianError> {
        let invalid = |m: String| Err(TauberianError::InvalidSpec(format!("{}: {m}", self.family)));
        if self.grid.is_empty() {
            return invalid("empty grid".into());
        }
        if let Some(x) = self.grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return invalid(format!("grid point {x} is not positive and finite"));
        }
        let up = self.grid.windows(2).all(|w| w[0] < w[1]);
        let down = self.grid.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return invalid("grid is not strictly monotone".into());
        }
        if self.family == Family::CesaroDiscrete {
            if let Some(x) = self.grid.iter().find(|x| x.fract() != 0.0) {
                return invalid(format!("stage count {x} is not an integer"));
            }
        }
        if let Some(eps) = self.tail_eps {
            if !(0.0..1.0).contains(&eps) {
                return invalid(format!("tail_eps {eps} outside [0, 1)"));
            }
        }
        Ok(())
    }

    /// Index of the grid point closest to the limit.
    pub fn finest_index(&self) -> usize {
        let smaller = self.family.finer_is_smaller();
        let mut best = 0;
        for (i, x) in self.grid.iter().enumerate() {
            if (*x < self.grid[best]) == smaller && *x != self.grid[best] {
                best = i;
            }
        }
        best
    }

    /// Weighting density at one grid point (`None` for the discrete family).
    pub fn density_at(&self, x: f64) -> Result<Option<Density>, DensityError> {
        Ok(Some(match &self.family {
            Family::Cesaro => Density::uniform(x)?,
            Family::CesaroDiscrete => return Ok(None),
            Family::Abel => Density::exponential(x)?,
            Family::PowerShift { base } => base.shift(x)?,
            Family::Scaled { base } => base.scale(x)?,
        }))
    }
}

/// `2^a, 2^{a+1}, …, 2^b`.
pub fn dyadic(a: i32, b: i32) -> Vec<f64> {
    (a..=b).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridValue {
    pub grid_point: f64,
    pub bracket: ValueBracket,
}

/// One bracket per grid point, in grid order.
pub fn family_values(
    game: &StochasticGame,
    spec: &FamilySpec,
    tail_eps: f64,
) -> Result<Vec<GridValue>, TauberianError> {
    spec.validate()?;
    let tail_eps = spec.tail_eps.unwrap_or(tail_eps);
    let name = spec.family.name();
    spec.grid
        .par_iter()
        .map(|&x| {
            let density = spec
                .density_at(x)
                .map_err(|source| TauberianError::Density {
                    family: name,
                    grid_point: x,
                    source,
                })?;
            let bracket = match density {
                None => cesaro_finite(game, x as u64).map(ValueBracket::exact),
                // bounded supports are evaluated exactly
                Some(d) if d.support_end().is_some() => value_backward(game, &d, 0.0),
                Some(d) => value_backward(game, &d, tail_eps),
            }
            .map_err(|source| TauberianError::Valuation {
                family: name,
                grid_point: x,
                source,
            })?;
            Ok(GridValue {
                grid_point: x,
                bracket,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRow {
    pub grid_point: f64,
    pub bracket: ValueBracket,
    /// Per-state `|midpoint - reference|`.
    pub deviation: Vec<f64>,
}

impl FamilyRow {
    pub fn sup_deviation(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub family: &'static str,
    pub rows: Vec<FamilyRow>,
    pub finest: usize,
    pub pass: bool,
}

impl FamilyReport {
    pub fn finest_row(&self) -> &FamilyRow {
        &self.rows[self.finest]
    }

    fn new(spec: &FamilySpec, values: Vec<GridValue>, reference: &[f64]) -> Self {
        let rows = values
            .into_iter()
            .map(|v| FamilyRow {
                deviation: v
                    .bracket
                    .midpoint()
                    .iter()
                    .zip(reference)
                    .map(|(m, u)| (m - u).abs())
                    .collect(),
                grid_point: v.grid_point,
                bracket: v.bracket,
            })
            .collect();
        Self {
            family: spec.family.name(),
            rows,
            finest: spec.finest_index(),
            pass: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub u_star: StateFunction,
    /// Sup-norm gap between the two reference midpoints.
    pub u_star_disagreement: f64,
    /// Half the summed widths of the reference brackets.
    pub u_star_width: f64,
    pub tol: f64,
    pub families: Vec<FamilyReport>,
}

impl EquivalenceReport {
    pub fn all_pass(&self) -> bool {
        self.families.iter().all(|f| f.pass)
    }
}

fn reference_index(specs: &[FamilySpec], wanted: &[Family]) -> Option<usize> {
    wanted
        .iter()
        .find_map(|w| specs.iter().position(|s| &s.family == w))
}

/// Evaluates every family and compares finest-grid values with `U*`, the
/// average of the Abel and Cesàro references (discrete Cesàro preferred).
/// With only one reference present it alone defines `U*`.
pub fn equivalence_report(
    game: &StochasticGame,
    specs: &[FamilySpec],
    tol: f64,
    tail_eps: f64,
) -> Result<EquivalenceReport, TauberianError> {
    let abel = reference_index(specs, &[Family::Abel]);
    let cesaro = reference_index(specs, &[Family::CesaroDiscrete, Family::Cesaro]);
    let refs: Vec<usize> = abel.into_iter().chain(cesaro).collect();
    if refs.is_empty() {
        return Err(TauberianError::MissingReferenceFamily);
    }
    let values = specs
        .iter()
        .map(|s| family_values(game, s, tail_eps))
        .collect::<Result<Vec<_>, _>>()?;

    let finest: Vec<&ValueBracket> = refs
        .iter()
        .map(|&i| &values[i][specs[i].finest_index()].bracket)
        .collect();
    let mids: Vec<StateFunction> = finest.iter().map(|b| b.midpoint()).collect();
    let states = game.state_count();
    let u_star: Vec<f64> = (0..states)
        .map(|s| (mids.iter().map(|m| m[s]).sum::<f64>() / mids.len() as f64).clamp(0.0, 1.0))
        .collect();
    let u_star_disagreement = mids[0].sup_distance(mids.last().unwrap());
    let u_star_width = 0.5 * finest.iter().map(|b| b.width()).sum::<f64>();

    let families = specs
        .iter()
        .zip(values)
        .map(|(spec, v)| {
            let mut report = FamilyReport::new(spec, v, &u_star);
            let row = report.finest_row();
            report.pass = row.sup_deviation() <= tol + row.bracket.width() + u_star_width;
            report
        })
        .collect();
    Ok(EquivalenceReport {
        u_star: StateFunction(u_star),
        u_star_disagreement,
        u_star_width,
        tol,
        families,
    })
}

/// Family values with deviations measured against the family's own finest
/// grid point, for convergence plots without a common reference.
pub fn sweep(
    game: &StochasticGame,
    specs: &[FamilySpec],
    tail_eps: f64,
) -> Result<Vec<FamilyReport>, TauberianError> {
    specs
        .iter()
        .map(|spec| {
            let values = family_values(game, spec, tail_eps)?;
            let reference = values[spec.finest_index()].bracket.midpoint();
            Ok(FamilyReport::new(spec, values, &reference))
        })
        .collect()
}

/// Rows `family,grid_point,state,lo,hi,deviation` in family then grid order.
pub fn write_csv<W: Write>(families: &[FamilyReport], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for family in families {
        for row in &family.rows {
            for state in 0..row.bracket.len() {
                writer.write_record([
                    family.family.to_string(),
                    row.grid_point.to_string(),
                    state.to_string(),
                    row.bracket.lo[state].to_string(),
                    row.bracket.hi[state].to_string(),
                    row.deviation[state].to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: String,
    pub finest_grid_point: f64,
    pub finest_deviation: f64,
    pub finest_width: f64,
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub u_star: Option<Vec<f64>>,
    pub u_star_disagreement: Option<f64>,
    pub tol: Option<f64>,
    pub families: Vec<FamilySummary>,
}

fn family_summaries(families: &[FamilyReport], verdicts: bool) -> Vec<FamilySummary> {
    families
        .iter()
        .map(|f| {
            let row = f.finest_row();
            FamilySummary {
                family: f.family.to_string(),
                finest_grid_point: row.grid_point,
                finest_deviation: row.sup_deviation(),
                finest_width: row.bracket.width(),
                verdict: verdicts.then(|| if f.pass { "PASS" } else { "FAIL" }.to_string()),
            }
        })
        .collect()
}

impl From<&EquivalenceReport> for Summary {
    fn from(report: &EquivalenceReport) -> Self {
        Self {
            u_star: Some(report.u_star.0.clone()),
            u_star_disagreement: Some(report.u_star_disagreement),
            tol: Some(report.tol),
            families: family_summaries(&report.families, true),
        }
    }
}

impl Summary {
    pub fn from_sweep(families: &[FamilyReport]) -> Self {
        Self {
            u_star: None,
            u_star_disagreement: None,
            tol: None,
            families: family_summaries(families, false),
        }
    }
}

/// Grid as an explicit list or as `{"dyadic": [a, b]}` for `2^a..=2^b`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Points(Vec<f64>),
    Dyadic { dyadic: (i32, i32) },
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridConfig::Points(p) => p.clone(),
            GridConfig::Dyadic { dyadic: (a, b) } => dyadic(*a, *b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: String,
    pub grid: GridConfig,
    /// Density in the text grammar; required by `power_shift` and `scaled`.
    pub base: Option<String>,
    /// Replace the base by its piecewise-constant approximant of this order.
    pub approximate: Option<usize>,
    pub tail_eps: Option<f64>,
}

impl FamilyConfig {
    pub fn to_spec(&self) -> Result<FamilySpec, TauberianError> {
        let invalid = |m: String| TauberianError::InvalidSpec(format!("{}: {m}", self.kind));
        let base = || -> Result<Density, TauberianError> {
            let text = self
                .base
                .as_deref()
                .ok_or_else(|| invalid("missing base".into()))?;
            let density = parse_density(text).map_err(|e| invalid(e.to_string()))?;
            match self.approximate {
                None => Ok(density),
                Some(n) => pc_approximate(&density, n)
                    .map(|a| a.density)
                    .map_err(|e| invalid(e.to_string())),
            }
        };
        let family = match self.kind.as_str() {
            "cesaro" => Family::Cesaro,
            "cesaro_discrete" => Family::CesaroDiscrete,
            "abel" => Family::Abel,
            "power_shift" => Family::PowerShift { base: base()? },
            "scaled" => Family::Scaled { base: base()? },
            other => {
                return Err(TauberianError::InvalidSpec(format!(
                    "unknown family kind `{other}`"
                )))
            }
        };
        let mut spec = FamilySpec::new(family, self.grid.points())?;
        spec.tail_eps = self.tail_eps;
        spec.validate()?;
        Ok(spec)
    }
}

/// Experiment document driving `sweep` and `equivalence`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin name or path to a game document.
    pub game: String,
    pub families: Vec<FamilyConfig>,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub out: Option<String>,
}

fn default_tol() -> f64 {
    0.02
}

fn default_tail_eps() -> f64 {
    1e-9
}

impl ExperimentConfig {
    pub fn specs(&self) -> Result<Vec<FamilySpec>, TauberianError> {
        self.families.iter().map(FamilyConfig::to_spec).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityRow {
    pub lambda: f64,
    /// `sup_t μ_λ(t)`.
    pub sup: f64,
    /// `V_0^{q}[μ_λ] · q` with `q = q[μ_λ](1-ε)`, one per `ε`.
    pub products: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub eps_grid: Vec<f64>,
    /// Rows sorted by decreasing `λ`.
    pub rows: Vec<AdmissibilityRow>,
    /// Max over `λ` of the product, per `ε`.
    pub max_products: Vec<f64>,
    pub threshold: f64,
    pub sup_vanishing: bool,
    pub products_bounded: bool,
}

/// Diagnostics for a density family `μ_λ`: whether `sup μ_λ` trends to zero
/// as `λ → 0` and whether `V_0^{q(1-ε)}[μ_λ] · q(1-ε)` stays below
/// `threshold`.
///
/// The sup is deemed vanishing when it decays at least like `√λ` between the
/// largest and smallest grid rate.
pub fn check_admissible(
    family: &[(f64, Density)],
    eps_grid: &[f64],
    threshold: f64,
) -> Result<AdmissibilityReport, DensityError> {
    let mut rows = family
        .iter()
        .map(|(lambda, mu)| {
            let products = eps_grid
                .iter()
                .map(|&eps| {
                    let q = mu.quantile(1.0 - eps)?;
                    Ok(if q > 0.0 {
                        mu.total_variation(0.0, q)? * q
                    } else {
                        0.0
                    })
                })
                .collect::<Result<Vec<_>, DensityError>>()?;
            Ok(AdmissibilityRow {
                lambda: *lambda,
                sup: mu.sup(),
                products,
            })
        })
        .collect::<Result<Vec<_>, DensityError>>()?;
    rows.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    let max_products: Vec<f64> = (0..eps_grid.len())
        .map(|j| rows.iter().map(|r| r.products[j]).fold(0.0, f64::max))
        .collect();
    let sup_vanishing = match (rows.first(), rows.last()) {
        (Some(first), Some(last)) if rows.len() > 1 => {
            last.sup <= first.sup * (last.lambda / first.lambda).sqrt()
        }
        _ => false,
    };
    let products_bounded = max_products.iter().all(|p| *p <= threshold);
    Ok(AdmissibilityReport {
        eps_grid: eps_grid.to_vec(),
        rows,
        max_products,
        threshold,
        sup_vanishing,
        products_bounded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFamilyRow {
    pub lambda: f64,
    pub at_zero: f64,
    pub sampled_max: f64,
    /// `ρ_λ(0) = λ` and `ρ_λ ≤ λ` on the samples.
    pub peak_at_zero: bool,
    /// Largest `δ` with `ρ_λ ≥ λ(1-ε)` on `[0, δ/λ)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFamilyReport {
    pub epsilon: f64,
    pub rows: Vec<TestFamilyRow>,
    pub peak_at_zero: bool,
    /// Smallest `δ` over the grid; works for every member.
    pub delta_eps: f64,
}

const SAMPLES: usize = 1000;

/// Infimum of `ρ` over `[0, x)`; closed forms are nonincreasing.
fn inf_before(rho: &Density, x: f64) -> f64 {
    match rho.as_steps() {
        Some(s) => {
            let cells = s.breakpoints().partition_point(|&b| b < x).max(1);
            let mut low = s.levels()[..cells.min(s.levels().len())]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if x > s.support_end() {
                low = 0.0;
            }
            low
        }
        None => rho.left_pdf(x),
    }
}

/// Checks `ρ_λ(0) = λ ≥ ρ_λ` and finds `δ_ε` by bisection.
pub fn check_test_family(family: &[(f64, Density)], eps: f64) -> TestFamilyReport {
    let rows: Vec<TestFamilyRow> = family
        .iter()
        .map(|(lambda, rho)| {
            let lambda = *lambda;
            let end = rho
                .support_end()
                .or_else(|| rho.upper_quantile(1e-9))
                .unwrap_or(1.0);
            let mut points: Vec<f64> = (0..SAMPLES)
                .map(|i| end * i as f64 / (SAMPLES - 1) as f64)
                .collect();
            if let Some(s) = rho.as_steps() {
                points.extend_from_slice(s.breakpoints());
            }
            let sampled_max = points.iter().map(|&t| rho.pdf(t)).fold(0.0, f64::max);
            let at_zero = rho.pdf(0.0);
            let slack = 1e-9 * lambda.max(1.0);
            let peak_at_zero = (at_zero - lambda).abs() <= slack && sampled_max <= lambda + slack;

            let level = lambda * (1.0 - eps);
            let holds = |delta: f64| inf_before(rho, delta / lambda) >= level;
            let mut hi = 1.0;
            while holds(hi) && hi < 1e12 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            if holds(hi) {
                lo = hi;
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if holds(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            TestFamilyRow {
                lambda,
                at_zero,
                sampled_max,
                peak_at_zero,
                delta: lo,
            }
        })
        .collect();
    TestFamilyReport {
        epsilon: eps,
        peak_at_zero: rows.iter().all(|r| r.peak_at_zero),
        delta_eps: rows.iter().map(|r| r.delta).fold(f64::INFINITY, f64::min),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::builtin;

    #[test]
    fn grid_validation() {
        assert!(FamilySpec::new(Family::Abel, vec![]).is_err());
        assert!(FamilySpec::new(Family::Abel, vec![1.0, 0.5, 0.7]).is_err());
        assert!(FamilySpec::new(Family::Abel, vec![0.0, 1.0]).is_err());
        assert!(FamilySpec::new(Family::CesaroDiscrete, vec![1.5]).is_err());
        assert!(FamilySpec::new(Family::Abel, vec![1.0, 0.1, 0.01]).is_ok());
    }

    #[test]
    fn finest_point_follows_family_direction() {
        let abel = FamilySpec::new(Family::Abel, vec![1.0, 0.1, 0.01]).unwrap();
        assert_eq!(abel.finest_index(), 2);
        let ces = FamilySpec::new(Family::CesaroDiscrete, vec![8.0, 4.0, 2.0]).unwrap();
        assert_eq!(ces.finest_index(), 0);
    }

    #[test]
    fn swap2_discrete_cesaro_family() {
        let g = builtin("swap2").unwrap();
        let spec = FamilySpec::new(Family::CesaroDiscrete, vec![2.0, 3.0, 4.0]).unwrap();
        let v = family_values(&g, &spec, 1e-9).unwrap();
        let lo: Vec<Vec<f64>> = v.iter().map(|x| x.bracket.lo.0.clone()).collect();
        assert_eq!(
            lo,
            vec![vec![0.5, 0.5], vec![2.0 / 3.0, 1.0 / 3.0], vec![0.5, 0.5]]
        );
    }

    #[test]
    fn missing_reference() {
        let g = builtin("swap2").unwrap();
        let spec = FamilySpec::new(
            Family::PowerShift {
                base: Density::power(1.0, 1.0, 2.0).unwrap(),
            },
            vec![1.0],
        )
        .unwrap();
        assert_eq!(
            equivalence_report(&g, &[spec], 0.02, 1e-3),
            Err(TauberianError::MissingReferenceFamily)
        );
    }

    #[test]
    fn config_grid_forms() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"game":"swap2","tail_eps":1e-9,"families":[
                {"kind":"abel","grid":{"dyadic":[-3,0]}},
                {"kind":"power_shift","grid":[1,10],"base":"power:1,1,2","tail_eps":1e-3}]}"#,
        )
        .unwrap();
        let specs = cfg.specs().unwrap();
        assert_eq!(specs[0].grid, vec![0.125, 0.25, 0.5, 1.0]);
        assert_eq!(specs[1].tail_eps, Some(1e-3));
        assert_eq!(cfg.tol, 0.02);
    }

    #[test]
    fn csv_header_is_fixed() {
        let mut out = Vec::new();
        write_csv(&[], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "family,grid_point,state,lo,hi,deviation\n"
        );
    }
}
