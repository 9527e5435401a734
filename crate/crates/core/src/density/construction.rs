//! Density constructions: piecewise-constant approximation on a quantile
//! window, support regularization, the geometric quantile partition and the
//! flattening of intervals whose log-density varies too much.

use super::{Density, DensityError, Normalization};

/// Target L1 error of sampling a closed-form density into cell averages.
const SAMPLING_BUDGET: f64 = 1e-6;
const MIN_SAMPLING_CELLS: usize = 10_000;
const MAX_SAMPLING_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PcApproximation {
    pub density: Density,
    /// Exact `∫|ρ - μ̄|` of the returned approximant.
    pub l1_error: f64,
}

/// Piecewise-constant `μ̄` supported on `[q(1/n), q(1-1/n)]` that matches `ρ`'s
/// mass there and is rescaled by `n/(n-2)` to unit mass.
pub fn pc_approximate(rho: &Density, n: usize) -> Result<PcApproximation, DensityError> {
    if n < 4 {
        return Err(DensityError::BinCountTooSmall(n));
    }
    let edge = 1.0 / n as f64;
    let lo = rho.quantile(edge)?;
    let hi = rho.upper_quantile(edge).expect("edge > 0");
    if !(hi > lo) {
        return Err(DensityError::DegenerateInterval { index: 0 });
    }
    let bound = 5.0 / n as f64;

    let window = |cells: usize| -> Result<Density, DensityError> {
        let (breakpoints, levels) = match rho {
            Density::PiecewiseConstant(_) => restrict_steps(rho, lo, hi, 0.0),
            Density::Uniform { .. } => (vec![lo, hi], vec![rho.pdf(lo)]),
            _ => {
                let inner = 1.0 - 2.0 * edge;
                let mut knots = Vec::with_capacity(cells + 1);
                knots.push(lo);
                for j in 1..cells {
                    knots.push(rho.quantile(edge + inner * j as f64 / cells as f64)?);
                }
                knots.push(hi);
                knots.dedup();
                cell_averages(rho, &knots, 0.0)
            }
        };
        Density::piecewise_constant(breakpoints, levels, Normalization::Renormalize)
    };

    let mut cells = 4 * n;
    loop {
        let density = window(cells)?;
        let l1_error = rho.l1_distance(&density);
        if l1_error <= bound || rho.as_steps().is_some() || cells >= MAX_SAMPLING_CELLS {
            return Ok(PcApproximation { density, l1_error });
        }
        cells *= 2;
    }
}

/// `μ = μ̂ + ε/q` on `[0, q]` with `q = q[μ̂](1-ε)`, zero afterwards.
///
/// Closed-form inputs are replaced by their cell averages on a uniform grid
/// fine enough that the sampling error stays below `1e-6` in L1.
pub fn regularize_support(mu_hat: &Density, epsilon: f64) -> Result<Density, DensityError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DensityError::QuantileOutOfRange(1.0 - epsilon));
    }
    let end = mu_hat
        .upper_quantile(epsilon)
        .expect("epsilon > 0 gives a finite quantile");
    let bump = epsilon / end;
    let (breakpoints, levels) = match mu_hat {
        Density::PiecewiseConstant(_) => restrict_steps(mu_hat, 0.0, end, bump),
        Density::Uniform { .. } => (vec![0.0, end], vec![mu_hat.pdf(0.0) + bump]),
        _ => {
            let tv = mu_hat.total_variation(0.0, end)?;
            let wanted = (end * tv / (2.0 * SAMPLING_BUDGET)).ceil() as usize;
            let cells = wanted.clamp(MIN_SAMPLING_CELLS, MAX_SAMPLING_CELLS);
            let knots: Vec<f64> = (0..=cells).map(|j| end * j as f64 / cells as f64).collect();
            cell_averages(mu_hat, &knots, bump)
        }
    };
    Density::piecewise_constant(breakpoints, levels, Normalization::Strict)
}

fn cell_averages(rho: &Density, knots: &[f64], bump: f64) -> (Vec<f64>, Vec<f64>) {
    let levels = knots
        .windows(2)
        .map(|w| rho.mass_between(w[0], w[1]) / (w[1] - w[0]) + bump)
        .collect();
    (knots.to_vec(), levels)
}

/// Cells of a step density clipped to `[lo, hi]`, each raised by `bump`.
fn restrict_steps(rho: &Density, lo: f64, hi: f64, bump: f64) -> (Vec<f64>, Vec<f64>) {
    let mut breakpoints = vec![lo];
    breakpoints.extend(rho.jump_points().into_iter().filter(|&b| b > lo && b < hi));
    breakpoints.push(hi);
    let levels = breakpoints
        .windows(2)
        .map(|w| rho.pdf(w[0]) + bump)
        .collect();
    (breakpoints, levels)
}

/// Constants of the schedule used to build flattened densities: `k` and the
/// ratio `p = ε^{1/k²}` with `δ = 1 - p`, `ϰ = ε(1-p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofConstants {
    pub epsilon: f64,
    /// Bound `M` on the variation-times-quantile product.
    pub variation_bound: f64,
    pub r0: f64,
    pub k: u64,
    pub p: f64,
    /// `ln ε / k²`; powers of `p` are taken through it so that rounding in
    /// `p` does not compound over `k²` factors.
    pub ln_p: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl ProofConstants {
    /// Derived quantities for a given `k`, without checking the inequalities
    /// that [`proof_constants`] enforces.
    pub fn with_k(epsilon: f64, variation_bound: f64, r0: f64, k: u64) -> Self {
        let squares = (k * k) as f64;
        let ln_p = epsilon.ln() / squares;
        let p = ln_p.exp();
        // 1 - p is exact for p in [1/2, 1]
        let delta = 1.0 - p;
        Self {
            epsilon,
            variation_bound,
            r0,
            k,
            p,
            ln_p,
            delta,
            kappa: epsilon * delta,
        }
    }

    pub fn intervals(&self) -> u64 {
        self.k * self.k
    }

    /// `δ(1 + p + … + p^{k²-1})` in closed form; equals `1 - ε`.
    pub fn geometric_mass(&self) -> f64 {
        self.delta * -(self.intervals() as f64 * self.ln_p).exp_m1() / (1.0 - self.p)
    }

    /// Whether `k` satisfies `k > ε/r₀`, `kε > ln(1/ε)` and `kε ln(1+ε) > M`.
    pub fn admissible(epsilon: f64, variation_bound: f64, r0: f64, k: u64) -> bool {
        let k = k as f64;
        k > epsilon / r0
            && k * epsilon > (1.0 / epsilon).ln()
            && k * epsilon * epsilon.ln_1p() > variation_bound
    }
}

/// Minimal admissible `k` for `ε ∈ (0, 1/10)`, `M > 1`, `r₀ ∈ (0, 1/2)`.
pub fn proof_constants(
    epsilon: f64,
    variation_bound: f64,
    r0: f64,
) -> Result<ProofConstants, DensityError> {
    if !(epsilon > 0.0 && epsilon < 0.1) {
        return Err(DensityError::InvalidConstant {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(variation_bound > 1.0 && variation_bound.is_finite()) {
        return Err(DensityError::InvalidConstant {
            name: "M",
            value: variation_bound,
        });
    }
    if !(r0 > 0.0 && r0 < 0.5) {
        return Err(DensityError::InvalidConstant {
            name: "r0",
            value: r0,
        });
    }
    let estimate = (epsilon / r0)
        .max((1.0 / epsilon).ln() / epsilon)
        .max(variation_bound / (epsilon * epsilon.ln_1p()));
    let mut k = estimate.floor().max(1.0) as u64;
    while !ProofConstants::admissible(epsilon, variation_bound, r0, k) {
        k += 1;
    }
    while k > 1 && ProofConstants::admissible(epsilon, variation_bound, r0, k - 1) {
        k -= 1;
    }
    Ok(ProofConstants::with_k(epsilon, variation_bound, r0, k))
}

/// Split of `[0, q[μ](1-ε))` into `k²` intervals of geometrically decreasing
/// mass `p^{m-1}(1-p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantilePartition {
    pub epsilon: f64,
    pub k: u64,
    pub p: f64,
    /// `τ_0 = 0 < τ_1 < … < τ_{k²}` with `τ_m = q[μ](1 - p^m)`.
    pub tau: Vec<f64>,
    /// Average level of `μ` on `[τ_{m-1}, τ_m)`.
    pub lambdas: Vec<f64>,
}

impl QuantilePartition {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Mass `λ_m (τ_m - τ_{m-1})` of interval `m` (1-based).
    pub fn interval_mass(&self, m: usize) -> f64 {
        self.lambdas[m - 1] * (self.tau[m] - self.tau[m - 1])
    }
}

pub fn quantile_partition(
    mu: &Density,
    constants: &ProofConstants,
) -> Result<QuantilePartition, DensityError> {
    let count = constants.intervals() as usize;
    let mut tau = Vec::with_capacity(count + 1);
    let mut lambdas = Vec::with_capacity(count);
    tau.push(0.0);
    for m in 1..=count {
        let survive = (m as f64 * constants.ln_p).exp();
        let t = mu
            .upper_quantile(survive)
            .ok_or(DensityError::DegenerateInterval { index: m })?;
        let prev = tau[m - 1];
        if !(t > prev) {
            return Err(DensityError::DegenerateInterval { index: m });
        }
        lambdas.push(mu.mass_between(prev, t) / (t - prev));
        tau.push(t);
    }
    Ok(QuantilePartition {
        epsilon: constants.epsilon,
        k: constants.k,
        p: constants.p,
        tau,
        lambdas,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvCorrection {
    pub density: Density,
    /// 1-based indices `m` of the flattened intervals.
    pub incorrect: Vec<usize>,
}

impl TvCorrection {
    pub fn incorrect_count(&self) -> usize {
        self.incorrect.len()
    }
}

/// Replace `μ` by its interval average `λ_m` on every partition interval where
/// the variation of `ln μ` exceeds `M/(kε)`.
pub fn tv_correct(
    mu: &Density,
    partition: &QuantilePartition,
    variation_bound: f64,
    k: u64,
    epsilon: f64,
) -> Result<TvCorrection, DensityError> {
    let threshold = variation_bound / (k as f64 * epsilon);
    let mut incorrect = Vec::new();
    for m in 1..=partition.len() {
        let variation = mu.log_variation(partition.tau[m - 1], partition.tau[m])?;
        if variation > threshold {
            incorrect.push(m);
        }
    }
    if incorrect.is_empty() {
        return Ok(TvCorrection {
            density: mu.clone(),
            incorrect,
        });
    }
    if mu.is_closed_form() {
        return Err(DensityError::NotRepresentable);
    }

    let mut cuts = mu.jump_points();
    for &m in &incorrect {
        cuts.push(partition.tau[m - 1]);
        cuts.push(partition.tau[m]);
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    // drop cuts strictly inside flattened intervals
    cuts.retain(|&x| {
        !incorrect
            .iter()
            .any(|&m| x > partition.tau[m - 1] && x < partition.tau[m])
    });

    let starts: Vec<f64> = incorrect.iter().map(|&m| partition.tau[m - 1]).collect();
    let mut levels = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let slot = starts.partition_point(|&s| s <= w[0]);
        let flattened = slot > 0 && {
            let m = incorrect[slot - 1];
            w[0] >= partition.tau[m - 1] && w[1] <= partition.tau[m]
        };
        levels.push(if flattened {
            partition.lambdas[incorrect[slot - 1] - 1]
        } else {
            mu.pdf(w[0])
        });
    }
    let density = Density::piecewise_constant(cuts, levels, Normalization::Strict)?;
    Ok(TvCorrection { density, incorrect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_count_below_four_is_rejected() {
        let e = Density::exponential(1.0).unwrap();
        assert_eq!(
            pc_approximate(&e, 3).unwrap_err(),
            DensityError::BinCountTooSmall(3)
        );
    }

    #[test]
    fn uniform_window_is_flat() {
        let u = Density::uniform(1.0).unwrap();
        let approx = pc_approximate(&u, 10).unwrap();
        let steps = approx.density.as_steps().unwrap();
        assert_eq!(steps.breakpoints().len(), 2);
        assert!((steps.breakpoints()[0] - 0.1).abs() < 1e-15);
        assert!((steps.breakpoints()[1] - 0.9).abs() < 1e-15);
        assert!((steps.levels()[0] - 1.25).abs() < 1e-12);
        assert!((approx.l1_error - 0.4).abs() < 1e-12);
    }

    #[test]
    fn proof_constants_validate_inputs() {
        assert!(proof_constants(0.2, 2.0, 0.25).is_err());
        assert!(proof_constants(0.05, 1.0, 0.25).is_err());
        assert!(proof_constants(0.05, 2.0, 0.5).is_err());
    }

    #[test]
    fn all_correct_leaves_density_unchanged() {
        let mu = Density::uniform(1.0).unwrap();
        let c = ProofConstants::with_k(0.25, 2.0, 0.25, 2);
        let part = quantile_partition(&mu, &c).unwrap();
        let out = tv_correct(&mu, &part, 2.0, 2, 0.25).unwrap();
        assert_eq!(out.incorrect_count(), 0);
        assert_eq!(out.density, mu);
    }

    #[test]
    fn vanishing_density_is_reported() {
        let mu = Density::piecewise_constant(
            vec![0.0, 0.5, 0.6, 1.1],
            vec![1.0, 0.0, 1.0],
            Normalization::Strict,
        )
        .unwrap();
        let c = ProofConstants::with_k(0.25, 2.0, 0.25, 2);
        let part = quantile_partition(&mu, &c).unwrap();
        assert!(matches!(
            tv_correct(&mu, &part, 2.0, 2, 0.25),
            Err(DensityError::NonPositiveDensityOnSupport { .. })
        ));
    }
}
