//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use tauber::density::{
    pc_approximate, proof_constants, quantile_partition, regularize_support, tv_correct, Density,
    Normalization,
};
use tauber::games::{builtin, random_game, GameRng, StepProcess, BUILTIN_NAMES};
use tauber::minimax::{matrix_value, MatrixGame};
use tauber::tauberian::{dyadic, equivalence_report, Family, FamilySpec};
use tauber::valuation::{
    abel_fixed_point, cesaro_finite, chain_series_value, dpp_check, horizon, step_payoff,
    value_backward,
};

const DESK_GAMES: [&str; 4] = ["swap2", "lazy2", "ergodic3", "mdp_reach"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(
    violations: usize,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
) -> Outcome {
    let in_time = budget.is_none_or(|b| elapsed < b);
    let timing = match budget {
        Some(b) => format!("{:.2} s, budget {} s", elapsed.as_secs_f64(), b.as_secs()),
        None => format!("{:.2} s", elapsed.as_secs_f64()),
    };
    Outcome {
        pass: violations == 0 && in_time,
        detail: format!("{violations} violations; {detail} ({timing})"),
    }
}

fn density_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = GameRng::new(1);
    let mut violations = 0;
    let mut worst_l1: f64 = 0.0;
    for case in 0..1000 {
        let ok = match case % 8 {
            0 => {
                let e = Density::exponential(uniform_in(&mut rng, 1e-3, 10.0)).unwrap();
                e.shift(uniform_in(&mut rng, 1e-3, 100.0)).unwrap() == e
            }
            1 => {
                let s = uniform_in(&mut rng, 0.5, 100.0);
                let t = s * uniform_in(&mut rng, 0.01, 0.99);
                Density::uniform(s)
                    .unwrap()
                    .shift(t)
                    .unwrap()
                    .approx_eq(&Density::uniform(s - t).unwrap(), 1e-12)
            }
            2 => {
                let l = uniform_in(&mut rng, 1e-3, 100.0);
                Density::exponential(1.0).unwrap().scale(l).unwrap()
                    == Density::exponential(l).unwrap()
            }
            3 => {
                let l = uniform_in(&mut rng, 1e-3, 100.0);
                Density::uniform(1.0)
                    .unwrap()
                    .scale(l)
                    .unwrap()
                    .approx_eq(&Density::uniform(1.0 / l).unwrap(), 1e-12)
            }
            4 => {
                let (a, b) = (
                    uniform_in(&mut rng, 0.1, 10.0),
                    uniform_in(&mut rng, 0.1, 10.0),
                );
                let g = uniform_in(&mut rng, 1.05, 6.0);
                let t = uniform_in(&mut rng, 1e-3, 1e4);
                let p = Density::power(a, b, g).unwrap();
                p.shift(t)
                    .unwrap()
                    .approx_eq(&p.scale(a / (a + b * t)).unwrap(), 1e-12)
            }
            5 => {
                let cells = 1 + rng.next_below(20);
                let span = uniform_in(&mut rng, 1.0, 50.0);
                let rho = random_steps(&mut rng, cells, span);
                let (l, m) = (
                    uniform_in(&mut rng, 0.05, 20.0),
                    uniform_in(&mut rng, 0.05, 20.0),
                );
                let d = rho
                    .scale(l)
                    .unwrap()
                    .scale(m)
                    .unwrap()
                    .l1_distance(&rho.scale(l * m).unwrap());
                worst_l1 = worst_l1.max(d);
                d <= 1e-9
            }
            6 => {
                let cells = 1 + rng.next_below(20);
                let span = uniform_in(&mut rng, 1.0, 50.0);
                let rho = random_steps(&mut rng, cells, span);
                let s = span * uniform_in(&mut rng, 0.0, 0.45);
                let t = span * uniform_in(&mut rng, 0.0, 0.45);
                let d = rho
                    .shift(s)
                    .unwrap()
                    .shift(t)
                    .unwrap()
                    .l1_distance(&rho.shift(s + t).unwrap());
                worst_l1 = worst_l1.max(d);
                d <= 1e-9
            }
            _ => {
                let cells = 1 + rng.next_below(20);
                let span = uniform_in(&mut rng, 1.0, 50.0);
                let rho = random_steps(&mut rng, cells, span);
                let l = uniform_in(&mut rng, 0.05, 20.0);
                let t = span / l * uniform_in(&mut rng, 0.0, 0.9);
                // shifting the rescaled density equals rescaling the shifted one
                let d = rho
                    .scale(l)
                    .unwrap()
                    .shift(t)
                    .unwrap()
                    .l1_distance(&rho.shift(l * t).unwrap().scale(l).unwrap());
                worst_l1 = worst_l1.max(d);
                d <= 1e-9
            }
        };
        violations += usize::from(!ok);
    }
    outcome(
        violations,
        format!("1000 cases, closed forms to 1e-12 relative, worst step-density L1 {worst_l1:.1e}"),
        start.elapsed(),
        Some(Duration::from_secs(5)),
    )
}

/// Either a fresh density or a small perturbation of `rho` of the same kind.
fn partner(rng: &mut GameRng, rho: &Density, kind: usize) -> Density {
    if rng.next_unit() < 0.5 {
        let other = kind + rng.next_below(4);
        return random_density(rng, other);
    }
    let wiggle = |rng: &mut GameRng, x: f64| x * uniform_in(rng, 0.9, 1.1);
    match rho {
        Density::Uniform { horizon } => Density::uniform(wiggle(rng, *horizon)).unwrap(),
        Density::Exponential { rate } => Density::exponential(wiggle(rng, *rate)).unwrap(),
        Density::Power { alpha, beta, gamma } => {
            let g = wiggle(rng, *gamma).max(3.0);
            Density::power(wiggle(rng, *alpha), wiggle(rng, *beta), g).unwrap()
        }
        Density::PiecewiseConstant(s) => {
            let levels = s.levels().iter().map(|l| wiggle(rng, *l)).collect();
            Density::piecewise_constant(
                s.breakpoints().to_vec(),
                levels,
                Normalization::Renormalize,
            )
            .unwrap()
        }
    }
}

fn l1_lipschitz() -> Outcome {
    let start = Instant::now();
    let tail_eps = 1e-6;
    let games: Vec<_> = DESK_GAMES.iter().map(|n| builtin(n).unwrap()).collect();
    let mut rng = GameRng::new(2);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for pair in 0..200 {
        let kind = pair % 4;
        let nu = random_density(&mut rng, kind);
        let mu = partner(&mut rng, &nu, kind);
        let l1 = nu.l1_distance(&mu);
        for g in &games {
            let a = value_backward(g, &nu, tail_eps).unwrap().midpoint();
            let b = value_backward(g, &mu, tail_eps).unwrap().midpoint();
            let slack = l1 + 2.0 * tail_eps - sup_gap(&a, &b);
            tightest = tightest.min(slack);
            violations += usize::from(slack < 0.0);
        }
    }
    outcome(
        violations,
        format!("200 pairs x 4 games, smallest slack {tightest:.2e}"),
        start.elapsed(),
        Some(Duration::from_secs(60)),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let tail_eps = 1e-9;
    let mut violations = 0;
    for seed in 0..100u64 {
        let chain = random_game(seed, 1 + (seed % 5) as usize, 1, 1);
        let mut rng = GameRng::new(seed + 1000);
        for kind in 0..4 {
            let rho = random_density(&mut rng, kind);
            let a = value_backward(&chain, &rho, tail_eps).unwrap();
            let b = chain_series_value(&chain, &rho, tail_eps).unwrap();
            violations += usize::from(!a.overlaps(&b, 1e-12));
        }
    }
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        let g = builtin(name).unwrap();
        for lambda in [1.0, 0.1, 0.01] {
            let v = abel_fixed_point(&g, lambda, tol).unwrap();
            let b = value_backward(&g, &Density::exponential(lambda).unwrap(), tail_eps).unwrap();
            let gap = sup_gap(&v, &b.midpoint());
            worst = worst.max(gap);
            violations += usize::from(gap > tol + b.tail);
        }
    }
    outcome(
        violations,
        format!("400 chain brackets overlap, worst Abel gap {worst:.1e}"),
        start.elapsed(),
        Some(Duration::from_secs(60)),
    )
}

fn closed_form_values() -> Outcome {
    let start = Instant::now();
    let swap = builtin("swap2").unwrap();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for lambda in [1.0_f64, 0.1, 0.01] {
        let beta = (-lambda).exp();
        let expect = [1.0 / (1.0 + beta), beta / (1.0 + beta)];
        let b = value_backward(&swap, &Density::exponential(lambda).unwrap(), 1e-9).unwrap();
        let fixed = abel_fixed_point(&swap, lambda, 1e-9).unwrap();
        for got in [&b.midpoint().0, &fixed.0] {
            let gap = sup_gap(got, &expect);
            worst = worst.max(gap);
            violations += usize::from(gap > 1e-6 + b.tail);
        }
    }
    for n in 2..=64u64 {
        let v = cesaro_finite(&swap, n).unwrap();
        let exact = n.div_ceil(2) as f64 / n as f64;
        violations += usize::from(v[0] != exact);
        // v equals ceil(n/2)/n bitwise, so the bound is checked on that rational
        violations += usize::from((2 * n.div_ceil(2)).abs_diff(n) > 1);
    }
    outcome(
        violations,
        format!("worst Abel error {worst:.1e}, Cesaro n=2..64 bitwise"),
        start.elapsed(),
        None,
    )
}

fn tauberian_equivalence() -> Outcome {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let base = pc_approximate(&Density::exponential(1.0).unwrap(), 1000)
        .unwrap()
        .density;
    let specs = vec![
        FamilySpec::new(Family::CesaroDiscrete, dyadic(0, 12)).unwrap(),
        FamilySpec::new(Family::Cesaro, dyadic(0, 12)).unwrap(),
        FamilySpec::new(Family::Abel, dyadic(-12, 0)).unwrap(),
        FamilySpec::new(
            Family::PowerShift {
                base: Density::power(1.0, 1.0, 2.0).unwrap(),
            },
            dyadic(0, 12),
        )
        .unwrap()
        .with_tail_eps(1e-3),
        FamilySpec::new(Family::Scaled { base }, dyadic(-12, 0)).unwrap(),
    ];
    let mut violations = 0;
    let mut worst_dev: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for name in DESK_GAMES {
        let g = builtin(name).unwrap();
        let report = pool
            .install(|| equivalence_report(&g, &specs, 0.02, 1e-9))
            .unwrap();
        worst_gap = worst_gap.max(report.u_star_disagreement);
        violations += usize::from(report.u_star_disagreement > 0.01);
        for f in &report.families {
            let dev = f.finest_row().sup_deviation();
            worst_dev = worst_dev.max(dev);
            violations += usize::from(dev > 0.02);
        }
    }
    outcome(
        violations,
        format!("worst finest deviation {worst_dev:.2e}, worst u* disagreement {worst_gap:.2e}, 1 thread"),
        start.elapsed(),
        Some(Duration::from_secs(600)),
    )
}

fn discrete_dpp() -> Outcome {
    let start = Instant::now();
    let tail_eps = 1e-9;
    let mut rng = GameRng::new(6);
    let steps = random_steps(&mut rng, 9, 20.0);
    let densities = [
        Density::uniform(16.0).unwrap(),
        Density::exponential(0.5).unwrap(),
        Density::power(1.0, 1.0, 3.0).unwrap(),
        steps,
    ];
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        let g = builtin(name).unwrap();
        for rho in &densities {
            for n in [1, 2, 5, 10] {
                let d = dpp_check(&g, rho, n, tail_eps).unwrap();
                worst = worst.max(d);
                violations += usize::from(d > 2.0 * tail_eps + 1e-9);
            }
        }
    }
    outcome(
        violations,
        format!("5 games x 4 kinds x 4 cuts, worst discrepancy {worst:.1e}"),
        start.elapsed(),
        None,
    )
}

fn shift_and_ratio_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = GameRng::new(7);
    let payoff: Vec<f64> = (0..5).map(|_| rng.next_unit()).collect();
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for case in 0..100 {
        let pre = (0..rng.next_below(6)).map(|_| rng.next_below(5)).collect();
        let period = (0..1 + rng.next_below(5))
            .map(|_| rng.next_below(5))
            .collect();
        let z = StepProcess::new(pre, period).unwrap();
        let rho = random_density(&mut rng, case);
        let r = uniform_in(&mut rng, 1e-3, 1.0 - 1e-3);
        let shifted = rho.shift(r).unwrap();
        let n0 = horizon(&rho, 1e-12).unwrap();
        let n1 = horizon(&shifted, 1e-12).unwrap();
        let direct = step_payoff(&z, &rho, &payoff, n0);
        let moved = rho.tail_mass(r) * step_payoff(&z, &shifted, &payoff, n1);
        let slack =
            rho.total_variation(0.0, f64::INFINITY).unwrap() + 1e-9 - (direct - moved).abs();
        tightest = tightest.min(slack);
        violations += usize::from(slack < 0.0);
    }
    let mut ratio_checks = 0;
    for name in BUILTIN_NAMES {
        let g = builtin(name).unwrap();
        for n in 1..=64u64 {
            let base = cesaro_finite(&g, n).unwrap();
            for r in [1.05, 1.1, 1.25, 1.5, 1.75, 2.0] {
                let m = (n as f64 * r).round() as u64;
                let other = cesaro_finite(&g, m).unwrap();
                ratio_checks += 1;
                violations +=
                    usize::from(sup_gap(&base, &other) > 2.0 * (r - 1.0) + 2.0 / n as f64);
            }
        }
    }
    outcome(
        violations,
        format!("100 step processes (smallest slack {tightest:.2e}), {ratio_checks} ratio checks"),
        start.elapsed(),
        None,
    )
}

fn construction_audit() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut notes = Vec::new();

    let mut worst_identity: f64 = 0.0;
    for (eps, m, r0) in [
        (0.05, 1.5, 0.1),
        (0.09, 1.01, 0.45),
        (0.01, 5.0, 0.2),
        (0.001, 2.0, 0.01),
        (0.099, 50.0, 0.3),
    ] {
        let c = proof_constants(eps, m, r0).unwrap();
        let err = (c.geometric_mass() - (1.0 - eps)).abs();
        worst_identity = worst_identity.max(err);
        violations += usize::from(err > 1e-12);
    }
    notes.push(format!("identity error {worst_identity:.1e}"));

    let constants = proof_constants(0.05, 1.5, 0.1).unwrap();
    let mut rng = GameRng::new(8);
    let kinds = [
        Density::uniform(3.0).unwrap(),
        Density::exponential(1.0).unwrap(),
        Density::power(1.0, 1.0, 2.0).unwrap(),
        random_steps(&mut rng, 15, 10.0),
    ];
    let mut worst_mass: f64 = 0.0;
    for rho in &kinds {
        let part = quantile_partition(rho, &constants).unwrap();
        for m in 1..=part.len() {
            let expect = ((m - 1) as f64 * constants.ln_p).exp() * (1.0 - constants.p);
            worst_mass = worst_mass.max((part.interval_mass(m) - expect).abs());
        }
    }
    violations += usize::from(worst_mass > 1e-9);
    notes.push(format!(
        "{} intervals per kind, mass error {worst_mass:.1e}",
        constants.intervals()
    ));

    // flat step density with narrow spikes and a dip
    let eps = 0.05;
    let spiky = Density::piecewise_constant(
        vec![0.0, 0.3, 0.301, 0.6, 0.6005, 0.8, 0.85, 1.0],
        vec![1.0, 50.0, 1.0, 30.0, 1.0, 0.2, 1.0],
        Normalization::Renormalize,
    )
    .unwrap();
    let mu = regularize_support(&spiky, eps).unwrap();
    let variation = mu
        .log_variation(0.0, mu.upper_quantile(eps).unwrap())
        .unwrap();
    let m_bound = 1.5;
    violations += usize::from(variation > m_bound / eps);
    let c = proof_constants(eps, m_bound, 0.1).unwrap();
    let part = quantile_partition(&mu, &c).unwrap();
    let out = tv_correct(&mu, &part, m_bound, c.k, eps).unwrap();
    let l1 = out.density.l1_distance(&mu);
    violations += usize::from(out.incorrect_count() as u64 > c.k || out.incorrect_count() == 0);
    violations += usize::from(l1 > 2.0 * eps);
    notes.push(format!(
        "spike: {} incorrect of {} (k = {}), L1 {l1:.1e}",
        out.incorrect_count(),
        part.len(),
        c.k
    ));

    let mut worst_ratio: f64 = 0.0;
    for input in [
        Density::exponential(1.0).unwrap(),
        Density::uniform(1.0).unwrap(),
    ] {
        for eps in [0.01, 0.05, 0.1, 0.5] {
            let mu = regularize_support(&input, eps).unwrap();
            violations += usize::from((step_mass(&mu) - 1.0).abs() > 1e-9);
            let l1 = mu.l1_distance(&input);
            worst_ratio = worst_ratio.max(l1 / (2.0 * eps));
            // the bound is attained with equality; the slack absorbs rounding
            violations += usize::from(l1 > 2.0 * eps + 1e-12);
        }
    }
    notes.push(format!("regularized L1/2eps up to {worst_ratio:.12}"));
    outcome(violations, notes.join(", "), start.elapsed(), None)
}

fn matrix_games() -> Outcome {
    let start = Instant::now();
    let mut rng = GameRng::new(9);
    let mut violations = 0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..1000 {
        let (m, n) = (1 + rng.next_below(6), 1 + rng.next_below(6));
        let entries = (0..m * n)
            .map(|_| uniform_in(&mut rng, -1.0, 1.0))
            .collect();
        let game = MatrixGame::new(m, n, entries).unwrap();
        let s = matrix_value(&game).unwrap();
        let (low, high) = (
            game.row_guarantee(&s.row_strategy),
            game.col_guarantee(&s.col_strategy),
        );
        worst_gap = worst_gap.max(high - low);
        violations +=
            usize::from(high - low > 1e-9 || low < s.value - 1e-9 || high > s.value + 1e-9);
    }
    let pennies =
        matrix_value(&MatrixGame::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()).unwrap();
    violations += usize::from(pennies.value != 0.5);
    violations +=
        usize::from(pennies.row_strategy != [0.5, 0.5] || pennies.col_strategy != [0.5, 0.5]);
    let rps = matrix_value(
        &MatrixGame::from_rows(&[
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ])
        .unwrap(),
    )
    .unwrap();
    let third = [1.0 / 3.0; 3];
    violations += usize::from(rps.value.abs() > 1e-15);
    violations += usize::from(
        sup_gap(&rps.row_strategy, &third) > 1e-15 || sup_gap(&rps.col_strategy, &third) > 1e-15,
    );
    outcome(
        violations,
        format!("1000 matrices up to 6x6, worst duality gap {worst_gap:.1e}"),
        start.elapsed(),
        None,
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("density identity suite", density_identities),
        ("L1-Lipschitz value bound", l1_lipschitz),
        ("oracle equivalence", oracle_equivalence),
        ("closed-form values", closed_form_values),
        ("Tauberian equivalence at desk scale", tauberian_equivalence),
        ("discrete DPP", discrete_dpp),
        (
            "discrete shift and Cesaro ratio bounds",
            shift_and_ratio_bounds,
        ),
        ("proof-construction audit", construction_audit),
        ("matrix-game LP", matrix_games),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
