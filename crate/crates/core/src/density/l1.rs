//! Exact L1 distance between densities by sign analysis.
//!
//! Between consecutive jump points both densities are smooth and the log-ratio
//! `ln ρ - ln ν` has a derivative that changes sign at most once (every kind
//! has a log-density that is affine in `t`, constant, or `-γ ln(α+βt)`). So each
//! segment splits into at most two monotone pieces, each with at most one
//! crossing, and on every sign-definite piece `∫|ρ-ν| = |∫ρ - ∫ν|` comes from
//! the closed-form CDFs.

use super::Density;

// stand-in for +∞ when probing signs on unbounded segments
const FAR: f64 = 1e15;

pub(super) fn l1_distance(f: &Density, g: &Density) -> f64 {
    let mut cuts = vec![0.0];
    cuts.extend(f.jump_points());
    cuts.extend(g.jump_points());
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += segment(f, g, w[0], w[1]);
    }
    total + segment(f, g, *cuts.last().unwrap(), f64::INFINITY)
}

fn segment(f: &Density, g: &Density, a: f64, b: f64) -> f64 {
    let probe = if b.is_finite() {
        0.5 * (a + b)
    } else {
        a + 1.0
    };
    let (fp, gp) = (f.pdf(probe), g.pdf(probe));
    if fp == 0.0 || gp == 0.0 {
        return (f.mass_between(a, b) - g.mass_between(a, b)).abs();
    }

    let log_ratio = |t: f64| local_ln(f, t, fp) - local_ln(g, t, gp);
    let slope = |t: f64| local_slope(f, t) - local_slope(g, t);
    let b_eff = if b.is_finite() {
        b
    } else {
        FAR.max(2.0 * a + 1.0)
    };

    let mut pieces = vec![a];
    if let Some(c) = bisect(&slope, a, b_eff) {
        pieces.push(c);
    }
    pieces.push(b);

    let mut cuts = vec![a];
    for w in pieces.windows(2) {
        let hi = if w[1].is_finite() { w[1] } else { b_eff };
        if let Some(r) = bisect(&log_ratio, w[0], hi) {
            cuts.push(r);
        }
        cuts.push(w[1]);
    }
    cuts.windows(2)
        .map(|w| (f.mass_between(w[0], w[1]) - g.mass_between(w[0], w[1])).abs())
        .sum()
}

// Step-like kinds are constant on a segment; read them at the probe so that
// segment endpoints see the segment's own level.
fn local_ln(d: &Density, t: f64, at_probe: f64) -> f64 {
    match d {
        Density::Exponential { .. } | Density::Power { .. } => d.ln_pdf(t),
        _ => at_probe.ln(),
    }
}

fn local_slope(d: &Density, t: f64) -> f64 {
    d.ln_pdf_slope(t)
}

/// Root of `fun` in `(lo, hi)` when the endpoint signs strictly differ.
fn bisect(fun: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(hi > lo) {
        return None;
    }
    let flo = fun(lo);
    let fhi = fun(hi);
    if !(flo * fhi < 0.0) {
        return None;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = fun(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
