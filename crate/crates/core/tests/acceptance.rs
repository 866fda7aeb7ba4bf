//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use hablab::analysis::{
    contour_table, default_contour_c_grid, default_contour_deltas, find_extinction_threshold,
    probe_decay_rate,
};
use hablab::dynamics::{
    compare_regimes, default_initial_condition, evolve, steady_state, Classification,
    EvolutionProblem, Regime, SteadyStateOptions, ORDER_TOL,
};
use hablab::spectral::{mu_degradation, mu_destruction};
use hablab::{lambda_degradation, lambda_destruction, Landscape, Result};

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn destruction_eigenvalue() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [1.0, 10.0] {
        let exact = mu_destruction_exact(d);
        let coarse = (mu_destruction(&grid(d, 2001), d)?.value - exact).abs();
        let fine = (mu_destruction(&grid(d, 4001), d)?.value - exact).abs();
        let ratio = coarse / fine;
        pass &= fine < 1e-3 && (3.5..=4.5).contains(&ratio);
        detail.push(format!("d={d}: err(h=0.005)={fine:.2e} ratio={ratio:.2}"));
    }
    outcome(pass, detail.join("; "))
}

fn eigenvalue_monotone_limit() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [1.0, 10.0] {
        let g = grid(d, 4001);
        let lim = mu_destruction(&g, d)?;
        let rs = (0..=6)
            .map(|k| mu_degradation(&g, d, 10f64.powi(k)))
            .collect::<Result<Vec<_>>>()?;
        let increasing = rs.windows(2).all(|w| w[1].value > w[0].value);
        let bounded = rs.iter().all(|r| r.value <= lim.value + 1e-6);
        let gap = (rs[6].value - lim.value).abs();
        let h1: Vec<f64> = rs
            .iter()
            .map(|r| r.eigenfunction.sub(&lim.eigenfunction).h1_norm(&g))
            .collect();
        let h1_decreasing = h1.windows(2).all(|w| w[1] < w[0]);
        pass &= increasing && bounded && gap < 5e-3 && h1_decreasing;
        detail.push(format!(
            "d={d}: increasing={increasing} bounded={bounded} gap(1e6)={gap:.2e} H1 {:.2e}->{:.2e} decreasing={h1_decreasing}",
            h1[0], h1[6]
        ));
    }
    outcome(pass, detail.join("; "))
}

fn duality() -> Result<Outcome> {
    let g = grid(1.0, 2001);
    let mut worst = 0.0f64;
    for c in [1.0, 10.0, 100.0] {
        let lambda = lambda_degradation(&g, c)?.value;
        worst = worst.max(mu_degradation(&g, 1.0 / lambda, c)?.value.abs());
    }
    let lambda = lambda_destruction(&g)?.value;
    let limit = mu_destruction(&g, 1.0 / lambda)?.value.abs();
    outcome(
        worst < 1e-3 && limit < 1e-3,
        format!("max |mu| over c in {{1,10,100}} = {worst:.2e}; destruction |mu| = {limit:.2e}"),
    )
}

fn threshold_dichotomy() -> Result<Outcome> {
    let slow = find_extinction_threshold(&grid(1.0, 2001), 1.0)?;
    let fast = find_extinction_threshold(&grid(10.0, 2001), 10.0)?;
    let exact = threshold_exact(10.0);
    let c0 = fast.c0.unwrap_or(f64::NAN);
    let rel = ((c0 - exact) / exact).abs();
    outcome(
        !slow.exists && fast.exists && rel < 0.01 && c0 > 2.0 / 3.0,
        format!(
            "d=1 exists={} (mu_inf={:.4}); d=10 c0={c0:.5} vs root {exact:.5} (rel {rel:.1e}), c_star={:.4}; \
             caption value c0~100 not reproduced",
            slow.exists, slow.mu_infinity, fast.c_star_lower_bound
        ),
    )
}

fn dynamic_consistency() -> Result<Outcome> {
    let g = grid(10.0, 2001);
    let c0 = find_extinction_threshold(&g, 10.0)?.c0.unwrap_or(f64::NAN);
    let below = steady_state(&g, 10.0, Regime::Degradation(0.9 * c0))?;
    let min = below.field.min_on_habitat(&g);
    let persistent = below.classification == Classification::Persistent && min > 1e-4;

    let c = 1.1 * c0;
    let p = EvolutionProblem::new(
        &g,
        10.0,
        Regime::Degradation(c),
        default_initial_condition(&g),
        0.01,
        200.0,
    )?;
    let sup = *evolve(&p)?.sup_norm.last().unwrap();
    let mu = mu_degradation(&g, 10.0, c)?.value;
    outcome(
        persistent && sup < 1e-6,
        format!(
            "0.9c0: {:?} min={min:.3e}; 1.1c0: sup(T=200)={sup:.2e} (target 1e-6, mu={mu:.4}, e^(-mu T)={:.1e})",
            below.classification,
            (-mu * 200.0).exp()
        ),
    )
}

fn decay_rate() -> Result<Outcome> {
    let g = grid(10.0, 2001);
    let c0 = find_extinction_threshold(&g, 10.0)?.c0.unwrap_or(f64::NAN);
    let far = probe_decay_rate(&g, 10.0, 2.0 * c0, 0.01, 200.0, (5.0, 200.0))?;
    let near = probe_decay_rate(&g, 10.0, 1.05 * c0, 0.01, 200.0, (5.0, 200.0))?;
    let rel = ((far.rate - far.mu) / far.mu).abs();
    outcome(
        rel < 0.1 && near.rate < far.rate,
        format!(
            "2c0: r={:.4} mu={:.4} (rel {rel:.1e}); 1.05c0: r={:.4} mu={:.4}",
            far.rate, far.mu, near.rate, near.mu
        ),
    )
}

fn ordering() -> Result<Outcome> {
    let cs = [1.0, 10.0, 100.0, 1000.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [1.0, 10.0] {
        let g = grid(d, 2001);
        let cmp = compare_regimes(&g, d, &cs, &default_initial_condition(&g), 0.01, 50.0, 1)?;
        let between: usize = cmp.pairs.iter().map(|p| p.count).sum();
        let above: usize = cmp.rows.iter().map(|r| r.destruction_violations).sum();

        let inf = steady_state(&g, d, Regime::Destruction)?.field;
        let states = cs
            .iter()
            .map(|&c| steady_state(&g, d, Regime::Degradation(c)).map(|s| s.field))
            .collect::<Result<Vec<_>>>()?;
        let mut steady = 0;
        for u in &states {
            steady += inf
                .values()
                .iter()
                .zip(u.values())
                .filter(|(a, b)| **a > **b + ORDER_TOL)
                .count();
        }
        for w in states.windows(2) {
            steady += w[1]
                .values()
                .iter()
                .zip(w[0].values())
                .filter(|(a, b)| **a > **b + ORDER_TOL)
                .count();
        }
        pass &= between == 0 && above == 0 && steady == 0;
        detail.push(format!(
            "d={d}: {} samples, violations u_c2<=u_c1 {between}, u_inf<=u_c {above}, steady {steady}",
            cmp.samples
        ));
    }
    outcome(pass, detail.join("; "))
}

fn uniform_cauchy() -> Result<Outcome> {
    let cs = [10.0, 100.0, 1000.0, 10000.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [1.0, 10.0] {
        let g = grid(d, 2001);
        let cmp = compare_regimes(&g, d, &cs, &default_initial_condition(&g), 0.01, 50.0, 1)?;
        let gaps: Vec<f64> = cmp.rows.iter().map(|r| r.sup_gap).collect();
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        pass &= decreasing;
        detail.push(format!(
            "d={d}: {}",
            gaps.iter()
                .map(|g| format!("{g:.3e}"))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    outcome(pass, detail.join("; "))
}

fn contour_trend() -> Result<Outcome> {
    let base = Landscape::interval((-10.0, 10.0), &[], 1.0, 1.0)?;
    let deltas = default_contour_deltas();
    let cs = default_contour_c_grid();
    let opts = SteadyStateOptions::default();
    let slow = contour_table(&base, 1.0, &deltas, &cs, 1001, &opts)?;
    let fast = contour_table(&base, 10.0, &deltas, &cs, 1001, &opts)?;
    let resilient =
        |t: &hablab::analysis::ContourTable| t.count(|c| c.delta <= 3.0 && c.ratio >= 0.9);
    let extinct =
        |t: &hablab::analysis::ContourTable| t.count(|c| c.delta >= 7.0 && c.ratio < 0.01);
    let (r1, r10) = (resilient(&slow), resilient(&fast));
    let (e1, e10) = (extinct(&slow), extinct(&fast));
    outcome(
        r10 > r1 && e10 > e1,
        format!("ratio>=0.9 at delta<=3: d=1 {r1}, d=10 {r10}; ratio<0.01 at delta>=7: d=1 {e1}, d=10 {e10}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("analytic destruction eigenvalue", destruction_eigenvalue),
        (
            "eigenvalue monotonicity and limit",
            eigenvalue_monotone_limit,
        ),
        ("duality", duality),
        ("threshold existence dichotomy", threshold_dichotomy),
        ("dynamic consistency", dynamic_consistency),
        ("decay-rate identification", decay_rate),
        ("ordering suites", ordering),
        ("uniform Cauchy convergence", uniform_cauchy),
        ("contour resilience trend", contour_trend),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name} [{:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
