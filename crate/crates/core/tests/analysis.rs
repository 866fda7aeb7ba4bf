mod common;

use common::*;
use hablab::analysis::{
    contour_table, find_extinction_threshold, fit_decay_rate, log_grid, probe_decay_rate, sweep_c,
};
use hablab::dynamics::{
    default_initial_condition, evolve, Classification, EvolutionProblem, Regime, SteadyStateOptions,
};
use hablab::spectral::mu_degradation;
use hablab::Landscape;

#[test]
fn threshold_matches_transcendental_root() {
    let g = grid(10.0, 2001);
    let r = find_extinction_threshold(&g, 10.0).unwrap();
    assert!(r.exists);
    let c0 = r.c0.unwrap();
    let exact = threshold_exact(10.0);
    assert!(((c0 - exact) / exact).abs() < 1e-3, "{c0} vs {exact}");
    assert!(c0 > r.c_star_lower_bound);
    assert!((r.c_star_lower_bound - 2.0 / 3.0).abs() < 1e-12);
    assert!((r.mu_infinity - mu_destruction_exact(10.0)).abs() < 1e-5);

    let b = r.bracket.unwrap();
    assert!(b.c_hi - b.c_lo <= 1e-4 * c0);
    assert!(mu_degradation(&g, 10.0, b.c_lo).unwrap().value < 0.0);
    assert!(mu_degradation(&g, 10.0, b.c_hi).unwrap().value > 0.0);
}

#[test]
fn no_threshold_when_destruction_persists() {
    let g = grid(1.0, 2001);
    let r = find_extinction_threshold(&g, 1.0).unwrap();
    assert!(!r.exists && r.c0.is_none() && r.bracket.is_none());
    assert!((r.mu_infinity + 0.8458).abs() < 1e-4);
}

#[test]
fn threshold_grows_as_hole_shrinks() {
    let wide = grid(10.0, 2001);
    let narrow = hablab::build_grid(
        &Landscape::interval((-10.0, 10.0), &[(-5.5, 5.5)], 10.0, 1.0).unwrap(),
        2001,
    )
    .unwrap();
    let a = find_extinction_threshold(&wide, 10.0).unwrap().c0.unwrap();
    let b = find_extinction_threshold(&narrow, 10.0)
        .unwrap()
        .c0
        .unwrap();
    assert!(b > a);
}

#[test]
fn sweep_converges_to_destruction_limit() {
    let g = grid(1.0, 2001);
    let cs = [0.5, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6];
    let rep = sweep_c(&g, 1.0, &cs).unwrap();
    assert!((rep.limit.mu + 0.8458).abs() < 1e-4);
    assert_eq!(rep.limit.classification, Classification::Persistent);
    assert!(rep.rows[0].lambda.is_none());
    assert!(rep.rows[1..].iter().all(|r| r.lambda.is_some()));
    for w in rep.rows.windows(2) {
        assert!(w[1].mu > w[0].mu);
        assert!(w[1].steady_gap < w[0].steady_gap);
        assert!(w[1].eigenfunction_gap < w[0].eigenfunction_gap);
        assert!(w[1].mean_density < w[0].mean_density);
    }
    assert!(rep.rows.last().unwrap().steady_gap < 0.05);
    assert_eq!(rep.mu_gap_orders.len(), cs.len() - 1);
}

#[test]
fn decay_rate_tracks_eigenvalue() {
    let g = grid(10.0, 2001);
    let c0 = find_extinction_threshold(&g, 10.0).unwrap().c0.unwrap();
    let far = probe_decay_rate(&g, 10.0, 2.0 * c0, 0.01, 200.0, (5.0, 200.0)).unwrap();
    assert!(((far.rate - far.mu) / far.mu).abs() < 0.1);

    let near = probe_decay_rate(&g, 10.0, 1.05 * c0, 0.01, 1500.0, (750.0, 1500.0)).unwrap();
    assert!(((near.rate - near.mu) / near.mu).abs() < 0.25, "{near:?}");
    assert!(near.rate < 0.1 * far.mu);
}

#[test]
fn decay_rate_uniform_above_threshold() {
    let g = grid(10.0, 1001);
    let c0 = find_extinction_threshold(&g, 10.0).unwrap().c0.unwrap();
    let rates: Vec<f64> = [2.0, 10.0, 100.0]
        .iter()
        .map(|k| {
            probe_decay_rate(&g, 10.0, k * c0, 0.01, 100.0, (5.0, 100.0))
                .unwrap()
                .rate
        })
        .collect();
    assert!(
        rates[1] >= rates[0] - 1e-3 && rates[2] >= rates[0] - 1e-3,
        "{rates:?}"
    );
}

#[test]
fn fit_rejects_growth() {
    let g = grid(10.0, 401);
    let p = EvolutionProblem::new(
        &g,
        10.0,
        Regime::Degradation(1.0),
        default_initial_condition(&g),
        0.01,
        20.0,
    )
    .unwrap();
    let ts = evolve(&p).unwrap();
    assert!(fit_decay_rate(&ts, (5.0, 20.0)).is_err());
}

#[test]
fn contour_ratios_monotone() {
    let base = Landscape::interval((-10.0, 10.0), &[], 1.0, 1.0).unwrap();
    let deltas = [0.5, 2.5, 4.5, 6.5, 8.5];
    let cs = log_grid(-1, 3, 1);
    let t = contour_table(
        &base,
        10.0,
        &deltas,
        &cs,
        401,
        &SteadyStateOptions::default(),
    )
    .unwrap();
    assert!((t.baseline_mean - 1.0).abs() < 1e-9);
    assert_eq!(t.cells.len(), deltas.len() * cs.len());
    assert!(t
        .cells
        .iter()
        .all(|c| (0.0..=1.0 + 1e-9).contains(&c.ratio)));
    let at = |i: usize, j: usize| t.cells[i * cs.len() + j].ratio;
    for i in 0..deltas.len() {
        for j in 1..cs.len() {
            assert!(at(i, j) <= at(i, j - 1) + 1e-9);
        }
    }
    for j in 0..cs.len() {
        for i in 1..deltas.len() {
            assert!(at(i, j) <= at(i - 1, j) + 1e-9);
        }
    }
    assert!((t.cells[0].delta_fraction - 0.05).abs() < 1e-12);
}
