//! Extinction thresholds, convergence sweeps in `c`, decay-rate fitting and
//! remaining-population tables over (degraded fraction, c).

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{build_grid, DiscreteDomain};
use crate::dynamics::{
    default_initial_condition, evolve, steady_state_with, Classification, EvolutionProblem, Regime,
    SteadyStateOptions, TimeSeries,
};
use crate::error::{Error, Result};
use crate::landscape::{AxisBox, Interval, Landscape};
use crate::spectral::{lambda_degradation, lambda_destruction, mu_degradation, mu_destruction};

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    /// Stop once the bracket is narrower than this fraction of its midpoint.
    pub rel_width: f64,
    /// Stop once `|μ₁(c_mid)|` is below this.
    pub mu_tol: f64,
    /// Give up expanding the upper bracket beyond this rate.
    pub c_max: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            rel_width: 1e-4,
            mu_tol: 1e-8,
            c_max: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub c_lo: f64,
    pub mu_lo: f64,
    pub c_hi: f64,
    pub mu_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub exists: bool,
    pub c0: Option<f64>,
    pub bracket: Option<Bracket>,
    pub mu_infinity: f64,
    pub c_star_lower_bound: f64,
    pub iterations: usize,
    /// Decay rate fitted from a time series at a probe rate above `c0`.
    pub decay_rate: Option<DecayProbe>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayProbe {
    pub c: f64,
    pub rate: f64,
    pub mu: f64,
}

pub fn find_extinction_threshold(g: &DiscreteDomain, d: f64) -> Result<ThresholdReport> {
    find_extinction_threshold_with(g, d, &ThresholdOptions::default())
}

/// Locate the sign change of `c ↦ μ₁,c`, which exists iff `μ₁,∞ > 0`.
pub fn find_extinction_threshold_with(
    g: &DiscreteDomain,
    d: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdReport> {
    if !g.has_degraded_region() {
        return Err(Error::Precondition(
            "extinction threshold needs a nonempty degraded region".into(),
        ));
    }
    let mu_infinity = mu_destruction(g, d)?.value;
    let c_star = g.c_star()?;
    let mut report = ThresholdReport {
        exists: false,
        c0: None,
        bracket: None,
        mu_infinity,
        c_star_lower_bound: c_star,
        iterations: 0,
        decay_rate: None,
    };
    if mu_infinity <= 0.0 {
        return Ok(report);
    }

    let mu = |c: f64| mu_degradation(g, d, c).map(|r| r.value);
    let mut lo = (c_star, mu(c_star)?);
    if lo.1 >= 0.0 {
        return Err(Error::NotBracketed(format!(
            "principal eigenvalue is already nonnegative at c_star = {c_star}"
        )));
    }
    let mut c = (2.0 * c_star).max(1.0);
    let mut hi = loop {
        let m = mu(c)?;
        report.iterations += 1;
        if m > 0.0 {
            break (c, m);
        }
        lo = (c, m);
        c *= 2.0;
        if c > opts.c_max {
            return Err(Error::NotBracketed(format!(
                "principal eigenvalue still negative at c = {}; mu_infinity = {mu_infinity:.3e} is numerically zero",
                opts.c_max
            )));
        }
    };

    let c0 = loop {
        let mid = 0.5 * (lo.0 + hi.0);
        let m = mu(mid)?;
        report.iterations += 1;
        if m.abs() < opts.mu_tol {
            break mid;
        }
        if m < 0.0 {
            lo = (mid, m);
        } else {
            hi = (mid, m);
        }
        if hi.0 - lo.0 < opts.rel_width * 0.5 * (lo.0 + hi.0) {
            break 0.5 * (lo.0 + hi.0);
        }
    };
    if c0 <= c_star {
        return Err(Error::ClassificationMismatch(format!(
            "threshold {c0} does not exceed its lower bound {c_star}"
        )));
    }
    report.exists = true;
    report.c0 = Some(c0);
    report.bracket = Some(Bracket {
        c_lo: lo.0,
        mu_lo: lo.1,
        c_hi: hi.0,
        mu_hi: hi.1,
    });
    Ok(report)
}

/// Evolve from the default initial data at rate `c` and fit the decay rate.
pub fn probe_decay_rate(
    g: &DiscreteDomain,
    d: f64,
    c: f64,
    dt: f64,
    t_final: f64,
    window: (f64, f64),
) -> Result<DecayProbe> {
    let problem = EvolutionProblem::new(
        g,
        d,
        Regime::Degradation(c),
        default_initial_condition(g),
        dt,
        t_final,
    )?;
    let ts = evolve(&problem)?;
    let rate = fit_decay_rate(&ts, window)?;
    let mu = mu_degradation(g, d, c)?.value;
    Ok(DecayProbe { c, rate, mu })
}

/// Least-squares slope of `−log ‖u(·,t)‖_∞` over the samples in `window`.
pub fn fit_decay_rate(ts: &TimeSeries, window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ts
        .times
        .iter()
        .zip(&ts.sup_norm)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, s)| (*t, *s))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "decay window [{}, {}] holds {} samples, need at least 10",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if pts.iter().any(|(_, s)| !(*s > 0.0)) {
        return Err(Error::Precondition(
            "sup-norm must be positive on the decay window".into(),
        ));
    }
    let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
    if last >= first {
        return Err(Error::Precondition(
            "sup-norm is not decreasing on the decay window".into(),
        ));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, s)| (a + t, b + s.ln()));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, s)| {
        (a + (t - mt) * (s.ln() - my), b + (t - mt) * (t - mt))
    });
    let slope = num / den;
    if slope >= 0.0 {
        return Err(Error::Precondition("fitted slope is not negative".into()));
    }
    Ok(-slope)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub mu: f64,
    pub lambda: Option<f64>,
    /// `‖u_c* − u_∞*‖_∞`
    pub steady_gap: f64,
    /// `‖φ₁,c − φ₁,∞‖_{H¹}`
    pub eigenfunction_gap: f64,
    pub mean_density: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub mu: f64,
    pub lambda: Option<f64>,
    pub mean_density: f64,
    pub sup_density: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub limit: LimitRow,
    /// Empirical order of `|μ₁,c − μ₁,∞|` against `c` between consecutive rows.
    pub mu_gap_orders: Vec<f64>,
}

pub fn sweep_c(g: &DiscreteDomain, d: f64, c_list: &[f64]) -> Result<SweepReport> {
    sweep_c_with(g, d, c_list, &SteadyStateOptions::default())
}

pub fn sweep_c_with(
    g: &DiscreteDomain,
    d: f64,
    c_list: &[f64],
    opts: &SteadyStateOptions,
) -> Result<SweepReport> {
    if c_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "c list must be strictly increasing".into(),
        ));
    }
    let phi_inf = mu_destruction(g, d)?;
    let u_inf = steady_state_with(g, d, Regime::Destruction, opts)?;
    let lambda_inf = if g.has_degraded_region() {
        Some(lambda_destruction(g)?.value)
    } else {
        None
    };
    let c_star = g.c_star().ok();

    let rows = c_list
        .par_iter()
        .map(|&c| -> Result<SweepRow> {
            let eig = mu_degradation(g, d, c)?;
            let lambda = match c_star {
                Some(cs) if c > cs => match lambda_degradation(g, c) {
                    Ok(r) => Some(r.value),
                    Err(Error::Precondition(_)) => None,
                    Err(e) => return Err(e),
                },
                _ => None,
            };
            let ss = steady_state_with(g, d, Regime::Degradation(c), opts)?;
            Ok(SweepRow {
                c,
                mu: eig.value,
                lambda,
                steady_gap: ss.field.sub(&u_inf.field).sup_norm(),
                eigenfunction_gap: eig.eigenfunction.sub(&phi_inf.eigenfunction).h1_norm(g),
                mean_density: ss.field.mean(g),
                classification: ss.classification,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mu_gap_orders = rows
        .windows(2)
        .map(|w| {
            let g0 = (phi_inf.value - w[0].mu).abs();
            let g1 = (phi_inf.value - w[1].mu).abs();
            -(g1 / g0).ln() / (w[1].c / w[0].c).ln()
        })
        .collect();
    Ok(SweepReport {
        rows,
        limit: LimitRow {
            mu: phi_inf.value,
            lambda: lambda_inf,
            mean_density: u_inf.field.mean(g),
            sup_density: u_inf.field.sup_norm(),
            classification: u_inf.classification,
        },
        mu_gap_orders,
    })
}

/// Decades `10^lo ..= 10^hi` with `per_decade` points per decade.
pub fn log_grid(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let n = (hi - lo) as usize * per_decade;
    (0..=n)
        .map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade as f64))
        .collect()
}

/// Default c axis for remaining-population tables.
pub fn default_contour_c_grid() -> Vec<f64> {
    log_grid(-1, 4, 4)
}

/// Default half-widths δ = 0.5, 1.0, …, 9.5 of a centred degraded region on (−10, 10).
pub fn default_contour_deltas() -> Vec<f64> {
    (1..=19).map(|k| 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourCell {
    pub delta: f64,
    pub delta_fraction: f64,
    pub c: f64,
    pub ratio: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourTable {
    pub d: f64,
    pub baseline_mean: f64,
    pub cells: Vec<ContourCell>,
}

impl ContourTable {
    pub fn count(&self, pred: impl Fn(&ContourCell) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(c)).count()
    }
}

/// Steady-state mean density relative to the undisturbed baseline over a grid
/// of centred degraded regions `B = (x_mid − δ, x_mid + δ)` and rates `c`.
pub fn contour_table(
    base: &Landscape,
    d: f64,
    delta_list: &[f64],
    c_list: &[f64],
    nodes: usize,
    opts: &SteadyStateOptions,
) -> Result<ContourTable> {
    if base.dim() != 1 {
        return Err(Error::InvalidParameter(
            "contour tables are defined for 1D landscapes".into(),
        ));
    }
    let omega = base.omega().axes[0];
    let mid = 0.5 * (omega.lo + omega.hi);
    let undisturbed = base.with_b_region(Vec::new())?.with_diffusion(d)?;
    let g0 = build_grid(&undisturbed, nodes)?;
    let baseline_mean = steady_state_with(&g0, d, Regime::Degradation(0.0), opts)?
        .field
        .mean(&g0);

    let grids = delta_list
        .iter()
        .map(|&delta| {
            let b = if delta > 0.0 {
                vec![AxisBox::new(vec![Interval::new(mid - delta, mid + delta)])]
            } else {
                Vec::new()
            };
            let l = base.with_b_region(b)?.with_diffusion(d)?;
            build_grid(&l, nodes)
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, f64)> = (0..delta_list.len())
        .flat_map(|i| c_list.iter().map(move |&c| (i, c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, c)| -> Result<ContourCell> {
            let g = &grids[i];
            let ss = steady_state_with(g, d, Regime::Degradation(c), opts)?;
            Ok(ContourCell {
                delta: delta_list[i],
                delta_fraction: 2.0 * delta_list[i] / omega.len(),
                c,
                ratio: ss.field.mean(g) / baseline_mean,
                classification: ss.classification,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourTable {
        d,
        baseline_mean,
        cells,
    })
}
