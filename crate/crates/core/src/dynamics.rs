//! Time integration of the degradation and destruction Cauchy problems,
//! steady states, and side-by-side regime comparison.
//!
//! One step of the first-order IMEX scheme solves
//!
//! ```text
//! (I − Δt (dΔ_h − c 𝟙_B)) u_{n+1} = u_n + Δt 𝟙_{Ω∖B} f(·, u_n)
//! ```
//!
//! in weighted (symmetric) form. Diffusion and the sink are implicit, so the
//! admissible Δt is set by the reaction alone, also at c = 10⁶. The system
//! matrix is an M-matrix, which makes the scheme order preserving.

use serde::Serialize;

use crate::discretization::{
    assemble_destruction_laplacian, assemble_neumann_laplacian, DiscreteDomain, NodeClass,
    SparseOperator,
};
use crate::error::{Error, Result};
use crate::field::{Field, Support};
use crate::landscape::Rate;
use crate::linalg::BandedLdl;
use crate::spectral::{mu_degradation, mu_destruction};

/// Ordering tolerance for comparison-principle checks.
pub const ORDER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", content = "c", rename_all = "kebab-case")]
pub enum Regime {
    Degradation(f64),
    Destruction,
}

impl From<Rate> for Regime {
    fn from(r: Rate) -> Self {
        match r {
            Rate::Finite(c) => Regime::Degradation(c),
            Rate::Infinite => Regime::Destruction,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Degradation(c) => write!(f, "degradation(c={c})"),
            Regime::Destruction => f.write_str("destruction"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionProblem<'a> {
    pub grid: &'a DiscreteDomain,
    pub d: f64,
    pub regime: Regime,
    pub initial: Field,
    pub dt: f64,
    pub t_final: f64,
    /// Norms are sampled every this many steps (and at t = 0).
    pub sample_every: usize,
    /// Full snapshots are stored at the first sample at or after each time.
    pub snapshot_times: Vec<f64>,
}

impl<'a> EvolutionProblem<'a> {
    pub fn new(
        grid: &'a DiscreteDomain,
        d: f64,
        regime: Regime,
        initial: Field,
        dt: f64,
        t_final: f64,
    ) -> Result<Self> {
        let p = EvolutionProblem {
            grid,
            d,
            regime,
            initial,
            dt,
            t_final,
            sample_every: 1,
            snapshot_times: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion must be positive, got {}",
                self.d
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter(
                "sample_every must be at least 1".into(),
            ));
        }
        if let Regime::Degradation(c) = self.regime {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "degradation rate must be nonnegative, got {c}"
                )));
            }
        }
        if self.initial.len() != self.grid.len() {
            return Err(Error::InvalidParameter(format!(
                "initial field has {} values for a grid of {} nodes",
                self.initial.len(),
                self.grid.len()
            )));
        }
        if !self.initial.is_finite() || self.initial.min() < 0.0 {
            return Err(Error::Precondition(
                "initial data must be finite and nonnegative".into(),
            ));
        }
        if self.regime == Regime::Destruction {
            let touches_b = self
                .initial
                .values()
                .iter()
                .zip(self.grid.classes())
                .any(|(v, c)| *c != NodeClass::Habitat && *v != 0.0);
            if touches_b {
                return Err(Error::Precondition(
                    "destruction initial data must vanish on the closure of B".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Default initial data: 0.5 where the distance to B̄ exceeds 1, else 0.
pub fn default_initial_condition(g: &DiscreteDomain) -> Field {
    let boxes = g.landscape().b_region();
    Field::from_fn(g, |x| {
        let far = boxes.iter().all(|b| {
            let dist2: f64 = b
                .axes
                .iter()
                .zip(x)
                .map(|(iv, &xi)| {
                    let e = (iv.lo - xi).max(xi - iv.hi).max(0.0);
                    e * e
                })
                .sum();
            dist2 > 1.0
        });
        if far {
            0.5
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: Field,
    /// Total magnitude of negative values set to zero.
    pub clipped: f64,
}

/// Factored IMEX system for one `(grid, d, regime, Δt)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    dofs: Vec<usize>,
    weights: Vec<f64>,
    reaction_fraction: Vec<f64>,
    growth: Vec<f64>,
    factor: BandedLdl,
    dt: f64,
    grid_len: usize,
    support: Support,
}

impl Stepper {
    pub fn new(g: &DiscreteDomain, d: f64, regime: Regime, dt: f64) -> Result<Self> {
        let (op, sink, reaction_fraction, support) = regime_operator(g, d, regime);
        let diag: Vec<f64> = op
            .weights()
            .iter()
            .zip(&sink)
            .map(|(w, s)| w * (1.0 + dt * s))
            .collect();
        let system = op.stiffness().scaled_by(-dt).add_diagonal(&diag);
        let factor = BandedLdl::factor(&system)?;
        Ok(Stepper {
            growth: op.restrict(g.growth()),
            weights: op.weights().to_vec(),
            dofs: op.dofs().to_vec(),
            reaction_fraction,
            factor,
            dt,
            grid_len: g.len(),
            support,
        })
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&i| full[i]).collect()
    }

    pub fn extend(&self, dof_values: &[f64]) -> Field {
        let mut v = vec![0.0; self.grid_len];
        for (&i, &x) in self.dofs.iter().zip(dof_values) {
            v[i] = x;
        }
        Field::new(v, self.support)
    }

    /// Advance degree-of-freedom values in place; returns the clipped mass.
    pub fn advance(&self, u: &mut [f64]) -> f64 {
        for (((ui, w), r), m) in u
            .iter_mut()
            .zip(&self.weights)
            .zip(&self.reaction_fraction)
            .zip(&self.growth)
        {
            *ui = w * (*ui + self.dt * r * *ui * (m - *ui));
        }
        self.factor.solve_in_place(u);
        let mut clipped = 0.0;
        for ui in u.iter_mut() {
            if *ui < 0.0 {
                clipped -= *ui;
                *ui = 0.0;
            }
        }
        clipped
    }

    pub fn step(&self, u: &Field) -> Result<StepOutcome> {
        if u.min() < 0.0 {
            return Err(Error::Precondition(
                "step requires a nonnegative field".into(),
            ));
        }
        let mut x = self.restrict(u.values());
        let clipped = self.advance(&mut x);
        Ok(StepOutcome {
            field: self.extend(&x),
            clipped,
        })
    }
}

/// Operator, per-dof sink rate, per-dof reaction fraction and support for a regime.
fn regime_operator(
    g: &DiscreteDomain,
    d: f64,
    regime: Regime,
) -> (SparseOperator, Vec<f64>, Vec<f64>, Support) {
    match regime {
        Regime::Degradation(c) => {
            let op = assemble_neumann_laplacian(g, d);
            let sink = g.degraded_fraction().iter().map(|bf| bf * c).collect();
            let frac = g.degraded_fraction().iter().map(|bf| 1.0 - bf).collect();
            (op, sink, frac, Support::Full)
        }
        Regime::Destruction => {
            let op = assemble_destruction_laplacian(g, d);
            let n = op.len();
            (op, vec![0.0; n], vec![1.0; n], Support::Habitat)
        }
    }
}

/// Single IMEX step from `u_n`.
pub fn step(problem: &EvolutionProblem<'_>, u_n: &Field) -> Result<StepOutcome> {
    Stepper::new(problem.grid, problem.d, problem.regime, problem.dt)?.step(u_n)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub l2_norm: Vec<f64>,
    pub mean: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Vec<(f64, Field)>,
    /// Total mass removed by clipping negative values; zero for a stable Δt.
    pub clipped_total: f64,
    #[serde(skip)]
    pub final_state: Option<Field>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

struct Norms<'a> {
    weights: &'a [f64],
    omega: f64,
}

impl Norms<'_> {
    fn sample(&self, u: &[f64]) -> (f64, f64, f64) {
        let mut sup = 0.0f64;
        let mut l2 = 0.0;
        let mut int = 0.0;
        for (v, w) in u.iter().zip(self.weights) {
            sup = sup.max(v.abs());
            l2 += w * v * v;
            int += w * v;
        }
        (sup, l2.sqrt(), int / self.omega)
    }
}

pub fn evolve(problem: &EvolutionProblem<'_>) -> Result<TimeSeries> {
    problem.validate()?;
    let g = problem.grid;
    let stepper = Stepper::new(g, problem.d, problem.regime, problem.dt)?;
    let weights = stepper.restrict(g.weights());
    let norms = Norms {
        weights: &weights,
        omega: g.omega_measure(),
    };
    let limit = 10.0 * problem.initial.sup_norm().max(g.max_growth());
    let mut u = stepper.restrict(problem.initial.values());
    let mut ts = TimeSeries::default();
    let mut snaps = problem.snapshot_times.iter().copied().peekable();
    let steps = problem.steps();

    let mut record = |n: usize, u: &[f64], ts: &mut TimeSeries| {
        let t = n as f64 * problem.dt;
        let (sup, l2, mean) = norms.sample(u);
        ts.times.push(t);
        ts.sup_norm.push(sup);
        ts.l2_norm.push(l2);
        ts.mean.push(mean);
        while let Some(&ts_req) = snaps.peek() {
            if ts_req <= t + 1e-9 * problem.dt {
                ts.snapshots.push((t, stepper.extend(u)));
                snaps.next();
            } else {
                break;
            }
        }
    };
    record(0, &u, &mut ts);
    for n in 1..=steps {
        ts.clipped_total += stepper.advance(&mut u);
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !sup.is_finite() || sup > limit || u.iter().any(|v| v.is_nan()) {
            return Err(Error::Unstable {
                time: n as f64 * problem.dt,
                sup_norm: sup,
                limit,
            });
        }
        if n % problem.sample_every == 0 || n == steps {
            record(n, &u, &mut ts);
        }
    }
    ts.final_state = Some(stepper.extend(&u));
    Ok(ts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Persistent,
    Extinct,
}

#[derive(Debug, Clone, Copy)]
pub struct SteadyStateOptions {
    pub dt: f64,
    /// Marching stops once `‖u_{n+1} − u_n‖_∞ / Δt` drops below this.
    pub march_tol: f64,
    pub max_march_time: f64,
    pub newton_tol: f64,
    pub max_newton_iterations: usize,
    pub extinction_tol: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            dt: 0.01,
            march_tol: 1e-8,
            max_march_time: 100.0,
            newton_tol: 1e-10,
            max_newton_iterations: 50,
            extinction_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub field: Field,
    pub classification: Classification,
    /// Discrete L² norm of the elliptic residual at `field`.
    pub residual: f64,
    pub march_steps: usize,
    pub newton_iterations: usize,
    /// Newton failed and `field` is the time-marched iterate.
    pub newton_fallback: bool,
    /// Principal eigenvalue used to cross-check the classification.
    pub mu1: f64,
}

/// Nonlinear stationary operator on the regime's degrees of freedom.
struct Stationary {
    op: SparseOperator,
    sink: Vec<f64>,
    reaction_fraction: Vec<f64>,
    growth: Vec<f64>,
}

impl Stationary {
    fn new(g: &DiscreteDomain, d: f64, regime: Regime) -> Self {
        let (op, sink, reaction_fraction, _) = regime_operator(g, d, regime);
        let growth = op.restrict(g.growth());
        Stationary {
            op,
            sink,
            reaction_fraction,
            growth,
        }
    }

    /// Weighted residual `A u + W (𝟙_{Ω∖B} f(u) − c 𝟙_B u)`.
    fn weighted_residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.op.stiffness().mul_vec(u);
        for (i, ri) in r.iter_mut().enumerate() {
            let w = self.op.weights()[i];
            *ri += w
                * (self.reaction_fraction[i] * u[i] * (self.growth[i] - u[i])
                    - self.sink[i] * u[i]);
        }
        r
    }

    fn residual_norm(&self, weighted: &[f64]) -> f64 {
        weighted
            .iter()
            .zip(self.op.weights())
            .map(|(r, w)| r * r / w)
            .sum::<f64>()
            .sqrt()
    }

    fn newton(&self, u0: &[f64], tol: f64, max_it: usize) -> Option<(Vec<f64>, f64, usize)> {
        let mut u = u0.to_vec();
        let mut fw = self.weighted_residual(&u);
        let mut res = self.residual_norm(&fw);
        for it in 0..=max_it {
            if res <= tol {
                return Some((u, res, it));
            }
            if it == max_it {
                break;
            }
            let diag: Vec<f64> = (0..u.len())
                .map(|i| {
                    self.op.weights()[i]
                        * (self.reaction_fraction[i] * (self.growth[i] - 2.0 * u[i]) - self.sink[i])
                })
                .collect();
            let jac = self.op.stiffness().add_diagonal(&diag);
            let factor = BandedLdl::factor(&jac).ok()?;
            let mut delta: Vec<f64> = fw.iter().map(|r| -r).collect();
            factor.solve_in_place(&mut delta);
            u.iter_mut().zip(&delta).for_each(|(ui, di)| *ui += di);
            fw = self.weighted_residual(&u);
            let next = self.residual_norm(&fw);
            if !next.is_finite() {
                return None;
            }
            // stagnation at the rounding floor
            if next >= res && res < 1e3 * tol {
                return Some((u, next.min(res), it + 1));
            }
            res = next;
        }
        None
    }
}

pub fn steady_state(g: &DiscreteDomain, d: f64, regime: Regime) -> Result<SteadyState> {
    steady_state_with(g, d, regime, &SteadyStateOptions::default())
}

/// Time-march from `max(m)/2`, refine with Newton, classify and cross-check
/// against the sign of the principal eigenvalue.
pub fn steady_state_with(
    g: &DiscreteDomain,
    d: f64,
    regime: Regime,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    let mu1 = match regime {
        Regime::Degradation(c) => mu_degradation(g, d, c)?.value,
        Regime::Destruction => mu_destruction(g, d)?.value,
    };
    let stepper = Stepper::new(g, d, regime, opts.dt)?;
    let level = 0.5 * g.max_growth().max(0.0);
    let mut u = vec![level; stepper.dofs().len()];
    let max_steps = (opts.max_march_time / opts.dt).round() as usize;
    let mut prev = u.clone();
    let mut march_steps = 0;
    for _ in 0..max_steps {
        prev.copy_from_slice(&u);
        stepper.advance(&mut u);
        march_steps += 1;
        let change = u
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change / opts.dt < opts.march_tol {
            break;
        }
    }

    let stat = Stationary::new(g, d, regime);
    let (dofs_u, residual, newton_iterations, newton_fallback) =
        match stat.newton(&u, opts.newton_tol, opts.max_newton_iterations) {
            Some((v, res, it)) if v.iter().all(|x| *x >= -opts.extinction_tol) => {
                (v.into_iter().map(|x| x.max(0.0)).collect(), res, it, false)
            }
            _ => {
                let res = stat.residual_norm(&stat.weighted_residual(&u));
                (u, res, 0, true)
            }
        };
    let field = stepper.extend(&dofs_u);
    let sup = field.sup_norm();
    let classification = if sup > opts.extinction_tol {
        Classification::Persistent
    } else {
        Classification::Extinct
    };
    let predicted = if mu1 < 0.0 {
        Classification::Persistent
    } else {
        Classification::Extinct
    };
    if classification != predicted {
        return Err(Error::ClassificationMismatch(format!(
            "{regime}: steady state sup-norm {sup:.3e} but principal eigenvalue {mu1:.3e}"
        )));
    }
    Ok(SteadyState {
        field,
        classification,
        residual,
        march_steps,
        newton_iterations,
        newton_fallback,
        mu1,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub c: f64,
    /// `sup_t ‖u_c(·,t) − u_∞(·,t)‖_∞` over the sampled times.
    pub sup_gap: f64,
    /// Node-sample pairs with `u_∞ > u_c + ORDER_TOL`.
    pub destruction_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairViolations {
    pub c_low: f64,
    pub c_high: f64,
    /// Node-sample pairs with `u_{c_high} > u_{c_low} + ORDER_TOL`.
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeComparison {
    pub rows: Vec<ComparisonRow>,
    pub pairs: Vec<PairViolations>,
    pub samples: usize,
}

/// Run degradation for every `c` and destruction side by side from common
/// initial data, tracking the uniform gap and ordering violations.
pub fn compare_regimes(
    g: &DiscreteDomain,
    d: f64,
    c_list: &[f64],
    u0: &Field,
    dt: f64,
    t_final: f64,
    sample_every: usize,
) -> Result<RegimeComparison> {
    if u0.len() != g.len() {
        return Err(Error::InvalidParameter(
            "initial data does not match the grid".into(),
        ));
    }
    if c_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "c list must be strictly increasing".into(),
        ));
    }
    let check = EvolutionProblem {
        sample_every,
        ..EvolutionProblem::new(g, d, Regime::Destruction, u0.clone(), dt, t_final)?
    };
    check.validate()?;
    let steps = check.steps();

    let destr = Stepper::new(g, d, Regime::Destruction, dt)?;
    let degr: Vec<Stepper> = c_list
        .iter()
        .map(|&c| Stepper::new(g, d, Regime::Degradation(c), dt))
        .collect::<Result<_>>()?;
    let mut u_inf = destr.restrict(u0.values());
    let mut u_c: Vec<Vec<f64>> = degr.iter().map(|s| s.restrict(u0.values())).collect();
    let mut rows: Vec<ComparisonRow> = c_list
        .iter()
        .map(|&c| ComparisonRow {
            c,
            sup_gap: 0.0,
            destruction_violations: 0,
        })
        .collect();
    let mut pairs: Vec<PairViolations> = c_list
        .windows(2)
        .map(|w| PairViolations {
            c_low: w[0],
            c_high: w[1],
            count: 0,
        })
        .collect();
    let mut samples = 0;
    let mut full_inf = vec![0.0; g.len()];

    let mut compare = |u_inf: &[f64],
                       u_c: &[Vec<f64>],
                       rows: &mut [ComparisonRow],
                       pairs: &mut [PairViolations]| {
        full_inf.iter_mut().for_each(|v| *v = 0.0);
        for (&i, &v) in destr.dofs().iter().zip(u_inf) {
            full_inf[i] = v;
        }
        for (row, uc) in rows.iter_mut().zip(u_c) {
            for (a, b) in uc.iter().zip(&full_inf) {
                row.sup_gap = row.sup_gap.max((a - b).abs());
                if *b > a + ORDER_TOL {
                    row.destruction_violations += 1;
                }
            }
        }
        for (k, pair) in pairs.iter_mut().enumerate() {
            pair.count += u_c[k]
                .iter()
                .zip(&u_c[k + 1])
                .filter(|(lo, hi)| **hi > **lo + ORDER_TOL)
                .count();
        }
    };

    compare(&u_inf, &u_c, &mut rows, &mut pairs);
    samples += 1;
    for n in 1..=steps {
        destr.advance(&mut u_inf);
        for (s, u) in degr.iter().zip(u_c.iter_mut()) {
            s.advance(u);
        }
        if n % sample_every == 0 || n == steps {
            compare(&u_inf, &u_c, &mut rows, &mut pairs);
            samples += 1;
        }
    }
    Ok(RegimeComparison {
        rows,
        pairs,
        samples,
    })
}
