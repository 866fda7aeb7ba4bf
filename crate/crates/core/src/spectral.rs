//! Principal eigenpairs of the linearized problems.
//!
//! * `mu_degradation`:   `dΔφ + m_c φ + μφ = 0` on Ω, zero flux on ∂Ω.
//! * `mu_destruction`:   `dΔφ + m φ + μφ = 0` on Ω∖B̄, `φ = 0` on ∂B.
//! * `lambda_degradation`: `Δψ + λ m_c ψ = 0` on Ω.
//! * `lambda_destruction`: `Δψ + λ m ψ = 0` on Ω∖B̄, `ψ = 0` on ∂B.
//!
//! The μ problems are solved by shift-invert power iteration on the symmetric
//! scaled operator. The λ problems are reduced to the positive root of the
//! concave map `λ ↦ μ₁(−Δ − λ m)`.

use serde::Serialize;

use crate::discretization::{
    assemble_destruction_laplacian, assemble_neumann_laplacian, DiscreteDomain, SparseOperator,
};
use crate::error::{Error, Result};
use crate::field::{Field, Support};
use crate::landscape::Rate;
use crate::linalg::{dot, norm2, BandedLdl, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EigenKind {
    MuDegradation { c: f64 },
    MuDestruction,
    LambdaDegradation { c: f64 },
    LambdaDestruction,
}

impl EigenKind {
    pub fn label(&self) -> &'static str {
        match self {
            EigenKind::MuDegradation { .. } => "mu-degradation",
            EigenKind::MuDestruction => "mu-destruction",
            EigenKind::LambdaDegradation { .. } => "lambda-degradation",
            EigenKind::LambdaDestruction => "lambda-destruction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `‖φ‖_{L²} = 1`
    UnitL2,
    /// `∫ m φ² = 1` with the problem's weight `m`
    UnitWeightedMass,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub kind: EigenKind,
    pub value: f64,
    pub eigenfunction: Field,
    pub residual: f64,
    pub normalization: Normalization,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Residual target, relative to `|value| + 1`.
    pub residual_tol: f64,
    /// Root-finding stops once `|μ₁(λ)|` falls below this.
    pub secant_tol: f64,
    pub lambda_max: f64,
    pub max_root_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iterations: 500,
            residual_tol: 1e-8,
            secant_tol: 1e-10,
            lambda_max: 1e12,
            max_root_iterations: 200,
        }
    }
}

/// Eigenpair of the scaled symmetric operator `S = W^{-1/2} K W^{-1/2}`.
#[derive(Debug, Clone)]
struct ScaledPair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Generalized problem `K φ = μ W φ` with `K = −A − W diag(potential)`.
struct WeightedProblem<'a> {
    stiffness: &'a CsrMatrix,
    weights: &'a [f64],
    potential: Vec<f64>,
}

impl WeightedProblem<'_> {
    fn scaled_matrix(&self) -> CsrMatrix {
        let s: Vec<f64> = self.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
        let minus_p: Vec<f64> = self.potential.iter().map(|p| -p).collect();
        self.stiffness
            .scale(&s, &s)
            .scaled_by(-1.0)
            .add_diagonal(&minus_p)
    }

    /// Gershgorin lower bound of `W⁻¹K`, which is similar to `S`.
    fn gershgorin_lower(&self) -> f64 {
        (0..self.stiffness.dim())
            .map(|i| {
                let w = self.weights[i];
                let mut centre = -self.potential[i];
                let mut radius = 0.0;
                for (j, a) in self.stiffness.row(i) {
                    if j == i {
                        centre -= a / w;
                    } else {
                        radius += a.abs() / w;
                    }
                }
                centre - radius
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn principal(&self, start: Option<&[f64]>, opts: &EigenOptions) -> Result<ScaledPair> {
        let s = self.scaled_matrix();
        let n = s.dim();
        if n == 0 {
            return Err(Error::Precondition(
                "eigenproblem has no degrees of freedom".into(),
            ));
        }
        let mut y: Vec<f64> = match start {
            Some(v) => v.to_vec(),
            None => vec![1.0; n],
        };
        let nrm = norm2(&y);
        y.iter_mut().for_each(|v| *v /= nrm);

        let mut shift = self.gershgorin_lower() - 1.0;
        let mut factor = BandedLdl::factor(&s.add_diagonal(&vec![-shift; n]))?;
        if !factor.is_positive_definite() {
            return Err(Error::LinearSolve(
                "shifted operator is not positive definite".into(),
            ));
        }
        let mut last_refine = f64::INFINITY;
        let mut sy = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for it in 1..=opts.max_iterations {
            factor.solve_in_place(&mut y);
            let nrm = norm2(&y);
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::LinearSolve(
                    "inverse iteration produced a degenerate vector".into(),
                ));
            }
            y.iter_mut().for_each(|v| *v /= nrm);
            s.mul_vec_into(&y, &mut sy);
            let value = dot(&y, &sy);
            residual = sy
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - value * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = value.abs() + 1.0;
            if residual <= opts.residual_tol * scale {
                return Ok(ScaledPair {
                    value,
                    vector: y,
                    residual,
                    iterations: it,
                });
            }
            // Move the shift towards the Rayleigh quotient. A positive
            // definite factorization certifies the shift stays below μ₁.
            if residual < 0.1 * scale && residual < 0.01 * last_refine {
                last_refine = residual;
                let candidate = value - 2.0 * residual - 1e-12 * scale;
                if candidate > shift {
                    if let Ok(f) = BandedLdl::factor(&s.add_diagonal(&vec![-candidate; n])) {
                        if f.is_positive_definite() {
                            factor = f;
                            shift = candidate;
                        }
                    }
                }
            }
        }
        Err(Error::NonConvergence {
            what: "inverse iteration",
            iterations: opts.max_iterations,
            residual,
        })
    }
}

/// Flip a vector to the positive cone and check sign-definiteness.
fn orient_positive(v: &mut [f64]) -> Result<()> {
    let (min, max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if max <= 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        return if min < 0.0 {
            Ok(())
        } else {
            Err(Error::NotSignDefinite { min, max })
        };
    }
    if min < 0.0 {
        let tol = 1e-12 * max;
        if min < -tol {
            return Err(Error::NotSignDefinite { min, max });
        }
        v.iter_mut().for_each(|x| *x = x.max(0.0));
    }
    Ok(())
}

fn scaled_to_nodal(op: &SparseOperator, y: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(op.weights())
        .map(|(v, w)| v / w.sqrt())
        .collect()
}

fn field_from_dofs(
    g: &DiscreteDomain,
    op: &SparseOperator,
    values: &[f64],
    support: Support,
) -> Field {
    Field::new(op.extend_by_zero(values, g.len()), support)
}

fn require_nonnegative_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "degradation rate must be nonnegative, got {c}"
        )));
    }
    Ok(())
}

fn require_positive_d(d: f64) -> Result<()> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "diffusion must be positive, got {d}"
        )));
    }
    Ok(())
}

fn mu_problem(
    g: &DiscreteDomain,
    op: &SparseOperator,
    potential: Vec<f64>,
    kind: EigenKind,
    support: Support,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let problem = WeightedProblem {
        stiffness: op.stiffness(),
        weights: op.weights(),
        potential,
    };
    let mut pair = problem.principal(None, opts)?;
    orient_positive(&mut pair.vector)?;
    let phi = scaled_to_nodal(op, &pair.vector);
    Ok(EigenResult {
        kind,
        value: pair.value,
        eigenfunction: field_from_dofs(g, op, &phi, support),
        residual: pair.residual,
        normalization: Normalization::UnitL2,
        iterations: pair.iterations,
    })
}

/// Principal eigenpair of `−dΔ − m_c` with zero flux on ∂Ω.
pub fn mu_degradation(g: &DiscreteDomain, d: f64, c: f64) -> Result<EigenResult> {
    mu_degradation_with(g, d, c, &EigenOptions::default())
}

pub fn mu_degradation_with(
    g: &DiscreteDomain,
    d: f64,
    c: f64,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    require_positive_d(d)?;
    require_nonnegative_c(c)?;
    let op = assemble_neumann_laplacian(g, d);
    let potential = g.degradation_weight(c);
    mu_problem(
        g,
        &op,
        potential,
        EigenKind::MuDegradation { c },
        Support::Full,
        opts,
    )
}

/// Principal eigenpair of `−dΔ − m` on Ω∖B̄ with `φ = 0` on ∂B, zero-extended.
pub fn mu_destruction(g: &DiscreteDomain, d: f64) -> Result<EigenResult> {
    mu_destruction_with(g, d, &EigenOptions::default())
}

pub fn mu_destruction_with(g: &DiscreteDomain, d: f64, opts: &EigenOptions) -> Result<EigenResult> {
    require_positive_d(d)?;
    let op = assemble_destruction_laplacian(g, d);
    let potential = op.restrict(g.growth());
    mu_problem(
        g,
        &op,
        potential,
        EigenKind::MuDestruction,
        Support::Habitat,
        opts,
    )
}

/// Dispatch on a finite rate or the destruction limit.
pub fn mu_principal(g: &DiscreteDomain, d: f64, rate: Rate) -> Result<EigenResult> {
    match rate {
        Rate::Finite(c) => mu_degradation(g, d, c),
        Rate::Infinite => mu_destruction(g, d),
    }
}

/// Positive root of `λ ↦ μ₁(−Δ − λ m)` together with the eigenvector there.
fn weighted_root(
    op: &SparseOperator,
    weight: &[f64],
    opts: &EigenOptions,
) -> Result<(f64, ScaledPair)> {
    let inner = EigenOptions {
        residual_tol: opts.residual_tol * 1e-2,
        ..*opts
    };
    let mut warm: Option<Vec<f64>> = None;
    let mut eval = |lambda: f64| -> Result<ScaledPair> {
        let problem = WeightedProblem {
            stiffness: op.stiffness(),
            weights: op.weights(),
            potential: weight.iter().map(|m| lambda * m).collect(),
        };
        let pair = problem.principal(warm.as_deref(), &inner)?;
        warm = Some(pair.vector.iter().map(|v| v.abs()).collect());
        Ok(pair)
    };

    let mut lam = 1.0;
    let mut pair = eval(lam)?;
    if pair.value.abs() < opts.secant_tol {
        return Ok((lam, pair));
    }
    let (mut lo, mut hi);
    if pair.value > 0.0 {
        lo = (lam, pair.value);
        loop {
            lam *= 2.0;
            if lam > opts.lambda_max {
                return Err(Error::NotBracketed(format!(
                    "principal eigenvalue stays positive up to lambda = {}",
                    opts.lambda_max
                )));
            }
            pair = eval(lam)?;
            if pair.value < 0.0 {
                hi = (lam, pair.value);
                break;
            }
            lo = (lam, pair.value);
        }
    } else {
        hi = (lam, pair.value);
        loop {
            lam *= 0.5;
            if lam < 1.0 / opts.lambda_max {
                return Err(Error::NotBracketed(format!(
                    "principal eigenvalue stays negative down to lambda = {}",
                    1.0 / opts.lambda_max
                )));
            }
            pair = eval(lam)?;
            if pair.value > 0.0 {
                lo = (lam, pair.value);
                break;
            }
            hi = (lam, pair.value);
        }
    }

    // Illinois variant of regula falsi, with a bisection fallback.
    let mut side = 0i8;
    for _ in 0..opts.max_root_iterations {
        let mut next = hi.0 - hi.1 * (hi.0 - lo.0) / (hi.1 - lo.1);
        if !(next > lo.0 && next < hi.0) {
            next = 0.5 * (lo.0 + hi.0);
        }
        pair = eval(next)?;
        let v = pair.value;
        if v.abs() < opts.secant_tol || (hi.0 - lo.0) < 1e-15 * hi.0 {
            return Ok((next, pair));
        }
        if v > 0.0 {
            lo = (next, v);
            if side == 1 {
                hi.1 *= 0.5;
            }
            side = 1;
        } else {
            hi = (next, v);
            if side == -1 {
                lo.1 *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::NonConvergence {
        what: "principal-eigenvalue root search",
        iterations: opts.max_root_iterations,
        residual: pair.value.abs(),
    })
}

fn lambda_result(
    g: &DiscreteDomain,
    op: &SparseOperator,
    weight: &[f64],
    kind: EigenKind,
    support: Support,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let (lambda, mut pair) = weighted_root(op, weight, opts)?;
    orient_positive(&mut pair.vector)?;
    let mut psi = scaled_to_nodal(op, &pair.vector);
    let mass: f64 = pair.vector.iter().zip(weight).map(|(y, m)| m * y * y).sum();
    if mass <= 0.0 {
        return Err(Error::NotSignDefinite {
            min: mass,
            max: mass,
        });
    }
    let scale = 1.0 / mass.sqrt();
    psi.iter_mut().for_each(|v| *v *= scale);
    // residual of Δψ + λ m ψ = 0 in discrete L²
    let a_psi = op.stiffness().mul_vec(&psi);
    let residual = a_psi
        .iter()
        .zip(op.weights())
        .zip(psi.iter().zip(weight))
        .map(|((a, w), (p, m))| {
            let r = a / w + lambda * m * p;
            w * r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(EigenResult {
        kind,
        value: lambda,
        eigenfunction: field_from_dofs(g, op, &psi, support),
        residual,
        normalization: Normalization::UnitWeightedMass,
        iterations: pair.iterations,
    })
}

/// Unique positive principal eigenvalue of `Δψ + λ m_c ψ = 0`; needs `∫ m_c < 0`.
pub fn lambda_degradation(g: &DiscreteDomain, c: f64) -> Result<EigenResult> {
    lambda_degradation_with(g, c, &EigenOptions::default())
}

pub fn lambda_degradation_with(
    g: &DiscreteDomain,
    c: f64,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    require_nonnegative_c(c)?;
    let weight = g.degradation_weight(c);
    let mean = g.integrate(&weight);
    let abs: Vec<f64> = weight.iter().map(|w| w.abs()).collect();
    // c = c_star itself must be rejected despite rounding in the quadrature
    if mean >= -1e-12 * g.integrate(&abs) {
        return Err(Error::Precondition(format!(
            "lambda-degradation needs a weight with negative integral; c = {c} gives {mean:.6e}"
        )));
    }
    let op = assemble_neumann_laplacian(g, 1.0);
    lambda_result(
        g,
        &op,
        &weight,
        EigenKind::LambdaDegradation { c },
        Support::Full,
        opts,
    )
}

/// Unique positive principal eigenvalue of `Δψ + λ m ψ = 0` on Ω∖B̄ with `ψ = 0` on ∂B.
pub fn lambda_destruction(g: &DiscreteDomain) -> Result<EigenResult> {
    lambda_destruction_with(g, &EigenOptions::default())
}

pub fn lambda_destruction_with(g: &DiscreteDomain, opts: &EigenOptions) -> Result<EigenResult> {
    if !g.has_degraded_region() {
        return Err(Error::Precondition(
            "lambda-destruction needs a nonempty degraded region".into(),
        ));
    }
    let op = assemble_destruction_laplacian(g, 1.0);
    let weight = op.restrict(g.growth());
    if weight.iter().all(|&m| m <= 0.0) {
        return Err(Error::Precondition(
            "growth must be positive somewhere outside B".into(),
        ));
    }
    lambda_result(
        g,
        &op,
        &weight,
        EigenKind::LambdaDestruction,
        Support::Habitat,
        opts,
    )
}
