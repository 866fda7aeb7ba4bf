//! Shared fixtures and closed-form oracles for the one-dimensional
//! `Ω = (−10, 10)`, `B = (−6, 6)`, `m ≡ 1` landscape.
#![allow(dead_code)]

use std::f64::consts::PI;

use hablab::{build_grid, DiscreteDomain, Landscape};

pub fn landscape(d: f64) -> Landscape {
    Landscape::interval((-10.0, 10.0), &[(-6.0, 6.0)], d, 1.0).unwrap()
}

pub fn grid(d: f64, nodes: usize) -> DiscreteDomain {
    build_grid(&landscape(d), nodes).unwrap()
}

/// Dirichlet at |x| = 6, Neumann at |x| = 10: lowest mode has quarter wavelength 4.
pub fn mu_destruction_exact(d: f64) -> f64 {
    d * (PI / 8.0).powi(2) - 1.0
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Log-derivative mismatch at x = 6 for an even eigenfunction of
/// `dφ'' + (m_c + μ)φ = 0`; the eigenvalue is its root.
fn matching(d: f64, c: f64, mu: f64) -> f64 {
    let inner = if mu < c {
        let kappa = ((c - mu) / d).sqrt();
        kappa * (6.0 * kappa).tanh()
    } else {
        let q = ((mu - c) / d).sqrt();
        -q * (6.0 * q).tan()
    };
    let k = ((1.0 + mu) / d).sqrt();
    inner - k * (4.0 * k).tan()
}

/// Principal eigenvalue `μ₁,c` from the transcendental matching condition.
pub fn mu_degradation_exact(d: f64, c: f64) -> f64 {
    let hi = mu_destruction_exact(d).min(c + d * (PI / 12.0).powi(2));
    bisect(-1.0 + 1e-14, hi - 1e-14, |mu| matching(d, c, mu))
}

/// Root of `κ tanh(6κ) = k tan(4k)` with `κ = √(c/d)`, `k = √(1/d)`.
pub fn threshold_exact(d: f64) -> f64 {
    let k = (1.0 / d).sqrt();
    let target = k * (4.0 * k).tan();
    let kappa = bisect(0.0, 1e3, |kappa| kappa * (6.0 * kappa).tanh() - target);
    d * kappa * kappa
}
