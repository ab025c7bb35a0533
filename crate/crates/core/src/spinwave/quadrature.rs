//! Brillouin-zone integrals `int f(k) dk / (2 pi)^2` for integrands with
//! logarithmic singularities at the corners of the folded zone.
//!
//! Every integrand used here is even in `k1` and in `k2` separately, so the
//! zone is folded onto `[0, pi]^2`. Each axis is then remapped with
//! `k = pi u(s)`, `u(s) = s - sin(2 pi s) / (2 pi)`, whose Jacobian
//! `2 sin^2(pi s)` vanishes to second order at both ends and smooths the
//! `log k` and `log(pi - k)` singularities. The midpoint rule in `s` then
//! converges quickly; a plain midpoint grid in `k` stalls at `O(log 2 / M)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Moduli;
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Grid-doubling schedule: start at `initial` points per axis, double until
/// the change drops below `tol` or `max` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub initial: usize,
    pub max: usize,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            initial: 512,
            max: 4096,
            tol: 1e-7,
        }
    }
}

impl QuadratureSpec {
    /// Exactly `m` points per axis; the error estimate compares with `m / 2`.
    pub fn fixed(m: usize) -> Self {
        QuadratureSpec {
            initial: m,
            max: m,
            tol: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |m: usize| m >= 64 && m.is_power_of_two();
        if !ok(self.initial) || !ok(self.max) || self.max < self.initial {
            return Err(Error::Invalid(format!(
                "quadrature grid sizes must be powers of two >= 64 with initial <= max (got {} / {})",
                self.initial, self.max
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Invalid(format!("quadrature tolerance {} must be >= 0", self.tol)));
        }
        Ok(())
    }
}

/// Value of an integral together with the grid it was last evaluated on and
/// `|F(M) - F(M/2)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral<T> {
    pub value: T,
    pub grid: usize,
    pub error: T,
}

/// Nodes of the folded, remapped rule along one axis.
#[derive(Debug, Clone)]
pub(crate) struct AxisRule<T> {
    /// `sin(k/2)`, `cos(k/2)` and the weight of each node.
    pub nodes: Vec<(T, T, T)>,
}

impl<T: Real> AxisRule<T> {
    pub fn new(m: usize) -> Self {
        let pi = std::f64::consts::PI;
        let u = |s: f64| s - (2.0 * pi * s).sin() / (2.0 * pi);
        let nodes = (0..m)
            .map(|j| {
                let s = (j as f64 + 0.5) / m as f64;
                // 1 - u(s) = u(1 - s); evaluate both sides directly to keep
                // relative accuracy near k = pi.
                let (lo, hi) = (u(s), u(1.0 - s));
                let weight = 2.0 * (pi * s).sin().powi(2) / m as f64;
                (
                    T::of((0.5 * pi * lo).sin()),
                    T::of((0.5 * pi * hi).sin()),
                    T::of(weight),
                )
            })
            .collect();
        AxisRule { nodes }
    }
}

/// `int_{[-pi,pi]^2} f dk / (2 pi)^2` on an `m x m` remapped grid.
pub(crate) fn integrate_on<T, F>(m: usize, f: &F) -> T
where
    T: Real,
    F: Fn(&Moduli<T>) -> T + Sync,
{
    let rule = AxisRule::<T>::new(m);
    let rows: Vec<T> = rule
        .nodes
        .par_iter()
        .map(|&(s1, c1, w1)| {
            let vals: Vec<T> = rule
                .nodes
                .iter()
                .map(|&(s2, c2, w2)| w2 * f(&Moduli::from_half_angles(s1, c1, s2, c2)))
                .collect();
            w1 * pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Integrates with grid doubling according to `spec`.
pub(crate) fn integrate<T, F>(spec: &QuadratureSpec, f: F) -> Result<Integral<T>>
where
    T: Real,
    F: Fn(&Moduli<T>) -> T + Sync,
{
    spec.validate()?;
    let mut m = spec.initial;
    let mut prev = integrate_on(m / 2, &f);
    let mut value = integrate_on(m, &f);
    while (value - prev).abs().to_f64_lossy() >= spec.tol && m < spec.max {
        m *= 2;
        prev = value;
        value = integrate_on(m, &f);
    }
    Ok(Integral {
        value,
        grid: m,
        error: (value - prev).abs(),
    })
}

/// The lattice constants `I = (1/2) int log D(k)` and `J = int log |a_-|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstants<T> {
    pub i: Integral<T>,
    pub j: Integral<T>,
}

impl<T: Real> LatticeConstants<T> {
    /// `c1 = J - I`.
    pub fn c1(&self) -> T {
        self.j.value - self.i.value
    }
}

pub fn constants_i_j<T: Real>(spec: &QuadratureSpec) -> Result<LatticeConstants<T>> {
    let half = T::of(0.5);
    let i = integrate(spec, |q: &Moduli<T>| half * q.laplacian().ln())?;
    let j = integrate(spec, |q: &Moduli<T>| half * q.a_minus.ln())?;
    Ok(LatticeConstants { i, j })
}
