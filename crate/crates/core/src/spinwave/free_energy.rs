//! Pattern free energies, in nats per site.
//!
//! Infinite volume: `F = -(n_O log p + n_D log(1 - p)) + (Brillouin integral)`
//! with `n_O + n_D = 2` bonds per site. Finite volume: the Gaussian integral is
//! block diagonalized over the orbits `{k, k + pi e1, k + pi e2, k + pi(e1 + e2)}`
//! of the reciprocal torus, with the zero mode reinserted on the `k = 0` entry.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, Integral, LatticeConstants, QuadratureSpec};
use super::{det_pi_uo_moduli, scaled_det_pi_ma_moduli, Moduli};
use crate::error::{Error, Result};
use crate::gaussfield::log_partition;
use crate::linalg::hermitian_log_det;
use crate::params::ModelParams;
use crate::pattern::{pattern_coupling, PatternId};
use crate::scalar::{pairwise_sum, xlogy, Real};
use crate::torus::{Direction, Site, TorusGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeEnergyMode {
    Infinite { grid: usize, error: f64 },
    Finite { side: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyReport<T> {
    pub pattern: PatternId,
    pub p: T,
    pub kappa_o: T,
    pub kappa_d: T,
    /// `+inf` when a bond weight `p` or `1 - p` that the pattern needs vanishes.
    pub value: T,
    pub mode: FreeEnergyMode,
}

/// `-(n_O log p + n_D log(1 - p))` per site.
fn bond_weight_term<T: Real>(pattern: PatternId, p: T) -> T {
    let n_o: T = pattern.ordered_per_site();
    let n_d = T::of(2.0) - n_o;
    -(xlogy(n_o, p) + xlogy(n_d, T::one() - p))
}

/// The `p`-independent momentum integrals for one pair of stiffnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinWaveIntegrals<T> {
    pub kappa_o: T,
    pub kappa_d: T,
    /// `(1/2) int log D(k)`, shared by O and D.
    pub laplacian: Integral<T>,
    pub mp: Integral<T>,
    pub uo: Integral<T>,
    pub ud: Integral<T>,
    pub ma: Integral<T>,
}

impl<T: Real> SpinWaveIntegrals<T> {
    pub fn compute(kappa_o: T, kappa_d: T, spec: &QuadratureSpec) -> Result<Self> {
        ModelParams::new(T::of(0.5), kappa_o, kappa_d)?;
        Ok(SpinWaveIntegrals {
            kappa_o,
            kappa_d,
            laplacian: integral_for(PatternId::O, kappa_o, kappa_d, spec)?,
            mp: integral_for(PatternId::MP, kappa_o, kappa_d, spec)?,
            uo: integral_for(PatternId::UO, kappa_o, kappa_d, spec)?,
            ud: integral_for(PatternId::UD, kappa_o, kappa_d, spec)?,
            ma: integral_for(PatternId::MA, kappa_o, kappa_d, spec)?,
        })
    }

    /// The momentum part of `F_pattern` and its quadrature error.
    pub fn integral_part(&self, pattern: PatternId) -> (T, T) {
        let half = T::of(0.5);
        match pattern {
            PatternId::O => (half * self.kappa_o.ln() + self.laplacian.value, self.laplacian.error),
            PatternId::D => (half * self.kappa_d.ln() + self.laplacian.value, self.laplacian.error),
            PatternId::MP => (self.mp.value, self.mp.error),
            PatternId::UO => (self.uo.value, self.uo.error),
            PatternId::UD => (self.ud.value, self.ud.error),
            PatternId::MA => (self.ma.value, self.ma.error),
        }
    }

    pub fn free_energy(&self, pattern: PatternId, p: T) -> T {
        bond_weight_term(pattern, p) + self.integral_part(pattern).0
    }

    /// Gap inequality at one `p`, with `I` and `J` supplied.
    pub fn gap_report(&self, p: T, constants: &LatticeConstants<T>) -> Result<GapReport<T>> {
        let m = ModelParams::new(p, self.kappa_o, self.kappa_d)?;
        if !(m.kappa_d < m.kappa_o) {
            return Err(Error::InvalidParams(
                "the gap bound needs kappa_D < kappa_O".into(),
            ));
        }
        let (reference, f_ref) = [PatternId::O, PatternId::D]
            .into_iter()
            .map(|a| (a, self.free_energy(a, p)))
            .fold((PatternId::O, T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc });
        let (minimizer, f_min) = PatternId::INHOMOGENEOUS
            .into_iter()
            .map(|a| (a, self.free_energy(a, p)))
            .fold((PatternId::UO, T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc });
        let lhs = f_min - f_ref;
        let rhs = T::of(0.125) * m.ratio().ln()
            + T::of(0.25) * (T::one() - m.xi()).ln()
            + constants.c1();
        let tol = self.integral_part(minimizer).1
            + self.integral_part(reference).1
            + constants.i.error
            + constants.j.error
            + T::of(1e-9);
        Ok(GapReport {
            p,
            kappa_o: self.kappa_o,
            kappa_d: self.kappa_d,
            lhs,
            rhs,
            margin: lhs - rhs,
            tolerance: tol,
            holds: lhs >= rhs - tol,
            minimizer,
            reference,
        })
    }
}

fn integral_for<T: Real>(pattern: PatternId, kappa_o: T, kappa_d: T, spec: &QuadratureSpec) -> Result<Integral<T>> {
    let half = T::of(0.5);
    let quarter = T::of(0.25);
    let eighth = T::of(0.125);
    match pattern {
        PatternId::O | PatternId::D => integrate(spec, |q: &Moduli<T>| half * q.laplacian().ln()),
        PatternId::MP => integrate(spec, |q: &Moduli<T>| {
            half * (kappa_o * q.a_minus + kappa_d * q.b_minus).ln()
        }),
        PatternId::UO => integrate(spec, |q: &Moduli<T>| {
            quarter * det_pi_uo_moduli(q, kappa_o, kappa_d).ln()
        }),
        PatternId::UD => integrate(spec, |q: &Moduli<T>| {
            quarter * det_pi_uo_moduli(q, kappa_d, kappa_o).ln()
        }),
        PatternId::MA => integrate(spec, |q: &Moduli<T>| {
            eighth * scaled_det_pi_ma_moduli(q, kappa_o, kappa_d).ln()
        }),
    }
}

/// Infinite-volume free energy of one pattern.
pub fn infinite_free_energy<T: Real>(
    pattern: PatternId,
    m: &ModelParams<T>,
    spec: &QuadratureSpec,
) -> Result<FreeEnergyReport<T>> {
    if pattern == PatternId::MA && m.r().is_none() {
        return Err(Error::DegenerateRatio);
    }
    let integral = integral_for(pattern, m.kappa_o, m.kappa_d, spec)?;
    let half = T::of(0.5);
    let shift = match pattern {
        PatternId::O => half * m.kappa_o.ln(),
        PatternId::D => half * m.kappa_d.ln(),
        _ => T::zero(),
    };
    Ok(FreeEnergyReport {
        pattern,
        p: m.p,
        kappa_o: m.kappa_o,
        kappa_d: m.kappa_d,
        value: bond_weight_term(pattern, m.p) + shift + integral.value,
        mode: FreeEnergyMode::Infinite {
            grid: integral.grid,
            error: integral.error.to_f64_lossy(),
        },
    })
}

/// Stiffness of the bond leaving `site` along each axis, on the 2x2 unit cell.
fn unit_cell<T: Real>(pattern: PatternId, m: &ModelParams<T>, g: &TorusGeometry) -> [[T; 4]; 2] {
    let kappa = pattern_coupling(pattern, g, m);
    let mut cell = [[T::zero(); 4]; 2];
    for s in 0..4 {
        let site = Site { x: s & 1, y: s >> 1 };
        for dir in [Direction::Horizontal, Direction::Vertical] {
            cell[dir.index()][s] = kappa.values()[g.bond_at(site, dir)];
        }
    }
    cell
}

/// Sum of `log det Theta` over all orbits of the reciprocal torus.
fn orbit_log_det_sum<T: Real>(pattern: PatternId, m: &ModelParams<T>, g: &TorusGeometry) -> Result<T> {
    let l = g.side();
    let half_l = l / 2;
    let cell = unit_cell(pattern, m, g);
    // A^sigma(delta) = (1/4) sum_s kappa_sigma(s) (-1)^{delta . s}
    let mut amp = [[T::zero(); 4]; 2];
    for sigma in 0..2 {
        for delta in 0..4usize {
            let mut acc = T::zero();
            for s in 0..4usize {
                let sign = if (delta & s).count_ones() % 2 == 0 { T::one() } else { -T::one() };
                acc += sign * cell[sigma][s];
            }
            amp[sigma][delta] = T::of(0.25) * acc;
        }
    }

    let tau = std::f64::consts::TAU;
    let mut logs = Vec::with_capacity(half_l * half_l);
    for n2 in 0..half_l {
        for n1 in 0..half_l {
            // Members indexed by eps = e1 + 2 e2.
            let mut grad = [[Complex::new(T::zero(), T::zero()); 2]; 4];
            let mut is_zero = [false; 4];
            for eps in 0..4usize {
                let m1 = n1 + half_l * (eps & 1);
                let m2 = n2 + half_l * (eps >> 1);
                is_zero[eps] = m1 == 0 && m2 == 0;
                for (sigma, mm) in [m1, m2].into_iter().enumerate() {
                    let k = tau * mm as f64 / l as f64;
                    // 1 - e^{i k}
                    grad[eps][sigma] = Complex::new(T::of(1.0 - k.cos()), T::of(-k.sin()));
                }
            }
            let mut theta = vec![Complex::new(T::zero(), T::zero()); 16];
            for a in 0..4 {
                for b in 0..4 {
                    let delta = a ^ b;
                    let mut v = Complex::new(T::zero(), T::zero());
                    for sigma in 0..2 {
                        v += grad[a][sigma].conj() * grad[b][sigma] * amp[sigma][delta];
                    }
                    if a == b && is_zero[a] {
                        v += Complex::new(T::one(), T::zero());
                    }
                    theta[a * 4 + b] = v;
                }
            }
            logs.push(hermitian_log_det(4, &theta)?);
        }
    }
    Ok(pairwise_sum(&logs))
}

/// Finite-volume free energy `-(1/L^2) log[Z / (2 pi)^{(L^2 - 1)/2}]` from the
/// momentum-space block determinants.
pub fn finite_free_energy<T: Real>(
    pattern: PatternId,
    m: &ModelParams<T>,
    side: usize,
) -> Result<FreeEnergyReport<T>> {
    let g = TorusGeometry::new(side)?;
    let n = T::of_usize(g.num_sites());
    let n_o = pattern.ordered_per_site::<T>() * n;
    let n_d = T::of_usize(g.num_bonds()) - n_o;
    let log_det = orbit_log_det_sum(pattern, m, &g)?;
    // Integrating out the reinserted zero mode contributes a factor L.
    let log_z = T::of_usize(side).ln() + xlogy(n_o, m.p) + xlogy(n_d, T::one() - m.p)
        - T::of(0.5) * log_det;
    Ok(FreeEnergyReport {
        pattern,
        p: m.p,
        kappa_o: m.kappa_o,
        kappa_d: m.kappa_d,
        value: -log_z / n,
        mode: FreeEnergyMode::Finite { side },
    })
}

/// The same quantity from the pinned weighted Laplacian in real space.
pub fn finite_free_energy_direct<T: Real>(pattern: PatternId, m: &ModelParams<T>, side: usize) -> Result<T> {
    let g = TorusGeometry::new(side)?;
    let kappa = pattern_coupling(pattern, &g, m);
    let ordered = (0..g.num_bonds()).filter(|&b| pattern.is_ordered(&g, b)).count();
    let n_o = T::of_usize(ordered);
    let n_d = T::of_usize(g.num_bonds() - ordered);
    let dim = T::of_usize(g.num_sites() - 1);
    let log_z = log_partition(&kappa, &g)? - T::of(0.5) * dim * T::TAU().ln();
    Ok(-(log_z + xlogy(n_o, m.p) + xlogy(n_d, T::one() - m.p)) / T::of_usize(g.num_sites()))
}

/// Outcome of the gap inequality at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport<T> {
    pub p: T,
    pub kappa_o: T,
    pub kappa_d: T,
    /// `min_{UO,UD,MP,MA} F - min(F_O, F_D)`.
    pub lhs: T,
    /// `(1/8) log(kO/kD) + (1/4) log(1 - xi) + J - I`.
    pub rhs: T,
    pub margin: T,
    pub tolerance: T,
    pub holds: bool,
    pub minimizer: PatternId,
    pub reference: PatternId,
}

pub fn gap_check<T: Real>(m: &ModelParams<T>, spec: &QuadratureSpec) -> Result<GapReport<T>> {
    let constants = super::quadrature::constants_i_j(spec)?;
    SpinWaveIntegrals::compute(m.kappa_o, m.kappa_d, spec)?.gap_report(m.p, &constants)
}

/// Solution of `F_O(p) = F_D(p)`: `p / (1 - p) = (kO / kD)^{1/4}`.
pub fn crossing_p<T: Real>(m: &ModelParams<T>) -> T {
    T::one() / (T::one() + m.xi().powf(T::of(0.25)))
}
