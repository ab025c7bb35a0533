//! The `kappa -> 1/kappa` duality between the gradient measure and its
//! winding (star) counterpart on the dual torus.
//!
//! For any positive couplings, `Z*(kappa*) = 2 pi L^2 prod_b sqrt(kappa_b) Z(kappa)`
//! with `kappa*_{b*} = 1 / kappa_b`. Summed over two-state configurations this
//! relates the mixture at `p` to the mixture at a dual `p*`; which way round
//! the relation goes is decided here by exact enumeration.

use serde::{Deserialize, Serialize};

use crate::config::CouplingConfig;
use crate::enumeration::log_mixture_partition;
use crate::error::{Error, Result};
use crate::gaussfield::{log_partition, log_partition_star};
use crate::params::ModelParams;
use crate::scalar::Real;
use crate::torus::TorusGeometry;

/// Relative tolerance on `kappa_O kappa_D = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// `kappa*_{dual(b)} = 1 / kappa_b`.
pub fn dual_coupling<T: Real>(kappa: &CouplingConfig<T>, g: &TorusGeometry) -> CouplingConfig<T> {
    let mut out = vec![T::zero(); kappa.len()];
    for (b, &k) in kappa.values().iter().enumerate() {
        out[g.dual_map()[b]] = T::one() / k;
    }
    CouplingConfig::new(out).expect("reciprocals of positive values are positive")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    pub side: usize,
    /// Hash of the coupling values, for matching reports to inputs.
    pub digest: String,
    /// `log Z*(kappa*)`.
    pub lhs: f64,
    /// `log(2 pi L^2) + (1/2) sum_b log kappa_b + log Z(kappa)`.
    pub rhs: f64,
    pub residual: f64,
}

fn digest<T: Real>(kappa: &CouplingConfig<T>) -> String {
    // FNV-1a over the f64 bit patterns; stable across builds.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &k in kappa.values() {
        for byte in k.to_f64_lossy().to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

pub fn verify_z_rep<T: Real>(kappa: &CouplingConfig<T>, g: &TorusGeometry) -> Result<DualityReport> {
    let lhs = log_partition_star(&dual_coupling(kappa, g), g)?;
    let half_log_kappa: T = kappa.values().iter().map(|k| k.ln()).sum::<T>() * T::of(0.5);
    let rhs = (T::TAU() * T::of_usize(g.num_sites())).ln() + half_log_kappa + log_partition(kappa, g)?;
    Ok(DualityReport {
        side: g.side(),
        digest: digest(kappa),
        lhs: lhs.to_f64_lossy(),
        rhs: rhs.to_f64_lossy(),
        residual: (lhs - rhs).to_f64_lossy(),
    })
}

/// The two candidate dual-parameter relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// `(p/(1-p)) (p*/(1-p*)) = sqrt(kD/kO)`, mixture attachment `p* sqrt(kO) + (1-p*) sqrt(kD)`.
    A,
    /// `(p/(1-p)) (p*/(1-p*)) = sqrt(kO/kD)`, mixture attachment `p* sqrt(kD) + (1-p*) sqrt(kO)`.
    B,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::A, Orientation::B];

    fn odds_product<T: Real>(self, m: &ModelParams<T>) -> T {
        match self {
            Orientation::A => (m.kappa_d / m.kappa_o).sqrt(),
            Orientation::B => (m.kappa_o / m.kappa_d).sqrt(),
        }
    }

    fn attachment<T: Real>(self, p_star: T, m: &ModelParams<T>) -> T {
        let (so, sd) = (m.kappa_o.sqrt(), m.kappa_d.sqrt());
        match self {
            Orientation::A => p_star * so + (T::one() - p_star) * sd,
            Orientation::B => p_star * sd + (T::one() - p_star) * so,
        }
    }
}

fn require_normalized<T: Real>(m: &ModelParams<T>) -> Result<()> {
    if m.is_dual_normalized(T::of(NORMALIZATION_TOL)) {
        Ok(())
    } else {
        Err(Error::Normalization((m.kappa_o * m.kappa_d).to_f64_lossy()))
    }
}

/// Dual mixture weight `p*` of `p` under the given orientation.
pub fn dual_p<T: Real>(p: T, m: &ModelParams<T>, orientation: Orientation) -> Result<T> {
    require_normalized(m)?;
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidParams(format!("p = {p} must lie in (0, 1)")));
    }
    let c = orientation.odds_product(m);
    // p*/(1-p*) = c (1-p)/p
    let q = c * (T::one() - p);
    Ok(q / (q + p))
}

/// Fixed point of [`dual_p`]: `p / (1-p) = sqrt(c)`.
pub fn self_dual_p<T: Real>(m: &ModelParams<T>, orientation: Orientation) -> Result<T> {
    require_normalized(m)?;
    let s = orientation.odds_product(m).sqrt();
    Ok(s / (T::one() + s))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SummedDuality {
    pub p: f64,
    pub p_star: f64,
    pub orientation: Orientation,
    /// `log Z*_V(p*) - [log Z_V(p) + log(2 pi L^2) + |B| log(attachment)]`.
    pub residual: f64,
}

/// Checks the mixture-level identity at `L = 2` by enumerating both sides.
pub fn verify_summed_duality<T: Real>(
    p: T,
    m: &ModelParams<T>,
    orientation: Orientation,
) -> Result<SummedDuality> {
    let m = m.with_p(p)?;
    let p_star = dual_p(p, &m, orientation)?;
    let dual = m.with_p(p_star)?;
    let g = TorusGeometry::new(crate::enumeration::SIDE)?;
    let lhs = log_mixture_partition(&dual, true)?;
    let rhs = log_mixture_partition(&m, false)?
        + (T::TAU() * T::of_usize(g.num_sites())).ln()
        + T::of_usize(g.num_bonds()) * orientation.attachment(p_star, &m).ln();
    Ok(SummedDuality {
        p: p.to_f64_lossy(),
        p_star: p_star.to_f64_lossy(),
        orientation,
        residual: (lhs - rhs).to_f64_lossy(),
    })
}

/// Outcome of testing both orientations over a grid of `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adjudication {
    pub tol: f64,
    pub checks: Vec<SummedDuality>,
    /// The orientation whose residual is below `tol` at every grid point while
    /// the other fails somewhere; `None` if that is not the case.
    pub winner: Option<Orientation>,
}

pub fn adjudicate<T: Real>(m: &ModelParams<T>, grid: &[T], tol: f64) -> Result<Adjudication> {
    let mut checks = Vec::new();
    for &p in grid {
        for o in Orientation::BOTH {
            checks.push(verify_summed_duality(p, m, o)?);
        }
    }
    let passes = |o: Orientation| {
        checks
            .iter()
            .filter(|c| c.orientation == o)
            .all(|c| c.residual.abs() < tol)
    };
    let winner = match (passes(Orientation::A), passes(Orientation::B)) {
        (true, false) => Some(Orientation::A),
        (false, true) => Some(Orientation::B),
        _ => None,
    };
    Ok(Adjudication { tol, checks, winner })
}

/// Candidate transition points and the adjudicated one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionReport {
    pub kappa_o: f64,
    pub kappa_d: f64,
    pub p_t_a: f64,
    pub p_t_b: f64,
    /// Where the ordered and disordered spin-wave free energies cross.
    pub crossing: f64,
    pub winner: Option<Orientation>,
    pub p_t: Option<f64>,
    pub max_residual_winner: Option<f64>,
}

pub fn transition_report<T: Real>(m: &ModelParams<T>) -> Result<TransitionReport> {
    let grid: Vec<T> = (1..10).map(|i| T::of(i as f64 / 10.0)).collect();
    let adj = adjudicate(m, &grid, 1e-9)?;
    let p_t_a = self_dual_p(m, Orientation::A)?.to_f64_lossy();
    let p_t_b = self_dual_p(m, Orientation::B)?.to_f64_lossy();
    let p_t = adj.winner.map(|o| match o {
        Orientation::A => p_t_a,
        Orientation::B => p_t_b,
    });
    let max_residual_winner = adj.winner.map(|o| {
        adj.checks
            .iter()
            .filter(|c| c.orientation == o)
            .map(|c| c.residual.abs())
            .fold(0.0, f64::max)
    });
    Ok(TransitionReport {
        kappa_o: m.kappa_o.to_f64_lossy(),
        kappa_d: m.kappa_d.to_f64_lossy(),
        p_t_a,
        p_t_b,
        crossing: crate::spinwave::crossing_p(m).to_f64_lossy(),
        winner: adj.winner,
        p_t,
        max_residual_winner,
    })
}

/// `verify_z_rep` on `samples` two-state couplings with each bond ordered
/// with probability 1/2, drawn from `ChaCha8(seed)`.
pub fn random_two_state_reports(
    side: usize,
    samples: usize,
    seed: u64,
    kappa_o: f64,
    kappa_d: f64,
) -> Result<Vec<DualityReport>> {
    use rand::{Rng, SeedableRng};
    let g = TorusGeometry::new(side)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mask: Vec<bool> = (0..g.num_bonds()).map(|_| rng.random_bool(0.5)).collect();
            verify_z_rep(&CouplingConfig::two_state(&mask, kappa_o, kappa_d)?, &g)
        })
        .collect()
}
