//! Brute force over all `2^8` coupling configurations of the `L = 2` torus.
//!
//! Every statistic here is an exact finite sum; the Gaussian part of each term
//! comes from the pinned (or winding) precision matrix of that configuration.

use serde::{Deserialize, Serialize};

use crate::config::CouplingConfig;
use crate::error::Result;
use crate::gaussfield::{PinnedPrecision, StarPrecision};
use crate::params::ModelParams;
use crate::pattern::PatternId;
use crate::scalar::{log_sum_exp, xlogy, Real};
use crate::torus::TorusGeometry;

pub const SIDE: usize = 2;
pub const BONDS: usize = 8;
pub const CONFIGS: usize = 1 << BONDS;
const PLAQUETTES: usize = 4;

/// Bit `b` of a mask set means bond `b` is ordered.
#[inline]
pub fn is_ordered(mask: usize, bond: usize) -> bool {
    mask >> bond & 1 == 1
}

fn geometry() -> TorusGeometry {
    TorusGeometry::new(SIDE).expect("2 is even")
}

fn coupling<T: Real>(mask: usize, kappa_o: T, kappa_d: T) -> CouplingConfig<T> {
    let ordered: Vec<bool> = (0..BONDS).map(|b| is_ordered(mask, b)).collect();
    CouplingConfig::two_state(&ordered, kappa_o, kappa_d).expect("stiffnesses are positive")
}

/// `sum_kappa p^{N_O} (1-p)^{N_D} Z_kappa`, in logs, with `Z` the pinned
/// (`star = false`) or winding (`star = true`) Gaussian partition function.
pub fn log_mixture_partition<T: Real>(m: &ModelParams<T>, star: bool) -> Result<T> {
    let g = geometry();
    let terms = (0..CONFIGS)
        .map(|mask| {
            let kappa = coupling(mask, m.kappa_o, m.kappa_d);
            let log_z = if star {
                StarPrecision::new(&g, &kappa)?.log_partition()
            } else {
                PinnedPrecision::new(&g, &kappa)?.log_partition()
            };
            Ok(log_weight(mask, m.p) + log_z)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(log_sum_exp(&terms))
}

fn log_weight<T: Real>(mask: usize, p: T) -> T {
    let n_o = T::of_usize(mask.count_ones() as usize);
    let n_d = T::of_usize(BONDS) - n_o;
    xlogy(n_o, p) + xlogy(n_d, T::one() - p)
}

/// Stiffness pattern imposed on one plaquette, as `[bottom, right, top, left]`
/// ordered flags, or the bad event (the plaquette is neither all ordered nor
/// all disordered).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaquetteEvent {
    Pattern(PatternId),
    Bad,
    Arrangement([bool; 4]),
}

impl PlaquetteEvent {
    /// The 14 mixed arrangements whose union is the bad event.
    pub fn bad_parts() -> Vec<PlaquetteEvent> {
        (1..15u8)
            .map(|bits| PlaquetteEvent::Arrangement(std::array::from_fn(|i| bits >> i & 1 == 1)))
            .collect()
    }

    pub fn all_checked() -> Vec<PlaquetteEvent> {
        PatternId::ALL
            .into_iter()
            .map(PlaquetteEvent::Pattern)
            .chain([PlaquetteEvent::Bad])
            .collect()
    }

    pub fn label(&self) -> String {
        match self {
            PlaquetteEvent::Pattern(p) => p.name().to_string(),
            PlaquetteEvent::Bad => "B".to_string(),
            PlaquetteEvent::Arrangement(a) => {
                a.iter().map(|&o| if o { 'O' } else { 'D' }).collect()
            }
        }
    }

    fn arrangement(&self, g: &TorusGeometry) -> Option<[bool; 4]> {
        match *self {
            PlaquetteEvent::Pattern(p) => {
                let q = g.plaquettes()[0];
                Some(q.bonds.map(|b| p.is_ordered(g, b)))
            }
            PlaquetteEvent::Bad => None,
            PlaquetteEvent::Arrangement(a) => Some(a),
        }
    }

    /// Whether the event, reflected onto plaquette `q`, occurs under `mask`.
    /// Reflections through an odd column exchange left and right; through an
    /// odd row, bottom and top.
    pub fn occurs(&self, g: &TorusGeometry, mask: usize, q: usize) -> bool {
        let plaq = g.plaquettes()[q];
        let seen = plaq.bonds.map(|b| is_ordered(mask, b));
        match self.arrangement(g) {
            None => !(seen.iter().all(|&o| o) || seen.iter().all(|&o| !o)),
            Some(mut a) => {
                if plaq.corner.x % 2 == 1 {
                    a.swap(1, 3);
                }
                if plaq.corner.y % 2 == 1 {
                    a.swap(0, 2);
                }
                a == seen
            }
        }
    }

    /// The event reflected onto every plaquette at once.
    pub fn disseminated(&self, g: &TorusGeometry, mask: usize) -> bool {
        (0..g.plaquettes().len()).all(|q| self.occurs(g, mask, q))
    }
}

/// Exact posterior over the 256 configurations.
#[derive(Debug, Clone)]
pub struct Posterior<T> {
    pub weights: Vec<T>,
    /// `log sum p^{N_O} (1-p)^{N_D} Z_kappa`.
    pub log_z: T,
    pub bond_energy: Vec<[T; BONDS]>,
}

impl<T: Real> Posterior<T> {
    pub fn new(m: &ModelParams<T>) -> Result<Self> {
        let g = geometry();
        let mut log_terms = Vec::with_capacity(CONFIGS);
        let mut bond_energy = Vec::with_capacity(CONFIGS);
        for mask in 0..CONFIGS {
            let kappa = coupling(mask, m.kappa_o, m.kappa_d);
            let prec = PinnedPrecision::new(&g, &kappa)?;
            log_terms.push(log_weight(mask, m.p) + prec.log_partition());
            let mut e = [T::zero(); BONDS];
            for (b, slot) in e.iter_mut().enumerate() {
                *slot = kappa.values()[b] * prec.bond_variance(&g, b);
            }
            bond_energy.push(e);
        }
        let log_z = log_sum_exp(&log_terms);
        let weights = log_terms.iter().map(|&l| (l - log_z).exp()).collect();
        Ok(Posterior {
            weights,
            log_z,
            bond_energy,
        })
    }

    pub fn expect<F: Fn(usize) -> T>(&self, f: F) -> T {
        let terms: Vec<T> = self
            .weights
            .iter()
            .enumerate()
            .map(|(mask, &w)| w * f(mask))
            .collect();
        crate::scalar::pairwise_sum(&terms)
    }

    pub fn probability<F: Fn(usize) -> bool>(&self, event: F) -> T {
        self.expect(|mask| if event(mask) { T::one() } else { T::zero() })
    }

    /// `P(disseminated event)^{1/4}`.
    pub fn z(&self, event: &PlaquetteEvent) -> T {
        let g = geometry();
        self.probability(|mask| event.disseminated(&g, mask))
            .powf(T::one() / T::of_usize(PLAQUETTES))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternEventProbability<T> {
    pub event: String,
    /// Probability that the origin plaquette shows the event.
    pub probability: T,
    /// Probability that every plaquette shows its reflected copy.
    pub disseminated: T,
    /// `disseminated^{1/4}`.
    pub z: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactSummary<T> {
    pub side: usize,
    pub p: T,
    pub kappa_o: T,
    pub kappa_d: T,
    pub log_z_v: T,
    pub log_z_star_v: T,
    /// `P(kappa_b = kappa_O)` per bond.
    pub marginal: Vec<T>,
    pub marginal_spread: T,
    /// `E R_ord`, equal to the mean marginal.
    pub chi: T,
    pub r_one_minus_r: T,
    /// `E kappa_b eta_b^2` averaged over bonds; `(N - 1) / |B|` for every model.
    pub kappa_eta_sq: T,
    /// Gaussian energy `E kappa_b eta_b^2 / 2` per bond, `(N - 1) / (2 |B|)`.
    pub energy_per_bond: T,
    /// Largest per-bond deviation of `E kappa_b eta_b^2` from its exact value.
    pub kappa_eta_sq_max_deviation: T,
    pub events: Vec<PatternEventProbability<T>>,
}

pub fn enumerate<T: Real>(m: &ModelParams<T>) -> Result<ExactSummary<T>> {
    let g = geometry();
    let post = Posterior::new(m)?;
    let marginal: Vec<T> = (0..BONDS)
        .map(|b| post.probability(|mask| is_ordered(mask, b)))
        .collect();
    let lo = marginal.iter().copied().fold(T::infinity(), T::min);
    let hi = marginal.iter().copied().fold(T::neg_infinity(), T::max);
    let chi = marginal.iter().copied().sum::<T>() / T::of_usize(BONDS);
    let r_one_minus_r = post.expect(|mask| {
        let r = T::of_usize(mask.count_ones() as usize) / T::of_usize(BONDS);
        r * (T::one() - r)
    });
    let per_bond: Vec<T> = (0..BONDS)
        .map(|b| post.expect(|mask| post.bond_energy[mask][b]))
        .collect();
    let kappa_eta_sq = per_bond.iter().copied().sum::<T>() / T::of_usize(BONDS);
    let exact = T::of(2.0 * crate::gaussfield::energy_per_bond(&g));
    let energy_dev = per_bond
        .iter()
        .map(|&e| (e - exact).abs())
        .fold(T::zero(), T::max);

    let events = PlaquetteEvent::all_checked()
        .into_iter()
        .map(|ev| {
            let probability = post.probability(|mask| ev.occurs(&g, mask, 0));
            let disseminated = post.probability(|mask| ev.disseminated(&g, mask));
            PatternEventProbability {
                event: ev.label(),
                probability,
                disseminated,
                z: disseminated.powf(T::of(0.25)),
            }
        })
        .collect();

    Ok(ExactSummary {
        side: SIDE,
        p: m.p,
        kappa_o: m.kappa_o,
        kappa_d: m.kappa_d,
        log_z_v: post.log_z,
        log_z_star_v: log_mixture_partition(m, true)?,
        marginal,
        marginal_spread: hi - lo,
        chi,
        r_one_minus_r,
        kappa_eta_sq,
        energy_per_bond: T::of(0.5) * kappa_eta_sq,
        kappa_eta_sq_max_deviation: energy_dev,
        events,
    })
}

/// Result of the chessboard and subadditivity checks at `L = 2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChessboardReport<T> {
    pub p: T,
    pub kappa_o: T,
    pub kappa_d: T,
    pub single_checks: usize,
    pub pair_checks: usize,
    pub violations: usize,
    /// Largest `LHS - RHS` over all placements (nonpositive when the estimate holds).
    pub max_excess: T,
    pub z_bad: T,
    pub z_bad_parts_sum: T,
    pub subadditive: bool,
    /// `E[R(1 - R)] / z(B)`.
    pub fitted_c: T,
    pub holds: bool,
}

/// Chessboard estimate `P(cap_j theta_{x_j} A_j) <= prod_j z(A_j)` for every
/// single and ordered pair placement (distinct plaquettes) of `events`.
pub fn chessboard_check<T: Real>(
    m: &ModelParams<T>,
    events: &[PlaquetteEvent],
    tol: T,
) -> Result<ChessboardReport<T>> {
    let g = geometry();
    let post = Posterior::new(m)?;
    let z: Vec<T> = events.iter().map(|e| post.z(e)).collect();
    let mut max_excess = T::neg_infinity();
    let mut violations = 0;
    let mut single = 0;
    let mut pairs = 0;
    let mut record = |lhs: T, rhs: T| {
        let excess = lhs - rhs;
        if excess > tol {
            violations += 1;
        }
        if excess > max_excess {
            max_excess = excess;
        }
    };
    for (i, a) in events.iter().enumerate() {
        for q in 0..PLAQUETTES {
            single += 1;
            record(post.probability(|mask| a.occurs(&g, mask, q)), z[i]);
        }
        for (j, b) in events.iter().enumerate() {
            for q1 in 0..PLAQUETTES {
                for q2 in (0..PLAQUETTES).filter(|&q2| q2 != q1) {
                    pairs += 1;
                    let lhs = post.probability(|mask| a.occurs(&g, mask, q1) && b.occurs(&g, mask, q2));
                    record(lhs, z[i] * z[j]);
                }
            }
        }
    }

    let z_bad = post.z(&PlaquetteEvent::Bad);
    let parts: T = PlaquetteEvent::bad_parts().iter().map(|e| post.z(e)).sum();
    let subadditive = z_bad <= parts + tol;
    let r_one_minus_r = post.expect(|mask| {
        let r = T::of_usize(mask.count_ones() as usize) / T::of_usize(BONDS);
        r * (T::one() - r)
    });
    Ok(ChessboardReport {
        p: m.p,
        kappa_o: m.kappa_o,
        kappa_d: m.kappa_d,
        single_checks: single,
        pair_checks: pairs,
        violations,
        max_excess,
        z_bad,
        z_bad_parts_sum: parts,
        subadditive,
        fitted_c: r_one_minus_r / z_bad,
        holds: violations == 0 && subadditive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, ko: f64, kd: f64) -> ModelParams<f64> {
        ModelParams::new(p, ko, kd).unwrap()
    }

    #[test]
    fn decoupled_species() {
        for p in [0.2, 0.5, 0.9] {
            let s = enumerate(&params(p, 1.0, 1.0)).unwrap();
            for &mb in &s.marginal {
                assert!((mb - p).abs() < 1e-12);
            }
            assert!((s.r_one_minus_r - p * (1.0 - p) * 7.0 / 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_identity_and_symmetry() {
        let s = enumerate(&params(0.5, 100.0, 0.01)).unwrap();
        assert!((s.energy_per_bond - 3.0 / 16.0).abs() < 1e-12);
        assert!((s.kappa_eta_sq - 3.0 / 8.0).abs() < 1e-12);
        assert!(s.kappa_eta_sq_max_deviation < 1e-12);
        assert!(s.marginal_spread < 1e-12);
        let again = enumerate(&params(0.5, 100.0, 0.01)).unwrap();
        assert_eq!(s.marginal, again.marginal);
        assert_eq!(s.log_z_v, again.log_z_v);
    }

    #[test]
    fn pattern_events_disseminate_to_the_pattern() {
        let g = geometry();
        for p in PatternId::ALL {
            let ev = PlaquetteEvent::Pattern(p);
            let hits: Vec<usize> = (0..CONFIGS).filter(|&mask| ev.disseminated(&g, mask)).collect();
            assert_eq!(hits.len(), 1, "{p}");
            for b in 0..BONDS {
                assert_eq!(is_ordered(hits[0], b), p.is_ordered(&g, b), "{p} bond {b}");
            }
        }
    }

    #[test]
    fn bad_parts_partition_the_bad_event() {
        let g = geometry();
        for mask in 0..CONFIGS {
            let n = PlaquetteEvent::bad_parts().iter().filter(|e| e.occurs(&g, mask, 0)).count();
            assert_eq!(n == 1, PlaquetteEvent::Bad.occurs(&g, mask, 0));
            assert!(n <= 1);
        }
    }

    #[test]
    fn probabilities_reconstruct_partition_function() {
        let m = params(0.3, 100.0, 0.01);
        let post = Posterior::new(&m).unwrap();
        let total: f64 = post.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((post.log_z - log_mixture_partition(&m, false).unwrap()).abs() < 1e-12);
    }
}
