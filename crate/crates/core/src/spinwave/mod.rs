//! Spin-wave (Gaussian) free energies of the six periodic bond patterns.
//!
//! Momentum-space building blocks live here; [`quadrature`] integrates them
//! over the Brillouin zone and [`free_energy`] assembles the infinite- and
//! finite-volume free energies.

pub mod free_energy;
pub mod quadrature;

pub use free_energy::{
    crossing_p, finite_free_energy, finite_free_energy_direct, gap_check, infinite_free_energy,
    FreeEnergyMode, FreeEnergyReport, GapReport, SpinWaveIntegrals,
};
pub use quadrature::{constants_i_j, LatticeConstants, QuadratureSpec};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Real;

/// A point `k = (k1, k2)` of the Brillouin zone `[-pi, pi]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum<T> {
    pub k1: T,
    pub k2: T,
}

impl<T: Real> Momentum<T> {
    pub fn new(k1: T, k2: T) -> Self {
        Momentum { k1, k2 }
    }

    pub fn moduli(&self) -> Moduli<T> {
        let half = T::of(0.5);
        Moduli::from_half_angles(
            (self.k1 * half).sin(),
            (self.k1 * half).cos(),
            (self.k2 * half).sin(),
            (self.k2 * half).cos(),
        )
    }
}

/// Squared moduli `|a_-|^2, |a_+|^2, |b_-|^2, |b_+|^2` with
/// `a_(+-) = 1 +- e^{i k1}` and `b_(+-) = 1 +- e^{i k2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moduli<T> {
    pub a_minus: T,
    pub a_plus: T,
    pub b_minus: T,
    pub b_plus: T,
}

impl<T: Real> Moduli<T> {
    /// From `sin(k/2)` and `cos(k/2)` of each component: `|1 - e^{ik}|^2 = 4 sin^2(k/2)`.
    pub fn from_half_angles(s1: T, c1: T, s2: T, c2: T) -> Self {
        let four = T::of(4.0);
        Moduli {
            a_minus: four * s1 * s1,
            a_plus: four * c1 * c1,
            b_minus: four * s2 * s2,
            b_plus: four * c2 * c2,
        }
    }

    /// `D(k) = |a_-|^2 + |b_-|^2`.
    pub fn laplacian(&self) -> T {
        self.a_minus + self.b_minus
    }
}

/// `D(k) = 4 - 2 cos k1 - 2 cos k2`, evaluated as `4 sin^2(k1/2) + 4 sin^2(k2/2)`.
pub fn lattice_propagator<T: Real>(k: Momentum<T>) -> T {
    k.moduli().laplacian()
}

/// The 2x2 block of the UO pattern.
pub fn pi_uo_matrix<T: Real>(k: Momentum<T>, m: &ModelParams<T>) -> [[T; 2]; 2] {
    let q = k.moduli();
    let half = T::of(0.5);
    let s = half * (m.kappa_o + m.kappa_d);
    let d = half * (m.kappa_o - m.kappa_d);
    [
        [m.kappa_o * q.a_minus + s * q.b_minus, d * q.b_minus],
        [d * q.b_minus, m.kappa_o * q.a_plus + s * q.b_minus],
    ]
}

/// `det Pi_UO(k)`, expanded so that no cancellation occurs:
/// `kO^2 |a-|^2 |a+|^2 + 4 kO s |b-|^2 + kO kD |b-|^4`, `s = (kO + kD) / 2`.
pub fn det_pi_uo<T: Real>(k: Momentum<T>, m: &ModelParams<T>) -> T {
    det_pi_uo_moduli(&k.moduli(), m.kappa_o, m.kappa_d)
}

#[inline]
pub(crate) fn det_pi_uo_moduli<T: Real>(q: &Moduli<T>, kappa_o: T, kappa_d: T) -> T {
    let s = T::of(0.5) * (kappa_o + kappa_d);
    // |a-|^2 + |a+|^2 = 4
    kappa_o * kappa_o * q.a_minus * q.a_plus
        + T::of(4.0) * kappa_o * s * q.b_minus
        + kappa_o * kappa_d * q.b_minus * q.b_minus
}

/// The 4x4 block of the MA pattern in units of `(kO - kD) / 2`, row-major.
pub fn pi_ma_matrix<T: Real>(k: Momentum<T>, r: T) -> [[T; 4]; 4] {
    let q = k.moduli();
    let z = T::zero();
    [
        [r * (q.a_minus + q.b_minus), q.b_minus, q.a_minus, z],
        [q.b_minus, r * (q.a_plus + q.b_minus), z, q.a_plus],
        [q.a_minus, z, r * (q.a_minus + q.b_plus), q.b_plus],
        [z, q.a_plus, q.b_plus, r * (q.a_plus + q.b_plus)],
    ]
}

/// `det Pi_MA(k)` from the factorized closed form
/// `(r^2 - 1) { -(|a+|^2|a-|^2 - |b+|^2|b-|^2)^2 + prod (|a.|^2 + |b.|^2) r^2 }`.
pub fn det_pi_ma<T: Real>(k: Momentum<T>, m: &ModelParams<T>) -> Result<T> {
    let r = m.r().ok_or(Error::DegenerateRatio)?;
    Ok(det_pi_ma_closed(&k.moduli(), r))
}

pub fn det_pi_ma_closed<T: Real>(q: &Moduli<T>, r: T) -> T {
    let x = q.a_plus * q.a_minus - q.b_plus * q.b_minus;
    let prod = (q.a_plus + q.b_plus)
        * (q.a_minus + q.b_plus)
        * (q.a_plus + q.b_minus)
        * (q.a_minus + q.b_minus);
    (r * r - T::one()) * (prod * r * r - x * x)
}

/// `((kO - kD)/2)^4 det Pi_MA(k)` written without the `r` poles:
/// `kO kD [ s^2 (prod - X^2) + kO kD X^2 ]` where `prod - X^2` is expanded into a
/// sum of nonnegative terms. Finite and accurate for any ratio, including `kO = kD`.
#[inline]
pub(crate) fn scaled_det_pi_ma_moduli<T: Real>(q: &Moduli<T>, kappa_o: T, kappa_d: T) -> T {
    let s = T::of(0.5) * (kappa_o + kappa_d);
    let prod_o_d = kappa_o * kappa_d;
    let (am, ap, bm, bp) = (q.a_minus, q.a_plus, q.b_minus, q.b_plus);
    let u = ap * am + bp * bm;
    let v = ap * bm + am * bp;
    let w = am * bm + ap * bp;
    let x = ap * am - bp * bm;
    let excess = T::of(16.0) * u + v * w + T::of(4.0) * ap * am * bp * bm;
    prod_o_d * (s * s * excess + prod_o_d * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::det_lu;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params(ko: f64, kd: f64) -> ModelParams<f64> {
        ModelParams::new(0.5, ko, kd).unwrap()
    }

    fn random_k(rng: &mut ChaCha8Rng) -> Momentum<f64> {
        Momentum::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI))
    }

    #[test]
    fn propagator_values() {
        assert_eq!(lattice_propagator(Momentum::new(0.0, 0.0)), 0.0);
        assert!((lattice_propagator(Momentum::new(PI, PI)) - 8.0).abs() < 1e-14);
        assert!((lattice_propagator(Momentum::new(PI, 0.0)) - 4.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let k = random_k(&mut rng);
            let cos_form = 4.0 - 2.0 * k.k1.cos() - 2.0 * k.k2.cos();
            assert!((lattice_propagator(k) - cos_form).abs() < 1e-13);
        }
    }

    #[test]
    fn det_uo_matches_matrix_and_bound() {
        let m = params(1.0, 1.0);
        assert!((det_pi_uo(Momentum::new(PI, PI), &m) - 32.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (ko, kd) in [(100.0, 0.01), (3.0, 0.5), (0.2, 7.0)] {
            let m = params(ko, kd);
            for _ in 0..200 {
                let k = random_k(&mut rng);
                let mat = pi_uo_matrix(k, &m);
                let direct = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
                let det = det_pi_uo(k, &m);
                assert!((det - direct).abs() <= 1e-10 * direct.abs().max(1e-300));
                let q = k.moduli();
                let bound = ko * ko * q.a_minus * q.a_plus + ko * kd * q.b_minus * q.b_minus;
                assert!(det >= bound * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn det_uo_equal_stiffness_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kappa = 2.5;
        let m = params(kappa, kappa);
        for _ in 0..100 {
            let k = random_k(&mut rng);
            let q = k.moduli();
            let expect = kappa * kappa * (q.a_minus + q.b_minus) * (q.a_plus + q.b_minus);
            assert!((det_pi_uo(k, &m) - expect).abs() < 1e-10 * expect.max(1.0));
        }
    }

    #[test]
    fn det_ma_closed_form_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let k = random_k(&mut rng);
            let r = 1.0 + rng.random_range(1e-3..10.0f64);
            let mat = pi_ma_matrix(k, r);
            let direct = det_lu(4, mat.iter().flatten().copied().collect());
            let closed = det_pi_ma_closed(&k.moduli(), r);
            assert!((closed - direct).abs() <= 1e-10 * direct.abs(), "{closed} vs {direct}");
        }
    }

    #[test]
    fn det_ma_degenerate_and_bound() {
        let k = Momentum::new(0.7, -1.3);
        assert_eq!(det_pi_ma(k, &params(1.0, 1.0)), Err(Error::DegenerateRatio));
        assert!(det_pi_ma_closed(&k.moduli(), 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = random_k(&mut rng);
            let q = k.moduli();
            let bound = 4.0 * 8.0 * q.a_minus * q.a_plus * q.b_minus * q.b_plus;
            assert!(det_pi_ma_closed(&q, 3.0) >= bound * (1.0 - 1e-12));
        }
    }

    #[test]
    fn scaled_det_ma_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (ko, kd) in [(100.0, 0.01), (3.0, 1.0), (1.0, 4.0)] {
            let m = params(ko, kd);
            let d: f64 = (ko - kd) / 2.0;
            for _ in 0..200 {
                let q = random_k(&mut rng).moduli();
                let expect = d.powi(4) * det_pi_ma_closed(&q, m.r().unwrap());
                let got = scaled_det_pi_ma_moduli(&q, ko, kd);
                assert!((got - expect).abs() <= 1e-9 * expect.abs());
            }
        }
    }

    #[test]
    fn orbit_and_reflection_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = params(100.0, 0.01);
        let r = m.r().unwrap();
        for _ in 0..100 {
            let k = random_k(&mut rng);
            let base_ma = det_pi_ma_closed(&k.moduli(), r);
            let base_uo = det_pi_uo(k, &m);
            let neg = Momentum::new(-k.k1, -k.k2);
            let tol = 1e-12;
            assert!((det_pi_ma_closed(&neg.moduli(), r) - base_ma).abs() <= tol * base_ma);
            assert!((det_pi_uo(neg, &m) - base_uo).abs() <= tol * base_uo.max(1.0));
            for (dx, dy) in [(PI, 0.0), (0.0, PI), (PI, PI)] {
                let shifted = Momentum::new(k.k1 + dx, k.k2 + dy);
                let v = det_pi_ma_closed(&shifted.moduli(), r);
                assert!((v - base_ma).abs() <= tol * base_ma, "MA shift ({dx},{dy})");
            }
            // The UO block already pairs k and k + pi e1.
            let shifted = Momentum::new(k.k1 + PI, k.k2);
            assert!((det_pi_uo(shifted, &m) - base_uo).abs() <= tol * base_uo.max(1.0));
        }
    }
}
