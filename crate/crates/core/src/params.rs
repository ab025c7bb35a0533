use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mixture weight and the two well stiffnesses of the double-well potential
/// `exp(-V(eta)) = p exp(-kappa_O eta^2 / 2) + (1 - p) exp(-kappa_D eta^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub p: T,
    pub kappa_o: T,
    pub kappa_d: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(p: T, kappa_o: T, kappa_d: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
        }
        if !(kappa_o > T::zero() && kappa_o.is_finite()) {
            return Err(Error::InvalidParams(format!("kappa_O = {kappa_o} must be positive")));
        }
        if !(kappa_d > T::zero() && kappa_d.is_finite()) {
            return Err(Error::InvalidParams(format!("kappa_D = {kappa_d} must be positive")));
        }
        Ok(ModelParams { p, kappa_o, kappa_d })
    }

    pub fn with_p(self, p: T) -> Result<Self> {
        Self::new(p, self.kappa_o, self.kappa_d)
    }

    /// Same model with the roles of the two wells exchanged (`p -> 1 - p`).
    pub fn swapped(self) -> Self {
        ModelParams {
            p: T::one() - self.p,
            kappa_o: self.kappa_d,
            kappa_d: self.kappa_o,
        }
    }

    /// `(kappa_O + kappa_D) / (kappa_O - kappa_D)`; `None` when the wells coincide.
    pub fn r(&self) -> Option<T> {
        if self.kappa_o == self.kappa_d {
            None
        } else {
            Some((self.kappa_o + self.kappa_d) / (self.kappa_o - self.kappa_d))
        }
    }

    /// `kappa_D / kappa_O`.
    pub fn xi(&self) -> T {
        self.kappa_d / self.kappa_o
    }

    pub fn ratio(&self) -> T {
        self.kappa_o / self.kappa_d
    }

    pub fn is_ordered_regime(&self) -> bool {
        self.kappa_o > self.kappa_d
    }

    /// Whether `kappa_O kappa_D = 1` holds to a relative tolerance.
    pub fn is_dual_normalized(&self, rel_tol: T) -> bool {
        (self.kappa_o * self.kappa_d - T::one()).abs() <= rel_tol
    }

    /// Parameters with the given ratio `kappa_O / kappa_D` and `kappa_O kappa_D = 1`.
    pub fn dual_normalized(p: T, ratio: T) -> Result<Self> {
        let k = ratio.sqrt();
        Self::new(p, k, T::one() / k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let m = ModelParams::new(0.5f64, 3.0, 1.0).unwrap();
        assert_eq!(m.r(), Some(2.0));
        assert!((m.xi() - 1.0 / 3.0).abs() < 1e-15);
        assert!(m.r().unwrap() > 1.0);
        assert_eq!(ModelParams::new(0.5, 1.0, 1.0).unwrap().r(), None);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelParams::new(1.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(-0.1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn normalization() {
        let m = ModelParams::dual_normalized(0.3f64, 1e4).unwrap();
        assert!((m.kappa_o - 100.0).abs() < 1e-12);
        assert!(m.is_dual_normalized(1e-12));
    }
}
