//! Exact Gaussian machinery for a fixed coupling configuration.
//!
//! Conditioned on the stiffnesses, `eta` is the gradient of a Gaussian height
//! field with precision `sum_b kappa_b (grad_b phi)^2`. Pinning `phi_0 = 0`
//! leaves an `(N-1)`-dimensional positive definite precision; sites are laid
//! out in a folded row order (`0, L-1, 1, L-2, ...`) so the periodic neighbour
//! rows stay within a band of width `2L` and the factorization is banded.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{gradient_of, CouplingConfig, GradientConfig, HeightField};
use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, BandMatrix, DenseCholesky};
use crate::scalar::Real;
use crate::torus::{Direction, TorusGeometry};

/// Folded row ordering of the sites; the origin comes first.
#[derive(Debug, Clone)]
pub struct SiteOrdering {
    pos: Vec<usize>,
    site_at: Vec<usize>,
    bandwidth: usize,
}

impl SiteOrdering {
    pub fn folded(g: &TorusGeometry) -> Self {
        let l = g.side();
        let row_pos = |y: usize| if y < l / 2 { 2 * y } else { 2 * (l - 1 - y) + 1 };
        let mut pos = vec![0; g.num_sites()];
        let mut site_at = vec![0; g.num_sites()];
        for s in 0..g.num_sites() {
            let site = g.site(s);
            let p = row_pos(site.y) * l + site.x;
            pos[s] = p;
            site_at[p] = s;
        }
        let bandwidth = (0..g.num_bonds())
            .map(|b| {
                let (t, h) = g.endpoints(b);
                pos[t].abs_diff(pos[h])
            })
            .max()
            .unwrap_or(0);
        SiteOrdering {
            pos,
            site_at,
            bandwidth,
        }
    }

    /// Index of a site among the free (unpinned) coordinates.
    #[inline]
    pub fn free_index(&self, site: usize) -> Option<usize> {
        self.pos[site].checked_sub(1)
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }
}

fn check_kappa<T: Real>(g: &TorusGeometry, kappa: &CouplingConfig<T>) -> Result<()> {
    if kappa.len() != g.num_bonds() {
        return Err(Error::InvalidCoupling(format!(
            "expected {} stiffnesses, got {}",
            g.num_bonds(),
            kappa.len()
        )));
    }
    Ok(())
}

/// Pinned weighted Laplacian with its banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct PinnedPrecision<T> {
    ordering: SiteOrdering,
    factor: BandCholesky<T>,
}

impl<T: Real> PinnedPrecision<T> {
    pub fn new(g: &TorusGeometry, kappa: &CouplingConfig<T>) -> Result<Self> {
        Self::with_ordering(g, kappa, SiteOrdering::folded(g))
    }

    pub fn with_ordering(
        g: &TorusGeometry,
        kappa: &CouplingConfig<T>,
        ordering: SiteOrdering,
    ) -> Result<Self> {
        check_kappa(g, kappa)?;
        let factor = Self::assemble(g, kappa, &ordering).factor()?;
        Ok(PinnedPrecision { ordering, factor })
    }

    /// The (unfactored) banded precision matrix in free coordinates.
    pub fn assemble(g: &TorusGeometry, kappa: &CouplingConfig<T>, ordering: &SiteOrdering) -> BandMatrix<T> {
        let n = g.num_sites() - 1;
        let mut m = BandMatrix::zeros(n, ordering.bandwidth().max(1).min(n.max(1) - 1));
        for (b, &k) in kappa.values().iter().enumerate() {
            let (t, h) = g.endpoints(b);
            let (it, ih) = (ordering.free_index(t), ordering.free_index(h));
            if let Some(i) = it {
                m.add(i, i, k);
            }
            if let Some(j) = ih {
                m.add(j, j, k);
            }
            if let (Some(i), Some(j)) = (it, ih) {
                m.add(i, j, -k);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn log_det(&self) -> T {
        self.factor.log_det()
    }

    /// `log Z = ((N-1)/2) log 2 pi - (1/2) log det`.
    pub fn log_partition(&self) -> T {
        let half = T::of(0.5);
        half * T::of_usize(self.dim()) * T::TAU().ln() - half * self.log_det()
    }

    /// Exact draw of the pinned height field: `phi = L^{-T} z`, `z` standard normal.
    pub fn sample_phi<R: Rng + ?Sized>(&self, rng: &mut R) -> HeightField<T> {
        let mut z: Vec<T> = (0..self.dim())
            .map(|_| T::of(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        self.factor.backward(&mut z);
        let mut phi = vec![T::zero(); self.dim() + 1];
        for (p, v) in z.into_iter().enumerate() {
            phi[self.ordering.site_at[p + 1]] = v;
        }
        HeightField::pinned(phi)
    }

    /// Gradient configuration drawn from the conditional law given `kappa`.
    pub fn sample_eta<R: Rng + ?Sized>(&self, g: &TorusGeometry, rng: &mut R) -> GradientConfig<T> {
        gradient_of(&self.sample_phi(rng), g)
    }

    /// Exact `Var(eta_b)` from the inverse precision.
    pub fn bond_variance(&self, g: &TorusGeometry, bond: usize) -> T {
        let (t, h) = g.endpoints(bond);
        let mut v = vec![T::zero(); self.dim()];
        if let Some(i) = self.ordering.free_index(h) {
            v[i] += T::one();
        }
        if let Some(i) = self.ordering.free_index(t) {
            v[i] -= T::one();
        }
        self.factor.inverse_quadratic_form(&v)
    }
}

/// Precision over `(phi_{x != 0}, S, T)` with `eta_b = grad_b phi + S / L^2`
/// on horizontal and `+ T / L^2` on vertical bonds, so `S` and `T` are the
/// horizontal and vertical windings.
#[derive(Debug, Clone)]
pub struct StarPrecision<T> {
    factor: DenseCholesky<T>,
}

impl<T: Real> StarPrecision<T> {
    pub fn new(g: &TorusGeometry, kappa: &CouplingConfig<T>) -> Result<Self> {
        Self::with_windings(g, kappa, true)
    }

    /// With `windings = false` the `S, T` coordinates are pinned to zero and the
    /// matrix reduces to the pinned Laplacian.
    pub fn with_windings(g: &TorusGeometry, kappa: &CouplingConfig<T>, windings: bool) -> Result<Self> {
        check_kappa(g, kappa)?;
        let n_free = g.num_sites() - 1;
        let n = if windings { n_free + 2 } else { n_free };
        let mut a = vec![T::zero(); n * n];
        let inv_area = T::one() / T::of_usize(g.num_sites());
        for (b, &k) in kappa.values().iter().enumerate() {
            let (t, h) = g.endpoints(b);
            // Row vector of eta_b in these coordinates.
            let mut coeffs: Vec<(usize, T)> = Vec::with_capacity(3);
            if h != 0 {
                coeffs.push((h - 1, T::one()));
            }
            if t != 0 {
                coeffs.push((t - 1, -T::one()));
            }
            if windings {
                let w = match g.direction(b) {
                    Direction::Horizontal => n_free,
                    Direction::Vertical => n_free + 1,
                };
                coeffs.push((w, inv_area));
            }
            for &(i, ci) in &coeffs {
                for &(j, cj) in &coeffs {
                    a[i * n + j] += k * ci * cj;
                }
            }
        }
        Ok(StarPrecision {
            factor: DenseCholesky::factor(n, a)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn log_det(&self) -> T {
        self.factor.log_det()
    }

    /// `log Z* = (dim/2) log 2 pi - (1/2) log det`, `dim = N + 1`.
    pub fn log_partition(&self) -> T {
        let half = T::of(0.5);
        half * T::of_usize(self.dim()) * T::TAU().ln() - half * self.log_det()
    }
}

/// `log Z_(kappa)` of the pinned gradient measure.
pub fn log_partition<T: Real>(kappa: &CouplingConfig<T>, g: &TorusGeometry) -> Result<T> {
    Ok(PinnedPrecision::new(g, kappa)?.log_partition())
}

/// `log Z*_(kappa)` of the curl-free measure with free windings.
pub fn log_partition_star<T: Real>(kappa: &CouplingConfig<T>, g: &TorusGeometry) -> Result<T> {
    Ok(StarPrecision::new(g, kappa)?.log_partition())
}

/// One exact draw of `eta` given `kappa`.
pub fn sample_eta<T: Real, R: Rng + ?Sized>(
    kappa: &CouplingConfig<T>,
    g: &TorusGeometry,
    rng: &mut R,
) -> Result<GradientConfig<T>> {
    Ok(PinnedPrecision::new(g, kappa)?.sample_eta(g, rng))
}

/// Gaussian energy per bond, `E sum_b kappa_b eta_b^2 / (2 |B|) = (N - 1) / (2 |B|)`,
/// for any coupling (the precision has `N - 1` degrees of freedom).
pub fn energy_per_bond(g: &TorusGeometry) -> f64 {
    (g.num_sites() as f64 - 1.0) / (2.0 * g.num_bonds() as f64)
}

/// `Var(Y_m)` for `Y_m = phi(m e_1) - phi(0)` under the unit-stiffness gradient
/// measure, by the momentum sum `L^{-2} sum_{k != 0} |1 - e^{i m k_1}|^2 / D(k)`.
pub fn line_variance(side: usize, m: usize) -> f64 {
    let l = side as f64;
    let mut acc = 0.0;
    for n1 in 0..side {
        for n2 in 0..side {
            if n1 == 0 && n2 == 0 {
                continue;
            }
            let k1 = std::f64::consts::TAU * n1 as f64 / l;
            let k2 = std::f64::consts::TAU * n2 as f64 / l;
            let d = 4.0 * (k1 / 2.0).sin().powi(2) + 4.0 * (k2 / 2.0).sin().powi(2);
            acc += 4.0 * (m as f64 * k1 / 2.0).sin().powi(2) / d;
        }
    }
    acc / (l * l)
}

/// Same variance with free windings: adds `m^2 / (2 L^2)`.
pub fn line_variance_star(side: usize, m: usize) -> f64 {
    line_variance(side, m) + (m * m) as f64 / (2.0 * (side * side) as f64)
}
