//! Reflections of the torus through planes of sites.
//!
//! Direct planes are the two columns (or rows) `{a, a + L/2}`; diagonal planes
//! are the two diagonals `u - v in {0, L/2}` (`+`) or `u + v in {0, L/2}` (`-`)
//! through an anchor site. Every map here is an isometric involution of the
//! torus; the second component of a diagonal plane is preserved as a set.

use serde::{Deserialize, Serialize};

use crate::config::{CouplingConfig, GradientConfig, HeightField};
use crate::scalar::Real;
use crate::torus::{Direction, Site, TorusGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReflectionKind {
    /// Plane perpendicular to the given axis (`Horizontal` = plane crossed by horizontal bonds).
    Direct(Direction),
    /// `(u, v) -> (v, u)` about the anchor; preserves bond orientations.
    DiagonalPlus,
    /// `(u, v) -> (-v, -u)` about the anchor; reverses every bond.
    DiagonalMinus,
}

#[derive(Debug, Clone)]
pub struct ReflectionPlane {
    kind: ReflectionKind,
    anchor: Site,
    site_map: Vec<usize>,
    bond_map: Vec<usize>,
    sign_map: Vec<i8>,
}

impl ReflectionPlane {
    pub fn new(g: &TorusGeometry, kind: ReflectionKind, anchor: Site) -> Self {
        let l = g.side() as isize;
        let (ax, ay) = (anchor.x as isize, anchor.y as isize);
        let reflect_site = |s: Site| -> Site {
            let (x, y) = (s.x as isize, s.y as isize);
            let (nx, ny) = match kind {
                ReflectionKind::Direct(Direction::Horizontal) => (2 * ax - x, y),
                ReflectionKind::Direct(Direction::Vertical) => (x, 2 * ay - y),
                ReflectionKind::DiagonalPlus => (ax + (y - ay), ay + (x - ax)),
                ReflectionKind::DiagonalMinus => (ax - (y - ay), ay - (x - ax)),
            };
            Site {
                x: nx.rem_euclid(l) as usize,
                y: ny.rem_euclid(l) as usize,
            }
        };

        let site_map: Vec<usize> = (0..g.num_sites())
            .map(|i| g.site_index(reflect_site(g.site(i))))
            .collect();

        let mut bond_map = Vec::with_capacity(g.num_bonds());
        let mut sign_map = Vec::with_capacity(g.num_bonds());
        for b in 0..g.num_bonds() {
            let tail = reflect_site(g.tail(b));
            let head = reflect_site(g.head(b));
            // The image joins `tail` and `head`; find which orientation it has.
            let forward = [Direction::Horizontal, Direction::Vertical]
                .into_iter()
                .map(|d| g.bond_at(tail, d))
                .find(|&c| g.endpoints(c) == (g.site_index(tail), g.site_index(head)));
            let (image, sign) = match forward {
                Some(c) => (c, 1),
                None => {
                    let c = [Direction::Horizontal, Direction::Vertical]
                        .into_iter()
                        .map(|d| g.bond_at(head, d))
                        .find(|&c| g.endpoints(c) == (g.site_index(head), g.site_index(tail)))
                        .expect("reflection maps bonds to bonds");
                    (c, -1)
                }
            };
            bond_map.push(image);
            sign_map.push(sign);
        }
        ReflectionPlane {
            kind,
            anchor,
            site_map,
            bond_map,
            sign_map,
        }
    }

    pub fn kind(&self) -> ReflectionKind {
        self.kind
    }

    pub fn anchor(&self) -> Site {
        self.anchor
    }

    pub fn bond_map(&self) -> &[usize] {
        &self.bond_map
    }

    pub fn sign_map(&self) -> &[i8] {
        &self.sign_map
    }

    pub fn site_map(&self) -> &[usize] {
        &self.site_map
    }

    /// `(theta eta)_b = sign_b * eta_{b'}`.
    pub fn reflect_eta<T: Real>(&self, eta: &GradientConfig<T>) -> GradientConfig<T> {
        let v = eta.values();
        let out = self
            .bond_map
            .iter()
            .zip(&self.sign_map)
            .map(|(&b, &s)| if s < 0 { -v[b] } else { v[b] })
            .collect();
        GradientConfig::from_raw(out, eta.tag())
    }

    /// `(theta kappa)_b = kappa_{b'}`.
    pub fn reflect_kappa<T: Real>(&self, kappa: &CouplingConfig<T>) -> CouplingConfig<T> {
        let v = kappa.values();
        CouplingConfig::new(self.bond_map.iter().map(|&b| v[b]).collect())
            .expect("permutation of positive values")
    }

    /// `phi'(x) = phi(theta x)`, re-pinned at the origin.
    pub fn reflect_phi<T: Real>(&self, phi: &HeightField<T>) -> HeightField<T> {
        let v = phi.values();
        HeightField::pinned(self.site_map.iter().map(|&s| v[s]).collect())
    }

    /// Reflects a bond-indexed mask (e.g. ordered / disordered flags).
    pub fn reflect_mask(&self, mask: &[bool]) -> Vec<bool> {
        self.bond_map.iter().map(|&b| mask[b]).collect()
    }
}

/// All direct and diagonal planes through every anchor site.
pub fn all_planes(g: &TorusGeometry) -> Vec<ReflectionPlane> {
    let kinds = [
        ReflectionKind::Direct(Direction::Horizontal),
        ReflectionKind::Direct(Direction::Vertical),
        ReflectionKind::DiagonalPlus,
        ReflectionKind::DiagonalMinus,
    ];
    let mut out = Vec::new();
    for kind in kinds {
        for s in 0..g.num_sites() {
            out.push(ReflectionPlane::new(g, kind, g.site(s)));
        }
    }
    out
}
