//! Geometry of the even `L x L` lattice torus.
//!
//! Sites are indexed `y * L + x`. Bonds are positively oriented nearest-neighbour
//! edges indexed lexicographically by `(y, x, direction)` with the horizontal
//! bond first, so bond `2 * site + d` starts at `site` and points along `e_1`
//! (`d = 0`) or `e_2` (`d = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Direction::Horizontal => 0,
            Direction::Vertical => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Self {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

/// Elementary square, listed counterclockwise from its lower-left corner:
/// `[bottom, right, top, left]`. Its curl is `b + r - t - l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plaquette {
    pub corner: Site,
    pub bonds: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct TorusGeometry {
    side: usize,
    plaquettes: Vec<Plaquette>,
    dual: Vec<usize>,
}

impl TorusGeometry {
    /// Builds the torus. The side must be even and at least 2.
    pub fn new(side: usize) -> Result<Self> {
        if side < 2 || side % 2 != 0 {
            return Err(Error::OddSide(side));
        }
        let mut geom = TorusGeometry {
            side,
            plaquettes: Vec::with_capacity(side * side),
            dual: Vec::new(),
        };
        for y in 0..side {
            for x in 0..side {
                let corner = Site { x, y };
                let bottom = geom.bond_at(corner, Direction::Horizontal);
                let right = geom.bond_at(geom.shift(corner, 1, 0), Direction::Vertical);
                let top = geom.bond_at(geom.shift(corner, 0, 1), Direction::Horizontal);
                let left = geom.bond_at(corner, Direction::Vertical);
                geom.plaquettes.push(Plaquette {
                    corner,
                    bonds: [bottom, right, top, left],
                });
            }
        }
        geom.dual = (0..geom.num_bonds()).map(|b| geom.dual_of(b)).collect();
        Ok(geom)
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn num_sites(&self) -> usize {
        self.side * self.side
    }

    #[inline]
    pub fn num_bonds(&self) -> usize {
        2 * self.side * self.side
    }

    #[inline]
    pub fn site_index(&self, s: Site) -> usize {
        s.y * self.side + s.x
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        Site {
            x: index % self.side,
            y: index / self.side,
        }
    }

    /// Translates a site by `(dx, dy)` modulo `L`.
    #[inline]
    pub fn shift(&self, s: Site, dx: isize, dy: isize) -> Site {
        let l = self.side as isize;
        Site {
            x: (s.x as isize + dx).rem_euclid(l) as usize,
            y: (s.y as isize + dy).rem_euclid(l) as usize,
        }
    }

    #[inline]
    pub fn bond_at(&self, tail: Site, dir: Direction) -> usize {
        2 * self.site_index(tail) + dir.index()
    }

    #[inline]
    pub fn direction(&self, bond: usize) -> Direction {
        if bond % 2 == 0 {
            Direction::Horizontal
        } else {
            Direction::Vertical
        }
    }

    #[inline]
    pub fn tail(&self, bond: usize) -> Site {
        self.site(bond / 2)
    }

    #[inline]
    pub fn head(&self, bond: usize) -> Site {
        let t = self.tail(bond);
        match self.direction(bond) {
            Direction::Horizontal => self.shift(t, 1, 0),
            Direction::Vertical => self.shift(t, 0, 1),
        }
    }

    /// Site indices `(tail, head)` of a bond.
    #[inline]
    pub fn endpoints(&self, bond: usize) -> (usize, usize) {
        (bond / 2, self.site_index(self.head(bond)))
    }

    /// Even bonds: horizontal bonds on even rows and vertical bonds on even columns.
    #[inline]
    pub fn is_even(&self, bond: usize) -> bool {
        let t = self.tail(bond);
        match self.direction(bond) {
            Direction::Horizontal => t.y % 2 == 0,
            Direction::Vertical => t.x % 2 == 0,
        }
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn plaquette_at(&self, corner: Site) -> &Plaquette {
        &self.plaquettes[self.site_index(corner)]
    }

    /// The two plaquettes containing a bond.
    pub fn plaquettes_of(&self, bond: usize) -> [usize; 2] {
        let t = self.tail(bond);
        let below_or_left = match self.direction(bond) {
            Direction::Horizontal => self.shift(t, 0, -1),
            Direction::Vertical => self.shift(t, -1, 0),
        };
        [self.site_index(t), self.site_index(below_or_left)]
    }

    /// Image of each bond under duality: the dual torus is identified with the
    /// direct one through the half-lattice shift followed by the point
    /// reflection `x -> -x`, which makes the map an involution swapping
    /// horizontal and vertical bonds.
    pub fn dual_map(&self) -> &[usize] {
        &self.dual
    }

    fn dual_of(&self, bond: usize) -> usize {
        let t = self.tail(bond);
        let mirrored = self.shift(Site { x: 0, y: 0 }, -(t.x as isize), -(t.y as isize));
        self.bond_at(mirrored, self.direction(bond).other())
    }

    pub fn bonds_with<'a>(&'a self, dir: Direction) -> impl Iterator<Item = usize> + 'a {
        (0..self.num_bonds()).filter(move |&b| self.direction(b) == dir)
    }
}
