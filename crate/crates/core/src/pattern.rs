use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::config::CouplingConfig;
use crate::error::Error;
use crate::params::ModelParams;
use crate::scalar::Real;
use crate::torus::{Direction, TorusGeometry};

/// The six periodic arrangements of ordered / disordered bonds obtained by
/// reflecting one plaquette over the whole torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternId {
    O,
    D,
    UO,
    UD,
    MP,
    MA,
}

impl PatternId {
    pub const ALL: [PatternId; 6] = [
        PatternId::O,
        PatternId::D,
        PatternId::UO,
        PatternId::UD,
        PatternId::MP,
        PatternId::MA,
    ];

    pub const INHOMOGENEOUS: [PatternId; 4] =
        [PatternId::UO, PatternId::UD, PatternId::MP, PatternId::MA];

    /// Pattern with the two species exchanged.
    pub fn swapped(self) -> Self {
        match self {
            PatternId::O => PatternId::D,
            PatternId::D => PatternId::O,
            PatternId::UO => PatternId::UD,
            PatternId::UD => PatternId::UO,
            PatternId::MP => PatternId::MP,
            PatternId::MA => PatternId::MA,
        }
    }

    /// Whether the bond carries the ordered stiffness in this pattern.
    pub fn is_ordered(self, g: &TorusGeometry, bond: usize) -> bool {
        let hor = g.direction(bond) == Direction::Horizontal;
        let even = g.is_even(bond);
        match self {
            PatternId::O => true,
            PatternId::D => false,
            PatternId::UO => hor || even,
            PatternId::UD => !(hor || even),
            PatternId::MP => hor,
            PatternId::MA => even,
        }
    }

    /// Number of ordered bonds per site (the torus has `L^2` sites).
    pub fn ordered_per_site<T: Real>(self) -> T {
        T::of(match self {
            PatternId::O => 2.0,
            PatternId::D => 0.0,
            PatternId::UO => 1.5,
            PatternId::UD => 0.5,
            PatternId::MP | PatternId::MA => 1.0,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PatternId::O => "O",
            PatternId::D => "D",
            PatternId::UO => "UO",
            PatternId::UD => "UD",
            PatternId::MP => "MP",
            PatternId::MA => "MA",
        }
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown pattern '{s}' (expected O, D, UO, UD, MP or MA)")))
    }
}

/// Periodic coupling configuration realizing a pattern.
pub fn pattern_coupling<T: Real>(
    pattern: PatternId,
    g: &TorusGeometry,
    m: &ModelParams<T>,
) -> CouplingConfig<T> {
    let kappa = (0..g.num_bonds())
        .map(|b| {
            if pattern.is_ordered(g, b) {
                m.kappa_o
            } else {
                m.kappa_d
            }
        })
        .collect();
    CouplingConfig::new(kappa).expect("model stiffnesses are positive")
}
