//! Bond and site fields on the torus, their constraint checks, and the flat
//! text format used to exchange them.
//!
//! ```text
//! L=4 kind=eta tag=full
//! 0 0.125
//! 1 -0.5
//! ...
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{Direction, TorusGeometry};

/// Absolute tolerance for curl and winding residuals of loaded configurations.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Which a-priori space a gradient configuration lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    /// Curl free with zero windings: a true gradient.
    Full,
    /// Curl free on every plaquette; windings unconstrained.
    Star,
}

impl SpaceTag {
    fn as_str(self) -> &'static str {
        match self {
            SpaceTag::Full => "full",
            SpaceTag::Star => "star",
        }
    }
}

/// Site field pinned to zero at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField<T> {
    phi: Vec<T>,
}

impl<T: Real> HeightField<T> {
    /// Pins an arbitrary site field by subtracting its value at the origin.
    pub fn pinned(mut phi: Vec<T>) -> Self {
        if let Some(&origin) = phi.first() {
            for v in phi.iter_mut() {
                *v -= origin;
            }
            phi[0] = T::zero();
        }
        HeightField { phi }
    }

    /// Field with `phi[0] = 0` prepended to the free coordinates.
    pub fn from_free(free: &[T]) -> Self {
        let mut phi = Vec::with_capacity(free.len() + 1);
        phi.push(T::zero());
        phi.extend_from_slice(free);
        HeightField { phi }
    }

    pub fn values(&self) -> &[T] {
        &self.phi
    }

    pub fn gradient(&self, g: &TorusGeometry) -> GradientConfig<T> {
        gradient_of(self, g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientConfig<T> {
    eta: Vec<T>,
    tag: SpaceTag,
}

impl<T: Real> GradientConfig<T> {
    /// Wraps raw bond values without checking constraints.
    pub fn from_raw(eta: Vec<T>, tag: SpaceTag) -> Self {
        GradientConfig { eta, tag }
    }

    /// Wraps bond values and checks them against the tag.
    pub fn checked(g: &TorusGeometry, eta: Vec<T>, tag: SpaceTag) -> Result<Self> {
        let c = GradientConfig { eta, tag };
        c.validate(g, T::of(CONSTRAINT_TOL))?;
        Ok(c)
    }

    pub fn zeros(g: &TorusGeometry) -> Self {
        GradientConfig {
            eta: vec![T::zero(); g.num_bonds()],
            tag: SpaceTag::Full,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.eta
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.eta
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    /// `eta_b1 + eta_b2 - eta_b3 - eta_b4` around a plaquette.
    pub fn curl(&self, g: &TorusGeometry, plaquette: usize) -> T {
        let [b, r, t, l] = g.plaquettes()[plaquette].bonds;
        self.eta[b] + self.eta[r] - self.eta[t] - self.eta[l]
    }

    pub fn max_abs_curl(&self, g: &TorusGeometry) -> T {
        (0..g.plaquettes().len())
            .map(|q| self.curl(g, q).abs())
            .fold(T::zero(), T::max)
    }

    /// Sums of `eta` over all horizontal and over all vertical bonds.
    pub fn windings(&self) -> (T, T) {
        let mut hor = T::zero();
        let mut vert = T::zero();
        for pair in self.eta.chunks_exact(2) {
            hor += pair[0];
            vert += pair[1];
        }
        (hor, vert)
    }

    pub fn validate(&self, g: &TorusGeometry, tol: T) -> Result<()> {
        if self.eta.len() != g.num_bonds() {
            return Err(Error::Constraint(format!(
                "expected {} bond values, got {}",
                g.num_bonds(),
                self.eta.len()
            )));
        }
        let curl = self.max_abs_curl(g);
        if !(curl <= tol) {
            return Err(Error::Constraint(format!("max |curl| = {curl} exceeds {tol}")));
        }
        if self.tag == SpaceTag::Full {
            let (h, v) = self.windings();
            if !(h.abs() <= tol && v.abs() <= tol) {
                return Err(Error::Constraint(format!(
                    "windings ({h}, {v}) nonzero for a full-space configuration"
                )));
            }
        }
        Ok(())
    }

    /// Projection onto zero windings: subtract the mean over each orientation.
    pub fn project_full(&self) -> Self {
        let (h, v) = self.windings();
        let n = T::of_usize(self.eta.len() / 2);
        let eta = self
            .eta
            .iter()
            .enumerate()
            .map(|(b, &e)| if b % 2 == 0 { e - h / n } else { e - v / n })
            .collect();
        GradientConfig {
            eta,
            tag: SpaceTag::Full,
        }
    }
}

/// `eta_b = phi(head) - phi(tail)` on every bond.
pub fn gradient_of<T: Real>(phi: &HeightField<T>, g: &TorusGeometry) -> GradientConfig<T> {
    let eta = (0..g.num_bonds())
        .map(|b| {
            let (t, h) = g.endpoints(b);
            phi.phi[h] - phi.phi[t]
        })
        .collect();
    GradientConfig {
        eta,
        tag: SpaceTag::Full,
    }
}

/// Strictly positive stiffness per bond.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig<T> {
    kappa: Vec<T>,
}

impl<T: Real> CouplingConfig<T> {
    pub fn new(kappa: Vec<T>) -> Result<Self> {
        if let Some((b, k)) = kappa
            .iter()
            .enumerate()
            .find(|(_, &k)| !(k > T::zero() && k.is_finite()))
        {
            return Err(Error::InvalidCoupling(format!("kappa[{b}] = {k} is not positive")));
        }
        Ok(CouplingConfig { kappa })
    }

    pub fn homogeneous(g: &TorusGeometry, kappa: T) -> Result<Self> {
        Self::new(vec![kappa; g.num_bonds()])
    }

    /// Two-state configuration from a per-bond "is ordered" mask.
    pub fn two_state(ordered: &[bool], kappa_o: T, kappa_d: T) -> Result<Self> {
        Self::new(
            ordered
                .iter()
                .map(|&o| if o { kappa_o } else { kappa_d })
                .collect(),
        )
    }

    pub fn values(&self) -> &[T] {
        &self.kappa
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.kappa.iter().map(|&k| k * factor).collect())
    }

    pub fn count_equal(&self, value: T) -> usize {
        self.kappa.iter().filter(|&&k| k == value).count()
    }

    pub fn is_two_state(&self, kappa_o: T, kappa_d: T) -> bool {
        self.kappa.iter().all(|&k| k == kappa_o || k == kappa_d)
    }
}

/// Contents of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigData<T> {
    Eta(GradientConfig<T>),
    Kappa(CouplingConfig<T>),
}

pub fn write_eta<T: Real>(g: &TorusGeometry, eta: &GradientConfig<T>) -> String {
    write_values(g.side(), "eta", eta.tag().as_str(), eta.values())
}

pub fn write_kappa<T: Real>(g: &TorusGeometry, kappa: &CouplingConfig<T>) -> String {
    write_values(g.side(), "kappa", SpaceTag::Full.as_str(), kappa.values())
}

fn write_values<T: Real>(side: usize, kind: &str, tag: &str, values: &[T]) -> String {
    let mut out = format!("L={side} kind={kind} tag={tag}\n");
    for (b, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{b} {:.16e}", v.to_f64_lossy());
    }
    out
}

/// Parses a configuration file; eta data are checked against their tag.
pub fn parse_config<T: Real>(text: &str) -> Result<(TorusGeometry, ConfigData<T>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };

    let mut side = None;
    let mut kind = None;
    let mut tag = None;
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| perr(hline, format!("malformed header field '{field}'")))?;
        match k {
            "L" => side = Some(v.parse::<usize>().map_err(|e| perr(hline, e.to_string()))?),
            "kind" => kind = Some(v.to_string()),
            "tag" => {
                tag = Some(match v {
                    "full" => SpaceTag::Full,
                    "star" => SpaceTag::Star,
                    _ => return Err(perr(hline, format!("unknown tag '{v}'"))),
                })
            }
            _ => return Err(perr(hline, format!("unknown header key '{k}'"))),
        }
    }
    let side = side.ok_or_else(|| perr(hline, "header lacks L=".into()))?;
    let kind = kind.ok_or_else(|| perr(hline, "header lacks kind=".into()))?;
    let tag = tag.unwrap_or(SpaceTag::Full);
    let g = TorusGeometry::new(side)?;

    let mut values: Vec<Option<T>> = vec![None; g.num_bonds()];
    for (ln, line) in lines {
        let mut it = line.split_whitespace();
        let (Some(idx), Some(val), None) = (it.next(), it.next(), it.next()) else {
            return Err(perr(ln, "expected '<bond_index> <value>'".into()));
        };
        let idx: usize = idx.parse().map_err(|_| perr(ln, format!("bad bond index '{idx}'")))?;
        let val: f64 = val.parse().map_err(|_| perr(ln, format!("bad value '{val}'")))?;
        let slot = values
            .get_mut(idx)
            .ok_or_else(|| perr(ln, format!("bond index {idx} out of range")))?;
        if slot.is_some() {
            return Err(perr(ln, format!("bond {idx} given twice")));
        }
        *slot = Some(T::of(val));
    }
    let values: Vec<T> = values
        .into_iter()
        .enumerate()
        .map(|(b, v)| v.ok_or_else(|| Error::Parse { line: 0, msg: format!("bond {b} missing") }))
        .collect::<Result<_>>()?;

    let data = match kind.as_str() {
        "eta" => ConfigData::Eta(GradientConfig::checked(&g, values, tag)?),
        "kappa" => ConfigData::Kappa(CouplingConfig::new(values)?),
        other => return Err(perr(hline, format!("unknown kind '{other}'"))),
    };
    Ok((g, data))
}

/// Sum of `eta` over horizontal or vertical bonds of a set.
pub fn directional_sum<T: Real>(
    g: &TorusGeometry,
    eta: &GradientConfig<T>,
    bonds: &[usize],
    dir: Direction,
) -> T {
    bonds
        .iter()
        .filter(|&&b| g.direction(b) == dir)
        .map(|&b| eta.values()[b])
        .sum()
}
