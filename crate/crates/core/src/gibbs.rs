//! Extended Gibbs sampler on `(eta, kappa)`.
//!
//! One sweep draws `eta | kappa` exactly from the Gaussian gradient measure
//! and then every `kappa_b | eta_b` independently. Chains are driven by
//! ChaCha8 with one stream per chain, so runs are reproducible from
//! `(seed, stream)` regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CouplingConfig, GradientConfig};
use crate::error::{Error, Result};
use crate::gaussfield::{PinnedPrecision, SiteOrdering};
use crate::params::ModelParams;
use crate::scalar::{pairwise_sum, Real};
use crate::torus::{Direction, TorusGeometry};

/// `P(kappa_b = kappa_O | eta_b)`, evaluated as a logistic in log space.
pub fn conditional_kappa_prob<T: Real>(eta: T, m: &ModelParams<T>) -> T {
    if m.p <= T::zero() {
        return T::zero();
    }
    if m.p >= T::one() {
        return T::one();
    }
    let half = T::of(0.5);
    let logit = m.p.ln() - (T::one() - m.p).ln() - half * (m.kappa_o - m.kappa_d) * eta * eta;
    if logit >= T::zero() {
        T::one() / (T::one() + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (T::one() + e)
    }
}

/// Starting coupling of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Ordered,
    Disordered,
}

impl Init {
    pub const BOTH: [Init; 2] = [Init::Ordered, Init::Disordered];

    pub fn name(self) -> &'static str {
        match self {
            Init::Ordered => "ordered",
            Init::Disordered => "disordered",
        }
    }
}

impl std::str::FromStr for Init {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ordered" | "o" => Ok(Init::Ordered),
            "disordered" | "d" => Ok(Init::Disordered),
            _ => Err(Error::Invalid(format!("unknown init '{s}' (expected ordered|disordered)"))),
        }
    }
}

/// Rectangular block of sites `[x0, x0 + w) x [y0, y0 + h)` (coordinates mod `L`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteBox {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl SiteBox {
    /// The centred `L/2 x L/2` box.
    pub fn centered(g: &TorusGeometry) -> Self {
        let l = g.side();
        SiteBox { x0: l / 4, y0: l / 4, w: l / 2, h: l / 2 }
    }

    pub fn full(g: &TorusGeometry) -> Self {
        SiteBox { x0: 0, y0: 0, w: g.side(), h: g.side() }
    }

    /// Bonds with both endpoints in the box. A box spanning a full period
    /// in some direction also contains the wrapping bonds in that direction.
    pub fn bonds(&self, g: &TorusGeometry) -> Result<Vec<usize>> {
        let l = g.side();
        if self.w == 0 || self.h == 0 || self.w > l || self.h > l || self.x0 >= l || self.y0 >= l {
            return Err(Error::EmptyRegion);
        }
        let mut out = Vec::new();
        for dy in 0..self.h {
            for dx in 0..self.w {
                let x = (self.x0 + dx) % l;
                let y = (self.y0 + dy) % l;
                let site = y * l + x;
                if dx + 1 < self.w || self.w == l {
                    out.push(2 * site + Direction::Horizontal.index());
                }
                if dy + 1 < self.h || self.h == l {
                    out.push(2 * site + Direction::Vertical.index());
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok(out)
    }
}

/// `U_box = |B_box|^{-1} sum_{b in B_box} eta_b e_{dir(b)}`.
pub fn empirical_tilt<T: Real>(eta: &GradientConfig<T>, g: &TorusGeometry, region: &SiteBox) -> Result<[T; 2]> {
    let bonds = region.bonds(g)?;
    let mut parts = [Vec::new(), Vec::new()];
    for &b in &bonds {
        parts[g.direction(b).index()].push(eta.values()[b]);
    }
    let n = T::of_usize(bonds.len());
    Ok([pairwise_sum(&parts[0]) / n, pairwise_sum(&parts[1]) / n])
}

/// Per-sweep observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord<T> {
    pub sweep: usize,
    /// Fraction of bonds at `kappa_O`.
    pub r_ord: T,
    /// Empirical tilt over the centred `L/2` box.
    pub tilt: [T; 2],
    /// Gaussian energy per bond, `|B|^{-1} sum_b kappa_b eta_b^2 / 2`.
    pub mean_energy: T,
    /// `|B|^{-1} sum_b kappa_b eta_b^2`.
    pub kappa_eta_sq: T,
    pub n_ordered: usize,
}

/// State of one chain.
#[derive(Debug, Clone)]
pub struct Chain<T> {
    geometry: TorusGeometry,
    params: ModelParams<T>,
    ordering: SiteOrdering,
    region: SiteBox,
    ordered: Vec<bool>,
    eta: GradientConfig<T>,
    rng: ChaCha8Rng,
    sweeps: usize,
}

impl<T: Real> Chain<T> {
    /// Starts with `kappa` constant at the chosen well and `eta` drawn once
    /// from its conditional law.
    pub fn new(params: ModelParams<T>, side: usize, init: Init, seed: u64, stream: u64) -> Result<Self> {
        let geometry = TorusGeometry::new(side)?;
        let ordering = SiteOrdering::folded(&geometry);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let ordered = vec![init == Init::Ordered; geometry.num_bonds()];
        let region = SiteBox::centered(&geometry);
        let mut chain = Chain {
            eta: GradientConfig::zeros(&geometry),
            geometry,
            params,
            ordering,
            region,
            ordered,
            rng,
            sweeps: 0,
        };
        chain.draw_eta()?;
        Ok(chain)
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn eta(&self) -> &GradientConfig<T> {
        &self.eta
    }

    pub fn coupling(&self) -> Result<CouplingConfig<T>> {
        CouplingConfig::two_state(&self.ordered, self.params.kappa_o, self.params.kappa_d)
    }

    pub fn ordered(&self) -> &[bool] {
        &self.ordered
    }

    fn draw_eta(&mut self) -> Result<()> {
        let kappa = self.coupling()?;
        let prec = PinnedPrecision::with_ordering(&self.geometry, &kappa, self.ordering.clone())?;
        self.eta = prec.sample_eta(&self.geometry, &mut self.rng);
        Ok(())
    }

    /// One full sweep: `kappa | eta` on every bond, then `eta | kappa`.
    pub fn sweep(&mut self) -> Result<()> {
        for (b, o) in self.ordered.iter_mut().enumerate() {
            let q = conditional_kappa_prob(self.eta.values()[b], &self.params);
            let u: f64 = self.rng.random();
            *o = T::of(u) < q;
        }
        self.draw_eta()?;
        self.sweeps += 1;
        Ok(())
    }

    pub fn observe(&self) -> Result<ObservableRecord<T>> {
        let n_ordered = self.ordered.iter().filter(|&&o| o).count();
        let nb = T::of_usize(self.geometry.num_bonds());
        let ke: Vec<T> = self
            .eta
            .values()
            .iter()
            .zip(&self.ordered)
            .map(|(&e, &o)| if o { self.params.kappa_o } else { self.params.kappa_d } * e * e)
            .collect();
        let kappa_eta_sq = pairwise_sum(&ke) / nb;
        Ok(ObservableRecord {
            sweep: self.sweeps,
            r_ord: T::of_usize(n_ordered) / nb,
            tilt: empirical_tilt(&self.eta, &self.geometry, &self.region)?,
            mean_energy: T::of(0.5) * kappa_eta_sq,
            kappa_eta_sq,
            n_ordered,
        })
    }
}

/// Runs `n_sweeps` sweeps and records every sweep after the first `burn_in`.
pub fn run_chain<T: Real>(
    params: ModelParams<T>,
    side: usize,
    init: Init,
    n_sweeps: usize,
    burn_in: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<ObservableRecord<T>>> {
    if n_sweeps <= burn_in {
        return Err(Error::Invalid(format!(
            "sweeps ({n_sweeps}) must exceed burn-in ({burn_in})"
        )));
    }
    let mut chain = Chain::new(params, side, init, seed, stream)?;
    let mut out = Vec::with_capacity(n_sweeps - burn_in);
    for s in 0..n_sweeps {
        chain.sweep()?;
        if s >= burn_in {
            out.push(chain.observe()?);
        }
    }
    Ok(out)
}

/// Sample mean and batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

/// Batch means over `batches` contiguous blocks (fewer if the series is short).
pub fn batch_means(series: &[f64], batches: usize) -> Estimate {
    let n = series.len();
    if n == 0 {
        return Estimate { mean: f64::NAN, se: f64::NAN };
    }
    let mean = pairwise_sum(series) / n as f64;
    let k = batches.min(n).max(1);
    let size = n / k;
    if k < 2 || size == 0 {
        return Estimate { mean, se: f64::NAN };
    }
    let means: Vec<f64> = (0..k)
        .map(|i| pairwise_sum(&series[i * size..(i + 1) * size]) / size as f64)
        .collect();
    let mbar = means.iter().sum::<f64>() / k as f64;
    let var = means.iter().map(|m| (m - mbar).powi(2)).sum::<f64>() / (k - 1) as f64;
    Estimate { mean, se: (var / k as f64).sqrt() }
}

pub const DEFAULT_BATCHES: usize = 32;

/// Sweep counts for a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanProtocol {
    pub burn_in: usize,
    pub measure: usize,
    pub seeds: Vec<u64>,
}

impl Default for ScanProtocol {
    fn default() -> Self {
        ScanProtocol { burn_in: 1000, measure: 10_000, seeds: vec![1] }
    }
}

/// One chain of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub p: f64,
    pub init: Init,
    pub seed: u64,
    pub r_ord: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub side: usize,
    pub kappa_o: f64,
    pub kappa_d: f64,
    pub grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
    /// `chi_L(p)` from ordered and disordered starts, averaged over seeds.
    pub chi_ordered: Vec<f64>,
    pub chi_disordered: Vec<f64>,
    /// Average over both starts.
    pub chi: Vec<f64>,
    /// Midpoint of the grid interval with the largest increase of `chi`.
    pub jump: Option<f64>,
    /// Smallest interval holding every grid point where the two starts
    /// disagree by more than `0.5`.
    pub hysteresis: Option<(f64, f64)>,
}

/// Stream id of a chain inside a scan: distinct for every `(p, init)`.
fn scan_stream(p_index: usize, init: Init) -> u64 {
    2 * p_index as u64 + matches!(init, Init::Disordered) as u64
}

/// Runs one chain per `(p, init, seed)` in parallel.
pub fn scan_p(
    kappa_o: f64,
    kappa_d: f64,
    grid: &[f64],
    side: usize,
    protocol: &ScanProtocol,
) -> Result<ScanReport> {
    if grid.is_empty() || protocol.seeds.is_empty() || protocol.measure == 0 {
        return Err(Error::Invalid("scan needs a non-empty grid, seeds and measurement sweeps".into()));
    }
    for &p in grid {
        ModelParams::new(p, kappa_o, kappa_d)?;
    }
    TorusGeometry::new(side)?;
    let jobs: Vec<(usize, Init, u64)> = (0..grid.len())
        .flat_map(|i| Init::BOTH.into_iter().flat_map(move |init| protocol.seeds.iter().map(move |&s| (i, init, s))))
        .collect();
    let points: Vec<ScanPoint> = jobs
        .par_iter()
        .map(|&(i, init, seed)| {
            let m = ModelParams::new(grid[i], kappa_o, kappa_d)?;
            let recs = run_chain(
                m,
                side,
                init,
                protocol.burn_in + protocol.measure,
                protocol.burn_in,
                seed,
                scan_stream(i, init),
            )?;
            let r: Vec<f64> = recs.iter().map(|r| r.r_ord).collect();
            Ok(ScanPoint { p: grid[i], init, seed, r_ord: batch_means(&r, DEFAULT_BATCHES) })
        })
        .collect::<Result<_>>()?;

    let avg = |i: usize, init: Option<Init>| {
        let v: Vec<f64> = points
            .iter()
            .filter(|q| q.p == grid[i] && init.is_none_or(|x| x == q.init))
            .map(|q| q.r_ord.mean)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let chi_ordered: Vec<f64> = (0..grid.len()).map(|i| avg(i, Some(Init::Ordered))).collect();
    let chi_disordered: Vec<f64> = (0..grid.len()).map(|i| avg(i, Some(Init::Disordered))).collect();
    let chi: Vec<f64> = (0..grid.len()).map(|i| avg(i, None)).collect();

    let jump = (1..grid.len())
        .max_by(|&a, &b| (chi[a] - chi[a - 1]).total_cmp(&(chi[b] - chi[b - 1])))
        .map(|i| 0.5 * (grid[i] + grid[i - 1]));
    let split: Vec<f64> = (0..grid.len())
        .filter(|&i| (chi_ordered[i] - chi_disordered[i]).abs() > 0.5)
        .map(|i| grid[i])
        .collect();
    let hysteresis = match (split.iter().cloned().reduce(f64::min), split.iter().cloned().reduce(f64::max)) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(ScanReport {
        side,
        kappa_o,
        kappa_d,
        grid: grid.to_vec(),
        points,
        chi_ordered,
        chi_disordered,
        chi,
        jump,
        hysteresis,
    })
}

/// Tail frequencies of the centred-box tilt under the homogeneous measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltTail {
    pub side: usize,
    pub kappa: f64,
    pub draws: usize,
    pub box_bonds: usize,
    pub rows: Vec<TiltTailRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltTailRow {
    pub delta: f64,
    pub frequency: f64,
    /// `4 exp(-kappa delta^2 |B_box| / 8)`.
    pub bound: f64,
    pub holds: bool,
}

/// Draws `eta` exactly `draws` times at constant stiffness `kappa` and
/// records how often `|U_box| >= delta`.
pub fn tilt_tail(side: usize, kappa: f64, draws: usize, deltas: &[f64], seed: u64) -> Result<TiltTail> {
    let g = TorusGeometry::new(side)?;
    let coupling = CouplingConfig::homogeneous(&g, kappa)?;
    let prec = PinnedPrecision::new(&g, &coupling)?;
    let region = SiteBox::centered(&g);
    let nb = region.bonds(&g)?.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0usize; deltas.len()];
    for _ in 0..draws {
        let eta = prec.sample_eta(&g, &mut rng);
        let u = empirical_tilt(&eta, &g, &region)?;
        let norm = u[0].hypot(u[1]);
        for (h, &d) in hits.iter_mut().zip(deltas) {
            if norm >= d {
                *h += 1;
            }
        }
    }
    let rows = deltas
        .iter()
        .zip(&hits)
        .map(|(&delta, &h)| {
            let frequency = h as f64 / draws.max(1) as f64;
            let bound = 4.0 * (-kappa * delta * delta * nb as f64 / 8.0).exp();
            TiltTailRow { delta, frequency, bound, holds: frequency <= bound }
        })
        .collect();
    Ok(TiltTail { side, kappa, draws, box_bonds: nb, rows })
}
