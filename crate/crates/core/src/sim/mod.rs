//! Event-driven simulation of the three-state exclusion process.

mod lattice;
pub mod sumtree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{marginal_of_density, ModelParams, StationaryMarginal};

pub use lattice::{apply_move, bond_rate, LatticeState, Trajectory, FROZEN_SITES};

/// Upper bound on the propagation speed used to size the lattice.
pub const SPEED_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Sites per macroscopic unit.
    pub n: usize,
    pub t_end: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// Extra lattice beyond the influence cone, as a fraction of it.
    /// Negative values cut into the cone and may trip the breach guard.
    pub margin: f64,
    pub seed: u64,
    /// Macroscopic snapshot times; empty means just `t_end`.
    pub snapshot_times: Vec<f64>,
    pub replicas: usize,
    pub bin_width: f64,
    /// Half-width of the observation window (macroscopic).
    pub window: f64,
    /// Bonds, as offsets from the origin bond, whose integrated current is
    /// recorded.
    pub current_bonds: Vec<i64>,
}

impl SimConfig {
    pub fn new(params: ModelParams, n: usize, t_end: f64, u_minus: f64, u_plus: f64) -> Self {
        Self {
            params,
            n,
            t_end,
            u_minus,
            u_plus,
            margin: 0.25,
            seed: 0,
            snapshot_times: Vec::new(),
            replicas: 1,
            bin_width: 0.02,
            window: 1.0,
            current_bonds: vec![0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.require_attractive()?;
        for (name, u) in [("u_minus", self.u_minus), ("u_plus", self.u_plus)] {
            if !(-1.0..=1.0).contains(&u) {
                return Err(Error::domain(format!("{name} = {u} outside [-1, 1]")));
            }
        }
        if self.n < 10 {
            return Err(Error::domain(format!("N = {} must be at least 10", self.n)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.margin > -1.0 && self.margin.is_finite()) {
            return Err(Error::domain("margin must exceed -1"));
        }
        if self.replicas == 0 {
            return Err(Error::domain("replicas must be at least 1"));
        }
        if !(self.bin_width > 0.0 && self.window > 0.0) {
            return Err(Error::domain("bin width and window must be positive"));
        }
        if self.bin_width > 2.0 * self.window {
            return Err(Error::domain("bin width exceeds the observation window"));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end).contains(&t) {
                return Err(Error::domain(format!("snapshot time {t} outside [0, t_end]")));
            }
        }
        let layout = Layout::new(self);
        for &off in &self.current_bonds {
            if off <= -(layout.half_window as i64) || off >= layout.half_window as i64 {
                return Err(Error::domain(format!("current bond offset {off} outside the window")));
            }
        }
        Ok(())
    }

    /// Snapshot times sorted and deduplicated.
    pub fn snapshots(&self) -> Vec<f64> {
        let mut ts = if self.snapshot_times.is_empty() { vec![self.t_end] } else { self.snapshot_times.clone() };
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self)
    }
}

/// Lattice geometry derived from a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub len: usize,
    pub origin: usize,
    /// Sites in each half of the observation window.
    pub half_window: usize,
    pub sites_per_bin: usize,
    /// Sites between the frozen block and the window on each side.
    pub margin_sites: usize,
}

impl Layout {
    fn new(cfg: &SimConfig) -> Self {
        let n = cfg.n as f64;
        let spb = ((cfg.bin_width * n).round() as usize).max(1);
        let half_window = ((cfg.window * n / spb as f64).ceil() as usize).max(1) * spb;
        let margin_sites = (SPEED_BOUND * n * cfg.t_end * (1.0 + cfg.margin)).ceil() as usize;
        let first = FROZEN_SITES + margin_sites;
        Self {
            len: 2 * (FROZEN_SITES + margin_sites + half_window),
            origin: first + half_window - 1,
            half_window,
            sites_per_bin: spb,
            margin_sites,
        }
    }

    pub fn window_sites(&self) -> (usize, usize) {
        let first = self.origin + 1 - self.half_window;
        (first, self.origin + self.half_window)
    }

    pub fn bins(&self) -> usize {
        2 * self.half_window / self.sites_per_bin
    }

    /// Bin centres as macroscopic positions.
    pub fn bin_centers(&self, n: usize) -> Vec<f64> {
        let spb = self.sites_per_bin as f64;
        (0..self.bins())
            .map(|k| {
                let first = -(self.half_window as f64) + 1.0 + k as f64 * spb;
                (first + (spb - 1.0) / 2.0) / n as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalProfile {
    pub time: f64,
    pub bin_centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub replica_count: usize,
}

/// Integrated charge across one bond, per replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentRecord {
    pub bond_offset: i64,
    pub time: f64,
    pub charges: Vec<u64>,
}

impl CurrentRecord {
    /// Mean current per unit microscopic time and its standard error.
    pub fn mean_current(&self, n: usize) -> (f64, f64) {
        let span = self.time * n as f64;
        let k = self.charges.len() as f64;
        let rates: Vec<f64> = self.charges.iter().map(|&q| q as f64 / span).collect();
        let mean = rates.iter().sum::<f64>() / k;
        let var = if k > 1.0 { rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
        (mean, (var / k).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaDiagnostics {
    pub replica: usize,
    pub events: u64,
    pub final_fronts: (i64, i64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub layout: Layout,
    pub profiles: Vec<EmpiricalProfile>,
    pub currents: Vec<CurrentRecord>,
    pub diagnostics: Vec<ReplicaDiagnostics>,
}

impl SimOutput {
    pub fn total_events(&self) -> u64 {
        self.diagnostics.iter().map(|d| d.events).sum()
    }
}

fn draw(m: &StationaryMarginal, rng: &mut impl Rng) -> i8 {
    let u: f64 = rng.gen();
    if u < m.p_minus {
        -1
    } else if u < m.p_minus + m.p_zero {
        0
    } else {
        1
    }
}

/// Product-measure step initial condition on the config's lattice.
pub fn sample_initial<R: Rng>(config: &SimConfig, rng: &mut R) -> Result<LatticeState> {
    let layout = config.layout();
    let left = marginal_of_density(config.u_minus, &config.params)?;
    let right = marginal_of_density(config.u_plus, &config.params)?;
    let sites = (0..layout.len)
        .map(|j| draw(if j <= layout.origin { &left } else { &right }, rng))
        .collect();
    LatticeState::new(sites, layout.origin)
}

/// Per-bin sums of occupations over the observation window.
fn bin_sums(state: &LatticeState, layout: &Layout) -> Vec<i64> {
    let (first, last) = layout.window_sites();
    state.sites()[first..=last]
        .chunks(layout.sites_per_bin)
        .map(|c| c.iter().map(|&x| i64::from(x)).sum())
        .collect()
}

/// Bin-averaged occupations of a single state.
pub fn empirical_profile(state: &LatticeState, config: &SimConfig, time: f64) -> Result<EmpiricalProfile> {
    let layout = config.layout();
    if state.len() != layout.len || state.origin() != layout.origin {
        return Err(Error::domain("state does not match the configured lattice"));
    }
    let spb = layout.sites_per_bin as f64;
    Ok(EmpiricalProfile {
        time,
        bin_centers: layout.bin_centers(config.n),
        densities: bin_sums(state, &layout).into_iter().map(|s| s as f64 / spb).collect(),
        replica_count: 1,
    })
}

struct ReplicaResult {
    bins: Vec<Vec<i64>>,
    charges: Vec<Vec<u64>>,
    diag: ReplicaDiagnostics,
}

fn run_replica(config: &SimConfig, layout: &Layout, snapshots: &[f64], replica: usize) -> Result<ReplicaResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(replica as u64);
    let state = sample_initial(config, &mut rng)?;
    let (lo, hi) = layout.window_sites();
    let mut tr = Trajectory::new(state, config.params).with_guard(lo, hi);
    let mut bins = Vec::with_capacity(snapshots.len());
    let mut charges = Vec::with_capacity(snapshots.len());
    for &t in snapshots {
        tr.advance_to(t * config.n as f64, &mut rng)?;
        bins.push(bin_sums(tr.state(), layout));
        charges.push(
            config
                .current_bonds
                .iter()
                .map(|&off| tr.bond_events((layout.origin as i64 + off) as usize))
                .collect(),
        );
    }
    let (fl, fr) = tr.fronts();
    let diag = ReplicaDiagnostics {
        replica,
        events: tr.events(),
        final_fronts: (fl as i64 - layout.origin as i64, fr as i64 - layout.origin as i64),
    };
    log::info!(
        "replica={} events={} front_left={} front_right={}",
        diag.replica,
        diag.events,
        diag.final_fronts.0,
        diag.final_fronts.1
    );
    Ok(ReplicaResult { bins, charges, diag })
}

/// Runs the replica ensemble. Replicas run in parallel on independent RNG
/// streams; the reduction is in replica order so output is deterministic.
pub fn run(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let layout = config.layout();
    let snapshots = config.snapshots();
    let results: Vec<ReplicaResult> = (0..config.replicas)
        .into_par_iter()
        .map(|r| run_replica(config, &layout, &snapshots, r))
        .collect::<Result<_>>()?;

    let centers = layout.bin_centers(config.n);
    let denom = (layout.sites_per_bin * config.replicas) as f64;
    let mut profiles = Vec::with_capacity(snapshots.len());
    let mut currents = Vec::new();
    for (s, &t) in snapshots.iter().enumerate() {
        let mut total = vec![0i64; layout.bins()];
        for r in &results {
            for (acc, v) in total.iter_mut().zip(&r.bins[s]) {
                *acc += v;
            }
        }
        profiles.push(EmpiricalProfile {
            time: t,
            bin_centers: centers.clone(),
            densities: total.iter().map(|&v| v as f64 / denom).collect(),
            replica_count: config.replicas,
        });
        for (k, &off) in config.current_bonds.iter().enumerate() {
            currents.push(CurrentRecord {
                bond_offset: off,
                time: t,
                charges: results.iter().map(|r| r.charges[s][k]).collect(),
            });
        }
    }
    Ok(SimOutput {
        layout,
        profiles,
        currents,
        diagnostics: results.into_iter().map(|r| r.diag).collect(),
    })
}
