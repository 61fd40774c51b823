use rand::Rng;

use super::sumtree::SumTree;
use crate::error::{Error, Result};
use crate::flux::ModelParams;

/// Sites frozen at each end of a lattice; no bond touches them.
pub const FROZEN_SITES: usize = 2;

/// Jump rate across a bond with occupations `(left, right)`; the
/// annihilation rate is 1.
pub fn bond_rate(left: i8, right: i8, params: &ModelParams) -> f64 {
    match (left, right) {
        (0, 0) => params.c(),
        (1, -1) => 1.0,
        (0, -1) => (1.0 - params.d()) / 2.0,
        (1, 0) => (1.0 + params.d()) / 2.0,
        _ => 0.0,
    }
}

/// Finite window of the configuration space `{-1, 0, 1}^Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeState {
    sites: Vec<i8>,
    origin: usize,
}

impl LatticeState {
    pub fn new(sites: Vec<i8>, origin: usize) -> Result<Self> {
        if sites.len() < 2 * FROZEN_SITES {
            return Err(Error::domain(format!("lattice needs at least 4 sites, got {}", sites.len())));
        }
        if let Some(x) = sites.iter().find(|x| !(-1..=1).contains(*x)) {
            return Err(Error::domain(format!("site occupation {x} not in {{-1, 0, 1}}")));
        }
        if origin >= sites.len() {
            return Err(Error::domain("origin index outside the lattice"));
        }
        Ok(Self { sites, origin })
    }

    pub fn sites(&self) -> &[i8] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Index of the site at macroscopic position 0.
    pub fn origin(&self) -> usize {
        self.origin
    }

    /// Bonds `j` (between sites `j` and `j + 1`) that carry dynamics.
    pub fn dynamic_bonds(&self) -> std::ops::Range<usize> {
        let n = self.sites.len();
        FROZEN_SITES..n.saturating_sub(FROZEN_SITES + 1).max(FROZEN_SITES)
    }

    pub fn total_charge(&self) -> i64 {
        self.sites.iter().map(|&x| i64::from(x)).sum()
    }

    fn rate(&self, bond: usize, params: &ModelParams) -> f64 {
        bond_rate(self.sites[bond], self.sites[bond + 1], params)
    }
}

/// Applies `ω -> ω - δ_j + δ_{j+1}` on bond `j`. Fails on bonds with zero
/// rate, which are exactly the moves that would leave `{-1, 0, 1}`.
pub fn apply_move(state: &mut LatticeState, bond: usize, params: &ModelParams) -> Result<()> {
    if bond + 1 >= state.sites.len() {
        return Err(Error::domain(format!("bond {bond} outside the lattice")));
    }
    if state.rate(bond, params) <= 0.0 {
        return Err(Error::domain(format!(
            "bond {bond} with occupations ({}, {}) has zero rate",
            state.sites[bond],
            state.sites[bond + 1]
        )));
    }
    state.sites[bond] -= 1;
    state.sites[bond + 1] += 1;
    Ok(())
}

/// One exact continuous-time trajectory (direct-method event sampling).
///
/// Besides the state it tracks how far the frozen ends can have influenced
/// the dynamics: a site is influenced once a bond with an influenced end
/// fires, starting from the outermost dynamic sites.
pub struct Trajectory {
    state: LatticeState,
    params: ModelParams,
    rates: SumTree,
    time: f64,
    events: u64,
    bond_events: Vec<u64>,
    front_left: usize,
    front_right: usize,
    guard: Option<(usize, usize)>,
    charge: i64,
    initial_charge: i64,
}

impl Trajectory {
    pub fn new(state: LatticeState, params: ModelParams) -> Self {
        let n = state.len();
        let charge = state.total_charge();
        let weights: Vec<f64> = (0..n.saturating_sub(1))
            .map(|j| if state.dynamic_bonds().contains(&j) { state.rate(j, &params) } else { 0.0 })
            .collect();
        Self {
            rates: SumTree::new(&weights),
            bond_events: vec![0; n],
            front_left: FROZEN_SITES,
            front_right: n - FROZEN_SITES - 1,
            state,
            params,
            time: 0.0,
            events: 0,
            guard: None,
            charge,
            initial_charge: charge,
        }
    }

    /// Abort with [`Error::InfluenceConeBreach`] once boundary influence
    /// reaches any site in `[lo, hi]`.
    pub fn with_guard(mut self, lo: usize, hi: usize) -> Self {
        self.guard = Some((lo, hi));
        self
    }

    pub fn state(&self) -> &LatticeState {
        &self.state
    }

    /// Microscopic time.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Jumps that crossed bond `j` so far; every jump carries one unit of
    /// signed charge to the right.
    pub fn bond_events(&self, bond: usize) -> u64 {
        self.bond_events[bond]
    }

    /// Innermost influenced sites `(left, right)`.
    pub fn fronts(&self) -> (usize, usize) {
        (self.front_left, self.front_right)
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.total()
    }

    /// Runs until microscopic time `t`. The state at `t` is exact: a
    /// waiting time overshooting `t` is discarded, which is valid by
    /// memorylessness.
    pub fn advance_to<R: Rng>(&mut self, t: f64, rng: &mut R) -> Result<()> {
        while self.time < t {
            let total = self.rates.total();
            if total <= 0.0 {
                break;
            }
            let wait = -(1.0 - rng.gen::<f64>()).ln() / total;
            if self.time + wait > t {
                break;
            }
            self.time += wait;
            let bond = loop {
                let j = self.rates.find(rng.gen::<f64>() * total);
                if self.rates.get(j) > 0.0 {
                    break j;
                }
            };
            self.fire(bond)?;
        }
        self.time = t;
        Ok(())
    }

    fn fire(&mut self, bond: usize) -> Result<()> {
        let (x, y) = (self.state.sites[bond], self.state.sites[bond + 1]);
        self.state.sites[bond] = x - 1;
        self.state.sites[bond + 1] = y + 1;
        self.charge += i64::from(self.state.sites[bond] - x) + i64::from(self.state.sites[bond + 1] - y);
        assert!(self.charge == self.initial_charge && x > -1 && y < 1, "illegal move on bond {bond}");
        self.events += 1;
        self.bond_events[bond] += 1;
        let dynamic = self.state.dynamic_bonds();
        let lo = (bond - 1).max(dynamic.start);
        let hi = (bond + 1).min(dynamic.end - 1);
        let mut w = [0.0; 3];
        for j in lo..=hi {
            w[j - lo] = self.state.rate(j, &self.params);
        }
        self.rates.set_range(lo, &w[..=hi - lo]);
        if bond <= self.front_left {
            self.front_left = self.front_left.max(bond + 1);
        }
        if bond + 1 >= self.front_right {
            self.front_right = self.front_right.min(bond);
        }
        if let Some((lo, hi)) = self.guard {
            let breached = if self.front_left >= lo {
                Some(self.front_left)
            } else if self.front_right <= hi {
                Some(self.front_right)
            } else {
                None
            };
            if let Some(site) = breached {
                return Err(Error::InfluenceConeBreach {
                    offset: site as i64 - self.state.origin as i64,
                    time: self.time,
                });
            }
        }
        Ok(())
    }
}
