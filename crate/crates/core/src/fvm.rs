//! First-order Godunov scheme for `∂_t u + ∂_x G(u) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{ModelParams, SymmetricFlux};

pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Clone, Serialize)]
pub struct FvmConfig {
    pub cells: usize,
    /// Domain is `[-half_width, half_width]`.
    pub half_width: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub params: ModelParams,
    pub u_minus: f64,
    pub u_plus: f64,
}

impl FvmConfig {
    pub fn new(params: ModelParams, u_minus: f64, u_plus: f64, cells: usize) -> Self {
        Self { cells, half_width: 1.0, cfl: 0.9, t_end: 1.0, params, u_minus, u_plus }
    }

    pub fn validate(&self) -> Result<SymmetricFlux> {
        self.params.require_attractive()?;
        let flux = self.params.symmetric_flux()?;
        if self.cells < 2 {
            return Err(Error::domain("need at least 2 cells"));
        }
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::domain(format!("cfl = {} must lie in (0, {MAX_CFL}]", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain("t_end must be positive"));
        }
        for u in [self.u_minus, self.u_plus] {
            if !(-1.0..=1.0).contains(&u) {
                return Err(Error::domain(format!("density {u} outside [-1, 1]")));
            }
        }
        let reach = flux.max_speed() * self.t_end;
        if !(self.half_width > reach) {
            return Err(Error::domain(format!(
                "half width {} does not contain the fastest wave (reach {reach})",
                self.half_width
            )));
        }
        Ok(flux)
    }
}

/// Exact Riemann flux at an interface: max of `G` over `[u_r, u_l]` when
/// `u_l >= u_r`, min over `[u_l, u_r]` otherwise.
pub fn godunov_flux(u_left: f64, u_right: f64, flux: &SymmetricFlux) -> f64 {
    let (min, max) = flux.extrema_on(u_left, u_right);
    if u_left >= u_right {
        max
    } else {
        min
    }
}

/// Explicit time stepping state with outflow ghost cells.
#[derive(Debug, Clone)]
pub struct FvmSolver {
    flux: SymmetricFlux,
    dx: f64,
    x_lo: f64,
    u: Vec<f64>,
    time: f64,
    steps: usize,
    dt_max: f64,
    scratch: Vec<f64>,
}

impl FvmSolver {
    pub fn new(config: &FvmConfig) -> Result<Self> {
        let flux = config.validate()?;
        let n = config.cells;
        let dx = 2.0 * config.half_width / n as f64;
        let x_lo = -config.half_width;
        let u = (0..n)
            .map(|i| {
                let a = x_lo + i as f64 * dx;
                let b = a + dx;
                if b <= 0.0 {
                    config.u_minus
                } else if a >= 0.0 {
                    config.u_plus
                } else {
                    (config.u_minus * -a + config.u_plus * b) / dx
                }
            })
            .collect();
        let speed = flux.max_speed().max(f64::MIN_POSITIVE);
        Ok(Self {
            flux,
            dx,
            x_lo,
            u,
            time: 0.0,
            steps: 0,
            dt_max: config.cfl * dx / speed,
            scratch: vec![0.0; n + 1],
        })
    }

    pub fn cells(&self) -> &[f64] {
        &self.u
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.x_lo + (i as f64 + 0.5) * self.dx).collect()
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().sum::<f64>() * self.dx
    }

    /// Advances by `dt` (capped at the CFL step) and returns the boundary
    /// fluxes `(F_in, F_out)` used.
    pub fn step(&mut self, dt: f64) -> (f64, f64) {
        let dt = dt.min(self.dt_max);
        let n = self.u.len();
        for i in 0..=n {
            let ul = self.u[i.saturating_sub(1)];
            let ur = self.u[i.min(n - 1)];
            self.scratch[i] = godunov_flux(ul, ur, &self.flux);
        }
        let r = dt / self.dx;
        for i in 0..n {
            self.u[i] -= r * (self.scratch[i + 1] - self.scratch[i]);
        }
        self.time += dt;
        self.steps += 1;
        (self.scratch[0], self.scratch[n])
    }

    /// Steps until `t`, shortening the last step to land on it exactly.
    pub fn run_to(&mut self, t: f64) {
        while self.time < t {
            let remaining = t - self.time;
            if remaining <= self.dt_max {
                self.step(remaining);
                self.time = t;
            } else {
                self.step(self.dt_max);
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FvmProfile {
    pub time: f64,
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub dx: f64,
    pub steps: usize,
}

pub fn fvm_solve(config: &FvmConfig) -> Result<FvmProfile> {
    let mut s = FvmSolver::new(config)?;
    s.run_to(config.t_end);
    Ok(FvmProfile { time: s.time(), centers: s.centers(), dx: s.dx(), steps: s.steps(), densities: s.u })
}
