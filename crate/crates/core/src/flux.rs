//! Stationary product measures, the density/chemical-potential bijection and
//! the exact hydrodynamic flux of the three-state exclusion process.
//!
//! Signed densities live in `[-1, 1]`. The annihilation rate is fixed to 1 by
//! a time rescaling, so the model is described by the pair-creation rate `c`
//! and the drift asymmetry `d`; the stationary measures are parametrised by
//! `b = 1 / (2 + c^{-1/2})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature threshold `b = 1/6` (equivalently `c = 1/16`).
pub const B_CRITICAL: f64 = 1.0 / 6.0;

/// Tolerance for comparisons against [`B_CRITICAL`].
pub const B_CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    c: f64,
    d: f64,
    b: f64,
}

impl ModelParams {
    /// Builds parameters from the pair-creation rate and drift asymmetry.
    pub fn from_c(c: f64, d: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("creation rate c must be positive, got {c}")));
        }
        if !(d.is_finite() && d.abs() < 1.0) {
            return Err(Error::domain(format!("drift d must lie in (-1, 1), got {d}")));
        }
        let b = 1.0 / (2.0 + 1.0 / c.sqrt());
        Ok(Self { c, d, b })
    }

    /// Builds parameters from the measure parameter `b`; `c` is recovered by
    /// inversion and `b` recomputed from it.
    pub fn from_b(b: f64, d: f64) -> Result<Self> {
        Self::from_c(c_from_b(b)?, d)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Attractivity holds iff `c <= (1 - |d|)/2`. A relative slack of 1e-12
    /// absorbs the round trip through `b`.
    pub fn is_attractive(&self) -> bool {
        self.c <= attractivity_limit(self.d) * (1.0 + 1e-12)
    }

    pub fn require_attractive(&self) -> Result<()> {
        if self.is_attractive() {
            Ok(())
        } else {
            Err(Error::NotAttractive { c: self.c, limit: attractivity_limit(self.d) })
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.d == 0.0
    }

    /// The even (`d = 0`) flux for these parameters. Fails when `d != 0`.
    pub fn symmetric_flux(&self) -> Result<SymmetricFlux> {
        if !self.is_symmetric() {
            return Err(Error::domain(format!(
                "operation defined only for the symmetric flux (d = 0), got d = {}",
                self.d
            )));
        }
        Ok(SymmetricFlux::new(self.b))
    }
}

fn attractivity_limit(d: f64) -> f64 {
    (1.0 - d.abs()) / 2.0
}

/// Parameters from the creation rate (see [`ModelParams::from_c`]).
pub fn params_from_c(c: f64, d: f64) -> Result<ModelParams> {
    ModelParams::from_c(c, d)
}

/// Inverse of `b = 1/(2 + c^{-1/2})`: `c = (b / (1 - 2b))^2`.
pub fn c_from_b(b: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0 && b < 0.5) {
        return Err(Error::domain(format!("b must lie in (0, 1/2), got {b}")));
    }
    let r = b / (1.0 - 2.0 * b);
    Ok(r * r)
}

pub fn is_attractive(params: &ModelParams) -> bool {
    params.is_attractive()
}

/// One-site stationary marginal at chemical potential `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMarginal {
    pub p_minus: f64,
    pub p_zero: f64,
    pub p_plus: f64,
    /// Partition sum `1 + 2b(cosh θ - 1)`.
    pub z: f64,
}

impl StationaryMarginal {
    /// Probability of occupation `x ∈ {-1, 0, 1}`.
    pub fn prob(&self, x: i8) -> f64 {
        match x {
            -1 => self.p_minus,
            0 => self.p_zero,
            1 => self.p_plus,
            _ => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.p_plus - self.p_minus
    }

    /// Marginal concentrated on a single occupation (the `θ = ±∞` limits).
    pub fn degenerate(x: i8) -> Self {
        Self {
            p_minus: f64::from(x == -1),
            p_zero: f64::from(x == 0),
            p_plus: f64::from(x == 1),
            z: f64::INFINITY,
        }
    }
}

/// Probabilities are evaluated after dividing through by `e^{|θ|}`, so they
/// stay accurate for large potentials; only the partition sum can overflow.
pub fn marginal(theta: f64, params: &ModelParams) -> Result<StationaryMarginal> {
    if theta.is_nan() {
        return Err(Error::domain("chemical potential is NaN"));
    }
    let b = params.b;
    let z = 1.0 + 2.0 * b * (theta.cosh() - 1.0);
    if !z.is_finite() {
        return Err(Error::domain(format!(
            "chemical potential {theta} overflows the partition sum"
        )));
    }
    let (big, small) = stable_weights(theta, b);
    let (p_minus, p_plus) = if theta >= 0.0 { (small, big) } else { (big, small) };
    Ok(StationaryMarginal { p_minus, p_zero: 1.0 - p_minus - p_plus, p_plus, z })
}

/// Returns `(p_dominant, p_opposite)` for the sign of `theta`.
fn stable_weights(theta: f64, b: f64) -> (f64, f64) {
    let e = (-theta.abs()).exp();
    let denom = b + (1.0 - 2.0 * b) * e + b * e * e;
    (b / denom, b * e * e / denom)
}

/// Mean occupation `2b sinh θ / (1 + 2b(cosh θ - 1))`.
pub fn density_of_theta(theta: f64, params: &ModelParams) -> f64 {
    let (big, small) = stable_weights(theta, params.b);
    let v = big - small;
    if theta < 0.0 {
        -v
    } else {
        v
    }
}

/// Inverse of [`density_of_theta`]. Computed on `|v|` and mirrored, which
/// avoids cancellation in the numerator for negative densities.
pub fn theta_of_density(v: f64, params: &ModelParams) -> Result<f64> {
    if !(v.is_finite() && v.abs() < 1.0) {
        return Err(Error::domain(format!(
            "density must lie strictly inside (-1, 1) for a finite potential, got {v}"
        )));
    }
    let b = params.b;
    let a = v.abs();
    let s = (4.0 * b * b + (1.0 - 4.0 * b) * a * a).sqrt();
    let theta = (((1.0 - 2.0 * b) * a + s) / (2.0 * b * (1.0 - a))).ln();
    Ok(if v < 0.0 { -theta } else { theta })
}

/// Stationary marginal with mean `v`, including the degenerate `|v| = 1` ends.
pub fn marginal_of_density(v: f64, params: &ModelParams) -> Result<StationaryMarginal> {
    if v == 1.0 {
        return Ok(StationaryMarginal::degenerate(1));
    }
    if v == -1.0 {
        return Ok(StationaryMarginal::degenerate(-1));
    }
    marginal(theta_of_density(v, params)?, params)
}

/// The d = 0 flux `G` with precomputed coefficients and closed-form
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricFlux {
    b: f64,
    four_b2: f64,
    one_m2b: f64,
    one_m2b_sq: f64,
    one_m4b: f64,
}

/// Building blocks of `F(v) = A / (2D)` and their derivatives.
struct Parts {
    f: f64,
    f1: f64,
    f2: f64,
}

impl SymmetricFlux {
    pub fn new(b: f64) -> Self {
        Self {
            b,
            four_b2: 4.0 * b * b,
            one_m2b: 1.0 - 2.0 * b,
            one_m2b_sq: (1.0 - 2.0 * b) * (1.0 - 2.0 * b),
            one_m4b: 1.0 - 4.0 * b,
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn parts(&self, v: f64, order: u8) -> Parts {
        let s = (self.four_b2 + self.one_m4b * v * v).sqrt();
        let a = self.four_b2 + self.one_m2b_sq * v * v;
        let d = self.four_b2 + self.one_m2b * s;
        let f = a / (2.0 * d);
        if order == 0 {
            return Parts { f, f1: 0.0, f2: 0.0 };
        }
        let s1 = self.one_m4b * v / s;
        let a1 = 2.0 * self.one_m2b_sq * v;
        let d1 = self.one_m2b * s1;
        let n = a1 * d - a * d1;
        let f1 = n / (2.0 * d * d);
        if order == 1 {
            return Parts { f, f1, f2: 0.0 };
        }
        let s2 = self.one_m4b * self.four_b2 / (s * s * s);
        let a2 = 2.0 * self.one_m2b_sq;
        let d2 = self.one_m2b * s2;
        let n1 = a2 * d - a * d2;
        let f2 = (n1 * d - 2.0 * n * d1) / (2.0 * d * d * d);
        Parts { f, f1, f2 }
    }

    /// `G(v)`; exactly zero at `|v| = 1`.
    pub fn value(&self, v: f64) -> f64 {
        if v.abs() == 1.0 {
            return 0.0;
        }
        -0.5 * v * v + self.parts(v, 0).f
    }

    /// `G'(v)`, odd in `v` bit for bit.
    pub fn slope(&self, v: f64) -> f64 {
        -v + self.parts(v, 1).f1
    }

    /// `G''(v)`, even in `v`.
    pub fn curvature(&self, v: f64) -> f64 {
        -1.0 + self.parts(v, 2).f2
    }

    pub fn convexity_class(&self) -> ConvexityClass {
        if (self.b - B_CRITICAL).abs() <= B_CRITICAL_TOL {
            ConvexityClass::MarginallyConcave
        } else if self.b > B_CRITICAL {
            ConvexityClass::StrictlyConcave
        } else {
            ConvexityClass::Mixed
        }
    }

    /// True when `G` has a convex middle region (`b < 1/6`).
    pub fn is_mixed(&self) -> bool {
        self.convexity_class() == ConvexityClass::Mixed
    }

    pub fn special_points(&self) -> Result<FluxSpecialPoints> {
        if !self.is_mixed() {
            return Err(Error::domain(format!(
                "special points exist only for b < 1/6, got b = {}",
                self.b
            )));
        }
        let b = self.b;
        let cube = (2.0 * b * b * self.one_m2b).cbrt();
        let v_infl = ((cube * cube - self.four_b2) / self.one_m4b).sqrt();
        let v_max = 0.5 * ((1.0 + 2.0 * b) * (1.0 - 6.0 * b) / self.one_m4b).sqrt();
        let v_zero = (self.one_m2b * (1.0 - 6.0 * b) / self.one_m4b).sqrt();
        Ok(FluxSpecialPoints {
            v_infl,
            v_max,
            v_zero,
            g_max: self.one_m2b_sq / (8.0 - 32.0 * b),
            g_min_local: b,
        })
    }

    /// Positive inflection point, or `None` when `G` is concave.
    pub fn inflection(&self) -> Option<f64> {
        self.special_points().ok().map(|p| p.v_infl)
    }

    /// `sup |G'|` over `[-1, 1]`. `G'` is monotone between the inflection
    /// points, so the supremum is attained at `±1` or `±v_infl`.
    pub fn max_speed(&self) -> f64 {
        let edge = self.slope(1.0).abs();
        match self.inflection() {
            Some(vi) => edge.max(self.slope(vi).abs()),
            None => edge,
        }
    }

    /// Minimum and maximum of `G` over `[lo, hi]`, using the critical
    /// points `0` and `±v_max`.
    pub fn extrema_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mut min = self.value(lo).min(self.value(hi));
        let mut max = self.value(lo).max(self.value(hi));
        let mut visit = |x: f64| {
            if x > lo && x < hi {
                let g = self.value(x);
                min = min.min(g);
                max = max.max(g);
            }
        };
        visit(0.0);
        if let Ok(sp) = self.special_points() {
            visit(sp.v_max);
            visit(-sp.v_max);
        }
        (min, max)
    }
}

/// Curvature class of `G` over `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConvexityClass {
    StrictlyConcave,
    MarginallyConcave,
    /// Concave-convex-concave with two inflection points.
    Mixed,
}

pub fn convexity_class(params: &ModelParams) -> ConvexityClass {
    SymmetricFlux::new(params.b).convexity_class()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxSpecialPoints {
    pub v_infl: f64,
    pub v_max: f64,
    /// Positive crossing of the horizontal line at height `G(0) = b`.
    pub v_zero: f64,
    pub g_max: f64,
    pub g_min_local: f64,
}

pub fn special_points(params: &ModelParams) -> Result<FluxSpecialPoints> {
    params.symmetric_flux()?.special_points()
}

/// Flux `H` for general drift. Equals `G` when `d = 0`; vanishes at `|v| = 1`
/// for every `d`.
pub fn flux_h(v: f64, params: &ModelParams) -> f64 {
    if v.abs() == 1.0 {
        return 0.0;
    }
    let d = params.d;
    let g = SymmetricFlux::new(params.b);
    let p = g.parts(v, 0);
    0.5 * v * (d - v) + (1.0 - d * v) * p.f
}

/// First (`order = 1`) or second (`order = 2`) derivative of `H`.
pub fn flux_h_deriv(v: f64, params: &ModelParams, order: u8) -> f64 {
    let d = params.d;
    let g = SymmetricFlux::new(params.b);
    match order {
        0 => flux_h(v, params),
        1 => {
            let p = g.parts(v, 1);
            0.5 * (d - 2.0 * v) - d * p.f + (1.0 - d * v) * p.f1
        }
        _ => {
            let p = g.parts(v, 2);
            -1.0 - 2.0 * d * p.f1 + (1.0 - d * v) * p.f2
        }
    }
}

/// The symmetric flux `G(v)` for the parameters' `b` (the drift is ignored).
pub fn flux_g(v: f64, params: &ModelParams) -> f64 {
    SymmetricFlux::new(params.b).value(v)
}

/// `G'` (`order = 1`) or `G''` (`order = 2`) for the parameters' `b`.
pub fn flux_g_deriv(v: f64, params: &ModelParams, order: u8) -> f64 {
    let g = SymmetricFlux::new(params.b);
    match order {
        0 => g.value(v),
        1 => g.slope(v),
        _ => g.curvature(v),
    }
}

/// Expected bond current under the stationary product measure of density
/// `v`: `Σ_{x,y} Γ(x) Γ(y) p(x, y)` over the jump-rate table. Every jump
/// moves exactly one unit of signed charge across the bond.
pub fn flux_expectation(v: f64, params: &ModelParams) -> Result<f64> {
    let m = marginal_of_density(v, params)?;
    let mut total = 0.0;
    for x in [-1i8, 0, 1] {
        for y in [-1i8, 0, 1] {
            total += m.prob(x) * m.prob(y) * crate::sim::bond_rate(x, y, params);
        }
    }
    Ok(total)
}
