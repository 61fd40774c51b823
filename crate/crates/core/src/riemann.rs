//! Entropy solution of the Riemann problem for `∂_t u + ∂_x G(u) = 0` with
//! step data, its decomposition into shocks and rarefaction fans, and the
//! phase classification of the `(u_-, u_+)` square.
//!
//! For `u_- > u_+` the solution follows the upper concave envelope of `G`
//! over `[u_+, u_-]`, for `u_- < u_+` the lower convex envelope over
//! `[u_-, u_+]`. Linear envelope pieces become shocks, pieces following the
//! flux become fans. Speeds are in macroscopic (Eulerian) units.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::envelope::{
    concave_envelope, convex_envelope, tangency_points, tangent_line_roots, Envelope, PieceKind,
};
use crate::error::{Error, Result};
use crate::flux::{ModelParams, SymmetricFlux};
use crate::numeric::{fmt_sig, solve_monotone};

/// Waves narrower than this (in density for shocks, in speed for fans) are
/// dropped before labelling.
pub const DEGENERATE_WAVE: f64 = 1e-12;

/// Half-width of the band around a region boundary in which the closed-form
/// fast path defers to the envelope construction.
const BOUNDARY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannProblem {
    pub u_minus: f64,
    pub u_plus: f64,
    pub params: ModelParams,
}

impl RiemannProblem {
    pub fn new(u_minus: f64, u_plus: f64, params: ModelParams) -> Result<Self> {
        for u in [u_minus, u_plus] {
            if !(u.is_finite() && u.abs() <= 1.0) {
                return Err(Error::domain(format!("density {u} outside [-1, 1]")));
            }
        }
        if (u_minus - u_plus).abs() < 1e-12 {
            return Err(Error::domain(format!(
                "step data needs distinct densities (u_- = {u_minus}, u_+ = {u_plus})"
            )));
        }
        Ok(Self { u_minus, u_plus, params })
    }

    /// The problem obtained by swapping particles with antiparticles and
    /// reflecting space: `(u_-, u_+) -> (-u_+, -u_-)`.
    pub fn mirrored(&self) -> Self {
        Self { u_minus: -self.u_plus, u_plus: -self.u_minus, params: self.params }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Wave {
    /// Discontinuity travelling at the Rankine-Hugoniot speed.
    Shock { speed: f64, left: f64, right: f64 },
    /// Rarefaction fan occupying speeds `[speed_lo, speed_hi]`; `left` and
    /// `right` are the densities at its edges.
    Fan { speed_lo: f64, speed_hi: f64, left: f64, right: f64 },
}

impl Wave {
    pub fn left(&self) -> f64 {
        match *self {
            Wave::Shock { left, .. } | Wave::Fan { left, .. } => left,
        }
    }

    pub fn right(&self) -> f64 {
        match *self {
            Wave::Shock { right, .. } | Wave::Fan { right, .. } => right,
        }
    }

    /// `(slowest, fastest)` speed.
    pub fn speeds(&self) -> (f64, f64) {
        match *self {
            Wave::Shock { speed, .. } => (speed, speed),
            Wave::Fan { speed_lo, speed_hi, .. } => (speed_lo, speed_hi),
        }
    }

    pub fn is_shock(&self) -> bool {
        matches!(self, Wave::Shock { .. })
    }

    fn letter(&self) -> char {
        if self.is_shock() {
            'S'
        } else {
            'R'
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseLabel {
    S,
    R,
    RS,
    SR,
    RSR,
    SRS,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 6] =
        [PhaseLabel::S, PhaseLabel::R, PhaseLabel::RS, PhaseLabel::SR, PhaseLabel::RSR, PhaseLabel::SRS];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::S => "S",
            PhaseLabel::R => "R",
            PhaseLabel::RS => "RS",
            PhaseLabel::SR => "SR",
            PhaseLabel::RSR => "RSR",
            PhaseLabel::SRS => "SRS",
        }
    }

    /// Label under spatial reflection (wave order reversed).
    pub fn reversed(&self) -> Self {
        match self {
            PhaseLabel::RS => PhaseLabel::SR,
            PhaseLabel::SR => PhaseLabel::RS,
            other => *other,
        }
    }
}

impl std::str::FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhaseLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown phase label {s:?}")))
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PhaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveStructure {
    /// Ordered left to right by speed.
    pub waves: Vec<Wave>,
    pub label: PhaseLabel,
}

impl WaveStructure {
    /// One wave per line: `SHOCK speed left right` or `FAN speed_lo speed_hi`,
    /// numbers with 12 significant digits.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        for w in &self.waves {
            match *w {
                Wave::Shock { speed, left, right } => out.push_str(&format!(
                    "SHOCK {} {} {}\n",
                    fmt_sig(speed, 12),
                    fmt_sig(left, 12),
                    fmt_sig(right, 12)
                )),
                Wave::Fan { speed_lo, speed_hi, .. } => out.push_str(&format!(
                    "FAN {} {}\n",
                    fmt_sig(speed_lo, 12),
                    fmt_sig(speed_hi, 12)
                )),
            }
        }
        out
    }
}

fn label_of(waves: &[Wave]) -> Result<PhaseLabel> {
    let word: String = waves.iter().map(Wave::letter).collect();
    word.parse()
        .map_err(|_| Error::domain(format!("wave sequence {word:?} is not a phase label")))
}

/// Closed-form solution of one Riemann problem.
#[derive(Debug, Clone)]
pub struct RiemannSolution {
    problem: RiemannProblem,
    flux: SymmetricFlux,
    envelope: Envelope,
    structure: WaveStructure,
}

impl RiemannSolution {
    pub fn new(problem: RiemannProblem) -> Result<Self> {
        let flux = problem.params.symmetric_flux()?;
        let (um, up) = (problem.u_minus, problem.u_plus);
        let concave = um > up;
        let envelope = if concave {
            concave_envelope(up, um, &problem.params)?
        } else {
            convex_envelope(um, up, &problem.params)?
        };
        let mut raw = Vec::new();
        let pieces: Vec<_> = if concave {
            envelope.pieces().iter().rev().copied().collect()
        } else {
            envelope.pieces().to_vec()
        };
        for p in pieces {
            // traversal runs from the u_- end of the interval to the u_+ end
            let (from, to) = if concave { (p.hi, p.lo) } else { (p.lo, p.hi) };
            match p.kind {
                PieceKind::Linear { slope } => {
                    if (to - from).abs() >= DEGENERATE_WAVE {
                        raw.push(Wave::Shock { speed: slope, left: from, right: to });
                    }
                }
                PieceKind::FollowsFlux => {
                    let (s0, s1) = (flux.slope(from), flux.slope(to));
                    if s1 - s0 >= DEGENERATE_WAVE {
                        raw.push(Wave::Fan { speed_lo: s0, speed_hi: s1, left: from, right: to });
                    }
                }
            }
        }
        let waves = merge_adjacent(raw, &flux);
        let label = label_of(&waves)?;
        Ok(Self { problem, flux, envelope, structure: WaveStructure { waves, label } })
    }

    pub fn problem(&self) -> &RiemannProblem {
        &self.problem
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn structure(&self) -> &WaveStructure {
        &self.structure
    }

    pub fn label(&self) -> PhaseLabel {
        self.structure.label
    }

    /// Density along the ray `x/t = xi`.
    pub fn density_at_speed(&self, xi: f64) -> f64 {
        let mut state = self.problem.u_minus;
        for w in &self.structure.waves {
            match *w {
                Wave::Shock { speed, left, right } => {
                    if xi <= speed {
                        return left;
                    }
                    state = right;
                }
                Wave::Fan { speed_lo, speed_hi, left, right } => {
                    if xi <= speed_lo {
                        return left;
                    }
                    if xi < speed_hi {
                        let g = self.flux;
                        let (lo, hi) = if left < right { (left, right) } else { (right, left) };
                        return solve_monotone(|u| g.slope(u), |u| g.curvature(u), lo, hi, xi);
                    }
                    state = right;
                }
            }
        }
        state
    }

    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("time must be positive, got {t}")));
        }
        Ok(self.density_at_speed(x / t))
    }

    /// Exact mean of `u(·, t)` over `[a, b]`. Along rays `F(ξ) = ξ u(ξ) - G(u(ξ))`
    /// satisfies `F' = u`, and Rankine-Hugoniot makes it continuous across
    /// shocks, so the integral is a difference of two values.
    pub fn cell_average(&self, a: f64, b: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) || !(a < b) {
            return Err(Error::domain("cell average needs t > 0 and a < b"));
        }
        let f = |xi: f64| {
            let u = self.density_at_speed(xi);
            xi * u - self.flux.value(u)
        };
        Ok(t * (f(b / t) - f(a / t)) / (b - a))
    }

    /// Slowest and fastest wave speeds.
    pub fn speed_span(&self) -> (f64, f64) {
        let waves = &self.structure.waves;
        (waves[0].speeds().0, waves[waves.len() - 1].speeds().1)
    }
}

/// Pruning can leave two waves of the same kind next to each other; fuse them.
fn merge_adjacent(waves: Vec<Wave>, flux: &SymmetricFlux) -> Vec<Wave> {
    let mut out: Vec<Wave> = Vec::with_capacity(waves.len());
    for w in waves {
        match (out.last().copied(), w) {
            (Some(Wave::Shock { left, .. }), Wave::Shock { right, .. }) => {
                let speed = (flux.value(right) - flux.value(left)) / (right - left);
                *out.last_mut().unwrap() = Wave::Shock { speed, left, right };
            }
            (Some(Wave::Fan { speed_lo, left, .. }), Wave::Fan { speed_hi, right, .. }) => {
                *out.last_mut().unwrap() = Wave::Fan { speed_lo, speed_hi, left, right };
            }
            _ => out.push(w),
        }
    }
    out
}

pub fn entropy_solution(prob: &RiemannProblem, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    RiemannSolution::new(*prob)?.density(x, t)
}

pub fn wave_structure(prob: &RiemannProblem) -> Result<WaveStructure> {
    Ok(RiemannSolution::new(*prob)?.structure)
}

/// Phase label of a Riemann problem. Cheap closed-form rules decide the
/// regions where the flux has one curvature sign between the densities and
/// the fan-shock-fan region; everything else (and anything within 1e-12 of
/// a rule boundary) is labelled from the envelope construction.
pub fn classify(prob: &RiemannProblem) -> Result<PhaseLabel> {
    let flux = prob.params.symmetric_flux()?;
    if let Some(label) = fast_label(prob, &flux) {
        return Ok(label);
    }
    Ok(RiemannSolution::new(*prob)?.label())
}

fn fast_label(prob: &RiemannProblem, flux: &SymmetricFlux) -> Option<PhaseLabel> {
    let (um, up) = (prob.u_minus, prob.u_plus);
    let increasing = um < up;
    let Ok(sp) = flux.special_points() else {
        return Some(if increasing { PhaseLabel::S } else { PhaseLabel::R });
    };
    let t = BOUNDARY_TIE;
    let vi = sp.v_infl;
    if um > sp.v_max + t && up < -sp.v_max - t {
        return Some(PhaseLabel::RSR);
    }
    let inside = |u: f64, a: f64, b: f64| u > a + t && u < b - t;
    let both = |a: f64, b: f64| inside(um, a, b) && inside(up, a, b);
    if both(-vi, vi) {
        // convex well: the chord lies above G
        return Some(if increasing { PhaseLabel::R } else { PhaseLabel::S });
    }
    let outer_left = |u: f64| u >= -1.0 && u < -vi - t;
    let outer_right = |u: f64| u > vi + t && u <= 1.0;
    if (outer_left(um) && outer_left(up)) || (outer_right(um) && outer_right(up)) {
        return Some(if increasing { PhaseLabel::S } else { PhaseLabel::R });
    }
    None
}

/// Labels on a uniform `resolution x resolution` grid over `[-1, 1]^2`;
/// `grid[i][j]` holds `(u_- = x_i, u_+ = x_j)` and the diagonal is `None`.
/// Grid points are symmetric about 0 bit for bit.
pub fn phase_diagram_grid(params: &ModelParams, resolution: usize) -> Result<Vec<Vec<Option<PhaseLabel>>>> {
    if resolution < 2 {
        return Err(Error::domain("phase diagram needs resolution >= 2"));
    }
    params.symmetric_flux()?;
    let xs = grid_points(resolution);
    xs.par_iter()
        .enumerate()
        .map(|(i, &um)| {
            xs.iter()
                .enumerate()
                .map(|(j, &up)| {
                    if i == j {
                        return Ok(None);
                    }
                    classify(&RiemannProblem::new(um, up, *params)?).map(Some)
                })
                .collect()
        })
        .collect()
}

/// `resolution` points `(2k - (n-1)) / (n-1)`, exactly antisymmetric.
pub fn grid_points(resolution: usize) -> Vec<f64> {
    let last = (resolution - 1) as f64;
    (0..resolution).map(|k| (2.0 * k as f64 - last) / last).collect()
}

/// Phase label read off the closed-form region inequalities for `b < 1/6`
/// (and the shock/fan dichotomy for `b >= 1/6`), built from the tangency
/// points `v_e` and tangent intersections `v_m`. Returns `None` when no
/// region claims the point or when regions with different labels overlap.
///
/// This is a slow reference: every call scans the flux for tangents.
pub fn region_label(prob: &RiemannProblem) -> Result<Option<PhaseLabel>> {
    let flux = prob.params.symmetric_flux()?;
    let (um, up) = (prob.u_minus, prob.u_plus);
    let Ok(sp) = flux.special_points() else {
        return Ok(Some(if um < up { PhaseLabel::S } else { PhaseLabel::R }));
    };
    let (vi, vmax) = (sp.v_infl, sp.v_max);
    let within = |u: f64, a: f64, b: f64| a <= u && u <= b;

    // v_e(v) (nearest), v_e^+(v) (farthest); NaN when absent so that every
    // comparison involving them fails
    let ve_near = |v: f64| tangency_points(v, &flux).first().copied().unwrap_or(f64::NAN);
    let ve_far = |v: f64| tangency_points(v, &flux).last().copied().unwrap_or(f64::NAN);
    let vm_minus = |ve: f64| {
        if ve.is_nan() {
            return f64::NAN;
        }
        tangent_line_roots(ve, &flux).into_iter().filter(|&x| x < ve).fold(f64::NEG_INFINITY, f64::max)
    };
    let vm_plus = |ve: f64| {
        if ve.is_nan() {
            return f64::NAN;
        }
        tangent_line_roots(ve, &flux).into_iter().filter(|&x| x > ve).fold(f64::INFINITY, f64::min)
    };

    let mut labels = Vec::new();
    if um < up {
        let s = (within(um, -1.0, vm_minus(ve_near(1.0))) && up >= vm_plus(ve_near(um)))
            || (within(up, vm_plus(ve_near(-1.0)), 1.0) && um <= vm_minus(ve_near(up)))
            || (within(um, -1.0, -vi) && up <= ve_near(um))
            || (within(up, vi, 1.0) && um >= ve_near(up));
        if s {
            labels.push(PhaseLabel::S);
        }
        if within(um, -vi, vi) && within(up, -vi, vi) {
            labels.push(PhaseLabel::R);
        }
        if vi < up && up <= 1.0 && -vi <= um && um < ve_near(up) {
            labels.push(PhaseLabel::RS);
        }
        if -1.0 <= um && um < -vi && ve_near(um) < up && up <= vi {
            labels.push(PhaseLabel::SR);
        }
        if -1.0 <= um && um < -vi && vi < up && up < vm_plus(ve_near(um)) {
            labels.push(PhaseLabel::SRS);
        }
    } else {
        let s = (within(um, -vi, vi) && within(up, -vi, vi))
            || (within(um, vi, vmax) && ve_far(um) <= up && up <= vm_minus(um))
            || (within(up, -vmax, -vi) && vm_plus(up) <= um && um <= ve_far(up));
        if s {
            labels.push(PhaseLabel::S);
        }
        if (within(um, -1.0, -vi) && within(up, -1.0, -vi)) || (within(um, vi, 1.0) && within(up, vi, 1.0)) {
            labels.push(PhaseLabel::R);
        }
        if -vmax <= up && up < vi && ve_far(up) < um && um <= 1.0 {
            labels.push(PhaseLabel::RS);
        }
        if -vi < um && um <= vmax && -1.0 <= up && up < ve_far(um) {
            labels.push(PhaseLabel::SR);
        }
        if um > vmax && up < -vmax {
            labels.push(PhaseLabel::RSR);
        }
    }
    labels.sort();
    labels.dedup();
    Ok(if labels.len() == 1 { Some(labels[0]) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::SymmetricFlux;

    fn p(b: f64) -> ModelParams {
        ModelParams::from_b(b, 0.0).unwrap()
    }

    fn vmax(b: f64) -> f64 {
        SymmetricFlux::new(b).special_points().unwrap().v_max
    }

    #[test]
    fn rsr_showcase() {
        let prob = RiemannProblem::new(1.0, -1.0, p(0.08)).unwrap();
        let sol = RiemannSolution::new(prob).unwrap();
        assert_eq!(sol.label(), PhaseLabel::RSR);
        let w = &sol.structure().waves;
        assert_eq!(w.len(), 3);
        match w[1] {
            Wave::Shock { speed, left, right } => {
                assert!(speed.abs() < 1e-12);
                assert!((left - right - 2.0 * vmax(0.08)).abs() < 1e-10);
            }
            _ => panic!("middle wave must be a shock"),
        }
        let left = sol.density(-1e-9, 1.0).unwrap();
        let right = sol.density(1e-9, 1.0).unwrap();
        assert!((left - vmax(0.08)).abs() < 1e-6 && (right + vmax(0.08)).abs() < 1e-6);
        assert_eq!(classify(&prob).unwrap(), PhaseLabel::RSR);
    }

    #[test]
    fn srs_showcase() {
        let v = vmax(0.08);
        let prob = RiemannProblem::new(-v, v, p(0.08)).unwrap();
        let ws = wave_structure(&prob).unwrap();
        assert_eq!(ws.label, PhaseLabel::SRS);
        let (s0, s2) = (ws.waves[0].speeds().0, ws.waves[2].speeds().0);
        assert!(s0 < 0.0 && s2 > 0.0, "shocks move apart: {s0} {s2}");
        assert_eq!(classify(&prob).unwrap(), PhaseLabel::SRS);
    }

    #[test]
    fn concave_flux_dichotomy() {
        let prob = RiemannProblem::new(0.8, -0.8, p(0.2)).unwrap();
        let ws = wave_structure(&prob).unwrap();
        assert_eq!(ws.label, PhaseLabel::R);
        let g = SymmetricFlux::new(0.2);
        assert_eq!(ws.waves[0].speeds(), (g.slope(0.8), g.slope(-0.8)));
        assert!(g.slope(0.8) < g.slope(-0.8));

        let prob = RiemannProblem::new(-0.5, 0.5, p(0.2)).unwrap();
        assert_eq!(entropy_solution(&prob, -0.01, 1.0).unwrap(), -0.5);
        assert_eq!(entropy_solution(&prob, 0.01, 1.0).unwrap(), 0.5);
        let ws = wave_structure(&prob).unwrap();
        assert_eq!(ws.label, PhaseLabel::S);
        assert_eq!(ws.waves[0].speeds().0, 0.0);
        assert_eq!(classify(&RiemannProblem::new(-0.3, 0.6, p(0.2)).unwrap()).unwrap(), PhaseLabel::S);
    }

    #[test]
    fn convex_well_and_outer_pieces() {
        // inside the convex well an increasing step spreads, a decreasing one shocks
        let prob = RiemannProblem::new(-0.1, 0.1, p(0.08)).unwrap();
        assert_eq!(wave_structure(&prob).unwrap().label, PhaseLabel::R);
        assert_eq!(classify(&prob).unwrap(), PhaseLabel::R);
        let prob = RiemannProblem::new(0.1, -0.1, p(0.08)).unwrap();
        assert_eq!(wave_structure(&prob).unwrap().label, PhaseLabel::S);
        // on the right concave hump the opposite holds
        let prob = RiemannProblem::new(0.5, 0.9, p(0.08)).unwrap();
        assert_eq!(wave_structure(&prob).unwrap().label, PhaseLabel::S);
        assert_eq!(classify(&prob).unwrap(), PhaseLabel::S);
        let prob = RiemannProblem::new(0.9, 0.5, p(0.08)).unwrap();
        assert_eq!(wave_structure(&prob).unwrap().label, PhaseLabel::R);
    }

    #[test]
    fn tails_and_errors() {
        let prob = RiemannProblem::new(0.3, -0.7, p(0.08)).unwrap();
        assert_eq!(entropy_solution(&prob, -100.0, 1.0).unwrap(), 0.3);
        assert_eq!(entropy_solution(&prob, 100.0, 1.0).unwrap(), -0.7);
        assert!(entropy_solution(&prob, 0.0, 0.0).is_err());
        assert!(entropy_solution(&prob, 0.0, -1.0).is_err());
        assert!(RiemannProblem::new(0.2, 0.2, p(0.08)).is_err());
        assert!(RiemannProblem::new(1.2, 0.2, p(0.08)).is_err());
        let asym = RiemannProblem::new(0.2, 0.4, ModelParams::from_b(0.08, 0.2).unwrap()).unwrap();
        assert!(classify(&asym).is_err());
    }

    #[test]
    fn record_format() {
        let prob = RiemannProblem::new(1.0, -1.0, p(0.08)).unwrap();
        let rec = wave_structure(&prob).unwrap().to_record();
        let lines: Vec<&str> = rec.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("FAN -0.5"));
        assert_eq!(lines[1], "SHOCK 0 0.470919001403 -0.470919001403");
        assert!(lines[2].starts_with("FAN 0 0.5") || lines[2].starts_with("FAN 0 0.499999"));
    }

    #[test]
    fn label_reversal() {
        for l in PhaseLabel::ALL {
            assert_eq!(l.reversed().reversed(), l);
            assert_eq!(l.as_str().parse::<PhaseLabel>().unwrap(), l);
            let rev: String = l.as_str().chars().rev().collect();
            assert_eq!(l.reversed().as_str(), rev);
        }
    }

    #[test]
    fn grid_is_antisymmetric() {
        let xs = grid_points(401);
        for (k, &x) in xs.iter().enumerate() {
            assert_eq!(x, -xs[400 - k]);
        }
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[200], 0.0);
    }
}
