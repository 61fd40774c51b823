//! Tangent-line constructions on the flux graph and the upper-concave /
//! lower-convex envelopes of the flux over density intervals.
//!
//! `G` has at most two inflection points, so on any interval it splits into
//! at most three arcs of constant curvature sign. An envelope can only touch
//! `G` on arcs whose curvature agrees with the envelope (or at the interval
//! ends); it is assembled by wrapping these arcs left to right and bridging
//! consecutive ones with common supporting lines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{ModelParams, SymmetricFlux};
use crate::numeric::{bisect, solve_monotone};

/// Grid used to bracket roots of the tangent-line equations.
pub const TANGENT_GRID: usize = 4001;

const ROOT_TOL: f64 = 1e-13;
const TANGENCY_TOL: f64 = 1e-9;
/// Roots closer than this to the tangency point are the tangency itself.
const SELF_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Orientation {
    ConcaveUpper,
    ConvexLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PieceKind {
    /// Envelope coincides with the flux.
    FollowsFlux,
    /// Chord or tangent segment; `slope` is the chord slope of `G` between
    /// the piece endpoints.
    Linear { slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub kind: PieceKind,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, PieceKind::Linear { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    lo: f64,
    hi: f64,
    pieces: Vec<Piece>,
    orientation: Orientation,
    flux: SymmetricFlux,
}

impl Envelope {
    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Pieces ordered by increasing density, partitioning the interval.
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn flux(&self) -> &SymmetricFlux {
        &self.flux
    }

    fn piece_at(&self, u: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| u <= p.hi)
            .unwrap_or_else(|| self.pieces.last().expect("envelope has pieces"))
    }

    pub fn value(&self, u: f64) -> f64 {
        let p = self.piece_at(u);
        match p.kind {
            PieceKind::FollowsFlux => self.flux.value(u),
            PieceKind::Linear { slope } => self.flux.value(p.lo) + slope * (u - p.lo),
        }
    }

    /// Envelope derivative; at a joint the piece on the left is used.
    pub fn derivative(&self, u: f64) -> f64 {
        match self.piece_at(u).kind {
            PieceKind::FollowsFlux => self.flux.slope(u),
            PieceKind::Linear { slope } => slope,
        }
    }

    /// Derivative at the ends of the interval as `(at lo, at hi)`.
    fn end_slopes(&self) -> (f64, f64) {
        let first = self.pieces.first().expect("envelope has pieces");
        let last = self.pieces.last().expect("envelope has pieces");
        let at = |p: &Piece, u: f64| match p.kind {
            PieceKind::FollowsFlux => self.flux.slope(u),
            PieceKind::Linear { slope } => slope,
        };
        (at(first, self.lo), at(last, self.hi))
    }

    /// `(min, max)` of the envelope derivative over the interval.
    pub fn derivative_range(&self) -> (f64, f64) {
        let (a, b) = self.end_slopes();
        (a.min(b), a.max(b))
    }

    /// Density whose envelope derivative equals `slope`. On a linear piece
    /// with that slope, the endpoint on the left-state side of the jump is
    /// returned (the high end for concave envelopes, the low end for convex).
    pub fn derivative_inverse(&self, slope: f64) -> Result<f64> {
        let (min, max) = self.derivative_range();
        let slack = 1e-12;
        if !(slope >= min - slack && slope <= max + slack) {
            return Err(Error::domain(format!(
                "slope {slope} outside the envelope derivative range [{min}, {max}]"
            )));
        }
        let concave = self.orientation == Orientation::ConcaveUpper;
        let ordered: Box<dyn Iterator<Item = &Piece>> = if concave {
            Box::new(self.pieces.iter().rev())
        } else {
            Box::new(self.pieces.iter())
        };
        let mut last_end = if concave { self.hi } else { self.lo };
        for p in ordered {
            match p.kind {
                PieceKind::Linear { slope: s } => {
                    if (slope - s).abs() <= slack {
                        return Ok(if concave { p.hi } else { p.lo });
                    }
                    last_end = if concave { p.lo } else { p.hi };
                }
                PieceKind::FollowsFlux => {
                    let (a, b) = (self.flux.slope(p.lo), self.flux.slope(p.hi));
                    let (smin, smax) = (a.min(b), a.max(b));
                    if slope >= smin - slack && slope <= smax + slack {
                        return Ok(self.invert_slope(p.lo, p.hi, slope));
                    }
                    last_end = if concave { p.lo } else { p.hi };
                }
            }
        }
        Ok(last_end)
    }

    /// Solves `G'(u) = slope` on a piece where `G'` is monotone.
    pub(crate) fn invert_slope(&self, lo: f64, hi: f64, slope: f64) -> f64 {
        let g = self.flux;
        solve_monotone(|u| g.slope(u), |u| g.curvature(u), lo, hi, slope)
    }
}

/// `sign * G`, so that both envelopes reduce to an upper concave hull.
#[derive(Clone, Copy)]
struct Oriented {
    flux: SymmetricFlux,
    sign: f64,
}

impl Oriented {
    fn value(&self, x: f64) -> f64 {
        self.sign * self.flux.value(x)
    }

    fn slope(&self, x: f64) -> f64 {
        self.sign * self.flux.slope(x)
    }

    fn curvature(&self, x: f64) -> f64 {
        self.sign * self.flux.curvature(x)
    }
}

/// Closed sub-interval on which the oriented function is concave; a single
/// point when `lo == hi`.
#[derive(Debug, Clone, Copy)]
struct Arc {
    lo: f64,
    hi: f64,
}

impl Arc {
    /// Maximiser of `f(x) - m x` on the arc.
    fn argmax(&self, f: &Oriented, m: f64) -> f64 {
        if self.lo == self.hi || f.slope(self.lo) <= m {
            return self.lo;
        }
        if f.slope(self.hi) >= m {
            return self.hi;
        }
        solve_monotone(|x| f.slope(x), |x| f.curvature(x), self.lo, self.hi, m)
    }

    fn support(&self, f: &Oriented, m: f64) -> (f64, f64) {
        let x = self.argmax(f, m);
        (f.value(x) - m * x, x)
    }
}

/// Common supporting line of two arcs, `left` entirely to the left of
/// `right`: returns `(slope, touch_left, touch_right)`.
fn bridge(f: &Oriented, left: Arc, right: Arc, slope_bound: f64) -> (f64, f64, f64) {
    if left.lo == left.hi && right.lo == right.hi {
        let m = (f.value(right.lo) - f.value(left.lo)) / (right.lo - left.lo);
        return (m, left.lo, right.lo);
    }
    // support_left - support_right is non-decreasing in m
    let gap = |m: f64| left.support(f, m).0 - right.support(f, m).0;
    let m = bisect(gap, -slope_bound, slope_bound, 1e-16);
    (m, left.argmax(f, m), right.argmax(f, m))
}

fn concave_arcs(f: &Oriented, lo: f64, hi: f64) -> Vec<Arc> {
    let mut regions: Vec<(f64, f64)> = Vec::new();
    match (f.flux.inflection(), f.sign > 0.0) {
        (None, true) => regions.push((-1.0, 1.0)),
        (None, false) => {}
        (Some(vi), true) => {
            regions.push((-1.0, -vi));
            regions.push((vi, 1.0));
        }
        (Some(vi), false) => regions.push((-vi, vi)),
    }
    let mut arcs: Vec<Arc> = regions
        .into_iter()
        .filter_map(|(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            (a <= b).then_some(Arc { lo: a, hi: b })
        })
        .collect();
    if !arcs.iter().any(|a| a.lo <= lo && lo <= a.hi) {
        arcs.push(Arc { lo, hi: lo });
    }
    if !arcs.iter().any(|a| a.lo <= hi && hi <= a.hi) {
        arcs.push(Arc { lo: hi, hi });
    }
    arcs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    arcs
}

/// Upper concave hull of the oriented function over `[lo, hi]` by gift
/// wrapping over its concave arcs. Returns `(lo, hi, is_linear)` triples.
fn wrap_arcs(f: &Oriented, lo: f64, hi: f64) -> Vec<(f64, f64, bool)> {
    let arcs = concave_arcs(f, lo, hi);
    let bound = f.flux.max_speed() + 1.0;
    let mut out = Vec::new();
    let mut current = 0;
    let mut entry = lo;
    while current + 1 < arcs.len() {
        let mut best: Option<(f64, f64, f64, usize)> = None;
        for j in current + 1..arcs.len() {
            let (m, xl, xr) = bridge(f, arcs[current], arcs[j], bound);
            let better = match best {
                None => true,
                Some((bm, ..)) => m > bm + 1e-13 || (m - bm).abs() <= 1e-13,
            };
            if better {
                best = Some((m, xl, xr, j));
            }
        }
        let (_, xl, xr, j) = best.expect("at least one later arc");
        let xl = xl.max(entry);
        if xl > entry {
            out.push((entry, xl, false));
        }
        out.push((xl, xr, true));
        entry = xr;
        current = j;
    }
    if hi > entry {
        out.push((entry, hi, false));
    }
    out
}

fn build(params: &ModelParams, lo: f64, hi: f64, orientation: Orientation) -> Result<Envelope> {
    let flux = params.symmetric_flux()?;
    if !(lo.is_finite() && hi.is_finite() && lo >= -1.0 && hi <= 1.0) {
        return Err(Error::domain(format!("envelope interval [{lo}, {hi}] outside [-1, 1]")));
    }
    if !(hi - lo >= 1e-12) {
        return Err(Error::domain(format!(
            "envelope interval needs lo < hi (got [{lo}, {hi}])"
        )));
    }
    let sign = match orientation {
        Orientation::ConcaveUpper => 1.0,
        Orientation::ConvexLower => -1.0,
    };
    let raw = match (orientation, flux.special_points()) {
        // both humps inside: the bridge is the horizontal bitangent at ±v_max
        (Orientation::ConcaveUpper, Ok(sp)) if lo <= -sp.v_max && hi >= sp.v_max => {
            let mut v = Vec::new();
            if lo < -sp.v_max {
                v.push((lo, -sp.v_max, false));
            }
            v.push((-sp.v_max, sp.v_max, true));
            if hi > sp.v_max {
                v.push((sp.v_max, hi, false));
            }
            v
        }
        _ => wrap_arcs(&Oriented { flux, sign }, lo, hi),
    };
    let pieces = raw
        .into_iter()
        .map(|(a, b, linear)| Piece {
            lo: a,
            hi: b,
            kind: if linear {
                PieceKind::Linear { slope: (flux.value(b) - flux.value(a)) / (b - a) }
            } else {
                PieceKind::FollowsFlux
            },
        })
        .collect();
    Ok(Envelope { lo, hi, pieces, orientation, flux })
}

/// Smallest concave function `>= G` on `[u_plus, u_minus]` (requires
/// `u_plus < u_minus`).
pub fn concave_envelope(u_plus: f64, u_minus: f64, params: &ModelParams) -> Result<Envelope> {
    build(params, u_plus, u_minus, Orientation::ConcaveUpper)
}

/// Largest convex function `<= G` on `[u_minus, u_plus]` (requires
/// `u_minus < u_plus`).
pub fn convex_envelope(u_minus: f64, u_plus: f64, params: &ModelParams) -> Result<Envelope> {
    build(params, u_minus, u_plus, Orientation::ConvexLower)
}

pub fn envelope_derivative_inverse(env: &Envelope, slope: f64) -> Result<f64> {
    env.derivative_inverse(slope)
}

/// Intersections of the tangent line at `v_e` with the graph of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentSolution {
    /// Nearest intersection left of `v_e`, or `-inf` when none exists.
    pub v_m_minus: f64,
    /// Nearest intersection right of `v_e`, or `+inf` when none exists.
    pub v_m_plus: f64,
}

/// Tangency points of lines through `(v, G(v))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentPoints {
    pub v_e_near: f64,
    pub v_e_far: f64,
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    let last = (n - 1) as f64;
    (0..n).map(move |k| (2.0 * k as f64 - last) / last)
}

/// Roots in `[-1, 1]` of a smooth `r`: sign changes on the grid refined by
/// bisection, plus touching (double) roots found where `dr` changes sign and
/// both `r` and `dr` vanish within [`TANGENCY_TOL`].
fn scan_roots<R, D>(r: R, dr: D, exclude: Option<f64>) -> Vec<f64>
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let xs: Vec<f64> = grid(TANGENT_GRID).collect();
    let rs: Vec<f64> = xs.iter().map(|&x| r(x)).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| dr(x)).collect();
    let mut roots = Vec::new();
    for k in 0..xs.len() {
        if rs[k] == 0.0 {
            roots.push(xs[k]);
        }
        if k + 1 == xs.len() {
            break;
        }
        if rs[k] != 0.0 && rs[k + 1] != 0.0 && (rs[k] < 0.0) != (rs[k + 1] < 0.0) {
            roots.push(bisect(&r, xs[k], xs[k + 1], ROOT_TOL));
        }
        if (ds[k] < 0.0) != (ds[k + 1] < 0.0) {
            let x = bisect(&dr, xs[k], xs[k + 1], ROOT_TOL);
            if r(x).abs() < TANGENCY_TOL && dr(x).abs() < TANGENCY_TOL {
                roots.push(x);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    if let Some(v) = exclude {
        roots.retain(|x| (x - v).abs() >= SELF_EXCLUSION);
    }
    roots
}

/// All intersections `v != v_e` of the tangent at `v_e` with `G`.
pub fn tangent_line_roots(v_e: f64, flux: &SymmetricFlux) -> Vec<f64> {
    let (g0, s0) = (flux.value(v_e), flux.slope(v_e));
    scan_roots(
        |v| flux.value(v) - g0 - s0 * (v - v_e),
        |v| flux.slope(v) - s0,
        Some(v_e),
    )
}

pub fn tangent_intersections(v_e: f64, params: &ModelParams) -> Result<TangentSolution> {
    let flux = params.symmetric_flux()?;
    check_density(v_e)?;
    let roots = tangent_line_roots(v_e, &flux);
    Ok(TangentSolution {
        v_m_minus: roots.iter().copied().filter(|&x| x < v_e).fold(f64::NEG_INFINITY, f64::max),
        v_m_plus: roots.iter().copied().filter(|&x| x > v_e).fold(f64::INFINITY, f64::min),
    })
}

/// All tangency points `v_e != v` of lines through `(v, G(v))`, sorted by
/// distance from `v`.
pub fn tangency_points(v: f64, flux: &SymmetricFlux) -> Vec<f64> {
    let gv = flux.value(v);
    let mut pts = scan_roots(
        |x| flux.value(x) + flux.slope(x) * (v - x) - gv,
        |x| flux.curvature(x) * (v - x),
        Some(v),
    );
    pts.sort_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()));
    pts
}

/// Nearest and farthest tangency points from `(v, G(v))`, or `None` when no
/// tangent line can be drawn.
pub fn tangent_points_from(v: f64, params: &ModelParams) -> Result<Option<TangentPoints>> {
    let flux = params.symmetric_flux()?;
    check_density(v)?;
    let pts = tangency_points(v, &flux);
    Ok(match (pts.first(), pts.last()) {
        (Some(&near), Some(&far)) => Some(TangentPoints { v_e_near: near, v_e_far: far }),
        _ => None,
    })
}

fn check_density(v: f64) -> Result<()> {
    if v.is_finite() && v.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("density {v} outside [-1, 1]")))
    }
}
