//! Fuel-constrained attainable sets of a double integrator.
//!
//! With `w = v − v0`, `y = x − x0 − v0·tf` and `m = min(β, tf)` the set is
//! `|w| ≤ m`, `y_lo(w) ≤ y ≤ y_hi(w)` where
//! `y_hi = tf(m + w)/2 − (m² + w²)/4` and `y_lo = −y_hi(−w)`.
//! Both bounds are parabolas in `v` with leading coefficients `∓1/4`, which is
//! what makes exact intersection tests cheap.

use crate::dynamics::{AgentState, Polarity, SwitchPlan};
use crate::error::{Error, Result};
use crate::tol::{eps_g, EPS_FUEL, EPS_T};

/// One attainable set: initial state, fuel budget and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachSpec {
    pub x0: AgentState,
    pub beta: f64,
    pub tf: f64,
}

impl ReachSpec {
    pub fn new(x0: AgentState, beta: f64, tf: f64) -> Result<Self> {
        if !x0.is_finite() || !beta.is_finite() || !tf.is_finite() || beta < 0.0 || tf < 0.0 {
            return Err(Error::InvalidInput(format!(
                "reach spec needs finite x0, beta >= 0, tf >= 0 (got {x0:?}, {beta}, {tf})"
            )));
        }
        Ok(Self { x0, beta, tf })
    }

    /// Half-width of the velocity band.
    pub fn m(&self) -> f64 {
        self.beta.min(self.tf)
    }

    /// Whether the fuel budget, not the horizon, limits the set.
    pub fn fuel_limited(&self) -> bool {
        self.beta < self.tf
    }

    /// Coasting endpoint.
    pub fn center(&self) -> AgentState {
        self.x0.drift(self.tf)
    }

    fn scale(&self) -> f64 {
        self.center().scale().max(self.x0.scale())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityBand {
    pub v_lo: f64,
    pub v_hi: f64,
}

impl VelocityBand {
    pub fn is_empty(&self) -> bool {
        self.v_lo > self.v_hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.v_lo <= v && v <= self.v_hi
    }

    pub fn width(&self) -> f64 {
        self.v_hi - self.v_lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceExtent {
    pub v: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl SliceExtent {
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }
}

/// Result of a membership query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Containment {
    pub inside: bool,
    /// Signed depth: positive inside, negative outside (velocity or position units).
    pub margin: f64,
    pub witness: Option<SwitchPlan>,
}

pub fn velocity_band(r: &ReachSpec) -> VelocityBand {
    let m = r.m();
    VelocityBand { v_lo: r.x0.vel - m, v_hi: r.x0.vel + m }
}

/// Slice bounds at relative velocity `w` (assumed in band).
fn extent_at(r: &ReachSpec, w: f64) -> (f64, f64) {
    let (x0, v0, t, beta) = (r.x0.pos, r.x0.vel, r.tf, r.beta);
    let v = v0 + w;
    if r.fuel_limited() {
        let hi = x0 + v * t - (w + beta).powi(2) / 8.0 - (w - beta + 2.0 * t).powi(2) / 8.0
            + t * t / 2.0;
        let lo = x0 + v * t + (-w + beta).powi(2) / 8.0 + (-w - beta + 2.0 * t).powi(2) / 8.0
            - t * t / 2.0;
        (lo, hi)
    } else {
        let bang = |s: f64| {
            let t1 = (s * w + t) / 2.0;
            t1 * t - t1 * t1 / 2.0 - (t - t1).powi(2) / 2.0
        };
        let base = x0 + v0 * t;
        (base - bang(-1.0), base + bang(1.0))
    }
}

pub fn slice_extent(r: &ReachSpec, v: f64) -> Result<SliceExtent> {
    let band = velocity_band(r);
    let slack = eps_g(r.scale().max(v.abs()));
    if v < band.v_lo - slack || v > band.v_hi + slack || !v.is_finite() {
        return Err(Error::VelocityOutOfBand { v, lo: band.v_lo, hi: band.v_hi });
    }
    let m = r.m();
    let w = (v - r.x0.vel).clamp(-m, m);
    let (x_lo, x_hi) = extent_at(r, w);
    Ok(SliceExtent { v, x_lo, x_hi })
}

/// Signed depths of `target` inside the velocity band and inside its slice.
fn depths(r: &ReachSpec, target: &AgentState) -> (f64, f64) {
    let band = velocity_band(r);
    let dv = (target.vel - band.v_lo).min(band.v_hi - target.vel);
    let m = r.m();
    let w = (target.vel - r.x0.vel).clamp(-m, m);
    let (lo, hi) = extent_at(r, w);
    (dv, (target.pos - lo).min(hi - target.pos))
}

/// Signed depth of `target` inside the set.
pub fn margin(r: &ReachSpec, target: &AgentState) -> f64 {
    let (dv, dx) = depths(r, target);
    if dv < 0.0 {
        dv.min(dx)
    } else {
        dx
    }
}

/// Velocity and position slack for membership decisions.
pub fn membership_slack(r: &ReachSpec, target: &AgentState) -> (f64, f64) {
    let v_scale = target.vel.abs().max(r.x0.vel.abs()).max(r.m());
    (eps_g(v_scale), eps_g(target.scale().max(r.x0.scale()).max(r.tf)))
}

/// Membership with separate velocity and position slack.
pub fn is_member(r: &ReachSpec, target: &AgentState) -> bool {
    let (dv, dx) = depths(r, target);
    let (sv, sx) = membership_slack(r, target);
    dv >= -sv && dx >= -sx
}

pub fn contains(r: &ReachSpec, target: &AgentState) -> Containment {
    let inside = is_member(r, target);
    let margin = margin(r, target);
    let witness = if inside { witness_plan(r, target) } else { None };
    Containment { inside, margin, witness }
}

/// Solves the transfer equations for a three-phase plan, then for a coast-pulse-coast plan.
fn witness_plan(r: &ReachSpec, target: &AgentState) -> Option<SwitchPlan> {
    let t = r.tf;
    let w = target.vel - r.x0.vel;
    let y = target.pos - r.x0.pos - r.x0.vel * t;
    let tol = EPS_T * (1.0 + t);
    if t <= 0.0 {
        return Some(SwitchPlan::idle(0.0));
    }
    for gamma in [Polarity::Plus, Polarity::Minus] {
        let g = gamma.sign();
        let c = g * w;
        let d = t * t + 2.0 * c * t - c * c - 4.0 * g * y;
        if d < -eps_g(t * t) {
            continue;
        }
        let sd = d.max(0.0).sqrt();
        for b in [(t - c - sd) / 2.0, (t - c + sd) / 2.0] {
            let a = b + c;
            if b < -tol || a < -tol || a + b > t + tol || a + b > r.beta + EPS_FUEL {
                continue;
            }
            if let Ok(p) = SwitchPlan::new(gamma, a.max(0.0), t - b.max(0.0), t) {
                return Some(p);
            }
        }
    }
    pulse_plan(r, w, y)
}

/// Coast, single thrust of `|w|`, coast: reaches the targets between the two flat caps' reach.
pub(crate) fn pulse_plan(r: &ReachSpec, w: f64, y: f64) -> Option<SwitchPlan> {
    let t = r.tf;
    let d = w.abs();
    if d == 0.0 || d > r.beta + EPS_FUEL || d > t + EPS_T * (1.0 + t) {
        return None;
    }
    let gamma = if w > 0.0 { Polarity::Plus } else { Polarity::Minus };
    let start = t - d / 2.0 - y / w;
    let tol = EPS_T * (1.0 + t);
    if start < -tol || start + d > t + tol {
        return None;
    }
    let start = start.clamp(0.0, (t - d).max(0.0));
    SwitchPlan::pulse(gamma, start, d.min(t), t).ok()
}

/// Closed counter-clockwise boundary: s1 arc upward, top cap, s3 arc downward, bottom cap.
/// Velocity stations use Chebyshev spacing, dense near the caps.
pub fn boundary_polyline(r: &ReachSpec, n: usize) -> Vec<AgentState> {
    let n = n.max(2);
    let m = r.m();
    let ws: Vec<f64> = (0..n)
        .map(|k| -m * (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
        .map(|w| w.clamp(-m, m))
        .collect();
    let v0 = r.x0.vel;
    let mut pts = Vec::with_capacity(2 * n + 1);
    for &w in &ws {
        let (_, hi) = extent_at(r, w);
        pts.push(AgentState::new(hi, v0 + w));
    }
    for &w in ws.iter().rev() {
        let (lo, _) = extent_at(r, w);
        pts.push(AgentState::new(lo, v0 + w));
    }
    let tiny = 1e-12 * (1.0 + r.scale());
    let mut out: Vec<AgentState> = Vec::with_capacity(pts.len() + 1);
    for p in pts {
        if out.last().is_none_or(|q| q.dist(&p) > tiny) {
            out.push(p);
        }
    }
    let first = out[0];
    if out.len() > 1 && out.last().unwrap().dist(&first) <= tiny {
        out.pop();
    }
    out.push(first);
    out
}

pub fn consensus_band(agents: &[AgentState], beta: f64) -> VelocityBand {
    let vmax = agents.iter().map(|a| a.vel).fold(f64::NEG_INFINITY, f64::max);
    let vmin = agents.iter().map(|a| a.vel).fold(f64::INFINITY, f64::min);
    VelocityBand { v_lo: vmax - beta, v_hi: vmin + beta }
}

pub fn feasible(agents: &[AgentState], beta: f64) -> bool {
    let vmax = agents.iter().map(|a| a.vel).fold(f64::NEG_INFINITY, f64::max);
    let vmin = agents.iter().map(|a| a.vel).fold(f64::INFINITY, f64::min);
    vmax - vmin <= 2.0 * beta
}

/// Deepest common point of several sets, measured along position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    /// `max_v (min x_hi − max x_lo)`; non-negative iff the sets intersect.
    pub gap: f64,
    /// Midpoint of the common slice at the maximizing velocity.
    pub point: AgentState,
    pub band: VelocityBand,
}

/// Bounds as `x_hi = −v²/4 + a_hi·v + b_hi`, `x_lo = v²/4 + a_lo·v + b_lo`.
#[derive(Debug, Clone, Copy)]
struct Parabolas {
    a_hi: f64,
    b_hi: f64,
    a_lo: f64,
    b_lo: f64,
}

fn parabolas(r: &ReachSpec) -> Parabolas {
    let (x0, v0, t, m) = (r.x0.pos, r.x0.vel, r.tf, r.m());
    let common = x0 + t * v0 / 2.0;
    let k = t * m / 2.0 - m * m / 4.0 - v0 * v0 / 4.0;
    let k_lo = -t * m / 2.0 + m * m / 4.0 + v0 * v0 / 4.0;
    Parabolas { a_hi: (t + v0) / 2.0, b_hi: common + k, a_lo: (t - v0) / 2.0, b_lo: common + k_lo }
}

/// Exact maximum of the common-slice width over the common velocity band.
/// `None` when the velocity bands do not overlap.
pub fn max_overlap(specs: &[ReachSpec]) -> Option<Overlap> {
    if specs.is_empty() {
        return None;
    }
    let bands: Vec<VelocityBand> = specs.iter().map(velocity_band).collect();
    let lo = bands.iter().map(|b| b.v_lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = bands.iter().map(|b| b.v_hi).fold(f64::INFINITY, f64::min);
    let band = VelocityBand { v_lo: lo, v_hi: hi };
    if lo > hi {
        return None;
    }
    let ps: Vec<Parabolas> = specs.iter().map(parabolas).collect();

    let env = |v: f64| -> (f64, f64, f64, f64) {
        let mut h = f64::INFINITY;
        let mut ha = 0.0;
        let mut l = f64::NEG_INFINITY;
        let mut la = 0.0;
        for p in &ps {
            let hv = p.a_hi * v + p.b_hi;
            if hv < h {
                h = hv;
                ha = p.a_hi;
            }
            let lv = p.a_lo * v + p.b_lo;
            if lv > l {
                l = lv;
                la = p.a_lo;
            }
        }
        (h - v * v / 4.0, ha, l + v * v / 4.0, la)
    };

    let mut stations = vec![lo, hi];
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            for (a1, b1, a2, b2) in [(p.a_hi, p.b_hi, q.a_hi, q.b_hi), (p.a_lo, p.b_lo, q.a_lo, q.b_lo)] {
                if a1 != a2 {
                    let v = (b2 - b1) / (a1 - a2);
                    if v > lo && v < hi {
                        stations.push(v);
                    }
                }
            }
        }
    }
    stations.sort_by(f64::total_cmp);
    stations.dedup();

    let mut candidates = stations.clone();
    for win in stations.windows(2) {
        let mid = 0.5 * (win[0] + win[1]);
        let (_, ha, _, la) = env(mid);
        candidates.push((ha - la).clamp(win[0], win[1]));
    }
    if stations.len() == 1 {
        let (_, ha, _, la) = env(lo);
        candidates.push((ha - la).clamp(lo, hi));
    }

    let mut best: Option<Overlap> = None;
    for v in candidates {
        let (h, _, l, _) = env(v);
        let gap = h - l;
        if best.is_none_or(|b| gap > b.gap) {
            best = Some(Overlap { gap, point: AgentState::new(0.5 * (h + l), v), band });
        }
    }
    best
}

/// Whether all sets share a point.
pub fn intersect(specs: &[ReachSpec]) -> bool {
    max_overlap(specs).is_some_and(|o| o.gap >= 0.0)
}

pub fn specs_at(agents: &[AgentState], beta: f64, t: f64) -> Vec<ReachSpec> {
    agents.iter().map(|&x0| ReachSpec { x0, beta, tf: t }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::apply_plan;

    fn spec(x: f64, v: f64, beta: f64, tf: f64) -> ReachSpec {
        ReachSpec::new(AgentState::new(x, v), beta, tf).unwrap()
    }

    #[test]
    fn band_examples() {
        assert_eq!(velocity_band(&spec(0.0, 0.0, 50.0, 100.0)), VelocityBand { v_lo: -50.0, v_hi: 50.0 });
        assert_eq!(velocity_band(&spec(0.0, 5.0, 10.0, 3.0)), VelocityBand { v_lo: 2.0, v_hi: 8.0 });
        assert_eq!(velocity_band(&spec(0.0, 0.0, 0.0, 7.0)), VelocityBand { v_lo: 0.0, v_hi: 0.0 });
    }

    #[test]
    fn slice_symmetric_at_origin() {
        let s = slice_extent(&spec(0.0, 0.0, 50.0, 100.0), 0.0).unwrap();
        assert!(s.x_hi > 0.0);
        assert!((s.x_hi + s.x_lo).abs() < 1e-9);
    }

    #[test]
    fn slice_bang_bang_regime() {
        let s = slice_extent(&spec(0.0, 0.0, 200.0, 10.0), 0.0).unwrap();
        assert!((s.x_lo + 25.0).abs() < 1e-12 && (s.x_hi - 25.0).abs() < 1e-12);
    }

    #[test]
    fn cap_width() {
        // flat segment at the band edge spans m(tf − m)
        let s = slice_extent(&spec(0.0, 0.0, 50.0, 100.0), 50.0).unwrap();
        assert!((s.width() - 50.0 * 50.0).abs() < 1e-9);
        let s = slice_extent(&spec(0.0, 0.0, 200.0, 10.0), 10.0).unwrap();
        assert!(s.width().abs() < 1e-12);
    }

    #[test]
    fn slice_out_of_band() {
        let e = slice_extent(&spec(0.0, 0.0, 50.0, 100.0), 60.0).unwrap_err();
        assert!(matches!(e, Error::VelocityOutOfBand { .. }));
    }

    #[test]
    fn regime_seam_is_continuous() {
        for &(x, v, t) in &[(0.0, 0.0, 10.0), (3.0, -2.0, 7.5), (-40.0, 9.0, 0.5)] {
            let below = spec(x, v, t * (1.0 - 1e-12), t);
            let above = spec(x, v, t, t);
            for k in 0..=20 {
                let w = -t + 2.0 * t * k as f64 / 20.0;
                let a = extent_at(&below, w.clamp(-below.m(), below.m()));
                let b = extent_at(&above, w);
                assert!((a.0 - b.0).abs() < 1e-9 * (1.0 + t * t) && (a.1 - b.1).abs() < 1e-9 * (1.0 + t * t));
            }
        }
    }

    #[test]
    fn contains_examples() {
        let c = contains(&spec(0.0, 0.0, 50.0, 0.0), &AgentState::new(0.0, 0.0));
        assert!(c.inside);
        assert_eq!(c.witness.unwrap().fuel(), 0.0);
        assert!(!contains(&spec(0.0, 0.0, 50.0, 100.0), &AgentState::new(0.0, 60.0)).inside);
    }

    #[test]
    fn witness_reaches_gap_region() {
        // w = 1, y strictly between the two pulse extremes: no three-phase plan exists.
        let r = spec(0.0, 0.0, 2.0, 4.0);
        let target = AgentState::new(2.0, 1.0);
        let c = contains(&r, &target);
        assert!(c.inside);
        let p = c.witness.unwrap();
        assert_eq!(p.levels(), vec![0, 1, 0]);
        let s = apply_plan(r.x0, &p);
        assert!(s.dist(&target) < 1e-12);
    }

    #[test]
    fn polyline_degenerate() {
        let pts = boundary_polyline(&spec(0.0, 0.0, 50.0, 0.0), 16);
        assert_eq!(pts, vec![AgentState::new(0.0, 0.0); 2]);
    }

    #[test]
    fn polyline_closed_and_banded() {
        let pts = boundary_polyline(&spec(0.0, 0.0, 50.0, 100.0), 64);
        assert_eq!(pts.first(), pts.last());
        assert!(pts.iter().all(|p| p.vel.abs() <= 50.0));
        assert!(pts.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn consensus_band_examples() {
        let ag = [(0.0, 0.0), (40.0, 64.0), (-500.0, 8.0), (-100.0, 10.0), (600.0, 30.0), (2900.0, 10.0)]
            .map(|(x, v)| AgentState::new(x, v));
        assert_eq!(consensus_band(&ag, 50.0), VelocityBand { v_lo: 14.0, v_hi: 50.0 });
        assert!(feasible(&ag, 50.0));
        let one = [AgentState::new(0.0, 3.0)];
        assert_eq!(consensus_band(&one, 2.0), VelocityBand { v_lo: 1.0, v_hi: 5.0 });
        let two = [AgentState::new(0.0, 0.0), AgentState::new(0.0, 101.0)];
        assert!(consensus_band(&two, 50.0).is_empty());
        assert!(!feasible(&two, 50.0));
        let eq = [AgentState::new(0.0, 0.0), AgentState::new(0.0, 100.0)];
        assert!(feasible(&eq, 50.0));
    }

    #[test]
    fn overlap_matches_slices() {
        let a = spec(0.0, 0.0, 3.0, 5.0);
        let b = spec(4.0, 1.0, 3.0, 5.0);
        let o = max_overlap(&[a, b]).unwrap();
        let sa = slice_extent(&a, o.point.vel).unwrap();
        let sb = slice_extent(&b, o.point.vel).unwrap();
        let direct = sa.x_hi.min(sb.x_hi) - sa.x_lo.max(sb.x_lo);
        assert!((direct - o.gap).abs() < 1e-9);
        for k in 0..=400 {
            let v = o.band.v_lo + o.band.width() * k as f64 / 400.0;
            let sa = slice_extent(&a, v).unwrap();
            let sb = slice_extent(&b, v).unwrap();
            assert!(sa.x_hi.min(sb.x_hi) - sa.x_lo.max(sb.x_lo) <= o.gap + 1e-9);
        }
    }
}
