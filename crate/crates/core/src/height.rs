//! Everything about the height `h`: the volume sensed before the busy
//! interval starts.
//!
//! Fixing `h` decouples the sensing and transmission schedules, so the whole
//! problem reduces to a one-dimensional search over `h`. The total energy is
//! piecewise smooth in `h`: its closed form changes whenever the taut-string
//! structure gains or loses a contact point. Those events happen at the
//! *critical heights*; between consecutive critical heights the energy is
//! strictly convex, so each sub-area is solved by bisection on the
//! derivative and the global optimum is the best of the local ones.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::model::{RateSchedule, Scenario};
use crate::num;
use crate::solve;
use crate::sp::{self, FloorSpec, Point};

/// Interval of heights that can contain the optimum.
///
/// `lower` is the height at which the sensing rates adjacent to the busy
/// interval balance (clipped up to the demand due by the end of the busy
/// interval when the balance point is infeasible); `upper` is the height the
/// transmission curve alone would reach at the end of the busy interval.
/// With a finite buffer `lower > upper` is legal and pins the optimum at
/// `lower`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBounds {
    pub lower: f64,
    pub upper: f64,
    /// True when `lower` came from the demand-due-by-busy-end fallback.
    pub lower_clipped: bool,
}

/// Which curve's taut-string structure changes at a critical height.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalSide {
    PreBusySensing,
    PreBusyTransmission,
    PostBusy,
}

/// A height at which some curve's contact set changes, with the contact
/// point that activates or releases there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalHeight {
    pub height: f64,
    pub anchor: Point,
    pub side: CriticalSide,
    /// Span over which rates stop depending on `h` beyond this height.
    pub unchanged_interval: (f64, f64),
}

/// Contact points bounding the h-dependent spans inside one sub-area.
///
/// With an infinite buffer the two post-busy anchors coincide (the curves
/// overlap after the busy interval); a finite buffer can hold the
/// transmitted curve below the sensed one, so each keeps its own anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaAnchors {
    /// Start of the sensing segment that ends at the busy start.
    pub sensing_pre: Point,
    /// End of the sensing segment that starts at the busy end.
    pub sensing_post: Point,
    /// Start of the transmission segment that ends at the busy end.
    pub transmission_pre: Point,
    /// End of the transmission segment that starts at the busy end.
    pub transmission_post: Point,
    /// False when the transmission curve is not pinned to `h` at the busy
    /// end, in which case transmission energy does not vary with `h`.
    pub tx_pinned: bool,
}

/// Height interval over which the energy has one fixed closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubArea {
    pub lo: f64,
    pub hi: f64,
    pub anchors: AreaAnchors,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HeightError {
    NoBusyInterval,
    /// No structural change remains above the lower bound on this side.
    ExhaustedArea,
    Sp(sp::SpError),
    Solve(&'static str),
}

impl fmt::Display for HeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightError::NoBusyInterval => write!(f, "scenario has no busy interval"),
            HeightError::ExhaustedArea => {
                write!(f, "no structural change remains above the lower bound")
            }
            HeightError::Sp(e) => write!(f, "string pulling failed: {e}"),
            HeightError::Solve(what) => write!(f, "fixed-height scheduling failed: {what}"),
        }
    }
}

impl core::error::Error for HeightError {}

impl From<sp::SpError> for HeightError {
    fn from(e: sp::SpError) -> Self {
        HeightError::Sp(e)
    }
}

/// Floor of the pre-busy sensing problem: tasks strictly before the busy
/// start, ending at `(b1, h)`.
pub(crate) fn sensing_pre_floor(scenario: &Scenario, h: f64) -> FloorSpec {
    let b1 = scenario.busy().unwrap().start;
    let tol = num::EPS_REL * scenario.horizon();
    let pts = scenario
        .tasks()
        .iter()
        .zip(scenario.cum_demand())
        .filter(|(t, _)| t.deadline < b1 - tol)
        .map(|(t, &c)| Point::new(t.deadline, c))
        .collect();
    FloorSpec::new(Point::new(0.0, 0.0), Point::new(b1, h), pts)
}

/// Floor of the post-busy problem: tasks strictly after the busy end,
/// starting at `(b2, h)` and ending at the horizon with all data delivered.
pub(crate) fn post_floor(scenario: &Scenario, h: f64) -> FloorSpec {
    let b2 = scenario.busy().unwrap().end;
    let tol = num::EPS_REL * scenario.horizon();
    let pts = scenario
        .tasks()
        .iter()
        .zip(scenario.cum_demand())
        .filter(|(t, _)| t.deadline > b2 + tol && t.deadline < scenario.horizon() - tol)
        .map(|(t, &c)| Point::new(t.deadline, c))
        .collect();
    FloorSpec::new(
        Point::new(b2, h),
        Point::new(scenario.horizon(), scenario.total_data()),
        pts,
    )
}

/// Floor of the whole-horizon transmission problem.
pub(crate) fn transmission_floor(scenario: &Scenario) -> FloorSpec {
    let tol = num::EPS_REL * scenario.horizon();
    let pts = scenario
        .tasks()
        .iter()
        .zip(scenario.cum_demand())
        .filter(|(t, _)| t.deadline < scenario.horizon() - tol)
        .map(|(t, &c)| Point::new(t.deadline, c))
        .collect();
    FloorSpec::new(
        Point::new(0.0, 0.0),
        Point::new(scenario.horizon(), scenario.total_data()),
        pts,
    )
}

/// Rate of the last pre-busy sensing segment minus the rate of the first
/// post-busy sensing segment, as a function of `h`. Strictly increasing:
/// raising `h` steepens the approach into the busy interval and flattens the
/// departure from it.
fn adjacent_rate_gap(scenario: &Scenario, h: f64) -> Result<f64, HeightError> {
    let pre = sp::pull_above_floor(&sensing_pre_floor(scenario, h))?;
    let post = sp::pull_above_floor(&post_floor(scenario, h))?;
    let pre_rate = pre.segments().last().unwrap().rate;
    let post_rate = post.segments()[0].rate;
    Ok(pre_rate - post_rate)
}

/// Bounds of the height search area.
///
/// The upper bound solely optimizes transmission: pull the transmission
/// floor (under the sliding buffer ceiling when a buffer is present) and
/// read the curve at the busy end. The lower bound balances the sensing
/// rates adjacent to the busy interval, found by bisection on the rate gap;
/// the single-segment closed form seeds the bisection and the result is
/// clipped up to the demand due by the busy end.
pub fn search_bounds(scenario: &Scenario) -> Result<SearchBounds, HeightError> {
    let busy = scenario.busy().ok_or(HeightError::NoBusyInterval)?;
    let d = scenario.total_data();

    let tx_floor = transmission_floor(scenario);
    let tx_curve = match scenario.buffer() {
        Some(d_max) => sp::pull_with_buffer(&tx_floor, d_max)?,
        None => sp::pull_above_floor(&tx_floor)?,
    };
    let upper = tx_curve.value_at(busy.end);

    let h_min = scenario.demand_by(busy.end);
    let mut lo = h_min;
    let mut hi = d;
    let (lower, lower_clipped) = if adjacent_rate_gap(scenario, lo)? >= 0.0 {
        (h_min, true)
    } else if adjacent_rate_gap(scenario, hi)? <= 0.0 {
        (d, false)
    } else {
        // First midpoint: the balance of one pre-busy and one post-busy
        // segment, exact when no interior contacts exist.
        let mut mid = d * busy.start / (busy.start + scenario.horizon() - busy.end);
        if mid <= lo || mid >= hi {
            mid = 0.5 * (lo + hi);
        }
        let tol = 1e-10 * d;
        for _ in 0..200 {
            if adjacent_rate_gap(scenario, mid)? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= tol {
                break;
            }
            mid = 0.5 * (lo + hi);
        }
        (0.5 * (lo + hi), false)
    };

    Ok(SearchBounds {
        lower,
        upper,
        lower_clipped,
    })
}

/// Forward max-slope anchor chain over `points`, each anchor extended to
/// `extend_to`: the height at which that contact releases.
fn forward_sweep(points: &[Point], extend_to: f64) -> Vec<(f64, Point)> {
    let mut out = Vec::new();
    let mut cur = Point::new(0.0, 0.0);
    let mut idx = 0;
    while idx < points.len() {
        let slope = |p: Point| (p.v - cur.v) / (p.t - cur.t);
        let mut best = f64::NEG_INFINITY;
        for &p in &points[idx..] {
            best = best.max(slope(p));
        }
        let mut pick = idx;
        for (j, &p) in points.iter().enumerate().skip(idx) {
            if num::ge(slope(p), best) {
                pick = j;
            }
        }
        let anchor = points[pick];
        let s = slope(anchor);
        out.push((anchor.v + s * (extend_to - anchor.t), anchor));
        cur = anchor;
        idx = pick + 1;
    }
    out
}

/// Backward min-slope anchor chain from the terminus, each anchor extended
/// back to `extend_to`.
fn backward_sweep(points: &[Point], terminus: Point, extend_to: f64) -> Vec<(f64, Point)> {
    let mut out = Vec::new();
    let mut cur = terminus;
    let mut idx = points.len();
    while idx > 0 {
        let slope = |p: Point| (cur.v - p.v) / (cur.t - p.t);
        let mut best = f64::INFINITY;
        for &p in &points[..idx] {
            best = best.min(slope(p));
        }
        // Earliest anchor achieving the min slope merges collinear spans.
        let mut pick = idx - 1;
        for (j, &p) in points.iter().enumerate().take(idx) {
            if num::ge(best, slope(p)) {
                pick = j;
                break;
            }
        }
        let anchor = points[pick];
        let s = slope(anchor);
        out.push((anchor.v - s * (anchor.t - extend_to), anchor));
        cur = anchor;
        idx = pick;
    }
    out
}

/// All critical heights of the infinite-buffer problem inside the search
/// area, sorted strictly decreasing.
///
/// Three sweeps cover the three h-dependent curve parts: the pre-busy
/// sensing chain extended to the busy start, the pre-busy transmission
/// chain extended to the busy end (its ceiling lives there), and the shared
/// post-busy chain walked backward from the horizon.
pub fn critical_heights(scenario: &Scenario, bounds: &SearchBounds) -> Vec<CriticalHeight> {
    let busy = match scenario.busy() {
        Some(b) => b,
        None => return Vec::new(),
    };
    let tol = num::EPS_REL * scenario.horizon();
    let task_points = |before: f64| -> Vec<Point> {
        scenario
            .tasks()
            .iter()
            .zip(scenario.cum_demand())
            .filter(|(t, _)| t.deadline < before - tol)
            .map(|(t, &c)| Point::new(t.deadline, c))
            .collect()
    };

    let mut raw: Vec<CriticalHeight> = Vec::new();
    for (h, anchor) in forward_sweep(&task_points(busy.start), busy.start) {
        raw.push(CriticalHeight {
            height: h,
            anchor,
            side: CriticalSide::PreBusySensing,
            unchanged_interval: (0.0, anchor.t),
        });
    }
    for (h, anchor) in forward_sweep(&task_points(busy.end), busy.end) {
        raw.push(CriticalHeight {
            height: h,
            anchor,
            side: CriticalSide::PreBusyTransmission,
            unchanged_interval: (0.0, anchor.t),
        });
    }
    let post_points: Vec<Point> = scenario
        .tasks()
        .iter()
        .zip(scenario.cum_demand())
        .filter(|(t, _)| t.deadline > busy.end + tol && t.deadline < scenario.horizon() - tol)
        .map(|(t, &c)| Point::new(t.deadline, c))
        .collect();
    let terminus = Point::new(scenario.horizon(), scenario.total_data());
    for (h, anchor) in backward_sweep(&post_points, terminus, busy.end) {
        raw.push(CriticalHeight {
            height: h,
            anchor,
            side: CriticalSide::PostBusy,
            unchanged_interval: (anchor.t, scenario.horizon()),
        });
    }

    filter_and_sort(raw, bounds, scenario.total_data())
}

fn filter_and_sort(
    mut raw: Vec<CriticalHeight>,
    bounds: &SearchBounds,
    d_total: f64,
) -> Vec<CriticalHeight> {
    let tol = num::EPS_REL * d_total;
    raw.retain(|c| c.height > bounds.lower + tol && c.height < bounds.upper - tol);
    raw.sort_by(|a, b| b.height.total_cmp(&a.height));
    raw.dedup_by(|a, b| (a.height - b.height).abs() <= tol);
    raw
}

/// Geometry of one h-dependent curve side for the finite-buffer search.
#[derive(Clone, Debug, PartialEq)]
pub struct SideState {
    pub side: CriticalSide,
    /// True when the curve runs forward into `(b, h)`; false when it leaves
    /// `(b, h)` toward later times.
    pub forward: bool,
    /// Fixed end of the h-dependent segment.
    pub anchor: Point,
    /// Floor points the pivoting segment can newly touch.
    pub candidates: Vec<Point>,
    /// Rate of the adjacent (second-nearest) segment, if any.
    pub second_rate: Option<f64>,
    /// Far end of the second-nearest segment.
    pub second_anchor: Option<Point>,
}

/// The next height below `h` at which this side's taut-string structure
/// changes: either the pivoting segment touches a new floor point (a split)
/// or it aligns with the adjacent segment and a contact releases (a merge,
/// possible only across a ceiling contact). Returns the new height and the
/// contact point involved.
pub fn next_critical_height(
    state: &SideState,
    b: f64,
    h: f64,
) -> Result<(f64, Point), HeightError> {
    let mut best: Option<(f64, Point)> = None;
    let mut consider = |h_new: f64, p: Point| {
        if best.is_none_or(|(cur, _)| h_new > cur) {
            best = Some((h_new, p));
        }
    };
    if state.forward {
        let r1 = (h - state.anchor.v) / (b - state.anchor.t);
        for &p in &state.candidates {
            let w = (p.v - state.anchor.v) / (p.t - state.anchor.t);
            consider(p.v + w * (b - p.t), p);
        }
        if let (Some(r2), Some(far)) = (state.second_rate, state.second_anchor) {
            // Rates align across the ceiling contact and it releases; the
            // contact itself is the critical point.
            if r1 > r2 {
                consider(far.v + r2 * (b - far.t), state.anchor);
            }
        }
    } else {
        let r1 = (state.anchor.v - h) / (state.anchor.t - b);
        for &p in &state.candidates {
            let w = (state.anchor.v - p.v) / (state.anchor.t - p.t);
            consider(p.v - w * (p.t - b), p);
        }
        if let (Some(r2), Some(far)) = (state.second_rate, state.second_anchor) {
            if r1 < r2 {
                consider(far.v - r2 * (far.t - b), state.anchor);
            }
        }
    }
    match best {
        Some(found) => Ok(found),
        None => Err(HeightError::ExhaustedArea),
    }
}

/// Extracts the four side states from a fixed-height schedule pair.
fn extract_side_states(
    scenario: &Scenario,
    sensing: &RateSchedule,
    transmission: &RateSchedule,
    h: f64,
) -> Vec<(SideState, f64)> {
    let busy = scenario.busy().unwrap();
    let tol_t = num::EPS_REL * scenario.horizon();
    let tol_v = num::EPS_REL * scenario.total_data();
    let task_points: Vec<Point> = scenario
        .tasks()
        .iter()
        .zip(scenario.cum_demand())
        .map(|(t, &c)| Point::new(t.deadline, c))
        .collect();
    let mut out = Vec::with_capacity(4);

    // A merge can release the contact shared by the nearest and second
    // segments only when that contact hangs on a ceiling; a floor contact
    // just flips its bend direction as the rates cross, with no structural
    // change.
    let anchor_releasable =
        |anchor: Point| anchor.v > scenario.demand_by(anchor.t) + tol_v.max(1e-12);

    let mut push_forward = |curve: &RateSchedule, side: CriticalSide, b: f64| {
        // Maximal constant-rate span ending at b.
        let segs = curve.segments();
        let idx = match segs.iter().rposition(|s| s.end <= b + tol_t && s.end > b - tol_t) {
            Some(i) => i,
            None => return,
        };
        let anchor = Point::new(segs[idx].start, curve.value_at(segs[idx].start));
        let candidates = task_points
            .iter()
            .filter(|p| p.t > anchor.t + tol_t && p.t < b - tol_t)
            .copied()
            .collect();
        let (second_rate, second_anchor) = if idx > 0 && anchor_releasable(anchor) {
            (
                Some(segs[idx - 1].rate),
                Some(Point::new(
                    segs[idx - 1].start,
                    curve.value_at(segs[idx - 1].start),
                )),
            )
        } else {
            (None, None)
        };
        out.push((
            SideState {
                side,
                forward: true,
                anchor,
                candidates,
                second_rate,
                second_anchor,
            },
            b,
        ));
    };
    push_forward(sensing, CriticalSide::PreBusySensing, busy.start);
    if (transmission.value_at(busy.end) - h).abs() <= tol_v.max(1e-12) {
        push_forward(transmission, CriticalSide::PreBusyTransmission, busy.end);
    }

    let mut push_backward = |curve: &RateSchedule, side: CriticalSide, b: f64| {
        let segs = curve.segments();
        let idx = match segs.iter().position(|s| s.start >= b - tol_t && s.start < b + tol_t) {
            Some(i) => i,
            None => return,
        };
        let anchor = Point::new(segs[idx].end, curve.value_at(segs[idx].end));
        let candidates = task_points
            .iter()
            .filter(|p| p.t > b + tol_t && p.t < anchor.t - tol_t)
            .copied()
            .collect();
        let (second_rate, second_anchor) = if idx + 1 < segs.len() && anchor_releasable(anchor) {
            (
                Some(segs[idx + 1].rate),
                Some(Point::new(
                    segs[idx + 1].end,
                    curve.value_at(segs[idx + 1].end),
                )),
            )
        } else {
            (None, None)
        };
        out.push((
            SideState {
                side,
                forward: false,
                anchor,
                candidates,
                second_rate,
                second_anchor,
            },
            b,
        ));
    };
    push_backward(sensing, CriticalSide::PostBusy, busy.end);
    if (transmission.value_at(busy.end) - h).abs() <= tol_v.max(1e-12) {
        push_backward(transmission, CriticalSide::PostBusy, busy.end);
    }
    out
}

/// Critical heights of the finite-buffer problem, found by walking down from
/// the upper bound: at each step the four curve sides propose their next
/// structural event and the largest proposal below the current height wins.
pub fn critical_heights_buffered(
    scenario: &Scenario,
    bounds: &SearchBounds,
) -> Result<Vec<CriticalHeight>, HeightError> {
    if scenario.busy().is_none() {
        return Ok(Vec::new());
    }
    let d = scenario.total_data();
    let tol = num::EPS_REL * d;
    // The probe must sit far enough below the last event for the slope tie
    // band not to swallow the new contact; events packed tighter than this
    // below a boundary are energetically irrelevant.
    let probe_step = 1e-6 * d;
    let mut out: Vec<CriticalHeight> = Vec::new();
    let mut h_cur = bounds.upper;
    // Each event consumes or releases one contact; far more events than
    // contact points means a cycle, which the cap turns into a hard error.
    let cap = 16 * (scenario.tasks().len() + 4);
    for _ in 0..cap {
        let h_probe = h_cur - probe_step;
        if h_probe <= bounds.lower {
            break;
        }
        let (sensing, transmission) = solve::rates_for_height_buffered(scenario, h_probe)
            .map_err(|_| HeightError::Solve("fixed-height scheduling failed in driver"))?;
        let sides = extract_side_states(scenario, &sensing, &transmission, h_probe);
        let mut next: Option<(f64, &SideState, Point)> = None;
        for (state, b) in &sides {
            if let Ok((h_new, p)) = next_critical_height(state, *b, h_probe) {
                if h_new < h_cur - tol
                    && h_new > bounds.lower + tol
                    && next.as_ref().is_none_or(|(cur, _, _)| h_new > *cur)
                {
                    next = Some((h_new, state, p));
                }
            }
        }
        match next {
            Some((h_new, state, anchor)) => {
                out.push(CriticalHeight {
                    height: h_new,
                    anchor,
                    side: state.side,
                    unchanged_interval: if state.forward {
                        (0.0, anchor.t)
                    } else {
                        (anchor.t, scenario.horizon())
                    },
                });
                h_cur = h_new;
            }
            None => return Ok(dedup_desc(out, d)),
        }
    }
    Ok(dedup_desc(out, d))
}

fn dedup_desc(mut v: Vec<CriticalHeight>, d_total: f64) -> Vec<CriticalHeight> {
    let tol = num::EPS_REL * d_total;
    v.sort_by(|a, b| b.height.total_cmp(&a.height));
    v.dedup_by(|a, b| (a.height - b.height).abs() <= tol);
    v
}

/// Reads the sub-area contact anchors off the schedule pair at a single
/// height strictly inside the area (the anchor set is constant there).
pub(crate) fn area_anchors(scenario: &Scenario, h_mid: f64) -> Result<AreaAnchors, HeightError> {
    let busy = scenario.busy().ok_or(HeightError::NoBusyInterval)?;
    let (sensing, transmission) = if scenario.buffer().is_some() {
        solve::rates_for_height_buffered(scenario, h_mid)
    } else {
        solve::rates_for_height(scenario, h_mid)
    }
    .map_err(|_| HeightError::Solve("fixed-height scheduling failed at area midpoint"))?;

    let span_start = |curve: &RateSchedule, t: f64| {
        let segs = curve.segments();
        let idx = segs
            .iter()
            .rposition(|s| s.start < t)
            .unwrap_or(0);
        Point::new(segs[idx].start, curve.value_at(segs[idx].start))
    };
    let span_end = |curve: &RateSchedule, t: f64| {
        let segs = curve.segments();
        let idx = segs
            .iter()
            .position(|s| s.end > t)
            .unwrap_or(segs.len() - 1);
        Point::new(segs[idx].end, curve.value_at(segs[idx].end))
    };

    let tol_v = num::EPS_REL * scenario.total_data();
    let tx_pinned = (transmission.value_at(busy.end) - h_mid).abs() <= tol_v.max(1e-12);
    Ok(AreaAnchors {
        sensing_pre: span_start(&sensing, busy.start),
        sensing_post: span_end(&sensing, busy.end),
        transmission_pre: span_start(&transmission, busy.end),
        transmission_post: span_end(&transmission, busy.end),
        tx_pinned,
    })
}

/// Derivative of the h-dependent part of the total energy inside a sub-area.
///
/// Sensing contributes quadratically through the segments adjacent to the
/// busy interval; transmission exponentially through the segments adjacent
/// to the busy end. All other segments do not move with `h`.
fn energy_slope(scenario: &Scenario, anchors: &AreaAnchors, h: f64) -> f64 {
    let busy = scenario.busy().unwrap();
    let p = scenario.params();
    let ks = p.sense_coeff();
    let s1 = anchors.sensing_pre;
    let s2 = anchors.sensing_post;
    let mut slope = 2.0 * ks * ((h - s1.v) / (busy.start - s1.t) - (s2.v - h) / (s2.t - busy.end));
    if anchors.tx_pinned {
        let kt = p.tx_coeff();
        let b = p.bandwidth;
        let s3 = anchors.transmission_pre;
        let s4 = anchors.transmission_post;
        // exp_m1 keeps the difference of two near-unity exponentials exact.
        slope += (kt / b)
            * (math::exp_m1((h - s3.v) / ((busy.end - s3.t) * b))
                - math::exp_m1((s4.v - h) / ((s4.t - busy.end) * b)));
    }
    slope
}

/// Evaluates the true total energy at `h` through the full schedule pair.
pub(crate) fn energy_at(scenario: &Scenario, h: f64) -> Result<f64, HeightError> {
    let (sensing, transmission) = if scenario.buffer().is_some() {
        solve::rates_for_height_buffered(scenario, h)
    } else {
        solve::rates_for_height(scenario, h)
    }
    .map_err(|_| HeightError::Solve("fixed-height scheduling failed"))?;
    Ok(crate::model::sensing_energy(&sensing, scenario.params())
        + crate::model::transmission_energy(&transmission, scenario.params()))
}

/// Minimizes the energy over one sub-area.
///
/// The derivative is strictly increasing, so a sign change is bracketed and
/// bisected; with a constant sign the cheaper boundary wins. Returns the
/// minimizer and the full (not just h-dependent) energy there.
pub fn local_optimum(area: &SubArea, scenario: &Scenario) -> Result<(f64, f64), HeightError> {
    let d = scenario.total_data();
    let tol = 1e-10 * d;
    let (mut lo, mut hi) = (area.lo, area.hi);
    let h_star = if energy_slope(scenario, &area.anchors, lo) >= 0.0 {
        lo
    } else if energy_slope(scenario, &area.anchors, hi) <= 0.0 {
        hi
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if energy_slope(scenario, &area.anchors, mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= tol {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    Ok((h_star, energy_at(scenario, h_star)?))
}

/// Splits the search area at the critical heights into sub-areas with their
/// contact anchors.
pub fn sub_areas(
    scenario: &Scenario,
    bounds: &SearchBounds,
    criticals: &[CriticalHeight],
) -> Result<Vec<SubArea>, HeightError> {
    let mut edges = vec![bounds.lower];
    edges.extend(criticals.iter().rev().map(|c| c.height));
    edges.push(bounds.upper);
    let mut out = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= num::EPS_REL * scenario.total_data() {
            continue;
        }
        let anchors = area_anchors(scenario, 0.5 * (lo + hi))?;
        out.push(SubArea { lo, hi, anchors });
    }
    Ok(out)
}
