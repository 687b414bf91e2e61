//! String-pulling kernels.
//!
//! A schedule's cumulative curve must thread a region bounded below by the
//! demand staircase (the *floor*) and, optionally, above by causality or
//! buffer limits (the *ceiling*). Because the per-rate costs are strictly
//! convex, the cheapest curve is the shortest piecewise-linear path from the
//! origin to the terminus inside that region — the shape a stretched string
//! takes when pulled taut. The vertices of the taut string give the optimal
//! piecewise-constant rates.
//!
//! Three kernels cover the cases that arise:
//!
//! * [`pull_above_floor`] — no ceiling; greedy max-slope recursion.
//! * [`pull_in_tunnel`]   — arbitrary per-instant floor/ceiling bounds.
//! * [`pull_with_buffer`] — ceiling that slides up as demands are consumed
//!   by the receiver.

use alloc::vec::Vec;
use core::fmt;

use crate::model::RateSchedule;
use crate::num;

/// A point on a cumulative curve: time `t` seconds, volume `v` bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub t: f64,
    pub v: f64,
}

impl Point {
    pub fn new(t: f64, v: f64) -> Self {
        Point { t, v }
    }
}

/// Floor of a string-pulling problem: cumulative demands that the curve must
/// meet or exceed at each breakpoint, with fixed start and end points.
#[derive(Clone, Debug, PartialEq)]
pub struct FloorSpec {
    pub origin: Point,
    pub terminus: Point,
    /// Strictly increasing in time, nondecreasing in volume.
    pub breakpoints: Vec<Point>,
}

impl FloorSpec {
    pub fn new(origin: Point, terminus: Point, breakpoints: Vec<Point>) -> Self {
        FloorSpec {
            origin,
            terminus,
            breakpoints,
        }
    }

    /// Span length in seconds.
    fn span(&self) -> f64 {
        self.terminus.t - self.origin.t
    }

    /// Drops breakpoints that coincide with the endpoints and validates the
    /// remaining geometry. Returns the cleaned interior breakpoints.
    fn clean(&self) -> Result<Vec<Point>, SpError> {
        let span = self.span();
        if !(self.origin.t.is_finite() && self.terminus.t.is_finite()) || span < 0.0 {
            return Err(SpError::InvalidFloor);
        }
        let t_tol = num::EPS_REL * span.max(1.0);
        let v_scale = self.terminus.v.abs().max(self.origin.v.abs()).max(1.0);
        if span <= t_tol {
            return if self.breakpoints.is_empty()
                && num::close(self.origin.v, self.terminus.v, v_scale)
            {
                Err(SpError::EmptyFloor)
            } else {
                Err(SpError::InvalidFloor)
            };
        }
        if self.terminus.v < self.origin.v - num::EPS_REL * v_scale {
            return Err(SpError::InvalidFloor);
        }
        let mut cleaned: Vec<Point> = Vec::with_capacity(self.breakpoints.len());
        let mut prev_t = self.origin.t;
        let mut prev_v = f64::NEG_INFINITY;
        for &p in &self.breakpoints {
            if p.t <= self.origin.t + t_tol {
                // Breakpoints at the origin are legal only when slack.
                if p.v > self.origin.v + num::EPS_REL * v_scale {
                    return Err(SpError::InvalidFloor);
                }
                continue;
            }
            if p.t >= self.terminus.t - t_tol {
                if p.v > self.terminus.v + num::EPS_REL * v_scale {
                    return Err(SpError::InvalidFloor);
                }
                continue;
            }
            if p.t <= prev_t + t_tol {
                // Duplicate instant: keep the larger demand.
                if let Some(last) = cleaned.last_mut() {
                    last.v = last.v.max(p.v);
                    prev_v = last.v;
                    continue;
                }
            }
            if p.v < prev_v - num::EPS_REL * v_scale || p.t <= prev_t {
                return Err(SpError::InvalidFloor);
            }
            cleaned.push(p);
            prev_t = p.t;
            prev_v = p.v;
        }
        if let Some(last) = cleaned.last() {
            if last.v > self.terminus.v + num::EPS_REL * v_scale {
                return Err(SpError::InvalidFloor);
            }
        }
        Ok(cleaned)
    }
}

/// Floor plus per-instant ceilings. An instant may carry a floor value, a
/// ceiling value, or both; at every common time the ceiling must be at least
/// the floor, otherwise the tunnel is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Tunnel {
    pub floor: FloorSpec,
    pub ceiling: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpError {
    /// The floor span is empty; there is nothing to schedule.
    EmptyFloor,
    /// Breakpoints are out of order, decreasing, or exceed the terminus.
    InvalidFloor,
    /// Some ceiling lies below the floor (or below the origin) at a reachable
    /// instant.
    InfeasibleTunnel { time: f64 },
    /// The sliding buffer ceiling pinches below the demand floor.
    InfeasibleBuffer { time: f64 },
}

impl fmt::Display for SpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpError::EmptyFloor => write!(f, "floor span is empty"),
            SpError::InvalidFloor => write!(f, "floor breakpoints are invalid"),
            SpError::InfeasibleTunnel { time } => {
                write!(f, "tunnel is empty at t = {time} s")
            }
            SpError::InfeasibleBuffer { time } => {
                write!(f, "buffer ceiling falls below the demand floor at t = {time} s")
            }
        }
    }
}

impl core::error::Error for SpError {}

/// Shortest cumulative path from `origin` to `terminus` staying on or above
/// the floor.
///
/// Greedy max-slope recursion: from the current vertex, the next contact is
/// the remaining breakpoint (terminus included) with the largest chord slope;
/// on ties the latest wins, which merges collinear spans. The resulting rates
/// are non-increasing and the curve touches the floor exactly at the selected
/// breakpoints.
pub fn pull_above_floor(floor: &FloorSpec) -> Result<RateSchedule, SpError> {
    let mut points = floor.clean()?;
    points.push(floor.terminus);
    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(points.len() + 1);
    vertices.push((floor.origin.t, floor.origin.v));
    let mut cur = floor.origin;
    let mut idx = 0;
    while idx < points.len() {
        let slope = |p: Point| (p.v - cur.v) / (p.t - cur.t);
        let mut best = slope(points[idx]);
        for &p in &points[idx + 1..] {
            best = best.max(slope(p));
        }
        // Latest breakpoint achieving the max slope (within the tie band).
        let mut pick = idx;
        for (j, &p) in points.iter().enumerate().skip(idx) {
            if num::ge(slope(p), best) {
                pick = j;
            }
        }
        cur = points[pick];
        vertices.push((cur.t, cur.v));
        idx = pick + 1;
    }
    RateSchedule::from_vertices(&vertices).map_err(|_| SpError::InvalidFloor)
}

/// One merged constraint instant inside a tunnel.
#[derive(Clone, Copy, Debug)]
struct Instant {
    t: f64,
    floor: Option<f64>,
    ceil: Option<f64>,
}

/// Shortest cumulative path through a floor/ceiling tunnel.
///
/// From the current vertex, each upcoming instant admits an interval of
/// feasible constant rates. The intervals are intersected in time order;
/// when the intersection would become empty the string must bend at the
/// binding bound — the floor contact that forced the largest lower bound if
/// the new interval falls below, or the ceiling contact that forced the
/// smallest upper bound if it falls above — and the walk restarts from that
/// contact. Rates therefore decrease only at floor contacts and increase
/// only at ceiling contacts.
pub fn pull_in_tunnel(tunnel: &Tunnel) -> Result<RateSchedule, SpError> {
    let floor_points = tunnel.floor.clean()?;
    let origin = tunnel.floor.origin;
    let terminus = tunnel.floor.terminus;
    let span = terminus.t - origin.t;
    let t_tol = num::EPS_REL * span.max(1.0);
    let v_scale = terminus.v.abs().max(origin.v.abs()).max(1.0);
    let v_tol = num::EPS_REL * v_scale;

    // Merge floor and ceiling instants.
    let mut instants: Vec<Instant> = floor_points
        .iter()
        .map(|p| Instant {
            t: p.t,
            floor: Some(p.v),
            ceil: None,
        })
        .collect();
    for &c in &tunnel.ceiling {
        if c.t <= origin.t + t_tol {
            if c.v < origin.v - v_tol {
                return Err(SpError::InfeasibleTunnel { time: c.t });
            }
            continue;
        }
        if c.t >= terminus.t - t_tol {
            if c.v < terminus.v - v_tol {
                return Err(SpError::InfeasibleTunnel { time: c.t });
            }
            continue;
        }
        match instants
            .iter_mut()
            .find(|i| (i.t - c.t).abs() <= t_tol)
        {
            Some(i) => i.ceil = Some(i.ceil.map_or(c.v, |x: f64| x.min(c.v))),
            None => instants.push(Instant {
                t: c.t,
                floor: None,
                ceil: Some(c.v),
            }),
        }
    }
    // The terminus must be hit exactly: both bounds.
    instants.push(Instant {
        t: terminus.t,
        floor: Some(terminus.v),
        ceil: Some(terminus.v),
    });
    instants.sort_by(|a, b| a.t.total_cmp(&b.t));

    // Emptiness pre-check: every ceiling must clear the origin and every
    // floor at or before it.
    let mut running_floor = origin.v;
    for i in &instants {
        if let Some(f) = i.floor {
            running_floor = running_floor.max(f);
        }
        if let Some(c) = i.ceil {
            if c < running_floor - v_tol {
                return Err(SpError::InfeasibleTunnel { time: i.t });
            }
        }
    }

    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(instants.len() + 1);
    vertices.push((origin.t, origin.v));
    let mut cur = origin;
    let mut start = 0;
    let mut low: Vec<f64> = Vec::with_capacity(instants.len());
    let mut high: Vec<f64> = Vec::with_capacity(instants.len());
    while start < instants.len() {
        low.clear();
        high.clear();
        let mut lo = 0.0_f64;
        let mut hi = f64::INFINITY;
        let mut bend: Option<(usize, bool)> = None; // (index, at_ceiling)
        for (k, inst) in instants[start..].iter().enumerate() {
            let dt = inst.t - cur.t;
            let rl = inst
                .floor
                .map_or(0.0, |f| ((f - cur.v) / dt).max(0.0));
            let rh = inst.ceil.map_or(f64::INFINITY, |c| (c - cur.v) / dt);
            // Bound-crossing tests carry the value-space tie band scaled to
            // a rate over this interval; near-pinching tunnels otherwise
            // read reconstruction noise in the bound values as emptiness.
            // Infinite bounds stay out of the band: they cannot bind.
            let finite = |x: f64| if x.is_finite() { x.abs() } else { 0.0 };
            let band = v_tol / dt + num::EPS_REL * rl.abs().max(finite(rh)).max(lo.abs()).max(finite(hi));
            if rl > hi + band {
                // Falls above: bend at the latest ceiling contact achieving hi.
                let pick = high[..k]
                    .iter()
                    .rposition(|&h| num::ge(hi, h))
                    .expect("a processed instant achieves the binding upper bound");
                bend = Some((start + pick, true));
                break;
            }
            if rh < lo - band {
                // Falls below: bend at the latest floor contact achieving lo.
                let pick = low[..k]
                    .iter()
                    .rposition(|&l| num::ge(l, lo))
                    .expect("a processed instant achieves the binding lower bound");
                bend = Some((start + pick, false));
                break;
            }
            low.push(rl);
            high.push(rh);
            lo = lo.max(rl);
            hi = hi.min(rh);
        }
        let (pick, at_ceiling) = match bend {
            Some(b) => b,
            None => {
                // Every remaining interval intersects: land on the latest
                // instant whose lower bound is binding (the terminus always
                // qualifies because its bounds are equal).
                let pick = low
                    .iter()
                    .rposition(|&l| num::ge(l, lo))
                    .expect("terminus lower bound is in the final intersection");
                (start + pick, false)
            }
        };
        let inst = instants[pick];
        let v = if at_ceiling {
            inst.ceil.unwrap()
        } else {
            match inst.floor {
                Some(f) => f.max(cur.v),
                // A pure-ceiling instant can bind from below only with a
                // zero rate span.
                None => cur.v,
            }
        };
        vertices.push((inst.t, v));
        cur = Point::new(inst.t, v);
        start = pick + 1;
    }
    RateSchedule::from_vertices(&vertices).map_err(|_| SpError::InvalidFloor)
}

/// Shortest cumulative path above the floor while the receiver's buffer is
/// never overfilled.
///
/// The buffer admits at most `demand consumed so far + d_max` cumulative
/// bits, and consumption happens at the floor breakpoints, so the ceiling at
/// each breakpoint is the previous breakpoint's cumulative demand plus
/// `d_max` — a ceiling that slides up as the string advances.
pub fn pull_with_buffer(floor: &FloorSpec, d_max: f64) -> Result<RateSchedule, SpError> {
    let points = floor.clean()?;
    let mut ceiling = Vec::with_capacity(points.len() + 1);
    let mut prev_v = floor.origin.v;
    for p in &points {
        ceiling.push(Point::new(p.t, prev_v + d_max));
        prev_v = p.v;
    }
    let terminus_cap = prev_v + d_max;
    if terminus_cap < floor.terminus.v - num::EPS_REL * floor.terminus.v.abs().max(1.0) {
        return Err(SpError::InfeasibleBuffer {
            time: floor.terminus.t,
        });
    }
    let tunnel = Tunnel {
        floor: FloorSpec::new(floor.origin, floor.terminus, points),
        ceiling,
    };
    pull_in_tunnel(&tunnel).map_err(|e| match e {
        SpError::InfeasibleTunnel { time } => SpError::InfeasibleBuffer { time },
        other => other,
    })
}
