//! Fixed-height schedulers, the global height optimizers and the baseline
//! schemes.
//!
//! Given the height `h`, sensing splits into two independent floor pulls
//! that meet the busy interval at `h`, and transmission becomes a tunnel
//! pull whose ceiling at the busy end is `h` (plus the sliding buffer
//! ceiling when the receiver buffer is finite). The optimizers then search
//! `h` over the bounded area, one convex sub-area at a time.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::height::{self, CriticalHeight, SearchBounds, SubArea};
use crate::model::{
    check_feasibility, sensing_energy, transmission_energy, RateSchedule, Scenario, Segment,
};
use crate::num;
use crate::sp::{self, Point, Tunnel};

/// How the height was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Joint optimization over the whole search area.
    Jstrc,
    /// Height fixed at the upper bound of the search area.
    Ub,
    /// Height fixed at the lower bound of the search area.
    Lb,
    /// Height drawn uniformly from the search area.
    Rh,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Jstrc => "JSTRC",
            Scheme::Ub => "UB",
            Scheme::Lb => "LB",
            Scheme::Rh => "RH",
        }
    }
}

/// Baseline selector for [`baseline`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineScheme {
    Ub,
    Lb,
    Rh,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    /// The height is below the demand due by the end of the busy interval,
    /// so sensing cannot be feasible.
    InfeasibleHeight { minimum: f64 },
    /// The buffer pinches the transmission tunnel shut.
    InfeasibleBuffer { time: f64 },
    /// Operation requires a busy interval.
    NoBusyInterval,
    /// Operation requires a finite buffer.
    BufferMissing,
    /// Operation requires an infinite buffer; use the buffered variant.
    BufferPresent,
    Sp(sp::SpError),
    Height(&'static str),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InfeasibleHeight { minimum } => {
                write!(f, "height below the demand due by the busy end ({minimum} bits)")
            }
            SolveError::InfeasibleBuffer { time } => {
                write!(f, "buffer pinches the transmission tunnel at t = {time} s")
            }
            SolveError::NoBusyInterval => write!(f, "scenario has no busy interval"),
            SolveError::BufferMissing => write!(f, "scenario has no buffer bound"),
            SolveError::BufferPresent => {
                write!(f, "scenario has a buffer bound; use the buffered solver")
            }
            SolveError::Sp(e) => write!(f, "string pulling failed: {e}"),
            SolveError::Height(what) => write!(f, "height search failed: {what}"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<sp::SpError> for SolveError {
    fn from(e: sp::SpError) -> Self {
        match e {
            sp::SpError::InfeasibleBuffer { time } => SolveError::InfeasibleBuffer { time },
            other => SolveError::Sp(other),
        }
    }
}

impl From<height::HeightError> for SolveError {
    fn from(e: height::HeightError) -> Self {
        match e {
            height::HeightError::NoBusyInterval => SolveError::NoBusyInterval,
            height::HeightError::Sp(e) => e.into(),
            _ => SolveError::Height("height search failed"),
        }
    }
}

/// Per-sub-area search diagnostics carried by a [`Solution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubAreaReport {
    pub lo: f64,
    pub hi: f64,
    pub h_star: f64,
    pub energy: f64,
}

/// A solved scenario: the chosen height, both schedules, the energy
/// breakdown and the diagnostic trace of the search.
#[derive(Clone, Debug)]
pub struct Solution {
    pub scheme: Scheme,
    /// `None` when the scenario has no busy interval (no height dimension).
    pub height: Option<f64>,
    pub sensing: RateSchedule,
    pub transmission: RateSchedule,
    pub sensing_energy: f64,
    pub transmission_energy: f64,
    pub total_energy: f64,
    pub bounds: Option<SearchBounds>,
    pub critical_heights: Vec<CriticalHeight>,
    pub sub_areas: Vec<SubAreaReport>,
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    scenario: &Scenario,
    scheme: Scheme,
    height: Option<f64>,
    sensing: RateSchedule,
    transmission: RateSchedule,
    bounds: Option<SearchBounds>,
    critical_heights: Vec<CriticalHeight>,
    sub_areas: Vec<SubAreaReport>,
) -> Solution {
    let report = check_feasibility(scenario, &sensing, &transmission);
    assert!(
        report.is_feasible(),
        "solver produced an infeasible schedule pair (scheme {:?}, h {:?}): {:?}",
        scheme,
        height,
        report
    );
    let es = sensing_energy(&sensing, scenario.params());
    let et = transmission_energy(&transmission, scenario.params());
    Solution {
        scheme,
        height,
        sensing,
        transmission,
        sensing_energy: es,
        transmission_energy: et,
        total_energy: es + et,
        bounds,
        critical_heights,
        sub_areas,
    }
}

/// Both schedules for a scenario without a busy interval: sensing and
/// transmission share the floor pull and coincide everywhere.
fn no_busy_pair(scenario: &Scenario) -> Result<(RateSchedule, RateSchedule), SolveError> {
    let floor = height::transmission_floor(scenario);
    let sensing = sp::pull_above_floor(&floor)?;
    let transmission = match scenario.buffer() {
        Some(d_max) => sp::pull_with_buffer(&floor, d_max)?,
        None => sensing.clone(),
    };
    Ok((sensing, transmission))
}

/// Optimal schedule pair for a fixed height with an infinite buffer.
///
/// Sensing: pull above the pre-busy floor into `(b1, h)`, stay at zero
/// through the busy interval, then pull from `(b2, h)` to full delivery.
/// Transmission: pull the whole-horizon tunnel whose ceiling is `h` at both
/// busy endpoints. Without a busy interval both schedules reduce to the
/// common floor pull.
pub fn rates_for_height(
    scenario: &Scenario,
    h: f64,
) -> Result<(RateSchedule, RateSchedule), SolveError> {
    let busy = match scenario.busy() {
        Some(b) => b,
        None => return no_busy_pair(scenario),
    };
    let minimum = scenario.demand_by(busy.end);
    if h < minimum - num::EPS_REL * scenario.total_data() {
        return Err(SolveError::InfeasibleHeight { minimum });
    }
    let sensing = sensing_schedule(scenario, h)?;
    let tunnel = Tunnel {
        floor: height::transmission_floor(scenario),
        ceiling: vec![Point::new(busy.start, h), Point::new(busy.end, h)],
    };
    let transmission = sp::pull_in_tunnel(&tunnel)?;
    Ok((sensing, transmission))
}

/// Optimal schedule pair for a fixed height with a finite receiver buffer.
///
/// Sensing is untouched by the buffer. The transmission ceiling combines the
/// height at the busy endpoints with the sliding buffer bound: at each task
/// instant the receiver may hold at most the demand already consumed plus
/// the buffer size.
pub fn rates_for_height_buffered(
    scenario: &Scenario,
    h: f64,
) -> Result<(RateSchedule, RateSchedule), SolveError> {
    let d_max = scenario.buffer().ok_or(SolveError::BufferMissing)?;
    let busy = match scenario.busy() {
        Some(b) => b,
        None => return no_busy_pair(scenario),
    };
    let minimum = scenario.demand_by(busy.end);
    if h < minimum - num::EPS_REL * scenario.total_data() {
        return Err(SolveError::InfeasibleHeight { minimum });
    }
    let sensing = sensing_schedule(scenario, h)?;

    let tol = num::EPS_REL * scenario.horizon();
    let mut ceiling = Vec::with_capacity(scenario.tasks().len() + 2);
    let mut before = 0.0;
    for (task, &cum) in scenario.tasks().iter().zip(scenario.cum_demand()) {
        ceiling.push(Point::new(task.deadline, before + d_max));
        before = cum;
    }
    let cap_at = |t: f64| scenario.demand_by(t - tol) + d_max;
    ceiling.push(Point::new(busy.start, h.min(cap_at(busy.start))));
    ceiling.push(Point::new(busy.end, h.min(cap_at(busy.end))));

    let tunnel = Tunnel {
        floor: height::transmission_floor(scenario),
        ceiling,
    };
    let transmission = sp::pull_in_tunnel(&tunnel)?;
    Ok((sensing, transmission))
}

fn sensing_schedule(scenario: &Scenario, h: f64) -> Result<RateSchedule, SolveError> {
    let busy = scenario.busy().unwrap();
    let pre = sp::pull_above_floor(&height::sensing_pre_floor(scenario, h))?;
    let idle = RateSchedule::with_base(
        h,
        vec![Segment {
            start: busy.start,
            end: busy.end,
            rate: 0.0,
        }],
    )
    .expect("busy span is non-empty");
    let post = sp::pull_above_floor(&height::post_floor(scenario, h))?;
    RateSchedule::concat(&[&pre, &idle, &post]).map_err(|_| SolveError::Height("concat failed"))
}

fn fixed_height_pair(
    scenario: &Scenario,
    h: f64,
) -> Result<(RateSchedule, RateSchedule), SolveError> {
    if scenario.buffer().is_some() {
        rates_for_height_buffered(scenario, h)
    } else {
        rates_for_height(scenario, h)
    }
}

/// Minimizes the per-area local optima and returns the best height with the
/// search diagnostics. Ties within 1e-12 relative go to the larger height.
fn search_height(
    scenario: &Scenario,
    bounds: &SearchBounds,
    criticals: &[CriticalHeight],
) -> Result<(f64, Vec<SubAreaReport>), SolveError> {
    let areas: Vec<SubArea> = height::sub_areas(scenario, bounds, criticals)?;
    if areas.is_empty() {
        return Ok((bounds.lower, Vec::new()));
    }
    let mut reports = Vec::with_capacity(areas.len());
    let mut best: Option<(f64, f64)> = None;
    for area in &areas {
        let (h_star, energy) = height::local_optimum(area, scenario)?;
        reports.push(SubAreaReport {
            lo: area.lo,
            hi: area.hi,
            h_star,
            energy,
        });
        let replace = match best {
            None => true,
            Some((_, e_best)) => {
                energy < e_best - 1e-12 * e_best.abs()
                    || ((energy - e_best).abs() <= 1e-12 * e_best.abs().max(energy.abs()))
            }
        };
        if replace {
            best = Some((h_star, energy));
        }
    }
    Ok((best.unwrap().0, reports))
}

/// Globally optimal solution for the infinite-buffer problem.
pub fn optimize(scenario: &Scenario) -> Result<Solution, SolveError> {
    if scenario.buffer().is_some() {
        return Err(SolveError::BufferPresent);
    }
    if scenario.busy().is_none() {
        let (s, t) = no_busy_pair(scenario)?;
        return Ok(assemble(
            scenario,
            Scheme::Jstrc,
            None,
            s,
            t,
            None,
            Vec::new(),
            Vec::new(),
        ));
    }
    let bounds = height::search_bounds(scenario)?;
    let criticals = height::critical_heights(scenario, &bounds);
    let (h_star, reports) = search_height(scenario, &bounds, &criticals)?;
    let (s, t) = rates_for_height(scenario, h_star)?;
    Ok(assemble(
        scenario,
        Scheme::Jstrc,
        Some(h_star),
        s,
        t,
        Some(bounds),
        criticals,
        reports,
    ))
}

/// Globally optimal solution with a finite receiver buffer.
///
/// When the balance lower bound exceeds the buffered upper bound the
/// optimum sits exactly at the lower bound: sensing energy is minimal there
/// and transmission no longer depends on the height.
pub fn optimize_buffered(scenario: &Scenario) -> Result<Solution, SolveError> {
    if scenario.buffer().is_none() {
        return Err(SolveError::BufferMissing);
    }
    if scenario.busy().is_none() {
        let (s, t) = no_busy_pair(scenario)?;
        return Ok(assemble(
            scenario,
            Scheme::Jstrc,
            None,
            s,
            t,
            None,
            Vec::new(),
            Vec::new(),
        ));
    }
    let bounds = height::search_bounds(scenario)?;
    let tie = 1e-12 * scenario.total_data();
    let (h_star, criticals, reports) = if bounds.lower >= bounds.upper - tie {
        (bounds.lower, Vec::new(), Vec::new())
    } else {
        let criticals = height::critical_heights_buffered(scenario, &bounds)?;
        let (h_star, reports) = search_height(scenario, &bounds, &criticals)?;
        (h_star, criticals, reports)
    };
    let (s, t) = rates_for_height_buffered(scenario, h_star)?;
    Ok(assemble(
        scenario,
        Scheme::Jstrc,
        Some(h_star),
        s,
        t,
        Some(bounds),
        criticals,
        reports,
    ))
}

/// Fixed-height baseline: the upper bound, the lower bound, or a height
/// drawn uniformly from the search area with a seeded generator.
pub fn baseline(
    scenario: &Scenario,
    scheme: BaselineScheme,
    seed: u64,
) -> Result<Solution, SolveError> {
    if scenario.busy().is_none() {
        return Err(SolveError::NoBusyInterval);
    }
    let bounds = height::search_bounds(scenario)?;
    let (h, scheme) = match scheme {
        BaselineScheme::Ub => (bounds.upper, Scheme::Ub),
        BaselineScheme::Lb => (bounds.lower, Scheme::Lb),
        BaselineScheme::Rh => {
            let lo = bounds.lower.min(bounds.upper);
            let hi = bounds.lower.max(bounds.upper);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let h = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            (h, Scheme::Rh)
        }
    };
    let (s, t) = fixed_height_pair(scenario, h)?;
    Ok(assemble(
        scenario,
        scheme,
        Some(h),
        s,
        t,
        Some(bounds),
        Vec::new(),
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BusyInterval, PhysicalParams, Scenario, Task};

    fn params() -> PhysicalParams {
        PhysicalParams {
            alpha: 1e-28,
            cycles_per_bit: 500.0,
            noise_power: 10f64.powf((-79.5 - 30.0) / 10.0),
            channel_gain: 1e-3,
            bandwidth: 1e7,
        }
    }

    fn five_task(buffer: Option<f64>) -> Scenario {
        let tasks = [
            (10.0, 500.0),
            (20.0, 500.0),
            (80.0, 500.0),
            (90.0, 700.0),
            (200.0, 300.0),
        ]
        .iter()
        .map(|&(deadline, data)| Task { deadline, data })
        .collect();
        Scenario::new(
            tasks,
            Some(BusyInterval {
                start: 55.0,
                end: 85.0,
            }),
            params(),
            buffer,
        )
        .unwrap()
    }

    fn assert_rates(s: &RateSchedule, want: &[(f64, f64, f64)]) {
        let got: Vec<(f64, f64, f64)> = s
            .segments()
            .iter()
            .map(|g| (g.start, g.end, g.rate))
            .collect();
        assert_eq!(got.len(), want.len(), "{got:?}\nvs\n{want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!(
                (g.0 - w.0).abs() < 1e-6 && (g.1 - w.1).abs() < 1e-6 && num::close(g.2, w.2, 1e-9),
                "{got:?}\nvs\n{want:?}"
            );
        }
    }

    #[test]
    fn no_busy_schedules_coincide() {
        let s = Scenario::new(
            vec![
                Task {
                    deadline: 1.0,
                    data: 2.0,
                },
                Task {
                    deadline: 2.0,
                    data: 1.0,
                },
            ],
            None,
            params(),
            None,
        )
        .unwrap();
        let (sensing, transmission) = rates_for_height(&s, 0.0).unwrap();
        assert_eq!(sensing, transmission);
        let sol = optimize(&s).unwrap();
        assert_eq!(sol.height, None);
        assert!(sol.bounds.is_none());
        assert_eq!(sol.sensing, sol.transmission);
    }

    #[test]
    fn five_task_at_upper_bound_leaves_transmission_unconstrained() {
        let s = five_task(None);
        let h_u = 1000.0 + 1200.0 / 70.0 * 65.0;
        let (sensing, transmission) = rates_for_height(&s, h_u).unwrap();
        assert_rates(
            &transmission,
            &[
                (0.0, 20.0, 50.0),
                (20.0, 90.0, 1200.0 / 70.0),
                (90.0, 200.0, 300.0 / 110.0),
            ],
        );
        // Sensing bends at (20, 1000) on its way to (55, h_u).
        assert_rates(
            &sensing,
            &[
                (0.0, 20.0, 50.0),
                (20.0, 55.0, (h_u - 1000.0) / 35.0),
                (55.0, 85.0, 0.0),
                (85.0, 90.0, (2200.0 - h_u) / 5.0),
                (90.0, 200.0, 300.0 / 110.0),
            ],
        );
        let report = check_feasibility(&s, &sensing, &transmission);
        assert!(report.is_feasible(), "{report:?}");
    }

    #[test]
    fn five_task_at_demand_height_pins_transmission_to_the_ceiling() {
        let s = five_task(None);
        let (sensing, transmission) = rates_for_height(&s, 1500.0).unwrap();
        assert_rates(
            &sensing,
            &[
                (0.0, 20.0, 50.0),
                (20.0, 55.0, 500.0 / 35.0),
                (55.0, 85.0, 0.0),
                (85.0, 90.0, 140.0),
                (90.0, 200.0, 300.0 / 110.0),
            ],
        );
        assert_rates(
            &transmission,
            &[
                (0.0, 20.0, 50.0),
                (20.0, 80.0, 500.0 / 60.0),
                (80.0, 85.0, 0.0),
                (85.0, 90.0, 140.0),
                (90.0, 200.0, 300.0 / 110.0),
            ],
        );
    }

    #[test]
    fn height_below_busy_end_demand_is_rejected() {
        let s = five_task(None);
        match rates_for_height(&s, 1400.0).unwrap_err() {
            SolveError::InfeasibleHeight { minimum } => assert_eq!(minimum, 1500.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generous_buffer_matches_infinite_schedules() {
        let inf = five_task(None);
        let buf = five_task(Some(5000.0));
        let (s1, t1) = rates_for_height(&inf, 1800.0).unwrap();
        let (s2, t2) = rates_for_height_buffered(&buf, 1800.0).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn tight_buffer_at_demand_height_matches_hand_trace() {
        let s = five_task(Some(1000.0));
        let (_, transmission) = rates_for_height_buffered(&s, 1500.0).unwrap();
        assert_rates(
            &transmission,
            &[
                (0.0, 20.0, 50.0),
                (20.0, 80.0, 500.0 / 60.0),
                (80.0, 85.0, 0.0),
                (85.0, 90.0, 140.0),
                (90.0, 200.0, 300.0 / 110.0),
            ],
        );
    }

    #[test]
    fn five_task_optimum_sits_inside_the_bounds() {
        let sol = optimize(&five_task(None)).unwrap();
        let b = sol.bounds.unwrap();
        let h = sol.height.unwrap();
        assert!(h >= b.lower && h <= b.upper, "{sol:?}");
        // Stationarity by hand: with anchors (20,1000), (90,2200) on both
        // curves, 2αC²[(h-1000)/35 - (2200-h)/5]
        // + (σ²/gB)[e^((h-1000)/65B) - e^((2200-h)/5B)] = 0 at h ≈ 2093.6.
        assert!((h - 2093.6).abs() < 0.2, "h = {h}");
        assert_eq!(sol.sub_areas.len(), 1);
    }

    #[test]
    fn buffered_five_task_walks_two_sub_areas() {
        let sol = optimize_buffered(&five_task(Some(1000.0))).unwrap();
        let b = sol.bounds.unwrap();
        assert!((b.upper - 2100.0).abs() < 1e-6);
        assert_eq!(sol.critical_heights.len(), 1);
        assert_eq!(sol.sub_areas.len(), 2);
        // In the upper sub-area the transmission anchor moves to the buffer
        // contact (80, 2000), shifting the stationary point to h ≈ 2089.9.
        let h = sol.height.unwrap();
        assert!((h - 2089.9).abs() < 0.2, "h = {h}");
        assert!(h > sol.critical_heights[0].height && h < b.upper);
        let inf = optimize(&five_task(None)).unwrap();
        assert!(sol.total_energy >= inf.total_energy);
    }

    #[test]
    fn cramped_buffer_pins_the_height_at_the_lower_bound() {
        // With an 800-bit buffer the buffered transmission curve reaches
        // only 2000 at the busy end, below the 2050 balance point.
        let sol = optimize_buffered(&five_task(Some(800.0))).unwrap();
        let b = sol.bounds.unwrap();
        assert!(b.lower > b.upper, "{b:?}");
        assert!((sol.height.unwrap() - b.lower).abs() < 1e-9);
        assert!(sol.critical_heights.is_empty());
    }

    #[test]
    fn baselines_pin_their_heights() {
        let s = five_task(None);
        let ub = baseline(&s, BaselineScheme::Ub, 0).unwrap();
        let lb = baseline(&s, BaselineScheme::Lb, 0).unwrap();
        let b = ub.bounds.unwrap();
        assert_eq!(ub.height.unwrap(), b.upper);
        assert_eq!(lb.height.unwrap(), b.lower);
        assert!((b.lower - 2050.0).abs() < 1e-6);

        let rh1 = baseline(&s, BaselineScheme::Rh, 42).unwrap();
        let rh2 = baseline(&s, BaselineScheme::Rh, 42).unwrap();
        let rh3 = baseline(&s, BaselineScheme::Rh, 43).unwrap();
        assert_eq!(rh1.height, rh2.height);
        assert_ne!(rh1.height, rh3.height);
        let h = rh1.height.unwrap();
        assert!(h >= b.lower && h <= b.upper);

        let jstrc = optimize(&s).unwrap();
        for other in [&ub, &lb, &rh1, &rh3] {
            assert!(jstrc.total_energy <= other.total_energy * (1.0 + 1e-12));
        }
    }

    #[test]
    fn baseline_requires_busy_interval() {
        let s = Scenario::new(
            vec![Task {
                deadline: 5.0,
                data: 10.0,
            }],
            None,
            params(),
            None,
        )
        .unwrap();
        assert_eq!(
            baseline(&s, BaselineScheme::Ub, 0).unwrap_err(),
            SolveError::NoBusyInterval
        );
    }
}
