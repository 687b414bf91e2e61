//! Scenario types, energy functionals, cumulative-curve algebra and the
//! feasibility checker.
//!
//! Times are seconds, data volumes are bits, energies are joules. Everything
//! is plain `f64`: the algorithms are geometric slope comparisons, and
//! quantizing to integer ticks would distort the critical heights.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::num::{self, CompensatedSum};

/// One task: `data` bits must be sensed and delivered before `deadline`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task {
    pub deadline: f64,
    pub data: f64,
}

/// Interval during which the sensing rate is forced to zero. Transmission
/// keeps running. Task deadlines may fall strictly inside the interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BusyInterval {
    pub start: f64,
    pub end: f64,
}

impl BusyInterval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// Physical constants of the sensing and transmission energy models.
///
/// Sensing power is `alpha * (cycles_per_bit * s)^2` for sensing rate `s`;
/// transmission power is `noise_power / channel_gain * (e^(r/bandwidth) - 1)`
/// for transmission rate `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Circuit constant of the CPU power model (J·s²/cycle³ scale).
    pub alpha: f64,
    /// CPU cycles required to sense one bit.
    pub cycles_per_bit: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Effective channel power gain (dimensionless).
    pub channel_gain: f64,
    /// Spectrum bandwidth in Hz.
    pub bandwidth: f64,
}

impl PhysicalParams {
    /// Coefficient of `s²` in the sensing power: `alpha * C²`.
    pub fn sense_coeff(&self) -> f64 {
        self.alpha * self.cycles_per_bit * self.cycles_per_bit
    }

    /// Coefficient of `e^(r/B) - 1` in the transmission power: `σ²/g`.
    pub fn tx_coeff(&self) -> f64 {
        self.noise_power / self.channel_gain
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioError {
    NoTasks,
    NonFinite,
    DeadlinesNotIncreasing,
    NegativeData,
    ZeroTotalData,
    InvalidBusy,
    InvalidParams,
    /// The receiver buffer cannot hold some single task's data, so the
    /// instance can never be scheduled.
    BufferTooSmall { required: f64 },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::NoTasks => write!(f, "scenario has no tasks"),
            ScenarioError::NonFinite => write!(f, "scenario contains a non-finite value"),
            ScenarioError::DeadlinesNotIncreasing => {
                write!(f, "task deadlines must be strictly increasing and positive")
            }
            ScenarioError::NegativeData => write!(f, "task data must be nonnegative"),
            ScenarioError::ZeroTotalData => write!(f, "total task data must be positive"),
            ScenarioError::InvalidBusy => {
                write!(f, "busy interval must satisfy 0 < start < end < last deadline")
            }
            ScenarioError::InvalidParams => {
                write!(f, "physical parameters must all be strictly positive")
            }
            ScenarioError::BufferTooSmall { required } => write!(
                f,
                "buffer cannot hold the largest single task ({required} bits required)"
            ),
        }
    }
}

impl core::error::Error for ScenarioError {}

/// A full problem instance: tasks, optional busy interval, physical
/// parameters and an optional receiver buffer bound in bits.
#[derive(Clone, Debug)]
pub struct Scenario {
    tasks: Vec<Task>,
    busy: Option<BusyInterval>,
    params: PhysicalParams,
    buffer: Option<f64>,
    /// Cumulative demand through each task, compensated at construction.
    cum: Vec<f64>,
}

impl Scenario {
    pub fn new(
        tasks: Vec<Task>,
        busy: Option<BusyInterval>,
        params: PhysicalParams,
        buffer: Option<f64>,
    ) -> Result<Self, ScenarioError> {
        if tasks.is_empty() {
            return Err(ScenarioError::NoTasks);
        }
        let mut finite = tasks
            .iter()
            .all(|t| t.deadline.is_finite() && t.data.is_finite());
        finite &= [
            params.alpha,
            params.cycles_per_bit,
            params.noise_power,
            params.channel_gain,
            params.bandwidth,
        ]
        .iter()
        .all(|v| v.is_finite());
        if let Some(b) = busy {
            finite &= b.start.is_finite() && b.end.is_finite();
        }
        if let Some(d) = buffer {
            finite &= d.is_finite();
        }
        if !finite {
            return Err(ScenarioError::NonFinite);
        }
        let mut prev = 0.0;
        for t in &tasks {
            if t.deadline <= prev {
                return Err(ScenarioError::DeadlinesNotIncreasing);
            }
            if t.data < 0.0 {
                return Err(ScenarioError::NegativeData);
            }
            prev = t.deadline;
        }
        if params.alpha <= 0.0
            || params.cycles_per_bit <= 0.0
            || params.noise_power <= 0.0
            || params.channel_gain <= 0.0
            || params.bandwidth <= 0.0
        {
            return Err(ScenarioError::InvalidParams);
        }
        let horizon = tasks.last().unwrap().deadline;
        if let Some(b) = busy {
            if !(0.0 < b.start && b.start < b.end && b.end < horizon) {
                return Err(ScenarioError::InvalidBusy);
            }
        }
        let mut cum = Vec::with_capacity(tasks.len());
        let mut acc = CompensatedSum::default();
        for t in &tasks {
            acc.add(t.data);
            cum.push(acc.value());
        }
        let total = *cum.last().unwrap();
        if total <= 0.0 {
            return Err(ScenarioError::ZeroTotalData);
        }
        if let Some(d) = buffer {
            let largest = tasks.iter().fold(0.0_f64, |m, t| m.max(t.data));
            if d <= 0.0 || d < largest {
                return Err(ScenarioError::BufferTooSmall { required: largest });
            }
        }
        Ok(Scenario {
            tasks,
            busy,
            params,
            buffer,
            cum,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn busy(&self) -> Option<BusyInterval> {
        self.busy
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn buffer(&self) -> Option<f64> {
        self.buffer
    }

    /// Total data over all tasks.
    pub fn total_data(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Last task deadline; schedules span `[0, horizon]`.
    pub fn horizon(&self) -> f64 {
        self.tasks.last().unwrap().deadline
    }

    /// Cumulative demand through the `i`-th task.
    pub fn cum_demand(&self) -> &[f64] {
        &self.cum
    }

    /// Cumulative demand over all tasks with deadlines `<= t` (tie band
    /// applied on the deadline comparison).
    pub fn demand_by(&self, t: f64) -> f64 {
        let tol = num::EPS_REL * self.horizon();
        let mut out = 0.0;
        for (task, &c) in self.tasks.iter().zip(&self.cum) {
            if task.deadline <= t + tol {
                out = c;
            } else {
                break;
            }
        }
        out
    }

    /// Returns a copy without the buffer bound.
    pub fn without_buffer(&self) -> Scenario {
        let mut s = self.clone();
        s.buffer = None;
        s
    }
}

/// One constant-rate span of a schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleError {
    Empty,
    NotContiguous,
    NegativeRate,
    NonFinite,
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::Empty => write!(f, "schedule has no segments"),
            ScheduleError::NotContiguous => {
                write!(f, "schedule segments must be contiguous and forward in time")
            }
            ScheduleError::NegativeRate => write!(f, "schedule rates must be nonnegative"),
            ScheduleError::NonFinite => write!(f, "schedule contains a non-finite value"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// Piecewise-constant rate function. The induced cumulative curve (running
/// integral plus the base offset) is piecewise linear and nondecreasing.
///
/// Adjacent segments with equal rates are merged and zero-length spans are
/// dropped at construction, so schedules compare canonically.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSchedule {
    segments: Vec<Segment>,
    /// Cumulative curve value at the end of each segment.
    cum_end: Vec<f64>,
    /// Cumulative curve value at the start of the first segment.
    base: f64,
}

impl RateSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ScheduleError> {
        Self::with_base(0.0, segments)
    }

    /// Builds a schedule whose cumulative curve starts at `base`.
    pub fn with_base(base: f64, segments: Vec<Segment>) -> Result<Self, ScheduleError> {
        if segments.is_empty() {
            return Err(ScheduleError::Empty);
        }
        let span = segments.last().unwrap().end - segments[0].start;
        if !span.is_finite() || span < 0.0 {
            return Err(ScheduleError::NotContiguous);
        }
        let len_tol = 1e-12 * span.max(1.0);
        let rate_scale = segments
            .iter()
            .fold(0.0_f64, |m, s| m.max(s.rate.abs()))
            .max(1.0);
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        let mut prev_end = segments[0].start;
        for mut seg in segments {
            if !(seg.start.is_finite() && seg.end.is_finite() && seg.rate.is_finite()) {
                return Err(ScheduleError::NonFinite);
            }
            if (seg.start - prev_end).abs() > len_tol || seg.end < seg.start - len_tol {
                return Err(ScheduleError::NotContiguous);
            }
            if seg.rate < 0.0 {
                if seg.rate < -num::EPS_REL * rate_scale {
                    return Err(ScheduleError::NegativeRate);
                }
                // Numerical dust from slope arithmetic; clamp.
                seg.rate = 0.0;
            }
            prev_end = seg.end;
            if seg.end - seg.start <= len_tol {
                continue;
            }
            match merged.last_mut() {
                Some(last) if num::close(last.rate, seg.rate, 1e-12) => {
                    last.end = seg.end;
                }
                _ => merged.push(seg),
            }
        }
        if merged.is_empty() {
            // Degenerate zero-span schedule; keep a single empty marker span.
            return Err(ScheduleError::Empty);
        }
        let mut cum_end = Vec::with_capacity(merged.len());
        let mut acc = CompensatedSum::default();
        acc.add(base);
        for seg in &merged {
            acc.add(seg.rate * (seg.end - seg.start));
            cum_end.push(acc.value());
        }
        Ok(RateSchedule {
            segments: merged,
            cum_end,
            base,
        })
    }

    /// Builds a schedule from consecutive cumulative-curve vertices.
    pub fn from_vertices(vertices: &[(f64, f64)]) -> Result<Self, ScheduleError> {
        if vertices.len() < 2 {
            return Err(ScheduleError::Empty);
        }
        let mut segs = Vec::with_capacity(vertices.len() - 1);
        for w in vertices.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                continue;
            }
            segs.push(Segment {
                start: t0,
                end: t1,
                rate: (v1 - v0) / (t1 - t0),
            });
        }
        Self::with_base(vertices[0].1, segs)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].start
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().unwrap().end
    }

    /// Cumulative curve value at the start of the schedule.
    pub fn base(&self) -> f64 {
        self.base
    }

    /// Total volume delivered plus the base offset.
    pub fn total(&self) -> f64 {
        *self.cum_end.last().unwrap()
    }

    /// Cumulative curve value at `t`, clamped to the schedule span.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.start_time() {
            return self.base;
        }
        if t >= self.end_time() {
            return self.total();
        }
        // Binary search for the segment containing t.
        let idx = self
            .segments
            .partition_point(|seg| seg.end < t)
            .min(self.segments.len() - 1);
        let seg = self.segments[idx];
        let start_val = if idx == 0 {
            self.base
        } else {
            self.cum_end[idx - 1]
        };
        start_val + seg.rate * (t - seg.start)
    }

    /// Constant rate in effect at `t` (right-continuous at breakpoints).
    pub fn rate_at(&self, t: f64) -> f64 {
        let idx = self
            .segments
            .partition_point(|seg| seg.end <= t)
            .min(self.segments.len() - 1);
        self.segments[idx].rate
    }

    /// Times at which the rate may change, including both span endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        out.push(self.end_time());
        out
    }

    /// Concatenates schedules that meet end-to-start.
    pub fn concat(parts: &[&RateSchedule]) -> Result<Self, ScheduleError> {
        let mut segs = Vec::new();
        for p in parts {
            segs.extend_from_slice(p.segments());
        }
        let base = parts.first().map(|p| p.base()).unwrap_or(0.0);
        Self::with_base(base, segs)
    }
}

/// Merged time grid of task deadlines and busy endpoints.
///
/// A busy endpoint coinciding with a task deadline is merged into a single
/// instant carrying the task's demand.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochGrid {
    pub instants: Vec<f64>,
    pub durations: Vec<f64>,
    pub demands: Vec<f64>,
}

pub fn build_epoch_grid(scenario: &Scenario) -> EpochGrid {
    let tol = num::EPS_REL * scenario.horizon();
    let mut instants: Vec<f64> = scenario.tasks().iter().map(|t| t.deadline).collect();
    if let Some(b) = scenario.busy() {
        for endpoint in [b.start, b.end] {
            if !instants.iter().any(|&t| (t - endpoint).abs() <= tol) {
                instants.push(endpoint);
            }
        }
    }
    instants.sort_by(f64::total_cmp);
    let mut demands = vec![0.0; instants.len()];
    for task in scenario.tasks() {
        let i = instants
            .iter()
            .position(|&t| (t - task.deadline).abs() <= tol)
            .unwrap();
        demands[i] += task.data;
    }
    let mut durations = Vec::with_capacity(instants.len());
    let mut prev = 0.0;
    for &t in &instants {
        durations.push(t - prev);
        prev = t;
    }
    EpochGrid {
        instants,
        durations,
        demands,
    }
}

/// Sensing energy of a schedule: `Σ αC²·s²·T` over segments.
pub fn sensing_energy(schedule: &RateSchedule, params: &PhysicalParams) -> f64 {
    let k = params.sense_coeff();
    schedule
        .segments()
        .iter()
        .map(|s| k * s.rate * s.rate * (s.end - s.start))
        .sum()
}

/// Transmission energy of a schedule: `Σ (σ²/g)·(e^(r/B) − 1)·T` over segments.
pub fn transmission_energy(schedule: &RateSchedule, params: &PhysicalParams) -> f64 {
    let k = params.tx_coeff();
    let b = params.bandwidth;
    schedule
        .segments()
        .iter()
        .map(|s| k * math::exp_m1(s.rate / b) * (s.end - s.start))
        .sum()
}

/// Location and magnitude of the first violation of one constraint family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub amount: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintCheck {
    pub ok: bool,
    pub violation: Option<Violation>,
}

impl ConstraintCheck {
    fn pass() -> Self {
        ConstraintCheck {
            ok: true,
            violation: None,
        }
    }

    fn fail(time: f64, amount: f64) -> Self {
        ConstraintCheck {
            ok: false,
            violation: Some(Violation { time, amount }),
        }
    }
}

/// Per-constraint verdicts for a candidate schedule pair. A report with all
/// booleans true certifies the pair feasible for the scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// Sensed volume reaches each task's cumulative demand by its deadline.
    pub sensing_demand: ConstraintCheck,
    /// Transmitted volume reaches each task's cumulative demand by its deadline.
    pub transmission_demand: ConstraintCheck,
    /// Transmitted volume never exceeds sensed volume.
    pub causality: ConstraintCheck,
    /// Sensing rate is zero inside the busy interval.
    pub busy_sensing: ConstraintCheck,
    /// Received-but-unconsumed volume never exceeds the buffer bound.
    pub buffer: ConstraintCheck,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.sensing_demand.ok
            && self.transmission_demand.ok
            && self.causality.ok
            && self.busy_sensing.ok
            && self.buffer.ok
    }
}

/// Checks a schedule pair against every constraint of the scenario.
///
/// Both cumulative curves are piecewise linear, so it suffices to evaluate
/// demands at task deadlines, causality at every breakpoint of either curve,
/// and the buffer bound at epoch boundaries (consumption only happens at
/// instants, so the buffered volume peaks at epoch ends). Violations are
/// reported, not thrown.
pub fn check_feasibility(
    scenario: &Scenario,
    sensing: &RateSchedule,
    transmission: &RateSchedule,
) -> FeasibilityReport {
    let d_total = scenario.total_data();
    let tol = num::EPS_REL * d_total;
    let rate_tol = num::EPS_REL * d_total / scenario.horizon();

    let mut sensing_demand = ConstraintCheck::pass();
    let mut transmission_demand = ConstraintCheck::pass();
    for (task, &need) in scenario.tasks().iter().zip(scenario.cum_demand()) {
        let got_s = sensing.value_at(task.deadline);
        if sensing_demand.ok && got_s < need - tol {
            sensing_demand = ConstraintCheck::fail(task.deadline, need - got_s);
        }
        let got_t = transmission.value_at(task.deadline);
        if transmission_demand.ok && got_t < need - tol {
            transmission_demand = ConstraintCheck::fail(task.deadline, need - got_t);
        }
    }

    let mut causality = ConstraintCheck::pass();
    let mut probes = sensing.breakpoints();
    probes.extend(transmission.breakpoints());
    probes.sort_by(f64::total_cmp);
    probes.dedup_by(|a, b| (*a - *b).abs() <= num::EPS_REL * scenario.horizon());
    for &t in &probes {
        let sensed = sensing.value_at(t);
        let sent = transmission.value_at(t);
        if causality.ok && sent > sensed + tol {
            causality = ConstraintCheck::fail(t, sent - sensed);
            break;
        }
    }

    let mut busy_sensing = ConstraintCheck::pass();
    if let Some(b) = scenario.busy() {
        for seg in sensing.segments() {
            let lo = seg.start.max(b.start);
            let hi = seg.end.min(b.end);
            if hi - lo > num::EPS_REL * scenario.horizon() && seg.rate > rate_tol {
                busy_sensing = ConstraintCheck::fail(lo, seg.rate);
                break;
            }
        }
    }

    let mut buffer = ConstraintCheck::pass();
    if let Some(d_max) = scenario.buffer() {
        let grid = build_epoch_grid(scenario);
        let mut consumed_before = 0.0;
        for (i, &t) in grid.instants.iter().enumerate() {
            let held = transmission.value_at(t) - consumed_before;
            if held > d_max + tol {
                buffer = ConstraintCheck::fail(t, held - d_max);
                break;
            }
            consumed_before += grid.demands[i];
        }
    }

    FeasibilityReport {
        sensing_demand,
        transmission_demand,
        causality,
        busy_sensing,
        buffer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn test_params() -> PhysicalParams {
        PhysicalParams {
            alpha: 1e-28,
            cycles_per_bit: 500.0,
            noise_power: 10f64.powf((-79.5 - 30.0) / 10.0),
            channel_gain: 1e-3,
            bandwidth: 1e7,
        }
    }

    pub(crate) fn five_task_scenario(buffer: Option<f64>) -> Scenario {
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
            test_params(),
            buffer,
        )
        .unwrap()
    }

    fn constant(rate: f64, start: f64, end: f64) -> RateSchedule {
        RateSchedule::new(vec![Segment { start, end, rate }]).unwrap()
    }

    #[test]
    fn epoch_grid_merges_deadlines_and_busy_endpoints() {
        let grid = build_epoch_grid(&five_task_scenario(None));
        assert_eq!(grid.instants, vec![10.0, 20.0, 55.0, 80.0, 85.0, 90.0, 200.0]);
        assert_eq!(
            grid.demands,
            vec![500.0, 500.0, 0.0, 500.0, 0.0, 700.0, 300.0]
        );
        assert_eq!(
            grid.durations,
            vec![10.0, 10.0, 35.0, 25.0, 5.0, 5.0, 110.0]
        );
        assert_eq!(grid.demands.iter().sum::<f64>(), 2500.0);
    }

    #[test]
    fn epoch_grid_single_task() {
        let s = Scenario::new(
            vec![Task {
                deadline: 7.0,
                data: 42.0,
            }],
            None,
            test_params(),
            None,
        )
        .unwrap();
        let grid = build_epoch_grid(&s);
        assert_eq!(grid.instants, vec![7.0]);
        assert_eq!(grid.demands, vec![42.0]);
    }

    #[test]
    fn epoch_grid_deduplicates_coincident_instants() {
        let s = Scenario::new(
            vec![
                Task {
                    deadline: 10.0,
                    data: 5.0,
                },
                Task {
                    deadline: 20.0,
                    data: 6.0,
                },
                Task {
                    deadline: 30.0,
                    data: 1.0,
                },
            ],
            Some(BusyInterval {
                start: 20.0,
                end: 25.0,
            }),
            test_params(),
            None,
        )
        .unwrap();
        let grid = build_epoch_grid(&s);
        assert_eq!(grid.instants, vec![10.0, 20.0, 25.0, 30.0]);
        assert_eq!(grid.demands, vec![5.0, 6.0, 0.0, 1.0]);
    }

    #[test]
    fn sensing_energy_constant_rate() {
        let p = test_params();
        let e = sensing_energy(&constant(1.5, 0.0, 200.0), &p);
        // αC² = 2.5e-23, s² = 2.25, T = 200.
        assert!((e - 1.125e-20).abs() < 1e-32, "e = {e}");
    }

    #[test]
    fn energies_are_zero_for_zero_rate() {
        let p = test_params();
        let z = constant(0.0, 0.0, 50.0);
        assert_eq!(sensing_energy(&z, &p), 0.0);
        assert_eq!(transmission_energy(&z, &p), 0.0);
    }

    #[test]
    fn splitting_a_segment_preserves_energy() {
        let p = test_params();
        let whole = constant(3.25, 0.0, 10.0);
        let halves = RateSchedule::new(vec![
            Segment {
                start: 0.0,
                end: 4.0,
                rate: 3.25,
            },
            Segment {
                start: 4.0,
                end: 10.0,
                rate: 3.25,
            },
        ])
        .unwrap();
        assert_eq!(sensing_energy(&whole, &p), sensing_energy(&halves, &p));
        // Canonicalization merges the halves back into one span.
        assert_eq!(halves.segments().len(), 1);
    }

    #[test]
    fn ln2_rate_costs_one_joule_per_second() {
        let mut p = test_params();
        p.noise_power = 1.0;
        p.channel_gain = 1.0;
        let r = p.bandwidth * core::f64::consts::LN_2;
        let e = transmission_energy(&constant(r, 0.0, 1.0), &p);
        assert!((e - 1.0).abs() < 1e-12, "e = {e}");
    }

    #[test]
    fn feasibility_flags_causality_violation() {
        let s = five_task_scenario(None);
        let horizon = s.horizon();
        // No sensing at all, transmission running from t = 0.
        let sensing = constant(0.0, 0.0, horizon);
        let transmission = constant(2500.0 / horizon, 0.0, horizon);
        let report = check_feasibility(&s, &sensing, &transmission);
        assert!(!report.causality.ok);
        assert!(!report.sensing_demand.ok);
        let v = report.causality.violation.unwrap();
        assert!(v.time > 0.0 && v.amount > 0.0);
    }

    #[test]
    fn feasibility_passes_for_matching_curves_without_busy() {
        let tasks = vec![
            Task {
                deadline: 1.0,
                data: 2.0,
            },
            Task {
                deadline: 2.0,
                data: 1.0,
            },
        ];
        let s = Scenario::new(tasks, None, test_params(), None).unwrap();
        let sched = RateSchedule::new(vec![
            Segment {
                start: 0.0,
                end: 1.0,
                rate: 2.0,
            },
            Segment {
                start: 1.0,
                end: 2.0,
                rate: 1.0,
            },
        ])
        .unwrap();
        let report = check_feasibility(&s, &sched, &sched);
        assert!(report.is_feasible(), "{report:?}");
    }

    #[test]
    fn feasibility_flags_busy_sensing_and_buffer() {
        let s = five_task_scenario(Some(1000.0));
        let horizon = s.horizon();
        let rate = 2500.0 / horizon;
        let sched = constant(rate, 0.0, horizon);
        let report = check_feasibility(&s, &sched, &sched);
        assert!(!report.busy_sensing.ok);
        let v = report.busy_sensing.violation.unwrap();
        assert_eq!(v.time, 55.0);
        // Uniform transmission also overfills the buffer before t = 80:
        // value_at(80) = 1000 while only 1000 consumed, held = 0 ... compute
        // the actual verdict rather than guessing.
        let held_at_80 = sched.value_at(80.0) - 1000.0;
        assert_eq!(report.buffer.ok, held_at_80 <= 1000.0 + 1e-9);
    }

    #[test]
    fn scenario_rejects_undersized_buffer() {
        let tasks = vec![
            Task {
                deadline: 1.0,
                data: 2.0,
            },
            Task {
                deadline: 2.0,
                data: 3.0,
            },
        ];
        let err = Scenario::new(tasks, None, test_params(), Some(2.0)).unwrap_err();
        assert_eq!(err, ScenarioError::BufferTooSmall { required: 3.0 });
    }

    #[test]
    fn scenario_rejects_bad_busy_interval() {
        let tasks = vec![Task {
            deadline: 10.0,
            data: 1.0,
        }];
        for (start, end) in [(0.0, 5.0), (5.0, 5.0), (5.0, 10.0), (-1.0, 3.0)] {
            let err = Scenario::new(
                tasks.clone(),
                Some(BusyInterval { start, end }),
                test_params(),
                None,
            )
            .unwrap_err();
            assert_eq!(err, ScenarioError::InvalidBusy, "({start}, {end})");
        }
    }

    #[test]
    fn negative_dust_is_clamped_without_losing_segments() {
        let s = RateSchedule::new(vec![
            Segment {
                start: 0.0,
                end: 1.0,
                rate: 5.0,
            },
            Segment {
                start: 1.0,
                end: 2.0,
                rate: -1e-12,
            },
            Segment {
                start: 2.0,
                end: 3.0,
                rate: 2.0,
            },
        ])
        .unwrap();
        assert_eq!(s.end_time(), 3.0);
        assert_eq!(s.rate_at(1.5), 0.0);
        assert_eq!(s.rate_at(2.5), 2.0);
        assert!(RateSchedule::new(vec![Segment {
            start: 0.0,
            end: 1.0,
            rate: -0.5,
        }])
        .is_err());
    }

    #[test]
    fn value_at_is_exact_at_breakpoints() {
        let rates = [5.0, 3.0, 3.0, 0.5, 7.25];
        let mut segs = Vec::new();
        let mut t = 0.0;
        for (i, &r) in rates.iter().enumerate() {
            let dt = 1.0 + i as f64 * 0.7;
            segs.push(Segment {
                start: t,
                end: t + dt,
                rate: r,
            });
            t += dt;
        }
        let sched = RateSchedule::new(segs.clone()).unwrap();
        let mut acc = 0.0;
        for seg in &segs {
            acc += seg.rate * (seg.end - seg.start);
            let got = sched.value_at(seg.end);
            assert!(
                (got - acc).abs() <= 1e-9 * acc.abs().max(1.0),
                "at {}: {got} vs {acc}",
                seg.end
            );
        }
    }
}
