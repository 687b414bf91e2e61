//! Independent ground-truth solvers used to validate the analytic results.
//!
//! [`solve_discretized`] attacks the original convex program directly on a
//! slot grid, with no knowledge of string pulling or height search, so its
//! optimum is a genuinely independent reference. [`brute_force_tiny`]
//! exhaustively enumerates rate assignments on micro instances and keeps
//! even the discretized solver honest. [`height_sweep`] tabulates the true
//! energy as a function of the height for optimality spot checks. None of
//! this is performance-engineered; it exists to be correct and slow.

mod ipm;

use alloc::vec::Vec;
use core::fmt;

use crate::height;
use crate::model::{sensing_energy, transmission_energy, RateSchedule, Scenario, Segment};
use crate::num;
use crate::solve;

pub(crate) use ipm::Grid;

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    /// The barrier solver could not certify the requested tolerance; the
    /// reported residual is the last Newton decrement.
    NotConverged { residual: f64 },
    /// The enumeration grid contains no feasible assignment; retry with a
    /// denser rate grid.
    NoFeasiblePoint,
    NoBusyInterval,
    Solve(&'static str),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NotConverged { residual } => {
                write!(f, "discretized solver did not converge (residual {residual:e})")
            }
            OracleError::NoFeasiblePoint => {
                write!(f, "no feasible point on the enumeration grid")
            }
            OracleError::NoBusyInterval => write!(f, "scenario has no busy interval"),
            OracleError::Solve(what) => write!(f, "{what}"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Result of the discretized convex solve.
#[derive(Clone, Debug)]
pub struct DiscretizedSolution {
    pub energy: f64,
    pub sensing: RateSchedule,
    pub transmission: RateSchedule,
    /// Certified duality-gap bound on the discretized optimum, in joules.
    pub gap: f64,
    pub slot_count: usize,
}

/// Solves the slot-discretized convex program to within `tol` relative by a
/// feasible-path barrier method. Every task deadline and busy endpoint lies
/// on a slot boundary, so the discretized feasible set embeds the
/// piecewise-constant optima exactly.
pub fn solve_discretized(
    scenario: &Scenario,
    slots: usize,
    tol: f64,
) -> Result<DiscretizedSolution, OracleError> {
    let grid = Grid::build(scenario, slots);
    let problem = ipm::BarrierProblem::new(scenario, &grid);
    let mut x = problem
        .initial_point(scenario)
        .map_err(|_| OracleError::NotConverged {
            residual: f64::INFINITY,
        })?;
    let mu = problem
        .solve(&mut x, tol)
        .map_err(|residual| OracleError::NotConverged { residual })?;
    let (s_rates, r_rates) = problem.extract_rates(&x);
    let to_schedule = |rates: &[f64]| {
        let segments: Vec<Segment> = rates
            .iter()
            .enumerate()
            .map(|(k, &rate)| Segment {
                start: grid.bounds[k],
                end: grid.bounds[k + 1],
                rate,
            })
            .collect();
        RateSchedule::new(segments).expect("grid slots are contiguous")
    };
    let sensing = to_schedule(&s_rates);
    let transmission = to_schedule(&r_rates);
    let energy = sensing_energy(&sensing, scenario.params())
        + transmission_energy(&transmission, scenario.params());
    Ok(DiscretizedSolution {
        energy,
        sensing,
        transmission,
        gap: mu * problem.constraint_count as f64 * problem.e_scale(),
        slot_count: grid.slot_count(),
    })
}

/// Exhaustive minimum over all rate assignments drawn from the grid
/// `{0} ∪ {2 j D / (horizon · levels)}` on `slots` uniform slots. Every
/// deadline and busy endpoint must lie on a slot boundary.
pub fn brute_force_tiny(
    scenario: &Scenario,
    slots: usize,
    rate_levels: usize,
) -> Result<f64, OracleError> {
    let horizon = scenario.horizon();
    let dt = horizon / slots as f64;
    let tol = num::EPS_REL * horizon;
    let on_grid = |t: f64| (crate::math::round(t / dt) * dt - t).abs() <= tol;
    assert!(
        scenario.tasks().iter().all(|t| on_grid(t.deadline))
            && scenario
                .busy()
                .is_none_or(|b| on_grid(b.start) && on_grid(b.end)),
        "instants must lie on the uniform slot grid"
    );

    let d = scenario.total_data();
    let mut levels: Vec<f64> = Vec::with_capacity(rate_levels + 1);
    levels.push(0.0);
    for j in 1..=rate_levels {
        levels.push(2.0 * d / horizon * j as f64 / rate_levels as f64);
    }
    let busy: Vec<bool> = (0..slots)
        .map(|k| {
            scenario.busy().is_some_and(|b| {
                k as f64 * dt >= b.start - tol && (k + 1) as f64 * dt <= b.end + tol
            })
        })
        .collect();
    let floor: Vec<f64> = (1..=slots)
        .map(|k| scenario.demand_by(k as f64 * dt))
        .collect();
    let cap: Vec<f64> = (1..=slots)
        .map(|k| match scenario.buffer() {
            Some(d_max) => {
                let t = k as f64 * dt;
                let mut before = 0.0;
                for (task, &c) in scenario.tasks().iter().zip(scenario.cum_demand()) {
                    if task.deadline < t - tol {
                        before = c;
                    }
                }
                before + d_max
            }
            None => f64::INFINITY,
        })
        .collect();

    let p = scenario.params();

    // Depth-first over sensing assignments, then transmission assignments,
    // pruning on prefix demand/causality/buffer violations and on partial
    // energy already exceeding the incumbent.
    struct Search<'a> {
        levels: &'a [f64],
        busy: &'a [bool],
        floor: &'a [f64],
        cap: &'a [f64],
        slots: usize,
        dt: f64,
        d: f64,
        vtol: f64,
        ks: f64,
        kt: f64,
        bw: f64,
        s_cum: Vec<f64>,
        best: f64,
    }

    impl Search<'_> {
        fn sense(&mut self, k: usize, cum: f64, energy: f64) {
            if energy >= self.best {
                return;
            }
            if k == self.slots {
                if cum >= self.d - self.vtol {
                    let e = self.transmit(0, 0.0, energy);
                    if e < self.best {
                        self.best = e;
                    }
                }
                return;
            }
            let choices: &[f64] = if self.busy[k] { &[0.0] } else { self.levels };
            for &rate in choices {
                let next = cum + rate * self.dt;
                if next < self.floor[k] - self.vtol {
                    continue;
                }
                self.s_cum[k] = next;
                self.sense(k + 1, next, energy + self.ks * rate * rate * self.dt);
            }
        }

        /// Minimum total energy over transmission completions of the current
        /// sensing assignment; mirrors [`Self::sense`].
        fn transmit(&mut self, k: usize, cum: f64, energy: f64) -> f64 {
            if energy >= self.best {
                return f64::INFINITY;
            }
            if k == self.slots {
                return if cum >= self.d - self.vtol {
                    energy
                } else {
                    f64::INFINITY
                };
            }
            let mut local = f64::INFINITY;
            for &rate in self.levels {
                let next = cum + rate * self.dt;
                if next < self.floor[k] - self.vtol
                    || next > self.s_cum[k] + self.vtol
                    || next > self.cap[k] + self.vtol
                {
                    continue;
                }
                let e = self.transmit(
                    k + 1,
                    next,
                    energy + self.kt * crate::math::exp_m1(rate / self.bw) * self.dt,
                );
                local = local.min(e);
            }
            local
        }
    }

    let mut search = Search {
        levels: &levels,
        busy: &busy,
        floor: &floor,
        cap: &cap,
        slots,
        dt,
        d,
        vtol: num::EPS_REL * d,
        ks: p.sense_coeff(),
        kt: p.tx_coeff(),
        bw: p.bandwidth,
        s_cum: alloc::vec![0.0; slots],
        best: f64::INFINITY,
    };
    search.sense(0, 0.0, 0.0);
    if search.best.is_finite() {
        Ok(search.best)
    } else {
        Err(OracleError::NoFeasiblePoint)
    }
}

/// One row of a height sweep; `feasible` is false where the fixed-height
/// scheduler rejected the height and the energies are NaN.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub h: f64,
    pub sensing: f64,
    pub transmission: f64,
    pub total: f64,
    pub feasible: bool,
}

/// Tabulates the true energy over a uniform height grid spanning the search
/// area (endpoints included).
pub fn height_sweep(scenario: &Scenario, points: usize) -> Result<Vec<SweepPoint>, OracleError> {
    if scenario.busy().is_none() {
        return Err(OracleError::NoBusyInterval);
    }
    let bounds =
        height::search_bounds(scenario).map_err(|_| OracleError::Solve("bounds failed"))?;
    let lo = bounds.lower.min(bounds.upper);
    let hi = bounds.lower.max(bounds.upper);
    let n = points.max(2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let pair = if scenario.buffer().is_some() {
            solve::rates_for_height_buffered(scenario, h)
        } else {
            solve::rates_for_height(scenario, h)
        };
        match pair {
            // A point only counts when the pair survives the full checker;
            // energies of infeasible schedules would understate the truth.
            Ok((s, t)) if crate::model::check_feasibility(scenario, &s, &t).is_feasible() => {
                let es = sensing_energy(&s, scenario.params());
                let et = transmission_energy(&t, scenario.params());
                out.push(SweepPoint {
                    h,
                    sensing: es,
                    transmission: et,
                    total: es + et,
                    feasible: true,
                });
            }
            _ => out.push(SweepPoint {
                h,
                sensing: f64::NAN,
                transmission: f64::NAN,
                total: f64::NAN,
                feasible: false,
            }),
        }
    }
    Ok(out)
}
