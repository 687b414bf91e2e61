//! Log-barrier interior-point solver for the slot-discretized problem.
//!
//! Variables are the cumulative curves sampled at slot boundaries,
//! interleaved by slot. Sensing variables are simply absent on busy slots,
//! so the blackout holds exactly. Every constraint couples at most two
//! variables, almost all of them neighbours in the layout: the Hessian is
//! banded (half bandwidth 2) plus at most two long-range rank-one terms
//! that bridge the busy window (the sensing chain link and the causality
//! bound inside the blackout), which a Woodbury correction absorbs.
//! Iterates stay strictly feasible, and `m * mu` bounds the duality gap of
//! the scaled objective when the Newton decrement is small.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::Scenario;
use crate::num;

/// Slot grid: strictly increasing boundaries containing every task deadline
/// and busy endpoint, refined by halving the largest gap (earliest on ties)
/// until the slot count is reached. Refinement is nested: a finer grid
/// contains every coarser one.
pub(crate) struct Grid {
    /// Boundaries `tau_0 = 0 < ... < tau_m = horizon`.
    pub bounds: Vec<f64>,
    pub dt: Vec<f64>,
    pub busy: Vec<bool>,
    /// Cumulative demand due at each boundary (index 1..=m).
    pub floor: Vec<f64>,
    /// Buffer cap at each boundary: demand consumed strictly before, plus
    /// the buffer size. Infinite without a buffer.
    pub cap: Vec<f64>,
}

impl Grid {
    pub fn build(scenario: &Scenario, slots: usize) -> Grid {
        let horizon = scenario.horizon();
        let tol = num::EPS_REL * horizon;
        let mut bounds: Vec<f64> = vec![0.0];
        bounds.extend(scenario.tasks().iter().map(|t| t.deadline));
        if let Some(b) = scenario.busy() {
            bounds.push(b.start);
            bounds.push(b.end);
        }
        bounds.sort_by(f64::total_cmp);
        bounds.dedup_by(|a, b| (*a - *b).abs() <= tol);
        while bounds.len() - 1 < slots {
            let mut widest = 0;
            for i in 1..bounds.len() - 1 {
                if bounds[i + 1] - bounds[i] > bounds[widest + 1] - bounds[widest] + tol {
                    widest = i;
                }
            }
            bounds.insert(widest + 1, 0.5 * (bounds[widest] + bounds[widest + 1]));
        }
        let m = bounds.len() - 1;
        let mut dt = Vec::with_capacity(m);
        let mut busy = Vec::with_capacity(m);
        let mut floor = Vec::with_capacity(m);
        let mut cap = Vec::with_capacity(m);
        let demand_before = |t: f64| -> f64 {
            let mut out = 0.0;
            for (task, &c) in scenario.tasks().iter().zip(scenario.cum_demand()) {
                if task.deadline < t - tol {
                    out = c;
                } else {
                    break;
                }
            }
            out
        };
        for k in 1..=m {
            dt.push(bounds[k] - bounds[k - 1]);
            busy.push(scenario.busy().is_some_and(|b| {
                bounds[k - 1] >= b.start - tol && bounds[k] <= b.end + tol
            }));
            floor.push(scenario.demand_by(bounds[k]));
            cap.push(match scenario.buffer() {
                Some(d_max) => demand_before(bounds[k]) + d_max,
                None => f64::INFINITY,
            });
        }
        Grid {
            bounds,
            dt,
            busy,
            floor,
            cap,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.dt.len()
    }
}

/// Symmetric positive definite banded matrix with half bandwidth 2,
/// factored in place by banded Cholesky.
struct Banded {
    n: usize,
    /// `band[j][i]` holds entry (i, i - j).
    band: [Vec<f64>; 3],
}

impl Banded {
    fn zeros(n: usize) -> Banded {
        Banded {
            n,
            band: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= 2);
        self.band[hi - lo][hi] += v;
    }

    /// In-place Cholesky; returns false when a pivot loses positivity.
    fn factor(&mut self) -> bool {
        for i in 0..self.n {
            let lo = i.saturating_sub(2);
            for j in lo..=i {
                let mut sum = self.band[i - j][i];
                let kstart = i.saturating_sub(2).max(j.saturating_sub(2));
                for k in kstart..j {
                    sum -= self.band[i - k][i] * self.band[j - k][j];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return false;
                    }
                    self.band[0][i] = math::sqrt(sum);
                } else {
                    self.band[i - j][i] = sum / self.band[0][j];
                }
            }
        }
        true
    }

    /// Solves `L L^T x = b` after [`Self::factor`].
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(2);
            let mut sum = x[i];
            for k in lo..i {
                sum -= self.band[i - k][i] * x[k];
            }
            x[i] = sum / self.band[0][i];
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            let hi = (i + 2).min(n - 1);
            for k in i + 1..=hi {
                sum -= self.band[k - i][k] * x[k];
            }
            x[i] = sum / self.band[0][i];
        }
        x
    }
}

/// One pairwise term `coef * (x[a] - x[b])^2`-style Hessian contribution
/// that falls outside the band.
#[derive(Clone, Copy)]
struct LongLink {
    a: usize,
    b: usize,
    coef: f64,
}

pub(crate) struct BarrierProblem<'a> {
    grid: &'a Grid,
    /// Variable index of S at each boundary (None while no sensing has
    /// happened yet, i.e. boundary 0).
    s_var: Vec<Option<usize>>,
    r_var: Vec<usize>,
    /// Effective sensing floor per non-busy slot (busy-window demands fold
    /// into the last pre-busy slot).
    sense_floor: Vec<f64>,
    n_vars: usize,
    /// Index of the last busy slot, if any.
    last_busy: Option<usize>,
    cs: f64,
    ct: f64,
    bw: f64,
    e_scale: f64,
    cap_relax: f64,
    pub constraint_count: usize,
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    hess: Banded,
    links: Vec<LongLink>,
}

impl<'a> BarrierProblem<'a> {
    pub fn new(scenario: &Scenario, grid: &'a Grid) -> BarrierProblem<'a> {
        let m = grid.slot_count();
        let mut s_var = vec![None; m + 1];
        let mut r_var = vec![0usize; m + 1];
        let mut n = 0usize;
        for k in 1..=m {
            if !grid.busy[k - 1] {
                s_var[k] = Some(n);
                n += 1;
            } else {
                s_var[k] = s_var[k - 1];
            }
            r_var[k] = n;
            n += 1;
        }
        let mut sense_floor = vec![0.0; m + 1];
        sense_floor[1..].copy_from_slice(&grid.floor);
        if let Some(b) = scenario.busy() {
            // Everything due by the busy end must be sensed before it
            // starts; fold that demand onto the boundary at the busy start.
            let tol = num::EPS_REL * scenario.horizon();
            let due = scenario.demand_by(b.end);
            if let Some(k) = (1..=m).find(|&k| (grid.bounds[k] - b.start).abs() <= tol) {
                sense_floor[k] = sense_floor[k].max(due);
            }
        }
        let last_busy = (0..m).rev().find(|&k| grid.busy[k]).map(|k| k + 1);
        let p = scenario.params();
        let ravg = scenario.total_data() / scenario.horizon();
        let e_scale = (p.sense_coeff() * ravg * ravg
            + p.tx_coeff() * math::exp_m1(ravg / p.bandwidth))
            * scenario.horizon();
        let d = scenario.total_data();
        let mut problem = BarrierProblem {
            grid,
            s_var,
            r_var,
            sense_floor,
            n_vars: n,
            last_busy,
            cs: p.sense_coeff() / e_scale,
            ct: p.tx_coeff() / e_scale,
            bw: p.bandwidth,
            e_scale,
            cap_relax: 1e-7 * d,
            constraint_count: 0,
        };
        problem.constraint_count = problem.count_constraints();
        problem
    }

    pub fn e_scale(&self) -> f64 {
        self.e_scale
    }

    fn count_constraints(&self) -> usize {
        let m = self.grid.slot_count();
        let mut count = 0;
        for k in 1..=m {
            if !self.grid.busy[k - 1] {
                count += 3; // sensing increment, sensing floor, causality
            }
            count += 2; // transmission increment, transmission floor
            if self.grid.cap[k - 1].is_finite() {
                count += 1;
            }
        }
        if self.last_busy.is_some() {
            count += 1; // causality at the busy end
        }
        count
    }

    fn s_value(&self, x: &[f64], boundary: usize) -> f64 {
        match self.s_var[boundary] {
            Some(i) => x[i],
            None => 0.0,
        }
    }

    /// Strictly feasible start: sense along an aggressive ramp proportional
    /// to elapsed non-busy time, keep the transmitted curve midway between
    /// its floor and its tightest ceiling.
    pub fn initial_point(&self, scenario: &Scenario) -> Result<Vec<f64>, ()> {
        let grid = self.grid;
        let m = grid.slot_count();
        let d = scenario.total_data();
        let mut nonbusy_elapsed = vec![0.0; m + 1];
        for k in 1..=m {
            nonbusy_elapsed[k] =
                nonbusy_elapsed[k - 1] + if grid.busy[k - 1] { 0.0 } else { grid.dt[k - 1] };
        }
        let mut ramp = 1.05 * d / nonbusy_elapsed[m];
        for k in 1..=m {
            if self.sense_floor[k] > 0.0 && nonbusy_elapsed[k] > 0.0 {
                ramp = ramp.max(self.sense_floor[k] / nonbusy_elapsed[k]);
            }
        }
        ramp *= 2.1;

        let mut x = vec![0.0; self.n_vars];
        for k in 1..=m {
            if let Some(i) = self.s_var[k] {
                x[i] = ramp * nonbusy_elapsed[k];
            }
        }
        let tiny = self.cap_relax / (8.0 * m as f64);
        let mut prev_r = 0.0;
        for k in 1..=m {
            let cap = self.grid.cap[k - 1] + self.cap_relax;
            let roof = self.s_value(&x, k).min(cap);
            let r = (prev_r + tiny).max(0.5 * (grid.floor[k - 1] + roof));
            x[self.r_var[k]] = r;
            prev_r = r;
        }
        if self.strictly_feasible(&x) {
            Ok(x)
        } else {
            Err(())
        }
    }

    fn strictly_feasible(&self, x: &[f64]) -> bool {
        let mut ok = true;
        self.for_each_constraint(x, |slack, _, _| {
            if slack <= 0.0 || !slack.is_finite() {
                ok = false;
            }
        });
        ok
    }

    /// Visits every constraint as (slack, var_a, var_b) with the convention
    /// slack = x[a] - x[b] + constant (b may be None).
    fn for_each_constraint<F: FnMut(f64, usize, Option<usize>)>(&self, x: &[f64], mut f: F) {
        let m = self.grid.slot_count();
        for k in 1..=m {
            let busy = self.grid.busy[k - 1];
            let rv = self.r_var[k];
            if !busy {
                let sv = self.s_var[k].unwrap();
                let prev = self.s_var[k - 1];
                let prev_val = prev.map_or(0.0, |i| x[i]);
                f(x[sv] - prev_val, sv, prev);
                f(x[sv] - self.sense_floor[k], sv, None);
                f(x[sv] - x[rv], sv, Some(rv));
            }
            let prev_r = if k == 1 { 0.0 } else { x[self.r_var[k - 1]] };
            let prev_ri = if k == 1 { None } else { Some(self.r_var[k - 1]) };
            f(x[rv] - prev_r, rv, prev_ri);
            f(x[rv] - self.grid.floor[k - 1], rv, None);
            if self.grid.cap[k - 1].is_finite() {
                // cap + relax - R >= 0: encode as (-1) * x[rv] + c.
                f(self.grid.cap[k - 1] + self.cap_relax - x[rv], usize::MAX, Some(rv));
            }
        }
        if let Some(w) = self.last_busy {
            let sv = self.s_var[w].unwrap();
            f(x[sv] - x[self.r_var[w]], sv, Some(self.r_var[w]));
        }
    }

    /// Scaled objective value only.
    fn objective(&self, x: &[f64]) -> f64 {
        let m = self.grid.slot_count();
        let mut total = 0.0;
        for k in 1..=m {
            let dt = self.grid.dt[k - 1];
            if !self.grid.busy[k - 1] {
                let inc = self.s_value(x, k) - self.s_value(x, k - 1);
                total += self.cs * inc * inc / dt;
            }
            let rinc = x[self.r_var[k]] - if k == 1 { 0.0 } else { x[self.r_var[k - 1]] };
            total += self.ct * math::exp_m1(rinc / (dt * self.bw)) * dt;
        }
        total
    }

    fn barrier_value(&self, x: &[f64], mu: f64) -> f64 {
        let mut value = self.objective(x);
        let mut bad = false;
        self.for_each_constraint(x, |slack, _, _| {
            if slack <= 0.0 {
                bad = true;
            } else {
                value -= mu * math::ln(slack);
            }
        });
        if bad {
            f64::INFINITY
        } else {
            value
        }
    }

    fn eval(&self, x: &[f64], mu: f64) -> Eval {
        let m = self.grid.slot_count();
        let n = self.n_vars;
        let mut grad = vec![0.0; n];
        let mut hess = Banded::zeros(n);
        let mut links: Vec<LongLink> = Vec::new();
        let mut value = 0.0;

        let pair = |hess: &mut Banded,
                        links: &mut Vec<LongLink>,
                        grad: &mut Vec<f64>,
                        a: usize,
                        b: Option<usize>,
                        g: f64,
                        h: f64| {
            grad[a] += g;
            if let Some(b) = b {
                grad[b] -= g;
                let dist = a.abs_diff(b);
                if dist <= 2 {
                    hess.add(a, a, h);
                    hess.add(b, b, h);
                    hess.add(a, b, -h);
                } else {
                    links.push(LongLink { a, b, coef: h });
                }
            } else {
                hess.add(a, a, h);
            }
        };

        // Objective terms.
        for k in 1..=m {
            let dt = self.grid.dt[k - 1];
            if !self.grid.busy[k - 1] {
                let sv = self.s_var[k].unwrap();
                let prev = self.s_var[k - 1];
                let inc = x[sv] - prev.map_or(0.0, |i| x[i]);
                value += self.cs * inc * inc / dt;
                pair(
                    &mut hess,
                    &mut links,
                    &mut grad,
                    sv,
                    prev,
                    2.0 * self.cs * inc / dt,
                    2.0 * self.cs / dt,
                );
            }
            let rv = self.r_var[k];
            let prev = if k == 1 { None } else { Some(self.r_var[k - 1]) };
            let rinc = x[rv] - prev.map_or(0.0, |i| x[i]);
            let exm1 = math::exp_m1(rinc / (dt * self.bw));
            let ex = exm1 + 1.0;
            value += self.ct * exm1 * dt;
            pair(
                &mut hess,
                &mut links,
                &mut grad,
                rv,
                prev,
                self.ct * ex / self.bw,
                self.ct * ex / (self.bw * self.bw * dt),
            );
        }

        // Barrier terms: -mu ln(slack), slack = x[a] - x[b] + c.
        self.for_each_constraint(x, |slack, a, b| {
            value -= mu * math::ln(slack);
            let g = -mu / slack;
            let h = mu / (slack * slack);
            if a == usize::MAX {
                // Upper bound: slack = c - x[b].
                let b = b.unwrap();
                grad[b] += mu / slack;
                hess.add(b, b, h);
            } else {
                pair(&mut hess, &mut links, &mut grad, a, b, g, h);
            }
        });

        Eval {
            value,
            grad,
            hess,
            links,
        }
    }

    /// Newton direction through the banded factorization plus a Woodbury
    /// correction for the long links.
    fn newton_direction(eval: &mut Eval) -> Option<(Vec<f64>, f64)> {
        let n = eval.grad.len();
        // Merge duplicate links (the sensing chain link and its increment
        // barrier share endpoints).
        let mut merged: Vec<LongLink> = Vec::new();
        for l in &eval.links {
            match merged
                .iter_mut()
                .find(|m| (m.a == l.a && m.b == l.b) || (m.a == l.b && m.b == l.a))
            {
                Some(m) => m.coef += l.coef,
                None => merged.push(*l),
            }
        }
        assert!(merged.len() <= 2, "unexpected long-range coupling count");

        let mut ridge = 0.0;
        let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(eval.hess.band[0][i]));
        for _ in 0..6 {
            let mut b = Banded {
                n,
                band: [
                    eval.hess.band[0].clone(),
                    eval.hess.band[1].clone(),
                    eval.hess.band[2].clone(),
                ],
            };
            if ridge > 0.0 {
                for i in 0..n {
                    b.band[0][i] += ridge;
                }
            }
            if !b.factor() {
                ridge = if ridge == 0.0 { 1e-14 * max_diag } else { ridge * 100.0 };
                continue;
            }
            let neg_grad: Vec<f64> = eval.grad.iter().map(|g| -g).collect();
            let mut d = b.solve(&neg_grad);
            if !merged.is_empty() {
                // d := (B + sum c_j u_j u_j^T)^{-1} (-g)
                let mut z: Vec<Vec<f64>> = Vec::with_capacity(merged.len());
                for l in &merged {
                    let mut u = vec![0.0; n];
                    u[l.a] = 1.0;
                    u[l.b] = -1.0;
                    z.push(b.solve(&u));
                }
                let k = merged.len();
                let mut cmat = [[0.0; 2]; 2];
                let mut rhs = [0.0; 2];
                for j in 0..k {
                    for l in 0..k {
                        let u_l = &merged[l];
                        cmat[j][l] = z[j][u_l.a] - z[j][u_l.b];
                    }
                    cmat[j][j] += 1.0 / merged[j].coef;
                    let u_j = &merged[j];
                    rhs[j] = d[u_j.a] - d[u_j.b];
                }
                let w = if k == 1 {
                    [rhs[0] / cmat[0][0], 0.0]
                } else {
                    let det = cmat[0][0] * cmat[1][1] - cmat[0][1] * cmat[1][0];
                    [
                        (rhs[0] * cmat[1][1] - rhs[1] * cmat[0][1]) / det,
                        (rhs[1] * cmat[0][0] - rhs[0] * cmat[1][0]) / det,
                    ]
                };
                for j in 0..k {
                    for (di, zi) in d.iter_mut().zip(&z[j]) {
                        *di -= w[j] * zi;
                    }
                }
            }
            let decrement: f64 = d
                .iter()
                .zip(&eval.grad)
                .map(|(di, gi)| -di * gi)
                .sum();
            if decrement.is_finite() && decrement >= 0.0 {
                return Some((d, decrement));
            }
            ridge = if ridge == 0.0 { 1e-14 * max_diag } else { ridge * 100.0 };
        }
        None
    }

    /// Centers at a fixed barrier weight. Returns the Newton decrement at
    /// exit. A line-search stall with an already-small decrement counts as
    /// centered: the decrement itself bounds the residual suboptimality of
    /// the scaled objective.
    fn center(&self, x: &mut Vec<f64>, mu: f64) -> Result<f64, f64> {
        let mut last_dec = f64::INFINITY;
        for _ in 0..200 {
            let mut eval = self.eval(x, mu);
            let (dir, decrement) = match Self::newton_direction(&mut eval) {
                Some(v) => v,
                None => return Err(last_dec),
            };
            last_dec = decrement;
            if decrement * 0.5 <= 1e-9 {
                return Ok(decrement);
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
                if self.strictly_feasible(&cand) {
                    let v = self.barrier_value(&cand, mu);
                    if v <= eval.value - 0.25 * t * decrement {
                        *x = cand;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return if decrement <= 1e-5 {
                    Ok(decrement)
                } else {
                    Err(decrement)
                };
            }
        }
        Err(last_dec)
    }

    /// Follows the central path until the scaled duality gap falls below
    /// `tol` relative to the scaled objective. Returns the final barrier
    /// weight.
    pub fn solve(&self, x: &mut Vec<f64>, tol: f64) -> Result<f64, f64> {
        let m = self.constraint_count as f64;
        let mut mu = 1.0 / m;
        loop {
            self.center(x, mu)?;
            let gap = mu * m;
            if gap <= tol * self.objective(x).max(1e-9) {
                return Ok(mu);
            }
            mu /= 10.0;
        }
    }

    /// Per-slot rates from a solved point, with the buffer relaxation
    /// clamped back out and dust rates rounded to zero.
    pub fn extract_rates(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.grid.slot_count();
        let mut s_rates = Vec::with_capacity(m);
        let mut r_cum = Vec::with_capacity(m);
        for k in 1..=m {
            if self.grid.busy[k - 1] {
                s_rates.push(0.0);
            } else {
                let inc = self.s_value(x, k) - self.s_value(x, k - 1);
                s_rates.push(inc / self.grid.dt[k - 1]);
            }
            r_cum.push(x[self.r_var[k]].min(self.grid.cap[k - 1]));
        }
        // The clamp keeps the curve nondecreasing because the cap is.
        let mut r_rates = Vec::with_capacity(m);
        let mut prev = 0.0;
        for (k, &c) in r_cum.iter().enumerate() {
            let c = c.max(prev);
            r_rates.push((c - prev) / self.grid.dt[k]);
            prev = c;
        }
        let round = |r: &mut Vec<f64>| {
            for v in r.iter_mut() {
                if *v < 1e-12 {
                    *v = 0.0;
                }
            }
        };
        round(&mut s_rates);
        round(&mut r_rates);
        (s_rates, r_rates)
    }
}
