//! The solve, verify and sweep commands.

use std::io::Write;
use std::path::Path;

use taut_core::height::{critical_heights, critical_heights_buffered, search_bounds};
use taut_core::model::{check_feasibility, sensing_energy, transmission_energy, Scenario};
use taut_core::oracle::height_sweep;
use taut_core::solve::{optimize, optimize_buffered, Scheme, Solution};

use crate::format::g9;
use crate::scenario_file::ScenarioFile;
use crate::solution_file::SolutionFile;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn solve_scenario(scenario: &Scenario) -> Result<Solution, CliError> {
    let run = if scenario.buffer().is_some() {
        optimize_buffered(scenario)
    } else {
        optimize(scenario)
    };
    run.map_err(|e| CliError::infeasible(e.to_string()))
}

/// Schedule table over the merged breakpoints of both schedules.
pub fn schedule_csv(sol: &Solution) -> String {
    let mut times: Vec<f64> = sol
        .sensing
        .breakpoints()
        .into_iter()
        .chain(sol.transmission.breakpoints())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let mut out = String::from("t_start_s,t_end_s,sense_rate_bps,tx_rate_bps\n");
    for w in times.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        out.push_str(&format!(
            "{},{},{},{}\n",
            g9(w[0]),
            g9(w[1]),
            g9(sol.sensing.rate_at(mid)),
            g9(sol.transmission.rate_at(mid)),
        ));
    }
    out
}

pub fn cmd_solve(
    scenario_path: &Path,
    buffered: bool,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = ScenarioFile::load(scenario_path)?;
    if buffered && file.buffer_bits.is_none() {
        return Err(CliError::inapplicable(
            "--buffered requires a scenario with buffer_bits",
        ));
    }
    let scenario = file.to_scenario()?;
    let sol = solve_scenario(&scenario)?;
    let report = check_feasibility(&scenario, &sol.sensing, &sol.transmission);
    if !report.is_feasible() {
        return Err(CliError::infeasible(format!(
            "solver output failed the feasibility check: {report:?}"
        )));
    }
    let content = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&SolutionFile::from_solution(&sol))
                .expect("solution serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => schedule_csv(&sol),
    };
    write_output(out, &content)
}

struct Ledger {
    all_ok: bool,
}

impl Ledger {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.all_ok &= ok;
    }

    fn skip(&mut self, name: &str, why: &str) {
        println!("SKIP {name}: {why}");
    }
}

pub fn cmd_verify(scenario_path: &Path, solution_path: &Path) -> Result<(), CliError> {
    let scenario = ScenarioFile::load(scenario_path)?.to_scenario()?;
    let file = SolutionFile::load(solution_path)?;
    let (sensing, transmission) = file.schedules()?;
    let scheme = file.scheme()?;
    let mut ledger = Ledger { all_ok: true };

    let report = check_feasibility(&scenario, &sensing, &transmission);
    ledger.check(
        "feasibility",
        report.is_feasible(),
        format!("{report:?}").chars().take(120).collect(),
    );

    let es = sensing_energy(&sensing, scenario.params());
    let et = transmission_energy(&transmission, scenario.params());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300);
    ledger.check(
        "sensing energy",
        close(es, file.sensing_energy_j),
        format!("recomputed {} vs stored {}", g9(es), g9(file.sensing_energy_j)),
    );
    ledger.check(
        "transmission energy",
        close(et, file.transmission_energy_j),
        format!("recomputed {} vs stored {}", g9(et), g9(file.transmission_energy_j)),
    );
    ledger.check(
        "energy total",
        close(es + et, file.total_energy_j),
        format!("{} vs {}", g9(es + et), g9(file.total_energy_j)),
    );

    if scenario.busy().is_some() {
        let bounds = search_bounds(&scenario).map_err(|e| CliError::verify(e.to_string()))?;
        let h = file.height_bits.unwrap_or(f64::NAN);
        let tol = 1e-9 * scenario.total_data();
        let in_area = h >= bounds.lower - tol && h <= bounds.lower.max(bounds.upper) + tol;
        ledger.check(
            "height within bounds",
            in_area,
            format!(
                "h = {} against [{}, {}]",
                g9(h),
                g9(bounds.lower),
                g9(bounds.lower.max(bounds.upper))
            ),
        );
        if scheme == Scheme::Jstrc {
            let sweep =
                height_sweep(&scenario, 1000).map_err(|e| CliError::verify(e.to_string()))?;
            let best = sweep
                .iter()
                .filter(|p| p.feasible)
                .map(|p| p.total)
                .fold(f64::INFINITY, f64::min);
            let ok = file.total_energy_j <= best * (1.0 + 1e-6);
            ledger.check(
                "height sweep optimality",
                ok,
                format!("best grid energy {} vs stored {}", g9(best), g9(file.total_energy_j)),
            );
        } else {
            ledger.skip("height sweep optimality", "fixed-height baseline scheme");
        }
    } else {
        ledger.skip("height within bounds", "no busy interval");
        ledger.skip("height sweep optimality", "no busy interval");
    }

    if ledger.all_ok {
        Ok(())
    } else {
        Err(CliError::verify("verification failed".to_string()))
    }
}

pub fn cmd_sweep(scenario_path: &Path, points: usize, out: Option<&Path>) -> Result<(), CliError> {
    let scenario = ScenarioFile::load(scenario_path)?.to_scenario()?;
    if scenario.busy().is_none() {
        return Err(CliError::inapplicable("no height dimension without a busy interval"));
    }
    let bounds = search_bounds(&scenario).map_err(|e| CliError::infeasible(e.to_string()))?;
    let criticals: Vec<f64> = if scenario.buffer().is_some() {
        critical_heights_buffered(&scenario, &bounds)
            .map_err(|e| CliError::infeasible(e.to_string()))?
            .iter()
            .map(|c| c.height)
            .collect()
    } else {
        critical_heights(&scenario, &bounds)
            .iter()
            .map(|c| c.height)
            .collect()
    };
    let sweep = height_sweep(&scenario, points).map_err(|e| CliError::infeasible(e.to_string()))?;
    let mut content = format!(
        "# h_l={} h_u={} lower_clipped={}\n# criticals={}\n# skipped={}\n",
        g9(bounds.lower),
        g9(bounds.upper),
        bounds.lower_clipped,
        criticals
            .iter()
            .map(|&h| g9(h))
            .collect::<Vec<_>>()
            .join(";"),
        sweep.iter().filter(|p| !p.feasible).count(),
    );
    content.push_str("h_bits,e_total_j,e_sense_j,e_tx_j\n");
    for p in &sweep {
        content.push_str(&format!(
            "{},{},{},{}\n",
            g9(p.h),
            g9(p.total),
            g9(p.sensing),
            g9(p.transmission)
        ));
    }
    write_output(out, &content)
}
