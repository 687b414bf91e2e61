//! Solution JSON shape (version 1), carrying the schedules, the energy
//! breakdown and the full diagnostic trace of the height search.

use serde::{Deserialize, Serialize};
use taut_core::height::SearchBounds;
use taut_core::model::{RateSchedule, Segment};
use taut_core::solve::{Scheme, Solution};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub schema: u32,
    pub scheme: String,
    pub height_bits: Option<f64>,
    pub sensing: Vec<SegmentFile>,
    pub transmission: Vec<SegmentFile>,
    pub sensing_energy_j: f64,
    pub transmission_energy_j: f64,
    pub total_energy_j: f64,
    pub bounds: Option<BoundsFile>,
    pub critical_heights_bits: Vec<f64>,
    pub sub_areas: Vec<SubAreaFile>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub rate_bps: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub lower_clipped: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubAreaFile {
    pub lo_bits: f64,
    pub hi_bits: f64,
    pub h_star_bits: f64,
    pub energy_j: f64,
}

fn segments_out(s: &RateSchedule) -> Vec<SegmentFile> {
    s.segments()
        .iter()
        .map(|g| SegmentFile {
            t_start_s: g.start,
            t_end_s: g.end,
            rate_bps: g.rate,
        })
        .collect()
}

fn segments_in(segs: &[SegmentFile]) -> Result<RateSchedule, CliError> {
    RateSchedule::new(
        segs.iter()
            .map(|g| Segment {
                start: g.t_start_s,
                end: g.t_end_s,
                rate: g.rate_bps,
            })
            .collect(),
    )
    .map_err(|e| CliError::parse(format!("invalid schedule in solution: {e}")))
}

impl SolutionFile {
    pub fn from_solution(sol: &Solution) -> SolutionFile {
        SolutionFile {
            schema: 1,
            scheme: sol.scheme.name().to_string(),
            height_bits: sol.height,
            sensing: segments_out(&sol.sensing),
            transmission: segments_out(&sol.transmission),
            sensing_energy_j: sol.sensing_energy,
            transmission_energy_j: sol.transmission_energy,
            total_energy_j: sol.total_energy,
            bounds: sol.bounds.map(|b| BoundsFile {
                lower_bits: b.lower,
                upper_bits: b.upper,
                lower_clipped: b.lower_clipped,
            }),
            critical_heights_bits: sol.critical_heights.iter().map(|c| c.height).collect(),
            sub_areas: sol
                .sub_areas
                .iter()
                .map(|a| SubAreaFile {
                    lo_bits: a.lo,
                    hi_bits: a.hi,
                    h_star_bits: a.h_star,
                    energy_j: a.energy,
                })
                .collect(),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<SolutionFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let file: SolutionFile = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        if file.schema != 1 {
            return Err(CliError::parse(format!(
                "unsupported solution schema {} (expected 1)",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn schedules(&self) -> Result<(RateSchedule, RateSchedule), CliError> {
        Ok((segments_in(&self.sensing)?, segments_in(&self.transmission)?))
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        match self.scheme.as_str() {
            "JSTRC" => Ok(Scheme::Jstrc),
            "UB" => Ok(Scheme::Ub),
            "LB" => Ok(Scheme::Lb),
            "RH" => Ok(Scheme::Rh),
            other => Err(CliError::parse(format!("unknown scheme {other:?}"))),
        }
    }

    pub fn bounds(&self) -> Option<SearchBounds> {
        self.bounds.map(|b| SearchBounds {
            lower: b.lower_bits,
            upper: b.upper_bits,
            lower_clipped: b.lower_clipped,
        })
    }
}
