//! Experiment configuration: flat, JSON-compatible key-value files.

use crate::error::{Error, Result};
use crate::potential::{parse_expression, Piece, Potential1D};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PotentialCheck,
    QuasimodeSweep,
    WkbAiryCheck,
    BoxsizeTable,
    NormSweep,
    ResonanceSweep,
    FluxCheck,
    RevolutionSweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::PotentialCheck => "potential-check",
            Experiment::QuasimodeSweep => "quasimode-sweep",
            Experiment::WkbAiryCheck => "wkb-airy-check",
            Experiment::BoxsizeTable => "boxsize-table",
            Experiment::NormSweep => "norm-sweep",
            Experiment::ResonanceSweep => "resonance-sweep",
            Experiment::FluxCheck => "flux-check",
            Experiment::RevolutionSweep => "revolution-sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Experiment> {
        match s {
            "potential-check" => Ok(Experiment::PotentialCheck),
            "quasimode-sweep" => Ok(Experiment::QuasimodeSweep),
            "wkb-airy-check" => Ok(Experiment::WkbAiryCheck),
            "boxsize-table" => Ok(Experiment::BoxsizeTable),
            "norm-sweep" => Ok(Experiment::NormSweep),
            "resonance-sweep" => Ok(Experiment::ResonanceSweep),
            "flux-check" => Ok(Experiment::FluxCheck),
            "revolution-sweep" => Ok(Experiment::RevolutionSweep),
            other => Err(Error::Config {
                field: "experiment".into(),
                detail: format!("unknown experiment `{other}`"),
            }),
        }
    }

    pub fn all() -> [Experiment; 8] {
        [
            Experiment::PotentialCheck,
            Experiment::QuasimodeSweep,
            Experiment::WkbAiryCheck,
            Experiment::BoxsizeTable,
            Experiment::NormSweep,
            Experiment::ResonanceSweep,
            Experiment::FluxCheck,
            Experiment::RevolutionSweep,
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// One potential piece in the config grammar.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSpec {
    /// [lo, hi] in |x|; use a huge hi for the tail piece.
    pub interval: (f64, f64),
    /// poly(c0,c1,...) | harmonic_well | linear_ramp | zero
    pub expression: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub pieces: Vec<PieceSpec>,
    pub blend_width: f64,
    #[serde(default = "default_support_radius")]
    pub support_radius: f64,
}

fn default_support_radius() -> f64 {
    5.0
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential1D> {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            pieces.push(Piece {
                lo: p.interval.0,
                hi: p.interval.1,
                coeffs: parse_expression(&p.expression)?,
            });
        }
        Potential1D::from_pieces(pieces, self.blend_width, self.support_radius, &[])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub h_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub k_grid: Option<Vec<u32>>,
    /// Ring cutoff center R; chi has radius 4, psi is {R-1 < |x| < R+1}.
    #[serde(default = "default_ring")]
    pub ring_radius: f64,
    #[serde(default = "default_blend")]
    pub blend_width: f64,
    /// ODE step override (defaults to min(h/20, 1e-3) per run).
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub kernel_spacing: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    /// norm-sweep target: chi_R_chi | psi_R_chi | psi_R_psi_outside.
    #[serde(default)]
    pub which: Option<String>,
    /// dirichlet | resonance | fixed:<energy>
    #[serde(default)]
    pub energy_selector: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_ring() -> f64 {
    6.0
}
fn default_blend() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn default_for(experiment: Experiment) -> ExperimentConfig {
        let desk: Vec<f64> = crate::DESK_H_GRID.to_vec();
        let resonance: Vec<f64> = crate::RESONANCE_H_GRID.to_vec();
        let (h_grid, k_grid) = match experiment {
            Experiment::RevolutionSweep => {
                (None, Some(crate::MODE_K_RANGE.clone().collect::<Vec<u32>>()))
            }
            // norm evaluations at the box level need the pole resolvable
            Experiment::ResonanceSweep | Experiment::FluxCheck | Experiment::NormSweep => {
                (Some(resonance), None)
            }
            Experiment::PotentialCheck => (None, None),
            _ => (Some(desk), None),
        };
        ExperimentConfig {
            experiment,
            h_grid,
            k_grid,
            ring_radius: 6.0,
            blend_width: 0.1,
            step: None,
            kernel_spacing: None,
            x_max: None,
            which: None,
            energy_selector: None,
            output: None,
            format: OutputFormat::Csv,
            potential: None,
            jobs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(grid) = &self.h_grid {
            if grid.is_empty() {
                return Err(Error::Config { field: "h_grid".into(), detail: "empty".into() });
            }
            if grid.iter().any(|&h| !(h > 0.0 && h <= 0.35)) {
                return Err(Error::Config {
                    field: "h_grid".into(),
                    detail: "entries must lie in (0, 0.35]".into(),
                });
            }
            if grid.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config {
                    field: "h_grid".into(),
                    detail: "must be strictly decreasing".into(),
                });
            }
        }
        if let Some(grid) = &self.k_grid {
            if grid.is_empty() {
                return Err(Error::Config { field: "k_grid".into(), detail: "empty".into() });
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config {
                    field: "k_grid".into(),
                    detail: "must be strictly increasing".into(),
                });
            }
        }
        if !(self.ring_radius > 5.0) {
            return Err(Error::Config {
                field: "ring_radius".into(),
                detail: "needs R > 5 so the ring clears the support".into(),
            });
        }
        if let Some(sel) = &self.energy_selector {
            let ok = sel == "dirichlet"
                || sel == "resonance"
                || sel
                    .strip_prefix("fixed:")
                    .map(|v| v.parse::<f64>().is_ok())
                    .unwrap_or(false);
            if !ok {
                return Err(Error::Config {
                    field: "energy_selector".into(),
                    detail: format!("`{sel}` is not dirichlet | resonance | fixed:<E>"),
                });
            }
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<Potential1D> {
        match &self.potential {
            Some(spec) => spec.build(),
            None => crate::potential::build_paper_potential(self.blend_width),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let cfg = ExperimentConfig::default_for(Experiment::NormSweep);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.experiment, Experiment::NormSweep);
        assert_eq!(back.h_grid.unwrap().len(), crate::DESK_H_GRID.len());
    }

    #[test]
    fn rejects_bad_grids_with_field_names() {
        let bad = r#"{"experiment":"norm-sweep","h_grid":[0.03,0.05]}"#;
        let err = ExperimentConfig::from_json(bad).unwrap_err();
        assert!(format!("{err}").contains("h_grid"));
        let bad2 = r#"{"experiment":"norm-sweep","h_grid":[]}"#;
        assert!(ExperimentConfig::from_json(bad2).is_err());
        let unknown = r#"{"experiment":"norm-sweep","h_gird":[0.1]}"#;
        assert!(ExperimentConfig::from_json(unknown).is_err());
    }

    #[test]
    fn potential_spec_builds_through_the_grammar() {
        let spec = PotentialSpec {
            pieces: vec![
                PieceSpec { interval: (0.0, 1.0), expression: "harmonic_well".into() },
                PieceSpec { interval: (2.0, 3.5), expression: "linear_ramp".into() },
                PieceSpec { interval: (5.0, 1e308), expression: "zero".into() },
            ],
            blend_width: 0.1,
            support_radius: 5.0,
        };
        let v = spec.build().unwrap();
        use crate::potential::Potential;
        assert_eq!(v.eval(0.0), 1.0);
        assert_eq!(v.eval(3.0), 1.0);
    }
}
