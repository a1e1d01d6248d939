//! JSON run configuration: distribution, economy parameters, mode, numeric
//! settings and the optional sweep block.

use kecon::{EconomyParams, KnowledgeDistribution, SolverSettings};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub distribution: DistributionConfig,
    pub h: f64,
    #[serde(default)]
    pub z_ai: f64,
    #[serde(default)]
    pub mu: f64,
    pub mode: Mode,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_ode_steps")]
    pub ode_steps: usize,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_audit_grid")]
    pub audit_grid: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_grid_points() -> usize {
    2001
}
fn default_ode_steps() -> usize {
    4096
}
fn default_root_tol() -> f64 {
    1e-12
}
fn default_quad_tol() -> f64 {
    1e-10
}
fn default_audit_grid() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    Uniform,
    PiecewiseLinear { knots: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pre,
    Autonomous,
    NonAutonomous,
    Compare,
    Tradeoff,
}

impl Mode {
    pub fn is_solver_mode(self) -> bool {
        matches!(self, Mode::Pre | Mode::Autonomous | Mode::NonAutonomous)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    ZAi,
    H,
}

impl RunConfig {
    pub fn build_distribution(&self) -> Result<KnowledgeDistribution, String> {
        match &self.distribution {
            DistributionConfig::Uniform => Ok(KnowledgeDistribution::uniform()),
            DistributionConfig::PiecewiseLinear { knots } => {
                let pairs: Vec<(f64, f64)> = knots.iter().map(|k| (k[0], k[1])).collect();
                KnowledgeDistribution::from_density_knots(&pairs).map_err(|e| e.to_string())
            }
        }
    }

    pub fn build_params(&self) -> Result<EconomyParams, String> {
        self.build_params_with(self.h, self.z_ai)
    }

    pub fn build_params_with(&self, h: f64, z_ai: f64) -> Result<EconomyParams, String> {
        if self.grid_points < 2 {
            return Err("grid_points must be at least 2".into());
        }
        let dist = self.build_distribution()?;
        EconomyParams::new(dist, h, z_ai, self.mu)
            .and_then(|p| {
                p.with_settings(SolverSettings {
                    ode_steps: self.ode_steps,
                    root_tol: self.root_tol,
                    quad_tol: self.quad_tol,
                    audit_grid: self.audit_grid,
                })
            })
            .map_err(|e| e.to_string())
    }

    pub fn validate_sweep(&self) -> Result<&SweepConfig, String> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or("sweep block required for sweep mode")?;
        if sweep.steps == 0 {
            return Err("sweep.steps must be positive".into());
        }
        let (lo, hi) = (sweep.from.min(sweep.to), sweep.from.max(sweep.to));
        let domain_ok = match sweep.param {
            SweepParam::ZAi => lo >= 0.0 && hi < 1.0,
            SweepParam::H => lo > 0.0 && hi < 1.0,
        };
        if !domain_ok {
            return Err(format!(
                "sweep range [{lo}, {hi}] outside the parameter domain"
            ));
        }
        Ok(sweep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"distribution":{"type":"uniform"},"h":0.5,"z_ai":0.425,"mu":10.0,"mode":"autonomous"}"#,
        )
        .unwrap();
        assert_eq!(cfg.grid_points, 2001);
        assert_eq!(cfg.ode_steps, 4096);
        assert!(cfg.build_params().is_ok());
    }

    #[test]
    fn parses_piecewise_distribution() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"distribution":{"type":"piecewise_linear","knots":[[0.0,1.0],[0.5,3.0],[1.0,1.0]]},
                "h":0.5,"mode":"pre"}"#,
        )
        .unwrap();
        let dist = cfg.build_distribution().unwrap();
        assert!((dist.pdf_at(0.25).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_fields() {
        let res: Result<RunConfig, _> = serde_json::from_str(
            r#"{"distribution":{"type":"uniform"},"h":0.5,"mode":"pre","typo_field":1}"#,
        );
        assert!(res.is_err());
    }

    #[test]
    fn rejects_bad_sweep_range() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"distribution":{"type":"uniform"},"h":0.5,"mu":10.0,"mode":"autonomous",
                "sweep":{"param":"z_ai","from":0.2,"to":1.2,"steps":5}}"#,
        )
        .unwrap();
        assert!(cfg.validate_sweep().is_err());
    }
}
