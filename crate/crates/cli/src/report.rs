//! Summaries of finished runs: a plain-text digest, a machine-readable
//! `summary.json` with per-check verdicts against the pinned thresholds, and
//! plot-ready projections (PCA of attractor clouds).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::artifacts::{read_cloud_gz, read_monitors_csv, write_json};
use crate::manifest::RunManifest;
use crate::pca::project_2d;
use crate::runner::{AttractorArtifact, EnsembleArtifact, EquilibriaArtifact, HarnessError, VerifyArtifact};
use crate::thresholds;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub outcome: String,
    pub region: String,
    pub checks: Vec<SummaryCheck>,
    pub notes: Vec<String>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn missing(path: &Path) -> HarnessError {
    HarnessError::Experiment(format!("missing or unreadable artifact: {}", path.display()))
}

fn read_artifact<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|_| missing(path))?;
    serde_json::from_str(&text).map_err(|_| missing(path))
}

/// Build the summary for a finished run directory and write `summary.txt`,
/// `summary.json`, and any plot-ready data files.
pub fn report(run_dir: &Path) -> Result<Summary, HarnessError> {
    let manifest = RunManifest::read(run_dir).map_err(|_| missing(&run_dir.join("manifest.json")))?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    match manifest.experiment.as_str() {
        "simulate" => {
            let rows = read_monitors_csv(&run_dir.join("monitors.csv"))
                .map_err(|_| missing(&run_dir.join("monitors.csv")))?;
            if rows.is_empty() {
                return Err(HarnessError::Experiment("empty monitors.csv".into()));
            }
            let e0 = rows[0].energy;
            let max_residual = rows
                .iter()
                .map(|r| (r.energy + r.diss_cum - e0).abs())
                .fold(0.0f64, f64::max);
            checks.push(SummaryCheck {
                name: "max_energy_identity_residual".into(),
                value: max_residual,
                threshold: thresholds::ENERGY_IDENTITY_MAX_RESIDUAL,
                pass: max_residual <= thresholds::ENERGY_IDENTITY_MAX_RESIDUAL,
            });

            let dt = manifest.resolved_config.solver.dt;
            let damped = manifest.resolved_config.model.damping != "zero";
            if damped {
                let slack = thresholds::LYAPUNOV_SLACK_PER_DT * dt;
                let worst_increase = rows
                    .windows(2)
                    .map(|w| w[1].lyapunov - w[0].lyapunov)
                    .fold(f64::NEG_INFINITY, f64::max);
                checks.push(SummaryCheck {
                    name: "lyapunov_max_increase".into(),
                    value: worst_increase,
                    threshold: slack,
                    pass: worst_increase <= slack,
                });
            }
            if manifest.outcome == "diverged" {
                let t_div = rows.last().map(|r| r.t).unwrap_or(f64::NAN);
                notes.push(format!("run diverged at t = {t_div}"));
                if manifest.region == "uncovered" {
                    notes.push("exponent pair lies in the uncovered region".into());
                }
            }
            notes.push(format!(
                "final energy {} at t = {}",
                rows.last().unwrap().energy,
                rows.last().unwrap().t
            ));
        }
        "ensemble" => {
            let artifact: EnsembleArtifact = read_artifact(&run_dir.join("ensemble.json"))?;
            let horizon = artifact.absorbing.horizon;
            let worst_entry = artifact
                .absorbing
                .trajectories
                .iter()
                .map(|t| t.entry_time)
                .fold(0.0f64, f64::max);
            checks.push(SummaryCheck {
                name: "latest_entry_time".into(),
                value: worst_entry,
                threshold: horizon,
                pass: worst_entry <= horizon,
            });
            checks.push(SummaryCheck {
                name: "diverged_runs".into(),
                value: artifact.absorbing.diverged.len() as f64,
                threshold: 0.0,
                pass: artifact.absorbing.diverged.is_empty(),
            });
            if let Some(doubling) = &artifact.doubling {
                checks.push(SummaryCheck {
                    name: "absorbing_radius_doubling_change".into(),
                    value: doubling.relative_change,
                    threshold: thresholds::ABSORBING_DOUBLING_REL_CHANGE,
                    pass: doubling.relative_change <= thresholds::ABSORBING_DOUBLING_REL_CHANGE,
                });
            }
            checks.push(SummaryCheck {
                name: "max_space_time_ratio_finite".into(),
                value: artifact.max_space_time_ratio,
                threshold: f64::INFINITY,
                pass: artifact.max_space_time_ratio.is_finite(),
            });
            notes.push(format!("fitted absorbing radius {}", artifact.absorbing.rho_star));
        }
        "verify" => {
            let artifact: VerifyArtifact = read_artifact(&run_dir.join("certificates.json"))?;
            let failed = artifact.certificates.iter().filter(|c| !c.pass).count();
            checks.push(SummaryCheck {
                name: "failing_certificates".into(),
                value: failed as f64,
                threshold: 0.0,
                pass: failed == 0,
            });
            for c in &artifact.certificates {
                notes.push(format!(
                    "{}: {} (max violation {:.3e}, edge margin {:.3e})",
                    c.inequality,
                    if c.pass { "pass" } else { "FAIL" },
                    c.max_violation,
                    c.margin_at_edge
                ));
            }
        }
        "equilibria" => {
            let artifact: EquilibriaArtifact = read_artifact(&run_dir.join("equilibria.json"))?;
            let worst_residual = artifact
                .solutions
                .iter()
                .map(|s| s.residual)
                .fold(0.0f64, f64::max);
            checks.push(SummaryCheck {
                name: "worst_equilibrium_residual".into(),
                value: worst_residual,
                threshold: thresholds::EQUILIBRIUM_RESIDUAL,
                pass: worst_residual <= thresholds::EQUILIBRIUM_RESIDUAL,
            });
            notes.push(format!("{} distinct equilibria", artifact.solutions.len()));
        }
        "attractor" => {
            let artifact: AttractorArtifact = read_artifact(&run_dir.join("attractor.json"))?;
            checks.push(SummaryCheck {
                name: "max_cloud_distance_to_equilibria".into(),
                value: artifact.max_cloud_distance_to_equilibria,
                threshold: thresholds::ATTRACTOR_EQUILIBRIUM_DIST,
                pass: artifact.max_cloud_distance_to_equilibria
                    <= thresholds::ATTRACTOR_EQUILIBRIUM_DIST,
            });
            checks.push(SummaryCheck {
                name: "semidistance_trend_nonincreasing".into(),
                value: if artifact.report.trend_nonincreasing { 1.0 } else { 0.0 },
                threshold: 1.0,
                pass: artifact.report.trend_nonincreasing,
            });
            let series = &artifact.report.semidistance;
            if let (Some(first), Some(last)) = (series.first(), series.last()) {
                notes.push(format!("semidistance endpoints {first} -> {last}"));
            }

            // plot-ready series and the PCA projection of the cloud
            let mut csv = String::from("t,semidistance,smoothed\n");
            for i in 0..series.len() {
                let _ = writeln!(
                    csv,
                    "{:?},{:?},{:?}",
                    artifact.report.probe_times[i], series[i], artifact.report.smoothed[i]
                );
            }
            std::fs::write(run_dir.join("semidistance.csv"), csv)
                .map_err(|e| HarnessError::Io(e.into()))?;

            let cloud = read_cloud_gz(&run_dir.join("cloud.jsonl.gz"))
                .map_err(|_| missing(&run_dir.join("cloud.jsonl.gz")))?;
            // H-weighted coordinates need the eigenvalues; rebuild the basis
            let basis = manifest
                .resolved_config
                .build_basis()
                .map_err(HarnessError::Config)?;
            let weighted: Vec<Vec<f64>> = cloud
                .iter()
                .map(|p| {
                    let mut row = Vec::with_capacity(2 * p.u.len());
                    for (i, &a) in p.u.iter().enumerate() {
                        row.push(basis.eigenvalues()[i].sqrt() * a);
                    }
                    row.extend_from_slice(&p.v);
                    row
                })
                .collect();
            let projection = project_2d(&weighted);
            write_json(&run_dir.join("cloud_pca.json"), &projection)?;
        }
        other => {
            return Err(HarnessError::Experiment(format!(
                "cannot report on experiment kind {other:?}"
            )))
        }
    }

    let summary = Summary {
        experiment: manifest.experiment.clone(),
        outcome: manifest.outcome.clone(),
        region: manifest.region.clone(),
        checks,
        notes,
    };
    write_json(&run_dir.join("summary.json"), &summary)?;
    std::fs::write(run_dir.join("summary.txt"), render_text(&summary))
        .map_err(|e| HarnessError::Io(e.into()))?;
    Ok(summary)
}

fn render_text(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", summary.experiment);
    let _ = writeln!(out, "outcome:    {}", summary.outcome);
    let _ = writeln!(out, "region:     {}", summary.region);
    let _ = writeln!(out);
    for c in &summary.checks {
        let _ = writeln!(
            out,
            "[{}] {} = {:.6e} (threshold {:.6e})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    if !summary.notes.is_empty() {
        let _ = writeln!(out);
        for n in &summary.notes {
            let _ = writeln!(out, "note: {n}");
        }
    }
    out
}
