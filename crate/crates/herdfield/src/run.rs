//! Subcommand execution.

use std::fs;
use std::path::PathBuf;

use herdfield_core::sweep::{find_threshold, monotonic_anomalies, Classification};
use herdfield_core::trajectory::{detect_herding, simulate};
use herdfield_core::{solve_mfe, SolveError, TypeMeanField};

use crate::config::{Command, RunConfig};
use crate::error::{ConfigError, FormatError, RunError};
use crate::io::{self, FigureBundle, HerdingDoc, StoredEquilibrium, ThresholdDoc};
use crate::parallel;

/// Files written by a run plus notes worth showing the user.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl RunOutput {
    fn write(&mut self, config: &RunConfig, name: &str, text: &str) -> Result<(), FormatError> {
        let path = config.out_dir.join(name);
        io::write_text(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), FormatError> {
    fs::create_dir_all(&config.out_dir).map_err(|e| FormatError::io(&config.out_dir, e))
}

/// Solves from the config, or loads the configured equilibrium file.
fn equilibrium(config: &RunConfig) -> Result<StoredEquilibrium, RunError> {
    if let Some(path) = &config.equilibrium {
        let stored = io::read_equilibrium(path)?;
        if let Some(alpha) = config.alpha {
            if alpha != stored.params.alpha() {
                return Err(ConfigError::Invalid {
                    key: "alpha".into(),
                    reason: format!(
                        "{alpha} disagrees with {} in {}",
                        stored.params.alpha(),
                        path.display()
                    ),
                }
                .into());
            }
        }
        return Ok(stored);
    }
    let params = config.params().ok_or(ConfigError::Missing("alpha"))?;
    let solution = solve_mfe(&params, config.grid(), &config.solve_options())?;
    Ok(StoredEquilibrium::from(&solution))
}

pub fn run(command: Command, config: &RunConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    config.check_required(command)?;
    let mut out = RunOutput::default();
    match command {
        Command::Solve => {
            let params = config.params().ok_or(ConfigError::Missing("alpha"))?;
            let (solution, failure) =
                match solve_mfe(&params, config.grid(), &config.solve_options()) {
                    Ok(s) => (s, None),
                    Err(SolveError::NotConverged(s)) => {
                        let msg = SolveError::NotConverged(s.clone()).to_string();
                        (*s, Some(msg))
                    }
                    Err(e) => return Err(e.into()),
                };
            ensure_out_dir(config)?;
            out.write(
                config,
                io::EQUILIBRIUM_FILE,
                &io::equilibrium_json(&StoredEquilibrium::from(&solution)),
            )?;
            out.write(
                config,
                io::SOLVE_REPORT_FILE,
                &io::solve_report_json(&solution.report),
            )?;
            if let Some(msg) = failure {
                return Err(RunError::Solve(msg));
            }
            let r = solution.report;
            out.notes.push(format!(
                "converged in {} iterations, Bellman residual {:e}",
                r.iterations, r.bellman_residual
            ));
        }
        Command::Simulate => {
            let eq = equilibrium(config)?;
            let z0 = TypeMeanField::new(config.z0).map_err(|e| ConfigError::Invalid {
                key: "z0".into(),
                reason: e.to_string(),
            })?;
            let traj = simulate(z0, &eq.theta, &eq.params, config.horizon);
            let report = detect_herding(&traj, herdfield_core::sweep::HERDING_TOL);
            let doc = HerdingDoc::new(&traj, &report);
            ensure_out_dir(config)?;
            out.write(config, io::TRAJECTORY_FILE, &io::trajectory_csv(&traj))?;
            out.write(config, io::HERDING_FILE, &doc.to_json())?;
            if config.population > 0 {
                let pool = parallel::pool_from_env()?;
                let runs = parallel::finite_n_runs(
                    &pool,
                    config.population,
                    z0,
                    &eq.theta,
                    &eq.params,
                    config.horizon,
                    &config.seeds,
                );
                out.write(config, io::EMPIRICAL_FILE, &io::empirical_csv(&traj, &runs))?;
            }
            out.notes.push(match doc.herd_action {
                Some(a) if doc.herded => {
                    format!("herding on action {a}, limit z1 = {}", doc.limit_z1)
                }
                _ if doc.herded => format!("herding with mixed play, limit z1 = {}", doc.limit_z1),
                _ => format!("no herding, limit z1 = {}", doc.limit_z1),
            });
        }
        Command::Sweep => {
            let pool = parallel::pool_from_env()?;
            let alphas = config.alphas();
            let points = parallel::alpha_sweep(&pool, &alphas, &config.sweep_setup());
            ensure_out_dir(config)?;
            out.write(
                config,
                io::PHASE_FILE,
                &io::phase_csv(&points, &config.probes),
            )?;
            for p in points
                .iter()
                .filter(|p| p.classification == Classification::Unclassified)
            {
                out.notes.push(format!(
                    "alpha = {} unclassified: {}",
                    p.alpha,
                    p.failure.as_deref().unwrap_or("no probes")
                ));
            }
            for (i, j) in monotonic_anomalies(&points) {
                out.notes.push(format!(
                    "non-monotonic phase: {} at alpha = {} followed by {} at alpha = {}",
                    points[i].classification,
                    points[i].alpha,
                    points[j].classification,
                    points[j].alpha
                ));
            }
        }
        Command::Threshold => {
            let predicate = config.predicate.ok_or(ConfigError::Missing("predicate"))?;
            let result = find_threshold(
                predicate,
                config.lo,
                config.hi,
                config.threshold_tol,
                &config.sweep_setup(),
            )?;
            ensure_out_dir(config)?;
            out.write(
                config,
                io::THRESHOLD_FILE,
                &ThresholdDoc::from(&result).to_json(),
            )?;
            out.notes.push(format!(
                "{} changes within [{}, {}]",
                predicate, result.bracket_lo, result.bracket_hi
            ));
        }
        Command::Figures => {
            let path = config
                .equilibrium
                .as_ref()
                .ok_or(ConfigError::Missing("equilibrium"))?;
            let eq = io::read_equilibrium(path)?;
            let bundle = FigureBundle::new(&eq.theta, &eq.values, &eq.params);
            ensure_out_dir(config)?;
            out.written.extend(bundle.write(&config.out_dir)?);
        }
    }
    Ok(out)
}
