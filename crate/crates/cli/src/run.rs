//! Dispatch of a [`RunConfig`] to the numerics.

use std::io::Write;

use nbs_core::dynamics::evolution_series;
use nbs_core::phasespace::{grid_evaluate, Distribution, SeriesOptions};
use nbs_core::squeeze::{eta_grid, squeezing_scan};
use nbs_core::states::nbs;
use nbs_core::stats::stats_report;
use nbs_core::{verify, NbsParams, TruncationPolicy};

use crate::config::{Command, Format, RunConfig};
use crate::error::CliError;
use crate::output::{write_csv_table, write_grid_csv, write_json, write_stats_csv};

/// Fock-space cap for single states.
pub const N_CAP: usize = 4096;
/// Fock-space cap for squeezing scans, which reach eta close to 0.
pub const SCAN_N_CAP: usize = 1 << 17;

/// Runs the command and writes its output. A failed `verify` still writes
/// every line before returning [`CliError::Verify`].
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let policy = TruncationPolicy::new(config.tail_eps, N_CAP)?;
    let format = config.output_format();
    match config.command {
        Command::Stats => {
            let report = stats_report(NbsParams::new(config.eta()?, config.m()?)?, &policy)?;
            match format {
                Format::Json => write_json(out, &report),
                Format::Csv => write_stats_csv(out, &report),
            }
        }
        Command::SqueezeScan => {
            let s = config.scan;
            let ms: Vec<usize> = (s.m_min..=s.m_max).collect();
            let etas = eta_grid(s.eta_min, s.eta_max, s.eta_step)?;
            let table = squeezing_scan(&ms, &etas, &policy.with_cap(SCAN_N_CAP), config.exec)?;
            match format {
                Format::Json => write_json(out, &table),
                Format::Csv => write_csv_table(out, &table.samples),
            }
        }
        Command::Qfunc | Command::Wigner | Command::Sdist => {
            let kind = match config.command {
                Command::Qfunc => Distribution::Q,
                Command::Wigner => Distribution::Wigner,
                _ => Distribution::S(config.s.unwrap_or_default()),
            };
            let state = nbs(NbsParams::new(config.eta()?, config.m()?)?, &policy)?;
            let grid = grid_evaluate(&state, &config.grid, kind, &SeriesOptions::default(), config.exec)?;
            match format {
                Format::Json => write_json(out, &grid),
                Format::Csv => write_grid_csv(out, &grid),
            }
        }
        Command::Evolve => {
            let chi_ts: Vec<f64> = (0..=config.steps)
                .map(|i| config.chi_t * i as f64 / config.steps as f64)
                .collect();
            let series = evolution_series(&chi_ts, config.m.unwrap_or(0), &policy, config.exec)?;
            match format {
                Format::Json => write_json(out, &series),
                Format::Csv => write_csv_table(out, &series),
            }
        }
        Command::Verify => {
            let outcomes = verify::run_all(config.exec);
            match config.format {
                Some(Format::Json) => write_json(out, &outcomes)?,
                Some(Format::Csv) => write_csv_table(out, &outcomes)?,
                None => {
                    for o in &outcomes {
                        writeln!(out, "{}", o.line())
                            .map_err(|source| CliError::Io { path: "<output>".into(), source })?;
                    }
                }
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Verify { failed, total: outcomes.len() })
            }
        }
    }
}
