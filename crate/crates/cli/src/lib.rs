//! Configuration, orchestration and persistence for the `frontlab` binary.

pub mod config;
pub mod results;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use results::{append_rows, Profile, ResultRow, Status, HEADER};
pub use run::{angle_deg, persist, run_command, Command, Outcome};

/// Worker count from `FRONTLAB_WORKERS`, else the number of logical cores.
pub fn workers_from_env(value: Option<&str>) -> Result<usize, String> {
    match value {
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("FRONTLAB_WORKERS = `{v}` is not a positive integer")),
        },
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
