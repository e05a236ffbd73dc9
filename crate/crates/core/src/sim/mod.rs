//! Experiment orchestration: configuration, FER sweeps, construction and
//! MCSC tables, PSD reports and the self-test.

pub mod config;
pub mod fer;
pub mod psd;
pub mod report;
pub mod selftest;
pub mod tables;

pub use config::ExperimentConfig;
pub use report::FerRecord;

/// Sizes the global worker pool. Results do not depend on the size.
pub fn init_threads(threads: usize) -> crate::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::Error::Config(format!("cannot start {threads} worker threads: {e}")))
}
