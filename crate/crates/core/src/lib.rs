//! Collaboration analytics over bibliographic corpora.
//!
//! The pipeline runs in stages that mirror the modules below:
//!
//! * [`corpus`]: newline-delimited JSON ingest, year and institution filters.
//! * [`affnorm`]: rule-driven disambiguation of organization and
//!   suborganization strings into canonical institution and department ids.
//! * [`classify`]: multi-author, multi-institution and multi-department labels.
//! * [`citegraph`]: in/out citation graph and per-group citation statistics.
//! * [`comatrix`]: department incidence matrices and their co-occurrence products.
//! * [`cluster`]: Ward agglomerative clustering and dendrogram leaf order.
//! * [`report`]: CSV tables, time series and the dendrogram-ordered SVG heatmap.
//! * [`synth`]: seeded synthetic corpora with ground truth.
//! * [`pipeline`]: end-to-end orchestration writing one output directory.

pub mod affnorm;
pub mod citegraph;
pub mod classify;
pub mod cluster;
pub mod comatrix;
pub mod corpus;
mod error;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};

/// Runs `f` inside a rayon pool with `workers` threads, or the global pool
/// when `workers` is `None`.
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    match workers {
        None => f(),
        Some(0) => Err(Error::InvalidArgument(
            "worker count must be at least 1".into(),
        )),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invariant(format!("cannot build thread pool: {e}")))?;
            pool.install(f)
        }
    }
}
