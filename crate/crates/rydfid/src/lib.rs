//! Configuration, batch runs, figure reproduction and the acceptance suite
//! on top of `rydfid-core`.

pub mod acceptance;
pub mod budget;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;

pub use config::Config;
pub use error::{CliError, Result};

use rayon::prelude::*;

/// Map `f` over `items` on a pool of `jobs` workers (0 picks the core count); results keep input order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}
