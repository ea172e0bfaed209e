//! Independent-trial execution.
//!
//! Each trial owns its registry, network and RNG, derived from a per-trial
//! seed, so trials can run in any order. With the `parallel` feature the
//! trials are spread over the rayon pool; without it every request runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon pool when built with `parallel`, sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this execution mode actually uses more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of sweep point `stream` under `master`.
pub fn trial_seed(master: u64, stream: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ trial)
}

/// Runs `f(0..trials)` and returns the results in trial order.
pub fn map_trials<T, F>(trials: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..trials).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..trials).map(f).collect()
}
