use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::BlockData;
use super::estimate::{sdid_estimate, SdidOptions};
use crate::did::TreatmentAssignment;
use crate::error::{Error, Result};
use crate::panel_core::Panel;
use crate::stats::sample_sd;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replications: usize,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            replications: 500,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult<T> {
    pub se: T,
    /// Successful replicates in replicate order.
    pub replicate_taus: Vec<T>,
    pub failed: usize,
}

impl<T: Scalar> BootstrapResult<T> {
    pub(crate) fn empty() -> Self {
        Self {
            se: T::nan(),
            replicate_taus: Vec::new(),
            failed: 0,
        }
    }
}

const MAX_ATTEMPTS: usize = 10;

/// Unit bootstrap of the SDID estimate with the estimator settings in
/// `options` (its own bootstrap field is ignored).
pub fn bootstrap_variance<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    options: &SdidOptions<T>,
    bootstrap: &BootstrapOptions,
) -> Result<BootstrapResult<T>> {
    let opts = SdidOptions {
        bootstrap: Some(*bootstrap),
        ..options.clone()
    };
    let r = sdid_estimate(panel, assignment, &opts)?;
    Ok(BootstrapResult {
        se: r.att.se,
        replicate_taus: r.replicate_taus,
        failed: r.failed_replicates,
    })
}

/// Stratified resampling: each replicate draws N_co controls and N_tr
/// treated units with replacement. Replicate b uses ChaCha8 stream b of the
/// seed, so the output does not depend on thread scheduling. A replicate
/// whose estimate fails or is non-finite is redrawn up to 10 times.
pub(crate) fn bootstrap_blocks<T, F>(
    block: &BlockData<T>,
    options: &BootstrapOptions,
    estimate: F,
) -> Result<BootstrapResult<T>>
where
    T: Scalar,
    F: Fn(&BlockData<T>) -> Result<T> + Sync,
{
    if options.replications < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 replications"));
    }
    // A single-unit stratum is redrawn as itself, so only one side needs
    // two units for the replicates to vary.
    if block.n_co < 2 && block.n_tr < 2 {
        return Err(Error::invalid(
            "bootstrap needs at least 2 control or 2 treated units",
        ));
    }
    let outcomes: Vec<Option<T>> = (0..options.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(b as u64);
            let mut rows = vec![0usize; block.n_units()];
            for _ in 0..MAX_ATTEMPTS {
                for r in rows.iter_mut().take(block.n_co) {
                    *r = rng.random_range(0..block.n_co);
                }
                for r in rows.iter_mut().skip(block.n_co) {
                    *r = rng.random_range(block.n_co..block.n_units());
                }
                if let Ok(tau) = estimate(&block.resample(&rows)) {
                    if tau.is_finite() {
                        return Some(tau);
                    }
                }
            }
            None
        })
        .collect();
    let failed = outcomes.iter().filter(|o| o.is_none()).count();
    if failed * 20 > options.replications {
        return Err(Error::BootstrapFailures {
            failed,
            total: options.replications,
        });
    }
    let taus: Vec<T> = outcomes.into_iter().flatten().collect();
    if taus.len() < 2 {
        return Err(Error::BootstrapFailures {
            failed,
            total: options.replications,
        });
    }
    Ok(BootstrapResult {
        se: sample_sd(&taus),
        replicate_taus: taus,
        failed,
    })
}
