//! Parallel Monte Carlo ensembles with reproducible per-realization streams.
//!
//! Realization `i` draws from its own generator, seeded from stream `i` of a
//! ChaCha8 generator keyed by the master seed. Results therefore do not
//! depend on thread count or scheduling, and counts are aggregated with
//! exact integer sums.

use molnoise_core::detector::DetectorSpec;
use molnoise_core::sim::{BerCount, BitTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::{Error, Result};

/// Generator for realization `index` under `seed`.
pub fn realization_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    master.set_stream(index);
    Xoshiro256PlusPlus::from_rng(&mut master)
}

/// Per-sample count moments over an ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountStats {
    realizations: u64,
    sum: Vec<u128>,
    sum_sq: Vec<u128>,
}

impl CountStats {
    pub fn new(len: usize) -> Self {
        Self { realizations: 0, sum: vec![0; len], sum_sq: vec![0; len] }
    }

    pub fn add(&mut self, counts: &[u64]) -> Result<()> {
        if counts.len() != self.sum.len() {
            return Err(Error::Other(format!(
                "realization returned {} samples, expected {}",
                counts.len(),
                self.sum.len()
            )));
        }
        for (i, &c) in counts.iter().enumerate() {
            self.sum[i] += c as u128;
            self.sum_sq[i] += (c as u128) * (c as u128);
        }
        self.realizations += 1;
        Ok(())
    }

    pub fn merge(mut self, other: Self) -> Result<Self> {
        if other.sum.len() != self.sum.len() {
            return Err(Error::Other("cannot merge ensembles of different length".into()));
        }
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.realizations += other.realizations;
        Ok(self)
    }

    pub fn realizations(&self) -> u64 {
        self.realizations
    }

    pub fn len(&self) -> usize {
        self.sum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty()
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] as f64 / self.realizations as f64
    }

    /// Unbiased sample variance; zero for fewer than two realizations.
    pub fn variance(&self, i: usize) -> f64 {
        let n = self.realizations as u128;
        if n < 2 {
            return 0.0;
        }
        // n * sumsq - sum^2 is exact in integers.
        let num = n * self.sum_sq[i] - self.sum[i] * self.sum[i];
        num as f64 / (n * (n - 1)) as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self, i: usize) -> f64 {
        (self.variance(i) / self.realizations as f64).sqrt()
    }
}

/// Runs `realizations` independent count realizations in parallel.
pub fn count_ensemble<F>(len: usize, realizations: u64, seed: u64, run: F) -> Result<CountStats>
where
    F: Fn(&mut Xoshiro256PlusPlus) -> molnoise_core::Result<Vec<u64>> + Sync,
{
    (0..realizations)
        .into_par_iter()
        .try_fold(
            || CountStats::new(len),
            |mut acc, i| {
                let counts = run(&mut realization_rng(seed, i))?;
                acc.add(&counts)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| CountStats::new(len), CountStats::merge)
}

/// Runs `realizations` bit sequences in parallel, in realization order.
pub fn trace_ensemble<F>(realizations: u64, seed: u64, run: F) -> Result<Vec<BitTrace>>
where
    F: Fn(&mut Xoshiro256PlusPlus) -> molnoise_core::Result<BitTrace> + Sync,
{
    (0..realizations)
        .into_par_iter()
        .map(|i| run(&mut realization_rng(seed, i)).map_err(Error::from))
        .collect()
}

/// Bit error rate over an ensemble of sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerStats {
    pub errors: u64,
    pub decisions: u64,
    pub realizations: u64,
    /// Pooled error rate.
    pub ber: f64,
    /// Standard error from the spread of per-realization rates.
    pub stderr: f64,
}

impl BerStats {
    pub fn from_counts(counts: &[BerCount]) -> Self {
        let errors = counts.iter().map(|c| c.errors).sum();
        let decisions: u64 = counts.iter().map(|c| c.decisions).sum();
        let n = counts.len() as f64;
        let rates: Vec<f64> = counts.iter().map(|c| c.errors as f64 / c.decisions.max(1) as f64).collect();
        let mean = rates.iter().sum::<f64>() / n;
        let var = if counts.len() > 1 {
            rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            errors,
            decisions,
            realizations: counts.len() as u64,
            ber: if decisions > 0 { errors as f64 / decisions as f64 } else { 0.0 },
            stderr: (var / n).sqrt(),
        }
    }
}

/// Scores every trace with `detector`, skipping the first `warmup` bits.
pub fn score_traces(traces: &[BitTrace], detector: &DetectorSpec, warmup: usize) -> Result<BerStats> {
    let counts = traces.iter().map(|t| t.score(detector, warmup)).collect::<molnoise_core::Result<Vec<_>>>()?;
    Ok(BerStats::from_counts(&counts))
}
