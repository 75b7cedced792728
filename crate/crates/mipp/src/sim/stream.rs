use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Address of a reproducible random stream: the stream for a given
/// (master_seed, stream_id) pair is a pure function of the pair, so identical
/// addresses reproduce identical draws on every run and thread layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl StreamSeed {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        StreamSeed {
            master_seed,
            stream_id,
        }
    }

    /// Open the stream this seed addresses.
    pub fn stream(&self) -> PathStream {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        PathStream { rng }
    }
}

/// A private random stream owned by one simulated path. Draws are consumed in
/// the order the simulation requests them (depth-first inside recursive
/// sampling), which fixes the mapping from seed to path.
pub struct PathStream {
    rng: ChaCha12Rng,
}

impl PathStream {
    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Exponential holding time with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        // 1 - U lies in (0, 1], keeping ln finite.
        -(-self.rng.random::<f64>()).ln_1p() / rate
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Poisson draw by CDF inversion; exact in distribution for any mean.
    ///
    /// Means above 30 are split into independent chunks (Poisson additivity)
    /// so the sequential search stays short and the running product of pmf
    /// values never underflows.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0 && mean.is_finite());
        if mean == 0.0 {
            return 0;
        }
        if mean > 30.0 {
            let chunks = (mean / 16.0).ceil() as u64;
            let per = mean / chunks as f64;
            return (0..chunks).map(|_| self.poisson_small(per)).sum();
        }
        self.poisson_small(mean)
    }

    fn poisson_small(&mut self, mean: f64) -> u64 {
        let u = self.rng.random::<f64>();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            // Past ~40 standard deviations the remaining mass is below any
            // representable uniform; bail out rather than loop on rounding.
            if k > (mean + 40.0 * mean.sqrt() + 50.0) as u64 {
                break;
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_reproduce_draws() {
        let mut a = StreamSeed::new(42, 7).stream();
        let mut b = StreamSeed::new(42, 7).stream();
        for _ in 0..100 {
            assert_eq!(a.uniform(), b.uniform());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = StreamSeed::new(42, 0).stream();
        let mut b = StreamSeed::new(42, 1).stream();
        let same = (0..32).filter(|_| a.uniform() == b.uniform()).count();
        assert!(same < 4, "streams with different ids must decorrelate");
    }

    #[test]
    fn poisson_moments_match() {
        let mut s = StreamSeed::new(1, 0).stream();
        let n = 200_000;
        let mean_target = 3.0;
        let draws: Vec<u64> = (0..n).map(|_| s.poisson(mean_target)).collect();
        let mean = draws.iter().sum::<u64>() as f64 / n as f64;
        let var = draws
            .iter()
            .map(|&k| {
                let d = k as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        // 4 standard errors: se(mean) = sqrt(lambda/n).
        let se = (mean_target / n as f64).sqrt();
        assert!((mean - mean_target).abs() < 4.0 * se, "mean {mean}");
        assert!((var - mean_target).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn poisson_large_mean_splits_consistently() {
        let mut s = StreamSeed::new(1, 3).stream();
        let n = 50_000;
        let mean_target = 120.0;
        let mean = (0..n).map(|_| s.poisson(mean_target)).sum::<u64>() as f64 / n as f64;
        let se = (mean_target / n as f64).sqrt();
        assert!((mean - mean_target).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn exponential_mean_matches() {
        let mut s = StreamSeed::new(9, 0).stream();
        let n = 200_000;
        let rate = 2.5;
        let mean = (0..n).map(|_| s.exponential(rate)).sum::<f64>() / n as f64;
        let se = (1.0 / rate) / (n as f64).sqrt();
        assert!((mean - 1.0 / rate).abs() < 4.0 * se, "mean {mean}");
    }
}
