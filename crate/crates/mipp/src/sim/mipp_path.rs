use super::stream::PathStream;
use crate::dist::MippParams;
use crate::{Error, Result};

/// One simulated MIPP trajectory: jump epochs with their (positive) sizes.
/// Base-layer events whose iterated increment is zero are not jumps and are
/// not recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub jump_times: Vec<f64>,
    pub jump_sizes: Vec<u64>,
    pub t_end: f64,
}

impl Path {
    /// Value V_t at the horizon (sum of all recorded jump sizes).
    pub fn terminal_value(&self) -> u64 {
        self.jump_sizes.iter().sum()
    }

    /// Value V_t at an arbitrary time within the horizon.
    pub fn value_at(&self, t: f64) -> u64 {
        self.jump_times
            .iter()
            .zip(&self.jump_sizes)
            .take_while(|(&jt, _)| jt <= t)
            .map(|(_, &s)| s)
            .sum()
    }
}

/// One draw of V_1 at the given depth, via the compound representation: a
/// depth-d value is a sum of Poisson(λ)-many independent depth-(d−1) draws,
/// with depth 1 a plain Poisson(λ) variate. Recursion consumes the stream
/// depth-first, which pins the draw order for reproducibility.
pub fn sample_v1(lambda: f64, depth: u32, stream: &mut PathStream) -> u64 {
    debug_assert!(depth >= 1);
    if depth == 1 {
        return stream.poisson(lambda);
    }
    let count = stream.poisson(lambda);
    (0..count)
        .map(|_| sample_v1(lambda, depth - 1, stream))
        .sum()
}

/// Simulate V over [0, t_end]: base-layer epochs arrive at rate λ and each
/// carries an increment drawn by `sample_v1` at depth n−1 (depth 1 increments
/// are the base events themselves). Only strictly positive increments are
/// recorded as jumps.
pub fn simulate_mipp(params: &MippParams, t_end: f64, stream: &mut PathStream) -> Result<Path> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::Domain(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let lambda = params.lambda();
    let mut jump_times = Vec::new();
    let mut jump_sizes = Vec::new();
    let mut t = stream.exponential(lambda);
    while t <= t_end {
        let size = if params.n() == 1 {
            1
        } else {
            sample_v1(lambda, params.n() - 1, stream)
        };
        if size > 0 {
            jump_times.push(t);
            jump_sizes.push(size);
        }
        t += stream.exponential(lambda);
    }
    Ok(Path {
        jump_times,
        jump_sizes,
        t_end,
    })
}
