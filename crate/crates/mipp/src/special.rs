//! Small numeric helpers shared across modules.

/// ln(k!) for integer k, built by compensated summation of ln terms.
///
/// The table is grown on demand; lookups are O(1) afterwards. Accuracy is a few
/// ulps even at k ~ 10^4 thanks to Kahan accumulation.
pub(crate) struct LnFactorial {
    table: Vec<f64>,
    comp: f64,
}

impl LnFactorial {
    pub fn new() -> Self {
        LnFactorial {
            table: vec![0.0, 0.0],
            comp: 0.0,
        }
    }

    pub fn get(&mut self, k: usize) -> f64 {
        while self.table.len() <= k {
            let next = self.table.len() as f64;
            let last = *self.table.last().unwrap();
            // Kahan step: accumulate ln(next) into (last, comp).
            let y = next.ln() - self.comp;
            let t = last + y;
            self.comp = (t - last) - y;
            self.table.push(t);
        }
        self.table[k]
    }
}

/// log(Σ exp(l_i)) computed stably; returns -inf for an empty slice.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|&l| (l - m).exp()).sum();
    m + s.ln()
}

/// 1 - base^p evaluated without cancellation for base near 1.
pub(crate) fn one_minus_pow(base: f64, p: f64) -> f64 {
    -f64::exp_m1(p * base.ln())
}
