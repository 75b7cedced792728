/// Modified Bessel function of the first kind I₁(z) for z ≥ 0.
///
/// Ascending series Σ_m (z/2)^{2m+1} / (m!(m+1)!) for z ≤ 15 (all terms
/// positive, no cancellation), asymptotic expansion
/// e^z/√(2πz) · (1 − 3/(8z) − 15/(128z²) − …) beyond, truncated at its
/// smallest term. Negative arguments never arise here (the kernel evaluates
/// I₁ at 2√(δλx)); they are answered by odd symmetry for completeness.
pub fn bessel_i1(z: f64) -> f64 {
    if z < 0.0 {
        return -bessel_i1(-z);
    }
    if z == 0.0 {
        return 0.0;
    }
    if z <= 15.0 {
        // term_m = (z/2)^{2m+1} / (m! (m+1)!); term_{m+1} = term_m (z/2)^2 / ((m+1)(m+2)).
        let half = 0.5 * z;
        let q = half * half;
        let mut term = half;
        let mut sum = term;
        let mut m = 0.0;
        loop {
            term *= q / ((m + 1.0) * (m + 2.0));
            sum += term;
            m += 1.0;
            if term < sum * f64::EPSILON {
                return sum;
            }
        }
    }
    // Asymptotic tail with signed terms t_0 = 1,
    // t_k = t_{k-1} ((2k-1)^2 - 4) / (8kz), summed while they shrink
    // (optimal truncation at the smallest term).
    let prefactor = z.exp() / (2.0 * std::f64::consts::PI * z).sqrt();
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0;
    loop {
        let next = term * ((2.0 * k - 1.0) * (2.0 * k - 1.0) - 4.0) / (8.0 * k * z);
        if next.abs() >= term.abs() {
            break;
        }
        sum += next;
        if next.abs() < sum.abs() * f64::EPSILON {
            break;
        }
        term = next;
        k += 1.0;
    }
    prefactor * sum
}
