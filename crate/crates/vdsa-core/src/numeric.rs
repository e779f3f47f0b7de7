//! Numeric helpers: compensated summation and binomial mass vectors.

/// Kahan compensated accumulator.
///
/// The selection bounds sum products of many binomial masses; cumulative
/// sample counts can reach several hundred after long runs, so plain f64
/// accumulation would eat into the 1e-12 mass-sum invariants.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Probability masses of Binomial(n, p) for k = 0..=n.
///
/// Masses are computed in log space with a running log-binomial-coefficient
/// recurrence and exponentiated at the end, so n in the hundreds does not
/// overflow or lose the tails.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&p), "p={p} outside [0,1]");
    let len = (n + 1) as usize;
    if p == 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return v;
    }
    if p == 1.0 {
        let mut v = vec![0.0; len];
        v[len - 1] = 1.0;
        return v;
    }
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut masses = Vec::with_capacity(len);
    let mut ln_coeff = 0.0; // ln C(n, 0)
    for k in 0..=n {
        let ln_mass = ln_coeff + k as f64 * ln_p + (n - k) as f64 * ln_q;
        masses.push(ln_mass.exp());
        if k < n {
            // ln C(n, k+1) = ln C(n, k) + ln(n-k) - ln(k+1)
            ln_coeff += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    masses
}

/// Number of weak compositions of `total` into `parts` parts,
/// i.e. C(total + parts - 1, parts - 1), saturating at u128::MAX.
pub fn composition_count(total: u64, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    binomial_coefficient(total as u128 + parts as u128 - 1, parts as u128 - 1)
}

fn binomial_coefficient(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = match result.checked_mul(n - i) {
            Some(r) => r / (i + 1),
            None => return u128::MAX,
        };
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_coin_two_trials() {
        let pmf = binomial_pmf(2, 0.5);
        assert!((pmf[0] - 0.25).abs() < 1e-15);
        assert!((pmf[1] - 0.5).abs() < 1e-15);
        assert!((pmf[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degenerate_probabilities() {
        assert_eq!(binomial_pmf(5, 0.0)[0], 1.0);
        assert_eq!(binomial_pmf(5, 1.0)[5], 1.0);
    }

    #[test]
    fn masses_sum_to_one_for_large_n() {
        for &(n, p) in &[(300u64, 0.2), (500, 0.9), (150, 0.01)] {
            let mut sum = KahanSum::new();
            for m in binomial_pmf(n, p) {
                sum.add(m);
            }
            assert!(
                (sum.value() - 1.0).abs() < 1e-12,
                "n={n} p={p} sum={}",
                sum.value()
            );
        }
    }

    #[test]
    fn composition_counts() {
        assert_eq!(composition_count(2, 4), 10);
        assert_eq!(composition_count(0, 3), 1);
        assert_eq!(composition_count(8, 1), 1);
        assert_eq!(composition_count(152, 4), 608_685);
    }
}
