//! Unbiased pass@k estimation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("pass@k undefined for n={n}, c={c}, k={k}")]
pub struct DomainError {
    pub n: u64,
    pub c: u64,
    pub k: u64,
}

/// Probability that at least one of k samples drawn without replacement
/// from n attempts (c of them correct) is correct:
/// 1 - C(n-c, k) / C(n, k), computed as 1 - prod_{i=0}^{k-1} (n-c-i)/(n-i)
/// to avoid large intermediate binomials.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, DomainError> {
    if c > n || k < 1 || k > n {
        return Err(DomainError { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss = 1.0_f64;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_values() {
        assert_eq!(pass_at_k(5, 0, 1).unwrap(), 0.0);
        assert_eq!(pass_at_k(5, 5, 5).unwrap(), 1.0);
        assert!((pass_at_k(5, 2, 1).unwrap() - 0.4).abs() < 1e-12);
        assert!((pass_at_k(10, 3, 5).unwrap() - (1.0 - 21.0 / 252.0)).abs() < 1e-12);
    }

    #[test]
    fn saturates_exactly_at_one_when_misses_cannot_fill_k() {
        // n - c < k forces at least one correct sample into every draw.
        assert_eq!(pass_at_k(10, 8, 5).unwrap(), 1.0);
        assert_eq!(pass_at_k(3, 3, 1).unwrap(), 1.0);
    }

    #[test]
    fn domain_violations_are_errors() {
        assert!(pass_at_k(5, 6, 1).is_err());
        assert!(pass_at_k(5, 2, 0).is_err());
        assert!(pass_at_k(5, 2, 6).is_err());
        assert!(pass_at_k(0, 0, 1).is_err());
    }

    #[test]
    fn monotone_in_c_and_k() {
        for n in 1..=10u64 {
            for k in 1..=n {
                for c in 0..n {
                    assert!(pass_at_k(n, c + 1, k).unwrap() >= pass_at_k(n, c, k).unwrap());
                }
            }
            for c in 0..=n {
                for k in 1..n {
                    assert!(pass_at_k(n, c, k + 1).unwrap() >= pass_at_k(n, c, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn bounded_in_unit_interval() {
        for n in 1..=10u64 {
            for c in 0..=n {
                for k in 1..=n {
                    let p = pass_at_k(n, c, k).unwrap();
                    assert!((0.0..=1.0).contains(&p));
                }
            }
        }
    }
}
