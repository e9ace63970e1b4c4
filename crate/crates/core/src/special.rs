//! Laguerre polynomials with complex argument, log-factorials and binomial
//! coefficients.
//!
//! Associated Laguerre polynomials are evaluated with the three-term
//! recurrence in degree,
//!
//! ```text
//! m L_m^k(z) = (2m - 1 + k - z) L_{m-1}^k(z) - (m - 1 + k) L_{m-2}^k(z),
//! L_0^k = 1,  L_1^k = 1 + k - z.
//! ```

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest polynomial degree accepted by the checked Laguerre entry points.
pub const MAX_DEGREE: usize = 10_000;

const LOG_FACTORIAL_TABLE: usize = 2048;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE);
        let mut acc = 0.0_f64;
        table.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln(n!)` by cumulative summation of `ln k`.
pub fn log_factorial(n: usize) -> f64 {
    let table = log_factorial_table();
    if n < table.len() {
        return table[n];
    }
    let mut acc = table[table.len() - 1];
    for k in table.len()..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// Binomial coefficient `C(n, k)`; zero outside `0 <= k <= n`.
///
/// Exact for `n <= 60` (integer arithmetic), log-factorial based above.
pub fn binomial(n: usize, k: i64) -> f64 {
    if k < 0 || k as u64 > n as u64 {
        return 0.0;
    }
    let k = (k as usize).min(n - k as usize);
    if n <= 60 {
        let mut acc: u128 = 1;
        for i in 0..k {
            // acc * (n - i) is divisible by (i + 1) at every step
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        return acc as f64;
    }
    (log_factorial(n) - log_factorial(k) - log_factorial(n - k))
        .exp()
        .round()
}

fn check_degree(m: usize) -> Result<()> {
    if m > MAX_DEGREE {
        Err(Error::DegreeTooLarge(m))
    } else {
        Ok(())
    }
}

/// Laguerre polynomial `L_m(z)`.
pub fn laguerre(m: usize, z: Complex64) -> Result<Complex64> {
    assoc_laguerre(m, 0, z)
}

/// Associated Laguerre polynomial `L_m^k(z)` for complex `z`.
pub fn assoc_laguerre(m: usize, k: usize, z: Complex64) -> Result<Complex64> {
    check_degree(m)?;
    Ok(assoc_laguerre_complex(m, k, z))
}

/// Real-argument path for `L_m^k(x)`. Agrees with [`assoc_laguerre`] to
/// rounding, not bit-for-bit.
pub fn assoc_laguerre_real(m: usize, k: usize, x: f64) -> Result<f64> {
    check_degree(m)?;
    Ok(assoc_laguerre_f64(m, k, x))
}

pub(crate) fn assoc_laguerre_complex(m: usize, k: usize, z: Complex64) -> Complex64 {
    let kf = k as f64;
    let mut prev = Complex64::new(1.0, 0.0);
    if m == 0 {
        return prev;
    }
    let mut cur = Complex64::new(1.0 + kf, 0.0) - z;
    for j in 2..=m {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 + kf - z) * cur - (jf - 1.0 + kf) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn assoc_laguerre_f64(m: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for j in 2..=m {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 + kf - x) * cur - (jf - 1.0 + kf) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Explicit power series sum_j (-1)^j C(m+k, m-j) z^j / j!.
    fn series(m: usize, k: usize, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zpow = Complex64::new(1.0, 0.0);
        let mut jfact = 1.0;
        for j in 0..=m {
            if j > 0 {
                zpow *= z;
                jfact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(m + k, (m - j) as i64) * zpow / jfact;
        }
        acc
    }

    #[test]
    fn low_orders() {
        assert_eq!(laguerre(0, c(3.7, -1.2)).unwrap(), c(1.0, 0.0));
        assert_eq!(laguerre(1, c(-1.0, 0.0)).unwrap(), c(2.0, 0.0));
        let z = c(-1.0, 0.0);
        let l5 = laguerre(5, z).unwrap();
        assert!((l5 - series(5, 0, z)).norm() < 1e-13);
        // 1 + 5 + 10/2 + 10/6 + 5/24 + 1/120
        assert!((l5.re - 12.883_333_333_333_333).abs() < 1e-12);
    }

    #[test]
    fn associated_values() {
        for m in 0..15 {
            for k in 0..6 {
                let v = assoc_laguerre(m, k, c(0.0, 0.0)).unwrap();
                assert_eq!(v.re, binomial(m + k, m as i64), "m={m} k={k}");
            }
        }
        let z = c(-1.0, 0.0);
        let v = assoc_laguerre(2, 3, z).unwrap();
        assert!((v - series(2, 3, z)).norm() < 1e-12);
        // x^2/2 - 5x + 10 at x = -1
        assert!((v.re - 15.5).abs() < 1e-12);
        for m in 0..12 {
            let z = c(0.3 * m as f64 - 1.0, 0.7);
            assert_eq!(assoc_laguerre(m, 0, z).unwrap(), laguerre(m, z).unwrap());
        }
    }

    #[test]
    fn real_path_matches_complex() {
        for m in 0..25 {
            for k in 0..8 {
                for &x in &[-3.0, -0.5, 0.0, 0.25, 4.0, 17.0] {
                    let r = assoc_laguerre_real(m, k, x).unwrap();
                    let z = assoc_laguerre(m, k, c(x, 0.0)).unwrap();
                    assert!((r - z.re).abs() <= 1e-12 * r.abs().max(1.0));
                    assert_eq!(z.im, 0.0);
                }
            }
        }
    }

    #[test]
    fn degree_cap() {
        assert!(matches!(
            laguerre(MAX_DEGREE + 1, c(0.0, 0.0)),
            Err(Error::DegreeTooLarge(_))
        ));
        assert!(laguerre(MAX_DEGREE, c(0.0, 0.0)).is_ok());
    }

    #[test]
    fn log_factorials() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        let exact = (2_432_902_008_176_640_000_u64 as f64).ln();
        assert!((log_factorial(20) - exact).abs() < 1e-12 * exact);
        // past the cached table
        let n = LOG_FACTORIAL_TABLE + 10;
        let direct: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        assert!((log_factorial(n) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(5, -1), 0.0);
        assert_eq!(binomial(5, 6), 0.0);
        // additive Pascal triangle
        let mut row = vec![1u64];
        for _ in 0..40 {
            let mut next = vec![1u64; row.len() + 1];
            for i in 1..row.len() {
                next[i] = row[i - 1] + row[i];
            }
            row = next;
        }
        assert_eq!(binomial(40, 20), row[20] as f64);
        assert_eq!(binomial(40, 20), 137_846_528_820.0);
        let big = binomial(70, 3);
        assert_eq!(big, 54_740.0);
    }

    #[test]
    fn laguerre_positive_on_negative_axis() {
        for m in 0..=30 {
            for i in 0..50 {
                let nu = 0.2 * i as f64;
                assert!(assoc_laguerre_f64(m, 0, -nu) > 0.0);
            }
        }
    }
}
