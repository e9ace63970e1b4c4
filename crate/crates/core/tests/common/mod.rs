//! Test-only oracles shared between integration targets.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact `(re, im)` pair.
#[derive(Clone)]
struct ExactComplex(BigRational, BigRational);

impl ExactComplex {
    fn mul(&self, o: &Self) -> Self {
        ExactComplex(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.0.to_f64().unwrap(), self.1.to_f64().unwrap())
    }
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `sum_j (-1)^j C(m+k, m-j) z^j / j!` exactly, plus `sum_j |term_j|` in f64.
fn series(m: u64, k: u64, z: &ExactComplex) -> (Complex64, f64) {
    let mut re = BigRational::zero();
    let mut im = BigRational::zero();
    let mut zpow = ExactComplex(BigRational::one(), BigRational::zero());
    let mut jfact = BigInt::one();
    let mut scale = 0.0;
    for j in 0..=m {
        if j > 0 {
            zpow = zpow.mul(z);
            jfact *= BigInt::from(j);
        }
        let c = BigRational::new(binomial(m + k, m - j), jfact.clone());
        let c = if j % 2 == 0 { c } else { -c };
        let t = ExactComplex(&c * &zpow.0, &c * &zpow.1);
        scale += t.to_c64().norm();
        re += t.0;
        im += t.1;
    }
    (ExactComplex(re, im).to_c64(), scale)
}

/// Worst relative error of the recurrence over `m <= 30`, `k <= 10` and
/// `z = (a + ib)/2` for `a, b` in `-20..=20` step 5, with its location, and
/// the worst error measured against the summed term magnitudes.
pub fn laguerre_grid_errors() -> (f64, (u64, u64, f64, f64), f64) {
    let mut worst_rel = 0.0_f64;
    let mut worst_scaled = 0.0_f64;
    let mut worst_at = (0, 0, 0.0, 0.0);
    for a in (-20..=20).step_by(5) {
        for b in (-20..=20).step_by(5) {
            let z = ExactComplex(ratio(a, 2), ratio(b, 2));
            let zf = z.to_c64();
            for m in 0..=30u64 {
                for k in 0..=10u64 {
                    let (exact, scale) = series(m, k, &z);
                    let got = qkerr::special::assoc_laguerre(m as usize, k as usize, zf).unwrap();
                    let err = (got - exact).norm();
                    let rel = err / exact.norm();
                    if rel > worst_rel {
                        worst_rel = rel;
                        worst_at = (m, k, zf.re, zf.im);
                    }
                    worst_scaled = worst_scaled.max(err / scale);
                }
            }
        }
    }
    (worst_rel, worst_at, worst_scaled)
}
