//! Laguerre recurrence against the explicit coefficient sum in exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use oscspec::specialfn::laguerre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `Σ_i (−1)^i C(k+m, k−i) x^i / i!`.
fn exact(k: u64, m: u64, x: f64) -> f64 {
    let xr = BigRational::from_float(x).unwrap();
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    let mut fact = BigInt::one();
    for i in 0..=k {
        if i > 0 {
            power = power * &xr;
            fact *= BigInt::from(i);
        }
        let term = BigRational::from_integer(binomial(k + m, k - i)) * &power / BigRational::from_integer(fact.clone());
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.to_f64().unwrap()
}

#[test]
fn recurrence_matches_exact_rational_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for k in 0..=20u64 {
        for m in 0..=20u64 {
            for _ in 0..6 {
                let x: f64 = rng.gen_range(-50.0..=50.0);
                let want = exact(k, m, x);
                let got = laguerre(k as usize, m as usize, x);
                let err = (got - want).abs() / want.abs();
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    assert!(checked > 2000);
    assert!(worst <= 1e-10, "worst relative error {worst:e}");
}

#[test]
fn low_degrees_exact() {
    for &x in &[-3.5, 0.0, 0.25, 7.0] {
        for m in 0..5 {
            assert_eq!(laguerre(0, m, x), 1.0);
            assert_eq!(laguerre(1, m, x), exact(1, m as u64, x));
        }
    }
}
