#![allow(dead_code)]

use cvp_qubo::{CvpInstance, IntMatrix};
use num_bigint::BigInt;
use rand::Rng;

/// Random nonsingular `n×n` instance with entries in `[lo, hi]` and a
/// target with entries in `[-target, target]`.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64, target: i64) -> CvpInstance {
    loop {
        let a: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(lo..=hi)).collect()).collect();
        let x: Vec<i64> = (0..n).map(|_| rng.gen_range(-target..=target)).collect();
        if let Ok(inst) = CvpInstance::from_i64(&a, &x) {
            return inst;
        }
    }
}

pub fn random_diagonal<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> IntMatrix {
    let d: Vec<i64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    IntMatrix::diagonal(&d)
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
