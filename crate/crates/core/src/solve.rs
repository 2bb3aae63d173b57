//! Desk-scale QUBO minimization.
//!
//! Both solvers keep a per-variable local field so a single bit flip costs
//! O(N) additions. Arithmetic is exact: `i128` when every reachable partial
//! sum provably fits, `BigInt` otherwise.

use std::ops::{AddAssign, Neg, SubAssign};
use std::time::Duration;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{BinaryAssignment, QuboMatrix};

/// Default variable-count cap for [`solve_exhaustive`].
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 26;

/// Hard limit: the Gray-code walk indexes assignments with a `u64`.
const EXHAUSTIVE_HARD_LIMIT: usize = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveMethod {
    Exhaustive,
    Sa,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Exhaustive => "exhaustive",
            SolveMethod::Sa => "sa",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub evaluations: u64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub assignment: BinaryAssignment,
    pub value: BigInt,
    pub method: SolveMethod,
    pub proven_optimal: bool,
    pub stats: SolveStats,
}

/// Geometric-cooling simulated annealing schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnealSchedule {
    pub initial_temperature: BigRational,
    /// Per-sweep temperature multiplier in (0, 1).
    pub cooling: BigRational,
    pub sweeps: u32,
    pub restarts: u32,
    pub seed: u64,
}

impl AnnealSchedule {
    pub const DEFAULT_SWEEPS: u32 = 1000;
    pub const DEFAULT_RESTARTS: u32 = 8;

    /// Schedule scaled to `q`: starts at the largest possible flip delta
    /// and cools to 1/4 over the sweeps, where integer deltas of 1 are
    /// rarely accepted uphill.
    pub fn for_qubo(q: &QuboMatrix, seed: u64) -> Self {
        Self::with_sweeps(q, Self::DEFAULT_SWEEPS, seed)
    }

    pub fn with_sweeps(q: &QuboMatrix, sweeps: u32, seed: u64) -> Self {
        let n = q.n_vars();
        let t0 = (0..n)
            .map(|h| (0..n).map(|r| q.get(h, r).abs()).sum::<BigInt>() + q.get(h, h).abs())
            .max()
            .unwrap_or_else(BigInt::zero)
            .max(BigInt::one());
        let t0_f = t0.to_f64().unwrap_or(f64::MAX);
        let sweeps = sweeps.max(1);
        let ratio = (0.25 / t0_f).powf(1.0 / f64::from(sweeps)).clamp(1e-6, 0.999_999);
        let scale = 1_000_000_000i64;
        let cooling = BigRational::new(BigInt::from((ratio * scale as f64).round() as i64), BigInt::from(scale));
        Self {
            initial_temperature: BigRational::from_integer(t0),
            cooling,
            sweeps,
            restarts: Self::DEFAULT_RESTARTS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.initial_temperature.is_positive() {
            return Err(Error::InvalidSchedule("initial temperature must be positive".into()));
        }
        if !self.cooling.is_positive() || self.cooling >= BigRational::one() {
            return Err(Error::InvalidSchedule("cooling factor must lie in (0, 1)".into()));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::InvalidSchedule("sweeps and restarts must be at least 1".into()));
        }
        Ok(())
    }
}

trait Coeff:
    Clone + Ord + Zero + Send + Sync + Neg<Output = Self> + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self>
{
    fn approx(&self) -> f64;
}

impl Coeff for i128 {
    fn approx(&self) -> f64 {
        *self as f64
    }
}

impl Coeff for BigInt {
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(if self.is_negative() { f64::MIN } else { f64::MAX })
    }
}

/// Coupling matrix: `w_hh = q_hh`, `w_hr = q_hr + q_rh`.
enum Couplings {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

fn couplings(q: &QuboMatrix) -> Couplings {
    let n = q.n_vars();
    let mut w = Vec::with_capacity(n * n);
    for h in 0..n {
        for r in 0..n {
            w.push(if h == r { q.get(h, h).clone() } else { q.get(h, r) + q.get(r, h) });
        }
    }
    let total: BigInt = w.iter().map(|v| v.abs()).sum();
    if total.bits() < 120 {
        Couplings::Small(w.iter().map(|v| v.to_i128().expect("bounded")).collect())
    } else {
        Couplings::Big(w)
    }
}

/// Walks assignments in place, keeping the objective and local fields current.
struct Walker<'a, T> {
    w: &'a [T],
    n: usize,
    bits: Vec<bool>,
    field: Vec<T>,
    value: T,
}

impl<'a, T: Coeff> Walker<'a, T> {
    fn new(w: &'a [T], n: usize, bits: Vec<bool>) -> Self {
        let mut field = Vec::with_capacity(n);
        let mut value = T::zero();
        for h in 0..n {
            let mut f = w[h * n + h].clone();
            for r in 0..n {
                if r != h && bits[r] {
                    f += &w[h * n + r];
                }
            }
            if bits[h] {
                value += &w[h * n + h];
                for r in h + 1..n {
                    if bits[r] {
                        value += &w[h * n + r];
                    }
                }
            }
            field.push(f);
        }
        Self { w, n, bits, field, value }
    }

    fn delta(&self, h: usize) -> T {
        if self.bits[h] {
            -self.field[h].clone()
        } else {
            self.field[h].clone()
        }
    }

    fn flip(&mut self, h: usize, delta: &T) {
        self.value += delta;
        let on = !self.bits[h];
        self.bits[h] = on;
        let row = &self.w[h * self.n..(h + 1) * self.n];
        for (r, (f, c)) in self.field.iter_mut().zip(row).enumerate() {
            if r == h {
                continue;
            }
            if on {
                *f += c;
            } else {
                *f -= c;
            }
        }
    }
}

/// `key` orders assignments lexicographically: variable 1 is the most
/// significant bit.
fn exhaustive_block<T: Coeff>(w: &[T], n: usize, fixed: usize, prefix: u64) -> (T, u64) {
    let mut bits = vec![false; n];
    let mut key = 0u64;
    for (i, b) in bits.iter_mut().enumerate().take(fixed) {
        *b = (prefix >> (fixed - 1 - i)) & 1 == 1;
        if *b {
            key |= 1 << (n - 1 - i);
        }
    }
    let mut walker = Walker::new(w, n, bits);
    let mut best = (walker.value.clone(), key);
    let free = n - fixed;
    for step in 1u64..(1u64 << free) {
        let t = step.trailing_zeros() as usize;
        let h = n - 1 - t;
        let d = walker.delta(h);
        walker.flip(h, &d);
        key ^= 1 << t;
        if walker.value < best.0 || (walker.value == best.0 && key < best.1) {
            best = (walker.value.clone(), key);
        }
    }
    best
}

fn exhaustive_search<T: Coeff>(w: &[T], n: usize) -> (T, u64) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n >= 16 {
            let fixed = 6;
            return (0u64..1 << fixed)
                .into_par_iter()
                .map(|prefix| exhaustive_block(w, n, fixed, prefix))
                .min()
                .expect("non-empty");
        }
    }
    exhaustive_block(w, n, 0, 0)
}

/// Exact global minimizer by Gray-code enumeration. Ties resolve to the
/// lexicographically smallest bit string.
pub fn solve_exhaustive(q: &QuboMatrix) -> Result<SolveResult> {
    solve_exhaustive_capped(q, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn solve_exhaustive_capped(q: &QuboMatrix, cap: usize) -> Result<SolveResult> {
    let n = q.n_vars();
    if n > cap.min(EXHAUSTIVE_HARD_LIMIT) {
        return Err(Error::OverCap {
            n_vars: n,
            cap: cap.min(EXHAUSTIVE_HARD_LIMIT),
        });
    }
    let timer = Stopwatch::start();
    let key = match couplings(q) {
        Couplings::Small(w) => exhaustive_search(&w, n).1,
        Couplings::Big(w) => exhaustive_search(&w, n).1,
    };
    let assignment = BinaryAssignment((0..n).map(|i| (key >> (n - 1 - i)) & 1 == 1).collect());
    let value = q.evaluate(&assignment)?;
    Ok(SolveResult {
        assignment,
        value,
        method: SolveMethod::Exhaustive,
        proven_optimal: true,
        stats: SolveStats {
            evaluations: 1u64 << n,
            wall_time: timer.elapsed(),
        },
    })
}

/// Change in `vᵀQv` when bit `h` (1-based) flips.
pub fn flip_delta(q: &QuboMatrix, v: &BinaryAssignment, h: usize) -> Result<BigInt> {
    let n = q.n_vars();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    if h == 0 || h > n {
        return Err(Error::IndexOutOfRange(format!("variable {h} not in 1..={n}")));
    }
    let h = h - 1;
    let mut field = q.get(h, h).clone();
    for r in (0..n).filter(|&r| r != h && v.0[r]) {
        field += q.get(h, r) + q.get(r, h);
    }
    Ok(if v.0[h] { -field } else { field })
}

fn anneal_restart<T: Coeff>(w: &[T], n: usize, t0: f64, cooling: f64, sweeps: u32, seed: u64) -> (T, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..n).map(|_| rng.gen::<bool>()).collect();
    let mut walker = Walker::new(w, n, bits);
    let mut best = (walker.value.clone(), walker.bits.clone());
    let zero = T::zero();
    let mut temp = t0;
    for _ in 0..sweeps {
        for h in 0..n {
            let d = walker.delta(h);
            let accept = d <= zero || rng.gen::<f64>() < (-d.approx() / temp).exp();
            if !accept {
                continue;
            }
            walker.flip(h, &d);
            if walker.value < best.0 || (walker.value == best.0 && walker.bits < best.1) {
                best = (walker.value.clone(), walker.bits.clone());
            }
        }
        temp *= cooling;
    }
    best
}

fn anneal<T: Coeff>(w: &[T], n: usize, s: &AnnealSchedule) -> Vec<bool> {
    let t0 = s.initial_temperature.to_f64().unwrap_or(f64::MAX);
    let cooling = s.cooling.to_f64().unwrap_or(0.5);
    let run = |r: u32| anneal_restart(w, n, t0, cooling, s.sweeps, s.seed.wrapping_add(u64::from(r)));
    #[cfg(feature = "parallel")]
    let results: Vec<(T, Vec<bool>)> = {
        use rayon::prelude::*;
        (0..s.restarts).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(T, Vec<bool>)> = (0..s.restarts).map(run).collect();
    results.into_iter().min().expect("restarts >= 1").1
}

/// Simulated annealing. Deterministic for a given schedule; restart `r`
/// uses seed `seed + r`. The reported value is recomputed exactly.
pub fn solve_sa(q: &QuboMatrix, schedule: &AnnealSchedule) -> Result<SolveResult> {
    schedule.validate()?;
    let n = q.n_vars();
    let timer = Stopwatch::start();
    let bits = if n == 0 {
        Vec::new()
    } else {
        match couplings(q) {
            Couplings::Small(w) => anneal(&w, n, schedule),
            Couplings::Big(w) => anneal(&w, n, schedule),
        }
    };
    let assignment = BinaryAssignment(bits);
    let value = q.evaluate(&assignment)?;
    Ok(SolveResult {
        assignment,
        value,
        method: SolveMethod::Sa,
        proven_optimal: false,
        stats: SolveStats {
            evaluations: u64::from(schedule.restarts) * u64::from(schedule.sweeps) * n as u64,
            wall_time: timer.elapsed(),
        },
    })
}

// std::time::Instant panics on wasm32-unknown-unknown.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Stopwatch();
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed();
        #[cfg(target_arch = "wasm32")]
        return Duration::ZERO;
    }
}
