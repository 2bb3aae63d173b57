//! CVP instances, translation into the fundamental parallelepiped, and the
//! bounds that fix the encoding bit-width.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix, RationalVector};

/// A closest vector problem: basis `A` (columns generate the lattice) and
/// an integer target `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpInstance {
    a: IntMatrix,
    x: Vec<BigInt>,
    det: BigInt,
    b: BigInt,
}

impl CvpInstance {
    pub fn new(a: IntMatrix, x: Vec<BigInt>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if x.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: x.len(),
            });
        }
        let det = linalg::det_exact(&a)?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let b = max_abs_entry(&a);
        Ok(Self { a, x, det, b })
    }

    pub fn from_i64(a: &[Vec<i64>], x: &[i64]) -> Result<Self> {
        Self::new(
            IntMatrix::from_rows(a)?,
            x.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.a
    }

    pub fn target(&self) -> &[BigInt] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// Largest absolute entry of the basis.
    pub fn max_entry(&self) -> &BigInt {
        &self.b
    }

    /// Same basis, different target.
    pub fn with_target(&self, x: Vec<BigInt>) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(Self {
            x,
            ..self.clone()
        })
    }
}

/// The instance with its target moved into `{A t : t ∈ [0,1)ⁿ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedInstance {
    pub base: CvpInstance,
    pub x_hat: Vec<BigInt>,
    pub lambda0: Vec<BigInt>,
    pub floor_coords: Vec<BigInt>,
}

impl ReducedInstance {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn basis(&self) -> &IntMatrix {
        self.base.basis()
    }
}

pub fn reduce_to_parallelepiped(inst: &CvpInstance) -> Result<ReducedInstance> {
    let coords = linalg::solve_exact(inst.basis(), inst.target())?;
    let floor_coords = coords.floor();
    let lambda0 = inst.basis().mul_vec(&floor_coords)?;
    let x_hat = inst
        .target()
        .iter()
        .zip(&lambda0)
        .map(|(x, l)| x - l)
        .collect();
    Ok(ReducedInstance {
        base: inst.clone(),
        x_hat,
        lambda0,
        floor_coords,
    })
}

/// Coordinates of `v` in the basis, as exact rationals.
pub fn basis_coords(a: &IntMatrix, v: &[BigInt]) -> Result<RationalVector> {
    linalg::solve_exact(a, v)
}

pub fn max_abs_entry(a: &IntMatrix) -> BigInt {
    a.entries()
        .iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}

/// Squared condition-number upper bound `(4/det²)·(‖A‖_F²/n)ⁿ`.
pub fn kappa_bound_sq(a: &IntMatrix) -> Result<BigRational> {
    let det = linalg::det_exact(a)?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let n = a.rows();
    let frob = BigRational::new(linalg::frobenius_sq(a), BigInt::from(n));
    let four = BigRational::from_integer(BigInt::from(4));
    Ok(four / BigRational::from_integer(&det * &det) * Pow::pow(frob, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BoundMode {
    /// `m = ⌈n(log₂ n + log₂ b)⌉`, valid for n ≥ 3.
    Paper,
    /// Least `m` with `2^m` above the feasible-vector norm bound.
    #[default]
    Tight,
}

impl BoundMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMode::Paper => "paper",
            BoundMode::Tight => "tight",
        }
    }
}

impl std::str::FromStr for BoundMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(BoundMode::Paper),
            "tight" => Ok(BoundMode::Tight),
            _ => Err(format!("unknown bound mode '{s}' (expected paper|tight)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub kappa_sq_upper: BigRational,
    /// Rational upper bound on `κ̄`, exact when `κ̄²` is a rational square.
    pub kappa_upper: BigRational,
    pub z_norm_sq_upper: BigRational,
    pub m_paper: Option<u32>,
    pub m_tight: u32,
    pub mode_used: BoundMode,
}

impl BoundReport {
    pub fn m(&self) -> u32 {
        match self.mode_used {
            BoundMode::Paper => self.m_paper.expect("paper mode always carries m_paper"),
            BoundMode::Tight => self.m_tight,
        }
    }
}

/// Least `m ≥ 0` with `2^m ≥ bound`.
pub fn ceil_log2(bound: &BigInt) -> u32 {
    if *bound <= BigInt::one() {
        return 0;
    }
    (bound - 1u32).bits() as u32
}

/// Least `m ≥ 0` with `4^m ≥ bound` for a rational bound.
fn ceil_log4(bound: &BigRational) -> u32 {
    let mut m = 0u32;
    let mut p = BigRational::one();
    let four = BigRational::from_integer(BigInt::from(4));
    while p < *bound {
        p *= &four;
        m += 1;
    }
    m
}

/// `m = ⌈n·(log₂ n + log₂ b)⌉ = ⌈log₂ (nb)ⁿ⌉`.
pub fn paper_bits(n: usize, b: &BigInt) -> u32 {
    let nb = BigInt::from(n) * b;
    ceil_log2(&Pow::pow(nb, n))
}

/// Rational `r ≥ √k`; exact when `k` is a square of a rational.
fn sqrt_upper(k: &BigRational) -> BigRational {
    let (num, den) = (k.numer(), k.denom());
    let (sn, sd) = (num.sqrt(), den.sqrt());
    if &sn * &sn == *num && &sd * &sd == *den {
        return BigRational::new(sn, sd);
    }
    let scale = BigInt::one() << 64u32;
    let scaled = k * BigRational::from_integer(&scale * &scale);
    BigRational::new(linalg::ceil_sqrt(&scaled), scale)
}

pub fn encoding_bits(inst: &CvpInstance, mode: BoundMode) -> Result<BoundReport> {
    let n = inst.dim();
    if mode == BoundMode::Paper && n < 3 {
        return Err(Error::UnsupportedMode { n });
    }
    let kappa_sq_upper = kappa_bound_sq(inst.basis())?;
    let kappa_upper = sqrt_upper(&kappa_sq_upper);
    let half_plus_one = &kappa_upper / BigRational::from_integer(BigInt::from(2)) + BigRational::one();
    let z_norm_sq_upper =
        BigRational::from_integer(BigInt::from(n)) * &half_plus_one * &half_plus_one;
    // |z_i| ≤ ‖z‖, so comparing 4^m against the squared norm bound suffices.
    let m_tight = ceil_log4(&z_norm_sq_upper);
    let m_paper = (n >= 3).then(|| paper_bits(n, inst.max_entry()));
    Ok(BoundReport {
        kappa_sq_upper,
        kappa_upper,
        z_norm_sq_upper,
        m_paper,
        m_tight,
        mode_used: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn reduce_examples() {
        let inst = CvpInstance::from_i64(&[vec![1, 0], vec![0, 1]], &[5, -3]).unwrap();
        let r = reduce_to_parallelepiped(&inst).unwrap();
        assert_eq!(r.x_hat, ints(&[0, 0]));
        assert_eq!(r.lambda0, ints(&[5, -3]));

        let inst = CvpInstance::from_i64(&[vec![2, 0], vec![0, 2]], &[3, 1]).unwrap();
        let r = reduce_to_parallelepiped(&inst).unwrap();
        assert_eq!(r.floor_coords, ints(&[1, 0]));
        assert_eq!(r.lambda0, ints(&[2, 0]));
        assert_eq!(r.x_hat, ints(&[1, 1]));

        let inst = CvpInstance::from_i64(&[vec![1, 1], vec![0, 1]], &[0, 0]).unwrap();
        let r = reduce_to_parallelepiped(&inst).unwrap();
        assert_eq!(r.x_hat, ints(&[0, 0]));
        assert_eq!(r.lambda0, ints(&[0, 0]));
    }

    #[test]
    fn singular_instance_rejected() {
        let err = CvpInstance::from_i64(&[vec![1, 2], vec![2, 4]], &[0, 0]).unwrap_err();
        assert_eq!(err, Error::Singular);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_bound_sq(&IntMatrix::identity(3)).unwrap(), rat(4, 1));
        assert_eq!(kappa_bound_sq(&IntMatrix::identity(7)).unwrap(), rat(4, 1));
        assert_eq!(kappa_bound_sq(&IntMatrix::diagonal(&[1, 2])).unwrap(), rat(25, 4));
        // (4/2²)·(6/3)³
        assert_eq!(kappa_bound_sq(&IntMatrix::diagonal(&[1, 1, 2])).unwrap(), rat(8, 1));
    }

    #[test]
    fn paper_bits_examples() {
        // ⌈3·log₂3⌉ = ⌈4.754⌉ and ⌈3·(log₂3 + 1)⌉ = ⌈7.754⌉.
        assert_eq!(paper_bits(3, &BigInt::from(1)), 5);
        assert_eq!(paper_bits(3, &BigInt::from(2)), 8);
        let inst = CvpInstance::from_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], &[0, 0, 0]).unwrap();
        let rep = encoding_bits(&inst, BoundMode::Paper).unwrap();
        assert_eq!(rep.m(), 5);
    }

    #[test]
    fn paper_bits_matches_float_formula_away_from_integers() {
        for n in 3..8usize {
            for b in 1..20i64 {
                let f = n as f64 * ((n as f64).log2() + (b as f64).log2());
                if (f - f.round()).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(paper_bits(n, &BigInt::from(b)), f.ceil() as u32, "n={n} b={b}");
            }
        }
    }

    #[test]
    fn tight_identity() {
        let inst = CvpInstance::from_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]], &[0, 0, 0]).unwrap();
        let rep = encoding_bits(&inst, BoundMode::Tight).unwrap();
        assert_eq!(rep.kappa_upper, rat(2, 1));
        assert_eq!(rep.z_norm_sq_upper, rat(12, 1));
        assert_eq!(rep.m_tight, 2);
        assert_eq!(rep.m_paper, Some(5));
        assert_eq!(rep.m(), 2);
    }

    #[test]
    fn paper_mode_needs_three_dims() {
        let inst = CvpInstance::from_i64(&[vec![2]], &[1]).unwrap();
        assert_eq!(encoding_bits(&inst, BoundMode::Paper), Err(Error::UnsupportedMode { n: 1 }));
        let rep = encoding_bits(&inst, BoundMode::Tight).unwrap();
        // κ̄ = 2, ‖z‖ ≤ 2.
        assert_eq!(rep.m_tight, 1);
        assert_eq!(rep.m_paper, None);
    }

    #[test]
    fn max_abs_examples() {
        assert_eq!(max_abs_entry(&IntMatrix::identity(3)), 1.into());
        assert_eq!(max_abs_entry(&IntMatrix::from_rows(&[vec![-7, 2], vec![3, 5]]).unwrap()), 7.into());
        assert_eq!(max_abs_entry(&IntMatrix::zeros(2, 2)), 0.into());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(&BigInt::from(1)), 0);
        assert_eq!(ceil_log2(&BigInt::from(2)), 1);
        assert_eq!(ceil_log2(&BigInt::from(3)), 2);
        assert_eq!(ceil_log2(&BigInt::from(27)), 5);
        assert_eq!(ceil_log2(&BigInt::from(32)), 5);
        assert_eq!(ceil_log2(&BigInt::from(33)), 6);
    }

    #[test]
    fn sqrt_upper_bounds_irrational() {
        let k = rat(25, 4);
        assert_eq!(sqrt_upper(&k), rat(5, 2));
        let k = rat(2, 1);
        let s = sqrt_upper(&k);
        assert!(&s * &s >= k);
        assert!(&s * &s - &k < rat(1, 1 << 30));
    }
}
