//! The Q-matrix of an augmented lattice instance `(A|x̂)`.
//!
//! Each shifted coordinate `z_i + 2^m` is written in binary with `m + 1`
//! bits; bit `j` of coordinate `i` (1-based) lives at variable
//! `h = j·n + i`. The quadratic form `vᵀQv` plus [`QuboMatrix::constant`]
//! equals the squared distance of the decoded lattice point to `x̂`.

mod format;

pub use format::{export_json, export_qubo, export_qubo_lines, import_json, import_qubo, import_qubo_lines, QuboFormat};

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::ReducedInstance;
use crate::linalg;

/// Sign convention for the linear target term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SignMode {
    /// Expansion of `‖A(Bp − u) − x̂‖²`; decodes `z = Bp − u`.
    #[default]
    Derived,
    /// The `+2^{j+1} Σ x_t a_ti` diagonal term as printed; decodes `z = u − Bp`.
    Verbatim,
}

impl SignMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SignMode::Derived => "derived",
            SignMode::Verbatim => "verbatim",
        }
    }
}

impl std::str::FromStr for SignMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "derived" => Ok(SignMode::Derived),
            "verbatim" => Ok(SignMode::Verbatim),
            _ => Err(format!("unknown sign mode '{s}' (expected derived|verbatim)")),
        }
    }
}

/// Dimensions of the binary encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingParams {
    pub n: usize,
    pub m: u32,
}

impl EncodingParams {
    pub fn new(n: usize, m: u32) -> Self {
        Self { n, m }
    }

    /// Number of binary variables, `n(m+1)`.
    pub fn n_vars(&self) -> usize {
        self.n * (self.m as usize + 1)
    }

    /// The shift vector `u = (2^m, …, 2^m)`.
    pub fn u(&self) -> Vec<BigInt> {
        vec![pow2(self.m); self.n]
    }

    /// Bit weights `p = (1, 2, …, 2^m)`.
    pub fn p(&self) -> Vec<BigInt> {
        (0..=self.m).map(pow2).collect()
    }

    /// 1-based variable index of bit `j` of coordinate `i`.
    pub fn index_of(&self, i: usize, j: u32) -> Result<usize> {
        if j > self.m {
            return Err(Error::IndexOutOfRange(format!("bit {j} > m = {}", self.m)));
        }
        index_of(i, j as usize, self.n)
    }

    /// Inverse of [`index_of`]: `(i, j)` for a 1-based variable index.
    pub fn coords_of(&self, h: usize) -> Result<(usize, u32)> {
        if h == 0 || h > self.n_vars() {
            return Err(Error::IndexOutOfRange(format!("variable {h} not in 1..={}", self.n_vars())));
        }
        let k = h - 1;
        Ok((k % self.n + 1, (k / self.n) as u32))
    }
}

pub(crate) fn pow2(e: u32) -> BigInt {
    BigInt::from(1) << e
}

/// `h = j·n + i` for `1 ≤ i ≤ n`.
pub fn index_of(i: usize, j: usize, n: usize) -> Result<usize> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange(format!("column {i} not in 1..={n}")));
    }
    Ok(j * n + i)
}

/// Upper bound `3·2^{2m+1}·n²·b²` on every Q-matrix entry.
pub fn coefficient_bound(n: usize, m: u32, b: &BigInt) -> BigInt {
    BigInt::from(3 * n * n) * pow2(2 * m + 1) * b * b
}

/// Assignment of the binary variables; index 0 holds variable 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryAssignment(pub Vec<bool>);

impl BinaryAssignment {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    line: 1,
                    msg: format!("invalid bit '{c}'"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for BinaryAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryAssignment({self})")
    }
}

/// Symmetric integer QUBO matrix plus the additive constant dropped when
/// the squared distance is reduced to a pure quadratic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboMatrix {
    n_vars: usize,
    q: Vec<BigInt>,
    pub constant: BigInt,
    pub sign_mode: SignMode,
    /// Encoding dimensions when the matrix came from a lattice instance.
    pub params: Option<EncodingParams>,
}

impl QuboMatrix {
    /// Wraps a dense row-major matrix; it must be symmetric.
    pub fn from_dense(
        n_vars: usize,
        q: Vec<BigInt>,
        constant: BigInt,
        sign_mode: SignMode,
        params: Option<EncodingParams>,
    ) -> Result<Self> {
        if q.len() != n_vars * n_vars {
            return Err(Error::DimensionMismatch {
                expected: n_vars * n_vars,
                found: q.len(),
            });
        }
        for h in 0..n_vars {
            for r in h + 1..n_vars {
                if q[h * n_vars + r] != q[r * n_vars + h] {
                    return Err(Error::InvalidInstance(format!(
                        "QUBO matrix not symmetric at ({}, {})",
                        h + 1,
                        r + 1
                    )));
                }
            }
        }
        if let Some(p) = &params {
            if p.n_vars() != n_vars {
                return Err(Error::DimensionMismatch {
                    expected: p.n_vars(),
                    found: n_vars,
                });
            }
        }
        Ok(Self {
            n_vars,
            q,
            constant,
            sign_mode,
            params,
        })
    }

    pub fn zeros(n_vars: usize) -> Self {
        Self {
            n_vars,
            q: vec![BigInt::zero(); n_vars * n_vars],
            constant: BigInt::zero(),
            sign_mode: SignMode::Derived,
            params: None,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Entry at 0-based `(h, r)`.
    pub fn get(&self, h: usize, r: usize) -> &BigInt {
        &self.q[h * self.n_vars + r]
    }

    /// Sets `(h, r)` and `(r, h)`.
    pub fn set_sym(&mut self, h: usize, r: usize, v: BigInt) {
        self.q[r * self.n_vars + h] = v.clone();
        self.q[h * self.n_vars + r] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.q
    }

    /// `max |q_hr|`.
    pub fn size(&self) -> BigInt {
        self.q.iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero)
    }

    /// `vᵀQv` with the full symmetric convention.
    pub fn evaluate(&self, v: &BinaryAssignment) -> Result<BigInt> {
        if v.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                found: v.len(),
            });
        }
        let on: Vec<usize> = (0..self.n_vars).filter(|&h| v.0[h]).collect();
        let mut total = BigInt::zero();
        for &h in &on {
            for &r in &on {
                total += self.get(h, r);
            }
        }
        Ok(total)
    }
}

/// Builds the Q-matrix for a reduced instance.
pub fn build_qubo(red: &ReducedInstance, params: &EncodingParams, sign: SignMode) -> Result<QuboMatrix> {
    let n = red.dim();
    if params.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: params.n,
        });
    }
    let a = red.basis();
    let m = params.m;
    let g = linalg::gram(a);
    // Σ_t G_ti = Σ_t Σ_s a_st a_si
    let g_colsum: Vec<BigInt> = (0..n).map(|i| (0..n).map(|t| g.get(t, i)).sum()).collect();
    // (Aᵀx̂)_i = Σ_t x̂_t a_ti
    let atx = a.transpose().mul_vec(&red.x_hat)?;

    let n_vars = params.n_vars();
    let mut q = QuboMatrix::zeros(n_vars);
    q.sign_mode = sign;
    q.params = Some(params.clone());
    for j in 0..=m {
        for i in 0..n {
            let h = j as usize * n + i;
            for l in j..=m {
                for k in 0..n {
                    let r = l as usize * n + k;
                    if r <= h {
                        continue;
                    }
                    q.set_sym(h, r, pow2(j + l) * g.get(i, k));
                }
            }
            let target = pow2(j + 1) * &atx[i];
            let mut diag = pow2(2 * j) * g.get(i, i) - pow2(m + j + 1) * &g_colsum[i];
            match sign {
                SignMode::Derived => diag -= target,
                SignMode::Verbatim => diag += target,
            }
            q.set_sym(h, h, diag);
        }
    }

    let g_total: BigInt = g.entries().iter().sum();
    let atx_total: BigInt = atx.iter().sum();
    let cross = pow2(m + 1) * atx_total;
    let base = pow2(2 * m) * g_total + linalg::norm_sq(&red.x_hat);
    q.constant = match sign {
        SignMode::Derived => base + cross,
        SignMode::Verbatim => base - cross,
    };
    Ok(q)
}
